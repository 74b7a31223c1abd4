//! Constructors for the compatible joint count laws.
//!
//! Each constructor returns the truncated joint pmf together with the affine
//! conditional-expectation coefficients the family predicts.

use std::fmt;

use crate::dists::{nb_pmf, p_from_theta, CountDistribution};
use crate::error::{Error, Result};
use crate::joint::JointPmf;
use crate::num::{ln_beta, ln_factorial, ln_gamma, ln_nb_coeff};
use crate::series::BivariateSeries;

/// `E[X_target | rest] = Σ slopes[k] · rest[k] + intercept`, with `rest`
/// the remaining coordinates in increasing index order.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCe {
    pub target: usize,
    pub slopes: Vec<f64>,
    pub intercept: f64,
}

impl AffineCe {
    pub fn new(target: usize, slopes: Vec<f64>, intercept: f64) -> Self {
        Self {
            target,
            slopes,
            intercept,
        }
    }
}

/// A built family: pmf, predicted conditional means and the resolved parameters.
#[derive(Debug, Clone)]
pub struct Construction {
    pub descriptor: FamilyDescriptor,
    pub pmf: JointPmf<f64>,
    pub ce: Vec<AffineCe>,
}

impl Construction {
    /// Predicted coefficients for one target coordinate.
    pub fn ce_for(&self, target: usize) -> Option<&AffineCe> {
        self.ce.iter().find(|c| c.target == target)
    }
}

/// Parameters of the bivariate NB-margin family whose joint pgf is
/// `[1 + A(1-u) + B(1-v) + C(1-u)(1-v)]^{-δ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaFamilyParams {
    pub delta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
}

const IDENTITY_TOL: f64 = 1e-12;

impl ThetaFamilyParams {
    pub fn new(delta: f64, theta1: f64, theta2: f64, theta3: f64, theta4: f64) -> Result<Self> {
        let p = Self {
            delta,
            theta1,
            theta2,
            theta3,
            theta4,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let &Self {
            delta,
            theta1,
            theta2,
            theta3,
            theta4,
        } = self;
        let incompatible = |msg: String| Err(Error::IncompatibleParameters(msg));
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain("delta", delta, "> 0"));
        }
        if !(theta1 > 0.0) {
            return Err(Error::domain("theta1", theta1, "> 0"));
        }
        if !(theta3 > 0.0) {
            return Err(Error::domain("theta3", theta3, "> 0"));
        }
        if !(theta2 > -1.0) {
            return Err(Error::domain("theta2", theta2, "> -1"));
        }
        if !(theta4 > -1.0) {
            return Err(Error::domain("theta4", theta4, "> -1"));
        }
        if !(theta1 > theta2) {
            return incompatible(format!("theta1 > theta2 violated ({theta1} <= {theta2})"));
        }
        if !(theta3 > theta4) {
            return incompatible(format!("theta3 > theta4 violated ({theta3} <= {theta4})"));
        }
        let r = self.sameproduct_residual();
        let scale = 1f64.max(self.sameproduct_lhs().abs());
        if r > IDENTITY_TOL * scale {
            return incompatible(format!(
                "theta4[theta1 + theta3(theta1 - theta2)] = theta2[theta3 + theta1(theta3 - theta4)] violated by {r:e}"
            ));
        }
        let prod = self.slope_product();
        if !(prod < 1.0) {
            return incompatible(format!("(theta1 - theta2)(theta3 - theta4) < 1 violated ({prod})"));
        }
        let coherent = (theta2 > 0.0 && theta4 > 0.0) || (theta2 < 0.0 && theta4 < 0.0) || (theta2 == 0.0 && theta4 == 0.0);
        if !coherent {
            return incompatible(format!("theta2 and theta4 must share a sign ({theta2}, {theta4})"));
        }
        Ok(())
    }

    fn sameproduct_lhs(&self) -> f64 {
        self.theta4 * (self.theta1 + self.theta3 * (self.theta1 - self.theta2))
    }

    /// `|θ4[θ1+θ3(θ1-θ2)] - θ2[θ3+θ1(θ3-θ4)]|`.
    pub fn sameproduct_residual(&self) -> f64 {
        let rhs = self.theta2 * (self.theta3 + self.theta1 * (self.theta3 - self.theta4));
        (self.sameproduct_lhs() - rhs).abs()
    }

    /// `(θ1-θ2)(θ3-θ4)`, the product of the two regression slopes.
    pub fn slope_product(&self) -> f64 {
        (self.theta1 - self.theta2) * (self.theta3 - self.theta4)
    }

    fn denom(&self) -> f64 {
        1.0 - self.slope_product()
    }

    /// Coefficient of `(1-u)` in the joint pgf base.
    pub fn coef_u(&self) -> f64 {
        (self.theta1 + self.theta3 * (self.theta1 - self.theta2)) / self.denom()
    }

    /// Coefficient of `(1-v)` in the joint pgf base.
    pub fn coef_v(&self) -> f64 {
        (self.theta3 + self.theta1 * (self.theta3 - self.theta4)) / self.denom()
    }

    /// Coefficient of `(1-u)(1-v)` in the joint pgf base.
    pub fn coef_uv(&self) -> f64 {
        self.sameproduct_lhs() / self.denom()
    }

    pub fn marginal_x(&self) -> CountDistribution {
        CountDistribution::NegBinomial {
            r: self.delta,
            p: p_from_theta(self.coef_u()),
        }
    }

    pub fn marginal_y(&self) -> CountDistribution {
        CountDistribution::NegBinomial {
            r: self.delta,
            p: p_from_theta(self.coef_v()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovChainParams {
    pub delta: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl MarkovChainParams {
    pub fn new(delta: f64, p0: f64, p1: f64, p2: f64) -> Result<Self> {
        let p = Self { delta, p0, p1, p2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("delta", self.delta)?;
        for (name, v) in [("p0", self.p0), ("p1", self.p1), ("p2", self.p2)] {
            probability(name, v)?;
        }
        Ok(())
    }
}

/// Resolved parameters of any catalogue family.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyDescriptor {
    IndependentPoisson { lambda_x: f64, lambda_y: f64 },
    TrivariatePoisson { lambda0: f64, lambda1: f64, lambda2: f64 },
    PoissonGamma { alpha: f64, beta: f64, lambdas: Vec<f64> },
    Theta(ThetaFamilyParams),
    TrivariateNb { alpha: f64, beta1: f64, beta2: f64, theta: f64 },
    BetaNb { r1: f64, r2: f64, alpha1: f64, alpha2: f64 },
    MultinomialMix { size: usize, p: [f64; 3] },
    /// The full `(Z1, Z2, Z3)` multinomial tensor; coordinates sum to `size`.
    JointMix { size: usize, p: [f64; 3] },
    MarkovChain(MarkovChainParams),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, v, "> 0"))
    }
}

fn probability(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(name, v, "in (0, 1)"))
    }
}

fn check_simplex(p: &[f64; 3]) -> Result<()> {
    for (i, &v) in p.iter().enumerate() {
        probability(&format!("p{}", i + 1), v)?;
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > IDENTITY_TOL {
        return Err(Error::domain("p1 + p2 + p3", s, "= 1"));
    }
    Ok(())
}

impl FamilyDescriptor {
    pub fn dim(&self) -> usize {
        match self {
            FamilyDescriptor::PoissonGamma { lambdas, .. } => lambdas.len(),
            FamilyDescriptor::JointMix { .. } | FamilyDescriptor::MarkovChain(_) => 3,
            _ => 2,
        }
    }

    /// Short tag used by reports and configs.
    pub fn tag(&self) -> &'static str {
        match self {
            FamilyDescriptor::IndependentPoisson { .. } => "independent_poisson",
            FamilyDescriptor::TrivariatePoisson { .. } => "trivariate_poisson",
            FamilyDescriptor::PoissonGamma { .. } => "poisson_gamma",
            FamilyDescriptor::Theta(_) => "theta",
            FamilyDescriptor::TrivariateNb { .. } => "trivariate_nb",
            FamilyDescriptor::BetaNb { .. } => "beta_nb",
            FamilyDescriptor::MultinomialMix { .. } => "multinomial_mix",
            FamilyDescriptor::JointMix { .. } => "joint_mix",
            FamilyDescriptor::MarkovChain(_) => "markov_chain",
        }
    }

    pub fn validate(&self) -> Result<()> {
        use FamilyDescriptor::*;
        match self {
            IndependentPoisson { lambda_x, lambda_y } => {
                positive("lambda_x", *lambda_x)?;
                positive("lambda_y", *lambda_y)
            }
            TrivariatePoisson {
                lambda0,
                lambda1,
                lambda2,
            } => {
                positive("lambda0", *lambda0)?;
                positive("lambda1", *lambda1)?;
                positive("lambda2", *lambda2)
            }
            PoissonGamma { alpha, beta, lambdas } => {
                positive("alpha", *alpha)?;
                positive("beta", *beta)?;
                if lambdas.len() < 2 {
                    return Err(Error::DimensionMismatch(format!(
                        "Poisson-gamma needs at least two rates, got {}",
                        lambdas.len()
                    )));
                }
                for (i, &l) in lambdas.iter().enumerate() {
                    if !(l >= 0.0 && l.is_finite()) {
                        return Err(Error::domain(&format!("lambda{}", i + 1), l, ">= 0"));
                    }
                }
                Ok(())
            }
            Theta(p) => p.validate(),
            TrivariateNb {
                alpha,
                beta1,
                beta2,
                theta,
            } => {
                positive("alpha", *alpha)?;
                positive("beta1", *beta1)?;
                positive("beta2", *beta2)?;
                probability("theta", *theta)
            }
            BetaNb { r1, r2, alpha1, alpha2 } => {
                positive("r1", *r1)?;
                positive("r2", *r2)?;
                positive("alpha1", *alpha1)?;
                positive("alpha2", *alpha2)
            }
            MultinomialMix { size, p } | JointMix { size, p } => {
                if *size == 0 {
                    return Err(Error::domain("size", 0.0, ">= 1"));
                }
                check_simplex(p)
            }
            MarkovChain(p) => p.validate(),
        }
    }

    /// Per-coordinate (mean, standard deviation).
    pub fn marginal_moments(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        use FamilyDescriptor::*;
        let pois = |l: f64| (l, l.sqrt());
        let nb = |r: f64, p: f64| (r * (1.0 - p) / p, (r * (1.0 - p)).sqrt() / p);
        Ok(match self {
            IndependentPoisson { lambda_x, lambda_y } => vec![pois(*lambda_x), pois(*lambda_y)],
            TrivariatePoisson {
                lambda0,
                lambda1,
                lambda2,
            } => vec![pois(lambda0 + lambda1), pois(lambda0 + lambda2)],
            PoissonGamma { alpha, beta, lambdas } => lambdas
                .iter()
                .map(|l| {
                    let m = alpha * l / beta;
                    (m, (m + alpha * l * l / (beta * beta)).sqrt())
                })
                .collect(),
            Theta(p) => [p.marginal_x(), p.marginal_y()]
                .iter()
                .map(|d| Ok((d.mean()?, d.std_dev()?)))
                .collect::<Result<_>>()?,
            TrivariateNb {
                alpha,
                beta1,
                beta2,
                theta,
            } => vec![nb(alpha + beta1, *theta), nb(alpha + beta2, *theta)],
            BetaNb { r1, r2, alpha1, alpha2 } => [*r1, *r2]
                .iter()
                .map(|&r| {
                    let d = CountDistribution::BetaNB {
                        r,
                        alpha1: *alpha1,
                        alpha2: *alpha2,
                    };
                    Ok((d.mean()?, d.std_dev()?))
                })
                .collect::<Result<_>>()?,
            MultinomialMix { size, p } => {
                let n = *size as f64;
                let bin = |q: f64| (n * q, (n * q * (1.0 - q)).sqrt());
                vec![bin(p[0]), bin(p[0] + p[2])]
            }
            JointMix { size, p } => {
                let n = *size as f64;
                p.iter().map(|&q| (n * q, (n * q * (1.0 - q)).sqrt())).collect()
            }
            MarkovChain(m) => {
                let (mn, sn) = nb(m.delta, m.p0);
                let leg = |q: f64| {
                    let k = (1.0 - q) / q;
                    let mean = (m.delta + mn) * k;
                    let var = (m.delta + mn) * k / q + sn * sn * k * k;
                    (mean, var.sqrt())
                };
                vec![leg(m.p1), (mn, sn), leg(m.p2)]
            }
        })
    }

    /// `ceil(Σ means + 12 Σ stddevs)`; exact support size for bounded families.
    pub fn default_bound(&self) -> Result<usize> {
        match self {
            FamilyDescriptor::MultinomialMix { size, .. } | FamilyDescriptor::JointMix { size, .. } => {
                self.validate()?;
                Ok(*size)
            }
            _ => {
                let m = self.marginal_moments()?;
                let total: f64 = m.iter().map(|(mu, sd)| mu + 12.0 * sd).sum();
                Ok(total.ceil() as usize)
            }
        }
    }

    /// Predicted affine conditional means.
    pub fn predicted_ce(&self) -> Result<Vec<AffineCe>> {
        self.validate()?;
        use FamilyDescriptor::*;
        Ok(match self {
            IndependentPoisson { lambda_x, lambda_y } => vec![
                AffineCe::new(0, vec![0.0], *lambda_x),
                AffineCe::new(1, vec![0.0], *lambda_y),
            ],
            TrivariatePoisson {
                lambda0,
                lambda1,
                lambda2,
            } => {
                let (alpha, beta) = poisson_thinning_rates(*lambda0, *lambda1, *lambda2);
                vec![AffineCe::new(0, vec![alpha], *lambda1), AffineCe::new(1, vec![beta], *lambda2)]
            }
            PoissonGamma { alpha, beta, lambdas } => {
                let total: f64 = lambdas.iter().sum();
                lambdas
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| {
                        let s = l / (beta + total - l);
                        AffineCe::new(i, vec![s; lambdas.len() - 1], alpha * s)
                    })
                    .collect()
            }
            Theta(p) => vec![
                AffineCe::new(0, vec![p.theta1 - p.theta2], p.delta * p.theta1),
                AffineCe::new(1, vec![p.theta3 - p.theta4], p.delta * p.theta3),
            ],
            TrivariateNb {
                alpha,
                beta1,
                beta2,
                theta,
            } => {
                let k = (1.0 - theta) / theta;
                vec![
                    AffineCe::new(0, vec![alpha / (alpha + beta2)], beta1 * k),
                    AffineCe::new(1, vec![alpha / (alpha + beta1)], beta2 * k),
                ]
            }
            BetaNb { r1, r2, alpha1, alpha2 } => {
                if !(alpha1 + r1.min(*r2) > 1.0) {
                    return Err(Error::CeUndefined(format!(
                        "beta-NB conditional means need alpha1 + min(r1, r2) > 1, got {}",
                        alpha1 + r1.min(*r2)
                    )));
                }
                let sx = r1 / (alpha1 + r2 - 1.0);
                let sy = r2 / (alpha1 + r1 - 1.0);
                vec![
                    AffineCe::new(0, vec![sx], sx * alpha2),
                    AffineCe::new(1, vec![sy], sy * alpha2),
                ]
            }
            MultinomialMix { size, p } => {
                let n = *size as f64;
                vec![
                    AffineCe::new(0, vec![p[0] / (p[0] + p[2])], 0.0),
                    AffineCe::new(1, vec![p[1] / (p[1] + p[2])], n * p[2] / (p[1] + p[2])),
                ]
            }
            JointMix { size, .. } => {
                let n = *size as f64;
                (0..3).map(|i| AffineCe::new(i, vec![-1.0, -1.0], n)).collect()
            }
            MarkovChain(m) => {
                let kx = (1.0 - m.p1) / m.p1;
                let ky = (1.0 - m.p2) / m.p2;
                vec![
                    AffineCe::new(0, vec![kx, 0.0], m.delta * kx),
                    AffineCe::new(2, vec![0.0, ky], m.delta * ky),
                ]
            }
        })
    }

    /// The truncated pmf on `{0..bound}^n`.
    pub fn build_pmf(&self, bound: usize) -> Result<JointPmf<f64>> {
        self.validate()?;
        use FamilyDescriptor::*;
        match self {
            IndependentPoisson { lambda_x, lambda_y } => {
                let fx = poisson_vec(*lambda_x, bound);
                let fy = poisson_vec(*lambda_y, bound);
                JointPmf::from_fn(2, bound, |i| fx[i[0]] * fy[i[1]])
            }
            TrivariatePoisson {
                lambda0,
                lambda1,
                lambda2,
            } => {
                let z = poisson_vec(*lambda0, bound);
                let e = poisson_vec(*lambda1, bound);
                let h = poisson_vec(*lambda2, bound);
                common_component(&z, &e, &h, bound)
            }
            PoissonGamma { alpha, beta, lambdas } => poisson_gamma_pmf(*alpha, *beta, lambdas, bound),
            Theta(p) => theta_pmf(p, bound),
            TrivariateNb {
                alpha,
                beta1,
                beta2,
                theta,
            } => {
                let nbv = |r: f64| (0..=bound as u64).map(|k| nb_pmf(k, r, *theta)).collect::<Vec<_>>();
                common_component(&nbv(*alpha), &nbv(*beta1), &nbv(*beta2), bound)
            }
            BetaNb { r1, r2, alpha1, alpha2 } => {
                let norm = ln_beta(*alpha1, *alpha2);
                JointPmf::from_fn(2, bound, |i| {
                    let (x, y) = (i[0] as u64, i[1] as u64);
                    (ln_nb_coeff(x, *r1) + ln_nb_coeff(y, *r2) + ln_beta(alpha1 + r1 + r2, alpha2 + (x + y) as f64)
                        - norm)
                        .exp()
                })
            }
            MultinomialMix { size, p } => {
                let n = *size;
                JointPmf::from_fn(2, n, |i| {
                    let (x, y) = (i[0], i[1]);
                    if x > y {
                        0.0
                    } else {
                        multinomial(n, [x, n - y, y - x], p)
                    }
                })
            }
            JointMix { size, p } => {
                let n = *size;
                JointPmf::from_fn(3, n, |i| {
                    if i.iter().sum::<usize>() == n {
                        multinomial(n, [i[0], i[1], i[2]], p)
                    } else {
                        0.0
                    }
                })
            }
            MarkovChain(m) => {
                let pn: Vec<f64> = (0..=bound as u64).map(|k| nb_pmf(k, m.delta, m.p0)).collect();
                JointPmf::from_fn(3, bound, |i| {
                    let (x, n, y) = (i[0] as u64, i[1], i[2] as u64);
                    let r = m.delta + n as f64;
                    pn[n] * nb_pmf(x, r, m.p1) * nb_pmf(y, r, m.p2)
                })
            }
        }
    }

    /// Builds with the given bound, or the default when `None`.
    pub fn build(&self, bound: Option<usize>) -> Result<Construction> {
        let ce = self.predicted_ce()?;
        let bound = match bound {
            Some(b) => b,
            None => self.default_bound()?,
        };
        Ok(Construction {
            descriptor: self.clone(),
            pmf: self.build_pmf(bound)?,
            ce,
        })
    }
}

impl fmt::Display for FamilyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FamilyDescriptor::*;
        match self {
            IndependentPoisson { lambda_x, lambda_y } => {
                write!(f, "independent_poisson lambda_x={lambda_x} lambda_y={lambda_y}")
            }
            TrivariatePoisson {
                lambda0,
                lambda1,
                lambda2,
            } => write!(f, "trivariate_poisson lambda0={lambda0} lambda1={lambda1} lambda2={lambda2}"),
            PoissonGamma { alpha, beta, lambdas } => {
                let l: Vec<String> = lambdas.iter().map(|v| v.to_string()).collect();
                write!(f, "poisson_gamma alpha={alpha} beta={beta} lambdas={}", l.join(","))
            }
            Theta(p) => write!(
                f,
                "theta delta={} theta1={} theta2={} theta3={} theta4={}",
                p.delta, p.theta1, p.theta2, p.theta3, p.theta4
            ),
            TrivariateNb {
                alpha,
                beta1,
                beta2,
                theta,
            } => write!(f, "trivariate_nb alpha={alpha} beta1={beta1} beta2={beta2} theta={theta}"),
            BetaNb { r1, r2, alpha1, alpha2 } => {
                write!(f, "beta_nb r1={r1} r2={r2} alpha1={alpha1} alpha2={alpha2}")
            }
            MultinomialMix { size, p } => {
                write!(f, "multinomial_mix size={size} p1={} p2={} p3={}", p[0], p[1], p[2])
            }
            JointMix { size, p } => write!(f, "joint_mix size={size} p1={} p2={} p3={}", p[0], p[1], p[2]),
            MarkovChain(m) => write!(f, "markov_chain delta={} p0={} p1={} p2={}", m.delta, m.p0, m.p1, m.p2),
        }
    }
}

/// Thinning probabilities `(α, β)` of the common-Poisson-component law:
/// `α = λ0/(λ0+λ2)` thins `Y` into `X`, `β = λ0/(λ0+λ1)` thins `X` into `Y`.
pub fn poisson_thinning_rates(lambda0: f64, lambda1: f64, lambda2: f64) -> (f64, f64) {
    (lambda0 / (lambda0 + lambda2), lambda0 / (lambda0 + lambda1))
}

fn poisson_vec(lambda: f64, bound: usize) -> Vec<f64> {
    let ll = lambda.ln();
    (0..=bound as u64)
        .map(|k| (-lambda + k as f64 * ll - ln_factorial(k)).exp())
        .collect()
}

/// `p(x, y) = Σ_z z(z) e(x-z) h(y-z)`.
fn common_component(z: &[f64], e: &[f64], h: &[f64], bound: usize) -> Result<JointPmf<f64>> {
    JointPmf::from_fn(2, bound, |i| {
        let (x, y) = (i[0], i[1]);
        (0..=x.min(y)).map(|k| z[k] * e[x - k] * h[y - k]).sum()
    })
}

fn poisson_gamma_pmf(alpha: f64, beta: f64, lambdas: &[f64], bound: usize) -> Result<JointPmf<f64>> {
    let total: f64 = lambdas.iter().sum();
    let base = alpha * beta.ln() - ln_gamma(alpha);
    let ln_den = (beta + total).ln();
    JointPmf::from_fn(lambdas.len(), bound, |idx| {
        let mut s = 0u64;
        let mut acc = base;
        for (&x, &l) in idx.iter().zip(lambdas) {
            if x > 0 {
                if l == 0.0 {
                    return 0.0;
                }
                acc += x as f64 * l.ln();
            }
            acc -= ln_factorial(x as u64);
            s += x as u64;
        }
        let s = s as f64;
        (acc + ln_gamma(alpha + s) - (alpha + s) * ln_den).exp()
    })
}

fn theta_pmf(p: &ThetaFamilyParams, bound: usize) -> Result<JointPmf<f64>> {
    let base = BivariateSeries::shifted_bilinear(p.coef_u(), p.coef_v(), p.coef_uv(), bound);
    let s = base.real_power(-p.delta)?;
    JointPmf::new(2, bound, s.into_coeffs())
}

fn multinomial(n: usize, k: [usize; 3], p: &[f64; 3]) -> f64 {
    let mut acc = ln_factorial(n as u64);
    for (&ki, &pi) in k.iter().zip(p) {
        acc += ki as f64 * pi.ln() - ln_factorial(ki as u64);
    }
    acc.exp()
}

pub fn build_trivariate_poisson(lambda0: f64, lambda1: f64, lambda2: f64, bound: Option<usize>) -> Result<Construction> {
    FamilyDescriptor::TrivariatePoisson {
        lambda0,
        lambda1,
        lambda2,
    }
    .build(bound)
}

pub fn build_poisson_gamma(alpha: f64, beta: f64, lambdas: &[f64], bound: Option<usize>) -> Result<Construction> {
    FamilyDescriptor::PoissonGamma {
        alpha,
        beta,
        lambdas: lambdas.to_vec(),
    }
    .build(bound)
}

pub fn build_theta_family(params: ThetaFamilyParams, bound: Option<usize>) -> Result<Construction> {
    FamilyDescriptor::Theta(params).build(bound)
}

pub fn build_trivariate_nb(alpha: f64, beta1: f64, beta2: f64, theta: f64, bound: Option<usize>) -> Result<Construction> {
    FamilyDescriptor::TrivariateNb {
        alpha,
        beta1,
        beta2,
        theta,
    }
    .build(bound)
}

/// Fails with a CE-undefined error when `α1 + min(r1, r2) <= 1`; use
/// [`FamilyDescriptor::build_pmf`] for the pmf alone.
pub fn build_beta_nb(r1: f64, r2: f64, alpha1: f64, alpha2: f64, bound: Option<usize>) -> Result<Construction> {
    FamilyDescriptor::BetaNb { r1, r2, alpha1, alpha2 }.build(bound)
}

pub fn build_multinomial_mix(size: usize, p1: f64, p2: f64, p3: f64) -> Result<Construction> {
    FamilyDescriptor::MultinomialMix { size, p: [p1, p2, p3] }.build(None)
}

pub fn build_joint_mix(size: usize, p1: f64, p2: f64, p3: f64) -> Result<Construction> {
    FamilyDescriptor::JointMix { size, p: [p1, p2, p3] }.build(None)
}

/// Coordinates are ordered `(X, N, Y)`.
pub fn build_markov_chain_xyn(params: MarkovChainParams, bound: Option<usize>) -> Result<Construction> {
    FamilyDescriptor::MarkovChain(params).build(bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_balance() {
        let (a, b) = poisson_thinning_rates(1.0, 2.0, 3.0);
        assert!((a - 0.25).abs() < 1e-15 && (b - 1.0 / 3.0).abs() < 1e-15);
        let lhs = a / (2.0 * (1.0 - a));
        let rhs = b / (3.0 * (1.0 - b));
        assert!((lhs - 1.0 / 6.0).abs() < 1e-15 && (rhs - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn trivariate_poisson_mean() {
        let c = build_trivariate_poisson(1.0, 1.0, 1.0, Some(40)).unwrap();
        let m = c.pmf.marginal(0);
        let mean: f64 = m.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((mean - 2.0).abs() < 1e-8);
    }

    #[test]
    fn poisson_gamma_slopes() {
        let c = build_poisson_gamma(1.0, 1.0, &[1.0, 1.0], None).unwrap();
        let ce = c.ce_for(1).unwrap();
        assert_eq!((ce.slopes[0], ce.intercept), (0.5, 0.5));
        let c = FamilyDescriptor::PoissonGamma {
            alpha: 1.0,
            beta: 1.0,
            lambdas: vec![1.0; 3],
        };
        for ce in c.predicted_ce().unwrap() {
            assert!(ce.slopes.iter().all(|&s| (s - 1.0 / 3.0).abs() < 1e-15));
        }
    }

    #[test]
    fn vanishing_rate_gives_degenerate_coordinate() {
        let c = build_poisson_gamma(2.0, 1.0, &[1.5, 0.0], Some(50)).unwrap();
        let nb = CountDistribution::NegBinomial { r: 2.0, p: 1.0 / 2.5 };
        for x in 0..20 {
            assert!((c.pmf.get2(x, 0) - nb.pmf(x as u64).unwrap()).abs() < 1e-14);
            assert_eq!(c.pmf.get2(x, 1), 0.0);
        }
    }

    #[test]
    fn theta_family_reduces_to_poisson_gamma() {
        let (alpha, beta, l1, l2) = (1.3, 0.8, 0.7, 1.1);
        let p = ThetaFamilyParams::new(alpha, l1 / (l2 + beta), 0.0, l2 / (l1 + beta), 0.0).unwrap();
        let t = build_theta_family(p, Some(40)).unwrap();
        let g = build_poisson_gamma(alpha, beta, &[l1, l2], Some(40)).unwrap();
        let worst = t
            .pmf
            .probs()
            .iter()
            .zip(g.pmf.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
        for (a, b) in t.ce.iter().zip(&g.ce) {
            assert!((a.slopes[0] - b.slopes[0]).abs() < 1e-15 && (a.intercept - b.intercept).abs() < 1e-14);
        }
    }

    #[test]
    fn theta_marginals_match_nb() {
        let p = ThetaFamilyParams::new(9.666666666666666, 0.10344827586206896, -0.29655172413793107, 0.18620689655172412, -0.41379310344827586)
            .unwrap_or_else(|e| panic!("{e}"));
        let c = build_theta_family(p, Some(60)).unwrap();
        let (mx, my) = (p.marginal_x(), p.marginal_y());
        let (px, py) = (c.pmf.marginal(0), c.pmf.marginal(1));
        for k in 0..=20 {
            assert!((px[k] - mx.pmf(k as u64).unwrap()).abs() < 1e-10);
            assert!((py[k] - my.pmf(k as u64).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn theta_constraint_errors() {
        let good = ThetaFamilyParams {
            delta: 9.666666666666666,
            theta1: 0.10344827586206896,
            theta2: -0.29655172413793107,
            theta3: 0.18620689655172412,
            theta4: -0.41379310344827586,
        };
        let mut bad = good;
        bad.theta4 += 1e-3;
        assert!(matches!(bad.validate(), Err(Error::IncompatibleParameters(_))));
        let flipped = ThetaFamilyParams {
            delta: 1.0,
            theta1: 0.2,
            theta2: 0.5,
            theta3: 0.3,
            theta4: 0.0,
        };
        assert!(flipped.validate().is_err());
    }

    #[test]
    fn trivariate_nb_prediction() {
        let d = FamilyDescriptor::TrivariateNb {
            alpha: 1.0,
            beta1: 1.0,
            beta2: 1.0,
            theta: 0.5,
        };
        let ce = d.predicted_ce().unwrap();
        assert_eq!((ce[0].slopes[0], ce[0].intercept), (0.5, 1.0));
    }

    #[test]
    fn beta_nb_caveat() {
        let c = build_beta_nb(2.0, 2.0, 2.0, 1.0, Some(10)).unwrap();
        let ce = c.ce_for(1).unwrap();
        assert!((ce.slopes[0] - 2.0 / 3.0).abs() < 1e-15 && (ce.intercept - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(build_beta_nb(0.4, 2.0, 0.5, 1.0, Some(10)), Err(Error::CeUndefined(_))));
    }

    #[test]
    fn multinomial_mix_prediction_and_support() {
        let c = build_multinomial_mix(10, 0.2, 0.3, 0.5).unwrap();
        assert_eq!(c.pmf.bound(), 10);
        assert!((c.pmf.captured_mass() - 1.0).abs() < 1e-12);
        assert!((c.ce[0].slopes[0] - 2.0 / 7.0).abs() < 1e-15);
        assert!((c.ce[1].slopes[0] - 0.375).abs() < 1e-15 && (c.ce[1].intercept - 6.25).abs() < 1e-13);
        assert_eq!(c.pmf.get2(3, 2), 0.0);
        let j = build_joint_mix(4, 0.2, 0.3, 0.5).unwrap();
        assert!((j.pmf.captured_mass() - 1.0).abs() < 1e-12);
        assert_eq!(j.pmf.get(&[1, 1, 1]), 0.0);
    }

    #[test]
    fn markov_chain_n_marginal() {
        let p = MarkovChainParams::new(1.0, 0.5, 0.5, 0.5).unwrap();
        let c = build_markov_chain_xyn(p, Some(60)).unwrap();
        let n = c.pmf.marginal(1);
        for k in 0..=15 {
            assert!((n[k] - nb_pmf(k as u64, 1.0, 0.5)).abs() < 1e-9);
        }
        assert!(MarkovChainParams::new(1.0, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn default_bounds() {
        let d = FamilyDescriptor::TrivariatePoisson {
            lambda0: 1.0,
            lambda1: 1.0,
            lambda2: 1.0,
        };
        let want = (4.0 + 12.0 * 2.0 * 2f64.sqrt()).ceil() as usize;
        assert_eq!(d.default_bound().unwrap(), want);
        let heavy = FamilyDescriptor::BetaNb {
            r1: 1.0,
            r2: 1.0,
            alpha1: 1.5,
            alpha2: 1.0,
        };
        assert!(matches!(heavy.default_bound(), Err(Error::MomentDivergence(_))));
    }
}
