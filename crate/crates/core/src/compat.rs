//! Compatibility deciders for conditional count specifications.

use crate::dists::{theta_from_p, CountDistribution};
use crate::error::{Error, Result};
use crate::families::{poisson_thinning_rates, FamilyDescriptor, ThetaFamilyParams};
use crate::joint::JointPmf;
use crate::num::{ln_beta, ln_factorial};
use crate::series::TruncatedSeries;

/// Tolerance on the parameter identities the verdicts rest on.
pub const VERDICT_TOL: f64 = 1e-12;
/// Cells whose conditional probabilities fall below this are excluded.
pub const SEPARABILITY_FLOOR: f64 = 1e-13;

/// Compound autoregressive specification:
/// `X_i | rest = Σ_{j≠i} Σ_{k<=X_j} W_{ij,k} + ε_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarSpec {
    n: usize,
    /// Row-major `n × n`; the diagonal is unused.
    thinning: Vec<Option<CountDistribution>>,
    innovation: Vec<CountDistribution>,
}

impl CarSpec {
    /// `thinning(i, j)` is the law of the summands indexed by `X_j` in `X_i | rest`.
    pub fn new(innovation: Vec<CountDistribution>, thinning: impl Fn(usize, usize) -> CountDistribution) -> Result<Self> {
        let n = innovation.len();
        if n < 2 {
            return Err(Error::DimensionMismatch(format!("CAR spec needs n >= 2, got {n}")));
        }
        let mut t = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                t.push((i != j).then(|| thinning(i, j)));
            }
        }
        let spec = Self {
            n,
            thinning: t,
            innovation,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `X | Y` thinned by `w_xy` with innovation `eps`; `Y | X` by `w_yx` and `eta`.
    pub fn bivariate(w_xy: CountDistribution, w_yx: CountDistribution, eps: CountDistribution, eta: CountDistribution) -> Result<Self> {
        Self::new(vec![eps, eta], |i, _| if i == 0 { w_xy } else { w_yx })
    }

    pub fn validate(&self) -> Result<()> {
        for d in self.thinning.iter().flatten().chain(&self.innovation) {
            d.validate()?;
            d.mean().map_err(|_| Error::MomentDivergence(format!("law {d} has no finite mean")))?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn thinning(&self, i: usize, j: usize) -> CountDistribution {
        self.thinning[i * self.n + j].expect("off-diagonal thinning law")
    }

    pub fn innovation(&self, i: usize) -> CountDistribution {
        self.innovation[i]
    }

    /// Conditional pmf of `X_i` given the other coordinates (increasing order),
    /// from the pgf `G_ε(u) Π_j G_{W_ij}(u)^{x_j}` truncated at `order`.
    pub fn conditional_pmf(&self, i: usize, given: &[usize], order: usize) -> Result<Vec<f64>> {
        if given.len() + 1 != self.n {
            return Err(Error::DimensionMismatch(format!("{} conditioning values for n = {}", given.len(), self.n)));
        }
        let mut pgf: TruncatedSeries<f64> = self.innovation[i].pgf_series(order)?;
        let others = (0..self.n).filter(|&j| j != i);
        for (j, &x) in others.zip(given) {
            if x == 0 {
                continue;
            }
            let w: TruncatedSeries<f64> = self.thinning(i, j).pgf_series(order)?;
            pgf = pgf.mul(&power(&w, x)?)?;
        }
        Ok(pgf.to_pmf()?.probs)
    }

    /// `E[X_i | rest]` implied by the spec: `Σ_j E[W_ij] x_j + E[ε_i]`.
    pub fn conditional_mean(&self, i: usize, given: &[usize]) -> Result<f64> {
        let mut m = self.innovation[i].mean()?;
        for (j, &x) in (0..self.n).filter(|&j| j != i).zip(given) {
            m += self.thinning(i, j).mean()? * x as f64;
        }
        Ok(m)
    }
}

fn power(w: &TruncatedSeries<f64>, x: usize) -> Result<TruncatedSeries<f64>> {
    if w.coeff(0) > 0.0 {
        return w.real_power(x as f64);
    }
    let mut acc = TruncatedSeries::one(w.order());
    for _ in 0..x {
        acc = acc.mul(w)?;
    }
    Ok(acc)
}

/// Thinning with beta-distributed probabilities:
/// `X_i | rest, p = Σ_j Bin(X_j, p_ij) + ε_i` with `p_ij ~ Beta(a_ij, b_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomCoeffSpec {
    n: usize,
    beta: Vec<Option<(f64, f64)>>,
    innovation: Vec<CountDistribution>,
}

impl RandomCoeffSpec {
    pub fn new(innovation: Vec<CountDistribution>, beta: impl Fn(usize, usize) -> (f64, f64)) -> Result<Self> {
        let n = innovation.len();
        if n < 2 {
            return Err(Error::DimensionMismatch(format!("random-coefficient spec needs n >= 2, got {n}")));
        }
        let mut b = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                b.push((i != j).then(|| beta(i, j)));
            }
        }
        for &(a, c) in b.iter().flatten() {
            if !(a > 0.0 && c > 0.0 && a.is_finite() && c.is_finite()) {
                return Err(Error::domain("beta parameter", if a > 0.0 { c } else { a }, "> 0"));
            }
        }
        for d in &innovation {
            d.validate()?;
        }
        Ok(Self { n, beta: b, innovation })
    }

    /// `X | Y` thinned with `Beta(beta_xy)`; `Y | X` with `Beta(beta_yx)`.
    pub fn bivariate(beta_xy: (f64, f64), beta_yx: (f64, f64), eps: CountDistribution, eta: CountDistribution) -> Result<Self> {
        Self::new(vec![eps, eta], |i, _| if i == 0 { beta_xy } else { beta_yx })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn beta(&self, i: usize, j: usize) -> (f64, f64) {
        self.beta[i * self.n + j].expect("off-diagonal beta parameters")
    }

    pub fn innovation(&self, i: usize) -> CountDistribution {
        self.innovation[i]
    }

    /// Conditional pmf of `X_i`: beta-binomial thinnings convolved with the innovation.
    pub fn conditional_pmf(&self, i: usize, given: &[usize], order: usize) -> Result<Vec<f64>> {
        if given.len() + 1 != self.n {
            return Err(Error::DimensionMismatch(format!("{} conditioning values for n = {}", given.len(), self.n)));
        }
        let mut pgf: TruncatedSeries<f64> = self.innovation[i].pgf_series(order)?;
        for (j, &x) in (0..self.n).filter(|&j| j != i).zip(given) {
            if x == 0 {
                continue;
            }
            let (a, b) = self.beta(i, j);
            let norm = ln_beta(a, b);
            let coeffs = (0..=order)
                .map(|k| {
                    if k > x {
                        0.0
                    } else {
                        let choose = ln_factorial(x as u64) - ln_factorial(k as u64) - ln_factorial((x - k) as u64);
                        (choose + ln_beta(a + k as f64, b + (x - k) as f64) - norm).exp()
                    }
                })
                .collect();
            pgf = pgf.mul(&TruncatedSeries::new(coeffs, order))?;
        }
        Ok(pgf.to_pmf()?.probs)
    }

    /// `E[X_i | rest] = Σ_j a_ij/(a_ij+b_ij) x_j + E[ε_i]`.
    pub fn conditional_mean(&self, i: usize, given: &[usize]) -> Result<f64> {
        let mut m = self.innovation[i].mean()?;
        for (j, &x) in (0..self.n).filter(|&j| j != i).zip(given) {
            let (a, b) = self.beta(i, j);
            m += a / (a + b) * x as f64;
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatVerdict {
    pub compatible: bool,
    pub solution: Option<FamilyDescriptor>,
    /// Identifier of the satisfied case or of the violated condition.
    pub reason: String,
}

impl CompatVerdict {
    fn yes(solution: FamilyDescriptor, reason: impl Into<String>) -> Self {
        Self {
            compatible: true,
            solution: Some(solution),
            reason: reason.into(),
        }
    }

    fn no(reason: impl Into<String>) -> Self {
        Self {
            compatible: false,
            solution: None,
            reason: reason.into(),
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= VERDICT_TOL * a.abs().max(b.abs()).max(1.0)
}

/// `X | Y ~ Pois(cY + d)`, `Y | X ~ Pois(aX + b)`.
pub fn check_linear_poisson(a: f64, b: f64, c: f64, d: f64) -> CompatVerdict {
    if !(b > 0.0 && d > 0.0) {
        return CompatVerdict::no(format!("intercepts must be positive (b = {b}, d = {d})"));
    }
    if !(a >= 0.0 && c >= 0.0) {
        return CompatVerdict::no(format!("slopes must be nonnegative (a = {a}, c = {c})"));
    }
    if a == 0.0 && c == 0.0 {
        CompatVerdict::yes(
            FamilyDescriptor::IndependentPoisson {
                lambda_x: d,
                lambda_y: b,
            },
            "a = c = 0: independent Poissons",
        )
    } else if a == 0.0 || c == 0.0 {
        CompatVerdict::no(format!("a = 0 forces c = 0 and vice versa (a = {a}, c = {c})"))
    } else {
        CompatVerdict::no(format!("linear Poisson conditionals require a = c = 0 (a = {a}, c = {c})"))
    }
}

/// `X | Y = Bin(Y, α) + ε`, `Y | X = Bin(X, β) + η`.
pub fn check_binomial_thinning(alpha: f64, beta: f64, eps: CountDistribution, eta: CountDistribution) -> CompatVerdict {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return CompatVerdict::no(format!("thinning probabilities must lie in (0, 1) (alpha = {alpha}, beta = {beta})"));
    }
    let (le, lh) = match (eps, eta) {
        (CountDistribution::Poisson { lambda: le }, CountDistribution::Poisson { lambda: lh }) => (le, lh),
        _ => return CompatVerdict::no(format!("innovations must both be Poisson (got {eps}, {eta})")),
    };
    let lhs = alpha / (le * (1.0 - alpha));
    let rhs = beta / (lh * (1.0 - beta));
    if !close(lhs, rhs) {
        return CompatVerdict::no(format!(
            "alpha/(lambda_eps(1-alpha)) = beta/(lambda_eta(1-beta)) violated ({lhs} vs {rhs}, gap {:e})",
            (lhs - rhs).abs()
        ));
    }
    let lambda0 = alpha * lh / (1.0 - alpha);
    debug_assert!({
        let (a, b) = poisson_thinning_rates(lambda0, le, lh);
        close(a, alpha) && (b - beta).abs() < 1e-9
    });
    CompatVerdict::yes(
        FamilyDescriptor::TrivariatePoisson {
            lambda0,
            lambda1: le,
            lambda2: lh,
        },
        "binomial thinning with Poisson innovations",
    )
}

/// `(θ_num, θ_den)` of a ratio-type thinning law, if it is one.
fn ratio_form(d: CountDistribution) -> Option<(f64, f64)> {
    match d.canonical() {
        CountDistribution::ThetaRatio {
            theta_num,
            theta_den,
        } => Some((theta_num, theta_den)),
        CountDistribution::NegBinomial { r, p } if r == 1.0 => Some((0.0, theta_from_p(p))),
        _ => None,
    }
}

/// `(δ, θ)` of an NB innovation with pgf `(1 + θ(1-u))^{-δ}`.
fn nb_form(d: CountDistribution) -> Option<(f64, f64)> {
    match d.canonical() {
        CountDistribution::NegBinomial { r, p } => Some((r, theta_from_p(p))),
        _ => None,
    }
}

fn geometric_p(d: CountDistribution) -> Option<f64> {
    match d.canonical() {
        CountDistribution::NegBinomial { r, p } if r == 1.0 => Some(p),
        _ => None,
    }
}

pub fn check_car_structure(spec: &CarSpec) -> Result<CompatVerdict> {
    let n = spec.dim();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let w = spec.thinning(i, j);
            if w.is_point_mass() {
                return Err(Error::DegenerateSpec(format!("thinning law ({i},{j}) = {w} is a point mass")));
            }
        }
    }
    if n == 2 {
        Ok(car_bivariate(spec))
    } else {
        Ok(car_multivariate(spec))
    }
}

fn car_bivariate(spec: &CarSpec) -> CompatVerdict {
    let (wx, wy) = (spec.thinning(0, 1), spec.thinning(1, 0));
    let (eps, eta) = (spec.innovation(0), spec.innovation(1));
    if let (CountDistribution::Bernoulli { p: alpha }, CountDistribution::Bernoulli { p: beta }) = (wx, wy) {
        return check_binomial_thinning(alpha, beta, eps, eta);
    }
    let (Some((theta2, theta1)), Some((theta4, theta3))) = (ratio_form(wx), ratio_form(wy)) else {
        return CompatVerdict::no(format!(
            "thinning laws must both be Bernoulli or both ratio-type (got {wx}, {wy})"
        ));
    };
    let (Some((dx, ex)), Some((dy, ey))) = (nb_form(eps), nb_form(eta)) else {
        return CompatVerdict::no(format!("ratio-type thinning needs NB innovations (got {eps}, {eta})"));
    };
    if !close(ex, theta1) {
        return CompatVerdict::no(format!("innovation of X must have odds theta1 = {theta1}, got {ex}"));
    }
    if !close(ey, theta3) {
        return CompatVerdict::no(format!("innovation of Y must have odds theta3 = {theta3}, got {ey}"));
    }
    if !close(dx, dy) {
        return CompatVerdict::no(format!("innovations must share delta ({dx} vs {dy})"));
    }
    match ThetaFamilyParams::new(dx, theta1, theta2, theta3, theta4) {
        Ok(p) => CompatVerdict::yes(FamilyDescriptor::Theta(p), "ratio-type thinning with NB innovations"),
        Err(e) => CompatVerdict::no(e.to_string()),
    }
}

fn car_multivariate(spec: &CarSpec) -> CompatVerdict {
    let n = spec.dim();
    let mut q = Vec::with_capacity(n);
    let mut delta = None;
    for i in 0..n {
        let mut pi = None;
        for j in (0..n).filter(|&j| j != i) {
            let w = spec.thinning(i, j);
            if matches!(w, CountDistribution::Bernoulli { .. }) {
                return CompatVerdict::no(format!("Bernoulli thinning ({i},{j}) admits only degenerate solutions for n >= 3"));
            }
            let Some(p) = geometric_p(w) else {
                return CompatVerdict::no(format!("thinning ({i},{j}) = {w} must be geometric for n >= 3"));
            };
            match pi {
                None => pi = Some(p),
                Some(p0) if close(p0, p) => {}
                Some(p0) => {
                    return CompatVerdict::no(format!("thinning laws of coordinate {i} differ ({p0} vs {p})"));
                }
            }
        }
        let p = pi.expect("n >= 3 gives at least two thinning laws");
        let eps = spec.innovation(i);
        let Some((d, theta)) = nb_form(eps) else {
            return CompatVerdict::no(format!("innovation {i} = {eps} must be NB"));
        };
        if !close(theta, theta_from_p(p)) {
            return CompatVerdict::no(format!("innovation {i} must share the thinning probability {p}"));
        }
        match delta {
            None => delta = Some(d),
            Some(d0) if close(d0, d) => {}
            Some(d0) => return CompatVerdict::no(format!("innovations must share delta ({d0} vs {d})")),
        }
        q.push(1.0 - p);
    }
    let total: f64 = q.iter().sum();
    if !(total < 1.0) {
        return CompatVerdict::no(format!("sum of 1 - p_i must be below 1, got {total}"));
    }
    let lambdas = q.iter().map(|qi| qi / (1.0 - total)).collect();
    CompatVerdict::yes(
        FamilyDescriptor::PoissonGamma {
            alpha: delta.expect("n >= 3"),
            beta: 1.0,
            lambdas,
        },
        "geometric thinning with common-delta NB innovations",
    )
}

pub fn check_random_coeff(spec: &RandomCoeffSpec) -> CompatVerdict {
    if spec.dim() >= 3 {
        return CompatVerdict::no("random-coefficient specs in three or more dimensions have no non-degenerate solution");
    }
    let ((ax, bx), (ay, by)) = (spec.beta(0, 1), spec.beta(1, 0));
    if !close(ax, ay) {
        return CompatVerdict::no(format!("beta laws must share their first parameter ({ax} vs {ay})"));
    }
    let (eps, eta) = (spec.innovation(0), spec.innovation(1));
    let (Some((sx, tx)), Some((sy, ty))) = (nb_form(eps), nb_form(eta)) else {
        return CompatVerdict::no(format!("innovations must be NB (got {eps}, {eta})"));
    };
    if !close(tx, ty) {
        return CompatVerdict::no(format!("innovations must share their probability ({eps} vs {eta})"));
    }
    // X | Y thins with Beta(α, s_Y) and Y | X with Beta(α, s_X)
    if !close(bx, sy) {
        return CompatVerdict::no(format!("X | Y beta law needs second parameter {sy} (successes of eta), got {bx}"));
    }
    if !close(by, sx) {
        return CompatVerdict::no(format!("Y | X beta law needs second parameter {sx} (successes of eps), got {by}"));
    }
    CompatVerdict::yes(
        FamilyDescriptor::TrivariateNb {
            alpha: ax,
            beta1: sx,
            beta2: sy,
            theta: 1.0 / (1.0 + tx),
        },
        "beta-distributed thinning with NB innovations",
    )
}

/// Tabulated conditionals `ℓ(x|y)` and `ℓ(y|x)` on `{0..G}²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPair {
    grid: usize,
    /// `x_given_y[x * (G+1) + y] = ℓ(x | y)`.
    x_given_y: Vec<f64>,
    /// `y_given_x[x * (G+1) + y] = ℓ(y | x)`.
    y_given_x: Vec<f64>,
}

impl ConditionalPair {
    pub fn new(grid: usize, x_given_y: impl Fn(usize, usize) -> f64, y_given_x: impl Fn(usize, usize) -> f64) -> Self {
        let s = grid + 1;
        let mut xy = Vec::with_capacity(s * s);
        let mut yx = Vec::with_capacity(s * s);
        for x in 0..s {
            for y in 0..s {
                xy.push(x_given_y(x, y));
                yx.push(y_given_x(x, y));
            }
        }
        Self {
            grid,
            x_given_y: xy,
            y_given_x: yx,
        }
    }

    /// Both conditionals of a bivariate tensor, restricted to `{0..grid}²`.
    pub fn from_joint(j: &JointPmf<f64>, grid: usize) -> Result<Self> {
        if j.dim() != 2 {
            return Err(Error::DimensionMismatch(format!("separability needs a 2-d pmf, got n = {}", j.dim())));
        }
        let grid = grid.min(j.bound());
        let (px, py) = (j.marginal(0), j.marginal(1));
        Ok(Self::new(
            grid,
            |x, y| if py[y] > 0.0 { j.get2(x, y) / py[y] } else { 0.0 },
            |x, y| if px[x] > 0.0 { j.get2(x, y) / px[x] } else { 0.0 },
        ))
    }

    /// Conditionals postulated by a bivariate CAR spec, series-truncated at `order >= grid`.
    pub fn from_car_spec(spec: &CarSpec, grid: usize, order: usize) -> Result<Self> {
        if spec.dim() != 2 {
            return Err(Error::DimensionMismatch("bivariate CAR spec required".into()));
        }
        let order = order.max(grid);
        let xs: Vec<Vec<f64>> = (0..=grid).map(|y| spec.conditional_pmf(0, &[y], order)).collect::<Result<_>>()?;
        let ys: Vec<Vec<f64>> = (0..=grid).map(|x| spec.conditional_pmf(1, &[x], order)).collect::<Result<_>>()?;
        Ok(Self::new(grid, |x, y| xs[y][x], |x, y| ys[x][y]))
    }

    /// `X | Y ~ Pois(cY + d)`, `Y | X ~ Pois(aX + b)`.
    pub fn from_linear_poisson(a: f64, b: f64, c: f64, d: f64, grid: usize) -> Result<Self> {
        let pois = |lambda: f64, k: usize| CountDistribution::Poisson { lambda }.pmf(k as u64);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for v in 0..=grid {
            xs.push((0..=grid).map(|k| pois(c * v as f64 + d, k)).collect::<Result<Vec<_>>>()?);
            ys.push((0..=grid).map(|k| pois(a * v as f64 + b, k)).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self::new(grid, |x, y| xs[y][x], |x, y| ys[x][y]))
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn x_given_y(&self, x: usize, y: usize) -> f64 {
        self.x_given_y[x * (self.grid + 1) + y]
    }

    pub fn y_given_x(&self, x: usize, y: usize) -> f64 {
        self.y_given_x[x * (self.grid + 1) + y]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityReport {
    /// Largest `|log R(x,y) + log R(x',y') - log R(x,y') - log R(x',y)|`.
    pub residual: f64,
    /// Quadruple `(x, y, x', y')` attaining the residual.
    pub worst: (usize, usize, usize, usize),
    pub grid: usize,
    /// Cells dropped because both conditionals fall below the floor.
    pub excluded: usize,
}

impl SeparabilityReport {
    pub fn separable(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

/// Separability of the ratio `R(x,y) = ℓ(x|y)/ℓ(y|x)` on the pair's grid.
pub fn separability_residual(pair: &ConditionalPair) -> Result<SeparabilityReport> {
    let s = pair.grid + 1;
    let mut log_r = vec![f64::NAN; s * s];
    let mut excluded = 0;
    for x in 0..s {
        for y in 0..s {
            let (l1, l2) = (pair.x_given_y(x, y), pair.y_given_x(x, y));
            let tiny1 = l1 < SEPARABILITY_FLOOR;
            let tiny2 = l2 < SEPARABILITY_FLOOR;
            if (l1 <= 0.0 && !tiny2) || (l2 <= 0.0 && !tiny1) {
                return Err(Error::DomainMismatch { x, y });
            }
            if tiny1 || tiny2 {
                excluded += 1;
            } else {
                log_r[x * s + y] = l1.ln() - l2.ln();
            }
        }
    }
    let mut residual = 0.0;
    let mut worst = (0, 0, 0, 0);
    for x in 0..s {
        for xp in x + 1..s {
            for y in 0..s {
                let (a, c) = (log_r[x * s + y], log_r[xp * s + y]);
                if a.is_nan() || c.is_nan() {
                    continue;
                }
                for yp in y + 1..s {
                    let (b, d) = (log_r[x * s + yp], log_r[xp * s + yp]);
                    let r = (a + d - b - c).abs();
                    if r > residual {
                        residual = r;
                        worst = (x, y, xp, yp);
                    }
                }
            }
        }
    }
    Ok(SeparabilityReport {
        residual,
        worst,
        grid: pair.grid,
        excluded,
    })
}

/// Separability of a joint pmf's own conditionals on `{0..grid}²`.
pub fn separability_check(j: &JointPmf<f64>, grid: usize) -> Result<SeparabilityReport> {
    separability_residual(&ConditionalPair::from_joint(j, grid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use CountDistribution::*;

    #[test]
    fn linear_poisson_verdicts() {
        let v = check_linear_poisson(0.0, 1.0, 0.0, 2.0);
        assert!(v.compatible);
        assert_eq!(
            v.solution,
            Some(FamilyDescriptor::IndependentPoisson {
                lambda_x: 2.0,
                lambda_y: 1.0
            })
        );
        assert!(!check_linear_poisson(0.5, 1.0, 0.5, 1.0).compatible);
        assert!(!check_linear_poisson(0.0, 1.0, 0.5, 1.0).compatible);
    }

    #[test]
    fn binomial_thinning_inversion() {
        let v = check_binomial_thinning(0.25, 1.0 / 3.0, Poisson { lambda: 2.0 }, Poisson { lambda: 3.0 });
        assert!(v.compatible, "{}", v.reason);
        let Some(FamilyDescriptor::TrivariatePoisson { lambda0, lambda1, lambda2 }) = v.solution else {
            panic!()
        };
        assert!((lambda0 - 1.0).abs() < 1e-14 && lambda1 == 2.0 && lambda2 == 3.0);
        assert!(check_binomial_thinning(0.4, 0.4, Poisson { lambda: 1.5 }, Poisson { lambda: 1.5 }).compatible);
        let v = check_binomial_thinning(0.25, 1.0 / 3.0, NegBinomial { r: 2.0, p: 0.5 }, Poisson { lambda: 3.0 });
        assert!(!v.compatible && v.solution.is_none());
    }

    #[test]
    fn binomial_thinning_is_symmetric() {
        for (a, b, le, lh) in [(0.25, 1.0 / 3.0, 2.0, 3.0), (0.3, 0.6, 1.0, 2.0), (0.5, 0.5, 1.0, 1.0)] {
            let v1 = check_binomial_thinning(a, b, Poisson { lambda: le }, Poisson { lambda: lh });
            let v2 = check_binomial_thinning(b, a, Poisson { lambda: lh }, Poisson { lambda: le });
            assert_eq!(v1.compatible, v2.compatible);
        }
    }

    #[test]
    fn car_case_i_and_degenerate() {
        let spec = CarSpec::bivariate(Bernoulli { p: 0.25 }, Bernoulli { p: 1.0 / 3.0 }, Poisson { lambda: 2.0 }, Poisson { lambda: 3.0 }).unwrap();
        assert!(check_car_structure(&spec).unwrap().compatible);
        let spec = CarSpec::bivariate(Degenerate { k: 1 }, Bernoulli { p: 0.5 }, Poisson { lambda: 2.0 }, Poisson { lambda: 3.0 }).unwrap();
        assert!(matches!(check_car_structure(&spec), Err(Error::DegenerateSpec(_))));
    }

    #[test]
    fn car_case_ii_resolves_theta_family() {
        let (delta, t1, t2, t3, t4) = (9.666666666666666, 0.10344827586206896, -0.29655172413793107, 0.18620689655172412, -0.41379310344827586);
        let spec = CarSpec::bivariate(
            ThetaRatio { theta_num: t2, theta_den: t1 },
            ThetaRatio { theta_num: t4, theta_den: t3 },
            NegBinomial { r: delta, p: 1.0 / (1.0 + t1) },
            NegBinomial { r: delta, p: 1.0 / (1.0 + t3) },
        )
        .unwrap();
        let v = check_car_structure(&spec).unwrap();
        assert!(v.compatible, "{}", v.reason);
        assert!(matches!(v.solution, Some(FamilyDescriptor::Theta(_))));
    }

    #[test]
    fn car_three_dims() {
        let nb = NegBinomial { r: 1.0, p: 0.5 };
        let spec = CarSpec::new(vec![nb; 3], |_, _| Bernoulli { p: 0.3 }).unwrap();
        assert!(!check_car_structure(&spec).unwrap().compatible);
        // unit Poisson-gamma: p_i = 3/4
        let spec = CarSpec::new(vec![NegBinomial { r: 1.0, p: 0.75 }; 3], |_, _| Geometric { p: 0.75 }).unwrap();
        let v = check_car_structure(&spec).unwrap();
        assert!(v.compatible, "{}", v.reason);
        let Some(FamilyDescriptor::PoissonGamma { alpha, beta, lambdas }) = v.solution else { panic!() };
        assert_eq!((alpha, beta), (1.0, 1.0));
        for l in lambdas {
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn random_coeff_verdicts() {
        let nb = NegBinomial { r: 1.0, p: 0.5 };
        let v = check_random_coeff(&RandomCoeffSpec::bivariate((1.0, 1.0), (1.0, 1.0), nb, nb).unwrap());
        assert_eq!(
            v.solution,
            Some(FamilyDescriptor::TrivariateNb {
                alpha: 1.0,
                beta1: 1.0,
                beta2: 1.0,
                theta: 0.5
            })
        );
        assert!(!check_random_coeff(&RandomCoeffSpec::bivariate((1.0, 1.0), (2.0, 1.0), nb, nb).unwrap()).compatible);
        let three = RandomCoeffSpec::new(vec![nb; 3], |_, _| (1.0, 1.0)).unwrap();
        assert!(!check_random_coeff(&three).compatible);
    }

    #[test]
    fn product_pmf_is_separable() {
        let j = JointPmf::from_fn(2, 10, |i| 0.5f64.powi(i[0] as i32 + 1) * 0.3 * 0.7f64.powi(i[1] as i32)).unwrap();
        assert!(separability_check(&j, 10).unwrap().residual < 1e-12);
    }

    #[test]
    fn linear_poisson_pair_is_not_separable() {
        let pair = ConditionalPair::from_linear_poisson(0.5, 1.0, 0.5, 1.0, 10).unwrap();
        assert!(separability_residual(&pair).unwrap().residual > 1e-3);
        let pair = ConditionalPair::from_linear_poisson(0.0, 1.0, 0.0, 2.0, 10).unwrap();
        assert!(separability_residual(&pair).unwrap().residual < 1e-12);
    }

    #[test]
    fn support_mismatch() {
        let pair = ConditionalPair::new(2, |x, _| if x == 2 { 0.0 } else { 0.5 }, |_, _| 1.0 / 3.0);
        assert!(matches!(separability_residual(&pair), Err(Error::DomainMismatch { x: 2, y: 0 })));
    }
}
