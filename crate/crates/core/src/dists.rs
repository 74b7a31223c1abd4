//! Count-distribution catalogue.
//!
//! Negative binomials use the (number of successes `r`, success probability
//! `p`) parametrization, `pmf(k) = C(k+r-1, k) p^r (1-p)^k`. The odds form
//! `θ = (1-p)/p` used by the ratio-of-affine pgfs converts through
//! [`p_from_theta`] / [`theta_from_p`] and nowhere else.

use std::fmt;

use crate::error::{Error, Result};
use crate::num::{ln_beta, ln_factorial, ln_nb_coeff, Real};
use crate::series::TruncatedSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountDistribution {
    Poisson { lambda: f64 },
    NegBinomial { r: f64, p: f64 },
    Geometric { p: f64 },
    Bernoulli { p: f64 },
    /// pgf `(1 + θ_num (1-u)) / (1 + θ_den (1-u))`.
    ThetaRatio { theta_num: f64, theta_den: f64 },
    /// Negative binomial with a beta-distributed success probability.
    BetaNB { r: f64, alpha1: f64, alpha2: f64 },
    Degenerate { k: u64 },
}

/// Success probability of the NB whose pgf is `(1 + θ(1-u))^{-r}`.
pub fn p_from_theta(theta: f64) -> f64 {
    1.0 / (1.0 + theta)
}

pub fn theta_from_p(p: f64) -> f64 {
    (1.0 - p) / p
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, v, "> 0"))
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(name, v, "in (0, 1)"))
    }
}

impl CountDistribution {
    pub fn validate(&self) -> Result<()> {
        use CountDistribution::*;
        match *self {
            Poisson { lambda } => positive("lambda", lambda),
            NegBinomial { r, p } => {
                positive("r", r)?;
                open_unit("p", p)
            }
            Geometric { p } => open_unit("p", p),
            Bernoulli { p } => {
                if (0.0..=1.0).contains(&p) {
                    Ok(())
                } else {
                    Err(Error::domain("p", p, "in [0, 1]"))
                }
            }
            ThetaRatio {
                theta_num,
                theta_den,
            } => {
                positive("theta_den", theta_den)?;
                if !(theta_num > -1.0) {
                    return Err(Error::domain("theta_num", theta_num, "> -1"));
                }
                if !(theta_den > theta_num) {
                    return Err(Error::domain(
                        "theta_num",
                        theta_num,
                        "< theta_den (theta_den > theta_num required)",
                    ));
                }
                Ok(())
            }
            BetaNB { r, alpha1, alpha2 } => {
                positive("r", r)?;
                positive("alpha1", alpha1)?;
                positive("alpha2", alpha2)
            }
            Degenerate { .. } => Ok(()),
        }
    }

    /// True for laws concentrated on a single value.
    pub fn is_point_mass(&self) -> bool {
        match *self {
            CountDistribution::Degenerate { .. } => true,
            CountDistribution::Bernoulli { p } => p == 0.0 || p == 1.0,
            _ => false,
        }
    }

    /// Geometric and zero-ratio laws normalized to `NegBinomial`.
    pub fn canonical(&self) -> CountDistribution {
        match *self {
            CountDistribution::Geometric { p } => CountDistribution::NegBinomial { r: 1.0, p },
            CountDistribution::ThetaRatio {
                theta_num,
                theta_den,
            } if theta_num == 0.0 => CountDistribution::NegBinomial {
                r: 1.0,
                p: p_from_theta(theta_den),
            },
            d => d,
        }
    }

    /// Closed-form pmf.
    pub fn pmf(&self, k: u64) -> Result<f64> {
        self.validate()?;
        use CountDistribution::*;
        let kf = k as f64;
        Ok(match *self {
            Poisson { lambda } => (-lambda + kf * lambda.ln() - ln_factorial(k)).exp(),
            NegBinomial { r, p } => nb_pmf(k, r, p),
            Geometric { p } => nb_pmf(k, 1.0, p),
            Bernoulli { p } => match k {
                0 => 1.0 - p,
                1 => p,
                _ => 0.0,
            },
            ThetaRatio {
                theta_num,
                theta_den,
            } => {
                // point mass at 0 mixed with a geometric, weight θ_num/θ_den
                let w = theta_num / theta_den;
                let atom = if k == 0 { w } else { 0.0 };
                atom + (1.0 - w) * nb_pmf(k, 1.0, p_from_theta(theta_den))
            }
            BetaNB { r, alpha1, alpha2 } => {
                (ln_nb_coeff(k, r) + ln_beta(alpha1 + r, alpha2 + kf) - ln_beta(alpha1, alpha2)).exp()
            }
            Degenerate { k: at } => {
                if k == at {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    /// Taylor coefficients of the pgf at `u = 0`, up to `order`.
    pub fn pgf_series<T: Real>(&self, order: usize) -> Result<TruncatedSeries<T>> {
        self.validate()?;
        use CountDistribution::*;
        let lit = T::lit;
        match *self {
            Poisson { lambda } => {
                let mut c = Vec::with_capacity(order + 1);
                let mut term = lit((-lambda).exp());
                for k in 0..=order {
                    c.push(term);
                    term = term * lit(lambda) / T::from_count(k + 1);
                }
                Ok(TruncatedSeries::new(c, order))
            }
            NegBinomial { r, p } => nb_series(r, p, order),
            Geometric { p } => nb_series(1.0, p, order),
            Bernoulli { p } => Ok(TruncatedSeries::affine(lit(1.0 - p), lit(p), order)),
            ThetaRatio {
                theta_num,
                theta_den,
            } => {
                let num = TruncatedSeries::affine(lit(1.0 + theta_num), lit(-theta_num), order);
                let den = TruncatedSeries::affine(lit(1.0 + theta_den), lit(-theta_den), order);
                num.mul(&den.reciprocal()?)
            }
            BetaNB { r, alpha1, alpha2 } => {
                // B(α1+r, α2)/B(α1, α2) · 2F1(r, α2; α1+r+α2; u)
                let mut c = Vec::with_capacity(order + 1);
                let mut term = lit((ln_beta(alpha1 + r, alpha2) - ln_beta(alpha1, alpha2)).exp());
                for k in 0..=order {
                    c.push(term);
                    let kf = k as f64;
                    term = term * lit((r + kf) * (alpha2 + kf) / ((kf + 1.0) * (alpha1 + r + alpha2 + kf)));
                }
                Ok(TruncatedSeries::new(c, order))
            }
            Degenerate { k } => {
                let mut c = vec![T::zero(); order + 1];
                if let Some(slot) = c.get_mut(k as usize) {
                    *slot = T::one();
                }
                Ok(TruncatedSeries::new(c, order))
            }
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.validate()?;
        use CountDistribution::*;
        Ok(match *self {
            Poisson { lambda } => lambda,
            NegBinomial { r, p } => r * (1.0 - p) / p,
            Geometric { p } => (1.0 - p) / p,
            Bernoulli { p } => p,
            ThetaRatio {
                theta_num,
                theta_den,
            } => theta_den - theta_num,
            BetaNB { r, alpha1, alpha2 } => {
                if alpha1 <= 1.0 {
                    return Err(Error::MomentDivergence(format!(
                        "beta-NB mean requires alpha1 > 1, got {alpha1}"
                    )));
                }
                r * alpha2 / (alpha1 - 1.0)
            }
            Degenerate { k } => k as f64,
        })
    }

    pub fn variance(&self) -> Result<f64> {
        self.validate()?;
        use CountDistribution::*;
        Ok(match *self {
            Poisson { lambda } => lambda,
            NegBinomial { r, p } => r * (1.0 - p) / (p * p),
            Geometric { p } => (1.0 - p) / (p * p),
            Bernoulli { p } => p * (1.0 - p),
            ThetaRatio {
                theta_num,
                theta_den,
            } => {
                let m = theta_den - theta_num;
                2.0 * theta_den * m + m - m * m
            }
            BetaNB { r, alpha1, alpha2 } => {
                if alpha1 <= 2.0 {
                    return Err(Error::MomentDivergence(format!(
                        "beta-NB variance requires alpha1 > 2, got {alpha1}"
                    )));
                }
                r * alpha2 * (r + alpha1 - 1.0) * (alpha2 + alpha1 - 1.0)
                    / ((alpha1 - 2.0) * (alpha1 - 1.0) * (alpha1 - 1.0))
            }
            Degenerate { .. } => 0.0,
        })
    }

    pub fn std_dev(&self) -> Result<f64> {
        self.variance().map(f64::sqrt)
    }
}

impl fmt::Display for CountDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CountDistribution::*;
        match *self {
            Poisson { lambda } => write!(f, "poisson:{lambda}"),
            NegBinomial { r, p } => write!(f, "nb:{r},{p}"),
            Geometric { p } => write!(f, "geometric:{p}"),
            Bernoulli { p } => write!(f, "bernoulli:{p}"),
            ThetaRatio {
                theta_num,
                theta_den,
            } => write!(f, "theta_ratio:{theta_num},{theta_den}"),
            BetaNB { r, alpha1, alpha2 } => write!(f, "beta_nb:{r},{alpha1},{alpha2}"),
            Degenerate { k } => write!(f, "degenerate:{k}"),
        }
    }
}

pub(crate) fn nb_pmf(k: u64, r: f64, p: f64) -> f64 {
    (ln_nb_coeff(k, r) + r * p.ln() + k as f64 * (1.0 - p).ln()).exp()
}

fn nb_series<T: Real>(r: f64, p: f64, order: usize) -> Result<TruncatedSeries<T>> {
    // (p / (1 - (1-p)u))^r = p^r (1 - (1-p)u)^{-r}
    let base = TruncatedSeries::affine(T::one(), T::lit(-(1.0 - p)), order);
    Ok(base.real_power(T::lit(-r))?.scale(T::lit(p.powf(r))))
}

/// Free-function form of [`CountDistribution::pmf`].
pub fn pmf_eval(d: &CountDistribution, k: u64) -> Result<f64> {
    d.pmf(k)
}

/// Free-function form of [`CountDistribution::pgf_series`].
pub fn pgf_series_of(d: &CountDistribution, order: usize) -> Result<TruncatedSeries<f64>> {
    d.pgf_series(order)
}

/// Free-function form of [`CountDistribution::mean`].
pub fn mean_of(d: &CountDistribution) -> Result<f64> {
    d.mean()
}
