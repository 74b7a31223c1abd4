//! Brute-force conditional quantities from a joint tensor.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::joint::{fmt17, pairwise_sum, JointPmf};
use crate::linalg::Matrix;
use crate::num::{ln_factorial, Real};

/// Slices lighter than this are treated as null sets by [`conditional_pmf`].
pub const NULL_SLICE: f64 = 1e-13;
/// Default slice-mass threshold of the conditional-expectation table.
pub const CE_THRESHOLD: f64 = 1e-10;
/// Affine fits are judged on the heaviest configurations covering this much mass.
pub const FIT_COVERAGE: f64 = 1.0 - 1e-6;

/// Conditional pmf of `target` given the other coordinates (in increasing order).
pub fn conditional_pmf<T: Real>(j: &JointPmf<T>, target: usize, given: &[usize]) -> Result<Vec<T>> {
    check_target(j, target)?;
    if given.len() + 1 != j.dim() {
        return Err(Error::DimensionMismatch(format!(
            "conditioning on {} values in a {}-dimensional pmf",
            given.len(),
            j.dim()
        )));
    }
    let mut idx = insert_at(given, target, 0);
    let slice: Vec<T> = (0..j.side())
        .map(|k| {
            idx[target] = k;
            j.get(&idx)
        })
        .collect();
    let mass = pairwise_sum(&slice);
    if !(mass > T::lit(NULL_SLICE)) {
        return Err(Error::NullConditioning(mass.to_f64_lossy()));
    }
    Ok(slice.into_iter().map(|p| p / mass).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CeRow<T> {
    /// Values of the non-target coordinates, in increasing coordinate order.
    pub config: Vec<usize>,
    pub mean: T,
    pub mass: T,
}

/// `E[X_target | rest]` for every configuration heavier than `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct CeTable<T> {
    pub dim: usize,
    pub target: usize,
    pub threshold: f64,
    pub rows: Vec<CeRow<T>>,
    /// Configurations with positive but sub-threshold mass.
    pub skipped: usize,
}

impl<T: Real> CeTable<T> {
    /// Conditional mean at one configuration, if tabulated.
    pub fn mean_at(&self, config: &[usize]) -> Option<T> {
        self.rows.iter().find(|r| r.config == config).map(|r| r.mean)
    }

    /// One row per configuration: coordinate values, conditional mean, slice mass.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let names: Vec<String> = (0..self.dim).filter(|&k| k != self.target).map(|k| format!("x{k}")).collect();
        let _ = writeln!(out, "{},mean,mass", names.join(","));
        for r in &self.rows {
            let cfg: Vec<String> = r.config.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{}",
                cfg.join(","),
                fmt17(r.mean.to_f64_lossy()),
                fmt17(r.mass.to_f64_lossy())
            );
        }
        out
    }
}

pub fn conditional_expectation<T: Real>(j: &JointPmf<T>, target: usize) -> Result<CeTable<T>> {
    conditional_expectation_with(j, target, CE_THRESHOLD)
}

pub fn conditional_expectation_with<T: Real>(j: &JointPmf<T>, target: usize, threshold: f64) -> Result<CeTable<T>> {
    check_target(j, target)?;
    let n = j.dim();
    let side = j.side();
    let slots = side.pow((n - 1) as u32);
    let mut mass = vec![T::zero(); slots];
    let mut first = vec![T::zero(); slots];
    for (flat, &p) in j.probs().iter().enumerate() {
        if p == T::zero() {
            continue;
        }
        let idx = j.index_of(flat);
        let key = idx
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != target)
            .fold(0, |acc, (_, &v)| acc * side + v);
        mass[key] = mass[key] + p;
        first[key] = first[key] + p * T::from_count(idx[target]);
    }
    let thr = T::lit(threshold);
    let mut rows = Vec::new();
    let mut skipped = 0;
    for key in 0..slots {
        let m = mass[key];
        if m > thr {
            rows.push(CeRow {
                config: unflatten(key, side, n - 1),
                mean: first[key] / m,
                mass: m,
            });
        } else if m > T::zero() {
            skipped += 1;
        }
    }
    Ok(CeTable {
        dim: n,
        target,
        threshold,
        rows,
        skipped,
    })
}

/// Probability-weighted affine fit of a conditional-expectation table.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFitReport<T> {
    pub target: usize,
    /// One slope per non-target coordinate, in increasing coordinate order.
    pub slopes: Vec<T>,
    pub intercept: T,
    pub max_abs_deviation: T,
    pub mass_covered: T,
    pub configurations: usize,
}

/// Fits `E[X_target | rest] ≈ Σ s_k rest_k + c` by weighted least squares on
/// the heaviest configurations covering `1 - 1e-6` of the tabulated mass,
/// and reports the largest deviation over those configurations.
pub fn affine_deviation<T: Real>(j: &JointPmf<T>, target: usize) -> Result<AffineFitReport<T>> {
    let table = conditional_expectation(j, target)?;
    affine_fit(&table)
}

pub fn affine_fit<T: Real>(table: &CeTable<T>) -> Result<AffineFitReport<T>> {
    let k = table.dim;
    let needed = k + 1;
    let mut rows: Vec<&CeRow<T>> = table.rows.iter().collect();
    if rows.len() < needed {
        return Err(Error::UnderdeterminedFit {
            found: rows.len(),
            needed,
        });
    }
    rows.sort_by(|a, b| b.mass.partial_cmp(&a.mass).unwrap().then_with(|| a.config.cmp(&b.config)));
    let total = pairwise_sum(&rows.iter().map(|r| r.mass).collect::<Vec<_>>());
    let goal = total * T::lit(FIT_COVERAGE);
    let mut covered = T::zero();
    let mut used = 0;
    for r in &rows {
        covered = covered + r.mass;
        used += 1;
        if covered >= goal && used >= needed {
            break;
        }
    }
    let rows = &rows[..used];

    let design = |r: &CeRow<T>| -> Vec<T> {
        let mut phi: Vec<T> = r.config.iter().map(|&v| T::from_count(v)).collect();
        phi.push(T::one());
        phi
    };
    let mut normal = Matrix::zeros(k);
    let mut rhs = vec![T::zero(); k];
    for r in rows {
        let phi = design(r);
        for a in 0..k {
            rhs[a] = rhs[a] + r.mass * phi[a] * r.mean;
            for b in 0..k {
                normal[(a, b)] = normal[(a, b)] + r.mass * phi[a] * phi[b];
            }
        }
    }
    let scale = (0..k).map(|a| normal[(a, a)]).fold(T::zero(), T::max);
    let beta = normal
        .solve(&rhs, scale * T::lit(1e-13))
        .ok_or(Error::UnderdeterminedFit { found: used, needed })?;
    let max_abs_deviation = rows
        .iter()
        .map(|r| {
            let fit = design(r).iter().zip(&beta).fold(T::zero(), |acc, (&p, &b)| acc + p * b);
            (fit - r.mean).abs()
        })
        .fold(T::zero(), T::max);
    Ok(AffineFitReport {
        target: table.target,
        slopes: beta[..k - 1].to_vec(),
        intercept: beta[k - 1],
        max_abs_deviation,
        mass_covered: covered,
        configurations: used,
    })
}

/// Mean vector and covariance matrix of the (renormalized) tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<T> {
    pub mean: Vec<T>,
    pub cov: Matrix<T>,
}

impl<T: Real> Moments<T> {
    pub fn correlation(&self, a: usize, b: usize) -> T {
        self.cov[(a, b)] / (self.cov[(a, a)] * self.cov[(b, b)]).sqrt()
    }
}

pub fn moments<T: Real>(j: &JointPmf<T>) -> Moments<T> {
    let n = j.dim();
    let total = j.captured_mass();
    let mut mean = vec![T::zero(); n];
    let mut second: Matrix<T> = Matrix::zeros(n);
    for (flat, &p) in j.probs().iter().enumerate() {
        if p == T::zero() {
            continue;
        }
        let idx = j.index_of(flat);
        for a in 0..n {
            let xa = T::from_count(idx[a]);
            mean[a] = mean[a] + p * xa;
            for b in a..n {
                second[(a, b)] = second[(a, b)] + p * xa * T::from_count(idx[b]);
            }
        }
    }
    for m in mean.iter_mut() {
        *m = *m / total;
    }
    let mut cov = Matrix::zeros(n);
    for a in 0..n {
        for b in a..n {
            let c = second[(a, b)] / total - mean[a] * mean[b];
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }
    Moments { mean, cov }
}

fn poisson_vec(lambda: f64, bound: usize) -> Vec<f64> {
    (0..=bound as u64)
        .map(|k| (-lambda + k as f64 * lambda.ln() - ln_factorial(k)).exp())
        .collect()
}

/// `X = W1+W12+W13`, `Y = W2+W12+W23`, `Z = W3+W13+W23` with independent
/// Poisson `W`s; rates ordered `(λ1, λ2, λ3, λ12, λ13, λ23)`.
pub fn pairwise_poisson_model(rates: [f64; 6], bound: usize) -> Result<JointPmf<f64>> {
    for (i, &r) in rates.iter().enumerate() {
        if !(r > 0.0) {
            return Err(Error::domain(&format!("rate[{i}]"), r, "> 0"));
        }
    }
    let w: Vec<Vec<f64>> = rates.iter().map(|&r| poisson_vec(r, bound)).collect();
    JointPmf::from_fn(3, bound, |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        let mut acc = 0.0;
        for a in 0..=x.min(y) {
            for b in 0..=(x - a).min(z) {
                for c in 0..=(y - a).min(z - b) {
                    acc += w[3][a] * w[4][b] * w[5][c] * w[0][x - a - b] * w[1][y - a - c] * w[2][z - b - c];
                }
            }
        }
        acc
    })
}

/// `X = W1+W123`, `Y = W2+W123`, `Z = W3+W123`; rates `(λ1, λ2, λ3, λ123)`.
pub fn common_poisson_model(rates: [f64; 4], bound: usize) -> Result<JointPmf<f64>> {
    for (i, &r) in rates.iter().enumerate() {
        if !(r > 0.0) {
            return Err(Error::domain(&format!("rate[{i}]"), r, "> 0"));
        }
    }
    let w: Vec<Vec<f64>> = rates.iter().map(|&r| poisson_vec(r, bound)).collect();
    JointPmf::from_fn(3, bound, |i| {
        let m = i[0].min(i[1]).min(i[2]);
        (0..=m).map(|c| w[3][c] * w[0][i[0] - c] * w[1][i[1] - c] * w[2][i[2] - c]).sum()
    })
}

fn check_target<T: Real>(j: &JointPmf<T>, target: usize) -> Result<()> {
    if target >= j.dim() || j.dim() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "target {target} in a {}-dimensional pmf",
            j.dim()
        )));
    }
    Ok(())
}

fn insert_at(values: &[usize], at: usize, v: usize) -> Vec<usize> {
    let mut out = values.to_vec();
    out.insert(at, v);
    out
}

fn unflatten(mut flat: usize, side: usize, len: usize) -> Vec<usize> {
    let mut idx = vec![0; len];
    for slot in idx.iter_mut().rev() {
        *slot = flat % side;
        flat /= side;
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product() -> JointPmf<f64> {
        let f = [0.2, 0.5, 0.3];
        let g = [0.6, 0.1, 0.3];
        JointPmf::from_fn(2, 2, |i| f[i[0]] * g[i[1]]).unwrap()
    }

    #[test]
    fn product_conditional_is_marginal() {
        let c = conditional_pmf(&product(), 0, &[2]).unwrap();
        for (a, b) in c.iter().zip([0.2, 0.5, 0.3]) {
            assert!((a - b).abs() < 1e-15);
        }
        let s: f64 = c.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn null_slice() {
        let j = JointPmf::from_fn(2, 5, |i| if i == [3, 5] { 1.0 } else { 0.0 }).unwrap();
        assert!(matches!(conditional_pmf(&j, 0, &[4]), Err(Error::NullConditioning(_))));
        let t = conditional_expectation(&j, 0).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.mean_at(&[5]), Some(3.0));
    }

    #[test]
    fn point_mass_moments() {
        let j: JointPmf<f64> = JointPmf::from_fn(2, 4, |i| if i == [2, 3] { 1.0 } else { 0.0 }).unwrap();
        let m = moments(&j);
        assert_eq!(m.mean, vec![2.0, 3.0]);
        assert!(m.cov[(0, 1)].abs() < 1e-15 && m.cov[(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn exact_affine_table_fits() {
        // E[X | Y] = Y/2 on a binomial-thinning law
        let j: JointPmf<f64> = JointPmf::from_fn(2, 6, |i| {
            let (x, y) = (i[0], i[1]);
            if x > y {
                return 0.0;
            }
            let binom = (ln_factorial(y as u64) - ln_factorial(x as u64) - ln_factorial((y - x) as u64)).exp();
            binom * 0.5f64.powi(y as i32) / 7.0
        })
        .unwrap();
        let r = affine_deviation(&j, 0).unwrap();
        assert!((r.slopes[0] - 0.5).abs() < 1e-12 && r.intercept.abs() < 1e-12);
        assert!(r.max_abs_deviation < 1e-12);
    }

    #[test]
    fn underdetermined() {
        let j: JointPmf<f64> = JointPmf::from_fn(2, 3, |i| if i == [1, 1] { 1.0 } else { 0.0 }).unwrap();
        assert!(matches!(affine_deviation(&j, 0), Err(Error::UnderdeterminedFit { .. })));
    }

    #[test]
    fn csv_columns() {
        let t = conditional_expectation(&product(), 1).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x0,mean,mass"));
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn common_model_pairwise_covariance() {
        let j = common_poisson_model([1.0, 1.0, 1.0, 1.0], 20).unwrap();
        let m = moments(&j);
        assert!((m.cov[(0, 1)] - 1.0).abs() < 1e-9 && (m.cov[(1, 2)] - 1.0).abs() < 1e-9);
        let p = pairwise_poisson_model([1.0; 6], 25).unwrap();
        let m = moments(&p);
        assert!((m.mean[0] - 3.0).abs() < 1e-9 && (m.cov[(0, 2)] - 1.0).abs() < 1e-9);
    }
}
