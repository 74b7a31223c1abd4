//! Linear conditional expectations: necessary conditions, the θ-domain
//! classifier and bounded-support feasibility with Farkas certificates.

use std::fmt;

use crate::error::{Error, Result};
use crate::families::ThetaFamilyParams;
use crate::joint::{fmt17, JointPmf};
use crate::linalg::{principal_minors, Matrix, PrincipalMinor};
use crate::num::Real;
use crate::simplex::{phase_one, LpSystem, Phase1};

/// `E[X_i | rest] = Σ_{j≠i} a_ij X_j + intercept_i`.
///
/// In two dimensions `E[X|Y] = cY + d` and `E[Y|X] = aX + b`, so
/// `a_01 = c`, `a_10 = a` and the intercepts are `(d, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCeSpec<T> {
    slopes: Matrix<T>,
    intercepts: Vec<T>,
}

impl<T: Real> LinearCeSpec<T> {
    pub fn new(slopes: Matrix<T>, intercepts: Vec<T>) -> Result<Self> {
        let n = slopes.size();
        if n < 2 || intercepts.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n}x{n} slopes with {} intercepts",
                intercepts.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if !slopes[(i, j)].is_finite() {
                    return Err(Error::domain("slope", slopes[(i, j)].to_f64_lossy(), "finite"));
                }
            }
            if !intercepts[i].is_finite() {
                return Err(Error::domain("intercept", intercepts[i].to_f64_lossy(), "finite"));
            }
        }
        let mut slopes = slopes;
        for i in 0..n {
            slopes[(i, i)] = T::zero();
        }
        Ok(Self { slopes, intercepts })
    }

    /// `E[Y|X] = aX + b`, `E[X|Y] = cY + d`.
    pub fn bivariate(a: T, b: T, c: T, d: T) -> Result<Self> {
        Self::new(Matrix::from_rows(&[vec![T::zero(), c], vec![a, T::zero()]]), vec![d, b])
    }

    pub fn dim(&self) -> usize {
        self.intercepts.len()
    }

    pub fn slope(&self, i: usize, j: usize) -> T {
        self.slopes[(i, j)]
    }

    pub fn intercept(&self, i: usize) -> T {
        self.intercepts[i]
    }

    /// `(a, b, c, d)` of a bivariate spec.
    pub fn abcd(&self) -> Result<(T, T, T, T)> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch(format!("bivariate spec required, n = {}", self.dim())));
        }
        Ok((self.slopes[(1, 0)], self.intercepts[1], self.slopes[(0, 1)], self.intercepts[0]))
    }

    /// `I - A` with `A` the slope matrix.
    pub fn i_minus_a(&self) -> Matrix<T> {
        let n = self.dim();
        let mut m = Matrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m[(i, j)] = -self.slopes[(i, j)];
                }
            }
        }
        m
    }
}

/// Bivariate slope-product classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairCase {
    /// `a = c = 0`.
    Uncorrelated,
    /// `ac ∈ (0, 1)`.
    Correlated { ac: f64 },
    /// `ac = 1`: `X` and `Y` are affinely related.
    LinearDependence,
    /// `ac > 1`: no solution with positive variances.
    NoPositiveVariance { ac: f64 },
    /// Exactly one slope vanishes, or the slopes have opposite signs.
    SignMismatch { ac: f64 },
}

impl PairCase {
    pub fn holds(&self) -> bool {
        !matches!(self, PairCase::NoPositiveVariance { .. } | PairCase::SignMismatch { .. })
    }
}

impl fmt::Display for PairCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairCase::Uncorrelated => write!(f, "uncorrelated (a = c = 0)"),
            PairCase::Correlated { ac } => write!(f, "correlated (ac = {ac})"),
            PairCase::LinearDependence => write!(f, "linear dependence (ac = 1)"),
            PairCase::NoPositiveVariance { ac } => write!(f, "violated: ac = {ac} > 1"),
            PairCase::SignMismatch { ac } => write!(f, "violated: a and c must vanish together and share a sign (ac = {ac})"),
        }
    }
}

pub fn classify_pair(a: f64, c: f64) -> PairCase {
    let ac = a * c;
    if a == 0.0 && c == 0.0 {
        PairCase::Uncorrelated
    } else if a == 0.0 || c == 0.0 || ac < 0.0 {
        PairCase::SignMismatch { ac }
    } else if (ac - 1.0).abs() <= 1e-12 {
        PairCase::LinearDependence
    } else if ac < 1.0 {
        PairCase::Correlated { ac }
    } else {
        PairCase::NoPositiveVariance { ac }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryReport<T> {
    /// Slope-product case for every pair `i < j`.
    pub pairs: Vec<((usize, usize), PairCase)>,
    /// All principal minors of `I - A` of order `>= 2`.
    pub minors: Vec<PrincipalMinor<T>>,
}

impl<T: Real> NecessaryReport<T> {
    pub fn all_minors_positive(&self) -> bool {
        self.minors.iter().all(|m| m.value > T::zero())
    }

    pub fn holds(&self) -> bool {
        self.pairs.iter().all(|(_, c)| c.holds()) && (self.pairs.len() == 1 || self.all_minors_positive())
    }
}

pub fn necessary_conditions<T: Real>(spec: &LinearCeSpec<T>) -> NecessaryReport<T> {
    let n = spec.dim();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let case = classify_pair(spec.slope(j, i).to_f64_lossy(), spec.slope(i, j).to_f64_lossy());
            pairs.push(((i, j), case));
        }
    }
    NecessaryReport {
        pairs,
        minors: principal_minors(&spec.i_minus_a()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaRegion {
    A,
    B,
    C,
    D,
    E,
    Outside,
}

impl fmt::Display for ThetaRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ThetaRegion::A => "(a)",
            ThetaRegion::B => "(b)",
            ThetaRegion::C => "(c)",
            ThetaRegion::D => "(d)",
            ThetaRegion::E => "(e)",
            ThetaRegion::Outside => "outside",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaDomain {
    pub region: ThetaRegion,
    pub params: Option<ThetaFamilyParams>,
}

const REGION_TOL: f64 = 1e-12;

/// Region tag only; no parameter resolution.
pub fn theta_region(a: f64, b: f64, c: f64, d: f64) -> ThetaRegion {
    let ratio = b / d;
    let root = (a / c).sqrt();
    let edge = a * (1.0 - c) / (c * (1.0 - a));
    if (a - c).abs() <= REGION_TOL && a < 1.0 {
        if (b - d).abs() <= REGION_TOL * b.max(d) {
            ThetaRegion::C
        } else {
            ThetaRegion::Outside
        }
    } else if a >= 1.0 && c < 1.0 && ratio > root {
        ThetaRegion::A
    } else if c >= 1.0 && a < 1.0 && ratio < root {
        ThetaRegion::B
    } else if c < a && a < 1.0 && root < ratio && ratio < edge {
        ThetaRegion::D
    } else if a < c && c < 1.0 && root > ratio && ratio > edge {
        ThetaRegion::E
    } else {
        ThetaRegion::Outside
    }
}

/// Locates `(a, b, c, d)` in the five-region domain of the NB-margin family
/// and, inside it, resolves the family parameters.
pub fn classify_theta_domain(a: f64, b: f64, c: f64, d: f64) -> Result<ThetaDomain> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(name, v, "> 0"));
        }
    }
    if a * c >= 1.0 {
        return Err(Error::CorrelationBound(a * c));
    }
    let region = theta_region(a, b, c, d);
    let params = match region {
        ThetaRegion::Outside => None,
        ThetaRegion::C => Some(ThetaFamilyParams::new(d / c, c, 0.0, a, 0.0)?),
        _ => {
            let delta = (b * b * c - a * d * d) / (a * d * (1.0 - c) + b * c * (a - 1.0));
            Some(ThetaFamilyParams::new(delta, d / delta, d / delta - c, b / delta, b / delta - a)?)
        }
    };
    Ok(ThetaDomain { region, params })
}

/// Smallest perfect square `N > 4` with `1/√N < a, c < 1 - 1/√N` and `b, d < √N`.
pub fn choose_support_bound(a: f64, b: f64, c: f64, d: f64) -> Result<usize> {
    if !(a > 0.0 && a < 1.0 && c > 0.0 && c < 1.0) {
        return Err(Error::OutOfScope(format!(
            "bounded-support construction needs 0 < a, c < 1 (a = {a}, c = {c})"
        )));
    }
    if !(b > 0.0 && d > 0.0) {
        return Err(Error::OutOfScope(format!("intercepts must be positive (b = {b}, d = {d})")));
    }
    let (lo, hi, top) = (a.min(c), a.max(c), b.max(d));
    let mut s = 3usize;
    loop {
        let r = s as f64;
        if 1.0 / r < lo && hi < 1.0 - 1.0 / r && top < r {
            return Ok(s * s);
        }
        s += 1;
    }
}

/// `(2N+3) × (N+1)²` system: normalization, then one row per `i`, then one per `j`.
/// Column `(i, j)` sits at `i (N+1) + j`.
pub fn build_lp_system<T: Real>(spec: &LinearCeSpec<T>, bound: usize) -> Result<LpSystem<T>> {
    let (a, b, c, d) = spec.abcd()?;
    let side = bound + 1;
    let rows = 2 * bound + 3;
    let cols = side * side;
    let mut m = vec![T::zero(); rows * cols];
    for i in 0..side {
        for j in 0..side {
            let col = i * side + j;
            let (fi, fj) = (T::from_count(i), T::from_count(j));
            m[col] = T::one();
            m[(i + 1) * cols + col] = a * fi + b - fj;
            m[(j + bound + 2) * cols + col] = c * fj + d - fi;
        }
    }
    let mut rhs = vec![T::zero(); rows];
    rhs[0] = T::one();
    Ok(LpSystem { rows, cols, a: m, b: rhs })
}

/// Dual witness of infeasibility: `y0 < 0` and `y_1 .. y_{R-1}` with every
/// column inequality strict.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate<T> {
    pub y0: T,
    pub y: Vec<T>,
    pub bound: usize,
}

impl<T: Real> FarkasCertificate<T> {
    /// `y0,y1,...` with 17 significant digits.
    pub fn to_csv_line(&self) -> String {
        std::iter::once(self.y0)
            .chain(self.y.iter().copied())
            .map(|v| fmt17(v.to_f64_lossy()))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv_line(line: &str, bound: usize) -> Result<Self> {
        let vals: Vec<f64> = line
            .trim()
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::DimensionMismatch(format!("bad certificate value: {e}")))?;
        let Some((&y0, rest)) = vals.split_first() else {
            return Err(Error::DimensionMismatch("empty certificate".into()));
        };
        Ok(Self {
            y0: T::lit(y0),
            y: rest.iter().map(|&v| T::lit(v)).collect(),
            bound,
        })
    }
}

/// Strictness margin of the certificate inequalities.
pub const CERT_MARGIN: f64 = 1e-10;

/// Smallest left-hand side `(ai - j + b) y_{i+1} + (-i + cj + d) y_{j+N+2}`.
pub fn certificate_margin<T: Real>(cert: &FarkasCertificate<T>, spec: &LinearCeSpec<T>) -> Result<T> {
    let (a, b, c, d) = spec.abcd()?;
    let n = cert.bound;
    if cert.y.len() != 2 * n + 2 {
        return Err(Error::DimensionMismatch(format!(
            "certificate for N = {n} needs {} entries, got {}",
            2 * n + 2,
            cert.y.len()
        )));
    }
    let mut worst = T::infinity();
    for i in 0..=n {
        for j in 0..=n {
            let (fi, fj) = (T::from_count(i), T::from_count(j));
            let lhs = (a * fi - fj + b) * cert.y[i] + (-fi + c * fj + d) * cert.y[j + n + 1];
            worst = worst.min(lhs);
        }
    }
    Ok(worst)
}

pub fn verify_certificate<T: Real>(cert: &FarkasCertificate<T>, spec: &LinearCeSpec<T>) -> bool {
    cert.y0 < T::zero()
        && certificate_margin(cert, spec).is_ok_and(|m| m > T::lit(CERT_MARGIN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub pmf: JointPmf<T>,
    /// Largest absolute equality-row residual.
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Feasible(LpSolution<T>),
    Infeasible(FarkasCertificate<T>),
}

/// Equality rows must hold to this absolute accuracy.
pub const LP_RESIDUAL: f64 = 1e-8;

/// Either a pmf on `{0..N}²` with the prescribed conditional means or a
/// verified Farkas certificate. The returned vertex depends on the pivot rule.
pub fn solve_feasibility<T: Real>(spec: &LinearCeSpec<T>, bound: usize) -> Result<LpOutcome<T>> {
    let sys = build_lp_system(spec, bound)?;
    match phase_one(&sys)? {
        Phase1::Feasible(x) => {
            let pmf = JointPmf::new(2, bound, x.clone())?;
            let residual = sys.residual(pmf.probs());
            if residual > T::lit(LP_RESIDUAL) {
                return Err(Error::NumericalFailure(format!("feasible point residual {residual}")));
            }
            Ok(LpOutcome::Feasible(LpSolution { pmf, residual }))
        }
        Phase1::Infeasible(y) => {
            let scale = -y[0];
            if !(scale > T::zero()) {
                return Err(Error::NumericalFailure("phase-1 dual has y0 >= 0".into()));
            }
            let cert = FarkasCertificate {
                y0: -T::one(),
                y: y[1..].iter().map(|&v| v / scale).collect(),
                bound,
            };
            if !verify_certificate(&cert, spec) {
                return Err(Error::NumericalFailure("certificate failed verification".into()));
            }
            Ok(LpOutcome::Infeasible(cert))
        }
    }
}

/// Exploratory `n >= 3` analogue: one row per coordinate and configuration of
/// the others, `Σ_{x_i} (Σ_j a_ij x_j + intercept_i - x_i) p(x) = 0`.
pub fn build_lp_system_nd<T: Real>(spec: &LinearCeSpec<T>, bound: usize) -> LpSystem<T> {
    let n = spec.dim();
    let side = bound + 1;
    let cols = side.pow(n as u32);
    let per = side.pow((n - 1) as u32);
    let rows = 1 + n * per;
    let mut m = vec![T::zero(); rows * cols];
    let mut idx = vec![0usize; n];
    for col in 0..cols {
        let mut f = col;
        for slot in idx.iter_mut().rev() {
            *slot = f % side;
            f /= side;
        }
        m[col] = T::one();
        for i in 0..n {
            let mut lhs = spec.intercept(i) - T::from_count(idx[i]);
            let mut key = 0;
            for j in (0..n).filter(|&j| j != i) {
                lhs = lhs + spec.slope(i, j) * T::from_count(idx[j]);
                key = key * side + idx[j];
            }
            m[(1 + i * per + key) * cols + col] = lhs;
        }
    }
    let mut b = vec![T::zero(); rows];
    b[0] = T::one();
    LpSystem { rows, cols, a: m, b }
}

/// Exploratory feasibility for `n >= 3`; certificates are checked against the
/// generic Farkas inequalities of [`build_lp_system_nd`].
pub fn solve_feasibility_nd<T: Real>(spec: &LinearCeSpec<T>, bound: usize) -> Result<LpOutcome<T>> {
    let sys = build_lp_system_nd(spec, bound);
    match phase_one(&sys)? {
        Phase1::Feasible(x) => {
            let pmf = JointPmf::new(spec.dim(), bound, x)?;
            let residual = sys.residual(pmf.probs());
            if residual > T::lit(LP_RESIDUAL) {
                return Err(Error::NumericalFailure(format!("feasible point residual {residual}")));
            }
            Ok(LpOutcome::Feasible(LpSolution { pmf, residual }))
        }
        Phase1::Infeasible(y) => {
            let scale = -y[0];
            if !(scale > T::zero()) {
                return Err(Error::NumericalFailure("phase-1 dual has y0 >= 0".into()));
            }
            let mut full: Vec<T> = y.iter().map(|&v| v / scale).collect();
            full[0] = T::zero();
            if !(sys.min_dual_slack(&full) > T::lit(CERT_MARGIN)) {
                return Err(Error::NumericalFailure("certificate failed verification".into()));
            }
            Ok(LpOutcome::Infeasible(FarkasCertificate {
                y0: -T::one(),
                y: full[1..].to_vec(),
                bound,
            }))
        }
    }
}
