//! Dense joint pmf on `{0..N}^n`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::num::Real;

const CSV_MAGIC: &str = "# countcompat-jointpmf";

/// Probability tensor on `{0..N}^n`, row-major with coordinate 0 slowest.
///
/// `captured_mass` is the total probability inside the box; it falls short
/// of one when an unbounded law has been truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<T> {
    dim: usize,
    bound: usize,
    probs: Vec<T>,
    captured_mass: T,
}

impl<T: Real> JointPmf<T> {
    /// Wraps a tensor, clamping entries in `[-1e-12, 0)` to zero.
    pub fn new(dim: usize, bound: usize, probs: Vec<T>) -> Result<Self> {
        let expected = (bound + 1).pow(dim as u32);
        if dim == 0 || probs.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "tensor of dimension {dim} and bound {bound} needs {expected} entries, got {}",
                probs.len()
            )));
        }
        let clamp = T::lit(crate::series::NEGATIVE_CLAMP);
        let mut probs = probs;
        for (index, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -clamp {
                return Err(Error::InvalidPgf {
                    index,
                    value: p.to_f64_lossy(),
                });
            }
            if *p < T::zero() {
                *p = T::zero();
            }
        }
        let captured_mass = pairwise_sum(&probs);
        if captured_mass > T::one() + clamp {
            return Err(Error::InvalidPgf {
                index: 0,
                value: captured_mass.to_f64_lossy(),
            });
        }
        Ok(Self {
            dim,
            bound,
            probs,
            captured_mass,
        })
    }

    /// Fills the tensor from `f(&[x_0, .., x_{n-1}])`.
    pub fn from_fn(dim: usize, bound: usize, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let side = bound + 1;
        let len = side.pow(dim as u32);
        let mut idx = vec![0usize; dim];
        let mut probs = Vec::with_capacity(len);
        for flat in 0..len {
            unflatten(flat, side, &mut idx);
            probs.push(f(&idx));
        }
        Self::new(dim, bound, probs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-axis support bound `N`.
    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn side(&self) -> usize {
        self.bound + 1
    }

    pub fn captured_mass(&self) -> T {
        self.captured_mass
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim);
        idx.iter().fold(0, |acc, &i| acc * self.side() + i)
    }

    pub fn index_of(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        unflatten(flat, self.side(), &mut idx);
        idx
    }

    pub fn get(&self, idx: &[usize]) -> T {
        if idx.iter().any(|&i| i > self.bound) {
            return T::zero();
        }
        self.probs[self.flat_index(idx)]
    }

    /// `p(x, y)` for a bivariate tensor.
    pub fn get2(&self, x: usize, y: usize) -> T {
        self.get(&[x, y])
    }

    /// Marginal pmf of one coordinate.
    pub fn marginal(&self, coord: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.side()];
        let mut idx = vec![0; self.dim];
        for (flat, &p) in self.probs.iter().enumerate() {
            unflatten(flat, self.side(), &mut idx);
            out[idx[coord]] = out[idx[coord]] + p;
        }
        out
    }

    /// Joint pmf of the listed coordinates, in the listed order.
    pub fn marginalize(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() || keep.iter().any(|&c| c >= self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "cannot keep coordinates {keep:?} of a {}-dimensional pmf",
                self.dim
            )));
        }
        let side = self.side();
        let mut out = vec![T::zero(); side.pow(keep.len() as u32)];
        let mut idx = vec![0; self.dim];
        for (flat, &p) in self.probs.iter().enumerate() {
            unflatten(flat, side, &mut idx);
            let target = keep.iter().fold(0, |acc, &c| acc * side + idx[c]);
            out[target] = out[target] + p;
        }
        Self::new(keep.len(), self.bound, out)
    }

    /// Rescales to unit captured mass.
    pub fn normalized(&self) -> Self {
        let m = self.captured_mass;
        Self {
            dim: self.dim,
            bound: self.bound,
            probs: self.probs.iter().map(|&p| p / m).collect(),
            captured_mass: T::one(),
        }
    }

    pub fn cast<U: Real>(&self) -> JointPmf<U> {
        JointPmf {
            dim: self.dim,
            bound: self.bound,
            probs: self.probs.iter().map(|p| U::lit(p.to_f64_lossy())).collect(),
            captured_mass: U::lit(self.captured_mass.to_f64_lossy()),
        }
    }

    /// Total-variation distance to another tensor of identical shape.
    pub fn total_variation(&self, other: &Self) -> Result<T> {
        if self.dim != other.dim || self.bound != other.bound {
            return Err(Error::DimensionMismatch("total variation needs identical shapes".into()));
        }
        let diffs: Vec<T> = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(&a, &b)| (a - b).abs())
            .collect();
        Ok(pairwise_sum(&diffs) / T::lit(2.0))
    }

    /// CSV rendering with a `# countcompat-jointpmf` header.
    ///
    /// Rows index the first coordinate of each 2-d block, columns the
    /// second. Higher-dimensional tensors are written as one block per
    /// leading index (lexicographic), blocks separated by a blank line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{CSV_MAGIC} n={} N={} mass={}",
            self.dim,
            self.bound,
            fmt17(self.captured_mass.to_f64_lossy())
        );
        let side = self.side();
        let rows_per_block = if self.dim == 1 { 1 } else { side };
        for (b, block) in self.probs.chunks(side * rows_per_block).enumerate() {
            if b > 0 {
                out.push('\n');
            }
            for row in block.chunks(side) {
                let line: Vec<String> = row.iter().map(|p| fmt17(p.to_f64_lossy())).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::DimensionMismatch("empty joint pmf CSV".into()))?;
        let rest = header
            .strip_prefix(CSV_MAGIC)
            .ok_or_else(|| Error::DimensionMismatch(format!("bad joint pmf header `{header}`")))?;
        let mut dim = None;
        let mut bound = None;
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => dim = v.parse::<usize>().ok(),
                Some(("N", v)) => bound = v.parse::<usize>().ok(),
                _ => {}
            }
        }
        let (dim, bound) = dim
            .zip(bound)
            .ok_or_else(|| Error::DimensionMismatch(format!("header `{header}` lacks n= or N=")))?;
        let mut probs = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            for cell in line.split(',') {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    Error::DimensionMismatch(format!("unparsable joint pmf cell `{cell}`"))
                })?;
                probs.push(T::lit(v));
            }
        }
        Self::new(dim, bound, probs)
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn unflatten(mut flat: usize, side: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % side;
        flat /= side;
    }
}

/// Pairwise summation; deterministic and accurate for long tensors.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= 32 {
        return xs.iter().copied().fold(T::zero(), |a, b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product_pmf() -> JointPmf<f64> {
        let f = [0.2, 0.5, 0.3];
        let g = [0.6, 0.1, 0.3];
        JointPmf::from_fn(2, 2, |i| f[i[0]] * g[i[1]]).unwrap()
    }

    #[test]
    fn marginals_and_mass() {
        let j = product_pmf();
        assert!((j.captured_mass() - 1.0).abs() < 1e-15);
        let m = j.marginal(1);
        assert!((m[0] - 0.6).abs() < 1e-15 && (m[2] - 0.3).abs() < 1e-15);
        assert_eq!(j.get2(3, 0), 0.0);
    }

    #[test]
    fn shape_checks() {
        assert!(JointPmf::<f64>::new(2, 2, vec![0.0; 8]).is_err());
        assert!(JointPmf::<f64>::new(1, 1, vec![0.5, -0.1]).is_err());
        assert!(JointPmf::<f64>::new(1, 1, vec![0.9, 0.3]).is_err());
    }

    #[test]
    fn csv_round_trip_three_dims() {
        let j = JointPmf::from_fn(3, 2, |i| (1 + i[0] + 2 * i[1] + 3 * i[2]) as f64 / 270.0).unwrap();
        let csv = j.to_csv();
        assert!(csv.starts_with("# countcompat-jointpmf n=3 N=2 mass="));
        // three blocks of three rows each, separated by blank lines
        assert_eq!(csv.lines().filter(|l| l.is_empty()).count(), 2);
        let back = JointPmf::<f64>::from_csv(&csv).unwrap();
        assert_eq!(back, j);
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn marginalize_keeps_order() {
        let j: JointPmf<f64> = JointPmf::from_fn(3, 1, |i| [0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1][i[0] * 4 + i[1] * 2 + i[2]]).unwrap();
        let zy = j.marginalize(&[2, 1]).unwrap();
        // p(z=1, y=0) = p(0,0,1) + p(1,0,1)
        assert!((zy.get2(1, 0) - (0.2 + 0.1)).abs() < 1e-15);
    }
}
