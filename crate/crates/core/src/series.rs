//! Truncated power series in one and two variables.
//!
//! Probability generating functions are given in closed form; expanding them
//! into Taylor coefficients turns them into pmf grids. Everything here is
//! exact up to floating point for the retained orders: truncation at order
//! `K` never contaminates coefficients of order `<= K`.

use crate::error::{Error, Result};
use crate::num::Real;

/// Coefficients below this (in absolute value) are treated as rounding noise
/// when a series is read back as a pmf.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 60;

/// `Σ_{k<=K} coeffs[k] u^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Real> TruncatedSeries<T> {
    /// Builds a series of order `order`, padding with zeros or dropping
    /// coefficients beyond the order.
    pub fn new(mut coeffs: Vec<T>, order: usize) -> Self {
        coeffs.resize(order + 1, T::zero());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(T::one(), order)
    }

    pub fn constant(c: T, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// `c0 + c1 u`.
    pub fn affine(c0: T, c1: T, order: usize) -> Self {
        Self::new(vec![c0, c1], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    /// Value of the truncated polynomial at `u` (Horner).
    pub fn eval(&self, u: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * u + c)
    }

    /// Sum of the retained coefficients, i.e. the value at `u = 1`.
    pub fn total(&self) -> T {
        self.coeffs.iter().copied().sum()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_orders(self.order(), other.order())?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_orders(self.order(), other.order())?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let k = self.order();
        let mut out = vec![T::zero(); k + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == T::zero() {
                continue;
            }
            for (j, &b) in other.coeffs[..=k - i].iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Self { coeffs: out }
    }

    /// `self^exponent` for a real exponent.
    ///
    /// Uses the J.C.P. Miller recurrence
    /// `c_n = (1 / (n b_0)) Σ_{k=1..n} (k e - (n - k)) b_k c_{n-k}`,
    /// which is exact on polynomial bases with integer exponents.
    pub fn real_power(&self, exponent: T) -> Result<Self> {
        let b0 = self.coeffs[0];
        if !(b0 > T::zero()) {
            return Err(Error::SingularConstantTerm(b0.to_f64_lossy()));
        }
        let order = self.order();
        let last_nonzero = self
            .coeffs
            .iter()
            .rposition(|&c| c != T::zero())
            .unwrap_or(0);
        let mut c = vec![T::zero(); order + 1];
        c[0] = b0.powf(exponent);
        for n in 1..=order {
            let mut acc = T::zero();
            for k in 1..=n.min(last_nonzero) {
                let w = T::from_count(k) * exponent - T::from_count(n - k);
                acc = acc + w * self.coeffs[k] * c[n - k];
            }
            c[n] = acc / (T::from_count(n) * b0);
        }
        Ok(Self { coeffs: c })
    }

    /// Multiplicative inverse, `self^-1`.
    pub fn reciprocal(&self) -> Result<Self> {
        let b0 = self.coeffs[0];
        if b0 == T::zero() {
            return Err(Error::SingularConstantTerm(0.0));
        }
        let order = self.order();
        let mut c = vec![T::zero(); order + 1];
        c[0] = T::one() / b0;
        for n in 1..=order {
            let mut acc = T::zero();
            for k in 1..=n {
                acc = acc + self.coeffs[k] * c[n - k];
            }
            c[n] = -acc / b0;
        }
        Ok(Self { coeffs: c })
    }

    /// Reads the series as a (sub-)probability sequence.
    pub fn to_pmf(&self) -> Result<SeriesPmf<T>> {
        pgf_to_pmf(self)
    }
}

fn check_orders(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::OrderMismatch { left, right });
    }
    Ok(())
}

/// Convenience wrapper mirroring [`TruncatedSeries::mul`].
pub fn series_mul<T: Real>(a: &TruncatedSeries<T>, b: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    a.mul(b)
}

/// Convenience wrapper mirroring [`TruncatedSeries::real_power`].
pub fn series_real_power<T: Real>(base: &TruncatedSeries<T>, exponent: T) -> Result<TruncatedSeries<T>> {
    base.real_power(exponent)
}

/// Pmf read off a pgf expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPmf<T> {
    pub probs: Vec<T>,
    pub captured_mass: T,
}

/// Coefficient extraction with a noise clamp at `-1e-12`.
pub fn pgf_to_pmf<T: Real>(s: &TruncatedSeries<T>) -> Result<SeriesPmf<T>> {
    let clamp = T::lit(NEGATIVE_CLAMP);
    let mut probs = Vec::with_capacity(s.coeffs.len());
    for (index, &c) in s.coeffs.iter().enumerate() {
        if !c.is_finite() || c < -clamp {
            return Err(Error::InvalidPgf {
                index,
                value: c.to_f64_lossy(),
            });
        }
        probs.push(c.max(T::zero()));
    }
    let captured_mass: T = probs.iter().copied().sum();
    if captured_mass > T::one() + clamp {
        return Err(Error::InvalidPgf {
            index: probs.len() - 1,
            value: captured_mass.to_f64_lossy(),
        });
    }
    Ok(SeriesPmf {
        probs,
        captured_mass,
    })
}

/// `Σ_{i,j<=K} coeffs[i][j] u^i v^j`, stored row-major with `i` the power of `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSeries<T> {
    order: usize,
    coeffs: Vec<T>,
}

impl<T: Real> BivariateSeries<T> {
    pub fn zero(order: usize) -> Self {
        Self {
            order,
            coeffs: vec![T::zero(); (order + 1) * (order + 1)],
        }
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.set(0, 0, c);
        s
    }

    /// `c00 + c10 u + c01 v + c11 u v`.
    pub fn bilinear(c00: T, c10: T, c01: T, c11: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.set(0, 0, c00);
        if order >= 1 {
            s.set(1, 0, c10);
            s.set(0, 1, c01);
            s.set(1, 1, c11);
        }
        s
    }

    /// `1 + A(1-u) + B(1-v) + C(1-u)(1-v)`, the base of the bivariate
    /// negative-binomial-type pgfs.
    pub fn shifted_bilinear(a: T, b: T, c: T, order: usize) -> Self {
        let one = T::one();
        Self::bilinear(one + a + b + c, -(a + c), -(b + c), c, order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.coeffs[i * (self.order + 1) + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let n = self.order + 1;
        self.coeffs[i * n + j] = value;
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Row `i` viewed as a series in `v` (the coefficient of `u^i`).
    pub fn u_coefficient(&self, i: usize) -> TruncatedSeries<T> {
        let n = self.order + 1;
        TruncatedSeries {
            coeffs: self.coeffs[i * n..(i + 1) * n].to_vec(),
        }
    }

    /// Restriction to `v = 0`.
    pub fn u_axis(&self) -> TruncatedSeries<T> {
        TruncatedSeries {
            coeffs: (0..=self.order).map(|i| self.get(i, 0)).collect(),
        }
    }

    pub fn total(&self) -> T {
        self.coeffs.iter().copied().sum()
    }

    /// `self^exponent` for a real exponent.
    ///
    /// Writes the base as `Σ_i b_i(v) u^i` and the power as `Σ_i f_i(v) u^i`.
    /// From `B ∂_u F = e F ∂_u B`:
    /// `f_0 = b_0^e` and `f_n = b_0^{-1} (1/n) Σ_{k=1..n} (k e - (n - k)) b_k f_{n-k}`,
    /// where every product is a truncated series in `v`.
    pub fn real_power(&self, exponent: T) -> Result<Self> {
        let b00 = self.get(0, 0);
        if !(b00 > T::zero()) {
            return Err(Error::SingularConstantTerm(b00.to_f64_lossy()));
        }
        let order = self.order;
        let rows: Vec<TruncatedSeries<T>> = (0..=order).map(|i| self.u_coefficient(i)).collect();
        let active: Vec<usize> = (1..=order)
            .filter(|&k| rows[k].coeffs.iter().any(|&c| c != T::zero()))
            .collect();
        let inv_b0 = rows[0].reciprocal()?;
        let mut f: Vec<TruncatedSeries<T>> = Vec::with_capacity(order + 1);
        f.push(rows[0].real_power(exponent)?);
        for n in 1..=order {
            let mut acc = TruncatedSeries::zero(order);
            for &k in active.iter().take_while(|&&k| k <= n) {
                let w = T::from_count(k) * exponent - T::from_count(n - k);
                let term = rows[k].mul_unchecked(&f[n - k]).scale(w);
                acc = acc.add(&term)?;
            }
            f.push(acc.mul_unchecked(&inv_b0).scale(T::one() / T::from_count(n)));
        }
        let mut out = Self::zero(order);
        for (i, row) in f.iter().enumerate() {
            for (j, &c) in row.coeffs.iter().enumerate() {
                out.set(i, j, c);
            }
        }
        Ok(out)
    }
}

/// Convenience wrapper mirroring [`BivariateSeries::real_power`].
pub fn bivariate_real_power<T: Real>(base: &BivariateSeries<T>, exponent: T) -> Result<BivariateSeries<T>> {
    base.real_power(exponent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (k, (g, w)) in got.iter().zip(want).enumerate() {
            assert!((g - w).abs() <= tol, "k={k}: {g} vs {w}");
        }
    }

    #[test]
    fn square_of_one_plus_u() {
        let a = TruncatedSeries::affine(1.0, 1.0, 4);
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.coeffs(), &[1.0, 2.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn multiplying_by_one_is_identity() {
        let a = TruncatedSeries::new(vec![0.3, -1.5, 2.0, 7.0], 3);
        assert_eq!(a.mul(&TruncatedSeries::one(3)).unwrap(), a);
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let a = TruncatedSeries::<f64>::one(3);
        let b = TruncatedSeries::<f64>::one(4);
        assert_eq!(a.mul(&b), Err(Error::OrderMismatch { left: 3, right: 4 }));
    }

    #[test]
    fn geometric_series_from_negative_power() {
        let s = TruncatedSeries::affine(1.0, -1.0, 5).real_power(-1.0).unwrap();
        assert_close(s.coeffs(), &[1.0; 6], 1e-15);
    }

    #[test]
    fn geometric_pmf_with_theta_two() {
        // (3 - 2u)^-1 = (1/3) Σ (2/3)^k u^k
        let s = TruncatedSeries::affine(3.0, -2.0, 4).real_power(-1.0).unwrap();
        let want: Vec<f64> = (0..5).map(|k| (1.0 / 3.0) * (2.0f64 / 3.0).powi(k)).collect();
        assert_close(s.coeffs(), &want, 1e-15);
    }

    #[test]
    fn integer_power_is_exact() {
        let s = TruncatedSeries::affine(1.0, 1.0, 2).real_power(2.0).unwrap();
        assert_eq!(s.coeffs(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn nonpositive_constant_term_is_singular() {
        let s = TruncatedSeries::affine(0.0, 1.0, 3);
        assert!(matches!(s.real_power(0.5), Err(Error::SingularConstantTerm(_))));
        let b = BivariateSeries::bilinear(-1.0, 1.0, 0.0, 0.0, 3);
        assert!(matches!(b.real_power(2.0), Err(Error::SingularConstantTerm(_))));
    }

    #[test]
    fn clamps_rounding_noise_but_rejects_real_negatives() {
        let s = TruncatedSeries::new(vec![0.5, -1e-13, 0.5], 2);
        let pmf = pgf_to_pmf(&s).unwrap();
        assert_eq!(pmf.probs, vec![0.5, 0.0, 0.5]);
        let bad = TruncatedSeries::new(vec![0.5, -1e-9, 0.5], 2);
        assert!(matches!(pgf_to_pmf(&bad), Err(Error::InvalidPgf { index: 1, .. })));
    }

    #[test]
    fn constant_series_is_point_mass_at_zero() {
        let pmf = pgf_to_pmf(&TruncatedSeries::<f64>::one(5)).unwrap();
        assert_eq!(pmf.probs[0], 1.0);
        assert!(pmf.probs[1..].iter().all(|&p| p == 0.0));
        assert_eq!(pmf.captured_mass, 1.0);
    }

    #[test]
    fn bivariate_constant_base() {
        let b = BivariateSeries::constant(1.0, 4);
        let p = b.real_power(-3.7).unwrap();
        assert_eq!(p, BivariateSeries::constant(1.0, 4));
    }

    #[test]
    fn bivariate_separable_base_is_product_of_geometrics() {
        // (1 - u/2)(1 - v/2) = 1 - u/2 - v/2 + uv/4
        let b = BivariateSeries::bilinear(1.0, -0.5, -0.5, 0.25, 8);
        let p = b.real_power(-1.0).unwrap();
        for i in 0..=8 {
            for j in 0..=8 {
                let want = 0.5f64.powi((i + j) as i32);
                assert!((p.get(i, j) - want).abs() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn bivariate_power_reduces_to_univariate_on_u_axis() {
        let b = BivariateSeries::<f64>::bilinear(2.5, -1.2, 0.0, 0.0, 20);
        let p = b.real_power(-2.3).unwrap();
        let u = TruncatedSeries::affine(2.5, -1.2, 20).real_power(-2.3).unwrap();
        for i in 0..=20 {
            assert!((p.get(i, 0) - u.coeff(i)).abs() <= 1e-13);
            for j in 1..=20 {
                assert_eq!(p.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let s = TruncatedSeries::affine(3.0f32, -2.0, 4).real_power(-1.0).unwrap();
        assert!((s.coeff(2) - 4.0 / 27.0).abs() < 1e-6);
    }
}
