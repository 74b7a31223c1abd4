//! Small dense linear algebra (row-major, partial pivoting).

use crate::num::Real;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Principal submatrix on the listed indices.
    pub fn principal(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self[(i, j)];
            }
        }
        m
    }

    pub fn determinant(&self) -> T {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = T::one();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].abs().partial_cmp(&a[s * n + col].abs()).unwrap())
                .unwrap();
            if a[pivot * n + col] == T::zero() {
                return T::zero();
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det = det * p;
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                for k in col..n {
                    a[r * n + k] = a[r * n + k] - f * a[col * n + k];
                }
            }
        }
        det
    }

    /// Solves `self · x = rhs`; `None` when a pivot falls below `tol`.
    pub fn solve(&self, rhs: &[T], tol: T) -> Option<Vec<T>> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].abs().partial_cmp(&a[s * n + col].abs()).unwrap())
                .unwrap();
            if a[pivot * n + col].abs() <= tol {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                b.swap(pivot, col);
            }
            let p = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                if f == T::zero() {
                    continue;
                }
                for k in col..n {
                    a[r * n + k] = a[r * n + k] - f * a[col * n + k];
                }
                b[r] = b[r] - f * b[col];
            }
        }
        let mut x = vec![T::zero(); n];
        for r in (0..n).rev() {
            let mut acc = b[r];
            for k in r + 1..n {
                acc = acc - a[r * n + k] * x[k];
            }
            x[r] = acc / a[r * n + r];
        }
        Some(x)
    }

    /// Gauss-Jordan inverse; `None` when a pivot falls below `tol`.
    pub fn inverse(&self, tol: T) -> Option<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].abs().partial_cmp(&a[s * n + col].abs()).unwrap())
                .unwrap();
            if a[pivot * n + col].abs() <= tol {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                    inv.swap(pivot * n + k, col * n + k);
                }
            }
            let p = a[col * n + col];
            for k in 0..n {
                a[col * n + k] = a[col * n + k] / p;
                inv[col * n + k] = inv[col * n + k] / p;
            }
            for r in (0..n).filter(|&r| r != col) {
                let f = a[r * n + col];
                if f == T::zero() {
                    continue;
                }
                for k in 0..n {
                    a[r * n + k] = a[r * n + k] - f * a[col * n + k];
                    inv[r * n + k] = inv[r * n + k] - f * inv[col * n + k];
                }
            }
        }
        Some(Self { n, data: inv })
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// A principal minor: the index subset and its determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalMinor<T> {
    pub indices: Vec<usize>,
    pub value: T,
}

/// Every principal minor of order `>= 2`, ordered by size then lexicographically.
pub fn principal_minors<T: Real>(m: &Matrix<T>) -> Vec<PrincipalMinor<T>> {
    let n = m.size();
    let mut out = Vec::new();
    for size in 2..=n {
        for subset in subsets(n, size) {
            let value = m.principal(&subset).determinant();
            out.push(PrincipalMinor { indices: subset, value });
        }
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_solve() {
        let m: Matrix<f64> = Matrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]);
        assert!((m.determinant() - 18.0).abs() < 1e-12);
        let x = m.solve(&[3.0, 5.0, 5.0], 1e-14).unwrap();
        for (xi, want) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((xi - want).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_solve_is_none() {
        let m: Matrix<f64> = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(m.solve(&[1.0, 1.0], 1e-12).is_none());
        assert_eq!(m.determinant(), 0.0);
        assert!(m.inverse(1e-12).is_none());
    }

    #[test]
    fn inverse_round_trip() {
        let m: Matrix<f64> = Matrix::from_rows(&[vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 5.0]]);
        let inv = m.inverse(1e-14).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[(i, k)] * inv[(k, j)]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn minors_of_equicorrelated_matrix() {
        let t = 1.0 / 3.0;
        let m: Matrix<f64> = Matrix::from_rows(&[vec![1.0, -t, -t], vec![-t, 1.0, -t], vec![-t, -t, 1.0]]);
        let minors = principal_minors(&m);
        assert_eq!(minors.len(), 4);
        for pm in &minors[..3] {
            assert!((pm.value - 8.0 / 9.0).abs() < 1e-14);
        }
        assert!((minors[3].value - 16.0 / 27.0).abs() < 1e-14);
    }
}
