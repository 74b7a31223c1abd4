//! Phase-1 dense tableau simplex for `A x = b, x >= 0`.
//!
//! Bland's smallest-index rule for both entering and leaving variables.
//! The tableau is rebuilt from the basis inverse every [`REINVERT_EVERY`]
//! pivots and before termination is accepted. At the end the basis is refined with a direct
//! solve: the primal point on feasible systems, the phase-1 dual on
//! infeasible ones.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::num::Real;

/// Pivots between tableau rebuilds.
pub const REINVERT_EVERY: usize = 64;

/// Dense equality system, `a` row-major `rows × cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSystem<T> {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Real> LpSystem<T> {
    pub fn entry(&self, r: usize, c: usize) -> T {
        self.a[r * self.cols + c]
    }

    /// `max_r |(A x - b)_r|`.
    pub fn residual(&self, x: &[T]) -> T {
        (0..self.rows)
            .map(|r| {
                let row = &self.a[r * self.cols..(r + 1) * self.cols];
                let ax = row.iter().zip(x).fold(T::zero(), |acc, (&a, &v)| acc + a * v);
                (ax - self.b[r]).abs()
            })
            .fold(T::zero(), T::max)
    }

    /// `min_c (Aᵀ y)_c`; nonnegative for a Farkas dual ray.
    pub fn min_dual_slack(&self, y: &[T]) -> T {
        (0..self.cols)
            .map(|c| (0..self.rows).fold(T::zero(), |acc, r| acc + self.entry(r, c) * y[r]))
            .fold(T::infinity(), T::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Phase1<T> {
    /// A nonnegative solution of `A x = b`.
    Feasible(Vec<T>),
    /// `y` with `Aᵀ y >= 0` and `bᵀ y < 0`.
    Infeasible(Vec<T>),
}

/// Phase-1 problem `min Σ artificials` over `[sign·A | I] z = sign·b`.
struct Problem<'a, T> {
    sys: &'a LpSystem<T>,
    sign: Vec<T>,
}

impl<T: Real> Problem<'_, T> {
    fn m(&self) -> usize {
        self.sys.rows
    }

    fn n(&self) -> usize {
        self.sys.cols
    }

    /// Entry `(r, c)` of `[sign·A | I | sign·b]`.
    fn at(&self, r: usize, c: usize) -> T {
        let (m, n) = (self.m(), self.n());
        if c < n {
            self.sign[r] * self.sys.entry(r, c)
        } else if c < n + m {
            if c - n == r {
                T::one()
            } else {
                T::zero()
            }
        } else {
            self.sign[r] * self.sys.b[r]
        }
    }

    fn cost(&self, c: usize) -> T {
        if c >= self.n() && c < self.n() + self.m() {
            T::one()
        } else {
            T::zero()
        }
    }

    fn basis_matrix(&self, basis: &[usize]) -> Matrix<T> {
        let m = self.m();
        let mut b = Matrix::zeros(m);
        for (k, &c) in basis.iter().enumerate() {
            for r in 0..m {
                b[(r, k)] = self.at(r, c);
            }
        }
        b
    }
}

struct Tableau<T> {
    m: usize,
    width: usize,
    t: Vec<T>,
    basis: Vec<usize>,
}

impl<T: Real> Tableau<T> {
    fn at(&self, r: usize, c: usize) -> T {
        self.t[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> T {
        self.at(r, self.width - 1)
    }

    /// Phase-1 objective: total value of basic artificials.
    fn artificial_mass(&self, n: usize) -> T {
        (0..self.m)
            .filter(|&r| self.basis[r] >= n)
            .fold(T::zero(), |acc, r| acc + self.rhs(r))
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.at(row, col);
        for c in 0..w {
            self.t[row * w + c] = self.t[row * w + c] / p;
        }
        for r in 0..=self.m {
            if r == row {
                continue;
            }
            let f = self.at(r, col);
            if f == T::zero() {
                continue;
            }
            for c in 0..w {
                let v = self.t[row * w + c];
                if v != T::zero() {
                    self.t[r * w + c] = self.t[r * w + c] - f * v;
                }
            }
            self.t[r * w + col] = T::zero();
        }
        self.basis[row] = col;
    }

    /// Swaps basis columns that are numerically dependent on earlier ones for
    /// artificials on the rows left without a pivot.
    fn repair(&mut self, prob: &Problem<'_, T>) {
        let m = self.m;
        let mut b = prob.basis_matrix(&self.basis);
        let mut used = vec![false; m];
        let mut dependent = Vec::new();
        for k in 0..m {
            let scale = (0..m).fold(T::zero(), |acc, r| acc.max(prob.at(r, self.basis[k]).abs()));
            let pivot = (0..m)
                .filter(|&r| !used[r])
                .max_by(|&r, &q| b[(r, k)].abs().partial_cmp(&b[(q, k)].abs()).unwrap());
            let Some(p) = pivot.filter(|&p| b[(p, k)].abs() > T::epsilon().sqrt() * scale) else {
                dependent.push(k);
                continue;
            };
            used[p] = true;
            for r in (0..m).filter(|&r| !used[r]) {
                let f = b[(r, k)] / b[(p, k)];
                for j in k..m {
                    b[(r, j)] = b[(r, j)] - f * b[(p, j)];
                }
            }
        }
        let free = (0..m).filter(|&r| !used[r]);
        for (k, r) in dependent.into_iter().zip(free) {
            self.basis[k] = prob.n() + r;
        }
    }

    /// Recomputes every row from `B⁻¹`; basic values below zero are clipped.
    fn reinvert(&mut self, prob: &Problem<'_, T>, tol: T) -> Result<()> {
        let m = self.m;
        let w = self.width;
        let inv = match prob.basis_matrix(&self.basis).inverse(tol) {
            Some(inv) => inv,
            None => {
                self.repair(prob);
                prob.basis_matrix(&self.basis)
                    .inverse(tol)
                    .ok_or_else(|| Error::NumericalFailure("singular basis after repair".into()))?
            }
        };
        let cb: Vec<T> = self.basis.iter().map(|&c| prob.cost(c)).collect();
        let pi: Vec<T> = (0..m)
            .map(|k| (0..m).fold(T::zero(), |acc, r| acc + cb[r] * inv[(r, k)]))
            .collect();
        let mut col = vec![T::zero(); m];
        for c in 0..w {
            for (r, v) in col.iter_mut().enumerate() {
                *v = prob.at(r, c);
            }
            for r in 0..m {
                self.t[r * w + c] = (0..m).fold(T::zero(), |acc, k| acc + inv[(r, k)] * col[k]);
            }
            let price = (0..m).fold(T::zero(), |acc, k| acc + pi[k] * col[k]);
            self.t[m * w + c] = if c == w - 1 { -price } else { prob.cost(c) - price };
        }
        for (r, &c) in self.basis.iter().enumerate() {
            for k in 0..m {
                self.t[k * w + c] = if k == r { T::one() } else { T::zero() };
            }
            self.t[m * w + c] = T::zero();
            if self.t[r * w + w - 1] < T::zero() {
                self.t[r * w + w - 1] = T::zero();
            }
        }
        Ok(())
    }
}

/// Solves the phase-1 problem `min Σ artificials` for `A x = b, x >= 0`.
pub fn phase_one<T: Real>(sys: &LpSystem<T>) -> Result<Phase1<T>> {
    let (m, n) = (sys.rows, sys.cols);
    let eps = T::epsilon();
    let pivot_tol = eps.sqrt() * T::lit(10.0);
    let cost_tol = eps * T::lit(1e4);
    let solve_tol = eps * T::lit(1e2);
    let sign: Vec<T> = sys.b.iter().map(|&v| if v < T::zero() { -T::one() } else { T::one() }).collect();
    let prob = Problem { sys, sign };
    let feas_tol = feasibility_tol(&prob);

    let width = n + m + 1;
    let mut tab = Tableau {
        m,
        width,
        t: vec![T::zero(); (m + 1) * width],
        basis: (n..n + m).collect(),
    };
    tab.reinvert(&prob, solve_tol)?;

    let max_iter = 50 * (m + n) + 1000;
    let mut since_reinvert = 0;
    for _ in 0..=max_iter {
        if since_reinvert >= REINVERT_EVERY {
            tab.reinvert(&prob, solve_tol)?;
            since_reinvert = 0;
            if tab.artificial_mass(n) <= feas_tol {
                return finish(&prob, &tab, solve_tol);
            }
        }
        let entering = (0..n + m).find(|&c| tab.at(m, c) < -cost_tol);
        let Some(col) = entering else {
            if since_reinvert == 0 {
                return finish(&prob, &tab, solve_tol);
            }
            tab.reinvert(&prob, solve_tol)?;
            since_reinvert = 0;
            continue;
        };

        let rows = || (0..m).filter(|&r| tab.at(r, col) > pivot_tol);
        let ratio = |r: usize| tab.rhs(r).max(T::zero()) / tab.at(r, col);
        let best = rows().map(ratio).fold(T::infinity(), T::min);
        let leave = rows()
            .filter(|&r| ratio(r) <= best + cost_tol)
            .min_by_key(|&r| tab.basis[r]);
        let Some(row) = leave else {
            if since_reinvert > 0 {
                tab.reinvert(&prob, solve_tol)?;
                since_reinvert = 0;
                continue;
            }
            return Err(Error::NumericalFailure(format!("no pivot row for entering column {col}")));
        };
        tab.pivot(row, col);
        for r in 0..m {
            if tab.rhs(r) < T::zero() {
                tab.t[r * width + width - 1] = T::zero();
            }
        }
        since_reinvert += 1;
    }
    Err(Error::NumericalFailure(format!("simplex exceeded {max_iter} pivots")))
}

fn feasibility_tol<T: Real>(prob: &Problem<'_, T>) -> T {
    let b_scale = prob.sys.b.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    T::epsilon().sqrt() * b_scale
}

fn finish<T: Real>(prob: &Problem<'_, T>, tab: &Tableau<T>, solve_tol: T) -> Result<Phase1<T>> {
    let (m, n) = (prob.m(), prob.n());
    let tol = feasibility_tol(prob);
    let basis_mat = prob.basis_matrix(&tab.basis);
    let rhs: Vec<T> = (0..m).map(|r| prob.at(r, n + m)).collect();
    if tab.artificial_mass(n) <= tol {
        let xb = basis_mat
            .solve(&rhs, solve_tol)
            .ok_or_else(|| Error::NumericalFailure("singular final basis".into()))?;
        let mut x = vec![T::zero(); n];
        for (k, &c) in tab.basis.iter().enumerate() {
            if c < n {
                if xb[k] < -tol {
                    return Err(Error::NumericalFailure(format!("refined basic value {} is negative", xb[k])));
                }
                x[c] = xb[k].max(T::zero());
            }
        }
        return Ok(Phase1::Feasible(x));
    }

    // dual of phase 1: Bᵀ π = c_B with unit costs on artificials
    let mut bt = Matrix::zeros(m);
    for r in 0..m {
        for k in 0..m {
            bt[(k, r)] = basis_mat[(r, k)];
        }
    }
    let cb: Vec<T> = tab.basis.iter().map(|&c| prob.cost(c)).collect();
    let pi = bt
        .solve(&cb, solve_tol)
        .ok_or_else(|| Error::NumericalFailure("singular final basis".into()))?;
    // undo row sign flips; y = -π is the Farkas ray
    Ok(Phase1::Infeasible((0..m).map(|r| -(pi[r] * prob.sign[r])).collect()))
}
