//! State-indexed vectors and square matrices with the norms the value theory
//! needs: the supremum norm on vectors, the induced max-absolute-row-sum
//! operator norm on matrices, stochastic-matrix predicates, spectral-radius
//! upper bounds, and two independent linear-solve routes (truncated power
//! series and direct elimination).
//!
//! Everything here is dense; the models this crate targets are desk scale,
//! and the operator norm is a plain row scan.

use crate::error::{Error, Result};
use crate::mdp::{StateId, TOL_PMF};

/// Residual bound enforced by the solve routines.
pub const TOL_RESIDUAL: f64 = 1e-8;

/// Default term cap for the power-series inverse.
pub const DEFAULT_NEUMANN_CAP: usize = 10_000;

/// Default probe depth for spectral-radius estimates.
pub const DEFAULT_GELFAND_DEPTH: usize = 64;

/// Probe depth used when certifying the power-series precondition.
const NEUMANN_PROBE_DEPTH: usize = 8;

/// A real value per state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    entries: Vec<f64>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![0.0; n],
        }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            entries: vec![value; n],
        }
    }

    pub fn from_vec(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, s: StateId) -> f64 {
        self.entries[s.index()]
    }

    pub fn set(&mut self, s: StateId, value: f64) {
        self.entries[s.index()] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().copied()
    }

    /// Supremum norm: the largest absolute component. Zero exactly when the
    /// vector is zero.
    pub fn sup_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Componentwise partial order: true iff `self[s] <= other[s]` for all
    /// states. Vectors can be incomparable in both directions.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.check_dim(other.len())?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| a <= b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.len())?;
        Ok(Self::from_vec(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.len())?;
        Ok(Self::from_vec(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_vec(self.entries.iter().map(|v| v * factor).collect())
    }

    /// Sup-norm distance to another vector.
    pub fn sup_dist(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if self.len() == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            })
        }
    }
}

impl std::ops::Index<StateId> for StateVector {
    type Output = f64;

    fn index(&self, s: StateId) -> &f64 {
        &self.entries[s.index()]
    }
}

/// A dense square matrix indexed by state pairs, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    n: usize,
    data: Vec<f64>,
}

impl StateMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.n + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }

    /// Operator norm induced by the sup norm: the largest sum of absolute
    /// values across any row.
    pub fn op_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mat_vec(&self, v: &StateVector) -> Result<StateVector> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        Ok(StateVector::from_vec(
            (0..self.n)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(v.as_slice())
                        .map(|(a, x)| a * x)
                        .sum()
                })
                .collect(),
        ))
    }

    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `self` raised to the power `exp`, with the identity at `exp = 0`.
    pub fn mat_pow(&self, exp: usize) -> Self {
        let mut out = Self::identity(self.n);
        for _ in 0..exp {
            out = out.mat_mul(self).expect("square matrices share dimension");
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// True iff every row sums to 1 within [`TOL_PMF`] and no entry falls
    /// below `-TOL_PMF`.
    pub fn is_stochastic(&self) -> bool {
        (0..self.n).all(|i| {
            let row = self.row(i);
            let sum: f64 = row.iter().sum();
            (sum - 1.0).abs() <= TOL_PMF && row.iter().all(|&v| v >= -TOL_PMF)
        })
    }

    /// Certified upper bound on the spectral radius: the minimum of
    /// `op_norm(A^k)^(1/k)` over `k = 1..=n_max`. Converges to the spectral
    /// radius from above as `n_max` grows, and is monotone non-increasing in
    /// `n_max`.
    pub fn spectral_radius_estimate(&self, n_max: usize) -> f64 {
        assert!(n_max >= 1, "spectral radius probe needs at least one power");
        let mut power = self.clone();
        let mut best = f64::INFINITY;
        for k in 1..=n_max {
            if k > 1 {
                power = power.mat_mul(self).expect("square matrices share dimension");
            }
            best = best.min(power.op_norm().powf(1.0 / k as f64));
            if best == 0.0 {
                break;
            }
        }
        best
    }

    /// Inverse via the truncated power series `sum_k (I - A)^k`.
    ///
    /// Requires a certified bound below 1 on the spectral radius of `I - A`:
    /// either its operator norm, or failing that a deeper power probe. The
    /// series stops once the geometric tail bound `||T_k|| * q / (1 - q)`
    /// falls under `tol`, and the result must pass an independent residual
    /// check `||A * S - I|| <= TOL_RESIDUAL` before it is returned.
    pub fn neumann_inverse(&self, tol: f64, n_max: usize) -> Result<Self> {
        if tol <= 0.0 {
            return Err(Error::InvalidTolerance(tol));
        }
        let base = Self::identity(self.n).sub(self)?;
        let mut q = base.op_norm();
        if q >= 1.0 {
            q = base.spectral_radius_estimate(NEUMANN_PROBE_DEPTH);
            if q >= 1.0 {
                return Err(Error::SpectralRadiusNotBounded(q));
            }
        }

        let mut sum = Self::identity(self.n);
        let mut term = Self::identity(self.n);
        let mut converged = false;
        for _ in 1..=n_max {
            term = term.mat_mul(&base)?;
            sum = sum.add(&term)?;
            if term.op_norm() * q / (1.0 - q) <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::IterationCapExceeded { cap: n_max });
        }

        let residual = self
            .mat_mul(&sum)?
            .sub(&Self::identity(self.n))?
            .op_norm();
        if residual > TOL_RESIDUAL {
            return Err(Error::ResidualTooLarge {
                residual,
                tol: TOL_RESIDUAL,
            });
        }
        Ok(sum)
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting. This
    /// route shares nothing with [`StateMatrix::neumann_inverse`], so the two
    /// can cross-check each other.
    pub fn solve(&self, b: &StateVector) -> Result<StateVector> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let n = self.n;
        let mut a = self.data.clone();
        let mut x: Vec<f64> = b.as_slice().to_vec();

        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r1, &r2| {
                    a[r1 * n + col]
                        .abs()
                        .total_cmp(&a[r2 * n + col].abs())
                })
                .expect("column range is non-empty");
            let pivot = a[pivot_row * n + col];
            if pivot.abs() < 1e-12 {
                return Err(Error::SingularMatrix { column: col, pivot });
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                }
                x.swap(col, pivot_row);
            }
            for row in col + 1..n {
                let factor = a[row * n + col] / pivot;
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
                x[row] -= factor * x[col];
            }
        }
        for col in (0..n).rev() {
            let mut acc = x[col];
            for j in col + 1..n {
                acc -= a[col * n + j] * x[j];
            }
            x[col] = acc / a[col * n + col];
        }
        Ok(StateVector::from_vec(x))
    }
}
