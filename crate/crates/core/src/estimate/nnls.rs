//! Lawson-Hanson active-set non-negative least squares.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::estimate::lm::solve_real;
use crate::float::{cast, Float};

pub(crate) struct NnlsSolution<T: Float> {
    pub x: Vec<T>,
    /// Columns that ended in the passive (strictly positive) set.
    pub passive: Vec<bool>,
}

/// Minimize `|| a x - y ||` subject to `x >= 0`.
pub(crate) fn nnls<T: Float>(a: &Array2<T>, y: &[T]) -> Result<NnlsSolution<T>> {
    let (m, n) = a.dim();
    assert_eq!(m, y.len());
    let mut x = vec![T::zero(); n];
    let mut passive = vec![false; n];

    let residual = |x: &[T]| -> Vec<T> {
        (0..m)
            .map(|i| {
                let mut acc = y[i];
                for j in 0..n {
                    if x[j] != T::zero() {
                        acc -= a[[i, j]] * x[j];
                    }
                }
                acc
            })
            .collect()
    };
    let gradient = |r: &[T]| -> Vec<T> {
        (0..n)
            .map(|j| (0..m).map(|i| a[[i, j]] * r[i]).sum())
            .collect()
    };

    let mut w = gradient(&residual(&x));
    let tol = cast::<T>(10.0) * T::epsilon() * w.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));

    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        // Most violated stationarity condition among free columns.
        let mut best: Option<(usize, T)> = None;
        for j in 0..n {
            if !passive[j] && w[j] > tol {
                if best.map_or(true, |(_, bw)| w[j] > bw) {
                    best = Some((j, w[j]));
                }
            }
        }
        let Some((enter, _)) = best else {
            return Ok(NnlsSolution { x, passive });
        };
        passive[enter] = true;

        // Inner loop: solve on the passive set, backtracking while any
        // passive coefficient would go negative.
        for _ in 0..max_outer {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z = ls_on(a, y, &idx)?;
            if z.iter().all(|&v| v > T::zero()) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                for j in 0..n {
                    if !passive[j] {
                        x[j] = T::zero();
                    }
                }
                break;
            }
            // Step length to the first coefficient that hits zero.
            let mut alpha = T::one();
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= T::zero() {
                    let denom = x[j] - z[k];
                    if denom > T::zero() {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] = x[j] + alpha * (z[k] - x[j]);
            }
            let floor = cast::<T>(100.0) * T::epsilon();
            for &j in &idx {
                if x[j] <= floor {
                    x[j] = T::zero();
                    passive[j] = false;
                }
            }
        }
        w = gradient(&residual(&x));
    }
    Err(Error::FitNonConvergence {
        iterations: max_outer,
    })
}

/// Unconstrained least squares restricted to the columns in `idx`, via the
/// normal equations.
fn ls_on<T: Float>(a: &Array2<T>, y: &[T], idx: &[usize]) -> Result<Vec<T>> {
    let m = a.nrows();
    let k = idx.len();
    let mut ata = vec![vec![T::zero(); k]; k];
    let mut aty = vec![T::zero(); k];
    for (p, &jp) in idx.iter().enumerate() {
        for i in 0..m {
            aty[p] += a[[i, jp]] * y[i];
        }
        for (q, &jq) in idx.iter().enumerate().skip(p) {
            let mut acc = T::zero();
            for i in 0..m {
                acc += a[[i, jp]] * a[[i, jq]];
            }
            ata[p][q] = acc;
            ata[q][p] = acc;
        }
    }
    solve_real(&mut ata, &aty).ok_or(Error::SingularMatrix)
}

/// Diagonal of `inv(A_P^T A_P)` over the passive columns; zeros elsewhere.
pub(crate) fn passive_variances<T: Float>(a: &Array2<T>, passive: &[bool]) -> Option<Vec<T>> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    if idx.is_empty() {
        return Some(vec![T::zero(); passive.len()]);
    }
    let m = a.nrows();
    let k = idx.len();
    let mut ata = vec![vec![T::zero(); k]; k];
    for (p, &jp) in idx.iter().enumerate() {
        for (q, &jq) in idx.iter().enumerate().skip(p) {
            let mut acc = T::zero();
            for i in 0..m {
                acc += a[[i, jp]] * a[[i, jq]];
            }
            ata[p][q] = acc;
            ata[q][p] = acc;
        }
    }
    let inv = crate::estimate::lm::invert_real(&ata)?;
    let mut out = vec![T::zero(); passive.len()];
    for (p, &jp) in idx.iter().enumerate() {
        out[jp] = inv[p][p].max(T::zero());
    }
    Some(out)
}
