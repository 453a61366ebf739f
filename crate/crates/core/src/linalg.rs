//! Dense complex linear algebra: matrix exponential, Hermitian
//! eigendecomposition, and an LU solver.
//!
//! Everything here works on `ndarray` matrices of `Complex<T>` and is written
//! against the raw row-major storage in the hot loops.

use ndarray::{Array1, Array2};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::float::{cast, Float};

/// Conjugated inner product `sum_i conj(a_i) b_i`.
pub fn vdot<T: Float>(a: &Array1<Complex<T>>, b: &Array1<Complex<T>>) -> Complex<T> {
    a.iter()
        .zip(b.iter())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * *y
        })
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sq<T: Float>(a: &Array1<Complex<T>>) -> T {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Maximum column sum of absolute values.
pub fn one_norm<T: Float>(a: &Array2<Complex<T>>) -> T {
    let (rows, cols) = a.dim();
    let mut best = T::zero();
    for j in 0..cols {
        let mut s = T::zero();
        for i in 0..rows {
            s += a[[i, j]].norm();
        }
        if s > best {
            best = s;
        }
    }
    best
}

/// Largest deviation from Hermitian symmetry, `max |a_ij - conj(a_ji)|`.
pub fn hermitian_deviation<T: Float>(a: &Array2<Complex<T>>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = (a[[i, j]] - a[[j, i]].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

// Pade-13 numerator coefficients for the exponential.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling-and-squaring with a [13/13] Pade
/// approximant.
pub fn expm<T: Float>(a: &Array2<Complex<T>>) -> Result<Array2<Complex<T>>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            left: n,
            right: a.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let norm = one_norm(a);
    let theta = cast::<T>(THETA13);
    let s: u32 = if norm > theta {
        let k = (norm / theta).log2().ceil();
        k.to_u32().unwrap_or(0)
    } else {
        0
    };
    let scale = cast::<T>(0.5).powi(s as i32);
    let a1 = a.mapv(|z| z * scale);

    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let b = |k: usize| Complex::new(cast::<T>(PADE13[k]), T::zero());
    let eye = Array2::<Complex<T>>::eye(n);

    // u = a1 * (a6*(b13 a6 + b11 a4 + b9 a2) + b7 a6 + b5 a4 + b3 a2 + b1 I)
    let inner_u = a6.mapv(|z| z * b(13)) + a4.mapv(|z| z * b(11)) + a2.mapv(|z| z * b(9));
    let u_poly = a6.dot(&inner_u)
        + a6.mapv(|z| z * b(7))
        + a4.mapv(|z| z * b(5))
        + a2.mapv(|z| z * b(3))
        + eye.mapv(|z| z * b(1));
    let u = a1.dot(&u_poly);

    // v = a6*(b12 a6 + b10 a4 + b8 a2) + b6 a6 + b4 a4 + b2 a2 + b0 I
    let inner_v = a6.mapv(|z| z * b(12)) + a4.mapv(|z| z * b(10)) + a2.mapv(|z| z * b(8));
    let v = a6.dot(&inner_v)
        + a6.mapv(|z| z * b(6))
        + a4.mapv(|z| z * b(4))
        + a2.mapv(|z| z * b(2))
        + eye.mapv(|z| z * b(0));

    // r = (v - u)^{-1} (v + u)
    let mut lhs = &v - &u;
    let mut rhs = &v + &u;
    lu_solve(&mut lhs, &mut rhs)?;
    let mut r = rhs;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Solve `lhs * x = rhs` in place by LU with partial pivoting; `rhs` holds
/// the solution on return. `lhs` is destroyed.
pub fn lu_solve<T: Float>(
    lhs: &mut Array2<Complex<T>>,
    rhs: &mut Array2<Complex<T>>,
) -> Result<()> {
    let n = lhs.nrows();
    if n != lhs.ncols() || n != rhs.nrows() {
        return Err(Error::DimensionMismatch {
            left: n,
            right: rhs.nrows(),
        });
    }
    let m = rhs.ncols();
    let a = lhs.as_slice_mut().expect("contiguous lhs");
    let b = rhs.as_slice_mut().expect("contiguous rhs");

    for k in 0..n {
        // Pivot search on column k.
        let mut pivot_row = k;
        let mut pivot_mag = a[k * n + k].norm_sqr();
        for i in (k + 1)..n {
            let mag = a[i * n + k].norm_sqr();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag == T::zero() {
            return Err(Error::SingularMatrix);
        }
        if pivot_row != k {
            for j in 0..n {
                a.swap(k * n + j, pivot_row * n + j);
            }
            for j in 0..m {
                b.swap(k * m + j, pivot_row * m + j);
            }
        }
        let pivot = a[k * n + k];
        for i in (k + 1)..n {
            let f = a[i * n + k] / pivot;
            if f.norm_sqr() == T::zero() {
                continue;
            }
            a[i * n + k] = Complex::new(T::zero(), T::zero());
            for j in (k + 1)..n {
                let akj = a[k * n + j];
                a[i * n + j] = a[i * n + j] - f * akj;
            }
            for j in 0..m {
                let bkj = b[k * m + j];
                b[i * m + j] = b[i * m + j] - f * bkj;
            }
        }
    }
    // Back substitution.
    for k in (0..n).rev() {
        let pivot = a[k * n + k];
        for j in 0..m {
            let mut acc = b[k * m + j];
            for i in (k + 1)..n {
                acc = acc - a[k * n + i] * b[i * m + j];
            }
            b[k * m + j] = acc / pivot;
        }
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the unitary matrix whose
/// columns are the corresponding eigenvectors, so `a = v diag(w) v^dagger`.
///
/// Reduction to a real symmetric tridiagonal form by complex Householder
/// reflections, followed by the implicit-shift QL iteration with eigenvector
/// accumulation.
pub fn eigh<T: Float>(a: &Array2<Complex<T>>) -> Result<(Array1<T>, Array2<Complex<T>>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            left: n,
            right: a.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let scale = one_norm(a);
    let herm_tol = cast::<T>(200.0) * T::epsilon() * scale.max(T::one());
    let dev = hermitian_deviation(a);
    if dev > herm_tol {
        return Err(Error::NotHermitian {
            deviation: dev.to_f64().unwrap_or(f64::NAN),
        });
    }
    if n == 1 {
        return Ok((
            Array1::from_elem(1, a[[0, 0]].re),
            Array2::from_elem((1, 1), Complex::new(T::one(), T::zero())),
        ));
    }

    let zero_c = Complex::new(T::zero(), T::zero());
    let mut m: Vec<Complex<T>> = a.iter().copied().collect(); // row-major copy
    let mut reflectors: Vec<(usize, Vec<Complex<T>>, T)> = Vec::new();

    // Householder reduction: columns 0..n-2.
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut col_norm_sq = T::zero();
        for i in 0..len {
            col_norm_sq += m[(k + 1 + i) * n + k].norm_sqr();
        }
        let sigma = col_norm_sq.sqrt();
        if sigma <= scale * T::epsilon() {
            continue;
        }
        let alpha0 = m[(k + 1) * n + k];
        let alpha_mag = alpha0.norm();
        let phase = if alpha_mag > T::zero() {
            alpha0 / alpha_mag
        } else {
            Complex::new(T::one(), T::zero())
        };
        let mut v: Vec<Complex<T>> = (0..len).map(|i| m[(k + 1 + i) * n + k]).collect();
        v[0] = v[0] + phase * sigma;
        let tau = T::one() / (sigma * (sigma + alpha_mag)); // 2 / ||v||^2

        // p = tau * B v on the trailing block B = m[k+1.., k+1..]
        let mut p = vec![zero_c; len];
        for i in 0..len {
            let row = &m[(k + 1 + i) * n + (k + 1)..(k + 1 + i) * n + n];
            let mut acc = zero_c;
            for (j, &vj) in v.iter().enumerate() {
                acc = acc + row[j] * vj;
            }
            p[i] = acc * tau;
        }
        // K = (tau/2) v†p  (real for Hermitian B)
        let mut vp = zero_c;
        for i in 0..len {
            vp = vp + v[i].conj() * p[i];
        }
        let kk = tau * vp.re * cast::<T>(0.5);
        // w = p - K v ; B -= v w† + w v†
        let w: Vec<Complex<T>> = (0..len).map(|i| p[i] - v[i] * kk).collect();
        for i in 0..len {
            let vi = v[i];
            let wi = w[i];
            let row = &mut m[(k + 1 + i) * n + (k + 1)..(k + 1 + i) * n + n];
            for j in 0..len {
                row[j] = row[j] - vi * w[j].conj() - wi * v[j].conj();
            }
        }
        // New subdiagonal entry; zero the rest of the column.
        m[(k + 1) * n + k] = -phase * sigma;
        for i in 1..len {
            m[(k + 1 + i) * n + k] = zero_c;
        }
        reflectors.push((k, v, tau));
    }

    // Real tridiagonal data plus the unitary phase that absorbs complex
    // subdiagonals.
    let mut d: Vec<T> = (0..n).map(|i| m[i * n + i].re).collect();
    let mut e: Vec<T> = vec![T::zero(); n];
    let mut phases: Vec<Complex<T>> = vec![Complex::new(T::one(), T::zero()); n];
    for k in 0..n - 1 {
        let ec = m[(k + 1) * n + k];
        let mag = ec.norm();
        e[k] = mag;
        phases[k + 1] = if mag > T::zero() {
            (ec / mag) * phases[k]
        } else {
            phases[k]
        };
    }

    // Accumulate q = H_0 ... H_{n-3} D.
    let mut q: Vec<Complex<T>> = vec![zero_c; n * n];
    for i in 0..n {
        q[i * n + i] = phases[i];
    }
    let mut wrow: Vec<Complex<T>> = vec![zero_c; n];
    for (k, v, tau) in reflectors.iter().rev() {
        let len = v.len();
        for x in wrow.iter_mut() {
            *x = zero_c;
        }
        for (i, &vi) in v.iter().enumerate() {
            let vic = vi.conj();
            let row = &q[(k + 1 + i) * n..(k + 1 + i) * n + n];
            for j in 0..n {
                wrow[j] = wrow[j] + vic * row[j];
            }
        }
        for i in 0..len {
            let f = v[i] * *tau;
            let row = &mut q[(k + 1 + i) * n..(k + 1 + i) * n + n];
            for j in 0..n {
                row[j] = row[j] - f * wrow[j];
            }
        }
    }

    // Implicit-shift QL on (d, e) with eigenvector accumulation into q.
    ql_implicit(&mut d, &mut e, &mut q, n)?;

    // Sort ascending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let evals = Array1::from_iter(order.iter().map(|&i| d[i]));
    let mut vecs = Array2::<Complex<T>>::zeros((n, n));
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vecs[[i, new_j]] = q[i * n + old_j];
        }
    }
    Ok((evals, vecs))
}

/// QL with implicit Wilkinson shifts on a real symmetric tridiagonal matrix;
/// rotations are applied to the complex columns of `z`.
fn ql_implicit<T: Float>(d: &mut [T], e: &mut [T], z: &mut [Complex<T>], n: usize) -> Result<()> {
    const MAX_SWEEPS: usize = 64;
    // e[n-1] is scratch.
    e[n - 1] = T::zero();
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find a negligible subdiagonal element.
            let mut msplit = n - 1;
            for mm in l..n - 1 {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= T::epsilon() * dd {
                    msplit = mm;
                    break;
                }
            }
            if msplit == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::EigenNonConvergence { iterations: iter });
            }
            // Wilkinson shift.
            let two = cast::<T>(2.0);
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let denom = g + r.abs().copysign(g);
            g = d[msplit] - d[l] + e[l] / denom;
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut i = msplit;
            while i > l {
                let i0 = i - 1;
                let f = s * e[i0];
                let b = c * e[i0];
                r = f.hypot(g);
                e[i] = r;
                if r == T::zero() {
                    d[i] -= p;
                    e[msplit] = T::zero();
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i] - p;
                let t = (d[i0] - g) * s + two * c * b;
                p = s * t;
                d[i] = g + p;
                g = c * t - b;
                // Rotate columns i0, i of z.
                for k in 0..n {
                    let zi = z[k * n + i];
                    let zi0 = z[k * n + i0];
                    z[k * n + i] = zi0 * s + zi * c;
                    z[k * n + i0] = zi0 * c - zi * s;
                }
                i -= 1;
            }
            if r == T::zero() && i > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[msplit] = T::zero();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use num_complex::Complex64 as C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> Array2<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        let mh = m.t().mapv(|z| z.conj());
        (m + mh).mapv(|z| z * 0.5)
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let a = Array2::<C64>::zeros((4, 4));
        let e = expm(&a).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e[[i, j]] - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn expm_of_diagonal() {
        let a = array![
            [C64::new(0.3, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, -2.0)],
        ];
        let e = expm(&a).unwrap();
        assert!((e[[0, 0]] - C64::new(0.3f64.exp(), 0.0)).norm() < 1e-14);
        assert!((e[[1, 1]] - C64::new(0.0, -2.0).exp()).norm() < 1e-13);
        assert!(e[[0, 1]].norm() < 1e-15 && e[[1, 0]].norm() < 1e-15);
    }

    #[test]
    fn expm_rotation_block() {
        let th = 1.234_f64;
        let a = array![
            [C64::new(0.0, 0.0), C64::new(th, 0.0)],
            [C64::new(-th, 0.0), C64::new(0.0, 0.0)],
        ];
        let e = expm(&a).unwrap();
        assert!((e[[0, 0]].re - th.cos()).abs() < 1e-14);
        assert!((e[[0, 1]].re - th.sin()).abs() < 1e-14);
        assert!((e[[1, 0]].re + th.sin()).abs() < 1e-14);
    }

    #[test]
    fn expm_raising_operator_columns() {
        // exp(adag)|0> has amplitudes 1/sqrt(m!).
        let dim = 30;
        let mut adag = Array2::<C64>::zeros((dim, dim));
        for nidx in 0..dim - 1 {
            adag[[nidx + 1, nidx]] = C64::new(((nidx + 1) as f64).sqrt(), 0.0);
        }
        let e = expm(&adag).unwrap();
        let mut fact = 1.0_f64;
        for mrow in 0..dim {
            if mrow > 0 {
                fact *= mrow as f64;
            }
            let want = 1.0 / fact.sqrt();
            assert!(
                (e[[mrow, 0]] - C64::new(want, 0.0)).norm() < 1e-12 * want.max(1.0),
                "m = {mrow}"
            );
        }
    }

    #[test]
    fn lu_solves_small_system() {
        let mut a = array![
            [C64::new(2.0, 1.0), C64::new(1.0, 0.0)],
            [C64::new(0.0, -1.0), C64::new(3.0, 0.0)],
        ];
        let x_true = array![[C64::new(1.0, -2.0)], [C64::new(0.5, 0.5)]];
        let mut b = a.dot(&x_true);
        lu_solve(&mut a, &mut b).unwrap();
        for i in 0..2 {
            assert!((b[[i, 0]] - x_true[[i, 0]]).norm() < 1e-13);
        }
    }

    #[test]
    fn lu_detects_singular() {
        let mut a = Array2::<C64>::zeros((3, 3));
        let mut b = Array2::<C64>::eye(3);
        assert!(matches!(
            lu_solve(&mut a, &mut b),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let a = array![
            [C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ];
        assert!(matches!(eigh(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_diagonal_matrix() {
        let mut a = Array2::<C64>::zeros((5, 5));
        let vals = [3.0, -1.0, 0.0, 2.5, -4.0];
        for (i, &v) in vals.iter().enumerate() {
            a[[i, i]] = C64::new(v, 0.0);
        }
        let (w, v) = eigh(&a).unwrap();
        let mut sorted = vals;
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for i in 0..5 {
            assert!((w[i] - sorted[i]).abs() < 1e-14);
        }
        // Columns remain orthonormal.
        for i in 0..5 {
            for j in 0..5 {
                let d = vdot(&v.column(i).to_owned(), &v.column(j).to_owned());
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eigh_two_by_two_known() {
        // sigma_x: eigenvalues -1, +1.
        let a = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ];
        let (w, _) = eigh(&a).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14);
        assert!((w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_random_matrices() {
        for (n, seed) in [(2, 7), (3, 8), (5, 9), (17, 10), (60, 11)] {
            let a = random_hermitian(n, seed);
            let (w, v) = eigh(&a).unwrap();
            // a v_j = w_j v_j
            for j in 0..n {
                let vj = v.column(j).to_owned();
                let av = a.dot(&vj);
                let mut err: f64 = 0.0;
                for i in 0..n {
                    err = err.max((av[i] - vj[i] * w[j]).norm());
                }
                assert!(err < 1e-10, "n={n} j={j} err={err:.3e}");
            }
            // unitarity
            for i in 0..n {
                for j in 0..n {
                    let d = vdot(&v.column(i).to_owned(), &v.column(j).to_owned());
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - C64::new(want, 0.0)).norm() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn eigh_handles_degenerate_spectrum() {
        let n = 8;
        let a = Array2::<C64>::eye(n).mapv(|z| z * 2.0);
        let (w, v) = eigh(&a).unwrap();
        for i in 0..n {
            assert!((w[i] - 2.0).abs() < 1e-13);
        }
        for i in 0..n {
            let nrm = norm_sq(&v.column(i).to_owned());
            assert!((nrm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expm_agrees_with_spectral_exponential() {
        let n = 40;
        let h = random_hermitian(n, 21);
        let (w, v) = eigh(&h).unwrap();
        // exp(-i h) via the spectral form
        let mut spectral = Array2::<C64>::zeros((n, n));
        for j in 0..n {
            let phase = C64::new(0.0, -w[j]).exp();
            for r in 0..n {
                for c in 0..n {
                    spectral[[r, c]] += v[[r, j]] * phase * v[[c, j]].conj();
                }
            }
        }
        let direct = expm(&h.mapv(|z| z * C64::new(0.0, -1.0))).unwrap();
        let mut err: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                err = err.max((spectral[[r, c]] - direct[[r, c]]).norm());
            }
        }
        assert!(err < 1e-10, "err = {err:.3e}");
    }

    #[test]
    fn works_in_single_precision() {
        use num_complex::Complex;
        let a = array![
            [Complex::<f32>::new(1.0, 0.0), Complex::<f32>::new(0.0, 0.5)],
            [
                Complex::<f32>::new(0.0, -0.5),
                Complex::<f32>::new(-1.0, 0.0)
            ],
        ];
        let (w, _) = eigh(&a).unwrap();
        let lam = (1.0f32 + 0.25).sqrt();
        assert!((w[0] + lam).abs() < 1e-5);
        assert!((w[1] - lam).abs() < 1e-5);
    }
}
