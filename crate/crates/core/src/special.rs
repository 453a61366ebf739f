//! Special functions shared across modules: generalized Laguerre polynomials,
//! log-factorials, and a scaled complex Hermite recurrence.

use num_complex::Complex;

use crate::float::{cast, Float};

/// Generalized Laguerre polynomial `L^1_n(x)` by upward recurrence.
///
/// Stable for the small arguments used here (x = eta^2 << 1), where every
/// recurrence term keeps the same sign.
pub fn laguerre_l1<T: Float>(n: usize, x: T) -> T {
    let two = cast::<T>(2.0);
    if n == 0 {
        return T::one();
    }
    let mut lm1 = T::one(); // L^1_0
    let mut l = two - x; // L^1_1
    for k in 1..n {
        let kf = cast::<T>(k as f64);
        // (k+1) L^1_{k+1} = (2k + 2 - x) L^1_k - (k + 1) ... with a = 1:
        // (k+1) L_{k+1} = (2k + 1 + a - x) L_k - (k + a) L_{k-1}
        let next = ((two * kf + two - x) * l - (kf + T::one()) * lm1) / (kf + T::one());
        lm1 = l;
        l = next;
    }
    l
}

/// ln(n!) accumulated in the working precision.
#[cfg_attr(not(test), allow(dead_code))]
pub fn ln_factorial<T: Float>(n: usize) -> T {
    let mut acc = T::zero();
    for k in 2..=n {
        acc += cast::<T>(k as f64).ln();
    }
    acc
}

/// Table of ln(k!) for k = 0..=n.
pub fn ln_factorial_table<T: Float>(n: usize) -> Vec<T> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    table.push(acc);
    for k in 1..=n {
        acc += cast::<T>(k as f64).ln();
        table.push(acc);
    }
    table
}

/// Hermite polynomials H_n(z) for complex z, returned as scaled pairs
/// `(h_n, ln_scale_n)` with `H_n = h_n * exp(ln_scale_n)`.
///
/// The textbook three-term recurrence overflows around n = 29 for the
/// arguments produced by large displacements; rescaling whenever the mantissa
/// grows keeps every intermediate finite in either precision.
pub fn hermite_scaled<T: Float>(z: Complex<T>, n_max: usize) -> Vec<(Complex<T>, T)> {
    let two = cast::<T>(2.0);
    // Rescale threshold well inside the representable range.
    let big = T::max_value().sqrt() * cast::<T>(1e-3);
    let mut out = Vec::with_capacity(n_max + 1);
    let mut hm1 = Complex::new(T::one(), T::zero()); // H_0
    let mut scale_m1 = T::zero();
    out.push((hm1, scale_m1));
    if n_max == 0 {
        return out;
    }
    let mut h = z * two; // H_1
    let mut scale = T::zero();
    out.push((h, scale));
    for n in 1..n_max {
        let nf = cast::<T>(n as f64);
        // Bring the previous element onto the current scale before combining.
        let rel = (scale_m1 - scale).exp();
        let next = z * two * h - hm1 * (two * nf * rel);
        hm1 = h;
        scale_m1 = scale;
        h = next;
        if h.norm_sqr() > big {
            let mag = h.norm_sqr().sqrt();
            h = h / mag;
            scale += mag.ln();
            // hm1 keeps its own scale; the `rel` factor reconciles them.
        }
        out.push((h, scale));
    }
    out
}

/// Poisson probabilities p(n) = e^{-mean} mean^n / n! for n = 0..=n_max.
pub fn poisson_pmf<T: Float>(mean: T, n_max: usize) -> Vec<T> {
    let ln_mean = if mean > T::zero() {
        mean.ln()
    } else {
        T::neg_infinity()
    };
    let lnf = ln_factorial_table::<T>(n_max);
    (0..=n_max)
        .map(|n| {
            if mean == T::zero() {
                if n == 0 {
                    T::one()
                } else {
                    T::zero()
                }
            } else {
                (cast::<T>(n as f64) * ln_mean - mean - lnf[n]).exp()
            }
        })
        .collect()
}
