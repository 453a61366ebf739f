//! Closed-form observables: wavepacket overlap, spin-population models,
//! displaced-squeezed number statistics, sideband Rabi signals, and the
//! interferometer contrast gain of squeezed cat states.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::float::{cast, Float};
use crate::fock::{self, NumberDist, SqueezeParam};
use crate::special;

/// Arguments of the overlap between the two displaced wavepackets of a cat
/// state, `X(alpha, xi)`. The force-to-axis angle `dphi = arg(alpha) -
/// phi_s/2` is always derived from the stored pair, never stored separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapParams<T: Float> {
    alpha: Complex<T>,
    xi: SqueezeParam<T>,
}

impl<T: Float> OverlapParams<T> {
    pub fn new(alpha: Complex<T>, xi: SqueezeParam<T>) -> Self {
        Self { alpha, xi }
    }

    /// Scan-style constructor: displacement magnitude and the angle between
    /// the force and the squeezing axis, with `phi_s` fixed to zero.
    pub fn from_delta_phi(magnitude: T, delta_phi: T, r: T) -> Result<Self> {
        let xi = SqueezeParam::new(r, T::zero())?;
        Ok(Self {
            alpha: Complex::from_polar(magnitude.abs(), delta_phi),
            xi,
        })
    }

    pub fn alpha(&self) -> Complex<T> {
        self.alpha
    }

    pub fn xi(&self) -> &SqueezeParam<T> {
        &self.xi
    }

    pub fn delta_phi(&self) -> T {
        self.alpha.arg() - self.xi.phi_s() * cast::<T>(0.5)
    }
}

/// Overlap of the two displaced-squeezed wavepackets:
/// `X = exp(-2 |alpha|^2 (e^{2r} cos^2 dphi + e^{-2r} sin^2 dphi))`.
pub fn overlap_x<T: Float>(p: &OverlapParams<T>) -> T {
    let two = cast::<T>(2.0);
    let r = p.xi().r();
    let a2 = p.alpha().norm_sqr();
    if a2 == T::zero() {
        return T::one();
    }
    let dphi = p.delta_phi();
    let (s, c) = dphi.sin_cos();
    let exponent = two * a2 * ((two * r).exp() * c * c + (-two * r).exp() * s * s);
    (-exponent).exp()
}

/// Spin-population model for force-duration scans,
/// `P(down) = (A + B X(alpha(tau), xi)) / 2` with `|alpha| = Omega tau / 2`.
///
/// `A` and `B` absorb experimental imperfections; both must lie in [0, 2]
/// with `A + B <= 2` so the model stays inside [0, 1].
pub fn spin_population_model<T: Float>(
    tau: T,
    omega: T,
    xi: &SqueezeParam<T>,
    delta_phi: T,
    a: T,
    b: T,
) -> Result<T> {
    let two = cast::<T>(2.0);
    if !(a >= T::zero() && a <= two && b >= T::zero() && b <= two && a + b <= two) {
        return Err(Error::InvalidParameter(format!(
            "population model needs A, B in [0, 2] with A + B <= 2, got A = {a}, B = {b}"
        )));
    }
    let mag = omega * tau / two;
    let p = OverlapParams::from_delta_phi(mag, delta_phi, xi.r())?;
    Ok((a + b * overlap_x(&p)) / two)
}

/// Number distribution of the displaced-squeezed state, evaluated from the
/// Hermite-polynomial closed form in the log domain and scaled by `kappa`.
///
/// For `kappa = 1` the full distribution sums to one; the mass missing from
/// the returned vector is the tail beyond `n_max`.
pub fn dsq_number_dist<T: Float>(
    alpha: Complex<T>,
    xi: &SqueezeParam<T>,
    kappa: T,
    n_max: usize,
) -> Result<NumberDist<T>> {
    if !(kappa > T::zero() && kappa <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "kappa must lie in (0, 1], got {kappa}"
        )));
    }
    let r = xi.r();
    let base = if r < cast::<T>(1e-12) {
        // Coherent-state limit: Poissonian with mean |alpha|^2.
        special::poisson_pmf(alpha.norm_sqr(), n_max)
    } else {
        let half = cast::<T>(0.5);
        let two = cast::<T>(2.0);
        let t = r.tanh();
        let phase = Complex::from_polar(T::one(), xi.phi_s());
        // ln prefactor: -|a|^2 - Re(conj(a)^2 e^{i phi_s}) tanh r - ln cosh r
        let quad = (alpha.conj() * alpha.conj() * phase).re;
        let ln_pref = -alpha.norm_sqr() - quad * t - r.cosh().ln();
        // Hermite argument (principal branch of the square root).
        let z = (alpha * r.cosh() + alpha.conj() * phase * r.sinh())
            / (phase * (two * r).sinh()).sqrt();
        let hermites = special::hermite_scaled(z, n_max);
        let lnf = special::ln_factorial_table::<T>(n_max);
        let ln_half_t = (t * half).ln();
        (0..=n_max)
            .map(|n| {
                let (h, scale) = hermites[n];
                let h2 = h.norm_sqr();
                if h2 == T::zero() {
                    return T::zero();
                }
                let ln_p =
                    cast::<T>(n as f64) * ln_half_t - lnf[n] + ln_pref + h2.ln() + two * scale;
                ln_p.exp()
            })
            .collect()
    };
    // Scale after the fact so the distribution is exactly linear in kappa.
    let p = base.into_iter().map(|v| v * kappa).collect();
    Ok(NumberDist::from_probabilities(p))
}

/// Mean and variance of the occupation number of `|alpha, xi>`:
/// `<n> = |alpha|^2 + sinh^2 r`,
/// `var = |alpha cosh r - alpha* e^{i phi_s} sinh r|^2 + 2 cosh^2 r sinh^2 r`.
pub fn dsq_moments<T: Float>(alpha: Complex<T>, xi: &SqueezeParam<T>) -> (T, T) {
    fock::displaced_squeezed_moments(alpha, xi)
}

/// Mandel parameter `Q = (var - mean)/mean`; negative values are
/// sub-Poissonian.
pub fn mandel_q<T: Float>(mean: T, variance: T) -> Result<T> {
    if !(mean > T::zero()) {
        return Err(Error::InvalidParameter(
            "Mandel Q undefined for mean <= 0".into(),
        ));
    }
    Ok((variance - mean) / mean)
}

/// Displacement magnitude where the squeezed-axis Mandel Q crosses zero:
/// the root of `|alpha|^2 (1 - e^{-2r}) = sinh^2 r cosh 2r`.
pub fn mandel_q_zero_crossing<T: Float>(r: T) -> Option<T> {
    let two = cast::<T>(2.0);
    if r <= T::zero() {
        return None;
    }
    let s = r.sinh();
    Some(((s * s * (two * r).cosh()) / (T::one() - (-two * r).exp())).sqrt())
}

/// Sideband Rabi frequency coupling `|down>|n>` to `|up>|n+1>`:
/// `Omega_{n,n+1} = Omega_0 e^{-eta^2/2} eta L^1_n(eta^2) / sqrt(n+1)`.
pub fn rabi_frequency<T: Float>(n: usize, omega_0: T, eta: T) -> T {
    let half = cast::<T>(0.5);
    let eta2 = eta * eta;
    omega_0 * (-eta2 * half).exp() * eta * special::laguerre_l1(n, eta2)
        / cast::<T>((n + 1) as f64).sqrt()
}

/// Parameters of the sideband readout model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsbModelParams<T: Float> {
    /// Carrier Rabi frequency (rad/s).
    pub omega_0: T,
    /// Lamb-Dicke parameter.
    pub eta: T,
    /// Phenomenological contrast decay (1/s), not scaled with n.
    pub gamma: T,
    /// Linear drift slope (1/s) from population leaking out of the
    /// sideband dynamics; negligible when p(0) is small.
    pub b: T,
    /// Highest recoverable number state; frequency crowding makes larger n
    /// indistinguishable.
    pub n_max: usize,
}

impl<T: Float> BsbModelParams<T> {
    pub fn new(omega_0: T, eta: T, gamma: T, b: T, n_max: usize) -> Result<Self> {
        if !(gamma >= T::zero()) {
            return Err(Error::InvalidParameter("gamma must be >= 0".into()));
        }
        if !(omega_0 > T::zero()) || !(eta > T::zero()) {
            return Err(Error::InvalidParameter(
                "omega_0 and eta must be positive".into(),
            ));
        }
        Ok(Self {
            omega_0,
            eta,
            gamma,
            b,
            n_max,
        })
    }

    /// Noise-free model with the standard readout window of 30 states.
    pub fn ideal(omega_0: T, eta: T) -> Result<Self> {
        Self::new(omega_0, eta, T::zero(), T::zero(), 29)
    }
}

/// Sideband readout signal
/// `P(down)(t) = b t + (1/2) sum_n p(n) (1 + e^{-gamma t} cos(Omega_{n,n+1} t))`.
pub fn bsb_signal<T: Float>(t: T, p: &NumberDist<T>, m: &BsbModelParams<T>) -> T {
    let half = cast::<T>(0.5);
    let decay = (-m.gamma * t).exp();
    let top = m.n_max.min(p.n_max());
    let mut acc = T::zero();
    for n in 0..=top {
        let pn = p.p(n);
        if pn == T::zero() {
            continue;
        }
        let omega_n = rabi_frequency(n, m.omega_0, m.eta);
        acc += pn * (T::one() + decay * (omega_n * t).cos());
    }
    m.b * t + half * acc
}

/// Residual displacement and contrast after closing an interferometer whose
/// arms picked up a relative oscillator phase `delta_theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastResult<T: Float> {
    /// `alpha_R = 2 i alpha sin(delta_theta / 2)`; lies along the
    /// anti-squeezed direction for a force along the squeezed axis.
    pub alpha_r: Complex<T>,
    /// Recombination overlap `X(alpha_R, xi)`.
    pub overlap: T,
    /// Contrast gain over the unsqueezed cat,
    /// `exp(-2 |alpha_R|^2 (e^{-2r} - 1)) >= 1`.
    pub improvement: T,
}

/// Contrast of a phase-kicked interferometer built on wavepackets squeezed
/// along the displacement direction (`dphi = 0` geometry).
pub fn interferometer_contrast<T: Float>(
    alpha: Complex<T>,
    delta_theta: T,
    xi: &SqueezeParam<T>,
) -> ContrastResult<T> {
    let two = cast::<T>(2.0);
    let half = cast::<T>(0.5);
    let alpha_r = Complex::new(T::zero(), two * (delta_theta * half).sin()) * alpha;
    let overlap = overlap_x(&OverlapParams::new(alpha_r, *xi));
    let improvement = (-two * alpha_r.norm_sqr() * ((-two * xi.r()).exp() - T::one())).exp();
    ContrastResult {
        alpha_r,
        overlap,
        improvement,
    }
}
