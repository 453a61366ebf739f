//! Composite spin (x) oscillator dynamics: state-dependent-force Hamiltonians
//! with and without the Lamb-Dicke approximation, time evolution, pulse
//! sequencing, and the analytic entangled state the force ideally produces.
//!
//! Conventions: hbar = 1 (energies in rad/s), all Hamiltonians are expressed
//! in the frame rotating at the trap and qubit frequencies, and a qubit
//! detuning enters only as `sigma_z * delta / 2`. The composite basis is
//! indexed `s * dim + n` with spin 0 = down, 1 = up.

use std::io::Write;

use ndarray::{linalg::kron, Array1, Array2};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::float::{cast, Float};
use crate::fock::{self, OscillatorState, SqueezeParam};
use crate::linalg;
use crate::special;

/// State-dependent-force pulse: strength (rad/s), bichromatic phase,
/// duration, and whether the spin phase is shifted by pi (a return pulse,
/// which reverses the force on both spin branches).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdfPulse<T: Float> {
    pub omega: T,
    pub phi_d: T,
    pub tau: T,
    pub is_return: bool,
}

impl<T: Float> SdfPulse<T> {
    pub fn new(omega: T, phi_d: T, tau: T, is_return: bool) -> Result<Self> {
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "SDF strength must be positive, got {omega}"
            )));
        }
        if !(tau >= T::zero()) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pulse duration must be >= 0, got {tau}"
            )));
        }
        Ok(Self {
            omega,
            phi_d,
            tau,
            is_return,
        })
    }

    pub fn force(omega: T, phi_d: T, tau: T) -> Result<Self> {
        Self::new(omega, phi_d, tau, false)
    }

    pub fn return_pulse(omega: T, phi_d: T, tau: T) -> Result<Self> {
        Self::new(omega, phi_d, tau, true)
    }
}

/// Trap and drive parameters for the axial mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams<T: Float> {
    /// Axial frequency (rad/s).
    pub omega_z: T,
    /// Lamb-Dicke parameter.
    pub eta: T,
    /// Carrier Rabi frequency (rad/s); the Lamb-Dicke-limit SDF strength is
    /// `omega_0 * eta`.
    pub omega_0: T,
    /// Fixed qubit-oscillator detuning (rad/s) applied on top of any
    /// run-specific detuning.
    pub detuning_offset: T,
}

impl<T: Float> TrapParams<T> {
    pub fn new(omega_z: T, eta: T, omega_0: T, detuning_offset: T) -> Result<Self> {
        if !(omega_z > T::zero()) {
            return Err(Error::InvalidParameter(
                "trap frequency must be positive".into(),
            ));
        }
        if !(eta > T::zero() && eta < cast::<T>(0.3)) {
            return Err(Error::InvalidParameter(
                "Lamb-Dicke parameter must lie in (0, 0.3)".into(),
            ));
        }
        Ok(Self {
            omega_z,
            eta,
            omega_0,
            detuning_offset,
        })
    }
}

impl<T: Float> Default for TrapParams<T> {
    /// 2 pi x 2.1 MHz axial mode, eta = 0.05, carrier sized so the SDF
    /// strength is 2 pi x 13.25 kHz.
    fn default() -> Self {
        let tau = cast::<T>(std::f64::consts::TAU);
        Self {
            omega_z: tau * cast::<T>(2.1e6),
            eta: cast::<T>(0.05),
            omega_0: tau * cast::<T>(13.25e3) / cast::<T>(0.05),
            detuning_offset: T::zero(),
        }
    }
}

/// Which interaction Hamiltonian to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianModel {
    /// First order in the Lamb-Dicke parameter.
    Lda,
    /// All resonant terms, with the full Laguerre sideband couplings.
    Full,
}

/// Two-component spin (x) oscillator state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMotionState<T: Float> {
    down: Array1<Complex<T>>,
    up: Array1<Complex<T>>,
}

impl<T: Float> SpinMotionState<T> {
    /// Build from the two spin components; total norm must be 1.
    pub fn from_components(down: Array1<Complex<T>>, up: Array1<Complex<T>>) -> Result<Self> {
        if down.len() != up.len() {
            return Err(Error::DimensionMismatch {
                left: down.len(),
                right: up.len(),
            });
        }
        if down.is_empty() {
            return Err(Error::InvalidParameter(
                "state dimension must be >= 1".into(),
            ));
        }
        let norm = linalg::norm_sq(&down) + linalg::norm_sq(&up);
        let gate = cast::<T>(1e-6).max(T::epsilon() * cast::<T>(100.0));
        if (norm - T::one()).abs() > gate {
            return Err(Error::InvalidParameter(format!(
                "spin-motion state is not normalized: |norm^2 - 1| = {:e}",
                (norm - T::one()).abs()
            )));
        }
        Ok(Self { down, up })
    }

    /// `|down> (x) |osc>`.
    pub fn spin_down(osc: &OscillatorState<T>) -> Self {
        let down = osc.amplitudes().clone();
        let up = Array1::zeros(down.len());
        Self { down, up }
    }

    pub fn dim(&self) -> usize {
        self.down.len()
    }

    pub fn down(&self) -> &Array1<Complex<T>> {
        &self.down
    }

    pub fn up(&self) -> &Array1<Complex<T>> {
        &self.up
    }

    pub fn norm_sq(&self) -> T {
        linalg::norm_sq(&self.down) + linalg::norm_sq(&self.up)
    }

    /// Probability of measuring the spin in the down state.
    pub fn spin_down_prob(&self) -> T {
        linalg::norm_sq(&self.down)
    }

    /// Combined truncation leakage of the two components.
    pub fn leakage(&self) -> T {
        let d = self.dim();
        self.down[d - 1].norm_sqr() + self.up[d - 1].norm_sqr()
    }

    /// Mean motional occupation, normalized to the state norm.
    pub fn mean_n(&self) -> T {
        let mut acc = T::zero();
        for n in 0..self.dim() {
            let w = self.down[n].norm_sqr() + self.up[n].norm_sqr();
            acc += cast::<T>(n as f64) * w;
        }
        acc / self.norm_sq()
    }

    /// Oscillator component in the `|+/-> = (|up> +/- |down>)/sqrt(2)` basis.
    pub fn branch(&self, plus: bool) -> Array1<Complex<T>> {
        let inv_sqrt2 = Complex::new(T::one() / cast::<T>(2.0).sqrt(), T::zero());
        if plus {
            (&self.up + &self.down).mapv(|z| z * inv_sqrt2)
        } else {
            (&self.up - &self.down).mapv(|z| z * inv_sqrt2)
        }
    }

    /// Centroid `<a>` of a spin branch, normalized to the branch population.
    /// Returns zero for an (almost) empty branch.
    pub fn branch_centroid(&self, plus: bool) -> Complex<T> {
        let b = self.branch(plus);
        let pop = linalg::norm_sq(&b);
        if pop < T::epsilon() {
            return Complex::new(T::zero(), T::zero());
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for n in 0..b.len() - 1 {
            let root = cast::<T>((n + 1) as f64).sqrt();
            acc = acc + b[n].conj() * b[n + 1] * root;
        }
        acc / pop
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let ov = linalg::vdot(&self.down, &other.down) + linalg::vdot(&self.up, &other.up);
        Ok(ov.norm_sqr())
    }

    pub(crate) fn to_flat(&self) -> Array1<Complex<T>> {
        let dim = self.dim();
        let mut flat = Array1::zeros(2 * dim);
        for n in 0..dim {
            flat[n] = self.down[n];
            flat[dim + n] = self.up[n];
        }
        flat
    }

    pub(crate) fn from_flat(flat: &Array1<Complex<T>>) -> Self {
        let dim = flat.len() / 2;
        let down = Array1::from_iter(flat.iter().take(dim).copied());
        let up = Array1::from_iter(flat.iter().skip(dim).copied());
        Self { down, up }
    }
}

/// Phase-space displacement after driving for time `t`:
/// `alpha(t) = -i (Omega/2) exp(-i phi_D / 2) t`, sign-reversed for a
/// return pulse.
pub fn alpha_of_tau<T: Float>(p: &SdfPulse<T>, t: T) -> Complex<T> {
    let half = cast::<T>(0.5);
    let mag = p.omega * half * t;
    let phase = Complex::from_polar(T::one(), -p.phi_d * half);
    let a = Complex::new(T::zero(), -mag) * phase;
    if p.is_return {
        -a
    } else {
        a
    }
}

fn sigma_x<T: Float>() -> Array2<Complex<T>> {
    let mut s = Array2::zeros((2, 2));
    s[[0, 1]] = Complex::new(T::one(), T::zero());
    s[[1, 0]] = Complex::new(T::one(), T::zero());
    s
}

/// SDF Hamiltonian in the Lamb-Dicke approximation:
/// `H = (Omega/2) sigma_x (x) (adag e^{-i phi_D/2} + a e^{i phi_D/2})`.
pub fn h_sdf_lda<T: Float>(p: &SdfPulse<T>, dim: usize) -> Array2<Complex<T>> {
    let half = cast::<T>(0.5);
    let phase = Complex::from_polar(T::one(), -p.phi_d * half);
    let op = fock::raising::<T>(dim).mapv(|z| z * phase)
        + fock::lowering::<T>(dim).mapv(|z| z * phase.conj());
    let sign = if p.is_return { -T::one() } else { T::one() };
    let scale = Complex::new(p.omega * half * sign, T::zero());
    kron(&sigma_x::<T>(), &op).mapv(|z| z * scale)
}

/// SDF Hamiltonian with all resonant terms retained: the sideband couplings
/// carry the full `exp(i eta (a + adag))` matrix elements,
/// `<n+1| . |n> = i e^{-eta^2/2} eta L^1_n(eta^2) / sqrt(n+1)`.
///
/// The sideband phases are fixed so that eta -> 0 reproduces the Lamb-Dicke
/// form exactly with `Omega = omega_0 * eta` and `phi_D = phi_b - phi_r`.
pub fn h_sdf_full<T: Float>(tp: &TrapParams<T>, p: &SdfPulse<T>, dim: usize) -> Array2<Complex<T>> {
    let half = cast::<T>(0.5);
    let eta = tp.eta;
    let eta2 = eta * eta;
    let gauss = (-eta2 * half).exp();

    // Blue sideband: raises n by one.
    let mut m_bsb = Array2::<Complex<T>>::zeros((dim, dim));
    for n in 0..dim - 1 {
        let elem = gauss * eta * special::laguerre_l1(n, eta2) / cast::<T>((n + 1) as f64).sqrt();
        m_bsb[[n + 1, n]] = Complex::new(T::zero(), elem);
    }
    // Red sideband: lowers n by one; same elements transposed.
    let m_rsb = m_bsb.t().to_owned();

    let pi_2 = cast::<T>(std::f64::consts::FRAC_PI_2);
    let phi_shift = if p.is_return { T::PI() } else { T::zero() };
    let phi_b = p.phi_d * half + pi_2 + phi_shift;
    let phi_r = -p.phi_d * half + pi_2 + phi_shift;
    let a_op = m_bsb.mapv(|z| z * Complex::from_polar(T::one(), -phi_b))
        + m_rsb.mapv(|z| z * Complex::from_polar(T::one(), -phi_r));

    // H = (Omega0/2) [ sigma_+ (x) A + h.c. ]
    let scale = Complex::new(tp.omega_0 * half, T::zero());
    let n2 = 2 * dim;
    let mut h = Array2::<Complex<T>>::zeros((n2, n2));
    for r in 0..dim {
        for c in 0..dim {
            let v = a_op[[r, c]] * scale;
            if v.norm_sqr() != T::zero() {
                h[[dim + r, c]] = v; // sigma_+ : down -> up
                h[[c, dim + r]] = v.conj();
            }
        }
    }
    h
}

/// Qubit-detuning term `(delta/2) sigma_z (x) I`.
pub fn detuning_term<T: Float>(delta: T, dim: usize) -> Array2<Complex<T>> {
    let half = cast::<T>(0.5);
    let mut h = Array2::<Complex<T>>::zeros((2 * dim, 2 * dim));
    for n in 0..dim {
        h[[n, n]] = Complex::new(-delta * half, T::zero());
        h[[dim + n, dim + n]] = Complex::new(delta * half, T::zero());
    }
    h
}

/// Spectral propagator for a time-independent Hermitian Hamiltonian;
/// `exp(-i H t)` applied through the eigendecomposition, exact for any t.
pub struct Propagator<T: Float> {
    evals: Array1<T>,
    vecs: Array2<Complex<T>>,
    adj: Array2<Complex<T>>,
}

impl<T: Float> Propagator<T> {
    pub fn new(h: &Array2<Complex<T>>) -> Result<Self> {
        let (evals, vecs) = linalg::eigh(h)?;
        let adj = vecs.t().mapv(|z| z.conj());
        Ok(Self { evals, vecs, adj })
    }

    /// `exp(-i H t) psi`.
    pub fn apply(&self, psi: &Array1<Complex<T>>, t: T) -> Array1<Complex<T>> {
        let mut w = self.adj.dot(psi);
        for (wj, &lam) in w.iter_mut().zip(self.evals.iter()) {
            *wj = *wj * Complex::from_polar(T::one(), -lam * t);
        }
        self.vecs.dot(&w)
    }
}

/// Schroedinger evolution `exp(-i H t) s` for a Hermitian `h` on the
/// composite space.
pub fn evolve<T: Float>(
    s: &SpinMotionState<T>,
    h: &Array2<Complex<T>>,
    t: T,
) -> Result<SpinMotionState<T>> {
    if h.nrows() != 2 * s.dim() {
        return Err(Error::DimensionMismatch {
            left: h.nrows(),
            right: 2 * s.dim(),
        });
    }
    let prop = Propagator::new(h)?;
    let flat = prop.apply(&s.to_flat(), t);
    Ok(SpinMotionState::from_flat(&flat))
}

/// The entangled state the SDF ideally produces from `|down>|xi>`:
/// `(|+>|alpha, xi> - |->|-alpha, xi>)/sqrt(2)`, expressed in the
/// (down, up) basis.
pub fn swes_analytic<T: Float>(
    alpha: Complex<T>,
    xi: &SqueezeParam<T>,
    dim: usize,
) -> Result<SpinMotionState<T>> {
    let u = fock::displaced_squeezed(alpha, xi, dim)?;
    let v = fock::displaced_squeezed(-alpha, xi, dim)?;
    let half = Complex::new(cast::<T>(0.5), T::zero());
    let down = (u.amplitudes() + v.amplitudes()).mapv(|z| z * half);
    let up = (u.amplitudes() - v.amplitudes()).mapv(|z| z * half);
    Ok(SpinMotionState { down, up })
}

/// Probability of finding the spin in `|down>`.
pub fn spin_down_prob<T: Float>(s: &SpinMotionState<T>) -> T {
    s.spin_down_prob()
}

/// A pulse sequence applied to an initial state, with a sampling interval
/// for the returned time series.
#[derive(Debug, Clone)]
pub struct Scenario<T: Float> {
    pub initial: SpinMotionState<T>,
    pub pulses: Vec<SdfPulse<T>>,
    pub trap: TrapParams<T>,
    pub model: HamiltonianModel,
    /// Sampling interval in seconds (1 us by default).
    pub sample_dt: T,
}

impl<T: Float> Scenario<T> {
    pub fn new(
        initial: SpinMotionState<T>,
        pulses: Vec<SdfPulse<T>>,
        trap: TrapParams<T>,
        model: HamiltonianModel,
    ) -> Self {
        Self {
            initial,
            pulses,
            trap,
            model,
            sample_dt: cast::<T>(1e-6),
        }
    }

    pub fn with_sample_dt(mut self, dt: T) -> Self {
        self.sample_dt = dt;
        self
    }

    pub fn total_duration(&self) -> T {
        self.pulses.iter().map(|p| p.tau).sum()
    }

    pub(crate) fn hamiltonian(&self, pulse: &SdfPulse<T>, delta: T) -> Array2<Complex<T>> {
        let dim = self.initial.dim();
        let mut h = match self.model {
            HamiltonianModel::Lda => h_sdf_lda(pulse, dim),
            HamiltonianModel::Full => h_sdf_full(&self.trap, pulse, dim),
        };
        let delta_total = self.trap.detuning_offset + delta;
        if delta_total != T::zero() {
            h = h + detuning_term(delta_total, dim);
        }
        h
    }
}

/// One sampled point of a sequence.
#[derive(Debug, Clone)]
pub struct TimeSample<T: Float> {
    pub t: T,
    pub state: SpinMotionState<T>,
}

/// Ordered states at the sample times of a pulse sequence.
#[derive(Debug, Clone)]
pub struct TimeSeries<T: Float> {
    pub samples: Vec<TimeSample<T>>,
}

impl<T: Float> TimeSeries<T> {
    pub fn final_state(&self) -> &SpinMotionState<T> {
        &self.samples.last().expect("non-empty series").state
    }

    /// CSV with header `t_us,p_down,re_alpha_plus,im_alpha_plus,leakage`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_us,p_down,re_alpha_plus,im_alpha_plus,leakage")?;
        for sample in &self.samples {
            let c = sample.state.branch_centroid(true);
            writeln!(
                w,
                "{},{},{},{},{}",
                sample.t * cast::<T>(1e6),
                sample.state.spin_down_prob(),
                c.re,
                c.im,
                sample.state.leakage()
            )?;
        }
        Ok(())
    }
}

/// Run contiguous SDF pulses, sampling every `scenario.sample_dt`.
///
/// `detuning` (rad/s) is added to the trap's fixed detuning offset for the
/// whole run. Every sample is propagated spectrally from the start of its
/// pulse, so there is no step-size error to tune.
pub fn run_sequence<T: Float>(scenario: &Scenario<T>, detuning: T) -> Result<TimeSeries<T>> {
    let mut samples = Vec::new();
    let mut t_base = T::zero();
    let mut state_flat = scenario.initial.to_flat();
    samples.push(TimeSample {
        t: T::zero(),
        state: scenario.initial.clone(),
    });
    for pulse in &scenario.pulses {
        if pulse.tau <= T::zero() {
            continue;
        }
        let h = scenario.hamiltonian(pulse, detuning);
        let prop = Propagator::new(&h)?;
        for local_t in sample_offsets(pulse.tau, scenario.sample_dt) {
            let flat = prop.apply(&state_flat, local_t);
            samples.push(TimeSample {
                t: t_base + local_t,
                state: SpinMotionState::from_flat(&flat),
            });
        }
        state_flat = prop.apply(&state_flat, pulse.tau);
        t_base += pulse.tau;
    }
    Ok(TimeSeries { samples })
}

/// Sample offsets within one pulse: every `dt` plus the pulse end.
fn sample_offsets<T: Float>(tau: T, dt: T) -> Vec<T> {
    let mut out = Vec::new();
    if dt > T::zero() {
        let mut k = 1usize;
        loop {
            let t = dt * cast::<T>(k as f64);
            if t >= tau {
                break;
            }
            out.push(t);
            k += 1;
        }
    }
    out.push(tau);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    const TAU_2PI: f64 = std::f64::consts::TAU;

    fn paper_pulse(tau: f64, is_return: bool) -> SdfPulse<f64> {
        SdfPulse::new(TAU_2PI * 13.25e3, 0.0, tau, is_return).unwrap()
    }

    fn xi(r: f64, phi: f64) -> SqueezeParam<f64> {
        SqueezeParam::new(r, phi).unwrap()
    }

    #[test]
    fn alpha_of_tau_examples() {
        let p = paper_pulse(60e-6, false);
        let a = alpha_of_tau(&p, 60e-6);
        assert!((a.norm() - 2.4976).abs() < 1e-3);
        let p250 = paper_pulse(250e-6, false);
        let a250 = alpha_of_tau(&p250, 250e-6);
        assert!((a250.norm() - 10.4066).abs() < 1e-3);
        assert!((2.0 * a250.norm() - 20.8).abs() < 0.05);
        assert_eq!(alpha_of_tau(&p, 0.0), C64::new(0.0, 0.0));
        // Return pulse reverses the displacement direction.
        let pr = paper_pulse(60e-6, true);
        assert!((alpha_of_tau(&pr, 10e-6) + alpha_of_tau(&p, 10e-6)).norm() < 1e-15);
    }

    #[test]
    fn lda_matrix_element_and_hermiticity() {
        let dim = 6;
        let phi_d = 0.73;
        let p = SdfPulse::new(1.0, phi_d, 1.0, false).unwrap();
        let h = h_sdf_lda(&p, dim);
        // <up,1|H|down,0> = (Omega/2) e^{-i phi_D/2}
        let want = C64::from_polar(0.5, -phi_d / 2.0);
        assert!((h[[dim + 1, 0]] - want).norm() < 1e-15);
        assert!(linalg::hermitian_deviation(&h) < 1e-14);
    }

    #[test]
    fn full_hamiltonian_reduces_to_lda() {
        let dim = 8;
        let phi_d = 1.1;
        let eta = 1e-4;
        let omega = 2.0 * eta; // omega_0 = 2.0
        let tp = TrapParams::new(TAU_2PI * 2.1e6, eta, 2.0, 0.0).unwrap();
        let p = SdfPulse::new(omega, phi_d, 1.0, false).unwrap();
        let h_full = h_sdf_full(&tp, &p, dim);
        let h_lda = h_sdf_lda(&p, dim);
        let mut worst = 0.0f64;
        for i in 0..2 * dim {
            for j in 0..2 * dim {
                worst = worst.max((h_full[[i, j]] - h_lda[[i, j]]).norm());
            }
        }
        // Agreement to O(eta^2) relative to the coupling strength.
        assert!(worst < 10.0 * eta * eta * omega, "worst = {worst:.3e}");
        assert!(linalg::hermitian_deviation(&h_full) < 1e-14);
    }

    #[test]
    fn full_hamiltonian_ground_element() {
        let eta = 0.05f64;
        let tp = TrapParams::new(TAU_2PI * 2.1e6, eta, 1.0, 0.0).unwrap();
        let p = SdfPulse::new(eta, 0.0, 1.0, false).unwrap();
        let h = h_sdf_full(&tp, &p, 4);
        // |<up,1|H|down,0>| = omega_0 eta e^{-eta^2/2} / 2 = 0.024969 omega_0
        let mag = h[[4 + 1, 0]].norm();
        assert!((mag - 0.024969).abs() < 1e-6, "mag = {mag}");
    }

    #[test]
    fn evolve_is_identity_at_zero_time() {
        let s0 = SpinMotionState::spin_down(&fock::number_state::<f64>(0, 8).unwrap());
        let h = h_sdf_lda(&paper_pulse(1.0, false), 8);
        let s = evolve(&s0, &h, 0.0).unwrap();
        assert!(s.fidelity(&s0).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn evolve_semigroup_property() {
        let s0 = SpinMotionState::spin_down(&fock::number_state::<f64>(0, 32).unwrap());
        let h = h_sdf_lda(&paper_pulse(1.0, false), 32);
        let t = 25e-6;
        let once = evolve(&s0, &h, t).unwrap();
        let half = evolve(&s0, &h, t / 2.0).unwrap();
        let twice = evolve(&half, &h, t / 2.0).unwrap();
        let mut worst = 0.0f64;
        for n in 0..32 {
            worst = worst.max((once.down()[n] - twice.down()[n]).norm());
            worst = worst.max((once.up()[n] - twice.up()[n]).norm());
        }
        assert!(worst < 1e-10, "worst = {worst:.3e}");
    }

    #[test]
    fn evolve_ground_state_population_closed_form() {
        // |down>|0> under the LDA force: P(down) = (1 + e^{-2 alpha^2})/2.
        let dim = 48;
        let s0 = SpinMotionState::spin_down(&fock::number_state::<f64>(0, dim).unwrap());
        let p = paper_pulse(40e-6, false);
        let h = h_sdf_lda(&p, dim);
        for &t in &[5e-6, 12e-6, 25e-6] {
            let s = evolve(&s0, &h, t).unwrap();
            let a2 = alpha_of_tau(&p, t).norm_sqr();
            let want = (1.0 + (-2.0 * a2).exp()) / 2.0;
            assert!(
                (s.spin_down_prob() - want).abs() < 1e-9,
                "t = {t}: {} vs {want}",
                s.spin_down_prob()
            );
        }
    }

    #[test]
    fn evolution_matches_analytic_swes() {
        let sq = xi(1.08, 0.0);
        let p = paper_pulse(30e-6, false);
        let alpha = alpha_of_tau(&p, p.tau);
        let dim = fock::required_dim(alpha, &sq);
        let s0 = SpinMotionState::spin_down(&fock::squeezed_vacuum(&sq, dim).unwrap());
        let h = h_sdf_lda(&p, dim);
        let evolved = evolve(&s0, &h, p.tau).unwrap();
        let analytic = swes_analytic(alpha, &sq, dim).unwrap();
        let f = evolved.fidelity(&analytic).unwrap();
        assert!(f >= 1.0 - 1e-6, "fidelity = {f}");
        assert!((evolved.norm_sq() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn swes_zero_displacement_recovers_initial() {
        let sq = xi(0.9, 0.4);
        let dim = fock::required_dim(C64::new(0.0, 0.0), &sq);
        let s = swes_analytic(C64::new(0.0, 0.0), &sq, dim).unwrap();
        let want = SpinMotionState::spin_down(&fock::squeezed_vacuum(&sq, dim).unwrap());
        assert!(s.fidelity(&want).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn swes_population_equals_overlap_formula() {
        let sq = xi(1.08, 0.0);
        let alpha = C64::new(0.5, 0.0);
        let dim = fock::required_dim(alpha, &sq);
        let s = swes_analytic(alpha, &sq, dim).unwrap();
        // P(down) = (1 + X)/2 with X = exp(-2 |a|^2 e^{2r}) at dphi = 0.
        let x = (-2.0 * 0.25 * (2.16f64).exp()).exp();
        assert!((s.spin_down_prob() - (1.0 + x) / 2.0).abs() < 1e-9);
        assert!(((1.0 + 0.0131_f64) / 2.0 - 0.5066).abs() < 1e-4);
    }

    #[test]
    fn branch_centroids_are_antisymmetric() {
        let sq = xi(1.08, 0.0);
        let p = paper_pulse(25e-6, false);
        let alpha = alpha_of_tau(&p, p.tau);
        let dim = fock::required_dim(alpha, &sq);
        let s0 = SpinMotionState::spin_down(&fock::squeezed_vacuum(&sq, dim).unwrap());
        let h = h_sdf_lda(&p, dim);
        for &t in &[8e-6, 25e-6] {
            let s = evolve(&s0, &h, t).unwrap();
            let cp = s.branch_centroid(true);
            let cm = s.branch_centroid(false);
            assert!((cp + cm).norm() < 1e-8, "t = {t}");
            // The plus branch sits at alpha(t).
            assert!((cp - alpha_of_tau(&p, t)).norm() < 1e-6);
        }
    }

    #[test]
    fn revival_returns_all_population() {
        let sq = xi(1.08, 0.0);
        let tau1 = 40e-6;
        let p = paper_pulse(tau1, false);
        let alpha = alpha_of_tau(&p, tau1);
        let dim = fock::required_dim(alpha, &sq);
        let s0 = SpinMotionState::spin_down(&fock::squeezed_vacuum(&sq, dim).unwrap());
        let scenario = Scenario::new(
            s0,
            vec![paper_pulse(tau1, false), paper_pulse(tau1, true)],
            TrapParams::default(),
            HamiltonianModel::Lda,
        );
        let series = run_sequence(&scenario, 0.0).unwrap();
        let p_end = series.final_state().spin_down_prob();
        assert!((p_end - 1.0).abs() < 1e-6, "P(down) = {p_end}");
        // Norm drift over the full sequence stays tiny.
        assert!((series.final_state().norm_sq() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn revival_peaks_at_matched_duration() {
        let tau1 = 30e-6;
        let sq = xi(0.8, 0.0);
        let p = paper_pulse(tau1, false);
        let alpha = alpha_of_tau(&p, tau1);
        let dim = fock::required_dim(alpha, &sq);
        let s0 = SpinMotionState::spin_down(&fock::squeezed_vacuum(&sq, dim).unwrap());
        let scenario = Scenario::new(
            s0,
            vec![paper_pulse(tau1, false), paper_pulse(2.0 * tau1, true)],
            TrapParams::default(),
            HamiltonianModel::Lda,
        )
        .with_sample_dt(1e-6);
        let series = run_sequence(&scenario, 0.0).unwrap();
        let best = series
            .samples
            .iter()
            .filter(|s| s.t > tau1)
            .max_by(|a, b| {
                a.state
                    .spin_down_prob()
                    .partial_cmp(&b.state.spin_down_prob())
                    .unwrap()
            })
            .unwrap();
        assert!(
            (best.t - 2.0 * tau1).abs() < 1.5e-6,
            "revival peak at {} us",
            best.t * 1e6
        );
    }

    #[test]
    fn lda_and_full_agree_at_short_times() {
        // eta = 0.05, tau = 60 us: branch-state fidelity >= 0.99.
        let sq = xi(1.08, 0.0);
        let tau1 = 60e-6;
        let p = paper_pulse(tau1, false);
        let alpha = alpha_of_tau(&p, tau1);
        let dim = fock::required_dim(alpha, &sq);
        let trap = TrapParams::default();
        let s0 = SpinMotionState::spin_down(&fock::squeezed_vacuum(&sq, dim).unwrap());
        let h_l = h_sdf_lda(&p, dim);
        let h_f = h_sdf_full(&trap, &p, dim);
        let s_l = evolve(&s0, &h_l, tau1).unwrap();
        let s_f = evolve(&s0, &h_f, tau1).unwrap();
        let f = s_l.fidelity(&s_f).unwrap();
        assert!(f >= 0.99, "fidelity = {f}");
    }

    #[test]
    fn sequence_csv_has_expected_columns() {
        let s0 = SpinMotionState::spin_down(&fock::number_state::<f64>(0, 24).unwrap());
        let scenario = Scenario::new(
            s0,
            vec![paper_pulse(5e-6, false)],
            TrapParams::default(),
            HamiltonianModel::Lda,
        );
        let series = run_sequence(&scenario, 0.0).unwrap();
        let mut buf = Vec::new();
        series.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_us,p_down,re_alpha_plus,im_alpha_plus,leakage\n"));
        assert_eq!(text.lines().count(), 1 + series.samples.len());
    }

    #[test]
    fn detuning_term_shape() {
        let h = detuning_term(2.0 * std::f64::consts::PI * 1.5e3, 4);
        assert!(linalg::hermitian_deviation(&h) < 1e-12);
        assert!(h[[0, 0]].re < 0.0 && h[[4, 4]].re > 0.0);
    }
}
