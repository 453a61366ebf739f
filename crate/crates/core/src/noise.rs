//! Decoherence: quasi-static magnetic-field detuning sampled shot-to-shot
//! from a sinusoidal line pattern, and Monte-Carlo wavefunction trajectories
//! with motional heating.
//!
//! The field fluctuates slowly compared to one experimental sequence, so the
//! detuning is frozen within a shot and redrawn between shots. Heating is a
//! high-temperature bath: jump operators `adag` and `a` at equal rate, the
//! measured quanta-per-second figure.

use std::io::Write;

use ndarray::Array1;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{PopulationTrace, ScanKind, TraceSample};
use crate::float::{cast, Float};
use crate::linalg;
use crate::spinboson::{
    run_sequence, Propagator, Scenario, SpinMotionState, TimeSample, TimeSeries,
};

/// Noise environment of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T: Float> {
    /// Peak qubit-oscillator detuning from the field fluctuation (rad/s).
    pub detuning_amplitude: T,
    /// Line frequency behind the sinusoidal pattern (Hz). Informational:
    /// the sequence is far shorter than a line period, so only the
    /// amplitude enters the quasi-static sampling.
    pub line_freq: T,
    /// Heating rate from the ground state (quanta per second).
    pub heating_rate: T,
    /// Trajectories in an ensemble.
    pub shots: usize,
    /// Base seed; each shot derives an independent stream from it.
    pub seed: u64,
}

impl<T: Float> NoiseModel<T> {
    pub fn new(
        detuning_amplitude: T,
        line_freq: T,
        heating_rate: T,
        shots: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(detuning_amplitude >= T::zero()) || !(heating_rate >= T::zero()) {
            return Err(Error::InvalidParameter(
                "noise amplitudes must be >= 0".into(),
            ));
        }
        if shots < 1 {
            return Err(Error::InvalidParameter("shots must be >= 1".into()));
        }
        Ok(Self {
            detuning_amplitude,
            line_freq,
            heating_rate,
            shots,
            seed,
        })
    }

    /// Noiseless configuration.
    pub fn quiet(shots: usize, seed: u64) -> Self {
        Self {
            detuning_amplitude: T::zero(),
            line_freq: cast::<T>(50.0),
            heating_rate: T::zero(),
            shots,
            seed,
        }
    }
}

impl<T: Float> Default for NoiseModel<T> {
    /// 2 pi x 1.5 kHz peak detuning on a 50 Hz line, 10 quanta/s heating,
    /// 100 shots.
    fn default() -> Self {
        Self {
            detuning_amplitude: cast::<T>(std::f64::consts::TAU * 1.5e3),
            line_freq: cast::<T>(50.0),
            heating_rate: cast::<T>(10.0),
            shots: 100,
            seed: 0,
        }
    }
}

/// One quasi-static detuning draw: `delta_max sin(u)`, `u` uniform on
/// `[0, 2 pi)` - the arcsine distribution of a sinusoid sampled at a random
/// phase.
pub fn sample_detuning<T: Float, R: Rng + ?Sized>(m: &NoiseModel<T>, rng: &mut R) -> T {
    let u = T::sample_unit(rng) * cast::<T>(std::f64::consts::TAU);
    m.detuning_amplitude * u.sin()
}

/// Deterministic per-shot RNG stream from `(seed, shot)`, so ensembles do
/// not depend on scheduling order.
fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut s = seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(shot.wrapping_add(1));
    let mut next = || {
        s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = s;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_mut(8) {
        chunk.copy_from_slice(&next().to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

fn mean_n_flat<T: Float>(psi: &Array1<Complex<T>>, dim: usize) -> T {
    let mut acc = T::zero();
    let mut norm = T::zero();
    for n in 0..dim {
        let w = psi[n].norm_sqr() + psi[dim + n].norm_sqr();
        acc += cast::<T>(n as f64) * w;
        norm += w;
    }
    acc / norm
}

fn renormalize<T: Float>(psi: &mut Array1<Complex<T>>) {
    let norm = linalg::norm_sq(psi).sqrt();
    if norm > T::zero() {
        let inv = T::one() / norm;
        for c in psi.iter_mut() {
            *c = *c * inv;
        }
    }
}

/// Apply a raising (`up = true`) or lowering jump to both spin components.
fn apply_jump<T: Float>(psi: &mut Array1<Complex<T>>, dim: usize, up: bool) {
    let zero = Complex::new(T::zero(), T::zero());
    for block in 0..2 {
        let base = block * dim;
        if up {
            for n in (0..dim - 1).rev() {
                let root = cast::<T>((n + 1) as f64).sqrt();
                psi[base + n + 1] = psi[base + n] * root;
            }
            psi[base] = zero;
        } else {
            for n in 0..dim - 1 {
                let root = cast::<T>((n + 1) as f64).sqrt();
                psi[base + n] = psi[base + n + 1] * root;
            }
            psi[base + dim - 1] = zero;
        }
    }
}

/// One stochastic wavefunction trajectory under the scenario's pulses with
/// a frozen detuning `delta` and motional heating.
///
/// First-order jump sampling: each sub-step carries jump probability
/// `ndot (2 <n> + 1) dt`, kept below 1e-3 by adaptive sub-stepping; the
/// deterministic part is a Strang split of the exact spectral propagator
/// and the diagonal decay `exp(-ndot (2 n + 1) dt / 2)`, renormalized every
/// step. With zero heating this reduces exactly to the unitary run.
pub fn mcwf_shot<T: Float, R: Rng + ?Sized>(
    scenario: &Scenario<T>,
    delta: T,
    m: &NoiseModel<T>,
    rng: &mut R,
) -> Result<TimeSeries<T>> {
    if m.heating_rate == T::zero() {
        return run_sequence(scenario, delta);
    }
    let dim = scenario.initial.dim();
    let ndot = m.heating_rate;
    let half = cast::<T>(0.5);
    let p_cap = cast::<T>(1e-3);

    let mut psi = scenario.initial.to_flat();
    let mut samples = vec![TimeSample {
        t: T::zero(),
        state: scenario.initial.clone(),
    }];
    let mut t_base = T::zero();

    for pulse in &scenario.pulses {
        if pulse.tau <= T::zero() {
            continue;
        }
        let h = scenario.hamiltonian(pulse, delta);
        let prop = Propagator::new(&h)?;
        let mut t_local = T::zero();
        for target in sample_offsets(pulse.tau, scenario.sample_dt) {
            let tiny = pulse.tau * cast::<T>(1e-12);
            while target - t_local > tiny {
                let nbar = mean_n_flat(&psi, dim);
                let gamma = ndot * (cast::<T>(2.0) * nbar + T::one());
                let dt_cap = p_cap / gamma;
                let dt = dt_cap.min(target - t_local);
                let p_jump = gamma * dt;
                if T::sample_unit(rng) < p_jump {
                    // Channel split: adag with weight <n>+1, a with <n>.
                    let p_up = (nbar + T::one()) / (cast::<T>(2.0) * nbar + T::one());
                    let up = T::sample_unit(rng) < p_up;
                    apply_jump(&mut psi, dim, up);
                    renormalize(&mut psi);
                    if up {
                        let top = psi[dim - 1].norm_sqr() + psi[2 * dim - 1].norm_sqr();
                        if top > cast::<T>(1e-6) {
                            return Err(Error::Truncation {
                                leakage: top.to_f64().unwrap_or(f64::NAN),
                                limit: 1e-6,
                            });
                        }
                    }
                } else {
                    let quarter_dt = dt * half * half;
                    for block in 0..2 {
                        for n in 0..dim {
                            let rate = ndot * (cast::<T>(2.0) * cast::<T>(n as f64) + T::one());
                            let decay = (-rate * quarter_dt).exp();
                            psi[block * dim + n] = psi[block * dim + n] * decay;
                        }
                    }
                    psi = prop.apply(&psi, dt);
                    for block in 0..2 {
                        for n in 0..dim {
                            let rate = ndot * (cast::<T>(2.0) * cast::<T>(n as f64) + T::one());
                            let decay = (-rate * quarter_dt).exp();
                            psi[block * dim + n] = psi[block * dim + n] * decay;
                        }
                    }
                    renormalize(&mut psi);
                }
                t_local += dt;
            }
            samples.push(TimeSample {
                t: t_base + target,
                state: SpinMotionState::from_flat(&psi),
            });
        }
        t_base += pulse.tau;
    }
    Ok(TimeSeries { samples })
}

// Mirror of the spinboson sampling grid so trajectories line up exactly
// with the unitary reference.
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

/// Ensemble trace: the spin-down probability averaged over trajectories,
/// with Monte-Carlo standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTrace<T: Float> {
    pub t: Vec<T>,
    pub p_down_mean: Vec<T>,
    pub p_down_sem: Vec<T>,
    pub shots: usize,
}

impl<T: Float> EnsembleTrace<T> {
    /// CSV with header `t_us,p_down_mean,p_down_sem,shots`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_us,p_down_mean,p_down_sem,shots")?;
        for i in 0..self.t.len() {
            writeln!(
                w,
                "{},{},{},{}",
                self.t[i] * cast::<T>(1e6),
                self.p_down_mean[i],
                self.p_down_sem[i],
                self.shots
            )?;
        }
        Ok(())
    }

    /// View as a population trace (repetitions = shots), e.g. to feed the
    /// fitting machinery.
    pub fn to_population_trace(&self, kind: ScanKind<T>) -> Result<PopulationTrace<T>> {
        let reps = self.shots.min(u32::MAX as usize) as u32;
        let samples = self
            .t
            .iter()
            .zip(&self.p_down_mean)
            .map(|(&x, &p)| TraceSample {
                x,
                p_down: p.max(T::zero()).min(T::one()),
                reps,
            })
            .collect();
        PopulationTrace::new(samples, kind)
    }
}

/// Average `m.shots` trajectories, each with an independent detuning draw
/// and jump noise. With all noise off this delegates to the deterministic
/// unitary run, bit for bit.
pub fn ensemble_average<T: Float>(
    scenario: &Scenario<T>,
    m: &NoiseModel<T>,
) -> Result<EnsembleTrace<T>> {
    if m.heating_rate == T::zero() && m.detuning_amplitude == T::zero() {
        let series = run_sequence(scenario, T::zero())?;
        let t: Vec<T> = series.samples.iter().map(|s| s.t).collect();
        let p: Vec<T> = series
            .samples
            .iter()
            .map(|s| s.state.spin_down_prob())
            .collect();
        let sem = vec![T::zero(); t.len()];
        return Ok(EnsembleTrace {
            t,
            p_down_mean: p,
            p_down_sem: sem,
            shots: m.shots,
        });
    }

    let runs: Vec<Result<(Vec<T>, Vec<T>)>> = (0..m.shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = shot_rng(m.seed, shot as u64);
            let delta = sample_detuning(m, &mut rng);
            let series = mcwf_shot(scenario, delta, m, &mut rng)?;
            let t: Vec<T> = series.samples.iter().map(|s| s.t).collect();
            let p: Vec<T> = series
                .samples
                .iter()
                .map(|s| s.state.spin_down_prob())
                .collect();
            Ok((t, p))
        })
        .collect();

    let mut t_axis: Option<Vec<T>> = None;
    let mut traces: Vec<Vec<T>> = Vec::with_capacity(m.shots);
    for run in runs {
        let (t, p) = run?;
        if t_axis.is_none() {
            t_axis = Some(t);
        }
        traces.push(p);
    }
    let t = t_axis.expect("shots >= 1");
    let npts = t.len();
    let shots_f = cast::<T>(m.shots as f64);
    let mut mean = vec![T::zero(); npts];
    for tr in &traces {
        for (acc, &v) in mean.iter_mut().zip(tr.iter()) {
            *acc += v;
        }
    }
    for v in mean.iter_mut() {
        *v /= shots_f;
    }
    let mut sem = vec![T::zero(); npts];
    if m.shots > 1 {
        for tr in &traces {
            for i in 0..npts {
                let d = tr[i] - mean[i];
                sem[i] += d * d;
            }
        }
        for v in sem.iter_mut() {
            *v = (*v / (shots_f - T::one()) / shots_f).sqrt();
        }
    }
    Ok(EnsembleTrace {
        t,
        p_down_mean: mean,
        p_down_sem: sem,
        shots: m.shots,
    })
}

/// Ramsey contrast under the quasi-static detuning distribution,
/// `C(t) = <cos(delta t)>` with `delta = delta_max sin(u)`, by uniform
/// quadrature over the phase.
pub fn ramsey_contrast<T: Float>(m: &NoiseModel<T>, t: T) -> T {
    const NODES: usize = 2048;
    let tau = cast::<T>(std::f64::consts::TAU);
    let mut acc = T::zero();
    for k in 0..NODES {
        let u = tau * cast::<T>(k as f64) / cast::<T>(NODES as f64);
        acc += (m.detuning_amplitude * u.sin() * t).cos();
    }
    acc / cast::<T>(NODES as f64)
}

/// Spin coherence time: the first time the Ramsey contrast falls to 1/e.
/// Returns `None` when there is no decay (zero detuning amplitude).
pub fn ramsey_t2<T: Float>(m: &NoiseModel<T>) -> Option<T> {
    if !(m.detuning_amplitude > T::zero()) {
        return None;
    }
    let target = T::one() / cast::<T>(std::f64::consts::E);
    // Work in the scale-free variable x = delta_max t; the first crossing
    // sits below x = 3 (the contrast is a Bessel-type decay).
    let contrast_x = |x: T| ramsey_contrast(m, x / m.detuning_amplitude);
    let mut lo = T::zero();
    let mut hi = T::zero();
    let step = cast::<T>(0.05);
    let mut found = false;
    for k in 1..=600 {
        let x = step * cast::<T>(k as f64);
        if contrast_x(x) < target {
            hi = x;
            lo = x - step;
            found = true;
            break;
        }
    }
    if !found {
        return None;
    }
    for _ in 0..60 {
        let mid = (lo + hi) * cast::<T>(0.5);
        if contrast_x(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some((lo + hi) * cast::<T>(0.5) / m.detuning_amplitude)
}
