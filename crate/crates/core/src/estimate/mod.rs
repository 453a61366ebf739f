//! Inverse problems: recover SDF and squeezing parameters, number-state
//! distributions, and displaced-squeezed parameters from measured population
//! traces, with projection-noise-weighted uncertainties.

mod lm;
mod nnls;

use std::io::{BufRead, Write};

use ndarray::Array2;
use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::float::{cast, Float};
use crate::fock::{NumberDist, SqueezeParam};
use crate::signals::{self, OverlapParams};

use lm::{lm_fit, LmOptions};

/// What the independent variable of a trace means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanKind<T: Float> {
    /// Force-duration scan at a fixed force-to-axis angle.
    Duration { delta_phi: T },
    /// Scan of the bichromatic phase at a fixed pulse duration.
    Phase { tau: T, phi_s: T },
    /// Sideband-readout pulse-duration scan.
    Sideband,
}

/// One measured point: independent variable (s or rad), spin-down
/// probability, and the number of repetitions behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample<T: Float> {
    pub x: T,
    pub p_down: T,
    pub reps: u32,
}

/// A measured population trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace<T: Float> {
    samples: Vec<TraceSample<T>>,
    kind: ScanKind<T>,
}

impl<T: Float> PopulationTrace<T> {
    pub fn new(samples: Vec<TraceSample<T>>, kind: ScanKind<T>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidTrace("empty trace".into()));
        }
        for w in samples.windows(2) {
            if !(w[1].x > w[0].x) {
                return Err(Error::InvalidTrace(
                    "sample positions must be strictly increasing".into(),
                ));
            }
        }
        for s in &samples {
            if !(s.p_down >= T::zero() && s.p_down <= T::one()) {
                return Err(Error::InvalidTrace(format!(
                    "population {} outside [0, 1]",
                    s.p_down
                )));
            }
            if s.reps < 1 {
                return Err(Error::InvalidTrace("repetitions must be >= 1".into()));
            }
        }
        Ok(Self { samples, kind })
    }

    pub fn samples(&self) -> &[TraceSample<T>] {
        &self.samples
    }

    pub fn kind(&self) -> ScanKind<T> {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Projection-noise uncertainty of sample `i`:
    /// `sqrt(p (1-p) / N)`, floored at `1/(2 sqrt N)` so points at
    /// p = 0 or 1 keep a finite weight.
    pub fn sigma(&self, i: usize) -> T {
        let s = &self.samples[i];
        let n = cast::<T>(s.reps as f64);
        let raw = (s.p_down * (T::one() - s.p_down) / n).sqrt();
        raw.max(T::one() / (cast::<T>(2.0) * n.sqrt()))
    }

    /// CSV with header `t_us,p_down,reps` (duration-like scans, microseconds)
    /// or `phi_rad,p_down,reps` (phase scans).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let time_axis = !matches!(self.kind, ScanKind::Phase { .. });
        if time_axis {
            writeln!(w, "t_us,p_down,reps")?;
        } else {
            writeln!(w, "phi_rad,p_down,reps")?;
        }
        for s in &self.samples {
            let x = if time_axis { s.x * cast::<T>(1e6) } else { s.x };
            writeln!(w, "{},{},{}", x, s.p_down, s.reps)?;
        }
        Ok(())
    }

    /// Read samples from CSV; the header decides the axis. Times come back
    /// in seconds.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<(Vec<TraceSample<T>>, TraceAxis)> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, Ok(line))) if line.trim().is_empty() => continue,
                Some((_, Ok(line))) => break line,
                Some((i, Err(e))) => {
                    return Err(Error::CsvParse {
                        line: i + 1,
                        message: e.to_string(),
                    })
                }
                None => return Err(Error::InvalidTrace("empty trace file".into())),
            }
        };
        let axis = match header.trim() {
            "t_us,p_down,reps" => TraceAxis::TimeUs,
            "phi_rad,p_down,reps" => TraceAxis::PhaseRad,
            other => {
                return Err(Error::CsvParse {
                    line: 1,
                    message: format!(
                        "unexpected header {other:?}; want \"t_us,p_down,reps\" or \"phi_rad,p_down,reps\""
                    ),
                })
            }
        };
        let mut out = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::CsvParse {
                line: i + 1,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut field = |name: &str| {
                fields.next().ok_or(Error::CsvParse {
                    line: i + 1,
                    message: format!("missing field {name}"),
                })
            };
            let x: f64 = field("x")?.trim().parse().map_err(|e| Error::CsvParse {
                line: i + 1,
                message: format!("bad x value: {e}"),
            })?;
            let p: f64 = field("p_down")?
                .trim()
                .parse()
                .map_err(|e| Error::CsvParse {
                    line: i + 1,
                    message: format!("bad p_down value: {e}"),
                })?;
            let reps: u32 = field("reps")?.trim().parse().map_err(|e| Error::CsvParse {
                line: i + 1,
                message: format!("bad reps value: {e}"),
            })?;
            let x = match axis {
                TraceAxis::TimeUs => x * 1e-6,
                TraceAxis::PhaseRad => x,
            };
            out.push(TraceSample {
                x: cast::<T>(x),
                p_down: cast::<T>(p),
                reps,
            });
        }
        if out.is_empty() {
            return Err(Error::InvalidTrace("trace file has no data rows".into()));
        }
        Ok((out, axis))
    }
}

/// Which independent variable a trace file carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceAxis {
    TimeUs,
    PhaseRad,
}

/// One fitted parameter.
#[derive(Debug, Clone, Serialize)]
pub struct ParamEstimate<T: Float> {
    pub name: String,
    pub value: T,
    /// Standard error of the mean; absent when fixed or when the covariance
    /// was singular.
    pub std_err: Option<T>,
    pub fixed: bool,
}

/// Outcome of a fit: estimates, uncertainties, and diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult<T: Float> {
    pub params: Vec<ParamEstimate<T>>,
    /// Root of the summed squared weighted residuals.
    pub residual_norm: T,
    pub converged: bool,
    pub iterations: usize,
    /// Correlation matrix over the free parameters, in their listed order.
    pub correlation: Vec<Vec<T>>,
    /// Set when free parameters are strongly correlated (|rho| > 0.95).
    pub degenerate: bool,
    /// Condition number of the linear design, where one exists.
    pub condition_number: Option<T>,
}

impl<T: Float> FitResult<T> {
    pub fn value(&self, name: &str) -> Option<T> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn std_err(&self, name: &str) -> Option<T> {
        self.params
            .iter()
            .find(|p| p.name == name)
            .and_then(|p| p.std_err)
    }

    fn from_free(names: &[&str], outcome: &lm::LmOutcome<T>, fixed: Vec<(&str, T)>) -> Self {
        let np = names.len();
        let mut params = Vec::new();
        let mut correlation = vec![vec![T::zero(); np]; np];
        let mut degenerate = false;
        let se: Option<Vec<T>> = outcome
            .covariance
            .as_ref()
            .map(|cov| (0..np).map(|j| cov[j][j].max(T::zero()).sqrt()).collect());
        if let (Some(cov), Some(se)) = (&outcome.covariance, &se) {
            for i in 0..np {
                for j in 0..np {
                    let denom = se[i] * se[j];
                    correlation[i][j] = if denom > T::zero() {
                        cov[i][j] / denom
                    } else if i == j {
                        T::one()
                    } else {
                        T::zero()
                    };
                    if i != j && correlation[i][j].abs() > cast::<T>(0.95) {
                        degenerate = true;
                    }
                }
            }
        }
        for (j, name) in names.iter().enumerate() {
            params.push(ParamEstimate {
                name: (*name).into(),
                value: outcome.params[j],
                std_err: se.as_ref().map(|s| s[j]),
                fixed: false,
            });
        }
        for (name, value) in fixed {
            params.push(ParamEstimate {
                name: name.into(),
                value,
                std_err: None,
                fixed: true,
            });
        }
        FitResult {
            params,
            residual_norm: outcome.cost.sqrt(),
            converged: true,
            iterations: outcome.iterations,
            correlation,
            degenerate,
            condition_number: None,
        }
    }
}

/// Which parameter is held fixed in an overlap-trace fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverlapFixed<T: Float> {
    /// Squeezing magnitude fixed (e.g. 0 for ground-state calibration);
    /// the force strength is fitted.
    R(T),
    /// Force strength fixed from a calibration; squeezing is fitted.
    Omega(T),
}

/// Starting point for the overlap-trace fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapGuess<T: Float> {
    pub omega: T,
    pub r: T,
    pub a: T,
    pub b: T,
}

impl<T: Float> Default for OverlapGuess<T> {
    fn default() -> Self {
        Self {
            omega: cast::<T>(std::f64::consts::TAU * 10e3),
            r: cast::<T>(0.5),
            a: T::one(),
            b: T::one(),
        }
    }
}

fn overlap_model<T: Float>(kind: &ScanKind<T>, x: T, omega: T, r: T, a: T, b: T) -> T {
    let two = cast::<T>(2.0);
    let r = r.max(T::zero());
    let omega = omega.abs();
    let x_val = match kind {
        ScanKind::Duration { delta_phi } => {
            let mag = omega * x / two;
            signals::overlap_x(&OverlapParams::from_delta_phi(mag, *delta_phi, r).expect("r >= 0"))
        }
        ScanKind::Phase { tau, phi_s } => {
            let mag = omega * *tau / two;
            // arg(alpha) = -pi/2 - phi_D/2, dphi = arg(alpha) - phi_s/2.
            let dphi = -cast::<T>(std::f64::consts::FRAC_PI_2) - x / two - *phi_s / two;
            signals::overlap_x(&OverlapParams::from_delta_phi(mag, dphi, r).expect("r >= 0"))
        }
        ScanKind::Sideband => T::nan(),
    };
    (a + b * x_val) / two
}

/// Weighted fit of `P(down) = (A + B X(alpha, xi))/2` to a duration or phase
/// scan, with either `r` or `Omega` held fixed and the other fitted along
/// with `A` and `B`.
pub fn fit_overlap_trace<T: Float>(
    trace: &PopulationTrace<T>,
    fixed: OverlapFixed<T>,
    guess: &OverlapGuess<T>,
) -> Result<FitResult<T>> {
    if matches!(trace.kind(), ScanKind::Sideband) {
        return Err(Error::InvalidTrace(
            "overlap fit needs a duration or phase scan".into(),
        ));
    }
    if trace.len() < 10 {
        return Err(Error::TooFewPoints {
            have: trace.len(),
            need: 10,
        });
    }
    let kind = trace.kind();
    let data: Vec<(T, T, T)> = (0..trace.len())
        .map(|i| {
            let s = trace.samples()[i];
            (s.x, s.p_down, trace.sigma(i))
        })
        .collect();

    let residuals = |free: &[T]| -> Vec<T> {
        let (omega, r) = match fixed {
            OverlapFixed::R(r_fix) => (free[0], r_fix),
            OverlapFixed::Omega(om) => (om, free[0]),
        };
        let (a, b) = (free[1], free[2]);
        data.iter()
            .map(|&(x, y, sig)| (overlap_model(&kind, x, omega, r, a, b) - y) / sig)
            .collect()
    };

    let two = cast::<T>(2.0);
    let (p0, lower, upper, scales, names): (Vec<T>, Vec<T>, Vec<T>, Vec<T>, Vec<&str>) = match fixed
    {
        OverlapFixed::R(_) => (
            vec![guess.omega, guess.a, guess.b],
            vec![T::zero(), T::zero(), T::zero()],
            vec![T::infinity(), two, two],
            vec![
                guess.omega.abs().max(T::one()),
                cast::<T>(0.1),
                cast::<T>(0.1),
            ],
            vec!["omega_rad_s", "a", "b"],
        ),
        OverlapFixed::Omega(_) => (
            vec![guess.r, guess.a, guess.b],
            vec![T::zero(), T::zero(), T::zero()],
            vec![cast::<T>(3.0), two, two],
            vec![cast::<T>(0.1), cast::<T>(0.1), cast::<T>(0.1)],
            vec!["r", "a", "b"],
        ),
    };

    let outcome = lm_fit(
        residuals,
        &p0,
        &lower,
        &upper,
        &scales,
        &LmOptions::default(),
    )?;
    let fixed_params = match fixed {
        OverlapFixed::R(r) => vec![("r", r)],
        OverlapFixed::Omega(om) => vec![("omega_rad_s", om)],
    };
    Ok(FitResult::from_free(&names, &outcome, fixed_params))
}

/// Inputs for the two-stage sideband inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsbFitSpec<T: Float> {
    pub eta: T,
    /// Highest number state to recover (at most 29; frequency crowding
    /// makes anything above that unrecoverable).
    pub n_max: usize,
    /// Carrier Rabi frequency starting point; estimated from the trace
    /// spectrum when absent.
    pub omega0_init: Option<T>,
    pub gamma_init: T,
    pub b_init: T,
}

impl<T: Float> BsbFitSpec<T> {
    pub fn new(eta: T, n_max: usize) -> Self {
        Self {
            eta,
            n_max,
            omega0_init: None,
            gamma_init: T::zero(),
            b_init: T::zero(),
        }
    }
}

/// Weighted design matrix of the sideband model (plus a slack column and a
/// penalty row enforcing `sum p + s = 1`), and the weighted target.
fn bsb_design<T: Float>(
    trace: &PopulationTrace<T>,
    spec: &BsbFitSpec<T>,
    omega0: T,
    gamma: T,
    b: T,
) -> (Array2<T>, Vec<T>, T) {
    let m = trace.len();
    let ncols = spec.n_max + 2; // p(0..=n_max) and the slack
    let half = cast::<T>(0.5);
    let mut w_max = T::zero();
    let mut a = Array2::<T>::zeros((m + 1, ncols));
    let mut y = vec![T::zero(); m + 1];
    let omegas: Vec<T> = (0..=spec.n_max)
        .map(|n| signals::rabi_frequency(n, omega0, spec.eta))
        .collect();
    for i in 0..m {
        let s = trace.samples()[i];
        let w = T::one() / trace.sigma(i);
        w_max = w_max.max(w);
        let decay = (-gamma * s.x).exp();
        for n in 0..=spec.n_max {
            a[[i, n]] = w * half * (T::one() + decay * (omegas[n] * s.x).cos());
        }
        y[i] = w * (s.p_down - b * s.x);
    }
    // Penalty row: sum p + slack = 1 with a weight far above the data.
    let rho = w_max * cast::<T>(1e6);
    for j in 0..ncols {
        a[[m, j]] = rho;
    }
    y[m] = rho;
    (a, y, rho)
}

/// Golden-section refinement of the carrier frequency against the inner
/// NNLS cost, within +/- 3% of the candidate.
fn refine_omega0<T: Float>(
    trace: &PopulationTrace<T>,
    spec: &BsbFitSpec<T>,
    cand: T,
) -> Option<(T, T)> {
    let phi = cast::<T>(0.618_033_988_749_894_8);
    let cost_at = |om: T| -> Option<T> {
        bsb_inner_cost(trace, spec, om, spec.gamma_init, spec.b_init)
            .ok()
            .map(|(_, c)| c)
    };
    let mut a = cand * cast::<T>(0.97);
    let mut b = cand * cast::<T>(1.03);
    let mut x1 = b - (b - a) * phi;
    let mut x2 = a + (b - a) * phi;
    let mut f1 = cost_at(x1)?;
    let mut f2 = cost_at(x2)?;
    for _ in 0..24 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - (b - a) * phi;
            f1 = cost_at(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + (b - a) * phi;
            f2 = cost_at(x2)?;
        }
    }
    if f1 < f2 {
        Some((x1, f1))
    } else {
        Some((x2, f2))
    }
}

fn bsb_inner_cost<T: Float>(
    trace: &PopulationTrace<T>,
    spec: &BsbFitSpec<T>,
    omega0: T,
    gamma: T,
    b: T,
) -> Result<(Vec<T>, T)> {
    let (a, y, _) = bsb_design(trace, spec, omega0, gamma, b);
    let sol = nnls::nnls(&a, &y)?;
    let m = trace.len();
    let mut cost = T::zero();
    // Cost over the data rows only.
    for i in 0..m {
        let mut acc = y[i];
        for j in 0..a.ncols() {
            acc -= a[[i, j]] * sol.x[j];
        }
        cost += acc * acc;
    }
    Ok((sol.x, cost))
}

/// Dominant angular frequency of a trace: periodogram peak with a parabolic
/// refinement over the three neighbouring grid powers.
fn dominant_frequency<T: Float>(trace: &PopulationTrace<T>) -> T {
    let m = trace.len();
    let mean: T = trace.samples().iter().map(|s| s.p_down).sum::<T>() / cast::<T>(m as f64);
    let t_last = trace.samples()[m - 1].x;
    let t_first = trace.samples()[0].x;
    let span = t_last - t_first;
    let dt = span / cast::<T>((m - 1) as f64);
    let f_nyq = T::one() / (cast::<T>(2.0) * dt);
    let nf = 4 * m;
    let power_at = |k_frac: T| -> T {
        let f = f_nyq * k_frac / cast::<T>(nf as f64);
        let omega = cast::<T>(std::f64::consts::TAU) * f;
        let (mut re, mut im) = (T::zero(), T::zero());
        for s in trace.samples() {
            let ph = omega * s.x;
            re += (s.p_down - mean) * ph.cos();
            im += (s.p_down - mean) * ph.sin();
        }
        re * re + im * im
    };
    let mut best = (1usize, T::zero());
    for k in 1..nf {
        let power = power_at(cast::<T>(k as f64));
        if power > best.1 {
            best = (k, power);
        }
    }
    let k = best.0;
    let mut k_refined = cast::<T>(k as f64);
    if k > 1 && k + 1 < nf {
        let pm = power_at(cast::<T>((k - 1) as f64));
        let p0 = best.1;
        let pp = power_at(cast::<T>((k + 1) as f64));
        let denom = pm - cast::<T>(2.0) * p0 + pp;
        if denom < T::zero() {
            let delta = cast::<T>(0.5) * (pm - pp) / denom;
            k_refined += delta.max(cast::<T>(-0.5)).min(cast::<T>(0.5));
        }
    }
    cast::<T>(std::f64::consts::TAU) * f_nyq * k_refined / cast::<T>(nf as f64)
}

/// Two-stage inversion of a sideband trace: an outer search over
/// `(Omega_0, gamma, b)` wrapped around an exact non-negative least-squares
/// solve for `p(n)` under `p(n) >= 0`, `sum p(n) <= 1`.
///
/// Returns the distribution with per-bin uncertainties and the fit result
/// for the outer parameters, including the condition number of the linear
/// design (large values signal frequency crowding).
pub fn fit_bsb_trace<T: Float>(
    trace: &PopulationTrace<T>,
    spec: &BsbFitSpec<T>,
) -> Result<(NumberDist<T>, FitResult<T>)> {
    if spec.n_max > 29 {
        return Err(Error::InvalidParameter(
            "populations above n = 29 are unrecoverable; n_max must be <= 29".into(),
        ));
    }
    if trace.len() < 3 * spec.n_max {
        return Err(Error::TooFewPoints {
            have: trace.len(),
            need: 3 * spec.n_max,
        });
    }

    // Starting carrier frequencies: either supplied, or the periodogram
    // peak mapped through candidate dominant occupation numbers n = 0..20
    // (the peak is the Rabi frequency of an unknown n). Each candidate is
    // refined against the inner cost, and the best few seed independent
    // outer searches below; a single ranking at the initial gamma is not
    // reliable once the trace carries decay and shot noise.
    let omega0_starts: Vec<T> = match spec.omega0_init {
        Some(v) => vec![v],
        None => {
            let omega_peak = dominant_frequency(trace);
            let mut ranked: Vec<(T, T)> = Vec::new();
            for n_c in 0usize..=20 {
                let unit = signals::rabi_frequency(n_c, T::one(), spec.eta);
                let cand = omega_peak / unit;
                if let Some(refined) = refine_omega0(trace, spec, cand) {
                    ranked.push(refined);
                }
            }
            if ranked.is_empty() {
                return Err(Error::FitNonConvergence { iterations: 0 });
            }
            // Stable sort keeps the smaller-n (larger-carrier) candidate
            // first on ties; a single-tone trace is genuinely ambiguous
            // between p(0) at the true carrier and a blend of crowded
            // high-n components at a lower one.
            ranked.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            ranked.into_iter().take(3).map(|(om, _)| om).collect()
        }
    };

    let residuals = |free: &[T]| -> Vec<T> {
        let (omega0, gamma, b) = (free[0].abs(), free[1].max(T::zero()), free[2]);
        match bsb_inner_cost(trace, spec, omega0, gamma, b) {
            Ok((x, _)) => {
                let (a, y, _) = bsb_design(trace, spec, omega0, gamma, b);
                (0..trace.len())
                    .map(|i| {
                        let mut acc = -y[i];
                        for j in 0..a.ncols() {
                            acc += a[[i, j]] * x[j];
                        }
                        acc
                    })
                    .collect()
            }
            Err(_) => vec![T::infinity(); trace.len()],
        }
    };

    // The inner active-set flips make the outer cost surface rough at fine
    // scales; loose tolerances stop each search once the parameters settle.
    let mut outcome: Option<lm::LmOutcome<T>> = None;
    for &omega0_init in &omega0_starts {
        let p0 = vec![omega0_init, spec.gamma_init, spec.b_init];
        let lower = vec![omega0_init * cast::<T>(0.5), T::zero(), cast::<T>(-1e4)];
        let upper = vec![omega0_init * cast::<T>(2.0), cast::<T>(1e5), cast::<T>(1e4)];
        let scales = vec![
            omega0_init.abs() * cast::<T>(1e-3),
            cast::<T>(20.0),
            cast::<T>(5.0),
        ];
        let run = lm_fit(
            &residuals,
            &p0,
            &lower,
            &upper,
            &scales,
            &LmOptions {
                max_iter: 120,
                ftol: cast::<T>(1e-6),
                xtol: cast::<T>(1e-8),
                stall_rtol: cast::<T>(1e-3),
                ..LmOptions::default()
            },
        );
        if let Ok(out) = run {
            // Strictly-better with an absolute floor: perfect noiseless fits
            // tie at numerical zero and must keep the first-ranked carrier.
            let atol = cast::<T>(1e-12) * cast::<T>(trace.len() as f64);
            let better = match &outcome {
                None => true,
                Some(b) => out.cost + atol < b.cost * (T::one() - cast::<T>(1e-6)),
            };
            if better {
                outcome = Some(out);
            }
        }
    }
    let outcome = outcome.ok_or(Error::FitNonConvergence { iterations: 0 })?;
    let (omega0, gamma, b) = (outcome.params[0], outcome.params[1], outcome.params[2]);

    // Final inner solve and per-bin uncertainties.
    let (a, y, _) = bsb_design(trace, spec, omega0, gamma, b);
    let sol = nnls::nnls(&a, &y)?;
    let mut p: Vec<T> = sol.x[..=spec.n_max].to_vec();
    let total: T = p.iter().copied().sum();
    if total > T::one() {
        // The penalty row enforces the budget to ~1e-12; make it exact.
        for v in p.iter_mut() {
            *v = *v / total;
        }
    }
    let variances = nnls::passive_variances(&a, &sol.passive);
    let sigma: Vec<T> = match &variances {
        Some(v) => v[..=spec.n_max].iter().map(|&x| x.sqrt()).collect(),
        None => vec![T::zero(); spec.n_max + 1],
    };
    let dist = NumberDist::new(p, sigma)?;

    // Condition number of the weighted data design (without the penalty
    // row); reported so frequency crowding is visible to callers.
    let cond = design_condition(trace, spec, omega0, gamma);

    let mut fit = FitResult::from_free(
        &["omega0_rad_s", "gamma_per_s", "b_per_s"],
        &outcome,
        vec![],
    );
    fit.condition_number = cond;
    Ok((dist, fit))
}

fn design_condition<T: Float>(
    trace: &PopulationTrace<T>,
    spec: &BsbFitSpec<T>,
    omega0: T,
    gamma: T,
) -> Option<T> {
    let m = trace.len();
    let ncols = spec.n_max + 1;
    let half = cast::<T>(0.5);
    let mut g = Array2::<Complex<T>>::zeros((ncols, ncols));
    let mut a = Array2::<T>::zeros((m, ncols));
    for i in 0..m {
        let s = trace.samples()[i];
        let w = T::one() / trace.sigma(i);
        let decay = (-gamma * s.x).exp();
        for n in 0..ncols {
            let omega_n = signals::rabi_frequency(n, omega0, spec.eta);
            a[[i, n]] = w * half * (T::one() + decay * (omega_n * s.x).cos());
        }
    }
    for p in 0..ncols {
        for q in 0..ncols {
            let mut acc = T::zero();
            for i in 0..m {
                acc += a[[i, p]] * a[[i, q]];
            }
            g[[p, q]] = Complex::new(acc, T::zero());
        }
    }
    let (evals, _) = crate::linalg::eigh(&g).ok()?;
    let max = evals[evals.len() - 1];
    let min = evals[0].max(T::zero());
    if min > T::zero() {
        Some((max / min).sqrt())
    } else {
        Some(T::infinity())
    }
}

/// Fit geometry for displaced-squeezed number distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsqGeometry {
    /// Force along the squeezed quadrature (`phi_s = 0`).
    SqueezedAxis,
    /// Force along the anti-squeezed quadrature (`phi_s = pi`).
    AntiSqueezedAxis,
}

impl DsqGeometry {
    fn phi_s<T: Float>(&self) -> T {
        match self {
            DsqGeometry::SqueezedAxis => T::zero(),
            DsqGeometry::AntiSqueezedAxis => T::PI(),
        }
    }
}

/// Method-of-moments starting point: invert the displaced-squeezed moment
/// formulas for `(r, |alpha|)` given the sample mean and variance.
fn moments_init<T: Float>(mean: T, var: T, geometry: DsqGeometry) -> (T, T) {
    let two = cast::<T>(2.0);
    let sign_anti = matches!(geometry, DsqGeometry::AntiSqueezedAxis);
    // g(s) = (mean - s) e^{-/+ 2r(s)} + 2 s (1 + s) - var, s = sinh^2 r.
    let g = |s: T| -> T {
        let root = (s * (T::one() + s)).sqrt();
        let e2r = T::one() + two * s + two * root; // e^{2r}
        let factor = if sign_anti { e2r } else { T::one() / e2r };
        (mean - s) * factor + two * s * (T::one() + s) - var
    };
    let mut lo = T::zero();
    let mut hi = mean.max(cast::<T>(1e-6));
    let (glo, ghi) = (g(lo), g(hi));
    if glo * ghi > T::zero() {
        // No sign change: fall back to a mild squeeze.
        let s = (mean * cast::<T>(0.25)).max(cast::<T>(0.01));
        let r = s.sqrt().asinh();
        return (r, (mean - s).max(T::zero()).sqrt());
    }
    for _ in 0..80 {
        let mid = (lo + hi) * cast::<T>(0.5);
        if g(lo) * g(mid) <= T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = (lo + hi) * cast::<T>(0.5);
    let r = s.sqrt().asinh();
    ((r).max(T::zero()), (mean - s).max(T::zero()).sqrt())
}

/// Least-squares fit of the displaced-squeezed closed form to a measured
/// number distribution, recovering `(r, |alpha|)` and optionally the scale
/// `kappa` (fixed to 1 otherwise).
///
/// Multi-start: the moment inversion plus coherent-like and
/// strongly-squeezed starting points; cost ties resolve to the smaller `r`.
/// Strong r-alpha correlation (anti-squeezed geometry at large alpha) sets
/// the `degenerate` flag.
pub fn fit_dsq_pn<T: Float>(
    p: &NumberDist<T>,
    geometry: DsqGeometry,
    fit_kappa: bool,
) -> Result<FitResult<T>> {
    let n_max = p.n_max();
    if n_max < 3 {
        return Err(Error::TooFewPoints {
            have: n_max + 1,
            need: 4,
        });
    }
    let phi_s = geometry.phi_s::<T>();
    let xi_of = |r: T| SqueezeParam::new(r.max(T::zero()), phi_s).expect("r >= 0");

    // Uniform weights: distributions recovered by the sideband inversion
    // carry strongly correlated per-bin uncertainties whose diagonal is
    // nearly flat, and weighting by it measurably biases the shape fit.
    let weights: Vec<T> = vec![T::one(); n_max + 1];

    let residuals = |free: &[T]| -> Vec<T> {
        let r = free[0].max(T::zero());
        let alpha = free[1].max(T::zero());
        let kappa = if fit_kappa {
            free[2].max(cast::<T>(1e-9)).min(T::one())
        } else {
            T::one()
        };
        match signals::dsq_number_dist(Complex::new(alpha, T::zero()), &xi_of(r), kappa, n_max) {
            Ok(model) => (0..=n_max)
                .map(|n| (model.p(n) - p.p(n)) * weights[n])
                .collect(),
            Err(_) => vec![T::infinity(); n_max + 1],
        }
    };

    let mean = p.mean();
    let var = p.variance();
    let (r_mom, a_mom) = moments_init(mean, var, geometry);
    let mut starts = vec![
        vec![r_mom, a_mom],
        vec![cast::<T>(0.05), mean.max(T::zero()).sqrt()],
        vec![T::one(), (mean - cast::<T>(1.38)).max(T::zero()).sqrt()],
    ];
    if fit_kappa {
        for s in starts.iter_mut() {
            s.push(p.total().min(T::one()).max(cast::<T>(0.1)));
        }
    }
    let np = if fit_kappa { 3 } else { 2 };
    let lower = {
        let mut v = vec![T::zero(), T::zero()];
        if fit_kappa {
            v.push(cast::<T>(1e-6));
        }
        v
    };
    let upper = {
        let mut v = vec![cast::<T>(3.0), cast::<T>(30.0)];
        if fit_kappa {
            v.push(T::one());
        }
        v
    };
    let scales = {
        let mut v = vec![cast::<T>(0.05), cast::<T>(0.05)];
        if fit_kappa {
            v.push(cast::<T>(0.02));
        }
        v
    };

    let mut best: Option<lm::LmOutcome<T>> = None;
    for start in &starts {
        debug_assert_eq!(start.len(), np);
        if let Ok(out) = lm_fit(
            &residuals,
            start,
            &lower,
            &upper,
            &scales,
            &LmOptions::default(),
        ) {
            let better = match &best {
                None => true,
                Some(b) => {
                    let rel = (out.cost - b.cost).abs() / b.cost.max(cast::<T>(1e-300));
                    if rel < cast::<T>(1e-9) {
                        // Tie: prefer the smaller squeezing.
                        out.params[0] < b.params[0]
                    } else {
                        out.cost < b.cost
                    }
                }
            };
            if better {
                best = Some(out);
            }
        }
    }
    let outcome = best.ok_or(Error::FitNonConvergence { iterations: 0 })?;

    let names: Vec<&str> = if fit_kappa {
        vec!["r", "alpha", "kappa"]
    } else {
        vec!["r", "alpha"]
    };
    let fixed = if fit_kappa {
        vec![]
    } else {
        vec![("kappa", T::one())]
    };
    Ok(FitResult::from_free(&names, &outcome, fixed))
}

/// Draw `k/n` with `k ~ Binomial(n, p)`, by summing Bernoulli trials.
pub fn sample_binomial<T: Float, R: Rng + ?Sized>(rng: &mut R, reps: u32, p: T) -> T {
    let mut k = 0u32;
    for _ in 0..reps {
        if T::sample_unit(rng) < p {
            k += 1;
        }
    }
    cast::<T>(k as f64) / cast::<T>(reps as f64)
}

/// Build a synthetic trace by sampling a model curve. `reps = 0` keeps the
/// exact model values (stored with one repetition); otherwise each point is
/// a binomial draw over `reps` shots.
pub fn synthesize_trace<T: Float, R: Rng + ?Sized>(
    xs: &[T],
    model: impl Fn(T) -> T,
    reps: u32,
    kind: ScanKind<T>,
    rng: &mut R,
) -> Result<PopulationTrace<T>> {
    let samples: Vec<TraceSample<T>> = xs
        .iter()
        .map(|&x| {
            let p = model(x).max(T::zero()).min(T::one());
            if reps == 0 {
                TraceSample {
                    x,
                    p_down: p,
                    reps: 1,
                }
            } else {
                TraceSample {
                    x,
                    p_down: sample_binomial(rng, reps, p),
                    reps,
                }
            }
        })
        .collect();
    PopulationTrace::new(samples, kind)
}
