//! Scenario executors: each one computes everything in memory and returns
//! the named artifacts, so nothing is written on failure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spincat::estimate::{
    fit_bsb_trace, fit_dsq_pn, fit_overlap_trace, synthesize_trace, BsbFitSpec, DsqGeometry,
    OverlapFixed, OverlapGuess, PopulationTrace, ScanKind, TraceAxis,
};
use spincat::fock::{self, NumberDist, PhaseGridSpec, SqueezeParam};
use spincat::noise::{ensemble_average, ramsey_t2, NoiseModel};
use spincat::signals::{self, BsbModelParams};
use spincat::spinboson::{
    alpha_of_tau, run_sequence, HamiltonianModel, Scenario, SdfPulse, SpinMotionState, TrapParams,
};
use spincat::C64;

use crate::config::{self, ensure, FitKind, FixedChoice, GeometryChoice, ModelTag, RawConfig, TAU};
use crate::CliError;

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn artifact(name: &str, bytes: Vec<u8>) -> Artifact {
    Artifact {
        name: name.to_string(),
        bytes,
    }
}

fn khz(v: f64) -> f64 {
    TAU * v * 1e3
}

fn us(v: f64) -> f64 {
    v * 1e-6
}

fn squeeze(r: f64, phi_s: f64) -> Result<SqueezeParam<f64>, CliError> {
    SqueezeParam::new(r, phi_s).map_err(CliError::from)
}

fn tau_grid(start_us: f64, stop_us: f64, step_us: f64) -> Result<Vec<f64>, CliError> {
    ensure(start_us >= 0.0, "tau_start_us must be >= 0")?;
    ensure(stop_us > start_us, "tau_stop_us must exceed tau_start_us")?;
    ensure(step_us > 0.0, "tau_step_us must be > 0")?;
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let t = start_us + k as f64 * step_us;
        if t > stop_us + 1e-9 {
            break;
        }
        out.push(us(t));
        k += 1;
    }
    Ok(out)
}

fn linspace(start: f64, stop: f64, points: usize) -> Result<Vec<f64>, CliError> {
    ensure(points >= 2, "scan needs at least 2 points")?;
    ensure(stop > start, "scan range must be increasing")?;
    Ok((0..points)
        .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
        .collect())
}

pub fn overlap_scan(raw: &RawConfig, seed: u64) -> Result<Vec<Artifact>, CliError> {
    let cfg: config::OverlapScanConfig = raw.parse()?;
    ensure(cfg.pulse.omega_khz_2pi > 0.0, "pulse omega must be > 0")?;
    ensure(!cfg.traces.is_empty(), "at least one [[trace]] is required")?;
    let omega = khz(cfg.pulse.omega_khz_2pi);
    let xs = tau_grid(
        cfg.scan.tau_start_us,
        cfg.scan.tau_stop_us,
        cfg.scan.tau_step_us,
    )?;
    let mut artifacts = Vec::new();
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trace_cfg in &cfg.traces {
        let xi = squeeze(trace_cfg.r, 0.0)?;
        let kind = ScanKind::Duration {
            delta_phi: trace_cfg.delta_phi_rad,
        };
        let model = |t: f64| {
            signals::spin_population_model(
                t,
                omega,
                &xi,
                trace_cfg.delta_phi_rad,
                cfg.model.a,
                cfg.model.b,
            )
            .expect("validated model parameters")
        };
        signals::spin_population_model(
            0.0,
            omega,
            &xi,
            trace_cfg.delta_phi_rad,
            cfg.model.a,
            cfg.model.b,
        )
        .map_err(CliError::from)?;
        let trace =
            synthesize_trace(&xs, model, cfg.scan.reps, kind, &mut rng).map_err(CliError::from)?;
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).map_err(CliError::from)?;
        artifacts.push(artifact(&format!("trace_{}.csv", trace_cfg.label), buf));
        columns.push((
            trace_cfg.label.clone(),
            trace.samples().iter().map(|s| s.p_down).collect(),
        ));
    }
    // Combined curves file, one column per trace.
    let mut combined = String::from("tau_us");
    for (label, _) in &columns {
        combined.push_str(&format!(",p_down_{label}"));
    }
    combined.push('\n');
    for (i, &t) in xs.iter().enumerate() {
        combined.push_str(&format!("{}", t * 1e6));
        for (_, col) in &columns {
            combined.push_str(&format!(",{}", col[i]));
        }
        combined.push('\n');
    }
    artifacts.push(artifact("curves.csv", combined.into_bytes()));
    Ok(artifacts)
}

pub fn phase_scan(raw: &RawConfig, seed: u64) -> Result<Vec<Artifact>, CliError> {
    let cfg: config::PhaseScanConfig = raw.parse()?;
    ensure(cfg.pulse.omega_khz_2pi > 0.0, "pulse omega must be > 0")?;
    ensure(cfg.pulse.tau_us > 0.0, "tau_us must be > 0")?;
    let omega = khz(cfg.pulse.omega_khz_2pi);
    let tau = us(cfg.pulse.tau_us);
    squeeze(cfg.squeeze.r, cfg.squeeze.phi_s_rad)?;
    let xs = linspace(
        cfg.scan.phi_start_rad,
        cfg.scan.phi_stop_rad,
        cfg.scan.points,
    )?;
    let mag = omega * tau / 2.0;
    let kind = ScanKind::Phase {
        tau,
        phi_s: cfg.squeeze.phi_s_rad,
    };
    let model = |phi: f64| {
        let dphi = -std::f64::consts::FRAC_PI_2 - phi / 2.0 - cfg.squeeze.phi_s_rad / 2.0;
        let x = signals::overlap_x(
            &signals::OverlapParams::from_delta_phi(mag, dphi, cfg.squeeze.r).expect("validated r"),
        );
        (cfg.model.a + cfg.model.b * x) / 2.0
    };
    ensure(
        cfg.model.a >= 0.0 && cfg.model.b >= 0.0 && cfg.model.a + cfg.model.b <= 2.0,
        "model A, B must be non-negative with A + B <= 2",
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trace =
        synthesize_trace(&xs, model, cfg.scan.reps, kind, &mut rng).map_err(CliError::from)?;
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).map_err(CliError::from)?;
    Ok(vec![artifact("trace_phase.csv", buf)])
}

fn build_trap(trap: &config::TrapBlock, omega_sdf: f64) -> Result<TrapParams<f64>, CliError> {
    let omega_0 = match trap.omega_0_khz_2pi {
        Some(v) => khz(v),
        None => omega_sdf / trap.eta,
    };
    TrapParams::new(TAU * trap.omega_z_mhz_2pi * 1e6, trap.eta, omega_0, 0.0)
        .map_err(CliError::from)
}

fn build_revival_scenario(
    trap: &config::TrapBlock,
    pulse: &config::RevivalPulseBlock,
    squeeze_cfg: &config::SqueezeBlock,
    sim: &config::SimBlock,
) -> Result<Scenario<f64>, CliError> {
    ensure(pulse.omega_khz_2pi > 0.0, "pulse omega must be > 0")?;
    ensure(pulse.tau1_us > 0.0, "tau1_us must be > 0")?;
    let tau2_us = pulse.tau2_us.unwrap_or(pulse.tau1_us);
    ensure(tau2_us >= 0.0, "tau2_us must be >= 0")?;
    ensure(sim.sample_dt_us > 0.0, "sample_dt_us must be > 0")?;
    let omega = khz(pulse.omega_khz_2pi);
    let force =
        SdfPulse::force(omega, pulse.phi_d_rad, us(pulse.tau1_us)).map_err(CliError::from)?;
    let xi = squeeze(squeeze_cfg.r, squeeze_cfg.phi_s_rad)?;
    let alpha_max = alpha_of_tau(&force, us(pulse.tau1_us.max(tau2_us)));
    let dim = sim
        .dim
        .unwrap_or_else(|| fock::required_dim(alpha_max, &xi));
    let initial =
        SpinMotionState::spin_down(&fock::squeezed_vacuum(&xi, dim).map_err(CliError::from)?);
    let mut pulses = vec![force];
    if tau2_us > 0.0 {
        pulses.push(
            SdfPulse::return_pulse(omega, pulse.phi_d_rad, us(tau2_us)).map_err(CliError::from)?,
        );
    }
    let model = match sim.model {
        ModelTag::Lda => HamiltonianModel::Lda,
        ModelTag::Full => HamiltonianModel::Full,
    };
    let trap = build_trap(trap, omega)?;
    Ok(Scenario::new(initial, pulses, trap, model).with_sample_dt(us(sim.sample_dt_us)))
}

pub fn revival(raw: &RawConfig, _seed: u64) -> Result<Vec<Artifact>, CliError> {
    let cfg: config::RevivalConfig = raw.parse()?;
    let scenario = build_revival_scenario(&cfg.trap, &cfg.pulse, &cfg.squeeze, &cfg.sim)?;
    let series = run_sequence(&scenario, khz(cfg.sim.detuning_khz_2pi)).map_err(CliError::from)?;
    let mut buf = Vec::new();
    series.write_csv(&mut buf).map_err(CliError::from)?;
    Ok(vec![artifact("revival.csv", buf)])
}

pub fn bsb(raw: &RawConfig, seed: u64) -> Result<Vec<Artifact>, CliError> {
    let cfg: config::BsbConfig = raw.parse()?;
    ensure(
        cfg.scan.t_stop_us > cfg.scan.t_start_us,
        "scan range must be increasing",
    )?;
    let readout = BsbModelParams::new(
        khz(cfg.readout.omega_0_khz_2pi),
        cfg.readout.eta,
        cfg.readout.gamma_per_s,
        cfg.readout.b_per_s,
        cfg.readout.n_max,
    )
    .map_err(CliError::from)?;
    let xi = squeeze(cfg.state.r, cfg.state.phi_s_rad)?;
    let p_true = signals::dsq_number_dist(
        C64::new(cfg.state.alpha, 0.0),
        &xi,
        cfg.state.kappa,
        cfg.readout.n_max,
    )
    .map_err(CliError::from)?;
    let xs: Vec<f64> = linspace(cfg.scan.t_start_us, cfg.scan.t_stop_us, cfg.scan.points)?
        .into_iter()
        .map(us)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trace = synthesize_trace(
        &xs,
        |t| signals::bsb_signal(t, &p_true, &readout),
        cfg.scan.reps,
        ScanKind::Sideband,
        &mut rng,
    )
    .map_err(CliError::from)?;
    let mut trace_buf = Vec::new();
    trace.write_csv(&mut trace_buf).map_err(CliError::from)?;
    let mut pn_buf = Vec::new();
    p_true.write_csv(&mut pn_buf).map_err(CliError::from)?;
    Ok(vec![
        artifact("trace_bsb.csv", trace_buf),
        artifact("pn_true.csv", pn_buf),
    ])
}

pub fn qfunc(raw: &RawConfig, _seed: u64) -> Result<Vec<Artifact>, CliError> {
    let cfg: config::QfuncConfig = raw.parse()?;
    let xi = squeeze(cfg.state.r, cfg.state.phi_s_rad)?;
    let alpha = C64::new(cfg.state.alpha_re, cfg.state.alpha_im);
    let dim = fock::required_dim(alpha, &xi);
    let state = fock::displaced_squeezed(alpha, &xi, dim).map_err(CliError::from)?;
    let spec = PhaseGridSpec {
        x_min: cfg.grid.x_min,
        x_max: cfg.grid.x_max,
        nx: cfg.grid.nx,
        p_min: cfg.grid.p_min,
        p_max: cfg.grid.p_max,
        np: cfg.grid.np,
    };
    spec.validate().map_err(CliError::from)?;
    let grid = fock::husimi_q(&state, &spec).map_err(CliError::from)?;
    let mut buf = Vec::new();
    grid.write_csv(&mut buf).map_err(CliError::from)?;
    Ok(vec![artifact("qfunc.csv", buf)])
}

pub fn noise_sim(raw: &RawConfig, seed: u64) -> Result<Vec<Artifact>, CliError> {
    let cfg: config::NoiseSimConfig = raw.parse()?;
    let scenario = build_revival_scenario(&cfg.trap, &cfg.pulse, &cfg.squeeze, &cfg.sim)?;
    let model = NoiseModel::new(
        khz(cfg.noise.detuning_amp_khz_2pi),
        cfg.noise.line_freq_hz,
        cfg.noise.heating_quanta_per_s,
        cfg.noise.shots,
        seed,
    )
    .map_err(CliError::from)?;
    let ens = ensemble_average(&scenario, &model).map_err(CliError::from)?;
    let mut buf = Vec::new();
    ens.write_csv(&mut buf).map_err(CliError::from)?;
    let summary = serde_json::json!({
        "shots": model.shots,
        "detuning_amp_khz_2pi": cfg.noise.detuning_amp_khz_2pi,
        "heating_quanta_per_s": cfg.noise.heating_quanta_per_s,
        "ramsey_t2_us": ramsey_t2(&model).map(|t| t * 1e6),
    });
    let summary_bytes = format!("{}\n", serde_json::to_string_pretty(&summary).unwrap());
    Ok(vec![
        artifact("ensemble.csv", buf),
        artifact("summary.json", summary_bytes.into_bytes()),
    ])
}

fn read_trace(path: &str, kind_hint: &config::FitBlock) -> Result<PopulationTrace<f64>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Config(format!("cannot open {path}: {e}")))?;
    let (samples, axis) = PopulationTrace::<f64>::read_csv(std::io::BufReader::new(file))
        .map_err(CliError::config_from_core)?;
    let kind = match (axis, kind_hint.kind) {
        (TraceAxis::PhaseRad, _) => {
            let tau = kind_hint
                .tau_us
                .ok_or_else(|| CliError::Config("phase-scan fits need fit.tau_us".into()))?;
            ScanKind::Phase {
                tau: us(tau),
                phi_s: kind_hint.phi_s_rad,
            }
        }
        (TraceAxis::TimeUs, FitKind::Bsb) => ScanKind::Sideband,
        (TraceAxis::TimeUs, _) => ScanKind::Duration {
            delta_phi: kind_hint.delta_phi_rad,
        },
    };
    PopulationTrace::new(samples, kind).map_err(CliError::config_from_core)
}

fn read_pn(path: &str) -> Result<NumberDist<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot open {path}: {e}")))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "n,p,sigma" => {}
        Some((_, other)) => {
            return Err(CliError::Config(format!(
                "unexpected header {other:?}; want \"n,p,sigma\""
            )))
        }
        None => return Err(CliError::Config("empty distribution file".into())),
    }
    let mut p = Vec::new();
    let mut sigma = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Config(format!("line {}: need n,p,sigma", i + 1)));
        }
        let n: usize = fields[0]
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("line {}: bad n: {e}", i + 1)))?;
        if n != p.len() {
            return Err(CliError::Config(format!(
                "line {}: rows must be consecutive n starting at 0",
                i + 1
            )));
        }
        p.push(
            fields[1]
                .trim()
                .parse()
                .map_err(|e| CliError::Config(format!("line {}: bad p: {e}", i + 1)))?,
        );
        sigma.push(
            fields[2]
                .trim()
                .parse()
                .map_err(|e| CliError::Config(format!("line {}: bad sigma: {e}", i + 1)))?,
        );
    }
    NumberDist::new(p, sigma).map_err(CliError::config_from_core)
}

pub fn fit(raw: &RawConfig, _seed: u64) -> Result<Vec<Artifact>, CliError> {
    let cfg: config::FitConfig = raw.parse()?;
    match cfg.fit.kind {
        FitKind::Overlap => {
            let path = cfg
                .input
                .trace_csv
                .as_ref()
                .ok_or_else(|| CliError::Config("overlap fits need input.trace_csv".into()))?;
            let trace = read_trace(path, &cfg.fit)?;
            let fixed = match cfg.fit.fixed {
                Some(FixedChoice::R) => OverlapFixed::R(
                    cfg.fit
                        .r
                        .ok_or_else(|| CliError::Config("fixed = \"r\" needs fit.r".into()))?,
                ),
                Some(FixedChoice::Omega) => {
                    OverlapFixed::Omega(khz(cfg.fit.omega_khz_2pi.ok_or_else(|| {
                        CliError::Config("fixed = \"omega\" needs fit.omega_khz_2pi".into())
                    })?))
                }
                None => return Err(CliError::Config("overlap fits need fit.fixed".into())),
            };
            let mut guess = OverlapGuess::default();
            if let Some(om) = cfg.fit.omega_khz_2pi {
                guess.omega = khz(om);
            }
            if let Some(r) = cfg.fit.r {
                guess.r = r.max(0.3);
            }
            let result = fit_overlap_trace(&trace, fixed, &guess).map_err(CliError::from)?;
            let json = format!("{}\n", serde_json::to_string_pretty(&result).unwrap());
            Ok(vec![artifact("fit.json", json.into_bytes())])
        }
        FitKind::Bsb => {
            let path = cfg
                .input
                .trace_csv
                .as_ref()
                .ok_or_else(|| CliError::Config("sideband fits need input.trace_csv".into()))?;
            let trace = read_trace(path, &cfg.fit)?;
            let eta = cfg
                .fit
                .eta
                .ok_or_else(|| CliError::Config("sideband fits need fit.eta".into()))?;
            let n_max = cfg.fit.n_max.unwrap_or(29);
            let spec = BsbFitSpec::new(eta, n_max);
            let (dist, result) = fit_bsb_trace(&trace, &spec).map_err(CliError::from)?;
            let mut pn_buf = Vec::new();
            dist.write_csv(&mut pn_buf).map_err(CliError::from)?;
            let json = format!("{}\n", serde_json::to_string_pretty(&result).unwrap());
            Ok(vec![
                artifact("fit.json", json.into_bytes()),
                artifact("pn_fit.csv", pn_buf),
            ])
        }
        FitKind::DsqPn => {
            let path =
                cfg.input.pn_csv.as_ref().ok_or_else(|| {
                    CliError::Config("distribution fits need input.pn_csv".into())
                })?;
            let dist = read_pn(path)?;
            let geometry = match cfg.fit.geometry {
                Some(GeometryChoice::SqueezedAxis) => DsqGeometry::SqueezedAxis,
                Some(GeometryChoice::AntiSqueezedAxis) => DsqGeometry::AntiSqueezedAxis,
                None => {
                    return Err(CliError::Config(
                        "distribution fits need fit.geometry".into(),
                    ))
                }
            };
            let result = fit_dsq_pn(&dist, geometry, cfg.fit.fit_kappa).map_err(CliError::from)?;
            let json = format!("{}\n", serde_json::to_string_pretty(&result).unwrap());
            Ok(vec![artifact("fit.json", json.into_bytes())])
        }
    }
}
