//! End-to-end acceptance checks, one per headline requirement; each prints a
//! pass line with its runtime. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the lines).

use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spincat::estimate::{
    fit_bsb_trace, fit_dsq_pn, synthesize_trace, BsbFitSpec, DsqGeometry, ScanKind,
};
use spincat::fock::{self, NumberDist, SqueezeParam};
use spincat::noise::{ensemble_average, ramsey_t2, NoiseModel};
use spincat::signals::{self, BsbModelParams, OverlapParams};
use spincat::spinboson::{
    self, alpha_of_tau, evolve, run_sequence, HamiltonianModel, Scenario, SdfPulse,
    SpinMotionState, TrapParams,
};

const TAU_2PI: f64 = std::f64::consts::TAU;
const OMEGA_SDF: f64 = TAU_2PI * 13.25e3;
const R_PAPER: f64 = 1.08;

fn pass(name: &str, started: Instant) {
    println!(
        "[acceptance] {name}: PASS ({:.2} s)",
        started.elapsed().as_secs_f64()
    );
}

fn xi(r: f64, phi_s: f64) -> SqueezeParam<f64> {
    SqueezeParam::new(r, phi_s).unwrap()
}

/// Squeezed vacuum prepared so that a phi_D = 0 force is aligned with the
/// squeezed (phi_s = pi) or anti-squeezed (phi_s = 0) quadrature.
fn initial_state(r: f64, phi_s: f64, dim: usize) -> SpinMotionState<f64> {
    SpinMotionState::spin_down(&fock::squeezed_vacuum(&xi(r, phi_s), dim).unwrap())
}

#[test]
fn c01_squeezing_calibration_in_db() {
    let t0 = Instant::now();
    let db = xi(R_PAPER, 0.0).db_reduction();
    assert!((db - 9.38).abs() < 5e-3, "dB = {db}");
    assert!((db - 9.4).abs() < 0.05, "dB = {db}");
    pass("C1 squeezing calibration 9.38 dB", t0);
}

#[test]
fn c02_overlap_closed_form_vs_numeric_grid() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for &r in &[0.0, 0.5, R_PAPER] {
        for &mag in &[0.0, 0.5, 1.0, 2.0, 3.0] {
            for &dphi in &[
                0.0,
                std::f64::consts::FRAC_PI_4,
                std::f64::consts::FRAC_PI_2,
            ] {
                let p = OverlapParams::from_delta_phi(mag, dphi, r).unwrap();
                let alpha = p.alpha();
                let dim = fock::required_dim(alpha, p.xi());
                let plus = fock::displaced_squeezed(alpha, p.xi(), dim).unwrap();
                let minus = fock::displaced_squeezed(-alpha, p.xi(), dim).unwrap();
                let numeric = fock::overlap(&minus, &plus).unwrap();
                let diff = (C64::new(signals::overlap_x(&p), 0.0) - numeric).norm();
                worst = worst.max(diff);
                assert!(diff < 1e-8, "r={r} |a|={mag} dphi={dphi}: diff={diff:.3e}");
            }
        }
    }
    pass(
        &format!("C2 overlap oracle, 45-point grid (worst |diff| = {worst:.2e})"),
        t0,
    );
}

#[test]
fn c03_population_half_decay_scales_as_exp_r() {
    let t0 = Instant::now();
    // Noiseless duration scans; (P - 1/2) halves when X = 1/2.
    let half_decay = |r: f64, dphi: f64| -> f64 {
        let sq = xi(r, 0.0);
        let mut prev = (0.0, 1.0);
        let mut t = 0.0;
        loop {
            t += 0.005e-6;
            let p = signals::spin_population_model(t, OMEGA_SDF, &sq, dphi, 1.0, 1.0).unwrap();
            let x = 2.0 * p - 1.0;
            if x < 0.5 {
                // Linear interpolation inside the bracketing step.
                let (t_lo, x_lo) = prev;
                return t_lo + (x_lo - 0.5) / (x_lo - x) * (t - t_lo);
            }
            prev = (t, x);
            assert!(t < 1e-3, "no half decay found");
        }
    };
    let tau_ground = half_decay(0.0, 0.0);
    let tau_squeezed = half_decay(R_PAPER, 0.0);
    let tau_anti = half_decay(R_PAPER, std::f64::consts::FRAC_PI_2);
    let factor = R_PAPER.exp();
    let ratio_fast = tau_ground / tau_squeezed;
    let ratio_slow = tau_anti / tau_ground;
    assert!(
        (ratio_fast - factor).abs() < 0.05 * factor,
        "squeezed-axis speedup {ratio_fast:.3} vs e^r = {factor:.3}"
    );
    assert!(
        (ratio_slow - factor).abs() < 0.05 * factor,
        "anti-squeezed slowdown {ratio_slow:.3} vs e^r = {factor:.3}"
    );
    pass(
        &format!("C3 half-decay ratios {ratio_fast:.3} and {ratio_slow:.3} vs e^r = {factor:.3}"),
        t0,
    );
}

#[test]
fn c04_noiseless_revivals_return_to_unity() {
    let t0 = Instant::now();
    // Squeezed-axis geometry for all three durations.
    for &tau1 in &[60e-6, 120e-6, 250e-6] {
        let force = SdfPulse::force(OMEGA_SDF, 0.0, tau1).unwrap();
        let alpha = alpha_of_tau(&force, tau1);
        let dim = fock::required_dim(alpha, &xi(R_PAPER, std::f64::consts::PI));
        let scenario = Scenario::new(
            initial_state(R_PAPER, std::f64::consts::PI, dim),
            vec![force, SdfPulse::return_pulse(OMEGA_SDF, 0.0, tau1).unwrap()],
            TrapParams::default(),
            HamiltonianModel::Lda,
        )
        .with_sample_dt(10e-6);
        let series = run_sequence(&scenario, 0.0).unwrap();
        let p_end = series.final_state().spin_down_prob();
        assert!(
            (p_end - 1.0).abs() < 1e-6,
            "tau1 = {} us: P(down) = {p_end}",
            tau1 * 1e6
        );
        assert!(series.final_state().leakage() < 1e-6);
        // The branch separation at the force end matches the displacement law.
        let mid = series
            .samples
            .iter()
            .find(|s| (s.t - tau1).abs() < 1e-12)
            .unwrap();
        let sep = (mid.state.branch_centroid(true) - mid.state.branch_centroid(false)).norm();
        assert!(
            (sep - 2.0 * alpha.norm()).abs() < 1e-3 * sep,
            "separation {sep}"
        );
    }
    // The anti-squeezed geometry at 250 us exercises the dim ~ 400 regime.
    let tau1 = 250e-6;
    let force = SdfPulse::force(OMEGA_SDF, 0.0, tau1).unwrap();
    let alpha = alpha_of_tau(&force, tau1);
    let dim = fock::required_dim(alpha, &xi(R_PAPER, 0.0));
    assert!(dim > 380, "anti-squeezed sizing gives dim = {dim}");
    let scenario = Scenario::new(
        initial_state(R_PAPER, 0.0, dim),
        vec![force, SdfPulse::return_pulse(OMEGA_SDF, 0.0, tau1).unwrap()],
        TrapParams::default(),
        HamiltonianModel::Lda,
    )
    .with_sample_dt(50e-6);
    let series = run_sequence(&scenario, 0.0).unwrap();
    let p_end = series.final_state().spin_down_prob();
    assert!((p_end - 1.0).abs() < 1e-6, "dim-400 revival: P = {p_end}");

    // Separation bookkeeping against the published landmark numbers.
    let delta_alpha = 2.0 * alpha.norm();
    assert!((delta_alpha - 20.8).abs() < 0.05, "|da| = {delta_alpha:.3}");
    assert!(delta_alpha > 19.0);
    let squeezed_units = 19.0 * R_PAPER.exp();
    assert!((55.0..57.0).contains(&squeezed_units));
    pass(
        &format!("C4 revivals at 60/120/250 us, |da| = {delta_alpha:.2} (dim {dim})"),
        t0,
    );
}

#[test]
fn c05_full_hamiltonian_displacement_deficit() {
    let t0 = Instant::now();
    let trap = TrapParams::default();
    // Displacement recovered the way the measured data would be: from the
    // best-fit |alpha| of the branch number distribution. (The raw branch
    // centroid runs slightly larger: 1.07% at 60 us, 4.97% at 250 us.)
    let fitted_alpha = |s: &SpinMotionState<f64>| -> f64 {
        let b = s.branch(true);
        let norm: f64 = b.iter().map(|z| z.norm_sqr()).sum();
        let p: Vec<f64> = b.iter().map(|z| z.norm_sqr() / norm).collect();
        let nd = NumberDist::from_probabilities(p);
        let fit = fit_dsq_pn(&nd, DsqGeometry::SqueezedAxis, false).unwrap();
        fit.value("alpha").unwrap()
    };
    let deficit_at = |tau: f64| -> f64 {
        let force = SdfPulse::force(OMEGA_SDF, 0.0, tau).unwrap();
        let alpha = alpha_of_tau(&force, tau);
        let dim = fock::required_dim(alpha, &xi(R_PAPER, std::f64::consts::PI));
        let s0 = initial_state(R_PAPER, std::f64::consts::PI, dim);
        let lda = evolve(&s0, &spinboson::h_sdf_lda(&force, dim), tau).unwrap();
        let full = evolve(&s0, &spinboson::h_sdf_full(&trap, &force, dim), tau).unwrap();
        1.0 - fitted_alpha(&full) / fitted_alpha(&lda)
    };
    let deficit_long = deficit_at(250e-6);
    assert!(
        (0.03..=0.05).contains(&deficit_long),
        "deficit at 250 us = {:.2}%",
        deficit_long * 100.0
    );
    let deficit_short = deficit_at(60e-6);
    assert!(
        deficit_short.abs() < 0.01,
        "deficit at 60 us = {:.2}%",
        deficit_short * 100.0
    );
    pass(
        &format!(
            "C5 beyond-Lamb-Dicke deficit {:.2}% at 250 us, {:.2}% at 60 us",
            deficit_long * 100.0,
            deficit_short * 100.0
        ),
        t0,
    );
}

#[test]
fn c06_number_statistics_and_mandel_q() {
    let t0 = Instant::now();
    // Moments of the closed-form distribution against the moment formulas.
    for phi_s in [0.0, std::f64::consts::PI] {
        let sq = xi(R_PAPER, phi_s);
        let alpha = C64::new(2.4, 0.0);
        let n_max = fock::required_dim(alpha, &sq) + 60;
        let d = signals::dsq_number_dist(alpha, &sq, 1.0, n_max).unwrap();
        let (mean, var) = signals::dsq_moments(alpha, &sq);
        assert!((d.mean() - mean).abs() < 1e-6 * mean);
        assert!((d.variance() - var).abs() < 1e-6 * var);
    }
    // Sub-Poissonian crossing of the squeezed-axis curve.
    let sq0 = xi(R_PAPER, 0.0);
    let q_of = |a: f64| {
        let (m, v) = signals::dsq_moments(C64::new(a, 0.0), &sq0);
        signals::mandel_q(m, v).unwrap()
    };
    let (mut lo, mut hi) = (1.0, 6.0);
    assert!(q_of(lo) > 0.0 && q_of(hi) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if q_of(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossing = 0.5 * (lo + hi);
    assert!(
        (crossing - 2.90).abs() < 0.02,
        "Q = 0 at |alpha| = {crossing:.4}"
    );
    assert!(crossing < 3.0 && crossing > 2.5);
    // Curve shapes: squeezed-axis falls, anti-squeezed rises.
    let sq_pi = xi(R_PAPER, std::f64::consts::PI);
    let mut prev_down = f64::INFINITY;
    let mut prev_up = -f64::INFINITY;
    for k in 1..=24 {
        let a = C64::new(0.25 * k as f64, 0.0);
        let (m, v) = signals::dsq_moments(a, &sq0);
        let q = signals::mandel_q(m, v).unwrap();
        assert!(q < prev_down);
        prev_down = q;
        let (m2, v2) = signals::dsq_moments(a, &sq_pi);
        let q2 = signals::mandel_q(m2, v2).unwrap();
        assert!(q2 > prev_up - 1e-12);
        prev_up = q2;
    }
    pass(
        &format!("C6 moments to 1e-6; Q crossing at |alpha| = {crossing:.3}"),
        t0,
    );
}

#[test]
fn c07_sideband_inversion_roundtrip_with_noise() {
    let t0 = Instant::now();
    let omega0 = TAU_2PI * 265e3;
    let eta = 0.05;
    for (phi_s, geometry) in [
        (0.0, DsqGeometry::SqueezedAxis),
        (std::f64::consts::PI, DsqGeometry::AntiSqueezedAxis),
    ] {
        let sq = xi(R_PAPER, phi_s);
        let p_true = signals::dsq_number_dist(C64::new(2.4, 0.0), &sq, 1.0, 29).unwrap();
        let m = BsbModelParams::new(omega0, eta, 500.0, 0.0, 29).unwrap();
        let xs: Vec<f64> = (0..=240).map(|k| k as f64 * 2.5e-6).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trace = synthesize_trace(
            &xs,
            |t| signals::bsb_signal(t, &p_true, &m),
            300,
            ScanKind::Sideband,
            &mut rng,
        )
        .unwrap();
        let (p_fit, _) = fit_bsb_trace(&trace, &BsbFitSpec::new(eta, 29)).unwrap();
        let tv: f64 = (0..=29)
            .map(|n| (p_fit.p(n) - p_true.p(n)).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.08, "{geometry:?}: total variation = {tv:.4}");
        let fit = fit_dsq_pn(&p_fit, geometry, false).unwrap();
        let r = fit.value("r").unwrap();
        let a = fit.value("alpha").unwrap();
        assert!(
            (r - R_PAPER).abs() < 0.05 * R_PAPER,
            "{geometry:?}: r = {r:.4}"
        );
        assert!((a - 2.4).abs() < 0.05 * 2.4, "{geometry:?}: alpha = {a:.4}");
    }
    pass(
        "C7 sideband inversion round-trip, both axes at 300 reps",
        t0,
    );
}

/// Interior extrema of a sampled curve that stand out from 0.5 by more than
/// 0.1, counted until the first extremum that does not.
fn resolvable_oscillations(ys: &[f64]) -> usize {
    let mut count = 0;
    for i in 1..ys.len() - 1 {
        if (ys[i] - ys[i - 1]) * (ys[i + 1] - ys[i]) < 0.0 {
            if (ys[i] - 0.5).abs() > 0.1 {
                count += 1;
            } else {
                break;
            }
        }
    }
    count
}

#[test]
fn c08_squeezed_axis_shows_more_oscillations_before_collapse() {
    let t0 = Instant::now();
    let omega0 = TAU_2PI * 265e3;
    let m = BsbModelParams::ideal(omega0, 0.05).unwrap();
    let sq = xi(R_PAPER, 0.0);
    let alpha = C64::new(2.4, 0.0);
    let (mean, _) = signals::dsq_moments(alpha, &sq);
    assert!((mean - 7.46).abs() < 0.01);
    let dsq = signals::dsq_number_dist(alpha, &sq, 1.0, 29).unwrap();
    let poisson = {
        let lambda = mean;
        let mut p = Vec::with_capacity(30);
        let mut term = (-lambda).exp();
        for n in 0..=29usize {
            if n > 0 {
                term *= lambda / n as f64;
            }
            p.push(term);
        }
        NumberDist::from_probabilities(p)
    };
    let sample = |p: &NumberDist<f64>| -> Vec<f64> {
        (0..=2000)
            .map(|k| signals::bsb_signal(k as f64 * 0.2e-6, p, &m))
            .collect()
    };
    let n_dsq = resolvable_oscillations(&sample(&dsq));
    let n_poisson = resolvable_oscillations(&sample(&poisson));
    assert!(
        n_dsq > n_poisson,
        "dsq: {n_dsq} oscillations, poisson: {n_poisson}"
    );
    pass(
        &format!("C8 collapse counting: {n_dsq} vs {n_poisson} oscillations"),
        t0,
    );
}

#[test]
fn c09_noise_suite_ramsey_and_revival_ordering() {
    let t0 = Instant::now();
    // Coherence time from the arcsine-distributed detuning.
    let noise = NoiseModel::<f64>::new(TAU_2PI * 1.5e3, 50.0, 10.0, 100, 7).unwrap();
    let t2 = ramsey_t2(&noise).unwrap();
    assert!(
        (t2 - 186e-6).abs() < 10e-6,
        "T2 = {:.1} us vs 186 +/- 10",
        t2 * 1e6
    );

    // 100-shot revival ensembles for both pulse durations and all three
    // initial states.
    let revival = |r: f64, phi_s: f64, tau1: f64| -> (f64, Vec<f64>, Vec<f64>) {
        let force = SdfPulse::force(OMEGA_SDF, 0.0, tau1).unwrap();
        let alpha = alpha_of_tau(&force, tau1);
        let dim = fock::required_dim(alpha, &xi(r.max(1e-9), phi_s));
        let s0 = if r == 0.0 {
            SpinMotionState::spin_down(&fock::number_state::<f64>(0, dim).unwrap())
        } else {
            initial_state(r, phi_s, dim)
        };
        let scenario = Scenario::new(
            s0,
            vec![force, SdfPulse::return_pulse(OMEGA_SDF, 0.0, tau1).unwrap()],
            TrapParams::default(),
            HamiltonianModel::Lda,
        )
        .with_sample_dt(2e-6);
        let ens = ensemble_average(&scenario, &noise).unwrap();
        let during_return: Vec<(f64, f64)> = ens
            .t
            .iter()
            .zip(&ens.p_down_mean)
            .filter(|(&t, _)| t > tau1)
            .map(|(&t, &p)| (t, p))
            .collect();
        let peak = during_return.iter().map(|&(_, p)| p).fold(0.0, f64::max);
        (
            peak,
            during_return.iter().map(|&(t, _)| t).collect(),
            during_return.iter().map(|&(_, p)| p).collect(),
        )
    };

    let mut peaks = Vec::new();
    for &tau1 in &[60e-6, 120e-6] {
        let (peak_ground, _, _) = revival(0.0, 0.0, tau1);
        let (peak_squeezed, _, _) = revival(R_PAPER, std::f64::consts::PI, tau1);
        let (peak_anti, _, anti_p) = revival(R_PAPER, 0.0, tau1);
        // The anti-squeezed-axis revival is the weakest of the three.
        assert!(
            peak_squeezed >= peak_anti - 0.01,
            "tau1 = {} us: squeezed {peak_squeezed:.3} vs anti {peak_anti:.3}",
            tau1 * 1e6
        );
        assert!(
            peak_ground >= peak_anti - 0.01,
            "tau1 = {} us: ground {peak_ground:.3} vs anti {peak_anti:.3}",
            tau1 * 1e6
        );
        // Decoherence signatures of the anti-squeezed return at the longer
        // pulse: the population wiggles down close to the 0.5 floor of a
        // dead cat and its revival sits well under the squeezed-axis one
        // (at 60 us the revival is still largely intact).
        if tau1 > 100e-6 {
            let extrema = anti_p
                .windows(3)
                .filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0)
                .count();
            let min_p = anti_p.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(
                min_p <= 0.53,
                "tau1 = {} us: return minimum {min_p:.3} stays far from 0.5",
                tau1 * 1e6
            );
            assert!(
                extrema >= 2,
                "tau1 = {} us: only {extrema} wiggles",
                tau1 * 1e6
            );
            assert!(
                peak_anti <= peak_squeezed - 0.05,
                "tau1 = {} us: anti revival {peak_anti:.3} not clearly below \
                 squeezed {peak_squeezed:.3}",
                tau1 * 1e6
            );
        }
        peaks.push((tau1, peak_ground, peak_squeezed, peak_anti));
    }
    let detail: Vec<String> = peaks
        .iter()
        .map(|(t, g, s, a)| format!("{}us g={g:.3} s={s:.3} a={a:.3}", t * 1e6))
        .collect();
    pass(
        &format!(
            "C9 noise suite: T2 = {:.1} us; peaks {}",
            t2 * 1e6,
            detail.join("; ")
        ),
        t0,
    );
}

/// Two sub-claims that do not hold in the modelled noise (quasi-static
/// detuning plus heating), kept as stated so their failure stays visible.
///
/// First, the stated ordering places the ground-state revival at or above
/// the squeezed-axis one; the simulation gives the opposite at every fixed
/// detuning (squeezed-axis cats are protected against the detuning-driven
/// branch mixing by their faster-decaying wavepacket overlap, the same
/// mechanism behind their extended coherence time), with an infinite-shot
/// gap of 0.01 - 0.07 in the squeezed state's favour. Second, the
/// anti-squeezed-axis return population approaches the 0.5 floor from above
/// (minimum 0.506 ensemble-averaged at 120 us) but never crosses it, so a
/// literal oscillation about 0.5 does not occur; in the experiment that
/// behaviour reflects measured points scattering about a decohered cat's
/// 0.5 floor under noise sources outside the modelled set.
#[test]
fn c09_spec_strict_ordering_and_oscillation() {
    let t0 = Instant::now();
    let noise = NoiseModel::<f64>::new(TAU_2PI * 1.5e3, 50.0, 10.0, 100, 7).unwrap();
    let run = |r: f64, phi_s: f64, tau1: f64| -> (f64, Vec<f64>) {
        let force = SdfPulse::force(OMEGA_SDF, 0.0, tau1).unwrap();
        let alpha = alpha_of_tau(&force, tau1);
        let dim = fock::required_dim(alpha, &xi(r.max(1e-9), phi_s));
        let s0 = if r == 0.0 {
            SpinMotionState::spin_down(&fock::number_state::<f64>(0, dim).unwrap())
        } else {
            initial_state(r, phi_s, dim)
        };
        let scenario = Scenario::new(
            s0,
            vec![force, SdfPulse::return_pulse(OMEGA_SDF, 0.0, tau1).unwrap()],
            TrapParams::default(),
            HamiltonianModel::Lda,
        )
        .with_sample_dt(2e-6);
        let ens = ensemble_average(&scenario, &noise).unwrap();
        let ret: Vec<f64> = ens
            .t
            .iter()
            .zip(&ens.p_down_mean)
            .filter(|(&t, _)| t > tau1)
            .map(|(_, &p)| p)
            .collect();
        let peak = ret.iter().cloned().fold(0.0, f64::max);
        (peak, ret)
    };
    for &tau1 in &[60e-6, 120e-6] {
        let (g, _) = run(0.0, 0.0, tau1);
        let (s, _) = run(R_PAPER, std::f64::consts::PI, tau1);
        let (_, anti_ret) = run(R_PAPER, 0.0, tau1);
        let crossings = anti_ret
            .windows(2)
            .filter(|w| (w[0] - 0.5) * (w[1] - 0.5) < 0.0)
            .count();
        assert!(
            g >= s - 0.01,
            "tau1 = {} us: ground {g:.3} < squeezed-axis {s:.3}; the modelled \
             detuning noise protects the squeezed-axis cat (overlap-suppressed \
             branch mixing), so the stated ground >= squeezed leg cannot hold",
            tau1 * 1e6
        );
        if tau1 > 100e-6 {
            assert!(
                crossings >= 2,
                "tau1 = {} us: the return population stays at or above 0.5 \
                 ({crossings} crossings); it approaches the decohered floor \
                 without a literal oscillation about it",
                tau1 * 1e6
            );
        }
    }
    pass("C9b strict ordering and oscillation claims", t0);
}

#[test]
fn c10_contrast_identity_between_published_forms() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let alpha = C64::new(0.2 + rng.random::<f64>() * 4.0, 0.0);
        let theta = rng.random::<f64>() * 0.8;
        let r = rng.random::<f64>() * 1.3;
        let res = signals::interferometer_contrast(alpha, theta, &xi(r, 0.0));
        let dal = 2.0 * res.alpha_r.norm();
        let main_text = (-dal * dal * ((-2.0 * r).exp() - 1.0) / 2.0).exp();
        let rel = (res.improvement - main_text).abs() / main_text;
        assert!(rel < 1e-12, "relative mismatch {rel:.3e}");
    }
    pass("C10 contrast identity on 10 random draws", t0);
}
