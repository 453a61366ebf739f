//! Declarative scenario configs. One TOML document per run; every physical
//! quantity carries its unit in the key name, unknown keys are rejected.

use serde::Deserialize;

use crate::CliError;

pub const TAU: f64 = std::f64::consts::TAU;

/// Scenario kinds, one per subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    OverlapScan,
    PhaseScan,
    Revival,
    Bsb,
    Qfunc,
    NoiseSim,
    Fit,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::OverlapScan => "overlap-scan",
            Kind::PhaseScan => "phase-scan",
            Kind::Revival => "revival",
            Kind::Bsb => "bsb",
            Kind::Qfunc => "qfunc",
            Kind::NoiseSim => "noise-sim",
            Kind::Fit => "fit",
        }
    }

    fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "overlap-scan" => Kind::OverlapScan,
            "phase-scan" => Kind::PhaseScan,
            "revival" => Kind::Revival,
            "bsb" => Kind::Bsb,
            "qfunc" => Kind::Qfunc,
            "noise-sim" => Kind::NoiseSim,
            "fit" => Kind::Fit,
            _ => return None,
        })
    }
}

/// Parsed config: the declared kind, the optional seed, and the raw table
/// that the per-kind structs deserialize from.
pub struct RawConfig {
    pub kind: Kind,
    pub seed: Option<u64>,
    pub text: String,
    table: toml::Table,
}

pub fn load(path: &std::path::Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let kind_val = table
        .remove("kind")
        .ok_or_else(|| CliError::Config("missing top-level `kind` field".into()))?;
    let kind_str = kind_val
        .as_str()
        .ok_or_else(|| CliError::Config("`kind` must be a string".into()))?;
    let kind = Kind::from_str(kind_str).ok_or_else(|| {
        CliError::Config(format!(
            "unknown kind {kind_str:?}; expected one of overlap-scan, phase-scan, revival, bsb, qfunc, noise-sim, fit"
        ))
    })?;
    let seed = match table.remove("seed") {
        None => None,
        Some(v) => Some(
            v.as_integer()
                .filter(|&n| n >= 0)
                .map(|n| n as u64)
                .ok_or_else(|| CliError::Config("`seed` must be a non-negative integer".into()))?,
        ),
    };
    Ok(RawConfig {
        kind,
        seed,
        text,
        table,
    })
}

impl RawConfig {
    /// Deserialize the remaining document into the kind-specific schema.
    pub fn parse<T: serde::de::DeserializeOwned>(&self) -> Result<T, CliError> {
        T::deserialize(self.table.clone())
            .map_err(|e| CliError::Config(format!("config field error: {e}")))
    }
}

fn default_a() -> f64 {
    1.0
}

fn default_one() -> f64 {
    1.0
}

fn default_eta() -> f64 {
    0.05
}

fn default_omega_z() -> f64 {
    2.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseBlock {
    pub omega_khz_2pi: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapBlock {
    #[serde(default = "default_omega_z")]
    pub omega_z_mhz_2pi: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Carrier Rabi frequency; derived as `omega / eta` when absent.
    pub omega_0_khz_2pi: Option<f64>,
}

impl Default for TrapBlock {
    fn default() -> Self {
        Self {
            omega_z_mhz_2pi: default_omega_z(),
            eta: default_eta(),
            omega_0_khz_2pi: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeBlock {
    pub r: f64,
    #[serde(default)]
    pub phi_s_rad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_one")]
    pub b: f64,
}

impl Default for ModelBlock {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapTraceBlock {
    pub label: String,
    pub r: f64,
    pub delta_phi_rad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapScanConfig {
    pub pulse: PulseBlock,
    pub scan: DurationScanBlock,
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(rename = "trace")]
    pub traces: Vec<OverlapTraceBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationScanBlock {
    pub tau_start_us: f64,
    pub tau_stop_us: f64,
    pub tau_step_us: f64,
    /// 0 keeps the exact model values; otherwise binomial sampling.
    #[serde(default)]
    pub reps: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseScanConfig {
    pub pulse: PhasePulseBlock,
    pub squeeze: SqueezeBlock,
    pub scan: PhaseScanBlock,
    #[serde(default)]
    pub model: ModelBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasePulseBlock {
    pub omega_khz_2pi: f64,
    pub tau_us: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseScanBlock {
    #[serde(default)]
    pub phi_start_rad: f64,
    #[serde(default = "default_phi_stop")]
    pub phi_stop_rad: f64,
    pub points: usize,
    #[serde(default)]
    pub reps: u32,
}

fn default_phi_stop() -> f64 {
    TAU
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    Lda,
    Full,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    #[serde(default = "default_model")]
    pub model: ModelTag,
    #[serde(default)]
    pub detuning_khz_2pi: f64,
    #[serde(default = "default_sample_dt")]
    pub sample_dt_us: f64,
    /// Basis-size override; sized from the pulse otherwise.
    pub dim: Option<usize>,
}

fn default_model() -> ModelTag {
    ModelTag::Lda
}

fn default_sample_dt() -> f64 {
    1.0
}

impl Default for SimBlock {
    fn default() -> Self {
        Self {
            model: ModelTag::Lda,
            detuning_khz_2pi: 0.0,
            sample_dt_us: 1.0,
            dim: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevivalPulseBlock {
    pub omega_khz_2pi: f64,
    pub tau1_us: f64,
    /// Return-pulse duration; equal to `tau1_us` when absent.
    pub tau2_us: Option<f64>,
    #[serde(default)]
    pub phi_d_rad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevivalConfig {
    #[serde(default)]
    pub trap: TrapBlock,
    pub pulse: RevivalPulseBlock,
    pub squeeze: SqueezeBlock,
    #[serde(default)]
    pub sim: SimBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsbStateBlock {
    pub alpha: f64,
    pub r: f64,
    #[serde(default)]
    pub phi_s_rad: f64,
    #[serde(default = "default_one")]
    pub kappa: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsbReadoutBlock {
    pub omega_0_khz_2pi: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub gamma_per_s: f64,
    #[serde(default)]
    pub b_per_s: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_n_max() -> usize {
    29
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeScanBlock {
    #[serde(default)]
    pub t_start_us: f64,
    pub t_stop_us: f64,
    pub points: usize,
    #[serde(default)]
    pub reps: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsbConfig {
    pub readout: BsbReadoutBlock,
    pub state: BsbStateBlock,
    pub scan: TimeScanBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfuncStateBlock {
    #[serde(default)]
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    pub r: f64,
    #[serde(default)]
    pub phi_s_rad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfuncConfig {
    pub state: QfuncStateBlock,
    pub grid: GridBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseBlock {
    #[serde(default = "default_noise_amp")]
    pub detuning_amp_khz_2pi: f64,
    #[serde(default = "default_line_freq")]
    pub line_freq_hz: f64,
    #[serde(default = "default_heating")]
    pub heating_quanta_per_s: f64,
    #[serde(default = "default_shots")]
    pub shots: usize,
}

fn default_noise_amp() -> f64 {
    1.5
}

fn default_line_freq() -> f64 {
    50.0
}

fn default_heating() -> f64 {
    10.0
}

fn default_shots() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSimConfig {
    #[serde(default)]
    pub trap: TrapBlock,
    pub pulse: RevivalPulseBlock,
    pub squeeze: SqueezeBlock,
    #[serde(default)]
    pub sim: SimBlock,
    pub noise: NoiseBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Overlap,
    Bsb,
    DsqPn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedChoice {
    R,
    Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryChoice {
    SqueezedAxis,
    AntiSqueezedAxis,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitInputBlock {
    /// Population trace CSV (`t_us,p_down,reps` or `phi_rad,p_down,reps`).
    pub trace_csv: Option<String>,
    /// Number-distribution CSV (`n,p,sigma`) for distribution fits.
    pub pn_csv: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBlock {
    pub kind: FitKind,
    // overlap
    pub fixed: Option<FixedChoice>,
    pub r: Option<f64>,
    pub omega_khz_2pi: Option<f64>,
    #[serde(default)]
    pub delta_phi_rad: f64,
    pub tau_us: Option<f64>,
    #[serde(default)]
    pub phi_s_rad: f64,
    // bsb
    pub eta: Option<f64>,
    pub n_max: Option<usize>,
    // dsq-pn
    pub geometry: Option<GeometryChoice>,
    #[serde(default)]
    pub fit_kappa: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub input: FitInputBlock,
    pub fit: FitBlock,
}

/// Validation that goes beyond what serde types can express; all failures
/// are configuration errors (exit 2).
pub fn ensure(cond: bool, what: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(what.to_string()))
    }
}
