//! Experiment configuration files.
//!
//! A config is a TOML document: a top-level `kind` plus `[spectrum]`,
//! `[control]`, `[estimation]`, optional `[scan]` / `[sweep]` and `[output]`
//! tables. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qprobe_core::{
    Backend, ControlKind, GridSpacing, OhmicSpectrum, OrnsteinUhlenbeckSpectrum, ProbeModel, Spectrum,
    TargetParameter,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Constants,
    QfiScan,
    BoundSweep,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumFamily {
    OrnsteinUhlenbeck,
    Ohmic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub family: SpectrumFamily,
    /// Coupling strength, MHz.
    pub g: f64,
    /// Correlation time, µs.
    pub tau_c: f64,
    /// Ornstein-Uhlenbeck order (even, >= 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<u32>,
    /// Ohmic exponent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

impl SpectrumBlock {
    pub fn build(&self) -> Result<Spectrum, CliError> {
        match self.family {
            SpectrumFamily::OrnsteinUhlenbeck => {
                if self.s.is_some() {
                    return Err(CliError::config("spectrum.s only applies to the ohmic family"));
                }
                let beta = self.beta.unwrap_or(2);
                Ok(OrnsteinUhlenbeckSpectrum::new(self.g, self.tau_c, beta)
                    .map_err(CliError::invalid)?
                    .into())
            }
            SpectrumFamily::Ohmic => {
                if self.beta.is_some() {
                    return Err(CliError::config("spectrum.beta only applies to the ornstein-uhlenbeck family"));
                }
                let s = self
                    .s
                    .ok_or_else(|| CliError::config("spectrum.s is required for the ohmic family"))?;
                Ok(OhmicSpectrum::new(self.g, self.tau_c, s).map_err(CliError::invalid)?.into())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlName {
    Fid,
    Cpmg,
    Cw,
    Zeno,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBlock {
    pub kind: ControlName,
    /// Pulses (CPMG), cycles (CW) or projections (Zeno); ignored for FID.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u32>,
}

impl ControlBlock {
    pub fn build(&self) -> Result<ControlKind, CliError> {
        let count = || {
            self.count
                .filter(|&n| n >= 1)
                .ok_or_else(|| CliError::config("control.count must be >= 1 for cpmg, cw and zeno"))
        };
        Ok(match self.kind {
            ControlName::Fid => ControlKind::Fid,
            ControlName::Cpmg => ControlKind::Cpmg { pulses: count()? },
            ControlName::Cw => ControlKind::Cw { cycles: count()? },
            ControlName::Zeno => ControlKind::Zeno { projections: count()? },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "g")]
    Coupling,
    #[serde(rename = "tau_c")]
    CorrelationTime,
}

impl From<Target> for TargetParameter {
    fn from(t: Target) -> Self {
        match t {
            Target::Coupling => TargetParameter::Coupling,
            Target::CorrelationTime => TargetParameter::CorrelationTime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendName {
    Auto,
    Quadrature,
    ClosedForm,
    ExactLorentzian,
    FlatFilter,
}

impl From<BackendName> for Backend {
    fn from(b: BackendName) -> Self {
        match b {
            BackendName::Auto => Backend::Auto,
            BackendName::Quadrature => Backend::Quadrature,
            BackendName::ClosedForm => Backend::ClosedForm,
            BackendName::ExactLorentzian => Backend::ExactLorentzian,
            BackendName::FlatFilter => Backend::FlatFilter,
        }
    }
}

/// Likelihood model used while inferring: the exact model, or the
/// lineshape-agnostic flat-filter form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inference {
    Exact,
    FlatFilter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

impl From<Spacing> for GridSpacing {
    fn from(s: Spacing) -> Self {
        match s {
            Spacing::Linear => GridSpacing::Linear,
            Spacing::Log => GridSpacing::Log,
        }
    }
}

fn default_backend() -> BackendName {
    BackendName::Auto
}
fn default_inference() -> Inference {
    Inference::Exact
}
fn default_measurements() -> usize {
    300
}
fn default_realizations() -> usize {
    100
}
fn default_seed() -> u64 {
    2024
}
fn default_grid_points() -> usize {
    512
}
fn default_spacing() -> Spacing {
    Spacing::Linear
}
fn default_candidates() -> usize {
    200
}
fn default_candidate_span() -> f64 {
    20.0
}
fn default_false() -> bool {
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationBlock {
    pub target: Target,
    #[serde(default = "default_backend")]
    pub backend: BackendName,
    #[serde(default = "default_inference")]
    pub inference: Inference,
    #[serde(default = "default_measurements")]
    pub measurements: usize,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Prior range; defaults to `(0.2x, 5x]` around the true value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_max: Option<f64>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_spacing")]
    pub grid_spacing: Spacing,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default = "default_candidate_span")]
    pub candidate_span: f64,
    /// Centre of the candidate grid, µs; defaults to the analytic optimum at
    /// the prior mean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_center: Option<f64>,
    #[serde(default = "default_false")]
    pub refine: bool,
    /// Also run free decay under the same budget.
    #[serde(default = "default_false")]
    pub fid_baseline: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveName {
    PerMeasurement,
    PerTime,
}

fn default_points() -> usize {
    400
}
fn default_objective() -> ObjectiveName {
    ObjectiveName::PerMeasurement
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    /// µs.
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_objective")]
    pub objective: ObjectiveName,
}

fn default_g_tau() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 5.0, 10.0]
}
fn default_sweep_tau() -> f64 {
    10.0
}
fn default_beta() -> u32 {
    2
}
fn default_s() -> f64 {
    2.0
}
fn default_cpmg_factor() -> f64 {
    400.0
}
fn default_min_pulses() -> u32 {
    8
}
fn default_cw_cycles() -> u32 {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default = "default_g_tau")]
    pub g_tau: Vec<f64>,
    /// Correlation time held fixed while `g` varies, µs.
    #[serde(default = "default_sweep_tau")]
    pub tau_c: f64,
    #[serde(default = "default_beta")]
    pub beta: u32,
    #[serde(default = "default_s")]
    pub s: f64,
    /// CPMG pulse count is `max(min_pulses, ceil(cpmg_factor / (g τ_c)²))`,
    /// which keeps `t_opt / (πN)` near `τ_c / 10`.
    #[serde(default = "default_cpmg_factor")]
    pub cpmg_factor: f64,
    #[serde(default = "default_min_pulses")]
    pub min_pulses: u32,
    /// Smallest CW cycle count; raised when needed to stay above the
    /// super-Ohmic threshold.
    #[serde(default = "default_cw_cycles")]
    pub cw_cycles: u32,
    #[serde(default = "default_points")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimation: Option<EstimationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::config(e.to_string()))
    }

    /// Check that the blocks the kind needs are present and build.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.kind {
            ExperimentKind::Constants => Ok(()),
            ExperimentKind::QfiScan => {
                self.model()?;
                let scan = self.require(&self.scan, "scan")?;
                if !(scan.t_min > 0.0 && scan.t_max > scan.t_min) || scan.points < 2 {
                    return Err(CliError::config("scan needs 0 < t_min < t_max and points >= 2"));
                }
                Ok(())
            }
            ExperimentKind::BoundSweep => {
                let sweep = self.require(&self.sweep, "sweep")?;
                if sweep.g_tau.is_empty() || sweep.g_tau.iter().any(|v| !(*v > 0.0)) {
                    return Err(CliError::config("sweep.g_tau needs positive values"));
                }
                if !(sweep.tau_c > 0.0) || sweep.points < 2 {
                    return Err(CliError::config("sweep needs tau_c > 0 and points >= 2"));
                }
                OrnsteinUhlenbeckSpectrum::new(1.0, sweep.tau_c, sweep.beta).map_err(CliError::invalid)?;
                OhmicSpectrum::new(1.0, sweep.tau_c, sweep.s).map_err(CliError::invalid)?;
                if (sweep.s - 1.0).abs() < 1e-9 {
                    return Err(CliError::config("sweep.s = 1 has no optimal time"));
                }
                Ok(())
            }
            ExperimentKind::Adaptive => {
                self.model()?;
                let est = self.require(&self.estimation, "estimation")?;
                if est.grid_points < 64 {
                    return Err(CliError::config("estimation.grid_points must be >= 64"));
                }
                if est.realizations == 0 {
                    return Err(CliError::config("estimation.realizations must be >= 1"));
                }
                if est.candidates < 2 || !(est.candidate_span > 1.0) {
                    return Err(CliError::config("estimation needs candidates >= 2 and candidate_span > 1"));
                }
                let (lo, hi) = self.prior_range()?;
                let truth = self.true_value()?;
                if !(lo >= 0.0 && truth > lo && truth <= hi) {
                    return Err(CliError::config("prior range must contain the true value"));
                }
                Ok(())
            }
        }
    }

    fn require<'a, T>(&self, block: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        block
            .as_ref()
            .ok_or_else(|| CliError::config(format!("[{name}] block is required for this kind")))
    }

    pub fn spectrum(&self) -> Result<Spectrum, CliError> {
        self.require(&self.spectrum, "spectrum")?.build()
    }

    pub fn control_kind(&self) -> Result<ControlKind, CliError> {
        self.require(&self.control, "control")?.build()
    }

    pub fn estimation(&self) -> Result<&EstimationBlock, CliError> {
        self.require(&self.estimation, "estimation")
    }

    pub fn scan(&self) -> Result<&ScanBlock, CliError> {
        self.require(&self.scan, "scan")
    }

    pub fn sweep(&self) -> Result<&SweepBlock, CliError> {
        self.require(&self.sweep, "sweep")
    }

    /// Generating model; the target parameter's true value is the one in
    /// `[spectrum]`.
    pub fn model(&self) -> Result<ProbeModel, CliError> {
        let est = self.estimation()?;
        Ok(ProbeModel::new(self.spectrum()?, self.control_kind()?, est.target.into())
            .map_err(CliError::invalid)?
            .with_backend(est.backend.into()))
    }

    pub fn true_value(&self) -> Result<f64, CliError> {
        let spectrum = self.spectrum()?;
        Ok(match self.estimation()?.target {
            Target::Coupling => spectrum.g(),
            Target::CorrelationTime => spectrum.tau_c(),
        })
    }

    pub fn prior_range(&self) -> Result<(f64, f64), CliError> {
        let est = self.estimation()?;
        let truth = self.true_value()?;
        Ok((est.prior_min.unwrap_or(0.2 * truth), est.prior_max.unwrap_or(5.0 * truth)))
    }

    pub fn output_path(&self) -> Option<&Path> {
        self.output.as_ref().map(|o| o.path.as_path())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCAN: &str = r#"
kind = "qfi-scan"

[spectrum]
family = "ornstein-uhlenbeck"
g = 1.0
tau_c = 10.0
beta = 2

[control]
kind = "cpmg"
count = 8

[estimation]
target = "tau_c"

[scan]
t_min = 1.0
t_max = 100.0
points = 50

[output]
path = "out/scan.csv"
"#;

    #[test]
    fn parses_scan() {
        let c = ExperimentConfig::parse(SCAN).unwrap();
        assert_eq!(c.kind, ExperimentKind::QfiScan);
        assert_eq!(c.control_kind().unwrap(), ControlKind::Cpmg { pulses: 8 });
        assert_eq!(c.estimation().unwrap().grid_points, 512);
        assert_eq!(c.output_path().unwrap(), Path::new("out/scan.csv"));
    }

    #[test]
    fn round_trips() {
        let c = ExperimentConfig::parse(SCAN).unwrap();
        let again = ExperimentConfig::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn rejects_unknown_keys_and_missing_blocks() {
        assert!(ExperimentConfig::parse(&SCAN.replace("points = 50", "points = 50\nbogus = 1")).is_err());
        let no_scan = SCAN.split("[scan]").next().unwrap();
        assert!(ExperimentConfig::parse(no_scan).is_err());
        assert!(ExperimentConfig::parse(&SCAN.replace("beta = 2", "beta = 3")).is_err());
    }

    #[test]
    fn adaptive_prior_must_contain_truth() {
        let text = SCAN.replace("qfi-scan", "adaptive").replace("target = \"tau_c\"", "target = \"tau_c\"\nprior_min = 20.0");
        assert!(ExperimentConfig::parse(&text).is_err());
    }
}
