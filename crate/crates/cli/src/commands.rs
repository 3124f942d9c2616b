//! The four experiment kinds and their CSV writers.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use qprobe_core::attenuation::c_s;
use qprobe_core::fisher::{self, log_grid, maximize, ohmic_cycle_threshold, scan, Objective};
use qprobe_core::{
    bound_constants, c_beta, run_protocol, AdaptiveConfig, Backend, CandidateGrid, CombControl, ControlKind,
    ModelCurve, OhmicSpectrum, OrnsteinUhlenbeckSpectrum, PrecisionReport, ProbeModel, ProtocolRun, ScanOptions,
    Spectrum, TargetParameter,
};

use crate::config::{ExperimentConfig, ExperimentKind, Inference, ObjectiveName};
use crate::format::num;
use crate::CliError;

/// Run the experiment a config describes and write its output.
pub fn run(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    match config.kind {
        ExperimentKind::Constants => {
            let report = cmd_constants();
            match config.output_path() {
                Some(path) => write_constants(&report, create(path)?)?,
                None => write_constants(&report, std::io::stdout().lock())?,
            }
            let failures = report.failures();
            if !failures.is_empty() {
                let names: Vec<&str> = failures.iter().map(|r| r.name.as_str()).collect();
                return Err(CliError::SelfCheck(names.join(", ")));
            }
            Ok(config.output_path().map(Path::to_path_buf).into_iter().collect())
        }
        ExperimentKind::QfiScan => {
            let result = cmd_qfi_scan(config)?;
            match config.output_path() {
                Some(path) => write_qfi_scan(&result, create(path)?)?,
                None => write_qfi_scan(&result, std::io::stdout().lock())?,
            }
            Ok(config.output_path().map(Path::to_path_buf).into_iter().collect())
        }
        ExperimentKind::BoundSweep => {
            let rows = cmd_bound_sweep(config)?;
            match config.output_path() {
                Some(path) => write_sweep(&rows, create(path)?)?,
                None => write_sweep(&rows, std::io::stdout().lock())?,
            }
            Ok(config.output_path().map(Path::to_path_buf).into_iter().collect())
        }
        ExperimentKind::Adaptive => {
            let base = config
                .output_path()
                .ok_or_else(|| CliError::config("adaptive runs need [output] path"))?;
            let output = cmd_adaptive(config)?;
            let (traj, ens) = adaptive_paths(base);
            write_trajectories(&output, create(&traj)?)?;
            write_ensemble(&output, create(&ens)?)?;
            Ok(vec![traj, ens])
        }
    }
}

fn create(path: &Path) -> Result<File, CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(File::create(path)?)
}

/// `<stem>_trajectories.csv` and `<stem>_ensemble.csv` next to `base`.
pub fn adaptive_paths(base: &Path) -> (PathBuf, PathBuf) {
    let stem = base.with_extension("");
    let name = stem.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    (
        stem.with_file_name(format!("{name}_trajectories.csv")),
        stem.with_file_name(format!("{name}_ensemble.csv")),
    )
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

// ---------------------------------------------------------------- constants

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantRow {
    pub name: String,
    pub value: f64,
    /// Reference value and absolute tolerance for the self-check.
    pub check: Option<(f64, f64)>,
}

impl ConstantRow {
    pub fn passes(&self) -> bool {
        self.check.map_or(true, |(v, tol)| (self.value - v).abs() <= tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    pub rows: Vec<ConstantRow>,
}

impl ConstantsReport {
    pub fn failures(&self) -> Vec<&ConstantRow> {
        self.rows.iter().filter(|r| !r.passes()).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

/// Bound constants, comb constants and the optimal-time anchors, each with
/// its self-check where one applies.
pub fn cmd_constants() -> ConstantsReport {
    let k = bound_constants();
    let mut rows = vec![
        row("J0", k.j0, Some((0.7968, 5e-4))),
        row("eps0", k.eps0, Some((2.484, 5e-3))),
        row("J1", k.j1, Some((0.106, 1e-3))),
        row("eps1", k.eps1, Some((2.04, 0.01))),
    ];
    for beta in (2..=8).step_by(2) {
        for (name, control) in [("cw", CombControl::Cw), ("cpmg", CombControl::Cpmg)] {
            let check = match (beta, control) {
                (2, CombControl::Cw) => Some((1.0 / (PI * PI), 1e-12)),
                (2, CombControl::Cpmg) => Some((0.0833, 1e-4)),
                _ => None,
            };
            let value = c_beta(beta, control).expect("even beta");
            rows.push(row(&format!("c_beta{beta}_{name}"), value, check));
        }
    }
    for s in [0.5, 2.0, 3.0] {
        rows.push(row(&format!("c_s{s}_cw"), c_s(s, 1, CombControl::Cw), None));
        for k_c in [1, 5] {
            rows.push(row(&format!("c_s{s}_cpmg_kc{k_c}"), c_s(s, k_c, CombControl::Cpmg), None));
        }
    }
    let cpmg = fisher::t_opt_beta(1.0, 10.0, 2, 8, CombControl::Cpmg).expect("valid parameters");
    rows.push(row("t_opt_cpmg8_g1_tau10", cpmg.t, Some((18.3, 0.4))));
    let zeno = fisher::t_opt_zeno(0.03, 10.0, 500).expect("valid parameters");
    rows.push(row("t_opt_zeno500_g0.03_interval", zeno.t / 500.0, Some((1.89, 0.05))));
    ConstantsReport { rows }
}

fn row(name: &str, value: f64, check: Option<(f64, f64)>) -> ConstantRow {
    ConstantRow {
        name: name.to_string(),
        value,
        check,
    }
}

pub fn write_constants<W: Write>(report: &ConstantsReport, out: W) -> Result<(), CliError> {
    let mut w = writer(out);
    w.write_record(["name", "value", "expected", "tolerance", "status"])?;
    for r in &report.rows {
        let (expected, tol) = match r.check {
            Some((v, t)) => (num(v), num(t)),
            None => (String::new(), String::new()),
        };
        let status = match r.check {
            None => "",
            Some(_) if r.passes() => "pass",
            Some(_) => "fail",
        };
        w.write_record([r.name.clone(), num(r.value), expected, tol, status.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- qfi-scan

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiRow {
    pub t: f64,
    pub coherence: f64,
    pub j: f64,
    pub dj_dx: f64,
    pub qfi: f64,
    pub relative_error: f64,
    pub argmax: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QfiScan {
    pub rows: Vec<QfiRow>,
    pub optimum: PrecisionReport,
}

/// Scan `t` on the configured log grid, then add the refined optimum as a
/// flagged row in time order.
pub fn cmd_qfi_scan(config: &ExperimentConfig) -> Result<QfiScan, CliError> {
    let model = config.model()?;
    let scan_cfg = config.scan()?;
    let curve = ModelCurve {
        model: &model,
        x: model.true_value(),
    };
    let times = log_grid(scan_cfg.t_min, scan_cfg.t_max, scan_cfg.points)?;
    let points = scan(&curve, &times)?;
    let objective = match scan_cfg.objective {
        ObjectiveName::PerMeasurement => Objective::PerMeasurement,
        ObjectiveName::PerTime => Objective::PerTime,
    };
    let options = ScanOptions {
        points: scan_cfg.points,
        ..ScanOptions::default()
    };
    let optimum = maximize(&curve, (scan_cfg.t_min, scan_cfg.t_max), &options, objective)?;

    let mut rows: Vec<QfiRow> = points
        .iter()
        .map(|p| QfiRow {
            t: p.t,
            coherence: p.attenuation.coherence(),
            j: p.attenuation.j,
            dj_dx: p.attenuation.dj_dx,
            qfi: p.qfi.value(),
            relative_error: p.relative_error.value(),
            argmax: false,
        })
        .collect();
    let best = QfiRow {
        t: optimum.t_opt,
        coherence: optimum.attenuation.coherence(),
        j: optimum.attenuation.j,
        dj_dx: optimum.attenuation.dj_dx,
        qfi: optimum.qfi.value(),
        relative_error: optimum.relative_error.value(),
        argmax: true,
    };
    match rows.iter().position(|r| r.t == best.t) {
        Some(i) => rows[i].argmax = true,
        None => {
            let i = rows.partition_point(|r| r.t < best.t);
            rows.insert(i, best);
        }
    }
    Ok(QfiScan { rows, optimum })
}

pub fn write_qfi_scan<W: Write>(scan: &QfiScan, out: W) -> Result<(), CliError> {
    let mut w = writer(out);
    w.write_record(["t", "coherence", "J", "dJ_dx", "qfi", "relative_error", "argmax"])?;
    for r in &scan.rows {
        w.write_record([
            num(r.t),
            num(r.coherence),
            num(r.j),
            num(r.dj_dx),
            num(r.qfi),
            num(r.relative_error),
            (r.argmax as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- bound-sweep

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub g_tau: f64,
    pub spectrum: String,
    pub control: String,
    /// Pulse or cycle count, 1 for free decay.
    pub count: u32,
    pub t_opt: f64,
    pub min_eps: f64,
    /// `ε₀/α` for the spectrum's homogeneity degree in `τ_c`.
    pub bound: f64,
    /// Whether the analytic regime of the optimal control holds at `t_opt`.
    pub within_regime: bool,
}

impl SweepRow {
    pub fn is_optimal_control(&self) -> bool {
        self.control != "fid"
    }

    pub fn ratio(&self) -> f64 {
        self.min_eps / self.bound
    }
}

/// Minimal per-measurement relative error in `τ_c` against `gτ_c`, for free
/// decay and for the optimal control (CPMG on the Ornstein-Uhlenbeck
/// spectrum, CW on the Ohmic one). Rows are ordered by `gτ_c`, spectrum,
/// then control.
pub fn cmd_bound_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let sweep = config.sweep()?;
    let tau = sweep.tau_c;
    let mut grid = sweep.g_tau.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let options = ScanOptions {
        points: sweep.points,
        ..ScanOptions::default()
    };
    let eps0 = bound_constants().eps0;
    let ou_name = format!("ornstein-uhlenbeck-beta{}", sweep.beta);
    let ohmic_name = format!("ohmic-s{}", sweep.s);

    let mut rows = Vec::new();
    for &gt in &grid {
        let g = gt / tau;
        let free_range = (1e-3 * tau.min(1.0 / g), 1e3 * tau.max(1.0 / g));

        let ou: Spectrum = OrnsteinUhlenbeckSpectrum::new(g, tau, sweep.beta)?.into();
        let ou_bound = eps0 / ou.tau_homogeneity();
        let fid = optimum(ou, ControlKind::Fid, Backend::Auto, free_range, &options)?;
        rows.push(sweep_row(gt, &ou_name, "fid", 1, &fid, ou_bound, true));

        let pulses = ((sweep.cpmg_factor / (gt * gt)).ceil() as u32).max(sweep.min_pulses);
        let analytic = fisher::t_opt_beta(g, tau, sweep.beta, pulses, CombControl::Cpmg)?;
        let range = (analytic.t / 10.0, analytic.t * 10.0);
        let cpmg = optimum(ou, ControlKind::Cpmg { pulses }, Backend::Auto, range, &options)?;
        let within = cpmg.t_opt / (PI * pulses as f64) <= 0.1 * tau;
        rows.push(sweep_row(gt, &ou_name, "cpmg", pulses, &cpmg, ou_bound, within));

        let ohmic: Spectrum = OhmicSpectrum::new(g, tau, sweep.s)?.into();
        let ohmic_bound = eps0 / ohmic.tau_homogeneity();
        let fid = optimum(ohmic, ControlKind::Fid, Backend::Quadrature, free_range, &options)?;
        rows.push(sweep_row(gt, &ohmic_name, "fid", 1, &fid, ohmic_bound, true));

        let mut cycles = sweep.cw_cycles.max((2.0 * ohmic_cycle_threshold(g, tau, sweep.s)).ceil() as u32);
        cycles += cycles % 2;
        let analytic = fisher::t_opt_ohmic(g, tau, sweep.s, cycles)?;
        let range = (analytic.t / 5.0, analytic.t * 5.0);
        let cw = optimum(ohmic, ControlKind::Cw { cycles }, Backend::Quadrature, range, &options)?;
        let within = cw.t_opt / (PI * cycles as f64) > tau;
        rows.push(sweep_row(gt, &ohmic_name, "cw", cycles, &cw, ohmic_bound, within));
    }
    Ok(rows)
}

fn optimum(
    spectrum: Spectrum,
    control: ControlKind,
    backend: Backend,
    range: (f64, f64),
    options: &ScanOptions,
) -> Result<PrecisionReport, CliError> {
    let model = ProbeModel::new(spectrum, control, TargetParameter::CorrelationTime)?.with_backend(backend);
    let curve = ModelCurve {
        model: &model,
        x: spectrum.tau_c(),
    };
    Ok(fisher::maximize_qfi_numeric(&curve, range, options)?)
}

fn sweep_row(
    g_tau: f64,
    spectrum: &str,
    control: &str,
    count: u32,
    report: &PrecisionReport,
    bound: f64,
    within_regime: bool,
) -> SweepRow {
    SweepRow {
        g_tau,
        spectrum: spectrum.to_string(),
        control: control.to_string(),
        count,
        t_opt: report.t_opt,
        min_eps: report.relative_error.value(),
        bound,
        within_regime,
    }
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> Result<(), CliError> {
    let mut w = writer(out);
    w.write_record([
        "g_tau",
        "spectrum",
        "control",
        "count",
        "t_opt",
        "min_eps",
        "bound",
        "ratio",
        "within_regime",
    ])?;
    for r in rows {
        w.write_record([
            num(r.g_tau),
            r.spectrum.clone(),
            r.control.clone(),
            r.count.to_string(),
            num(r.t_opt),
            num(r.min_eps),
            num(r.bound),
            num(r.ratio()),
            (r.within_regime as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- adaptive

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveOutput {
    /// One run per control: the configured one first, then the free-decay
    /// baseline when requested.
    pub runs: Vec<(String, ProtocolRun)>,
}

impl AdaptiveOutput {
    pub fn run(&self, label: &str) -> Option<&ProtocolRun> {
        self.runs.iter().find(|(l, _)| l == label).map(|(_, r)| r)
    }
}

fn control_label(kind: ControlKind) -> String {
    match kind {
        ControlKind::Fid => "fid".into(),
        other => format!("{}-{}", other.name(), other.count()),
    }
}

/// Adaptive estimation over the configured realizations, optionally followed
/// by a free-decay baseline with the same seed and budget.
pub fn cmd_adaptive(config: &ExperimentConfig) -> Result<AdaptiveOutput, CliError> {
    let est = config.estimation()?;
    let model = config.model()?;
    let mut controls = vec![model.control()];
    if est.fid_baseline && model.control() != ControlKind::Fid {
        controls.push(ControlKind::Fid);
    }
    let mut runs = Vec::with_capacity(controls.len());
    for control in controls {
        let m = ProbeModel::new(*model.spectrum(), control, model.target())?.with_backend(model.backend());
        let mut adaptive = AdaptiveConfig::new(m, config.true_value()?, est.measurements, est.realizations, est.seed);
        adaptive.inference = match est.inference {
            Inference::Exact => model.backend(),
            Inference::FlatFilter => Backend::FlatFilter,
        };
        adaptive.prior = config.prior_range()?;
        adaptive.grid_points = est.grid_points;
        adaptive.spacing = est.grid_spacing.into();
        adaptive.candidates = CandidateGrid {
            points: est.candidates,
            span: est.candidate_span,
            center: est.candidate_center,
        };
        adaptive.refine = est.refine;
        runs.push((control_label(control), run_protocol(&adaptive)?));
    }
    Ok(AdaptiveOutput { runs })
}

pub fn write_trajectories<W: Write>(output: &AdaptiveOutput, out: W) -> Result<(), CliError> {
    let mut w = writer(out);
    w.write_record([
        "control",
        "realization",
        "index",
        "t",
        "outcome",
        "mean",
        "std",
        "relative_error",
        "backend",
    ])?;
    for (label, run) in &output.runs {
        for tr in &run.trajectories {
            for r in &tr.rows {
                w.write_record([
                    label.clone(),
                    tr.realization.to_string(),
                    r.index.to_string(),
                    num(r.t),
                    r.outcome.sign().to_string(),
                    num(r.mean),
                    num(r.std),
                    num(r.relative_error),
                    r.method.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_ensemble<W: Write>(output: &AdaptiveOutput, out: W) -> Result<(), CliError> {
    let mut w = writer(out);
    w.write_record([
        "control",
        "n",
        "mean_t",
        "mean_estimate",
        "mean_relative_error",
        "relative_rmse",
        "t_opt",
        "bound",
    ])?;
    for (label, run) in &output.runs {
        for e in &run.ensemble {
            w.write_record([
                label.clone(),
                e.n.to_string(),
                num(e.mean_t),
                num(e.mean_estimate),
                num(e.mean_relative_error),
                num(e.relative_rmse),
                num(e.t_opt),
                num(e.bound),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_paths_share_stem() {
        let (a, b) = adaptive_paths(Path::new("out/fig4ab.csv"));
        assert_eq!(a, Path::new("out/fig4ab_trajectories.csv"));
        assert_eq!(b, Path::new("out/fig4ab_ensemble.csv"));
    }

    #[test]
    fn constants_pass_self_check() {
        let report = cmd_constants();
        assert!(report.failures().is_empty());
        let mut buf = Vec::new();
        write_constants(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("name,value,expected,tolerance,status\n"));
        assert!(!text.contains('\r'));
    }
}
