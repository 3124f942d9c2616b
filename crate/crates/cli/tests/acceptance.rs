//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs under `cargo test` with its own harness.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use qprobe_cli::commands::{write_ensemble, write_trajectories};
use qprobe_cli::{cmd_adaptive, cmd_bound_sweep, cmd_constants, ExperimentConfig};
use qprobe_core::{
    attenuation_comb_beta, attenuation_quadrature, bound_constants, outcome_probabilities, qfi, t_opt_beta,
    t_opt_zeno, AttenuationResult, Backend, CombControl, ControlKind, ControlSequence, GridSpacing,
    OhmicSpectrum, Outcome, OrnsteinUhlenbeckSpectrum, Posterior, ProbeModel, QuadratureOptions, Spectrum,
    TargetParameter,
};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn recipe(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../recipes").join(name);
    ExperimentConfig::load(&path).expect("recipe parses")
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn constants() -> Verdict {
    let k = bound_constants();
    let checks = [
        ("J0", k.j0, 0.7968, 5e-4),
        ("eps0", k.eps0, 2.484, 5e-3),
        ("eps1", k.eps1, 2.04, 0.01),
        ("J1", k.j1, 0.106, 1e-3),
    ];
    let pass = checks.iter().all(|&(_, v, t, tol)| within(v, t, tol)) && cmd_constants().failures().is_empty();
    let detail = checks
        .iter()
        .map(|(n, v, _, _)| format!("{n}={v:.6}"))
        .collect::<Vec<_>>()
        .join(" ");
    verdict(pass, detail)
}

fn oracle_equivalence() -> Verdict {
    let (g, tau) = (1.0, 10.0);
    let opts = QuadratureOptions::default();
    let spectrum: Spectrum = OrnsteinUhlenbeckSpectrum::lorentzian(g, tau).unwrap().into();
    let mut gaps = Vec::new();
    for n in [16u32, 32, 64] {
        let t = std::f64::consts::PI * n as f64 * tau / 20.0;
        let comb = attenuation_comb_beta(g, tau, 2, n, t, CombControl::Cpmg).unwrap();
        let quad = attenuation_quadrature(&spectrum, &ControlSequence::cpmg(n, t).unwrap(), &opts).unwrap();
        gaps.push((comb.j - quad.attenuation.j).abs() / quad.attenuation.j);
    }
    let pass = gaps.iter().all(|&d| d <= 0.05) && gaps.windows(2).all(|w| w[1] < w[0]);
    verdict(pass, format!("relative gaps N=16,32,64: {:.4} {:.4} {:.4}", gaps[0], gaps[1], gaps[2]))
}

fn free_limits() -> Verdict {
    let (g, tau) = (1.0, 10.0);
    let spectrum: Spectrum = OrnsteinUhlenbeckSpectrum::lorentzian(g, tau).unwrap().into();
    let opts = QuadratureOptions::default();
    let j = |t: f64| {
        attenuation_quadrature(&spectrum, &ControlSequence::fid(t).unwrap(), &opts)
            .unwrap()
            .attenuation
            .j
    };
    let short = tau / 1000.0;
    let long = 100.0 * tau;
    let d_short = (j(short) / (g * g * short * short / 2.0) - 1.0).abs();
    let d_long = (j(long) / (g * g * tau * long) - 1.0).abs();
    verdict(
        d_short <= 0.005 && d_long <= 0.02,
        format!("short-time deviation {d_short:.2e}, Markovian deviation {d_long:.2e}"),
    )
}

fn optimal_time_anchors() -> Verdict {
    let cpmg = t_opt_beta(1.0, 10.0, 2, 8, CombControl::Cpmg).unwrap().t;
    let zeno = t_opt_zeno(0.03, 10.0, 500).unwrap().t / 500.0;
    verdict(
        within(cpmg, 18.3, 0.4) && within(zeno, 1.89, 0.05),
        format!("CPMG-8 t_opt={cpmg:.3} us, Zeno-500 t_opt/N={zeno:.4} us"),
    )
}

fn bound_attainment() -> Verdict {
    let rows = cmd_bound_sweep(&recipe("fig2b.toml")).unwrap();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for r in rows.iter().filter(|r| r.is_optimal_control() && r.within_regime) {
        worst = worst.max((r.ratio() - 1.0).abs());
        checked += 1;
    }
    let fid_ratios: Vec<f64> = rows
        .iter()
        .filter(|r| !r.is_optimal_control() && r.g_tau == 10.0)
        .map(|r| r.ratio())
        .collect();
    let pass = checked == 10 && worst <= 0.03 && fid_ratios.len() == 2 && fid_ratios.iter().all(|&x| x >= 2.0);
    verdict(
        pass,
        format!(
            "{checked} optimal rows in regime, worst deviation {:.2}%; FID/bound at g*tau_c=10: {:.1}, {:.1}",
            100.0 * worst,
            fid_ratios.first().copied().unwrap_or(f64::NAN),
            fid_ratios.get(1).copied().unwrap_or(f64::NAN),
        ),
    )
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn adaptive_protocol() -> Verdict {
    let out = cmd_adaptive(&recipe("fig4ab.toml")).unwrap();
    let run = out.run("cpmg-8").expect("cpmg run");
    let fid = out.run("fid").expect("fid baseline");
    let e = &run.ensemble;
    assert_eq!(e.len(), 300);
    let last50 = e[250..].iter().map(|r| r.mean_t).sum::<f64>() / 50.0;
    let t_dev = (last50 / run.t_opt - 1.0).abs();
    let pts: Vec<(f64, f64)> = e[29..]
        .iter()
        .map(|r| ((r.n as f64).ln(), r.mean_relative_error.ln()))
        .collect();
    let k = slope(&pts);
    let last = e.last().unwrap();
    let eps_dev = (last.mean_relative_error / last.bound - 1.0).abs();
    let fid_last = fid.ensemble.last().unwrap();
    let fid_ratio = fid_last.mean_relative_error / fid_last.bound;
    let pass = t_dev <= 0.05 && within(k, -0.5, 0.1) && eps_dev <= 0.15 && fid_ratio >= 1.5;
    verdict(
        pass,
        format!(
            "last-50 t={last50:.3} vs t_opt={:.3} ({:.1}%), slope={k:.3}, final eps={:.4} vs bound {:.4} ({:.1}%), FID/bound={fid_ratio:.2}",
            run.t_opt,
            100.0 * t_dev,
            last.mean_relative_error,
            last.bound,
            100.0 * eps_dev,
        ),
    )
}

fn property_models() -> Vec<ProbeModel> {
    let ou: Spectrum = OrnsteinUhlenbeckSpectrum::lorentzian(0.7, 4.0).unwrap().into();
    let ou4: Spectrum = OrnsteinUhlenbeckSpectrum::new(0.7, 4.0, 4).unwrap().into();
    let ohmic: Spectrum = OhmicSpectrum::new(0.3, 2.0, 2.0).unwrap().into();
    let mut models = Vec::new();
    for target in [TargetParameter::Coupling, TargetParameter::CorrelationTime] {
        for control in [ControlKind::Fid, ControlKind::Cpmg { pulses: 4 }, ControlKind::Zeno { projections: 20 }] {
            models.push(ProbeModel::new(ou, control, target).unwrap());
            models.push(ProbeModel::new(ou, control, target).unwrap().with_backend(Backend::Quadrature));
            models.push(ProbeModel::new(ou4, control, target).unwrap());
        }
        models.push(ProbeModel::new(ohmic, ControlKind::Fid, target).unwrap());
        models.push(ProbeModel::new(ohmic, ControlKind::Cw { cycles: 2 }, target).unwrap());
    }
    models
}

fn classical_fisher(r: &AttenuationResult) -> f64 {
    let (p, m) = outcome_probabilities(r.j);
    let dp = -0.5 * (-r.j).exp() * r.dj_dx;
    dp * dp / p + dp * dp / m
}

fn properties() -> Verdict {
    let models = property_models();
    let times = [0.3, 2.0, 9.0, 25.0];
    let mut failures = Vec::new();

    let mut qfi_worst: f64 = 0.0;
    let mut homog_worst: f64 = 0.0;
    let mut deriv_violations = 0;
    for m in &models {
        let x = m.true_value();
        for &t in &times {
            let r = m.result(x, t).unwrap();
            let q = qfi(&r).value();
            let c = classical_fisher(&r);
            qfi_worst = qfi_worst.max((q - c).abs() / c);

            let spec = m.spectrum();
            let scaled = ProbeModel::new(spec.with_g(3.0 * spec.g()).unwrap(), m.control(), m.target())
                .unwrap()
                .with_backend(m.backend());
            let j3 = scaled.attenuation(scaled.true_value(), t).unwrap();
            homog_worst = homog_worst.max((j3 / (9.0 * r.j) - 1.0).abs());

            let tau = spec.tau_c();
            let h = 1e-4 * tau;
            let jt = |tc: f64| {
                let s = spec.with_tau_c(tc).unwrap();
                ProbeModel::new(s, m.control(), TargetParameter::CorrelationTime)
                    .unwrap()
                    .with_backend(m.backend())
                    .attenuation(tc, t)
                    .unwrap()
            };
            let fd = (jt(tau + h) - jt(tau - h)) / (2.0 * h);
            let alpha = spec.tau_homogeneity();
            if fd.abs() > alpha * r.j / tau * (1.0 + 1e-6) {
                deriv_violations += 1;
            }
        }
    }
    if qfi_worst > 1e-10 {
        failures.push(format!("QFI vs classical {qfi_worst:.1e}"));
    }
    if homog_worst > 1e-7 {
        failures.push(format!("g^2 homogeneity {homog_worst:.1e}"));
    }
    if deriv_violations > 0 {
        failures.push(format!("{deriv_violations} derivative-bound violations"));
    }

    // Posterior normalization and order independence of updates.
    let model = ProbeModel::new(
        OrnsteinUhlenbeckSpectrum::lorentzian(1.0, 10.0).unwrap().into(),
        ControlKind::Cpmg { pulses: 8 },
        TargetParameter::CorrelationTime,
    )
    .unwrap();
    let steps = [(Outcome::Plus, 12.0), (Outcome::Minus, 20.0), (Outcome::Plus, 31.0)];
    let prior = Posterior::flat(2.0, 50.0, 512, GridSpacing::Linear).unwrap();
    let mut forward = prior.clone();
    for &(o, t) in &steps {
        forward.update(o, t, &model).unwrap();
    }
    let mut backward = prior.clone();
    for &(o, t) in steps.iter().rev() {
        backward.update(o, t, &model).unwrap();
    }
    let norm_dev = (forward.weights().iter().sum::<f64>() - 1.0).abs();
    let assoc_dev = forward
        .weights()
        .iter()
        .zip(backward.weights())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if norm_dev > 1e-12 || assoc_dev > 1e-12 {
        failures.push(format!("posterior normalization {norm_dev:.1e}, order dependence {assoc_dev:.1e}"));
    }

    // Bit-reproducibility of the adaptive command.
    let mut cfg = recipe("fig4ab.toml");
    {
        let est = cfg.estimation.as_mut().unwrap();
        est.measurements = 20;
        est.realizations = 3;
    }
    let render = |c: &ExperimentConfig| {
        let out = cmd_adaptive(c).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_trajectories(&out, &mut a).unwrap();
        write_ensemble(&out, &mut b).unwrap();
        (a, b)
    };
    if render(&cfg) != render(&cfg) {
        failures.push("adaptive output not bit-reproducible".into());
    }

    let detail = if failures.is_empty() {
        format!(
            "{} models x {} times; QFI gap {qfi_worst:.1e}, homogeneity {homog_worst:.1e}; posterior and reproducibility ok",
            models.len(),
            times.len()
        )
    } else {
        failures.join("; ")
    };
    verdict(failures.is_empty(), detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("constants", constants),
        ("oracle equivalence", oracle_equivalence),
        ("free-decay limits", free_limits),
        ("optimal-time anchors", optimal_time_anchors),
        ("ultimate-bound attainment", bound_attainment),
        ("adaptive protocol", adaptive_protocol),
        ("property suites", properties),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if let Some(f) = &filter {
            if !name.contains(f.as_str()) {
                continue;
            }
        }
        let start = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("{status} [{}] {name}: {} ({:.1?})", i + 1, v.detail, start.elapsed());
        if !v.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
