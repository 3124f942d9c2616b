//! Adaptive Bayesian estimation of a bath parameter from binary probe
//! readouts: grid posterior, expected-information-gain time selection and
//! simulated runs over many seeded realizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attenuation::{outcome_probabilities, CombControl, TargetParameter};
use crate::control::ControlKind;
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::fisher::{self, maximize_qfi_numeric, ultimate_bound, ModelCurve, ScanOptions};
use crate::model::{Backend, ProbeModel};
use crate::spectra::Spectrum;

/// Readout of the probe in the `σ_x` basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn sign(&self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GridSpacing {
    #[default]
    Linear,
    Log,
}

/// Probability masses on a fixed parameter grid. `measure` holds the
/// trapezoid cell widths, so `weights[i] / measure[i]` is a density.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    grid: Vec<f64>,
    measure: Vec<f64>,
    weights: Vec<f64>,
}

impl Posterior {
    /// Flat density on `M` points spanning `(lo, hi]`.
    pub fn flat(lo: f64, hi: f64, points: usize, spacing: GridSpacing) -> Result<Self> {
        ensure_positive("prior upper bound", hi)?;
        if !(lo >= 0.0) || hi <= lo {
            return Err(invalid("prior range", format!("needs 0 <= lo < hi, got ({lo}, {hi}]")));
        }
        if points < 2 {
            return Err(invalid("grid_points", "needs at least two points"));
        }
        let m = points as f64;
        let grid: Vec<f64> = match spacing {
            GridSpacing::Linear => (1..=points).map(|i| lo + (hi - lo) * i as f64 / m).collect(),
            GridSpacing::Log => {
                ensure_positive("prior lower bound", lo)?;
                let r = (hi / lo).ln();
                (1..=points).map(|i| lo * (r * i as f64 / m).exp()).collect()
            }
        };
        let measure = trapezoid_measure(&grid);
        let total: f64 = measure.iter().sum();
        let weights = measure.iter().map(|h| h / total).collect();
        Ok(Self { grid, measure, weights })
    }

    /// A posterior with explicit masses on `grid`, renormalized.
    pub fn from_weights(grid: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if grid.len() != weights.len() || grid.len() < 2 {
            return Err(invalid("weights", "need one weight per grid point and at least two points"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid", "must be strictly increasing"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(invalid("weights", "must be non-negative"));
        }
        let measure = trapezoid_measure(&grid);
        let mut post = Self { grid, measure, weights };
        post.normalize()?;
        Ok(post)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.grid.iter().zip(&self.weights).map(|(x, w)| x * w).sum()
    }

    pub fn std(&self) -> f64 {
        let mean = self.mean();
        let var: f64 = self
            .grid
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * (x - mean) * (x - mean))
            .sum();
        var.max(0.0).sqrt()
    }

    /// `∫ p ln p dx` of the piecewise density `w_i / h_i`.
    pub fn negentropy(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.measure)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, h)| w * (w / h).ln())
            .sum()
    }

    /// Multiply by per-point likelihoods and renormalize.
    pub fn update_with(&mut self, likelihoods: &[f64]) -> Result<()> {
        if likelihoods.len() != self.weights.len() {
            return Err(invalid("likelihoods", "need one value per grid point"));
        }
        if likelihoods.iter().all(|l| *l < 1e-300) {
            return Err(Error::PosteriorUnderflow);
        }
        for (w, l) in self.weights.iter_mut().zip(likelihoods) {
            *w *= l;
        }
        self.normalize()
    }

    /// Bayes update after observing `outcome` at control time `t`.
    pub fn update(&mut self, outcome: Outcome, t: f64, model: &ProbeModel) -> Result<()> {
        let likelihoods = self
            .grid
            .iter()
            .map(|&x| likelihood(outcome, x, t, model))
            .collect::<Result<Vec<_>>>()?;
        self.update_with(&likelihoods)
    }

    fn normalize(&mut self) -> Result<()> {
        let total: f64 = self.weights.iter().sum();
        if !(total > 1e-300) || !total.is_finite() {
            return Err(Error::PosteriorUnderflow);
        }
        for w in self.weights.iter_mut() {
            *w /= total;
        }
        Ok(())
    }
}

fn trapezoid_measure(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n { grid[i + 1] - grid[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// `p(d | x, t)` from the attenuation model.
pub fn likelihood(outcome: Outcome, x: f64, t: f64, model: &ProbeModel) -> Result<f64> {
    let (plus, minus) = outcome_probabilities(model.attenuation(x, t)?);
    Ok(match outcome {
        Outcome::Plus => plus,
        Outcome::Minus => minus,
    })
}

fn binary_entropy(p: f64) -> f64 {
    let q = 1.0 - p;
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.ln();
    }
    if q > 0.0 {
        h -= q * q.ln();
    }
    h
}

/// Expected negentropy of the posterior after one more readout, given
/// `p(+ | x_i)` on the grid: current negentropy plus the mutual information
/// between the outcome and the parameter.
pub fn utility_from_likelihoods(post: &Posterior, p_plus: &[f64]) -> f64 {
    let entropies: Vec<f64> = p_plus.iter().map(|&p| binary_entropy(p)).collect();
    post.negentropy() + mutual_information(&post.weights, p_plus, &entropies)
}

fn mutual_information(weights: &[f64], p_plus: &[f64], entropies: &[f64]) -> f64 {
    let mut marginal = 0.0;
    let mut conditional = 0.0;
    for ((w, p), h) in weights.iter().zip(p_plus).zip(entropies) {
        marginal += w * p;
        conditional += w * h;
    }
    (binary_entropy(marginal) - conditional).max(0.0)
}

/// `U(t) = Σ_d p(d|t) ∫ p(x|d,t) ln p(x|d,t) dx`, evaluated for both
/// outcomes analytically.
pub fn expected_information_gain(post: &Posterior, t: f64, model: &ProbeModel) -> Result<f64> {
    let p_plus = post
        .grid
        .iter()
        .map(|&x| likelihood(Outcome::Plus, x, t, model))
        .collect::<Result<Vec<_>>>()?;
    Ok(utility_from_likelihoods(post, &p_plus))
}

/// Candidate with the largest utility; near-ties (within `1e-14` relative)
/// go to the smallest time.
pub fn select_time(post: &Posterior, candidates: &[f64], model: &ProbeModel) -> Result<f64> {
    if candidates.is_empty() {
        return Err(invalid("candidates", "need at least one candidate time"));
    }
    let utilities = candidates
        .iter()
        .map(|&t| expected_information_gain(post, t, model))
        .collect::<Result<Vec<_>>>()?;
    Ok(candidates[argmax_first(&utilities)])
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        let b = values[best];
        if v > b + 1e-14 * b.abs() {
            best = i;
        }
    }
    best
}

/// Draw a readout with the true-parameter likelihood.
pub fn simulate_measurement<R: Rng + ?Sized>(x_true: f64, t: f64, model: &ProbeModel, rng: &mut R) -> Result<Outcome> {
    let (plus, _) = outcome_probabilities(model.attenuation(x_true, t)?);
    Ok(draw(plus, rng))
}

fn draw<R: Rng + ?Sized>(p_plus: f64, rng: &mut R) -> Outcome {
    if rng.gen::<f64>() < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// Log-spaced candidate times `[center/span, center·span]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateGrid {
    pub points: usize,
    pub span: f64,
    /// Defaults to the analytic optimal time at the prior mean.
    pub center: Option<f64>,
}

impl Default for CandidateGrid {
    fn default() -> Self {
        Self {
            points: 200,
            span: 20.0,
            center: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    /// Generating model; its spectrum holds the nuisance parameters.
    pub model: ProbeModel,
    pub true_value: f64,
    /// Attenuation backend used for the likelihood during inference.
    pub inference: Backend,
    pub prior: (f64, f64),
    pub grid_points: usize,
    pub spacing: GridSpacing,
    pub candidates: CandidateGrid,
    pub measurements: usize,
    pub seed: u64,
    pub realizations: usize,
    /// Golden-section refinement of `t_m` between neighbouring candidates.
    pub refine: bool,
}

impl AdaptiveConfig {
    /// Defaults: prior `(0.2x, 5x]`, 512 linear points, 200 candidates.
    pub fn new(model: ProbeModel, true_value: f64, measurements: usize, realizations: usize, seed: u64) -> Self {
        Self {
            model,
            true_value,
            inference: model.backend(),
            prior: (0.2 * true_value, 5.0 * true_value),
            grid_points: 512,
            spacing: GridSpacing::Linear,
            candidates: CandidateGrid::default(),
            measurements,
            seed,
            realizations,
            refine: false,
        }
    }

    fn validate(&self) -> Result<()> {
        ensure_positive("true_value", self.true_value)?;
        if !(self.true_value > self.prior.0 && self.true_value <= self.prior.1) {
            return Err(invalid("prior", "must contain the true value"));
        }
        if self.grid_points < 64 {
            return Err(invalid("grid_points", "needs at least 64 points"));
        }
        if self.realizations == 0 {
            return Err(invalid("realizations", "needs at least one realization"));
        }
        if self.candidates.points < 2 || !(self.candidates.span > 1.0) {
            return Err(invalid("candidates", "need at least two points and a span > 1"));
        }
        Ok(())
    }

    pub fn inference_model(&self) -> ProbeModel {
        self.model.with_backend(self.inference)
    }
}

/// Analytic optimal time for the model at parameter value `x`, falling back
/// to a numeric scan when no closed form applies.
pub fn estimate_optimal_time(model: &ProbeModel, x: f64) -> Result<f64> {
    let spectrum = model.spectrum_at(x)?;
    let (g, tau) = (spectrum.g(), spectrum.tau_c());
    let analytic = match (model.control(), model.target(), &spectrum) {
        (ControlKind::Zeno { projections }, TargetParameter::Coupling, _) => {
            Some(fisher::t_opt_zeno(g, tau, projections)?.t)
        }
        (kind @ (ControlKind::Cpmg { .. } | ControlKind::Cw { .. }), TargetParameter::CorrelationTime, Spectrum::OrnsteinUhlenbeck(ou)) => {
            let opt = fisher::t_opt_beta(g, tau, ou.beta(), kind.count(), CombControl::try_from(kind)?)?;
            opt.within_regime.then_some(opt.t)
        }
        (ControlKind::Cw { cycles }, TargetParameter::CorrelationTime, Spectrum::Ohmic(ohmic)) if (ohmic.s() - 1.0).abs() > 1e-9 => {
            let opt = fisher::t_opt_ohmic(g, tau, ohmic.s(), cycles)?;
            opt.within_regime.then_some(opt.t)
        }
        _ => None,
    };
    if let Some(t) = analytic {
        return Ok(t);
    }
    let scale = 1.0 / g;
    let curve = ModelCurve { model, x };
    Ok(maximize_qfi_numeric(&curve, (1e-3 * scale, 1e3 * scale), &ScanOptions::default())?.t_opt)
}

/// One row per measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    /// 1-based measurement index.
    pub index: usize,
    pub t: f64,
    pub outcome: Outcome,
    pub mean: f64,
    pub std: f64,
    /// Posterior std / posterior mean.
    pub relative_error: f64,
    pub method: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub realization: usize,
    pub rows: Vec<TrajectoryRow>,
    pub posterior: Posterior,
}

/// Cross-realization statistics after `n` measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleRow {
    pub n: usize,
    pub mean_t: f64,
    pub mean_estimate: f64,
    /// Mean over realizations of posterior std / mean.
    pub mean_relative_error: f64,
    /// Root-mean-square error of the posterior mean, relative to the truth.
    pub relative_rmse: f64,
    pub t_opt: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub trajectories: Vec<Trajectory>,
    pub ensemble: Vec<EnsembleRow>,
    pub candidates: Vec<f64>,
    /// Numerically optimal time at the true value.
    pub t_opt: f64,
    pub alpha: f64,
}

/// Likelihoods of `+` over the grid for every candidate time, with the
/// outcome entropies, shared by all realizations.
struct Tables {
    p_plus: Vec<Vec<f64>>,
    entropy: Vec<Vec<f64>>,
    methods: Vec<&'static str>,
    truth: Vec<f64>,
}

fn build_tables(config: &AdaptiveConfig, grid: &[f64], candidates: &[f64]) -> Result<Tables> {
    let inference = config.inference_model();
    let rows = candidates
        .par_iter()
        .map(|&t| {
            let mut p = Vec::with_capacity(grid.len());
            let mut method: Option<&'static str> = None;
            for &x in grid {
                let e = inference.evaluate(x, t)?;
                p.push(outcome_probabilities(e.attenuation.j).0);
                let name = e.method.name();
                method = match method {
                    None => Some(name),
                    Some(m) if m == name => Some(m),
                    Some(_) => Some("mixed"),
                };
            }
            let h = p.iter().map(|&q| binary_entropy(q)).collect();
            let truth = outcome_probabilities(config.model.attenuation(config.true_value, t)?).0;
            Ok((p, h, method.unwrap_or("none"), truth))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tables = Tables {
        p_plus: Vec::with_capacity(rows.len()),
        entropy: Vec::with_capacity(rows.len()),
        methods: Vec::with_capacity(rows.len()),
        truth: Vec::with_capacity(rows.len()),
    };
    for (p, h, m, truth) in rows {
        tables.p_plus.push(p);
        tables.entropy.push(h);
        tables.methods.push(m);
        tables.truth.push(truth);
    }
    Ok(tables)
}

/// Run the select-measure-update loop `measurements` times for each of
/// `realizations` independent seeded realizations.
pub fn run_protocol(config: &AdaptiveConfig) -> Result<ProtocolRun> {
    config.validate()?;
    let prior = Posterior::flat(config.prior.0, config.prior.1, config.grid_points, config.spacing)?;
    let center = match config.candidates.center {
        Some(c) => c,
        None => estimate_optimal_time(&config.inference_model(), prior.mean())?,
    };
    let span = config.candidates.span;
    let candidates = fisher::log_grid(center / span, center * span, config.candidates.points)?;

    let curve = ModelCurve {
        model: &config.model,
        x: config.true_value,
    };
    let t_opt = maximize_qfi_numeric(&curve, (candidates[0], candidates[candidates.len() - 1]), &ScanOptions::default())
        .map(|r| r.t_opt)
        .unwrap_or(f64::NAN);
    let alpha = config.model.alpha();

    let tables = if config.measurements > 0 {
        Some(build_tables(config, prior.grid(), &candidates)?)
    } else {
        None
    };

    let trajectories = (0..config.realizations)
        .into_par_iter()
        .map(|r| run_realization(config, &prior, &candidates, tables.as_ref(), r))
        .collect::<Result<Vec<_>>>()?;

    let ensemble = (1..=config.measurements)
        .map(|n| {
            let rows: Vec<&TrajectoryRow> = trajectories.iter().map(|tr| &tr.rows[n - 1]).collect();
            let count = rows.len() as f64;
            let mean_t = rows.iter().map(|r| r.t).sum::<f64>() / count;
            let mean_estimate = rows.iter().map(|r| r.mean).sum::<f64>() / count;
            let mean_relative_error = rows.iter().map(|r| r.relative_error).sum::<f64>() / count;
            let mse = rows
                .iter()
                .map(|r| (r.mean - config.true_value).powi(2))
                .sum::<f64>()
                / count;
            Ok(EnsembleRow {
                n,
                mean_t,
                mean_estimate,
                mean_relative_error,
                relative_rmse: mse.sqrt() / config.true_value,
                t_opt,
                bound: ultimate_bound(alpha, n as u64)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ProtocolRun {
        trajectories,
        ensemble,
        candidates,
        t_opt,
        alpha,
    })
}

fn run_realization(
    config: &AdaptiveConfig,
    prior: &Posterior,
    candidates: &[f64],
    tables: Option<&Tables>,
    realization: usize,
) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(realization as u64);
    let mut post = prior.clone();
    let mut rows = Vec::with_capacity(config.measurements);
    let Some(tables) = tables else {
        return Ok(Trajectory {
            realization,
            rows,
            posterior: post,
        });
    };
    let inference = config.inference_model();
    let mut utilities = vec![0.0; candidates.len()];

    for index in 1..=config.measurements {
        for (c, u) in utilities.iter_mut().enumerate() {
            *u = mutual_information(&post.weights, &tables.p_plus[c], &tables.entropy[c]);
        }
        let c = argmax_first(&utilities);
        let mut t = candidates[c];
        let mut method = tables.methods[c];
        let refined = if config.refine && c > 0 && c + 1 < candidates.len() {
            let objective = |u: f64| expected_information_gain(&post, u.exp(), &inference);
            let (u, v) = fisher::golden_section(objective, candidates[c - 1].ln(), candidates[c + 1].ln(), 1e-6)?;
            (v > utilities[c] + post.negentropy()).then(|| u.exp())
        } else {
            None
        };
        let outcome = match refined {
            Some(tr) => {
                t = tr;
                method = inference.evaluate(post.mean(), t)?.method.name();
                let outcome = simulate_measurement(config.true_value, t, &config.model, &mut rng)?;
                post.update(outcome, t, &inference)?;
                outcome
            }
            None => {
                let outcome = draw(tables.truth[c], &mut rng);
                let likelihoods: Vec<f64> = match outcome {
                    Outcome::Plus => tables.p_plus[c].clone(),
                    Outcome::Minus => tables.p_plus[c].iter().map(|p| 1.0 - p).collect(),
                };
                post.update_with(&likelihoods)?;
                outcome
            }
        };
        let mean = post.mean();
        let std = post.std();
        rows.push(TrajectoryRow {
            index,
            t,
            outcome,
            mean,
            std,
            relative_error: std / mean,
            method,
        });
    }
    Ok(Trajectory {
        realization,
        rows,
        posterior: post,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::OrnsteinUhlenbeckSpectrum;

    fn fid_model() -> ProbeModel {
        let s = OrnsteinUhlenbeckSpectrum::lorentzian(1.0, 10.0).unwrap();
        ProbeModel::new(s.into(), ControlKind::Fid, TargetParameter::Coupling).unwrap()
    }

    #[test]
    fn flat_prior() {
        let p = Posterior::flat(0.0, 2.0, 200, GridSpacing::Linear).unwrap();
        assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p.mean() - 1.0).abs() < 2.0 / 200.0);
        assert_eq!(p.grid()[199], 2.0);
        assert!(p.grid()[0] > 0.0);
        let lg = Posterior::flat(0.1, 10.0, 100, GridSpacing::Log).unwrap();
        assert!((lg.grid()[99] - 10.0).abs() < 1e-12);
        assert!((lg.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_prior_has_least_negentropy() {
        let p = Posterior::flat(1.0, 3.0, 64, GridSpacing::Linear).unwrap();
        let mut w = p.weights().to_vec();
        w[10] *= 1.5;
        let q = Posterior::from_weights(p.grid().to_vec(), w).unwrap();
        assert!(q.negentropy() > p.negentropy());
    }

    #[test]
    fn likelihood_limits() {
        let m = fid_model();
        assert!((likelihood(Outcome::Plus, 1.0, 1e-9, &m).unwrap() - 1.0).abs() < 1e-15);
        assert!((likelihood(Outcome::Minus, 1.0, 1e3, &m).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_likelihood_is_identity() {
        let mut p = Posterior::flat(0.5, 2.0, 64, GridSpacing::Linear).unwrap();
        let before = p.clone();
        p.update_with(&vec![0.3; 64]).unwrap();
        for (a, b) in p.weights().iter().zip(before.weights()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn underflow_is_reported() {
        let mut p = Posterior::flat(0.5, 2.0, 64, GridSpacing::Linear).unwrap();
        assert_eq!(p.update_with(&vec![0.0; 64]).unwrap_err(), Error::PosteriorUnderflow);
    }

    #[test]
    fn two_point_split_gains_ln2() {
        let grid = vec![1.0, 2.0];
        let post = Posterior::from_weights(grid, vec![0.5, 0.5]).unwrap();
        let gain = utility_from_likelihoods(&post, &[1.0, 0.0]) - post.negentropy();
        assert!((gain - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn degenerate_posterior_picks_smallest_candidate() {
        let m = fid_model();
        let mut w = vec![0.0; 64];
        w[20] = 1.0;
        let grid: Vec<f64> = (1..=64).map(|i| i as f64 / 32.0).collect();
        let post = Posterior::from_weights(grid, w).unwrap();
        let t = select_time(&post, &[0.5, 1.0, 2.0], &m).unwrap();
        assert_eq!(t, 0.5);
    }

    #[test]
    fn seeded_draws_repeat() {
        let m = fid_model();
        let seq = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| simulate_measurement(1.0, 0.8, &m, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(seq(7), seq(7));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| simulate_measurement(1.0, 1e-12, &m, &mut rng).unwrap() == Outcome::Plus));
    }

    #[test]
    fn empty_run_keeps_prior() {
        let config = AdaptiveConfig::new(fid_model(), 1.0, 0, 3, 11);
        let run = run_protocol(&config).unwrap();
        let prior = Posterior::flat(0.2, 5.0, 512, GridSpacing::Linear).unwrap();
        assert!(run.ensemble.is_empty());
        for tr in &run.trajectories {
            assert!(tr.rows.is_empty());
            assert_eq!(tr.posterior, prior);
        }
    }

    #[test]
    fn run_is_reproducible() {
        let mut config = AdaptiveConfig::new(fid_model(), 1.0, 20, 2, 99);
        config.grid_points = 128;
        config.candidates.points = 40;
        let a = run_protocol(&config).unwrap();
        let b = run_protocol(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trajectories[0].rows.len(), 20);
        assert_ne!(a.trajectories[0].rows, a.trajectories[1].rows);
    }
}
