//! Quantum Fisher information of the dephased probe, Cramér-Rao errors,
//! the ultimate precision bounds and optimal measurement times.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::attenuation::{c_beta, c_s, AttenuationResult, CombControl};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::model::ProbeModel;
use crate::special::lambert_w0;
use crate::spectra::PowerLawAttenuationModel;

/// Fisher information, with divergence kept explicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Information {
    Finite(f64),
    Infinite,
}

impl Information {
    pub fn value(&self) -> f64 {
        match *self {
            Information::Finite(v) => v,
            Information::Infinite => f64::INFINITY,
        }
    }
}

/// Relative error `δx/x`, with the degenerate ends kept explicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelativeError {
    Finite(f64),
    /// Infinite information.
    Zero,
    /// No information.
    Unbounded,
}

impl RelativeError {
    pub fn value(&self) -> f64 {
        match *self {
            RelativeError::Finite(v) => v,
            RelativeError::Zero => 0.0,
            RelativeError::Unbounded => f64::INFINITY,
        }
    }
}

/// `J₀`, `ε₀` (homogeneous attenuation) and `J₁`, `ε₁` (power-law exponent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub j0: f64,
    pub eps0: f64,
    pub j1: f64,
    pub eps1: f64,
}

/// `√(1 - e^{-2J}) / (J e^{-J})`, the error of a homogeneous estimate at
/// attenuation `J` times `α √N_m`.
pub fn homogeneous_error_factor(j: f64) -> f64 {
    (-(-2.0 * j).exp_m1()).sqrt() / (j * (-j).exp())
}

/// `√(1 - e^{-2J}) / (J |ln J| e^{-J})`, the corresponding factor when the
/// exponent of a power-law attenuation is estimated.
pub fn exponent_error_factor(j: f64) -> f64 {
    homogeneous_error_factor(j) / j.ln().abs()
}

pub fn bound_constants() -> BoundConstants {
    static CONSTANTS: OnceLock<BoundConstants> = OnceLock::new();
    *CONSTANTS.get_or_init(|| {
        let w = lambert_w0(-2.0 * (-2.0f64).exp()).expect("argument lies above -1/e");
        let j0 = 1.0 + 0.5 * w;
        // ε(J) with the |ln J| factor is unimodal on (0, 1); minimize in ln J.
        let (ln_j1, _) = golden_section(|u| Ok(-exponent_error_factor(u.exp())), (1e-4f64).ln(), (0.9f64).ln(), 1e-13)
            .expect("objective is total");
        let j1 = ln_j1.exp();
        BoundConstants {
            j0,
            eps0: homogeneous_error_factor(j0),
            j1,
            eps1: exponent_error_factor(j1),
        }
    })
}

/// `F_Q = e^{-2J} / (1 - e^{-2J}) (∂J/∂x)²`.
pub fn qfi(result: &AttenuationResult) -> Information {
    let j = result.j;
    let d = result.dj_dx;
    if d == 0.0 {
        return Information::Finite(0.0);
    }
    if j <= 0.0 {
        return Information::Infinite;
    }
    let denom = if j < 1e-6 {
        2.0 * j * (1.0 - j * (1.0 - 2.0 * j / 3.0))
    } else {
        -(-2.0 * j).exp_m1()
    };
    Information::Finite((-2.0 * j).exp() / denom * d * d)
}

/// Cramér-Rao relative error `1 / (x √(N_m F_Q))`.
pub fn relative_error(qfi: Information, x: f64, n_m: u64) -> Result<RelativeError> {
    ensure_positive("x", x)?;
    if n_m == 0 {
        return Err(invalid("n_m", "needs at least one measurement"));
    }
    Ok(match qfi {
        Information::Infinite => RelativeError::Zero,
        Information::Finite(f) if f <= 0.0 => RelativeError::Unbounded,
        Information::Finite(f) => RelativeError::Finite(1.0 / (x * (n_m as f64 * f).sqrt())),
    })
}

/// `ε₀ / (α √N_m)`.
pub fn ultimate_bound(alpha: f64, n_m: u64) -> Result<f64> {
    ensure_positive("alpha", alpha)?;
    if n_m == 0 {
        return Err(invalid("n_m", "needs at least one measurement"));
    }
    Ok(bound_constants().eps0 / (alpha * (n_m as f64).sqrt()))
}

/// `ε₁ / √N_m`, the bound for a power-law exponent.
pub fn exponent_bound(n_m: u64) -> Result<f64> {
    if n_m == 0 {
        return Err(invalid("n_m", "needs at least one measurement"));
    }
    Ok(bound_constants().eps1 / (n_m as f64).sqrt())
}

/// An analytic optimal time and whether the regime it assumes holds there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalTime {
    pub t: f64,
    pub within_regime: bool,
}

/// `t = √(2 N J₀) / g`; the regime needs `N ≫ 2 J₀ / (g² τ_c²)`, checked
/// as a factor of ten.
pub fn t_opt_zeno(g: f64, tau_c: f64, n: u32) -> Result<OptimalTime> {
    ensure_positive("g", g)?;
    ensure_positive("tau_c", tau_c)?;
    if n == 0 {
        return Err(invalid("n", "needs at least one projection"));
    }
    let j0 = bound_constants().j0;
    let nf = n as f64;
    Ok(OptimalTime {
        t: (2.0 * nf * j0).sqrt() / g,
        within_regime: nf >= 10.0 * 2.0 * j0 / (g * g * tau_c * tau_c),
    })
}

/// `t = τ_c (N^β J₀ / (c_β g² τ_c²))^{1/(β+1)}`; flagged unless the first
/// harmonic sits in the tail, `t/(πN) <= τ_c/10`.
pub fn t_opt_beta(g: f64, tau_c: f64, beta: u32, n: u32, control: CombControl) -> Result<OptimalTime> {
    ensure_positive("g", g)?;
    ensure_positive("tau_c", tau_c)?;
    if n == 0 {
        return Err(invalid("n", "needs at least one pulse or cycle"));
    }
    let c = c_beta(beta, control)?;
    let b = beta as f64;
    let nf = n as f64;
    let j0 = bound_constants().j0;
    let t = tau_c * (nf.powf(b) * j0 / (c * g * g * tau_c * tau_c)).powf(1.0 / (b + 1.0));
    Ok(OptimalTime {
        t,
        within_regime: t / (std::f64::consts::PI * nf) <= 0.1 * tau_c,
    })
}

/// `N` separating the Ohmic windows: super-Ohmic (`s > 1`) optima need more
/// cycles than `J₀ π^{s-1} / (c_s g² τ_c²)`, sub-Ohmic ones fewer.
pub fn ohmic_cycle_threshold(g: f64, tau_c: f64, s: f64) -> f64 {
    let c = c_s(s, 1, CombControl::Cw);
    bound_constants().j0 * std::f64::consts::PI.powf(s - 1.0) / (c * g * g * tau_c * tau_c)
}

/// `t = τ_c (c_s g² τ_c² N^s / J₀)^{1/(s-1)}` under CW control; flagged
/// unless the single harmonic lies below the cutoff, `t/(πN) > τ_c`.
/// The Ohmic point `s = 1` has no optimal time and is rejected.
pub fn t_opt_ohmic(g: f64, tau_c: f64, s: f64, n: u32) -> Result<OptimalTime> {
    ensure_positive("g", g)?;
    ensure_positive("tau_c", tau_c)?;
    ensure_positive("s", s)?;
    if (s - 1.0).abs() < 1e-9 {
        return Err(invalid("s", "J is independent of t for s = 1; use the N condition instead"));
    }
    if n == 0 {
        return Err(invalid("n", "needs at least one cycle"));
    }
    let c = c_s(s, 1, CombControl::Cw);
    let nf = n as f64;
    let t = tau_c * (c * g * g * tau_c * tau_c * nf.powf(s) / bound_constants().j0).powf(1.0 / (s - 1.0));
    Ok(OptimalTime {
        t,
        within_regime: t / (std::f64::consts::PI * nf) > tau_c,
    })
}

/// `t = T₂ J₁^{1/γ}`.
pub fn t_opt_powerlaw(t2: f64, gamma: f64) -> Result<f64> {
    ensure_positive("t2", t2)?;
    ensure_positive("gamma", gamma)?;
    Ok(t2 * bound_constants().j1.powf(1.0 / gamma))
}

/// `t = J₀ / (g² τ_c)` in the Markovian regime.
pub fn t_opt_markovian(g: f64, tau_c: f64) -> Result<f64> {
    ensure_positive("g", g)?;
    ensure_positive("tau_c", tau_c)?;
    Ok(bound_constants().j0 / (g * g * tau_c))
}

/// `J(t)` and `∂J/∂x` of a probe at a fixed parameter value.
pub trait AttenuationCurve: Sync {
    fn evaluate(&self, t: f64) -> Result<AttenuationResult>;

    /// Value `x` of the estimated parameter.
    fn parameter(&self) -> f64;

    /// Homogeneity degree `α`, when `J` has one in the estimated parameter.
    fn alpha(&self) -> Option<f64>;

    /// Single-measurement floor on the relative error.
    fn bound(&self) -> f64 {
        match self.alpha() {
            Some(a) => bound_constants().eps0 / a,
            None => bound_constants().eps1,
        }
    }
}

/// A [`ProbeModel`] at a fixed parameter value.
#[derive(Debug, Clone, Copy)]
pub struct ModelCurve<'a> {
    pub model: &'a ProbeModel,
    pub x: f64,
}

impl AttenuationCurve for ModelCurve<'_> {
    fn evaluate(&self, t: f64) -> Result<AttenuationResult> {
        self.model.result(self.x, t)
    }

    fn parameter(&self) -> f64 {
        self.x
    }

    fn alpha(&self) -> Option<f64> {
        Some(self.model.alpha())
    }
}

/// Which parameter of `J = (t/T₂)^γ` is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PowerLawTarget {
    T2,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawCurve {
    pub model: PowerLawAttenuationModel,
    pub target: PowerLawTarget,
}

impl AttenuationCurve for PowerLawCurve {
    fn evaluate(&self, t: f64) -> Result<AttenuationResult> {
        let j = self.model.attenuation(t);
        let d = match self.target {
            PowerLawTarget::T2 => self.model.d_dt2(t),
            PowerLawTarget::Gamma => self.model.d_dgamma(t),
        };
        Ok(AttenuationResult::new(j, d))
    }

    fn parameter(&self) -> f64 {
        match self.target {
            PowerLawTarget::T2 => self.model.t2(),
            PowerLawTarget::Gamma => self.model.gamma(),
        }
    }

    fn alpha(&self) -> Option<f64> {
        match self.target {
            PowerLawTarget::T2 => Some(self.model.gamma()),
            PowerLawTarget::Gamma => None,
        }
    }
}

/// Quantity maximized over `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// `F_Q(t)`, information per measurement.
    PerMeasurement,
    /// `F_Q(t) / t`, information per unit probe time.
    PerTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub points: usize,
    /// Relative width in `ln t` at which golden-section refinement stops.
    pub tolerance: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            points: 400,
            tolerance: 1e-9,
        }
    }
}

/// Precision reached at the optimum of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionReport {
    pub t_opt: f64,
    pub attenuation: AttenuationResult,
    pub qfi: Information,
    /// Per-measurement relative error (`N_m = 1`).
    pub relative_error: RelativeError,
    pub ultimate_bound: f64,
    pub alpha: Option<f64>,
    /// Value of the maximized objective.
    pub objective: f64,
}

/// One point of a time scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub t: f64,
    pub attenuation: AttenuationResult,
    pub qfi: Information,
    pub relative_error: RelativeError,
}

fn objective_at(curve: &dyn AttenuationCurve, objective: Objective, t: f64) -> Result<f64> {
    let info = qfi(&curve.evaluate(t)?).value();
    Ok(match objective {
        Objective::PerMeasurement => info,
        Objective::PerTime => info / t,
    })
}

/// `n` log-spaced times over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    ensure_positive("t_min", lo)?;
    ensure_positive("t_max", hi)?;
    if hi <= lo || n < 2 {
        return Err(invalid("t_range", "needs t_min < t_max and at least two points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// Attenuation, QFI and per-measurement error at each time.
pub fn scan(curve: &dyn AttenuationCurve, times: &[f64]) -> Result<Vec<ScanPoint>> {
    let x = curve.parameter();
    times
        .par_iter()
        .map(|&t| {
            let attenuation = curve.evaluate(t)?;
            let info = qfi(&attenuation);
            Ok(ScanPoint {
                t,
                attenuation,
                qfi: info,
                relative_error: relative_error(info, x, 1)?,
            })
        })
        .collect()
}

/// Maximize `F_Q(t)` over a log grid on `t_range`, then refine by golden
/// section between the neighbours of the best grid point. Ties go to the
/// smallest `t`.
pub fn maximize_qfi_numeric(
    curve: &dyn AttenuationCurve,
    t_range: (f64, f64),
    options: &ScanOptions,
) -> Result<PrecisionReport> {
    maximize(curve, t_range, options, Objective::PerMeasurement)
}

/// As [`maximize_qfi_numeric`] for `F_Q(t) / t`.
pub fn maximize_qfi_per_time(
    curve: &dyn AttenuationCurve,
    t_range: (f64, f64),
    options: &ScanOptions,
) -> Result<PrecisionReport> {
    maximize(curve, t_range, options, Objective::PerTime)
}

pub fn maximize(
    curve: &dyn AttenuationCurve,
    t_range: (f64, f64),
    options: &ScanOptions,
    objective: Objective,
) -> Result<PrecisionReport> {
    let times = log_grid(t_range.0, t_range.1, options.points)?;
    let values: Vec<f64> = times
        .par_iter()
        .map(|&t| objective_at(curve, objective, t))
        .collect::<Result<_>>()?;

    let (mut best, mut lo_val, mut hi_val) = (0, f64::INFINITY, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > hi_val {
            hi_val = v;
            best = i;
        }
        lo_val = lo_val.min(v);
    }
    if !(hi_val > 0.0) || hi_val - lo_val <= 1e-12 * hi_val.abs() {
        return Err(Error::FlatObjective);
    }

    let mut t_best = times[best];
    let mut v_best = hi_val;
    if hi_val.is_finite() {
        let a = times[best.saturating_sub(1)].ln();
        let b = times[(best + 1).min(times.len() - 1)].ln();
        if b > a {
            let (u, v) = golden_section(|u| objective_at(curve, objective, u.exp()), a, b, options.tolerance)?;
            if v > v_best {
                t_best = u.exp();
                v_best = v;
            }
        }
    }

    let attenuation = curve.evaluate(t_best)?;
    let info = qfi(&attenuation);
    Ok(PrecisionReport {
        t_opt: t_best,
        attenuation,
        qfi: info,
        relative_error: relative_error(info, curve.parameter(), 1)?,
        ultimate_bound: curve.bound(),
        alpha: curve.alpha(),
        objective: v_best,
    })
}

/// Golden-section search for a maximum of `f` on `[a, b]`; returns the best
/// abscissa seen and its value.
pub(crate) fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let scale = a.abs().max(b.abs()).max(1.0);
    while (b - a).abs() > tol * scale {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}
