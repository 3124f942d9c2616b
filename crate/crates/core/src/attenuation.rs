//! Attenuation factor `J(x, t) = ∫ F_t(ω) G(x, ω) dω`: quadrature, the exact
//! Lorentzian time-domain sum, and the closed-form regimes.

use std::f64::consts::PI;

use crate::control::{ControlKind, ControlSequence};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::quadrature::{self, Options};
use crate::spectra::{OrnsteinUhlenbeckSpectrum, Spectrum};
use crate::special::zeta;

/// Parameter of the bath being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetParameter {
    /// Coupling strength `g`.
    Coupling,
    /// Correlation time `τ_c`.
    CorrelationTime,
}

impl TargetParameter {
    pub fn name(&self) -> &'static str {
        match self {
            TargetParameter::Coupling => "g",
            TargetParameter::CorrelationTime => "tau_c",
        }
    }
}

/// `J` and its derivative with respect to one target parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuationResult {
    pub j: f64,
    pub dj_dx: f64,
    /// False when a closed form is evaluated outside the regime it assumes.
    pub within_regime: bool,
}

impl AttenuationResult {
    pub fn new(j: f64, dj_dx: f64) -> Self {
        Self {
            j,
            dj_dx,
            within_regime: true,
        }
    }

    /// `⟨σ_x⟩ = e^{-J}`.
    pub fn coherence(&self) -> f64 {
        (-self.j).exp()
    }

    pub fn p_plus(&self) -> f64 {
        outcome_probabilities(self.j).0
    }

    pub fn p_minus(&self) -> f64 {
        outcome_probabilities(self.j).1
    }
}

/// `J` with both parameter derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attenuation {
    pub j: f64,
    pub dj_dg: f64,
    pub dj_dtau: f64,
    pub within_regime: bool,
}

impl Attenuation {
    fn exact(j: f64, dj_dg: f64, dj_dtau: f64) -> Self {
        Self {
            j,
            dj_dg,
            dj_dtau,
            within_regime: true,
        }
    }

    pub fn for_target(&self, target: TargetParameter) -> AttenuationResult {
        AttenuationResult {
            j: self.j,
            dj_dx: match target {
                TargetParameter::Coupling => self.dj_dg,
                TargetParameter::CorrelationTime => self.dj_dtau,
            },
            within_regime: self.within_regime,
        }
    }
}

/// `p± = (1 ± e^{-J}) / 2`.
pub fn outcome_probabilities(j: f64) -> (f64, f64) {
    let c = (-j).exp();
    let minus = -0.5 * (-j).exp_m1();
    (0.5 * (1.0 + c), minus)
}

/// Controls that produce a harmonic comb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombControl {
    Cw,
    Cpmg,
}

impl TryFrom<ControlKind> for CombControl {
    type Error = Error;

    fn try_from(kind: ControlKind) -> Result<Self> {
        match kind {
            ControlKind::Cw { .. } => Ok(CombControl::Cw),
            ControlKind::Cpmg { .. } => Ok(CombControl::Cpmg),
            other => Err(Error::UnsupportedControl {
                operation: "harmonic comb",
                control: other.name(),
            }),
        }
    }
}

/// Tolerances and budget for [`attenuation_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Target error relative to `∫|F G|` (and `∫|F ∂G/∂τ_c|`).
    pub rel_tol: f64,
    /// Largest truncated tail, relative to `J`, for the Ornstein-Uhlenbeck family.
    pub tail_tol: f64,
    /// Cap on the number of linear panels laid out before adaptive refinement.
    pub max_panels: usize,
    pub max_evaluations: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            tail_tol: 1e-9,
            max_panels: 20_000,
            max_evaluations: 6_000_000,
        }
    }
}

/// Quadrature estimate together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureReport {
    pub attenuation: Attenuation,
    /// Error bound on `J` (panel errors plus tail uncertainty).
    pub error_bound: f64,
    /// Contribution of the analytically averaged tail beyond the last panel.
    pub tail: f64,
    pub upper_limit: f64,
    pub evaluations: usize,
}

/// `J = ∫ F_t(ω) G(ω) dω` with `F` the exact filter of `sequence`, together
/// with `dJ/dτ_c` (same quadrature on `∂G/∂τ_c`) and `dJ/dg = 2J/g`.
///
/// Ornstein-Uhlenbeck spectra are integrated over `[0, Ω]` and doubled, with
/// `Ω` grown until the averaged tail falls below `tail_tol · J`; the remaining
/// tail is added from the filter's averaged envelope. Ohmic spectra are
/// integrated over `(0, ω_c)`, and the derivative picks up the moving-cutoff
/// term `-F(ω_c) g² (s+1) / τ_c`.
pub fn attenuation_quadrature(
    spectrum: &Spectrum,
    sequence: &ControlSequence,
    options: &QuadratureOptions,
) -> Result<QuadratureReport> {
    let tau = spectrum.tau_c();
    let g = spectrum.g();
    let spacing = sequence.zero_spacing();
    let integrand = |w: f64| {
        let f = sequence.filter(w);
        [f * spectrum.eval(w), f * spectrum.d_dtau(w)]
    };
    let opts = |abs_tol: [f64; 2]| Options {
        rel_tol: options.rel_tol,
        abs_tol,
        max_evaluations: options.max_evaluations,
    };

    match spectrum {
        Spectrum::Ohmic(ohmic) => {
            let cutoff = ohmic.cutoff();
            let breaks = breakpoints(spacing, tau, cutoff, options.max_panels);
            let out = quadrature::integrate(&integrand, &breaks, &opts([0.0; 2]));
            let boundary = -sequence.filter(cutoff) * g * g * (ohmic.s() + 1.0) / tau;
            let j = out.value[0];
            if !out.converged {
                return Err(Error::QuadratureNonConvergence {
                    estimate: j,
                    error_bound: out.error[0],
                });
            }
            Ok(QuadratureReport {
                attenuation: Attenuation::exact(j, 2.0 * j / g, out.value[1] + boundary),
                error_bound: out.error[0],
                tail: 0.0,
                upper_limit: cutoff,
                evaluations: out.evaluations,
            })
        }
        Spectrum::OrnsteinUhlenbeck(_) => {
            let scale = sequence.characteristic_frequency().max(1.0 / tau).max(spacing);
            let first = spacing * (16.0 * scale / spacing).ceil();
            let breaks = breakpoints(spacing, tau, first, options.max_panels);
            let head = quadrature::integrate(&integrand, &breaks, &opts([0.0; 2]));
            let mut value = head.value;
            let mut error = head.error;
            let mut evaluations = head.evaluations;
            let mut converged = head.converged;

            let tail_opts = opts([0.0; 2]);
            let averaged_tail = |from: f64| {
                let env = |w: f64| {
                    let (_, mean) = sequence.tail_envelope(w);
                    [mean * spectrum.eval(w), mean * spectrum.d_dtau(w)]
                };
                quadrature::integrate_to_infinity(&env, from, &tail_opts)
            };
            let envelope_gap = |from: f64| {
                let env = |w: f64| {
                    let (upper, mean) = sequence.tail_envelope(w);
                    [(upper - mean) * spectrum.eval(w)]
                };
                let opts = Options {
                    rel_tol: 1e-3,
                    abs_tol: [0.0],
                    max_evaluations: options.max_evaluations,
                };
                quadrature::integrate_to_infinity(&env, from, &opts).value[0]
            };

            let panel_cap = spacing * options.max_panels as f64;
            let mut upper = first;
            let mut tail = averaged_tail(upper);
            evaluations += tail.evaluations;
            while tail.value[0] > options.tail_tol * value[0].abs() && upper < panel_cap {
                let next = (4.0 * upper).min(panel_cap.max(upper));
                let next = spacing * (next / spacing).ceil();
                if next <= upper {
                    break;
                }
                let linear: Vec<f64> = linear_breaks(upper, next, spacing, options.max_panels);
                let band = quadrature::integrate(
                    &integrand,
                    &linear,
                    &opts([options.rel_tol * head.magnitude[0], options.rel_tol * head.magnitude[1]]),
                );
                for d in 0..2 {
                    value[d] += band.value[d];
                    error[d] += band.error[d];
                }
                evaluations += band.evaluations;
                converged &= band.converged;
                upper = next;
                tail = averaged_tail(upper);
                evaluations += tail.evaluations;
            }
            let gap = envelope_gap(upper);
            let j = 2.0 * (value[0] + tail.value[0]);
            let error_bound = 2.0 * (error[0] + gap + tail.error[0]);
            if !converged {
                return Err(Error::QuadratureNonConvergence {
                    estimate: j,
                    error_bound,
                });
            }
            Ok(QuadratureReport {
                attenuation: Attenuation::exact(j, 2.0 * j / g, 2.0 * (value[1] + tail.value[1])),
                error_bound,
                tail: 2.0 * tail.value[0],
                upper_limit: upper,
                evaluations,
            })
        }
    }
}

/// `0`, log-spaced points below the first filter zero (8 per decade from
/// `1e-4` of the smaller spectral or filter scale), then the filter zeros up
/// to `upper`.
fn breakpoints(spacing: f64, tau: f64, upper: f64, max_panels: usize) -> Vec<f64> {
    let knee = spacing.min(upper);
    let lo = 1e-4 * spacing.min(1.0 / tau).min(upper);
    let mut breaks = vec![0.0];
    let decades = (knee / lo).log10();
    let steps = (8.0 * decades).ceil().max(1.0) as usize;
    for i in 0..steps {
        breaks.push(lo * 10f64.powf(decades * i as f64 / steps as f64));
    }
    breaks.extend(linear_breaks(knee, upper, spacing, max_panels));
    breaks
}

/// `from, from + h, ..., upper` with `h` a multiple of `spacing` chosen so at
/// most `max_panels` panels are produced.
fn linear_breaks(from: f64, upper: f64, spacing: f64, max_panels: usize) -> Vec<f64> {
    let count = ((upper - from) / spacing).ceil().max(0.0);
    let stride = (count / max_panels as f64).ceil().max(1.0);
    let step = spacing * stride;
    let mut breaks = vec![from];
    let mut k = 1.0;
    while from + k * step < upper * (1.0 - 1e-12) {
        breaks.push(from + k * step);
        k += 1.0;
    }
    breaks.push(upper);
    breaks
}

/// Exact attenuation for the Lorentzian (`β = 2`) spectrum from its
/// exponential correlation function, for free decay, CPMG and Zeno control.
///
/// With `C(u) = g² e^{-|u|/τ_c}` and a `±1` modulation of segment lengths
/// `L_i`, `J = g² τ_c² [Σ_i φ(L_i/τ_c) + Σ_{i<j} s_i s_j e^{-D_ij/τ_c} P_i P_j]`,
/// `φ(x) = x - 1 + e^{-x}`, `P_i = 1 - e^{-L_i/τ_c}`, `D_ij` the gap between
/// segments. The cross sum is accumulated in one pass; `dJ/dτ_c` is carried
/// along in forward mode.
pub fn attenuation_lorentzian_exact(
    spectrum: &OrnsteinUhlenbeckSpectrum,
    sequence: &ControlSequence,
) -> Result<Attenuation> {
    if spectrum.beta() != 2 {
        return Err(Error::UnsupportedSpectrum {
            operation: "exact time-domain attenuation",
            spectrum: "non-Lorentzian ornstein-uhlenbeck",
        });
    }
    let g = spectrum.g();
    let tau = spectrum.tau_c();
    let (segments, copies) = match sequence.kind() {
        ControlKind::Zeno { projections } => {
            let part = ControlSequence::fid(sequence.total_time() / projections as f64)?;
            (part.segments()?, projections as f64)
        }
        _ => (sequence.segments()?, 1.0),
    };

    let tau_d = Dual::new(tau, 1.0);
    let mut diagonal = Dual::constant(0.0);
    let mut cross = Dual::constant(0.0);
    let mut acc = Dual::constant(0.0);
    for seg in &segments {
        let x = Dual::constant(seg.end - seg.start).div(tau_d);
        let e = x.exp_neg();
        let p = x.one_minus_exp_neg();
        diagonal = diagonal.add(x.phi());
        let sp = p.scale(seg.sign);
        cross = cross.add(sp.mul(acc));
        acc = acc.mul(e).add(sp);
    }
    let j = tau_d.mul(tau_d).mul(diagonal.add(cross)).scale(g * g * copies);
    Ok(Attenuation::exact(j.v, 2.0 * j.v / g, j.d))
}

/// Value and first derivative with respect to `τ_c`.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }

    fn constant(v: f64) -> Self {
        Self { v, d: 0.0 }
    }

    fn add(self, o: Self) -> Self {
        Self::new(self.v + o.v, self.d + o.d)
    }

    fn mul(self, o: Self) -> Self {
        Self::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }

    fn div(self, o: Self) -> Self {
        Self::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }

    fn scale(self, k: f64) -> Self {
        Self::new(k * self.v, k * self.d)
    }

    fn exp_neg(self) -> Self {
        let e = (-self.v).exp();
        Self::new(e, -e * self.d)
    }

    fn one_minus_exp_neg(self) -> Self {
        Self::new(-(-self.v).exp_m1(), (-self.v).exp() * self.d)
    }

    /// `φ(x) = x - 1 + e^{-x}`, `φ'(x) = 1 - e^{-x}`.
    fn phi(self) -> Self {
        let x = self.v;
        let v = if x < 1e-3 {
            x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)))
        } else {
            x + (-x).exp_m1()
        };
        Self::new(v, -(-x).exp_m1() * self.d)
    }
}

fn regime(j: f64, dj_dg: f64, dj_dtau: f64, within_regime: bool) -> Attenuation {
    Attenuation {
        j,
        dj_dg,
        dj_dtau,
        within_regime,
    }
}

/// Free evolution with a flat filter against the whole spectrum:
/// `J = g² t² / 2`. Valid for `t ≪ τ_c`.
pub fn attenuation_free(g: f64, tau_c: f64, t: f64) -> Result<Attenuation> {
    ensure_positive("g", g)?;
    ensure_positive("tau_c", tau_c)?;
    ensure_positive("t", t)?;
    let j = 0.5 * g * g * t * t;
    Ok(regime(j, 2.0 * j / g, 0.0, t <= 0.1 * tau_c))
}

/// `N` unread projective measurements in the flat-filter regime:
/// `J = g² t² / (2N)`. Flagged when `t/N > τ_c/10`.
pub fn attenuation_zeno(g: f64, tau_c: f64, n: u32, t: f64) -> Result<Attenuation> {
    ensure_positive("g", g)?;
    ensure_positive("tau_c", tau_c)?;
    ensure_positive("t", t)?;
    if n == 0 {
        return Err(invalid("n", "needs at least one projection"));
    }
    let j = g * g * t * t / (2.0 * n as f64);
    Ok(regime(j, 2.0 * j / g, 0.0, t / n as f64 <= 0.1 * tau_c))
}

/// Markovian limit `J = g² τ_c t` of free decay under a Lorentzian
/// spectrum. Flagged unless `t >= 10 τ_c`.
pub fn attenuation_markovian(g: f64, tau_c: f64, t: f64) -> Result<Attenuation> {
    ensure_positive("g", g)?;
    ensure_positive("tau_c", tau_c)?;
    ensure_positive("t", t)?;
    let j = g * g * tau_c * t;
    Ok(regime(j, 2.0 * j / g, j / tau_c, t >= 10.0 * tau_c))
}

/// Comb constant `c_β` for the power-law tail of the Ornstein-Uhlenbeck
/// family: `(β / 2π^β) sin(π/β)` for CW and
/// `(4 - 2^{-β}) ζ(β+2) β sin(π/β) / π^{β+2}` for CPMG.
pub fn c_beta(beta: u32, control: CombControl) -> Result<f64> {
    if beta < 2 || beta % 2 != 0 {
        return Err(invalid("beta", format!("must be even and >= 2, got {beta}")));
    }
    let b = beta as f64;
    let s = (PI / b).sin();
    Ok(match control {
        CombControl::Cw => b * s / (2.0 * PI.powf(b)),
        CombControl::Cpmg => (4.0 - 2f64.powf(-b)) * zeta(b + 2.0)? * b * s / PI.powf(b + 2.0),
    })
}

/// `J_β = c_β g² t^{β+1} / (N^β τ_c^{β-1})` from the first harmonics in the
/// spectral tail. Flagged when `t/(πN) > τ_c/10`.
pub fn attenuation_comb_beta(
    g: f64,
    tau_c: f64,
    beta: u32,
    n: u32,
    t: f64,
    control: CombControl,
) -> Result<Attenuation> {
    ensure_positive("g", g)?;
    ensure_positive("tau_c", tau_c)?;
    ensure_positive("t", t)?;
    if n == 0 {
        return Err(invalid("n", "needs at least one pulse or cycle"));
    }
    let c = c_beta(beta, control)?;
    let b = beta as f64;
    let nf = n as f64;
    let j = c * g * g * t.powf(b + 1.0) / (nf.powf(b) * tau_c.powf(b - 1.0));
    let within = t / (PI * nf) <= 0.1 * tau_c;
    Ok(regime(j, 2.0 * j / g, -(b - 1.0) * j / tau_c, within))
}

/// Highest harmonic below the Ohmic cutoff, `k_c = ⌊t / (π N τ_c)⌋`, or the
/// harmonic that lands exactly on the cutoff.
pub fn cutoff_harmonic(tau_c: f64, n: u32, t: f64) -> Result<u64> {
    let ratio = t / (PI * n as f64 * tau_c);
    let nearest = ratio.round();
    if nearest >= 1.0 && (ratio - nearest).abs() <= 1e-12 * ratio {
        return Err(Error::HarmonicOnCutoff {
            harmonic: nearest as u64,
        });
    }
    Ok(ratio.floor() as u64)
}

/// Ohmic comb constant: `π^{s+1}(s+1)/2` for CW (when its single line lies
/// below the cutoff) and `4π^{s-1}(s+1) Σ_{k odd ≤ k_c} k^{s-2}` for CPMG.
pub fn c_s(s: f64, k_c: u64, control: CombControl) -> f64 {
    match control {
        CombControl::Cw => {
            if k_c >= 1 {
                0.5 * PI.powf(s + 1.0) * (s + 1.0)
            } else {
                0.0
            }
        }
        CombControl::Cpmg => {
            let sum: f64 = (1..=k_c).step_by(2).map(|k| (k as f64).powf(s - 2.0)).sum();
            4.0 * PI.powf(s - 1.0) * (s + 1.0) * sum
        }
    }
}

/// `J_s = c_s g² τ_c^{s+1} N^s / t^{s-1}` for the band-limited Ohmic family.
/// Flagged when no harmonic lies below the cutoff (`t/(πN) <= τ_c`).
pub fn attenuation_comb_ohmic(
    g: f64,
    tau_c: f64,
    s: f64,
    n: u32,
    t: f64,
    control: CombControl,
) -> Result<Attenuation> {
    ensure_positive("g", g)?;
    ensure_positive("tau_c", tau_c)?;
    ensure_positive("s", s)?;
    ensure_positive("t", t)?;
    if n == 0 {
        return Err(invalid("n", "needs at least one pulse or cycle"));
    }
    let k_c = cutoff_harmonic(tau_c, n, t)?;
    let c = c_s(s, k_c, control);
    let nf = n as f64;
    let j = c * g * g * tau_c.powf(s + 1.0) * nf.powf(s) / t.powf(s - 1.0);
    Ok(regime(j, 2.0 * j / g, (s + 1.0) * j / tau_c, k_c >= 1))
}
