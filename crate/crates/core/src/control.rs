//! Probe control sequences and their filter functions.
//!
//! The filter of a control over `[0, t]` is
//! `F_t(ω) = ½ |∫₀ᵗ Ω(t') e^{iωt'} dt'|²`, normalized so that a flat filter
//! against a unit-mass lineshape reproduces `J = g² t² / 2` for free decay.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{ensure_positive, invalid, Error, Result};

/// Which control is applied to the probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlKind {
    /// Free induction decay, no control.
    Fid,
    /// Carr-Purcell-Meiboom-Gill train of `pulses` ideal π pulses.
    Cpmg { pulses: u32 },
    /// Continuous driving with `cycles` refocusing periods; modulation
    /// `√2 sin(π N t'/t)`, so the fundamental sits at `ω₀ = πN/t`.
    Cw { cycles: u32 },
    /// `projections` equidistant unread projective (QND) measurements.
    Zeno { projections: u32 },
}

impl ControlKind {
    pub fn name(&self) -> &'static str {
        match self {
            ControlKind::Fid => "fid",
            ControlKind::Cpmg { .. } => "cpmg",
            ControlKind::Cw { .. } => "cw",
            ControlKind::Zeno { .. } => "zeno",
        }
    }

    /// Pulse, cycle or projection count; one for free decay.
    pub fn count(&self) -> u32 {
        match *self {
            ControlKind::Fid => 1,
            ControlKind::Cpmg { pulses } => pulses,
            ControlKind::Cw { cycles } => cycles,
            ControlKind::Zeno { projections } => projections,
        }
    }
}

/// Piecewise-constant stretch of a `±1` modulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub sign: f64,
}

/// A control kind applied over a total time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSequence {
    kind: ControlKind,
    total_time: f64,
}

impl ControlSequence {
    pub fn new(kind: ControlKind, total_time: f64) -> Result<Self> {
        ensure_positive("total_time", total_time)?;
        if kind.count() == 0 {
            return Err(invalid("count", "pulse, cycle and projection counts must be >= 1"));
        }
        Ok(Self { kind, total_time })
    }

    pub fn fid(t: f64) -> Result<Self> {
        Self::new(ControlKind::Fid, t)
    }

    pub fn cpmg(pulses: u32, t: f64) -> Result<Self> {
        Self::new(ControlKind::Cpmg { pulses }, t)
    }

    pub fn cw(cycles: u32, t: f64) -> Result<Self> {
        Self::new(ControlKind::Cw { cycles }, t)
    }

    pub fn zeno(projections: u32, t: f64) -> Result<Self> {
        Self::new(ControlKind::Zeno { projections }, t)
    }

    pub fn kind(&self) -> ControlKind {
        self.kind
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn with_total_time(&self, t: f64) -> Result<Self> {
        Self::new(self.kind, t)
    }

    /// CPMG pulse instants `t_j = (2j - 1) t / 2N`; empty for other kinds.
    pub fn pulse_times(&self) -> Vec<f64> {
        match self.kind {
            ControlKind::Cpmg { pulses } => {
                let n = pulses as f64;
                (1..=pulses)
                    .map(|j| (2.0 * j as f64 - 1.0) * self.total_time / (2.0 * n))
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Sign segments of a π-pulse modulation (free decay or CPMG).
    pub fn segments(&self) -> Result<Vec<Segment>> {
        match self.kind {
            ControlKind::Fid => Ok(vec![Segment {
                start: 0.0,
                end: self.total_time,
                sign: 1.0,
            }]),
            ControlKind::Cpmg { .. } => {
                let mut edges = vec![0.0];
                edges.extend(self.pulse_times());
                edges.push(self.total_time);
                Ok(edges
                    .windows(2)
                    .enumerate()
                    .map(|(i, w)| Segment {
                        start: w[0],
                        end: w[1],
                        sign: if i % 2 == 0 { 1.0 } else { -1.0 },
                    })
                    .collect())
            }
            _ => Err(self.unsupported("piecewise modulation")),
        }
    }

    /// Modulation `Ω(t')` at `0 <= t' <= t`.
    ///
    /// Projective (Zeno) control has no coherent modulation function and is
    /// rejected.
    pub fn modulation(&self, tprime: f64) -> Result<f64> {
        if !(0.0..=self.total_time).contains(&tprime) {
            return Err(invalid("tprime", format!("{tprime} outside [0, {}]", self.total_time)));
        }
        match self.kind {
            ControlKind::Fid => Ok(1.0),
            ControlKind::Cpmg { .. } => {
                let flips = self.pulse_times().iter().filter(|&&tj| tj <= tprime).count();
                Ok(if flips % 2 == 0 { 1.0 } else { -1.0 })
            }
            ControlKind::Cw { cycles } => {
                Ok(SQRT_2 * (PI * cycles as f64 * tprime / self.total_time).sin())
            }
            ControlKind::Zeno { .. } => Err(self.unsupported("modulation")),
        }
    }

    /// Exact filter function `F_t(ω)`.
    ///
    /// Zeno control is the product of `N` independent free-decay intervals,
    /// so its filter is `N F^{free}_{t/N}(ω)`.
    pub fn filter(&self, omega: f64) -> f64 {
        let t = self.total_time;
        match self.kind {
            ControlKind::Fid => free_filter(t, omega),
            ControlKind::Zeno { projections } => {
                let n = projections as f64;
                n * free_filter(t / n, omega)
            }
            ControlKind::Cpmg { pulses } => cpmg_filter(pulses, t, omega).unwrap_or_else(|| {
                // Near the odd harmonics the closed form is 0/0; sum segments there.
                segment_filter(&self.segments().expect("cpmg has segments"), omega)
            }),
            ControlKind::Cw { cycles } => {
                let w0 = PI * cycles as f64 / t;
                let diff = box_transform(t, omega + w0) - box_transform(t, omega - w0);
                0.25 * diff.norm_sqr()
            }
        }
    }

    /// `F_t(ω)` from the definitional segment sum; free decay and CPMG only.
    pub fn filter_by_segments(&self, omega: f64) -> Result<f64> {
        Ok(segment_filter(&self.segments()?, omega))
    }

    /// Delta-comb (harmonic) approximation of the filter for `N ≫ 1`.
    pub fn harmonic_comb(&self) -> Result<HarmonicComb> {
        let t = self.total_time;
        match self.kind {
            ControlKind::Cw { cycles } => Ok(HarmonicComb {
                base_frequency: PI * cycles as f64 / t,
                harmonics: vec![(1, 0.5 * PI * t)],
            }),
            ControlKind::Cpmg { pulses } => Ok(HarmonicComb {
                base_frequency: PI * pulses as f64 / t,
                harmonics: (1..=MAX_HARMONIC)
                    .step_by(2)
                    .map(|k| (k, 4.0 * t / (PI * (k * k) as f64)))
                    .collect(),
            }),
            _ => Err(self.unsupported("harmonic comb")),
        }
    }

    /// Spacing of the filter's oscillation in `ω`; filter zeros of the
    /// piecewise controls lie on multiples of it.
    pub(crate) fn zero_spacing(&self) -> f64 {
        match self.kind {
            ControlKind::Zeno { projections } => 2.0 * PI * projections as f64 / self.total_time,
            _ => 2.0 * PI / self.total_time,
        }
    }

    /// Frequency around which the filter weight is concentrated.
    pub(crate) fn characteristic_frequency(&self) -> f64 {
        match self.kind {
            ControlKind::Fid => 2.0 * PI / self.total_time,
            ControlKind::Cpmg { pulses } => PI * pulses as f64 / self.total_time,
            ControlKind::Cw { cycles } => PI * cycles as f64 / self.total_time,
            ControlKind::Zeno { projections } => 2.0 * PI * projections as f64 / self.total_time,
        }
    }

    /// Upper bound and local average of `F_t(ω)` for `ω` well above
    /// [`characteristic_frequency`](Self::characteristic_frequency).
    pub(crate) fn tail_envelope(&self, omega: f64) -> (f64, f64) {
        let w2 = omega * omega;
        match self.kind {
            ControlKind::Fid => (2.0 / w2, 1.0 / w2),
            ControlKind::Zeno { projections } => {
                let n = projections as f64;
                (2.0 * n / w2, n / w2)
            }
            ControlKind::Cpmg { pulses } => {
                let n = pulses as f64;
                // switching amplitudes: 1 at both ends, 2 at every pulse
                let l1 = 2.0 + 2.0 * n;
                let l2 = 2.0 + 4.0 * n;
                (0.5 * l1 * l1 / w2, 0.5 * l2 / w2)
            }
            ControlKind::Cw { cycles } => {
                let w0 = PI * cycles as f64 / self.total_time;
                let d = (w2 - w0 * w0).powi(2);
                (8.0 * w0 * w0 / d, 4.0 * w0 * w0 / d)
            }
        }
    }

    fn unsupported(&self, operation: &'static str) -> Error {
        Error::UnsupportedControl {
            operation,
            control: self.kind.name(),
        }
    }
}

const MAX_HARMONIC: u32 = 10_000;

/// Filter approximated by narrowband lines at `±k ω₀`.
///
/// Weights are per side: `J ≈ Σ_k w_k [G(kω₀) + G(-kω₀)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicComb {
    pub base_frequency: f64,
    pub harmonics: Vec<(u32, f64)>,
}

impl HarmonicComb {
    /// `Σ_k w_k [G(kω₀) + G(-kω₀)]` for a spectral density `g`.
    pub fn overlap(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.harmonics
            .iter()
            .map(|&(k, w)| {
                let omega = k as f64 * self.base_frequency;
                w * (g(omega) + g(-omega))
            })
            .sum()
    }
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `(t²/2) sinc²(ωt/2)`.
pub(crate) fn free_filter(t: f64, omega: f64) -> f64 {
    let s = sinc(0.5 * omega * t);
    0.5 * t * t * s * s
}

/// `∫₀ᵗ e^{ixt'} dt' = t sinc(xt/2) e^{ixt/2}`.
fn box_transform(t: f64, x: f64) -> Complex64 {
    Complex64::from_polar(t * sinc(0.5 * x * t), 0.5 * x * t)
}

fn segment_filter(segments: &[Segment], omega: f64) -> f64 {
    let amplitude: Complex64 = segments
        .iter()
        .map(|s| {
            let len = s.end - s.start;
            Complex64::from_polar(s.sign * len * sinc(0.5 * omega * len), 0.5 * omega * (s.start + s.end))
        })
        .sum();
    0.5 * amplitude.norm_sqr()
}

/// Closed-form CPMG filter
/// `8 sin⁴(ωτ/4) {sin², cos²}(Nωτ/2) / (ω² cos²(ωτ/2))`, `τ = t/N`,
/// with `sin²` for even and `cos²` for odd `N`. Returns `None` next to the
/// removable singularities at odd harmonics.
fn cpmg_filter(pulses: u32, t: f64, omega: f64) -> Option<f64> {
    if omega == 0.0 {
        return Some(0.0);
    }
    let n = pulses as f64;
    let tau = t / n;
    let c = (0.5 * omega * tau).cos();
    if c.abs() < 1e-3 {
        return None;
    }
    let q = (0.25 * omega * tau).sin();
    let phase = 0.5 * n * omega * tau;
    let train = if pulses % 2 == 0 { phase.sin() } else { phase.cos() };
    let q2_over_w = q * q / omega;
    Some(8.0 * q2_over_w * q2_over_w * train * train / (c * c))
}
