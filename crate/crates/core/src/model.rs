//! A probe experiment as a function of the unknown bath parameter and the
//! control time, with a choice of attenuation backend.

use crate::attenuation::{
    attenuation_comb_beta, attenuation_comb_ohmic, attenuation_free, attenuation_lorentzian_exact,
    attenuation_markovian, attenuation_quadrature, attenuation_zeno, Attenuation, AttenuationResult,
    CombControl, QuadratureOptions, TargetParameter,
};
use crate::control::{ControlKind, ControlSequence};
use crate::error::{Error, Result};
use crate::spectra::Spectrum;

/// How `J` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    /// Exact Lorentzian sum when available, else a closed form inside its
    /// regime, else quadrature.
    #[default]
    Auto,
    Quadrature,
    /// The regime's closed form, even when its validity flag is down.
    ClosedForm,
    ExactLorentzian,
    /// Lineshape-agnostic flat-filter forms: `g²t²/2N` (Zeno), `g²t²/2` (FID).
    FlatFilter,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Auto => "auto",
            Backend::Quadrature => "quadrature",
            Backend::ClosedForm => "closed-form",
            Backend::ExactLorentzian => "exact-lorentzian",
            Backend::FlatFilter => "flat-filter",
        }
    }
}

/// A backend that actually produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Quadrature,
    ClosedForm,
    ExactLorentzian,
    FlatFilter,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed-form",
            Method::ExactLorentzian => "exact-lorentzian",
            Method::FlatFilter => "flat-filter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub attenuation: Attenuation,
    pub method: Method,
}

/// Spectrum family with known nuisance parameters, a control family of fixed
/// count, and the parameter being estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeModel {
    spectrum: Spectrum,
    control: ControlKind,
    target: TargetParameter,
    backend: Backend,
    quadrature: QuadratureOptions,
}

impl ProbeModel {
    /// `spectrum` carries the nuisance parameter; its value of the target
    /// parameter is used only as a default by [`ProbeModel::true_value`].
    pub fn new(spectrum: Spectrum, control: ControlKind, target: TargetParameter) -> Result<Self> {
        ControlSequence::new(control, 1.0)?;
        Ok(Self {
            spectrum,
            control,
            target,
            backend: Backend::Auto,
            quadrature: QuadratureOptions::default(),
        })
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_quadrature(mut self, options: QuadratureOptions) -> Self {
        self.quadrature = options;
        self
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn control(&self) -> ControlKind {
        self.control
    }

    pub fn target(&self) -> TargetParameter {
        self.target
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Value of the target parameter stored in the spectrum.
    pub fn true_value(&self) -> f64 {
        match self.target {
            TargetParameter::Coupling => self.spectrum.g(),
            TargetParameter::CorrelationTime => self.spectrum.tau_c(),
        }
    }

    /// Homogeneity degree `α` of `J` in the target parameter, in the regime
    /// the ultimate bound refers to.
    pub fn alpha(&self) -> f64 {
        match self.target {
            TargetParameter::Coupling => 2.0,
            TargetParameter::CorrelationTime => self.spectrum.tau_homogeneity(),
        }
    }

    pub fn spectrum_at(&self, x: f64) -> Result<Spectrum> {
        match self.target {
            TargetParameter::Coupling => self.spectrum.with_g(x),
            TargetParameter::CorrelationTime => self.spectrum.with_tau_c(x),
        }
    }

    pub fn evaluate(&self, x: f64, t: f64) -> Result<Evaluation> {
        let spectrum = self.spectrum_at(x)?;
        let sequence = ControlSequence::new(self.control, t)?;
        match self.backend {
            Backend::Quadrature => self.quadrature(&spectrum, &sequence),
            Backend::ExactLorentzian => exact(&spectrum, &sequence),
            Backend::ClosedForm => closed_form(&spectrum, &sequence),
            Backend::FlatFilter => flat_filter(&spectrum, &sequence),
            Backend::Auto => {
                if let Ok(e) = exact(&spectrum, &sequence) {
                    return Ok(e);
                }
                match closed_form(&spectrum, &sequence) {
                    Ok(e) if e.attenuation.within_regime => Ok(e),
                    _ => self.quadrature(&spectrum, &sequence),
                }
            }
        }
    }

    /// `J` and `dJ/dx` for the model's target parameter.
    pub fn result(&self, x: f64, t: f64) -> Result<AttenuationResult> {
        Ok(self.evaluate(x, t)?.attenuation.for_target(self.target))
    }

    pub fn attenuation(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.evaluate(x, t)?.attenuation.j)
    }

    fn quadrature(&self, spectrum: &Spectrum, sequence: &ControlSequence) -> Result<Evaluation> {
        Ok(Evaluation {
            attenuation: attenuation_quadrature(spectrum, sequence, &self.quadrature)?.attenuation,
            method: Method::Quadrature,
        })
    }
}

fn exact(spectrum: &Spectrum, sequence: &ControlSequence) -> Result<Evaluation> {
    match spectrum {
        Spectrum::OrnsteinUhlenbeck(ou) => Ok(Evaluation {
            attenuation: attenuation_lorentzian_exact(ou, sequence)?,
            method: Method::ExactLorentzian,
        }),
        Spectrum::Ohmic(_) => Err(Error::UnsupportedSpectrum {
            operation: "exact time-domain attenuation",
            spectrum: spectrum.name(),
        }),
    }
}

fn closed_form(spectrum: &Spectrum, sequence: &ControlSequence) -> Result<Evaluation> {
    let (g, tau) = (spectrum.g(), spectrum.tau_c());
    let t = sequence.total_time();
    let attenuation = match (sequence.kind(), spectrum) {
        (ControlKind::Zeno { projections }, _) => attenuation_zeno(g, tau, projections, t)?,
        (ControlKind::Fid, Spectrum::OrnsteinUhlenbeck(ou)) if ou.beta() == 2 && t > tau => {
            attenuation_markovian(g, tau, t)?
        }
        (ControlKind::Fid, _) => attenuation_free(g, tau, t)?,
        (kind, Spectrum::OrnsteinUhlenbeck(ou)) => {
            attenuation_comb_beta(g, tau, ou.beta(), kind.count(), t, CombControl::try_from(kind)?)?
        }
        (kind, Spectrum::Ohmic(ohmic)) => {
            attenuation_comb_ohmic(g, tau, ohmic.s(), kind.count(), t, CombControl::try_from(kind)?)?
        }
    };
    Ok(Evaluation {
        attenuation,
        method: Method::ClosedForm,
    })
}

fn flat_filter(spectrum: &Spectrum, sequence: &ControlSequence) -> Result<Evaluation> {
    let (g, tau) = (spectrum.g(), spectrum.tau_c());
    let t = sequence.total_time();
    let attenuation = match sequence.kind() {
        ControlKind::Zeno { projections } => attenuation_zeno(g, tau, projections, t)?,
        ControlKind::Fid => attenuation_free(g, tau, t)?,
        other => {
            return Err(Error::UnsupportedControl {
                operation: "flat-filter attenuation",
                control: other.name(),
            })
        }
    };
    Ok(Evaluation {
        attenuation,
        method: Method::FlatFilter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{OhmicSpectrum, OrnsteinUhlenbeckSpectrum};

    fn lorentz() -> Spectrum {
        OrnsteinUhlenbeckSpectrum::lorentzian(1.0, 10.0).unwrap().into()
    }

    #[test]
    fn auto_prefers_exact_lorentzian() {
        let m = ProbeModel::new(lorentz(), ControlKind::Cpmg { pulses: 8 }, TargetParameter::CorrelationTime).unwrap();
        let e = m.evaluate(10.0, 18.3).unwrap();
        assert_eq!(e.method, Method::ExactLorentzian);
        let q = m.with_backend(Backend::Quadrature).evaluate(10.0, 18.3).unwrap();
        assert!((q.attenuation.j / e.attenuation.j - 1.0).abs() < 1e-7);
    }

    #[test]
    fn auto_uses_closed_form_only_in_regime() {
        let ohmic: Spectrum = OhmicSpectrum::new(0.1, 0.1, 2.0).unwrap().into();
        let m = ProbeModel::new(ohmic, ControlKind::Cw { cycles: 4 }, TargetParameter::CorrelationTime).unwrap();
        assert_eq!(m.evaluate(0.1, 10.0).unwrap().method, Method::ClosedForm);
        assert_eq!(m.evaluate(0.1, 1.0).unwrap().method, Method::Quadrature);
    }

    #[test]
    fn target_switches_parameter() {
        let m = ProbeModel::new(lorentz(), ControlKind::Fid, TargetParameter::Coupling).unwrap();
        let a = m.result(0.5, 3.0).unwrap();
        let b = m.result(1.0, 3.0).unwrap();
        assert!((b.j / a.j - 4.0).abs() < 1e-12);
        assert!((a.dj_dx - 2.0 * a.j / 0.5).abs() < 1e-12);
        assert_eq!(m.alpha(), 2.0);
    }

    #[test]
    fn flat_filter_rejects_pulsed_controls() {
        let m = ProbeModel::new(lorentz(), ControlKind::Cpmg { pulses: 2 }, TargetParameter::Coupling)
            .unwrap()
            .with_backend(Backend::FlatFilter);
        assert!(m.evaluate(1.0, 1.0).is_err());
    }
}
