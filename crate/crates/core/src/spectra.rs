//! Parametric bath coupling spectra `G(x_B, ω) = g² S(ω)`.
//!
//! Units are fixed across the crate: angular frequencies and couplings in
//! MHz, times in µs, so `g·τ_c` is dimensionless. Every spectrum is an
//! immutable value; evaluation is a pure function of `ω`.

use std::f64::consts::PI;

use crate::error::{ensure_positive, invalid, Result};

/// Generalized Ornstein-Uhlenbeck spectrum with a power-law tail,
/// `G(ω) = g² A_β τ_c / (1 + (ωτ_c)^β)` with `A_β = (β / 2π) sin(π/β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrnsteinUhlenbeckSpectrum {
    g: f64,
    tau_c: f64,
    beta: u32,
}

impl OrnsteinUhlenbeckSpectrum {
    /// `beta` must be an even integer of at least two.
    pub fn new(g: f64, tau_c: f64, beta: u32) -> Result<Self> {
        ensure_positive("g", g)?;
        ensure_positive("tau_c", tau_c)?;
        if beta < 2 || beta % 2 != 0 {
            return Err(invalid("beta", format!("must be an even integer >= 2, got {beta}")));
        }
        Ok(Self { g, tau_c, beta })
    }

    /// Lorentzian (`β = 2`) spectrum.
    pub fn lorentzian(g: f64, tau_c: f64) -> Result<Self> {
        Self::new(g, tau_c, 2)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    /// Normalization `A_β` of the lineshape.
    pub fn normalization(&self) -> f64 {
        ou_normalization(self.beta)
    }

    /// Normalized lineshape `S_β(ω)`, integrating to one over the real line.
    pub fn lineshape(&self, omega: f64) -> f64 {
        let x = (omega * self.tau_c).powi(self.beta as i32);
        self.normalization() * self.tau_c / (1.0 + x)
    }

    pub fn eval(&self, omega: f64) -> f64 {
        self.g * self.g * self.lineshape(omega)
    }

    /// Analytic `∂G/∂τ_c`.
    pub fn d_dtau(&self, omega: f64) -> f64 {
        let x = (omega * self.tau_c).powi(self.beta as i32);
        let b = self.beta as f64;
        self.normalization() * self.g * self.g / (1.0 + x) * (1.0 - b * x / (1.0 + x))
    }
}

pub(crate) fn ou_normalization(beta: u32) -> f64 {
    let b = beta as f64;
    b / (2.0 * PI) * (PI / b).sin()
}

/// Generalized Ohmic spectrum `G(ω) = g² (s+1) ω_c^{-(s+1)} ω^s` on the open
/// band `0 < ω < ω_c = 1/τ_c` and zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhmicSpectrum {
    g: f64,
    tau_c: f64,
    s: f64,
}

impl OhmicSpectrum {
    pub fn new(g: f64, tau_c: f64, s: f64) -> Result<Self> {
        ensure_positive("g", g)?;
        ensure_positive("tau_c", tau_c)?;
        ensure_positive("s", s)?;
        Ok(Self { g, tau_c, s })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn cutoff(&self) -> f64 {
        1.0 / self.tau_c
    }

    pub fn lineshape(&self, omega: f64) -> f64 {
        if omega > 0.0 && omega < self.cutoff() {
            (self.s + 1.0) * self.tau_c.powf(self.s + 1.0) * omega.powf(self.s)
        } else {
            0.0
        }
    }

    pub fn eval(&self, omega: f64) -> f64 {
        self.g * self.g * self.lineshape(omega)
    }

    /// `∂G/∂τ_c = (s+1) G / τ_c` inside the band. The motion of the band edge
    /// itself is not part of this pointwise derivative.
    pub fn d_dtau(&self, omega: f64) -> f64 {
        (self.s + 1.0) * self.eval(omega) / self.tau_c
    }
}

/// A bath coupling spectrum of either family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectrum {
    OrnsteinUhlenbeck(OrnsteinUhlenbeckSpectrum),
    Ohmic(OhmicSpectrum),
}

impl From<OrnsteinUhlenbeckSpectrum> for Spectrum {
    fn from(s: OrnsteinUhlenbeckSpectrum) -> Self {
        Spectrum::OrnsteinUhlenbeck(s)
    }
}

impl From<OhmicSpectrum> for Spectrum {
    fn from(s: OhmicSpectrum) -> Self {
        Spectrum::Ohmic(s)
    }
}

impl Spectrum {
    pub fn eval(&self, omega: f64) -> f64 {
        match self {
            Spectrum::OrnsteinUhlenbeck(s) => s.eval(omega),
            Spectrum::Ohmic(s) => s.eval(omega),
        }
    }

    pub fn d_dtau(&self, omega: f64) -> f64 {
        match self {
            Spectrum::OrnsteinUhlenbeck(s) => s.d_dtau(omega),
            Spectrum::Ohmic(s) => s.d_dtau(omega),
        }
    }

    pub fn g(&self) -> f64 {
        match self {
            Spectrum::OrnsteinUhlenbeck(s) => s.g,
            Spectrum::Ohmic(s) => s.g,
        }
    }

    pub fn tau_c(&self) -> f64 {
        match self {
            Spectrum::OrnsteinUhlenbeck(s) => s.tau_c,
            Spectrum::Ohmic(s) => s.tau_c,
        }
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Ok(match self {
            Spectrum::OrnsteinUhlenbeck(s) => OrnsteinUhlenbeckSpectrum::new(g, s.tau_c, s.beta)?.into(),
            Spectrum::Ohmic(s) => OhmicSpectrum::new(g, s.tau_c, s.s)?.into(),
        })
    }

    pub fn with_tau_c(&self, tau_c: f64) -> Result<Self> {
        Ok(match self {
            Spectrum::OrnsteinUhlenbeck(s) => OrnsteinUhlenbeckSpectrum::new(s.g, tau_c, s.beta)?.into(),
            Spectrum::Ohmic(s) => OhmicSpectrum::new(s.g, tau_c, s.s)?.into(),
        })
    }

    /// Degree of homogeneity in `τ_c` in the power-law region:
    /// `β - 1` for the tail of the Ornstein-Uhlenbeck family, `s + 1` for the
    /// Ohmic band.
    pub fn tau_homogeneity(&self) -> f64 {
        match self {
            Spectrum::OrnsteinUhlenbeck(s) => s.beta as f64 - 1.0,
            Spectrum::Ohmic(s) => s.s + 1.0,
        }
    }

    /// Whether `G(ω) = G(-ω)`.
    pub fn is_even(&self) -> bool {
        matches!(self, Spectrum::OrnsteinUhlenbeck(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Spectrum::OrnsteinUhlenbeck(_) => "ornstein-uhlenbeck",
            Spectrum::Ohmic(_) => "ohmic",
        }
    }
}

/// Pure power-law attenuation `J(t) = (t / T2)^γ`, where the dephasing time
/// `T2` depends on the applied control and `γ` is `β + 1` or `1 - s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawAttenuationModel {
    t2: f64,
    gamma: f64,
}

impl PowerLawAttenuationModel {
    pub fn new(t2: f64, gamma: f64) -> Result<Self> {
        ensure_positive("t2", t2)?;
        ensure_positive("gamma", gamma)?;
        Ok(Self { t2, gamma })
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn attenuation(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (t / self.t2).powf(self.gamma)
        }
    }

    /// `∂J/∂γ = J ln(t / T2)`.
    pub fn d_dgamma(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            self.attenuation(t) * (t / self.t2).ln()
        }
    }

    /// `∂J/∂T2 = -γ J / T2`.
    pub fn d_dt2(&self, t: f64) -> f64 {
        -self.gamma * self.attenuation(t) / self.t2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        let (a, b) = (lo.ln(), hi.ln());
        (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
    }

    #[test]
    fn lorentzian_peak_and_half_width() {
        let s = OrnsteinUhlenbeckSpectrum::lorentzian(1.0, 10.0).unwrap();
        assert!((s.eval(0.0) - 10.0 / PI).abs() < 1e-12);
        assert!((s.eval(0.1) - 0.5 * s.eval(0.0)).abs() < 1e-12);
        assert_eq!(s.eval(0.37), s.eval(-0.37));
    }

    #[test]
    fn ou_rejects_bad_beta() {
        assert!(OrnsteinUhlenbeckSpectrum::new(1.0, 1.0, 3).is_err());
        assert!(OrnsteinUhlenbeckSpectrum::new(1.0, 1.0, 0).is_err());
        assert!(OrnsteinUhlenbeckSpectrum::new(1.0, -1.0, 2).is_err());
    }

    #[test]
    fn ohmic_support_is_open_band() {
        let s = OhmicSpectrum::new(1.0, 2.0, 1.5).unwrap();
        let wc = s.cutoff();
        assert_eq!(s.eval(-1.0), 0.0);
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(wc), 0.0);
        assert_eq!(s.eval(2.0 * wc), 0.0);
        assert!(s.eval(0.5 * wc) > 0.0);
        assert!(OhmicSpectrum::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ohmic_closes_to_unit_mass() {
        // (s+1) ω_c^{-(s+1)} ∫_0^{ω_c} ω^s dω = 1 by the antiderivative.
        for s in [0.3, 1.0, 2.0, 3.7] {
            let spec = OhmicSpectrum::new(1.0, 0.7, s).unwrap();
            let wc = spec.cutoff();
            let mass = (s + 1.0) * spec.tau_c().powf(s + 1.0) * wc.powf(s + 1.0) / (s + 1.0);
            assert!((mass - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_special_points() {
        let s = OrnsteinUhlenbeckSpectrum::new(1.3, 4.0, 2).unwrap();
        assert!((s.d_dtau(0.0) - s.normalization() * 1.69).abs() < 1e-14);
        assert!(s.d_dtau(1.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_bound_on_log_grid() {
        let spectra: Vec<Spectrum> = vec![
            OrnsteinUhlenbeckSpectrum::new(1.0, 10.0, 2).unwrap().into(),
            OrnsteinUhlenbeckSpectrum::new(0.4, 3.0, 4).unwrap().into(),
            OrnsteinUhlenbeckSpectrum::new(2.0, 0.5, 8).unwrap().into(),
            OhmicSpectrum::new(1.0, 10.0, 2.0).unwrap().into(),
            OhmicSpectrum::new(0.3, 1.0, 0.5).unwrap().into(),
        ];
        for spec in spectra {
            let alpha = spec.tau_homogeneity();
            let tau = spec.tau_c();
            for w in log_grid(1e-4 / tau, 1e4 / tau, 801) {
                let lhs = spec.d_dtau(w).abs();
                let rhs = alpha * spec.eval(w) / tau;
                assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300, "{spec:?} ω={w}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn derivative_bound_tight_in_power_law_region() {
        let s = OrnsteinUhlenbeckSpectrum::new(1.0, 2.0, 4).unwrap();
        let w = 1e3 / 2.0;
        let ratio = s.d_dtau(w).abs() / (3.0 * s.eval(w) / 2.0);
        assert!((ratio - 1.0).abs() < 1e-3);
    }

    #[test]
    fn derivative_matches_central_differences() {
        for beta in [2u32, 4, 6] {
            let tau = 3.0;
            for w in log_grid(1e-3, 1e2, 97) {
                let x = w * tau;
                if (x - 1.0).abs() < 0.2 {
                    continue;
                }
                let h = tau * 1e-5;
                let up = OrnsteinUhlenbeckSpectrum::new(0.7, tau + h, beta).unwrap().eval(w);
                let dn = OrnsteinUhlenbeckSpectrum::new(0.7, tau - h, beta).unwrap().eval(w);
                let fd = (up - dn) / (2.0 * h);
                let an = OrnsteinUhlenbeckSpectrum::new(0.7, tau, beta).unwrap().d_dtau(w);
                assert!((fd - an).abs() <= 1e-6 * an.abs(), "β={beta} ω={w}: {fd} vs {an}");
            }
        }
        let spec = OhmicSpectrum::new(0.7, 3.0, 2.5).unwrap();
        let w = 0.1;
        let h = 3e-5;
        let fd = (OhmicSpectrum::new(0.7, 3.0 + h, 2.5).unwrap().eval(w)
            - OhmicSpectrum::new(0.7, 3.0 - h, 2.5).unwrap().eval(w))
            / (2.0 * h);
        assert!((fd - spec.d_dtau(w)).abs() <= 1e-6 * fd.abs());
    }

    #[test]
    fn ou_tail_homogeneity() {
        let lambda = 1.7;
        for beta in [2u32, 4] {
            let a = OrnsteinUhlenbeckSpectrum::new(1.0, 1.0, beta).unwrap();
            let b = OrnsteinUhlenbeckSpectrum::new(1.0, lambda, beta).unwrap();
            let w = 150.0;
            let ratio = b.eval(w) / a.eval(w);
            let expected = lambda.powf(-(beta as f64 - 1.0));
            assert!((ratio / expected - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn ohmic_in_band_homogeneity() {
        let s = 1.6;
        let a = OhmicSpectrum::new(1.0, 1.0, s).unwrap();
        let b = OhmicSpectrum::new(1.0, 0.5, s).unwrap();
        let w = 0.3;
        let ratio = b.eval(w) / a.eval(w);
        assert!((ratio - 0.5f64.powf(s + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn coupling_homogeneity_is_exact() {
        let a: Spectrum = OrnsteinUhlenbeckSpectrum::new(0.5, 2.0, 2).unwrap().into();
        let b = a.with_g(1.0).unwrap();
        for w in [0.0, 0.1, 3.0, -7.0] {
            assert_eq!(b.eval(w), 4.0 * a.eval(w));
        }
    }

    #[test]
    fn power_law_attenuation_values() {
        let m = PowerLawAttenuationModel::new(10.0, 1.0).unwrap();
        assert_eq!(m.attenuation(10.0), 1.0);
        let m = PowerLawAttenuationModel::new(10.0, 3.0).unwrap();
        assert_eq!(m.attenuation(0.0), 0.0);
        assert!((m.attenuation(5.0) - 0.125).abs() < 1e-15);
    }
}
