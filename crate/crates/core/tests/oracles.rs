//! Cross-checks between independent evaluation routes.

use approx::assert_relative_eq;
use qprobe_core::{
    attenuation_free, attenuation_lorentzian_exact, attenuation_quadrature, attenuation_zeno, ControlSequence,
    OrnsteinUhlenbeckSpectrum, QuadratureOptions, Spectrum,
};

/// Time-domain exact sum against frequency-domain quadrature on a 3x3 grid
/// of correlation times and durations, for free decay and CPMG.
#[test]
fn exact_lorentzian_matches_quadrature() {
    let opts = QuadratureOptions::default();
    for tau in [0.5, 5.0, 50.0] {
        let ou = OrnsteinUhlenbeckSpectrum::lorentzian(0.8, tau).unwrap();
        let spectrum: Spectrum = ou.into();
        for t in [0.3, 4.0, 40.0] {
            for seq in [ControlSequence::fid(t).unwrap(), ControlSequence::cpmg(6, t).unwrap()] {
                let exact = attenuation_lorentzian_exact(&ou, &seq).unwrap();
                let quad = attenuation_quadrature(&spectrum, &seq, &opts).unwrap();
                assert_relative_eq!(exact.j, quad.attenuation.j, max_relative = 1e-6);
                assert_relative_eq!(exact.dj_dtau, quad.attenuation.dj_dtau, max_relative = 1e-5, epsilon = 1e-12);
                assert_relative_eq!(exact.dj_dg, quad.attenuation.dj_dg, max_relative = 1e-6);
            }
        }
    }
}

#[test]
fn zeno_is_repeated_free_decay() {
    let (g, tau, n, t) = (0.4, 3.0, 7, 2.1);
    let zeno = attenuation_zeno(g, tau, n, t).unwrap();
    let free = attenuation_free(g, tau, t / n as f64).unwrap();
    assert_relative_eq!(zeno.j, n as f64 * free.j, max_relative = 1e-12);

    let ou = OrnsteinUhlenbeckSpectrum::lorentzian(g, tau).unwrap();
    let exact_zeno = attenuation_lorentzian_exact(&ou, &ControlSequence::zeno(n, 20.0).unwrap()).unwrap();
    let exact_free = attenuation_lorentzian_exact(&ou, &ControlSequence::fid(20.0 / n as f64).unwrap()).unwrap();
    assert_relative_eq!(exact_zeno.j, n as f64 * exact_free.j, max_relative = 1e-12);
}
