//! Special functions: principal-branch Lambert W and the Riemann zeta
//! function for real arguments above one.

use std::f64::consts::E;

use crate::error::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;

/// Principal branch `W0(z)` of the Lambert W function for real `z >= -1/e`.
///
/// Halley iteration started from the branch-point series near `-1/e`, from
/// `ln(1 + z)` in the middle range and from the asymptotic `ln z - ln ln z`
/// expansion for large arguments.
pub fn lambert_w0(z: f64) -> Result<f64> {
    if z.is_nan() || z < BRANCH_POINT - 4.0 * f64::EPSILON {
        return Err(Error::LambertDomain(z));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    let mut w = if z < -0.25 {
        let p = (2.0 * (E * z + 1.0)).max(0.0).sqrt();
        let series = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
        if p < 1e-7 {
            // Halley's step degenerates at w = -1; the series is exact to O(p^4) here.
            return Ok(series);
        }
        series
    } else if z < 3.0 {
        z.ln_1p()
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

// B_{2k} / (2k)! for k = 1..6
const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
];

/// Riemann zeta function for real `z > 1`, by direct summation with an
/// Euler-Maclaurin tail correction.
pub fn zeta(z: f64) -> Result<f64> {
    if !(z > 1.0) || !z.is_finite() {
        return Err(crate::error::invalid("z", format!("zeta needs z > 1, got {z}")));
    }
    let cut = 16.0_f64;
    let mut sum: f64 = (1..16).map(|n| (n as f64).powf(-z)).sum();
    sum += cut.powf(1.0 - z) / (z - 1.0) + 0.5 * cut.powf(-z);

    // Rising factorial z (z+1) ... (z + 2k - 2) times cut^{-z-2k+1}
    let mut rising = z;
    let mut power = cut.powf(-z - 1.0);
    for (k, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        sum += coeff * rising * power;
        let m = 2.0 * k as f64;
        rising *= (z + m + 1.0) * (z + m + 2.0);
        power /= cut * cut;
    }
    Ok(sum)
}
