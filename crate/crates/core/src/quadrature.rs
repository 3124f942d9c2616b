//! Globally adaptive Gauss-Kronrod (7/15) quadrature over a list of panels,
//! for vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options<const D: usize> {
    pub rel_tol: f64,
    /// Absolute floor per component, added to the relative target.
    pub abs_tol: [f64; D],
    pub max_evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Outcome<const D: usize> {
    pub value: [f64; D],
    pub error: [f64; D],
    /// `∫|f|` per component; the scale the relative tolerance refers to.
    pub magnitude: [f64; D],
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const D: usize> {
    a: f64,
    b: f64,
    value: [f64; D],
    error: [f64; D],
    magnitude: [f64; D],
    priority: f64,
}

impl<const D: usize> PartialEq for Panel<D> {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl<const D: usize> Eq for Panel<D> {}
impl<const D: usize> PartialOrd for Panel<D> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const D: usize> Ord for Panel<D> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn kronrod<const D: usize, F>(f: &F, a: f64, b: f64) -> ([f64; D], [f64; D], [f64; D])
where
    F: Fn(f64) -> [f64; D],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = [0.0; D];
    let mut gauss = [0.0; D];
    let mut abs = [0.0; D];
    let mut samples = [[0.0; D]; 15];
    samples[14] = fc;
    for d in 0..D {
        kron[d] = WGK[7] * fc[d];
        gauss[d] = WG[3] * fc[d];
        abs[d] = WGK[7] * fc[d].abs();
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        samples[2 * j] = lo;
        samples[2 * j + 1] = hi;
        for d in 0..D {
            kron[d] += WGK[j] * (lo[d] + hi[d]);
            abs[d] += WGK[j] * (lo[d].abs() + hi[d].abs());
            if j % 2 == 1 {
                gauss[d] += WG[j / 2] * (lo[d] + hi[d]);
            }
        }
    }
    let mut err = [0.0; D];
    for d in 0..D {
        // QUADPACK's error scaling
        let mean = 0.5 * kron[d];
        let mut asc = WGK[7] * (fc[d] - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((samples[2 * j][d] - mean).abs() + (samples[2 * j + 1][d] - mean).abs());
        }
        asc *= half.abs();
        let raw = ((kron[d] - gauss[d]) * half).abs();
        err[d] = if asc > 0.0 && raw > 0.0 {
            asc * (200.0 * raw / asc).powf(1.5).min(1.0)
        } else {
            raw
        };
        kron[d] *= half;
        abs[d] *= half.abs();
    }
    (kron, err, abs)
}

/// Integrate `f` over `[breaks[0], breaks[last]]`, refining the panel with the
/// largest scaled error until every component meets
/// `error <= rel_tol * ∫|f| + abs_tol`.
pub(crate) fn integrate<const D: usize, F>(f: &F, breaks: &[f64], opts: &Options<D>) -> Outcome<D>
where
    F: Fn(f64) -> [f64; D],
{
    let mut heap: BinaryHeap<Panel<D>> = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut evaluations = 0;
    let mut error = [0.0; D];
    let mut magnitude = [0.0; D];

    let mut panels = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e, m) = kronrod(f, w[0], w[1]);
        evaluations += 15;
        for d in 0..D {
            error[d] += e[d];
            magnitude[d] += m[d];
        }
        panels.push((w[0], w[1], v, e, m));
    }

    let scale = |magnitude: &[f64; D], e: &[f64; D]| -> f64 {
        (0..D)
            .map(|d| e[d] / (opts.rel_tol * magnitude[d] + opts.abs_tol[d] + f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };
    for (a, b, v, e, m) in panels {
        heap.push(Panel {
            a,
            b,
            value: v,
            error: e,
            magnitude: m,
            priority: scale(&magnitude, &e),
        });
    }

    let done = |error: &[f64; D], magnitude: &[f64; D]| {
        (0..D).all(|d| error[d] <= opts.rel_tol * magnitude[d] + opts.abs_tol[d])
    };

    while !done(&error, &magnitude) && evaluations < opts.max_evaluations {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted at machine precision
            heap.push(Panel { priority: 0.0, ..worst });
            if heap.peek().map_or(true, |p| p.priority == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1, m1) = kronrod(f, worst.a, mid);
        let (v2, e2, m2) = kronrod(f, mid, worst.b);
        evaluations += 30;
        for d in 0..D {
            error[d] += e1[d] + e2[d] - worst.error[d];
            magnitude[d] += m1[d] + m2[d] - worst.magnitude[d];
        }
        for (a, b, v, e, m) in [(worst.a, mid, v1, e1, m1), (mid, worst.b, v2, e2, m2)] {
            heap.push(Panel {
                a,
                b,
                value: v,
                error: e,
                magnitude: m,
                priority: scale(&magnitude, &e),
            });
        }
    }

    // Re-sum from the panels to shed accumulated rounding in the running totals.
    let mut value = [0.0; D];
    let mut error = [0.0; D];
    for p in heap.iter() {
        for d in 0..D {
            value[d] += p.value[d];
            error[d] += p.error[d];
        }
    }
    let converged = done(&error, &magnitude);
    Outcome {
        value,
        error,
        magnitude,
        evaluations,
        converged,
    }
}

/// `∫_lo^∞ f(ω) dω` through `ω = lo / u`, `u ∈ (0, 1]`.
pub(crate) fn integrate_to_infinity<const D: usize, F>(f: &F, lo: f64, opts: &Options<D>) -> Outcome<D>
where
    F: Fn(f64) -> [f64; D],
{
    let g = |u: f64| {
        let w = lo / u;
        let jac = lo / (u * u);
        let mut y = f(w);
        for v in y.iter_mut() {
            *v *= jac;
        }
        y
    };
    let breaks: Vec<f64> = [0.0, 1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.3, 1.0].to_vec();
    integrate(&g, &breaks, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn opts<const D: usize>() -> Options<D> {
        Options {
            rel_tol: 1e-12,
            abs_tol: [0.0; D],
            max_evaluations: 1_000_000,
        }
    }

    #[test]
    fn polynomial_is_exact() {
        let out = integrate(&|x: f64| [x.powi(5) - 3.0 * x], &[0.0, 2.0], &opts());
        assert!((out.value[0] - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
        assert!(out.converged);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let out = integrate(&|x: f64| [(50.0 * x).sin().powi(2), 1.0 / (1e-4 + x * x)], &[0.0, 1.0], &opts());
        let exact0 = 0.5 - (100.0f64).sin() / 200.0;
        let exact1 = (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((out.value[0] - exact0).abs() < 1e-11);
        assert!((out.value[1] / exact1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_lorentzian() {
        let out = integrate_to_infinity(&|x: f64| [1.0 / (1.0 + x * x)], 1.0, &opts());
        assert!((out.value[0] - PI / 4.0).abs() < 1e-11);
    }
}
