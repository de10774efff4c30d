//! Adaptive Gauss-Kronrod (7/15) quadrature with a substitution helper for
//! integrands carrying an algebraic singularity at one endpoint.

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the global estimate meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            intervals: 0,
            converged: true,
        };
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target || heap.len() >= tol.max_intervals {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed accumulated update round-off.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();
    Quadrature {
        value,
        error,
        intervals: panels.len(),
        converged: error <= tol.abs.max(tol.rel * value.abs()),
    }
}

/// Integrates `g(τ)·(b − τ)^{−θ}` over `[a, b]` for `0 ≤ θ < 1`, with `g`
/// smooth near `b`.
///
/// The singular factor is removed by `τ = b − s^{1/(1−θ)}`, which turns the
/// integrand into `g(b − s^{1/(1−θ)}) / (1−θ)` on `s ∈ [0, (b−a)^{1−θ}]`.
pub fn integrate_right_singular<F: Fn(f64) -> f64>(
    g: F,
    theta: f64,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Quadrature {
    debug_assert!((0.0..1.0).contains(&theta));
    let power = 1.0 / (1.0 - theta);
    let upper = (b - a).powf(1.0 - theta);
    integrate(|s| g(b - s.powf(power)) * power, 0.0, upper, tol)
}

/// Mirror of [`integrate_right_singular`] for `g(τ)·(τ − a)^{−θ}`.
pub fn integrate_left_singular<F: Fn(f64) -> f64>(
    g: F,
    theta: f64,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Quadrature {
    debug_assert!((0.0..1.0).contains(&theta));
    let power = 1.0 / (1.0 - theta);
    let upper = (b - a).powf(1.0 - theta);
    integrate(|s| g(a + s.powf(power)) * power, 0.0, upper, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, Tolerance::default());
        assert!((q.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        assert!(q.converged);
    }

    #[test]
    fn sine_over_period() {
        let q = integrate(f64::sin, 0.0, std::f64::consts::PI, Tolerance::default());
        assert!((q.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_substitution() {
        // ∫_0^1 (1 − τ)^{−1/2} dτ = 2
        let q = integrate_right_singular(|_| 1.0, 0.5, 0.0, 1.0, Tolerance::default());
        assert!((q.value - 2.0).abs() < 1e-12);
        // ∫_0^1 τ^{−0.3} cos τ dτ against a fine midpoint reference of the smooth part
        let q = integrate_left_singular(f64::cos, 0.3, 0.0, 1.0, Tolerance::default());
        let raw = integrate(|x| x.powf(-0.3) * x.cos(), 1e-12, 1.0, Tolerance {
            max_intervals: 20000,
            ..Tolerance::default()
        });
        assert!((q.value - raw.value).abs() < 1e-6, "{} vs {}", q.value, raw.value);
    }
}
