//! Riemann–Liouville fractional integrals and derivatives on uniform grids.
//!
//! The integral `J^α g(t) = Γ(α)⁻¹ ∫₀ᵗ (t−s)^{α−1} g(s) ds` is evaluated by
//! product integration: `g` is interpolated piecewise-linearly between nodes
//! and the kernel moments over each cell are taken in closed form. This gives
//! the classical weights
//!
//! ```text
//! J^α g(t_m) ≈ h^α / Γ(α+2) · Σ_j a_{j,m} g_j
//! a_{0,m} = (m−1)^{α+1} − (m−α−1) m^α
//! a_{j,m} = b_{m−j},   b_0 = 1,
//! b_k     = (k+1)^{α+1} − 2k^{α+1} + (k−1)^{α+1}
//! ```
//!
//! Left derivatives are `∂_t J^{1−α}`; right derivatives reuse the same
//! machinery on the time-reversed series.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Fractional order strictly inside `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(FracOrder(alpha))
        } else {
            Err(Error::domain(format!(
                "fractional order must lie in (0,1), got {alpha}"
            )))
        }
    }

    /// Order `α = 1 − γ` of the memory kernel `(t−s)^{−γ}`.
    pub fn from_memory_exponent(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::domain(format!("gamma must lie in (0,1), got {gamma}")));
        }
        FracOrder::new(1.0 - gamma)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 − α`, the order of the integral inside a derivative of order `α`.
    pub fn complement(self) -> FracOrder {
        FracOrder(1.0 - self.0)
    }
}

/// Uniform time nodes `t_m = m·dt`, `m = 0..=n_steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("time step must be positive, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::domain("time grid needs at least one step"));
        }
        Ok(TimeGrid { dt, n_steps })
    }

    /// Grid on `[0, horizon]` with `n_steps` cells.
    pub fn spanning(horizon: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::domain("time grid needs at least one step"));
        }
        TimeGrid::new(horizon / n_steps as f64, n_steps)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, m: usize) -> f64 {
        m as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.node(self.n_steps)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |m| self.node(m))
    }
}

/// Scalar samples on a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    grid: TimeGrid,
    values: Vec<f64>,
    /// Set when any sample is not finite.
    flagged: bool,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empty time series"));
        }
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "series has {} samples but grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let flagged = values.iter().any(|v| !v.is_finite());
        Ok(TimeSeries { grid, values, flagged })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.nodes().map(f).collect();
        let flagged = values.iter().any(|v| !v.is_finite());
        TimeSeries { grid, values, flagged }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_flagged(&self) -> bool {
        self.flagged
    }

    /// Trapezoidal approximation of `∫₀ᵀ` of the series.
    pub fn trapezoid(&self) -> f64 {
        trapezoid(&self.values, self.grid.dt)
    }

    fn with_values(&self, values: Vec<f64>) -> TimeSeries {
        let flagged = values.iter().any(|v| !v.is_finite());
        TimeSeries {
            grid: self.grid,
            values,
            flagged,
        }
    }
}

/// Cutoff `w₁(t) = (1 − t/T)₊^σ` used to build test functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffProfile {
    sigma: f64,
    horizon: f64,
}

impl CutoffProfile {
    pub const DEFAULT_SIGMA: f64 = 7.0;

    /// `sigma ≥ 4` keeps `σ − α − 2 > 1` for every admissible `α`.
    pub fn new(sigma: f64, horizon: f64) -> Result<Self> {
        if !(sigma >= 4.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("cutoff exponent must be at least 4, got {sigma}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!("cutoff horizon must be positive, got {horizon}")));
        }
        Ok(CutoffProfile { sigma, horizon })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn value(&self, t: f64) -> f64 {
        (1.0 - t / self.horizon).max(0.0).powf(self.sigma)
    }

    pub fn sample(&self, grid: TimeGrid) -> TimeSeries {
        TimeSeries::from_fn(grid, |t| self.value(t))
    }
}

/// Cached product-integration weights for a fixed order.
///
/// Stores `b_k` incrementally so that repeated evaluation at growing node
/// counts (the memory term of a time stepper) never recomputes a weight.
#[derive(Clone, Debug)]
pub struct ProductWeights {
    alpha: f64,
    inner: Vec<f64>,
}

// Beyond this index the differences are summed from their binomial series to
// avoid cancellation between terms of size k^{α+1}.
const SERIES_FROM: usize = 64;

fn binomial_series(alpha1: f64, terms: impl Iterator<Item = usize>, inv_k: f64) -> f64 {
    // Σ C(α+1, j) (inv_k)^j over the requested j.
    let mut sum = 0.0;
    for j in terms {
        let mut c = 1.0;
        for i in 0..j {
            c *= (alpha1 - i as f64) / (i as f64 + 1.0);
        }
        sum += c * inv_k.powi(j as i32);
    }
    sum
}

impl ProductWeights {
    pub fn new(order: FracOrder) -> Self {
        ProductWeights {
            alpha: order.value(),
            inner: vec![1.0],
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `h^α / Γ(α + 2)`, the common factor of all weights.
    pub fn scale(&self, h: f64) -> f64 {
        h.powf(self.alpha) / gamma(self.alpha + 2.0)
    }

    fn compute_inner(&self, k: usize) -> f64 {
        let a1 = self.alpha + 1.0;
        if k == 0 {
            return 1.0;
        }
        if k < SERIES_FROM {
            let kf = k as f64;
            (kf + 1.0).powf(a1) - 2.0 * kf.powf(a1) + (kf - 1.0).powf(a1)
        } else {
            let kf = k as f64;
            2.0 * kf.powf(a1) * binomial_series(a1, (1..=7).map(|j| 2 * j), 1.0 / kf)
        }
    }

    /// Makes `b_0..=b_k` available.
    pub fn ensure(&mut self, k: usize) {
        while self.inner.len() <= k {
            let next = self.compute_inner(self.inner.len());
            self.inner.push(next);
        }
    }

    /// `b_k`; requires a prior [`ensure`](Self::ensure) covering `k`.
    pub fn inner(&self, k: usize) -> f64 {
        self.inner[k]
    }

    /// Weight of the first node in the row for node `m ≥ 1`.
    pub fn first(&self, m: usize) -> f64 {
        let a1 = self.alpha + 1.0;
        let mf = m as f64;
        if m < SERIES_FROM {
            (mf - 1.0).powf(a1) - (mf - a1) * mf.powf(self.alpha)
        } else {
            mf.powf(a1) * binomial_series(a1, 2..=12, -1.0 / mf)
        }
    }

    /// Weight `a_{j,m}` of sample `j` in the row for node `m`.
    pub fn weight(&mut self, j: usize, m: usize) -> f64 {
        debug_assert!(j <= m);
        if m == 0 {
            return 0.0;
        }
        if j == 0 {
            return self.first(m);
        }
        self.ensure(m - j);
        self.inner[m - j]
    }
}

/// Product-integration values of `J^α g` at every node.
pub(crate) fn left_integral(values: &[f64], dt: f64, order: FracOrder) -> Vec<f64> {
    let mut weights = ProductWeights::new(order);
    let n = values.len();
    weights.ensure(n);
    let scale = weights.scale(dt);
    let mut out = vec![0.0; n];
    for (m, slot) in out.iter_mut().enumerate().skip(1) {
        let mut acc = weights.first(m) * values[0];
        for (j, v) in values.iter().enumerate().take(m + 1).skip(1) {
            acc += weights.inner(m - j) * v;
        }
        *slot = scale * acc;
    }
    out
}

/// `∫` of tabulated values with the trapezoidal rule.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            dt * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// First derivative: centered differences inside, second-order one-sided
/// stencils at the two ends.
pub(crate) fn differentiate(values: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::domain(format!(
            "differentiation needs at least 3 nodes, got {n}"
        )));
    }
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt);
    for m in 1..n - 1 {
        out[m] = (values[m + 1] - values[m - 1]) / (2.0 * dt);
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dt);
    Ok(out)
}

/// Finite-difference weights for the `order`-th derivative at `x0` from the
/// nodes `xs` (Fornberg's recursion).
fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for d in (1..=order.min(i)).rev() {
                    c[i][d] = c1 * (d as f64 * c[i - 1][d - 1] - c5 * c[i - 1][d]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for d in (1..=order.min(i)).rev() {
                c[j][d] = (c4 * c[j][d] - d as f64 * c[j][d - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// `order`-th derivative on a uniform grid with one stencil per node:
/// centred in the interior, shifted inwards near the ends. Repeating a
/// first-derivative stencil instead compounds the one-sided error.
fn derivative(values: &[f64], dt: f64, order: usize) -> Vec<f64> {
    let n = values.len();
    let width = ((order + 2) | 1).min(n);
    let half = width / 2;
    let offsets: Vec<f64> = (0..width).map(|i| i as f64).collect();
    let mut cache: Vec<Option<Vec<f64>>> = vec![None; width];
    let scale = dt.powi(order as i32);
    (0..n)
        .map(|m| {
            let start = m.saturating_sub(half).min(n - width);
            let pos = m - start;
            let w = cache[pos].get_or_insert_with(|| fornberg_weights(pos as f64, &offsets, order));
            w.iter().zip(&values[start..start + width]).map(|(a, b)| a * b).sum::<f64>() / scale
        })
        .collect()
}

/// `J^α_{0|t} g` at every node of the grid of `g`.
pub fn rl_integral(g: &TimeSeries, order: FracOrder) -> Result<TimeSeries> {
    Ok(g.with_values(left_integral(g.values(), g.grid().dt(), order)))
}

/// Left derivative `D^α_{0|t} f = ∂_t J^{1−α}_{0|t} f`.
pub fn rl_deriv_left(f: &TimeSeries, order: FracOrder) -> Result<TimeSeries> {
    let dt = f.grid().dt();
    if f.values().len() < 3 {
        return Err(Error::domain("left derivative needs at least 3 nodes"));
    }
    let integral = left_integral(f.values(), dt, order.complement());
    Ok(f.with_values(differentiate(&integral, dt)?))
}

/// `J^{β}_{t|T} f` by reflection `t ↦ T − t`.
fn right_integral(values: &[f64], dt: f64, order: FracOrder) -> Vec<f64> {
    let reversed: Vec<f64> = values.iter().rev().copied().collect();
    let mut out = left_integral(&reversed, dt, order);
    out.reverse();
    out
}

/// Right derivative `D^{k+α}_{t|T} f = (−1)^k ∂_t^k D^α_{t|T} f` for
/// `k ∈ {0, 1, 2}`, where `D^α_{t|T} f = −∂_t J^{1−α}_{t|T} f`.
pub fn rl_deriv_right(f: &TimeSeries, order: FracOrder, k: u32) -> Result<TimeSeries> {
    if k > 2 {
        return Err(Error::domain(format!("integer part of the order must be 0, 1 or 2, got {k}")));
    }
    let dt = f.grid().dt();
    let needed = (k as usize + 3) | 1;
    if f.values().len() < needed {
        return Err(Error::domain(format!(
            "right derivative of order {k}+α needs at least {needed} nodes"
        )));
    }
    let integral = right_integral(f.values(), dt, order.complement());
    let mut current = derivative(&integral, dt, k as usize + 1);
    // (−1)^{k+1} from the leading minus sign and the k reflections.
    if k.is_multiple_of(2) {
        current.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(f.with_values(current))
}

/// `D^{k+α}_{t|T} w₁(t) = Γ(σ+1)/Γ(σ−α−k+1) · T^{−σ} (T−t)₊^{σ−α−k}`.
pub fn cutoff_deriv_closed_form(
    profile: &CutoffProfile,
    order: FracOrder,
    k: u32,
    t: f64,
) -> Result<f64> {
    let horizon = profile.horizon();
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::domain(format!("t = {t} lies outside [0, {horizon}]")));
    }
    let exponent = profile.sigma() - order.value() - k as f64;
    if exponent <= -1.0 {
        return Err(Error::domain("cutoff exponent too small for the requested order"));
    }
    let constant = cutoff_constant(profile.sigma(), order, k);
    let gap = horizon - t;
    let power = if gap == 0.0 { if exponent > 0.0 { 0.0 } else { f64::INFINITY } } else { gap.powf(exponent) };
    Ok(constant * horizon.powf(-profile.sigma()) * power)
}

/// `Γ(σ+1) / Γ(σ−α−k+1)`.
pub fn cutoff_constant(sigma: f64, order: FracOrder, k: u32) -> f64 {
    gamma(sigma + 1.0) / gamma(sigma - order.value() - k as f64 + 1.0)
}

/// Both sides of the fractional integration-by-parts formula.
#[derive(Clone, Copy, Debug)]
pub struct AdjointPairing {
    /// `∫₀ᵀ (D^α_{0|t} f) g dt`
    pub left: f64,
    /// `∫₀ᵀ f (D^α_{t|T} g) dt`
    pub right: f64,
}

impl AdjointPairing {
    pub fn residual(&self) -> f64 {
        (self.left - self.right).abs()
    }

    pub fn scale(&self) -> f64 {
        self.left.abs().max(self.right.abs())
    }
}

pub fn adjoint_pairing(f: &TimeSeries, g: &TimeSeries, order: FracOrder) -> Result<AdjointPairing> {
    if f.grid() != g.grid() {
        return Err(Error::domain("series live on different grids"));
    }
    let dt = f.grid().dt();
    let df = rl_deriv_left(f, order)?;
    let dg = rl_deriv_right(g, order, 0)?;
    let lhs: Vec<f64> = df.values().iter().zip(g.values()).map(|(a, b)| a * b).collect();
    let rhs: Vec<f64> = f.values().iter().zip(dg.values()).map(|(a, b)| a * b).collect();
    Ok(AdjointPairing {
        left: trapezoid(&lhs, dt),
        right: trapezoid(&rhs, dt),
    })
}

/// `|∫ (D^α_{0|t} f) g − ∫ f (D^α_{t|T} g)|` with trapezoidal weights.
pub fn integration_by_parts_residual(f: &TimeSeries, g: &TimeSeries, order: FracOrder) -> Result<f64> {
    Ok(adjoint_pairing(f, g, order)?.residual())
}

/// Sup over interior nodes of `|D^α_{0|t} J^α_{0|t} g − g|`.
pub fn inversion_residual(g: &TimeSeries, order: FracOrder) -> Result<f64> {
    let composed = rl_deriv_left(&rl_integral(g, order)?, order)?;
    let n = g.values().len();
    Ok(composed.values()[1..n - 1]
        .iter()
        .zip(&g.values()[1..n - 1])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_right_singular, Tolerance};

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::spanning(1.0, n).unwrap()
    }

    #[test]
    fn order_must_be_open_unit_interval() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(1.0).is_err());
        assert!(FracOrder::new(-0.2).is_err());
        assert!(FracOrder::new(0.3).is_ok());
    }

    #[test]
    fn zero_input_gives_zero() {
        let g = TimeSeries::from_fn(grid(64), |_| 0.0);
        let a = FracOrder::new(0.4).unwrap();
        assert!(rl_integral(&g, a).unwrap().values().iter().all(|v| *v == 0.0));
        assert!(rl_deriv_left(&g, a).unwrap().values().iter().all(|v| *v == 0.0));
        assert_eq!(inversion_residual(&g, a).unwrap(), 0.0);
        let w = CutoffProfile::new(7.0, 1.0).unwrap().sample(grid(64));
        assert_eq!(integration_by_parts_residual(&g, &w, a).unwrap(), 0.0);
    }

    #[test]
    fn integral_of_one_matches_power_rule_and_quadrature() {
        let a = FracOrder::new(0.5).unwrap();
        let g = TimeSeries::from_fn(grid(256), |_| 1.0);
        let j = rl_integral(&g, a).unwrap();
        // Independent route: ∫₀¹ (1−s)^{−1/2} ds / Γ(1/2) with the singular factor removed.
        let oracle = integrate_right_singular(|_| 1.0, 0.5, 0.0, 1.0, Tolerance::default()).value
            / gamma(0.5);
        let power_rule = 2.0 / std::f64::consts::PI.sqrt();
        assert!((oracle - power_rule).abs() < 1e-12);
        assert!((j.values()[256] - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-12);
    }

    #[test]
    fn near_unit_order_reduces_to_plain_integral() {
        let a = FracOrder::new(1.0 - 1e-6).unwrap();
        let g = TimeSeries::from_fn(grid(128), |t| t);
        let j = rl_integral(&g, a).unwrap();
        assert!((j.values()[128] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn derivative_of_constant() {
        // D^{0.3} 1 = t^{−0.3}/Γ(0.7); 1/Γ(0.7) = 0.770383183866566 at t = 1.
        let a = FracOrder::new(0.3).unwrap();
        let f = TimeSeries::from_fn(grid(1024), |_| 1.0);
        let d = rl_deriv_left(&f, a).unwrap();
        let closed = 1.0 / gamma(0.7);
        assert!((closed - 0.770_383_183_866_566).abs() < 1e-12);
        assert!((d.values()[1024] - closed).abs() / closed < 1e-3, "{}", d.values()[1024]);
    }

    #[test]
    fn short_grid_is_rejected() {
        let g = TimeSeries::from_fn(TimeGrid::new(0.1, 1).unwrap(), |t| t);
        let a = FracOrder::new(0.5).unwrap();
        assert!(rl_deriv_left(&g, a).is_err());
        let g = TimeSeries::from_fn(TimeGrid::new(0.1, 3).unwrap(), |t| t);
        assert!(rl_deriv_right(&g, a, 0).is_ok());
        assert!(rl_deriv_right(&g, a, 1).is_err());
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = FracOrder::new(0.5).unwrap();
        let f = TimeSeries::from_fn(grid(16), |t| t);
        let g = TimeSeries::from_fn(grid(32), |t| t);
        assert!(integration_by_parts_residual(&f, &g, a).is_err());
    }

    #[test]
    fn non_finite_input_is_flagged() {
        let a = FracOrder::new(0.5).unwrap();
        let g = TimeSeries::from_fn(grid(8), |t| if t > 0.5 { f64::NAN } else { t });
        assert!(g.is_flagged());
        assert!(rl_integral(&g, a).unwrap().is_flagged());
    }

    #[test]
    fn closed_form_outside_horizon_rejected() {
        let w = CutoffProfile::new(7.0, 1.0).unwrap();
        let a = FracOrder::new(0.3).unwrap();
        assert!(cutoff_deriv_closed_form(&w, a, 0, 1.5).is_err());
        assert!(cutoff_deriv_closed_form(&w, a, 0, -0.1).is_err());
        for k in 0..3 {
            assert_eq!(cutoff_deriv_closed_form(&w, a, k, 1.0).unwrap(), 0.0);
        }
        // Γ(8)/Γ(7.7) = 1.8196060193972328
        let v = cutoff_deriv_closed_form(&w, a, 0, 0.0).unwrap();
        assert!((v - 1.819_606_019_397_232_8).abs() < 1e-12);
    }

    #[test]
    fn series_weights_agree_with_direct_formula_at_switch() {
        let a = FracOrder::new(0.37).unwrap();
        let w = ProductWeights::new(a);
        let a1 = 1.37;
        for k in [SERIES_FROM, SERIES_FROM + 1, 200] {
            let kf = k as f64;
            let direct = (kf + 1.0).powf(a1) - 2.0 * kf.powf(a1) + (kf - 1.0).powf(a1);
            assert!((w.compute_inner(k) - direct).abs() < 1e-9 * direct.abs());
            let direct0 = (kf - 1.0).powf(a1) - (kf - a1) * kf.powf(0.37);
            assert!((w.first(k) - direct0).abs() < 1e-9 * direct0.abs());
        }
    }

    #[test]
    fn weights_reproduce_linear_functions_exactly() {
        // Product integration is exact for piecewise-linear g:
        // J^α t = t^{1+α}/Γ(2+α).
        let a = FracOrder::new(0.6).unwrap();
        let g = TimeSeries::from_fn(grid(300), |t| 2.0 - t);
        let j = rl_integral(&g, a).unwrap();
        for (m, t) in g.grid().nodes().enumerate() {
            let exact = 2.0 * t.powf(0.6) / gamma(1.6) - t.powf(1.6) / gamma(2.6);
            assert!((j.values()[m] - exact).abs() < 1e-11, "m={m}");
        }
    }

    #[test]
    fn single_stencil_derivatives_are_exact_on_polynomials() {
        // Stencils have 3 nodes for first derivatives and 5 otherwise.
        let dt = 0.1;
        let nodes: Vec<f64> = (0..12).map(|i| i as f64 * dt).collect();
        let quad: Vec<f64> = nodes.iter().map(|t| t * t).collect();
        let quartic: Vec<f64> = nodes.iter().map(|t| t.powi(4)).collect();
        for (m, x) in derivative(&quad, dt, 1).iter().enumerate() {
            assert!((x - 2.0 * nodes[m]).abs() < 1e-10);
        }
        for (m, x) in derivative(&quartic, dt, 2).iter().enumerate() {
            assert!((x - 12.0 * nodes[m].powi(2)).abs() < 1e-8);
        }
        for (m, x) in derivative(&quartic, dt, 3).iter().enumerate() {
            assert!((x - 24.0 * nodes[m]).abs() < 1e-6);
        }
    }
}
