//! Weighted energies, decay fits, inequality ratio tables and the weak-form
//! residual of computed solutions.

use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{Error, Result};
use crate::frac_ops::{cutoff_deriv_closed_form, rl_deriv_right, CutoffProfile, FracOrder, TimeGrid, TimeSeries};
use crate::quadrature::{integrate, integrate_right_singular, Tolerance};
use crate::spectral::{FieldState, Fourier, SpatialGrid};
use crate::stepper::{RunStatus, SolutionHistory};

/// Default shift in the exterior region `|x| > t^{1/2+δ}`.
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightParams {
    pub support_radius: f64,
    pub delta: f64,
}

impl WeightParams {
    pub fn new(support_radius: f64, delta: f64) -> Result<Self> {
        if !(support_radius > 0.0) {
            return Err(Error::domain(format!("K must be positive, got {support_radius}")));
        }
        if !(delta > 0.0) {
            return Err(Error::domain(format!("delta must be positive, got {delta}")));
        }
        Ok(WeightParams { support_radius, delta })
    }
}

/// `ψ(x,t) = ½(t+K − √((t+K)² − |x|²))` for `|x| < t+K`.
///
/// Evaluated as `|x|² / (2(s + √(s²−|x|²)))` with `s = t+K`, which avoids
/// cancellation and makes `ψ ≥ |x|²/(4s)` hold exactly in floating point.
pub fn psi(x: &[f64], t: f64, support_radius: f64) -> Result<f64> {
    if !(support_radius > 0.0) || !(t >= 0.0) {
        return Err(Error::domain("psi needs K > 0 and t >= 0"));
    }
    let r2: f64 = x.iter().map(|c| c * c).sum();
    let s = t + support_radius;
    if r2.sqrt() >= s {
        return Err(Error::domain(format!("|x| = {} lies outside the cone t + K = {s}", r2.sqrt())));
    }
    let root = (s * s - r2).sqrt().min(s);
    Ok(r2 / (2.0 * (s + root)))
}

/// Exponent `j` of `W(t) = (1+t)^j ‖Du(t)‖₂`.
pub fn energy_exponent(n: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!("gamma must lie in (0,1), got {gamma}")));
    }
    match n {
        1 => Ok(n as f64 / 4.0 - 0.5 + gamma),
        2 => Ok(gamma - 0.5),
        3 => Ok(gamma),
        _ => Err(Error::domain(format!("dimension must be 1, 2 or 3, got {n}"))),
    }
}

/// `(1+t)^j ‖Du‖₂` from a precomputed `‖Du‖₂`.
pub fn weighted_energy(t: f64, l2_du: f64, n: usize, gamma: f64) -> Result<f64> {
    Ok((1.0 + t).powf(energy_exponent(n, gamma)?) * l2_du)
}

fn du_density(fourier: &Fourier, state: &FieldState) -> Vec<f64> {
    let grad = fourier.gradient(&state.u);
    (0..state.u.len())
        .map(|i| state.v[i] * state.v[i] + grad.iter().map(|g| g[i] * g[i]).sum::<f64>())
        .collect()
}

/// `W(t)` of a state.
pub fn energy_w(state: &FieldState, n: usize, gamma: f64) -> Result<f64> {
    let fourier = Fourier::new(state.grid);
    let grad2 = fourier.gradient_norm_sq(&state.u);
    let v2: f64 = state.v.iter().map(|x| x * x).sum::<f64>() * state.grid.cell_volume();
    weighted_energy(state.time, (grad2 + v2).sqrt(), n, gamma)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExteriorEnergy {
    pub value: f64,
    /// No grid point lies in the region.
    pub empty: bool,
}

/// `‖Du(t)‖₂` over `|x| > t^{1/2+δ}`.
pub fn exterior_energy(state: &FieldState, delta: f64) -> Result<ExteriorEnergy> {
    exterior_energy_with(&Fourier::new(state.grid), state, delta)
}

/// [`exterior_energy`] reusing FFT plans.
pub fn exterior_energy_with(fourier: &Fourier, state: &FieldState, delta: f64) -> Result<ExteriorEnergy> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    if !(state.time >= 0.0) {
        return Err(Error::domain("state time must be non-negative"));
    }
    let front = state.time.powf(0.5 + delta);
    let density = du_density(fourier, state);
    let mut sum = 0.0;
    let mut count = 0usize;
    for (r, d) in state.grid.radii().zip(&density) {
        if r > front {
            sum += d;
            count += 1;
        }
    }
    Ok(ExteriorEnergy {
        value: (sum * state.grid.cell_volume()).sqrt(),
        empty: count == 0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares slope of `ln v` against `ln(1+t)` over the window.
pub fn fit_decay(series: &TimeSeries, window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::domain(format!("empty fit window ({lo}, {hi})")));
    }
    let grid = series.grid();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (m, v) in series.values().iter().enumerate() {
        let t = grid.node(m);
        if t < lo || t > hi {
            continue;
        }
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!(
                "non-positive sample {v} at t = {t}; the solution may have blown up or vanished"
            )));
        }
        xs.push((1.0 + t).ln());
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::domain(format!(
            "fit needs at least {MIN_FIT_SAMPLES} samples, window holds {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let r_squared = if syy <= f64::EPSILON * n * my.abs().max(1.0) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        exponent: slope,
        r_squared,
        window,
        samples: xs.len(),
    })
}

/// Which bound of the convolution estimate applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CuiCase {
    /// `max(a+θ, b) > 1`: `(1+t)^{−min(a+θ, b)}`
    AboveOne,
    /// `max(a+θ, b) = 1`: `(1+t)^{−min(a+θ, b)} ln(2+t)`
    EqualOne,
    /// `max(a+θ, b) < 1`: `(1+t)^{1−a−θ−b}`
    BelowOne,
}

impl CuiCase {
    pub fn select(theta: f64, a: f64, b: f64) -> Self {
        let m = (a + theta).max(b);
        if (m - 1.0).abs() <= 1e-12 {
            CuiCase::EqualOne
        } else if m > 1.0 {
            CuiCase::AboveOne
        } else {
            CuiCase::BelowOne
        }
    }

    pub fn bound(&self, theta: f64, a: f64, b: f64, t: f64) -> f64 {
        let low = (a + theta).min(b);
        match self {
            CuiCase::AboveOne => (1.0 + t).powf(-low),
            CuiCase::EqualOne => (1.0 + t).powf(-low) * (2.0 + t).ln(),
            CuiCase::BelowOne => (1.0 + t).powf(1.0 - a - theta - b),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CuiCase::AboveOne => "max>1",
            CuiCase::EqualOne => "max=1",
            CuiCase::BelowOne => "max<1",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuiRow {
    pub t: f64,
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CuiReport {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub case: CuiCase,
    pub rows: Vec<CuiRow>,
    pub sup_ratio: f64,
}

impl CuiReport {
    /// Log-log slope of the ratio over samples with `t ∈ [lo, hi]`.
    pub fn slope_between(&self, lo: f64, hi: f64) -> Option<f64> {
        let tail: Vec<&CuiRow> = self.rows.iter().filter(|r| r.t >= lo && r.t <= hi).collect();
        if tail.len() < 2 {
            return None;
        }
        let xs: Vec<f64> = tail.iter().map(|r| r.t.ln()).collect();
        let ys: Vec<f64> = tail.iter().map(|r| r.ratio.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        Some(sxy / sxx)
    }

    /// Slopes over the second-to-last and the last decade of sampled `t`.
    pub fn decade_slopes(&self) -> Option<(f64, f64)> {
        let t_max = self.rows.iter().map(|r| r.t).fold(0.0, f64::max);
        let last = self.slope_between(t_max / 10.0, t_max)?;
        let previous = self.slope_between(t_max / 100.0, t_max / 10.0)?;
        Some((previous, last))
    }

    /// No growth trend in the last decade: the ratio is flat or falling, or
    /// its growth rate is decaying as it settles towards a limit.
    pub fn trend_is_bounded(&self) -> bool {
        match self.decade_slopes() {
            Some((previous, last)) => last <= TREND_FLAT || last <= TREND_DECAY * previous,
            None => false,
        }
    }
}

/// Log-log slope treated as flat.
pub const TREND_FLAT: f64 = 1e-3;
/// Required per-decade contraction of a positive slope.
pub const TREND_DECAY: f64 = 0.8;

/// `∫₀ᵗ (t−τ)^{−θ} (1+t−τ)^{−a} (1+τ)^{−b} dτ`.
pub fn cui_integral(theta: f64, a: f64, b: f64, t: f64, tol: Tolerance) -> Result<(f64, bool)> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::domain(format!("theta must lie in [0,1), got {theta}")));
    }
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::domain("a and b must be non-negative"));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let half = 0.5 * t;
    let near_zero = integrate(
        |tau| (t - tau).powf(-theta) * (1.0 + t - tau).powf(-a) * (1.0 + tau).powf(-b),
        0.0,
        half,
        tol,
    );
    let near_t = integrate_right_singular(
        |tau| (1.0 + t - tau).powf(-a) * (1.0 + tau).powf(-b),
        theta,
        half,
        t,
        tol,
    );
    Ok((near_zero.value + near_t.value, near_zero.converged && near_t.converged))
}

/// Ratio table of the convolution integral against its case bound.
pub fn cui_bound_check(theta: f64, a: f64, b: f64, t_samples: &[f64]) -> Result<CuiReport> {
    let tol = Tolerance {
        abs: 1e-10,
        rel: 1e-10,
        max_intervals: 20_000,
    };
    let case = CuiCase::select(theta, a, b);
    let mut rows = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let (lhs, converged) = cui_integral(theta, a, b, t, tol)?;
        let bound = case.bound(theta, a, b, t);
        rows.push(CuiRow {
            t,
            lhs,
            bound,
            ratio: lhs / bound,
            converged,
        });
    }
    let sup_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(CuiReport {
        theta,
        a,
        b,
        case,
        rows,
        sup_ratio,
    })
}

/// `count` log-spaced samples on `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

/// `‖e^{σψ} u‖_q / [(1+t)^{(1−θ(q))/2} ‖∇u‖₂^{1−σ} ‖e^{ψ} ∇u‖₂^σ]` with
/// `θ(q) = n(1/2 − 1/q)`.
pub fn gagliardo_ratio(
    grid: &SpatialGrid,
    u: &[f64],
    t: f64,
    q: f64,
    sigma: f64,
    support_radius: f64,
) -> Result<f64> {
    if u.len() != grid.len() {
        return Err(Error::domain("field length does not match grid"));
    }
    let n = grid.dim() as f64;
    let theta = n * (0.5 - 1.0 / q);
    if !(q >= 1.0) || !(-1e-12..=1.0 + 1e-12).contains(&theta) {
        return Err(Error::domain(format!("theta(q) = {theta} must lie in [0,1]")));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::domain(format!("sigma must lie in (0,1], got {sigma}")));
    }
    let front = t + support_radius;
    let mut weights = vec![0.0; grid.len()];
    for (i, r) in grid.radii().enumerate() {
        if r < front {
            weights[i] = psi(&grid.point(i), t, support_radius)?;
        } else if u[i] != 0.0 {
            return Err(Error::domain("field is not supported inside B(t+K)"));
        }
    }
    let fourier = Fourier::new(*grid);
    let grad = fourier.gradient(u);
    let vol = grid.cell_volume();
    let mut grad2 = 0.0;
    let mut weighted_grad2 = 0.0;
    let mut lq = 0.0;
    for i in 0..grid.len() {
        let g2: f64 = grad.iter().map(|g| g[i] * g[i]).sum();
        let w = weights[i];
        grad2 += g2;
        weighted_grad2 += (2.0 * w).exp() * g2;
        lq += ((sigma * w).exp() * u[i].abs()).powf(q);
    }
    let numerator = (lq * vol).powf(1.0 / q);
    let denominator = (1.0 + t).powf((1.0 - theta) / 2.0)
        * (grad2 * vol).sqrt().powf(1.0 - sigma)
        * (weighted_grad2 * vol).sqrt().powf(sigma);
    if !(denominator > 0.0) {
        return Err(Error::domain("gradient vanishes; ratio undefined"));
    }
    Ok(numerator / denominator)
}

/// `Φ`: 1 on `[0,1]`, 0 on `[2,∞)`, a monotone quintic in between
/// (`C²`). Returns `(Φ, Φ', Φ'')` at `s`.
pub fn cutoff(s: f64) -> (f64, f64, f64) {
    if s <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    let x = s - 1.0;
    let value = 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
    let first = -30.0 * x * x * (1.0 - x) * (1.0 - x);
    let second = -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    (value, first, second)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunctionParams {
    pub ell: u32,
    pub eta: f64,
    /// Spatial scale `B`; the cutoff is supported in `B(2B)`.
    pub radius: f64,
    pub horizon: f64,
    pub alpha: FracOrder,
}

impl TestFunctionParams {
    /// `ℓ = ⌈2p'⌉ + 2` and `η = 12`.
    pub fn new(p: f64, gamma: f64, radius: f64, horizon: f64) -> Result<Self> {
        let alpha = FracOrder::from_memory_exponent(gamma)?;
        let ell = (2.0 * p / (p - 1.0)).ceil() as u32 + 2;
        let params = TestFunctionParams {
            ell,
            eta: 12.0,
            radius,
            horizon,
            alpha,
        };
        params.validate(p)?;
        Ok(params)
    }

    pub fn validate(&self, p: f64) -> Result<()> {
        if !(p > 1.0) {
            return Err(Error::domain("p must exceed 1"));
        }
        let p_prime = p / (p - 1.0);
        if (self.ell as f64) < 2.0 * p_prime + 1.0 {
            return Err(Error::domain(format!(
                "ell = {} must be at least 2p' + 1 = {}",
                self.ell,
                2.0 * p_prime + 1.0
            )));
        }
        if self.eta < self.alpha.value() + 3.0 {
            return Err(Error::domain("eta must be at least alpha + 3"));
        }
        if !(self.radius > 0.0 && self.horizon > 0.0) {
            return Err(Error::domain("cutoff radius and horizon must be positive"));
        }
        Ok(())
    }

    /// `φ₁^ℓ(x) = Φ(|x|/B)^ℓ`.
    pub fn spatial(&self, r: f64) -> f64 {
        cutoff(r / self.radius).0.powi(self.ell as i32)
    }

    /// `Δ φ₁^ℓ` for a radial function in `n` dimensions.
    pub fn spatial_laplacian(&self, r: f64, n: usize) -> f64 {
        let s = r / self.radius;
        if s <= 1.0 || s >= 2.0 {
            return 0.0;
        }
        let (f, f1, f2) = cutoff(s);
        let l = self.ell as f64;
        let b2 = self.radius * self.radius;
        let radial = l * (l - 1.0) * f.powi(self.ell as i32 - 2) * f1 * f1 + l * f.powi(self.ell as i32 - 1) * f2;
        let angular = (n as f64 - 1.0) / s * l * f.powi(self.ell as i32 - 1) * f1;
        (radial + angular) / b2
    }
}

/// Both sides of the weak formulation for one history and test function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `max(|φ(·,T)|, |φ_t(·,T)|)` relative to the sup of the time factor.
    pub endpoint_size: f64,
}

impl WeakResidual {
    pub fn relative(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.residual / scale
        }
    }
}

/// Residual of
/// `∫∫Fφ + ∫u₁φ(0) + ∫u₀(φ(0) − φ_t(0)) = ∫∫u(φ_tt − φ_t − Δφ)` with
/// `φ = φ₁^ℓ(x) D^α_{t|T} φ₂(t)`, `φ₂ = (1 − t/T)₊^η` and `F` the recorded
/// memory forcing.
pub fn weak_residual(history: &SolutionHistory, params: &TestFunctionParams, p: f64, gamma: f64) -> Result<WeakResidual> {
    params.validate(p)?;
    let order = FracOrder::from_memory_exponent(gamma)?;
    if (order.value() - params.alpha.value()).abs() > 1e-14 {
        return Err(Error::domain("test-function order does not match 1 - gamma"));
    }
    let dt = history.dt();
    let t_horizon = params.horizon;
    let steps = (t_horizon / dt).round() as usize;
    if ((steps as f64) * dt - t_horizon).abs() > 1e-9 * t_horizon.max(1.0) {
        return Err(Error::domain("horizon must be a node of the history grid"));
    }
    if steps >= history.states.len() {
        let reason = match history.status {
            RunStatus::BlowUpDetected { t_detect } => format!("history ends by blow-up at t = {t_detect}"),
            _ => "history ends before the horizon".into(),
        };
        return Err(Error::domain(reason));
    }
    let grid = history.config.grid;
    if 2.0 * params.radius >= grid.half_length() {
        return Err(Error::domain("cutoff support B(2B) must fit inside the box"));
    }
    let time = TimeGrid::new(dt, steps)?;
    let profile = TimeSeries::from_fn(time, |t| (1.0 - t / t_horizon).max(0.0).powf(params.eta));
    let theta0 = rl_deriv_right(&profile, order, 0)?;
    let theta1 = rl_deriv_right(&profile, order, 1)?;
    let theta2 = rl_deriv_right(&profile, order, 2)?;
    let (th0, th1, th2) = (theta0.values(), theta1.values(), theta2.values());

    let sup = th0.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let endpoint_size = th0[steps].abs().max(th1[steps].abs()) / sup;

    let n = grid.dim();
    let weight: Vec<f64> = grid.radii().map(|r| params.spatial(r)).collect();
    let laplacian: Vec<f64> = grid.radii().map(|r| params.spatial_laplacian(r, n)).collect();
    let vol = grid.cell_volume();
    let pair = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * vol;

    let mut memory = vec![0.0; steps + 1];
    let mut bulk = vec![0.0; steps + 1];
    for m in 0..=steps {
        let u = &history.states[m].u;
        let up = pair(u, &weight);
        let ulap = pair(u, &laplacian);
        memory[m] = th0[m] * pair(&history.forcing_record[m], &weight);
        // φ_tt − φ_t − Δφ with φ_t = −φ₁^ℓ D^{1+α}φ₂ and φ_tt = φ₁^ℓ D^{2+α}φ₂.
        bulk[m] = (th2[m] + th1[m]) * up - th0[m] * ulap;
    }
    let state0 = &history.states[0];
    let data = th0[0] * pair(&state0.v, &weight) + (th0[0] + th1[0]) * pair(&state0.u, &weight);
    let lhs = crate::frac_ops::trapezoid(&memory, dt) + data;
    let rhs = crate::frac_ops::trapezoid(&bulk, dt);
    Ok(WeakResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        endpoint_size,
    })
}

/// The three Hölder envelopes of the test-function method with `B = √T`:
/// the `D^{2+α}` term scales like `T^{e₁}`, the `D^{1+α}` and Laplacian
/// terms like `T^{e₂}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub second_time: f64,
    pub first_time: f64,
    pub laplacian: f64,
}

/// Computes the envelopes by quadrature:
/// `∫∫ |Lφ|^{p'} (φ₁^ℓ φ₂)^{−p'/p}` for each piece `L` of the adjoint
/// operator, in `n` dimensions with radial symmetry.
pub fn weak_envelope(n: usize, gamma: f64, p: f64, horizon: f64, ell: u32, eta: f64) -> Result<Envelope> {
    if !(1..=3).contains(&n) {
        return Err(Error::domain("dimension must be 1, 2 or 3"));
    }
    let alpha = FracOrder::from_memory_exponent(gamma)?;
    let radius = horizon.sqrt();
    let params = TestFunctionParams {
        ell,
        eta,
        radius,
        horizon,
        alpha,
    };
    params.validate(p)?;
    let pp = p / (p - 1.0);
    let profile = CutoffProfile::new(eta, horizon)?;
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-11,
        max_intervals: 4000,
    };
    // Time factors: |D^{k+α}φ₂|^{p'} φ₂^{−p'/p}.
    let time_factor = |k: u32| {
        integrate(
            |t| {
                let base = (1.0 - t / horizon).max(0.0);
                if base == 0.0 {
                    return 0.0;
                }
                let d = cutoff_deriv_closed_form(&profile, alpha, k, t).unwrap_or(0.0);
                d.abs().powf(pp) * base.powf(-eta * pp / p)
            },
            0.0,
            horizon,
            tol,
        )
        .value
    };
    let surface = match n {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    };
    let shell = |r: f64| surface * r.powi(n as i32 - 1);
    let ell_f = ell as f64;
    // Spatial factors: ∫ φ₁^ℓ and ∫ |Δφ₁^ℓ|^{p'} φ₁^{−ℓp'/p}, the latter
    // written as Φ^{ℓ−2p'} |q|^{p'} to avoid 0/0 at the outer edge.
    let mass = integrate(|r| params.spatial(r) * shell(r), 0.0, 2.0 * radius, tol).value;
    let lap = integrate(
        |r| {
            let s = r / radius;
            if s <= 1.0 || s >= 2.0 {
                return 0.0;
            }
            let (f, f1, f2) = cutoff(s);
            let q = (ell_f * (ell_f - 1.0) * f1 * f1 + ell_f * f * (f2 + (n as f64 - 1.0) / s * f1)) / (radius * radius);
            f.powf(ell_f - 2.0 * pp) * q.abs().powf(pp) * shell(r)
        },
        radius,
        2.0 * radius,
        tol,
    )
    .value;
    Ok(Envelope {
        second_time: mass * time_factor(2),
        first_time: mass * time_factor(1),
        laplacian: lap * time_factor(0),
    })
}

/// `Γ(σ+1)/Γ(σ−α+1)`-style constant check: `∫₀ᵀ (τ−t)^{−α} ∂_τ w₁ dτ` by
/// quadrature compared with the closed form at `t = 0`, `k = 0`.
pub fn closed_form_quadrature_check(sigma: f64, alpha: f64) -> Result<(f64, f64)> {
    let order = FracOrder::new(alpha)?;
    let profile = CutoffProfile::new(sigma, 1.0)?;
    let closed = cutoff_deriv_closed_form(&profile, order, 0, 0.0)?;
    // D^α_{t|1} w at 0 = −(1/Γ(1−α)) ∫₀¹ τ^{−α} w'(τ) dτ for w(1) = 0.
    let q = crate::quadrature::integrate_left_singular(
        |tau| sigma * (1.0 - tau).max(0.0).powf(sigma - 1.0),
        alpha,
        0.0,
        1.0,
        Tolerance::default(),
    );
    Ok((q.value / gamma_fn(1.0 - alpha), closed))
}
