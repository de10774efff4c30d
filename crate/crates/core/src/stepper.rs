//! Mild-solution integrator for `u_tt − Δu + u_t = ∫₀ᵗ (t−s)^{−γ} |u(s)|^p ds`.
//!
//! Each step applies the Duhamel formula with the memory forcing linear in
//! time across the step. The forcing at the new node depends on the unknown
//! `u(t_{m+1})`, so it is predicted by extrapolation and corrected once.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frac_ops::{FracOrder, ProductWeights, TimeGrid, TimeSeries};
use crate::spectral::{l2_norm, FieldState, Propagator, SpatialGrid};

/// Initial-data presets. Both presets use the same profile for `u₀` and `u₁`.
#[derive(Clone, Debug, PartialEq)]
pub enum DataShape {
    /// Gaussian of width `K/8` with a smooth cut between `0.75K` and `K`.
    GaussianBump,
    /// Equal to one on `B(K/2)` with a smooth cut down to zero at `K`.
    Plateau,
    /// User samples; rescaled to the configured amplitude.
    Custom { u0: Vec<f64>, u1: Vec<f64> },
}

impl DataShape {
    pub fn name(&self) -> &'static str {
        match self {
            DataShape::GaussianBump => "gaussian_bump",
            DataShape::Plateau => "plateau",
            DataShape::Custom { .. } => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub gamma: f64,
    pub p: f64,
    /// Support radius `K` of the data.
    pub support_radius: f64,
    /// Target for `‖u₀‖_{H¹} + ‖u₁‖₂`.
    pub amplitude: f64,
    pub data_shape: DataShape,
    pub grid: SpatialGrid,
    pub dt: f64,
    pub t_end: f64,
    /// Relative growth of `‖u‖_{H¹} + ‖u_t‖₂` that counts as blow-up.
    pub blowup_threshold: f64,
    /// When false the memory forcing is switched off and every step is the
    /// free linear flow.
    pub nonlinear: bool,
}

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;

/// `min(0.25, 0.5·dx)`.
pub fn default_dt(grid: &SpatialGrid) -> f64 {
    0.25f64.min(0.5 * grid.dx())
}

impl ScenarioConfig {
    /// Gaussian bump data of unit amplitude, default `dt` and threshold.
    pub fn new(grid: SpatialGrid, gamma: f64, p: f64, support_radius: f64, t_end: f64) -> Result<Self> {
        let config = ScenarioConfig {
            gamma,
            p,
            support_radius,
            amplitude: 1.0,
            data_shape: DataShape::GaussianBump,
            grid,
            dt: default_dt(&grid),
            t_end,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            nonlinear: true,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn order(&self) -> Result<FracOrder> {
        FracOrder::from_memory_exponent(self.gamma)
    }

    /// Number of uniform steps; the run ends at the first node `≥ t_end`.
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Validation(format!("gamma must lie in (0,1), got {}", self.gamma)));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Validation(format!("p must exceed 1, got {}", self.p)));
        }
        if !(self.support_radius > 0.0) {
            return Err(Error::Validation(format!("K must be positive, got {}", self.support_radius)));
        }
        if self.support_radius >= self.grid.half_length() {
            return Err(Error::Validation(format!(
                "support B(K) must fit inside the box: K = {} but box half-length is {}",
                self.support_radius,
                self.grid.half_length()
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::Validation("amplitude must be finite".into()));
        }
        if !(self.dt > 0.0 && self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Validation("dt and t_end must be positive".into()));
        }
        if self.dt >= self.t_end {
            return Err(Error::Validation(format!(
                "dt = {} must be smaller than t_end = {}",
                self.dt, self.t_end
            )));
        }
        if !(self.blowup_threshold > 1.0) {
            return Err(Error::Validation(format!(
                "blowup_threshold must exceed 1, got {}",
                self.blowup_threshold
            )));
        }
        if let DataShape::Custom { u0, u1 } = &self.data_shape {
            if u0.len() != self.grid.len() || u1.len() != self.grid.len() {
                return Err(Error::Validation("custom data length does not match grid".into()));
            }
        }
        Ok(())
    }
}

/// `C^∞` step: 0 for `s ≤ 0`, 1 for `s ≥ 1`.
fn smooth_step(s: f64) -> f64 {
    let e = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = e(s);
    let b = e(1.0 - s);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// 1 on `[0, inner]`, 0 from `outer` on, smooth in between.
fn rolloff(r: f64, inner: f64, outer: f64) -> f64 {
    smooth_step((outer - r) / (outer - inner))
}

/// `‖u‖_{H¹}` with the spectral gradient.
pub fn h1_norm(propagator: &Propagator, u: &[f64]) -> f64 {
    let grid = propagator.grid();
    let l2 = l2_norm(&grid, u);
    (l2 * l2 + propagator.fourier().gradient_norm_sq(u)).sqrt()
}

/// Initial state `(u₀, u₁)` supported in `B(K)`, scaled so that
/// `‖u₀‖_{H¹} + ‖u₁‖₂ = ε`.
pub fn make_initial_data(config: &ScenarioConfig) -> Result<FieldState> {
    let grid = config.grid;
    let k = config.support_radius;
    if k >= grid.half_length() {
        return Err(Error::domain(format!(
            "support radius {k} does not fit in box of half-length {}",
            grid.half_length()
        )));
    }
    let (u0, u1) = match &config.data_shape {
        DataShape::GaussianBump => {
            let width = k / 8.0;
            let u: Vec<f64> = grid
                .radii()
                .map(|r| (-(r * r) / (2.0 * width * width)).exp() * rolloff(r, 0.75 * k, k))
                .collect();
            (u.clone(), u)
        }
        DataShape::Plateau => {
            let u: Vec<f64> = grid.radii().map(|r| rolloff(r, 0.5 * k, k)).collect();
            (u.clone(), u)
        }
        DataShape::Custom { u0, u1 } => {
            if u0.len() != grid.len() || u1.len() != grid.len() {
                return Err(Error::domain("custom data length does not match grid"));
            }
            let total = l2_norm(&grid, u0) + l2_norm(&grid, u1);
            let outside: Vec<(f64, f64)> = grid
                .radii()
                .zip(u0.iter().zip(u1))
                .filter(|(r, _)| *r > k)
                .map(|(_, (a, b))| (*a, *b))
                .collect();
            let mass: f64 = outside.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt()
                * grid.cell_volume().sqrt();
            if mass > 1e-10 * total {
                return Err(Error::domain("custom data is not supported in B(K)"));
            }
            (u0.clone(), u1.clone())
        }
    };
    let propagator = Propagator::new(grid);
    let norm = h1_norm(&propagator, &u0) + l2_norm(&grid, &u1);
    if config.amplitude == 0.0 || norm == 0.0 {
        return Ok(FieldState::zeros(grid, 0.0));
    }
    let scale = config.amplitude / norm;
    let u0 = u0.into_iter().map(|x| x * scale).collect();
    let u1 = u1.into_iter().map(|x| x * scale).collect();
    FieldState::new(grid, u0, u1, 0.0)
}

/// `|x|^p` as `exp(p ln|x|)`, exactly zero at zero.
pub fn abs_pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (p * x.abs().ln()).exp()
    }
}

fn nonlinearity(u: &[f64], p: f64) -> Vec<f64> {
    u.iter().map(|&x| abs_pow(x, p)).collect()
}

/// Norms of one recorded state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub l2_u: f64,
    pub h1_u: f64,
    pub l2_ut: f64,
    /// `‖Du‖₂` with `D = (∂_t, ∇)`.
    pub l2_du: f64,
    pub forcing_l2: f64,
    /// `‖u‖₂` restricted to `|x| > t + K`.
    pub exterior_mass: f64,
}

impl StepRecord {
    pub fn measure(propagator: &Propagator, state: &FieldState, forcing: &[f64], support_radius: f64) -> Self {
        let grid = state.grid;
        let l2_u = l2_norm(&grid, &state.u);
        let grad2 = propagator.fourier().gradient_norm_sq(&state.u);
        let l2_ut = l2_norm(&grid, &state.v);
        let front = state.time + support_radius;
        let exterior: f64 = grid
            .radii()
            .zip(&state.u)
            .filter(|(r, _)| *r > front)
            .map(|(_, u)| u * u)
            .sum();
        StepRecord {
            t: state.time,
            l2_u,
            h1_u: (l2_u * l2_u + grad2).sqrt(),
            l2_ut,
            l2_du: (l2_ut * l2_ut + grad2).sqrt(),
            forcing_l2: l2_norm(&grid, forcing),
            exterior_mass: (exterior * grid.cell_volume()).sqrt(),
        }
    }

    /// `‖u‖_{H¹} + ‖u_t‖₂`.
    pub fn blowup_functional(&self) -> f64 {
        self.h1_u + self.l2_ut
    }

    pub fn is_finite(&self) -> bool {
        [self.l2_u, self.h1_u, self.l2_ut, self.l2_du, self.forcing_l2, self.exterior_mass]
            .iter()
            .all(|x| x.is_finite())
    }
}

/// True iff `‖u‖_{H¹} + ‖u_t‖₂` reached `threshold` times its initial value
/// (closed condition) or any norm is non-finite. A zero initial value never
/// triggers the growth test.
pub fn detect_blowup(record: &StepRecord, initial: &StepRecord, threshold: f64) -> bool {
    if !record.is_finite() {
        return true;
    }
    let base = initial.blowup_functional();
    base > 0.0 && record.blowup_functional() >= threshold * base
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Running,
    Completed,
    BlowUpDetected { t_detect: f64 },
    NumericalFailure { t: f64, reason: String },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Running => "Running",
            RunStatus::Completed => "Completed",
            RunStatus::BlowUpDetected { .. } => "BlowUpDetected",
            RunStatus::NumericalFailure { .. } => "NumericalFailure",
        }
    }
}

/// States and memory records of a run, aligned by node index.
#[derive(Clone, Debug)]
pub struct SolutionHistory {
    pub config: ScenarioConfig,
    pub states: Vec<FieldState>,
    /// `|u(t_m)|^p`, or zeros for a linear run.
    pub nonlinearity_record: Vec<Vec<f64>>,
    /// `f(t_m)`, the memory forcing at each node.
    pub forcing_record: Vec<Vec<f64>>,
    pub records: Vec<StepRecord>,
    pub status: RunStatus,
}

impl SolutionHistory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.time)
    }

    pub fn dt(&self) -> f64 {
        self.config.dt
    }

    pub fn final_state(&self) -> &FieldState {
        self.states.last().expect("a history always holds the initial state")
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::new(self.config.dt, self.states.len() - 1).expect("dt was validated")
    }

    /// One norm of every record as a series on the run's time grid.
    pub fn series(&self, select: impl Fn(&StepRecord) -> f64) -> TimeSeries {
        TimeSeries::new(self.time_grid(), self.records.iter().map(select).collect())
            .expect("one record per node")
    }

    pub fn t_detect(&self) -> Option<f64> {
        match self.status {
            RunStatus::BlowUpDetected { t_detect } => Some(t_detect),
            _ => None,
        }
    }
}

/// Incremental evaluation of `∫₀^{t_m} (t_m−s)^{−γ} g(s) ds` from node values
/// of `g` by piecewise-linear product integration.
#[derive(Clone, Debug)]
pub struct MemoryKernel {
    weights: ProductWeights,
    scale: f64,
}

const CHUNK: usize = 512;

impl MemoryKernel {
    pub fn new(order: FracOrder, dt: f64) -> Self {
        let weights = ProductWeights::new(order);
        // Γ(α) h^α / Γ(α+2) = h^α / (α(α+1)).
        let alpha = order.value();
        let scale = dt.powf(alpha) / (alpha * (alpha + 1.0));
        MemoryKernel { weights, scale }
    }

    /// Contribution of nodes `0..m` to the forcing at node `m`, before the
    /// common scale; the node `m` itself enters with weight one.
    pub fn history_sum(&mut self, record: &[Vec<f64>], m: usize) -> Vec<f64> {
        let len = record[0].len();
        let mut out = vec![0.0; len];
        if m == 0 {
            return out;
        }
        self.weights.ensure(m);
        let coeffs: Vec<f64> = (0..m).map(|j| self.weights.weight(j, m)).collect();
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let offset = c * CHUNK;
            for (j, w) in coeffs.iter().enumerate() {
                let g = &record[j][offset..offset + chunk.len()];
                for (acc, x) in chunk.iter_mut().zip(g) {
                    *acc += w * x;
                }
            }
        });
        out
    }

    /// Forcing at node `m` from the history part and the node-`m` sample.
    pub fn complete(&self, history: &[f64], endpoint: &[f64], m: usize) -> Vec<f64> {
        if m == 0 {
            return vec![0.0; endpoint.len()];
        }
        history.iter().zip(endpoint).map(|(h, g)| self.scale * (h + g)).collect()
    }

    pub fn evaluate(&mut self, record: &[Vec<f64>], m: usize) -> Vec<f64> {
        let history = self.history_sum(record, m);
        self.complete(&history, &record[m], m)
    }
}

/// The memory forcing at node `m` recomputed from the recorded
/// nonlinearity.
pub fn memory_forcing(history: &SolutionHistory, m: usize) -> Result<Vec<f64>> {
    if m >= history.nonlinearity_record.len() {
        return Err(Error::domain(format!(
            "history covers nodes 0..{} but node {m} was requested",
            history.nonlinearity_record.len()
        )));
    }
    let mut kernel = MemoryKernel::new(history.config.order()?, history.config.dt);
    Ok(kernel.evaluate(&history.nonlinearity_record, m))
}

/// Integrates the scenario to `t_end`, stopping early on blow-up or
/// numerical failure.
pub fn run(config: &ScenarioConfig) -> Result<SolutionHistory> {
    config.validate()?;
    let order = config.order()?;
    let dt = config.dt;
    let grid = config.grid;
    let propagator = Propagator::with_step(grid, dt)?;
    let state0 = make_initial_data(config)?;
    let zeros = vec![0.0; grid.len()];
    let g0 = if config.nonlinear { nonlinearity(&state0.u, config.p) } else { zeros.clone() };
    let initial = StepRecord::measure(&propagator, &state0, &zeros, config.support_radius);
    let mut history = SolutionHistory {
        config: config.clone(),
        states: vec![state0],
        nonlinearity_record: vec![g0],
        forcing_record: vec![zeros.clone()],
        records: vec![initial],
        status: RunStatus::Running,
    };
    let mut kernel = MemoryKernel::new(order, dt);

    for m in 0..config.n_steps() {
        let state = &history.states[m];
        let (mut next, g_next, f_next) = if config.nonlinear {
            let hist = kernel.history_sum(&history.nonlinearity_record, m + 1);
            let g_m = &history.nonlinearity_record[m];
            let g_pred: Vec<f64> = if m == 0 {
                g_m.clone()
            } else {
                let g_prev = &history.nonlinearity_record[m - 1];
                g_m.iter().zip(g_prev).map(|(a, b)| 2.0 * a - b).collect()
            };
            let f_m = &history.forcing_record[m];
            let f_pred = kernel.complete(&hist, &g_pred, m + 1);
            let predicted = propagator.duhamel_step(state, f_m, &f_pred, dt)?;
            let f_corr = kernel.complete(&hist, &nonlinearity(&predicted.u, config.p), m + 1);
            let next = if predicted.is_finite() {
                propagator.duhamel_step(state, f_m, &f_corr, dt)?
            } else {
                predicted
            };
            let g_next = nonlinearity(&next.u, config.p);
            let f_next = kernel.complete(&hist, &g_next, m + 1);
            (next, g_next, f_next)
        } else {
            (propagator.linear_evolve(state, dt)?, zeros.clone(), zeros.clone())
        };
        // Node times from the index, not accumulated sums.
        next.time = (m + 1) as f64 * dt;
        let record = StepRecord::measure(&propagator, &next, &f_next, config.support_radius);
        if detect_blowup(&record, &initial, config.blowup_threshold) {
            if record.is_finite() {
                history.status = RunStatus::BlowUpDetected { t_detect: next.time };
                history.states.push(next);
                history.nonlinearity_record.push(g_next);
                history.forcing_record.push(f_next);
                history.records.push(record);
            } else {
                let last = history.records[m].blowup_functional();
                let base = initial.blowup_functional();
                // Overflow right after strong growth is the blow-up itself.
                history.status = if base > 0.0 && last >= base * config.blowup_threshold.sqrt() {
                    RunStatus::BlowUpDetected { t_detect: next.time }
                } else {
                    RunStatus::NumericalFailure {
                        t: next.time,
                        reason: "non-finite field without prior growth".into(),
                    }
                };
            }
            return Ok(history);
        }
        history.states.push(next);
        history.nonlinearity_record.push(g_next);
        history.forcing_record.push(f_next);
        history.records.push(record);
    }
    history.status = RunStatus::Completed;
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::linear_evolve;

    fn small_config(nonlinear: bool) -> ScenarioConfig {
        let grid = SpatialGrid::new(1, 32.0, 256).unwrap();
        let mut c = ScenarioConfig::new(grid, 0.9, 3.0, 4.0, 4.0).unwrap();
        c.dt = 0.1;
        c.amplitude = 0.1;
        c.nonlinear = nonlinear;
        c
    }

    #[test]
    fn zero_amplitude_is_zero_state() {
        let mut c = small_config(true);
        c.amplitude = 0.0;
        let s = make_initial_data(&c).unwrap();
        assert!(s.u.iter().chain(&s.v).all(|&x| x == 0.0));
        let h = run(&c).unwrap();
        assert_eq!(h.status, RunStatus::Completed);
        assert!(h.final_state().u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn bump_data_is_positive_and_supported() {
        for shape in [DataShape::GaussianBump, DataShape::Plateau] {
            let mut c = small_config(true);
            c.data_shape = shape;
            let s = make_initial_data(&c).unwrap();
            assert!(s.u.iter().sum::<f64>() > 0.0 && s.v.iter().sum::<f64>() > 0.0);
            let outside: f64 = c.grid.radii().zip(&s.u).filter(|(r, _)| *r > 4.0).map(|(_, u)| u * u).sum();
            let total: f64 = s.u.iter().map(|u| u * u).sum();
            assert!(outside.sqrt() <= 1e-10 * total.sqrt());
            let p = Propagator::new(c.grid);
            let norm = h1_norm(&p, &s.u) + l2_norm(&c.grid, &s.v);
            assert!((norm - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn oversized_support_rejected() {
        let grid = SpatialGrid::new(1, 4.0, 64).unwrap();
        assert!(ScenarioConfig::new(grid, 0.5, 2.0, 4.0, 1.0).is_err());
    }

    #[test]
    fn frozen_unit_history_gives_power_law() {
        let mut c = small_config(true);
        c.dt = 0.01;
        let order = c.order().unwrap();
        let mut kernel = MemoryKernel::new(order, c.dt);
        let record = vec![vec![1.0; 3]; 401];
        for m in [1, 50, 400] {
            let f = kernel.evaluate(&record, m);
            let t = m as f64 * c.dt;
            let want = t.powf(1.0 - c.gamma) / (1.0 - c.gamma);
            assert!((f[0] - want).abs() < 1e-12 * want.max(1.0), "{} vs {want}", f[0]);
        }
    }

    #[test]
    fn small_gamma_reduces_to_trapezoid() {
        let order = FracOrder::from_memory_exponent(1e-12).unwrap();
        let dt = 0.05;
        let mut kernel = MemoryKernel::new(order, dt);
        let record: Vec<Vec<f64>> = (0..=40).map(|j| vec![(j as f64 * dt).exp()]).collect();
        let f = kernel.evaluate(&record, 40);
        let values: Vec<f64> = record.iter().map(|r| r[0]).collect();
        let trap = crate::frac_ops::trapezoid(&values, dt);
        assert!((f[0] - trap).abs() < 1e-9 * trap);
    }

    #[test]
    fn disabled_nonlinearity_matches_linear_flow() {
        let c = small_config(false);
        let h = run(&c).unwrap();
        let reference = linear_evolve(&h.states[0], h.final_state().time).unwrap();
        let err = h.final_state().u.iter().zip(&reference.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        assert!(h.forcing_record.iter().all(|f| f.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn forcing_record_matches_recomputation() {
        let h = run(&small_config(true)).unwrap();
        for m in [0, 1, 7, h.states.len() - 1] {
            let f = memory_forcing(&h, m).unwrap();
            let diff = f.iter().zip(&h.forcing_record[m]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-14, "node {m}: {diff}");
        }
        assert!(memory_forcing(&h, h.states.len()).is_err());
    }

    #[test]
    fn blowup_detection_conventions() {
        let base = StepRecord {
            t: 0.0,
            l2_u: 1.0,
            h1_u: 2.0,
            l2_ut: 1.0,
            l2_du: 1.0,
            forcing_l2: 0.0,
            exterior_mass: 0.0,
        };
        assert!(!detect_blowup(&base, &base, 1e6));
        let at = StepRecord { h1_u: 3e6 - 1.0, l2_ut: 1.0, ..base };
        assert!(detect_blowup(&at, &base, 1e6));
        let below = StepRecord { h1_u: 3e6 - 2.0, l2_ut: 1.0, ..base };
        assert!(!detect_blowup(&below, &base, 1e6));
        let nan = StepRecord { l2_u: f64::NAN, ..base };
        assert!(detect_blowup(&nan, &base, f64::MAX));
    }

    #[test]
    fn identical_configs_are_bit_identical() {
        let c = small_config(true);
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn abs_pow_handles_zero_and_sign() {
        assert_eq!(abs_pow(0.0, 2.5), 0.0);
        assert!((abs_pow(-2.0, 3.0) - 8.0).abs() < 1e-14);
    }
}
