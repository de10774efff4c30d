//! Linear damped-wave propagator `u_tt − Δu + u_t = f` on a periodic box.
//!
//! In Fourier variables the solution operator is built from
//!
//! ```text
//! K̂₀(t, ξ) = e^{−t/2} cos(t a(ξ)),   K̂₁(t, ξ) = e^{−t/2} sin(t a(ξ)) / a(ξ)
//! a(ξ) = √(|ξ|² − 1/4)  for |ξ| > 1/2,   i √(1/4 − |ξ|²)  otherwise
//! ```
//!
//! so that `w(t) = K₀(t) ∗ u₀ + K₁(t) ∗ (u₀/2 + u₁)`. Both symbols are real
//! on both branches; they are evaluated with `cosh`/`sinh` (written as
//! decaying exponentials) below the circle `|ξ| = 1/2` and with a short
//! Taylor series where `|t a|` is tiny.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic box `[−L, L)ⁿ` sampled with `N` points per dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialGrid {
    dim: usize,
    half_length: f64,
    points_per_dim: usize,
}

impl SpatialGrid {
    pub fn new(dim: usize, half_length: f64, points_per_dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::domain(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::domain(format!("box half-length must be positive, got {half_length}")));
        }
        if points_per_dim < 2 || !points_per_dim.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "points per dimension must be even and at least 2, got {points_per_dim}"
            )));
        }
        Ok(SpatialGrid {
            dim,
            half_length,
            points_per_dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.points_per_dim as f64
    }

    /// Volume element `dxⁿ` of the grid sum.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    fn unravel(&self, index: usize) -> [usize; 3] {
        let n = self.points_per_dim;
        let mut out = [0; 3];
        let mut rest = index;
        for d in (0..self.dim).rev() {
            out[d] = rest % n;
            rest /= n;
        }
        out
    }

    /// Coordinates of a flat (row-major) index; unused axes are zero.
    pub fn point(&self, index: usize) -> [f64; 3] {
        let idx = self.unravel(index);
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = -self.half_length + idx[d] as f64 * self.dx();
        }
        x
    }

    pub fn radius(&self, index: usize) -> f64 {
        let x = self.point(index);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Iterator over `|x|` in flat order.
    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.radius(i))
    }

    /// Signed integer wavenumber, Nyquist mapped to `−N/2`.
    fn mode_number(&self, k: usize) -> f64 {
        let n = self.points_per_dim;
        if k < n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        }
    }

    /// Angular frequency vector `ξ = (π/L)·k` of a flat spectral index.
    pub fn frequency(&self, index: usize) -> [f64; 3] {
        let idx = self.unravel(index);
        let base = std::f64::consts::PI / self.half_length;
        let mut xi = [0.0; 3];
        for d in 0..self.dim {
            xi[d] = base * self.mode_number(idx[d]);
        }
        xi
    }

    /// `|ξ|²` per spectral index.
    pub fn frequency_sq(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let xi = self.frequency(i);
                xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
            })
            .collect()
    }

    /// True when a spectral index sits on a Nyquist plane along some axis.
    pub fn is_nyquist(&self, index: usize) -> bool {
        let idx = self.unravel(index);
        (0..self.dim).any(|d| idx[d] == self.points_per_dim / 2)
    }

    /// Samples `f(x)` on every grid point.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.point(i))).collect()
    }
}

/// Displacement and velocity samples at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub grid: SpatialGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub time: f64,
}

impl FieldState {
    pub fn new(grid: SpatialGrid, u: Vec<f64>, v: Vec<f64>, time: f64) -> Result<Self> {
        if u.len() != grid.len() || v.len() != grid.len() {
            return Err(Error::domain(format!(
                "field lengths {} / {} do not match grid size {}",
                u.len(),
                v.len(),
                grid.len()
            )));
        }
        if !(time >= 0.0) {
            return Err(Error::domain(format!("state time must be non-negative, got {time}")));
        }
        Ok(FieldState { grid, u, v, time })
    }

    pub fn zeros(grid: SpatialGrid, time: f64) -> Self {
        FieldState {
            grid,
            u: vec![0.0; grid.len()],
            v: vec![0.0; grid.len()],
            time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// The branch function `a(ξ)` tabulated per mode.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    pub grid: SpatialGrid,
    pub a_values: Vec<Complex64>,
}

/// `a(ξ)` as a complex number from `|ξ|²`.
pub fn branch(xi_abs2: f64) -> Complex64 {
    let s = xi_abs2 - 0.25;
    if s > 0.0 {
        Complex64::new(s.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-s).sqrt())
    }
}

impl SymbolTable {
    pub fn new(grid: SpatialGrid) -> Self {
        let a_values = grid.frequency_sq().into_iter().map(branch).collect();
        SymbolTable { grid, a_values }
    }
}

const SERIES_SWITCH: f64 = 1e-4;

/// `(K̂₀, K̂₁)` at `t ≥ 0` without argument checks.
pub(crate) fn symbols(t: f64, xi_abs2: f64) -> (f64, f64) {
    let s = xi_abs2 - 0.25;
    let x2 = t * t * s;
    if x2.abs() < SERIES_SWITCH * SERIES_SWITCH {
        // cos(ta) and sin(ta)/a in powers of (ta)² = t²s, valid on both branches.
        let damp = (-0.5 * t).exp();
        let c = 1.0 - x2 / 2.0 + x2 * x2 / 24.0;
        let sn = t * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
        return (damp * c, damp * sn);
    }
    if s > 0.0 {
        let a = s.sqrt();
        let damp = (-0.5 * t).exp();
        let (sin, cos) = (t * a).sin_cos();
        (damp * cos, damp * sin / a)
    } else {
        // e^{−t/2} cosh(tb) and e^{−t/2} sinh(tb)/b as decaying exponentials.
        let b = (-s).sqrt();
        let slow = (-t * (0.5 - b)).exp();
        let fast = (-t * (0.5 + b)).exp();
        (0.5 * (slow + fast), 0.5 * (slow - fast) / b)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("time must be non-negative, got {t}")))
    }
}

/// `K̂₀(t, ξ) = e^{−t/2} cos(t a(ξ))`.
pub fn k0_hat(t: f64, xi_abs2: f64) -> Result<f64> {
    check_time(t)?;
    Ok(symbols(t, xi_abs2).0)
}

/// `K̂₁(t, ξ) = e^{−t/2} sin(t a(ξ)) / a(ξ)`, with the removable limit
/// `t e^{−t/2}` on `|ξ| = 1/2`.
pub fn k1_hat(t: f64, xi_abs2: f64) -> Result<f64> {
    check_time(t)?;
    Ok(symbols(t, xi_abs2).1)
}

/// Per-mode coefficients of one propagation interval.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct ModeStep {
    k0: f64,
    k1: f64,
    dk0: f64,
    dk1: f64,
}

impl ModeStep {
    fn new(t: f64, xi_abs2: f64) -> Self {
        let (k0, k1) = symbols(t, xi_abs2);
        // ∂_t K̂₁ = K̂₀ − K̂₁/2 and ∂_t K̂₀ = −K̂₀/2 − a² K̂₁, a² = |ξ|² − 1/4.
        ModeStep {
            k0,
            k1,
            dk0: -0.5 * k0 - (xi_abs2 - 0.25) * k1,
            dk1: k0 - 0.5 * k1,
        }
    }
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// `(∫₀^h K̂₁(r) dr, ∫₀^h r K̂₁(r) dr)`.
///
/// Closed form from integrating `y'' + y' + |ξ|² y = 0` (`y = K̂₁`,
/// `y(0) = 0`, `y'(0) = 1`) once and against `r`. Where `|ξ|² h²` is small
/// the closed form cancels, and the smooth integrand is summed with
/// composite 8-point Gauss–Legendre instead.
pub(crate) fn kernel_moments(h: f64, xi_abs2: f64) -> (f64, f64) {
    if xi_abs2 * h * h >= 0.5 {
        let m = ModeStep::new(h, xi_abs2);
        let i0 = (1.0 - m.dk1 - m.k1) / xi_abs2;
        let i1 = (m.k1 - h * m.dk1 - h * m.k1 + i0) / xi_abs2;
        (i0, i1)
    } else {
        kernel_moments_quadrature(h, xi_abs2)
    }
}

pub(crate) fn kernel_moments_quadrature(h: f64, xi_abs2: f64) -> (f64, f64) {
    let panels = h.ceil().max(1.0) as usize;
    let width = h / panels as f64;
    let (mut i0, mut i1) = (0.0, 0.0);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
            for r in [mid - 0.5 * width * x, mid + 0.5 * width * x] {
                let k1 = symbols(r, xi_abs2).1;
                i0 += 0.5 * width * w * k1;
                i1 += 0.5 * width * w * r * k1;
            }
        }
    }
    (i0, i1)
}

/// Per-mode weights of one Duhamel step with linearly interpolated forcing.
#[derive(Clone, Copy, Debug, Default)]
struct ForcingWeights {
    u_start: f64,
    u_end: f64,
    v_start: f64,
    v_end: f64,
}

impl ForcingWeights {
    fn new(h: f64, xi_abs2: f64) -> Self {
        let (i0, i1) = kernel_moments(h, xi_abs2);
        let k1 = symbols(h, xi_abs2).1;
        ForcingWeights {
            u_start: i1 / h,
            u_end: i0 - i1 / h,
            v_start: k1 - i0 / h,
            v_end: i0 / h,
        }
    }
}

/// Multidimensional FFT on a [`SpatialGrid`] (unnormalised forward,
/// `1/Nⁿ`-normalised inverse).
#[derive(Clone)]
pub struct Fourier {
    grid: SpatialGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

impl Fourier {
    pub fn new(grid: SpatialGrid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_dim();
        Fourier {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points_per_dim();
        let dim = self.grid.dim();
        let mut line = vec![Complex64::default(); n];
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            if stride == 1 {
                plan.process(data);
                continue;
            }
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + i * stride];
                    }
                    plan.process(&mut line);
                    for (i, value) in line.iter().enumerate() {
                        data[start + i * stride] = *value;
                    }
                }
            }
        }
    }

    pub fn forward(&self, field: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spectrum, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        spectrum.into_iter().map(|z| z.re * scale).collect()
    }

    /// Spectral gradient components; Nyquist modes are dropped so the
    /// result stays real.
    pub fn gradient(&self, field: &[f64]) -> Vec<Vec<f64>> {
        let spectrum = self.forward(field);
        (0..self.grid.dim())
            .map(|axis| {
                let component: Vec<Complex64> = spectrum
                    .iter()
                    .enumerate()
                    .map(|(i, z)| {
                        if self.grid.is_nyquist(i) {
                            Complex64::default()
                        } else {
                            z * Complex64::new(0.0, self.grid.frequency(i)[axis])
                        }
                    })
                    .collect();
                self.inverse(component)
            })
            .collect()
    }

    /// `‖∇u‖₂²` by Parseval.
    pub fn gradient_norm_sq(&self, field: &[f64]) -> f64 {
        let spectrum = self.forward(field);
        let xi2 = self.grid.frequency_sq();
        let sum: f64 = spectrum
            .iter()
            .zip(&xi2)
            .enumerate()
            .filter(|(i, _)| !self.grid.is_nyquist(*i))
            .map(|(_, (z, k))| k * z.norm_sqr())
            .sum();
        sum * self.grid.cell_volume() / self.grid.len() as f64
    }
}

/// Grid `L²` norm `(dxⁿ Σ f²)^{1/2}`.
pub fn l2_norm(grid: &SpatialGrid, field: &[f64]) -> f64 {
    (grid.cell_volume() * field.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

/// Solution operator `S(t)` plus Duhamel steps of a fixed length.
#[derive(Clone, Debug)]
pub struct Propagator {
    fourier: Fourier,
    xi2: Vec<f64>,
    step: Option<StepTable>,
}

#[derive(Clone, Debug)]
struct StepTable {
    dt: f64,
    modes: Vec<ModeStep>,
    forcing: Vec<ForcingWeights>,
}

impl Propagator {
    pub fn new(grid: SpatialGrid) -> Self {
        Propagator {
            fourier: Fourier::new(grid),
            xi2: grid.frequency_sq(),
            step: None,
        }
    }

    /// Propagator with per-mode tables cached for steps of length `dt`.
    pub fn with_step(grid: SpatialGrid, dt: f64) -> Result<Self> {
        let mut p = Propagator::new(grid);
        p.step = Some(p.table(dt)?);
        Ok(p)
    }

    pub fn grid(&self) -> SpatialGrid {
        self.fourier.grid()
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    fn table(&self, dt: f64) -> Result<StepTable> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("step length must be positive, got {dt}")));
        }
        Ok(StepTable {
            dt,
            modes: self.xi2.iter().map(|&k| ModeStep::new(dt, k)).collect(),
            forcing: self.xi2.iter().map(|&k| ForcingWeights::new(dt, k)).collect(),
        })
    }

    fn check_state(&self, state: &FieldState) -> Result<()> {
        if state.grid != self.grid() {
            return Err(Error::domain("state grid does not match propagator grid"));
        }
        if !state.is_finite() {
            return Err(Error::domain("state contains non-finite samples"));
        }
        Ok(())
    }

    fn apply_linear(
        modes: &[ModeStep],
        u_hat: &[Complex64],
        v_hat: &[Complex64],
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut nu = Vec::with_capacity(u_hat.len());
        let mut nv = Vec::with_capacity(u_hat.len());
        for ((m, u), v) in modes.iter().zip(u_hat).zip(v_hat) {
            let mixed = u * 0.5 + v;
            nu.push(u * m.k0 + mixed * m.k1);
            nv.push(u * m.dk0 + mixed * m.dk1);
        }
        (nu, nv)
    }

    /// `S(t)` applied to `state`, returning the state at `state.time + t`.
    pub fn linear_evolve(&self, state: &FieldState, t: f64) -> Result<FieldState> {
        check_time(t)?;
        self.check_state(state)?;
        if t == 0.0 {
            return Ok(state.clone());
        }
        let modes: Vec<ModeStep> = match &self.step {
            Some(table) if table.dt == t => table.modes.clone(),
            _ => self.xi2.iter().map(|&k| ModeStep::new(t, k)).collect(),
        };
        let u_hat = self.fourier.forward(&state.u);
        let v_hat = self.fourier.forward(&state.v);
        let (nu, nv) = Self::apply_linear(&modes, &u_hat, &v_hat);
        Ok(FieldState {
            grid: state.grid,
            u: self.fourier.inverse(nu),
            v: self.fourier.inverse(nv),
            time: state.time + t,
        })
    }

    /// One step `S(dt) U + ∫₀^{dt} S(dt−s) (0, f(s)) ds` with `f` linear
    /// between `forcing_start` and `forcing_end`.
    pub fn duhamel_step(
        &self,
        state: &FieldState,
        forcing_start: &[f64],
        forcing_end: &[f64],
        dt: f64,
    ) -> Result<FieldState> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("step length must be positive, got {dt}")));
        }
        self.check_state(state)?;
        let n = self.grid().len();
        if forcing_start.len() != n || forcing_end.len() != n {
            return Err(Error::domain("forcing length does not match grid"));
        }
        let owned;
        let table = match &self.step {
            Some(table) if table.dt == dt => table,
            _ => {
                owned = self.table(dt)?;
                &owned
            }
        };
        let u_hat = self.fourier.forward(&state.u);
        let v_hat = self.fourier.forward(&state.v);
        let (mut nu, mut nv) = Self::apply_linear(&table.modes, &u_hat, &v_hat);
        let f0 = self.fourier.forward(forcing_start);
        let f1 = self.fourier.forward(forcing_end);
        for i in 0..n {
            let w = table.forcing[i];
            nu[i] += f0[i] * w.u_start + f1[i] * w.u_end;
            nv[i] += f0[i] * w.v_start + f1[i] * w.v_end;
        }
        Ok(FieldState {
            grid: state.grid,
            u: self.fourier.inverse(nu),
            v: self.fourier.inverse(nv),
            time: state.time + dt,
        })
    }
}

/// `S(t)` on a state; see [`Propagator::linear_evolve`].
pub fn linear_evolve(state0: &FieldState, t: f64) -> Result<FieldState> {
    Propagator::new(state0.grid).linear_evolve(state0, t)
}

/// One Duhamel step; see [`Propagator::duhamel_step`].
pub fn duhamel_step(
    state: &FieldState,
    forcing_start: &[f64],
    forcing_end: &[f64],
    dt: f64,
) -> Result<FieldState> {
    Propagator::new(state.grid).duhamel_step(state, forcing_start, forcing_end, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid::new(0, 1.0, 8).is_err());
        assert!(SpatialGrid::new(4, 1.0, 8).is_err());
        assert!(SpatialGrid::new(1, 0.0, 8).is_err());
        assert!(SpatialGrid::new(1, 1.0, 7).is_err());
        let g = SpatialGrid::new(2, 3.0, 8).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.point(0), [-3.0, -3.0, 0.0]);
        assert_eq!(g.point(9), [-3.0 + 0.75, -3.0 + 0.75, 0.0]);
    }

    #[test]
    fn frequencies_are_symmetric_except_nyquist() {
        let g = SpatialGrid::new(1, 2.0, 16).unwrap();
        let xi2 = g.frequency_sq();
        for k in 1..8 {
            assert_eq!(xi2[k], xi2[16 - k]);
        }
        assert_eq!(xi2[0], 0.0);
        assert!(g.is_nyquist(8));
    }

    #[test]
    fn symbols_at_time_zero() {
        for xi2 in [0.0, 0.1, 0.25, 1.0, 50.0] {
            assert_eq!(k0_hat(0.0, xi2).unwrap(), 1.0);
            assert_eq!(k1_hat(0.0, xi2).unwrap(), 0.0);
        }
        assert!(k0_hat(-1.0, 1.0).is_err());
        assert!(k1_hat(-1e-9, 1.0).is_err());
    }

    #[test]
    fn symbols_on_known_modes() {
        for t in [0.3, 1.0, 7.5, 40.0] {
            assert!(close(k0_hat(t, 0.0).unwrap(), (1.0 + (-t).exp()) / 2.0, 1e-14));
            assert!(close(k1_hat(t, 0.0).unwrap(), 1.0 - (-t).exp(), 1e-14));
            let a = 3f64.sqrt() / 2.0;
            assert!(close(k0_hat(t, 1.0).unwrap(), (-t / 2.0).exp() * (a * t).cos(), 1e-14));
        }
        assert!(close(k1_hat(2.0, 0.25).unwrap(), 2.0 * (-1.0f64).exp(), 1e-15));
    }

    #[test]
    fn symbols_continuous_across_circle() {
        for t in [0.5, 2.0, 10.0, 100.0] {
            let (a0, a1) = symbols(t, 0.25 - 1e-14);
            let (b0, b1) = symbols(t, 0.25 + 1e-14);
            assert!((a0 - b0).abs() <= 1e-6 * a0.abs().max(1e-300));
            assert!((a1 - b1).abs() <= 1e-6 * a1.abs().max(1e-300));
        }
    }

    #[test]
    fn moments_routes_agree_at_switch() {
        for (h, xi2) in [(0.1, 50.0), (0.25, 8.0), (0.5, 2.0), (1.0, 0.5), (2.0, 0.125)] {
            let closed = {
                let m = ModeStep::new(h, xi2);
                let i0 = (1.0 - m.dk1 - m.k1) / xi2;
                (i0, (m.k1 - h * m.dk1 - h * m.k1 + i0) / xi2)
            };
            let quad = kernel_moments_quadrature(h, xi2);
            assert!(close(closed.0, quad.0, 1e-11), "{h} {xi2}");
            assert!(close(closed.1, quad.1, 1e-10), "{h} {xi2}");
        }
        let (i0, _) = kernel_moments(0.7, 0.0);
        assert!(close(i0, 0.7 - 1.0 + (-0.7f64).exp(), 1e-14));
    }

    fn bump_state(grid: SpatialGrid) -> FieldState {
        let u = grid.sample(|x| (-(x[0] * x[0] + x[1] * x[1]) ).exp());
        let v = grid.sample(|x| 0.5 * (-(x[0] - 0.3).powi(2) - x[1] * x[1]).exp());
        FieldState::new(grid, u, v, 0.0).unwrap()
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let g = SpatialGrid::new(2, 8.0, 32).unwrap();
        let s = bump_state(g);
        assert_eq!(linear_evolve(&s, 0.0).unwrap(), s);
    }

    #[test]
    fn evolve_semigroup() {
        let g = SpatialGrid::new(1, 16.0, 128).unwrap();
        let s = bump_state(g);
        let p = Propagator::new(g);
        let two = p.linear_evolve(&p.linear_evolve(&s, 0.7).unwrap(), 1.9).unwrap();
        let one = p.linear_evolve(&s, 2.6).unwrap();
        for (a, b) in two.u.iter().zip(&one.u).chain(two.v.iter().zip(&one.v)) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!((two.time - 2.6).abs() < 1e-15);
    }

    #[test]
    fn zero_forcing_matches_linear_flow() {
        let g = SpatialGrid::new(1, 16.0, 64).unwrap();
        let s = bump_state(g);
        let zero = vec![0.0; g.len()];
        let a = duhamel_step(&s, &zero, &zero, 0.3).unwrap();
        let b = linear_evolve(&s, 0.3).unwrap();
        for (x, y) in a.u.iter().zip(&b.u) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_forcing_zero_mode_ode() {
        // u_tt + u_t = c from rest: u = c (t − 1 + e^{−t}), u_t = c (1 − e^{−t}).
        let g = SpatialGrid::new(1, 4.0, 16).unwrap();
        let c = 0.8;
        let f = vec![c; g.len()];
        let p = Propagator::with_step(g, 0.2).unwrap();
        let mut s = FieldState::zeros(g, 0.0);
        for _ in 0..25 {
            s = p.duhamel_step(&s, &f, &f, 0.2).unwrap();
        }
        let t: f64 = 5.0;
        let exact_u = c * (t - 1.0 + (-t).exp());
        let exact_v = c * (1.0 - (-t).exp());
        for (u, v) in s.u.iter().zip(&s.v) {
            assert!((u - exact_u).abs() < 1e-12);
            assert!((v - exact_v).abs() < 1e-12);
        }
    }

    #[test]
    fn half_steps_converge_quadratically() {
        // Smooth forcing f(t, x) = cos(t) e^{−x²}; compare one step with two half steps
        // and four quarter steps against a very fine reference.
        let g = SpatialGrid::new(1, 12.0, 64).unwrap();
        let s = bump_state(g);
        let forcing = |t: f64| g.sample(|x| t.cos() * (-x[0] * x[0]).exp());
        let march = |steps: usize, h: f64| {
            let p = Propagator::with_step(g, h).unwrap();
            let mut st = s.clone();
            for m in 0..steps {
                let t0 = m as f64 * h;
                st = p.duhamel_step(&st, &forcing(t0), &forcing(t0 + h), h).unwrap();
            }
            st
        };
        let reference = march(512, 1.0 / 512.0);
        let err = |st: FieldState| {
            st.u.iter().zip(&reference.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let e1 = err(march(1, 1.0));
        let e2 = err(march(2, 0.5));
        let e4 = err(march(4, 0.25));
        assert!(e1 / e2 > 3.0 && e2 / e4 > 3.0, "{e1} {e2} {e4}");
    }

    #[test]
    fn symbol_table_branches() {
        let g = SpatialGrid::new(1, 20.0, 64).unwrap();
        let table = SymbolTable::new(g);
        assert_eq!(table.a_values[0], Complex64::new(0.0, 0.5));
        for (a, xi2) in table.a_values.iter().zip(g.frequency_sq()) {
            if xi2 > 0.25 {
                assert_eq!(a.im, 0.0);
            } else {
                assert_eq!(a.re, 0.0);
                assert!(a.im <= 0.5);
            }
        }
    }

    #[test]
    fn fft_roundtrip_3d() {
        let g = SpatialGrid::new(3, 2.0, 8).unwrap();
        let f = Fourier::new(g);
        let field = g.sample(|x| (x[0] - 0.2 * x[1] + x[2] * x[2]).sin());
        let back = f.inverse(f.forward(&field));
        for (a, b) in field.iter().zip(back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_gradient_of_periodic_mode() {
        let g = SpatialGrid::new(2, std::f64::consts::PI, 32).unwrap();
        let f = Fourier::new(g);
        let field = g.sample(|x| (2.0 * x[0]).sin() * x[1].cos());
        let grad = f.gradient(&field);
        #[allow(clippy::needless_range_loop)]
        for i in 0..g.len() {
            let x = g.point(i);
            assert!((grad[0][i] - 2.0 * (2.0 * x[0]).cos() * x[1].cos()).abs() < 1e-11);
            assert!((grad[1][i] + (2.0 * x[0]).sin() * x[1].sin()).abs() < 1e-11);
        }
        // ‖∇u‖² = ∫ 4cos²(2x)cos²y + sin²(2x)sin²y over the box = 5π².
        let np = f.gradient_norm_sq(&field);
        assert!((np - 5.0 * std::f64::consts::PI.powi(2)).abs() < 1e-9);
    }
}
