//! Fixed-step numerical kernels: classical RK4 in both time directions and
//! composite Simpson quadrature on uniform grids.
//!
//! Everything here works on uniform grids with an even interval count, so
//! forward state sweeps, backward adjoint sweeps and Simpson integrals all
//! share the same nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform time grid over `[t0, t1]` with `n` intervals (`n` even).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n: usize) -> Result<Self> {
        let g = Self { t0, t1, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t0.is_finite() || !self.t1.is_finite() || self.t1 <= self.t0 {
            return Err(Error::InvalidValue {
                name: "grid.t1",
                value: self.t1,
                reason: "need finite t0 < t1",
            });
        }
        if self.n == 0 || !self.n.is_multiple_of(2) {
            return Err(Error::OddIntervalCount { intervals: self.n });
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.n as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        self.t0 + self.step() * k as f64
    }

    /// Number of samples carried on this grid (`n + 1`).
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|k| self.node(k))
    }
}

/// Samples of an `N`-dimensional curve on the nodes of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub grid: TimeGrid,
    pub samples: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn new(grid: TimeGrid, samples: Vec<[f64; N]>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch("sample count must equal grid.n + 1"));
        }
        Ok(Self { grid, samples })
    }

    /// Linear interpolation between grid nodes; `t` is clamped to the span.
    pub fn sample_at(&self, t: f64) -> [f64; N] {
        lerp_series(&self.grid, &self.samples, t)
    }

    /// Extracts one component as a scalar series.
    pub fn component(&self, idx: usize) -> Vec<f64> {
        self.samples.iter().map(|y| y[idx]).collect()
    }
}

/// Linear interpolation of grid-node samples at an arbitrary time.
pub fn lerp_series<const N: usize>(grid: &TimeGrid, samples: &[[f64; N]], t: f64) -> [f64; N] {
    let h = grid.step();
    let pos = ((t - grid.t0) / h).clamp(0.0, grid.n as f64);
    let k = (pos.floor() as usize).min(grid.n - 1);
    let w = pos - k as f64;
    let mut out = [0.0; N];
    for j in 0..N {
        out[j] = samples[k][j] * (1.0 - w) + samples[k + 1][j] * w;
    }
    out
}

/// Scalar convenience wrapper over [`lerp_series`].
pub fn lerp_scalar(grid: &TimeGrid, values: &[f64], t: f64) -> f64 {
    let h = grid.step();
    let pos = ((t - grid.t0) / h).clamp(0.0, grid.n as f64);
    let k = (pos.floor() as usize).min(grid.n - 1);
    let w = pos - k as f64;
    values[k] * (1.0 - w) + values[k + 1] * w
}

fn rk4_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &axpy(y, &k2, 0.5 * h));
    let k4 = f(t + h, &axpy(y, &k3, h));
    let mut out = *y;
    for j in 0..N {
        out[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], k: &[f64; N], h: f64) -> [f64; N] {
    let mut out = *y;
    for j in 0..N {
        out[j] += h * k[j];
    }
    out
}

fn check_finite<const N: usize>(y: &[f64; N], node: usize, t: f64) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { node, t })
    }
}

/// Classical fourth-order Runge-Kutta, integrating forward from `grid.t0`.
///
/// Aborts with the failing node index as soon as any component goes
/// non-finite.
///
/// ```
/// use satsir::numerics::{rk4_integrate_forward, TimeGrid};
///
/// let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
/// let traj = rk4_integrate_forward(|_, y: &[f64; 1]| [-y[0]], [1.0], &grid).unwrap();
/// let end = traj.samples[grid.len() - 1][0];
/// assert!((end - (-1.0f64).exp()).abs() < 1e-9);
/// ```
pub fn rk4_integrate_forward<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    grid: &TimeGrid,
) -> Result<Trajectory<N>> {
    grid.validate()?;
    check_finite(&y0, 0, grid.t0)?;
    let h = grid.step();
    let mut samples = Vec::with_capacity(grid.len());
    samples.push(y0);
    let mut y = y0;
    for k in 0..grid.n {
        y = rk4_step(&f, grid.node(k), &y, h);
        check_finite(&y, k + 1, grid.node(k + 1))?;
        samples.push(y);
    }
    Trajectory::new(*grid, samples)
}

/// RK4 from `grid.t1` down to `grid.t0` (step `-h`); sample `n` holds the
/// terminal value. The caller's vector field typically closes over a forward
/// trajectory and interpolates it at the stage times.
pub fn rk4_integrate_backward<const N: usize>(
    g: impl Fn(f64, &[f64; N]) -> [f64; N],
    y_terminal: [f64; N],
    grid: &TimeGrid,
) -> Result<Trajectory<N>> {
    grid.validate()?;
    check_finite(&y_terminal, grid.n, grid.t1)?;
    let h = -grid.step();
    let mut samples = vec![[0.0; N]; grid.len()];
    samples[grid.n] = y_terminal;
    let mut y = y_terminal;
    for k in (0..grid.n).rev() {
        y = rk4_step(&g, grid.node(k + 1), &y, h);
        check_finite(&y, k, grid.node(k))?;
        samples[k] = y;
    }
    Trajectory::new(*grid, samples)
}

/// Composite Simpson's 1/3 rule over uniformly spaced samples.
///
/// Needs an odd sample count, i.e. an even number of intervals.
pub fn simpson_integral(samples: &[f64], h: f64) -> Result<f64> {
    if samples.len() < 3 || samples.len().is_multiple_of(2) {
        return Err(Error::OddIntervalCount {
            intervals: samples.len().saturating_sub(1),
        });
    }
    let n = samples.len() - 1;
    let mut acc = samples[0] + samples[n];
    for (k, v) in samples.iter().enumerate().take(n).skip(1) {
        acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(acc * h / 3.0)
}

/// Trapezoid rule on the same uniform samples; kept as an independent
/// quadrature cross-check for Simpson-based results.
pub fn trapezoid_integral(samples: &[f64], h: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::GridMismatch("trapezoid needs at least two samples"));
    }
    let n = samples.len() - 1;
    let inner: f64 = samples[1..n].iter().sum();
    Ok(h * (0.5 * (samples[0] + samples[n]) + inner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_rejects_odd_or_empty_interval_counts() {
        assert!(TimeGrid::new(0.0, 1.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 2).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 2).is_ok());
    }

    #[test]
    fn rk4_exponential_decay() {
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let traj = rk4_integrate_forward(|_, y: &[f64; 1]| [-y[0]], [1.0], &grid).unwrap();
        assert_relative_eq!(traj.samples[100][0], (-1.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn rk4_constant_field_gives_constant_trajectory() {
        let grid = TimeGrid::new(0.0, 2.0, 10).unwrap();
        let traj = rk4_integrate_forward(|_, _: &[f64; 2]| [0.0, 0.0], [3.0, -1.5], &grid).unwrap();
        for y in &traj.samples {
            assert_eq!(*y, [3.0, -1.5]);
        }
    }

    #[test]
    fn rk4_is_exact_on_cubics() {
        // dy/dt = 3t^2, y(0)=0 => y(2)=8; RK4 quadrature is exact on cubics.
        let grid = TimeGrid::new(0.0, 2.0, 4).unwrap();
        let traj = rk4_integrate_forward(|t, _: &[f64; 1]| [3.0 * t * t], [0.0], &grid).unwrap();
        assert_relative_eq!(traj.samples[4][0], 8.0, max_relative = 1e-14);
    }

    #[test]
    fn rk4_reports_failing_node_on_blow_up() {
        let grid = TimeGrid::new(0.0, 10.0, 100).unwrap();
        let err = rk4_integrate_forward(|_, y: &[f64; 1]| [y[0] * y[0]], [5.0], &grid).unwrap_err();
        match err {
            Error::NonFinite { node, .. } => assert!(node > 0),
            other => panic!("expected NonFinite, got {other}"),
        }
    }

    #[test]
    fn backward_zero_field_and_exponential() {
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let zero = rk4_integrate_backward(|_, _: &[f64; 1]| [0.0], [0.0], &grid).unwrap();
        assert!(zero.samples.iter().all(|y| y[0] == 0.0));

        // dl/dt = l with l(1) = 1 integrated backward gives l(0) = e^-1.
        let traj = rk4_integrate_backward(|_, y: &[f64; 1]| [y[0]], [1.0], &grid).unwrap();
        assert_relative_eq!(traj.samples[0][0], (-1.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn backward_reverses_forward_linear_system() {
        let grid = TimeGrid::new(0.0, 2.0, 200).unwrap();
        let f = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let fwd = rk4_integrate_forward(f, [1.0, 0.5], &grid).unwrap();
        let back = rk4_integrate_backward(f, fwd.samples[grid.n], &grid).unwrap();
        assert_relative_eq!(back.samples[0][0], 1.0, max_relative = 1e-8);
        assert_relative_eq!(back.samples[0][1], 0.5, max_relative = 1e-8);
    }

    #[test]
    fn rk4_order_four_convergence() {
        // Error on dy/dt = -y should drop ~16x per halving of h.
        let exact = (-1.0f64).exp();
        let err_at = |n: usize| {
            let grid = TimeGrid::new(0.0, 1.0, n).unwrap();
            let traj = rk4_integrate_forward(|_, y: &[f64; 1]| [-y[0]], [1.0], &grid).unwrap();
            (traj.samples[n][0] - exact).abs()
        };
        let mut n = 10;
        for _ in 0..4 {
            let ratio = err_at(n) / err_at(2 * n);
            assert!(
                (14.0..=18.0).contains(&ratio),
                "order-4 ratio out of range: {ratio}"
            );
            n *= 2;
        }
    }

    #[test]
    fn simpson_exact_on_quadratic_and_constant() {
        for n in [2usize, 10, 50] {
            let h = 2.0 / n as f64;
            let samples: Vec<f64> = (0..=n).map(|k| (k as f64 * h).powi(2)).collect();
            assert_relative_eq!(
                simpson_integral(&samples, h).unwrap(),
                8.0 / 3.0,
                max_relative = 1e-13
            );
        }
        let constant = vec![7.0; 101];
        assert_relative_eq!(
            simpson_integral(&constant, 0.2).unwrap(),
            20.0 * 7.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn simpson_sin_on_zero_pi() {
        let n = 100;
        let h = std::f64::consts::PI / n as f64;
        let samples: Vec<f64> = (0..=n).map(|k| (k as f64 * h).sin()).collect();
        assert_relative_eq!(simpson_integral(&samples, h).unwrap(), 2.0, epsilon = 1e-7);
    }

    #[test]
    fn simpson_rejects_even_sample_count() {
        assert!(simpson_integral(&[1.0, 2.0], 0.5).is_err());
        assert!(simpson_integral(&[1.0, 2.0, 3.0, 4.0], 0.5).is_err());
    }

    #[test]
    fn simpson_symmetric_integrand_reversal_invariant() {
        let n = 40;
        let h = 2.0 / n as f64;
        let samples: Vec<f64> = (0..=n)
            .map(|k| {
                let t = -1.0 + k as f64 * h;
                (-t * t).exp()
            })
            .collect();
        let mut reversed = samples.clone();
        reversed.reverse();
        assert_relative_eq!(
            simpson_integral(&samples, h).unwrap(),
            simpson_integral(&reversed, h).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn lerp_hits_nodes_and_midpoints() {
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let samples = vec![[0.0], [1.0], [4.0]];
        assert_eq!(lerp_series(&grid, &samples, 0.0), [0.0]);
        assert_eq!(lerp_series(&grid, &samples, 0.25), [0.5]);
        assert_eq!(lerp_series(&grid, &samples, 0.75), [2.5]);
        assert_eq!(lerp_series(&grid, &samples, 1.0), [4.0]);
        // out-of-span clamps
        assert_eq!(lerp_series(&grid, &samples, -1.0), [0.0]);
        assert_eq!(lerp_series(&grid, &samples, 2.0), [4.0]);
    }
}
