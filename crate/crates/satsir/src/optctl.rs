//! The Pontryagin optimality system: objective, adjoint dynamics, pointwise
//! control characterization, the forward-backward sweep solver and the
//! efficiency analysis of the single-control strategies.
//!
//! The objective penalizes susceptible and infected head counts linearly and
//! both control efforts quadratically,
//! `J = int_0^T (A1*S + A2*I + B1*u1^2 + B2*u2^2) dt`.
//! The sweep alternates a forward RK4 pass of the state system, a backward
//! RK4 pass of the adjoint system with zero terminal data, and a relaxed
//! pointwise control update from the stationarity conditions.

use serde::{Deserialize, Serialize};

use crate::dynamics::{state_rhs_raw, ControlPair, ModelParams, SirState};
use crate::error::{Error, Result};
use crate::numerics::{
    lerp_scalar, rk4_integrate_backward, rk4_integrate_forward, simpson_integral, TimeGrid,
    Trajectory,
};

/// Weights of the objective functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostWeights {
    /// Per-capita loss from susceptibles.
    pub a1: f64,
    /// Per-capita loss from infecteds.
    pub a2: f64,
    /// Quadratic vaccination cost weight.
    pub b1: f64,
    /// Quadratic treatment cost weight.
    pub b2: f64,
}

impl CostWeights {
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        let w = Self { a1, a2, b1, b2 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("a1", self.a1), ("a2", self.a2)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Negative { name, value });
            }
        }
        for (name, value) in [("b1", self.b1), ("b2", self.b2)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidValue {
                    name,
                    value,
                    reason: "quadratic cost weights must be positive (they divide the control update)",
                });
            }
        }
        Ok(())
    }
}

/// Costates of (S, I, R).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjointState {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl AdjointState {
    pub fn as_array(&self) -> [f64; 3] {
        [self.l1, self.l2, self.l3]
    }

    pub fn from_array(l: [f64; 3]) -> Self {
        Self {
            l1: l[0],
            l2: l[1],
            l3: l[2],
        }
    }
}

/// Solver knobs for the forward-backward sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcOptions {
    /// Relative L1 convergence tolerance on controls, states and adjoints.
    pub tol: f64,
    pub max_iter: usize,
    /// Mixing weight of the control update, in (0, 1].
    pub relax: f64,
}

impl Default for OcOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 500,
            relax: 0.5,
        }
    }
}

impl OcOptions {
    // The negated comparison also rejects a NaN tolerance.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidValue {
                name: "tol",
                value: self.tol,
                reason: "must be positive",
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidValue {
                name: "max_iter",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if !(self.relax > 0.0 && self.relax <= 1.0) {
            return Err(Error::InvalidValue {
                name: "relax",
                value: self.relax,
                reason: "must lie in (0, 1]",
            });
        }
        Ok(())
    }
}

/// Which control channels the sweep may use; inactive channels stay pinned
/// at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveControls {
    Both,
    U1Only,
    U2Only,
    None,
}

/// Named intervention strategies of the efficiency analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// No intervention (the baseline).
    None,
    /// Vaccination only.
    Str1,
    /// Treatment only.
    Str2,
    /// Both controls.
    Both,
}

impl Strategy {
    pub fn active_controls(&self) -> ActiveControls {
        match self {
            Strategy::None => ActiveControls::None,
            Strategy::Str1 => ActiveControls::U1Only,
            Strategy::Str2 => ActiveControls::U2Only,
            Strategy::Both => ActiveControls::Both,
        }
    }
}

/// Converged (or last-iterate) output of the forward-backward sweep.
#[derive(Debug, Clone)]
pub struct OcSolution {
    pub grid: TimeGrid,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub states: Trajectory<3>,
    pub adjoints: Trajectory<3>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Simpson value of the running cost over the horizon.
pub fn objective_value(
    states: &Trajectory<3>,
    u1: &[f64],
    u2: &[f64],
    w: &CostWeights,
) -> Result<f64> {
    if u1.len() != states.grid.len() || u2.len() != states.grid.len() {
        return Err(Error::GridMismatch(
            "control schedules must be sampled on the state grid",
        ));
    }
    let integrand: Vec<f64> = states
        .samples
        .iter()
        .zip(u1.iter().zip(u2))
        .map(|(y, (v1, v2))| w.a1 * y[0] + w.a2 * y[1] + w.b1 * v1 * v1 + w.b2 * v2 * v2)
        .collect();
    simpson_integral(&integrand, states.grid.step())
}

/// Right-hand side of the adjoint system.
pub fn adjoint_rhs(
    l: &AdjointState,
    x: &SirState,
    u: &ControlPair,
    w: &CostWeights,
    p: &ModelParams,
) -> (f64, f64, f64) {
    let [d1, d2, d3] = adjoint_rhs_raw(&l.as_array(), &x.as_array(), u, w, p);
    (d1, d2, d3)
}

pub(crate) fn adjoint_rhs_raw(
    l: &[f64; 3],
    y: &[f64; 3],
    u: &ControlPair,
    w: &CostWeights,
    p: &ModelParams,
) -> [f64; 3] {
    let (s, i) = (y[0], y[1]);
    let sat_i = 1.0 + p.alpha * i;
    let sat_t = 1.0 + p.b * u.u2 * i;
    let dl1 = -w.a1 + (l[0] - l[1]) * p.beta * i / sat_i + p.d * l[0] + u.u1 * (l[0] - l[2]);
    let dl2 = -w.a2
        + (l[0] - l[1]) * p.beta * s / (sat_i * sat_i)
        + (l[1] - l[2]) * p.r * u.u2 / (sat_t * sat_t)
        + (p.d + p.delta) * l[1]
        + p.gamma * (l[1] - l[2]);
    let dl3 = p.d * l[2];
    [dl1, dl2, dl3]
}

/// Stationarity value of the vaccination control:
/// `clamp((l1 - l3) * S / (2*b1), 0, 1)`.
pub fn optimal_u1_pointwise(l1: f64, l3: f64, s: f64, b1: f64) -> f64 {
    ((l1 - l3) * s / (2.0 * b1)).clamp(0.0, 1.0)
}

/// Unclamped nonnegative root of `u * (1 + b*u*I)^2 = c` for `c > 0`.
///
/// The left side is strictly increasing in `u >= 0`, so the root is unique
/// and lies in `[0, c]`. Safeguarded Newton with a bisection fallback keeps
/// the iterate inside the bracket; residual tolerance 1e-12 relative.
pub fn u2_saturation_root(c: f64, b: f64, i: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    if b == 0.0 || i == 0.0 {
        return c;
    }
    let (mut lo, mut hi) = (0.0f64, c);
    let mut u = c / {
        let sat = 1.0 + b * c * i;
        sat * sat
    };
    for _ in 0..200 {
        let sat = 1.0 + b * u * i;
        let val = u * sat * sat - c;
        if val.abs() <= 1e-13 * c.max(1.0) {
            return u;
        }
        if val > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let deriv = sat * (1.0 + 3.0 * b * u * i);
        let newton = u - val / deriv;
        u = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    u
}

/// Stationarity value of the treatment control, clamped to `[0, 1]`.
///
/// Solves `u2 * (1 + b*u2*I)^2 = (l2 - l3)*r*I/(2*b2)` for its unique
/// nonnegative root; a nonpositive right side yields zero.
pub fn optimal_u2_pointwise(l2: f64, l3: f64, i: f64, b2: f64, b: f64, r: f64) -> f64 {
    let c = (l2 - l3) * r * i / (2.0 * b2);
    u2_saturation_root(c, b, i).clamp(0.0, 1.0)
}

/// Relative L1 distance between two same-length series.
fn rel_l1(new: &[f64], old: &[f64]) -> f64 {
    let num: f64 = new.iter().zip(old).map(|(a, b)| (a - b).abs()).sum();
    let den: f64 = new.iter().map(|v| v.abs()).sum::<f64>().max(1e-12);
    num / den
}

fn rel_l1_traj(new: &Trajectory<3>, old: &Trajectory<3>) -> f64 {
    let num: f64 = new
        .samples
        .iter()
        .zip(&old.samples)
        .map(|(a, b)| (0..3).map(|j| (a[j] - b[j]).abs()).sum::<f64>())
        .sum();
    let den: f64 = new
        .samples
        .iter()
        .map(|a| a.iter().map(|v| v.abs()).sum::<f64>())
        .sum::<f64>()
        .max(1e-12);
    num / den
}

fn forward_pass(
    p: &ModelParams,
    x0: &SirState,
    grid: &TimeGrid,
    u1: &[f64],
    u2: &[f64],
) -> Result<Trajectory<3>> {
    rk4_integrate_forward(
        |t, y| {
            let u = ControlPair {
                u1: lerp_scalar(grid, u1, t),
                u2: lerp_scalar(grid, u2, t),
            };
            state_rhs_raw(y, &u, p)
        },
        x0.as_array(),
        grid,
    )
}

fn backward_pass(
    p: &ModelParams,
    w: &CostWeights,
    grid: &TimeGrid,
    states: &Trajectory<3>,
    u1: &[f64],
    u2: &[f64],
) -> Result<Trajectory<3>> {
    if states.grid != *grid {
        return Err(Error::GridMismatch(
            "state trajectory must share the sweep grid",
        ));
    }
    rk4_integrate_backward(
        |t, l| {
            let y = states.sample_at(t);
            let u = ControlPair {
                u1: lerp_scalar(grid, u1, t),
                u2: lerp_scalar(grid, u2, t),
            };
            adjoint_rhs_raw(l, &y, &u, w, p)
        },
        [0.0; 3],
        grid,
    )
}

/// Forward-backward sweep for the two-control problem.
///
/// Starts from `u = 0` (whose first forward pass is the uncontrolled
/// baseline) and stops when the relative L1 changes of controls, states and
/// adjoints all drop below `opts.tol`. Non-convergence within
/// `opts.max_iter` returns the last iterate flagged, not an error; a blow-up
/// does error, carrying the iteration index.
///
/// ```
/// use satsir::dynamics::{ModelParams, SirState};
/// use satsir::numerics::TimeGrid;
/// use satsir::optctl::{fbs_solve, ActiveControls, CostWeights, OcOptions};
///
/// let p = ModelParams::new(100.0, 0.1, 0.5, 0.004, 0.02, 0.7, 0.4, 0.05).unwrap();
/// let w = CostWeights::new(0.01, 0.08, 0.8, 0.1).unwrap();
/// let x0 = SirState::new(50.0, 4.0, 0.01).unwrap();
/// let grid = TimeGrid::new(0.0, 20.0, 200).unwrap();
/// let sol = fbs_solve(&p, &w, &x0, &grid, &OcOptions::default(), ActiveControls::Both).unwrap();
/// assert!(sol.converged);
/// assert!(sol.objective > 0.0);
/// ```
pub fn fbs_solve(
    p: &ModelParams,
    w: &CostWeights,
    x0: &SirState,
    grid: &TimeGrid,
    opts: &OcOptions,
    active: ActiveControls,
) -> Result<OcSolution> {
    p.validate()?;
    w.validate()?;
    x0.validate()?;
    grid.validate()?;
    opts.validate()?;
    // Second-order sufficiency of the Hamiltonian in (u1, u2): the Hessian
    // is diag(2*B1, 2*B2), positive definite exactly when both weights are
    // positive, which `CostWeights::validate` guarantees.
    debug_assert!(w.b1 > 0.0 && w.b2 > 0.0);

    let n = grid.len();
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let (use_u1, use_u2) = match active {
        ActiveControls::Both => (true, true),
        ActiveControls::U1Only => (true, false),
        ActiveControls::U2Only => (false, true),
        ActiveControls::None => (false, false),
    };

    let wrap = |iteration: usize| move |e: Error| Error::SweepBlowUp {
        iteration,
        source: Box::new(e),
    };

    let mut states = forward_pass(p, x0, grid, &u1, &u2).map_err(wrap(0))?;
    let mut adjoints = backward_pass(p, w, grid, &states, &u1, &u2).map_err(wrap(0))?;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=opts.max_iter {
        iterations = iter;
        let mut u1_next = u1.clone();
        let mut u2_next = u2.clone();
        if use_u1 || use_u2 {
            for k in 0..n {
                let y = states.samples[k];
                let l = adjoints.samples[k];
                if use_u1 {
                    let cand = optimal_u1_pointwise(l[0], l[2], y[0], w.b1);
                    u1_next[k] = opts.relax * cand + (1.0 - opts.relax) * u1[k];
                }
                if use_u2 {
                    let cand = optimal_u2_pointwise(l[1], l[2], y[1], w.b2, p.b, p.r);
                    u2_next[k] = opts.relax * cand + (1.0 - opts.relax) * u2[k];
                }
            }
        }

        let states_next = forward_pass(p, x0, grid, &u1_next, &u2_next).map_err(wrap(iter))?;
        let adjoints_next =
            backward_pass(p, w, grid, &states_next, &u1_next, &u2_next).map_err(wrap(iter))?;

        let du = rel_l1(&u1_next, &u1).max(rel_l1(&u2_next, &u2));
        let dx = rel_l1_traj(&states_next, &states);
        let dl = rel_l1_traj(&adjoints_next, &adjoints);

        u1 = u1_next;
        u2 = u2_next;
        states = states_next;
        adjoints = adjoints_next;

        if du <= opts.tol && dx <= opts.tol && dl <= opts.tol {
            converged = true;
            break;
        }
    }

    let objective = objective_value(&states, &u1, &u2, w)?;
    Ok(OcSolution {
        grid: *grid,
        u1,
        u2,
        states,
        adjoints,
        objective,
        iterations,
        converged,
    })
}

/// Simpson integral of the infected component over the horizon
/// (the cumulated number of infected individuals).
pub fn cumulative_infected(states: &Trajectory<3>) -> Result<f64> {
    simpson_integral(&states.component(1), states.grid.step())
}

/// Percentage reduction of cumulated infecteds against the uncontrolled
/// baseline: `(1 - Ac/Ao) * 100`.
pub fn efficiency_index(a_controlled: f64, a_uncontrolled: f64) -> Result<f64> {
    if a_uncontrolled <= 0.0 {
        return Err(Error::Degenerate(
            "efficiency index needs a positive uncontrolled baseline",
        ));
    }
    Ok((1.0 - a_controlled / a_uncontrolled) * 100.0)
}

/// Outcome of one intervention strategy, measured against the uncontrolled
/// baseline.
#[derive(Debug, Clone)]
pub struct StrategyReport {
    pub strategy: Strategy,
    /// Cumulated infecteds under the strategy.
    pub a_controlled: f64,
    /// Cumulated infecteds without any control.
    pub a_uncontrolled: f64,
    pub efficiency: f64,
    pub solution: OcSolution,
}

/// Runs one strategy: the uncontrolled baseline plus, when controls are
/// active, the optimized run, and reports the efficiency index.
pub fn run_strategy(
    strategy: Strategy,
    p: &ModelParams,
    w: &CostWeights,
    x0: &SirState,
    grid: &TimeGrid,
    opts: &OcOptions,
) -> Result<StrategyReport> {
    let baseline = fbs_solve(p, w, x0, grid, opts, ActiveControls::None)?;
    let a_uncontrolled = cumulative_infected(&baseline.states)?;
    let solution = match strategy {
        Strategy::None => baseline,
        _ => fbs_solve(p, w, x0, grid, opts, strategy.active_controls())?,
    };
    let a_controlled = cumulative_infected(&solution.states)?;
    let efficiency = efficiency_index(a_controlled, a_uncontrolled)?;
    Ok(StrategyReport {
        strategy,
        a_controlled,
        a_uncontrolled,
        efficiency,
        solution,
    })
}

/// Adjoint-based directional derivative of `J` at a control pair, in the
/// direction `(du1, du2)`.
///
/// Integrates `dH/du1 * du1 + dH/du2 * du2` along the trajectory/adjoint
/// pair of the given control; exact to first order for any admissible
/// control, not only stationary ones.
#[allow(clippy::too_many_arguments)]
pub fn directional_derivative(
    p: &ModelParams,
    w: &CostWeights,
    x0: &SirState,
    grid: &TimeGrid,
    u1: &[f64],
    u2: &[f64],
    du1: &[f64],
    du2: &[f64],
) -> Result<f64> {
    let states = forward_pass(p, x0, grid, u1, u2)?;
    let adjoints = backward_pass(p, w, grid, &states, u1, u2)?;
    let integrand: Vec<f64> = (0..grid.len())
        .map(|k| {
            let y = states.samples[k];
            let l = adjoints.samples[k];
            let sat_t = 1.0 + p.b * u2[k] * y[1];
            let dh_du1 = 2.0 * w.b1 * u1[k] - (l[0] - l[2]) * y[0];
            let dh_du2 = 2.0 * w.b2 * u2[k] - (l[1] - l[2]) * p.r * y[1] / (sat_t * sat_t);
            dh_du1 * du1[k] + dh_du2 * du2[k]
        })
        .collect();
    simpson_integral(&integrand, grid.step())
}

/// Re-simulates `J` at a perturbed control; the finite-difference side of
/// the gradient cross-check.
pub fn objective_at(
    p: &ModelParams,
    w: &CostWeights,
    x0: &SirState,
    grid: &TimeGrid,
    u1: &[f64],
    u2: &[f64],
) -> Result<f64> {
    let states = forward_pass(p, x0, grid, u1, u2)?;
    objective_value(&states, u1, u2, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::invariant_region_contains;
    use crate::numerics::trapezoid_integral;
    use crate::testutil::table2;
    use approx::assert_relative_eq;

    fn table2_weights() -> CostWeights {
        CostWeights::new(0.01, 0.08, 0.8, 0.1).unwrap()
    }

    fn table2_grid() -> TimeGrid {
        TimeGrid::new(0.0, 20.0, 2000).unwrap()
    }

    fn x0() -> SirState {
        SirState::new(50.0, 4.0, 0.01).unwrap()
    }

    #[test]
    fn weights_require_positive_quadratic_costs() {
        assert!(CostWeights::new(0.0, 0.0, 1.0, 1.0).is_ok());
        assert!(CostWeights::new(0.01, 0.08, 0.0, 0.1).is_err());
        assert!(CostWeights::new(-0.01, 0.08, 0.8, 0.1).is_err());
    }

    #[test]
    fn objective_trivial_cases() {
        let grid = table2_grid();
        let n = grid.len();
        let constant =
            Trajectory::new(grid, vec![[1.0, 0.0, 0.0]; n]).unwrap();
        let zeros = vec![0.0; n];
        let w = CostWeights::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(objective_value(&constant, &zeros, &zeros, &w).unwrap(), 0.0);

        let w = CostWeights::new(1.0, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            objective_value(&constant, &zeros, &zeros, &w).unwrap(),
            20.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn objective_matches_trapezoid_on_smooth_run() {
        let p = table2();
        let grid = table2_grid();
        let w = table2_weights();
        let sol = fbs_solve(&p, &w, &x0(), &grid, &OcOptions::default(), ActiveControls::None)
            .unwrap();
        let integrand: Vec<f64> = sol
            .states
            .samples
            .iter()
            .map(|y| w.a1 * y[0] + w.a2 * y[1])
            .collect();
        let trap = trapezoid_integral(&integrand, grid.step()).unwrap();
        assert_relative_eq!(sol.objective, trap, max_relative = 1e-3);
    }

    #[test]
    fn adjoint_rhs_trivial_cases() {
        let p = table2();
        let u = ControlPair::new(0.5, 0.5).unwrap();
        let zero_l = AdjointState { l1: 0.0, l2: 0.0, l3: 0.0 };
        let x = SirState::new(50.0, 4.0, 0.01).unwrap();
        let w0 = CostWeights::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(adjoint_rhs(&zero_l, &x, &u, &w0, &p), (0.0, 0.0, 0.0));

        // dl3/dt = d*l3 regardless of everything else.
        for l3 in [-2.0, 0.0, 5.0] {
            let l = AdjointState { l1: 1.3, l2: -0.4, l3 };
            let (_, _, d3) = adjoint_rhs(&l, &x, &u, &table2_weights(), &p);
            assert_eq!(d3, p.d * l3);
        }
    }

    #[test]
    fn adjoint_rhs_matches_hamiltonian_gradient() {
        // dl_i/dt must equal -dH/dx_i; compare against central differences
        // of the Hamiltonian in each state coordinate.
        let p = table2();
        let u = ControlPair::new(0.3, 0.7).unwrap();
        let w = table2_weights();
        let l = [0.7, -1.2, 0.3];
        let y = [50.0, 4.0, 0.01];
        let hamiltonian = |y: &[f64; 3]| {
            let running = w.a1 * y[0] + w.a2 * y[1] + w.b1 * u.u1 * u.u1 + w.b2 * u.u2 * u.u2;
            let f = state_rhs_raw(y, &u, &p);
            running + l[0] * f[0] + l[1] * f[1] + l[2] * f[2]
        };
        let rhs = adjoint_rhs_raw(&l, &y, &u, &w, &p);
        for coord in 0..3 {
            let step = 1e-6 * y[coord].max(1.0);
            let mut y_plus = y;
            let mut y_minus = y;
            y_plus[coord] += step;
            y_minus[coord] -= step;
            let fd = -(hamiltonian(&y_plus) - hamiltonian(&y_minus)) / (2.0 * step);
            assert_relative_eq!(rhs[coord], fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn pointwise_u1_clamps() {
        assert_eq!(optimal_u1_pointwise(1.0, 1.0, 50.0, 0.8), 0.0);
        assert_eq!(optimal_u1_pointwise(4.0, 0.0, 1.0, 1.0), 1.0);
        assert_relative_eq!(optimal_u1_pointwise(1.0, 0.0, 1.0, 1.0), 0.5);
    }

    #[test]
    fn u2_root_degenerate_and_reference_case() {
        assert_eq!(u2_saturation_root(-1.0, 0.05, 4.0), 0.0);
        assert_eq!(u2_saturation_root(0.0, 0.05, 4.0), 0.0);
        assert_relative_eq!(u2_saturation_root(0.3, 0.0, 4.0), 0.3);

        // u*(1 + 0.2u)^2 = 0.3 has its root at ~0.27004.
        let root = u2_saturation_root(0.3, 0.05, 4.0);
        assert_relative_eq!(root, 0.27000, max_relative = 2e-4);
        let sat = 1.0 + 0.05 * root * 4.0;
        assert!((root * sat * sat - 0.3).abs() < 1e-10);

        // b = 0 collapses to clamp(c).
        assert_eq!(optimal_u2_pointwise(10.0, 0.0, 4.0, 0.1, 0.0, 0.4), 1.0);
    }

    #[test]
    fn zero_running_cost_converges_to_zero_controls() {
        let p = table2();
        let w = CostWeights::new(0.0, 0.0, 0.8, 0.1).unwrap();
        let grid = TimeGrid::new(0.0, 20.0, 400).unwrap();
        let sol = fbs_solve(&p, &w, &x0(), &grid, &OcOptions::default(), ActiveControls::Both)
            .unwrap();
        assert!(sol.converged);
        assert!(sol.u1.iter().all(|v| *v == 0.0));
        assert!(sol.u2.iter().all(|v| *v == 0.0));
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn uncontrolled_baseline_cumulative_infected() {
        let p = table2();
        let sol = fbs_solve(
            &p,
            &table2_weights(),
            &x0(),
            &table2_grid(),
            &OcOptions::default(),
            ActiveControls::None,
        )
        .unwrap();
        let a0 = cumulative_infected(&sol.states).unwrap();
        assert_relative_eq!(a0, 1933.9, max_relative = 0.02);

        // Simpson vs trapezoid on the same samples.
        let trap = trapezoid_integral(&sol.states.component(1), sol.grid.step()).unwrap();
        assert_relative_eq!(a0, trap, max_relative = 5e-4);
    }

    #[test]
    fn forward_run_stays_in_invariant_region() {
        let p = table2();
        let sol = fbs_solve(
            &p,
            &table2_weights(),
            &x0(),
            &table2_grid(),
            &OcOptions::default(),
            ActiveControls::None,
        )
        .unwrap();
        let slack = 1e-6 * p.population_bound();
        for y in &sol.states.samples {
            let total = y[0] + y[1] + y[2];
            assert!(total <= p.population_bound() + slack);
            let x = SirState { s: y[0].max(0.0), i: y[1].max(0.0), r: y[2].max(0.0) };
            assert!(invariant_region_contains(&x, &p).unwrap() || total > p.population_bound());
        }
    }

    #[test]
    fn converged_solution_satisfies_pointwise_characterization() {
        let p = table2();
        let w = table2_weights();
        let opts = OcOptions::default();
        let sol = fbs_solve(&p, &w, &x0(), &table2_grid(), &opts, ActiveControls::Both).unwrap();
        assert!(sol.converged, "sweep did not converge in {} iters", sol.iterations);

        // Terminal adjoints are exactly zero; l3 is identically zero.
        let last = sol.adjoints.samples[sol.grid.n];
        assert_eq!(last, [0.0, 0.0, 0.0]);
        for l in &sol.adjoints.samples {
            assert!(l[2].abs() <= 1e-12);
        }

        let mut interior = 0usize;
        let mut ok = 0usize;
        for k in 0..sol.grid.len() {
            let y = sol.states.samples[k];
            let l = sol.adjoints.samples[k];
            if sol.u1[k] > 0.0 && sol.u1[k] < 1.0 {
                interior += 1;
                let cand = optimal_u1_pointwise(l[0], l[2], y[0], w.b1);
                if (sol.u1[k] - cand).abs() <= 10.0 * opts.tol {
                    ok += 1;
                }
            }
            if sol.u2[k] > 0.0 && sol.u2[k] < 1.0 {
                interior += 1;
                let cand = optimal_u2_pointwise(l[1], l[2], y[1], w.b2, p.b, p.r);
                if (sol.u2[k] - cand).abs() <= 10.0 * opts.tol {
                    ok += 1;
                }
            }
            assert!((0.0..=1.0).contains(&sol.u1[k]));
            assert!((0.0..=1.0).contains(&sol.u2[k]));
        }
        assert!(interior > 0);
        assert!(
            ok as f64 >= 0.95 * interior as f64,
            "{ok}/{interior} interior nodes satisfy the characterization"
        );
    }

    #[test]
    fn adjoint_gradient_matches_finite_difference() {
        // Check the gradient identity away from stationarity, where the
        // first-order term dominates the O(eps) bias of the forward quotient.
        let p = table2();
        let w = table2_weights();
        let grid = TimeGrid::new(0.0, 20.0, 400).unwrap();
        let n = grid.len();
        let u1: Vec<f64> = (0..n).map(|k| 0.3 + 0.1 * (k as f64 / n as f64)).collect();
        let u2 = vec![0.4; n];
        let du1: Vec<f64> = grid
            .nodes()
            .map(|t| (std::f64::consts::PI * t / 20.0).sin())
            .collect();
        let du2: Vec<f64> = grid.nodes().map(|t| 0.5 * (1.0 - t / 20.0)).collect();

        let adj = directional_derivative(&p, &w, &x0(), &grid, &u1, &u2, &du1, &du2).unwrap();
        let eps = 1e-4;
        let u1_pert: Vec<f64> = u1.iter().zip(&du1).map(|(u, d)| u + eps * d).collect();
        let u2_pert: Vec<f64> = u2.iter().zip(&du2).map(|(u, d)| u + eps * d).collect();
        let j0 = objective_at(&p, &w, &x0(), &grid, &u1, &u2).unwrap();
        let j1 = objective_at(&p, &w, &x0(), &grid, &u1_pert, &u2_pert).unwrap();
        let fd = (j1 - j0) / eps;
        assert_relative_eq!(adj, fd, max_relative = 1e-2);
    }

    #[test]
    fn strategies_reduce_cumulative_infected() {
        let p = table2();
        let w = table2_weights();
        let grid = TimeGrid::new(0.0, 20.0, 500).unwrap();
        let opts = OcOptions::default();
        let both = run_strategy(Strategy::Both, &p, &w, &x0(), &grid, &opts).unwrap();
        assert!(both.a_controlled <= both.a_uncontrolled);
        assert!(both.efficiency >= 0.0);

        let none = run_strategy(Strategy::None, &p, &w, &x0(), &grid, &opts).unwrap();
        assert_eq!(none.efficiency, 0.0);
    }

    #[test]
    fn efficiency_index_edges() {
        assert_eq!(efficiency_index(5.0, 5.0).unwrap(), 0.0);
        assert_eq!(efficiency_index(0.0, 5.0).unwrap(), 100.0);
        assert!(efficiency_index(1.0, 0.0).is_err());
        assert_relative_eq!(
            efficiency_index(410.2195, 1933.9).unwrap(),
            78.79,
            max_relative = 1e-3
        );
    }
}
