//! Equilibria, the basic reproduction number, stability classification and
//! the bifurcation structure of the model for fixed controls.
//!
//! The infected component of any endemic equilibrium is a root of the scalar
//! equation `H(I) = 0`, which simplifies to the quadratic
//! `C1*I^2 + C2*I + C3 = 0`. The sign pattern of the coefficients gives the
//! three existence cases (one point for `R0 > 1`, zero or two points for
//! `R0 < 1`), and the two-point regime below `R0 = 1` is exactly the
//! backward-bifurcation window `(R0*, 1)`.

use serde::Serialize;

use crate::dynamics::{treatment_rate_unchecked, ControlPair, ModelParams, SirState};
use crate::error::{Error, Result};

/// Stability classification of an equilibrium point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    AsymptoticallyStable,
    Unstable,
    GloballyAsymptoticallyStable,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumKind {
    DiseaseFree,
    Endemic,
}

/// An equilibrium of the model together with its classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    pub state: SirState,
    pub kind: EquilibriumKind,
    pub stability: Stability,
}

/// Coefficients of the endemic quadratic `C1*I^2 + C2*I + C3 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndemicCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl EndemicCoefficients {
    pub fn discriminant(&self) -> f64 {
        self.c2 * self.c2 - 4.0 * self.c1 * self.c3
    }
}

/// One column of a bifurcation diagram: the endemic infected levels at a
/// given reproduction number, with their stability tags.
#[derive(Debug, Clone, Serialize)]
pub struct BranchSample {
    pub r0: f64,
    pub points: Vec<(f64, Stability)>,
}

/// Classification of the disease-free equilibrium plus diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DfeReport {
    pub stability: Stability,
    pub r0: f64,
    /// Centre-manifold coefficient, populated only on the non-hyperbolic
    /// branch `|R0 - 1| <= eps`.
    pub a11: Option<f64>,
}

/// Transcritical bifurcation value of the treatment control.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct U2Threshold {
    pub value: f64,
    /// The threshold may exceed the admissible bound 1; it is returned
    /// unclamped with this flag.
    pub within_unit: bool,
}

/// Backward-bifurcation test result.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BackwardBifurcation {
    pub holds: bool,
    /// `b*r*u2^2*A - (r*u2+d+delta+gamma)(r*u2+d+delta+gamma+alpha*A)`;
    /// the condition holds iff this is positive.
    pub margin: f64,
}

/// Relative tolerance for accepting a state as an endemic root of `H`.
pub const EQUILIBRIUM_RESIDUAL_TOL: f64 = 1e-9;

/// Default hyperbolicity tolerance on `|R0 - 1|`.
pub const DEFAULT_HYPERBOLICITY_EPS: f64 = 1e-9;

fn removal_rate(p: &ModelParams, u2: f64) -> f64 {
    p.d + p.delta + p.gamma + p.r * u2
}

/// Disease-free equilibrium `(A/(d+u1), 0, u1*A/(d*(d+u1)))`.
pub fn disease_free_equilibrium(p: &ModelParams, u1: f64) -> Result<SirState> {
    if p.d <= 0.0 {
        return Err(Error::Degenerate("disease-free equilibrium needs d > 0"));
    }
    if p.d + u1 <= 0.0 {
        return Err(Error::Degenerate("disease-free equilibrium needs d + u1 > 0"));
    }
    let s = p.a / (p.d + u1);
    let r = u1 * p.a / (p.d * (p.d + u1));
    Ok(SirState { s, i: 0.0, r })
}

/// Basic reproduction number `beta*A / ((d+u1)(d+delta+gamma+r*u2))`.
pub fn basic_reproduction_number(p: &ModelParams, u: &ControlPair) -> Result<f64> {
    let denom = (p.d + u.u1) * removal_rate(p, u.u2);
    if denom <= 0.0 {
        return Err(Error::Degenerate(
            "basic reproduction number needs (d+u1)(d+delta+gamma+r*u2) > 0",
        ));
    }
    Ok(p.beta * p.a / denom)
}

/// The transmission rate that realizes a prescribed reproduction number,
/// inverting Lemma-style `R0(beta)` at fixed controls.
pub fn beta_for_r0(p: &ModelParams, u: &ControlPair, r0: f64) -> f64 {
    r0 * (p.d + u.u1) * removal_rate(p, u.u2) / p.a
}

/// The equilibrium equation `H(I)` and its derivative `H'(I)`.
///
/// `H(I) = A/(beta*I + (d+u1)(1+alpha*I)) - r*u2/(beta*(1+b*u2*I))
///        - (d+delta+gamma)/beta`.
pub fn equilibrium_gap(i: f64, p: &ModelParams, u: &ControlPair) -> Result<(f64, f64)> {
    if i < 0.0 {
        return Err(Error::Negative { name: "i", value: i });
    }
    if p.beta <= 0.0 {
        return Err(Error::Degenerate("H(I) needs beta > 0"));
    }
    let dv = p.d + u.u1;
    let denom1 = p.beta * i + dv * (1.0 + p.alpha * i);
    let denom2 = 1.0 + p.b * u.u2 * i;
    let h = p.a / denom1 - p.r * u.u2 / (p.beta * denom2) - (p.d + p.delta + p.gamma) / p.beta;
    let hp = p.r * p.b * u.u2 * u.u2 / (p.beta * denom2 * denom2)
        - p.a * (p.beta + p.alpha * dv) / (denom1 * denom1);
    Ok((h, hp))
}

/// Magnitude scale of the three terms of `H(I)`, for relative residuals.
fn gap_scale(i: f64, p: &ModelParams, u: &ControlPair) -> f64 {
    let dv = p.d + u.u1;
    let denom1 = p.beta * i + dv * (1.0 + p.alpha * i);
    let denom2 = 1.0 + p.b * u.u2 * i;
    (p.a / denom1).abs()
        + (p.r * u.u2 / (p.beta * denom2)).abs()
        + ((p.d + p.delta + p.gamma) / p.beta).abs()
}

/// Coefficients of the quadratic that `H(I) = 0` reduces to.
pub fn endemic_coefficients(p: &ModelParams, u: &ControlPair) -> Result<EndemicCoefficients> {
    let dv = p.d + u.u1;
    let dg = p.d + p.delta + p.gamma;
    let slope = p.beta + p.alpha * dv;
    let r0 = basic_reproduction_number(p, u)?;
    let c1 = p.b * u.u2 * dg * slope;
    let c2 = p.b * u.u2 * (dv * dg - p.beta * p.a) + removal_rate(p, u.u2) * slope;
    // Written through (1 - R0) so the sign identity sign(C3) = sign(1 - R0)
    // holds bit-for-bit.
    let c3 = dv * removal_rate(p, u.u2) * (1.0 - r0);
    Ok(EndemicCoefficients { c1, c2, c3 })
}

/// Recovers the full equilibrium state from an endemic infected level.
pub fn endemic_state_from_i(i: f64, p: &ModelParams, u: &ControlPair) -> Result<SirState> {
    if p.d <= 0.0 {
        return Err(Error::Degenerate("recovered component needs d > 0"));
    }
    let dv = p.d + u.u1;
    let s = p.a * (1.0 + p.alpha * i) / (p.beta * i + dv * (1.0 + p.alpha * i));
    let r = (treatment_rate_unchecked(i, u.u2, p) + p.gamma * i + u.u1 * s) / p.d;
    Ok(SirState { s, i, r })
}

/// Positive roots of the endemic quadratic, via the cancellation-safe
/// sign-matched form (`C3 -> 0` near `R0 = 1` makes the naive formula lose
/// the small root).
fn positive_quadratic_roots(c: &EndemicCoefficients) -> Vec<f64> {
    let mut roots = Vec::new();
    if c.c1 == 0.0 {
        // Degenerate linear case (u2 = 0 or b = 0).
        if c.c2 != 0.0 {
            let root = -c.c3 / c.c2;
            if root > 0.0 && root.is_finite() {
                roots.push(root);
            }
        }
        return roots;
    }
    let disc = c.discriminant();
    if disc < 0.0 {
        return roots;
    }
    let sign = if c.c2 >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (c.c2 + sign * disc.sqrt());
    let mut candidates = vec![];
    if q != 0.0 {
        candidates.push(q / c.c1);
        candidates.push(c.c3 / q);
    }
    candidates.retain(|r| r.is_finite() && *r > 0.0);
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * a.abs().max(b.abs()));
    roots.extend(candidates);
    roots
}

/// All endemic equilibria (0, 1 or 2), sorted ascending in `I`, each with a
/// stability tag.
pub fn endemic_equilibria(p: &ModelParams, u: &ControlPair) -> Result<Vec<EquilibriumPoint>> {
    let coeffs = endemic_coefficients(p, u)?;
    let mut points = Vec::new();
    for i in positive_quadratic_roots(&coeffs) {
        let state = endemic_state_from_i(i, p, u)?;
        let stability = endemic_stability(&state, p, u)?;
        points.push(EquilibriumPoint {
            state,
            kind: EquilibriumKind::Endemic,
            stability,
        });
    }
    Ok(points)
}

/// The variational (Jacobian) matrix of the system at a state.
pub fn jacobian(x: &SirState, u: &ControlPair, p: &ModelParams) -> [[f64; 3]; 3] {
    let (s, i) = (x.s, x.i);
    let sat_i = 1.0 + p.alpha * i;
    let sat_t = 1.0 + p.b * u.u2 * i;
    let dincid_ds = p.beta * i / sat_i;
    let dincid_di = p.beta * s / (sat_i * sat_i);
    let dtreat_di = p.r * u.u2 / (sat_t * sat_t);
    [
        [-dincid_ds - p.d - u.u1, -dincid_di, 0.0],
        [
            dincid_ds,
            dincid_di - (p.d + p.delta + p.gamma) - dtreat_di,
            0.0,
        ],
        [u.u1, dtreat_di + p.gamma, -p.d],
    ]
}

/// Analytic eigenvalues of the Jacobian at the disease-free equilibrium:
/// `-d`, `-(d+u1)` and `(d+delta+gamma+r*u2)(R0 - 1)`.
pub fn dfe_eigenvalues(p: &ModelParams, u: &ControlPair) -> Result<[f64; 3]> {
    let r0 = basic_reproduction_number(p, u)?;
    Ok([
        -p.d,
        -(p.d + u.u1),
        removal_rate(p, u.u2) * (r0 - 1.0),
    ])
}

/// Centre-manifold coefficient deciding stability at the non-hyperbolic DFE:
/// `A11 = d(d+u1)[(d+delta+gamma+r*u2)(beta+(d+u1)alpha) - (d+u1)r*b*u2^2]`.
pub fn centre_manifold_coefficient(p: &ModelParams, u: &ControlPair) -> f64 {
    let dv = p.d + u.u1;
    p.d * dv * (removal_rate(p, u.u2) * (p.beta + dv * p.alpha) - dv * p.r * p.b * u.u2 * u.u2)
}

/// Classifies the disease-free equilibrium.
///
/// `R0 < 1 - eps` is stable, upgraded to globally stable under the Dulac
/// condition `alpha >= b*u2`; `R0 > 1 + eps` is unstable; the remaining
/// non-hyperbolic sliver is decided by the sign of the centre-manifold
/// coefficient `A11`.
pub fn dfe_stability(p: &ModelParams, u: &ControlPair, eps: f64) -> Result<DfeReport> {
    let r0 = basic_reproduction_number(p, u)?;
    if r0 < 1.0 - eps {
        let stability = if p.alpha >= p.b * u.u2 {
            Stability::GloballyAsymptoticallyStable
        } else {
            Stability::AsymptoticallyStable
        };
        return Ok(DfeReport {
            stability,
            r0,
            a11: None,
        });
    }
    if r0 > 1.0 + eps {
        return Ok(DfeReport {
            stability: Stability::Unstable,
            r0,
            a11: None,
        });
    }
    let a11 = centre_manifold_coefficient(p, u);
    let stability = if a11 < 0.0 {
        Stability::AsymptoticallyStable
    } else if a11 > 0.0 {
        Stability::Unstable
    } else {
        Stability::Undetermined
    };
    Ok(DfeReport {
        stability,
        r0,
        a11: Some(a11),
    })
}

/// Treatment-control value at which the DFE exchanges stability with the
/// endemic branch: `u2^0 = beta*A/(r(d+u1)) - (d+delta+gamma)/r`.
///
/// Returns `None` when `beta*A <= (d+u1)(d+delta+gamma)` (no crossing).
pub fn transcritical_u2_threshold(p: &ModelParams, u1: f64) -> Result<Option<U2Threshold>> {
    if p.r <= 0.0 {
        return Err(Error::Degenerate("transcritical threshold needs r > 0"));
    }
    let dv = p.d + u1;
    if p.beta * p.a <= dv * (p.d + p.delta + p.gamma) {
        return Ok(None);
    }
    let value = p.beta * p.a / (p.r * dv) - (p.d + p.delta + p.gamma) / p.r;
    Ok(Some(U2Threshold {
        value,
        within_unit: value <= 1.0,
    }))
}

/// Necessary-and-sufficient test for a backward bifurcation at `R0 = 1`.
///
/// ```
/// use satsir::dynamics::{ControlPair, ModelParams};
/// use satsir::equilibria::{backward_bifurcation_condition, find_r0_star};
///
/// let p = ModelParams::new(11.0, 0.0136392, 0.5, 0.000039, 0.02, 0.08, 0.4, 2.21).unwrap();
/// let u = ControlPair::new(0.5, 0.5).unwrap();
/// assert!(backward_bifurcation_condition(&p, u.u2).holds);
/// // With a backward bifurcation, endemic states persist below R0 = 1
/// // down to the saddle-node value R0*.
/// let r0_star = find_r0_star(&p, &u).unwrap().unwrap();
/// assert!(r0_star > 0.0 && r0_star < 1.0);
/// ```
pub fn backward_bifurcation_condition(p: &ModelParams, u2: f64) -> BackwardBifurcation {
    let g = p.r * u2 + p.d + p.delta + p.gamma;
    let margin = p.b * p.r * u2 * u2 * p.a - g * (g + p.alpha * p.a);
    BackwardBifurcation {
        holds: margin > 0.0,
        margin,
    }
}

/// Slope `dI/dR0` of the endemic branch at the bifurcation point
/// `(R0, I) = (1, 0)`; negative exactly when the bifurcation is backward.
pub fn slope_di_dr0_at_one(p: &ModelParams, u2: f64) -> Result<f64> {
    let g = removal_rate(p, u2);
    let denom = g * (g + p.alpha * p.a) - p.b * p.r * u2 * u2 * p.a;
    if denom == 0.0 {
        return Err(Error::Degenerate(
            "degenerate bifurcation: slope denominator vanishes",
        ));
    }
    Ok(p.a * g / denom)
}

/// Classifies an endemic equilibrium through the factored characteristic
/// polynomial `(lambda + d)(lambda^2 + K1*lambda + K2)`.
///
/// `K2 = G(0)` is the 2x2 minor of the Jacobian with the `-d` eigenvalue
/// factored out; `K1` uses the equilibrium relation for `S`. A negative `K2`
/// forces a positive eigenvalue; `K2 > 0` with `K1 > 0` puts both remaining
/// eigenvalues in the left half plane. `K2 > 0` with `K1 <= 0` stays
/// `Undetermined` (the sufficient condition is only sufficient).
pub fn endemic_stability(state: &SirState, p: &ModelParams, u: &ControlPair) -> Result<Stability> {
    let (h, _) = equilibrium_gap(state.i, p, u)?;
    let residual = h.abs() / gap_scale(state.i, p, u);
    if state.i <= 0.0 || residual > EQUILIBRIUM_RESIDUAL_TOL {
        return Err(Error::NotAnEquilibrium { residual });
    }
    let (k1, k2) = endemic_k_coefficients(state, p, u);
    if k2 < 0.0 {
        Ok(Stability::Unstable)
    } else if k2 > 0.0 && k1 > 0.0 {
        Ok(Stability::AsymptoticallyStable)
    } else {
        Ok(Stability::Undetermined)
    }
}

/// `(K1, K2)` of the quadratic eigenvalue factor at an endemic state.
pub fn endemic_k_coefficients(state: &SirState, p: &ModelParams, u: &ControlPair) -> (f64, f64) {
    let (s, i) = (state.s, state.i);
    let sat_i = 1.0 + p.alpha * i;
    let sat_t = 1.0 + p.b * u.u2 * i;
    let k1 = p.d + u.u1 + p.alpha * p.beta * s * i / (sat_i * sat_i) + p.beta * i / sat_i
        - p.r * p.b * u.u2 * u.u2 * i / (sat_t * sat_t);
    let j = jacobian(state, u, p);
    let k2 = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    (k1, k2)
}

/// Determinant of the upper-left 2x2 minor of the Jacobian, i.e. `G(0)`.
pub fn g_zero(state: &SirState, p: &ModelParams, u: &ControlPair) -> f64 {
    let j = jacobian(state, u, p);
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// Locates the saddle-node value `R0* < 1` below which the two endemic
/// equilibria of the backward regime disappear.
///
/// Returns `None` unless the backward-bifurcation condition holds. The
/// transmission rate is rescanned multiplicatively (factor 0.99) from the
/// `R0 = 1` value until the discriminant of the endemic quadratic turns
/// negative, then the sign change is bisected until `|disc| < 1e-10`.
pub fn find_r0_star(p: &ModelParams, u: &ControlPair) -> Result<Option<f64>> {
    if !backward_bifurcation_condition(p, u.u2).holds {
        return Ok(None);
    }
    let disc_at = |r0: f64| -> Result<f64> {
        let mut q = *p;
        q.beta = beta_for_r0(p, u, r0);
        Ok(endemic_coefficients(&q, u)?.discriminant())
    };
    let mut hi = 1.0;
    let mut lo = None;
    let mut r = 1.0;
    for _ in 0..200 {
        r *= 0.99;
        if disc_at(r)? < 0.0 {
            lo = Some(r);
            break;
        }
        hi = r;
    }
    let Some(mut lo) = lo else {
        return Ok(None);
    };
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let d = disc_at(mid)?;
        if d.abs() < 1e-10 {
            break;
        }
        if d < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < f64::EPSILON * hi {
            break;
        }
    }
    Ok(Some(mid))
}

/// Evaluates the endemic branches over an `R0` grid, retuning `beta` for
/// each grid value; output order matches the grid order.
pub fn bifurcation_scan(
    p: &ModelParams,
    u: &ControlPair,
    r0_grid: &[f64],
) -> Result<Vec<BranchSample>> {
    let mut samples = Vec::with_capacity(r0_grid.len());
    for &r0 in r0_grid {
        if r0 <= 0.0 {
            return Err(Error::InvalidValue {
                name: "r0",
                value: r0,
                reason: "scan grid values must be positive",
            });
        }
        let mut q = *p;
        q.beta = beta_for_r0(p, u, r0);
        let points = endemic_equilibria(&q, u)?
            .into_iter()
            .map(|pt| (pt.state.i, pt.stability))
            .collect();
        samples.push(BranchSample { r0, points });
    }
    Ok(samples)
}
