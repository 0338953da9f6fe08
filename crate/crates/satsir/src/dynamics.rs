//! Model parameters and the vector field of the controlled SIR system.
//!
//! The model divides the population into susceptibles `S`, infecteds `I` and
//! recovereds `R`. New infections follow the saturated incidence rate
//! `beta*S*I/(1 + alpha*I)` and treated recoveries follow the saturated
//! treatment rate `r*u2*I/(1 + b*u2*I)`, so both flatten as `I` grows.
//! Two controls act on the system: a vaccination fraction `u1` moving
//! susceptibles to the recovered class and a treatment effort `u2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight epidemiological constants of the model.
///
/// All rates are per month; `alpha` is per individual and `b` scales the
/// product `u2 * I` in the treatment saturation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Recruitment rate of the population (individuals/month).
    pub a: f64,
    /// Transmission rate.
    pub beta: f64,
    /// Inhibitory coefficient of the saturated incidence.
    pub alpha: f64,
    /// Natural mortality rate.
    pub d: f64,
    /// Disease-induced death rate.
    pub delta: f64,
    /// Natural recovery rate of infecteds.
    pub gamma: f64,
    /// Cure rate under treatment.
    pub r: f64,
    /// Treatment delay parameter; `r/b` caps the treatment supply.
    pub b: f64,
}

impl ModelParams {
    /// Builds a parameter set, rejecting any invariant violation.
    ///
    /// Violations are hard errors rather than clamps: a silently adjusted
    /// parameter would corrupt every downstream bifurcation scan.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        beta: f64,
        alpha: f64,
        d: f64,
        delta: f64,
        gamma: f64,
        r: f64,
        b: f64,
    ) -> Result<Self> {
        let p = Self {
            a,
            beta,
            alpha,
            d,
            delta,
            gamma,
            r,
            b,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks every field invariant; used by [`ModelParams::new`] and by
    /// config loading.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("a", self.a),
            ("beta", self.beta),
            ("alpha", self.alpha),
            ("d", self.d),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("r", self.r),
            ("b", self.b),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidValue {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
            if value < 0.0 {
                return Err(Error::Negative { name, value });
            }
        }
        if self.a <= 0.0 {
            return Err(Error::InvalidValue {
                name: "a",
                value: self.a,
                reason: "recruitment rate must be positive",
            });
        }
        if self.d <= 0.0 {
            return Err(Error::InvalidValue {
                name: "d",
                value: self.d,
                reason: "natural mortality must be positive (the bound A/d and the DFE need it)",
            });
        }
        Ok(())
    }

    /// Population ceiling `A/d` of the positively invariant region.
    pub fn population_bound(&self) -> f64 {
        self.a / self.d
    }
}

/// A pair of admissible control values, each clamped-checked to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlPair {
    /// Vaccination fraction of susceptibles.
    pub u1: f64,
    /// Treatment effort for infecteds.
    pub u2: f64,
}

impl ControlPair {
    pub fn new(u1: f64, u2: f64) -> Result<Self> {
        let c = Self { u1, u2 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("u1", self.u1), ("u2", self.u2)] {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(Error::InvalidValue {
                    name,
                    value,
                    reason: "controls must lie in [0, 1]",
                });
            }
        }
        Ok(())
    }

    /// Both controls switched off.
    pub fn zero() -> Self {
        Self { u1: 0.0, u2: 0.0 }
    }
}

/// A point of the (S, I, R) state space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SirState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

impl SirState {
    pub fn new(s: f64, i: f64, r: f64) -> Result<Self> {
        let x = Self { s, i, r };
        x.validate()?;
        Ok(x)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("s", self.s), ("i", self.i), ("r", self.r)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Negative { name, value });
            }
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.s + self.i + self.r
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.s, self.i, self.r]
    }

    pub fn from_array(y: [f64; 3]) -> Self {
        Self {
            s: y[0],
            i: y[1],
            r: y[2],
        }
    }
}

/// Saturated incidence `beta*S*I/(1 + alpha*I)`.
///
/// Monotone nondecreasing in both `S` and `I`; bounded by the bilinear rate
/// `beta*S*I`.
pub fn incidence_rate(s: f64, i: f64, p: &ModelParams) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::Negative { name: "s", value: s });
    }
    if i < 0.0 {
        return Err(Error::Negative { name: "i", value: i });
    }
    Ok(incidence_rate_unchecked(s, i, p))
}

pub(crate) fn incidence_rate_unchecked(s: f64, i: f64, p: &ModelParams) -> f64 {
    p.beta * s * i / (1.0 + p.alpha * i)
}

/// Saturated treatment `r*u2*I/(1 + b*u2*I)`, capped by `r/b` when `b > 0`.
pub fn treatment_rate(i: f64, u2: f64, p: &ModelParams) -> Result<f64> {
    if i < 0.0 {
        return Err(Error::Negative { name: "i", value: i });
    }
    if !(0.0..=1.0).contains(&u2) {
        return Err(Error::InvalidValue {
            name: "u2",
            value: u2,
            reason: "controls must lie in [0, 1]",
        });
    }
    Ok(treatment_rate_unchecked(i, u2, p))
}

pub(crate) fn treatment_rate_unchecked(i: f64, u2: f64, p: &ModelParams) -> f64 {
    p.r * u2 * i / (1.0 + p.b * u2 * i)
}

/// Right-hand side of the controlled SIR system.
///
/// The three components always sum to `A - d*(S+I+R) - delta*I`.
///
/// ```
/// use satsir::dynamics::{state_rhs, ControlPair, ModelParams, SirState};
///
/// let p = ModelParams::new(100.0, 0.1, 0.5, 0.004, 0.02, 0.7, 0.4, 0.05).unwrap();
/// let x = SirState::new(50.0, 4.0, 0.01).unwrap();
/// let (ds, di, dr) = state_rhs(&x, &ControlPair::zero(), &p).unwrap();
/// let balance = 100.0 - 0.004 * x.total() - 0.02 * x.i;
/// assert!((ds + di + dr - balance).abs() < 1e-12);
/// ```
pub fn state_rhs(x: &SirState, u: &ControlPair, p: &ModelParams) -> Result<(f64, f64, f64)> {
    x.validate()?;
    u.validate()?;
    let [ds, di, dr] = state_rhs_raw(&x.as_array(), u, p);
    Ok((ds, di, dr))
}

/// Unvalidated vector field over raw arrays; this is what the integrators
/// call, since RK4 stage points may leave the nonnegative orthant by a
/// rounding-level amount.
pub fn state_rhs_raw(y: &[f64; 3], u: &ControlPair, p: &ModelParams) -> [f64; 3] {
    let (s, i) = (y[0], y[1]);
    let infection = incidence_rate_unchecked(s, i, p);
    let treated = treatment_rate_unchecked(i, u.u2, p);
    let ds = p.a - infection - p.d * s - u.u1 * s;
    let di = infection - (p.d + p.delta + p.gamma) * i - treated;
    let dr = treated + p.gamma * i + u.u1 * s - p.d * y[2];
    [ds, di, dr]
}

/// Membership test for the positively invariant region `S+I+R <= A/d`.
pub fn invariant_region_contains(x: &SirState, p: &ModelParams) -> Result<bool> {
    x.validate()?;
    if p.d <= 0.0 {
        return Err(Error::Degenerate("invariant region bound A/d needs d > 0"));
    }
    Ok(x.total() <= p.population_bound())
}
