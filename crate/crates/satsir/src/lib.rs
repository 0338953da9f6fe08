//! SIR epidemic model with saturated incidence and saturated treatment.
//!
//! The library covers three layers:
//!
//! - [`dynamics`]: the controlled vector field, its saturated incidence
//!   `beta*S*I/(1+alpha*I)` and treatment `r*u2*I/(1+b*u2*I)` building
//!   blocks, and the positively invariant region `S+I+R <= A/d`.
//! - [`equilibria`]: disease-free and endemic equilibria, the basic
//!   reproduction number, transcritical and backward bifurcation thresholds
//!   and stability classification.
//! - [`optctl`] on top of [`numerics`]: the two-control optimal-control
//!   problem (vaccination + treatment), solved by a forward-backward sweep,
//!   with efficiency analysis of the single-control strategies.
//!
//! The `satsir` binary exposes the same machinery behind `simulate`,
//! `equilibria`, `scan`, `optimize` and `efficiency` subcommands; see
//! [`config`] for the JSON schema it consumes.
//!
//! ```
//! use satsir::dynamics::{ControlPair, ModelParams};
//! use satsir::equilibria::basic_reproduction_number;
//!
//! let p = ModelParams::new(100.0, 0.1, 0.5, 0.004, 0.02, 0.7, 0.4, 0.05).unwrap();
//! let u = ControlPair::new(0.5, 0.5).unwrap();
//! let r0 = basic_reproduction_number(&p, &u).unwrap();
//! assert!((r0 - 21.4732).abs() < 1e-3);
//! ```

pub mod config;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod numerics;
pub mod optctl;
pub mod output;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::dynamics::ModelParams;

    /// Simulation parameter set used throughout the efficiency analysis.
    pub fn table2() -> ModelParams {
        ModelParams::new(100.0, 0.1, 0.5, 0.004, 0.02, 0.7, 0.4, 0.05).unwrap()
    }

    /// Parameter set of the backward-bifurcation example (beta left at its
    /// `R0 = 1` value unless a test retunes it).
    pub fn figure1() -> ModelParams {
        // A=11, alpha=0.5, d=0.000039, gamma=0.08, delta=0.02, r=0.4, b=2.21
        let d = 0.000039;
        let beta_r0_one = (d + 0.5) * (d + 0.02 + 0.08 + 0.4 * 0.5) / 11.0;
        ModelParams::new(11.0, beta_r0_one, 0.5, d, 0.02, 0.08, 0.4, 2.21).unwrap()
    }
}
