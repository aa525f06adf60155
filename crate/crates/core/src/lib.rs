//! Generalized Schwarzian derivatives `S_k`, evaluated numerically on
//! truncated Taylor/Laurent jets, together with the linear ODE they are
//! tied to and a few probes of the associated function families.

pub mod bessel;
pub mod catalog;
pub mod disconjugacy;
pub mod error;
pub mod expr;
pub mod jet;
pub mod normality;
pub mod ode_link;
pub mod schwarzian;
pub mod verify;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use expr::FunctionExpr;
pub use jet::{Jet, JetSource};
