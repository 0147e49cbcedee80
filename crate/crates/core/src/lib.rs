//! Classical averaging and quantum Floquet expansions for the driven
//! Duffing (Kerr) oscillator, with exact numerical oracles for both.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod error;
pub mod fock;
pub mod kb;
pub mod lindblad;
pub mod linalg;
pub mod meanfield;
pub mod ode;
pub mod params;
pub mod vanvleck;

pub use error::{Error, Result};
pub use params::{BasisChoice, BasisKind, RWACoefficients, SystemParams};
