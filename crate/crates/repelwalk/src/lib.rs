// `!(x >= 0.0)` guards reject NaN where `x < 0.0` would wave it through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::manual_is_multiple_of)]

//! Simulation and verification lab for discrete-time random walks
//! reweighted by self-repelling pair potentials.
//!
//! The measure under study reweights a `±a` product walk of horizon `T` by
//! `exp(alpha * sum W(x_j - x_i, j - i))`; the library computes its
//! expectations exactly (full enumeration with stable log-domain weights),
//! through transfer matrices for finite-range potentials, and by Metropolis
//! sampling beyond the enumeration cap. On top of that sit the dyadic
//! variance recursion with its phase diagram, tilted-measure extremal
//! analysis, and numeric certification of the correlation-inequality
//! toolbox.

pub mod acceptance;
pub mod error;
pub mod exact;
pub mod gks;
pub mod mcmc;
pub mod model;
pub mod multiscale;
pub mod tilt;
pub mod transfer;

pub use error::{Error, Result};
pub use exact::{expectation, ExactResult, Observable};
pub use model::{delta_energy_flip, energy, evaluate_w, GibbsSpec, PairPotential, SpinPath};
