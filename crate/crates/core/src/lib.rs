//! Equilibria of the ultimatum game with many proposers and many
//! responders.
//!
//! Responders pick one proposer each; a proposer visited by several
//! responders accepts one uniformly. [`ess`] solves the responders'
//! evolutionarily stable mix for fixed offers, [`proposer`] the offers
//! proposers make anticipating it, and [`asymptotics`] their limits.

pub mod asymptotics;
pub mod duopoly;
pub mod engine;
pub mod error;
pub mod ess;
pub mod model;
pub mod proposer;
pub mod replicator;
pub mod roots;

pub use error::{Error, Result};
pub use model::{GameConfig, OfferVector, PayoffReport, StrategyProfile, SymmetricStrategy};
