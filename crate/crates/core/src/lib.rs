//! Exact evolutionary analysis of the iterated crowdsourcing dilemma game.

pub mod algebra;
pub mod checks;
pub mod error;
pub mod ess;
pub mod game;
pub mod markov;
pub mod replicator;
pub mod strategy;

pub use error::{Error, Result};
