//! Replicator-mutator dynamics of the Rock-Paper-Scissors game.
//!
//! Strategy frequencies `(x, y, z)` (rock, paper, scissors) evolve by
//!
//! ```text
//! ẋ_i = x_i (f_i − φ) + μ · (mutation inflow − outflow)_i
//! ```
//!
//! where `f = A p` for the payoff matrix with winner payoff `1` and loser
//! payoff `−(ε+1)`, and the mutation pathways form an arbitrary directed
//! graph on the three strategies. The crate locates equilibria, traces
//! Hopf and transcritical bifurcation curves in the `(ε, μ)` plane,
//! classifies long-run behaviour, and renders stability diagrams and phase
//! portraits.

pub mod attractors;
pub mod bifurcation;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod game;
pub mod integrator;
pub mod mutation;
pub mod simplex;
pub mod svg;

pub use dynamics::{integrate, vector_field, Params, Trajectory};
pub use error::{Error, Result};
pub use integrator::Tolerances;
pub use mutation::{parse_pattern, MutationPattern, PatternPreset};
pub use simplex::SimplexState;
