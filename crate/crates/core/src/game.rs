//! The one-parameter Rock-Paper-Scissors payoff family.
//!
//! The winner of an encounter receives `1`, the loser `-(ε + 1)`, and a tie
//! pays nothing. The game is zero-sum exactly at `ε = 0`; for `ε > 0` every
//! encounter between different strategies destroys `ε` units of payoff.
//! (The older convention where the loser receives `-ε` and zero-sum sits at
//! `ε = 1` maps onto this one by `ε_old = ε + 1`.)

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::simplex::SimplexState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    Rock,
    Paper,
    Scissors,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Rock, Strategy::Paper, Strategy::Scissors];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Strategy {
        Self::ALL[i % 3]
    }

    /// Next strategy in the cycle Rock → Paper → Scissors → Rock, i.e. the
    /// one that beats `self`.
    pub fn successor(self) -> Strategy {
        Self::from_index(self.index() + 1)
    }

    pub fn beats(self, other: Strategy) -> bool {
        other.successor() == self
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::Rock => "rock",
            Strategy::Paper => "paper",
            Strategy::Scissors => "scissors",
        };
        f.write_str(s)
    }
}

/// Payoff to `row` when it meets `col`.
pub fn payoff(row: Strategy, col: Strategy, epsilon: f64) -> f64 {
    if row == col {
        0.0
    } else if row.beats(col) {
        1.0
    } else {
        -(epsilon + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub epsilon: f64,
}

impl PayoffMatrix {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon }
    }

    pub fn entry(&self, row: Strategy, col: Strategy) -> f64 {
        payoff(row, col, self.epsilon)
    }

    pub fn to_array(&self) -> [[f64; 3]; 3] {
        let mut a = [[0.0; 3]; 3];
        for r in Strategy::ALL {
            for c in Strategy::ALL {
                a[r.index()][c.index()] = self.entry(r, c);
            }
        }
        a
    }

    pub fn is_zero_sum(&self) -> bool {
        let a = self.to_array();
        (0..3).all(|i| (0..3).all(|j| a[i][j] == -a[j][i]))
    }
}

/// Fitness of each strategy, using the reduced forms with `z = 1 - x - y`
/// for rock and paper.
pub fn fitness(state: &SimplexState, epsilon: f64) -> [f64; 3] {
    let (x, y) = (state.x, state.y);
    let fx = 1.0 - x - (epsilon + 2.0) * y;
    let fy = (epsilon + 2.0) * x + (epsilon + 1.0) * (y - 1.0);
    let fz = -(epsilon + 1.0) * x + y;
    [fx, fy, fz]
}

/// Fitness as the expected payoff `Σ_j A_ij p_j` against the population.
pub fn fitness_by_expectation(state: &SimplexState, epsilon: f64) -> [f64; 3] {
    let a = PayoffMatrix::new(epsilon).to_array();
    let p = state.as_array();
    let mut f = [0.0; 3];
    for i in 0..3 {
        f[i] = (0..3).map(|j| a[i][j] * p[j]).sum();
    }
    f
}

/// Mean fitness `φ = x f_x + y f_y + z f_z`.
pub fn average_fitness(state: &SimplexState, epsilon: f64) -> f64 {
    let f = fitness(state, epsilon);
    state.x * f[0] + state.y * f[1] + state.z * f[2]
}

/// `φ = -ε (xy + yz + zx)`, which follows from `A_ij + A_ji = -ε` off the
/// diagonal.
pub fn average_fitness_closed(state: &SimplexState, epsilon: f64) -> f64 {
    let SimplexState { x, y, z } = *state;
    -epsilon * (x * y + y * z + z * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use Strategy::*;

    #[test]
    fn payoff_table_entries() {
        assert_eq!(payoff(Rock, Scissors, 0.5), 1.0);
        assert_eq!(payoff(Rock, Paper, 0.5), -1.5);
        assert_eq!(payoff(Paper, Paper, 0.7), 0.0);
        assert_eq!(payoff(Paper, Rock, 0.5), 1.0);
        assert_eq!(payoff(Scissors, Paper, 0.5), 1.0);
        assert_eq!(payoff(Scissors, Rock, 0.5), -1.5);
    }

    #[test]
    fn cyclic_order() {
        assert_eq!(Rock.successor(), Paper);
        assert_eq!(Paper.successor(), Scissors);
        assert_eq!(Scissors.successor(), Rock);
        assert!(Paper.beats(Rock));
        assert!(Rock.beats(Scissors));
        assert!(Scissors.beats(Paper));
        assert!(!Rock.beats(Paper));
        assert!(!Rock.beats(Rock));
    }

    #[test]
    fn zero_sum_only_at_zero_epsilon() {
        assert!(PayoffMatrix::new(0.0).is_zero_sum());
        assert!(!PayoffMatrix::new(0.1).is_zero_sum());
        let a = PayoffMatrix::new(0.3).to_array();
        for i in 0..3 {
            assert_eq!(a[i][i], 0.0);
        }
    }

    #[test]
    fn fitness_examples() {
        let f = fitness(&SimplexState::new(1.0, 0.0, 0.0), 0.8);
        assert_eq!(f[0], 0.0);

        let eps = 0.45;
        for f in [
            fitness(&SimplexState::CENTROID, eps),
            fitness_by_expectation(&SimplexState::CENTROID, eps),
        ] {
            for fi in f {
                assert_abs_diff_eq!(fi, -eps / 3.0, epsilon = 1e-15);
            }
        }

        let f = fitness(&SimplexState::new(0.0, 1.0, 0.0), 0.2);
        assert_abs_diff_eq!(f[0], -1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(f[0], payoff(Rock, Paper, 0.2), epsilon = 1e-15);
    }

    #[test]
    fn average_fitness_examples() {
        let s = SimplexState::new(0.2, 0.5, 0.3);
        assert_abs_diff_eq!(average_fitness(&s, 0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            average_fitness(&SimplexState::CENTROID, 0.9),
            -0.3,
            epsilon = 1e-15
        );
        assert_eq!(average_fitness(&SimplexState::new(1.0, 0.0, 0.0), 1.7), 0.0);
    }
}
