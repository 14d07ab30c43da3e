//! Population state on the 2-simplex and its equilateral-triangle picture.

use serde::{Deserialize, Serialize};

/// Frequencies of rock (`x`), paper (`y`) and scissors (`z`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Slack allowed on the simplex constraints.
pub const SIMPLEX_TOL: f64 = 1e-9;

impl SimplexState {
    pub const CENTROID: SimplexState = SimplexState {
        x: 1.0 / 3.0,
        y: 1.0 / 3.0,
        z: 1.0 / 3.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// State from the reduced coordinates, with `z = 1 - x - y`.
    pub fn from_reduced(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            z: 1.0 - x - y,
        }
    }

    pub fn reduced(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// Cyclic relabelling `(x, y, z) -> (z, x, y)`: the rock share moves to
    /// the paper slot, and so on. Commutes with the dynamics when the
    /// mutation pattern is rotated the same way.
    pub fn rotate(&self) -> Self {
        Self::new(self.z, self.x, self.y)
    }

    pub fn min_coord(&self) -> f64 {
        self.x.min(self.y).min(self.z)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn on_simplex(&self, tol: f64) -> bool {
        (self.x + self.y + self.z - 1.0).abs() <= tol && self.min_coord() >= -tol
    }

    pub fn distance(&self, other: &SimplexState) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Clamp negative components to zero and renormalize by the sum.
    pub fn clamp_renormalize(&self) -> Self {
        let a = self.as_array().map(|v| v.max(0.0));
        let s: f64 = a.iter().sum();
        if s > 0.0 {
            Self::from_array(a.map(|v| v / s))
        } else {
            Self::CENTROID
        }
    }

    /// Equilateral-triangle coordinates: rock at (1, 0), paper at
    /// (1/2, √3/2), scissors at the origin.
    pub fn to_triangle(&self) -> (f64, f64) {
        to_triangle(self)
    }
}

/// `X = x + y/2`, `Y = (√3/2) y`.
pub fn to_triangle(state: &SimplexState) -> (f64, f64) {
    (state.x + 0.5 * state.y, 0.5 * 3f64.sqrt() * state.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vertices_and_centroid_map_onto_the_triangle() {
        let (x, y) = to_triangle(&SimplexState::new(1.0, 0.0, 0.0));
        assert_eq!((x, y), (1.0, 0.0));
        let (x, y) = to_triangle(&SimplexState::new(0.0, 1.0, 0.0));
        assert_abs_diff_eq!(x, 0.5);
        assert_abs_diff_eq!(y, 3f64.sqrt() / 2.0);
        let (x, y) = to_triangle(&SimplexState::CENTROID);
        assert_abs_diff_eq!(x, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(y, 3f64.sqrt() / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn clamp_renormalize_restores_simplex() {
        let s = SimplexState::new(0.6, 0.5, -0.1).clamp_renormalize();
        assert!(s.on_simplex(1e-15));
        assert_eq!(s.z, 0.0);
    }

    #[test]
    fn rotate_has_order_three() {
        let s = SimplexState::new(0.5, 0.3, 0.2);
        assert_eq!(s.rotate().rotate().rotate(), s);
        assert_eq!(s.rotate(), SimplexState::new(0.2, 0.5, 0.3));
    }
}
