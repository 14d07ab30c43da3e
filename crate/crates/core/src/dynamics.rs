//! The replicator-mutator vector field and trajectory integration.
//!
//! `ẋ_i = x_i (f_i - φ) + μ (inflow_i - outflow_i)`, integrated in the
//! reduced coordinates `(x, y)` with `z = 1 - x - y`.

use serde::{Deserialize, Serialize};
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::game::fitness;
use crate::integrator::{OdeSystem, StepStats, Stepper, Tolerances};
use crate::mutation::{mutation_flux, MutationPattern};
use crate::simplex::{to_triangle, SimplexState, SIMPLEX_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub epsilon: f64,
    pub mu: f64,
    pub pattern: MutationPattern,
}

impl Params {
    pub fn new(epsilon: f64, mu: f64, pattern: MutationPattern) -> Self {
        Self {
            epsilon,
            mu,
            pattern,
        }
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("epsilon", self.epsilon), ("mu", self.mu)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and non-negative, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Full time derivative `(ẋ, ẏ, ż)`.
pub fn vector_field(state: &SimplexState, params: &Params) -> [f64; 3] {
    let f = fitness(state, params.epsilon);
    let p = state.as_array();
    let phi = p[0] * f[0] + p[1] * f[1] + p[2] * f[2];
    let flux = mutation_flux(&params.pattern, state, params.mu);
    [
        p[0] * (f[0] - phi) + flux[0],
        p[1] * (f[1] - phi) + flux[1],
        p[2] * (f[2] - phi) + flux[2],
    ]
}

/// `(ẋ, ẏ)` as a function of the reduced coordinates.
pub fn reduced_field(xy: [f64; 2], params: &Params) -> [f64; 2] {
    let v = vector_field(&SimplexState::from_reduced(xy[0], xy[1]), params);
    [v[0], v[1]]
}

/// The reduced planar system, with clamp-and-renormalize after each step.
#[derive(Debug, Clone, Copy)]
pub struct ReducedSystem {
    pub params: Params,
}

impl OdeSystem<2> for ReducedSystem {
    fn rhs(&self, _t: f64, y: &[f64; 2]) -> [f64; 2] {
        reduced_field(*y, &self.params)
    }

    fn project(&self, y: &mut [f64; 2]) -> bool {
        let z = 1.0 - y[0] - y[1];
        if y[0] >= 0.0 && y[1] >= 0.0 && z >= 0.0 {
            return false;
        }
        let s = SimplexState::from_reduced(y[0], y[1]).clamp_renormalize();
        *y = [s.x, s.y];
        true
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SimplexState>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&SimplexState> {
        self.states.last()
    }

    fn push(&mut self, t: f64, xy: &[f64; 2]) {
        self.times.push(t);
        self.states.push(SimplexState::from_reduced(xy[0], xy[1]));
    }

    fn record_stats(&mut self, stats: StepStats) {
        self.accepted_steps = stats.accepted;
        self.rejected_steps = stats.rejected;
    }

    /// Writes `t,x,y,z,X,Y` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,y,z,X,Y")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let (tx, ty) = to_triangle(s);
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, s.x, s.y, s.z, tx, ty
            )?;
        }
        Ok(())
    }
}

pub fn validate_tolerances(tol: &Tolerances) -> Result<()> {
    for (name, v) in [("rel_tol", tol.rel), ("abs_tol", tol.abs)] {
        if !(v > 0.0 && v <= 1e-2) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must lie in (0, 1e-2], got {v}"),
            });
        }
    }
    Ok(())
}

pub fn validate_start(start: &SimplexState) -> Result<()> {
    if !start.is_finite() || !start.on_simplex(SIMPLEX_TOL) {
        return Err(Error::InvalidParameter {
            name: "start",
            reason: format!(
                "({}, {}, {}) is not on the simplex",
                start.x, start.y, start.z
            ),
        });
    }
    Ok(())
}

/// Integrates from `start` to `t_end`, recording every accepted step.
pub fn integrate(
    start: SimplexState,
    params: &Params,
    t_end: f64,
    tol: Tolerances,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: format!("horizon must be positive, got {t_end}"),
        });
    }
    validate_tolerances(&tol)?;
    params.validate()?;
    validate_start(&start)?;

    let sys = ReducedSystem { params: *params };
    let mut y0 = start.reduced();
    sys.project(&mut y0);
    let mut traj = Trajectory::default();
    traj.push(0.0, &y0);
    let mut stepper = Stepper::new(&sys, 0.0, y0, tol);
    stepper.advance_to(t_end, |rec| traj.push(rec.t1, &rec.y1))?;
    traj.record_stats(stepper.stats);
    Ok(traj)
}

/// State at each of the increasing `times` (all > 0), continuing a single
/// integration through the checkpoints.
pub fn integrate_checkpoints(
    start: SimplexState,
    params: &Params,
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<SimplexState>> {
    validate_tolerances(&tol)?;
    params.validate()?;
    validate_start(&start)?;
    let sys = ReducedSystem { params: *params };
    let mut stepper = Stepper::new(&sys, 0.0, start.reduced(), tol);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        stepper.advance_to(t, |_| {})?;
        let y = stepper.y();
        out.push(SimplexState::from_reduced(y[0], y[1]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mutation::PatternPreset;

    #[test]
    fn field_examples() {
        let p = Params::new(0.7, 0.13, MutationPattern::global());
        for v in vector_field(&SimplexState::CENTROID, &p) {
            assert!(v.abs() < 1e-16);
        }
        let corner = SimplexState::new(1.0, 0.0, 0.0);
        assert_eq!(
            vector_field(&corner, &Params::new(0.4, 0.0, MutationPattern::global())),
            [0.0; 3]
        );
        let v = vector_field(
            &corner,
            &Params::new(0.4, 0.1, PatternPreset::SingleXy.pattern()),
        );
        assert!((v[0] + 0.1).abs() < 1e-16 && (v[1] - 0.1).abs() < 1e-16 && v[2] == 0.0);
    }

    #[test]
    fn single_yx_moves_paper_into_rock() {
        let p = Params::new(0.0, 0.2, PatternPreset::SingleYx.pattern());
        let v = vector_field(&SimplexState::new(0.0, 1.0, 0.0), &p);
        assert!((v[0] - 0.2).abs() < 1e-16);
        assert!((v[1] + 0.2).abs() < 1e-16);
    }

    #[test]
    fn corner_is_stationary_without_mutation() {
        let p = Params::new(0.5, 0.0, MutationPattern::none());
        let traj = integrate(
            SimplexState::new(1.0, 0.0, 0.0),
            &p,
            50.0,
            Tolerances::default(),
        )
        .unwrap();
        for s in &traj.states {
            assert_eq!(*s, SimplexState::new(1.0, 0.0, 0.0));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Params::new(0.9, 0.02, MutationPattern::global());
        let s = SimplexState::CENTROID;
        assert!(matches!(
            integrate(s, &p, -5.0, Tolerances::default()),
            Err(Error::InvalidParameter { name: "t_end", .. })
        ));
        assert!(integrate(
            s,
            &p,
            1.0,
            Tolerances {
                rel: 0.5,
                abs: 1e-9
            }
        )
        .is_err());
        assert!(integrate(
            SimplexState::new(0.5, 0.6, 0.2),
            &p,
            1.0,
            Tolerances::default()
        )
        .is_err());
        assert!(integrate(
            s,
            &Params::new(-1.0, 0.0, p.pattern),
            1.0,
            Tolerances::default()
        )
        .is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = Params::new(0.9, 0.02, MutationPattern::global());
        let traj = integrate(
            SimplexState::new(0.5, 0.3, 0.2),
            &p,
            1.0,
            Tolerances::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,y,z,X,Y"));
        assert_eq!(lines.count(), traj.len());
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }
}
