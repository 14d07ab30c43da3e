//! Long-run behaviour at a parameter point, and stability diagrams over
//! `(ε, μ)` grids.
//!
//! A run is integrated past a transient and then watched on a Poincaré
//! section: the horizontal line `y = y*` through the interior equilibrium,
//! crossed upwards on the side `x > x*`. The flow of this system circulates
//! around the interior point, so every orbit that neither settles nor
//! escapes to the boundary returns to that half-line.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::{self, Write};

use crate::bifurcation::{
    eps_samples, hopf_curve, saddle_connection, transcritical_curve, BifurcationCurve, CurveKind,
};
use crate::dynamics::{validate_start, validate_tolerances, Params, ReducedSystem};
use crate::equilibria::{find_fixed_points, FixedPoint, FixedPointRecord, Location, MARGIN_BAND};
use crate::error::{Error, Result};
use crate::integrator::{dopri_step, OdeSystem, StepRecord, Stepper, Tolerances};
use crate::mutation::MutationPattern;
use crate::simplex::SimplexState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorKind {
    InteriorFixedPoint,
    LimitCycle,
    BoundaryFixedPoint,
    HeteroclinicLike,
    Undetermined,
}

impl AttractorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttractorKind::InteriorFixedPoint => "interior_fixed_point",
            AttractorKind::LimitCycle => "limit_cycle",
            AttractorKind::BoundaryFixedPoint => "boundary_fixed_point",
            AttractorKind::HeteroclinicLike => "heteroclinic_like",
            AttractorKind::Undetermined => "undetermined",
        }
    }
}

/// Knobs of [`classify_long_run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Time discarded before the first observation window.
    pub t_transient: f64,
    /// End of the first observation window.
    pub t_end: f64,
    /// How many times the transient may be doubled when nothing settles.
    pub max_doublings: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Convergence radius around a stable equilibrium.
    pub fp_radius: f64,
    /// Agreement required between consecutive section returns.
    pub return_tol: f64,
    pub min_returns: usize,
    pub min_amplitude: f64,
    /// Minimum coordinate below which an orbit counts as touching the boundary.
    pub boundary_threshold: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            t_transient: 1000.0,
            t_end: 2000.0,
            max_doublings: 2,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            fp_radius: 1e-6,
            return_tol: 1e-6,
            min_returns: 3,
            min_amplitude: 1e-4,
            boundary_threshold: 1e-6,
        }
    }
}

impl ClassifyConfig {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel: self.rel_tol,
            abs: self.abs_tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_tolerances(&self.tolerances())?;
        if !(self.t_transient >= 0.0 && self.t_end > self.t_transient && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!(
                    "need 0 <= t_transient < t_end, got {} and {}",
                    self.t_transient, self.t_end
                ),
            });
        }
        if self.min_returns == 0 {
            return Err(Error::InvalidParameter {
                name: "min_returns",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Default interior starting point.
pub const DEFAULT_START: SimplexState = SimplexState {
    x: 0.45,
    y: 0.35,
    z: 0.20,
};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Transient actually used before the final window.
    pub transient_time: f64,
    pub total_time: f64,
    /// `|r_{k+1} − r_k|` for the section returns of the final window.
    pub return_residuals: Vec<f64>,
    pub min_coordinate: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub kind: AttractorKind,
    pub fixed_point: Option<FixedPointRecord>,
    pub period: Option<f64>,
    /// `max x − min x` over the last full lap.
    pub amplitude: Option<f64>,
    /// Time average of the state over the last full lap.
    pub mean_position: Option<SimplexState>,
    pub final_state: SimplexState,
    pub diagnostics: Diagnostics,
}

/// Section crossing and per-lap statistics collected while integrating.
#[derive(Debug, Clone)]
struct Lap {
    start: f64,
    min_coord: f64,
    x_min: f64,
    x_max: f64,
    integral: [f64; 3],
}

impl Lap {
    fn new(t: f64, s: &SimplexState) -> Self {
        Self {
            start: t,
            min_coord: s.min_coord(),
            x_min: s.x,
            x_max: s.x,
            integral: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone)]
struct Crossing {
    t: f64,
    x: f64,
    lap: Lap,
}

struct Watcher<'a> {
    sys: &'a ReducedSystem,
    anchor: [f64; 2],
    lap: Lap,
    crossings: Vec<Crossing>,
    /// Minimum coordinate of every completed lap since the start.
    lap_minima: Vec<f64>,
    min_coord: f64,
}

/// Extremes of the cubic Hermite interpolant of one coordinate on a step.
fn hermite_extremes(h: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (y0.min(y1), y0.max(y1));
    // p(s) = h00 y0 + h10 h d0 + h01 y1 + h11 h d1, s in [0, 1]
    let m0 = h * d0;
    let m1 = h * d1;
    let a = 6.0 * y0 + 3.0 * m0 - 6.0 * y1 + 3.0 * m1;
    let b = -6.0 * y0 - 4.0 * m0 + 6.0 * y1 - 2.0 * m1;
    let c = m0;
    let eval = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    };
    let mut roots = Vec::with_capacity(2);
    if a.abs() > 1e-300 {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let r = disc.sqrt();
            roots.push((-b + r) / (2.0 * a));
            roots.push((-b - r) / (2.0 * a));
        }
    } else if b.abs() > 1e-300 {
        roots.push(-c / b);
    }
    for s in roots {
        if s > 0.0 && s < 1.0 {
            let v = eval(s);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

impl<'a> Watcher<'a> {
    fn new(sys: &'a ReducedSystem, anchor: [f64; 2], t: f64, y: &[f64; 2]) -> Self {
        let s = SimplexState::from_reduced(y[0], y[1]);
        Self {
            sys,
            anchor,
            lap: Lap::new(t, &s),
            crossings: Vec::new(),
            lap_minima: Vec::new(),
            min_coord: s.min_coord(),
        }
    }

    fn clear(&mut self) {
        self.crossings.clear();
        self.min_coord = f64::INFINITY;
    }

    /// Time `h` after `rec.t0` at which `y` reaches the section, refined by
    /// re-stepping from the start of the step.
    fn refine(&self, rec: &StepRecord<2>) -> (f64, [f64; 2]) {
        let ys = self.anchor[1];
        let (mut lo, mut hi) = (0.0, rec.t1 - rec.t0);
        let (mut glo, mut ghi) = (rec.y0[1] - ys, rec.y1[1] - ys);
        let mut best = (hi, rec.y1);
        for _ in 0..60 {
            // regula falsi with Illinois weighting
            let h = if ghi != glo {
                lo - glo * (hi - lo) / (ghi - glo)
            } else {
                0.5 * (lo + hi)
            };
            let h = if h > lo && h < hi { h } else { 0.5 * (lo + hi) };
            let (y, _, _) = dopri_step(self.sys, rec.t0, &rec.y0, &rec.f0, h);
            let g = y[1] - ys;
            best = (h, y);
            if g.abs() < 1e-15 || hi - lo < 1e-13 {
                break;
            }
            if (g < 0.0) == (glo < 0.0) {
                lo = h;
                glo = g;
                ghi *= 0.5;
            } else {
                hi = h;
                ghi = g;
                glo *= 0.5;
            }
        }
        best
    }

    fn observe(&mut self, rec: &StepRecord<2>) {
        let s1 = SimplexState::from_reduced(rec.y1[0], rec.y1[1]);
        let h = rec.t1 - rec.t0;
        let ys = self.anchor[1];
        let crossed = rec.y0[1] < ys && rec.y1[1] >= ys;
        let (tc, yc, split) = if crossed {
            let (hc, yc) = self.refine(rec);
            (rec.t0 + hc, yc, hc / h)
        } else {
            (rec.t1, rec.y1, 1.0)
        };

        // accumulate the part of the step that belongs to the current lap
        self.accumulate(rec, 0.0, split);
        if crossed && yc[0] > self.anchor[0] {
            let sc = SimplexState::from_reduced(yc[0], yc[1]);
            let done = std::mem::replace(&mut self.lap, Lap::new(tc, &sc));
            self.lap_minima.push(done.min_coord);
            self.crossings.push(Crossing {
                t: tc,
                x: yc[0],
                lap: done,
            });
            self.accumulate(rec, split, 1.0);
        } else if crossed {
            self.accumulate(rec, split, 1.0);
        }
        self.min_coord = self.min_coord.min(s1.min_coord());
    }

    /// Adds the sub-interval `[a, b]` (fractions of the step) to the lap.
    fn accumulate(&mut self, rec: &StepRecord<2>, a: f64, b: f64) {
        if b <= a {
            return;
        }
        let h = rec.t1 - rec.t0;
        let (x_lo, x_hi) = hermite_extremes(h, rec.y0[0], rec.y1[0], rec.f0[0], rec.f1[0]);
        let s0 = SimplexState::from_reduced(rec.y0[0], rec.y0[1]);
        let s1 = SimplexState::from_reduced(rec.y1[0], rec.y1[1]);
        self.lap.x_min = self.lap.x_min.min(x_lo);
        self.lap.x_max = self.lap.x_max.max(x_hi);
        self.lap.min_coord = self.lap.min_coord.min(s0.min_coord()).min(s1.min_coord());
        // trapezoid on the linear interpolant of the sub-interval
        let lerp = |w: f64| {
            let p = s0.as_array();
            let q = s1.as_array();
            [0, 1, 2].map(|i| p[i] + w * (q[i] - p[i]))
        };
        let (pa, pb) = (lerp(a), lerp(b));
        for i in 0..3 {
            self.lap.integral[i] += 0.5 * (pa[i] + pb[i]) * (b - a) * h;
        }
    }
}

fn nearest_stable<'a>(
    fps: &'a [FixedPoint],
    state: &SimplexState,
) -> Option<(&'a FixedPoint, f64)> {
    fps.iter()
        .filter(|fp| fp.classification.is_stable())
        .map(|fp| (fp, fp.state.distance(state)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Distance at the end of a window below which a steady, non-rotating
/// approach counts as convergence.
pub const APPROACH_RADIUS: f64 = 1e-2;

fn location_kind(location: Location) -> AttractorKind {
    if location == Location::Interior {
        AttractorKind::InteriorFixedPoint
    } else {
        AttractorKind::BoundaryFixedPoint
    }
}

/// Recognises convergence that is too slow to reach the fixed-point radius,
/// e.g. near a transcritical point where the leading eigenvalue vanishes.
/// The orbit must not wind around the interior point and its distance to a
/// non-repelling equilibrium must shrink at every step of the window.
fn monotone_approach<'a>(
    fps: &'a [FixedPoint],
    path: &[SimplexState],
    crossings: usize,
) -> Option<(&'a FixedPoint, f64)> {
    if crossings >= 2 || path.len() < 3 {
        return None;
    }
    let last = path.last()?;
    let fp = fps
        .iter()
        .filter(|fp| fp.max_real_part() <= MARGIN_BAND)
        .min_by(|a, b| a.state.distance(last).total_cmp(&b.state.distance(last)))?;
    let d: Vec<f64> = path.iter().map(|s| s.distance(&fp.state)).collect();
    let (d0, d1) = (d[0], d[d.len() - 1]);
    let shrinking = d.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    (d1 < 0.9 * d0 && shrinking).then_some((fp, d1))
}

/// Classifies where the orbit from `start` ends up.
pub fn classify_long_run(
    params: &Params,
    start: SimplexState,
    cfg: &ClassifyConfig,
) -> Result<AttractorReport> {
    params.validate()?;
    cfg.validate()?;
    validate_start(&start)?;

    let fps = find_fixed_points(params);
    let anchor = fps
        .iter()
        .filter(|fp| fp.location == Location::Interior)
        .min_by(|a, b| {
            a.state
                .distance(&SimplexState::CENTROID)
                .total_cmp(&b.state.distance(&SimplexState::CENTROID))
        })
        .map(|fp| fp.state)
        .unwrap_or(SimplexState::CENTROID);

    let sys = ReducedSystem { params: *params };
    let mut y0 = start.reduced();
    sys.project(&mut y0);
    let mut stepper = Stepper::new(&sys, 0.0, y0, cfg.tolerances());
    let mut watcher = Watcher::new(&sys, anchor.reduced(), 0.0, &y0);
    let window = cfg.t_end - cfg.t_transient;

    let mut transient = cfg.t_transient;
    let mut attempt = 0;
    loop {
        stepper.advance_to(transient, |r| watcher.observe(r))?;
        let window_start_state = {
            let y = stepper.y();
            SimplexState::from_reduced(y[0], y[1])
        };
        watcher.clear();
        let mut path = vec![window_start_state];
        stepper.advance_to(transient + window, |r| {
            path.push(SimplexState::from_reduced(r.y1[0], r.y1[1]));
            watcher.observe(r)
        })?;

        let y = stepper.y();
        let final_state = SimplexState::from_reduced(y[0], y[1]);
        let mut diagnostics = Diagnostics {
            transient_time: transient,
            total_time: stepper.t(),
            return_residuals: watcher
                .crossings
                .windows(2)
                .map(|w| (w[1].x - w[0].x).abs())
                .collect(),
            min_coordinate: watcher.min_coord,
            accepted_steps: stepper.stats.accepted,
            rejected_steps: stepper.stats.rejected,
        };

        // (a) settled on a stable equilibrium
        let nearest = nearest_stable(&fps, &final_state);
        if let Some((fp, d)) = nearest {
            if d < cfg.fp_radius {
                return Ok(AttractorReport {
                    kind: location_kind(fp.location),
                    fixed_point: Some(FixedPointRecord::from(fp)),
                    period: None,
                    amplitude: None,
                    mean_position: None,
                    final_state,
                    diagnostics,
                });
            }
        }

        // (a') slow monotone approach to a non-repelling equilibrium
        let approach = monotone_approach(&fps, &path, watcher.crossings.len());
        if let Some((fp, _)) = approach.filter(|&(_, d)| d < APPROACH_RADIUS) {
            return Ok(AttractorReport {
                kind: location_kind(fp.location),
                fixed_point: Some(FixedPointRecord::from(fp)),
                period: None,
                amplitude: None,
                mean_position: None,
                final_state,
                diagnostics,
            });
        }

        // (b) excursions creep towards the boundary
        let overall_min = watcher.min_coord.min(window_start_state.min_coord());
        let approaching_stable =
            approach.is_some() || nearest.map(|(_, d)| d < 1e-2).unwrap_or(false);
        if overall_min < cfg.boundary_threshold && !approaching_stable {
            let minima = &watcher.lap_minima;
            let stalled = watcher.crossings.len() < 2;
            let clamped = overall_min <= 0.0;
            let growing = minima.len() >= 3
                && minima[minima.len() - 3..]
                    .windows(2)
                    .all(|w| w[1] < 0.5 * w[0] || w[1] <= 0.0);
            if stalled || clamped || growing {
                return Ok(AttractorReport {
                    kind: AttractorKind::HeteroclinicLike,
                    fixed_point: None,
                    period: None,
                    amplitude: None,
                    mean_position: None,
                    final_state,
                    diagnostics,
                });
            }
        }

        // (c) section returns have settled on a cycle
        let cr = &watcher.crossings;
        let res = &diagnostics.return_residuals;
        if cr.len() > cfg.min_returns {
            let tail = &res[res.len() - cfg.min_returns..];
            let last = &cr[cr.len() - 1].lap;
            let amplitude = last.x_max - last.x_min;
            let worst = tail.iter().cloned().fold(0.0, f64::max);
            if worst <= cfg.return_tol
                && amplitude >= cfg.min_amplitude
                && worst <= 1e-3 * amplitude
            {
                let n = cfg.min_returns;
                let span = cr[cr.len() - 1].t - cr[cr.len() - 1 - n].t;
                let lap_time = cr[cr.len() - 1].t - last.start;
                let mean = SimplexState::from_array(last.integral.map(|v| v / lap_time));
                diagnostics.return_residuals = tail.to_vec();
                return Ok(AttractorReport {
                    kind: AttractorKind::LimitCycle,
                    fixed_point: None,
                    period: Some(span / n as f64),
                    amplitude: Some(amplitude),
                    mean_position: Some(mean),
                    final_state,
                    diagnostics,
                });
            }
        }

        if attempt >= cfg.max_doublings {
            return Ok(AttractorReport {
                kind: AttractorKind::Undetermined,
                fixed_point: None,
                period: None,
                amplitude: None,
                mean_position: None,
                final_state,
                diagnostics,
            });
        }
        attempt += 1;
        transient *= 2.0;
    }
}

/// Grid and classification settings for [`stability_diagram`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub eps_range: (f64, f64),
    pub mu_range: (f64, f64),
    pub n_eps: usize,
    pub n_mu: usize,
    pub start: SimplexState,
    pub classify: ClassifyConfig,
    /// Bracket width for numerically traced overlay curves.
    pub curve_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps_range: (0.0, 2.0),
            mu_range: (0.0, 1.0),
            n_eps: 40,
            n_mu: 40,
            start: DEFAULT_START,
            classify: ClassifyConfig::default(),
            curve_tol: 1e-8,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_eps < 2 || self.n_mu < 2 {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("need at least 2x2 cells, got {}x{}", self.n_eps, self.n_mu),
            });
        }
        let ok = |r: (f64, f64), hi: f64| r.0 >= 0.0 && r.1 > r.0 && r.1 <= hi;
        if !ok(self.eps_range, 2.0) {
            return Err(Error::InvalidParameter {
                name: "eps_range",
                reason: format!("must satisfy 0 <= lo < hi <= 2, got {:?}", self.eps_range),
            });
        }
        if !ok(self.mu_range, 1.0) {
            return Err(Error::InvalidParameter {
                name: "mu_range",
                reason: format!("must satisfy 0 <= lo < hi <= 1, got {:?}", self.mu_range),
            });
        }
        self.classify.validate()?;
        validate_start(&self.start)
    }

    pub fn eps_axis(&self) -> Vec<f64> {
        linspace(self.eps_range, self.n_eps)
    }

    pub fn mu_axis(&self) -> Vec<f64> {
        linspace(self.mu_range, self.n_mu)
    }
}

fn linspace(r: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| r.0 + (r.1 - r.0) * k as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityDiagram {
    pub pattern: String,
    pub epsilon_axis: Vec<f64>,
    pub mu_axis: Vec<f64>,
    /// `cells[i][j]` is the attractor at `(epsilon_axis[i], mu_axis[j])`.
    pub cells: Vec<Vec<AttractorKind>>,
    pub overlay_curves: Vec<BifurcationCurve>,
}

fn curve_mu(curve: &BifurcationCurve, epsilon: f64) -> Option<f64> {
    let (first, last) = (curve.samples.first()?.0, curve.samples.last()?.0);
    curve.mu_at(epsilon.clamp(first, last))
}

impl StabilityDiagram {
    pub fn curve(&self, kind: CurveKind) -> Option<&BifurcationCurve> {
        self.overlay_curves.iter().find(|c| c.kind == kind)
    }

    /// Attractor the overlaid curves predict at a grid point.
    pub fn expected_kind(&self, epsilon: f64, mu: f64) -> AttractorKind {
        if mu <= 0.0 {
            return AttractorKind::HeteroclinicLike;
        }
        if let Some(t) = self
            .curve(CurveKind::Transcritical)
            .and_then(|c| curve_mu(c, epsilon))
        {
            if mu > t {
                return AttractorKind::BoundaryFixedPoint;
            }
        }
        match self
            .curve(CurveKind::Hopf)
            .and_then(|c| curve_mu(c, epsilon))
        {
            Some(h) if mu < h => AttractorKind::LimitCycle,
            _ => AttractorKind::InteriorFixedPoint,
        }
    }

    /// Whether cell `(i, j)` lies within one cell of a curve, i.e. some
    /// neighbour (diagonals included) is predicted to be in another region.
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        let here = self.expected_kind(self.epsilon_axis[i], self.mu_axis[j]);
        let ni = self.epsilon_axis.len() as isize;
        let nj = self.mu_axis.len() as isize;
        for di in -1..=1isize {
            for dj in -1..=1isize {
                let (a, b) = (i as isize + di, j as isize + dj);
                if a < 0 || b < 0 || a >= ni || b >= nj {
                    continue;
                }
                let k = self.expected_kind(self.epsilon_axis[a as usize], self.mu_axis[b as usize]);
                if k != here {
                    return true;
                }
            }
        }
        false
    }

    /// Cells outside the curve band whose kind disagrees with the curves.
    pub fn inconsistent_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, &e) in self.epsilon_axis.iter().enumerate() {
            for (j, &m) in self.mu_axis.iter().enumerate() {
                if !self.in_band(i, j) && self.cells[i][j] != self.expected_kind(e, m) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Distinct attractor kinds off the `μ = 0` saddle-connection line.
    pub fn regions(&self) -> BTreeSet<AttractorKind> {
        let mut set = BTreeSet::new();
        for row in &self.cells {
            for (j, k) in row.iter().enumerate() {
                if self.mu_axis[j] > 0.0 && *k != AttractorKind::Undetermined {
                    set.insert(*k);
                }
            }
        }
        set
    }

    pub fn region_count(&self) -> usize {
        self.regions().len()
    }

    pub fn count(&self, kind: AttractorKind) -> usize {
        self.cells.iter().flatten().filter(|k| **k == kind).count()
    }

    /// Writes `epsilon,mu,kind` rows, `ε` outermost.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "epsilon,mu,kind")?;
        for (i, e) in self.epsilon_axis.iter().enumerate() {
            for (j, m) in self.mu_axis.iter().enumerate() {
                writeln!(w, "{:.16e},{:.16e},{}", e, m, self.cells[i][j].as_str())?;
            }
        }
        Ok(())
    }
}

/// Overlay curves for a pattern sampled at `eps`.
pub fn overlay_curves(pattern: &MutationPattern, eps: &[f64], tol: f64) -> Vec<BifurcationCurve> {
    let eps = eps_samples(
        eps.first().copied().unwrap_or(0.0),
        eps.last().copied().unwrap_or(0.0),
        eps.len(),
    );
    let mut curves = vec![hopf_curve(pattern, &eps, tol)];
    if let Some(t) = transcritical_curve(pattern, &eps, tol) {
        curves.push(t);
    }
    curves.push(saddle_connection(&eps));
    curves
}

/// Classifies every grid cell (in parallel) and overlays the bifurcation
/// curves. A failing cell is recorded as undetermined.
pub fn stability_diagram(pattern: &MutationPattern, cfg: &SweepConfig) -> Result<StabilityDiagram> {
    cfg.validate()?;
    let eps = cfg.eps_axis();
    let mus = cfg.mu_axis();
    let n_mu = mus.len();
    let flat: Vec<AttractorKind> = (0..eps.len() * n_mu)
        .into_par_iter()
        .map(|k| {
            let params = Params::new(eps[k / n_mu], mus[k % n_mu], *pattern);
            classify_long_run(&params, cfg.start, &cfg.classify)
                .map(|r| r.kind)
                .unwrap_or(AttractorKind::Undetermined)
        })
        .collect();
    let cells = flat.chunks(n_mu).map(|c| c.to_vec()).collect();
    Ok(StabilityDiagram {
        pattern: pattern.to_string(),
        overlay_curves: overlay_curves(pattern, &eps, cfg.curve_tol),
        epsilon_axis: eps,
        mu_axis: mus,
        cells,
    })
}
