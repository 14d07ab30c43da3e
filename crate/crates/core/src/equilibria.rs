//! Fixed points, their linearization, and the closed-form equilibria of the
//! single-mutation systems.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{reduced_field, Params};
use crate::error::{Error, Result};
use crate::game::PayoffMatrix;
use crate::simplex::{SimplexState, SIMPLEX_TOL};

/// Eigenvalues with `|Re λ|` below this are treated as marginal.
pub const MARGIN_BAND: f64 = 1e-8;
/// Newton stops once `‖F‖` falls below this.
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 100;
/// Reported fixed points must satisfy `‖F‖ ≤ RESIDUAL_TOL`.
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const DEDUP_RADIUS: f64 = 1e-7;
/// Points per side of the barycentric seed grid.
pub const SEED_GRID: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    Saddle,
    CenterMarginal,
}

impl Stability {
    pub fn is_stable(self) -> bool {
        matches!(self, Stability::StableNode | Stability::StableFocus)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stability::StableNode => "stable_node",
            Stability::StableFocus => "stable_focus",
            Stability::UnstableNode => "unstable_node",
            Stability::UnstableFocus => "unstable_focus",
            Stability::Saddle => "saddle",
            Stability::CenterMarginal => "center_marginal",
        }
    }
}

/// Where on the simplex a point sits. `EdgeXy` is the face `z = 0`, and
/// likewise for the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Interior,
    EdgeXy,
    EdgeYz,
    EdgeZx,
    Vertex,
}

impl Location {
    pub fn of(state: &SimplexState) -> Location {
        let zero = |v: f64| v.abs() <= SIMPLEX_TOL;
        match (zero(state.x), zero(state.y), zero(state.z)) {
            (false, false, false) => Location::Interior,
            (false, false, true) => Location::EdgeXy,
            (true, false, false) => Location::EdgeYz,
            (false, true, false) => Location::EdgeZx,
            _ => Location::Vertex,
        }
    }

    pub fn is_edge(self) -> bool {
        matches!(self, Location::EdgeXy | Location::EdgeYz | Location::EdgeZx)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Location::Interior => "interior",
            Location::EdgeXy => "edge_xy",
            Location::EdgeYz => "edge_yz",
            Location::EdgeZx => "edge_zx",
            Location::Vertex => "vertex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub state: SimplexState,
    pub eigenvalues: [Complex64; 2],
    pub classification: Stability,
    pub location: Location,
    pub residual: f64,
}

impl FixedPoint {
    pub fn at(state: SimplexState, params: &Params) -> FixedPoint {
        let j = jacobian(&state, params);
        let eigenvalues = eigenvalues_2x2(&j);
        let f = reduced_field(state.reduced(), params);
        FixedPoint {
            state,
            eigenvalues,
            classification: classify(&eigenvalues),
            location: Location::of(&state),
            residual: f[0].hypot(f[1]),
        }
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues[0].re.max(self.eigenvalues[1].re)
    }

    pub fn is_complex_pair(&self) -> bool {
        self.eigenvalues[0].im != 0.0
    }
}

/// Analytic Jacobian of the reduced field `(ẋ, ẏ)` w.r.t. `(x, y)`.
pub fn jacobian(state: &SimplexState, params: &Params) -> [[f64; 2]; 2] {
    let a = PayoffMatrix::new(params.epsilon).to_array();
    let m = params.pattern.generator();
    let p = state.as_array();
    let mut f = [0.0; 3];
    let mut ft = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            f[i] += a[i][j] * p[j];
            ft[i] += a[j][i] * p[j];
        }
    }
    let phi: f64 = (0..3).map(|i| p[i] * f[i]).sum();
    // derivative of the ambient 3D field
    let mut d = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            let dphi = f[k] + ft[k];
            d[i][k] = p[i] * (a[i][k] - dphi) + params.mu * m[i][k];
            if i == k {
                d[i][k] += f[i] - phi;
            }
        }
    }
    // chain rule through z = 1 - x - y
    [
        [d[0][0] - d[0][2], d[0][1] - d[0][2]],
        [d[1][0] - d[1][2], d[1][1] - d[1][2]],
    ]
}

/// Central-difference Jacobian of the reduced field.
pub fn jacobian_fd(state: &SimplexState, params: &Params, h: f64) -> [[f64; 2]; 2] {
    let xy = state.reduced();
    let mut j = [[0.0; 2]; 2];
    for col in 0..2 {
        let mut plus = xy;
        let mut minus = xy;
        plus[col] += h;
        minus[col] -= h;
        let fp = reduced_field(plus, params);
        let fm = reduced_field(minus, params);
        for row in 0..2 {
            j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

/// Eigenvalues of a real 2×2 matrix, larger real part first.
pub fn eigenvalues_2x2(j: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        // avoid cancellation in the smaller root
        let big = if half >= 0.0 { half + r } else { half - r };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (hi, lo) = if big >= small {
            (big, small)
        } else {
            (small, big)
        };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let w = (-disc).sqrt();
        [Complex64::new(half, w), Complex64::new(half, -w)]
    }
}

pub fn classify(eig: &[Complex64; 2]) -> Stability {
    let (a, b) = (eig[0], eig[1]);
    if a.im != 0.0 {
        if a.re.abs() < MARGIN_BAND {
            Stability::CenterMarginal
        } else if a.re < 0.0 {
            Stability::StableFocus
        } else {
            Stability::UnstableFocus
        }
    } else if a.re.abs() < MARGIN_BAND || b.re.abs() < MARGIN_BAND {
        Stability::CenterMarginal
    } else if a.re < 0.0 && b.re < 0.0 {
        Stability::StableNode
    } else if a.re > 0.0 && b.re > 0.0 {
        Stability::UnstableNode
    } else {
        Stability::Saddle
    }
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Damped Newton iteration on the reduced field. `None` if it stalls,
/// leaves the neighbourhood of the simplex, or hits a singular Jacobian.
pub fn newton(seed: [f64; 2], params: &Params) -> Option<[f64; 2]> {
    let mut u = seed;
    let mut f = reduced_field(u, params);
    let mut fn0 = norm2(f);
    let mut polish = 0;
    for _ in 0..NEWTON_MAX_ITER {
        if fn0 <= NEWTON_TOL {
            polish += 1;
            if polish > 2 {
                break;
            }
        }
        let j = jacobian(&SimplexState::from_reduced(u[0], u[1]), params);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 || !det.is_finite() {
            break;
        }
        let dx = (j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dy = (-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        let mut lambda = 1.0;
        loop {
            let cand = [u[0] - lambda * dx, u[1] - lambda * dy];
            let fc = reduced_field(cand, params);
            let nc = norm2(fc);
            if nc.is_finite() && (nc <= (1.0 - 1e-4 * lambda) * fn0 || fn0 <= NEWTON_TOL) {
                u = cand;
                f = fc;
                fn0 = nc;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return (fn0 <= RESIDUAL_TOL).then_some(u);
            }
        }
        if u[0].abs() > 3.0 || u[1].abs() > 3.0 {
            return None;
        }
    }
    (fn0 <= RESIDUAL_TOL).then_some(u)
}

/// Seeds on a barycentric grid covering the closed simplex, vertices
/// included.
pub fn seed_grid() -> Vec<[f64; 2]> {
    let n = SEED_GRID - 1;
    let mut seeds = Vec::new();
    for i in 0..=n {
        for j in 0..=(n - i) {
            seeds.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    seeds
}

/// All fixed points in the closed simplex, sorted by `(x, y)`.
pub fn find_fixed_points(params: &Params) -> Vec<FixedPoint> {
    find_fixed_points_seeded(params, &[])
}

/// As [`find_fixed_points`], with extra seeds tried ahead of the grid.
pub fn find_fixed_points_seeded(params: &Params, extra: &[[f64; 2]]) -> Vec<FixedPoint> {
    let mut roots: Vec<[f64; 2]> = extra
        .iter()
        .chain(seed_grid().iter())
        .filter_map(|s| newton(*s, params))
        .filter(|u| SimplexState::from_reduced(u[0], u[1]).min_coord() >= -SIMPLEX_TOL)
        .collect();
    roots.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut unique: Vec<[f64; 2]> = Vec::new();
    for r in roots {
        if !unique
            .iter()
            .any(|u| (u[0] - r[0]).hypot(u[1] - r[1]) <= DEDUP_RADIUS)
        {
            unique.push(r);
        }
    }
    unique
        .into_iter()
        .map(|u| {
            // snap roundoff-level coordinates onto the face they belong to
            let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
            FixedPoint::at(SimplexState::from_reduced(snap(u[0]), snap(u[1])), params)
        })
        .collect()
}

/// Interior fixed point nearest to `near`, if one exists.
pub fn interior_fixed_point(params: &Params, near: &SimplexState) -> Option<FixedPoint> {
    find_fixed_points_seeded(params, &[near.reduced()])
        .into_iter()
        .filter(|fp| fp.location == Location::Interior)
        .min_by(|a, b| a.state.distance(near).total_cmp(&b.state.distance(near)))
}

fn check_rates(epsilon: f64, mu: f64) -> Result<()> {
    for (name, v) in [("epsilon", epsilon), ("mu", mu)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must be finite and non-negative, got {v}"),
            });
        }
    }
    Ok(())
}

/// `ε(ε+3)+3` and the square root `A₁` shared by both single-mutation
/// interior points.
fn a1(epsilon: f64, mu: f64) -> Result<(f64, f64)> {
    let q = epsilon * (epsilon + 3.0) + 3.0;
    let rad = -3.0 * mu * mu * epsilon * epsilon - 6.0 * mu * epsilon * q + q * q;
    if rad < 0.0 {
        return Err(Error::Domain(format!(
            "A1 radicand {rad} < 0 at epsilon = {epsilon}, mu = {mu}"
        )));
    }
    Ok((q, rad.sqrt()))
}

/// Interior equilibrium `(x₃*, y₃*)` for the single pathway rock → paper.
///
/// `x₃*` is evaluated after multiplying through by the conjugate of its
/// numerator, which removes the `0/0` at `ε = 0`; it equals
/// `[(ε+3)A₁ + ε(3μ + ε² + 3με − 6) − 9] / (6ε(ε(ε+3)+3))`.
pub fn interior_fp_single_xy(epsilon: f64, mu: f64) -> Result<(f64, f64)> {
    check_rates(epsilon, mu)?;
    let (q, a1) = a1(epsilon, mu)?;
    let c = 9.0 - epsilon * (3.0 * mu + epsilon * epsilon + 3.0 * mu * epsilon - 6.0);
    let den = (epsilon + 3.0) * a1 + c;
    if den <= 0.0 {
        return Err(Error::Domain(format!(
            "no interior root at epsilon = {epsilon}, mu = {mu}"
        )));
    }
    let x = 2.0 * (1.0 - mu) * (q + epsilon * mu) / den;
    let y = (-6.0 * mu + a1 + epsilon * (-3.0 * mu + epsilon + 3.0) + 3.0) / (6.0 * q);
    Ok((x, y))
}

/// Interior equilibrium `(x₃*, y₃*)` for the single pathway paper → rock,
/// with `y₃*` in the same rationalized form.
pub fn interior_fp_single_yx(epsilon: f64, mu: f64) -> Result<(f64, f64)> {
    check_rates(epsilon, mu)?;
    let (q, a1) = a1(epsilon, mu)?;
    let d = epsilon * (-3.0 * mu + epsilon * (4.0 * epsilon + 15.0) + 21.0) + 9.0;
    let den = d + (2.0 * epsilon + 3.0) * a1;
    if den <= 0.0 {
        return Err(Error::Domain(format!(
            "no interior root at epsilon = {epsilon}, mu = {mu}"
        )));
    }
    let x = (6.0 * mu + a1 + epsilon * (3.0 * mu + epsilon + 3.0) + 3.0) / (6.0 * q);
    let y = 2.0 * (epsilon + mu + 1.0) * (q + epsilon * mu) / den;
    Ok((x, y))
}

/// Rock–paper equilibrium on the face `z = 0` for paper → rock mutation:
/// the root of `εx² − (ε+1)x + μ = 0` lying in `[0, 1]`, with `y = 1 − x`.
///
/// On that face the dynamics reduce to `ẋ = (1 − x)(εx² − (ε+1)x + μ)`,
/// so the admissible root is the smaller one, evaluated in product form.
pub fn boundary_fp_single_yx(epsilon: f64, mu: f64) -> Result<(f64, f64)> {
    check_rates(epsilon, mu)?;
    let disc = (epsilon + 1.0).powi(2) - 4.0 * mu * epsilon;
    if disc < 0.0 {
        return Err(Error::Existence(format!(
            "no real root on z = 0 at epsilon = {epsilon}, mu = {mu}"
        )));
    }
    let x = 2.0 * mu / ((epsilon + 1.0) + disc.sqrt());
    // at mu = 1 the root is the vertex itself, up to rounding
    let x = if x > 1.0 && x - 1.0 <= 4.0 * f64::EPSILON {
        1.0
    } else {
        x
    };
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Existence(format!(
            "root x = {x} outside [0, 1] at epsilon = {epsilon}, mu = {mu}"
        )));
    }
    Ok((x, 1.0 - x))
}

/// Closed-form cross-check attached to equilibrium reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCheck {
    pub name: String,
    pub x: f64,
    pub y: f64,
    /// Distance to the nearest Newton root, if any was found.
    pub newton_distance: Option<f64>,
}

/// Closed-form equilibria available for `params`, compared against the
/// Newton roots.
pub fn closed_form_checks(params: &Params, roots: &[FixedPoint]) -> Vec<ClosedFormCheck> {
    let (e, m) = (params.epsilon, params.mu);
    let mut found = Vec::new();
    if params.pattern.is_single_xy() {
        if let Ok((x, y)) = interior_fp_single_xy(e, m) {
            found.push(("interior_single_xy", x, y));
        }
    }
    if params.pattern.is_single_yx() {
        if let Ok((x, y)) = interior_fp_single_yx(e, m) {
            found.push(("interior_single_yx", x, y));
        }
        if let Ok((x, y)) = boundary_fp_single_yx(e, m) {
            found.push(("boundary_single_yx", x, y));
        }
    }
    if params.pattern.is_centroid_preserving() {
        found.push(("centroid", 1.0 / 3.0, 1.0 / 3.0));
    }
    found
        .into_iter()
        .map(|(name, x, y)| {
            let target = SimplexState::from_reduced(x, y);
            let newton_distance = roots
                .iter()
                .map(|r| r.state.distance(&target))
                .min_by(f64::total_cmp);
            ClosedFormCheck {
                name: name.to_string(),
                x,
                y,
                newton_distance,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub re: f64,
    pub im: f64,
}

/// Serializable form of a fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub eigenvalues: Vec<EigenvalueRecord>,
    pub class: Stability,
    pub location: Location,
}

impl From<&FixedPoint> for FixedPointRecord {
    fn from(fp: &FixedPoint) -> Self {
        FixedPointRecord {
            x: fp.state.x,
            y: fp.state.y,
            z: fp.state.z,
            eigenvalues: fp
                .eigenvalues
                .iter()
                .map(|c| EigenvalueRecord { re: c.re, im: c.im })
                .collect(),
            class: fp.classification,
            location: fp.location,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub epsilon: f64,
    pub mu: f64,
    pub pattern: String,
    pub fixed_points: Vec<FixedPointRecord>,
    pub closed_form: Vec<ClosedFormCheck>,
}

impl EquilibriumReport {
    pub fn build(params: &Params) -> Self {
        let fps = find_fixed_points(params);
        EquilibriumReport {
            epsilon: params.epsilon,
            mu: params.mu,
            pattern: params.pattern.to_string(),
            closed_form: closed_form_checks(params, &fps),
            fixed_points: fps.iter().map(FixedPointRecord::from).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}
