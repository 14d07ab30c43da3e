//! Hopf and transcritical bifurcation curves in the `(ε, μ)` plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

use crate::dynamics::Params;
use crate::equilibria::{find_fixed_points_seeded, interior_fixed_point, FixedPoint, Location};
use crate::error::{Error, Result};
use crate::mutation::MutationPattern;
use crate::simplex::SimplexState;

/// Upper end of the default `μ` bracket.
pub const MU_MAX: f64 = 1.0;
/// Number of coarse intervals scanned before bisection.
pub const SCAN_INTERVALS: usize = 100;
/// Smallest `ε` at which curves are sampled; the origin is a limit point.
pub const EPS_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Hopf,
    Transcritical,
    SaddleConnection,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Hopf => "hopf",
            CurveKind::Transcritical => "transcritical",
            CurveKind::SaddleConnection => "saddle_connection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Numeric,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCurve {
    pub kind: CurveKind,
    pub method: Method,
    /// `(ε, μ)` pairs ordered by `ε`.
    pub samples: Vec<(f64, f64)>,
}

impl BifurcationCurve {
    /// Piecewise-linear `μ(ε)`, or `None` outside the sampled range.
    pub fn mu_at(&self, epsilon: f64) -> Option<f64> {
        let s = &self.samples;
        if s.is_empty() {
            return None;
        }
        if s.len() == 1 {
            return ((s[0].0 - epsilon).abs() < 1e-12).then_some(s[0].1);
        }
        if epsilon < s[0].0 - 1e-12 || epsilon > s[s.len() - 1].0 + 1e-12 {
            return None;
        }
        let k = s.partition_point(|p| p.0 < epsilon).clamp(1, s.len() - 1);
        let (a, b) = (s[k - 1], s[k]);
        let w = if b.0 > a.0 {
            (epsilon - a.0) / (b.0 - a.0)
        } else {
            0.0
        };
        Some(a.1 + w * (b.1 - a.1))
    }
}

/// Writes `epsilon,mu,kind,method` rows for all curves.
pub fn write_curves_csv<W: Write>(curves: &[BifurcationCurve], mut w: W) -> io::Result<()> {
    writeln!(w, "epsilon,mu,kind,method")?;
    for c in curves {
        for (e, m) in &c.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{},{}",
                e,
                m,
                c.kind.as_str(),
                c.method.as_str()
            )?;
        }
    }
    Ok(())
}

fn require_positive_eps(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("must be positive, got {epsilon}"),
        });
    }
    Ok(())
}

/// Locates a `+ → −` sign change of `g` on `[0, mu_max]` and bisects it to
/// width `tol`. `g` also returns a continuation hint that is fed back in.
fn scan_and_bisect<H: Copy>(
    mu_max: f64,
    tol: f64,
    hint: H,
    mut g: impl FnMut(f64, H) -> Option<(f64, H)>,
) -> Option<(f64, H)> {
    let mut prev: Option<(f64, f64, H)> = None;
    let mut h = hint;
    for k in 0..=SCAN_INTERVALS {
        let mu = mu_max * k as f64 / SCAN_INTERVALS as f64;
        let Some((val, nh)) = g(mu, h) else {
            prev = None;
            continue;
        };
        h = nh;
        if let Some((mu0, v0, h0)) = prev {
            if v0 > 0.0 && val <= 0.0 {
                let (mut lo, mut hi, mut hl) = (mu0, mu, h0);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    match g(mid, hl) {
                        Some((v, nh)) if v > 0.0 => {
                            lo = mid;
                            hl = nh;
                        }
                        Some(_) => hi = mid,
                        // lost the branch: shrink towards the side where it exists
                        None => hi = mid,
                    }
                }
                let root = 0.5 * (lo + hi);
                return Some((root, hl));
            }
        }
        prev = Some((mu, val, h));
    }
    None
}

/// Hopf point of the interior equilibrium by bisection on the largest real
/// part of its eigenvalues, re-solving the equilibrium at every probe.
pub fn hopf_mu_numeric(epsilon: f64, pattern: &MutationPattern, tol: f64) -> Result<f64> {
    hopf_mu_numeric_in(epsilon, pattern, tol, MU_MAX)
}

pub fn hopf_mu_numeric_in(
    epsilon: f64,
    pattern: &MutationPattern,
    tol: f64,
    mu_max: f64,
) -> Result<f64> {
    require_positive_eps(epsilon)?;
    let probe = |mu: f64, near: SimplexState| {
        interior_fixed_point(&Params::new(epsilon, mu, *pattern), &near)
            .map(|fp| (fp.max_real_part(), fp.state))
    };
    let (mu, near) = scan_and_bisect(mu_max, tol, SimplexState::CENTROID, probe).ok_or_else(|| {
        Error::NotFound(format!(
            "no stability change of the interior point for mu in [0, {mu_max}] at epsilon = {epsilon}"
        ))
    })?;
    let fp = interior_fixed_point(&Params::new(epsilon, mu, *pattern), &near)
        .ok_or_else(|| Error::NotFound(format!("interior point lost at mu = {mu}")))?;
    if !fp.is_complex_pair() {
        return Err(Error::DegenerateCrossing { mu });
    }
    Ok(mu)
}

/// Hopf curve of the single-pathway systems (either direction).
pub fn hopf_mu_single(epsilon: f64) -> f64 {
    let e2 = epsilon * (epsilon + 2.0);
    (2.0 * ((e2 * (4.0 * e2 + 9.0) + 9.0).sqrt() - 3.0) - 3.0 * e2) / (7.0 * epsilon)
}

/// Leading terms of the small-`ε` expansion of [`hopf_mu_single`].
pub fn hopf_mu_single_series(epsilon: f64) -> f64 {
    let e = epsilon;
    e / 3.0 - 4.0 * e.powi(3) / 27.0 + 4.0 * e.powi(4) / 27.0 - 4.0 * e.powi(5) / 243.0
}

/// `μ_h = ε / (3s)` for centroid-preserving patterns with `s` pathways; the
/// single-pathway closed form for `x>y` and `y>x`.
pub fn hopf_mu_closed_form(epsilon: f64, pattern: &MutationPattern) -> Result<f64> {
    require_positive_eps(epsilon)?;
    let s = pattern.mutation_count();
    if pattern.is_centroid_preserving() && s > 0 {
        Ok(epsilon / (3.0 * s as f64))
    } else if pattern.is_single_xy() || pattern.is_single_yx() {
        Ok(hopf_mu_single(epsilon))
    } else {
        Err(Error::Unsupported(pattern.to_string()))
    }
}

/// `(ε − √ε + 1) / (√ε + 1)`, evaluated as printed.
///
/// This expression is the transcritical curve of the paper → rock system in
/// the convention where the loser receives `−ε`; see
/// [`transcritical_mu_model`] for the curve in this crate's convention.
pub fn transcritical_mu(epsilon: f64) -> f64 {
    let r = epsilon.sqrt();
    (epsilon - r + 1.0) / (r + 1.0)
}

/// Transcritical curve of the paper → rock system: the boundary point
/// `x = 1/(1 + √(1+ε))` on `z = 0` loses its transverse instability at
/// `μ = (u² − u + 1)/(u + 1)` with `u = √(1+ε)`.
pub fn transcritical_mu_model(epsilon: f64) -> f64 {
    transcritical_mu(epsilon + 1.0)
}

fn edge_points(params: &Params, hint: Option<SimplexState>) -> Vec<FixedPoint> {
    let extra: Vec<[f64; 2]> = hint.iter().map(|s| s.reduced()).collect();
    find_fixed_points_seeded(params, &extra)
        .into_iter()
        .filter(|fp| fp.location.is_edge())
        .collect()
}

/// Transcritical point: smallest `μ ≤ mu_max` at which an equilibrium on
/// one of the three edges turns stable. `None` if no edge equilibrium gains
/// stability in range.
pub fn transcritical_mu_numeric(epsilon: f64, pattern: &MutationPattern, tol: f64) -> Option<f64> {
    transcritical_mu_numeric_in(epsilon, pattern, tol, MU_MAX)
}

pub fn transcritical_mu_numeric_in(
    epsilon: f64,
    pattern: &MutationPattern,
    tol: f64,
    mu_max: f64,
) -> Option<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return None;
    }
    [Location::EdgeXy, Location::EdgeYz, Location::EdgeZx]
        .into_iter()
        .filter_map(|edge| {
            let probe = |mu: f64, hint: Option<SimplexState>| {
                let params = Params::new(epsilon, mu, *pattern);
                edge_points(&params, hint)
                    .into_iter()
                    .filter(|fp| fp.location == edge)
                    .min_by(|a, b| a.max_real_part().total_cmp(&b.max_real_part()))
                    .map(|fp| (fp.max_real_part(), Some(fp.state)))
            };
            scan_and_bisect(mu_max, tol, None, probe).map(|(mu, _)| mu)
        })
        .min_by(f64::total_cmp)
}

/// `n` values of `ε` evenly spaced on `[lo, hi]`, with the lower end
/// lifted to [`EPS_FLOOR`].
pub fn eps_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let lo = lo.max(EPS_FLOOR);
    match n {
        0 => vec![],
        1 => vec![hi.max(lo)],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Hopf curve, closed form where available and numeric otherwise.
pub fn hopf_curve(pattern: &MutationPattern, eps: &[f64], tol: f64) -> BifurcationCurve {
    let closed = eps
        .first()
        .map(|&e| hopf_mu_closed_form(e, pattern).is_ok())
        .unwrap_or(false);
    let samples = eps
        .par_iter()
        .map(|&e| {
            if closed {
                hopf_mu_closed_form(e, pattern).ok().map(|m| (e, m))
            } else {
                hopf_mu_numeric(e, pattern, tol).ok().map(|m| (e, m))
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    BifurcationCurve {
        kind: CurveKind::Hopf,
        method: if closed {
            Method::ClosedForm
        } else {
            Method::Numeric
        },
        samples,
    }
}

pub fn hopf_curve_numeric(pattern: &MutationPattern, eps: &[f64], tol: f64) -> BifurcationCurve {
    let samples = eps
        .par_iter()
        .map(|&e| hopf_mu_numeric(e, pattern, tol).ok().map(|m| (e, m)))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    BifurcationCurve {
        kind: CurveKind::Hopf,
        method: Method::Numeric,
        samples,
    }
}

/// Transcritical curve, or `None` when no sampled `ε` has one. The
/// paper → rock pattern uses the closed form.
pub fn transcritical_curve(
    pattern: &MutationPattern,
    eps: &[f64],
    tol: f64,
) -> Option<BifurcationCurve> {
    let (method, samples): (Method, Vec<(f64, f64)>) = if pattern.is_single_yx() {
        (
            Method::ClosedForm,
            eps.iter()
                .map(|&e| (e, transcritical_mu_model(e)))
                .collect(),
        )
    } else {
        let s = eps
            .par_iter()
            .map(|&e| transcritical_mu_numeric(e, pattern, tol).map(|m| (e, m)))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        (Method::Numeric, s)
    };
    (!samples.is_empty()).then_some(BifurcationCurve {
        kind: CurveKind::Transcritical,
        method,
        samples,
    })
}

/// The `μ = 0` heteroclinic line present for every pattern.
pub fn saddle_connection(eps: &[f64]) -> BifurcationCurve {
    BifurcationCurve {
        kind: CurveKind::SaddleConnection,
        method: Method::ClosedForm,
        samples: eps.iter().map(|&e| (e, 0.0)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::jacobian;
    use crate::mutation::PatternPreset;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-10;

    #[test]
    fn global_and_bidirectional_lines() {
        assert_abs_diff_eq!(
            hopf_mu_numeric(0.9, &MutationPattern::global(), TOL).unwrap(),
            0.05,
            epsilon = 1e-8
        );
        let bi = PatternPreset::DoubleBidirectional.pattern();
        assert_abs_diff_eq!(hopf_mu_numeric(0.6, &bi, TOL).unwrap(), 0.1, epsilon = 1e-8);
    }

    #[test]
    fn single_xy_value() {
        let xy = PatternPreset::SingleXy.pattern();
        let m = hopf_mu_numeric(0.3, &xy, TOL).unwrap();
        assert_abs_diff_eq!(m, hopf_mu_single(0.3), epsilon = 1e-8);
        assert_abs_diff_eq!(m, 0.09710038, epsilon = 1e-8);
        assert!((hopf_mu_single_series(0.3) - m).abs() < 1e-4);
    }

    #[test]
    fn closed_form_table() {
        assert_abs_diff_eq!(
            hopf_mu_closed_form(0.9, &PatternPreset::Table4Three.pattern()).unwrap(),
            0.1,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            hopf_mu_closed_form(0.6, &PatternPreset::Table4Four.pattern()).unwrap(),
            0.05,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            hopf_mu_closed_form(1.8, &MutationPattern::global()).unwrap(),
            0.1,
            epsilon = 1e-15
        );
        assert!(matches!(
            hopf_mu_closed_form(0.5, &PatternPreset::DoubleOpposing.pattern()),
            Err(Error::Unsupported(_))
        ));
        assert!(hopf_mu_closed_form(0.0, &MutationPattern::global()).is_err());
    }

    #[test]
    fn numeric_hopf_errors() {
        assert!(matches!(
            hopf_mu_numeric(0.5, &MutationPattern::none(), TOL),
            Err(Error::NotFound(_))
        ));
        assert!(matches!(
            hopf_mu_numeric(0.0, &MutationPattern::global(), TOL),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn printed_transcritical_formula() {
        assert_abs_diff_eq!(transcritical_mu(1.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(transcritical_mu(0.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn transcritical_numeric_follows_model_curve() {
        let yx = PatternPreset::SingleYx.pattern();
        for e in [0.25, 0.49, 1.0, 1.96] {
            let m = transcritical_mu_numeric(e, &yx, TOL).unwrap();
            assert_abs_diff_eq!(m, transcritical_mu_model(e), epsilon = 1e-8);
        }
        // closed form of the crossing point: u = √(1+ε), x = 1/(1+u)
        let e: f64 = 1.0;
        let u = (1.0 + e).sqrt();
        let x = 1.0 / (1.0 + u);
        assert_abs_diff_eq!(
            transcritical_mu_model(e),
            (e + 1.0) * x - e * x * x,
            epsilon = 1e-14
        );
    }

    #[test]
    fn transcritical_presence_by_pattern() {
        let xy = PatternPreset::SingleXy.pattern();
        for e in [0.2, 1.0, 2.0] {
            assert_eq!(transcritical_mu_numeric(e, &xy, 1e-8), None);
        }
        let opp = PatternPreset::DoubleOpposing.pattern();
        for e in [0.3, 1.0, 1.8] {
            let m = transcritical_mu_numeric(e, &opp, 1e-8).expect("curve exists");
            assert!(m > 0.0 && m < 1.0);
        }
    }

    #[test]
    fn centroid_trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in MutationPattern::enumerate_all()
            .into_iter()
            .filter(|p| p.is_centroid_preserving())
        {
            for _ in 0..20 {
                let e = rng.gen_range(0.0..2.0);
                let m = rng.gen_range(0.0..1.0);
                let j = jacobian(&SimplexState::CENTROID, &Params::new(e, m, p));
                let s = p.mutation_count() as f64;
                assert_abs_diff_eq!(j[0][0] + j[1][1], e / 3.0 - s * m, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn every_centroid_preserving_pattern_obeys_the_general_formula() {
        for p in MutationPattern::enumerate_all()
            .into_iter()
            .filter(|p| p.is_centroid_preserving() && p.mutation_count() > 0)
        {
            for e in [0.1, 0.5, 1.0, 1.8] {
                let s = p.mutation_count() as f64;
                let m = hopf_mu_numeric(e, &p, TOL).unwrap();
                assert!((m - e / (3.0 * s)).abs() <= 1e-6, "{p} eps={e}: {m}");
            }
        }
    }

    #[test]
    fn curve_interpolation() {
        let c = hopf_curve(&MutationPattern::global(), &eps_samples(0.0, 2.0, 5), TOL);
        assert_eq!(c.method, Method::ClosedForm);
        assert_eq!(c.samples[0].0, EPS_FLOOR);
        assert_abs_diff_eq!(c.mu_at(1.0).unwrap(), 1.0 / 18.0, epsilon = 1e-12);
        assert_eq!(c.mu_at(2.5), None);
        let mut buf = Vec::new();
        write_curves_csv(&[c, saddle_connection(&[0.5, 1.0])], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 5 + 2);
        assert!(text.contains(",hopf,closed_form"));
        assert!(text.contains(",saddle_connection,closed_form"));
    }
}
