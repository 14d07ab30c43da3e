//! Dormand–Prince 5(4) embedded Runge–Kutta pair with PI step-size control.

use crate::error::{Error, Result};

/// Autonomous or time-dependent system `y' = f(t, y)` with an optional
/// projection applied after every accepted step.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];

    /// Maps a freshly accepted state back onto the admissible set.
    /// Returns `true` if `y` was modified.
    fn project(&self, _y: &mut [f64; N]) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-9,
            abs: 1e-12,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th minus embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand–Prince step of size `h` from `(t, y)` with `k1 = f(t, y)`.
/// Returns the 5th-order solution, its derivative (FSAL) and the local
/// error estimate.
pub fn dopri_step<const N: usize, S: OdeSystem<N> + ?Sized>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N]) {
    let k2 = sys.rhs(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = sys.rhs(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = sys.rhs(
        t + C4 * h,
        &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    );
    let k5 = sys.rhs(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = sys.rhs(
        t + h,
        &axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let y_new = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = sys.rhs(t + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, k7, err)
}

/// A step the integrator accepted, with both endpoints.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Adaptive stepper. Owns the current point and the PI controller state.
pub struct Stepper<'a, const N: usize, S: OdeSystem<N> + ?Sized> {
    sys: &'a S,
    tol: Tolerances,
    t: f64,
    y: [f64; N],
    f: [f64; N],
    h: f64,
    err_old: f64,
    max_step: f64,
    pub stats: StepStats,
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

impl<'a, const N: usize, S: OdeSystem<N> + ?Sized> Stepper<'a, N, S> {
    pub fn new(sys: &'a S, t0: f64, y0: [f64; N], tol: Tolerances) -> Self {
        let f = sys.rhs(t0, &y0);
        let mut s = Self {
            sys,
            tol,
            t: t0,
            y: y0,
            f,
            h: 0.0,
            err_old: 1e-4,
            max_step: f64::INFINITY,
            stats: StepStats::default(),
        };
        s.h = s.initial_step();
        s
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self.h = self.h.min(h);
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn f(&self) -> &[f64; N] {
        &self.f
    }

    fn norm(&self, v: &[f64; N], scale_from: &[f64; N]) -> f64 {
        let s: f64 = v
            .iter()
            .zip(scale_from)
            .map(|(e, y)| {
                let sc = self.tol.abs + self.tol.rel * y.abs();
                (e / sc).powi(2)
            })
            .sum();
        (s / N as f64).sqrt()
    }

    fn initial_step(&self) -> f64 {
        let d0 = self.norm(&self.y, &self.y);
        let d1 = self.norm(&self.f, &self.y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1 = axpy(&self.y, h0, &[(1.0, &self.f)]);
        let f1 = self.sys.rhs(self.t + h0, &y1);
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - self.f[i];
        }
        let d2 = self.norm(&diff, &self.y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step)
    }

    /// Takes one accepted step that does not pass `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<StepRecord<N>> {
        let t0 = self.t;
        let y0 = self.y;
        let f0 = self.f;
        loop {
            let remaining = t_limit - self.t;
            let mut h = self.h.min(self.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
            let (y_new, f_new, err) = dopri_step(self.sys, self.t, &self.y, &self.f, h);
            let mut big = [0.0; N];
            for i in 0..N {
                big[i] = self.y[i].abs().max(y_new[i].abs());
            }
            let err_norm = self.norm(&err, &big);
            if !err_norm.is_finite() {
                self.stats.rejected += 1;
                self.h = h * FAC_MIN;
                continue;
            }
            let fac11 = err_norm.powf(0.2 - BETA * 0.75);
            if err_norm <= 1.0 {
                let fac =
                    (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.err_old = err_norm.max(1e-4);
                self.stats.accepted += 1;
                self.t = if last { t_limit } else { self.t + h };
                self.y = y_new;
                self.f = f_new;
                if self.sys.project(&mut self.y) {
                    self.f = self.sys.rhs(self.t, &self.y);
                }
                if self.y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteState { t: self.t });
                }
                // Keep the controller's proposal even after a clipped final step.
                let proposal = h / fac;
                self.h = if last { self.h.max(proposal) } else { proposal };
                return Ok(StepRecord {
                    t0,
                    y0,
                    f0,
                    t1: self.t,
                    y1: self.y,
                    f1: self.f,
                });
            }
            self.stats.rejected += 1;
            self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }

    /// Integrates to exactly `t_end`, calling `observe` after each step.
    pub fn advance_to(
        &mut self,
        t_end: f64,
        mut observe: impl FnMut(&StepRecord<N>),
    ) -> Result<()> {
        while self.t < t_end {
            let rec = self.step(t_end)?;
            observe(&rec);
        }
        Ok(())
    }
}
