//! Shadow points for finite-jump pseudo-orbits and their certificates.
//!
//! [`inductive_shadow`] removes jumps one at a time by gluing one-jump
//! shadows. [`direct_shadow_shift`] and [`direct_shadow_toral`] build the
//! shadow in closed form and serve as independent oracles. Every result is
//! wrapped in a [`ShadowCertificate`], which [`verify_certificate`] checks
//! from scratch.

mod direct;
mod inductive;

use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::certify::{certify_tail_equal_orbit, covering_window, CertifiedConstants, TailCheck};
use crate::error::{Result, ShadowError};
use crate::orbit::{distance_profile, PseudoOrbit, Window};
use crate::quadratic::Distance;
use crate::systems::{DynamicalSystem, PointToken, ShiftSystem, Side, ToralSystem};

pub use direct::{direct_shadow_shift, direct_shadow_toral};
pub use inductive::inductive_shadow;

/// Conditions of the gluing argument, each re-checked when used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// A one-jump `δ`-pseudo-orbit is `α`-shadowed by the one-jump oracle.
    OneJump,
    /// A `δ`-pseudo-orbit `α`-shadowed by an orbit is in fact `α/2`-shadowed.
    Sharpen,
    /// Two orbits `α`-close on `[0, 2N]` are `δ`-close at `N`.
    UniformExpansivity,
    /// A `(2N+2)`-segment of a `ρ`-pseudo-orbit is `δ`-shadowed by its first point.
    Segment,
    /// The glued point `α`-shadows the step's target.
    Composite,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::OneJump => "one-jump",
            Condition::Sharpen => "sharpen",
            Condition::UniformExpansivity => "uniform-expansivity",
            Condition::Segment => "segment",
            Condition::Composite => "composite",
        }
    }
}

/// One re-verified inequality `measured < bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub condition: Condition,
    /// `None` when a tail could not be bounded.
    pub measured: Option<Distance>,
    pub bound: Distance,
    pub passed: bool,
}

impl Check {
    pub fn strict(condition: Condition, measured: Option<Distance>, bound: Distance) -> Self {
        let passed = measured.as_ref().is_some_and(|m| *m < bound);
        Check { condition, measured, bound, passed }
    }

    /// Converts a failed check into an error.
    pub fn require(self, depth: usize) -> Result<Self> {
        if self.passed {
            return Ok(self);
        }
        Err(ShadowError::ConstantsViolation {
            condition: self.condition.as_str().into(),
            depth,
            detail: format!(
                "measured {} against bound {}",
                self.measured.as_ref().map_or("unbounded".to_string(), |m| m.to_string()),
                self.bound
            ),
        })
    }
}

/// The pseudo-orbits built at one gluing step, in reindexed coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Intermediates<P> {
    /// Target with the segment `[0, 2N]` replaced by the orbit of `x_0`.
    pub xi_prime: PseudoOrbit<P>,
    /// Past of the target followed by the forward orbit of `x_0`.
    pub eta: PseudoOrbit<P>,
    /// Orbit of `x_0` up to `2N` followed by the target's final orbit.
    pub zeta: PseudoOrbit<P>,
    /// Orbit of `y` before `N`, orbit of `z` from `N` on.
    pub tau: PseudoOrbit<P>,
}

/// One step of the inductive construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep<P> {
    pub depth: usize,
    /// Jumps of this step's target.
    pub jumps: usize,
    /// Index shift applied so that the last jump enters `2N+1`.
    pub reindex: i64,
    /// Jump counts of `η`, `ζ` and `τ` (empty for a one-jump step).
    pub subtarget_jumps: Vec<usize>,
    pub checks: Vec<Check>,
    pub intermediates: Option<Intermediates<P>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShadowMethod {
    Inductive,
    DirectShift,
    DirectToral,
}

/// A shadow point with enough evidence to re-check
/// `d(T^n w, ξ_n) < ε` for every `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowCertificate<P> {
    pub method: ShadowMethod,
    pub shadow_point: P,
    pub target: PseudoOrbit<P>,
    pub epsilon_claimed: Distance,
    pub window: Window,
    /// Exact `max_{n in window} d(T^n w, ξ_n)`.
    pub window_sup_error: Distance,
    /// `d(w, ξ_0)`.
    pub error_at_zero: Distance,
    pub left_tail: TailCheck,
    pub right_tail: TailCheck,
    pub trace: Vec<TraceStep<P>>,
    /// Reindexing of the top-level gluing step, `0` if there was none.
    pub reindex: i64,
    pub error_table: Option<Vec<Distance>>,
}

/// Default certificate window: every jump padded by `2N + 2 + margin`.
pub fn default_window<P: Clone + PartialEq>(xi: &PseudoOrbit<P>, n: u32, margin: u64) -> Window {
    let pad = 2 * n as u64 + 2 + margin;
    let w = xi.boundary_window();
    Window { lo: w.lo - pad as i64, hi: w.hi + pad as i64 }
}

impl<P: Clone + PartialEq + PointToken> ShadowCertificate<P> {
    /// Measures `point` against `target` on `window` (enlarged to cover all
    /// jumps) and bounds both tails by `epsilon`.
    pub fn build<S: DynamicalSystem<Point = P>>(
        sys: &S,
        method: ShadowMethod,
        point: P,
        target: PseudoOrbit<P>,
        epsilon: Distance,
        window: Window,
    ) -> Result<Self> {
        let orbit = PseudoOrbit::orbit(point.clone(), 0);
        let window = window.hull(&covering_window(&target, &orbit, 0)).hull(&Window::around(0, 0));
        let profile = distance_profile(sys, &orbit, &target, window);
        let window_sup_error = profile.iter().cloned().fold(Distance::zero(), Distance::max);
        let error_at_zero = profile[(0 - window.lo) as usize].clone();
        let left_tail = certify_tail_equal_orbit(sys, &orbit, &target, &epsilon, Side::Left, window)?;
        let right_tail = certify_tail_equal_orbit(sys, &orbit, &target, &epsilon, Side::Right, window)?;
        Ok(ShadowCertificate {
            method,
            shadow_point: point,
            target,
            epsilon_claimed: epsilon,
            window,
            window_sup_error,
            error_at_zero,
            left_tail,
            right_tail,
            trace: Vec::new(),
            reindex: 0,
            error_table: None,
        })
    }

    /// Attaches the per-index error table on the window.
    pub fn with_error_table<S: DynamicalSystem<Point = P>>(mut self, sys: &S) -> Self {
        let orbit = PseudoOrbit::orbit(self.shadow_point.clone(), 0);
        self.error_table = Some(distance_profile(sys, &orbit, &self.target, self.window));
        self
    }

    /// Largest error over all times, if both tails are bounded.
    pub fn total_error(&self) -> Option<Distance> {
        Some(
            self.window_sup_error
                .clone()
                .max(self.left_tail.sup.clone()?)
                .max(self.right_tail.sup.clone()?),
        )
    }

    /// Whether the recorded evidence supports the claim (no recomputation).
    pub fn claims_hold(&self) -> bool {
        self.total_error().is_some_and(|e| e < self.epsilon_claimed)
    }

    pub fn to_json<S: DynamicalSystem<Point = P>>(&self, sys: &S) -> Value {
        let d = |x: &Distance| sys.format_distance(x);
        let od = |x: &Option<Distance>| x.as_ref().map(|v| sys.format_distance(v));
        let tail = |t: &TailCheck| json!({ "certified": t.certified, "sup": od(&t.sup), "horizon": t.horizon });
        let trace: Vec<Value> = self
            .trace
            .iter()
            .map(|s| {
                let mut step = json!({
                    "depth": s.depth,
                    "jumps": s.jumps,
                    "reindex": s.reindex,
                    "subtarget_jumps": s.subtarget_jumps,
                    "checks": s.checks.iter().map(|c| json!({
                        "condition": c.condition,
                        "measured": od(&c.measured),
                        "bound": d(&c.bound),
                        "passed": c.passed,
                    })).collect::<Vec<_>>(),
                });
                if let Some(im) = &s.intermediates {
                    step["intermediates"] = json!({
                        "xi_prime": im.xi_prime.to_text(),
                        "eta": im.eta.to_text(),
                        "zeta": im.zeta.to_text(),
                        "tau": im.tau.to_text(),
                    });
                }
                step
            })
            .collect();
        let mut out = json!({
            "method": self.method,
            "system": sys.name(),
            "shadow_point": self.shadow_point.to_token(),
            "target": self.target.to_text(),
            "epsilon_claimed": d(&self.epsilon_claimed),
            "window": self.window,
            "window_sup_error": d(&self.window_sup_error),
            "error_at_zero": d(&self.error_at_zero),
            "left_tail": tail(&self.left_tail),
            "right_tail": tail(&self.right_tail),
            "reindex": self.reindex,
            "trace": trace,
        });
        if let Some(table) = &self.error_table {
            out["error_table"] = json!(table.iter().map(d).collect::<Vec<_>>());
        }
        out
    }
}

/// Outcome of [`verify_certificate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub valid: bool,
    /// First index at which `d >= ε`, when the failure is inside the window.
    pub first_violation: Option<i64>,
    pub reason: Option<String>,
}

impl Verification {
    fn fail(index: Option<i64>, reason: impl Into<String>) -> Self {
        Verification { valid: false, first_violation: index, reason: Some(reason.into()) }
    }
}

/// Recomputes the window errors and both tail bounds from the shadow point
/// and the target alone, ignoring every recorded measurement.
pub fn verify_certificate<S: DynamicalSystem>(sys: &S, cert: &ShadowCertificate<S::Point>) -> Verification {
    let eps = &cert.epsilon_claimed;
    let orbit = PseudoOrbit::orbit(cert.shadow_point.clone(), 0);
    let cover = covering_window(&cert.target, &orbit, 0);
    let w = cert.window;
    if w.lo > cover.lo || w.hi < cover.hi {
        return Verification::fail(None, "window does not cover every jump");
    }
    let a = orbit.entries(sys, w);
    let b = cert.target.entries(sys, w);
    let mut sup = Distance::zero();
    for (n, (p, q)) in w.indices().zip(a.iter().zip(b.iter())) {
        let d = sys.dist(p, q);
        if d >= *eps {
            return Verification::fail(Some(n), format!("error {d} at index {n} is not below {eps}"));
        }
        sup = sup.max(d);
    }
    if sup != cert.window_sup_error {
        return Verification::fail(None, "recorded window error does not match");
    }
    for (side, p, q) in [(Side::Left, &a[0], &b[0]), (Side::Right, a.last().unwrap(), b.last().unwrap())] {
        match sys.tail_bound(p, q, side) {
            Some(t) if t < *eps => {}
            _ => return Verification::fail(None, format!("{} tail not bounded below {eps}", side.as_str())),
        }
    }
    Verification { valid: true, first_violation: None, reason: None }
}

/// Systems with a closed-form shadowing oracle.
pub trait DirectOracle: DynamicalSystem + Sized {
    fn direct_shadow(
        &self,
        xi: &PseudoOrbit<Self::Point>,
        epsilon: &Distance,
        window: Window,
    ) -> Result<ShadowCertificate<Self::Point>>;
}

impl DirectOracle for ShiftSystem {
    fn direct_shadow(
        &self,
        xi: &PseudoOrbit<Self::Point>,
        epsilon: &Distance,
        window: Window,
    ) -> Result<ShadowCertificate<Self::Point>> {
        direct_shadow_shift(self, xi, epsilon, window)
    }
}

impl DirectOracle for ToralSystem {
    fn direct_shadow(
        &self,
        xi: &PseudoOrbit<Self::Point>,
        epsilon: &Distance,
        window: Window,
    ) -> Result<ShadowCertificate<Self::Point>> {
        direct_shadow_toral(self, xi, epsilon, window)
    }
}

/// Inductive and direct shadows of the same target, compared.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossReport<P> {
    pub inductive: ShadowCertificate<P>,
    pub direct: ShadowCertificate<P>,
    pub inductive_valid: bool,
    pub direct_valid: bool,
    /// `d(w_ind, w_dir)`.
    pub distance: Distance,
    /// `err_ind(0) + err_dir(0)`.
    pub triangle_bound: Distance,
}

impl<P> CrossReport<P> {
    pub fn triangle_holds(&self) -> bool {
        self.distance <= self.triangle_bound
    }

    pub fn all_ok(&self) -> bool {
        self.inductive_valid && self.direct_valid && self.triangle_holds()
    }
}

pub fn cross_validate<S: DirectOracle>(
    sys: &S,
    constants: &CertifiedConstants,
    xi: &PseudoOrbit<S::Point>,
    margin: u64,
) -> Result<CrossReport<S::Point>> {
    let inductive = inductive_shadow(sys, constants, xi, margin)?;
    let direct = sys.direct_shadow(xi, &constants.epsilon, inductive.window)?;
    let distance = sys.dist(&inductive.shadow_point, &direct.shadow_point);
    let triangle_bound = &inductive.error_at_zero + &direct.error_at_zero;
    Ok(CrossReport {
        inductive_valid: verify_certificate(sys, &inductive).valid,
        direct_valid: verify_certificate(sys, &direct).valid,
        inductive,
        direct,
        distance,
        triangle_bound,
    })
}
