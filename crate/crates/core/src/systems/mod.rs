//! Concrete expansive homeomorphisms.
//!
//! Two instances are provided, both with exact arithmetic:
//!
//! - [`ShiftSystem`]: the full shift on `m` symbols, points are eventually
//!   periodic bi-infinite sequences, metric `2^{-min{|n| : x_n != y_n}}`.
//! - [`ToralSystem`]: the automorphism of the 2-torus with matrix
//!   `[[2, 1], [1, 1]]`, points have coordinates in Q[√5], sup metric.

pub mod shift;
pub mod toral;

use std::fmt::Debug;

use crate::error::{ParseError, Result};
use crate::quadratic::Distance;

pub use shift::{ShiftPoint, ShiftSystem};
pub use toral::{ToralPoint, ToralSystem};

/// Which half-line of time a tail statement concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Text form of a point used by the pseudo-orbit file format.
pub trait PointToken: Sized {
    fn to_token(&self) -> String;
    fn parse_token(s: &str) -> Result<Self, ParseError>;
}

/// An invertible map on a compact metric space together with the certified
/// constants the shadowing construction consumes.
pub trait DynamicalSystem: Sync {
    type Point: Clone + PartialEq + Debug + Send + Sync + PointToken;

    fn name(&self) -> String;

    fn apply(&self, p: &Self::Point) -> Self::Point;

    fn apply_inv(&self, p: &Self::Point) -> Self::Point;

    /// `T^n(p)` for any integer `n`.
    fn iterate(&self, p: &Self::Point, n: i64) -> Self::Point {
        let mut q = p.clone();
        if n >= 0 {
            for _ in 0..n {
                q = self.apply(&q);
            }
        } else {
            for _ in 0..n.unsigned_abs() {
                q = self.apply_inv(&q);
            }
        }
        q
    }

    fn dist(&self, p: &Self::Point, q: &Self::Point) -> Distance;

    /// Certified expansivity constant.
    fn alpha(&self) -> Distance;

    /// How `alpha` was certified, for provenance records.
    fn alpha_provenance(&self) -> String;

    /// Per-step modulus of continuity for both `T` and `T^{-1}`.
    fn lipschitz(&self) -> u32;

    /// Upper bound on the diameter of the space.
    fn diameter(&self) -> Distance;

    /// Jump size strictly below which [`DynamicalSystem::one_jump_shadow`]
    /// certifiably produces an `alpha`-shadow.
    fn one_jump_threshold(&self) -> Distance;

    /// Shadows the one-jump bi-sequence `(.., T^{-2}y, T^{-1}y, x, Tx, ..)`:
    /// the returned `z` follows `y` into the past and `x` into the future.
    fn one_jump_shadow(&self, x: &Self::Point, y: &Self::Point) -> Result<Self::Point>;

    /// Sound bound on `d(T^k a, T^k b)` over all `k >= 1` (right) or
    /// `k <= -1` (left); `None` when no finite bound can be established.
    fn tail_bound(&self, a: &Self::Point, b: &Self::Point, side: Side) -> Option<Distance>;

    /// For a tail that cannot be bounded: the first step at which the
    /// separating component provably exceeds `bound`, when computable.
    fn escape_horizon(&self, _a: &Self::Point, _b: &Self::Point, _side: Side, _bound: &Distance) -> Option<u32> {
        None
    }

    /// Semi-expansivity threshold: two `delta`-pseudo-orbits that stay within
    /// `alpha` of each other stay within `eps`.
    fn semiexp_delta(&self, eps: &Distance) -> Distance;

    /// Uniform expansivity radius: `alpha`-closeness of two true orbits for
    /// `|n| <= N` forces distance `< eps` at time 0.
    fn uniform_radius(&self, eps: &Distance) -> u32;

    /// Step bound making every `(2N+2)`-segment `delta`-shadowed by its first point.
    fn segment_rho(&self, delta: &Distance, n: u32) -> Distance;

    /// Exact rendering of a distance for reports and CSV.
    fn format_distance(&self, d: &Distance) -> String {
        d.to_token()
    }
}
