//! The hyperbolic toral automorphism `(x, y) -> (2x + y, x + y) mod 1`.
//!
//! Points carry coordinates in Q[√5] so that the eigen-decomposition of the
//! matrix is exact. Differences between points are lifted to the plane with
//! both coordinates in `(−1/2, 1/2]` before any linear reasoning.

use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{DynamicalSystem, PointToken, Side};
use crate::error::{ParseError, Result, ShadowError};
use crate::quadratic::{Distance, QuadraticNumber};

/// Unstable eigenvalue `(3 + √5)/2`.
pub fn lambda() -> QuadraticNumber {
    QuadraticNumber::from_parts(3, 2, 1, 2)
}

/// Stable eigenvalue `(3 − √5)/2 = 1/λ`.
pub fn lambda_inv() -> QuadraticNumber {
    QuadraticNumber::from_parts(3, 2, -1, 2)
}

/// Sup-norm bound of the projections onto the eigenlines:
/// `‖v_s‖, ‖v_u‖ <= C_p ‖v‖` with `C_p = φ²/√5 = 1/2 + 3√5/10`.
pub fn projection_constant() -> QuadraticNumber {
    QuadraticNumber::from_parts(1, 2, 3, 10)
}

/// Slope of the unstable eigenline, `(√5 − 1)/2`.
fn unstable_slope() -> QuadraticNumber {
    QuadraticNumber::from_parts(-1, 2, 1, 2)
}

/// Slope of the stable eigenline, `−(√5 + 1)/2`.
fn stable_slope() -> QuadraticNumber {
    QuadraticNumber::from_parts(-1, 2, -1, 2)
}

/// A vector in the plane (a lifted difference of torus points).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Vec2 {
    pub x: QuadraticNumber,
    pub y: QuadraticNumber,
}

impl Vec2 {
    pub fn new(x: QuadraticNumber, y: QuadraticNumber) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2::default()
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn sup_norm(&self) -> QuadraticNumber {
        self.x.abs().max(self.y.abs())
    }

    pub fn scale(&self, c: &QuadraticNumber) -> Vec2 {
        Vec2 { x: &self.x * c, y: &self.y * c }
    }

    /// Multiplication by `[[2, 1], [1, 1]]`.
    pub fn forward(&self) -> Vec2 {
        Vec2 { x: &self.x + &self.x + &self.y, y: &self.x + &self.y }
    }

    /// Multiplication by `[[1, −1], [−1, 2]]`.
    pub fn backward(&self) -> Vec2 {
        Vec2 { x: &self.x - &self.y, y: &self.y + &self.y - &self.x }
    }

    /// Decomposes into `(v_s, v_u)` along the stable and unstable eigenlines.
    pub fn split(&self) -> (Vec2, Vec2) {
        // v = s·(1, h) + u·(1, g), g − h = √5
        let g = unstable_slope();
        let h = stable_slope();
        let u = (&self.y - &h * &self.x) / QuadraticNumber::sqrt5();
        let s = &self.x - &u;
        let vu = Vec2 { y: &u * &g, x: u };
        let vs = Vec2 { y: &s * &h, x: s };
        (vs, vu)
    }
}

impl Add for &Vec2 {
    type Output = Vec2;
    fn add(self, rhs: &Vec2) -> Vec2 {
        Vec2 { x: &self.x + &rhs.x, y: &self.y + &rhs.y }
    }
}

impl Sub for &Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: &Vec2) -> Vec2 {
        Vec2 { x: &self.x - &rhs.x, y: &self.y - &rhs.y }
    }
}

/// A point of the torus with canonical coordinates in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ToralPoint {
    x: QuadraticNumber,
    y: QuadraticNumber,
}

impl ToralPoint {
    /// Reduces both coordinates mod 1.
    pub fn new(x: QuadraticNumber, y: QuadraticNumber) -> Self {
        ToralPoint { x: x.fract(), y: y.fract() }
    }

    pub fn origin() -> Self {
        ToralPoint { x: QuadraticNumber::zero(), y: QuadraticNumber::zero() }
    }

    pub fn x(&self) -> &QuadraticNumber {
        &self.x
    }

    pub fn y(&self) -> &QuadraticNumber {
        &self.y
    }

    pub fn translate(&self, v: &Vec2) -> Self {
        ToralPoint::new(&self.x + &v.x, &self.y + &v.y)
    }

    /// Lift of `self − other` with both coordinates in `(−1/2, 1/2]`.
    pub fn lift_difference(&self, other: &ToralPoint) -> Vec2 {
        Vec2 {
            x: (&self.x - &other.x).centered_mod_one(),
            y: (&self.y - &other.y).centered_mod_one(),
        }
    }
}

impl fmt::Display for ToralPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={}, y={}", self.x.to_token(), self.y.to_token())
    }
}

impl PointToken for ToralPoint {
    fn to_token(&self) -> String {
        self.to_string()
    }

    /// `x=a/b+c/d*s5, y=a/b+c/d*s5`.
    fn parse_token(s: &str) -> Result<Self, ParseError> {
        let err = |m: &str| ParseError::Point(s.into(), m.into());
        let (xs, ys) = s.split_once(',').ok_or_else(|| err("expected `x=..., y=...`"))?;
        let xv = xs.trim().strip_prefix("x=").ok_or_else(|| err("missing x="))?;
        let yv = ys.trim().strip_prefix("y=").ok_or_else(|| err("missing y="))?;
        let x: QuadraticNumber = xv.parse()?;
        let y: QuadraticNumber = yv.parse()?;
        let p = ToralPoint::new(x.clone(), y.clone());
        if p.x != x || p.y != y {
            return Err(err("coordinates must lie in [0, 1)"));
        }
        Ok(p)
    }
}

type Mat2 = [[BigInt; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// `A^n` for the cat matrix and any integer `n`.
pub fn matrix_power(n: i64) -> Mat2 {
    let base: Mat2 = if n >= 0 {
        [[2.into(), 1.into()], [1.into(), 1.into()]]
    } else {
        [[1.into(), (-1).into()], [(-1).into(), 2.into()]]
    };
    let mut result: Mat2 = [[BigInt::one(), BigInt::zero()], [BigInt::zero(), BigInt::one()]];
    let mut acc = base;
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &acc);
        }
        acc = mat_mul(&acc, &acc);
        e >>= 1;
    }
    result
}

/// The cat map with its certified expansivity constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToralSystem {
    alpha: Distance,
    provenance: String,
}

impl Default for ToralSystem {
    fn default() -> Self {
        Self::new()
    }
}

impl ToralSystem {
    /// Uses the largest dyadic `α <= 1/8` accepted by the grid sweep.
    pub fn new() -> Self {
        let cert = crate::certify::shipped_toral_alpha();
        ToralSystem {
            alpha: cert.alpha.clone(),
            provenance: cert.provenance(),
        }
    }

    /// Uses `alpha` as given, without certification.
    pub fn with_alpha(alpha: Distance) -> Result<Self> {
        if !alpha.is_positive() || alpha >= Distance::frac(1, 6) {
            return Err(ShadowError::Precondition(format!(
                "alpha must lie in (0, 1/6), got {alpha}"
            )));
        }
        Ok(ToralSystem { alpha, provenance: "user supplied (uncertified)".into() })
    }

    fn linear_image(&self, p: &ToralPoint, m: &Mat2) -> ToralPoint {
        let c = |v: &BigInt| QuadraticNumber::from_ratio(num_rational::BigRational::from_integer(v.clone()));
        ToralPoint::new(
            &c(&m[0][0]) * &p.x + &c(&m[0][1]) * &p.y,
            &c(&m[1][0]) * &p.x + &c(&m[1][1]) * &p.y,
        )
    }
}

impl DynamicalSystem for ToralSystem {
    type Point = ToralPoint;

    fn name(&self) -> String {
        "toral".into()
    }

    fn apply(&self, p: &ToralPoint) -> ToralPoint {
        ToralPoint::new(&p.x + &p.x + &p.y, &p.x + &p.y)
    }

    fn apply_inv(&self, p: &ToralPoint) -> ToralPoint {
        ToralPoint::new(&p.x - &p.y, &p.y + &p.y - &p.x)
    }

    fn iterate(&self, p: &ToralPoint, n: i64) -> ToralPoint {
        match n {
            0 => p.clone(),
            1 => self.apply(p),
            -1 => self.apply_inv(p),
            _ => self.linear_image(p, &matrix_power(n)),
        }
    }

    fn dist(&self, p: &ToralPoint, q: &ToralPoint) -> Distance {
        p.lift_difference(q).sup_norm()
    }

    fn alpha(&self) -> Distance {
        self.alpha.clone()
    }

    fn alpha_provenance(&self) -> String {
        self.provenance.clone()
    }

    /// Row sums of `A` and `A^{-1}` are at most 3.
    fn lipschitz(&self) -> u32 {
        3
    }

    fn diameter(&self) -> Distance {
        Distance::frac(1, 2)
    }

    /// The local product point is within `C_p·d(x, y)` of the bi-sequence.
    fn one_jump_threshold(&self) -> Distance {
        &self.alpha / &projection_constant()
    }

    fn one_jump_shadow(&self, x: &ToralPoint, y: &ToralPoint) -> Result<ToralPoint> {
        let v = y.lift_difference(x);
        let threshold = self.one_jump_threshold();
        if v.sup_norm() >= threshold {
            return Err(ShadowError::Precondition(format!(
                "one-jump size {} is not below the certified threshold {}",
                v.sup_norm().to_token(),
                threshold.to_token()
            )));
        }
        let (vs, _) = v.split();
        Ok(x.translate(&vs))
    }

    fn tail_bound(&self, a: &ToralPoint, b: &ToralPoint, side: Side) -> Option<Distance> {
        let d = a.lift_difference(b);
        let (vs, vu) = d.split();
        let decaying = match side {
            Side::Right => vu.is_zero(),
            Side::Left => vs.is_zero(),
        };
        // A^k d is a representative of the k-th difference and its norm
        // contracts by exactly 1/λ per step on the decaying eigenline.
        decaying.then(|| &d.sup_norm() * &lambda_inv())
    }

    fn escape_horizon(&self, a: &ToralPoint, b: &ToralPoint, side: Side, bound: &Distance) -> Option<u32> {
        let (vs, vu) = a.lift_difference(b).split();
        let growing = match side {
            Side::Right => vu.sup_norm(),
            Side::Left => vs.sup_norm(),
        };
        if growing.is_zero() {
            return None;
        }
        let lam = lambda();
        let mut n = 0u32;
        let mut size = growing;
        while size <= *bound {
            size = &size * &lam;
            n += 1;
        }
        Some(n)
    }

    /// `ε(λ − 1) / (2 C_p (λ + 1))`, capped so that `3α + 2δ <= 1/2` keeps
    /// lifted differences of α-close pseudo-orbits linear.
    fn semiexp_delta(&self, eps: &Distance) -> Distance {
        let lam = lambda();
        let one = Distance::integer(1);
        let formula = eps * &(&lam - &one) / (&Distance::integer(2) * &projection_constant() * (&lam + &one));
        let cap = (Distance::frac(1, 2) - &Distance::integer(3) * &self.alpha) / Distance::integer(2);
        formula.min(cap)
    }

    /// Smallest `n` with `2 C_p α λ^{-n} < ε`.
    fn uniform_radius(&self, eps: &Distance) -> u32 {
        let mut bound = &Distance::integer(2) * &projection_constant() * &self.alpha;
        let inv = lambda_inv();
        let mut n = 0;
        while bound >= *eps {
            bound = &bound * &inv;
            n += 1;
        }
        n
    }

    /// `δ (L − 1) / (L^{2N+2} − 1)` with `L = 3`.
    fn segment_rho(&self, delta: &Distance, n: u32) -> Distance {
        let l = self.lipschitz() as i64;
        let denom = Distance::integer(l).pow(2 * n as i64 + 2) - Distance::integer(1);
        delta * &Distance::integer(l - 1) / denom
    }
}
