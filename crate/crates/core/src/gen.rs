//! Seeded random points and pseudo-orbits.

use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, ShadowError};
use crate::orbit::{Block, PseudoOrbit};
use crate::quadratic::{Distance, QuadraticNumber};
use crate::systems::toral::Vec2;
use crate::systems::{DynamicalSystem, ShiftPoint, ShiftSystem, ToralPoint, ToralSystem};

/// Deterministic generator for trial `stream` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub trait Sampler: DynamicalSystem {
    fn random_point<R: Rng>(&self, rng: &mut R) -> Self::Point;

    /// A point `q` with `0 < d(p, q) < scale`.
    fn random_nearby<R: Rng>(&self, p: &Self::Point, scale: &Distance, rng: &mut R) -> Self::Point;
}

impl ShiftSystem {
    fn random_word<R: Rng>(&self, rng: &mut R, min: usize, max: usize) -> Vec<u8> {
        let len = rng.gen_range(min..=max);
        (0..len).map(|_| rng.gen_range(0..self.alphabet())).collect()
    }

    fn other_symbol<R: Rng>(&self, s: u8, rng: &mut R) -> u8 {
        (s + rng.gen_range(1..self.alphabet())) % self.alphabet()
    }
}

impl Sampler for ShiftSystem {
    fn random_point<R: Rng>(&self, rng: &mut R) -> ShiftPoint {
        let left = self.random_word(rng, 1, 3);
        let core = self.random_word(rng, 0, 6);
        let right = self.random_word(rng, 1, 3);
        ShiftPoint::new(left, core, right, rng.gen_range(-3..=3)).expect("nonempty periods")
    }

    fn random_nearby<R: Rng>(&self, p: &ShiftPoint, scale: &Distance, rng: &mut R) -> ShiftPoint {
        // distance 2^{-c} < scale
        let mut c_min = 0i64;
        while Distance::pow2(-c_min) >= *scale {
            c_min += 1;
        }
        let c = c_min + rng.gen_range(0..4);
        let coord = if rng.gen_bool(0.5) { c } else { -c };
        let flipped = p.with_symbol(coord, self.other_symbol(p.symbol_at(coord), rng));
        if rng.gen_bool(0.5) {
            return flipped;
        }
        let noise = self.random_point(rng);
        if coord >= 0 {
            ShiftPoint::glue(&flipped, &noise, coord + 1)
        } else {
            ShiftPoint::glue(&noise, &flipped, coord)
        }
    }
}

fn random_quadratic<R: Rng>(rng: &mut R) -> QuadraticNumber {
    let d = rng.gen_range(1..=12);
    let a = QuadraticNumber::frac(rng.gen_range(0..d), d);
    if rng.gen_bool(0.5) {
        let e = rng.gen_range(1..=9);
        a + QuadraticNumber::from_parts(0, 1, rng.gen_range(-e..=e), e)
    } else {
        a
    }
}

impl Sampler for ToralSystem {
    fn random_point<R: Rng>(&self, rng: &mut R) -> ToralPoint {
        ToralPoint::new(random_quadratic(rng), random_quadratic(rng))
    }

    fn random_nearby<R: Rng>(&self, p: &ToralPoint, scale: &Distance, rng: &mut R) -> ToralPoint {
        const D: i64 = 1024;
        let scale = scale.clone().min(Distance::frac(1, 4));
        loop {
            let (a, b) = (rng.gen_range(1 - D..D), rng.gen_range(1 - D..D));
            if a == 0 && b == 0 {
                continue;
            }
            let v = Vec2::new(&scale * &Distance::frac(a, D), &scale * &Distance::frac(b, D));
            return p.translate(&v);
        }
    }
}

/// Shape of a generated pseudo-orbit.
#[derive(Debug, Clone)]
pub struct OrbitShape {
    pub jumps: usize,
    /// Every jump is strictly smaller than this.
    pub jump_scale: Distance,
    /// Block lengths are drawn from `1..=max_gap`.
    pub max_gap: u64,
}

/// A pseudo-orbit with exactly `shape.jumps` jumps, all below `jump_scale`.
pub fn random_pseudo_orbit<S: Sampler, R: Rng>(sys: &S, shape: &OrbitShape, rng: &mut R) -> Result<PseudoOrbit<S::Point>> {
    if !shape.jump_scale.is_positive() || shape.max_gap == 0 {
        return Err(ShadowError::Precondition("jump scale and gap must be positive".into()));
    }
    let base = rng.gen_range(-(shape.max_gap as i64)..=0);
    let mut blocks = Vec::with_capacity(shape.jumps + 1);
    let mut seed = sys.random_point(rng);
    for i in 0..=shape.jumps {
        let len = rng.gen_range(1..=shape.max_gap);
        blocks.push(Block { seed: seed.clone(), len });
        if i < shape.jumps {
            let image = sys.iterate(&seed, len as i64);
            seed = sys.random_nearby(&image, &shape.jump_scale, rng);
        }
    }
    let xi = PseudoOrbit::new(base, blocks)?;
    let jumps = xi.jump_positions(sys);
    if jumps.len() != shape.jumps || jumps.iter().any(|j| j.size >= shape.jump_scale || j.size.is_zero()) {
        return Err(ShadowError::Precondition(format!(
            "infeasible jump placement: wanted {} jumps below {}, got {}",
            shape.jumps,
            shape.jump_scale,
            jumps.len()
        )));
    }
    Ok(xi)
}
