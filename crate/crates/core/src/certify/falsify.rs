//! Empirical searches against the derived constants.
//!
//! [`semiexp_falsify`] looks for two `δ`-pseudo-orbits that stay `α`-close
//! but separate by at least `ε` somewhere. [`shift_uniform_exhaustion`]
//! checks the shift's uniform expansivity radius over every word pair, and
//! [`uniform_audit`] samples orbit pairs for any system.

use rand::Rng;
use rayon::prelude::*;

use crate::gen::{random_pseudo_orbit, trial_rng, OrbitShape, Sampler};
use crate::orbit::{PseudoOrbit, Window};
use crate::quadratic::Distance;
use crate::systems::toral::{lambda_inv, Vec2};
use crate::systems::{DynamicalSystem, ToralSystem};

use super::sup_all_time;

/// Two `δ`-pseudo-orbits within `α` of each other at all times that are
/// `distance >= ε` apart at `index`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<P> {
    pub trial: u64,
    pub xi: PseudoOrbit<P>,
    pub eta: PseudoOrbit<P>,
    pub index: i64,
    pub distance: Distance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalsifyOutcome<P> {
    pub trials: u64,
    /// Pairs that met every precondition and so count as real tests.
    pub valid_pairs: u64,
    /// The witness from the smallest trial index, if any.
    pub witness: Option<Witness<P>>,
}

enum Trial<P> {
    Invalid,
    Passed,
    Witness(Box<Witness<P>>),
}

fn run_trial<S: Sampler>(sys: &S, delta: &Distance, eps: &Distance, seed: u64, trial: u64) -> Trial<S::Point> {
    let mut rng = trial_rng(seed, trial);
    let shape = OrbitShape { jumps: rng.gen_range(0..=3), jump_scale: delta.clone(), max_gap: 8 };
    let Ok(xi) = random_pseudo_orbit(sys, &shape, &mut rng) else {
        return Trial::Invalid;
    };
    let around = xi.boundary_window();
    let t = rng.gen_range(around.lo - 4..=around.hi + 4);
    let len = rng.gen_range(1..=6u64);
    let moved = sys.random_nearby(&xi.entry_at(sys, t), delta, &mut rng);
    let inner = PseudoOrbit::splice(sys, &xi, &PseudoOrbit::orbit(moved, t), t);
    let eta = PseudoOrbit::splice(sys, &inner, &xi, t + len as i64);
    if !xi.is_pseudo_orbit(sys, delta) || !eta.is_pseudo_orbit(sys, delta) {
        return Trial::Invalid;
    }
    let ev = sup_all_time(sys, &xi, &eta, Window::around(t, 8));
    match ev.total() {
        Some(total) if total <= sys.alpha() => {}
        _ => return Trial::Invalid,
    }
    if ev.window_sup >= *eps {
        Trial::Witness(Box::new(Witness { trial, xi, eta, index: ev.argmax, distance: ev.window_sup }))
    } else {
        Trial::Passed
    }
}

/// Searches `trials` seeded pairs for a counterexample to semi-expansivity
/// at `(δ, ε)`. Deterministic in `seed`; trials run in parallel.
pub fn semiexp_falsify<S: Sampler>(
    sys: &S,
    delta: &Distance,
    eps: &Distance,
    trials: u64,
    seed: u64,
) -> FalsifyOutcome<S::Point> {
    let results: Vec<Trial<S::Point>> =
        (0..trials).into_par_iter().map(|i| run_trial(sys, delta, eps, seed, i)).collect();
    let valid_pairs = results.iter().filter(|r| !matches!(r, Trial::Invalid)).count() as u64;
    let witness = results.into_iter().find_map(|r| match r {
        Trial::Witness(w) => Some(*w),
        _ => None,
    });
    FalsifyOutcome { trials, valid_pairs, witness }
}

/// Exhaustive check of the shift's uniform expansivity radius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformExhaustion {
    pub n: u32,
    pub pairs_checked: u64,
    /// Pairs `α`-close on `|k| <= N` with `d(x, y) > 2^{-(N+1)}`.
    pub exceptions: u64,
    /// Agreement on `|k| <= N−1` alone admits `d(x, y) = 2^{-N}`.
    pub radius_is_minimal: bool,
}

/// `d` between points whose coordinates `-n..=n` are the bits of `a`, `b`
/// (bit `j` is coordinate `j − n`), seen from coordinate `center`. Returns
/// the exponent `c` with `d = 2^{-c}`, or `None` when the words agree at
/// every coordinate they cover (then `d <= 2^{-c}` for the first uncovered
/// `c`).
fn word_distance_exponent(diff: u32, n: i64, center: i64) -> Option<u32> {
    (0..=2 * n)
        .map(|c| {
            let left = center - c;
            let right = center + c;
            let hit = |k: i64| (-n..=n).contains(&k) && diff >> (k + n) & 1 == 1;
            (c, hit(left) || hit(right))
        })
        .find(|&(_, hit)| hit)
        .map(|(c, _)| c as u32)
}

/// Over all pairs of binary words on coordinates `-N..=N`: if
/// `d(σ^k x, σ^k y) <= 1/2` for every `|k| <= N`, then `d(x, y) <= 2^{-(N+1)}`.
pub fn shift_uniform_exhaustion(n: u32) -> UniformExhaustion {
    let n = n as i64;
    let words = 1u32 << (2 * n + 1);
    let (pairs_checked, exceptions) = (0..words)
        .into_par_iter()
        .map(|a| {
            let mut bad = 0u64;
            for b in 0..words {
                let diff = a ^ b;
                let close = (-n..=n).all(|k| word_distance_exponent(diff, n, k).is_none_or(|c| c >= 1));
                if close && word_distance_exponent(diff, n, 0).is_some_and(|c| (c as i64) <= n) {
                    bad += 1;
                }
            }
            (words as u64, bad)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    // a difference at coordinate N is invisible to |k| <= N−1
    let radius_is_minimal = n == 0 || {
        let diff = 1u32 << (2 * n);
        (-(n - 1)..n).all(|k| word_distance_exponent(diff, n, k).is_none_or(|c| c >= 1))
            && word_distance_exponent(diff, n, 0) == Some(n as u32)
    };
    UniformExhaustion { n: n as u32, pairs_checked, exceptions, radius_is_minimal }
}

/// Sampled check of `uniform_N` on orbit pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformAudit {
    pub samples: u64,
    /// Pairs with `d(T^k x, T^k y) <= α` for every `|k| <= N`.
    pub hypothesis_met: u64,
    /// Of those, pairs with `d(x, y) >= ε`.
    pub violations: u64,
}

/// Hyperbolic sampler for the cat map: offsets whose stable and unstable
/// parts are both of order `α λ^{-N}`, so that many pairs stay close on
/// the whole window.
fn toral_offset<R: Rng>(sys: &ToralSystem, n: u32, rng: &mut R) -> Vec2 {
    let r = Vec2::new(Distance::frac(rng.gen_range(-64..=64), 64), Distance::frac(rng.gen_range(1..=64), 64));
    let (rs, ru) = r.split();
    let shrink = &sys.alpha() * &lambda_inv().pow(n as i64);
    let a = Distance::frac(rng.gen_range(0..=32), 16);
    let b = Distance::frac(rng.gen_range(0..=32), 16);
    &rs.scale(&(&a * &shrink)) + &ru.scale(&(&b * &shrink))
}

/// Samples pairs for the cat map and counts violations of the radius
/// `uniform_N(ε)`.
pub fn uniform_audit(sys: &ToralSystem, eps: &Distance, samples: u64, seed: u64) -> UniformAudit {
    let n = sys.uniform_radius(eps);
    let alpha = sys.alpha();
    let results: Vec<(bool, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let x = sys.random_point(&mut rng);
            let y = x.translate(&toral_offset(sys, n, &mut rng));
            let k = n as i64;
            let close = (-k..=k).all(|j| sys.dist(&sys.iterate(&x, j), &sys.iterate(&y, j)) <= alpha);
            (close, close && sys.dist(&x, &y) >= *eps)
        })
        .collect();
    UniformAudit {
        samples,
        hypothesis_met: results.iter().filter(|r| r.0).count() as u64,
        violations: results.iter().filter(|r| r.1).count() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{delta_semiexp, uniform_n};
    use crate::systems::{ShiftPoint, ShiftSystem};

    #[test]
    fn exhaustion_small_radii() {
        for n in 0..=4 {
            let r = shift_uniform_exhaustion(n);
            assert_eq!(r.exceptions, 0);
            assert!(r.radius_is_minimal);
            assert_eq!(r.pairs_checked, 1u64 << (4 * n + 2));
            assert_eq!(uniform_n(&ShiftSystem::default(), &Distance::pow2(-(n as i64))).unwrap(), n);
        }
    }

    #[test]
    fn word_distance_matches_shift_points() {
        let sys = ShiftSystem::default();
        let n = 3i64;
        let point = |w: u32| {
            let core: Vec<u8> = (0..=2 * n).map(|j| (w >> j & 1) as u8).collect();
            ShiftPoint::new(vec![0], core, vec![0], n).unwrap()
        };
        for a in (0..128u32).step_by(5) {
            for b in 0..128u32 {
                let (x, y) = (point(a), point(b));
                for k in -n..=n {
                    let d = sys.dist(&sys.iterate(&x, k), &sys.iterate(&y, k));
                    match word_distance_exponent(a ^ b, n, k) {
                        Some(c) => assert_eq!(d, Distance::pow2(-(c as i64))),
                        None => assert!(d <= Distance::pow2(-(n - k.abs() + 1))),
                    }
                }
            }
        }
    }

    #[test]
    fn certified_pair_has_no_witness() {
        let sys = ShiftSystem::default();
        let eps = Distance::pow2(-6);
        let delta = delta_semiexp(&sys, &eps).unwrap();
        let out = semiexp_falsify(&sys, &delta, &eps, 300, 11);
        assert!(out.witness.is_none());
        assert!(out.valid_pairs > 0);
    }

    #[test]
    fn inflated_delta_finds_witness() {
        let sys = ShiftSystem::default();
        let out = semiexp_falsify(&sys, &Distance::frac(1, 2), &Distance::pow2(-6), 1000, 11);
        let w = out.witness.clone().expect("witness");
        assert!(w.distance >= Distance::pow2(-6));
        assert_eq!(out, semiexp_falsify(&sys, &Distance::frac(1, 2), &Distance::pow2(-6), 1000, 11));
    }

    #[test]
    fn toral_audit_small() {
        let sys = ToralSystem::new();
        let a = uniform_audit(&sys, &Distance::frac(1, 64), 60, 5);
        assert_eq!(a.violations, 0);
        assert!(a.hypothesis_met > 0);
    }
}
