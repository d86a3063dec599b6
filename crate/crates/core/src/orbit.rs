//! Finite-jump pseudo-orbits and the splice algebra used by the gluing
//! construction.
//!
//! A [`PseudoOrbit`] is stored as consecutive blocks of exact iterates.
//! Block `i` starts at index `start_i` and holds `T^j(seed_i)` at
//! `start_i + j`. The first block extends to `-∞` and the last block to
//! `+∞`, so every index has an entry and jumps can only sit on block
//! boundaries.

use std::fmt::Write as _;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{ParseError, Result, ShadowError};
use crate::quadratic::Distance;
use crate::systems::{DynamicalSystem, PointToken};

#[derive(Clone, Debug, PartialEq)]
pub struct Block<P> {
    pub seed: P,
    pub len: u64,
}

/// Closed index range `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(ShadowError::Precondition(format!("empty window [{lo}, {hi}]")));
        }
        Ok(Window { lo, hi })
    }

    pub fn around(center: i64, radius: u64) -> Self {
        Window { lo: center - radius as i64, hi: center + radius as i64 }
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn len(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn hull(&self, other: &Window) -> Window {
        Window { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

/// A jump: `T(x_{index-1}) != x_index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jump {
    pub index: i64,
    pub size: Distance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoOrbit<P> {
    base: i64,
    blocks: Vec<Block<P>>,
}

impl<P: Clone + PartialEq> PseudoOrbit<P> {
    pub fn new(base: i64, blocks: Vec<Block<P>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(ShadowError::Precondition("a pseudo-orbit needs at least one block".into()));
        }
        if blocks.iter().any(|b| b.len == 0) {
            return Err(ShadowError::Precondition("block lengths must be positive".into()));
        }
        Ok(PseudoOrbit { base, blocks })
    }

    /// The true orbit of `seed` placed so that `entry(at) = seed`.
    pub fn orbit(seed: P, at: i64) -> Self {
        PseudoOrbit { base: at, blocks: vec![Block { seed, len: 1 }] }
    }

    pub fn base(&self) -> i64 {
        self.base
    }

    pub fn blocks(&self) -> &[Block<P>] {
        &self.blocks
    }

    pub fn starts(&self) -> Vec<i64> {
        let mut s = self.base;
        self.blocks
            .iter()
            .map(|b| {
                let start = s;
                s += b.len as i64;
                start
            })
            .collect()
    }

    /// Indices of block boundaries (candidate jump positions).
    pub fn boundaries(&self) -> Vec<i64> {
        self.starts().into_iter().skip(1).collect()
    }

    /// Entries shifted right by `k`: the result's entry `n` is `self`'s `n − k`.
    pub fn shift_index(&self, k: i64) -> Self {
        PseudoOrbit { base: self.base + k, blocks: self.blocks.clone() }
    }

    fn block_of(&self, n: i64) -> (usize, i64) {
        let starts = self.starts();
        let i = starts.partition_point(|&s| s <= n).saturating_sub(1);
        (i, starts[i])
    }

    pub fn entry_at<S: DynamicalSystem<Point = P>>(&self, sys: &S, n: i64) -> P {
        let (i, start) = self.block_of(n);
        sys.iterate(&self.blocks[i].seed, n - start)
    }

    /// Entries for every index of `w`, computed by stepping through blocks.
    pub fn entries<S: DynamicalSystem<Point = P>>(&self, sys: &S, w: Window) -> Vec<P> {
        let starts = self.starts();
        let mut out = Vec::with_capacity(w.len() as usize);
        let mut current = self.entry_at(sys, w.lo);
        out.push(current.clone());
        for n in (w.lo + 1)..=w.hi {
            current = match starts.binary_search(&n) {
                Ok(i) if i > 0 => self.blocks[i].seed.clone(),
                _ => sys.apply(&current),
            };
            out.push(current.clone());
        }
        out
    }

    pub fn jump_positions<S: DynamicalSystem<Point = P>>(&self, sys: &S) -> Vec<Jump> {
        let starts = self.starts();
        (1..self.blocks.len())
            .filter_map(|i| {
                let prev = &self.blocks[i - 1];
                let image = sys.iterate(&prev.seed, prev.len as i64);
                let size = sys.dist(&image, &self.blocks[i].seed);
                (!size.is_zero()).then_some(Jump { index: starts[i], size })
            })
            .collect()
    }

    pub fn jump_count<S: DynamicalSystem<Point = P>>(&self, sys: &S) -> usize {
        self.jump_positions(sys).len()
    }

    /// Largest jump size, zero for a true orbit.
    pub fn max_jump<S: DynamicalSystem<Point = P>>(&self, sys: &S) -> Distance {
        self.jump_positions(sys)
            .into_iter()
            .map(|j| j.size)
            .fold(Distance::zero(), Distance::max)
    }

    /// Every jump is strictly below `delta`.
    pub fn is_pseudo_orbit<S: DynamicalSystem<Point = P>>(&self, sys: &S, delta: &Distance) -> bool {
        self.jump_positions(sys).iter().all(|j| j.size < *delta)
    }

    /// Merges blocks across boundaries that carry no jump.
    pub fn normalized<S: DynamicalSystem<Point = P>>(&self, sys: &S) -> Self {
        let mut blocks: Vec<Block<P>> = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            if let Some(last) = blocks.last_mut() {
                if sys.iterate(&last.seed, last.len as i64) == b.seed {
                    last.len += b.len;
                    continue;
                }
            }
            blocks.push(b.clone());
        }
        PseudoOrbit { base: self.base, blocks }
    }

    /// Entries of `left` for `n < a` followed by entries of `right` for `n >= a`.
    pub fn splice<S: DynamicalSystem<Point = P>>(sys: &S, left: &Self, right: &Self, a: i64) -> Self {
        // left part, indices < a
        let (i, start_i) = left.block_of(a - 1);
        let (base, mut blocks) = if start_i < a {
            let mut kept: Vec<Block<P>> = left.blocks[..i].to_vec();
            kept.push(Block { seed: left.blocks[i].seed.clone(), len: (a - start_i) as u64 });
            (left.base, kept)
        } else {
            (a - 1, vec![Block { seed: left.entry_at(sys, a - 1), len: 1 }])
        };
        // right part, indices >= a
        let starts = right.starts();
        let (j, _) = right.block_of(a);
        let len = match starts.get(j + 1) {
            Some(&next) => (next - a) as u64,
            None => 1,
        };
        blocks.push(Block { seed: right.entry_at(sys, a), len });
        blocks.extend(right.blocks[j + 1..].iter().cloned());
        PseudoOrbit { base, blocks }.normalized(sys)
    }

    /// Replaces entries `a..a+len` by the true orbit segment of `entry(a)`.
    pub fn replace_segment_with_orbit<S: DynamicalSystem<Point = P>>(&self, sys: &S, a: i64, len: u64) -> Self {
        let segment = Self::orbit(self.entry_at(sys, a), a);
        let head = Self::splice(sys, self, &segment, a);
        Self::splice(sys, &head, self, a + len as i64)
    }

    /// Hull of all block boundaries, or `[base, base]` for a single block.
    pub fn boundary_window(&self) -> Window {
        let b = self.boundaries();
        match (b.first(), b.last()) {
            (Some(&lo), Some(&hi)) => Window { lo, hi },
            _ => Window { lo: self.base, hi: self.base },
        }
    }
}

/// `max_{n in w} d(ξ_n, η_n)`.
pub fn sup_distance<S: DynamicalSystem>(
    sys: &S,
    xi: &PseudoOrbit<S::Point>,
    eta: &PseudoOrbit<S::Point>,
    w: Window,
) -> Distance {
    xi.entries(sys, w)
        .iter()
        .zip(eta.entries(sys, w).iter())
        .map(|(p, q)| sys.dist(p, q))
        .fold(Distance::zero(), Distance::max)
}

/// Per-index distances on `w`, in index order.
pub fn distance_profile<S: DynamicalSystem>(
    sys: &S,
    xi: &PseudoOrbit<S::Point>,
    eta: &PseudoOrbit<S::Point>,
    w: Window,
) -> Vec<Distance> {
    xi.entries(sys, w)
        .iter()
        .zip(eta.entries(sys, w).iter())
        .map(|(p, q)| sys.dist(p, q))
        .collect()
}

impl<P: Clone + PartialEq + PointToken> PseudoOrbit<P> {
    /// `base <n>` followed by one `seed-token length` line per block.
    pub fn to_text(&self) -> String {
        let mut out = format!("base {}\n", self.base);
        for b in &self.blocks {
            let _ = writeln!(out, "{} {}", b.seed.to_token(), b.len);
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines
            .next()
            .ok_or(ParseError::Orbit { line: 0, reason: "empty input".into() })?;
        let base: i64 = header
            .strip_prefix("base")
            .and_then(|b| b.trim().parse().ok())
            .ok_or(ParseError::Orbit { line: ln, reason: "expected `base <int>`".into() })?;
        let mut blocks = Vec::new();
        for (ln, line) in lines {
            let (token, len) = line
                .rsplit_once(char::is_whitespace)
                .ok_or(ParseError::Orbit { line: ln, reason: "expected `seed-token length`".into() })?;
            let len: u64 = len
                .parse()
                .ok()
                .filter(|&l| l > 0)
                .ok_or(ParseError::Orbit { line: ln, reason: format!("bad block length `{len}`") })?;
            let seed = P::parse_token(token.trim())
                .map_err(|e| ParseError::Orbit { line: ln, reason: e.to_string() })?;
            blocks.push(Block { seed, len });
        }
        if blocks.is_empty() {
            return Err(ParseError::Orbit { line: ln, reason: "no blocks".into() });
        }
        Ok(PseudoOrbit { base, blocks })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{ShiftPoint, ShiftSystem};
    use proptest::prelude::*;

    fn zero() -> ShiftPoint {
        ShiftPoint::constant(0)
    }

    fn blocks(v: Vec<(ShiftPoint, u64)>) -> Vec<Block<ShiftPoint>> {
        v.into_iter().map(|(seed, len)| Block { seed, len }).collect()
    }

    /// Oracle: walk from the nearest block start one application at a time.
    fn brute_entry(sys: &ShiftSystem, xi: &PseudoOrbit<ShiftPoint>, n: i64) -> ShiftPoint {
        let starts = xi.starts();
        let i = starts.iter().rposition(|&s| s <= n).unwrap_or(0);
        let mut p = xi.blocks()[i].seed.clone();
        let steps = n - starts[i];
        for _ in 0..steps.abs() {
            p = if steps > 0 { sys.apply(&p) } else { sys.apply_inv(&p) };
        }
        p
    }

    #[test]
    fn single_block_is_an_orbit() {
        let sys = ShiftSystem::default();
        let p = ShiftPoint::periodic(&[0, 1, 1]).with_symbol(2, 0);
        let xi = PseudoOrbit::orbit(p.clone(), 0);
        for n in -10..10 {
            assert_eq!(xi.entry_at(&sys, n), sys.iterate(&p, n));
        }
        assert!(xi.jump_positions(&sys).is_empty());
    }

    #[test]
    fn two_blocks_unfold() {
        let sys = ShiftSystem::default();
        let p = zero().with_symbol(4, 1);
        let q = zero().with_symbol(-4, 1);
        let xi = PseudoOrbit::new(0, blocks(vec![(p.clone(), 3), (q.clone(), 2)])).unwrap();
        assert_eq!(xi.entry_at(&sys, 2), sys.iterate(&p, 2));
        assert_eq!(xi.entry_at(&sys, 3), q);
        assert_eq!(xi.entry_at(&sys, 7), sys.iterate(&q, 4));
        // jump at 3: σ^3 p has its 1 at coordinate 1, q at −4
        let jumps = xi.jump_positions(&sys);
        assert_eq!(jumps, vec![Jump { index: 3, size: Distance::frac(1, 2) }]);
    }

    #[test]
    fn far_entries_are_cheap() {
        let sys = ShiftSystem::default();
        let xi = PseudoOrbit::new(
            -2,
            blocks(vec![(ShiftPoint::periodic(&[0, 1]), 2), (ShiftPoint::periodic(&[1, 1, 0]), 5)]),
        )
        .unwrap();
        let far = xi.entry_at(&sys, 1_000_000);
        assert_eq!(far, sys.iterate(&ShiftPoint::periodic(&[1, 1, 0]), 1_000_000));
        assert_eq!(xi.entry_at(&sys, -1_000_000), sys.iterate(&ShiftPoint::periodic(&[0, 1]), -999_998));
        for n in -12..12 {
            assert_eq!(xi.entry_at(&sys, n), brute_entry(&sys, &xi, n));
        }
    }

    #[test]
    fn one_jump_form() {
        // (.., T^{-1}y, x, Tx, ..) with y = T(x_{-1})
        let sys = ShiftSystem::default();
        let x = zero();
        let y = zero().with_symbol(-3, 1);
        let xi = PseudoOrbit::new(-1, blocks(vec![(sys.apply_inv(&y), 1), (x.clone(), 1)])).unwrap();
        assert_eq!(xi.jump_positions(&sys), vec![Jump { index: 0, size: sys.dist(&y, &x) }]);
    }

    #[test]
    fn splice_without_jump_and_identity() {
        let sys = ShiftSystem::default();
        let p = ShiftPoint::periodic(&[0, 1, 1]);
        let o = PseudoOrbit::orbit(p.clone(), 0);
        let shifted = PseudoOrbit::orbit(sys.iterate(&p, 5), 5);
        let s = PseudoOrbit::splice(&sys, &o, &shifted, 3);
        assert!(s.jump_positions(&sys).is_empty());
        let xi = PseudoOrbit::new(0, blocks(vec![(p.clone(), 3), (zero(), 2)])).unwrap();
        let same = PseudoOrbit::splice(&sys, &xi, &xi, 2);
        for n in -8..10 {
            assert_eq!(same.entry_at(&sys, n), xi.entry_at(&sys, n));
        }
    }

    #[test]
    fn splice_jump_size_is_metric() {
        let sys = ShiftSystem::default();
        let y = ShiftPoint::periodic(&[0, 1]);
        let z = ShiftPoint::periodic(&[1, 1, 0, 0]);
        let tau = PseudoOrbit::splice(&sys, &PseudoOrbit::orbit(y.clone(), 0), &PseudoOrbit::orbit(z.clone(), 0), 4);
        let expected = sys.dist(&sys.apply(&sys.iterate(&y, 3)), &sys.iterate(&z, 4));
        assert_eq!(tau.jump_positions(&sys), vec![Jump { index: 4, size: expected }]);
    }

    #[test]
    fn replace_segment_counts() {
        let sys = ShiftSystem::default();
        let p = zero();
        let q = zero().with_symbol(-9, 1);
        let xi = PseudoOrbit::new(0, blocks(vec![(p.clone(), 3), (q, 4)])).unwrap();
        assert_eq!(xi.jump_count(&sys), 1);
        let r = xi.replace_segment_with_orbit(&sys, 1, 5);
        // jump at 3 removed, new boundary at 6
        assert_eq!(r.jump_count(&sys), 1);
        assert_eq!(r.jump_positions(&sys)[0].index, 6);
        let pure = PseudoOrbit::orbit(p, 0);
        let replaced = pure.replace_segment_with_orbit(&sys, -2, 5);
        assert_eq!(replaced.jump_count(&sys), 0);
        let w = Window::around(0, 12);
        assert_eq!(replaced.entries(&sys, w), pure.entries(&sys, w));
    }

    #[test]
    fn replace_segment_with_small_jumps_respects_propagated_bound() {
        // ρ = 2^{-8} jumps, segment of length 5: the new boundary jump loses one
        // coordinate of agreement per step, so it stays <= 2^{-3}.
        let sys = ShiftSystem::default();
        let mut bl = Vec::new();
        let mut p = ShiftPoint::periodic(&[0, 1, 1]);
        for k in 0..6 {
            bl.push(Block { seed: p.clone(), len: 1 });
            let next = sys.apply(&p);
            p = next.with_symbol(if k % 2 == 0 { 9 } else { -9 }, 1 - next.symbol_at(9));
        }
        let xi = PseudoOrbit::new(0, bl).unwrap();
        assert!(xi.is_pseudo_orbit(&sys, &Distance::pow2(-8)));
        let r = xi.replace_segment_with_orbit(&sys, 0, 5);
        for j in r.jump_positions(&sys) {
            assert!(j.size <= Distance::pow2(-3));
        }
    }

    #[test]
    fn sup_distance_metric_definition() {
        let sys = ShiftSystem::default();
        let a = PseudoOrbit::orbit(zero(), 0);
        let b = PseudoOrbit::orbit(zero().with_symbol(3, 1), 0);
        assert_eq!(sup_distance(&sys, &a, &a, Window::around(0, 5)), Distance::zero());
        assert_eq!(sup_distance(&sys, &a, &b, Window::new(-2, 0).unwrap()), Distance::frac(1, 8));
    }

    #[test]
    fn text_round_trip() {
        let xi = PseudoOrbit::new(
            -4,
            blocks(vec![(ShiftPoint::periodic(&[0, 1]), 2), (zero().with_symbol(5, 1), 3)]),
        )
        .unwrap();
        let text = xi.to_text();
        assert!(text.starts_with("base -4\n"));
        let back = PseudoOrbit::<ShiftPoint>::parse_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert!(PseudoOrbit::<ShiftPoint>::parse_text("base 0\nL:0 C: R:0 O:0 0\n").is_err());
        assert!(PseudoOrbit::<ShiftPoint>::parse_text("L:0 C: R:0 O:0 1\n").is_err());
    }

    fn arb_point() -> impl Strategy<Value = ShiftPoint> {
        (
            prop::collection::vec(0u8..2, 1..3),
            prop::collection::vec(0u8..2, 0..6),
            prop::collection::vec(0u8..2, 1..3),
            -4i64..4,
        )
            .prop_map(|(l, c, r, o)| ShiftPoint::new(l, c, r, o).unwrap())
    }

    fn arb_orbit() -> impl Strategy<Value = PseudoOrbit<ShiftPoint>> {
        (-6i64..6, prop::collection::vec((arb_point(), 1u64..5), 1..5))
            .prop_map(|(base, v)| PseudoOrbit::new(base, blocks(v)).unwrap())
    }

    proptest! {
        #[test]
        fn entries_follow_the_map_off_jumps(xi in arb_orbit()) {
            let sys = ShiftSystem::default();
            let jumps: Vec<i64> = xi.jump_positions(&sys).iter().map(|j| j.index).collect();
            let w = Window::new(-15, 25).unwrap();
            let e = xi.entries(&sys, w);
            for (i, n) in w.indices().enumerate() {
                prop_assert_eq!(&e[i], &brute_entry(&sys, &xi, n));
                if i > 0 && !jumps.contains(&n) {
                    prop_assert_eq!(&e[i], &sys.apply(&e[i - 1]));
                }
                if i > 0 && jumps.contains(&n) {
                    prop_assert!(e[i] != sys.apply(&e[i - 1]));
                }
            }
        }

        #[test]
        fn shift_index_moves_jumps(xi in arb_orbit(), k in -7i64..7) {
            let sys = ShiftSystem::default();
            let moved: Vec<Jump> = xi.jump_positions(&sys).into_iter()
                .map(|j| Jump { index: j.index + k, size: j.size }).collect();
            prop_assert_eq!(xi.shift_index(k).jump_positions(&sys), moved);
        }

        #[test]
        fn splice_case_analysis(xi in arb_orbit(), eta in arb_orbit(), a in -10i64..15) {
            let sys = ShiftSystem::default();
            let s = PseudoOrbit::splice(&sys, &xi, &eta, a);
            for n in -20..25 {
                let expected = if n < a { xi.entry_at(&sys, n) } else { eta.entry_at(&sys, n) };
                prop_assert_eq!(s.entry_at(&sys, n), expected);
            }
            let before = xi.jump_positions(&sys).iter().filter(|j| j.index < a).count();
            let after = eta.jump_positions(&sys).iter().filter(|j| j.index > a).count();
            prop_assert!(s.jump_count(&sys) <= before + after + 1);
        }

        #[test]
        fn replace_segment_is_idempotent(xi in arb_orbit(), a in -8i64..8, len in 1u64..8) {
            let sys = ShiftSystem::default();
            let once = xi.replace_segment_with_orbit(&sys, a, len);
            let twice = once.replace_segment_with_orbit(&sys, a, len);
            let w = Window::new(-20, 25).unwrap();
            prop_assert_eq!(once.entries(&sys, w), twice.entries(&sys, w));
            for n in (a + 1)..(a + len as i64) {
                prop_assert!(once.jump_positions(&sys).iter().all(|j| j.index != n));
            }
        }

        #[test]
        fn sup_distance_symmetric(xi in arb_orbit(), eta in arb_orbit()) {
            let sys = ShiftSystem::default();
            let w = Window::new(-10, 10).unwrap();
            let d = sup_distance(&sys, &xi, &eta, w);
            prop_assert_eq!(&d, &sup_distance(&sys, &eta, &xi, w));
            let brute = w.indices()
                .map(|n| sys.dist(&xi.entry_at(&sys, n), &eta.entry_at(&sys, n)))
                .fold(Distance::zero(), Distance::max);
            prop_assert_eq!(&d, &brute);
            prop_assert_eq!(d.is_zero(), xi.entries(&sys, w) == eta.entries(&sys, w));
        }
    }
}
