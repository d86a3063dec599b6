//! The full shift on `m` symbols over eventually periodic points.

use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use super::{DynamicalSystem, PointToken, Side};
use crate::error::{ParseError, Result, ShadowError};
use crate::quadratic::Distance;

/// The bi-infinite sequence `...LLL C RRR...`.
///
/// Positions index the string with the core at `0..core.len()`; the left
/// period fills positions `-|L|..-1` (and repeats leftwards), the right
/// period starts at position `core.len()`. Coordinate `k` of the point is
/// the symbol at position `k + offset`.
#[derive(Clone, Debug)]
pub struct ShiftPoint {
    left: Vec<u8>,
    core: Vec<u8>,
    right: Vec<u8>,
    offset: i64,
}

fn primitive_root(word: &[u8]) -> Vec<u8> {
    let n = word.len();
    for p in 1..=n {
        if n.is_multiple_of(p) && (p..n).all(|i| word[i] == word[i % p]) {
            return word[..p].to_vec();
        }
    }
    word.to_vec()
}

impl ShiftPoint {
    pub fn new(left: Vec<u8>, core: Vec<u8>, right: Vec<u8>, offset: i64) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(ShadowError::Precondition("periodic words must be nonempty".into()));
        }
        Ok(Self::from_raw(left, core, right, offset))
    }

    fn from_raw(left: Vec<u8>, core: Vec<u8>, right: Vec<u8>, offset: i64) -> Self {
        let mut p = ShiftPoint { left, core, right, offset };
        p.normalize();
        p
    }

    /// The fixed point `s^∞`.
    pub fn constant(symbol: u8) -> Self {
        Self::from_raw(vec![symbol], vec![], vec![symbol], 0)
    }

    /// The periodic point `...www.www...` with `word[0]` at coordinate 0.
    pub fn periodic(word: &[u8]) -> Self {
        assert!(!word.is_empty());
        Self::from_raw(word.to_vec(), vec![], word.to_vec(), 0)
    }

    pub fn left_period(&self) -> &[u8] {
        &self.left
    }

    pub fn core(&self) -> &[u8] {
        &self.core
    }

    pub fn right_period(&self) -> &[u8] {
        &self.right
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// First coordinate of the core.
    pub fn core_start(&self) -> i64 {
        -self.offset
    }

    /// One past the last coordinate of the core.
    pub fn core_end(&self) -> i64 {
        self.core.len() as i64 - self.offset
    }

    pub fn symbol_at(&self, k: i64) -> u8 {
        let pos = k + self.offset;
        if pos < 0 {
            self.left[pos.rem_euclid(self.left.len() as i64) as usize]
        } else if (pos as usize) < self.core.len() {
            self.core[pos as usize]
        } else {
            let r = (pos - self.core.len() as i64) as usize % self.right.len();
            self.right[r]
        }
    }

    pub fn max_symbol(&self) -> u8 {
        self.left.iter().chain(&self.core).chain(&self.right).copied().max().unwrap_or(0)
    }

    /// `σ^n`: coordinate `k` of the result is coordinate `k + n` of `self`.
    pub fn shifted(&self, n: i64) -> Self {
        let mut p = self.clone();
        p.offset += n;
        p
    }

    /// Coordinates `< start` from `left_src`, `core` placed at `start..`,
    /// the rest from `right_src`.
    pub fn from_parts(left_src: &ShiftPoint, start: i64, core: &[u8], right_src: &ShiftPoint) -> Self {
        let end = start + core.len() as i64;
        let a = start.min(left_src.core_start());
        let b = end.max(right_src.core_end());
        let symbols: Vec<u8> = (a..b)
            .map(|k| {
                if k < start {
                    left_src.symbol_at(k)
                } else if k < end {
                    core[(k - start) as usize]
                } else {
                    right_src.symbol_at(k)
                }
            })
            .collect();
        let ll = left_src.left.len() as i64;
        let left = (0..ll).map(|i| left_src.symbol_at(a - ll + i)).collect();
        let right = (0..right_src.right.len() as i64).map(|i| right_src.symbol_at(b + i)).collect();
        Self::from_raw(left, symbols, right, -a)
    }

    /// Coordinates `< cut` from `left_src`, `>= cut` from `right_src`.
    pub fn glue(left_src: &ShiftPoint, right_src: &ShiftPoint, cut: i64) -> Self {
        Self::from_parts(left_src, cut, &[], right_src)
    }

    pub fn with_symbol(&self, k: i64, symbol: u8) -> Self {
        Self::from_parts(self, k, &[symbol], self)
    }

    fn normalize(&mut self) {
        self.left = primitive_root(&self.left);
        self.right = primitive_root(&self.right);
        // absorb core symbols that continue the left period
        while !self.core.is_empty() && self.core[0] == self.left[0] {
            self.core.remove(0);
            self.left.rotate_left(1);
            self.offset -= 1;
        }
        while let Some(&last) = self.core.last() {
            if last != *self.right.last().unwrap() {
                break;
            }
            self.core.pop();
            self.right.rotate_right(1);
        }
        // purely periodic: move the boundary to coordinate 0
        if self.core.is_empty() && self.left == self.right {
            let p = self.left.len() as i64;
            let r = self.offset.rem_euclid(p) as usize;
            self.left.rotate_left(r);
            self.right = self.left.clone();
            self.offset = 0;
        }
    }

    /// Coordinate range outside which both points are periodic with a common
    /// period, extended by one full common period on each side.
    fn comparison_range(&self, other: &ShiftPoint) -> (i64, i64) {
        let lp = (self.left.len() as i64).lcm(&(other.left.len() as i64));
        let rp = (self.right.len() as i64).lcm(&(other.right.len() as i64));
        let lo = self.core_start().min(other.core_start()) - lp;
        let hi = self.core_end().max(other.core_end()) + rp;
        (lo, hi)
    }

    /// Smallest `|k|` with differing symbols, or `None` when equal.
    pub fn first_difference(&self, other: &ShiftPoint) -> Option<u64> {
        let (lo, hi) = self.comparison_range(other);
        let reach = lo.unsigned_abs().max(hi.unsigned_abs());
        (0..=reach).find(|&r| {
            let r = r as i64;
            self.symbol_at(r) != other.symbol_at(r) || self.symbol_at(-r) != other.symbol_at(-r)
        })
    }

    /// Smallest differing coordinate `>= from`.
    pub fn difference_at_or_after(&self, other: &ShiftPoint, from: i64) -> Option<i64> {
        let (_, hi) = self.comparison_range(other);
        let rp = (self.right.len() as i64).lcm(&(other.right.len() as i64));
        let stop = hi.max(from + rp);
        (from..stop).find(|&k| self.symbol_at(k) != other.symbol_at(k))
    }

    /// Largest differing coordinate `<= from`.
    pub fn difference_at_or_before(&self, other: &ShiftPoint, from: i64) -> Option<i64> {
        let (lo, _) = self.comparison_range(other);
        let lp = (self.left.len() as i64).lcm(&(other.left.len() as i64));
        let stop = lo.min(from - lp);
        (stop..=from).rev().find(|&k| self.symbol_at(k) != other.symbol_at(k))
    }
}

impl PartialEq for ShiftPoint {
    fn eq(&self, other: &Self) -> bool {
        self.first_difference(other).is_none()
    }
}

impl Eq for ShiftPoint {}

fn word_to_string(w: &[u8]) -> String {
    w.iter().map(|&s| char::from_digit(s as u32, 16).unwrap()).collect()
}

fn parse_word(s: &str, text: &str) -> Result<Vec<u8>, ParseError> {
    s.chars()
        .map(|c| {
            c.to_digit(16)
                .map(|d| d as u8)
                .ok_or_else(|| ParseError::Point(text.into(), format!("bad symbol `{c}`")))
        })
        .collect()
}

impl fmt::Display for ShiftPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "L:{} C:{} R:{} O:{}",
            word_to_string(&self.left),
            word_to_string(&self.core),
            word_to_string(&self.right),
            self.offset
        )
    }
}

impl PointToken for ShiftPoint {
    fn to_token(&self) -> String {
        self.to_string()
    }

    /// `L:word C:word R:word O:int`, symbols as hexadecimal digits.
    fn parse_token(s: &str) -> Result<Self, ParseError> {
        let err = |m: &str| ParseError::Point(s.into(), m.into());
        let mut parts = [None, None, None, None];
        for tok in s.split_whitespace() {
            let (key, val) = tok.split_once(':').ok_or_else(|| err("expected key:value"))?;
            let slot = match key {
                "L" => 0,
                "C" => 1,
                "R" => 2,
                "O" => 3,
                _ => return Err(err("unknown key")),
            };
            parts[slot] = Some(val);
        }
        let [Some(l), Some(c), Some(r), Some(o)] = parts else {
            return Err(err("missing field"));
        };
        let offset: i64 = o.parse().map_err(|_| err("bad offset"))?;
        let (left, core, right) = (parse_word(l, s)?, parse_word(c, s)?, parse_word(r, s)?);
        if left.is_empty() || right.is_empty() {
            return Err(err("periodic words must be nonempty"));
        }
        Ok(ShiftPoint::from_raw(left, core, right, offset))
    }
}

/// The full shift `σ` on `alphabet` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftSystem {
    alphabet: u8,
}

impl Default for ShiftSystem {
    fn default() -> Self {
        ShiftSystem { alphabet: 2 }
    }
}

impl ShiftSystem {
    pub fn new(alphabet: u8) -> Result<Self> {
        if !(2..=16).contains(&alphabet) {
            return Err(ShadowError::Precondition(format!(
                "alphabet size must be in 2..=16, got {alphabet}"
            )));
        }
        Ok(ShiftSystem { alphabet })
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn contains(&self, p: &ShiftPoint) -> bool {
        p.max_symbol() < self.alphabet
    }

    /// Largest power of two not exceeding `x` (capped at 1).
    pub fn dyadic_floor(x: &Distance) -> Distance {
        let mut e = 0;
        while Distance::pow2(-e) > *x {
            e += 1;
        }
        Distance::pow2(-e)
    }
}

impl DynamicalSystem for ShiftSystem {
    type Point = ShiftPoint;

    fn name(&self) -> String {
        format!("shift({})", self.alphabet)
    }

    fn apply(&self, p: &ShiftPoint) -> ShiftPoint {
        p.shifted(1)
    }

    fn apply_inv(&self, p: &ShiftPoint) -> ShiftPoint {
        p.shifted(-1)
    }

    fn iterate(&self, p: &ShiftPoint, n: i64) -> ShiftPoint {
        p.shifted(n)
    }

    fn dist(&self, p: &ShiftPoint, q: &ShiftPoint) -> Distance {
        match p.first_difference(q) {
            Some(k) => Distance::pow2(-(k as i64)),
            None => Distance::zero(),
        }
    }

    fn alpha(&self) -> Distance {
        Distance::frac(1, 2)
    }

    fn alpha_provenance(&self) -> String {
        "exhaustion: distance <= 1/2 at every time forces equality of every coordinate".into()
    }

    fn lipschitz(&self) -> u32 {
        2
    }

    fn diameter(&self) -> Distance {
        Distance::integer(1)
    }

    /// Jumps below 1/2 agree on coordinates `|k| <= 1`, which keeps the glued
    /// point within 1/4 of the bi-sequence at every time.
    fn one_jump_threshold(&self) -> Distance {
        Distance::frac(1, 2)
    }

    fn one_jump_shadow(&self, x: &ShiftPoint, y: &ShiftPoint) -> Result<ShiftPoint> {
        Ok(ShiftPoint::glue(y, x, 0))
    }

    fn tail_bound(&self, a: &ShiftPoint, b: &ShiftPoint, side: Side) -> Option<Distance> {
        let bound = match side {
            Side::Right => {
                if a.difference_at_or_after(b, 1).is_some() {
                    Distance::integer(1)
                } else {
                    match a.difference_at_or_before(b, 0) {
                        Some(j) => Distance::pow2(-(1 - j)),
                        None => Distance::zero(),
                    }
                }
            }
            Side::Left => {
                if a.difference_at_or_before(b, -1).is_some() {
                    Distance::integer(1)
                } else {
                    match a.difference_at_or_after(b, 0) {
                        Some(j) => Distance::pow2(-(j + 1)),
                        None => Distance::zero(),
                    }
                }
            }
        };
        Some(bound)
    }

    /// Two `2^{-m}`-pseudo-orbits with equal 0-coordinates at every time
    /// agree on coordinates `-m..=m+1`, so they stay within `2^{-(m+1)}`.
    fn semiexp_delta(&self, eps: &Distance) -> Distance {
        Self::dyadic_floor(eps)
    }

    fn uniform_radius(&self, eps: &Distance) -> u32 {
        let mut n = 0;
        while Distance::pow2(-(n as i64)) > *eps {
            n += 1;
        }
        n
    }

    fn segment_rho(&self, delta: &Distance, n: u32) -> Distance {
        delta * &Distance::pow2(-(2 * n as i64 + 1))
    }

    fn format_distance(&self, d: &Distance) -> String {
        d.to_fraction_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(l: &str, c: &str, r: &str, o: i64) -> ShiftPoint {
        ShiftPoint::parse_token(&format!("L:{l} C:{c} R:{r} O:{o}")).unwrap()
    }

    /// Brute-force coordinate window used as an oracle.
    fn coords(p: &ShiftPoint, lo: i64, hi: i64) -> Vec<u8> {
        (lo..=hi).map(|k| p.symbol_at(k)).collect()
    }

    #[test]
    fn fixed_point_and_period_two() {
        let s = ShiftSystem::default();
        let zero = ShiftPoint::constant(0);
        assert_eq!(s.apply(&zero), zero);
        let p = ShiftPoint::periodic(&[0, 1]);
        assert_ne!(s.apply(&p), p);
        assert_eq!(s.apply(&s.apply(&p)), p);
    }

    #[test]
    fn metric_first_difference() {
        let s = ShiftSystem::default();
        let zero = ShiftPoint::constant(0);
        assert_eq!(s.dist(&zero, &zero), Distance::zero());
        assert_eq!(s.dist(&zero, &zero.with_symbol(3, 1)), Distance::frac(1, 8));
        assert_eq!(s.dist(&zero, &zero.with_symbol(-3, 1)), Distance::frac(1, 8));
        assert_eq!(s.dist(&zero, &zero.with_symbol(0, 1)), Distance::integer(1));
    }

    #[test]
    fn periods_two_and_three_compared_beyond_core() {
        // Both equal the core `1` at coordinate 0, tails (01)^∞ vs (011)^∞.
        let s = ShiftSystem::default();
        let p = pt("0", "1", "01", 0);
        let q = pt("0", "1", "011", 0);
        // coordinates 1.. : 0101.. vs 0110..: first difference at coordinate 3
        assert_eq!(coords(&p, 1, 4), vec![0, 1, 0, 1]);
        assert_eq!(coords(&q, 1, 4), vec![0, 1, 1, 0]);
        assert_eq!(s.dist(&p, &q), Distance::frac(1, 8));
        // (01)^∞ vs (0101)^∞ written with a longer period are equal
        let r = pt("0", "1", "0101", 0);
        assert_eq!(s.dist(&p, &r), Distance::zero());
    }

    #[test]
    fn normalization_keeps_the_sequence() {
        let raw = ShiftPoint { left: vec![0, 1, 0, 1], core: vec![0, 1, 1, 1], right: vec![1, 1], offset: 2 };
        let norm = ShiftPoint::from_raw(raw.left.clone(), raw.core.clone(), raw.right.clone(), 2);
        assert_eq!(coords(&raw, -20, 20), coords(&norm, -20, 20));
        assert_eq!(norm.left_period().len(), 2);
        assert_eq!(norm.right_period(), &[1]);
        assert!(norm.core().len() < raw.core.len());
    }

    #[test]
    fn glue_splits_at_zero() {
        let s = ShiftSystem::default();
        let x = ShiftPoint::constant(0);
        // y: 1 at every coordinate <= -2, 0 elsewhere
        let y = ShiftPoint::glue(&ShiftPoint::constant(1), &x, -1);
        assert!(s.dist(&x, &y) <= Distance::frac(1, 2));
        let z = s.one_jump_shadow(&x, &y).unwrap();
        assert_eq!(coords(&z, -6, 6), coords(&y, -6, 6));
        for k in -10..-1 {
            assert_eq!(z.symbol_at(k), 1);
        }
        for k in -1..10 {
            assert_eq!(z.symbol_at(k), 0);
        }
        // error at time 0 is d(z, x): first difference at coordinate -2
        assert_eq!(s.dist(&z, &x), Distance::frac(1, 4));
    }

    #[test]
    fn tail_bound_exact() {
        let s = ShiftSystem::default();
        let zero = ShiftPoint::constant(0);
        let a = zero.with_symbol(-2, 1);
        // right tail: only difference at -2, so sup at k = 1 is 2^{-3}
        assert_eq!(s.tail_bound(&a, &zero, Side::Right), Some(Distance::frac(1, 8)));
        assert_eq!(s.tail_bound(&a, &zero, Side::Left), Some(Distance::integer(1)));
        assert_eq!(s.tail_bound(&zero, &zero, Side::Left), Some(Distance::zero()));
        // brute force the right tail over a long range
        let brute = (1..200)
            .map(|k| s.dist(&a.shifted(k), &zero.shifted(k)))
            .max()
            .unwrap();
        assert_eq!(brute, Distance::frac(1, 8));
    }

    #[test]
    fn constants_formulas() {
        let s = ShiftSystem::default();
        assert_eq!(s.semiexp_delta(&Distance::pow2(-5)), Distance::pow2(-5));
        assert_eq!(s.semiexp_delta(&Distance::frac(3, 100)), Distance::pow2(-6));
        assert_eq!(s.uniform_radius(&Distance::frac(1, 4)), 2);
        assert_eq!(s.uniform_radius(&Distance::integer(1)), 0);
        assert_eq!(s.segment_rho(&Distance::pow2(-5), 2), Distance::pow2(-10));
    }

    #[test]
    fn token_round_trip_is_lossless() {
        let p = pt("01", "1101", "0", -3);
        let q = ShiftPoint::parse_token(&p.to_token()).unwrap();
        assert_eq!(p.to_token(), q.to_token());
        assert!(ShiftPoint::parse_token("L: C:1 R:0 O:0").is_err());
        assert!(ShiftPoint::parse_token("L:0 C:1 R:0").is_err());
    }

    fn arb_point() -> impl Strategy<Value = ShiftPoint> {
        (
            prop::collection::vec(0u8..2, 1..4),
            prop::collection::vec(0u8..2, 0..7),
            prop::collection::vec(0u8..2, 1..4),
            -6i64..6,
        )
            .prop_map(|(l, c, r, o)| ShiftPoint::new(l, c, r, o).unwrap())
    }

    proptest! {
        #[test]
        fn inverse_is_exact(p in arb_point(), n in -20i64..20) {
            let s = ShiftSystem::default();
            prop_assert_eq!(s.apply_inv(&s.apply(&p)), p.clone());
            prop_assert_eq!(s.iterate(&s.iterate(&p, n), -n), p);
        }

        #[test]
        fn metric_matches_brute_force(p in arb_point(), q in arb_point()) {
            let s = ShiftSystem::default();
            let brute = (0..64i64)
                .find(|&k| p.symbol_at(k) != q.symbol_at(k) || p.symbol_at(-k) != q.symbol_at(-k))
                .map(|k| Distance::pow2(-k))
                .unwrap_or_else(Distance::zero);
            prop_assert_eq!(s.dist(&p, &q), brute);
            prop_assert_eq!(s.dist(&p, &q), s.dist(&q, &p));
        }

        #[test]
        fn ultrametric_and_lipschitz(p in arb_point(), q in arb_point(), r in arb_point()) {
            let s = ShiftSystem::default();
            let (pq, qr, pr) = (s.dist(&p, &q), s.dist(&q, &r), s.dist(&p, &r));
            prop_assert!(pr <= pq.clone().max(qr));
            let two = Distance::integer(2);
            prop_assert!(s.dist(&s.apply(&p), &s.apply(&q)) <= &two * &pq);
            prop_assert!(s.dist(&s.apply_inv(&p), &s.apply_inv(&q)) <= &two * &pq);
        }

        #[test]
        fn from_parts_matches_case_analysis(p in arb_point(), q in arb_point(), start in -8i64..8,
                                            core in prop::collection::vec(0u8..2, 0..4)) {
            let g = ShiftPoint::from_parts(&p, start, &core, &q);
            let end = start + core.len() as i64;
            for k in -40..40 {
                let expected = if k < start { p.symbol_at(k) }
                    else if k < end { core[(k - start) as usize] }
                    else { q.symbol_at(k) };
                prop_assert_eq!(g.symbol_at(k), expected);
            }
        }
    }
}
