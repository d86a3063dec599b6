//! The constant chain of the gluing construction and its validation.
//!
//! [`derive_constants`] produces, for a target `ε`:
//!
//! - `α`: the system's certified expansivity constant,
//! - `δ`: the minimum of the one-jump threshold, the semi-expansivity
//!   threshold for `α/2`, `α` itself and the semi-expansivity threshold for
//!   `ε`,
//! - `N`: the uniform expansivity radius for `δ`,
//! - `ρ`: the step bound under which every `(2N+2)`-segment is
//!   `δ`-shadowed by its first point.
//!
//! Every entry carries a provenance record. Nothing here is trusted by the
//! shadowing code: each condition is re-checked when it is used.

mod alpha;
mod falsify;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Result, ShadowError};
use crate::orbit::{PseudoOrbit, Window};
use crate::quadratic::Distance;
use crate::systems::{DynamicalSystem, Side};

pub use alpha::{alpha_certify_toral, shipped_toral_alpha, AlphaCertificate};
pub use falsify::{
    semiexp_falsify, shift_uniform_exhaustion, uniform_audit, FalsifyOutcome, UniformAudit, UniformExhaustion,
    Witness,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Input,
    Formula,
    Exhaustion,
    Sweep,
    Minimum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub method: Method,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedConstants {
    pub epsilon: Distance,
    pub alpha: Distance,
    pub delta: Distance,
    pub n: u32,
    pub rho: Distance,
    /// One-jump shadowing threshold of the system.
    pub one_jump_delta: Distance,
    /// Semi-expansivity threshold for `α/2`.
    pub sharpen_delta: Distance,
    /// Semi-expansivity threshold for `ε`.
    pub target_delta: Distance,
    pub provenance: BTreeMap<&'static str, Provenance>,
}

fn positive(eps: &Distance, what: &str) -> Result<()> {
    if eps.is_positive() {
        Ok(())
    } else {
        Err(ShadowError::Precondition(format!("{what} must be positive, got {eps}")))
    }
}

/// Threshold `δ(ε)`: `δ`-pseudo-orbits that stay `α`-close stay `ε`-close.
pub fn delta_semiexp<S: DynamicalSystem>(sys: &S, eps: &Distance) -> Result<Distance> {
    positive(eps, "epsilon")?;
    Ok(sys.semiexp_delta(eps))
}

/// Radius `N(ε)`: `α`-closeness of true orbits on `|n| <= N` forces `d < ε`.
pub fn uniform_n<S: DynamicalSystem>(sys: &S, eps: &Distance) -> Result<u32> {
    positive(eps, "epsilon")?;
    Ok(sys.uniform_radius(eps))
}

pub fn rho_for<S: DynamicalSystem>(sys: &S, delta: &Distance, n: u32) -> Result<Distance> {
    positive(delta, "delta")?;
    Ok(sys.segment_rho(delta, n))
}

pub fn derive_constants<S: DynamicalSystem>(sys: &S, eps: &Distance) -> Result<CertifiedConstants> {
    positive(eps, "epsilon")?;
    let alpha = sys.alpha();
    let half_alpha = &alpha / &Distance::integer(2);
    let one_jump_delta = sys.one_jump_threshold();
    let sharpen_delta = delta_semiexp(sys, &half_alpha)?;
    let target_delta = delta_semiexp(sys, eps)?;
    let delta = one_jump_delta
        .clone()
        .min(sharpen_delta.clone())
        .min(alpha.clone())
        .min(target_delta.clone());
    let n = uniform_n(sys, &delta)?;
    let rho = rho_for(sys, &delta, n)?;

    let mut provenance = BTreeMap::new();
    provenance.insert("epsilon", Provenance { method: Method::Input, detail: "target shadowing distance".into() });
    let alpha_method = if sys.alpha_provenance().starts_with("sweep") {
        Method::Sweep
    } else {
        Method::Exhaustion
    };
    provenance.insert("alpha", Provenance { method: alpha_method, detail: sys.alpha_provenance() });
    provenance.insert(
        "delta",
        Provenance {
            method: Method::Minimum,
            detail: format!(
                "min(one-jump threshold {}, semi-expansivity delta(alpha/2) {}, alpha {}, semi-expansivity delta(epsilon) {})",
                sys.format_distance(&one_jump_delta),
                sys.format_distance(&sharpen_delta),
                sys.format_distance(&alpha),
                sys.format_distance(&target_delta)
            ),
        },
    );
    provenance.insert(
        "n",
        Provenance { method: Method::Formula, detail: format!("uniform expansivity radius for delta on {}", sys.name()) },
    );
    provenance.insert(
        "rho",
        Provenance {
            method: Method::Formula,
            detail: format!("segment step bound for delta, N = {n}, Lipschitz constant {}", sys.lipschitz()),
        },
    );
    let c = CertifiedConstants {
        epsilon: eps.clone(),
        alpha,
        delta,
        n,
        rho,
        one_jump_delta,
        sharpen_delta,
        target_delta,
        provenance,
    };
    c.check_invariants()?;
    Ok(c)
}

impl CertifiedConstants {
    /// `0 < ρ <= δ <= α` and a provenance record for every field.
    pub fn check_invariants(&self) -> Result<()> {
        let ok = self.rho.is_positive()
            && self.rho <= self.delta
            && self.delta <= self.alpha
            && self.delta <= self.target_delta
            && ["epsilon", "alpha", "delta", "n", "rho"].iter().all(|k| self.provenance.contains_key(k));
        if ok {
            Ok(())
        } else {
            Err(ShadowError::ConstantsViolation {
                condition: "ordering".into(),
                depth: 0,
                detail: "expected 0 < rho <= delta <= alpha".into(),
            })
        }
    }

    pub fn to_json<S: DynamicalSystem>(&self, sys: &S) -> Value {
        let v = |d: &Distance| json!({ "exact": sys.format_distance(d), "decimal": d.to_f64() });
        json!({
            "system": sys.name(),
            "epsilon": v(&self.epsilon),
            "alpha": v(&self.alpha),
            "delta": v(&self.delta),
            "n": self.n,
            "rho": v(&self.rho),
            "components": {
                "one_jump_delta": v(&self.one_jump_delta),
                "sharpen_delta": v(&self.sharpen_delta),
                "target_delta": v(&self.target_delta),
            },
            "provenance": self.provenance,
        })
    }
}

/// Window containing every block boundary of both pseudo-orbits, padded by
/// `margin` on each side, with all boundaries strictly right of `lo`.
pub fn covering_window<P: Clone + PartialEq>(xi: &PseudoOrbit<P>, eta: &PseudoOrbit<P>, margin: u64) -> Window {
    let w = xi.boundary_window().hull(&eta.boundary_window());
    Window { lo: w.lo - 1 - margin as i64, hi: w.hi + margin as i64 }
}

/// Sup over all times of `d(ξ_n, η_n)`, split into window and tail parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupEvidence {
    pub window: Window,
    pub window_sup: Distance,
    /// Index in the window where `window_sup` is first attained.
    pub argmax: i64,
    pub left_tail: Option<Distance>,
    pub right_tail: Option<Distance>,
}

impl SupEvidence {
    /// Upper bound over every integer index, `None` if a tail is unbounded.
    pub fn total(&self) -> Option<Distance> {
        Some(self.window_sup.clone().max(self.left_tail.clone()?).max(self.right_tail.clone()?))
    }
}

/// Bounds `sup_n d(ξ_n, η_n)` over all `n`: exactly on `w` (enlarged to
/// cover every boundary) and through tail certificates beyond it.
pub fn sup_all_time<S: DynamicalSystem>(
    sys: &S,
    xi: &PseudoOrbit<S::Point>,
    eta: &PseudoOrbit<S::Point>,
    w: Window,
) -> SupEvidence {
    let w = w.hull(&covering_window(xi, eta, 0));
    let a = xi.entries(sys, w);
    let b = eta.entries(sys, w);
    let mut window_sup = Distance::zero();
    let mut argmax = w.lo;
    for (n, (p, q)) in w.indices().zip(a.iter().zip(b.iter())) {
        let d = sys.dist(p, q);
        if d > window_sup {
            window_sup = d;
            argmax = n;
        }
    }
    let left_tail = sys.tail_bound(&a[0], &b[0], Side::Left);
    let right_tail = sys.tail_bound(a.last().unwrap(), b.last().unwrap(), Side::Right);
    SupEvidence { window: w, window_sup, argmax, left_tail, right_tail }
}

/// Result of [`certify_tail_equal_orbit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailCheck {
    pub certified: bool,
    pub sup: Option<Distance>,
    /// First step beyond the window edge at which the separation provably
    /// exceeds the bound, when the tail is not certified.
    pub horizon: Option<u32>,
}

/// Certifies `d(ξ_n, η_n) <= bound` for every `n` beyond `w` on `side`.
/// Both pseudo-orbits must be true orbits beyond the window.
pub fn certify_tail_equal_orbit<S: DynamicalSystem>(
    sys: &S,
    xi: &PseudoOrbit<S::Point>,
    eta: &PseudoOrbit<S::Point>,
    bound: &Distance,
    side: Side,
    w: Window,
) -> Result<TailCheck> {
    let cover = covering_window(xi, eta, 0);
    let edge = match side {
        Side::Left if w.lo <= cover.lo => w.lo,
        Side::Right if w.hi >= cover.hi => w.hi,
        _ => {
            return Err(ShadowError::Precondition(format!(
                "{} tail beyond [{}, {}] contains jumps",
                side.as_str(),
                w.lo,
                w.hi
            )))
        }
    };
    let a = xi.entry_at(sys, edge);
    let b = eta.entry_at(sys, edge);
    let sup = sys.tail_bound(&a, &b, side);
    let certified = sup.as_ref().is_some_and(|s| s <= bound);
    let horizon = if certified { None } else { sys.escape_horizon(&a, &b, side, bound) };
    Ok(TailCheck { certified, sup, horizon })
}

/// Outcome of [`sharpen_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharpenOutcome {
    pub holds: bool,
    pub sup: Option<Distance>,
    /// First index at which `d >= α/2`, if the check fails inside the window.
    pub violating_index: Option<i64>,
    /// Both inputs are `δ`-pseudo-orbits and stay within `α` of each other.
    pub preconditions_met: bool,
}

/// Verifies that `η` stays strictly within `α/2` of `ξ` at every time.
pub fn sharpen_check<S: DynamicalSystem>(
    sys: &S,
    constants: &CertifiedConstants,
    xi: &PseudoOrbit<S::Point>,
    eta: &PseudoOrbit<S::Point>,
    w: Window,
) -> SharpenOutcome {
    let half = &constants.alpha / &Distance::integer(2);
    let ev = sup_all_time(sys, xi, eta, w);
    let total = ev.total();
    let preconditions_met = xi.is_pseudo_orbit(sys, &constants.delta)
        && eta.is_pseudo_orbit(sys, &constants.delta)
        && total.as_ref().is_some_and(|t| *t <= constants.alpha);
    let holds = total.as_ref().is_some_and(|t| *t < half);
    let violating_index = if holds {
        None
    } else {
        let a = xi.entries(sys, ev.window);
        let b = eta.entries(sys, ev.window);
        ev.window.indices().zip(a.iter().zip(b.iter())).find(|(_, (p, q))| sys.dist(p, q) >= half).map(|(n, _)| n)
    };
    SharpenOutcome { holds, sup: total, violating_index, preconditions_met }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::Block;
    use crate::systems::{ShiftPoint, ShiftSystem, ToralSystem};

    #[test]
    fn shift_chain_for_target_two_to_minus_six() {
        let sys = ShiftSystem::default();
        let c = derive_constants(&sys, &Distance::pow2(-6)).unwrap();
        assert_eq!(c.alpha, Distance::frac(1, 2));
        assert_eq!(c.delta, Distance::pow2(-6));
        assert_eq!(c.n, 6);
        assert_eq!(c.rho, Distance::pow2(-19));
        assert!(c.rho <= c.delta && c.delta <= c.alpha);
        assert_eq!(c.provenance["alpha"].method, Method::Exhaustion);
    }

    #[test]
    fn nonpositive_epsilon_rejected() {
        let sys = ShiftSystem::default();
        assert!(delta_semiexp(&sys, &Distance::zero()).is_err());
        assert!(uniform_n(&sys, &Distance::frac(-1, 2)).is_err());
        assert!(derive_constants(&sys, &Distance::zero()).is_err());
    }

    #[test]
    fn shift_examples() {
        let sys = ShiftSystem::default();
        assert_eq!(delta_semiexp(&sys, &Distance::pow2(-5)).unwrap(), Distance::pow2(-5));
        assert_eq!(uniform_n(&sys, &Distance::frac(1, 4)).unwrap(), 2);
        assert_eq!(uniform_n(&sys, &Distance::integer(1)).unwrap(), 0);
        assert_eq!(rho_for(&sys, &Distance::pow2(-5), 2).unwrap(), Distance::pow2(-10));
    }

    #[test]
    fn toral_chain_orders() {
        let sys = ToralSystem::new();
        let c = derive_constants(&sys, &Distance::frac(1, 64)).unwrap();
        assert_eq!(c.alpha, Distance::frac(1, 8));
        assert!(c.rho <= c.delta && c.delta <= c.alpha);
        assert_eq!(c.delta, c.target_delta);
        assert_eq!(c.provenance["alpha"].method, Method::Sweep);
        let rho = rho_for(&sys, &Distance::frac(1, 128), 3).unwrap();
        assert_eq!(rho, &Distance::frac(1, 128) * &Distance::frac(2, 6560));
    }

    #[test]
    fn monotone_in_epsilon() {
        let shift = ShiftSystem::default();
        let toral = ToralSystem::new();
        let eps: Vec<Distance> = (1..14).map(|k| Distance::frac(1, 3 * k)).collect();
        for w in eps.windows(2) {
            let (big, small) = (&w[0], &w[1]);
            assert!(delta_semiexp(&shift, small).unwrap() <= delta_semiexp(&shift, big).unwrap());
            assert!(uniform_n(&shift, small).unwrap() >= uniform_n(&shift, big).unwrap());
            assert!(delta_semiexp(&toral, small).unwrap() <= delta_semiexp(&toral, big).unwrap());
            assert!(uniform_n(&toral, small).unwrap() >= uniform_n(&toral, big).unwrap());
        }
    }

    #[test]
    fn sharpen_identity_and_corruption() {
        let sys = ShiftSystem::default();
        let c = derive_constants(&sys, &Distance::pow2(-6)).unwrap();
        let xi = PseudoOrbit::orbit(ShiftPoint::periodic(&[0, 1, 1]), 0);
        let w = Window::around(0, 10);
        assert!(sharpen_check(&sys, &c, &xi, &xi, w).holds);
        // entry 3 pushed to distance 1/4 = α/2
        let p3 = xi.entry_at(&sys, 3);
        let bad = p3.with_symbol(2, 1 - p3.symbol_at(2));
        let eta = PseudoOrbit::splice(&sys, &PseudoOrbit::splice(&sys, &xi, &PseudoOrbit::orbit(bad, 3), 3), &xi, 4);
        let out = sharpen_check(&sys, &c, &xi, &eta, w);
        assert!(!out.holds);
        assert_eq!(out.violating_index, Some(3));
    }

    #[test]
    fn tail_certification() {
        let sys = ToralSystem::new();
        let x = crate::systems::ToralPoint::new(Distance::frac(1, 5), Distance::frac(2, 7));
        let xi = PseudoOrbit::orbit(x.clone(), 0);
        let w = Window::around(0, 3);
        let same = certify_tail_equal_orbit(&sys, &xi, &xi, &Distance::pow2(-30), Side::Right, w).unwrap();
        assert!(same.certified);
        // unstable offset: escapes
        let u = crate::systems::toral::Vec2::new(Distance::frac(1, 1000), Distance::frac(1, 1000))
            .split()
            .1;
        let eta = PseudoOrbit::orbit(x.translate(&u), 0);
        let out = certify_tail_equal_orbit(&sys, &xi, &eta, &Distance::frac(1, 100), Side::Right, w).unwrap();
        assert!(!out.certified);
        assert!(out.horizon.is_some());
        let left = certify_tail_equal_orbit(&sys, &xi, &eta, &Distance::frac(1, 100), Side::Left, w).unwrap();
        assert!(left.certified);
        // jumps beyond the window are rejected
        let jumpy = PseudoOrbit::new(
            0,
            vec![Block { seed: x.clone(), len: 9 }, Block { seed: x.clone(), len: 1 }],
        )
        .unwrap();
        assert!(certify_tail_equal_orbit(&sys, &jumpy, &xi, &Distance::frac(1, 2), Side::Right, w).is_err());
    }
}
