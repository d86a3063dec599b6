//! Closed-form shadows used as independent oracles.
//!
//! On the shift the shadow reads coordinate 0 along the pseudo-orbit. On
//! the torus the lifted errors `d_n = T^n w − x_n` satisfy
//! `d_{n+1} = A d_n − e_{n+1}`, where `e_j` is the lifted jump into index
//! `j`, and the unique bounded solution has
//!
//! `d_0 = Σ_{j >= 1} λ^{-j} e_j^u − Σ_{j <= 0} λ^{j} e_j^s`.

use num_traits::Zero;

use crate::error::{Result, ShadowError};
use crate::orbit::{PseudoOrbit, Window};
use crate::quadratic::Distance;
use crate::systems::toral::{lambda, lambda_inv, projection_constant, Vec2};
use crate::systems::{DynamicalSystem, ShiftPoint, ShiftSystem, ToralPoint, ToralSystem};

use super::{ShadowCertificate, ShadowMethod};

/// The point whose coordinate `k` is coordinate 0 of `ξ_k`.
pub fn diagonal_point(xi: &PseudoOrbit<ShiftPoint>) -> ShiftPoint {
    let blocks = xi.blocks();
    let starts = xi.starts();
    let first = &blocks[0];
    let last = &blocks[blocks.len() - 1];
    let left_src = first.seed.shifted(-xi.base());
    let right_src = last.seed.shifted(-starts[starts.len() - 1]);
    if blocks.len() == 1 {
        return left_src;
    }
    let core: Vec<u8> = blocks[1..blocks.len() - 1]
        .iter()
        .flat_map(|b| (0..b.len as i64).map(|j| b.seed.symbol_at(j)))
        .collect();
    ShiftPoint::from_parts(&left_src, starts[1], &core, &right_src)
}

/// Diagonal shadow of a shift pseudo-orbit with jumps below `1/2`.
pub fn direct_shadow_shift(
    sys: &ShiftSystem,
    xi: &PseudoOrbit<ShiftPoint>,
    epsilon: &Distance,
    window: Window,
) -> Result<ShadowCertificate<ShiftPoint>> {
    let max = xi.max_jump(sys);
    if max >= Distance::frac(1, 2) {
        return Err(ShadowError::Precondition(format!("jump of size {max} is not below 1/2")));
    }
    let w = diagonal_point(xi);
    ShadowCertificate::build(sys, ShadowMethod::DirectShift, w, xi.clone(), epsilon.clone(), window)
}

/// Bounded solution of the toral error recurrence.
pub fn direct_shadow_toral(
    sys: &ToralSystem,
    xi: &PseudoOrbit<ToralPoint>,
    epsilon: &Distance,
    window: Window,
) -> Result<ShadowCertificate<ToralPoint>> {
    let mut du = Vec2::zero();
    let mut ds = Vec2::zero();
    let mut total = Distance::zero();
    for j in xi.boundaries() {
        let e = xi.entry_at(sys, j).lift_difference(&sys.apply(&xi.entry_at(sys, j - 1)));
        total = &total + &e.sup_norm();
        let (es, eu) = e.split();
        if j >= 1 {
            du = &du + &eu.scale(&lambda_inv().pow(j));
        } else {
            ds = &ds - &es.scale(&lambda().pow(j));
        }
    }
    // every |d_n| is at most C_p Σ|e_j| (1 + 1/(λ − 1)) on each eigenline
    let geometric = &lambda() / &(&lambda() - &Distance::integer(1));
    let bound = &(&Distance::integer(2) * &projection_constant()) * &(&total * &geometric);
    if bound > Distance::frac(1, 6) {
        return Err(ShadowError::Regime(format!(
            "accumulated error bound {} exceeds 1/6",
            sys.format_distance(&bound)
        )));
    }
    let w = xi.entry_at(sys, 0).translate(&(&du + &ds));
    ShadowCertificate::build(sys, ShadowMethod::DirectToral, w, xi.clone(), epsilon.clone(), window)
}
