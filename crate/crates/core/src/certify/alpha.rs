//! Expansivity constant of the cat map.
//!
//! For `α < 1/4` two orbits that stay `α`-close have lifted differences
//! `v_n` with `v_{n+1} = A v_n` exactly, because `A v_n - v_{n+1}` is an
//! integer vector of sup norm at most `4α < 1`. So it suffices to show that
//! no nonzero `v` has `‖A^n v‖ <= α` for every `n`.
//!
//! Since `‖A^{±1} v‖ <= 3‖v‖`, any nonzero orbit that ever exceeds `α/3`
//! first does so inside the annulus `α/3 < ‖v‖ <= α`, and every nonzero
//! orbit does exceed it. The sweep covers the annulus by a `grid × grid`
//! mesh of closed squares and, for each square, finds `|n| <= horizon` and a
//! coordinate on which `A^n` maps all four corners to the same side of
//! `±α`. A linear functional keeps its sign on a square iff it keeps it on
//! the corners, so this shows the whole square leaves the `α`-ball.
//!
//! In units of the mesh step `2α/grid` every quantity is an integer and `α`
//! drops out, so the sweep is exact.

use std::sync::OnceLock;

use crate::error::{Result, ShadowError};
use crate::quadratic::Distance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaCertificate {
    pub alpha: Distance,
    pub certified: bool,
    pub grid: u32,
    pub horizon: u32,
    /// Largest `|n|` needed by any square.
    pub horizon_used: u32,
    pub cells_checked: usize,
    /// First square (lower-left corner in mesh units) left uncertified.
    pub failed_cell: Option<(i64, i64)>,
}

impl AlphaCertificate {
    pub fn provenance(&self) -> String {
        format!(
            "sweep: {} annulus cells on a {}x{} grid certified within |n| <= {} (linear regime 4*alpha < 1)",
            self.cells_checked, self.grid, self.grid, self.horizon_used
        )
    }
}

fn integer_power(n: i64) -> [[i128; 2]; 2] {
    let (step, k) = if n >= 0 { ([[2, 1], [1, 1]], n) } else { ([[1, -1], [-1, 2]], -n) };
    let mut m = [[1i128, 0], [0, 1]];
    for _ in 0..k {
        m = [
            [m[0][0] * step[0][0] + m[0][1] * step[1][0], m[0][0] * step[0][1] + m[0][1] * step[1][1]],
            [m[1][0] * step[0][0] + m[1][1] * step[1][0], m[1][0] * step[0][1] + m[1][1] * step[1][1]],
        ];
    }
    m
}

/// Square `[i, i+1] × [j, j+1]` (mesh units) provably leaves the ball of
/// radius `half` under `m`.
fn square_escapes(m: &[[i128; 2]; 2], i: i64, j: i64, half: i128) -> bool {
    let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
    m.iter().any(|row| {
        let vals = corners.map(|(a, b)| row[0] * a as i128 + row[1] * b as i128);
        vals.iter().all(|&v| v > half) || vals.iter().all(|&v| v < -half)
    })
}

/// Certifies `candidate` as an expansivity constant for the cat map.
///
/// Returns a certificate with `certified == false` when the sweep cannot
/// cover some square within `horizon` steps; errors only on a candidate
/// outside `(0, 1/6]`.
pub fn alpha_certify_toral(candidate: &Distance, horizon: u32, grid: u32) -> Result<AlphaCertificate> {
    if !candidate.is_positive() || *candidate > Distance::frac(1, 6) {
        return Err(ShadowError::Precondition(format!("candidate alpha must lie in (0, 1/6], got {candidate}")));
    }
    if grid == 0 || grid % 2 == 1 {
        return Err(ShadowError::Precondition(format!("grid must be even and positive, got {grid}")));
    }
    let powers: Vec<_> = (1..=horizon as i64).flat_map(|n| [(n, integer_power(n)), (-n, integer_power(-n))]).collect();
    let half = grid as i64 / 2;
    let mut cert = AlphaCertificate {
        alpha: candidate.clone(),
        certified: true,
        grid,
        horizon,
        horizon_used: 0,
        cells_checked: 0,
        failed_cell: None,
    };
    for i in -half..half {
        for j in -half..half {
            // squares inside the inner ball |v| <= α/3 are not in the annulus
            let reach = i.abs().max((i + 1).abs()).max(j.abs()).max((j + 1).abs());
            if 6 * reach <= grid as i64 {
                continue;
            }
            cert.cells_checked += 1;
            match powers.iter().find(|(_, m)| square_escapes(m, i, j, half as i128)) {
                Some((n, _)) => cert.horizon_used = cert.horizon_used.max(n.unsigned_abs() as u32),
                None => {
                    cert.certified = false;
                    cert.failed_cell = Some((i, j));
                    return Ok(cert);
                }
            }
        }
    }
    Ok(cert)
}

pub const DEFAULT_HORIZON: u32 = 24;
pub const DEFAULT_GRID: u32 = 96;

/// The cat map's shipped `α`: `1/8`, halved until the sweep certifies it.
pub fn shipped_toral_alpha() -> &'static AlphaCertificate {
    static CERT: OnceLock<AlphaCertificate> = OnceLock::new();
    CERT.get_or_init(|| {
        let mut alpha = Distance::frac(1, 8);
        for _ in 0..16 {
            let cert = alpha_certify_toral(&alpha, DEFAULT_HORIZON, DEFAULT_GRID).expect("candidate within cap");
            if cert.certified {
                return cert;
            }
            alpha = &alpha / &Distance::integer(2);
        }
        panic!("no dyadic expansivity constant certified for the cat map")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_eighth_is_certified() {
        let cert = alpha_certify_toral(&Distance::frac(1, 8), DEFAULT_HORIZON, DEFAULT_GRID).unwrap();
        assert!(cert.certified, "{cert:?}");
        assert!(cert.horizon_used >= 1 && cert.horizon_used <= DEFAULT_HORIZON);
        assert_eq!(shipped_toral_alpha().alpha, Distance::frac(1, 8));
    }

    #[test]
    fn preconditions() {
        assert!(alpha_certify_toral(&Distance::frac(0, 1), 10, 32).is_err());
        assert!(alpha_certify_toral(&Distance::frac(1, 2), 10, 32).is_err());
    }

    #[test]
    fn short_horizon_fails_softly() {
        let cert = alpha_certify_toral(&Distance::frac(1, 8), 0, 32).unwrap();
        assert!(!cert.certified);
        assert!(cert.failed_cell.is_some());
    }

    #[test]
    fn powers_match_quadratic_matrix() {
        for n in -6..=6 {
            let m = crate::systems::toral::matrix_power(n);
            let p = integer_power(n);
            for r in 0..2 {
                for c in 0..2 {
                    assert_eq!(m[r][c].to_string(), p[r][c].to_string());
                }
            }
        }
    }
}
