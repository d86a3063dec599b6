//! Shadowing by induction on the number of jumps.
//!
//! With the last jump reindexed to the step `2N → 2N+1`, the target `ξ` is
//! split into `η` (its past, then the orbit of `x_0`; fewer jumps) and `ζ`
//! (the orbit of `x_0`, then its final orbit; one jump). Their shadows `y`
//! and `z` stay `α`-close on `[0, 2N]`, hence `δ`-close at `N`, and the
//! one-jump pseudo-orbit `τ` switching from `y` to `z` at `N` is shadowed by
//! the one-jump oracle. That shadow shadows `ξ`.

use crate::certify::{sharpen_check, sup_all_time, CertifiedConstants};
use crate::error::{Result, ShadowError};
use crate::orbit::{PseudoOrbit, Window};
use crate::quadratic::Distance;
use crate::systems::DynamicalSystem;

use super::{default_window, Check, Condition, Intermediates, ShadowCertificate, ShadowMethod, TraceStep};

struct Glue<'a, S: DynamicalSystem> {
    sys: &'a S,
    c: &'a CertifiedConstants,
    trace: Vec<TraceStep<S::Point>>,
}

impl<S: DynamicalSystem> Glue<'_, S> {
    fn orbit(&self, p: &S::Point) -> PseudoOrbit<S::Point> {
        PseudoOrbit::orbit(p.clone(), 0)
    }

    /// `p` `α`-shadows `target` at every time.
    fn alpha_check(&self, condition: Condition, p: &S::Point, target: &PseudoOrbit<S::Point>) -> Check {
        let ev = sup_all_time(self.sys, &self.orbit(p), target, Window::around(0, 0));
        Check::strict(condition, ev.total(), self.c.alpha.clone())
    }

    /// `p` `α/2`-shadows `target` at every time.
    fn sharpen(&self, p: &S::Point, target: &PseudoOrbit<S::Point>) -> Check {
        let out = sharpen_check(self.sys, self.c, &self.orbit(p), target, Window::around(0, 0));
        let half = &self.c.alpha / &Distance::integer(2);
        Check { condition: Condition::Sharpen, measured: out.sup, bound: half, passed: out.holds }
    }

    /// Shadow at index 0 of a pseudo-orbit with at most one jump.
    fn one_jump(&self, xi: &PseudoOrbit<S::Point>, depth: usize) -> Result<(S::Point, Option<Check>)> {
        let jumps = xi.jump_positions(self.sys);
        let Some(jump) = jumps.first() else {
            return Ok((xi.entry_at(self.sys, 0), None));
        };
        debug_assert_eq!(jumps.len(), 1);
        let j = jump.index;
        let x = xi.entry_at(self.sys, j);
        let y = self.sys.apply(&xi.entry_at(self.sys, j - 1));
        let z = self.sys.one_jump_shadow(&x, &y)?;
        let p = self.sys.iterate(&z, -j);
        let check = self.alpha_check(Condition::OneJump, &p, xi).require(depth)?;
        Ok((p, Some(check)))
    }

    /// Shadow at index 0 of `xi`, verified to `α`-shadow it.
    fn shadow(&mut self, xi: &PseudoOrbit<S::Point>, depth: usize) -> Result<(S::Point, i64)> {
        let sys = self.sys;
        let jumps = xi.jump_positions(sys);
        let k = jumps.len();
        if k == 0 {
            return Ok((xi.entry_at(sys, 0), 0));
        }
        if k == 1 {
            let slot = self.trace.len();
            let (p, check) = self.one_jump(xi, depth)?;
            self.trace.insert(
                slot,
                TraceStep {
                    depth,
                    jumps: 1,
                    reindex: 0,
                    subtarget_jumps: Vec::new(),
                    checks: check.into_iter().collect(),
                    intermediates: None,
                },
            );
            return Ok((p, 0));
        }

        let n = self.c.n as i64;
        let s = jumps[k - 1].index - (2 * n + 1);
        let xr = xi.shift_index(-s);
        let x0 = xr.entry_at(sys, 0);
        let mut checks = Vec::new();

        // the segment [0, 2N+1] stays δ-close to the orbit of x_0
        let orbit_x0 = self.orbit(&x0);
        let segment = Window::new(0, 2 * n + 1)?;
        let seg_sup = orbit_x0
            .entries(sys, segment)
            .iter()
            .zip(xr.entries(sys, segment).iter())
            .map(|(a, b)| sys.dist(a, b))
            .fold(Distance::integer(0), Distance::max);
        checks.push(Check::strict(Condition::Segment, Some(seg_sup), self.c.delta.clone()).require(depth)?);

        let xi_prime = xr.replace_segment_with_orbit(sys, 0, 2 * n as u64 + 1);
        let eta = PseudoOrbit::splice(sys, &xr, &orbit_x0, 0);
        let zeta = PseudoOrbit::splice(sys, &orbit_x0, &xr, 2 * n + 1);
        let eta_jumps = eta.jump_count(sys);
        if eta_jumps >= k {
            return Err(ShadowError::ConstantsViolation {
                condition: "induction".into(),
                depth,
                detail: format!("subtarget has {eta_jumps} jumps, target {k}"),
            });
        }

        let slot = self.trace.len();
        let (y, _) = self.shadow(&eta, depth + 1)?;
        checks.push(self.sharpen(&y, &eta).require(depth)?);

        let (z, one) = self.one_jump(&zeta, depth)?;
        checks.extend(one);
        checks.push(self.sharpen(&z, &zeta).require(depth)?);

        // y and z are α-close on [0, 2N], hence δ-close at N
        let (oy, oz) = (self.orbit(&y), self.orbit(&z));
        let hypothesis = Window::new(0, 2 * n)?;
        let close = oy
            .entries(sys, hypothesis)
            .iter()
            .zip(oz.entries(sys, hypothesis).iter())
            .map(|(a, b)| sys.dist(a, b))
            .fold(Distance::integer(0), Distance::max);
        checks.push(Check::strict(Condition::UniformExpansivity, Some(close), self.c.alpha.clone()).require(depth)?);
        let at_n = sys.dist(&sys.iterate(&y, n), &sys.iterate(&z, n));
        checks.push(Check::strict(Condition::UniformExpansivity, Some(at_n), self.c.delta.clone()).require(depth)?);

        let tau = PseudoOrbit::splice(sys, &oy, &oz, n);
        let (w, one) = self.one_jump(&tau, depth)?;
        checks.extend(one);
        checks.push(self.alpha_check(Condition::Composite, &w, &xr).require(depth)?);

        let subtarget_jumps = vec![eta_jumps, zeta.jump_count(sys), tau.jump_count(sys)];
        self.trace.insert(
            slot,
            TraceStep {
                depth,
                jumps: k,
                reindex: s,
                subtarget_jumps,
                checks,
                intermediates: Some(Intermediates { xi_prime, eta, zeta, tau }),
            },
        );
        Ok((sys.iterate(&w, -s), s))
    }
}

/// Shadows a `ρ`-pseudo-orbit with finitely many jumps.
///
/// Every condition of the gluing argument is re-checked exactly and a
/// failure is reported as a constants violation. The certificate claims
/// `ε`-shadowing on the default window padded by `margin`.
pub fn inductive_shadow<S: DynamicalSystem>(
    sys: &S,
    constants: &CertifiedConstants,
    xi: &PseudoOrbit<S::Point>,
    margin: u64,
) -> Result<ShadowCertificate<S::Point>> {
    for j in xi.jump_positions(sys) {
        if j.size >= constants.rho {
            return Err(ShadowError::JumpTooLarge {
                index: j.index,
                size: sys.format_distance(&j.size),
                bound: sys.format_distance(&constants.rho),
            });
        }
    }
    let mut glue = Glue { sys, c: constants, trace: Vec::new() };
    let (w, reindex) = glue.shadow(xi, 0)?;
    let window = default_window(xi, constants.n, margin);
    let mut cert =
        ShadowCertificate::build(sys, ShadowMethod::Inductive, w, xi.clone(), constants.epsilon.clone(), window)?;
    cert.trace = glue.trace;
    cert.reindex = reindex;
    if !cert.claims_hold() {
        return Err(ShadowError::ConstantsViolation {
            condition: "target".into(),
            depth: 0,
            detail: format!(
                "shadow error {} is not below epsilon {}",
                cert.total_error().map_or("unbounded".into(), |e| sys.format_distance(&e)),
                sys.format_distance(&constants.epsilon)
            ),
        });
    }
    Ok(cert)
}
