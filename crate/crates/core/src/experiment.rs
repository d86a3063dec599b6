//! Seeded shadowing and falsification campaigns with file reports.
//!
//! Outputs are deterministic in the configuration: trials run in parallel
//! but rows are written in trial order, and wall times go to a separate
//! `timings.csv` so the other artifacts are byte-identical across runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use crate::certify::{
    derive_constants, semiexp_falsify, shift_uniform_exhaustion, uniform_audit, uniform_n, CertifiedConstants,
};
use crate::error::{Result, ShadowError};
use crate::gen::{random_pseudo_orbit, trial_rng, OrbitShape, Sampler};
use crate::orbit::PseudoOrbit;
use crate::quadratic::Distance;
use crate::shadow::{cross_validate, DirectOracle};
use crate::systems::{DynamicalSystem, ShiftSystem, ToralSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemChoice {
    /// Full shift on the given number of symbols.
    Shift(u8),
    Toral,
}

impl FromStr for SystemChoice {
    type Err = ShadowError;

    /// `shift`, `shift(m)`, `shift:m` or `toral`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "toral" || s == "cat" {
            return Ok(SystemChoice::Toral);
        }
        let rest = s
            .strip_prefix("shift")
            .ok_or_else(|| ShadowError::Precondition(format!("unknown system `{s}`")))?;
        let m = rest.trim_start_matches([':', '(']).trim_end_matches(')');
        if m.is_empty() {
            return Ok(SystemChoice::Shift(2));
        }
        let m: u8 = m.parse().map_err(|_| ShadowError::Precondition(format!("bad alphabet size in `{s}`")))?;
        ShiftSystem::new(m)?;
        Ok(SystemChoice::Shift(m))
    }
}

/// Partial settings, from a config file or from flags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    pub system: Option<String>,
    pub epsilon: Option<String>,
    pub jumps: Option<String>,
    pub jump_scale: Option<String>,
    pub trials: Option<String>,
    pub seed: Option<String>,
    pub window_margin: Option<String>,
    pub out: Option<String>,
    pub emit_error_table: Option<String>,
    pub delta: Option<String>,
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ShadowError::Precondition(format!("config line {}: expected key = value", i + 1)))?;
            let value = Some(value.trim().to_string());
            match key.trim().replace('-', "_").as_str() {
                "system" => s.system = value,
                "epsilon" => s.epsilon = value,
                "jumps" => s.jumps = value,
                "jump_scale" => s.jump_scale = value,
                "trials" => s.trials = value,
                "seed" => s.seed = value,
                "window_margin" => s.window_margin = value,
                "out" => s.out = value,
                "emit_error_table" => s.emit_error_table = value,
                "delta" => s.delta = value,
                other => {
                    return Err(ShadowError::Precondition(format!("config line {}: unknown key `{other}`", i + 1)))
                }
            }
        }
        Ok(s)
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overridden_by(self, flags: Settings) -> Settings {
        Settings {
            system: flags.system.or(self.system),
            epsilon: flags.epsilon.or(self.epsilon),
            jumps: flags.jumps.or(self.jumps),
            jump_scale: flags.jump_scale.or(self.jump_scale),
            trials: flags.trials.or(self.trials),
            seed: flags.seed.or(self.seed),
            window_margin: flags.window_margin.or(self.window_margin),
            out: flags.out.or(self.out),
            emit_error_table: flags.emit_error_table.or(self.emit_error_table),
            delta: flags.delta.or(self.delta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub system: SystemChoice,
    pub epsilon: Distance,
    /// Largest jump count; trial `i` uses `i mod (jumps + 1)` jumps.
    pub jumps: usize,
    /// Jumps are strictly below this; defaults to the derived `ρ`.
    pub jump_scale: Option<Distance>,
    pub trials: u64,
    pub seed: u64,
    /// Extra certificate window padding; defaults to `uniform_N(ε)`.
    pub window_margin: Option<u64>,
    pub out: PathBuf,
    pub emit_error_table: bool,
    /// Falsification `δ`; defaults to the certified `δ`.
    pub delta: Option<Distance>,
}

fn parse_field<T: FromStr>(name: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| ShadowError::Precondition(format!("invalid value `{v}` for {name}")))
}

fn parse_distance(name: &str, v: &str) -> Result<Distance> {
    let d: Distance = v.parse()?;
    if !d.is_positive() {
        return Err(ShadowError::Precondition(format!("{name} must be positive, got {v}")));
    }
    Ok(d)
}

impl ExperimentConfig {
    /// Fills unset fields with the defaults of the chosen system.
    pub fn resolve(s: &Settings) -> Result<Self> {
        let system: SystemChoice = s.system.as_deref().unwrap_or("shift").parse()?;
        let (eps, jumps, trials) = match system {
            SystemChoice::Shift(_) => ("2^-6", 8, 500),
            SystemChoice::Toral => ("1/64", 4, 200),
        };
        let flag = |v: &Option<String>| -> Result<bool> {
            match v.as_deref().map(str::trim) {
                None | Some("false") | Some("0") | Some("no") => Ok(false),
                Some("true") | Some("1") | Some("yes") | Some("") => Ok(true),
                Some(other) => Err(ShadowError::Precondition(format!("invalid boolean `{other}`"))),
            }
        };
        Ok(ExperimentConfig {
            system,
            epsilon: parse_distance("epsilon", s.epsilon.as_deref().unwrap_or(eps))?,
            jumps: s.jumps.as_deref().map_or(Ok(jumps), |v| parse_field("jumps", v))?,
            jump_scale: s.jump_scale.as_deref().map(|v| parse_distance("jump-scale", v)).transpose()?,
            trials: s.trials.as_deref().map_or(Ok(trials), |v| parse_field("trials", v))?,
            seed: s.seed.as_deref().map_or(Ok(1), |v| parse_field("seed", v))?,
            window_margin: s.window_margin.as_deref().map(|v| parse_field("window-margin", v)).transpose()?,
            out: PathBuf::from(s.out.as_deref().unwrap_or("out")),
            emit_error_table: flag(&s.emit_error_table)?,
            delta: s.delta.as_deref().map(|v| parse_distance("delta", v)).transpose()?,
        })
    }
}

/// Exit status and one-paragraph summary of a campaign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub success: bool,
    pub summary: String,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).and_then(|_| fs::write(dir.join(name), contents)).map_err(|e| {
        ShadowError::Precondition(format!("cannot write {}: {e}", dir.join(name).display()))
    })
}

fn exact_and_decimal<S: DynamicalSystem>(sys: &S, d: &Distance) -> String {
    format!("{},{:e}", sys.format_distance(d), d.to_f64())
}

fn constants_document<S: DynamicalSystem>(sys: &S, c: &CertifiedConstants) -> String {
    serde_json::to_string_pretty(&c.to_json(sys)).expect("json") + "\n"
}

/// Pseudo-orbit of trial `trial` with exactly `k` jumps below `scale`.
pub fn gen_pseudo_orbit<S: Sampler>(
    sys: &S,
    c: &CertifiedConstants,
    seed: u64,
    trial: u64,
    k: usize,
    scale: &Distance,
) -> Result<PseudoOrbit<S::Point>> {
    let shape = OrbitShape { jumps: k, jump_scale: scale.clone(), max_gap: 2 * c.n as u64 + 2 };
    random_pseudo_orbit(sys, &shape, &mut trial_rng(seed, trial))
}

/// Derived constants, with `jump_scale` checked against `ρ`.
fn campaign_constants<S: DynamicalSystem>(sys: &S, cfg: &ExperimentConfig) -> Result<(CertifiedConstants, Distance)> {
    let c = derive_constants(sys, &cfg.epsilon)?;
    let scale = cfg.jump_scale.clone().unwrap_or_else(|| c.rho.clone());
    if scale > c.rho {
        return Err(ShadowError::Precondition(format!(
            "jump scale {} exceeds the derived rho {} ({:e})",
            sys.format_distance(&scale),
            sys.format_distance(&c.rho),
            c.rho.to_f64()
        )));
    }
    Ok((c, scale))
}

struct TrialRow {
    line: String,
    ok: bool,
    k: usize,
    error: Option<Distance>,
    failure: Option<String>,
    certificate: Option<String>,
    micros: u128,
}

fn shadow_campaign<S: Sampler + DirectOracle>(sys: &S, cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let (c, scale) = campaign_constants(sys, cfg)?;
    let margin = match cfg.window_margin {
        Some(m) => m,
        None => uniform_n(sys, &cfg.epsilon)? as u64,
    };
    let rows: Vec<TrialRow> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let start = Instant::now();
            let k = (t % (cfg.jumps as u64 + 1)) as usize;
            let result = gen_pseudo_orbit(sys, &c, cfg.seed, t, k, &scale).and_then(|xi| cross_validate(sys, &c, &xi, margin));
            let micros = start.elapsed().as_micros();
            match result {
                Ok(r) => {
                    let ok = r.all_ok();
                    let line = format!(
                        "{t},{k},{},{},{},{},{},{},{},{},{}",
                        exact_and_decimal(sys, &c.rho),
                        exact_and_decimal(sys, &r.inductive.window_sup_error),
                        exact_and_decimal(sys, &r.direct.window_sup_error),
                        exact_and_decimal(sys, &r.distance),
                        exact_and_decimal(sys, &r.triangle_bound),
                        r.inductive.trace.len(),
                        r.inductive.window.lo,
                        r.inductive.window.hi,
                        ok
                    );
                    let certificate = cfg.emit_error_table.then(|| {
                        let mut j = r.inductive.clone().with_error_table(sys).to_json(sys);
                        j["trial"] = json!(t);
                        j.to_string()
                    });
                    TrialRow {
                        line,
                        ok,
                        k,
                        error: Some(r.inductive.window_sup_error),
                        failure: (!ok).then(|| "certificate verification or triangle bound failed".into()),
                        certificate,
                        micros,
                    }
                }
                Err(e) => TrialRow {
                    line: format!("{t},{k},{}{}false", exact_and_decimal(sys, &c.rho), ",".repeat(12)),
                    ok: false,
                    k,
                    error: None,
                    failure: Some(e.to_string()),
                    certificate: None,
                    micros,
                },
            }
        })
        .collect();

    let mut csv = String::from(
        "trial,k,rho,rho_decimal,window_sup_error,window_sup_error_decimal,oracle_error,oracle_error_decimal,\
         agreement_distance,agreement_distance_decimal,agreement_bound,agreement_bound_decimal,trace_len,\
         window_lo,window_hi,verified\n",
    );
    let mut timings = String::from("trial,wall_time_us\n");
    for (t, r) in rows.iter().enumerate() {
        csv.push_str(&r.line);
        csv.push('\n');
        let _ = writeln!(timings, "{t},{}", r.micros);
    }
    let verified = rows.iter().filter(|r| r.ok).count();
    let max_error = rows.iter().filter_map(|r| r.error.clone()).max();
    let mut per_k: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for r in &rows {
        let e = per_k.entry(r.k).or_default();
        e.0 += 1;
        e.1 += r.ok as usize;
    }
    let success = verified as u64 == cfg.trials;
    let mut report = String::new();
    let _ = writeln!(report, "shadowing campaign on {}", sys.name());
    let _ = writeln!(report, "seed {}, trials {}, max jumps {}", cfg.seed, cfg.trials, cfg.jumps);
    let _ = writeln!(report, "epsilon {}", sys.format_distance(&c.epsilon));
    let _ = writeln!(report, "alpha {} ({})", sys.format_distance(&c.alpha), sys.alpha_provenance());
    let _ = writeln!(report, "delta {}", sys.format_distance(&c.delta));
    let _ = writeln!(report, "N {}", c.n);
    let _ = writeln!(report, "rho {}", sys.format_distance(&c.rho));
    let _ = writeln!(report, "jump scale {}", sys.format_distance(&scale));
    let _ = writeln!(report, "window margin {margin}");
    for (k, (n, ok)) in &per_k {
        let _ = writeln!(report, "k = {k}: {ok}/{n} verified");
    }
    match &max_error {
        Some(e) => {
            let _ = writeln!(report, "max window error {} ({:e})", sys.format_distance(e), e.to_f64());
        }
        None => {
            let _ = writeln!(report, "max window error n/a");
        }
    }
    for (t, r) in rows.iter().enumerate() {
        if let Some(f) = &r.failure {
            let _ = writeln!(report, "trial {t} failed: {f}");
        }
    }
    if cfg.trials == 0 {
        let _ = writeln!(report, "no trials requested (vacuous pass)");
    }
    let _ = writeln!(report, "result: {}", if success { "PASS" } else { "FAIL" });

    write(&cfg.out, "trials.csv", &csv)?;
    write(&cfg.out, "timings.csv", &timings)?;
    write(&cfg.out, "constants.json", &constants_document(sys, &c))?;
    write(&cfg.out, "report.txt", &report)?;
    if cfg.emit_error_table {
        let lines: String = rows.iter().filter_map(|r| r.certificate.as_ref()).map(|l| format!("{l}\n")).collect();
        write(&cfg.out, "certificates.jsonl", &lines)?;
    }
    Ok(RunOutcome {
        success,
        summary: format!("{verified}/{} certificates verified on {}", cfg.trials, sys.name()),
    })
}

fn falsify_campaign<S: Sampler>(
    sys: &S,
    cfg: &ExperimentConfig,
    audit: impl FnOnce(&CertifiedConstants) -> String,
) -> Result<RunOutcome> {
    let c = derive_constants(sys, &cfg.epsilon)?;
    let certified = cfg.delta.is_none();
    let delta = cfg.delta.clone().unwrap_or_else(|| c.delta.clone());
    let out = semiexp_falsify(sys, &delta, &c.epsilon, cfg.trials, cfg.seed);
    let mut report = String::new();
    let _ = writeln!(report, "semi-expansivity falsification on {}", sys.name());
    let _ = writeln!(report, "seed {}, trials {}", cfg.seed, cfg.trials);
    let _ = writeln!(report, "epsilon {}", sys.format_distance(&c.epsilon));
    let _ = writeln!(
        report,
        "delta {} ({})",
        sys.format_distance(&delta),
        if certified { "certified" } else { "override" }
    );
    let _ = writeln!(report, "valid pairs {}", out.valid_pairs);
    if cfg.trials == 0 {
        let _ = writeln!(report, "no trials requested (vacuous pass)");
    }
    match &out.witness {
        Some(w) => {
            let _ = writeln!(
                report,
                "witness at trial {}: distance {} at index {}",
                w.trial,
                sys.format_distance(&w.distance),
                w.index
            );
            let text = format!(
                "trial {}\nindex {}\ndistance {}\n[xi]\n{}[eta]\n{}",
                w.trial,
                w.index,
                sys.format_distance(&w.distance),
                w.xi.to_text(),
                w.eta.to_text()
            );
            write(&cfg.out, "witness.txt", &text)?;
        }
        None => {
            let _ = writeln!(report, "no witness found");
        }
    }
    let audit_line = audit(&c);
    let _ = writeln!(report, "{audit_line}");
    let audit_ok = !audit_line.contains("FAIL");
    let success = !(certified && out.witness.is_some()) && audit_ok;
    let _ = writeln!(report, "result: {}", if success { "PASS" } else { "FAIL" });
    write(&cfg.out, "constants.json", &constants_document(sys, &c))?;
    write(&cfg.out, "report.txt", &report)?;
    let summary = match &out.witness {
        Some(w) => format!("witness found at trial {} on {}", w.trial, sys.name()),
        None => format!("no witness in {} trials on {}", cfg.trials, sys.name()),
    };
    Ok(RunOutcome { success, summary })
}

/// Shadows seeded pseudo-orbits and cross-checks them against the direct
/// oracle. Fails on any unverified certificate.
pub fn run_shadowing(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    match cfg.system {
        SystemChoice::Shift(m) => shadow_campaign(&ShiftSystem::new(m)?, cfg),
        SystemChoice::Toral => shadow_campaign(&ToralSystem::new(), cfg),
    }
}

/// Searches for semi-expansivity counterexamples and audits the uniform
/// expansivity radius. Fails on a witness under certified constants.
pub fn run_falsify(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    match cfg.system {
        SystemChoice::Shift(m) => {
            let sys = ShiftSystem::new(m)?;
            falsify_campaign(&sys, cfg, |c| {
                if m != 2 {
                    return "uniform radius exhaustion skipped (binary alphabet only)".into();
                }
                if c.n > 6 {
                    return format!("uniform radius exhaustion skipped for N = {} (limit 6)", c.n);
                }
                let ex = shift_uniform_exhaustion(c.n);
                let ok = ex.exceptions == 0 && ex.radius_is_minimal;
                format!(
                    "uniform radius exhaustion N = {}: {} pairs, {} exceptions, minimal {}: {}",
                    ex.n,
                    ex.pairs_checked,
                    ex.exceptions,
                    ex.radius_is_minimal,
                    if ok { "PASS" } else { "FAIL" }
                )
            })
        }
        SystemChoice::Toral => {
            let sys = ToralSystem::new();
            falsify_campaign(&sys, cfg, |c| {
                let a = uniform_audit(&sys, &c.epsilon, cfg.trials.min(1000), cfg.seed);
                format!(
                    "uniform radius audit N = {}: {} samples, {} within alpha on the window, {} violations: {}",
                    c.n,
                    a.samples,
                    a.hypothesis_met,
                    a.violations,
                    if a.violations == 0 { "PASS" } else { "FAIL" }
                )
            })
        }
    }
}

/// The constant chain as pretty JSON.
pub fn constants_json(cfg: &ExperimentConfig) -> Result<String> {
    match cfg.system {
        SystemChoice::Shift(m) => {
            let sys = ShiftSystem::new(m)?;
            Ok(constants_document(&sys, &derive_constants(&sys, &cfg.epsilon)?))
        }
        SystemChoice::Toral => {
            let sys = ToralSystem::new();
            Ok(constants_document(&sys, &derive_constants(&sys, &cfg.epsilon)?))
        }
    }
}

/// Text form of the pseudo-orbit for trial `trial` with `cfg.jumps` jumps.
pub fn gen_text(cfg: &ExperimentConfig, trial: u64) -> Result<String> {
    fn go<S: Sampler>(sys: &S, cfg: &ExperimentConfig, trial: u64) -> Result<String> {
        let (c, scale) = campaign_constants(sys, cfg)?;
        Ok(gen_pseudo_orbit(sys, &c, cfg.seed, trial, cfg.jumps, &scale)?.to_text())
    }
    match cfg.system {
        SystemChoice::Shift(m) => go(&ShiftSystem::new(m)?, cfg, trial),
        SystemChoice::Toral => go(&ToralSystem::new(), cfg, trial),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_names() {
        assert_eq!("shift".parse::<SystemChoice>().unwrap(), SystemChoice::Shift(2));
        assert_eq!("shift(3)".parse::<SystemChoice>().unwrap(), SystemChoice::Shift(3));
        assert_eq!("shift:4".parse::<SystemChoice>().unwrap(), SystemChoice::Shift(4));
        assert_eq!("toral".parse::<SystemChoice>().unwrap(), SystemChoice::Toral);
        assert!("shift(1)".parse::<SystemChoice>().is_err());
        assert!("henon".parse::<SystemChoice>().is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file = Settings::parse("system = toral\ntrials = 7 # few\nseed=3\n").unwrap();
        let flags = Settings { trials: Some("9".into()), ..Settings::default() };
        let cfg = ExperimentConfig::resolve(&file.overridden_by(flags)).unwrap();
        assert_eq!(cfg.system, SystemChoice::Toral);
        assert_eq!(cfg.trials, 9);
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.epsilon, Distance::frac(1, 64));
        assert!(Settings::parse("bogus = 1").is_err());
        assert!(Settings::parse("no equals sign").is_err());
    }

    #[test]
    fn defaults_per_system() {
        let cfg = ExperimentConfig::resolve(&Settings::default()).unwrap();
        assert_eq!(cfg.system, SystemChoice::Shift(2));
        assert_eq!(cfg.epsilon, Distance::pow2(-6));
        assert_eq!((cfg.jumps, cfg.trials), (8, 500));
        let bad = Settings { epsilon: Some("0".into()), ..Settings::default() };
        assert!(ExperimentConfig::resolve(&bad).is_err());
    }

    #[test]
    fn jump_scale_above_rho_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let s = Settings {
            jump_scale: Some("2^-10".into()),
            out: Some(dir.path().display().to_string()),
            ..Settings::default()
        };
        let err = run_shadowing(&ExperimentConfig::resolve(&s).unwrap()).unwrap_err().to_string();
        assert!(err.contains("1/524288"), "{err}");
    }
}
