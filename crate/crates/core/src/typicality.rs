//! Checks of the three pseudorandomness properties a host needs:
//!
//! * P1: `|N^c(S)| = (1 ± f_|S|)(1-p)^|S| n` for small sets `S`,
//! * P2: `d(v) = (1 ± f0/2) pn` for every vertex,
//! * P3: `|N(u) ∩ N(v)| <= delta2` for every pair.
//!
//! P2 and P3 are checked exhaustively. P1 quantifies over exponentially many
//! sets and is only checked on sampled sets: uniform `s`-subsets and prefixes
//! `I_s` of fresh process runs. Reports carry a margin (largest fraction of
//! the allowed slack consumed) even when a check passes.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::ParamSet;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::process::sample_independent_set;
use crate::rng::{derive_seed, stream, AUX_TAG};

/// Above this many vertices P3 samples pairs instead of enumerating them.
pub const P3_EXHAUSTIVE_LIMIT: usize = 20_000;
/// Pairs tested when P3 is sampled.
pub const P3_SAMPLED_PAIRS: usize = 2_000_000;
/// Violations stored per check; the count is always exact.
pub const VIOLATION_CAP: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeViolation {
    pub v: usize,
    pub degree: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P2Report {
    pub lower: f64,
    pub upper: f64,
    pub violation_count: usize,
    pub violations: Vec<DegreeViolation>,
    /// `max_v |d(v) - pn| / ((f0/2) pn)`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodegreeViolation {
    pub u: usize,
    pub v: usize,
    pub codegree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P3Report {
    pub mode: CheckMode,
    pub pairs_checked: u64,
    pub max_codegree: usize,
    pub delta2: f64,
    pub violation_count: u64,
    pub violations: Vec<CodegreeViolation>,
    /// `max_codegree / delta2`.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetOrigin {
    Uniform,
    ProcessPrefix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetViolation {
    pub subset: Vec<usize>,
    pub origin: SubsetOrigin,
    pub observed: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Expected non-neighbourhood sizes for `|S| = s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ETableRow {
    pub s: usize,
    /// `E_s = (n - s)(1 - p)^s`.
    pub e_s: f64,
    /// `mu_s = (1 - p)^s n`.
    pub mu_s: f64,
    /// `4 s log n`.
    pub threshold: f64,
    pub above_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Report {
    pub mode: CheckMode,
    pub subsets_tested: usize,
    pub max_size_tested: usize,
    pub violation_count: usize,
    pub violations: Vec<SubsetViolation>,
    /// `max |obs - mu_s| / (f_s mu_s)` over tested sets.
    pub margin: f64,
    pub e_table: Vec<ETableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalityReport {
    pub params: ParamSet,
    pub strict_factor: f64,
    pub p1: P1Report,
    pub p2: P2Report,
    pub p3: P3Report,
    pub typical: bool,
}

/// Degree check against `(1 ± f0/2) pn`.
pub fn check_p2(g: &Graph, ps: &ParamSet) -> P2Report {
    let pn = ps.pn();
    let slack = ps.f0 / 2.0 * pn;
    let (lower, upper) = (pn - slack, pn + slack);
    let mut violations = Vec::new();
    let mut count = 0;
    let mut margin = 0.0f64;
    for v in 0..g.n() {
        let d = g.degree(v);
        let dev = (d as f64 - pn).abs();
        margin = margin.max(dev / slack);
        if dev > slack {
            count += 1;
            if violations.len() < VIOLATION_CAP {
                violations.push(DegreeViolation {
                    v,
                    degree: d,
                    lower,
                    upper,
                });
            }
        }
    }
    P2Report {
        lower,
        upper,
        violation_count: count,
        violations,
        margin,
    }
}

/// Codegree check against `delta2`; exhaustive up to
/// [`P3_EXHAUSTIVE_LIMIT`] vertices, sampled beyond.
pub fn check_p3(g: &Graph, ps: &ParamSet, seed: u64) -> P3Report {
    let n = g.n();
    let cap = ps.delta2;
    let (mode, per_u): (CheckMode, Vec<(u64, usize, u64, Vec<CodegreeViolation>)>) =
        if n <= P3_EXHAUSTIVE_LIMIT {
            let rows = (0..n)
                .into_par_iter()
                .map(|u| {
                    let mut max = 0;
                    let mut cnt = 0u64;
                    let mut viol = Vec::new();
                    for v in u + 1..n {
                        let c = g.codegree_unchecked(u, v);
                        max = max.max(c);
                        if c as f64 > cap {
                            cnt += 1;
                            if viol.len() < VIOLATION_CAP {
                                viol.push(CodegreeViolation { u, v, codegree: c });
                            }
                        }
                    }
                    ((n - u - 1) as u64, max, cnt, viol)
                })
                .collect();
            (CheckMode::Exhaustive, rows)
        } else {
            let mut rng = stream(seed ^ AUX_TAG, 3);
            let mut max = 0;
            let mut cnt = 0u64;
            let mut viol = Vec::new();
            for _ in 0..P3_SAMPLED_PAIRS {
                let u = rng.random_range(0..n);
                let mut v = rng.random_range(0..n - 1);
                if v >= u {
                    v += 1;
                }
                let c = g.codegree_unchecked(u, v);
                max = max.max(c);
                if c as f64 > cap {
                    cnt += 1;
                    if viol.len() < VIOLATION_CAP {
                        viol.push(CodegreeViolation {
                            u: u.min(v),
                            v: u.max(v),
                            codegree: c,
                        });
                    }
                }
            }
            (CheckMode::Sampled, vec![(P3_SAMPLED_PAIRS as u64, max, cnt, viol)])
        };

    let mut report = P3Report {
        mode,
        pairs_checked: 0,
        max_codegree: 0,
        delta2: cap,
        violation_count: 0,
        violations: Vec::new(),
        margin: 0.0,
    };
    for (pairs, max, cnt, viol) in per_u {
        report.pairs_checked += pairs;
        report.max_codegree = report.max_codegree.max(max);
        report.violation_count += cnt;
        let room = VIOLATION_CAP - report.violations.len();
        report.violations.extend(viol.into_iter().take(room));
    }
    report.margin = report.max_codegree as f64 / cap;
    report
}

/// Expected non-neighbourhood table for `s = 1..=max_size`.
pub fn e_table(ps: &ParamSet, max_size: usize) -> Vec<ETableRow> {
    let nf = ps.n as f64;
    let log_n = ps.log_n();
    (1..=max_size)
        .map(|s| {
            let q = (1.0 - ps.p).powf(s as f64);
            let e_s = (nf - s as f64) * q;
            let threshold = 4.0 * s as f64 * log_n;
            ETableRow {
                s,
                e_s,
                mu_s: q * nf,
                threshold,
                above_threshold: e_s >= threshold,
            }
        })
        .collect()
}

struct SizeOutcome {
    tested: usize,
    margin: f64,
    violations: Vec<SubsetViolation>,
}

fn test_subset(
    g: &Graph,
    ps: &ParamSet,
    members: &[usize],
    origin: SubsetOrigin,
    out: &mut SizeOutcome,
) {
    let s = members.len();
    let set = VertexSet::from_vertices(g.n(), members.iter().copied()).expect("ids in range");
    let observed = g.common_non_neighbourhood(&set).expect("same universe").len();
    let mu = ps.trajectory_active(s);
    let slack = ps.error_factor(s) * mu;
    let dev = (observed as f64 - mu).abs();
    out.tested += 1;
    out.margin = out.margin.max(dev / slack);
    if dev > slack {
        out.violations.push(SubsetViolation {
            subset: members.to_vec(),
            origin,
            observed,
            lower: mu - slack,
            upper: mu + slack,
        });
    }
}

/// Sampled non-neighbourhood check.
///
/// For every size `s` in `1..=max_size`, `ceil(budget/2)` uniform `s`-subsets
/// are tested, plus the prefixes `I_s` of `floor(budget/2)` fresh process
/// runs (runs that stop before `s` steps contribute no prefix of size `s`).
pub fn check_p1(
    g: &Graph,
    ps: &ParamSet,
    budget: usize,
    max_size: usize,
    seed: u64,
) -> Result<P1Report> {
    if budget == 0 {
        return Err(Error::Domain("P1 budget must be at least 1".into()));
    }
    let n = g.n();
    let max_size = max_size.min(n);
    let uniform = budget.div_ceil(2);
    let prefix_runs = budget / 2;

    let mut outcomes: Vec<SizeOutcome> = (1..=max_size)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(seed ^ AUX_TAG, s as u64);
            let mut out = SizeOutcome {
                tested: 0,
                margin: 0.0,
                violations: Vec::new(),
            };
            for _ in 0..uniform {
                let mut members = index::sample(&mut rng, n, s).into_vec();
                members.sort_unstable();
                test_subset(g, ps, &members, SubsetOrigin::Uniform, &mut out);
            }
            out
        })
        .collect();

    let prefixes: Vec<Vec<usize>> = (0..prefix_runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(derive_seed(seed, r as u64), 0);
            sample_independent_set(g, max_size, &mut rng)
        })
        .collect();
    for chosen in &prefixes {
        for s in 1..=chosen.len() {
            test_subset(g, ps, &chosen[..s], SubsetOrigin::ProcessPrefix, &mut outcomes[s - 1]);
        }
    }

    let mut report = P1Report {
        mode: CheckMode::Sampled,
        subsets_tested: 0,
        max_size_tested: 0,
        violation_count: 0,
        violations: Vec::new(),
        margin: 0.0,
        e_table: e_table(ps, max_size),
    };
    for (idx, out) in outcomes.into_iter().enumerate() {
        if out.tested > 0 {
            report.max_size_tested = idx + 1;
        }
        report.subsets_tested += out.tested;
        report.margin = report.margin.max(out.margin);
        report.violation_count += out.violations.len();
        let room = VIOLATION_CAP - report.violations.len().min(VIOLATION_CAP);
        report.violations.extend(out.violations.into_iter().take(room));
    }
    Ok(report)
}

/// Options for [`is_typical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalityOptions {
    /// Subsets per size for P1.
    pub budget: usize,
    /// Largest P1 subset size; defaults to `k`.
    pub max_size: Option<usize>,
    /// Multiplies `f0` and `delta2`; values below 1 tighten every check.
    pub strict_factor: f64,
}

impl Default for TypicalityOptions {
    fn default() -> Self {
        TypicalityOptions {
            budget: 200,
            max_size: None,
            strict_factor: 1.0,
        }
    }
}

/// Runs all three checks. P1 is sampled, so `typical` certifies only the
/// tested sets.
pub fn is_typical(
    g: &Graph,
    ps: &ParamSet,
    opts: &TypicalityOptions,
    seed: u64,
) -> Result<TypicalityReport> {
    if ps.n != g.n() {
        return Err(Error::Domain(format!(
            "parameters for n = {} used with a host on {} vertices",
            ps.n,
            g.n()
        )));
    }
    let scaled = ps.rescaled(opts.strict_factor)?;
    let max_size = opts.max_size.unwrap_or(ps.k);
    let p1 = check_p1(g, &scaled, opts.budget, max_size, seed)?;
    let p2 = check_p2(g, &scaled);
    let p3 = check_p3(g, &scaled, seed);
    let typical = p1.violation_count == 0 && p2.violation_count == 0 && p3.violation_count == 0;
    Ok(TypicalityReport {
        params: scaled,
        strict_factor: opts.strict_factor,
        p1,
        p2,
        p3,
        typical,
    })
}
