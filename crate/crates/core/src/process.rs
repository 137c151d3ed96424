//! The random greedy independent set process.
//!
//! Starting from `V_0 = V(G)` and `I_0 = {}`, step `i` draws `v_i`
//! uniformly from the active set `V_{i-1}`, adds it to the independent set
//! and removes its closed neighbourhood from the active set. The process
//! stops after `k` steps or when the active set is empty.

use std::io;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::ParamSet;
use crate::error::{Error, Result};
use crate::graph::{Graph, Ones, VertexSet};
use crate::rng::{derive_seed, rng_from_seed};

const NOT_ACTIVE: u32 = u32::MAX;

/// Incrementally maintained state `(V_i, I_i, d_i)` over a fixed host.
#[derive(Clone)]
pub struct ProcessState<'g> {
    host: &'g Graph,
    step: usize,
    active: VertexSet,
    /// Active vertex ids in arbitrary order, for O(1) uniform draws.
    list: Vec<u32>,
    /// Index of each vertex in `list`, `NOT_ACTIVE` otherwise.
    pos: Vec<u32>,
    chosen: Vec<usize>,
    /// Induced degrees `d_i(v)`; meaningful only for active `v`.
    degrees: Option<Vec<u32>>,
    /// Step at which each vertex left the active set, 0 while active.
    removed_at: Vec<u32>,
    scratch: Vec<usize>,
}

impl<'g> ProcessState<'g> {
    /// `V_0 = V(host)`, `I_0 = {}` with induced degrees tracked.
    pub fn new(host: &'g Graph) -> Self {
        let mut s = Self::without_degrees(host);
        s.degrees = Some(host.degrees().into_iter().map(|d| d as u32).collect());
        s
    }

    /// Same as [`ProcessState::new`] but skips degree bookkeeping; enough
    /// when only the independent set is wanted.
    pub fn without_degrees(host: &'g Graph) -> Self {
        let n = host.n();
        ProcessState {
            host,
            step: 0,
            active: VertexSet::full(n),
            list: (0..n as u32).collect(),
            pos: (0..n as u32).collect(),
            chosen: Vec::new(),
            degrees: None,
            removed_at: vec![0; n],
            scratch: Vec::new(),
        }
    }

    #[inline]
    pub fn host(&self) -> &'g Graph {
        self.host
    }

    #[inline]
    pub fn step_index(&self) -> usize {
        self.step
    }

    #[inline]
    pub fn active(&self) -> &VertexSet {
        &self.active
    }

    #[inline]
    pub fn active_len(&self) -> usize {
        self.list.len()
    }

    #[inline]
    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    /// Induced degree of an active vertex.
    #[inline]
    pub fn degree(&self, v: usize) -> Option<usize> {
        match &self.degrees {
            Some(d) if self.active.contains(v) => Some(d[v] as usize),
            _ => None,
        }
    }

    /// Degrees of every vertex; entries of inactive vertices are stale.
    pub fn raw_degrees(&self) -> Option<&[u32]> {
        self.degrees.as_deref()
    }

    /// Step at which `v` left the active set (chosen or blocked), if it has.
    #[inline]
    pub fn removal_step(&self, v: usize) -> Option<usize> {
        match self.removed_at[v] {
            0 => None,
            s => Some(s as usize),
        }
    }

    /// Min, max and sum of induced degrees over the active set.
    pub fn degree_stats(&self) -> Option<(usize, usize, u64)> {
        let d = self.degrees.as_ref()?;
        let mut lo = u32::MAX;
        let mut hi = 0;
        let mut sum = 0u64;
        for &v in &self.list {
            let x = d[v as usize];
            lo = lo.min(x);
            hi = hi.max(x);
            sum += x as u64;
        }
        if self.list.is_empty() {
            lo = 0;
        }
        Some((lo as usize, hi as usize, sum))
    }

    /// Performs one step. Returns the chosen vertex, or `None` when the
    /// active set is empty (natural termination, the state is unchanged).
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        if self.list.is_empty() {
            return None;
        }
        let v = self.list[rng.random_range(0..self.list.len())] as usize;
        self.choose(v);
        Some(v)
    }

    /// Performs one step with a prescribed active vertex.
    pub fn step_with(&mut self, v: usize) -> Result<()> {
        if !self.active.contains(v) {
            return Err(Error::Domain(format!("vertex {v} is not active")));
        }
        self.choose(v);
        Ok(())
    }

    fn choose(&mut self, v: usize) {
        let host = self.host;
        self.step += 1;
        let stamp = self.step as u32;

        // R = N[v] ∩ V_{i-1}
        let mut removed = std::mem::take(&mut self.scratch);
        removed.clear();
        removed.push(v);
        for (w, (&r, &a)) in host.row(v).iter().zip(self.active.words()).enumerate() {
            let mut word = r & a;
            while word != 0 {
                removed.push(w * 64 + word.trailing_zeros() as usize);
                word &= word - 1;
            }
        }
        for &u in &removed {
            self.active.remove(u);
            self.removed_at[u] = stamp;
            let at = self.pos[u] as usize;
            let last = self.list.pop().expect("active list nonempty");
            if at < self.list.len() {
                self.list[at] = last;
                self.pos[last as usize] = at as u32;
            }
            self.pos[u] = NOT_ACTIVE;
        }
        if let Some(deg) = self.degrees.as_mut() {
            for &u in &removed {
                for (w, (&r, &a)) in host.row(u).iter().zip(self.active.words()).enumerate() {
                    let mut word = r & a;
                    while word != 0 {
                        deg[w * 64 + word.trailing_zeros() as usize] -= 1;
                        word &= word - 1;
                    }
                }
            }
        }
        self.chosen.push(v);
        self.scratch = removed;
    }
}

/// One row of a process trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub i: usize,
    /// `v_i`; absent for the initial state.
    pub chosen: Option<usize>,
    pub active_size: usize,
    pub deg_min: usize,
    pub deg_max: usize,
    /// Mean induced degree over the active set (0 when empty).
    pub deg_mean: f64,
    pub d_tilde: f64,
    pub f_i: f64,
    pub in_envelope: bool,
}

/// Complete trace of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessRun {
    pub params: ParamSet,
    pub seed: u64,
    pub completed_steps: usize,
    /// `min(k, first envelope violation)`, capped at `completed_steps`.
    pub tau: usize,
    pub first_violation: Option<usize>,
    /// Records for steps `0..=completed_steps`.
    pub records: Vec<StepRecord>,
    /// `I_k` in selection order.
    pub chosen: Vec<usize>,
    /// Step at which each vertex left the active set; vertices that never
    /// left carry `completed_steps + 1`.
    pub sigma: Vec<usize>,
}

impl ProcessRun {
    #[inline]
    pub fn survived(&self, v: usize) -> bool {
        self.sigma[v] > self.completed_steps
    }

    /// Writes the step records as CSV with a header row.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)
                .map_err(|e| Error::Domain(format!("csv export failed: {e}")))?;
        }
        w.flush()
            .map_err(|e| Error::Domain(format!("csv export failed: {e}")))?;
        Ok(())
    }
}

fn record_for(state: &ProcessState<'_>, ps: &ParamSet, chosen: Option<usize>) -> StepRecord {
    let i = state.step_index();
    let env = ps.envelope_unchecked(i);
    let (lo, hi, sum) = state.degree_stats().expect("degrees tracked");
    let size = state.active_len();
    let in_envelope = size == 0 || (lo as f64 >= env.lower && hi as f64 <= env.upper);
    StepRecord {
        i,
        chosen,
        active_size: size,
        deg_min: lo,
        deg_max: hi,
        deg_mean: if size == 0 { 0.0 } else { sum as f64 / size as f64 },
        d_tilde: env.d_tilde,
        f_i: env.f_i,
        in_envelope,
    }
}

fn check_params(host: &Graph, ps: &ParamSet) -> Result<()> {
    if ps.n != host.n() {
        return Err(Error::Domain(format!(
            "parameters for n = {} used with a host on {} vertices",
            ps.n,
            host.n()
        )));
    }
    Ok(())
}

/// Drives one run, calling `observe` on the initial state and after every
/// step with the fresh record.
fn drive<F>(host: &Graph, ps: &ParamSet, seed: u64, mut observe: F) -> ProcessRun
where
    F: FnMut(&ProcessState<'_>, &StepRecord, bool),
{
    let mut rng = rng_from_seed(seed);
    let mut state = ProcessState::new(host);
    let first = record_for(&state, ps, None);
    let mut live = true;
    observe(&state, &first, live);
    let mut first_violation = (!first.in_envelope).then_some(0);
    let mut records = vec![first];

    while state.step_index() < ps.k {
        let Some(v) = state.step(&mut rng) else { break };
        // tau >= i iff no violation strictly before i
        live = first_violation.is_none();
        let rec = record_for(&state, ps, Some(v));
        observe(&state, &rec, live);
        if !rec.in_envelope && first_violation.is_none() {
            first_violation = Some(rec.i);
        }
        records.push(rec);
    }

    let completed = state.step_index();
    let tau = first_violation.unwrap_or(ps.k).min(ps.k).min(completed);
    let sigma = (0..host.n())
        .map(|v| state.removal_step(v).unwrap_or(completed + 1))
        .collect();
    ProcessRun {
        params: *ps,
        seed,
        completed_steps: completed,
        tau,
        first_violation,
        records,
        chosen: state.chosen().to_vec(),
        sigma,
    }
}

/// Runs the process for up to `ps.k` steps; deterministic in
/// `(host, ps, seed)`.
pub fn run(host: &Graph, ps: &ParamSet, seed: u64) -> Result<ProcessRun> {
    check_params(host, ps)?;
    Ok(drive(host, ps, seed, |_, _, _| {}))
}

/// Draws `I_k` without degree bookkeeping.
pub fn sample_independent_set<R: Rng + ?Sized>(host: &Graph, k: usize, rng: &mut R) -> Vec<usize> {
    let mut state = ProcessState::without_degrees(host);
    while state.step_index() < k && state.step(rng).is_some() {}
    state.chosen
}

/// Per-vertex trajectory of the frozen processes `X^-` and `X^+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedTrace {
    pub vertex: usize,
    pub sigma: usize,
    /// `min(tau, sigma - 1)`.
    pub rho: usize,
    /// `X^-_{v,i}` for `i = 0..=completed_steps`.
    pub x_minus: Vec<f64>,
    pub x_plus: Vec<f64>,
    /// `Delta X^-_{v,i}` for `i = 1..=completed_steps` (index `i - 1`).
    pub dx_minus: Vec<f64>,
    pub dx_plus: Vec<f64>,
    /// `M_{v,j}` for `j = 0..=completed_steps`, when requested and `v` is active.
    pub m_vj: Vec<Option<f64>>,
    /// `q_{v,j} = 1 - (d_j(v) + 1)/|V_j|`, when requested and `v` is active.
    pub q_vj: Vec<Option<f64>>,
}

/// Increment diagnostics of the degree supermartingales for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementStats {
    pub run: ProcessRun,
    pub traces: Vec<TrackedTrace>,
    pub max_abs_increment: f64,
    pub mean_abs_increment: f64,
    /// `6 p^2 n + 2^7 log n`.
    pub bound_abs: f64,
    /// `3 p d_tilde_{i-1}` for `i = 1..=completed_steps`.
    pub bound_mean: Vec<f64>,
    pub within_bound_abs: bool,
}

/// Runs the process once (the same run as [`run`] with this seed) and
/// records `X^-`, `X^+` and their increments for every tracked vertex.
pub fn increment_diagnostics(
    host: &Graph,
    ps: &ParamSet,
    tracked: &VertexSet,
    seed: u64,
    with_martingale_terms: bool,
) -> Result<IncrementStats> {
    check_params(host, ps)?;
    if tracked.universe() != host.n() {
        return Err(Error::Domain("tracked set has the wrong ground set".into()));
    }
    let ids: Vec<usize> = tracked.to_vec();
    let mut x_minus: Vec<Vec<f64>> = vec![Vec::new(); ids.len()];
    let mut x_plus: Vec<Vec<f64>> = vec![Vec::new(); ids.len()];
    let mut m_vj: Vec<Vec<Option<f64>>> = vec![Vec::new(); ids.len()];
    let mut q_vj: Vec<Vec<Option<f64>>> = vec![Vec::new(); ids.len()];

    let run = drive(host, ps, seed, |state, rec, live| {
        let i = rec.i;
        for (slot, &v) in ids.iter().enumerate() {
            let active = state.active().contains(v);
            if live && active {
                let d = state.degree(v).expect("active") as f64;
                let width = rec.f_i * rec.d_tilde;
                x_minus[slot].push(d - rec.d_tilde - width);
                x_plus[slot].push(d - rec.d_tilde + width);
            } else {
                let prev_m = *x_minus[slot].last().unwrap_or(&f64::NAN);
                let prev_p = *x_plus[slot].last().unwrap_or(&f64::NAN);
                x_minus[slot].push(prev_m);
                x_plus[slot].push(prev_p);
            }
            if with_martingale_terms {
                let (m, q) = if active {
                    let (m, q) = martingale_terms(state, v);
                    (Some(m), Some(q))
                } else {
                    (None, None)
                };
                m_vj[slot].push(m);
                q_vj[slot].push(q);
            }
            debug_assert_eq!(x_minus[slot].len(), i + 1);
        }
    });

    let mut max_abs = 0.0f64;
    let mut sum_abs = 0.0f64;
    let mut count = 0usize;
    let mut traces = Vec::with_capacity(ids.len());
    for (slot, &v) in ids.iter().enumerate() {
        let xm = std::mem::take(&mut x_minus[slot]);
        let xp = std::mem::take(&mut x_plus[slot]);
        let dxm: Vec<f64> = xm.windows(2).map(|w| w[1] - w[0]).collect();
        let dxp: Vec<f64> = xp.windows(2).map(|w| w[1] - w[0]).collect();
        for &d in dxm.iter().chain(&dxp) {
            max_abs = max_abs.max(d.abs());
            sum_abs += d.abs();
            count += 1;
        }
        let sigma = run.sigma[v];
        traces.push(TrackedTrace {
            vertex: v,
            sigma,
            rho: run.tau.min(sigma - 1),
            x_minus: xm,
            x_plus: xp,
            dx_minus: dxm,
            dx_plus: dxp,
            m_vj: std::mem::take(&mut m_vj[slot]),
            q_vj: std::mem::take(&mut q_vj[slot]),
        });
    }
    let bound_abs = ps.increment_cap();
    let bound_mean = (1..=run.completed_steps).map(|i| ps.mean_increment_cap(i)).collect();
    Ok(IncrementStats {
        max_abs_increment: max_abs,
        mean_abs_increment: if count == 0 { 0.0 } else { sum_abs / count as f64 },
        within_bound_abs: max_abs <= bound_abs,
        bound_abs,
        bound_mean,
        traces,
        run,
    })
}

/// `M_{v,j} = sum over u in V_j \ N_j[v] of |N(u) ∩ N(v) ∩ V_j|` and
/// `q_{v,j} = 1 - (d_j(v) + 1)/|V_j|` for an active `v`.
fn martingale_terms(state: &ProcessState<'_>, v: usize) -> (f64, f64) {
    let host = state.host();
    let active = state.active().words();
    let row_v = host.row(v);
    let nv: Vec<u64> = row_v.iter().zip(active).map(|(r, a)| r & a).collect();
    let mut m = 0u64;
    for u in Ones::new(active) {
        if u == v || row_v[u / 64] >> (u % 64) & 1 == 1 {
            continue;
        }
        m += host
            .row(u)
            .iter()
            .zip(&nv)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum::<u64>();
    }
    let d = state.degree(v).expect("active") as f64;
    (m as f64, 1.0 - (d + 1.0) / state.active_len() as f64)
}

/// Aggregates over independent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub params: ParamSet,
    pub seed: u64,
    pub trials: usize,
    /// Runs without any envelope violation.
    pub clean_runs: usize,
    pub clean_fraction: f64,
    pub steps: Vec<EnsembleStep>,
    /// Largest `|mean d_i / (p (|V_i| - 1)) - 1|` over all runs and steps.
    pub max_mean_degree_deviation: f64,
    pub max_abs_increment: f64,
    pub bound_abs: f64,
}

/// Per-step ensemble statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStep {
    pub i: usize,
    /// Runs that completed at least `i` steps.
    pub runs: usize,
    pub mean_active: f64,
    pub mean_degree: f64,
    /// Average of `p (|V_i| - 1)`.
    pub mean_predicted_degree: f64,
    pub max_rel_deviation: f64,
    /// Drift statistics of `Delta X` at this step (step 0 has none).
    pub dx_minus_mean: f64,
    pub dx_minus_se: f64,
    pub dx_plus_mean: f64,
    pub dx_plus_se: f64,
    pub dx_samples: usize,
}

struct TrialDigest {
    clean: bool,
    active: Vec<usize>,
    mean_degree: Vec<f64>,
    rel_dev: Vec<f64>,
    dxm: Vec<Vec<f64>>,
    dxp: Vec<Vec<f64>>,
    max_abs: f64,
}

/// Relative deviation of the mean induced degree from `p (|V_i| - 1)`.
pub fn mean_degree_deviation(p: f64, rec: &StepRecord) -> f64 {
    let predicted = p * rec.active_size.saturating_sub(1) as f64;
    if predicted == 0.0 {
        if rec.deg_mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (rec.deg_mean - predicted).abs() / predicted
    }
}

/// `trials` independent runs; trial `t` uses seed `derive_seed(seed, t)`,
/// so results do not depend on scheduling.
pub fn ensemble_run(
    host: &Graph,
    ps: &ParamSet,
    trials: usize,
    seed: u64,
    tracked: &VertexSet,
) -> Result<EnsembleSummary> {
    if trials == 0 {
        return Err(Error::Domain("ensemble needs at least one trial".into()));
    }
    check_params(host, ps)?;
    let digests: Vec<TrialDigest> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let stats = increment_diagnostics(host, ps, tracked, derive_seed(seed, t as u64), false)
                .expect("validated inputs");
            let recs = &stats.run.records;
            TrialDigest {
                clean: stats.run.first_violation.is_none(),
                active: recs.iter().map(|r| r.active_size).collect(),
                mean_degree: recs.iter().map(|r| r.deg_mean).collect(),
                rel_dev: recs.iter().map(|r| mean_degree_deviation(ps.p, r)).collect(),
                dxm: stats.traces.iter().map(|t| t.dx_minus.clone()).collect(),
                dxp: stats.traces.iter().map(|t| t.dx_plus.clone()).collect(),
                max_abs: stats.max_abs_increment,
            }
        })
        .collect();

    let mut steps = Vec::with_capacity(ps.k + 1);
    let mut max_dev = 0.0f64;
    for i in 0..=ps.k {
        let reaching: Vec<&TrialDigest> = digests.iter().filter(|d| d.active.len() > i).collect();
        if reaching.is_empty() {
            break;
        }
        let runs = reaching.len() as f64;
        let mean_active = reaching.iter().map(|d| d.active[i] as f64).sum::<f64>() / runs;
        let mean_degree = reaching.iter().map(|d| d.mean_degree[i]).sum::<f64>() / runs;
        let mean_predicted = reaching
            .iter()
            .map(|d| ps.p * d.active[i].saturating_sub(1) as f64)
            .sum::<f64>()
            / runs;
        let step_dev = reaching.iter().map(|d| d.rel_dev[i]).fold(0.0, f64::max);
        max_dev = max_dev.max(step_dev);

        let (mut sm, mut sm2, mut sp, mut sp2, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0usize);
        if i >= 1 {
            for d in &reaching {
                for (xm, xp) in d.dxm.iter().zip(&d.dxp) {
                    let (a, b) = (xm[i - 1], xp[i - 1]);
                    sm += a;
                    sm2 += a * a;
                    sp += b;
                    sp2 += b * b;
                    cnt += 1;
                }
            }
        }
        let (mm, sem) = mean_and_se(sm, sm2, cnt);
        let (mp, sep) = mean_and_se(sp, sp2, cnt);
        steps.push(EnsembleStep {
            i,
            runs: reaching.len(),
            mean_active,
            mean_degree,
            mean_predicted_degree: mean_predicted,
            max_rel_deviation: step_dev,
            dx_minus_mean: mm,
            dx_minus_se: sem,
            dx_plus_mean: mp,
            dx_plus_se: sep,
            dx_samples: cnt,
        });
    }
    let clean_runs = digests.iter().filter(|d| d.clean).count();
    Ok(EnsembleSummary {
        params: *ps,
        seed,
        trials,
        clean_runs,
        clean_fraction: clean_runs as f64 / trials as f64,
        steps,
        max_mean_degree_deviation: max_dev,
        max_abs_increment: digests.iter().map(|d| d.max_abs).fold(0.0, f64::max),
        bound_abs: ps.increment_cap(),
    })
}

fn mean_and_se(sum: f64, sum_sq: f64, count: usize) -> (f64, f64) {
    if count == 0 {
        return (0.0, 0.0);
    }
    let c = count as f64;
    let mean = sum / c;
    if count < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - c * mean * mean) / (c - 1.0)).max(0.0);
    (mean, (var / c).sqrt())
}

/// Helper for callers holding a generator rather than a seed.
pub fn run_steps<R: Rng + ?Sized>(state: &mut ProcessState<'_>, steps: usize, rng: &mut R) -> usize {
    let mut done = 0;
    while done < steps && state.step(rng).is_some() {
        done += 1;
    }
    done
}
