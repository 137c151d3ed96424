//! Monte Carlo estimators over repeated runs on a fixed host.
//!
//! Trial `t` always draws from stream `t` of the top-level seed, and counts
//! are merged by integer reduction, so every report is independent of the
//! thread count.

use std::collections::HashMap;
use std::io;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::ParamSet;
use crate::error::{Error, Result};
use crate::graph::{words_for, Graph, VertexSet};
use crate::process::{sample_independent_set, ProcessState};
use crate::rng::{derive_seed, stream, AUX_TAG};

/// Non-edges sampled for pair estimates unless configured otherwise.
pub const DEFAULT_PAIR_SAMPLE: usize = 200;
/// Cells whose conditioning event occurred fewer times are not estimated.
pub const MIN_CONDITIONING_TRIALS: u64 = 100;
/// Attempt cap for rejection sampling of uniform independent sets.
pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;
/// Largest host for the exhaustive exact sampler.
pub const EXACT_MAX_N: usize = 30;

const TRIAL_BATCH: usize = 1024;

/// `3 sqrt(f (1 - f) / trials)`.
pub fn binomial_radius(freq: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    3.0 * (freq * (1.0 - freq) / trials as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub u: usize,
    pub v: usize,
    pub count: u64,
    pub freq: f64,
    pub ci_radius: f64,
}

/// Membership frequencies of vertices and sampled non-edges in `I_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub params: ParamSet,
    pub seed: u64,
    pub trials: u64,
    pub vertex_counts: Vec<u64>,
    pub per_vertex_freq: Vec<f64>,
    pub vertex_ci_radius: Vec<f64>,
    /// Sum of `|I_k|` over all trials; equals the sum of `vertex_counts`.
    pub total_set_size: u64,
    pub pairs: Vec<PairEstimate>,
    /// `k / n`.
    pub predicted_vertex: f64,
    /// `(k / n)^2`.
    pub predicted_pair: f64,
    pub note: String,
}

impl EstimateReport {
    /// Fraction of vertices whose frequency is within `rel` (relative) of
    /// `k / n`.
    pub fn vertex_fraction_within(&self, rel: f64) -> f64 {
        let target = self.predicted_vertex;
        let ok = self
            .per_vertex_freq
            .iter()
            .filter(|&&f| (f - target).abs() <= rel * target)
            .count();
        ok as f64 / self.per_vertex_freq.len().max(1) as f64
    }

    /// Fraction of sampled pairs within `rel` of `(k / n)^2`.
    pub fn pair_fraction_within(&self, rel: f64) -> f64 {
        let target = self.predicted_pair;
        let ok = self
            .pairs
            .iter()
            .filter(|p| (p.freq - target).abs() <= rel * target)
            .count();
        ok as f64 / self.pairs.len().max(1) as f64
    }

    pub fn mean_set_size(&self) -> f64 {
        self.total_set_size as f64 / self.trials as f64
    }

    /// Per-vertex table as CSV: `v,count,freq,ci_radius`.
    pub fn write_vertex_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| Error::Domain(format!("csv export failed: {e}"));
        w.write_record(["v", "count", "freq", "ci_radius"]).map_err(fail)?;
        for (v, (&c, (&f, &r))) in self
            .vertex_counts
            .iter()
            .zip(self.per_vertex_freq.iter().zip(&self.vertex_ci_radius))
            .enumerate()
        {
            w.write_record([v.to_string(), c.to_string(), f.to_string(), r.to_string()])
                .map_err(fail)?;
        }
        w.flush().map_err(|e| Error::Domain(format!("csv export failed: {e}")))
    }

    /// Pair table as CSV: `u,v,count,freq,ci_radius`.
    pub fn write_pair_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.pairs {
            w.serialize(p)
                .map_err(|e| Error::Domain(format!("csv export failed: {e}")))?;
        }
        w.flush().map_err(|e| Error::Domain(format!("csv export failed: {e}")))
    }
}

/// Uniformly sampled distinct non-edges, sorted.
pub fn sample_non_edges(host: &Graph, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let total = host.non_edge_count();
    if count >= total {
        return host.non_edges().collect();
    }
    let mut rng = stream(seed ^ AUX_TAG, u64::MAX);
    let picks = index::sample(&mut rng, total, count).into_vec();
    let mut wanted = picks;
    wanted.sort_unstable();
    let mut out = Vec::with_capacity(count);
    let mut next = wanted.iter().peekable();
    for (idx, pair) in host.non_edges().enumerate() {
        match next.peek() {
            Some(&&w) if w == idx => {
                out.push(pair);
                next.next();
            }
            Some(_) => {}
            None => break,
        }
    }
    out
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

/// Membership frequencies of every vertex and of `pair_sample` sampled
/// non-edges in `I_k` over `trials` independent runs.
pub fn estimate_membership(
    host: &Graph,
    ps: &ParamSet,
    trials: u64,
    seed: u64,
    pair_sample: usize,
) -> Result<EstimateReport> {
    check_params(host, ps)?;
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let n = host.n();
    let pairs = sample_non_edges(host, pair_sample, seed);
    let batches = (trials as usize).div_ceil(TRIAL_BATCH);

    let (vertex_counts, pair_counts, total) = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut vc = vec![0u64; n];
            let mut pc = vec![0u64; pairs.len()];
            let mut total = 0u64;
            let mut mask = vec![0u64; words_for(n)];
            let lo = (b * TRIAL_BATCH) as u64;
            let hi = (lo + TRIAL_BATCH as u64).min(trials);
            for t in lo..hi {
                let mut rng = stream(seed, t);
                let set = sample_independent_set(host, ps.k, &mut rng);
                total += set.len() as u64;
                for &v in &set {
                    vc[v] += 1;
                    mask[v / 64] |= 1 << (v % 64);
                }
                for (c, &(u, v)) in pc.iter_mut().zip(&pairs) {
                    let both = (mask[u / 64] >> (u % 64)) & (mask[v / 64] >> (v % 64)) & 1;
                    *c += both;
                }
                for &v in &set {
                    mask[v / 64] = 0;
                }
            }
            (vc, pc, total)
        })
        .reduce(
            || (vec![0u64; n], vec![0u64; pairs.len()], 0u64),
            |(mut a, mut b, x), (c, d, y)| {
                a.iter_mut().zip(c).for_each(|(p, q)| *p += q);
                b.iter_mut().zip(d).for_each(|(p, q)| *p += q);
                (a, b, x + y)
            },
        );

    let tf = trials as f64;
    let per_vertex_freq: Vec<f64> = vertex_counts.iter().map(|&c| c as f64 / tf).collect();
    let vertex_ci_radius = per_vertex_freq
        .iter()
        .map(|&f| binomial_radius(f, trials))
        .collect();
    let pairs = pairs
        .into_iter()
        .zip(pair_counts)
        .map(|((u, v), count)| {
            let freq = count as f64 / tf;
            PairEstimate {
                u,
                v,
                count,
                freq,
                ci_radius: binomial_radius(freq, trials),
            }
        })
        .collect();
    let kn = ps.k as f64 / n as f64;
    Ok(EstimateReport {
        params: *ps,
        seed,
        trials,
        vertex_counts,
        per_vertex_freq,
        vertex_ci_radius,
        total_set_size: total,
        pairs,
        predicted_vertex: kn,
        predicted_pair: kn * kn,
        note: "predictions are leading-order values; tolerances are engineering choices".into(),
    })
}

/// One step `t` of the event chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCell {
    pub t: usize,
    /// Trials in which the conditioning event `E_{t-1}` occurred.
    pub conditioning: u64,
    /// Trials in which `E_t` occurred.
    pub hits: u64,
    /// `hits / conditioning`, absent when data is insufficient.
    pub freq: Option<f64>,
    pub insufficient: bool,
    pub predicted: f64,
    pub predicted_lower: f64,
    pub predicted_upper: f64,
    pub ratio: Option<f64>,
}

/// Conditional step frequencies of the chain `E_0 ⊇ E_1 ⊇ ... ⊇ E_j` for
/// the events `{v_i = u, v_j = v}` of a fixed non-edge `uv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEstimate {
    pub params: ParamSet,
    pub seed: u64,
    pub i: usize,
    pub j: usize,
    pub u: usize,
    pub v: usize,
    pub trials: u64,
    /// `reach[t]` = trials in which `E_t` occurred, `t = 0..=j`.
    pub reach: Vec<u64>,
    pub cells: Vec<ChainCell>,
    /// `reach[j] / trials`.
    pub joint_freq: f64,
    pub joint_ci_radius: f64,
    /// Product of the predicted central values, times `reach[0] / trials`.
    pub chain_prediction: f64,
    /// `n^-2`.
    pub plain_prediction: f64,
}

impl ConditionalEstimate {
    /// Product of `hits / conditioning` over all cells with nonzero
    /// conditioning, as an exact fraction `(numerator, denominator)` of the
    /// telescoped counts.
    pub fn chain_product_counts(&self) -> (u64, u64) {
        (self.reach[self.j], self.reach[0])
    }
}

/// Largest `t` for which `E_t` holds in one run, or `None` if even `E_0`
/// fails.
fn chain_depth(
    host: &Graph,
    ps: &ParamSet,
    (i, j, u, v): (usize, usize, usize, usize),
    rng: &mut impl Rng,
) -> Option<usize> {
    let mut state = ProcessState::new(host);
    let in_envelope = |s: &ProcessState<'_>| {
        let env = ps.envelope_unchecked(s.step_index());
        let (lo, hi, _) = s.degree_stats().expect("degrees tracked");
        s.active_len() == 0 || (lo as f64 >= env.lower && hi as f64 <= env.upper)
    };
    if !in_envelope(&state) {
        return None;
    }
    let mut depth = 0;
    for t in 1..=j {
        let chosen = state.step(rng)?;
        let ok = if t < i {
            state.active().contains(u) && state.active().contains(v)
        } else if t < j {
            (t != i || chosen == u) && state.active().contains(v)
        } else {
            chosen == v
        };
        if !ok || !in_envelope(&state) {
            break;
        }
        depth = t;
    }
    Some(depth)
}

/// Predicted conditional probability of `E_t` given `E_{t-1}` with its
/// error bars, clamped to `[0, 1]`.
fn predicted_cell(ps: &ParamSet, i: usize, j: usize, t: usize) -> (f64, f64, f64) {
    let f = ps.error_factor(t - 1);
    let p = ps.p;
    if t == i || t == j {
        let c = (1.0 - p).powf(-(t as f64) + 1.0) / ps.n as f64;
        (c, (c * (1.0 - 3.0 * f)).max(0.0), (c * (1.0 + 3.0 * f)).min(1.0))
    } else {
        let mult = if t < i { 2.0 } else { 1.0 };
        let c = 1.0 - mult * p;
        let e = mult * 3.0 * f * p;
        (c, (c - e).clamp(0.0, 1.0), (c + e).clamp(0.0, 1.0))
    }
}

/// Estimates every conditional step of the chain for the non-edge `uv`
/// with `v_i = u` and `v_j = v`, `1 <= i < j <= k`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_conditional_chain(
    host: &Graph,
    ps: &ParamSet,
    i: usize,
    j: usize,
    u: usize,
    v: usize,
    trials: u64,
    seed: u64,
) -> Result<ConditionalEstimate> {
    check_params(host, ps)?;
    if !(1 <= i && i < j && j <= ps.k) {
        return Err(Error::Domain(format!(
            "need 1 <= i < j <= k (got i = {i}, j = {j}, k = {})",
            ps.k
        )));
    }
    if u == v || u >= host.n() || v >= host.n() {
        return Err(Error::Domain(format!("({u}, {v}) is not a pair of distinct vertices")));
    }
    if host.has_edge(u, v) {
        return Err(Error::Domain(format!("({u}, {v}) is an edge")));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let batches = (trials as usize).div_ceil(TRIAL_BATCH);
    let reach = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut r = vec![0u64; j + 1];
            let lo = (b * TRIAL_BATCH) as u64;
            let hi = (lo + TRIAL_BATCH as u64).min(trials);
            for t in lo..hi {
                let mut rng = stream(seed, t);
                if let Some(depth) = chain_depth(host, ps, (i, j, u, v), &mut rng) {
                    r[..=depth].iter_mut().for_each(|x| *x += 1);
                }
            }
            r
        })
        .reduce(
            || vec![0u64; j + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let mut chain_prediction = reach[0] as f64 / trials as f64;
    let cells = (1..=j)
        .map(|t| {
            let (predicted, lo, hi) = predicted_cell(ps, i, j, t);
            chain_prediction *= predicted;
            let conditioning = reach[t - 1];
            let hits = reach[t];
            let insufficient = conditioning < MIN_CONDITIONING_TRIALS;
            let freq = (!insufficient).then(|| hits as f64 / conditioning as f64);
            ChainCell {
                t,
                conditioning,
                hits,
                freq,
                insufficient,
                predicted,
                predicted_lower: lo,
                predicted_upper: hi,
                ratio: freq.map(|f| f / predicted),
            }
        })
        .collect();
    let joint_freq = reach[j] as f64 / trials as f64;
    let nf = host.n() as f64;
    Ok(ConditionalEstimate {
        params: *ps,
        seed,
        i,
        j,
        u,
        v,
        trials,
        reach,
        cells,
        joint_freq,
        joint_ci_radius: binomial_radius(joint_freq, trials),
        chain_prediction,
        plain_prediction: 1.0 / (nf * nf),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformMode {
    Exact,
    Rejection,
}

/// Parts of a complete multipartite host (complement is a disjoint union of
/// cliques), or `None`.
pub fn multipartite_parts(host: &Graph) -> Option<Vec<Vec<usize>>> {
    let n = host.n();
    let mut part_of = vec![usize::MAX; n];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        if part_of[v] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&u| u == v || !host.has_edge(u, v)).collect();
        let id = parts.len();
        for &u in &members {
            if part_of[u] != usize::MAX {
                return None;
            }
            part_of[u] = id;
        }
        parts.push(members);
    }
    // parts must be independent and fully joined to each other
    for (a, part) in parts.iter().enumerate() {
        for &u in part {
            let expected = n - part.len();
            if host.degree(u) != expected {
                return None;
            }
            debug_assert!(part.iter().all(|&w| part_of[w] == a));
        }
    }
    Some(parts)
}

/// Binomial coefficient as `u128` (saturating).
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Counts independent `k`-subsets of the vertices in `mask` (n <= 30),
/// branching on the lowest vertex.
struct IndependentCounter<'g> {
    closed: Vec<u32>,
    memo: HashMap<(u32, u32), u128>,
    _host: &'g Graph,
}

impl<'g> IndependentCounter<'g> {
    fn new(host: &'g Graph) -> Self {
        let closed = (0..host.n())
            .map(|v| {
                let mut m = 1u32 << v;
                for u in host.neighbours(v) {
                    m |= 1 << u;
                }
                m
            })
            .collect();
        IndependentCounter {
            closed,
            memo: HashMap::new(),
            _host: host,
        }
    }

    fn count(&mut self, mask: u32, k: u32) -> u128 {
        if k == 0 {
            return 1;
        }
        if (mask.count_ones()) < k {
            return 0;
        }
        if let Some(&c) = self.memo.get(&(mask, k)) {
            return c;
        }
        let v = mask.trailing_zeros() as usize;
        let without = self.count(mask & !(1 << v), k);
        let with = self.count(mask & !self.closed[v], k - 1);
        let c = without + with;
        self.memo.insert((mask, k), c);
        c
    }
}

/// Number of independent `k`-sets, for hosts the exact sampler supports.
pub fn count_independent_sets(host: &Graph, k: usize) -> Result<u128> {
    if let Some(parts) = multipartite_parts(host) {
        return Ok(parts.iter().map(|p| binomial(p.len(), k)).sum());
    }
    if host.n() > EXACT_MAX_N {
        return Err(Error::Domain(format!(
            "exact counting needs n <= {EXACT_MAX_N} or a complete multipartite host"
        )));
    }
    let full = if host.n() == 32 { u32::MAX } else { (1u32 << host.n()) - 1 };
    Ok(IndependentCounter::new(host).count(full, k as u32))
}

/// Uniformly random independent `k`-set.
///
/// Exact mode uses a closed form on complete multipartite hosts and exact
/// counting with unranking on other hosts with `n <= 30`. Rejection mode
/// draws uniform `k`-subsets until one is independent.
pub fn uniform_independent_set(
    host: &Graph,
    k: usize,
    seed: u64,
    mode: UniformMode,
) -> Result<VertexSet> {
    uniform_independent_set_with_cap(host, k, seed, mode, DEFAULT_REJECTION_CAP)
}

pub fn uniform_independent_set_with_cap(
    host: &Graph,
    k: usize,
    seed: u64,
    mode: UniformMode,
    rejection_cap: u64,
) -> Result<VertexSet> {
    let n = host.n();
    let mut rng = stream(seed, 0);
    match mode {
        UniformMode::Rejection => {
            if k > n {
                return Err(Error::NoIndependentSet { k });
            }
            for _ in 0..rejection_cap {
                let set = VertexSet::from_vertices(n, index::sample(&mut rng, n, k).into_iter())?;
                if host.is_independent(&set) {
                    return Ok(set);
                }
            }
            Err(Error::RejectionInfeasible {
                attempts: rejection_cap,
            })
        }
        UniformMode::Exact => {
            if let Some(parts) = multipartite_parts(host) {
                let weights: Vec<u128> = parts.iter().map(|p| binomial(p.len(), k)).collect();
                let total: u128 = weights.iter().sum();
                if total == 0 {
                    return Err(Error::NoIndependentSet { k });
                }
                let mut r = rng.random_range(0..total);
                let part = weights
                    .iter()
                    .position(|&w| {
                        if r < w {
                            true
                        } else {
                            r -= w;
                            false
                        }
                    })
                    .expect("r < total");
                let members = &parts[part];
                let picks = index::sample(&mut rng, members.len(), k);
                return VertexSet::from_vertices(n, picks.into_iter().map(|x| members[x]));
            }
            if n > EXACT_MAX_N {
                return Err(Error::Domain(format!(
                    "exact mode needs n <= {EXACT_MAX_N} or a complete multipartite host"
                )));
            }
            let mut counter = IndependentCounter::new(host);
            let mut mask: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
            let mut left = k as u32;
            let total = counter.count(mask, left);
            if total == 0 {
                return Err(Error::NoIndependentSet { k });
            }
            let mut r = rng.random_range(0..total);
            let mut out = VertexSet::empty(n);
            while left > 0 {
                let v = mask.trailing_zeros() as usize;
                let with = counter.count(mask & !counter.closed[v], left - 1);
                if r < with {
                    out.insert(v);
                    mask &= !counter.closed[v];
                    left -= 1;
                } else {
                    r -= with;
                    mask &= !(1 << v);
                }
            }
            Ok(out)
        }
    }
}

/// Uniform versus greedy probability that two fixed vertices of the
/// smaller part of `K_{a,b}` both end up in the chosen `k`-set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteComparison {
    pub a: usize,
    pub b: usize,
    pub k: usize,
    /// `C(a-2, k-2) / (C(a, k) + C(b, k))`.
    pub uniform_exact: f64,
    /// `(a / (a + b)) * k (k - 1) / (a (a - 1))`.
    pub greedy_exact: f64,
    pub ratio_exact: f64,
    pub trials: u64,
    pub greedy_hits: u64,
    pub greedy_mc: f64,
    /// Three binomial standard deviations of `greedy_mc`.
    pub greedy_mc_radius: f64,
    pub ratio_mc: f64,
    pub ratio_mc_radius: f64,
}

pub fn bipartite_comparison(
    a: usize,
    b: usize,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<BipartiteComparison> {
    if !(a >= k && k >= 2) {
        return Err(Error::Domain(format!("need a >= k >= 2 (got a = {a}, k = {k})")));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let uniform_exact =
        binomial(a - 2, k - 2) as f64 / (binomial(a, k) as f64 + binomial(b, k) as f64);
    let greedy_exact =
        (a as f64 / (a + b) as f64) * (k * (k - 1)) as f64 / (a * (a - 1)) as f64;

    let host = Graph::complete_bipartite(a, b);
    let batches = (trials as usize).div_ceil(TRIAL_BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|bi| {
            let lo = (bi * TRIAL_BATCH) as u64;
            let hi = (lo + TRIAL_BATCH as u64).min(trials);
            let mut h = 0u64;
            for t in lo..hi {
                let mut rng = stream(seed, t);
                let set = sample_independent_set(&host, k, &mut rng);
                let has = |x: usize| set.contains(&x);
                h += (has(0) && has(1)) as u64;
            }
            h
        })
        .sum();
    let greedy_mc = hits as f64 / trials as f64;
    let greedy_mc_radius = binomial_radius(greedy_mc, trials);
    Ok(BipartiteComparison {
        a,
        b,
        k,
        uniform_exact,
        greedy_exact,
        ratio_exact: greedy_exact / uniform_exact,
        trials,
        greedy_hits: hits,
        greedy_mc,
        greedy_mc_radius,
        ratio_mc: greedy_mc / uniform_exact,
        ratio_mc_radius: greedy_mc_radius / uniform_exact,
    })
}

/// Seed used by [`uniform_independent_set`] for its `index`-th draw when
/// called in a loop by tools.
pub fn uniform_draw_seed(seed: u64, index: u64) -> u64 {
    derive_seed(seed ^ AUX_TAG, index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(20, 3), 1140);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(30, 15), 155_117_520);
    }

    #[test]
    fn membership_single_draw_is_uniform() {
        // k = 1 on the empty graph and any k on K_n pick one uniform vertex
        let n = 10;
        let ps = ParamSet::derive(n, 0.5, 0.5).unwrap().with_process_length(1).unwrap();
        for g in [Graph::empty(n), Graph::complete(n)] {
            let ps = if g.edge_count() == 0 { ps } else { ps.with_process_length(4).unwrap() };
            let r = estimate_membership(&g, &ps, 20_000, 3, 5).unwrap();
            assert_eq!(r.total_set_size, 20_000);
            for &f in &r.per_vertex_freq {
                assert!((f - 0.1).abs() < 3.0 * binomial_radius(0.1, 20_000) + 1e-12, "{f}");
            }
        }
    }

    #[test]
    fn membership_count_identity_and_containment() {
        let g = Graph::gnp_sample(120, 0.1, 4).unwrap();
        let ps = ParamSet::derive(120, 0.1, 0.5).unwrap();
        let r = estimate_membership(&g, &ps, 3000, 8, 50).unwrap();
        assert_eq!(r.vertex_counts.iter().sum::<u64>(), r.total_set_size);
        assert_eq!(r.pairs.len(), 50);
        for p in &r.pairs {
            assert!(!g.has_edge(p.u, p.v));
            assert!(p.count <= r.vertex_counts[p.u].min(r.vertex_counts[p.v]));
        }
        assert!(estimate_membership(&g, &ps, 0, 8, 50).is_err());
    }

    #[test]
    fn chain_first_step_on_empty_graph() {
        let n = 20;
        let g = Graph::empty(n);
        let ps = ParamSet::derive(n, 0.2, 0.5).unwrap().with_process_length(5).unwrap();
        let trials = 40_000;
        let c = estimate_conditional_chain(&g, &ps, 1, 2, 3, 7, trials, 1).unwrap();
        let f = c.cells[0].freq.unwrap();
        assert!((f - 1.0 / n as f64).abs() < 3.0 * binomial_radius(0.05, trials));
        let (num, den) = c.chain_product_counts();
        assert_eq!(num, c.reach[2]);
        assert_eq!(den, c.reach[0]);
        assert_eq!(c.reach[0], trials);
    }

    #[test]
    fn chain_rejects_bad_inputs() {
        let g = Graph::path(12);
        let ps = ParamSet::derive(12, 0.3, 1.0).unwrap();
        assert!(estimate_conditional_chain(&g, &ps, 0, 2, 0, 5, 10, 1).is_err());
        assert!(estimate_conditional_chain(&g, &ps, 2, 2, 0, 5, 10, 1).is_err());
        assert!(estimate_conditional_chain(&g, &ps, 1, 2, 0, 1, 10, 1).is_err());
        assert!(estimate_conditional_chain(&g, &ps, 1, 2, 3, 3, 10, 1).is_err());
        let c = estimate_conditional_chain(&g, &ps, 1, 2, 0, 5, 10, 1).unwrap();
        assert!(c.cells.iter().all(|cell| cell.insufficient || cell.t == 1));
    }

    #[test]
    fn uniform_sampler_examples() {
        let g = Graph::empty(8);
        let s = uniform_independent_set(&g, 3, 1, UniformMode::Exact).unwrap();
        assert_eq!(s.len(), 3);
        let s = uniform_independent_set(&g, 3, 1, UniformMode::Rejection).unwrap();
        assert_eq!(s.len(), 3);

        let k = Graph::complete(6);
        assert!(matches!(
            uniform_independent_set(&k, 2, 1, UniformMode::Exact),
            Err(Error::NoIndependentSet { k: 2 })
        ));
        assert!(matches!(
            uniform_independent_set_with_cap(&k, 2, 1, UniformMode::Rejection, 50),
            Err(Error::RejectionInfeasible { attempts: 50 })
        ));

        let kb = Graph::complete_bipartite(10, 20);
        assert_eq!(count_independent_sets(&kb, 3).unwrap(), 1260);
        // n = 30 is also inside the enumeration range; both routes agree
        let mut counter = IndependentCounter::new(&kb);
        assert_eq!(counter.count((1u32 << 30) - 1, 3), 1260);
    }

    #[test]
    fn exact_sampler_on_irregular_host() {
        let g = Graph::gnp_sample(14, 0.3, 2).unwrap();
        let k = 3;
        let total = count_independent_sets(&g, k).unwrap();
        // brute-force count
        let mut brute = 0u128;
        for mask in 0u32..(1 << 14) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let vs: Vec<usize> = (0..14).filter(|&v| mask >> v & 1 == 1).collect();
            brute += g.is_independent_slice(&vs) as u128;
        }
        assert_eq!(total, brute);
        for seed in 0..50 {
            let s = uniform_independent_set(&g, k, seed, UniformMode::Exact).unwrap();
            assert_eq!(s.len(), k);
            assert!(g.is_independent(&s));
        }
    }

    #[test]
    fn multipartite_detection() {
        assert_eq!(multipartite_parts(&Graph::complete_bipartite(3, 4)).unwrap().len(), 2);
        assert_eq!(multipartite_parts(&Graph::empty(5)).unwrap().len(), 1);
        assert_eq!(multipartite_parts(&Graph::complete(5)).unwrap().len(), 5);
        assert!(multipartite_parts(&Graph::path(4)).is_none());
    }

    #[test]
    fn bipartite_exact_values() {
        let c = bipartite_comparison(10, 20, 3, 1000, 1).unwrap();
        assert!((c.uniform_exact - 8.0 / 1260.0).abs() < 1e-15);
        assert!((c.greedy_exact - 1.0 / 45.0).abs() < 1e-15);
        assert!((c.ratio_exact - 3.5).abs() < 1e-12);
        let eq = bipartite_comparison(12, 12, 4, 1000, 1).unwrap();
        assert!((eq.ratio_exact - 1.0).abs() < 1e-12);
        let skew = bipartite_comparison(2, 20, 2, 1000, 1).unwrap();
        assert!((skew.uniform_exact - 1.0 / 191.0).abs() < 1e-15);
        assert!((skew.greedy_exact - 2.0 / 22.0).abs() < 1e-15);
        assert!((skew.ratio_exact - 191.0 / 11.0).abs() < 1e-12);
        assert!(bipartite_comparison(2, 5, 3, 10, 1).is_err());
    }
}
