//! Randomized covers of the non-edges by independent sets.
//!
//! * A flat [`Cover`] is a family of `t` independent copies of `I_k`.
//! * A [`PartitionCover`] holds `t` collections; collection `i` is built from
//!   `s` independent copies `J_{i,1..s}` of `I_k` made pairwise disjoint via
//!   `I_{i,j} = J_{i,j} \ (J_{i,1} ∪ ... ∪ J_{i,j-1})`.
//!
//! Every construction is checked exhaustively by [`verify_cover`].

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::ParamSet;
use crate::error::{Error, Result};
use crate::graph::{words_for, Graph, Ones, VertexSet};
use crate::process::sample_independent_set;
use crate::rng::stream;

/// Family of independent sets (vertex ids, ascending).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub host_n: usize,
    pub sets: Vec<Vec<usize>>,
}

/// Family of collections of pairwise disjoint independent sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCover {
    pub host_n: usize,
    pub partitions: Vec<Vec<Vec<usize>>>,
}

/// Either kind of cover, for verification.
#[derive(Debug, Clone, Copy)]
pub enum CoverRef<'a> {
    Flat(&'a Cover),
    Partition(&'a PartitionCover),
}

impl<'a> From<&'a Cover> for CoverRef<'a> {
    fn from(c: &'a Cover) -> Self {
        CoverRef::Flat(c)
    }
}

impl<'a> From<&'a PartitionCover> for CoverRef<'a> {
    fn from(c: &'a PartitionCover) -> Self {
        CoverRef::Partition(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    /// The formula budget for this construction.
    pub t_formula: usize,
    pub mrss_lower: f64,
    /// Sets (flat) or partitions needed by the adaptive construction.
    pub adaptive_count: Option<usize>,
    /// `adaptive_count / (n log n / k)` for partition covers.
    pub empirical_c_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    /// Sets, or partitions for a partition cover.
    pub total_sets: usize,
    /// Cells across all partitions (equals `total_sets` for flat covers).
    pub total_cells: usize,
    pub singleton_cells: usize,
    pub non_edges: usize,
    pub uncovered_count: usize,
    pub uncovered: Vec<(usize, usize)>,
    pub covered_fraction: f64,
    pub bound_comparison: Option<BoundComparison>,
    /// The partition construction bounds idim; pdim may exceed it by one.
    pub note: Option<String>,
}

impl CoverReport {
    /// Writes the uncovered pairs as CSV (`u,v`); the summary fields only
    /// exist in the JSON form.
    pub fn write_uncovered_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| Error::Domain(format!("csv export failed: {e}"));
        w.write_record(["u", "v"]).map_err(fail)?;
        for &(u, v) in &self.uncovered {
            w.write_record([u.to_string(), v.to_string()]).map_err(fail)?;
        }
        w.flush().map_err(|e| Error::Domain(format!("csv export failed: {e}")))?;
        Ok(())
    }
}

fn draw_copy(host: &Graph, k: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut rng = stream(seed, index);
    let mut set = sample_independent_set(host, k, &mut rng);
    set.sort_unstable();
    set
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

/// `t` independent copies of `I_k`; copy `c` uses stream `c` of `seed`.
pub fn build_theta1_cover(host: &Graph, ps: &ParamSet, t: usize, seed: u64) -> Result<Cover> {
    check_params(host, ps)?;
    if t == 0 {
        return Err(Error::Domain("t must be at least 1".into()));
    }
    let sets = (0..t as u64)
        .into_par_iter()
        .map(|c| draw_copy(host, ps.k, seed, c))
        .collect();
    Ok(Cover {
        host_n: host.n(),
        sets,
    })
}

/// Uncovered non-edges kept as one bit-row per vertex.
struct Uncovered {
    words: usize,
    rows: Vec<u64>,
    remaining: usize,
}

impl Uncovered {
    fn new(host: &Graph) -> Self {
        let n = host.n();
        let words = words_for(n);
        let mut rows = vec![0u64; n * words];
        for u in 0..n {
            let full = VertexSet::full(n);
            for (w, (f, r)) in full.words().iter().zip(host.row(u)).enumerate() {
                rows[u * words + w] = f & !r;
            }
            rows[u * words + u / 64] &= !(1u64 << (u % 64));
        }
        Uncovered {
            words,
            rows,
            remaining: host.non_edge_count(),
        }
    }

    /// Marks every pair inside `set` as covered.
    fn cover(&mut self, set: &[usize], mask: &[u64]) {
        let mut cleared = 0usize;
        for &u in set {
            let row = &mut self.rows[u * self.words..(u + 1) * self.words];
            for (r, m) in row.iter_mut().zip(mask) {
                cleared += (*r & m).count_ones() as usize;
                *r &= !m;
            }
        }
        self.remaining -= cleared / 2;
    }

    fn pairs(&self, n: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..n {
            let row = &self.rows[u * self.words..(u + 1) * self.words];
            out.extend(Ones::new(row).filter(|&v| v > u).map(|v| (u, v)));
        }
        out
    }
}

fn mask_of(n: usize, set: &[usize]) -> Vec<u64> {
    let mut m = vec![0u64; words_for(n)];
    for &v in set {
        m[v / 64] |= 1 << (v % 64);
    }
    m
}

/// Result of an adaptive construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveCover<C> {
    pub cover: C,
    /// Sets (flat) or partitions used.
    pub count: usize,
    /// False when `max_t` was reached with non-edges still uncovered.
    pub complete: bool,
    pub uncovered_remaining: usize,
}

const ADAPTIVE_BATCH: usize = 256;

/// Adds copies of `I_k` (copy `c` from stream `c` of `seed`, as in
/// [`build_theta1_cover`]) until every non-edge is covered or `max_t` copies
/// have been drawn. The returned cover is exactly the first `count` copies.
pub fn build_theta1_adaptive(
    host: &Graph,
    ps: &ParamSet,
    seed: u64,
    max_t: usize,
) -> Result<AdaptiveCover<Cover>> {
    check_params(host, ps)?;
    if max_t == 0 {
        return Err(Error::Domain("max_t must be at least 1".into()));
    }
    let n = host.n();
    let mut unc = Uncovered::new(host);
    let mut sets = Vec::new();
    while unc.remaining > 0 && sets.len() < max_t {
        let start = sets.len();
        let end = (start + ADAPTIVE_BATCH).min(max_t);
        let batch: Vec<Vec<usize>> = (start as u64..end as u64)
            .into_par_iter()
            .map(|c| draw_copy(host, ps.k, seed, c))
            .collect();
        for set in batch {
            unc.cover(&set, &mask_of(n, &set));
            sets.push(set);
            if unc.remaining == 0 {
                break;
            }
        }
    }
    Ok(AdaptiveCover {
        count: sets.len(),
        complete: unc.remaining == 0,
        uncovered_remaining: unc.remaining,
        cover: Cover { host_n: n, sets },
    })
}

/// Copies `J_{i,1..s}` for partition `i` drawn from streams
/// `i*s .. i*s + s` of `seed`, then made disjoint in order of `j`; empty
/// cells are dropped.
fn build_partition(host: &Graph, k: usize, s: usize, i: usize, seed: u64) -> Vec<Vec<usize>> {
    let n = host.n();
    let mut used = vec![0u64; words_for(n)];
    let mut cells = Vec::with_capacity(s);
    for j in 0..s {
        let copy = draw_copy(host, k, seed, (i * s + j) as u64);
        let cell: Vec<usize> = copy
            .into_iter()
            .filter(|&v| used[v / 64] >> (v % 64) & 1 == 0)
            .collect();
        for &v in &cell {
            used[v / 64] |= 1 << (v % 64);
        }
        if !cell.is_empty() {
            cells.push(cell);
        }
    }
    cells
}

/// `t` collections of `s` disjointified copies of `I_k`.
pub fn build_pdim_cover(
    host: &Graph,
    ps: &ParamSet,
    s: usize,
    t: usize,
    seed: u64,
) -> Result<PartitionCover> {
    check_params(host, ps)?;
    if s == 0 || t == 0 {
        return Err(Error::Domain("s and t must be at least 1".into()));
    }
    let partitions = (0..t)
        .into_par_iter()
        .map(|i| build_partition(host, ps.k, s, i, seed))
        .collect();
    Ok(PartitionCover {
        host_n: host.n(),
        partitions,
    })
}

/// Adds partitions (each of `s` disjointified copies, built exactly as in
/// [`build_pdim_cover`]) until all non-edges are covered or `max_t`
/// partitions exist.
pub fn build_pdim_adaptive(
    host: &Graph,
    ps: &ParamSet,
    s: usize,
    seed: u64,
    max_t: usize,
) -> Result<AdaptiveCover<PartitionCover>> {
    check_params(host, ps)?;
    if s == 0 || max_t == 0 {
        return Err(Error::Domain("s and max_t must be at least 1".into()));
    }
    let n = host.n();
    let mut unc = Uncovered::new(host);
    let mut partitions = Vec::new();
    let batch_len = (ADAPTIVE_BATCH / s).max(1);
    while unc.remaining > 0 && partitions.len() < max_t {
        let start = partitions.len();
        let end = (start + batch_len).min(max_t);
        let batch: Vec<Vec<Vec<usize>>> = (start..end)
            .into_par_iter()
            .map(|i| build_partition(host, ps.k, s, i, seed))
            .collect();
        for part in batch {
            for cell in &part {
                unc.cover(cell, &mask_of(n, cell));
            }
            partitions.push(part);
            if unc.remaining == 0 {
                break;
            }
        }
    }
    Ok(AdaptiveCover {
        count: partitions.len(),
        complete: unc.remaining == 0,
        uncovered_remaining: unc.remaining,
        cover: PartitionCover {
            host_n: n,
            partitions,
        },
    })
}

fn cell_set(host: &Graph, cell: &[usize], what: &str) -> Result<VertexSet> {
    let set = VertexSet::from_vertices(host.n(), cell.iter().copied())
        .map_err(|_| Error::StructuralInvalid(format!("{what} references a vertex >= n")))?;
    if !host.is_independent(&set) {
        let (u, v) = cell
            .iter()
            .flat_map(|&u| cell.iter().map(move |&v| (u, v)))
            .find(|&(u, v)| host.has_edge(u, v))
            .expect("dependent set has an edge");
        return Err(Error::StructuralInvalid(format!(
            "{what} is not independent: contains edge ({}, {})",
            u.min(v),
            u.max(v)
        )));
    }
    Ok(set)
}

/// Checks independence of every set, disjointness inside every partition,
/// and coverage of every non-edge (exhaustively).
pub fn verify_cover<'a>(host: &Graph, cover: impl Into<CoverRef<'a>>) -> Result<CoverReport> {
    let cover = cover.into();
    let n = host.n();
    let host_n = match cover {
        CoverRef::Flat(c) => c.host_n,
        CoverRef::Partition(c) => c.host_n,
    };
    if host_n != n {
        return Err(Error::StructuralInvalid(format!(
            "cover built for {host_n} vertices, host has {n}"
        )));
    }
    let mut unc = Uncovered::new(host);
    let mut total_cells = 0;
    let mut singletons = 0;
    let total_sets;
    match cover {
        CoverRef::Flat(c) => {
            total_sets = c.sets.len();
            for (idx, set) in c.sets.iter().enumerate() {
                let vs = cell_set(host, set, &format!("set {idx}"))?;
                total_cells += 1;
                singletons += (vs.len() == 1) as usize;
                let members = vs.to_vec();
                unc.cover(&members, vs.words());
            }
        }
        CoverRef::Partition(c) => {
            total_sets = c.partitions.len();
            for (i, part) in c.partitions.iter().enumerate() {
                let mut seen = VertexSet::empty(n);
                for (j, cell) in part.iter().enumerate() {
                    let what = format!("partition {i} cell {j}");
                    let vs = cell_set(host, cell, &what)?;
                    if !vs.is_disjoint(&seen) {
                        let v = vs.iter().find(|&v| seen.contains(v)).expect("overlap");
                        return Err(Error::StructuralInvalid(format!(
                            "{what} overlaps an earlier cell of the partition at vertex {v}"
                        )));
                    }
                    seen.union_with(&vs);
                    total_cells += 1;
                    singletons += (vs.len() == 1) as usize;
                    let members = vs.to_vec();
                    unc.cover(&members, vs.words());
                }
            }
        }
    }
    let non_edges = host.non_edge_count();
    let uncovered = unc.pairs(n);
    debug_assert_eq!(uncovered.len(), unc.remaining);
    let covered_fraction = if non_edges == 0 {
        1.0
    } else {
        (non_edges - uncovered.len()) as f64 / non_edges as f64
    };
    Ok(CoverReport {
        total_sets,
        total_cells,
        singleton_cells: singletons,
        non_edges,
        uncovered_count: uncovered.len(),
        uncovered,
        covered_fraction,
        bound_comparison: None,
        note: matches!(cover, CoverRef::Partition(_))
            .then(|| "partition count bounds idim; pdim <= idim + 1".to_string()),
    })
}

/// A cover document as read from JSON: `{"host_n", "sets"}` or
/// `{"host_n", "partitions"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyCover {
    Flat(Cover),
    Partition(PartitionCover),
}

impl AnyCover {
    pub fn host_n(&self) -> usize {
        match self {
            AnyCover::Flat(c) => c.host_n,
            AnyCover::Partition(c) => c.host_n,
        }
    }

    pub fn as_ref(&self) -> CoverRef<'_> {
        match self {
            AnyCover::Flat(c) => CoverRef::Flat(c),
            AnyCover::Partition(c) => CoverRef::Partition(c),
        }
    }
}

impl<'a> From<&'a AnyCover> for CoverRef<'a> {
    fn from(c: &'a AnyCover) -> Self {
        c.as_ref()
    }
}

/// Parses a cover document. Vertex ids must be below `host_n`; structure
/// against a host is checked separately by [`verify_cover`].
pub fn parse_cover_json(text: &str) -> Result<AnyCover> {
    let doc: AnyCover = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let n = doc.host_n();
    let bad = match &doc {
        AnyCover::Flat(c) => c.sets.iter().flatten().find(|&&v| v >= n),
        AnyCover::Partition(c) => c.partitions.iter().flatten().flatten().find(|&&v| v >= n),
    };
    if let Some(v) = bad {
        return Err(Error::Domain(format!("vertex {v} out of range for host_n = {n}")));
    }
    Ok(doc)
}

/// Multiplier `count / (n log n / k)` that a partition count corresponds to.
pub fn empirical_c_eps(ps: &ParamSet, partitions: usize) -> f64 {
    partitions as f64 * ps.k as f64 / (ps.n as f64 * ps.log_n())
}
