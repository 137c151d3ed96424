//! Dense simple graphs with one adjacency bit-row per vertex.
//!
//! All neighbourhood queries used by the process (common non-neighbourhood,
//! codegree, induced degrees) reduce to word-parallel AND / ANDNOT and
//! popcount over these rows.

use std::fmt;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest vertex count accepted when parsing an edge list.
pub const MAX_VERTICES: usize = 1 << 16;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Mask of the valid bits in the last word of an `n`-bit row.
#[inline]
fn tail_mask(n: usize) -> u64 {
    match n % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Iterator over the set bits of a word slice.
#[derive(Clone)]
pub struct Ones<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl<'a> Ones<'a> {
    pub fn new(words: &'a [u64]) -> Self {
        Ones {
            words,
            idx: 0,
            cur: words.first().copied().unwrap_or(0),
        }
    }
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let bit = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * 64 + bit);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

/// A subset of `{0, .., n-1}` stored as a bit-vector with cached size.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    bits: Vec<u64>,
    size: usize,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet {
            n,
            bits: vec![0; words_for(n)],
            size: 0,
        }
    }

    pub fn full(n: usize) -> Self {
        let mut bits = vec![u64::MAX; words_for(n)];
        if let Some(last) = bits.last_mut() {
            *last &= tail_mask(n);
        }
        VertexSet { n, bits, size: n }
    }

    /// Builds a set from vertex ids; ids `>= n` are a domain error.
    pub fn from_vertices<I: IntoIterator<Item = usize>>(n: usize, vertices: I) -> Result<Self> {
        let mut s = VertexSet::empty(n);
        for v in vertices {
            if v >= n {
                return Err(Error::Domain(format!("vertex {v} out of range for n = {n}")));
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub(crate) fn from_words(n: usize, bits: Vec<u64>) -> Self {
        debug_assert_eq!(bits.len(), words_for(n));
        let size = bits.iter().map(|w| w.count_ones() as usize).sum();
        VertexSet { n, bits, size }
    }

    /// Size of the ground set.
    #[inline]
    pub fn universe(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.bits[v / 64] >> (v % 64) & 1 == 1
    }

    /// Inserts `v`, returning whether it was absent. Panics if `v >= n`.
    #[inline]
    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.n, "vertex {v} out of range for n = {}", self.n);
        let w = &mut self.bits[v / 64];
        let m = 1u64 << (v % 64);
        let fresh = *w & m == 0;
        *w |= m;
        self.size += fresh as usize;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, v: usize) -> bool {
        if v >= self.n {
            return false;
        }
        let w = &mut self.bits[v / 64];
        let m = 1u64 << (v % 64);
        let present = *w & m != 0;
        *w &= !m;
        self.size -= present as usize;
        present
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn iter(&self) -> Ones<'_> {
        Ones::new(&self.bits)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & b == 0)
    }

    /// Removes every member of `other` from `self`.
    pub fn difference_with(&mut self, other: &VertexSet) {
        let mut size = 0;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
            size += a.count_ones() as usize;
        }
        self.size = size;
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        let mut size = 0;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
            size += a.count_ones() as usize;
        }
        self.size = size;
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Immutable simple graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edge_count", &self.edge_count)
            .finish()
    }
}

/// Incremental builder; rejects loops and duplicate pairs.
struct Builder {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    edge_count: usize,
}

impl Builder {
    fn new(n: usize) -> Self {
        let words = words_for(n);
        Builder {
            n,
            words,
            adj: vec![0; n * words],
            edge_count: 0,
        }
    }

    fn has(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    fn set(&mut self, u: usize, v: usize) {
        self.adj[u * self.words + v / 64] |= 1 << (v % 64);
        self.adj[v * self.words + u / 64] |= 1 << (u % 64);
        self.edge_count += 1;
    }

    fn finish(self) -> Graph {
        Graph {
            n: self.n,
            words: self.words,
            adj: self.adj,
            edge_count: self.edge_count,
        }
    }
}

impl Graph {
    /// Graph with no edges.
    pub fn empty(n: usize) -> Self {
        Builder::new(n).finish()
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let mut b = Builder::new(n);
        for u in 0..n {
            for v in u + 1..n {
                b.set(u, v);
            }
        }
        b.finish()
    }

    /// Builds a graph from an edge list. Self-loops, duplicates and ids
    /// `>= n` are rejected; `line` in the error is the 1-based edge index.
    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self> {
        let mut b = Builder::new(n);
        for (idx, (u, v)) in edges.into_iter().enumerate() {
            b.try_add(u, v).map_err(|message| Error::Parse {
                line: idx + 1,
                message,
            })?;
        }
        Ok(b.finish())
    }

    /// `G(n, p)`: every unordered pair `{u, v}` with `u < v` is an edge
    /// independently with probability `p`.
    ///
    /// Row `u` draws its `n - u - 1` coins from ChaCha8 stream `u` of `seed`,
    /// so the result only depends on `(n, p, seed)`.
    pub fn gnp_sample(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ParameterDomain(format!("p = {p} outside [0, 1]")));
        }
        let mut b = Builder::new(n);
        for u in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u as u64);
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    b.set(u, v);
                }
            }
        }
        Ok(b.finish())
    }

    /// Complete bipartite graph with parts `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let mut g = Builder::new(a + b);
        for u in 0..a {
            for v in a..a + b {
                g.set(u, v);
            }
        }
        g.finish()
    }

    /// Star with centre 0.
    pub fn star(n: usize) -> Self {
        let mut b = Builder::new(n);
        for v in 1..n {
            b.set(0, v);
        }
        b.finish()
    }

    pub fn path(n: usize) -> Self {
        let mut b = Builder::new(n);
        for v in 1..n {
            b.set(v - 1, v);
        }
        b.finish()
    }

    pub fn cycle(n: usize) -> Self {
        let mut b = Builder::new(n);
        for v in 1..n {
            b.set(v - 1, v);
        }
        if n >= 3 {
            b.set(n - 1, 0);
        }
        b.finish()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of non-adjacent distinct pairs.
    pub fn non_edge_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2 - self.edge_count
    }

    /// Words per adjacency row.
    #[inline]
    pub fn row_words(&self) -> usize {
        self.words
    }

    /// Adjacency row of `v` (bit `u` set iff `uv` is an edge).
    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.row(u)[v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn neighbours(&self, v: usize) -> Ones<'_> {
        Ones::new(self.row(v))
    }

    /// Neighbourhood of `v` as a set.
    pub fn neighbourhood(&self, v: usize) -> VertexSet {
        VertexSet::from_words(self.n, self.row(v).to_vec())
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbours(u).filter(move |&v| v > u).map(move |v| (u, v))
        })
    }

    /// Non-adjacent distinct pairs `(u, v)` with `u < v`, each exactly once.
    pub fn non_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |u| {
            let row = self.row(u);
            let first = (u + 1) / 64;
            (first..self.words).flat_map(move |w| {
                let mut word = !row[w];
                if w == first {
                    // keep only v > u
                    let shift = (u + 1) % 64;
                    word &= u64::MAX.checked_shl(shift as u32).unwrap_or(0);
                }
                if w + 1 == self.words {
                    word &= tail_mask(n);
                }
                BitsOf(word).map(move |b| (u, w * 64 + b))
            })
        })
    }

    /// `V(g)` minus the union of closed neighbourhoods of `s`.
    pub fn common_non_neighbourhood(&self, s: &VertexSet) -> Result<VertexSet> {
        self.check_universe(s)?;
        let mut blocked = s.words().to_vec();
        for v in s.iter() {
            for (b, r) in blocked.iter_mut().zip(self.row(v)) {
                *b |= r;
            }
        }
        let mut out = VertexSet::full(self.n);
        for (o, b) in out.bits.iter_mut().zip(&blocked) {
            *o &= !b;
        }
        out.size = out.bits.iter().map(|w| w.count_ones() as usize).sum();
        Ok(out)
    }

    /// `|N(u) ∩ N(v)|`.
    pub fn codegree(&self, u: usize, v: usize) -> Result<usize> {
        if u == v {
            return Err(Error::Domain(format!("codegree of a vertex with itself ({u})")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::Domain(format!(
                "vertex pair ({u}, {v}) out of range for n = {}",
                self.n
            )));
        }
        Ok(self.codegree_unchecked(u, v))
    }

    #[inline]
    pub(crate) fn codegree_unchecked(&self, u: usize, v: usize) -> usize {
        self.row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// True iff no edge has both endpoints in `s`.
    pub fn is_independent(&self, s: &VertexSet) -> bool {
        if s.universe() != self.n {
            return false;
        }
        s.iter().all(|v| {
            self.row(v)
                .iter()
                .zip(s.words())
                .all(|(r, m)| r & m == 0)
        })
    }

    /// Independence check for a slice of vertex ids (duplicates allowed).
    pub fn is_independent_slice(&self, vertices: &[usize]) -> bool {
        match VertexSet::from_vertices(self.n, vertices.iter().copied()) {
            Ok(s) => self.is_independent(&s),
            Err(_) => false,
        }
    }

    fn check_universe(&self, s: &VertexSet) -> Result<()> {
        if s.universe() != self.n {
            return Err(Error::Domain(format!(
                "vertex set over {} vertices used with a graph on {}",
                s.universe(),
                self.n
            )));
        }
        Ok(())
    }

    /// Serializes to the edge-list text format: a header line `n m`, then
    /// one `u v` line per edge with `u < v`, in lexicographic order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 + self.edge_count * 10);
        let _ = writeln!(out, "{} {}", self.n, self.edge_count);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the edge-list text format with the default vertex limit.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        Self::from_edge_list_with_limit(text, MAX_VERTICES)
    }

    /// Parses the edge-list text format, rejecting headers with more than
    /// `max_vertices` vertices before allocating anything.
    ///
    /// Blank lines are skipped. Edge lines may list the endpoints in either
    /// order; loops, duplicates, ids `>= n` and an edge count that disagrees
    /// with the header are errors naming the 1-based line number.
    pub fn from_edge_list_with_limit(text: &str, max_vertices: usize) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header line \"n m\"".into(),
        })?;
        let (n, m) = parse_pair(header).map_err(|message| Error::Parse {
            line: hline,
            message: format!("header: {message}"),
        })?;
        if n > max_vertices {
            return Err(Error::Parse {
                line: hline,
                message: format!("vertex count {n} exceeds limit {max_vertices}"),
            });
        }
        let pairs = n * n.saturating_sub(1) / 2;
        if m > pairs {
            return Err(Error::Parse {
                line: hline,
                message: format!("edge count {m} exceeds the {pairs} pairs on {n} vertices"),
            });
        }

        let mut b = Builder::new(n);
        let mut seen = 0usize;
        for (line, body) in lines {
            if seen == m {
                return Err(Error::Parse {
                    line,
                    message: format!("more than the declared {m} edges"),
                });
            }
            let (u, v) = parse_pair(body).map_err(|message| Error::Parse { line, message })?;
            b.try_add(u, v).map_err(|message| Error::Parse { line, message })?;
            seen += 1;
        }
        if seen != m {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                message: format!("declared {m} edges, found {seen}"),
            });
        }
        Ok(b.finish())
    }
}

impl Builder {
    fn try_add(&mut self, u: usize, v: usize) -> std::result::Result<(), String> {
        if u >= self.n || v >= self.n {
            return Err(format!("vertex id out of range in ({u}, {v}) for n = {}", self.n));
        }
        if u == v {
            return Err(format!("self-loop at vertex {u}"));
        }
        if self.has(u, v) {
            return Err(format!("duplicate edge ({}, {})", u.min(v), u.max(v)));
        }
        self.set(u, v);
        Ok(())
    }
}

fn parse_pair(line: &str) -> std::result::Result<(usize, usize), String> {
    let mut it = line.split_ascii_whitespace();
    let a = it.next().ok_or("expected two integers")?;
    let b = it.next().ok_or("expected two integers")?;
    if it.next().is_some() {
        return Err("expected exactly two integers".into());
    }
    let parse = |t: &str| {
        if !t.bytes().all(|c| c.is_ascii_digit()) {
            return Err(format!("not a non-negative decimal integer: {t:?}"));
        }
        t.parse::<usize>().map_err(|e| format!("{t:?}: {e}"))
    };
    Ok((parse(a)?, parse(b)?))
}

struct BitsOf(u64);

impl Iterator for BitsOf {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}
