//! Labeled graph types shared by every model.
//!
//! Vertices are 1-indexed. Unordered pairs are stored as `(u, v)` with `u <= v`;
//! a loop `(v, v)` contributes 2 to the degree of `v`.

mod io;

pub use io::{read_multigraph, read_pairing, write_multigraph, write_pairing};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type Vertex = u32;

/// Vertex-labeled multigraph with loop and edge multiplicities.
///
/// Edges are kept sorted by `(u, v)` with every multiplicity at least 1; the
/// type is immutable once built, so two multigraphs compare equal exactly when
/// their edge maps agree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Multigraph {
    n: usize,
    edges: Vec<(Vertex, Vertex, u32)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContainmentMode {
    /// Every pair of `sub` is present in `super`, multiplicities ignored.
    SimpleSubgraph,
    /// Every multiplicity of `sub` is at most the one in `super`.
    SubMultigraph,
}

impl Multigraph {
    pub fn empty(n: usize) -> Self {
        Multigraph { n, edges: Vec::new() }
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 1..=n as Vertex {
            for v in u + 1..=n as Vertex {
                edges.push((u, v, 1));
            }
        }
        Multigraph { n, edges }
    }

    /// Builds a multigraph from `(u, v, multiplicity)` triples. Repeated pairs are
    /// merged by adding multiplicities; zero multiplicities are dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex, u32)>,
    {
        let mut list: Vec<(Vertex, Vertex, u32)> = Vec::new();
        for (a, b, m) in edges {
            if a == 0 || b == 0 || a as usize > n || b as usize > n {
                return Err(invalid(format!("edge ({a},{b}) outside [1,{n}]")));
            }
            if m == 0 {
                continue;
            }
            let (u, v) = if a <= b { (a, b) } else { (b, a) };
            list.push((u, v, m));
        }
        Ok(Self::from_unchecked(n, list))
    }

    /// Simple edges, each with multiplicity one (duplicates merge).
    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        Self::from_edges(n, pairs.into_iter().map(|(u, v)| (u, v, 1)))
    }

    pub(crate) fn from_unchecked(n: usize, mut list: Vec<(Vertex, Vertex, u32)>) -> Self {
        list.sort_unstable_by_key(|&(u, v, _)| (u, v));
        let mut edges: Vec<(Vertex, Vertex, u32)> = Vec::with_capacity(list.len());
        for (u, v, m) in list {
            match edges.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 += m,
                _ => edges.push((u, v, m)),
            }
        }
        Multigraph { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Distinct pairs with their multiplicities, sorted.
    pub fn edges(&self) -> &[(Vertex, Vertex, u32)] {
        &self.edges
    }

    /// Number of distinct vertex pairs carrying at least one edge.
    pub fn distinct_pairs(&self) -> usize {
        self.edges.len()
    }

    /// Total number of edges counted with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.edges.iter().map(|e| e.2 as u64).sum()
    }

    pub fn multiplicity(&self, a: Vertex, b: Vertex) -> u32 {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.edges
            .binary_search_by_key(&key, |&(u, v, _)| (u, v))
            .map(|i| self.edges[i].2)
            .unwrap_or(0)
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.multiplicity(a, b) > 0
    }

    /// Degrees indexed by `v - 1`; loops count twice.
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for &(u, v, m) in &self.edges {
            deg[u as usize - 1] += m;
            deg[v as usize - 1] += m;
        }
        deg
    }

    pub fn degree(&self, v: Vertex) -> u32 {
        self.degrees()[v as usize - 1]
    }

    pub fn is_simple(&self) -> bool {
        self.edges.iter().all(|&(u, v, m)| u != v && m == 1)
    }

    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(|&(u, v, _)| u == v)
    }

    /// Replaces every multiple edge by a simple one (loops are kept as single loops).
    pub fn capped(&self) -> Multigraph {
        Multigraph {
            n: self.n,
            edges: self.edges.iter().map(|&(u, v, _)| (u, v, 1)).collect(),
        }
    }

    /// Superposition: multiplicities add.
    pub fn superpose(&self, other: &Multigraph) -> Result<Multigraph> {
        if self.n != other.n {
            return Err(Error::VertexCountMismatch(self.n, other.n));
        }
        let mut list = self.edges.clone();
        list.extend_from_slice(&other.edges);
        Ok(Self::from_unchecked(self.n, list))
    }

    /// Union of edge sets (result is capped at multiplicity one).
    pub fn union(&self, other: &Multigraph) -> Result<Multigraph> {
        Ok(self.superpose(other)?.capped())
    }

    /// Adjacency lists over distinct neighbours, indexed by `v - 1`.
    pub fn neighbours(&self) -> Vec<Vec<Vertex>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, _) in &self.edges {
            if u != v {
                adj[u as usize - 1].push(v);
                adj[v as usize - 1].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Relabels vertices: vertex `v` becomes `perm[v - 1]`.
    pub fn relabel(&self, perm: &[Vertex]) -> Result<Multigraph> {
        if perm.len() != self.n {
            return Err(Error::VertexCountMismatch(perm.len(), self.n));
        }
        let list = self
            .edges
            .iter()
            .map(|&(u, v, m)| {
                let (a, b) = (perm[u as usize - 1], perm[v as usize - 1]);
                if a <= b {
                    (a, b, m)
                } else {
                    (b, a, m)
                }
            })
            .collect();
        Ok(Self::from_unchecked(self.n, list))
    }

    /// Sorted `u,v,mult` triples joined by `;`. Used as the key of finite distributions.
    pub fn canonical_key(&self) -> String {
        let parts: Vec<String> = self
            .edges
            .iter()
            .map(|&(u, v, m)| format!("{u},{v},{m}"))
            .collect();
        format!("{}:{}", self.n, parts.join(";"))
    }

    pub fn from_canonical_key(key: &str) -> Result<Multigraph> {
        let bad = || Error::Parse { line: 0, msg: format!("bad multigraph key '{key}'") };
        let (n, rest) = key.split_once(':').ok_or_else(bad)?;
        let n: usize = n.parse().map_err(|_| bad())?;
        let mut list = Vec::new();
        if !rest.is_empty() {
            for part in rest.split(';') {
                let f: Vec<&str> = part.split(',').collect();
                if f.len() != 3 {
                    return Err(bad());
                }
                let p = |s: &str| s.parse::<u32>().map_err(|_| bad());
                list.push((p(f[0])?, p(f[1])?, p(f[2])?));
            }
        }
        Multigraph::from_edges(n, list)
    }
}

impl fmt::Display for Multigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_key())
    }
}

/// Containment predicate used by every coupling report.
pub fn contains(sub: &Multigraph, sup: &Multigraph, mode: ContainmentMode) -> Result<bool> {
    if sub.n != sup.n {
        return Err(Error::VertexCountMismatch(sub.n, sup.n));
    }
    // both edge lists are sorted, so a merge walk suffices
    let mut j = 0;
    for &(u, v, m) in &sub.edges {
        while j < sup.edges.len() && (sup.edges[j].0, sup.edges[j].1) < (u, v) {
            j += 1;
        }
        if j == sup.edges.len() || (sup.edges[j].0, sup.edges[j].1) != (u, v) {
            return Ok(false);
        }
        if mode == ContainmentMode::SubMultigraph && sup.edges[j].2 < m {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A point of a pairing: `(vertex, slot)` with slot in `1..=d`.
pub type Point = (Vertex, u32);

/// Perfect matching on the `d * n` points grouped into `n` bins of `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pairing {
    n: usize,
    d: u32,
    pairs: Vec<(Point, Point)>,
}

impl Pairing {
    /// Validates that every point appears exactly once.
    pub fn new(n: usize, d: u32, pairs: Vec<(Point, Point)>) -> Result<Self> {
        if (n as u64 * d as u64) % 2 != 0 {
            return Err(invalid(format!("d*n = {}*{} is odd", d, n)));
        }
        if pairs.len() as u64 * 2 != n as u64 * d as u64 {
            return Err(invalid(format!(
                "pairing has {} pairs, expected {}",
                pairs.len(),
                n as u64 * d as u64 / 2
            )));
        }
        let mut seen = vec![false; n * d as usize];
        for &(a, b) in &pairs {
            for (v, s) in [a, b] {
                if v == 0 || v as usize > n || s == 0 || s > d {
                    return Err(invalid(format!("point ({v},{s}) out of range")));
                }
                let idx = (v as usize - 1) * d as usize + (s as usize - 1);
                if seen[idx] {
                    return Err(invalid(format!("point ({v},{s}) used twice")));
                }
                seen[idx] = true;
            }
        }
        let mut pairs: Vec<(Point, Point)> =
            pairs.into_iter().map(|(a, b)| if a <= b { (a, b) } else { (b, a) }).collect();
        pairs.sort_unstable();
        Ok(Pairing { n, d, pairs })
    }

    /// Builds a pairing from a permutation-style point matching where point `i`
    /// (0-based, `i = (v - 1) * d + slot - 1`) is matched with `mate[i]`.
    pub(crate) fn from_point_pairs(n: usize, d: u32, flat: &[(usize, usize)]) -> Pairing {
        let to_point = |i: usize| ((i / d as usize) as Vertex + 1, (i % d as usize) as u32 + 1);
        let mut pairs: Vec<(Point, Point)> = flat
            .iter()
            .map(|&(a, b)| {
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                (to_point(a), to_point(b))
            })
            .collect();
        pairs.sort_unstable();
        Pairing { n, d, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn pairs(&self) -> &[(Point, Point)] {
        &self.pairs
    }

    /// Multigraph obtained by contracting each bin into a single vertex.
    pub fn project(&self) -> Multigraph {
        let list = self.pairs.iter().map(|&((u, _), (v, _))| (u.min(v), u.max(v), 1)).collect();
        Multigraph::from_unchecked(self.n, list)
    }
}

/// Perfect matching of `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Matching {
    n: usize,
    pairs: Vec<(Vertex, Vertex)>,
}

impl Matching {
    pub fn new(n: usize, pairs: Vec<(Vertex, Vertex)>) -> Result<Self> {
        if n % 2 != 0 {
            return Err(invalid(format!("perfect matching needs even n, got {n}")));
        }
        if pairs.len() * 2 != n {
            return Err(invalid(format!("{} pairs cannot cover {} vertices", pairs.len(), n)));
        }
        let mut covered = vec![false; n];
        for &(a, b) in &pairs {
            if a == b || a == 0 || b == 0 || a as usize > n || b as usize > n {
                return Err(invalid(format!("bad matching pair ({a},{b})")));
            }
            for v in [a, b] {
                if covered[v as usize - 1] {
                    return Err(invalid(format!("vertex {v} covered twice")));
                }
                covered[v as usize - 1] = true;
            }
        }
        Ok(Self::from_unchecked(n, pairs))
    }

    pub(crate) fn from_unchecked(n: usize, pairs: Vec<(Vertex, Vertex)>) -> Self {
        let mut pairs: Vec<(Vertex, Vertex)> =
            pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        pairs.sort_unstable();
        Matching { n, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(Vertex, Vertex)] {
        &self.pairs
    }

    pub fn to_multigraph(&self) -> Multigraph {
        Multigraph::from_unchecked(self.n, self.pairs.iter().map(|&(u, v)| (u, v, 1)).collect())
    }

    /// Partner of every vertex, indexed by `v - 1`.
    pub fn mates(&self) -> Vec<Vertex> {
        let mut mate = vec![0; self.n];
        for &(u, v) in &self.pairs {
            mate[u as usize - 1] = v;
            mate[v as usize - 1] = u;
        }
        mate
    }
}

/// Simple digraph without self-arcs; out-neighbourhoods stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Digraph {
    n: usize,
    out: Vec<Vec<Vertex>>,
}

impl Digraph {
    pub fn new(n: usize, out: Vec<Vec<Vertex>>) -> Result<Self> {
        if out.len() != n {
            return Err(Error::VertexCountMismatch(out.len(), n));
        }
        let mut out = out;
        for (i, list) in out.iter_mut().enumerate() {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return Err(invalid(format!("duplicate arc out of vertex {}", i + 1)));
            }
            if list.iter().any(|&w| w == 0 || w as usize > n || w as usize == i + 1) {
                return Err(invalid(format!("bad arc out of vertex {}", i + 1)));
            }
        }
        Ok(Digraph { n, out })
    }

    pub(crate) fn from_unchecked(n: usize, mut out: Vec<Vec<Vertex>>) -> Self {
        for list in &mut out {
            list.sort_unstable();
        }
        Digraph { n, out }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn out_neighbours(&self, v: Vertex) -> &[Vertex] {
        &self.out[v as usize - 1]
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out[v as usize - 1].len()
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn has_arc(&self, u: Vertex, v: Vertex) -> bool {
        self.out[u as usize - 1].binary_search(&v).is_ok()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().map(move |&w| (i as Vertex + 1, w)))
    }

    /// Underlying simple graph: orientations dropped, double edges merged.
    pub fn to_undirected(&self) -> Multigraph {
        let list = self.arcs().map(|(u, v)| (u.min(v), u.max(v), 1)).collect();
        Multigraph::from_unchecked(self.n, list).capped()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_count_loops_twice() {
        let g = Multigraph::from_edges(3, [(1, 2, 2), (3, 3, 1)]).unwrap();
        assert_eq!(g.degrees(), vec![2, 2, 2]);
        assert!(!g.is_simple());
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn from_edges_merges_and_orders() {
        let g = Multigraph::from_edges(4, [(2, 1, 1), (1, 2, 1), (4, 3, 1)]).unwrap();
        assert_eq!(g.edges(), &[(1, 2, 2), (3, 4, 1)]);
        assert!(Multigraph::from_edges(2, [(1, 3, 1)]).is_err());
    }

    #[test]
    fn containment_examples() {
        let empty = Multigraph::empty(4);
        let k4 = Multigraph::complete(4);
        assert!(contains(&empty, &k4, ContainmentMode::SubMultigraph).unwrap());
        let double = Multigraph::from_edges(2, [(1, 2, 2)]).unwrap();
        let single = Multigraph::from_edges(2, [(1, 2, 1)]).unwrap();
        assert!(!contains(&double, &single, ContainmentMode::SubMultigraph).unwrap());
        assert!(contains(&double, &single, ContainmentMode::SimpleSubgraph).unwrap());
        assert!(contains(&single, &k4, ContainmentMode::SimpleSubgraph).is_err());
    }

    #[test]
    fn projection_examples() {
        let p = Pairing::new(1, 2, vec![((1, 1), (1, 2))]).unwrap();
        assert_eq!(p.project().edges(), &[(1, 1, 1)]);
        let p = Pairing::new(2, 2, vec![((1, 1), (2, 1)), ((1, 2), (2, 2))]).unwrap();
        assert_eq!(p.project().edges(), &[(1, 2, 2)]);
    }

    #[test]
    fn pairing_rejects_reused_points() {
        assert!(Pairing::new(2, 1, vec![((1, 1), (1, 1))]).is_err());
        assert!(Pairing::new(3, 1, vec![]).is_err());
    }

    #[test]
    fn canonical_key_round_trip() {
        let g = Multigraph::from_edges(5, [(1, 2, 2), (3, 3, 1), (4, 5, 1)]).unwrap();
        assert_eq!(Multigraph::from_canonical_key(&g.canonical_key()).unwrap(), g);
        let e = Multigraph::empty(3);
        assert_eq!(Multigraph::from_canonical_key(&e.canonical_key()).unwrap(), e);
    }

    #[test]
    fn digraph_undirected_merges_antiparallel_arcs() {
        let d = Digraph::new(2, vec![vec![2], vec![1]]).unwrap();
        assert_eq!(d.to_undirected().edges(), &[(1, 2, 1)]);
        assert!(Digraph::new(2, vec![vec![1], vec![]]).is_err());
    }
}
