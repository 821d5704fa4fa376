//! Perfect matchings of multigraphs: exact counting and listing.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::graph::{Matching, Multigraph, Vertex};

/// Largest vertex count accepted by the exact matching routines.
pub const MATCHING_VERTEX_CAP: usize = 64;

/// How parallel edges are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParallelEdges {
    /// A pair of multiplicity `m` contributes `m` distinct choices (pairing level).
    Distinct,
    /// A pair contributes once regardless of multiplicity (simple-graph level).
    Merged,
}

/// Constraints on the counted matchings. Pairs are 1-based vertex pairs in any order.
#[derive(Clone, Debug, Default)]
pub struct MatchingConstraints {
    pub forbidden: BTreeSet<(Vertex, Vertex)>,
    pub must_cover: BTreeSet<(Vertex, Vertex)>,
}

impl MatchingConstraints {
    pub fn new<I, J>(forbidden: I, must_cover: J) -> Self
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
        J: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let norm = |(a, b): (Vertex, Vertex)| (a.min(b), a.max(b));
        MatchingConstraints {
            forbidden: forbidden.into_iter().map(norm).collect(),
            must_cover: must_cover.into_iter().map(norm).collect(),
        }
    }
}

struct Prepared {
    n: usize,
    weight: Vec<Vec<u32>>,
    adj: Vec<u64>,
    free: u64,
    factor: BigUint,
}

fn prepare(g: &Multigraph, c: &MatchingConstraints, mode: ParallelEdges) -> Result<Option<Prepared>> {
    let n = g.n();
    if n > MATCHING_VERTEX_CAP {
        return Err(Error::TooLarge {
            what: "perfect matching count".into(),
            size: n.to_string(),
            cap: MATCHING_VERTEX_CAP.to_string(),
        });
    }
    for &(a, b) in c.forbidden.iter().chain(c.must_cover.iter()) {
        if a == 0 || b as usize > n {
            return Err(invalid(format!("constraint pair ({a},{b}) outside [1,{n}]")));
        }
    }
    if n % 2 == 1 {
        return Ok(None);
    }
    let mut weight = vec![vec![0u32; n]; n];
    let mut adj = vec![0u64; n];
    for &(u, v, m) in g.edges() {
        if u == v || c.forbidden.contains(&(u, v)) {
            continue;
        }
        let w = match mode {
            ParallelEdges::Distinct => m,
            ParallelEdges::Merged => 1,
        };
        let (a, b) = (u as usize - 1, v as usize - 1);
        weight[a][b] = w;
        weight[b][a] = w;
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    let mut free: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut factor = BigUint::one();
    for &(u, v) in &c.must_cover {
        let (a, b) = (u as usize - 1, v as usize - 1);
        if a == b || weight[a][b] == 0 || free & (1 << a) == 0 || free & (1 << b) == 0 {
            return Ok(Some(Prepared { n, weight, adj, free, factor: BigUint::zero() }));
        }
        free &= !(1 << a) & !(1 << b);
        factor *= weight[a][b];
    }
    Ok(Some(Prepared { n, weight, adj, free, factor }))
}

/// Number of perfect matchings of `g` avoiding `forbidden` and containing
/// every `must_cover` pair. Loops never take part. Odd `n` gives 0.
pub fn count_perfect_matchings(g: &Multigraph, c: &MatchingConstraints, mode: ParallelEdges) -> Result<BigUint> {
    let Some(p) = prepare(g, c, mode)? else {
        return Ok(BigUint::zero());
    };
    if p.factor.is_zero() {
        return Ok(BigUint::zero());
    }
    let mut memo = HashMap::new();
    let rest = count_rec(&p, p.free, &mut memo);
    Ok(rest * &p.factor)
}

fn count_rec(p: &Prepared, free: u64, memo: &mut HashMap<u64, BigUint>) -> BigUint {
    if free == 0 {
        return BigUint::one();
    }
    if let Some(v) = memo.get(&free) {
        return v.clone();
    }
    // branch on the free vertex with fewest free neighbours
    let mut best = usize::MAX;
    let mut best_deg = u32::MAX;
    let mut bits = free;
    while bits != 0 {
        let v = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let deg = (p.adj[v] & free).count_ones();
        if deg < best_deg {
            best_deg = deg;
            best = v;
            if deg == 0 {
                break;
            }
        }
    }
    let mut total = BigUint::zero();
    if best_deg > 0 {
        let mut nb = p.adj[best] & free;
        while nb != 0 {
            let u = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            let sub = count_rec(p, free & !(1 << best) & !(1 << u), memo);
            if !sub.is_zero() {
                total += sub * p.weight[best][u];
            }
        }
    }
    memo.insert(free, total.clone());
    total
}

/// All perfect matchings of `g` (parallel edges merged) satisfying the
/// constraints, in lexicographic order of their sorted pair lists.
pub fn list_perfect_matchings(g: &Multigraph, c: &MatchingConstraints) -> Result<Vec<Matching>> {
    let Some(p) = prepare(g, c, ParallelEdges::Merged)? else {
        return Ok(Vec::new());
    };
    if p.factor.is_zero() {
        return Ok(Vec::new());
    }
    let forced: Vec<(Vertex, Vertex)> = c.must_cover.iter().copied().collect();
    let mut out = Vec::new();
    let mut cur = forced.clone();
    list_rec(&p, p.free, &mut cur, &mut out);
    let mut ms: Vec<Matching> = out.into_iter().map(|pairs| Matching::from_unchecked(p.n, pairs)).collect();
    ms.sort();
    Ok(ms)
}

fn list_rec(p: &Prepared, free: u64, cur: &mut Vec<(Vertex, Vertex)>, out: &mut Vec<Vec<(Vertex, Vertex)>>) {
    if free == 0 {
        out.push(cur.clone());
        return;
    }
    let v = free.trailing_zeros() as usize;
    let mut nb = p.adj[v] & free;
    while nb != 0 {
        let u = nb.trailing_zeros() as usize;
        nb &= nb - 1;
        cur.push((v as Vertex + 1, u as Vertex + 1));
        list_rec(p, free & !(1 << v) & !(1 << u), cur, out);
        cur.pop();
    }
}

/// Every perfect matching of `[n]`.
pub fn all_perfect_matchings(n: usize) -> Result<Vec<Matching>> {
    if n % 2 == 1 {
        return Err(invalid(format!("perfect matching needs even n, got {n}")));
    }
    if n > 16 {
        return Err(Error::TooLarge { what: "matching list".into(), size: n.to_string(), cap: "16".into() });
    }
    list_perfect_matchings(&Multigraph::complete(n), &MatchingConstraints::default())
}
