//! Exact samplers for every random (multi)graph model.
//!
//! Conditioned models are sampled by whole-object rejection: the unconditioned
//! object is redrawn until the condition holds, so the output law is exactly the
//! conditional law. A rejection cap turns non-termination into an error.

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{Digraph, Matching, Multigraph, Pairing, Vertex};
use crate::rng::RngStream;

pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(invalid(format!("probability {p} outside [0,1]")));
    }
    Ok(())
}

/// Calls `visit` with the index of every success among `total` independent
/// Bernoulli(p) trials, in increasing order, using geometric skips.
pub(crate) fn bernoulli_successes(total: u64, p: f64, rng: &mut RngStream, mut visit: impl FnMut(u64)) {
    if total == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(visit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut next: u64 = 0;
    loop {
        let u = rng.uniform();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if !skip.is_finite() || skip >= (total - next) as f64 {
            return;
        }
        let idx = next + skip as u64;
        visit(idx);
        next = idx + 1;
        if next >= total {
            return;
        }
    }
}

/// Undirected binomial random graph G(n, p).
pub fn sample_gnp(n: usize, p: f64, rng: &mut RngStream) -> Result<Multigraph> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    check_probability(p)?;
    let total = n as u64 * (n as u64 - 1) / 2;
    let mut edges = Vec::new();
    // row u (1-based) holds pairs (u, u+1..=n)
    let mut row: u64 = 1;
    let mut row_start: u64 = 0;
    bernoulli_successes(total, p, rng, |k| {
        while k >= row_start + (n as u64 - row) {
            row_start += n as u64 - row;
            row += 1;
        }
        let v = row + 1 + (k - row_start);
        edges.push((row as Vertex, v as Vertex, 1));
    });
    Ok(Multigraph::from_unchecked(n, edges))
}

/// Directed binomial random graph: each of the n(n-1) ordered pairs independently.
pub fn sample_gnp_directed(n: usize, p: f64, rng: &mut RngStream) -> Result<Digraph> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    check_probability(p)?;
    let mut out = vec![Vec::new(); n];
    let per_row = n as u64 - 1;
    bernoulli_successes(n as u64 * per_row, p, rng, |k| {
        let u = (k / per_row) as usize;
        let j = (k % per_row) as usize;
        let v = if j < u { j } else { j + 1 };
        out[u].push(v as Vertex + 1);
    });
    Ok(Digraph::from_unchecked(n, out))
}

/// Uniform perfect matching of `[n]`.
pub fn sample_perfect_matching(n: usize, rng: &mut RngStream) -> Result<Matching> {
    if n < 2 || n % 2 != 0 {
        return Err(invalid(format!("perfect matching needs even n >= 2, got {n}")));
    }
    let mut verts: Vec<Vertex> = (1..=n as Vertex).collect();
    verts.shuffle(rng);
    let pairs = verts.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    Ok(Matching::from_unchecked(n, pairs))
}

pub fn sample_matchings(n: usize, count: usize, rng: &mut RngStream) -> Result<Vec<Matching>> {
    (0..count).map(|_| sample_perfect_matching(n, rng)).collect()
}

/// Superposition of the given matchings (multiplicities add).
pub fn superpose_matchings(n: usize, matchings: &[Matching]) -> Multigraph {
    let list = matchings
        .iter()
        .flat_map(|m| m.pairs().iter().map(|&(u, v)| (u, v, 1)))
        .collect();
    Multigraph::from_unchecked(n, list)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchingMode {
    /// Multiplicities summed.
    Superpose,
    /// Multiplicities capped at one.
    Union,
    /// Superposition conditioned on being simple.
    SimpleConditioned,
}

/// Superposition, union, or simple-conditioned superposition of `d` independent
/// uniform perfect matchings.
pub fn sample_matching_model(
    n: usize,
    d: usize,
    mode: MatchingMode,
    cap: u64,
    rng: &mut RngStream,
) -> Result<Multigraph> {
    if d == 0 {
        return Err(invalid("d must be at least 1"));
    }
    match mode {
        MatchingMode::Superpose => Ok(superpose_matchings(n, &sample_matchings(n, d, rng)?)),
        MatchingMode::Union => Ok(superpose_matchings(n, &sample_matchings(n, d, rng)?).capped()),
        MatchingMode::SimpleConditioned => {
            for _ in 0..cap {
                let g = superpose_matchings(n, &sample_matchings(n, d, rng)?);
                if g.is_simple() {
                    return Ok(g);
                }
            }
            Err(Error::RejectionCapExceeded { what: format!("simple superposition of {d} matchings on {n}"), cap })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingCondition {
    None,
    /// No pair joins two points of the same bin.
    Loopless,
    /// Exactly `i` pairwise vertex-disjoint double edges, no loops and no other
    /// multiple edges.
    DisjointDoubles(usize),
}

impl PairingCondition {
    pub fn holds(&self, g: &Multigraph) -> bool {
        match *self {
            PairingCondition::None => true,
            PairingCondition::Loopless => !g.has_loops(),
            PairingCondition::DisjointDoubles(i) => has_disjoint_doubles(g, i),
        }
    }
}

pub fn has_disjoint_doubles(g: &Multigraph, i: usize) -> bool {
    let mut used = vec![false; g.n()];
    let mut doubles = 0;
    for &(u, v, m) in g.edges() {
        if u == v || m >= 3 {
            return false;
        }
        if m == 2 {
            for w in [u, v] {
                if used[w as usize - 1] {
                    return false;
                }
                used[w as usize - 1] = true;
            }
            doubles += 1;
        }
    }
    doubles == i
}

fn check_pairing_params(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(invalid("n and d must be positive"));
    }
    if (n * d) % 2 != 0 {
        return Err(invalid(format!("d*n = {d}*{n} must be even")));
    }
    Ok(())
}

/// One unconditioned uniform pairing as point index pairs.
fn raw_pairing(points: &mut [usize], rng: &mut RngStream) {
    points.shuffle(rng);
}

/// Uniform pairing on `d*n` points, conditioned by whole-pairing rejection.
pub fn sample_pairing(
    n: usize,
    d: usize,
    condition: PairingCondition,
    cap: u64,
    rng: &mut RngStream,
) -> Result<Pairing> {
    check_pairing_params(n, d)?;
    let mut points: Vec<usize> = (0..n * d).collect();
    for _ in 0..cap.max(1) {
        raw_pairing(&mut points, rng);
        let flat: Vec<(usize, usize)> = points.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let ok = match condition {
            PairingCondition::None => true,
            PairingCondition::Loopless => flat.iter().all(|&(a, b)| a / d != b / d),
            PairingCondition::DisjointDoubles(_) => {
                flat.iter().all(|&(a, b)| a / d != b / d) && {
                    let p = Pairing::from_point_pairs(n, d as u32, &flat);
                    condition.holds(&p.project())
                }
            }
        };
        if ok {
            return Ok(Pairing::from_point_pairs(n, d as u32, &flat));
        }
    }
    Err(Error::RejectionCapExceeded { what: format!("pairing(n={n}, d={d}, {condition:?})"), cap })
}

/// Multigraph projection of a pairing.
pub fn project_pairing(p: &Pairing) -> Multigraph {
    p.project()
}

/// Uniform simple d-regular graph on `[n]`, by rejection through the pairing model.
pub fn sample_grd(n: usize, d: usize, cap: u64, rng: &mut RngStream) -> Result<Multigraph> {
    check_pairing_params(n, d)?;
    if d >= n {
        return Err(invalid(format!("need d < n, got d={d}, n={n}")));
    }
    let mut points: Vec<usize> = (0..n * d).collect();
    let mut seen = std::collections::HashSet::with_capacity(n * d / 2);
    'attempt: for _ in 0..cap.max(1) {
        raw_pairing(&mut points, rng);
        seen.clear();
        for c in points.chunks_exact(2) {
            let (u, v) = (c[0] / d, c[1] / d);
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                continue 'attempt;
            }
        }
        let edges = seen.iter().map(|&(u, v)| (u as Vertex + 1, v as Vertex + 1, 1)).collect();
        return Ok(Multigraph::from_unchecked(n, edges));
    }
    Err(Error::RejectionCapExceeded { what: format!("simple {d}-regular graph on {n} vertices"), cap })
}

/// Uniform d-subset of `[n] \ {v}` (1-based output, sorted).
pub(crate) fn random_out_set(n: usize, v: Vertex, d: usize, rng: &mut RngStream) -> Vec<Vertex> {
    let mut set: Vec<Vertex> = index::sample(rng, n - 1, d)
        .into_iter()
        .map(|j| {
            let w = j as Vertex + 1;
            if w >= v {
                w + 1
            } else {
                w
            }
        })
        .collect();
    set.sort_unstable();
    set
}

/// Directed d-out graph: every vertex picks an independent uniform d-subset of
/// the other vertices.
pub fn sample_dout(n: usize, d: usize, rng: &mut RngStream) -> Result<Digraph> {
    if d == 0 || d >= n {
        return Err(invalid(format!("d-out needs 1 <= d <= n-1, got d={d}, n={n}")));
    }
    let out = (1..=n as Vertex).map(|v| random_out_set(n, v, d, rng)).collect();
    Ok(Digraph::from_unchecked(n, out))
}

/// Undirected d-out graph O(n, d).
pub fn sample_dout_undirected(n: usize, d: usize, rng: &mut RngStream) -> Result<Multigraph> {
    Ok(sample_dout(n, d, rng)?.to_undirected())
}

/// A sampler with its parameters, as named in configs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    Pairing { n: usize, d: usize },
    LooplessPairing { n: usize, d: usize },
    DisjointDoubles { n: usize, d: usize, i: usize },
    MatchingSuperpose { n: usize, d: usize },
    MatchingUnion { n: usize, d: usize },
    MatchingSimple { n: usize, d: usize },
    Grd { n: usize, d: usize },
    Gnp { n: usize, p: f64 },
    Dout { n: usize, d: usize },
}

impl ModelSpec {
    /// Builds a model description from its name and the usual parameters.
    pub fn from_name(name: &str, n: usize, d: Option<usize>, p: Option<f64>, i: Option<usize>) -> Result<Self> {
        let need_d = || d.ok_or_else(|| invalid(format!("model {name} needs d")));
        Ok(match name {
            "pairing" => ModelSpec::Pairing { n, d: need_d()? },
            "loopless-pairing" => ModelSpec::LooplessPairing { n, d: need_d()? },
            "disjoint-doubles" => ModelSpec::DisjointDoubles {
                n,
                d: need_d()?,
                i: i.ok_or_else(|| invalid("model disjoint-doubles needs i"))?,
            },
            "matching-superpose" => ModelSpec::MatchingSuperpose { n, d: need_d()? },
            "matching-union" => ModelSpec::MatchingUnion { n, d: need_d()? },
            "matching-simple" => ModelSpec::MatchingSimple { n, d: need_d()? },
            "grd" => ModelSpec::Grd { n, d: need_d()? },
            "gnp" => ModelSpec::Gnp { n, p: p.ok_or_else(|| invalid("model gnp needs p"))? },
            "dout" => ModelSpec::Dout { n, d: need_d()? },
            other => return Err(Error::Unknown(format!("model {other}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Pairing { .. } => "pairing",
            ModelSpec::LooplessPairing { .. } => "loopless-pairing",
            ModelSpec::DisjointDoubles { .. } => "disjoint-doubles",
            ModelSpec::MatchingSuperpose { .. } => "matching-superpose",
            ModelSpec::MatchingUnion { .. } => "matching-union",
            ModelSpec::MatchingSimple { .. } => "matching-simple",
            ModelSpec::Grd { .. } => "grd",
            ModelSpec::Gnp { .. } => "gnp",
            ModelSpec::Dout { .. } => "dout",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            ModelSpec::Pairing { n, .. }
            | ModelSpec::LooplessPairing { n, .. }
            | ModelSpec::DisjointDoubles { n, .. }
            | ModelSpec::MatchingSuperpose { n, .. }
            | ModelSpec::MatchingUnion { n, .. }
            | ModelSpec::MatchingSimple { n, .. }
            | ModelSpec::Grd { n, .. }
            | ModelSpec::Gnp { n, .. }
            | ModelSpec::Dout { n, .. } => n,
        }
    }

    pub fn d(&self) -> Option<usize> {
        match *self {
            ModelSpec::Pairing { d, .. }
            | ModelSpec::LooplessPairing { d, .. }
            | ModelSpec::DisjointDoubles { d, .. }
            | ModelSpec::MatchingSuperpose { d, .. }
            | ModelSpec::MatchingUnion { d, .. }
            | ModelSpec::MatchingSimple { d, .. }
            | ModelSpec::Grd { d, .. }
            | ModelSpec::Dout { d, .. } => Some(d),
            ModelSpec::Gnp { .. } => None,
        }
    }

    pub fn p(&self) -> Option<f64> {
        match *self {
            ModelSpec::Gnp { p, .. } => Some(p),
            _ => None,
        }
    }

    /// One sample as a multigraph.
    pub fn sample(&self, cap: u64, rng: &mut RngStream) -> Result<Multigraph> {
        match *self {
            ModelSpec::Pairing { n, d } => Ok(sample_pairing(n, d, PairingCondition::None, cap, rng)?.project()),
            ModelSpec::LooplessPairing { n, d } => {
                Ok(sample_pairing(n, d, PairingCondition::Loopless, cap, rng)?.project())
            }
            ModelSpec::DisjointDoubles { n, d, i } => {
                Ok(sample_pairing(n, d, PairingCondition::DisjointDoubles(i), cap, rng)?.project())
            }
            ModelSpec::MatchingSuperpose { n, d } => sample_matching_model(n, d, MatchingMode::Superpose, cap, rng),
            ModelSpec::MatchingUnion { n, d } => sample_matching_model(n, d, MatchingMode::Union, cap, rng),
            ModelSpec::MatchingSimple { n, d } => {
                sample_matching_model(n, d, MatchingMode::SimpleConditioned, cap, rng)
            }
            ModelSpec::Grd { n, d } => sample_grd(n, d, cap, rng),
            ModelSpec::Gnp { n, p } => sample_gnp(n, p, rng),
            ModelSpec::Dout { n, d } => sample_dout_undirected(n, d, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn rng() -> RngStream {
        RngStream::new(1234, 0)
    }

    #[test]
    fn gnp_extremes() {
        let mut r = rng();
        assert_eq!(sample_gnp(3, 0.0, &mut r).unwrap(), Multigraph::empty(3));
        assert_eq!(sample_gnp(3, 1.0, &mut r).unwrap(), Multigraph::complete(3));
        assert!(sample_gnp(3, 1.5, &mut r).is_err());
        assert!(sample_gnp(3, -0.1, &mut r).is_err());
        let d = sample_gnp_directed(4, 1.0, &mut r).unwrap();
        assert_eq!(d.arc_count(), 12);
    }

    #[test]
    fn gnp_edge_count_mean() {
        let mut r = rng();
        let trials = 10_000;
        let total = 4950.0;
        let p = 0.3;
        let mean: f64 = (0..trials)
            .map(|_| sample_gnp(100, p, &mut r).unwrap().distinct_pairs() as f64)
            .sum::<f64>()
            / trials as f64;
        let se = (total * p * (1.0 - p) / trials as f64).sqrt();
        assert!((mean - p * total).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn directed_gnp_pairs_are_in_range() {
        let mut r = rng();
        let d = sample_gnp_directed(30, 0.5, &mut r).unwrap();
        assert!(Digraph::new(30, (1..=30).map(|v| d.out_neighbours(v).to_vec()).collect()).is_ok());
    }

    #[test]
    fn matching_n2_is_forced() {
        let mut r = rng();
        let m = sample_perfect_matching(2, &mut r).unwrap();
        assert_eq!(m.pairs(), &[(1, 2)]);
        assert!(sample_perfect_matching(3, &mut r).is_err());
    }

    #[test]
    fn matching_n4_uniform() {
        let mut r = rng();
        let trials = 30_000;
        let mut counts: BTreeMap<Vec<(Vertex, Vertex)>, usize> = BTreeMap::new();
        for _ in 0..trials {
            *counts.entry(sample_perfect_matching(4, &mut r).unwrap().pairs().to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        let se = (1.0 / 3.0 * 2.0 / 3.0 / trials as f64).sqrt();
        for c in counts.values() {
            assert!((*c as f64 / trials as f64 - 1.0 / 3.0).abs() < 3.0 * se);
        }
    }

    #[test]
    fn matching_model_small_cases() {
        let mut r = rng();
        let g = sample_matching_model(2, 3, MatchingMode::Superpose, 10, &mut r).unwrap();
        assert_eq!(g.edges(), &[(1, 2, 3)]);
        let g = sample_matching_model(2, 3, MatchingMode::Union, 10, &mut r).unwrap();
        assert_eq!(g.edges(), &[(1, 2, 1)]);
        let err = sample_matching_model(2, 2, MatchingMode::SimpleConditioned, 5, &mut r).unwrap_err();
        assert!(matches!(err, Error::RejectionCapExceeded { .. }));
    }

    #[test]
    fn union_is_capped_superposition_on_same_stream() {
        for idx in 0..20 {
            let a = sample_matching_model(10, 4, MatchingMode::Superpose, 1, &mut RngStream::new(5, idx)).unwrap();
            let b = sample_matching_model(10, 4, MatchingMode::Union, 1, &mut RngStream::new(5, idx)).unwrap();
            assert_eq!(a.capped(), b);
        }
    }

    #[test]
    fn loopless_pairing_n2_d2_is_double_edge() {
        let mut r = rng();
        for _ in 0..50 {
            let p = sample_pairing(2, 2, PairingCondition::Loopless, 1000, &mut r).unwrap();
            assert_eq!(p.project().edges(), &[(1, 2, 2)]);
        }
    }

    #[test]
    fn disjoint_doubles_census() {
        let mut r = rng();
        for _ in 0..10_000 {
            let p = sample_pairing(6, 3, PairingCondition::DisjointDoubles(1), 100_000, &mut r).unwrap();
            let g = p.project();
            assert!(!g.has_loops());
            assert_eq!(g.edges().iter().filter(|e| e.2 == 2).count(), 1);
            assert!(g.edges().iter().all(|e| e.2 <= 2));
            assert!(g.degrees().iter().all(|&x| x == 3));
        }
    }

    #[test]
    fn infeasible_condition_hits_cap() {
        let mut r = rng();
        let err = sample_pairing(4, 3, PairingCondition::DisjointDoubles(3), 2000, &mut r).unwrap_err();
        assert!(matches!(err, Error::RejectionCapExceeded { .. }));
        assert!(sample_pairing(3, 3, PairingCondition::None, 10, &mut r).is_err());
    }

    #[test]
    fn pairing_handshake() {
        let mut r = rng();
        let p = sample_pairing(6, 3, PairingCondition::None, 1, &mut r).unwrap();
        let g = project_pairing(&p);
        assert_eq!(g.degrees().iter().sum::<u32>(), 18);
        assert!(g.degrees().iter().all(|&x| x == 3));
    }

    #[test]
    fn grd_small_cases() {
        let mut r = rng();
        assert_eq!(sample_grd(4, 3, 100_000, &mut r).unwrap(), Multigraph::complete(4));
        assert!(sample_grd(4, 4, 10, &mut r).is_err());
        let mut counts: BTreeMap<Multigraph, usize> = BTreeMap::new();
        let trials = 30_000;
        for _ in 0..trials {
            *counts.entry(sample_grd(4, 1, 100_000, &mut r).unwrap()).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        let se = (2.0 / 9.0 / trials as f64).sqrt();
        for c in counts.values() {
            assert!((*c as f64 / trials as f64 - 1.0 / 3.0).abs() < 3.0 * se);
        }
    }

    #[test]
    fn dout_small_cases() {
        let mut r = rng();
        let d = sample_dout(2, 1, &mut r).unwrap();
        assert!(d.has_arc(1, 2) && d.has_arc(2, 1));
        assert_eq!(d.to_undirected().edges(), &[(1, 2, 1)]);
        assert_eq!(sample_dout_undirected(5, 4, &mut r).unwrap(), Multigraph::complete(5));
        assert!(sample_dout(5, 5, &mut r).is_err());
    }

    #[test]
    fn dout_arc_marginal() {
        let mut r = rng();
        let trials = 10_000;
        let hits = (0..trials).filter(|_| sample_dout(50, 2, &mut r).unwrap().has_arc(1, 2)).count();
        let p = 2.0 / 49.0;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - p).abs() < 3.0 * se);
    }
}
