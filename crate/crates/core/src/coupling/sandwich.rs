//! End-to-end coupling of `G(n,d)` below `G(n,p)` with `p = x ln n / n`.
//!
//! Even `n`: `G(n,d)` sits inside a union of `tau` perfect matchings, which in
//! turn sits inside `G(n,p)`. At micro scale (`n <= 4`) both stages use exact
//! laws: the rejection embedding for the first and an optimal coupling for the
//! second. Above that, the second stage runs the d-out pipeline (embed
//! `O(n, d')`, split into 2-out copies, extract one perfect matching from each)
//! and the first stage has no constructive counterpart, so the inner graph is
//! drawn independently and its containment is only observed.
//!
//! Odd `n`: recurse on `(n - 1, d - 1)`, attach vertex `n` to `d` uniform
//! vertices and close the remaining vertices with a perfect matching avoiding
//! the recursive inner graph.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rand::seq::index;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use serde_json::Value;

use crate::enumeration::{exact_gnp_distribution, exact_model_distribution, list_perfect_matchings, ExactModel, MatchingConstraints};
use crate::error::{invalid, Error, Result};
use crate::graph::{contains, ContainmentMode, Matching, Multigraph, Vertex};
use crate::models::{sample_gnp, sample_grd, sample_perfect_matching, DEFAULT_REJECTION_CAP};
use crate::rng::RngStream;

use super::dout::{dout_gnp_embed, MIN_X};
use super::extract::{extract_perfect_matching, split_dout, UNIFORM_EXTRACTION_CAP};
use super::rejection::{AcceptScale, RejectionSampler};
use super::strassen::{build_optimal_coupling, JointCoupling, Relation};
use super::threshold::ThresholdFunctions;

/// Largest even order handled with exact laws in both stages.
pub const MICRO_CAP: usize = 4;

#[derive(Clone, Debug)]
pub struct SandwichOptions {
    /// Number of matchings in the micro-scale middle layer (default `8 d`).
    pub tau: Option<usize>,
    /// Typical-set bound of the rejection stage.
    pub fn_bound: f64,
    pub thresholds: ThresholdFunctions,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        SandwichOptions { tau: None, fn_bound: 5.0, thresholds: ThresholdFunctions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub contained: bool,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub n: usize,
    pub d: usize,
    pub x: f64,
    /// Edge density of the outer graph.
    pub p: f64,
    pub inner: Multigraph,
    pub outer: Multigraph,
    pub stages: Vec<StageRecord>,
    /// `inner` is a subgraph of `outer`.
    pub contained: bool,
    pub diagnostics: BTreeMap<String, Value>,
}

impl SandwichReport {
    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    fn push(&mut self, name: &str, contained: bool, flags: Vec<String>) {
        self.stages.push(StageRecord { name: name.to_string(), contained, flags });
    }
}

pub fn sandwich_run(n: usize, d: usize, x: f64, rng: &mut RngStream) -> Result<SandwichReport> {
    sandwich_run_with(n, d, x, &SandwichOptions::default(), rng)
}

pub fn sandwich_run_with(n: usize, d: usize, x: f64, opts: &SandwichOptions, rng: &mut RngStream) -> Result<SandwichReport> {
    if n < 2 || d == 0 || d >= n {
        return Err(invalid(format!("need n >= 2 and 1 <= d <= n-1, got n={n}, d={d}")));
    }
    if (n * d) % 2 == 1 {
        return Err(invalid(format!("d*n = {} is odd", n * d)));
    }
    if !(x > 0.0) {
        return Err(invalid(format!("x must be positive, got {x}")));
    }
    if n % 2 == 0 {
        even(n, d, x, opts, rng)
    } else {
        odd(n, d, x, opts, rng)
    }
}

fn density(n: usize, x: f64) -> Result<f64> {
    let p = x * (n as f64).ln() / n as f64;
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("p = x ln n / n = {p} outside (0, 1] for n={n}, x={x}")));
    }
    Ok(p)
}

fn even(n: usize, d: usize, x: f64, opts: &SandwichOptions, rng: &mut RngStream) -> Result<SandwichReport> {
    let p = density(n, x)?;
    if n <= MICRO_CAP {
        even_micro(n, d, x, p, opts, rng)
    } else {
        even_pipeline(n, d, x, p, opts, rng)
    }
}

fn blank(n: usize, d: usize, x: f64, p: f64) -> SandwichReport {
    SandwichReport {
        n,
        d,
        x,
        p,
        inner: Multigraph::empty(n),
        outer: Multigraph::empty(n),
        stages: Vec::new(),
        contained: false,
        diagnostics: BTreeMap::new(),
    }
}

fn even_micro(n: usize, d: usize, x: f64, p: f64, opts: &SandwichOptions, rng: &mut RngStream) -> Result<SandwichReport> {
    let tau = opts.tau.unwrap_or(8 * d).max(d);
    let mut rep = blank(n, d, x, p);
    let sampler = RejectionSampler::regular_graph(n, d, opts.fn_bound, AcceptScale::Bound)?;
    let first = sampler.run(tau, rng)?;
    let mut flags = Vec::new();
    let inner = match first.inner.clone() {
        Some(g) => g,
        None => {
            flags.push("empty".to_string());
            sample_grd(n, d, DEFAULT_REJECTION_CAP, rng)?
        }
    };
    let middle = first.outer.capped();
    rep.push("graph-in-matchings", contains(&inner, &middle, ContainmentMode::SimpleSubgraph)?, flags);

    let coupling = union_gnp_coupling(n, tau, p)?;
    let xi = coupling
        .x_keys
        .iter()
        .position(|k| *k == middle.canonical_key())
        .ok_or_else(|| Error::Unknown("union of matchings outside its exact support".into()))?;
    let yi = coupling.sample_y_given_x(xi, rng).ok_or_else(|| Error::Unknown("empty coupling row".into()))?;
    let outer = Multigraph::from_canonical_key(&coupling.y_keys[yi])?;
    rep.push("matchings-in-gnp", contains(&middle, &outer, ContainmentMode::SimpleSubgraph)?, Vec::new());
    rep.diagnostics.insert("tau".into(), (tau as u64).into());
    rep.diagnostics.insert("coupling_failure".into(), coupling.failure_mass.into());
    rep.diagnostics.insert("accepted_at".into(), first.diagnostics["accepted_at"].clone());
    finish(rep, inner, outer)
}

fn finish(mut rep: SandwichReport, inner: Multigraph, outer: Multigraph) -> Result<SandwichReport> {
    rep.contained = contains(&inner, &outer, ContainmentMode::SimpleSubgraph)?;
    rep.inner = inner;
    rep.outer = outer;
    Ok(rep)
}

/// Optimal coupling of `M_tau^∪` below `G(n,p)`, cached per parameters.
fn union_gnp_coupling(n: usize, tau: usize, p: f64) -> Result<Arc<JointCoupling<f64>>> {
    type Key = (usize, usize, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<JointCoupling<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, tau, p.to_bits());
    if let Some(c) = cache.lock().expect("cache lock").get(&key) {
        return Ok(c.clone());
    }
    let mu_x = exact_model_distribution(ExactModel::MatchingUnion, n, tau)?.to_f64();
    let mu_y = exact_gnp_distribution(n, p)?;
    let xs: Vec<Multigraph> = mu_x.outcomes().iter().map(|k| Multigraph::from_canonical_key(k)).collect::<Result<_>>()?;
    let ys: Vec<Multigraph> = mu_y.outcomes().iter().map(|k| Multigraph::from_canonical_key(k)).collect::<Result<_>>()?;
    let bad = Relation::from_fn(xs.len(), ys.len(), |i, j| {
        !contains(&xs[i], &ys[j], ContainmentMode::SimpleSubgraph).unwrap_or(false)
    })?;
    let c = Arc::new(build_optimal_coupling(&mu_x, &mu_y, &bad)?);
    cache.lock().expect("cache lock").insert(key, c.clone());
    Ok(c)
}

fn even_pipeline(n: usize, d: usize, x: f64, p: f64, opts: &SandwichOptions, rng: &mut RngStream) -> Result<SandwichReport> {
    if x < MIN_X {
        return Err(invalid(format!("x = {x} is below {MIN_X}")));
    }
    let mut rep = blank(n, d, x, p);
    let d_out = opts.thresholds.out_degree(x, n)?;
    let k = d_out / 2;
    rep.diagnostics.insert("d_out".into(), (d_out as u64).into());
    rep.diagnostics.insert("matchings".into(), (k as u64).into());

    let (outer, middle) = if k == 0 {
        rep.push("dout-in-gnp", false, vec!["d-out-too-small".into()]);
        rep.push("matchings-in-gnp", false, vec!["no-matchings".into()]);
        (sample_gnp(n, p, rng)?, Multigraph::empty(n))
    } else {
        let emb = dout_gnp_embed(n, p, d_out, rng)?;
        rep.push("dout-in-gnp", emb.contained, emb.flags.clone());
        let digraph = emb.inner_digraph.as_ref().expect("d-out embedding keeps its digraph");
        let copies = split_dout(digraph, k, rng)?;
        let mut flags = Vec::new();
        let mut matchings = Vec::with_capacity(k);
        let mut missing = 0u64;
        for c in &copies {
            let got = extract_perfect_matching(&c.to_undirected(), rng)?;
            if !got.uniform && !flags.iter().any(|f| f == "non-uniform-choice") {
                flags.push("non-uniform-choice".to_string());
            }
            match got.matching {
                Some(m) => matchings.push(m),
                None => {
                    missing += 1;
                    matchings.push(sample_perfect_matching(n, rng)?);
                }
            }
        }
        if missing > 0 {
            flags.push("no-perfect-matching".to_string());
        }
        rep.diagnostics.insert("copies_without_matching".into(), missing.into());
        let middle = union_of(n, &matchings)?;
        rep.push("matchings-in-gnp", contains(&middle, &emb.outer, ContainmentMode::SimpleSubgraph)?, flags);
        (emb.outer, middle)
    };
    let inner = sample_grd(n, d, DEFAULT_REJECTION_CAP, rng)?;
    let c = contains(&inner, &middle, ContainmentMode::SimpleSubgraph)?;
    rep.push("graph-in-matchings", c, vec!["independent".into()]);
    finish(rep, inner, outer)
}

fn union_of(n: usize, ms: &[Matching]) -> Result<Multigraph> {
    let mut g = Multigraph::empty(n);
    for m in ms {
        g = g.union(&m.to_multigraph())?;
    }
    Ok(g)
}

fn lift(g: &Multigraph, n: usize) -> Result<Multigraph> {
    Multigraph::from_edges(n, g.edges().iter().copied())
}

const X_RESAMPLE_CAP: usize = 10_000;
const AVOIDING_MATCHING_CAP: u64 = 10_000;

fn odd(n: usize, d: usize, x: f64, opts: &SandwichOptions, rng: &mut RngStream) -> Result<SandwichReport> {
    let m = n - 1;
    let base = even(m, d - 1, x, opts, rng)?;
    let eps = (x - 1.0).max(0.0);
    let ln_n = (n as f64).ln();
    let q = ((1.0 + eps / 3.0) * ln_n / n as f64).min(1.0);
    let p_out = 1.0 - (1.0 - base.p) * (1.0 - q);
    let mut rep = blank(n, d, x, p_out);
    for s in &base.stages {
        rep.push(&format!("even:{}", s.name), s.contained, s.flags.clone());
    }
    let sprinkle = sample_gnp(m, q, rng)?;
    let g1 = &base.inner;

    let mut resampled = 0u64;
    let mut matching_flags = Vec::new();
    let (xs, matching, in_sprinkle) = loop {
        if resampled as usize >= X_RESAMPLE_CAP {
            return Err(Error::RejectionCapExceeded { what: "choice of attachment vertices".into(), cap: X_RESAMPLE_CAP as u64 });
        }
        let mut xs: Vec<Vertex> = index::sample(rng, m, d).into_iter().map(|i| i as Vertex + 1).collect();
        xs.sort_unstable();
        let rest: Vec<Vertex> = (1..=m as Vertex).filter(|v| xs.binary_search(v).is_err()).collect();
        let host = induced(&sprinkle, &rest, |u, v| !g1.has_edge(u, v))?;
        if let Some(mm) = extract_perfect_matching(&host, rng)?.matching {
            if rest.len() > UNIFORM_EXTRACTION_CAP {
                matching_flags.push("non-uniform-choice".to_string());
            }
            break (xs, unlabel(&mm, &rest), true);
        }
        match avoiding_matching(g1, &rest, rng)? {
            Some(mm) => {
                matching_flags.push("matching-outside-sprinkle".to_string());
                break (xs, mm, false);
            }
            None => resampled += 1,
        }
    };
    if resampled > 0 {
        matching_flags.push("resampled-attachment".to_string());
    }
    rep.diagnostics.insert("attachment_resamples".into(), resampled.into());
    rep.push("matching-in-sprinkle", in_sprinkle, matching_flags);

    let nv = n as Vertex;
    let draw = Binomial::new(m as u64, p_out).map_err(|e| invalid(e.to_string()))?.sample(rng) as usize;
    let mut star_flags = Vec::new();
    let star: Vec<Vertex> = if draw >= d {
        let others: Vec<Vertex> = (1..=m as Vertex).filter(|v| xs.binary_search(v).is_err()).collect();
        let extra = index::sample(rng, others.len(), draw - d).into_iter().map(|i| others[i]);
        xs.iter().copied().chain(extra).collect()
    } else {
        star_flags.push("star-short".to_string());
        index::sample(rng, m, draw).into_iter().map(|i| i as Vertex + 1).collect()
    };
    rep.diagnostics.insert("star_degree".into(), (draw as u64).into());
    rep.push("star", draw >= d, star_flags);

    let mut inner_edges: Vec<(Vertex, Vertex, u32)> = g1.edges().to_vec();
    inner_edges.extend(xs.iter().map(|&v| (v, nv, 1)));
    inner_edges.extend(matching.iter().map(|&(u, v)| (u, v, 1)));
    let inner = Multigraph::from_edges(n, inner_edges)?;
    let star_graph = Multigraph::from_edges(n, star.iter().map(|&v| (v, nv, 1)))?;
    let outer = lift(&base.outer, n)?.union(&lift(&sprinkle, n)?)?.union(&star_graph)?;
    rep.diagnostics.insert("inner_density_parent".into(), base.p.into());
    finish(rep, inner, outer)
}

/// Subgraph of `g` induced on `verts`, relabelled to `1..=|verts|`, keeping
/// only edges accepted by `keep` (tested on original labels).
fn induced<F: Fn(Vertex, Vertex) -> bool>(g: &Multigraph, verts: &[Vertex], keep: F) -> Result<Multigraph> {
    let pos = |v: Vertex| verts.binary_search(&v).ok();
    let edges = g.edges().iter().filter_map(|&(u, v, _)| match (pos(u), pos(v)) {
        (Some(a), Some(b)) if a != b && keep(u, v) => Some((a as Vertex + 1, b as Vertex + 1, 1)),
        _ => None,
    });
    Multigraph::from_edges(verts.len(), edges.collect::<Vec<_>>())
}

fn unlabel(m: &Matching, verts: &[Vertex]) -> Vec<(Vertex, Vertex)> {
    m.pairs()
        .iter()
        .map(|&(a, b)| {
            let (u, v) = (verts[a as usize - 1], verts[b as usize - 1]);
            (u.min(v), u.max(v))
        })
        .collect()
}

/// Uniform perfect matching of the complete graph on `verts` avoiding `g`.
fn avoiding_matching(g: &Multigraph, verts: &[Vertex], rng: &mut RngStream) -> Result<Option<Vec<(Vertex, Vertex)>>> {
    let r = verts.len();
    if r == 0 {
        return Ok(Some(Vec::new()));
    }
    if r <= UNIFORM_EXTRACTION_CAP {
        let host = induced(&Multigraph::complete(r), &(1..=r as Vertex).collect::<Vec<_>>(), |a, b| {
            !g.has_edge(verts[a as usize - 1], verts[b as usize - 1])
        })?;
        let all = list_perfect_matchings(&host, &MatchingConstraints::default())?;
        if all.is_empty() {
            return Ok(None);
        }
        return Ok(Some(unlabel(&all[rng.below(all.len())], verts)));
    }
    for _ in 0..AVOIDING_MATCHING_CAP {
        let mm = sample_perfect_matching(r, rng)?;
        let pairs = unlabel(&mm, verts);
        if pairs.iter().all(|&(u, v)| !g.has_edge(u, v)) {
            return Ok(Some(pairs));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_vertices_cubic() {
        let x = 0.95 * 4.0 / 4f64.ln();
        for i in 0..50 {
            let mut rng = RngStream::new(3, i);
            let rep = sandwich_run(4, 3, x, &mut rng).unwrap();
            assert_eq!(rep.inner, Multigraph::complete(4));
            assert_eq!(rep.contained, rep.outer.distinct_pairs() == 6);
        }
    }

    #[test]
    fn odd_five_is_a_cycle() {
        for i in 0..50 {
            let mut rng = RngStream::new(8, i);
            let rep = sandwich_run(5, 2, 2.5, &mut rng).unwrap();
            assert!(rep.inner.is_simple());
            assert_eq!(rep.inner.degrees(), vec![2; 5]);
            assert!(rep.stages.iter().any(|s| s.name == "star"));
        }
    }

    #[test]
    fn pipeline_runs() {
        let mut rng = RngStream::new(1, 1);
        let rep = sandwich_run(200, 2, 4.0, &mut rng).unwrap();
        assert_eq!(rep.inner.degrees(), vec![2; 200]);
        assert!(rep.stage("matchings-in-gnp").is_some());
    }

    #[test]
    fn rejects_odd_degree_sum() {
        let mut rng = RngStream::new(1, 1);
        assert!(sandwich_run(5, 3, 2.0, &mut rng).is_err());
    }
}
