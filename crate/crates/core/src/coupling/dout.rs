//! Embedding the d-out graph into the binomial random graph.
//!
//! Easy regime (`x >= 2.1`, with `p = x ln n / n`): the outer graph is the
//! undirected shadow of a directed `G(n, p')` with `p' = 1 - sqrt(1 - p)`, and
//! each vertex keeps `d` random out-neighbours.
//!
//! Hard regime: three independent layers. `E1` (directed) decides which
//! vertices are good (out-degree at least `d`); bad vertices draw `d + 1`
//! labels with replacement and realise them inside their `E2'` and `E3'`
//! out-edges, where the number of labels landing among bad heads is coupled
//! below the number of available `E3'` arcs.
//!
//! Every failure is handled per vertex by drawing that vertex's out-set
//! independently, so the inner object is always exactly `O(n, d)` and the
//! outer one exactly `G(n, p)`.

use rand::seq::{index, SliceRandom};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph::{ContainmentMode, Digraph, Multigraph, Vertex};
use crate::models::{random_out_set, sample_gnp, sample_gnp_directed};
use crate::rng::RngStream;

use super::quantile::{quantile_coupling, IntDistribution, QuantileCoupling};
use super::report::EmbeddingReport;
use super::threshold::SPLIT;

/// Smallest admissible `x = pn / ln n`.
pub const MIN_X: f64 = 1.0 + 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    Easy,
    Hard,
}

/// Labels and sets used for one bad vertex.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BadVertexRecord {
    pub v: Vertex,
    /// Out-degree in `E2'` (edges to good vertices).
    pub s: usize,
    /// Out-degree in `E3'` (arcs to other bad vertices).
    pub t: usize,
    pub ell: usize,
    /// Raw labels `a_1..a_{d+1}`; values `<= y` point into `Y`.
    pub labels: Vec<usize>,
    pub u: usize,
    pub u_x: usize,
    pub u_y: usize,
    pub s_prime: Vec<Vertex>,
    pub chosen: Vec<Vertex>,
    /// Why the vertex fell back to an independent out-set, if it did.
    pub fallback: Option<String>,
}

/// Full state of one hard- or easy-regime run.
#[derive(Clone, Debug, Serialize)]
pub struct OutCouplingState {
    pub regime: Regime,
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub x: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub vec_p1: f64,
    pub vec_p3: f64,
    /// Sprinkling probability closing `1 - p = (1-p1)(1-p2)(1-q)`.
    pub q: f64,
    pub e1_arcs: Vec<(Vertex, Vertex)>,
    pub e2_edges: Vec<(Vertex, Vertex)>,
    pub e3_arcs: Vec<(Vertex, Vertex)>,
    pub good: Vec<bool>,
    pub bad: Vec<BadVertexRecord>,
    /// `#bad <= n^{1 - eps/8}`.
    pub f1: bool,
    /// Every bad vertex has at least `d + 1` out-edges in `E2'`.
    pub f2: bool,
    /// Every bad vertex drew at least `d` distinct labels.
    pub f3: bool,
    /// Vertices whose out-set was drawn independently.
    pub fallback_vertices: usize,
}

impl OutCouplingState {
    pub fn bad_count(&self) -> usize {
        self.good.iter().filter(|g| !**g).count()
    }
}

pub fn dout_gnp_embed(n: usize, p: f64, d: usize, rng: &mut RngStream) -> Result<EmbeddingReport> {
    Ok(dout_gnp_embed_with_state(n, p, d, rng)?.0)
}

pub fn dout_gnp_embed_with_state(
    n: usize,
    p: f64,
    d: usize,
    rng: &mut RngStream,
) -> Result<(EmbeddingReport, OutCouplingState)> {
    if n < 2 || d == 0 || d >= n {
        return Err(invalid(format!("need n >= 2 and 1 <= d <= n-1, got n={n}, d={d}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p = {p} outside [0,1]")));
    }
    let ln_n = (n as f64).ln();
    let x = p * n as f64 / ln_n;
    if !(x >= MIN_X) {
        return Err(invalid(format!("p n / ln n = {x:.6} is below {MIN_X}")));
    }
    let (inner, outer, state) = if x >= SPLIT { easy(n, p, d, x, rng)? } else { hard(n, p, d, x, rng)? };
    let mut report = EmbeddingReport::new("dout-gnp", Some(inner.to_undirected()), outer, ContainmentMode::SimpleSubgraph)?;
    report.inner_digraph = Some(inner);
    report.decoupled = state.fallback_vertices > 0;
    report.note("regime", format!("{:?}", state.regime));
    report.note("x", x);
    report.note("bad_vertices", state.bad_count());
    report.note("fallback_vertices", state.fallback_vertices);
    report.note("F1", state.f1);
    report.note("F2", state.f2);
    report.note("F3", state.f3);
    if !state.f1 {
        report.flag("F1-failed");
    }
    if !state.f2 {
        report.flag("F2-failed");
    }
    if !state.f3 {
        report.flag("F3-failed");
    }
    if state.fallback_vertices > 0 {
        report.flag("decoupled");
    }
    Ok((report, state))
}

fn vec_p(p: f64) -> f64 {
    1.0 - (1.0 - p).sqrt()
}

fn shadow(n: usize, lists: impl IntoIterator<Item = (Vertex, Vertex)>) -> Multigraph {
    let mut pairs: Vec<(Vertex, Vertex, u32)> = lists.into_iter().map(|(u, v)| (u.min(v), u.max(v), 1)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    Multigraph::from_edges(n, pairs).expect("vertices in range")
}

fn pick(list: &[Vertex], k: usize, rng: &mut RngStream) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = index::sample(rng, list.len(), k).into_iter().map(|i| list[i]).collect();
    out.sort_unstable();
    out
}

fn easy(n: usize, p: f64, d: usize, x: f64, rng: &mut RngStream) -> Result<(Digraph, Multigraph, OutCouplingState)> {
    let vp = vec_p(p);
    let e = sample_gnp_directed(n, vp, rng)?;
    let mut out = Vec::with_capacity(n);
    let mut good = vec![true; n];
    let mut fallback = 0;
    for v in 1..=n as Vertex {
        let nb = e.out_neighbours(v);
        if nb.len() >= d {
            out.push(pick(nb, d, rng));
        } else {
            good[v as usize - 1] = false;
            fallback += 1;
            out.push(random_out_set(n, v, d, rng));
        }
    }
    let arcs: Vec<(Vertex, Vertex)> = e.arcs().collect();
    let outer = shadow(n, arcs.iter().copied());
    let state = OutCouplingState {
        regime: Regime::Easy,
        n,
        d,
        p,
        x,
        p1: p,
        p2: 0.0,
        p3: 0.0,
        vec_p1: vp,
        vec_p3: 0.0,
        q: 0.0,
        e1_arcs: arcs,
        e2_edges: Vec::new(),
        e3_arcs: Vec::new(),
        good,
        bad: Vec::new(),
        f1: true,
        f2: fallback == 0,
        f3: true,
        fallback_vertices: fallback,
    };
    Ok((Digraph::from_unchecked(n, out), outer, state))
}

fn hard(n: usize, p: f64, d: usize, x: f64, rng: &mut RngStream) -> Result<(Digraph, Multigraph, OutCouplingState)> {
    let ln_n = (n as f64).ln();
    let eps = x - 1.0;
    let p1 = (eps / 2.0) * ln_n / n as f64;
    let p2 = (1.0 + eps / 2.0) * ln_n / n as f64;
    let (vp1, vp3) = (vec_p(p1), vec_p(p2));
    let q = (1.0 - (1.0 - p) / ((1.0 - p1) * (1.0 - p2))).max(0.0);

    let e1 = sample_gnp_directed(n, vp1, rng)?;
    let e2 = sample_gnp(n, p2, rng)?;
    let e3 = sample_gnp_directed(n, vp3, rng)?;
    let sprinkle = sample_gnp(n, q, rng)?;

    let good: Vec<bool> = (1..=n as Vertex).map(|v| e1.out_degree(v) >= d).collect();
    let is_bad = |v: Vertex| !good[v as usize - 1];
    let bad_total = good.iter().filter(|g| !**g).count();

    // S_v: E2 edges from bad v to good heads
    let mut s_sets: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    let mut e2_kept = Vec::new();
    let mut e2_all = Vec::new();
    for &(u, v, _) in e2.edges() {
        e2_all.push((u, v));
        match (is_bad(u), is_bad(v)) {
            (true, true) => {}
            (true, false) => {
                s_sets[u as usize - 1].push(v);
                e2_kept.push((u, v));
            }
            (false, true) => {
                s_sets[v as usize - 1].push(u);
                e2_kept.push((u, v));
            }
            (false, false) => e2_kept.push((u, v)),
        }
    }
    let e3_kept: Vec<(Vertex, Vertex)> = e3.arcs().filter(|&(u, v)| is_bad(u) && is_bad(v)).collect();
    let e1_arcs: Vec<(Vertex, Vertex)> = e1.arcs().collect();

    let outer = shadow(
        n,
        e1_arcs
            .iter()
            .copied()
            .chain(e2_kept.iter().copied())
            .chain(e3_kept.iter().copied())
            .chain(sprinkle.edges().iter().map(|&(u, v, _)| (u, v))),
    );

    let bad_list: Vec<Vertex> = (1..=n as Vertex).filter(|&v| is_bad(v)).collect();
    let y = bad_total.saturating_sub(1);
    let xs = n - 1 - y;
    let coupling: Option<QuantileCoupling> = if bad_total > 0 {
        let ell = IntDistribution::binomial(d as u64 + 1, y as f64 / (n - 1) as f64)?;
        let tdist = IntDistribution::binomial(y as u64, vp3)?;
        Some(quantile_coupling(&ell, &tdist))
    } else {
        None
    };

    let mut out: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    let mut records = Vec::new();
    let (mut f2, mut f3) = (true, true);
    let mut fallback = 0;
    for v in 1..=n as Vertex {
        if !is_bad(v) {
            out[v as usize - 1] = pick(e1.out_neighbours(v), d, rng);
            continue;
        }
        let s_set = &s_sets[v as usize - 1];
        let t_set: Vec<Vertex> = e3.out_neighbours(v).iter().copied().filter(|&w| is_bad(w)).collect();
        let mut rec = BadVertexRecord { v, s: s_set.len(), t: t_set.len(), ..Default::default() };
        if s_set.len() < d + 1 {
            f2 = false;
            rec.fallback = Some("F2".into());
            rec.chosen = random_out_set(n, v, d, rng);
        } else {
            let q = coupling.as_ref().expect("bad vertex implies a coupling");
            sample_bad_vertex(n, d, v, y, xs, s_set, &t_set, &bad_list, q, &mut rec, rng);
            if rec.fallback.as_deref() == Some("F3") {
                f3 = false;
            }
        }
        if rec.fallback.is_some() {
            fallback += 1;
        }
        out[v as usize - 1] = rec.chosen.clone();
        records.push(rec);
    }

    let f1 = (bad_total as f64) <= (n as f64).powf(1.0 - eps / 8.0);
    let state = OutCouplingState {
        regime: Regime::Hard,
        n,
        d,
        p,
        x,
        p1,
        p2,
        p3: p2,
        vec_p1: vp1,
        vec_p3: vp3,
        q,
        e1_arcs,
        e2_edges: e2_all,
        e3_arcs: e3.arcs().collect(),
        good,
        bad: records,
        f1,
        f2,
        f3,
        fallback_vertices: fallback,
    };
    Ok((Digraph::from_unchecked(n, out), outer, state))
}

#[allow(clippy::too_many_arguments)]
fn sample_bad_vertex(
    n: usize,
    d: usize,
    v: Vertex,
    y: usize,
    xs: usize,
    s_set: &[Vertex],
    t_set: &[Vertex],
    bad_list: &[Vertex],
    q: &QuantileCoupling,
    rec: &mut BadVertexRecord,
    rng: &mut RngStream,
) {
    let draws = d + 1;
    rec.s_prime = pick(s_set, draws, rng);
    let ell = q.sample_x_given_y(rec.t, rng);
    rec.ell = ell;
    // which draws land in Y, then their labels: [1, y] for Y and (y, y + x] for X
    let in_y: Vec<usize> = index::sample(rng, draws, ell).into_vec();
    let mut labels = vec![0usize; draws];
    for (i, label) in labels.iter_mut().enumerate() {
        *label = if in_y.contains(&i) { 1 + rng.below(y) } else { y + 1 + rng.below(xs) };
    }
    rec.labels = labels.clone();
    let mut a_y: Vec<usize> = labels.iter().copied().filter(|&a| a <= y).collect();
    let mut a_x: Vec<usize> = labels.iter().copied().filter(|&a| a > y).collect();
    a_y.sort_unstable();
    a_y.dedup();
    a_x.sort_unstable();
    a_x.dedup();
    rec.u_y = a_y.len();
    rec.u_x = a_x.len();
    rec.u = rec.u_x + rec.u_y;

    let mut heads: Vec<Vertex> = Vec::with_capacity(rec.u);
    // X labels go to distinct random members of S'
    heads.extend(pick_ordered(&rec.s_prime, rec.u_x, rng));
    if rec.u_y <= rec.t {
        heads.extend(pick_ordered(t_set, rec.u_y, rng));
    } else {
        // not enough E3' arcs: realise the Y labels on arbitrary bad heads
        let others: Vec<Vertex> = bad_list.iter().copied().filter(|&w| w != v).collect();
        heads.extend(pick_ordered(&others, rec.u_y, rng));
        rec.fallback = Some("ell>t".into());
    }
    if heads.len() >= d {
        rec.chosen = pick(&heads, d, rng);
    } else {
        rec.fallback = Some("F3".into());
        rec.chosen = random_out_set(n, v, d, rng);
    }
}

fn pick_ordered(list: &[Vertex], k: usize, rng: &mut RngStream) -> Vec<Vertex> {
    let mut v: Vec<Vertex> = list.to_vec();
    v.shuffle(rng);
    v.truncate(k);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_outer() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..20 {
            let r = dout_gnp_embed(5, 1.0, 4, &mut rng).unwrap();
            assert!(r.contained);
            assert_eq!(r.outer, Multigraph::complete(5));
            assert_eq!(r.inner.as_ref().unwrap(), &Multigraph::complete(5));
        }
    }

    #[test]
    fn preconditions() {
        let mut rng = RngStream::new(5, 0);
        assert!(dout_gnp_embed(100, 0.01, 2, &mut rng).is_err());
        assert!(dout_gnp_embed(5, 1.0, 5, &mut rng).is_err());
        assert!(dout_gnp_embed(5, 1.5, 1, &mut rng).is_err());
    }

    #[test]
    fn hard_regime_invariants() {
        let n = 3000;
        let x = 1.6;
        let p = x * (n as f64).ln() / n as f64;
        for i in 0..5 {
            let mut rng = RngStream::new(11, i);
            let (r, st) = dout_gnp_embed_with_state(n, p, 2, &mut rng).unwrap();
            assert_eq!(st.regime, Regime::Hard);
            assert!(((1.0 - st.p1) * (1.0 - st.p2) * (1.0 - st.q) - (1.0 - p)).abs() < 1e-12);
            assert!((st.vec_p1 - (1.0 - (1.0 - st.p1).sqrt())).abs() < 1e-15);
            let dg = r.inner_digraph.as_ref().unwrap();
            assert!((1..=n as Vertex).all(|v| dg.out_degree(v) == 2));
            for b in &st.bad {
                assert!(b.u <= 3);
                assert!(b.u_y <= b.ell);
            }
            // every non-fallback vertex realises its arcs inside the outer graph
            let fallback: std::collections::HashSet<Vertex> =
                st.bad.iter().filter(|b| b.fallback.is_some()).map(|b| b.v).collect();
            for (u, w) in dg.arcs() {
                if !fallback.contains(&u) {
                    assert!(r.outer.has_edge(u, w));
                }
            }
            assert!(r.is_consistent().unwrap());
        }
    }
}
