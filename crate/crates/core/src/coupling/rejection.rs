//! Rejection embedding of a regular multigraph law into a superposition of
//! perfect matchings.
//!
//! Draw `H_1, ..., H_{i*}` independently from `M_d^+`. The first `H_i` that
//! lies in the typical set and survives a coin with probability `c / w(H_i)`
//! becomes the inner object, where `w(G) = P_{M_d^+}(G) / P_target(G)`. Given
//! that something is accepted, its law is the target law restricted to the
//! typical set. The outer object is the superposition of all draws, padded with
//! extra matchings up to `tau`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::enumeration::{exact_model_law, ExactModel};
use crate::error::{invalid, Result};
use crate::graph::{ContainmentMode, Multigraph};
use crate::models::{sample_matchings, superpose_matchings};
use crate::rng::RngStream;

use super::report::EmbeddingReport;

/// Constant `c` in the acceptance probability `c / w`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcceptScale {
    /// `c = 1 / f_n`, the constant the typical-set bound is phrased in.
    #[default]
    Bound,
    /// `c = min w` over the typical set, the largest constant keeping every
    /// acceptance probability at most one.
    Tight,
}

/// Precomputed weights for one `(target, d, f_n)` triple.
#[derive(Clone, Debug)]
pub struct RejectionSampler {
    n: usize,
    d: usize,
    fn_bound: f64,
    scale: AcceptScale,
    /// `w(G)` for every `G` in the typical set.
    weights: HashMap<Multigraph, f64>,
    c: f64,
    /// Target law restricted to the typical set, renormalised.
    accepted_law: BTreeMap<Multigraph, f64>,
    typical_mass: f64,
}

impl RejectionSampler {
    /// `target` and `proposal` are exact laws; the proposal must be `M_d^+` on
    /// the same vertex set for the outer object to be meaningful.
    pub fn new(
        target: &BTreeMap<Multigraph, BigRational>,
        proposal: &BTreeMap<Multigraph, BigRational>,
        d: usize,
        fn_bound: f64,
        scale: AcceptScale,
    ) -> Result<Self> {
        if !(fn_bound > 1.0) {
            return Err(invalid(format!("f_n must exceed 1, got {fn_bound}")));
        }
        let n = target.keys().next().map(|g| g.n()).ok_or_else(|| invalid("empty target law"))?;
        let mut weights = HashMap::new();
        let mut typical = BTreeMap::new();
        let mut typical_mass = 0.0;
        for (g, pt) in target {
            let pm = match proposal.get(g) {
                Some(p) => p,
                None => continue,
            };
            let w = (pm / pt).to_f64().unwrap_or(f64::NAN);
            if w >= 1.0 / fn_bound && w <= fn_bound {
                let mass = pt.to_f64().unwrap_or(0.0);
                weights.insert(g.clone(), w);
                typical.insert(g.clone(), mass);
                typical_mass += mass;
            }
        }
        if weights.is_empty() {
            return Err(invalid(format!("typical set is empty for f_n = {fn_bound}")));
        }
        let c = match scale {
            AcceptScale::Bound => 1.0 / fn_bound,
            AcceptScale::Tight => weights.values().cloned().fold(f64::INFINITY, f64::min),
        };
        let accepted_law = typical.into_iter().map(|(g, m)| (g, m / typical_mass)).collect();
        Ok(RejectionSampler { n, d, fn_bound, scale, weights, c, accepted_law, typical_mass })
    }

    /// Sampler for `P*(n,d)` inside `M_d^+`, from exact laws (cached).
    pub fn loopless_pairing(n: usize, d: usize, fn_bound: f64, scale: AcceptScale) -> Result<Arc<Self>> {
        cached(ExactModel::LooplessPairing, n, d, fn_bound, scale)
    }

    /// Sampler for `G(n,d)` inside `M_d^+`, from exact laws (cached).
    pub fn regular_graph(n: usize, d: usize, fn_bound: f64, scale: AcceptScale) -> Result<Arc<Self>> {
        cached(ExactModel::Grd, n, d, fn_bound, scale)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn fn_bound(&self) -> f64 {
        self.fn_bound
    }

    pub fn scale_constant(&self) -> f64 {
        self.c
    }

    pub fn weight(&self, g: &Multigraph) -> Option<f64> {
        self.weights.get(g).copied()
    }

    /// Probability that a single `M_d^+` draw is accepted.
    pub fn step_acceptance(&self) -> f64 {
        match self.scale {
            AcceptScale::Bound => self.typical_mass / self.fn_bound,
            AcceptScale::Tight => self.typical_mass * self.c,
        }
    }

    /// Target mass of the typical set.
    pub fn typical_mass(&self) -> f64 {
        self.typical_mass
    }

    /// Law of the inner object given that it is not empty.
    pub fn accepted_law(&self) -> &BTreeMap<Multigraph, f64> {
        &self.accepted_law
    }

    /// One run with `i* = tau / d` proposal draws, padded to `tau` matchings.
    pub fn run(&self, tau: usize, rng: &mut RngStream) -> Result<EmbeddingReport> {
        let i_star = tau / self.d;
        if i_star == 0 {
            return Err(invalid(format!("tau = {tau} is below d = {}", self.d)));
        }
        let mut accepted: Option<(usize, Multigraph)> = None;
        let mut outer = Multigraph::empty(self.n);
        for i in 1..=i_star {
            let h = superpose_matchings(self.n, &sample_matchings(self.n, self.d, rng)?);
            if accepted.is_none() {
                if let Some(w) = self.weights.get(&h) {
                    if rng.uniform() < (self.c / w).min(1.0) {
                        accepted = Some((i, h.clone()));
                    }
                }
            }
            outer = outer.superpose(&h)?;
        }
        let pad = tau - i_star * self.d;
        if pad > 0 {
            outer = outer.superpose(&superpose_matchings(self.n, &sample_matchings(self.n, pad, rng)?))?;
        }
        let step = accepted.as_ref().map(|a| a.0);
        let mut rep =
            EmbeddingReport::new("rejection", accepted.map(|a| a.1), outer, ContainmentMode::SubMultigraph)?;
        rep.note("i_star", i_star as u64);
        rep.note("padding", pad as u64);
        rep.note("accepted_at", step.map(|s| s as u64));
        rep.note("scale_constant", self.c);
        rep.note("typical_mass", self.typical_mass);
        if step.is_none() {
            rep.flag("empty");
        }
        Ok(rep)
    }
}

type CacheKey = (ExactModel, usize, usize, u64, AcceptScale);

fn cached(model: ExactModel, n: usize, d: usize, fn_bound: f64, scale: AcceptScale) -> Result<Arc<RejectionSampler>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<RejectionSampler>>>> = OnceLock::new();
    let key = (model, n, d, fn_bound.to_bits(), scale);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().expect("cache lock").get(&key) {
        return Ok(s.clone());
    }
    let target = exact_model_law(model, n, d)?;
    let proposal = exact_model_law(ExactModel::MatchingSuperpose, n, d)?;
    let s = Arc::new(RejectionSampler::new(&target, &proposal, d, fn_bound, scale)?);
    cache.lock().expect("cache lock").insert(key, s.clone());
    Ok(s)
}

/// Embeds `P*(n,d)` into `M_tau^+` at micro scale. The inner object is `None`
/// when every proposal was rejected.
pub fn rejection_embed(n: usize, d: usize, tau: usize, fn_bound: f64, rng: &mut RngStream) -> Result<EmbeddingReport> {
    rejection_embed_with(n, d, tau, fn_bound, AcceptScale::Bound, rng)
}

pub fn rejection_embed_with(
    n: usize,
    d: usize,
    tau: usize,
    fn_bound: f64,
    scale: AcceptScale,
    rng: &mut RngStream,
) -> Result<EmbeddingReport> {
    if n % 2 != 0 {
        return Err(invalid(format!("n must be even, got {n}")));
    }
    if d == 0 {
        return Err(invalid("d must be at least 1"));
    }
    RejectionSampler::loopless_pairing(n, d, fn_bound, scale)?.run(tau, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertices_accept_at_once() {
        for i in 0..20 {
            let mut rng = RngStream::new(1, i);
            let rep = rejection_embed_with(2, 2, 6, 3.0, AcceptScale::Tight, &mut rng).unwrap();
            let g = rep.inner.clone().unwrap();
            assert_eq!(g.multiplicity(1, 2), 2);
            assert_eq!(rep.diagnostics["accepted_at"], 1);
            assert!(rep.contained);
        }
    }

    #[test]
    fn weights_on_four_vertices() {
        let s = RejectionSampler::loopless_pairing(4, 3, 5.0, AcceptScale::Bound).unwrap();
        let mut ws: Vec<f64> = s.weights.values().cloned().collect();
        ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ws.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        assert_eq!(ws.len(), 3);
        assert!((ws[0] - 0.5741).abs() < 1e-3, "{ws:?}");
        assert!((s.typical_mass() - 1.0).abs() < 1e-12);
        assert!((s.step_acceptance() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn accepted_always_inside_outer() {
        for i in 0..200 {
            let mut rng = RngStream::new(2, i);
            let rep = rejection_embed(4, 3, 30, 5.0, &mut rng).unwrap();
            assert_eq!(rep.outer.degrees(), vec![30; 4]);
            if rep.inner.is_some() {
                assert!(rep.contained);
            }
            assert!(rep.is_consistent().unwrap());
        }
    }
}
