//! Bipartite graphs with a prescribed degree sequence: exact counts and the
//! asymptotic formula for them, plus the conditional edge probability.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::{binomial, ln_factorial};

/// Largest edge count accepted by the exact counters.
pub const BIPARTITE_EDGE_CAP: u64 = 64;

/// Degree sequences `(s, t)` of the two sides, each sorted in decreasing order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BipartiteDegreePair {
    s: Vec<u32>,
    t: Vec<u32>,
}

impl BipartiteDegreePair {
    pub fn new(mut s: Vec<u32>, mut t: Vec<u32>) -> Result<Self> {
        let (ss, st): (u64, u64) = (s.iter().map(|&x| x as u64).sum(), t.iter().map(|&x| x as u64).sum());
        if ss != st {
            return Err(invalid(format!("degree sums differ: {ss} vs {st}")));
        }
        s.sort_unstable_by(|a, b| b.cmp(a));
        t.sort_unstable_by(|a, b| b.cmp(a));
        Ok(BipartiteDegreePair { s, t })
    }

    /// Unsorted variant used when vertex identities matter (conditional probabilities).
    fn new_labeled(s: Vec<u32>, t: Vec<u32>) -> Result<Self> {
        let (ss, st): (u64, u64) = (s.iter().map(|&x| x as u64).sum(), t.iter().map(|&x| x as u64).sum());
        if ss != st {
            return Err(invalid(format!("degree sums differ: {ss} vs {st}")));
        }
        Ok(BipartiteDegreePair { s, t })
    }

    pub fn s(&self) -> &[u32] {
        &self.s
    }

    pub fn t(&self) -> &[u32] {
        &self.t
    }

    /// Number of edges.
    pub fn m(&self) -> u64 {
        self.s.iter().map(|&x| x as u64).sum()
    }

    pub fn delta_s(&self) -> u32 {
        self.s.iter().copied().max().unwrap_or(0)
    }

    pub fn delta_t(&self) -> u32 {
        self.t.iter().copied().max().unwrap_or(0)
    }

    pub fn delta(&self) -> u32 {
        self.delta_s().max(self.delta_t())
    }

    /// Bound on the number of 2-paths from any vertex: the `s_1` largest `t`
    /// entries plus the `t_1` largest `s` entries.
    pub fn j(&self) -> u64 {
        let mut s = self.s.clone();
        let mut t = self.t.clone();
        s.sort_unstable_by(|a, b| b.cmp(a));
        t.sort_unstable_by(|a, b| b.cmp(a));
        let s1 = s.first().copied().unwrap_or(0) as usize;
        let t1 = t.first().copied().unwrap_or(0) as usize;
        t.iter().take(s1).map(|&x| x as u64).sum::<u64>() + s.iter().take(t1).map(|&x| x as u64).sum::<u64>()
    }

    fn check_cap(&self) -> Result<()> {
        if self.m() > BIPARTITE_EDGE_CAP {
            return Err(Error::TooLarge {
                what: "bipartite degree sequence".into(),
                size: self.m().to_string(),
                cap: BIPARTITE_EDGE_CAP.to_string(),
            });
        }
        Ok(())
    }
}

/// Exact number of bipartite graphs with degree sequence `(s, t)`.
///
/// Processes the `t` side one vertex at a time. Vertices of `U` with equal
/// residual degree are interchangeable, so the state is the histogram of
/// residual degrees and each step picks how many neighbours to take from each
/// residual class.
pub fn exact_bipartite_count(dp: &BipartiteDegreePair) -> Result<BigUint> {
    dp.check_cap()?;
    if dp.s.iter().any(|&x| x as usize > dp.t.len()) || dp.t.iter().any(|&x| x as usize > dp.s.len()) {
        return Ok(BigUint::zero());
    }
    let top = dp.delta_s() as usize;
    let mut hist = vec![0u32; top + 1];
    for &x in &dp.s {
        hist[x as usize] += 1;
    }
    let mut memo = HashMap::new();
    Ok(count_by_histogram(&dp.t, 0, hist, &mut memo))
}

fn count_by_histogram(
    t: &[u32],
    j: usize,
    hist: Vec<u32>,
    memo: &mut HashMap<(usize, Vec<u32>), BigUint>,
) -> BigUint {
    if j == t.len() {
        return if hist.iter().skip(1).all(|&c| c == 0) { BigUint::one() } else { BigUint::zero() };
    }
    if let Some(v) = memo.get(&(j, hist.clone())) {
        return v.clone();
    }
    let mut total = BigUint::zero();
    let mut take = vec![0u32; hist.len()];
    distribute(t, j, &hist, 1, t[j], &mut take, BigUint::one(), &mut total, memo);
    memo.insert((j, hist), total.clone());
    total
}

#[allow(clippy::too_many_arguments)]
fn distribute(
    t: &[u32],
    j: usize,
    hist: &[u32],
    class: usize,
    left: u32,
    take: &mut Vec<u32>,
    ways: BigUint,
    total: &mut BigUint,
    memo: &mut HashMap<(usize, Vec<u32>), BigUint>,
) {
    if left == 0 {
        let mut next = hist.to_vec();
        for r in 1..hist.len() {
            next[r] -= take[r];
            next[r - 1] += take[r];
        }
        *total += ways * count_by_histogram(t, j + 1, next, memo);
        return;
    }
    if class >= hist.len() {
        return;
    }
    let max_here = hist[class].min(left);
    for k in 0..=max_here {
        take[class] = k;
        let w = &ways * binomial(hist[class] as u64, k as u64);
        distribute(t, j, hist, class + 1, left - k, take, w, total, memo);
    }
    take[class] = 0;
}

/// Exact count with forbidden edges, by plain backtracking over the `t` side
/// with memoisation on the full residual vector. `forbidden` holds `(i, j)`
/// index pairs into `s` and `t` as given (the sequences are not re-sorted).
pub fn exact_bipartite_count_avoiding(
    s: &[u32],
    t: &[u32],
    forbidden: &BTreeSet<(usize, usize)>,
) -> Result<BigUint> {
    let dp = BipartiteDegreePair::new_labeled(s.to_vec(), t.to_vec())?;
    dp.check_cap()?;
    let mut memo = HashMap::new();
    Ok(count_avoiding(&dp.t, 0, dp.s.clone(), forbidden, &mut memo))
}

fn count_avoiding(
    t: &[u32],
    j: usize,
    residual: Vec<u32>,
    forbidden: &BTreeSet<(usize, usize)>,
    memo: &mut HashMap<(usize, Vec<u32>), BigUint>,
) -> BigUint {
    if j == t.len() {
        return if residual.iter().all(|&r| r == 0) { BigUint::one() } else { BigUint::zero() };
    }
    let remaining: u64 = t[j..].iter().map(|&x| x as u64).sum();
    if remaining != residual.iter().map(|&x| x as u64).sum::<u64>() {
        return BigUint::zero();
    }
    if let Some(v) = memo.get(&(j, residual.clone())) {
        return v.clone();
    }
    let candidates: Vec<usize> =
        (0..residual.len()).filter(|&i| residual[i] > 0 && !forbidden.contains(&(i, j))).collect();
    let mut total = BigUint::zero();
    let mut chosen = Vec::with_capacity(t[j] as usize);
    subsets(&candidates, t[j] as usize, 0, &mut chosen, &mut |pick| {
        let mut next = residual.clone();
        for &i in pick {
            next[i] -= 1;
        }
        total += count_avoiding(t, j + 1, next, forbidden, memo);
    });
    memo.insert((j, residual), total.clone());
    total
}

pub(crate) fn subsets<F: FnMut(&[usize])>(items: &[usize], k: usize, start: usize, chosen: &mut Vec<usize>, f: &mut F) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    let need = k - chosen.len();
    if items.len() - start < need {
        return;
    }
    for i in start..items.len() {
        if items.len() - i < need {
            break;
        }
        chosen.push(items[i]);
        subsets(items, k, i + 1, chosen, f);
        chosen.pop();
    }
}

/// Main term of the bipartite enumeration formula, in log space.
#[derive(Clone, Debug, Serialize)]
pub struct BipartiteEstimate {
    pub log_value: f64,
    pub value: f64,
    /// `Δ⁴ / M`, the argument of the omitted remainder.
    pub remainder_arg: f64,
    /// `Δ² >= M / 6`: outside the range where the formula is asserted.
    pub outside_hypothesis: bool,
}

pub fn mckay_bipartite_estimate(dp: &BipartiteDegreePair) -> Result<BipartiteEstimate> {
    let m = dp.m();
    if m == 0 {
        return Err(invalid("estimate needs at least one edge"));
    }
    let mf = m as f64;
    let ls: f64 = dp.s.iter().map(|&x| ln_factorial(x as u64)).sum();
    let lt: f64 = dp.t.iter().map(|&x| ln_factorial(x as u64)).sum();
    let ps: f64 = dp.s.iter().map(|&x| x as f64 * (x as f64 - 1.0)).sum();
    let pt: f64 = dp.t.iter().map(|&x| x as f64 * (x as f64 - 1.0)).sum();
    let log_value = ln_factorial(m) - ls - lt - ps * pt / (2.0 * mf * mf);
    let delta = dp.delta() as f64;
    Ok(BipartiteEstimate {
        log_value,
        value: log_value.exp(),
        remainder_arg: delta.powi(4) / mf,
        outside_hypothesis: delta * delta >= mf / 6.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbabilityMode {
    Estimate,
    Exact,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeProbability {
    pub probability: f64,
    /// Exact rational value (exact mode only).
    #[serde(skip)]
    pub exact: Option<BigRational>,
    /// Error-scale diagnostic of the main-term formula.
    pub xi: f64,
    /// `ξ >= 1`: the main term carries no information.
    pub xi_too_large: bool,
}

/// Probability that `u v` is an edge of a uniform bipartite graph with degrees
/// `(s, t)`, conditioned on containing `h1` and avoiding `h2`.
///
/// Vertices are addressed by index into `s` (side U) and `t` (side V), in the
/// order given. `h1` and `h2` are edge lists of `(u, v)` index pairs.
pub fn conditional_edge_probability(
    s: &[u32],
    t: &[u32],
    h1: &[(usize, usize)],
    h2: &[(usize, usize)],
    uv: (usize, usize),
    mode: ProbabilityMode,
) -> Result<EdgeProbability> {
    let dp = BipartiteDegreePair::new_labeled(s.to_vec(), t.to_vec())?;
    let h1_set: BTreeSet<(usize, usize)> = h1.iter().copied().collect();
    let h2_set: BTreeSet<(usize, usize)> = h2.iter().copied().collect();
    if h1_set.len() != h1.len() || h2_set.len() != h2.len() {
        return Err(invalid("repeated edge in H1 or H2"));
    }
    if !h1_set.is_disjoint(&h2_set) {
        return Err(invalid("H1 and H2 must be disjoint"));
    }
    if h1_set.contains(&uv) || h2_set.contains(&uv) {
        return Err(invalid("uv must lie outside H1 and H2"));
    }
    for &(a, b) in h1_set.iter().chain(h2_set.iter()).chain(std::iter::once(&uv)) {
        if a >= s.len() || b >= t.len() {
            return Err(invalid(format!("edge ({a},{b}) outside the vertex sets")));
        }
    }
    let mut ds = s.to_vec();
    let mut dt = t.to_vec();
    for &(a, b) in &h1_set {
        if ds[a] == 0 || dt[b] == 0 {
            return Err(invalid("H1 degrees exceed the degree sequence"));
        }
        ds[a] -= 1;
        dt[b] -= 1;
    }
    let m = dp.m() as f64;
    let e1 = h1_set.len() as f64;
    let residual_pair = ds[uv.0] as f64 * dt[uv.1] as f64;
    let main = residual_pair / (m - e1);

    let mut h2_deg_s = vec![0u32; s.len()];
    let mut h2_deg_t = vec![0u32; t.len()];
    for &(a, b) in &h2_set {
        h2_deg_s[a] += 1;
        h2_deg_t[b] += 1;
    }
    let delta_h2 = h2_deg_s.iter().chain(h2_deg_t.iter()).copied().max().unwrap_or(0) as f64;
    let xi = (dp.j() as f64 + dp.delta() as f64 * (1.0 + delta_h2) + residual_pair) / (m - e1)
        + h2_set.len() as f64 * dp.delta_s() as f64 * dp.delta_t() as f64 / (m - e1).powi(2);

    match mode {
        ProbabilityMode::Estimate => Ok(EdgeProbability { probability: main, exact: None, xi, xi_too_large: xi >= 1.0 }),
        ProbabilityMode::Exact => {
            let blocked: BTreeSet<(usize, usize)> = h1_set.union(&h2_set).copied().collect();
            let total = exact_bipartite_count_avoiding(&ds, &dt, &blocked)?;
            if total.is_zero() {
                return Err(Error::EmptySupport("no graph contains H1 while avoiding H2".into()));
            }
            let with_uv = if ds[uv.0] == 0 || dt[uv.1] == 0 {
                BigUint::zero()
            } else {
                let mut ds2 = ds.clone();
                let mut dt2 = dt.clone();
                ds2[uv.0] -= 1;
                dt2[uv.1] -= 1;
                let mut blocked2 = blocked.clone();
                blocked2.insert(uv);
                exact_bipartite_count_avoiding(&ds2, &dt2, &blocked2)?
            };
            let exact = BigRational::new(with_uv.into(), total.into());
            Ok(EdgeProbability {
                probability: exact.to_f64().unwrap_or(f64::NAN),
                exact: Some(exact),
                xi,
                xi_too_large: xi >= 1.0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp(s: &[u32], t: &[u32]) -> BipartiteDegreePair {
        BipartiteDegreePair::new(s.to_vec(), t.to_vec()).unwrap()
    }

    #[test]
    fn small_exact_counts() {
        assert_eq!(exact_bipartite_count(&dp(&[1, 1], &[1, 1])).unwrap(), BigUint::from(2u32));
        assert_eq!(exact_bipartite_count(&dp(&[2, 2], &[2, 2])).unwrap(), BigUint::from(1u32));
        assert_eq!(exact_bipartite_count(&dp(&[3, 1], &[2, 2])).unwrap(), BigUint::zero());
        assert!(BipartiteDegreePair::new(vec![1], vec![2]).is_err());
    }

    #[test]
    fn j_statistic() {
        // s = (2,1), t = (2,1): s1 = 2 -> t1 + t2 = 3; t1 = 2 -> s1 + s2 = 3
        assert_eq!(dp(&[2, 1], &[1, 2]).j(), 6);
    }

    #[test]
    fn estimate_is_exact_for_degree_one() {
        for m in 1..=8u32 {
            let ones = vec![1; m as usize];
            let e = mckay_bipartite_estimate(&dp(&ones, &ones)).unwrap();
            let exact = exact_bipartite_count(&dp(&ones, &ones)).unwrap();
            assert!((e.value - exact.to_f64().unwrap()).abs() < 1e-9 * e.value);
        }
    }

    #[test]
    fn estimate_two_two() {
        let e = mckay_bipartite_estimate(&dp(&[2, 2], &[2, 2])).unwrap();
        assert!((e.value - 1.5 * (-0.5f64).exp()).abs() < 1e-12);
        assert!((e.value - 0.9098).abs() < 1e-4);
        assert!(e.outside_hypothesis);
    }

    #[test]
    fn conditional_probability_examples() {
        let p = conditional_edge_probability(&[1, 1], &[1, 1], &[], &[], (0, 0), ProbabilityMode::Exact).unwrap();
        assert_eq!(p.exact.unwrap(), BigRational::new(1.into(), 2.into()));
        let p = conditional_edge_probability(&[1, 1], &[1, 1], &[], &[], (0, 0), ProbabilityMode::Estimate).unwrap();
        assert!((p.probability - 0.5).abs() < 1e-15);

        // all other pairs at u forbidden: the edge is forced
        let h2: Vec<(usize, usize)> = (1..4).map(|v| (0, v)).collect();
        let p = conditional_edge_probability(&[1; 4], &[1; 4], &[], &h2, (0, 0), ProbabilityMode::Exact).unwrap();
        assert_eq!(p.exact.unwrap(), BigRational::one());
    }

    #[test]
    fn conditional_probability_errors() {
        assert!(conditional_edge_probability(&[1, 1], &[1, 1], &[(0, 0)], &[(0, 0)], (1, 1), ProbabilityMode::Estimate).is_err());
        assert!(conditional_edge_probability(&[1, 1], &[1, 1], &[(0, 0)], &[], (0, 0), ProbabilityMode::Estimate).is_err());
        let err = conditional_edge_probability(&[1, 1], &[1, 1], &[], &[(0, 0), (0, 1)], (1, 0), ProbabilityMode::Exact);
        assert!(matches!(err, Err(Error::EmptySupport(_))));
    }
}
