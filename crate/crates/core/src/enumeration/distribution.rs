//! Explicit probability vectors over enumerated outcome spaces, and the exact
//! laws of the graph models on tiny instances.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::io::{BufRead, Write};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::graph::{Multigraph, Pairing, Point, Vertex};
use crate::numeric::{double_factorial_pairs, factorial};
use crate::rng::RngStream;

use super::matchings::all_perfect_matchings;

/// Largest number of outcomes an exact model law may have.
pub const OUTCOME_CAP: usize = 2_000_000;
/// Largest labeled space walked by a convolution (`((n-1)!!)^d` style products).
pub const LABELED_SPACE_CAP: u64 = 10_000_000;

/// Probability weights: exact rationals or floats.
pub trait Weight: Clone + PartialOrd + Num + ToPrimitive + Debug + Send + Sync + 'static {
    /// Whether `total` is an acceptable sum of a probability vector.
    fn is_unit_total(total: &Self) -> bool;
    fn from_ratio(num: u64, den: u64) -> Self;
}

impl Weight for f64 {
    fn is_unit_total(total: &Self) -> bool {
        (total - 1.0).abs() <= 1e-12
    }
    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }
}

impl Weight for BigRational {
    fn is_unit_total(total: &Self) -> bool {
        total.is_one()
    }
    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Probability vector over string keys, sorted by key, zero weights dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution<W = BigRational> {
    outcomes: Vec<String>,
    probs: Vec<W>,
}

impl<W: Weight> FiniteDistribution<W> {
    /// Merges repeated keys; rejects negative weights and totals other than one.
    pub fn new<I: IntoIterator<Item = (String, W)>>(items: I) -> Result<Self> {
        let mut map: BTreeMap<String, W> = BTreeMap::new();
        for (k, w) in items {
            if w < W::zero() {
                return Err(invalid(format!("negative weight on '{k}'")));
            }
            let e = map.entry(k).or_insert_with(W::zero);
            *e = e.clone() + w;
        }
        let total = map.values().fold(W::zero(), |a, b| a + b.clone());
        if !W::is_unit_total(&total) {
            return Err(invalid(format!("weights sum to {total:?}, not 1")));
        }
        let (outcomes, probs) = map.into_iter().filter(|(_, w)| !w.is_zero()).unzip();
        Ok(FiniteDistribution { outcomes, probs })
    }

    /// Normalises nonnegative weights.
    pub fn from_weights<I: IntoIterator<Item = (String, W)>>(items: I) -> Result<Self> {
        let items: Vec<(String, W)> = items.into_iter().collect();
        let total = items.iter().fold(W::zero(), |a, (_, w)| a + w.clone());
        if total.is_zero() {
            return Err(Error::EmptySupport("all weights are zero".into()));
        }
        Self::new(items.into_iter().map(|(k, w)| (k, w / total.clone())))
    }

    pub fn uniform<I: IntoIterator<Item = String>>(keys: I) -> Result<Self> {
        let keys: Vec<String> = keys.into_iter().collect();
        if keys.is_empty() {
            return Err(Error::EmptySupport("uniform law on an empty set".into()));
        }
        let w = W::from_ratio(1, keys.len() as u64);
        Self::new(keys.into_iter().map(|k| (k, w.clone())))
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[W] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &W)> {
        self.outcomes.iter().zip(self.probs.iter())
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.outcomes.binary_search_by(|k| k.as_str().cmp(key)).ok()
    }

    pub fn prob(&self, key: &str) -> W {
        self.index_of(key).map(|i| self.probs[i].clone()).unwrap_or_else(W::zero)
    }

    pub fn to_f64(&self) -> FiniteDistribution<f64> {
        FiniteDistribution {
            outcomes: self.outcomes.clone(),
            probs: self.probs.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }

    /// Push-forward under a key map.
    pub fn map<F: FnMut(&str) -> String>(&self, mut f: F) -> Result<Self> {
        Self::new(self.iter().map(|(k, w)| (f(k), w.clone())))
    }

    /// Restriction to the keys satisfying `keep`, renormalised.
    pub fn condition<F: FnMut(&str) -> bool>(&self, mut keep: F) -> Result<Self> {
        Self::from_weights(self.iter().filter(|(k, _)| keep(k)).map(|(k, w)| (k.clone(), w.clone())))
    }

    /// Draws an outcome index by inversion.
    pub fn sample_index(&self, rng: &mut RngStream) -> usize {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p.to_f64().unwrap_or(0.0);
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }

    pub fn sample<'a>(&'a self, rng: &mut RngStream) -> &'a str {
        &self.outcomes[self.sample_index(rng)]
    }
}

impl FiniteDistribution<BigRational> {
    /// Lines `key numerator denominator`.
    pub fn write<Wr: Write>(&self, mut w: Wr) -> Result<()> {
        for (k, p) in self.iter() {
            writeln!(w, "{} {} {}", k, p.numer(), p.denom())?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut items = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse { line: lineno, msg: "expected 'key numerator denominator'".into() });
            }
            let parse = |s: &str| {
                s.parse::<BigInt>().map_err(|_| Error::Parse { line: lineno, msg: format!("bad integer '{s}'") })
            };
            let (num, den) = (parse(f[1])?, parse(f[2])?);
            if den.is_zero() || den.is_negative() {
                return Err(Error::Parse { line: lineno, msg: "denominator must be positive".into() });
            }
            items.push((f[0].to_string(), BigRational::new(num, den)));
        }
        Self::new(items).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
    }
}

/// Models with an exact law on tiny instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExactModel {
    /// `P(n,d)` projected.
    Pairing,
    /// `P*(n,d)` projected.
    LooplessPairing,
    /// `M_d^+`.
    MatchingSuperpose,
    /// `M_d^∪`.
    MatchingUnion,
    /// `G(n,d)`.
    Grd,
    /// `P*(n,d) + M_j^+`.
    PairingPlusMatchings { j: usize },
}

/// Exact law of `model` with parameters `(n, d)` over multigraph keys.
pub fn exact_model_distribution(model: ExactModel, n: usize, d: usize) -> Result<FiniteDistribution> {
    let law = exact_model_law(model, n, d)?;
    FiniteDistribution::new(law.into_iter().map(|(g, w)| (g.canonical_key(), w)))
}

/// Same as [`exact_model_distribution`] but keyed by the multigraphs themselves.
pub fn exact_model_law(model: ExactModel, n: usize, d: usize) -> Result<BTreeMap<Multigraph, BigRational>> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    match model {
        ExactModel::Pairing => pairing_law(n, d, |_| true),
        ExactModel::LooplessPairing => pairing_law(n, d, |g| !g.has_loops()),
        ExactModel::Grd => pairing_law(n, d, |g| g.is_simple()),
        ExactModel::MatchingSuperpose => matching_law(n, d, Multigraph::empty(n)),
        ExactModel::MatchingUnion => {
            let mut base = BTreeMap::new();
            base.insert(Multigraph::empty(n), BigRational::one());
            convolve(base, n, d, true)
        }
        ExactModel::PairingPlusMatchings { j } => {
            let base = pairing_law(n, d, |g| !g.has_loops())?;
            convolve(base, n, j, false)
        }
    }
}

/// Projection of the uniform pairing law restricted to `keep`, renormalised.
fn pairing_law<F: Fn(&Multigraph) -> bool>(n: usize, d: usize, keep: F) -> Result<BTreeMap<Multigraph, BigRational>> {
    if (n * d) % 2 == 1 {
        return Err(invalid(format!("d*n = {} is odd", n * d)));
    }
    let graphs = multigraphs_with_degrees(&vec![d as u32; n], true)?;
    let mut weights = Vec::new();
    let mut total = BigUint::zero();
    for g in graphs {
        if !keep(&g) {
            continue;
        }
        let w = pairing_fiber_size(&g, d as u32);
        total += &w;
        weights.push((g, w));
    }
    if total.is_zero() {
        return Err(Error::EmptySupport(format!("no admissible multigraph for n={n}, d={d}")));
    }
    let total = BigInt::from(total);
    Ok(weights
        .into_iter()
        .map(|(g, w)| (g, BigRational::new(BigInt::from(w), total.clone())))
        .collect())
}

/// Number of pairings projecting onto `g` (all degrees `d`):
/// `prod d! / (prod_{u<v} m_uv! * prod_v m_vv! 2^{m_vv})`.
pub fn pairing_fiber_size(g: &Multigraph, d: u32) -> BigUint {
    let mut num = BigUint::one();
    for _ in 0..g.n() {
        num *= factorial(d as u64);
    }
    let mut den = BigUint::one();
    for &(u, v, m) in g.edges() {
        den *= factorial(m as u64);
        if u == v {
            den *= BigUint::one() << m;
        }
    }
    num / den
}

fn matching_law(n: usize, d: usize, start: Multigraph) -> Result<BTreeMap<Multigraph, BigRational>> {
    let mut base = BTreeMap::new();
    base.insert(start, BigRational::one());
    convolve(base, n, d, false)
}

/// Adds `times` independent uniform perfect matchings; with `cap` the
/// multiplicities are capped after every step, which gives the union law.
fn convolve(
    mut law: BTreeMap<Multigraph, BigRational>,
    n: usize,
    times: usize,
    cap: bool,
) -> Result<BTreeMap<Multigraph, BigRational>> {
    if times == 0 {
        return Ok(law);
    }
    if n % 2 == 1 {
        return Err(invalid(format!("perfect matchings need even n, got {n}")));
    }
    let pms = all_perfect_matchings(n)?;
    let share = BigRational::new(BigInt::one(), BigInt::from(pms.len()));
    let pm_graphs: Vec<Multigraph> = pms.iter().map(|m| m.to_multigraph()).collect();
    for _ in 0..times {
        let work = (law.len() as u64).saturating_mul(pms.len() as u64);
        if work > LABELED_SPACE_CAP {
            return Err(Error::TooLarge { what: "matching convolution".into(), size: work.to_string(), cap: LABELED_SPACE_CAP.to_string() });
        }
        let mut next = BTreeMap::new();
        for (g, w) in &law {
            let wm = w * &share;
            for h in &pm_graphs {
                let mut s = g.superpose(h)?;
                if cap {
                    s = s.capped();
                }
                *next.entry(s).or_insert_with(BigRational::zero) += &wm;
            }
        }
        if next.len() > OUTCOME_CAP {
            return Err(Error::TooLarge { what: "matching convolution outcomes".into(), size: next.len().to_string(), cap: OUTCOME_CAP.to_string() });
        }
        law = next;
    }
    Ok(law)
}

/// All multigraphs on `[n]` with the given degrees. Loops count twice and are
/// allowed only when `loops` is set.
pub fn multigraphs_with_degrees(degrees: &[u32], loops: bool) -> Result<Vec<Multigraph>> {
    let mut out = Vec::new();
    let mut edges = Vec::new();
    let mut residual = degrees.to_vec();
    mg_rec(0, 0, &mut residual, loops, &mut edges, &mut out)?;
    Ok(out)
}

// Pair (i, j) with j == i is the loop at i; pairs are visited in lexicographic order.
fn mg_rec(
    i: usize,
    j: usize,
    residual: &mut Vec<u32>,
    loops: bool,
    edges: &mut Vec<(Vertex, Vertex, u32)>,
    out: &mut Vec<Multigraph>,
) -> Result<()> {
    let n = residual.len();
    if i == n {
        out.push(Multigraph::from_unchecked(n, edges.clone()));
        if out.len() > OUTCOME_CAP {
            return Err(Error::TooLarge {
                what: "multigraph enumeration".into(),
                size: format!(">{OUTCOME_CAP}"),
                cap: OUTCOME_CAP.to_string(),
            });
        }
        return Ok(());
    }
    if j == n || residual[i] == 0 {
        if residual[i] == 0 {
            return mg_rec(i + 1, i + 1, residual, loops, edges, out);
        }
        return Ok(());
    }
    let top = if j == i {
        if loops { residual[i] / 2 } else { 0 }
    } else {
        let later: u32 = residual[j..].iter().sum();
        if later < residual[i] {
            return Ok(());
        }
        residual[i].min(residual[j])
    };
    for m in (0..=top).rev() {
        let (di, dj) = if j == i { (2 * m, 0) } else { (m, m) };
        residual[i] -= di;
        residual[j] -= dj;
        if m > 0 {
            edges.push((i as Vertex + 1, j as Vertex + 1, m));
        }
        mg_rec(i, j + 1, residual, loops, edges, out)?;
        if m > 0 {
            edges.pop();
        }
        residual[i] += di;
        residual[j] += dj;
    }
    Ok(())
}

/// Every pairing of `P(n,d)` (point-labeled). Capped at [`OUTCOME_CAP`].
pub fn enumerate_pairings(n: usize, d: u32) -> Result<Vec<Pairing>> {
    let points = n * d as usize;
    if points % 2 == 1 {
        return Err(invalid(format!("d*n = {points} is odd")));
    }
    let count = double_factorial_pairs(points as u64 / 2);
    if count > BigUint::from(OUTCOME_CAP) {
        return Err(Error::TooLarge { what: "pairing enumeration".into(), size: count.to_string(), cap: OUTCOME_CAP.to_string() });
    }
    let point = |i: usize| -> Point { ((i / d as usize) as Vertex + 1, (i % d as usize) as u32 + 1) };
    let mut out = Vec::new();
    let mut used = vec![false; points];
    let mut cur: Vec<(Point, Point)> = Vec::with_capacity(points / 2);
    fn rec(
        used: &mut Vec<bool>,
        cur: &mut Vec<(Point, Point)>,
        out: &mut Vec<Pairing>,
        n: usize,
        d: u32,
        point: &dyn Fn(usize) -> Point,
    ) -> Result<()> {
        let Some(a) = used.iter().position(|&u| !u) else {
            out.push(Pairing::new(n, d, cur.clone())?);
            return Ok(());
        };
        used[a] = true;
        for b in a + 1..used.len() {
            if !used[b] {
                used[b] = true;
                cur.push((point(a), point(b)));
                rec(used, cur, out, n, d, point)?;
                cur.pop();
                used[b] = false;
            }
        }
        used[a] = false;
        Ok(())
    }
    rec(&mut used, &mut cur, &mut out, n, d, &point)?;
    Ok(out)
}

/// Exact law of `G(n,p)` (float weights), for `C(n,2) <= 20`.
pub fn exact_gnp_distribution(n: usize, p: f64) -> Result<FiniteDistribution<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p = {p} outside [0,1]")));
    }
    let pairs: Vec<(Vertex, Vertex)> =
        (1..=n as Vertex).flat_map(|u| (u + 1..=n as Vertex).map(move |v| (u, v))).collect();
    if pairs.len() > 20 {
        return Err(Error::TooLarge { what: "G(n,p) law".into(), size: format!("2^{}", pairs.len()), cap: "2^20".into() });
    }
    let mut items = Vec::with_capacity(1 << pairs.len());
    for mask in 0u32..(1u32 << pairs.len()) {
        let k = mask.count_ones() as i32;
        let w = p.powi(k) * (1.0 - p).powi(pairs.len() as i32 - k);
        if w == 0.0 {
            continue;
        }
        let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &(u, v))| (u, v, 1)).collect();
        items.push((Multigraph::from_unchecked(n, edges).canonical_key(), w));
    }
    let total: f64 = items.iter().map(|x| x.1).sum();
    FiniteDistribution::new(items.into_iter().map(|(k, w)| (k, w / total)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn pairing_two_two() {
        let law = exact_model_distribution(ExactModel::Pairing, 2, 2).unwrap();
        assert_eq!(law.len(), 2);
        assert_eq!(law.prob("2:1,1,1;2,2,1"), r(1, 3));
        assert_eq!(law.prob("2:1,2,2"), r(2, 3));
        let lp = exact_model_distribution(ExactModel::LooplessPairing, 2, 2).unwrap();
        assert_eq!(lp.prob("2:1,2,2"), r(1, 1));
    }

    #[test]
    fn fiber_sizes_sum_to_pairing_count() {
        for (n, d) in [(4usize, 2u32), (4, 3), (3, 2), (6, 3), (5, 4)] {
            let graphs = multigraphs_with_degrees(&vec![d; n], true).unwrap();
            let total: BigUint = graphs.iter().map(|g| pairing_fiber_size(g, d)).sum();
            assert_eq!(total, double_factorial_pairs((n * d as usize / 2) as u64), "n={n} d={d}");
            for g in &graphs {
                assert!(g.degrees().iter().all(|&x| x == d));
            }
        }
    }

    #[test]
    fn projection_of_enumerated_pairings() {
        let ps = enumerate_pairings(4, 2).unwrap();
        assert_eq!(ps.len(), 105);
        let mut counts: BTreeMap<Multigraph, u64> = BTreeMap::new();
        for p in &ps {
            *counts.entry(p.project()).or_default() += 1;
        }
        for (g, c) in counts {
            assert_eq!(pairing_fiber_size(&g, 2), BigUint::from(c));
        }
    }

    #[test]
    fn model_laws() {
        let grd = exact_model_distribution(ExactModel::Grd, 4, 3).unwrap();
        assert_eq!(grd.len(), 1);
        let sup = exact_model_distribution(ExactModel::MatchingSuperpose, 4, 2).unwrap();
        assert_eq!(sup.len(), 6);
        assert_eq!(sup.probs().iter().cloned().sum::<BigRational>(), r(1, 1));
        let un = exact_model_distribution(ExactModel::MatchingUnion, 4, 2).unwrap();
        assert_eq!(un.len(), 6);
        let both = exact_model_distribution(ExactModel::PairingPlusMatchings { j: 1 }, 4, 2).unwrap();
        assert!(both.outcomes().iter().all(|k| Multigraph::from_canonical_key(k).unwrap().degrees() == vec![3; 4]));
        assert!(exact_model_distribution(ExactModel::Pairing, 3, 3).is_err());
    }

    #[test]
    fn file_round_trip() {
        let law = exact_model_distribution(ExactModel::LooplessPairing, 4, 3).unwrap();
        let mut buf = Vec::new();
        law.write(&mut buf).unwrap();
        let back = FiniteDistribution::read(&buf[..]).unwrap();
        assert_eq!(back, law);
        assert!(FiniteDistribution::read(&b"a 1\n"[..]).is_err());
    }

    #[test]
    fn gnp_law() {
        let law = exact_gnp_distribution(4, 0.3).unwrap();
        assert_eq!(law.len(), 64);
        assert!((law.prob("4:") - 0.7f64.powi(6)).abs() < 1e-15);
    }
}
