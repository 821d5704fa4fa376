//! Splitting a d-out graph into independent 2-out graphs and extracting
//! perfect matchings from them.

use rand::seq::index;
use serde::Serialize;

use crate::enumeration::{list_perfect_matchings, MatchingConstraints};
use crate::error::{invalid, Result};
use crate::graph::{Digraph, Matching, Multigraph, Vertex};
use crate::models::sample_dout;
use crate::numeric::ln_binomial;
use crate::rng::RngStream;

use super::blossom::find_perfect_matching;

/// Largest order at which the extracted matching is uniform over all perfect
/// matchings of the host graph.
pub const UNIFORM_EXTRACTION_CAP: usize = 16;

/// Draws `k` 2-subsets of `set` whose joint law, when `set` is a uniform
/// `|set|`-subset of an `m`-element ground set, is that of `k` independent
/// uniform 2-subsets of the ground set.
///
/// Sequential sampling: `F(j, c)` is the log-weight of completing from step `j`
/// with `c` elements already covered, `F(k, c) = -ln C(m - c, |set| - c)`.
pub fn split_out_set(set: &[Vertex], m: usize, k: usize, rng: &mut RngStream) -> Result<Vec<(Vertex, Vertex)>> {
    let dp = set.len();
    if 2 * k > dp || dp > m {
        return Err(invalid(format!("cannot split a {dp}-set of {m} into {k} pairs")));
    }
    let top = 2 * k;
    let mut f = vec![vec![f64::NEG_INFINITY; top + 1]; k + 1];
    for c in 0..=top {
        f[k][c] = -ln_binomial((m - c) as u64, (dp - c) as u64);
    }
    let moves = |c: usize| -> [(f64, usize); 3] {
        let free = (dp - c) as f64;
        let cf = c as f64;
        [(cf * (cf - 1.0) / 2.0, c), (cf * free, c + 1), (free * (free - 1.0) / 2.0, c + 2)]
    };
    for j in (0..k).rev() {
        for c in 0..=(2 * j).min(top) {
            let terms: Vec<f64> = moves(c)
                .iter()
                .filter(|(cnt, to)| *cnt > 0.0 && *to <= top)
                .map(|(cnt, to)| cnt.ln() + f[j + 1][*to])
                .collect();
            f[j][c] = log_sum_exp(&terms);
        }
    }
    // `covered` lists positions of `set` already used, in order of first use.
    let mut order: Vec<usize> = (0..dp).collect();
    let mut c = 0;
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let opts = moves(c);
        let logs: Vec<f64> = opts
            .iter()
            .map(|(cnt, to)| if *cnt > 0.0 && *to <= top { cnt.ln() + f[j + 1][*to] } else { f64::NEG_INFINITY })
            .collect();
        let mx = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - mx).exp()).collect();
        let mut u = rng.uniform() * w.iter().sum::<f64>();
        let mut kind = 2;
        for (i, wi) in w.iter().enumerate() {
            if u < *wi {
                kind = i;
                break;
            }
            u -= wi;
        }
        let (a, b) = match kind {
            0 => {
                let ix = index::sample(rng, c, 2);
                (ix.index(0), ix.index(1))
            }
            1 => {
                let a = rng.below(c);
                let b = c + rng.below(dp - c);
                order.swap(c, b);
                c += 1;
                (a, c - 1)
            }
            _ => {
                let ix = index::sample(rng, dp - c, 2);
                let (x, y) = (c + ix.index(0), c + ix.index(1));
                order.swap(c, x);
                // `y` may have been the slot just vacated.
                let y = if y == c { x } else { y };
                order.swap(c + 1, y);
                c += 2;
                (c - 2, c - 1)
            }
        };
        let (p, q) = (set[order[a]], set[order[b]]);
        out.push((p.min(q), p.max(q)));
    }
    Ok(out)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let mx = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + xs.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}

/// Splits a `d'`-out digraph into `k <= d'/2` 2-out digraphs whose joint law is
/// that of `k` independent copies of `O(n, 2)`, each contained in the input.
pub fn split_dout(o: &Digraph, k: usize, rng: &mut RngStream) -> Result<Vec<Digraph>> {
    let n = o.n();
    let mut copies: Vec<Vec<Vec<Vertex>>> = vec![Vec::with_capacity(n); k];
    for v in 1..=n as Vertex {
        let pairs = split_out_set(o.out_neighbours(v), n - 1, k, rng)?;
        for (j, (a, b)) in pairs.into_iter().enumerate() {
            copies[j].push(vec![a, b]);
        }
    }
    copies.into_iter().map(|out| Digraph::new(n, out)).collect()
}

/// A perfect matching picked from a host graph.
#[derive(Clone, Debug, Serialize)]
pub struct ExtractedMatching {
    pub matching: Option<Matching>,
    /// True when the choice is uniform over all perfect matchings of the host.
    pub uniform: bool,
    /// Number of perfect matchings of the host, when enumerated.
    pub count: Option<usize>,
}

/// Uniform perfect matching of `g` for `n <= 16`; otherwise the blossom
/// algorithm's matching, flagged as not uniform.
pub fn extract_perfect_matching(g: &Multigraph, rng: &mut RngStream) -> Result<ExtractedMatching> {
    if g.n() % 2 != 0 {
        return Ok(ExtractedMatching { matching: None, uniform: true, count: Some(0) });
    }
    if g.n() <= UNIFORM_EXTRACTION_CAP {
        let all = list_perfect_matchings(g, &MatchingConstraints::default())?;
        let count = all.len();
        let matching = if all.is_empty() { None } else { Some(all[rng.below(count)].clone()) };
        return Ok(ExtractedMatching { matching, uniform: true, count: Some(count) });
    }
    Ok(ExtractedMatching { matching: find_perfect_matching(g), uniform: false, count: None })
}

/// One perfect matching (or `None`) from each of `count` independent `O(n,2)`.
pub fn matchings_via_2out(n: usize, count: usize, rng: &mut RngStream) -> Result<Vec<Option<Matching>>> {
    if n % 2 != 0 || n < 2 {
        return Err(invalid(format!("n must be even and positive, got {n}")));
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        if n == 2 {
            out.push(Some(Matching::new(2, vec![(1, 2)])?));
            continue;
        }
        let o = sample_dout(n, 2, rng)?.to_undirected();
        out.push(extract_perfect_matching(&o, rng)?.matching);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn split_pairs_are_iid_uniform() {
        // Ground set of 5, d' = 4, two pairs: each ordered pair of 2-subsets
        // should appear with probability 1/100.
        let mut hist: BTreeMap<Vec<(Vertex, Vertex)>, u32> = BTreeMap::new();
        let trials = 200_000;
        for i in 0..trials {
            let mut rng = RngStream::new(4, i);
            let set = crate::models::random_out_set(6, 6, 4, &mut rng);
            let pairs = split_out_set(&set, 5, 2, &mut rng).unwrap();
            for &(a, b) in &pairs {
                assert!(set.contains(&a) && set.contains(&b) && a < b);
            }
            *hist.entry(pairs).or_default() += 1;
        }
        assert_eq!(hist.len(), 100);
        let e = trials as f64 / 100.0;
        let chi: f64 = hist.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
        // 99 degrees of freedom; 0.999 quantile is about 148.
        assert!(chi < 148.0, "chi-square {chi}");
    }

    #[test]
    fn two_vertices() {
        let mut rng = RngStream::new(1, 0);
        let ms = matchings_via_2out(2, 3, &mut rng).unwrap();
        assert!(ms.iter().all(|m| m.as_ref().unwrap().pairs() == [(1, 2)]));
    }

    #[test]
    fn eight_vertices_contract() {
        for i in 0..200 {
            let mut rng = RngStream::new(5, i);
            let o = sample_dout(8, 2, &mut rng).unwrap().to_undirected();
            let e = extract_perfect_matching(&o, &mut rng).unwrap();
            if let Some(m) = e.matching {
                assert_eq!(m.pairs().len(), 4);
                assert!(m.pairs().iter().all(|&(u, v)| o.has_edge(u, v)));
            }
        }
    }
}
