//! Total variation distance, exact and from samples.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::enumeration::{FiniteDistribution, Weight};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Space tag of a key: the text before the first `:` (the vertex count for
/// multigraph keys), or empty.
fn space(key: &str) -> &str {
    key.split_once(':').map(|(a, _)| a).unwrap_or("")
}

fn check_space<'a, I: IntoIterator<Item = &'a String>>(keys: I) -> Result<()> {
    let mut tag: Option<&str> = None;
    for k in keys {
        let t = space(k);
        match tag {
            None => tag = Some(t),
            Some(prev) if prev != t => {
                return Err(Error::KeySpaceMismatch(format!("keys from spaces {prev:?} and {t:?}")));
            }
            _ => {}
        }
    }
    Ok(())
}

/// `1/2 sum |a - b|` over the union of supports.
pub fn tv_exact<W: Weight>(a: &FiniteDistribution<W>, b: &FiniteDistribution<W>) -> Result<W> {
    check_space(a.outcomes().iter().chain(b.outcomes()))?;
    let mut total = W::zero();
    let (oa, ob) = (a.outcomes(), b.outcomes());
    let (pa, pb) = (a.probs(), b.probs());
    let (mut i, mut j) = (0, 0);
    let absdiff = |x: &W, y: &W| if x > y { x.clone() - y.clone() } else { y.clone() - x.clone() };
    while i < oa.len() || j < ob.len() {
        if j == ob.len() || (i < oa.len() && oa[i] < ob[j]) {
            total = total + pa[i].clone();
            i += 1;
        } else if i == oa.len() || ob[j] < oa[i] {
            total = total + pb[j].clone();
            j += 1;
        } else {
            total = total + absdiff(&pa[i], &pb[j]);
            i += 1;
            j += 1;
        }
    }
    Ok(total / (W::one() + W::one()))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TvEstimate {
    pub value: f64,
    /// Bootstrap standard error (0 when no resamples were requested).
    pub se: f64,
}

fn plug_in(a: &[&str], b: &[&str]) -> f64 {
    let mut m: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for k in a {
        m.entry(k).or_default().0 += 1.0 / a.len() as f64;
    }
    for k in b {
        m.entry(k).or_default().1 += 1.0 / b.len() as f64;
    }
    m.values().map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

/// Plug-in TV of two empirical laws, with a bootstrap standard error from
/// `resamples` resamplings of both sides.
pub fn tv_empirical<S: AsRef<str>>(a: &[S], b: &[S], resamples: usize, rng: &mut RngStream) -> Result<TvEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(crate::error::invalid("empirical TV needs two non-empty samples"));
    }
    let a: Vec<&str> = a.iter().map(|s| s.as_ref()).collect();
    let b: Vec<&str> = b.iter().map(|s| s.as_ref()).collect();
    let value = plug_in(&a, &b);
    if resamples < 2 {
        return Ok(TvEstimate { value, se: 0.0 });
    }
    let mut draws = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let ra: Vec<&str> = (0..a.len()).map(|_| a[rng.below(a.len())]).collect();
        let rb: Vec<&str> = (0..b.len()).map(|_| b[rng.below(b.len())]).collect();
        draws.push(plug_in(&ra, &rb));
    }
    let m = draws.iter().sum::<f64>() / resamples as f64;
    let var = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    Ok(TvEstimate { value, se: var.sqrt() })
}

/// Empirical law of `samples` against an exact one: plug-in TV and bootstrap s.e.
pub fn tv_against<W: Weight, S: AsRef<str>>(
    samples: &[S],
    exact: &FiniteDistribution<W>,
    resamples: usize,
    rng: &mut RngStream,
) -> Result<TvEstimate> {
    let f = exact.to_f64();
    let tv = |s: &[&str]| {
        let mut m: BTreeMap<&str, f64> = BTreeMap::new();
        for k in s {
            *m.entry(k).or_default() += 1.0 / s.len() as f64;
        }
        let mut total: f64 = f.iter().map(|(k, p)| (m.remove(k.as_str()).unwrap_or(0.0) - p).abs()).sum();
        total += m.values().sum::<f64>();
        total / 2.0
    };
    let s: Vec<&str> = samples.iter().map(|x| x.as_ref()).collect();
    let value = tv(&s);
    if resamples < 2 {
        return Ok(TvEstimate { value, se: 0.0 });
    }
    let draws: Vec<f64> = (0..resamples)
        .map(|_| {
            let r: Vec<&str> = (0..s.len()).map(|_| s[rng.below(s.len())]).collect();
            tv(&r)
        })
        .collect();
    let m = draws.iter().sum::<f64>() / resamples as f64;
    let var = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    Ok(TvEstimate { value, se: var.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(ws: &[(&str, f64)]) -> FiniteDistribution<f64> {
        FiniteDistribution::new(ws.iter().map(|(k, w)| (k.to_string(), *w))).unwrap()
    }

    #[test]
    fn basic_values() {
        let a = fd(&[("a", 0.7), ("b", 0.3)]);
        let b = fd(&[("a", 0.4), ("b", 0.6)]);
        assert!((tv_exact(&a, &b).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(tv_exact(&a, &a).unwrap(), 0.0);
        let c = fd(&[("c", 1.0)]);
        assert!((tv_exact(&a, &c).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_spaces() {
        let a = fd(&[("4:1,2,1", 1.0)]);
        let b = fd(&[("6:1,2,1", 1.0)]);
        assert!(matches!(tv_exact(&a, &b), Err(Error::KeySpaceMismatch(_))));
    }

    #[test]
    fn empirical_identical() {
        let s = vec!["x", "y", "y"];
        let mut rng = RngStream::new(1, 0);
        let e = tv_empirical(&s, &s, 50, &mut rng).unwrap();
        assert_eq!(e.value, 0.0);
    }
}
