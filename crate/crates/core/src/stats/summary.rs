//! Means, variances and covariances of named statistics over independent
//! samples.

use std::str::FromStr;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::enumeration::{count_perfect_matchings, MatchingConstraints, ParallelEdges};
use crate::error::{invalid, Error, Result};
use crate::graph::Multigraph;
use crate::models::{ModelSpec, DEFAULT_REJECTION_CAP};
use crate::rng::{run_trials, RngStream};

use super::census::multigraph_census;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    /// Pairs with multiplicity exactly 2.
    DoubleEdges,
    DoubleEdgesAtLeast,
    Loops,
    HigherMultiplicities,
    Triangles,
    Edges,
    Simple,
    /// Perfect matchings of the underlying simple graph (small n only).
    PerfectMatchings,
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "double-edges" | "X" => Statistic::DoubleEdges,
            "double-edges-at-least" => Statistic::DoubleEdgesAtLeast,
            "loops" => Statistic::Loops,
            "higher-multiplicities" => Statistic::HigherMultiplicities,
            "triangles" | "W" => Statistic::Triangles,
            "edges" => Statistic::Edges,
            "simple" => Statistic::Simple,
            "perfect-matchings" | "Y" => Statistic::PerfectMatchings,
            other => return Err(Error::Unknown(format!("statistic {other}"))),
        })
    }
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::DoubleEdges => "double-edges",
            Statistic::DoubleEdgesAtLeast => "double-edges-at-least",
            Statistic::Loops => "loops",
            Statistic::HigherMultiplicities => "higher-multiplicities",
            Statistic::Triangles => "triangles",
            Statistic::Edges => "edges",
            Statistic::Simple => "simple",
            Statistic::PerfectMatchings => "perfect-matchings",
        }
    }
}

/// Evaluates the statistics on one graph.
pub fn evaluate(g: &Multigraph, stats: &[Statistic]) -> Result<Vec<f64>> {
    let c = multigraph_census(g);
    stats
        .iter()
        .map(|s| {
            Ok(match s {
                Statistic::DoubleEdges => c.doubles as f64,
                Statistic::DoubleEdgesAtLeast => c.doubles_at_least as f64,
                Statistic::Loops => c.loops as f64,
                Statistic::HigherMultiplicities => c.higher as f64,
                Statistic::Triangles => c.triangles as f64,
                Statistic::Edges => c.edges as f64,
                Statistic::Simple => c.simple as u8 as f64,
                Statistic::PerfectMatchings => count_perfect_matchings(g, &MatchingConstraints::default(), ParallelEdges::Merged)?
                    .to_f64()
                    .unwrap_or(f64::INFINITY),
            })
        })
        .collect()
}

/// Streaming moments, merged pairwise.
#[derive(Clone, Debug)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    /// Sums of centred cross products.
    co: Vec<Vec<f64>>,
}

impl Moments {
    fn single(x: &[f64]) -> Self {
        let k = x.len();
        Moments { count: 1.0, mean: x.to_vec(), co: vec![vec![0.0; k]; k] }
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        let n = a.count + b.count;
        let k = a.mean.len();
        let delta: Vec<f64> = (0..k).map(|i| b.mean[i] - a.mean[i]).collect();
        let f = a.count * b.count / n;
        let mean = (0..k).map(|i| a.mean[i] + delta[i] * b.count / n).collect();
        let co = (0..k)
            .map(|i| (0..k).map(|j| a.co[i][j] + b.co[i][j] + delta[i] * delta[j] * f).collect())
            .collect();
        Moments { count: n, mean, co }
    }
}

/// Fixed-shape pairwise reduction, so the result depends only on the input order.
fn reduce(mut items: Vec<Moments>) -> Option<Moments> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(Moments::merge(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleSummary {
    pub trials: u64,
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    /// Unbiased sample variances.
    pub variance: Vec<f64>,
    /// Unbiased sample covariance matrix.
    pub covariance: Vec<Vec<f64>>,
    /// `sqrt(variance / trials)`.
    pub se: Vec<f64>,
}

impl SampleSummary {
    /// Summary of pre-computed rows (one row per trial).
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(invalid("a summary needs at least two trials"));
        }
        let m = reduce(rows.iter().map(|r| Moments::single(r)).collect()).expect("non-empty");
        let t = rows.len() as f64;
        let covariance: Vec<Vec<f64>> = m.co.iter().map(|r| r.iter().map(|c| c / (t - 1.0)).collect()).collect();
        let variance: Vec<f64> = (0..names.len()).map(|i| covariance[i][i].max(0.0)).collect();
        let se = variance.iter().map(|v| (v / t).sqrt()).collect();
        Ok(SampleSummary { trials: rows.len() as u64, names, mean: m.mean, variance, covariance, se })
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `(mean - predicted) / se`.
    pub fn z(&self, i: usize, predicted: f64) -> f64 {
        (self.mean[i] - predicted) / self.se[i]
    }
}

/// Samples `model` `trials` times on streams `(rng.seed(), 0..trials)` and
/// summarises the named statistics.
pub fn empirical_summary(model: &ModelSpec, stats: &[&str], trials: u64, rng: &RngStream) -> Result<SampleSummary> {
    let parsed: Vec<Statistic> = stats.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    if trials < 2 {
        return Err(invalid("trials must be at least 2"));
    }
    let rows = run_trials(rng.seed(), trials, |_, r| {
        let g = model.sample(DEFAULT_REJECTION_CAP, r)?;
        evaluate(&g, &parsed)
    })?;
    SampleSummary::from_rows(parsed.iter().map(|s| s.name().to_string()).collect(), &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_matches_two_pass() {
        let rows: Vec<Vec<f64>> = (0..37).map(|i| vec![(i * i % 11) as f64, (i % 5) as f64 - 2.0]).collect();
        let s = SampleSummary::from_rows(vec!["a".into(), "b".into()], &rows).unwrap();
        let t = rows.len() as f64;
        let m: Vec<f64> = (0..2).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / t).collect();
        let cov01 = rows.iter().map(|r| (r[0] - m[0]) * (r[1] - m[1])).sum::<f64>() / (t - 1.0);
        assert!((s.mean[0] - m[0]).abs() < 1e-12);
        assert!((s.covariance[0][1] - cov01).abs() < 1e-12);
    }

    #[test]
    fn unknown_statistic() {
        let m = ModelSpec::Gnp { n: 5, p: 0.5 };
        assert!(empirical_summary(&m, &["bogus"], 10, &RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn worker_independent() {
        let m = ModelSpec::LooplessPairing { n: 40, d: 3 };
        let a = empirical_summary(&m, &["X", "W"], 64, &RngStream::new(5, 0)).unwrap();
        let b = empirical_summary(&m, &["X", "W"], 64, &RngStream::new(5, 0)).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.covariance, b.covariance);
    }
}
