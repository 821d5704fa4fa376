//! Exact perfect-matching counts per sample against an exact mean, and tail
//! frequencies of the double-edge and triangle counts.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::enumeration::{
    count_perfect_matchings, exact_model_law, list_perfect_matchings, ExactModel, MatchingConstraints, ParallelEdges,
};
use crate::error::{invalid, Error, Result};
use crate::graph::{Multigraph, Vertex};
use crate::models::{has_disjoint_doubles, sample_pairing, PairingCondition, DEFAULT_REJECTION_CAP};
use crate::rng::{run_trials, RngStream};

use super::census::multigraph_census;
use super::moments::predicted_moments;

/// Largest order at which per-sample counts are attempted.
pub const CONCENTRATION_VERTEX_CAP: usize = 24;

/// Constants swept in the tail thresholds `C sqrt(ln d * mean)`.
pub const TAIL_CONSTANTS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConcentrationModel {
    /// `P*(n,d)`; `Y` counts perfect matchings of the underlying simple graph.
    LooplessPairing,
    /// Exactly `i` disjoint double edges; `Y` counts covering matchings with
    /// parallel strands distinct.
    DisjointDoubles(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceedanceRow {
    pub c: f64,
    pub x_threshold: f64,
    pub x_frequency: f64,
    pub w_threshold: f64,
    pub w_frequency: f64,
    /// Threshold `2 C sqrt(ln d) / d * E Y` and its exceedance frequency.
    pub y_threshold: f64,
    pub y_frequency: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub model: ConcentrationModel,
    pub n: usize,
    pub d: usize,
    pub trials: u64,
    /// `E Y` from the exact law, when it could be enumerated.
    pub ey_oracle: Option<f64>,
    pub ey_mean: f64,
    pub ey_se: f64,
    /// `(mean - oracle) / se`.
    pub ey_z: Option<f64>,
    /// Empirical `E Y^2 / (E Y)^2`.
    pub second_moment_ratio: f64,
    /// Predicted value of the same ratio (main term), when `d >= 3`.
    pub predicted_ratio: Option<f64>,
    pub x_mean: f64,
    pub w_mean: f64,
    pub predicted_ex: Option<f64>,
    pub predicted_ew: Option<f64>,
    pub exceedance: Vec<ExceedanceRow>,
    /// Every listed covering matching contained all doubled pairs and the
    /// listing reproduced the count (disjoint-doubles model only).
    pub covering_checked: Option<bool>,
}

fn doubles(g: &Multigraph) -> Vec<(Vertex, Vertex)> {
    g.edges().iter().filter(|e| e.0 != e.1 && e.2 == 2).map(|e| (e.0, e.1)).collect()
}

/// `Y` for one sample under the model's counting convention.
pub fn matching_count(model: ConcentrationModel, g: &Multigraph) -> Result<f64> {
    let v = match model {
        ConcentrationModel::LooplessPairing => {
            count_perfect_matchings(g, &MatchingConstraints::default(), ParallelEdges::Merged)?
        }
        ConcentrationModel::DisjointDoubles(_) => {
            count_perfect_matchings(g, &MatchingConstraints::new([], doubles(g)), ParallelEdges::Distinct)?
        }
    };
    Ok(v.to_f64().unwrap_or(f64::INFINITY))
}

/// Re-derives the covering count by listing and checks the cover predicate.
fn check_covering(g: &Multigraph, y: f64) -> Result<bool> {
    let dbl = doubles(g);
    let list = list_perfect_matchings(g, &MatchingConstraints::new([], dbl.iter().copied()))?;
    let mut total = 0.0;
    for m in &list {
        if !dbl.iter().all(|p| m.pairs().iter().any(|&(u, v)| (u.min(v), u.max(v)) == *p)) {
            return Ok(false);
        }
        total += m.pairs().iter().map(|&(u, v)| g.multiplicity(u, v) as f64).product::<f64>();
    }
    Ok(total == y)
}

/// `E Y` under the exact law of the model.
pub fn exact_mean_matchings(model: ConcentrationModel, n: usize, d: usize) -> Result<f64> {
    let law = match model {
        ConcentrationModel::LooplessPairing => exact_model_law(ExactModel::LooplessPairing, n, d)?,
        ConcentrationModel::DisjointDoubles(i) => {
            let mut law = exact_model_law(ExactModel::Pairing, n, d)?;
            law.retain(|g, _| has_disjoint_doubles(g, i));
            let total = law.values().fold(BigRational::zero(), |a, b| a + b);
            if total.is_zero() {
                return Err(Error::EmptySupport(format!("no pairing with {i} disjoint doubles at n={n}, d={d}")));
            }
            law.into_iter().map(|(g, w)| (g, w / &total)).collect()
        }
    };
    let mut ey = 0.0;
    for (g, w) in &law {
        ey += w.to_f64().unwrap_or(0.0) * matching_count(model, g)?;
    }
    Ok(ey)
}

pub fn concentration_report(
    model: ConcentrationModel,
    n: usize,
    d: usize,
    trials: u64,
    rng: &RngStream,
) -> Result<ConcentrationReport> {
    if n > CONCENTRATION_VERTEX_CAP {
        return Err(Error::TooLarge {
            what: "per-sample matching count".into(),
            size: n.to_string(),
            cap: CONCENTRATION_VERTEX_CAP.to_string(),
        });
    }
    if trials < 2 {
        return Err(invalid("trials must be at least 2"));
    }
    let cond = match model {
        ConcentrationModel::LooplessPairing => PairingCondition::Loopless,
        ConcentrationModel::DisjointDoubles(i) => PairingCondition::DisjointDoubles(i),
    };
    let rows = run_trials(rng.seed(), trials, |_, r| {
        let g = sample_pairing(n, d, cond, DEFAULT_REJECTION_CAP, r)?.project();
        let c = multigraph_census(&g);
        let y = matching_count(model, &g)?;
        let ok = match model {
            ConcentrationModel::DisjointDoubles(_) => check_covering(&g, y)?,
            ConcentrationModel::LooplessPairing => true,
        };
        Ok((y, c.doubles as f64, c.triangles as f64, ok))
    })?;
    let t = trials as f64;
    let mean = |f: &dyn Fn(&(f64, f64, f64, bool)) -> f64| rows.iter().map(f).sum::<f64>() / t;
    let ey_mean = mean(&|r| r.0);
    let var_y = rows.iter().map(|r| (r.0 - ey_mean).powi(2)).sum::<f64>() / (t - 1.0);
    let ey_se = (var_y / t).sqrt();
    let ey_oracle = match exact_mean_matchings(model, n, d) {
        Ok(v) => Some(v),
        Err(Error::TooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let ey_ref = ey_oracle.unwrap_or(ey_mean);
    let ey_z = ey_oracle.map(|o| if ey_se > 0.0 { (ey_mean - o) / ey_se } else if ey_mean == o { 0.0 } else { f64::INFINITY });
    let pred = if d >= 3 { predicted_moments(n, d).ok() } else { None };
    let x_mean = mean(&|r| r.1);
    let w_mean = mean(&|r| r.2);
    let ex = pred.map(|p| p.ex).unwrap_or(x_mean);
    let ew = pred.map(|p| p.ew).unwrap_or(w_mean);
    let ln_d = (d as f64).ln();
    let exceedance = TAIL_CONSTANTS
        .iter()
        .map(|&c| {
            let xt = c * (ln_d * ex).sqrt();
            let wt = c * (ln_d * ew).sqrt();
            let yt = 2.0 * c * ln_d.sqrt() / d as f64 * ey_ref;
            ExceedanceRow {
                c,
                x_threshold: xt,
                x_frequency: rows.iter().filter(|r| (r.1 - ex).abs() > xt).count() as f64 / t,
                w_threshold: wt,
                w_frequency: rows.iter().filter(|r| (r.2 - ew).abs() > wt).count() as f64 / t,
                y_threshold: yt,
                y_frequency: rows.iter().filter(|r| (r.0 - ey_ref).abs() >= yt).count() as f64 / t,
            }
        })
        .collect();
    let second = rows.iter().map(|r| r.0 * r.0).sum::<f64>() / t;
    Ok(ConcentrationReport {
        model,
        n,
        d,
        trials,
        ey_oracle,
        ey_mean,
        ey_se,
        ey_z,
        second_moment_ratio: second / (ey_ref * ey_ref),
        predicted_ratio: pred.map(|p| match model {
            ConcentrationModel::LooplessPairing => p.ratio_conc2,
            ConcentrationModel::DisjointDoubles(_) => p.ratio_conc1,
        }),
        x_mean,
        w_mean,
        predicted_ex: pred.map(|p| p.ex),
        predicted_ew: pred.map(|p| p.ew),
        exceedance,
        covering_checked: match model {
            ConcentrationModel::DisjointDoubles(_) => Some(rows.iter().all(|r| r.3)),
            ConcentrationModel::LooplessPairing => None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertices_forced() {
        let r = concentration_report(ConcentrationModel::LooplessPairing, 2, 2, 20, &RngStream::new(1, 0)).unwrap();
        assert_eq!(r.ey_mean, 1.0);
        assert_eq!(r.ey_se, 0.0);
        assert_eq!(r.ey_oracle, Some(1.0));
    }

    #[test]
    fn covering_contract() {
        let r =
            concentration_report(ConcentrationModel::DisjointDoubles(1), 8, 3, 200, &RngStream::new(2, 0)).unwrap();
        assert_eq!(r.covering_checked, Some(true));
        assert!(r.ey_mean >= 0.0);
    }
}
