//! Monotone (inverse-CDF) couplings of integer distributions.

use serde::Serialize;

use crate::enumeration::FiniteDistribution;
use crate::error::{invalid, Result};
use crate::numeric::binomial_pmf;
use crate::rng::RngStream;

use super::strassen::JointCoupling;

/// Tolerance for comparing accumulated CDF values.
const CDF_TOL: f64 = 1e-12;

/// Distribution on `0..pmf.len()`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntDistribution {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl IntDistribution {
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid("pmf must be nonempty and nonnegative"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("pmf sums to {total}")));
        }
        let mut acc = 0.0;
        let cdf = pmf.iter().map(|p| {
            acc += p / total;
            acc
        });
        let mut cdf: Vec<f64> = cdf.collect();
        *cdf.last_mut().unwrap() = 1.0;
        Ok(IntDistribution { pmf, cdf })
    }

    pub fn binomial(trials: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("p = {p} outside [0,1]")));
        }
        Self::from_pmf(binomial_pmf(trials, p))
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `P(X <= k)`; 0 for negative `k`, 1 beyond the support.
    pub fn cdf(&self, k: i64) -> f64 {
        if k < 0 {
            0.0
        } else {
            self.cdf.get(k as usize).copied().unwrap_or(1.0)
        }
    }

    /// Smallest `k` with `F(k) > u`.
    pub fn quantile(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn sample(&self, rng: &mut RngStream) -> usize {
        self.quantile(rng.uniform())
    }
}

/// The common-uniform coupling `(F_X^{-1}(U), F_Y^{-1}(U))`.
#[derive(Clone, Debug, Serialize)]
pub struct QuantileCoupling {
    pub x: IntDistribution,
    pub y: IntDistribution,
    /// `(i, j, mass)` sorted by `i`, then `j`.
    pub entries: Vec<(usize, usize, f64)>,
    /// `F_X >= F_Y` pointwise, so `X <= Y` under this coupling.
    pub dominated: bool,
    /// Mass on `X > Y`.
    pub violation: f64,
}

/// Exact pointwise CDF comparison.
pub fn dominates(x: &IntDistribution, y: &IntDistribution) -> bool {
    let top = x.pmf.len().max(y.pmf.len()) as i64;
    (0..top).all(|k| x.cdf(k) >= y.cdf(k) - CDF_TOL)
}

pub fn quantile_coupling(x: &IntDistribution, y: &IntDistribution) -> QuantileCoupling {
    let mut entries = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0f64;
    while i < x.cdf.len() && j < y.cdf.len() {
        let next = x.cdf[i].min(y.cdf[j]);
        if next > u {
            entries.push((i, j, next - u));
            u = next;
        }
        if x.cdf[i] <= next {
            i += 1;
        }
        if y.cdf[j] <= next {
            j += 1;
        }
    }
    let violation = entries.iter().filter(|e| e.0 > e.1).map(|e| e.2).sum();
    QuantileCoupling { x: x.clone(), y: y.clone(), entries, dominated: dominates(x, y), violation }
}

impl QuantileCoupling {
    /// Draws `X` from its conditional law given `Y = y`: a uniform on
    /// `[F_Y(y-1), F_Y(y))` pushed through `F_X^{-1}`.
    pub fn sample_x_given_y(&self, y: usize, rng: &mut RngStream) -> usize {
        let lo = self.y.cdf(y as i64 - 1);
        let hi = self.y.cdf(y as i64);
        let u = lo + (hi - lo) * rng.uniform();
        self.x.quantile(u)
    }

    pub fn sample(&self, rng: &mut RngStream) -> (usize, usize) {
        let u = rng.uniform();
        (self.x.quantile(u), self.y.quantile(u))
    }

    /// As a keyed joint coupling (keys are zero-padded integers).
    pub fn to_joint(&self) -> Result<JointCoupling<f64>> {
        let key = |k: usize, len: usize| format!("{k:0w$}", w = len.to_string().len());
        let (nx, ny) = (self.x.pmf.len(), self.y.pmf.len());
        Ok(JointCoupling {
            x_keys: (0..nx).map(|k| key(k, nx)).collect(),
            y_keys: (0..ny).map(|k| key(k, ny)).collect(),
            entries: self.entries.clone(),
            failure_mass: self.violation,
        })
    }

    pub fn x_law(&self) -> Result<FiniteDistribution<f64>> {
        let len = self.x.pmf.len();
        FiniteDistribution::new(
            self.x.pmf.iter().enumerate().map(|(k, &p)| (format!("{k:0w$}", w = len.to_string().len()), p)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marginals(q: &QuantileCoupling) -> (Vec<f64>, Vec<f64>) {
        let mut mx = vec![0.0; q.x.pmf.len()];
        let mut my = vec![0.0; q.y.pmf.len()];
        for &(i, j, w) in &q.entries {
            mx[i] += w;
            my[j] += w;
        }
        (mx, my)
    }

    #[test]
    fn binomial_domination() {
        let x = IntDistribution::binomial(10, 0.2).unwrap();
        let y = IntDistribution::binomial(10, 0.5).unwrap();
        let q = quantile_coupling(&x, &y);
        assert!(q.dominated);
        assert!(q.violation < 1e-12);
        let (mx, my) = marginals(&q);
        for k in 0..=10 {
            assert!((mx[k] - x.pmf()[k]).abs() < 1e-12);
            assert!((my[k] - y.pmf()[k]).abs() < 1e-12);
        }
        assert!(!quantile_coupling(&y, &x).dominated);
    }

    #[test]
    fn identical_is_diagonal() {
        let x = IntDistribution::binomial(6, 0.3).unwrap();
        let q = quantile_coupling(&x, &x);
        assert!(q.entries.iter().all(|e| e.0 == e.1));
    }

    #[test]
    fn conditional_sampling_keeps_marginal() {
        let x = IntDistribution::binomial(3, 0.3).unwrap();
        let y = IntDistribution::binomial(20, 0.2).unwrap();
        let q = quantile_coupling(&x, &y);
        let mut rng = RngStream::new(3, 0);
        let trials = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            let t = y.sample(&mut rng);
            let l = q.sample_x_given_y(t, &mut rng);
            assert!(l <= t || !q.dominated);
            counts[l] += 1;
        }
        for k in 0..4 {
            let p = x.pmf()[k];
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((counts[k] as f64 / trials as f64 - p).abs() < 4.0 * se + 1e-9);
        }
    }
}
