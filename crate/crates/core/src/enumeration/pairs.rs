//! Ordered pairs of perfect matchings of `[n]` by the size of their overlap.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::{binomial, double_factorial_pairs, ln_factorial};

use super::matchings::all_perfect_matchings;

/// Largest `n` for the brute-force counts.
pub const PAIR_COUNT_EXACT_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairCountMode {
    /// Asymptotic main term `n! / (2^k k! sqrt(pi (n-2k)/2))`.
    Formula,
    /// Pairs `(H1, H2)` sharing exactly `k` vertex pairs.
    Exact,
    /// Pairs with `k` designated common edges, the remaining edges of `H1` and
    /// `H2` treated as distinct strands even when they join the same vertices
    /// (the count the formula approximates).
    ExactStrands,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCount {
    pub value: f64,
    #[serde(serialize_with = "ser_opt_big")]
    pub exact: Option<BigUint>,
}

fn ser_opt_big<S: serde::Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_some(&b.to_string()),
        None => s.serialize_none(),
    }
}

/// `hist[j]` = number of ordered pairs of perfect matchings of `[n]` sharing
/// exactly `j` pairs. One side is fixed and the result scaled by `(n-1)!!`.
pub fn matching_overlap_histogram(n: usize) -> Result<Vec<BigUint>> {
    if n % 2 == 1 || n == 0 {
        return Err(invalid(format!("need positive even n, got {n}")));
    }
    if n > PAIR_COUNT_EXACT_CAP {
        return Err(Error::TooLarge {
            what: "matching pair enumeration".into(),
            size: n.to_string(),
            cap: PAIR_COUNT_EXACT_CAP.to_string(),
        });
    }
    let all = all_perfect_matchings(n)?;
    let mut hist = vec![0u64; n / 2 + 1];
    for m in &all {
        let shared = m.pairs().iter().filter(|&&(u, v)| u % 2 == 1 && v == u + 1).count();
        hist[shared] += 1;
    }
    let scale = double_factorial_pairs(n as u64 / 2);
    Ok(hist.into_iter().map(|h| &scale * h).collect())
}

pub fn matching_pair_count(n: usize, k: usize, mode: PairCountMode) -> Result<PairCount> {
    if n % 2 == 1 || n == 0 {
        return Err(invalid(format!("need positive even n, got {n}")));
    }
    if k > n / 2 {
        return Err(invalid(format!("overlap {k} exceeds n/2 = {}", n / 2)));
    }
    match mode {
        PairCountMode::Formula => {
            if k + 2 > n / 2 {
                return Err(invalid(format!("formula needs k <= n/2 - 2, got k={k}, n={n}")));
            }
            let rest = (n - 2 * k) as f64;
            let log = ln_factorial(n as u64)
                - k as f64 * std::f64::consts::LN_2
                - ln_factorial(k as u64)
                - 0.5 * (std::f64::consts::PI * rest / 2.0).ln();
            Ok(PairCount { value: log.exp(), exact: None })
        }
        PairCountMode::Exact => {
            let hist = matching_overlap_histogram(n)?;
            let v = hist[k].clone();
            Ok(PairCount { value: v.to_f64().unwrap_or(f64::INFINITY), exact: Some(v) })
        }
        PairCountMode::ExactStrands => {
            let hist = matching_overlap_histogram(n)?;
            let mut v = BigUint::zero();
            for (j, h) in hist.iter().enumerate().skip(k) {
                v += h * binomial(j as u64, k as u64);
            }
            Ok(PairCount { value: v.to_f64().unwrap_or(f64::INFINITY), exact: Some(v) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_pairs() {
        let c = matching_pair_count(6, 3, PairCountMode::Exact).unwrap();
        assert_eq!(c.exact.unwrap(), BigUint::from(15u32));
    }

    #[test]
    fn histogram_totals() {
        for n in [2usize, 4, 6, 8] {
            let hist = matching_overlap_histogram(n).unwrap();
            let total: BigUint = hist.iter().sum();
            let pm = double_factorial_pairs(n as u64 / 2);
            assert_eq!(total, &pm * &pm);
        }
    }

    #[test]
    fn strand_count_closed_form() {
        // (n-1)!! C(n/2, k) (n-2k-1)!!
        for n in [4usize, 6, 8, 10] {
            for k in 0..=n / 2 {
                let c = matching_pair_count(n, k, PairCountMode::ExactStrands).unwrap().exact.unwrap();
                let want = double_factorial_pairs(n as u64 / 2)
                    * binomial(n as u64 / 2, k as u64)
                    * double_factorial_pairs((n / 2 - k) as u64);
                assert_eq!(c, want, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matching_pair_count(6, 4, PairCountMode::Exact).is_err());
        assert!(matching_pair_count(6, 2, PairCountMode::Formula).is_err());
        assert!(matching_pair_count(5, 0, PairCountMode::Exact).is_err());
    }
}
