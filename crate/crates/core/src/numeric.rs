//! Small exact and log-space helpers shared by the counting code.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `ln(k!)`, exact summation for small `k`, Stirling series above.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k <= 256 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let x = k as f64 + 1.0;
    // ln Gamma(x) for x > 256
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

pub fn factorial(k: u64) -> BigUint {
    (2..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// `(2m - 1)!!` for `m` pairs, i.e. the number of perfect matchings of `2m` points.
pub fn double_factorial_pairs(m: u64) -> BigUint {
    (1..=m).fold(BigUint::one(), |acc, i| acc * (2 * i - 1))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Natural log of a big integer, accurate for values far beyond `f64` range.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(0.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Binomial pmf over `0..=trials` computed in log space.
pub fn binomial_pmf(trials: u64, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut v = vec![0.0; trials as usize + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; trials as usize + 1];
        v[trials as usize] = 1.0;
        return v;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    (0..=trials)
        .map(|k| (ln_binomial(trials, k) + k as f64 * lp + (trials - k) as f64 * lq).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_logs_agree() {
        for k in [0u64, 1, 5, 20, 255, 256, 257, 1000] {
            let exact = ln_biguint(&factorial(k));
            assert!((ln_factorial(k) - exact).abs() < 1e-9 * exact.max(1.0), "k={k}");
        }
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial_pairs(4), BigUint::from(105u32));
        assert_eq!(double_factorial_pairs(0), BigUint::one());
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
    }

    #[test]
    fn binomial_pmf_sums_to_one() {
        let pmf = binomial_pmf(7079, 5.3e-4);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}
