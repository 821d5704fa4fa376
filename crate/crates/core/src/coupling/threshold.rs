//! Lower-branch Lambert W and the degree thresholds `f1`, `f2`, `f`, `g`.

use serde::Serialize;

use crate::error::{invalid, Result};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Lower branch `W_{-1}` on `[-1/e, 0)`: Newton iteration with a bisection fallback.
pub fn lambert_w_lower(a: f64) -> Result<f64> {
    if !(a >= -INV_E - 1e-15 && a < 0.0) {
        return Err(invalid(format!("lower Lambert W needs argument in [-1/e, 0), got {a}")));
    }
    if a <= -INV_E {
        return Ok(-1.0);
    }
    let res = |w: f64| w * w.exp() - a;
    let mut w = if a < -0.25 {
        let p = -(2.0 * (std::f64::consts::E * a + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-a).ln();
        l1 - (-l1).ln()
    };
    for _ in 0..100 {
        let step = res(w) / (w.exp() * (1.0 + w));
        if !step.is_finite() {
            break;
        }
        let next = (w - step).min(-1.0);
        if (next - w).abs() <= 1e-15 * w.abs() {
            w = next;
            break;
        }
        w = next;
    }
    if w.is_finite() && w <= -1.0 && res(w).abs() <= 1e-12 {
        return Ok(w);
    }
    Ok(bisect_lower(a))
}

// On (-inf, -1], w e^w decreases from 0 to -1/e.
fn bisect_lower(a: f64) -> f64 {
    let mut hi = -1.0f64;
    let mut lo = -2.0f64;
    while lo * lo.exp() <= a {
        lo *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.exp() > a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `f1(x) = -((x-1)/x) / W_{-1}(-(x-1)/(x e))`, with `f1(1) = 0`.
pub fn f1(x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(invalid(format!("f1 needs x >= 1, got {x}")));
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    let r = (x - 1.0) / x;
    Ok(-r / lambert_w_lower(-r * INV_E)?)
}

/// Threshold family with its two parameters.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThresholdFunctions {
    pub eps0: f64,
    pub safety: f64,
}

impl Default for ThresholdFunctions {
    fn default() -> Self {
        ThresholdFunctions { eps0: 0.1, safety: 1.0 - 1e-3 }
    }
}

/// Break point between the two pieces of `f2`.
pub const SPLIT: f64 = 2.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    F1,
    F2,
    F,
    G,
    LambertW,
}

impl std::str::FromStr for Threshold {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(Threshold::F1),
            "f2" => Ok(Threshold::F2),
            "f" => Ok(Threshold::F),
            "g" => Ok(Threshold::G),
            "lambertw" | "lambertW-" | "w" => Ok(Threshold::LambertW),
            _ => Err(crate::Error::Unknown(format!("threshold '{s}'"))),
        }
    }
}

impl ThresholdFunctions {
    pub fn new(eps0: f64, safety: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0 <= 1.0) || !(safety > 0.0 && safety < 1.0) {
            return Err(invalid("need eps0 in (0,1] and safety in (0,1)"));
        }
        Ok(ThresholdFunctions { eps0, safety })
    }

    pub fn f1(&self, x: f64) -> Result<f64> {
        f1(x)
    }

    pub fn f2(&self, x: f64) -> Result<f64> {
        if !(x >= 1.0) {
            return Err(invalid(format!("f2 needs x >= 1, got {x}")));
        }
        if x <= SPLIT {
            Ok(self.eps0 * self.eps0 / 1.21 * (x - 1.0) * (x - 1.0) / x)
        } else {
            Ok(f1(x)? / 2.0)
        }
    }

    /// `safety * f2` up to the split; beyond it `safety * min(f1/2, f2(split) + (x - split))`,
    /// which joins the two pieces continuously.
    pub fn f(&self, x: f64) -> Result<f64> {
        if x <= SPLIT {
            return Ok(self.safety * self.f2(x)?);
        }
        let ramp = self.f2(SPLIT)? + (x - SPLIT);
        Ok(self.safety * (f1(x)? / 2.0).min(ramp))
    }

    pub fn g(&self, x: f64) -> Result<f64> {
        Ok(self.f(x)? / 2.0)
    }

    /// Out-degree `d'` for embedding `O(n, d')` in `G(n, p)`, `p = x ln n / n`:
    /// `f(x) p n`, capped beyond the split by `safety * f1(x/2) (x/2) ln n`,
    /// the level the minimum out-degree of the directed half reaches.
    pub fn out_degree(&self, x: f64, n: usize) -> Result<usize> {
        let ln_n = (n as f64).ln();
        let mut level = self.f(x)? * x * ln_n;
        if x > SPLIT {
            level = level.min(self.safety * f1(x / 2.0)? * (x / 2.0) * ln_n);
        }
        Ok((level.floor() as usize).min(n.saturating_sub(1)))
    }

    pub fn eval(&self, which: Threshold, x: f64) -> Result<f64> {
        match which {
            Threshold::F1 => self.f1(x),
            Threshold::F2 => self.f2(x),
            Threshold::F => self.f(x),
            Threshold::G => self.g(x),
            Threshold::LambertW => lambert_w_lower(x),
        }
    }
}

/// `theta(alpha, beta) = 1 - alpha + beta ln(e alpha / beta)`.
pub fn theta(alpha: f64, beta: f64) -> f64 {
    1.0 - alpha + beta * (std::f64::consts::E * alpha / beta).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_degree_is_capped_by_half_graph() {
        let t = ThresholdFunctions::default();
        let n = 10_000;
        let ln_n = (n as f64).ln();
        assert_eq!(t.out_degree(4.0, n).unwrap(), (0.999 * f1(2.0).unwrap() * 2.0 * ln_n).floor() as usize);
        assert!(t.out_degree(4.0, n).unwrap() < (t.f(4.0).unwrap() * 4.0 * ln_n) as usize);
        assert_eq!(t.out_degree(1.5, n).unwrap(), (t.f(1.5).unwrap() * 1.5 * ln_n).floor() as usize);
        assert!(t.out_degree(50.0, 20).unwrap() <= 19);
    }

    #[test]
    fn lambert_residuals() {
        for i in 1..2000 {
            let a = -INV_E * i as f64 / 2000.0;
            let w = lambert_w_lower(a).unwrap();
            assert!(w <= -1.0);
            assert!((w * w.exp() - a).abs() <= 1e-12, "a={a}");
        }
        assert!((lambert_w_lower(-INV_E / 2.0).unwrap() + 2.678_346_990_016_661).abs() < 1e-9);
        assert!(lambert_w_lower(0.0).is_err());
        assert!(lambert_w_lower(-0.5).is_err());
    }

    #[test]
    fn bisection_agrees_with_newton() {
        for a in [-0.3, -0.1, -1e-3, -1e-8] {
            let w = lambert_w_lower(a).unwrap();
            assert!((w - bisect_lower(a)).abs() < 1e-9 * w.abs());
        }
    }

    #[test]
    fn f1_values() {
        assert_eq!(f1(1.0).unwrap(), 0.0);
        assert!((f1(2.0).unwrap() - 0.18664).abs() < 1e-4);
        assert!(f1(1e6).unwrap() < 1.0 && f1(1e6).unwrap() > 0.99);
        assert!(f1(0.5).is_err());
    }

    #[test]
    fn f_properties() {
        let t = ThresholdFunctions::default();
        assert_eq!(t.f(1.0).unwrap(), 0.0);
        let mut prev = 0.0;
        for i in 1..=1000 {
            let x = 1.0 + 9.0 * i as f64 / 1000.0;
            let f = t.f(x).unwrap();
            assert!(f > prev);
            assert!(f < t.f2(x).unwrap());
            assert_eq!(t.g(x).unwrap(), f / 2.0);
            prev = f;
        }
        let below = t.f(SPLIT - 1e-9).unwrap();
        let above = t.f(SPLIT + 1e-9).unwrap();
        assert!((above - below).abs() < 1e-8);
    }

    #[test]
    fn theta_sign() {
        let th = |e: f64| theta(1.0 + e / 2.0, e * e);
        assert!(th(0.02) < -0.02 / 4.0);
        assert!(th(0.1) > 0.0);
    }
}
