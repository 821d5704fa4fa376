//! Main terms of the moment and concentration formulas for the loopless
//! pairing model.

use serde::Serialize;

use crate::coupling::threshold::theta;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThetaEval {
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
}

impl ThetaEval {
    /// `alpha = 1 + eps/2`, `beta = eps^2`.
    pub fn at_eps(eps: f64) -> Self {
        let (alpha, beta) = (1.0 + eps / 2.0, eps * eps);
        ThetaEval { alpha, beta, value: theta(alpha, beta) }
    }
}

/// Predictions for `X` (double edges), `W` (triangles) and `Y` (perfect
/// matchings) in `P*(n,d)`. Remainders are not included; their arguments are.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentPrediction {
    pub n: usize,
    pub d: usize,
    pub ex: f64,
    pub var_x: f64,
    pub ew: f64,
    pub var_w: f64,
    pub cov_xw: f64,
    /// `Cov(X,Y) / (E X E Y)`.
    pub cov_xy_ratio: f64,
    /// `Cov(W,Y) / (E W E Y)`.
    pub cov_wy_ratio: f64,
    /// `ln E Y`.
    pub ey_log: f64,
    /// `E Y^2 / (E Y)^2` in `P*(n,d)`.
    pub ratio_conc2: f64,
    /// `E Y^2 / (E Y)^2` in the disjoint-doubles model.
    pub ratio_conc1: f64,
    /// `Y* = a X + b W + c`, with `c` relative to `E Y` (that is, `c / E Y`).
    pub a_rel: f64,
    pub b_rel: f64,
    pub c_rel: f64,
    /// `d^3 / n`.
    pub moment_remainder: f64,
    /// `d^-4 + d^3/n + sqrt(d/n) ln^3 n`.
    pub ratio_remainder: f64,
    pub theta: Option<ThetaEval>,
}

impl MomentPrediction {
    pub fn ey(&self) -> f64 {
        self.ey_log.exp()
    }

    /// Projection coefficients in absolute units (may overflow for large n).
    pub fn abc(&self) -> (f64, f64, f64) {
        let ey = self.ey();
        (self.a_rel * ey, self.b_rel * ey, self.c_rel * ey)
    }

    pub fn with_theta(mut self, eps: f64) -> Self {
        self.theta = Some(ThetaEval::at_eps(eps));
        self
    }
}

pub fn predicted_moments(n: usize, d: usize) -> Result<MomentPrediction> {
    if d < 3 {
        return Err(invalid(format!("moment predictions need d >= 3, got {d}")));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let (nf, df) = (n as f64, d as f64);
    let ex = (df - 1.0).powi(2) / 4.0;
    let ew = (df - 1.0).powi(3) / 6.0;
    let cov_xy_ratio = 1.0 / (df * df) + 2.0 / df.powi(3);
    let cov_wy_ratio = -1.0 / df.powi(3);
    let ey_log = 0.5 * 2f64.ln() + (df - 1.0) * nf / 2.0 * (df - 1.0).ln() + (nf - df * nf / 2.0) * df.ln() + 0.5;
    // Cov(X,Y)/Var X with Var X = E X, and so on, all relative to E Y.
    let a_rel = cov_xy_ratio * ex / ex;
    let b_rel = cov_wy_ratio * ew / ew;
    let c_rel = 1.0 - a_rel * ex - b_rel * ew;
    Ok(MomentPrediction {
        n,
        d,
        ex,
        var_x: ex,
        ew,
        var_w: ew,
        cov_xw: 0.0,
        cov_xy_ratio,
        cov_wy_ratio,
        ey_log,
        ratio_conc2: 1.0 + 1.0 / (4.0 * df * df) + 2.0 / (3.0 * df.powi(3)),
        ratio_conc1: 1.0 + 1.0 / (6.0 * df.powi(3)),
        a_rel,
        b_rel,
        c_rel,
        moment_remainder: df.powi(3) / nf,
        ratio_remainder: df.powi(-4) + df.powi(3) / nf + (df / nf).sqrt() * nf.ln().powi(3),
        theta: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn main_terms() {
        let p = predicted_moments(100, 3).unwrap();
        assert_eq!(p.ex, 1.0);
        assert!((p.ew - 8.0 / 6.0).abs() < 1e-15);
        let p = predicted_moments(100, 4).unwrap();
        assert_eq!((p.ex, p.ew), (2.25, 4.5));
        let p = predicted_moments(100, 10).unwrap();
        assert!((p.ratio_conc2 - 1.003_166_666_7).abs() < 1e-9);
        assert!(predicted_moments(100, 2).is_err());
    }

    #[test]
    fn projection_identity() {
        let p = predicted_moments(1000, 5).unwrap();
        let (a, b, c) = p.abc();
        let ey = p.ey();
        assert!((a - p.cov_xy_ratio * p.ex * ey / p.var_x).abs() <= 1e-12 * a.abs());
        assert!((b - p.cov_wy_ratio * p.ew * ey / p.var_w).abs() <= 1e-12 * b.abs());
        assert!((c - (ey - a * p.ex - b * p.ew)).abs() <= 1e-9 * ey);
    }
}
