//! Decay-law fits for sentence probabilities.
//!
//! Two models are fitted by weighted least squares on `y = ln p`:
//!
//! * polynomial `p = c n^(-beta)`, linear in `(ln c, beta)` against `ln n`;
//! * stretched exponential `p = A exp(-kappa n^eps)`, linear in
//!   `(ln A, kappa)` for fixed `eps`, with `eps` found by profiling the
//!   residual over `[EPS_MIN, EPS_MAX]` (log grid, then golden section).
//!
//! The residual is the weighted sum of squares (chi-square). The stretched
//! model has one parameter more, so its score adds [`EXTRA_PARAM_PENALTY`],
//! the 99% point of chi-square with one degree of freedom; the model with the
//! smaller score is selected. Points with no hits carry no value of `ln p`:
//! they are left out of the fit and reported as censored.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::prob::ProbCurve;
use super::{rule_of_three, Z95};

pub const EPS_MIN: f64 = 1e-3;
pub const EPS_MAX: f64 = 4.0;
pub const EXTRA_PARAM_PENALTY: f64 = 6.635;
const GRID: usize = 400;
const MIN_POINTS: usize = 4;

/// One observation `ln p(n)` with standard error `sigma` (in `ln p` units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub n: f64,
    pub log_p: f64,
    pub sigma: f64,
}

impl DecaySample {
    /// A noiseless value, weighted by its relative size.
    pub fn exact(n: f64, log_p: f64) -> Self {
        DecaySample {
            n,
            log_p,
            sigma: 1e-6 * log_p.abs().max(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    Polynomial,
    StretchedExponential,
    Degenerate,
}

/// `p = c n^(-beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialFit {
    pub c: f64,
    pub beta: f64,
    pub residual: f64,
    pub score: f64,
}

/// `p = a exp(-kappa n^eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchedFit {
    pub a: f64,
    pub kappa: f64,
    pub eps: f64,
    pub residual: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Amplitude of the selected model.
    pub c: Option<f64>,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub polynomial: Option<PolynomialFit>,
    pub stretched: Option<StretchedFit>,
    pub points_used: usize,
    pub censored: usize,
    /// Whether the selected model stays below the rule-of-three bound at
    /// every censored point; `None` without censored points or a model.
    pub censored_consistent: Option<bool>,
}

impl DecayFit {
    fn degenerate(points_used: usize, censored: usize) -> Self {
        DecayFit {
            model: DecayModel::Degenerate,
            c: None,
            beta: None,
            eps: None,
            polynomial: None,
            stretched: None,
            points_used,
            censored,
            censored_consistent: None,
        }
    }

    /// Predicted `ln p(n)` under the selected model.
    pub fn predict_log(&self, n: f64) -> Option<f64> {
        match self.model {
            DecayModel::Polynomial => self.polynomial.map(|f| f.c.ln() - f.beta * n.ln()),
            DecayModel::StretchedExponential => self.stretched.map(|f| f.a.ln() - f.kappa * n.powf(f.eps)),
            DecayModel::Degenerate => None,
        }
    }

    pub fn record(&self) -> Value {
        json!({
            "experiment": "fit",
            "model": self.model,
            "c": self.c,
            "beta": self.beta,
            "eps": self.eps,
            "polynomial": self.polynomial,
            "stretched": self.stretched,
            "points_used": self.points_used,
            "censored": self.censored,
            "censored_consistent": self.censored_consistent,
        })
    }
}

/// Weighted fit of `y = b + m x`; returns `(b, m, chi2)`.
fn wls_line(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64) {
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
    }
    let m = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = ym - m * xm;
    (b, m, chi2(x, y, w, b, m))
}

fn chi2(x: &[f64], y: &[f64], w: &[f64], b: f64, m: f64) -> f64 {
    (0..x.len()).map(|i| w[i] * (y[i] - b - m * x[i]).powi(2)).sum()
}

/// Best `(ln a, kappa, chi2)` at fixed `eps`, with `kappa >= 0`.
fn stretched_at(ns: &[f64], y: &[f64], w: &[f64], eps: f64) -> (f64, f64, f64) {
    let u: Vec<f64> = ns.iter().map(|n| n.powf(eps)).collect();
    let (b, m, c2) = wls_line(&u, y, w);
    if m <= 0.0 {
        return (b, -m, c2);
    }
    let sw: f64 = w.iter().sum();
    let ym = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    (ym, 0.0, chi2(&u, y, w, ym, 0.0))
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    (lo + hi) / 2.0
}

fn fit_stretched(ns: &[f64], y: &[f64], w: &[f64]) -> StretchedFit {
    let at = |eps: f64| stretched_at(ns, y, w, eps).2;
    let (lmin, lmax) = (EPS_MIN.ln(), EPS_MAX.ln());
    let grid: Vec<f64> = (0..GRID)
        .map(|i| (lmin + (lmax - lmin) * i as f64 / (GRID - 1) as f64).exp())
        .collect();
    let best = (0..GRID)
        .map(|i| (at(grid[i]), i))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, i)| i)
        .expect("grid is non-empty");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(GRID - 1)];
    let mut eps = golden_min(at, lo, hi);
    if at(grid[best]) < at(eps) {
        eps = grid[best];
    }
    let (log_a, kappa, residual) = stretched_at(ns, y, w, eps);
    StretchedFit {
        a: log_a.exp(),
        kappa,
        eps,
        residual,
        score: residual + EXTRA_PARAM_PENALTY,
    }
}

/// Fits both models to `samples`; `censored` lists `(n, upper bound on p)`
/// for points that had no hits.
pub fn fit_samples(samples: &[DecaySample], censored: &[(f64, f64)]) -> DecayFit {
    let used = samples.len();
    let first = samples.first().map(|s| s.log_p);
    let constant = samples.iter().all(|s| Some(s.log_p) == first);
    if used < MIN_POINTS
        || constant
        || samples
            .iter()
            .any(|s| s.sigma.is_nan() || s.sigma <= 0.0 || !s.log_p.is_finite())
    {
        return DecayFit::degenerate(used, censored.len());
    }
    let ns: Vec<f64> = samples.iter().map(|s| s.n).collect();
    let x: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.log_p).collect();
    let w: Vec<f64> = samples.iter().map(|s| 1.0 / (s.sigma * s.sigma)).collect();

    let (log_c, slope, residual) = wls_line(&x, &y, &w);
    let poly = PolynomialFit {
        c: log_c.exp(),
        beta: -slope,
        residual,
        score: residual,
    };
    let stretched = fit_stretched(&ns, &y, &w);
    let mut fit = DecayFit {
        points_used: used,
        censored: censored.len(),
        polynomial: Some(poly),
        stretched: Some(stretched),
        ..DecayFit::degenerate(used, censored.len())
    };
    if stretched.score < poly.score {
        fit.model = DecayModel::StretchedExponential;
        fit.c = Some(stretched.a);
        fit.eps = Some(stretched.eps);
    } else {
        fit.model = DecayModel::Polynomial;
        fit.c = Some(poly.c);
        fit.beta = Some(poly.beta);
    }
    if !censored.is_empty() {
        fit.censored_consistent = Some(
            censored
                .iter()
                .all(|&(n, bound)| fit.predict_log(n).is_some_and(|lp| lp <= bound.ln())),
        );
    }
    fit
}

/// Fits a Monte Carlo curve. Each point with hits contributes `ln` of its
/// rate, with standard error read off the Wilson interval.
pub fn fit_decay(curve: &ProbCurve) -> DecayFit {
    let mut samples = Vec::new();
    let mut censored = Vec::new();
    for p in &curve.points {
        if p.trials == 0 {
            continue;
        }
        if p.hits == 0 {
            censored.push((p.n as f64, rule_of_three(p.trials)));
            continue;
        }
        let (lo, hi) = p.wilson();
        samples.push(DecaySample {
            n: p.n as f64,
            log_p: p.rate().ln(),
            sigma: (hi.ln() - lo.ln()) / (2.0 * Z95),
        });
    }
    fit_samples(&samples, &censored)
}
