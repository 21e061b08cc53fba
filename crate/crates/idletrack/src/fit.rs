//! Logistic model training on labeled windows.
//!
//! Full-batch gradient ascent on the mean L2-regularized log-likelihood.
//! Features are standardized internally so one learning rate works across
//! pixel scales; the returned coefficients are mapped back to raw feature
//! units.

use crate::error::{Error, Result};
use crate::idle::{IdleModel, MachineState, WindowFeatures};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Which label `p` should be the probability of.
    pub positive_label: MachineState,
    /// L2 penalty on the weights (intercept unpenalized).
    pub l2: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop when the gradient infinity-norm drops below this.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            positive_label: MachineState::Idle,
            l2: 1e-4,
            learning_rate: 0.1,
            max_iters: 10_000,
            tol: 1e-8,
        }
    }
}

/// Mean log-likelihood of the binary logistic model minus the L2 penalty.
///
/// `beta = [intercept, w1, w2]`, `xs` are feature pairs, `ys` in {0, 1}.
pub fn log_likelihood(beta: &[f64; 3], xs: &[[f64; 2]], ys: &[f64], l2: f64) -> f64 {
    let n = xs.len() as f64;
    let mut ll = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let z = beta[0] + beta[1] * x[0] + beta[2] * x[1];
        // y*z - log(1 + e^z), with a stable softplus
        let softplus = if z > 30.0 { z } else { (1.0 + z.exp()).ln() };
        ll += y * z - softplus;
    }
    ll / n - 0.5 * l2 * (beta[1] * beta[1] + beta[2] * beta[2])
}

/// Analytic gradient of [`log_likelihood`].
pub fn log_likelihood_gradient(beta: &[f64; 3], xs: &[[f64; 2]], ys: &[f64], l2: f64) -> [f64; 3] {
    let n = xs.len() as f64;
    let mut g = [0.0f64; 3];
    for (x, y) in xs.iter().zip(ys) {
        let z = beta[0] + beta[1] * x[0] + beta[2] * x[1];
        let p = 1.0 / (1.0 + (-z.clamp(-500.0, 500.0)).exp());
        let r = y - p;
        g[0] += r;
        g[1] += r * x[0];
        g[2] += r * x[1];
    }
    g[0] /= n;
    g[1] = g[1] / n - l2 * beta[1];
    g[2] = g[2] / n - l2 * beta[2];
    g
}

/// Fits logistic coefficients to `(features, label)` windows.
///
/// Needs at least two windows and both labels present. The positive class
/// is `opts.positive_label`; flipping it negates the solution.
pub fn fit_model(
    windows: &[(WindowFeatures, MachineState)],
    opts: &FitOptions,
) -> Result<IdleModel> {
    if windows.len() < 2 {
        return Err(Error::DegenerateTraining(format!(
            "need at least 2 windows, got {}",
            windows.len()
        )));
    }
    let positives = windows.iter().filter(|(_, l)| *l == opts.positive_label).count();
    if positives == 0 || positives == windows.len() {
        return Err(Error::DegenerateTraining(
            "both labels must be present in the training set".to_string(),
        ));
    }

    let raw: Vec<[f64; 2]> = windows.iter().map(|(f, _)| [f.mad_ad, f.mad_cd]).collect();
    let ys: Vec<f64> = windows
        .iter()
        .map(|(_, l)| if *l == opts.positive_label { 1.0 } else { 0.0 })
        .collect();
    for x in &raw {
        if !(x[0].is_finite() && x[1].is_finite()) {
            return Err(Error::NonFiniteMeasurement("window feature".to_string()));
        }
    }

    // z-score per feature; a constant feature standardizes to zero and its
    // raw coefficient comes back as zero
    let n = raw.len() as f64;
    let mut mean = [0.0f64; 2];
    let mut std = [0.0f64; 2];
    for x in &raw {
        mean[0] += x[0];
        mean[1] += x[1];
    }
    mean[0] /= n;
    mean[1] /= n;
    for x in &raw {
        std[0] += (x[0] - mean[0]).powi(2);
        std[1] += (x[1] - mean[1]).powi(2);
    }
    std[0] = (std[0] / n).sqrt();
    std[1] = (std[1] / n).sqrt();
    let scale = [
        if std[0] > 0.0 { std[0] } else { 1.0 },
        if std[1] > 0.0 { std[1] } else { 1.0 },
    ];
    let degenerate = [std[0] == 0.0, std[1] == 0.0];
    let xs: Vec<[f64; 2]> = raw
        .iter()
        .map(|x| {
            [
                if degenerate[0] { 0.0 } else { (x[0] - mean[0]) / scale[0] },
                if degenerate[1] { 0.0 } else { (x[1] - mean[1]) / scale[1] },
            ]
        })
        .collect();

    let mut beta = [0.0f64; 3];
    for _ in 0..opts.max_iters {
        let g = log_likelihood_gradient(&beta, &xs, &ys, opts.l2);
        let norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm < opts.tol {
            break;
        }
        for (b, gi) in beta.iter_mut().zip(g) {
            *b += opts.learning_rate * gi;
        }
    }

    // back to raw units: w_raw = w_std / scale, intercept absorbs the means
    let w1 = if degenerate[0] { 0.0 } else { beta[1] / scale[0] };
    let w2 = if degenerate[1] { 0.0 } else { beta[2] / scale[1] };
    let b0 = beta[0] - w1 * mean[0] - w2 * mean[1];

    let model = IdleModel {
        beta0: b0,
        beta1: w1,
        beta2: w2,
        positive_label: opts.positive_label,
    };
    model.validate()?;
    Ok(model)
}
