//! Monte-Carlo dropout uncertainty calculus: predictive moments,
//! heteroscedastic regression losses, noise-attenuated classification
//! loss, dropout masking, and MC-integrated entropy.
//!
//! Predictive moments aggregate `T` stochastic forward passes: the
//! epistemic part is the disagreement between passes, the aleatoric part
//! the mean of the per-pass predicted variances. Losses are parameterized
//! by `s = log(variance)` so the noise head is unconstrained; the
//! canonical variance form is recovered by substituting `exp(s)`.

pub mod regressor;

pub use regressor::{
    mc_predict, train_tiny_regressor, DropoutPlacement, DropoutSpec, RegressorSpec, TinyRegressor,
    TrainLogRow, TrainResult,
};

use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// Regression outputs of `T` dropout-active forward passes.
#[derive(Debug, Clone, PartialEq)]
pub struct McRegressionSamples {
    pub y_hat: Vec<f64>,
    pub sigma_sq: Vec<f64>,
}

impl McRegressionSamples {
    pub fn new(y_hat: Vec<f64>, sigma_sq: Vec<f64>) -> Result<Self> {
        if y_hat.is_empty() {
            return Err(Error::EmptyInput("need at least one forward pass".into()));
        }
        if y_hat.len() != sigma_sq.len() {
            return Err(Error::Domain("sample vectors must have equal length".into()));
        }
        if sigma_sq.iter().any(|&v| v < 0.0) {
            return Err(Error::Domain("predicted variances must be >= 0".into()));
        }
        Ok(Self { y_hat, sigma_sq })
    }

    pub fn t(&self) -> usize {
        self.y_hat.len()
    }
}

/// Classification logits of `T` forward passes, `C` scores each.
#[derive(Debug, Clone, PartialEq)]
pub struct McClassificationSamples {
    pub logits: Vec<Vec<f64>>,
}

impl McClassificationSamples {
    pub fn new(logits: Vec<Vec<f64>>) -> Result<Self> {
        if logits.is_empty() {
            return Err(Error::EmptyInput("need at least one forward pass".into()));
        }
        let c = logits[0].len();
        if c == 0 || logits.iter().any(|l| l.len() != c) {
            return Err(Error::Domain("all logit vectors must share one length".into()));
        }
        Ok(Self { logits })
    }
}

/// Predictive mean and variance with the epistemic/aleatoric split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveMoments {
    pub mean: f64,
    /// Total predictive variance, clamped to `>= 0` against rounding.
    pub variance: f64,
    /// Disagreement between passes (population variance of the means).
    pub epistemic: f64,
    /// Mean of the per-pass predicted variances.
    pub aleatoric: f64,
}

/// Predictive mean and variance over MC samples:
/// `E = mean(y_t)`, `Var = mean(y_t^2 + sigma_t^2) - E^2`.
pub fn predictive_moments(samples: &McRegressionSamples) -> Result<PredictiveMoments> {
    let t = samples.t() as f64;
    let mean = samples.y_hat.iter().sum::<f64>() / t;
    let raw = samples
        .y_hat
        .iter()
        .zip(&samples.sigma_sq)
        .map(|(&y, &s)| y * y + s)
        .sum::<f64>()
        / t
        - mean * mean;
    let aleatoric = samples.sigma_sq.iter().sum::<f64>() / t;
    let epistemic = samples
        .y_hat
        .iter()
        .map(|&y| (y - mean) * (y - mean))
        .sum::<f64>()
        / t;
    Ok(PredictiveMoments {
        mean,
        variance: raw.max(0.0),
        epistemic,
        aleatoric,
    })
}

/// Loss value and gradients with respect to the prediction and the
/// log-variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossGrad {
    pub loss: f64,
    pub d_prediction: f64,
    pub d_log_var: f64,
}

/// Squared-residual loss attenuated by a predicted log-variance `s`:
/// `(y - f)^2 * exp(-s) + s`.
pub fn heteroscedastic_loss(target: f64, prediction: f64, log_var: f64) -> LossGrad {
    let residual = target - prediction;
    let precision = (-log_var).exp();
    LossGrad {
        loss: residual * residual * precision + log_var,
        d_prediction: -2.0 * residual * precision,
        d_log_var: -residual * residual * precision + 1.0,
    }
}

/// Absolute-residual variant: `|y - f| * exp(-s) + s`. The gradient at a
/// zero residual uses the subgradient 0.
pub fn l1_heteroscedastic_loss(target: f64, prediction: f64, log_var: f64) -> LossGrad {
    let residual = target - prediction;
    let precision = (-log_var).exp();
    let sign = if residual > 0.0 {
        1.0
    } else if residual < 0.0 {
        -1.0
    } else {
        0.0
    };
    LossGrad {
        loss: residual.abs() * precision + log_var,
        d_prediction: -sign * precision,
        d_log_var: -residual.abs() * precision + 1.0,
    }
}

/// Dropout-scaled weight decay `(1 - p_drop) / (2N) * ||theta||^2`.
pub fn weight_decay_term(theta: &[f64], p_drop: f64, n: usize) -> f64 {
    let norm_sq: f64 = theta.iter().map(|w| w * w).sum();
    (1.0 - p_drop) / (2.0 * n as f64) * norm_sq
}

/// Loss and gradients of the noise-attenuated classification loss.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationLossGrad {
    pub loss: f64,
    pub d_logits: Vec<f64>,
    pub d_sigma: Vec<f64>,
}

/// MC-integrated softmax cross-entropy over logits corrupted with
/// `N(0, diag(sigma^2))` noise: the mean over `j` draws of
/// `H_SCE(target, logits + sigma * n_j)`. Deterministic per seed; the
/// average-of-losses form upper-bounds the loss of the averaged softmax.
pub fn attenuated_classification_loss(
    logits: &[f64],
    sigma: &[f64],
    target: usize,
    draws: usize,
    seed: u64,
) -> Result<ClassificationLossGrad> {
    if logits.is_empty() || logits.len() != sigma.len() {
        return Err(Error::Domain("logits/sigma must be equal non-empty".into()));
    }
    if target >= logits.len() {
        return Err(Error::Domain(format!(
            "target {target} out of range for {} classes",
            logits.len()
        )));
    }
    if draws == 0 {
        return Err(Error::Domain("need at least one MC draw".into()));
    }
    if sigma.iter().any(|&s| s < 0.0) {
        return Err(Error::Domain("sigma must be non-negative".into()));
    }

    let c = logits.len();
    let mut rng = CounterRng::new(seed, 0);
    let mut loss = 0.0;
    let mut d_logits = vec![0.0; c];
    let mut d_sigma = vec![0.0; c];
    let mut corrupted = vec![0.0; c];
    let mut noise = vec![0.0; c];
    for _ in 0..draws {
        for k in 0..c {
            noise[k] = rng.normal();
            corrupted[k] = logits[k] + sigma[k] * noise[k];
        }
        let probs = softmax(&corrupted);
        loss += log_sum_exp(&corrupted) - corrupted[target];
        for k in 0..c {
            let g = probs[k] - if k == target { 1.0 } else { 0.0 };
            d_logits[k] += g;
            d_sigma[k] += g * noise[k];
        }
    }
    let inv = 1.0 / draws as f64;
    loss *= inv;
    for k in 0..c {
        d_logits[k] *= inv;
        d_sigma[k] *= inv;
    }
    Ok(ClassificationLossGrad {
        loss,
        d_logits,
        d_sigma,
    })
}

/// Inverted dropout: zero each unit with probability `p_drop` and scale
/// survivors by `1 / (1 - p_drop)`, so the expectation is unchanged.
/// Deterministic per `(seed, stream)`.
pub fn apply_dropout(activations: &[f64], p_drop: f64, seed: u64, stream: u64) -> Vec<f64> {
    assert!((0.0..1.0).contains(&p_drop), "p_drop must be in [0, 1)");
    if p_drop == 0.0 {
        return activations.to_vec();
    }
    let keep_scale = 1.0 / (1.0 - p_drop);
    let mut rng = CounterRng::new(seed, stream);
    activations
        .iter()
        .map(|&a| if rng.uniform() < p_drop { 0.0 } else { a * keep_scale })
        .collect()
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Shannon entropy (nats) of the mean softmax over `T` passes.
pub fn mc_entropy(samples: &McClassificationSamples) -> f64 {
    let t = samples.logits.len() as f64;
    let c = samples.logits[0].len();
    let mut mean = vec![0.0; c];
    for pass in &samples.logits {
        for (m, p) in mean.iter_mut().zip(softmax(pass)) {
            *m += p / t;
        }
    }
    entropy(&mean)
}

/// Shannon entropy (nats) of a probability vector.
pub fn entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_constant_samples() {
        let s = McRegressionSamples::new(vec![3.0; 10], vec![0.0; 10]).unwrap();
        let m = predictive_moments(&s).unwrap();
        assert_eq!(m.mean, 3.0);
        assert_eq!(m.variance, 0.0);
    }

    #[test]
    fn moments_direct_arithmetic() {
        let s = McRegressionSamples::new(vec![0.0, 2.0], vec![0.0, 0.0]).unwrap();
        let m = predictive_moments(&s).unwrap();
        assert_eq!(m.mean, 1.0);
        assert!((m.variance - 1.0).abs() < 1e-15);

        // aleatoric-only: agreeing passes, one forward pass would suffice
        let s = McRegressionSamples::new(vec![1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let m = predictive_moments(&s).unwrap();
        assert_eq!(m.mean, 1.0);
        assert!((m.variance - 0.5).abs() < 1e-15);
        assert!(m.epistemic.abs() < 1e-15);
        assert!((m.aleatoric - 0.5).abs() < 1e-15);
    }

    #[test]
    fn variance_decomposition_identity() {
        let mut rng = CounterRng::new(404, 0);
        for _ in 0..200 {
            let t = 2 + rng.pick_index(40);
            let y: Vec<f64> = (0..t).map(|_| rng.normal_scaled(0.5, 2.0)).collect();
            let s: Vec<f64> = (0..t).map(|_| rng.uniform_range(0.0, 3.0)).collect();
            let m = predictive_moments(&McRegressionSamples::new(y, s).unwrap()).unwrap();
            assert!(
                (m.variance - (m.epistemic + m.aleatoric)).abs() < 1e-12,
                "decomposition broke: {} vs {} + {}",
                m.variance,
                m.epistemic,
                m.aleatoric
            );
        }
    }

    #[test]
    fn moments_reject_empty() {
        assert!(McRegressionSamples::new(vec![], vec![]).is_err());
    }

    #[test]
    fn heteroscedastic_loss_values() {
        let g = heteroscedastic_loss(1.0, 1.0, 0.0);
        assert_eq!(g.loss, 0.0);

        // residual^2 = 1 at s = 0: loss 1, the noise head sits at its optimum
        let g = heteroscedastic_loss(1.0, 0.0, 0.0);
        assert_eq!(g.loss, 1.0);
        assert_eq!(g.d_log_var, 0.0);
    }

    #[test]
    fn heteroscedastic_loss_minimum_over_log_var() {
        // minimum over s is at s = ln(residual^2), value 1 + ln(residual^2)
        for &residual in &[0.5f64, 1.5, 3.0] {
            let target = residual;
            let floor = 1.0 + (residual * residual).ln();
            let mut best = f64::INFINITY;
            for i in -400..400 {
                let s = i as f64 * 0.01;
                let g = heteroscedastic_loss(target, 0.0, s);
                best = best.min(g.loss);
                assert!(g.loss >= floor - 1e-9);
            }
            assert!((best - floor).abs() < 1e-3);
        }
    }

    #[test]
    fn l1_loss_values() {
        let g = l1_heteroscedastic_loss(1.0, 1.0, 0.0);
        assert_eq!(g.loss, 0.0);

        let g = l1_heteroscedastic_loss(2.0, 0.0, 2.0f64.ln());
        assert!((g.loss - (1.0 + 2.0f64.ln())).abs() < 1e-12);
        assert!((g.loss - 1.693).abs() < 1e-3);
    }

    fn finite_diff<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
        let h = 1e-5 * (1.0 + x.abs());
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn loss_gradients_match_finite_differences() {
        let mut rng = CounterRng::new(31, 0);
        for _ in 0..100 {
            let y = rng.normal_scaled(0.0, 2.0);
            let mut f = rng.normal_scaled(0.0, 2.0);
            // keep away from the L1 kink
            if (y - f).abs() < 0.05 {
                f += 0.2;
            }
            let s = rng.uniform_range(-2.0, 2.0);

            let g = heteroscedastic_loss(y, f, s);
            let fd_f = finite_diff(|v| heteroscedastic_loss(y, v, s).loss, f);
            let fd_s = finite_diff(|v| heteroscedastic_loss(y, f, v).loss, s);
            assert!((g.d_prediction - fd_f).abs() <= 1e-6 * fd_f.abs().max(1.0));
            assert!((g.d_log_var - fd_s).abs() <= 1e-6 * fd_s.abs().max(1.0));

            let g = l1_heteroscedastic_loss(y, f, s);
            let fd_f = finite_diff(|v| l1_heteroscedastic_loss(y, v, s).loss, f);
            let fd_s = finite_diff(|v| l1_heteroscedastic_loss(y, f, v).loss, s);
            assert!((g.d_prediction - fd_f).abs() <= 1e-6 * fd_f.abs().max(1.0));
            assert!((g.d_log_var - fd_s).abs() <= 1e-6 * fd_s.abs().max(1.0));
        }
    }

    #[test]
    fn weight_decay_values() {
        assert_eq!(weight_decay_term(&[0.0, 0.0], 0.2, 10), 0.0);
        assert_eq!(weight_decay_term(&[2.0], 0.5, 1), 1.0);
        // scales as 1/N
        let a = weight_decay_term(&[1.0, 2.0], 0.2, 1);
        let b = weight_decay_term(&[1.0, 2.0], 0.2, 4);
        assert!((a / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn attenuated_loss_degenerate_noise_is_exact_cross_entropy() {
        let logits = [1.5, -0.5, 0.25];
        for draws in [1, 7, 100] {
            let g = attenuated_classification_loss(&logits, &[0.0; 3], 1, draws, 9).unwrap();
            let probs = softmax(&logits);
            assert!((g.loss + probs[1].ln()).abs() < 1e-12);
        }
        let g = attenuated_classification_loss(&[0.0, 0.0], &[0.0, 0.0], 0, 5, 1).unwrap();
        assert!((g.loss - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn attenuated_loss_high_draw_consistency() {
        let logits = [0.8, -0.3, 0.1];
        let sigma = [0.5, 0.5, 0.5];
        let j = 100_000;
        let estimate = attenuated_classification_loss(&logits, &sigma, 0, j, 5)
            .unwrap()
            .loss;
        let reference = attenuated_classification_loss(&logits, &sigma, 0, 10_000_000, 6)
            .unwrap()
            .loss;
        // standard error of the J-draw estimate from independent replicas
        let replicas: Vec<f64> = (10..30)
            .map(|seed| {
                attenuated_classification_loss(&logits, &sigma, 0, j, seed)
                    .unwrap()
                    .loss
            })
            .collect();
        let mean = replicas.iter().sum::<f64>() / replicas.len() as f64;
        let se = (replicas.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
            / (replicas.len() - 1) as f64)
            .sqrt();
        assert!(
            (estimate - reference).abs() <= 3.0 * se,
            "estimate {estimate} vs reference {reference} (se {se:.2e})"
        );
    }

    #[test]
    fn attenuated_loss_gradients_match_finite_differences() {
        let seed = 77;
        let draws = 256;
        let logits = vec![0.4, -0.8, 0.9];
        let sigma = vec![0.3, 0.6, 0.2];
        let base = attenuated_classification_loss(&logits, &sigma, 2, draws, seed).unwrap();
        for k in 0..3 {
            let fd = {
                let h = 1e-5;
                let mut hi = logits.clone();
                hi[k] += h;
                let mut lo = logits.clone();
                lo[k] -= h;
                (attenuated_classification_loss(&hi, &sigma, 2, draws, seed)
                    .unwrap()
                    .loss
                    - attenuated_classification_loss(&lo, &sigma, 2, draws, seed)
                        .unwrap()
                        .loss)
                    / (2.0 * h)
            };
            assert!(
                (base.d_logits[k] - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                "logit {k}: {} vs {fd}",
                base.d_logits[k]
            );
            let fd = {
                let h = 1e-5;
                let mut hi = sigma.clone();
                hi[k] += h;
                let mut lo = sigma.clone();
                lo[k] -= h;
                (attenuated_classification_loss(&logits, &hi, 2, draws, seed)
                    .unwrap()
                    .loss
                    - attenuated_classification_loss(&logits, &lo, 2, draws, seed)
                        .unwrap()
                        .loss)
                    / (2.0 * h)
            };
            assert!(
                (base.d_sigma[k] - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                "sigma {k}: {} vs {fd}",
                base.d_sigma[k]
            );
        }
    }

    #[test]
    fn dropout_identity_at_zero() {
        let xs = vec![1.0, -2.0, 3.5];
        assert_eq!(apply_dropout(&xs, 0.0, 1, 0), xs);
    }

    #[test]
    fn dropout_preserves_expectation() {
        let n = 100_000;
        let mut sum = 0.0;
        for seed in 0..n {
            sum += apply_dropout(&[1.0], 0.3, seed, 0)[0];
        }
        let mean = sum / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn dropout_zero_fraction_matches_rate() {
        let xs = vec![1.0; 100_000];
        let out = apply_dropout(&xs, 0.2, 99, 0);
        let zeros = out.iter().filter(|&&v| v == 0.0).count() as f64;
        let frac = zeros / xs.len() as f64;
        assert!((frac - 0.2).abs() < 0.01, "zero fraction {frac}");
    }

    #[test]
    fn entropy_limits() {
        // strong agreement on class 0
        let s =
            McClassificationSamples::new(vec![vec![50.0, 0.0], vec![50.0, 0.0]]).unwrap();
        assert!(mc_entropy(&s) < 1e-9);

        // uniform mean softmax
        let s = McClassificationSamples::new(vec![vec![0.0, 0.0]]).unwrap();
        assert!((mc_entropy(&s) - 2.0f64.ln()).abs() < 1e-12);

        // confident but disagreeing passes: epistemic disagreement shows up
        let s = McClassificationSamples::new(vec![
            vec![50.0, 0.0],
            vec![0.0, 50.0],
            vec![50.0, 0.0],
            vec![0.0, 50.0],
        ])
        .unwrap();
        assert!((mc_entropy(&s) - 2.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn entropy_stays_in_range() {
        let mut rng = CounterRng::new(12, 0);
        for _ in 0..200 {
            let c = 2 + rng.pick_index(5);
            let t = 1 + rng.pick_index(8);
            let logits: Vec<Vec<f64>> = (0..t)
                .map(|_| (0..c).map(|_| rng.normal_scaled(0.0, 3.0)).collect())
                .collect();
            let h = mc_entropy(&McClassificationSamples::new(logits).unwrap());
            assert!(h >= 0.0 && h <= (c as f64).ln() + 1e-12);
        }
    }
}
