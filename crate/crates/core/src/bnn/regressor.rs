//! A desk-scale dropout MLP regressor used to exercise the loss and
//! MC-prediction machinery end to end.
//!
//! The network is a tanh MLP with an optional log-variance output head.
//! Dropout masks are derived from counter-based streams, so training and
//! MC prediction are pure functions of their seeds. The log-variance head
//! is squashed to `[-6, 6]` to keep the exp-precision term bounded.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rng::CounterRng;

use super::{heteroscedastic_loss, predictive_moments, McRegressionSamples, PredictiveMoments};

const LOG_VAR_LIMIT: f64 = 6.0;

/// Where dropout is applied inside the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutPlacement {
    /// Only on the last hidden layer, right before the output head.
    HeadOnly,
    /// On every hidden layer.
    AllLayers,
    /// On the second half of the hidden stack.
    SecondStageConv,
}

impl DropoutPlacement {
    pub fn as_str(&self) -> &'static str {
        match self {
            DropoutPlacement::HeadOnly => "head-only",
            DropoutPlacement::AllLayers => "all-layers",
            DropoutPlacement::SecondStageConv => "second-stage-conv",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "head-only" => Ok(DropoutPlacement::HeadOnly),
            "all-layers" => Ok(DropoutPlacement::AllLayers),
            "second-stage-conv" => Ok(DropoutPlacement::SecondStageConv),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown dropout placement '{other}'"),
            }),
        }
    }

    fn applies(&self, hidden_index: usize, hidden_count: usize) -> bool {
        match self {
            DropoutPlacement::HeadOnly => hidden_index + 1 == hidden_count,
            DropoutPlacement::AllLayers => true,
            DropoutPlacement::SecondStageConv => hidden_index >= hidden_count / 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropoutSpec {
    pub p_drop: f64,
    pub placement: DropoutPlacement,
}

impl Default for DropoutSpec {
    fn default() -> Self {
        Self {
            p_drop: 0.2,
            placement: DropoutPlacement::HeadOnly,
        }
    }
}

impl DropoutSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p_drop) {
            return Err(Error::Config(format!(
                "p_drop must be in [0, 1), got {}",
                self.p_drop
            )));
        }
        Ok(())
    }
}

/// Construction parameters for [`TinyRegressor`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorSpec {
    pub hidden: Vec<usize>,
    pub dropout: DropoutSpec,
    pub heteroscedastic: bool,
    pub init_seed: u64,
}

impl Default for RegressorSpec {
    fn default() -> Self {
        Self {
            hidden: vec![32, 32],
            dropout: DropoutSpec::default(),
            heteroscedastic: true,
            init_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    rows: usize,
    cols: usize,
    w: Vec<f64>,
    b: Vec<f64>,
}

impl Layer {
    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for r in 0..self.rows {
            let mut acc = self.b[r];
            let row = &self.w[r * self.cols..(r + 1) * self.cols];
            for (w, a) in row.iter().zip(input) {
                acc += w * a;
            }
            out.push(acc);
        }
    }
}

/// Scalar-input tanh MLP with one (mean) or two (mean, log-variance)
/// outputs and seeded dropout.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyRegressor {
    layers: Vec<Layer>,
    pub dropout: DropoutSpec,
    pub heteroscedastic: bool,
}

impl TinyRegressor {
    pub fn new(spec: &RegressorSpec) -> Result<Self> {
        spec.dropout.validate()?;
        if spec.hidden.is_empty() || spec.hidden.contains(&0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        let out_dim = if spec.heteroscedastic { 2 } else { 1 };
        let mut widths = vec![1usize];
        widths.extend_from_slice(&spec.hidden);
        widths.push(out_dim);

        let mut rng = CounterRng::new(spec.init_seed, u64::MAX);
        let layers = widths
            .windows(2)
            .map(|io| {
                let (cols, rows) = (io[0], io[1]);
                let scale = (6.0 / (rows + cols) as f64).sqrt();
                Layer {
                    rows,
                    cols,
                    w: (0..rows * cols)
                        .map(|_| rng.uniform_range(-scale, scale))
                        .collect(),
                    b: vec![0.0; rows],
                }
            })
            .collect();
        Ok(Self {
            layers,
            dropout: spec.dropout,
            heteroscedastic: spec.heteroscedastic,
        })
    }

    pub fn layer_widths(&self) -> Vec<usize> {
        let mut widths = vec![self.layers[0].cols];
        widths.extend(self.layers.iter().map(|l| l.rows));
        widths
    }

    fn hidden_count(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flattened copy of all weights and biases.
    pub fn theta(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            theta.extend_from_slice(&l.w);
            theta.extend_from_slice(&l.b);
        }
        theta
    }

    /// One forward pass; `dropout_stream` identifies the mask stream of
    /// `(seed, pass)`, `None` disables dropout.
    pub fn forward(&self, x: f64, dropout_stream: Option<(u64, u64)>) -> (f64, f64) {
        let trace = self.forward_trace(x, dropout_stream);
        self.read_output(&trace)
    }

    /// Predicted mean and variance (`exp` of the log-variance head) of a
    /// single dropout-free pass.
    pub fn predict(&self, x: f64) -> (f64, f64) {
        let (mean, log_var) = self.forward(x, None);
        (mean, log_var.exp())
    }

    fn read_output(&self, trace: &ForwardTrace) -> (f64, f64) {
        let out = trace.activations.last().unwrap();
        if self.heteroscedastic {
            (out[0], squash_log_var(out[1]))
        } else {
            (out[0], 0.0)
        }
    }

    fn forward_trace(&self, x: f64, dropout_stream: Option<(u64, u64)>) -> ForwardTrace {
        let hidden_count = self.hidden_count();
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        let mut masks: Vec<Option<Vec<f64>>> = Vec::with_capacity(hidden_count);
        activations.push(vec![x]);

        let mut buf = Vec::new();
        for (li, layer) in self.layers.iter().enumerate() {
            layer.forward(activations.last().unwrap(), &mut buf);
            let is_hidden = li < hidden_count;
            let mut act: Vec<f64> = if is_hidden {
                buf.iter().map(|&z| z.tanh()).collect()
            } else {
                buf.clone()
            };
            if is_hidden {
                let mask = self.dropout_mask(li, dropout_stream, act.len());
                if let Some(mask) = &mask {
                    for (a, m) in act.iter_mut().zip(mask) {
                        *a *= m;
                    }
                }
                masks.push(mask);
            }
            activations.push(act);
        }
        ForwardTrace { activations, masks }
    }

    fn dropout_mask(
        &self,
        hidden_index: usize,
        stream: Option<(u64, u64)>,
        len: usize,
    ) -> Option<Vec<f64>> {
        let (seed, pass) = stream?;
        if self.dropout.p_drop == 0.0
            || !self
                .dropout
                .placement
                .applies(hidden_index, self.hidden_count())
        {
            return None;
        }
        let keep_scale = 1.0 / (1.0 - self.dropout.p_drop);
        let mut rng = CounterRng::new(seed, pass.wrapping_mul(131).wrapping_add(hidden_index as u64));
        Some(
            (0..len)
                .map(|_| {
                    if rng.uniform() < self.dropout.p_drop {
                        0.0
                    } else {
                        keep_scale
                    }
                })
                .collect(),
        )
    }

    /// Backpropagate `(d_mean, d_log_var)` through the trace, adding
    /// parameter gradients into `grads` (same layout as the layers).
    fn backward(
        &self,
        trace: &ForwardTrace,
        d_mean: f64,
        d_log_var: f64,
        grads: &mut [Layer],
    ) {
        let hidden_count = self.hidden_count();
        let out = trace.activations.last().unwrap();
        let mut delta: Vec<f64> = if self.heteroscedastic {
            vec![d_mean, d_log_var * squash_log_var_grad(out[1])]
        } else {
            vec![d_mean]
        };

        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &trace.activations[li];
            let grad = &mut grads[li];
            for (r, &d) in delta.iter().enumerate() {
                grad.b[r] += d;
                let row = &mut grad.w[r * layer.cols..(r + 1) * layer.cols];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            if li == 0 {
                break;
            }
            // propagate to the previous (hidden) activation
            let mut prev = vec![0.0; layer.cols];
            for (r, &d) in delta.iter().enumerate() {
                let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += w * d;
                }
            }
            let hidden_index = li - 1;
            if let Some(mask) = &trace.masks[hidden_index] {
                for (p, m) in prev.iter_mut().zip(mask) {
                    *p *= m;
                }
            }
            // tanh' through the pre-dropout activation
            let act = &trace.activations[li];
            let mask = &trace.masks[hidden_index];
            for (i, p) in prev.iter_mut().enumerate() {
                let a = match mask {
                    Some(m) if m[i] != 0.0 => act[i] / m[i],
                    Some(_) => 0.0,
                    None => act[i],
                };
                *p *= 1.0 - a * a;
            }
            let _ = hidden_count;
            delta = prev;
        }
    }

    /// Serialize to the versioned text checkpoint format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("TINYREG v1\n");
        let widths: Vec<String> = self.layer_widths().iter().map(|w| w.to_string()).collect();
        let _ = writeln!(out, "widths {}", widths.join(" "));
        let _ = writeln!(out, "p_drop {:?}", self.dropout.p_drop);
        let _ = writeln!(out, "placement {}", self.dropout.placement.as_str());
        let _ = writeln!(out, "heteroscedastic {}", u8::from(self.heteroscedastic));
        let theta = self.theta();
        let _ = writeln!(out, "weights {}", theta.len());
        for w in theta {
            let _ = writeln!(out, "{w:?}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut expect = |prefix: &str| -> Result<(usize, String)> {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    msg: format!("missing '{prefix}' line"),
                })?;
            if prefix.is_empty() {
                return Ok((i + 1, line.to_string()));
            }
            line.strip_prefix(prefix)
                .map(|rest| (i + 1, rest.trim().to_string()))
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: format!("expected '{prefix}'"),
                })
        };

        let (line_no, magic) = expect("")?;
        if magic.trim() != "TINYREG v1" {
            return Err(Error::Parse {
                line: line_no,
                msg: "bad checkpoint magic".into(),
            });
        }
        let (line_no, widths_s) = expect("widths ")?;
        let widths: Vec<usize> = widths_s
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad width '{t}'"),
                })
            })
            .collect::<Result<_>>()?;
        if widths.len() < 3 || widths[0] != 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: "checkpoint must describe a scalar-input MLP".into(),
            });
        }
        let (line_no, p_drop_s) = expect("p_drop ")?;
        let p_drop: f64 = p_drop_s.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: "bad p_drop".into(),
        })?;
        let (_, placement_s) = expect("placement ")?;
        let placement = DropoutPlacement::parse(&placement_s)?;
        let (line_no, het_s) = expect("heteroscedastic ")?;
        let heteroscedastic = match het_s.as_str() {
            "0" => false,
            "1" => true,
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "heteroscedastic flag must be 0 or 1".into(),
                })
            }
        };
        let out_dim = *widths.last().unwrap();
        if out_dim != if heteroscedastic { 2 } else { 1 } {
            return Err(Error::Parse {
                line: line_no,
                msg: "output width inconsistent with heteroscedastic flag".into(),
            });
        }
        let (line_no, count_s) = expect("weights ")?;
        let count: usize = count_s.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: "bad weight count".into(),
        })?;

        let mut theta = Vec::with_capacity(count);
        for (i, line) in lines {
            let w: f64 = line.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad weight '{}'", line.trim()),
            })?;
            theta.push(w);
        }
        if theta.len() != count {
            return Err(Error::Length(format!(
                "checkpoint declares {count} weights, found {}",
                theta.len()
            )));
        }

        let mut layers = Vec::with_capacity(widths.len() - 1);
        let mut cursor = 0usize;
        for io in widths.windows(2) {
            let (cols, rows) = (io[0], io[1]);
            let need = rows * cols + rows;
            if cursor + need > theta.len() {
                return Err(Error::Length("checkpoint weight block truncated".into()));
            }
            let w = theta[cursor..cursor + rows * cols].to_vec();
            cursor += rows * cols;
            let b = theta[cursor..cursor + rows].to_vec();
            cursor += rows;
            layers.push(Layer { rows, cols, w, b });
        }
        if cursor != theta.len() {
            return Err(Error::Length("checkpoint has trailing weights".into()));
        }
        Ok(Self {
            layers,
            dropout: DropoutSpec { p_drop, placement },
            heteroscedastic,
        })
    }
}

fn squash_log_var(raw: f64) -> f64 {
    LOG_VAR_LIMIT * (raw / LOG_VAR_LIMIT).tanh()
}

fn squash_log_var_grad(raw: f64) -> f64 {
    let t = (raw / LOG_VAR_LIMIT).tanh();
    1.0 - t * t
}

struct ForwardTrace {
    /// Input, each (post-dropout) hidden activation, and the raw output.
    activations: Vec<Vec<f64>>,
    masks: Vec<Option<Vec<f64>>>,
}

/// One row of the training-curve log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainLogRow {
    pub epoch: usize,
    pub loss: f64,
    pub data_term: f64,
    pub decay_term: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub model: TinyRegressor,
    pub log: Vec<TrainLogRow>,
}

/// Fit a [`TinyRegressor`] on the mean heteroscedastic loss plus the
/// dropout-scaled weight decay by full-batch adaptive gradient descent
/// (Adam steps). The exp-precision term of the loss leaves the mean and
/// noise heads on very different curvature scales, so per-parameter step
/// normalization is what makes full-batch training converge in a
/// reasonable epoch count.
///
/// `train_seed` drives the per-epoch, per-sample dropout masks. Fails
/// with a divergence error when the loss stops being finite.
pub fn train_tiny_regressor(
    data: &[(f64, f64)],
    spec: &RegressorSpec,
    epochs: usize,
    lr: f64,
    train_seed: u64,
) -> Result<TrainResult> {
    if data.is_empty() {
        return Err(Error::EmptyInput("training set is empty".into()));
    }
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::Config("learning rate must be positive".into()));
    }
    let mut model = TinyRegressor::new(spec)?;
    let n = data.len();
    let decay_scale = (1.0 - spec.dropout.p_drop) / n as f64;

    let zeros: Vec<Layer> = model
        .layers
        .iter()
        .map(|l| Layer {
            rows: l.rows,
            cols: l.cols,
            w: vec![0.0; l.w.len()],
            b: vec![0.0; l.b.len()],
        })
        .collect();
    let mut grads = zeros.clone();
    let mut adam_m = zeros.clone();
    let mut adam_v = zeros;
    let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);

    let mut log = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        for g in &mut grads {
            g.w.iter_mut().for_each(|v| *v = 0.0);
            g.b.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut data_term = 0.0;
        for (i, &(x, y)) in data.iter().enumerate() {
            let stream = mask_stream(epoch, i);
            let trace = model.forward_trace(x, Some((train_seed, stream)));
            let (mean, log_var) = model.read_output(&trace);
            let (loss, d_mean, d_log_var) = per_sample_loss(spec.heteroscedastic, y, mean, log_var);
            data_term += loss / n as f64;
            model.backward(&trace, d_mean / n as f64, d_log_var / n as f64, &mut grads);
        }
        let decay_term = weight_decay(&model, spec.dropout.p_drop, n);
        let loss = data_term + decay_term;
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged(format!(
                "loss became {loss} at epoch {epoch}"
            )));
        }

        let bias1 = 1.0 - beta1.powi(epoch as i32 + 1);
        let bias2 = 1.0 - beta2.powi(epoch as i32 + 1);
        for (layer, (grad, (m, v))) in model
            .layers
            .iter_mut()
            .zip(grads.iter().zip(adam_m.iter_mut().zip(adam_v.iter_mut())))
        {
            let update = |p: &mut f64, g_raw: f64, m: &mut f64, v: &mut f64| {
                let g = g_raw + decay_scale * *p;
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            };
            for ((p, &g), (m, v)) in layer
                .w
                .iter_mut()
                .zip(&grad.w)
                .zip(m.w.iter_mut().zip(v.w.iter_mut()))
            {
                update(p, g, m, v);
            }
            for ((p, &g), (m, v)) in layer
                .b
                .iter_mut()
                .zip(&grad.b)
                .zip(m.b.iter_mut().zip(v.b.iter_mut()))
            {
                update(p, g, m, v);
            }
        }

        log.push(TrainLogRow {
            epoch,
            loss,
            data_term,
            decay_term,
        });
    }
    Ok(TrainResult { model, log })
}

fn mask_stream(epoch: usize, sample: usize) -> u64 {
    ((epoch as u64) << 32) ^ (sample as u64)
}

fn per_sample_loss(heteroscedastic: bool, y: f64, mean: f64, log_var: f64) -> (f64, f64, f64) {
    if heteroscedastic {
        let g = heteroscedastic_loss(y, mean, log_var);
        (g.loss, g.d_prediction, g.d_log_var)
    } else {
        let r = y - mean;
        (r * r, -2.0 * r, 0.0)
    }
}

fn weight_decay(model: &TinyRegressor, p_drop: f64, n: usize) -> f64 {
    super::weight_decay_term(&model.theta(), p_drop, n)
}

/// Aggregate `t` dropout-active forward passes at `x` into predictive
/// moments. Pass `i` draws its masks from `(seed, i)`, so passes can run
/// in any order.
///
/// Moments are taken over decoded per-pass outputs. Aggregating earlier
/// (per proposal, before any postprocessing) ties every pose estimate to
/// one proposal, which shrinks position spread and inflates shape spread;
/// this crate always aggregates per pass.
pub fn mc_predict(model: &TinyRegressor, x: f64, t: usize, seed: u64) -> Result<PredictiveMoments> {
    if t == 0 {
        return Err(Error::EmptyInput("need at least one forward pass".into()));
    }
    let mut y = Vec::with_capacity(t);
    let mut var = Vec::with_capacity(t);
    for pass in 0..t {
        let (mean, log_var) = model.forward(x, Some((seed, pass as u64)));
        y.push(mean);
        var.push(if model.heteroscedastic {
            log_var.exp()
        } else {
            0.0
        });
    }
    predictive_moments(&McRegressionSamples::new(y, var)?)
}
