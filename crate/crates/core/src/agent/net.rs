//! The policy network: a small dense net with RELU hidden layers and a
//! softmax output over the create-index actions, evaluated with plain loops.
//! Parameters live in one flat vector so derivative-free search can treat
//! the whole policy as a point in R^d.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::env::{Action, EnvConfig};
use crate::error::{Error, Result};

/// Network shape. The default policy uses 4 hidden layers of 8 neurons;
/// input is the flattened matrix-plus-bitlist encoding, output one logit
/// per column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetArch {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub output_dim: usize,
}

pub const DEFAULT_HIDDEN_LAYERS: usize = 4;
pub const DEFAULT_HIDDEN_WIDTH: usize = 8;

impl NetArch {
    pub fn new(
        input_dim: usize,
        hidden_layers: usize,
        hidden_width: usize,
        output_dim: usize,
    ) -> Result<Self> {
        if input_dim == 0 || hidden_layers == 0 || hidden_width == 0 || output_dim == 0 {
            return Err(Error::Config("network dimensions must be positive".into()));
        }
        Ok(NetArch {
            input_dim,
            hidden_layers,
            hidden_width,
            output_dim,
        })
    }

    /// The standard 4x8 architecture for a catalog of `m` columns encoded
    /// with `n_fixed` query rows.
    pub fn standard(env_cfg: &EnvConfig, column_count: usize) -> Self {
        NetArch {
            input_dim: env_cfg.n_fixed * column_count + column_count,
            hidden_layers: DEFAULT_HIDDEN_LAYERS,
            hidden_width: DEFAULT_HIDDEN_WIDTH,
            output_dim: column_count,
        }
    }

    /// Layer fan-in/fan-out pairs, input to output.
    fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers + 1);
        let mut fan_in = self.input_dim;
        for _ in 0..self.hidden_layers {
            dims.push((fan_in, self.hidden_width));
            fan_in = self.hidden_width;
        }
        dims.push((fan_in, self.output_dim));
        dims
    }

    /// Total number of weights and biases.
    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .map(|(fan_in, fan_out)| fan_in * fan_out + fan_out)
            .sum()
    }

    /// Does this network fit a catalog under the given environment
    /// configuration?
    pub fn matches(&self, catalog: &Catalog, env_cfg: &EnvConfig) -> bool {
        let m = catalog.column_count();
        self.input_dim == env_cfg.n_fixed * m + m && self.output_dim == m
    }
}

/// A policy: an architecture plus the flat parameter vector, laid out layer
/// by layer, each layer's weights row-major (one row per output neuron)
/// followed by its biases.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub arch: NetArch,
    theta: Vec<f64>,
}

impl PolicyParams {
    pub fn new(arch: NetArch, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != arch.param_count() {
            return Err(Error::DimensionMismatch {
                expected: arch.param_count(),
                got: theta.len(),
            });
        }
        Ok(PolicyParams { arch, theta })
    }

    pub fn zeros(arch: NetArch) -> Self {
        let theta = vec![0.0; arch.param_count()];
        PolicyParams { arch, theta }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Dense forward pass: RELU on hidden layers, softmax on the output.
    /// Returns a probability vector over the actions (non-negative, sums to
    /// one). All-zero parameters yield the exact uniform distribution.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.arch.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.arch.input_dim,
                got: input.len(),
            });
        }
        let dims = self.arch.layer_dims();
        let last = dims.len() - 1;
        let mut activations = input.to_vec();
        let mut offset = 0;
        for (layer, &(fan_in, fan_out)) in dims.iter().enumerate() {
            let weights = &self.theta[offset..offset + fan_in * fan_out];
            let biases = &self.theta[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            offset += fan_in * fan_out + fan_out;
            let mut next = Vec::with_capacity(fan_out);
            for row in 0..fan_out {
                let mut sum = biases[row];
                let row_weights = &weights[row * fan_in..(row + 1) * fan_in];
                for (w, x) in row_weights.iter().zip(&activations) {
                    sum += w * x;
                }
                if layer != last {
                    sum = sum.max(0.0);
                }
                next.push(sum);
            }
            activations = next;
        }
        softmax_in_place(&mut activations);
        Ok(activations)
    }
}

/// Numerically stable softmax (max subtraction, so uniform logits map to an
/// exact uniform distribution).
fn softmax_in_place(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for logit in logits.iter_mut() {
        *logit = (*logit - max).exp();
        total += *logit;
    }
    for logit in logits.iter_mut() {
        *logit /= total;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Argmax over permitted actions, ties broken by lowest column index.
    Greedy,
    /// Draw from the distribution renormalized over permitted actions.
    Sample,
}

/// Pick an action from `dist`, never choosing a masked column. Masked
/// entries are zeroed and the rest renormalized; greedy mode takes the
/// argmax with ties broken by the lowest column index.
pub fn select_action<R: Rng + ?Sized>(
    dist: &[f64],
    mask: &[bool],
    mode: SelectionMode,
    rng: &mut R,
) -> Result<Action> {
    assert_eq!(dist.len(), mask.len(), "distribution/mask length mismatch");
    let permitted_total: f64 = dist
        .iter()
        .zip(mask)
        .filter(|(_, &ok)| ok)
        .map(|(p, _)| *p)
        .sum();
    let mut first_permitted = None;
    let mut best: Option<(usize, f64)> = None;
    for (j, (&p, &ok)) in dist.iter().zip(mask).enumerate() {
        if !ok {
            continue;
        }
        if first_permitted.is_none() {
            first_permitted = Some(j);
        }
        match best {
            Some((_, best_p)) if p <= best_p => {}
            _ => best = Some((j, p)),
        }
    }
    let Some(first) = first_permitted else {
        return Err(Error::AllMasked);
    };
    match mode {
        SelectionMode::Greedy => Ok(Action {
            column: best.map(|(j, _)| j).unwrap_or(first),
        }),
        SelectionMode::Sample => {
            if permitted_total <= 0.0 {
                // Every permitted probability underflowed to zero; fall back
                // to the deterministic tie-break.
                return Ok(Action { column: first });
            }
            let draw = rng.random::<f64>() * permitted_total;
            let mut cumulative = 0.0;
            let mut last = first;
            for (j, (&p, &ok)) in dist.iter().zip(mask).enumerate() {
                if !ok {
                    continue;
                }
                cumulative += p;
                last = j;
                if draw < cumulative {
                    return Ok(Action { column: j });
                }
            }
            Ok(Action { column: last })
        }
    }
}
