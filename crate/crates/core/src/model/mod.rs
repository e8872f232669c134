//! GNN model description and the reference training iteration.

mod checkpoint;
mod reference;

pub use checkpoint::{load_model, save_model};
pub use reference::{
    aggregate_ref, forward, loss_and_backward, update_ref, weight_update, Gradients,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;

/// Activation applied by the update stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub fn apply(&self, x: f32) -> f32 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }
}

/// How per-edge updates fold into the destination accumulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatherKind {
    Sum,
    /// Sum divided by the destination's edge count.
    Mean,
}

/// User-defined layer operator in scatter-gather form.
///
/// `scatter` maps one source feature element and the edge value to an
/// update element; `scatter_dfeat` is its partial derivative with respect
/// to the feature element, which backward propagation needs.
#[derive(Clone, Copy)]
pub struct CustomOp {
    pub scatter: fn(f32, f32) -> f32,
    pub scatter_dfeat: fn(f32, f32) -> f32,
    pub gather: GatherKind,
    pub activation: Activation,
}

impl std::fmt::Debug for CustomOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CustomOp")
            .field("gather", &self.gather)
            .field("activation", &self.activation)
            .finish()
    }
}

/// Layer operator: the two built-ins or a custom scatter-gather pair.
#[derive(Debug, Clone, Copy)]
pub enum Operator {
    Gcn,
    Sage,
    Custom(CustomOp),
}

/// Operator discriminant used where only the self-contribution policy
/// and input-width factor matter (batch lowering, workload assembly).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Gcn,
    Sage,
    Custom,
}

impl Operator {
    pub fn kind(&self) -> OperatorKind {
        match self {
            Operator::Gcn => OperatorKind::Gcn,
            Operator::Sage => OperatorKind::Sage,
            Operator::Custom(_) => OperatorKind::Custom,
        }
    }

    pub fn activation(&self) -> Activation {
        match self {
            Operator::Gcn | Operator::Sage => Activation::Relu,
            Operator::Custom(c) => c.activation,
        }
    }

    /// Factor applied to `f^{l-1}` to get the update-kernel input width:
    /// concat-style aggregation doubles it.
    pub fn input_width_factor(&self) -> usize {
        match self {
            Operator::Sage => 2,
            _ => 1,
        }
    }
}

/// Layer dimensions, operator, and parameters of a model.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    /// `f^0..f^L`.
    pub dims: Vec<usize>,
    pub operator: Operator,
    /// `weights[l-1]` is `W^l` with shape `f_in^l x f^l`.
    pub weights: Vec<FeatureMatrix>,
    /// `biases[l-1]` is `b^l` with length `f^l`.
    pub biases: Vec<Vec<f32>>,
}

impl ModelSpec {
    pub fn new(
        dims: Vec<usize>,
        operator: Operator,
        weights: Vec<FeatureMatrix>,
        biases: Vec<Vec<f32>>,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidSpec("model needs at least one layer".into()));
        }
        let num_layers = dims.len() - 1;
        if weights.len() != num_layers || biases.len() != num_layers {
            return Err(Error::ShapeMismatch(format!(
                "expected {num_layers} weight/bias pairs"
            )));
        }
        let factor = operator.input_width_factor();
        for l in 1..=num_layers {
            let f_in = factor * dims[l - 1];
            let w = &weights[l - 1];
            if w.rows() != f_in || w.dim() != dims[l] {
                return Err(Error::ShapeMismatch(format!(
                    "W^{l} must be {f_in}x{}, got {}x{}",
                    dims[l],
                    w.rows(),
                    w.dim()
                )));
            }
            if biases[l - 1].len() != dims[l] {
                return Err(Error::ShapeMismatch(format!(
                    "b^{l} must have length {}",
                    dims[l]
                )));
            }
            if w.data().iter().any(|v| !v.is_finite())
                || biases[l - 1].iter().any(|v| !v.is_finite())
            {
                return Err(Error::InvalidSpec(format!(
                    "layer {l} parameters not finite"
                )));
            }
        }
        Ok(Self {
            dims,
            operator,
            weights,
            biases,
        })
    }

    /// Uniform Glorot-style initialization, deterministic per seed.
    pub fn seeded(dims: Vec<usize>, operator: Operator, seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidSpec("model needs at least one layer".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factor = operator.input_width_factor();
        let num_layers = dims.len() - 1;
        let mut weights = Vec::with_capacity(num_layers);
        let mut biases = Vec::with_capacity(num_layers);
        for l in 1..=num_layers {
            let f_in = factor * dims[l - 1];
            let f_out = dims[l];
            let bound = (6.0 / (f_in + f_out) as f64).sqrt() as f32;
            let data: Vec<f32> = (0..f_in * f_out)
                .map(|_| (rng.random::<f32>() * 2.0 - 1.0) * bound)
                .collect();
            weights.push(FeatureMatrix::from_data(f_in, f_out, data)?);
            biases.push(vec![0.0; f_out]);
        }
        Self::new(dims, operator, weights, biases)
    }

    pub fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    /// Update-kernel input width of layer `l`.
    pub fn input_width(&self, l: usize) -> usize {
        self.operator.input_width_factor() * self.dims[l - 1]
    }
}

/// Mutable training state: model parameters, step size, and the forward
/// cache consumed by backward propagation.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub model: ModelSpec,
    pub learning_rate: f32,
    pub(crate) cache: Option<reference::ForwardCache>,
}

impl TrainState {
    pub fn new(model: ModelSpec, learning_rate: f32) -> Self {
        Self {
            model,
            learning_rate,
            cache: None,
        }
    }

    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }
}
