//! Adaptive network parameters, input samples and raw sigmoid responses.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::topology::Topology;

/// One input vector `x`: all retinae concatenated, each retina row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T>(pub Vec<T>);

impl<T: Scalar> Sample<T> {
    pub fn zeros(len: usize) -> Self {
        Sample(vec![T::zero(); len])
    }

    pub fn pixels(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Restriction of `x` to neuron `y`'s raw receptive field.
    pub fn restrict(&self, topo: &Topology<T>, y: usize) -> Vec<T> {
        topo.receptive_field(y).iter().map(|&i| self.0[i]).collect()
    }

    pub(crate) fn check(&self, topo: &Topology<T>) -> Result<()> {
        if self.0.len() != topo.input_len() {
            return Err(Error::Shape(format!(
                "sample has {} components, topology expects {}",
                self.0.len(),
                topo.input_len()
            )));
        }
        Ok(())
    }
}

/// Initial parameter distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitScheme {
    /// Weights are drawn from `uniform(-weight_scale, weight_scale)`.
    pub weight_scale: f64,
    /// Common starting bias.
    pub bias: f64,
    /// References are drawn from `uniform(-reference_scale, reference_scale)`.
    pub reference_scale: f64,
}

impl Default for InitScheme {
    fn default() -> Self {
        InitScheme {
            weight_scale: 0.1,
            bias: 0.0,
            reference_scale: 0.01,
        }
    }
}

/// Per-neuron weights `w(y)`, biases `b(y)` and reference vectors `x'(y)`.
///
/// Weights and references share the receptive-field support of each neuron and
/// are stored flat, neuron-major, using the topology's receptive-field offsets.
/// Reference components outside the raw receptive field are implicitly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams<T> {
    offsets: Vec<usize>,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
    pub references: Vec<T>,
}

impl<T: Scalar> NetworkParams<T> {
    pub fn zeros(topo: &Topology<T>) -> Self {
        let offsets = topo.rf_offsets().to_vec();
        let total = *offsets.last().unwrap_or(&0);
        NetworkParams {
            offsets,
            weights: vec![T::zero(); total],
            biases: vec![T::zero(); topo.neurons()],
            references: vec![T::zero(); total],
        }
    }

    pub fn random<R: Rng + ?Sized>(topo: &Topology<T>, init: &InitScheme, rng: &mut R) -> Self {
        let mut params = Self::zeros(topo);
        for w in &mut params.weights {
            *w = T::of(init.weight_scale * (2.0 * rng.gen::<f64>() - 1.0));
        }
        for b in &mut params.biases {
            *b = T::of(init.bias);
        }
        for r in &mut params.references {
            *r = T::of(init.reference_scale * (2.0 * rng.gen::<f64>() - 1.0));
        }
        params
    }

    /// Builds parameters from flat arrays laid out like `topo`'s receptive fields.
    pub fn from_parts(
        topo: &Topology<T>,
        weights: Vec<T>,
        biases: Vec<T>,
        references: Vec<T>,
    ) -> Result<Self> {
        let params = NetworkParams {
            offsets: topo.rf_offsets().to_vec(),
            weights,
            biases,
            references,
        };
        params.check(topo)?;
        Ok(params)
    }

    pub fn neurons(&self) -> usize {
        self.biases.len()
    }

    pub fn weight(&self, y: usize) -> &[T] {
        &self.weights[self.offsets[y]..self.offsets[y + 1]]
    }

    pub fn weight_mut(&mut self, y: usize) -> &mut [T] {
        &mut self.weights[self.offsets[y]..self.offsets[y + 1]]
    }

    pub fn reference(&self, y: usize) -> &[T] {
        &self.references[self.offsets[y]..self.offsets[y + 1]]
    }

    pub fn reference_mut(&mut self, y: usize) -> &mut [T] {
        &mut self.references[self.offsets[y]..self.offsets[y + 1]]
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.biases)
            .chain(&self.references)
            .all(|v| v.is_finite())
    }

    /// Reference vector of `y` expanded to the full input dimension.
    pub fn dense_reference(&self, topo: &Topology<T>, y: usize) -> Vec<T> {
        let mut full = vec![T::zero(); topo.input_len()];
        for (&i, &v) in topo.receptive_field(y).iter().zip(self.reference(y)) {
            full[i] = v;
        }
        full
    }

    pub(crate) fn check(&self, topo: &Topology<T>) -> Result<()> {
        let expected = topo.rf_offsets();
        let total = *expected.last().unwrap_or(&0);
        if self.offsets != expected
            || self.weights.len() != total
            || self.references.len() != total
            || self.biases.len() != topo.neurons()
        {
            return Err(Error::Shape(format!(
                "parameters ({} neurons, {} rf components) do not match topology ({} neurons, {} rf components)",
                self.biases.len(),
                self.weights.len(),
                topo.neurons(),
                total
            )));
        }
        Ok(())
    }
}

/// Raw response `Q(x|y) = sigmoid(w(y) . x~(y) + b(y))`.
pub fn raw_response<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    x: &Sample<T>,
    y: usize,
) -> T {
    let field = topo.receptive_field(y);
    let activation = params
        .weight(y)
        .iter()
        .zip(field)
        .fold(params.biases[y], |acc, (&w, &i)| acc + w * x.0[i]);
    T::sigmoid(activation)
}
