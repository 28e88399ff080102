//! Reconstruction objective and its analytic gradients.
//!
//! For one input `x` the objective is
//! `D = (2/M) sum_y (L^T p)_y e_y` with `e_y = |x - x'(y)|^2`,
//! where reference components outside the raw receptive field are zero.
//! The weight/bias gradients only depend on `e_y` through
//! `p_y (Le)_y - (P^T P L e)_y`, which is blind to any constant added to every
//! `e_y`; gradient code therefore uses the projected error
//! `x'(y) . (x'(y) - 2 x~(y))`.

use crate::error::{Error, Result};
use crate::network::{NetworkParams, Sample};
use crate::posterior::{pmd_posterior, PosteriorState};
use crate::scalar::{norm_sq, Scalar};
use crate::topology::Topology;

/// Derivatives of `D` with the same layout as [`NetworkParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet<T> {
    pub d_weights: Vec<T>,
    pub d_biases: Vec<T>,
    pub d_references: Vec<T>,
}

impl<T: Scalar> GradientSet<T> {
    pub fn zeros_like(params: &NetworkParams<T>) -> Self {
        GradientSet {
            d_weights: vec![T::zero(); params.weights.len()],
            d_biases: vec![T::zero(); params.biases.len()],
            d_references: vec![T::zero(); params.references.len()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d_weights
            .iter()
            .chain(&self.d_biases)
            .chain(&self.d_references)
            .all(|v| v.is_finite())
    }

    /// Adds `scale * other` into `self`.
    pub fn accumulate(&mut self, other: &GradientSet<T>, scale: T) {
        for (a, &b) in self.d_weights.iter_mut().zip(&other.d_weights) {
            *a = *a + scale * b;
        }
        for (a, &b) in self.d_biases.iter_mut().zip(&other.d_biases) {
            *a = *a + scale * b;
        }
        for (a, &b) in self.d_references.iter_mut().zip(&other.d_references) {
            *a = *a + scale * b;
        }
    }

    /// Largest per-neuron Euclidean norm of the weight gradient.
    pub fn max_weight_norm(&self, topo: &Topology<T>) -> T {
        max_block_norm(&self.d_weights, topo)
    }

    pub fn max_reference_norm(&self, topo: &Topology<T>) -> T {
        max_block_norm(&self.d_references, topo)
    }

    pub fn max_bias_abs(&self) -> T {
        self.d_biases.iter().fold(T::zero(), |m, &b| m.max(b.abs()))
    }
}

pub(crate) fn max_block_norm<T: Scalar>(flat: &[T], topo: &Topology<T>) -> T {
    (0..topo.neurons()).fold(T::zero(), |m, y| m.max(norm_sq(&flat[topo.rf_range(y)]).sqrt()))
}

/// The vectors built from `e` on the way to the gradients.
#[derive(Clone, Debug)]
pub struct ErrorIntermediates<T> {
    pub e: Vec<T>,
    /// `(Le)_y = sum over L(y) of L[y][y'] e_y'`.
    pub le: Vec<T>,
    /// `(PLe)_y = sum over N(y) of P[y][y'] (Le)_y'`.
    pub ple: Vec<T>,
    /// `(P^T P L e)_y = sum over N^-1(y) of P[y'][y] (PLe)_y'`.
    pub ptple: Vec<T>,
    /// `(L^T p)_y = sum over L^-1(y) of L[y'][y] p_y'`.
    pub ltp: Vec<T>,
}

impl<T: Scalar> ErrorIntermediates<T> {
    pub fn new(topo: &Topology<T>, state: &PosteriorState<T>, e: Vec<T>) -> Self {
        let m = topo.neurons();
        let leakage = topo.leakage();
        let inhibition = topo.inhibition();
        let le: Vec<T> = (0..m)
            .map(|y| leakage.row(y).map(|(t, w)| w * e[t]).sum())
            .collect();
        let ple: Vec<T> = (0..m)
            .map(|y| {
                inhibition
                    .slots(y)
                    .zip(inhibition.row(y))
                    .map(|(slot, &t)| state.local[slot] * le[t])
                    .sum()
            })
            .collect();
        let ptple = (0..m)
            .map(|y| {
                inhibition
                    .inverse(y)
                    .iter()
                    .map(|&(owner, slot)| state.local[slot] * ple[owner])
                    .sum()
            })
            .collect();
        let ltp = (0..m)
            .map(|y| leakage.column(y).map(|(src, w)| w * state.accumulated[src]).sum())
            .collect();
        ErrorIntermediates {
            e,
            le,
            ple,
            ptple,
            ltp,
        }
    }

    /// `p_y (Le)_y - (P^T P L e)_y` for every neuron.
    pub fn bias_drive(&self, state: &PosteriorState<T>) -> Vec<T> {
        state
            .accumulated
            .iter()
            .zip(&self.le)
            .zip(&self.ptple)
            .map(|((&p, &le), &ptple)| p * le - ptple)
            .collect()
    }
}

/// Projected errors `x'(y) . (x'(y) - 2 x~(y))`; `|x|^2` plus these is `e_y`.
pub fn projected_errors<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    x: &Sample<T>,
) -> Vec<T> {
    let two = T::of(2.0);
    (0..topo.neurons())
        .map(|y| {
            params
                .reference(y)
                .iter()
                .zip(topo.receptive_field(y))
                .fold(T::zero(), |acc, (&r, &i)| acc + r * (r - two * x.0[i]))
        })
        .collect()
}

/// `D` for an input whose posterior has already been computed.
pub fn objective_from_state<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    x: &Sample<T>,
    state: &PosteriorState<T>,
) -> T {
    let energy = norm_sq(x.pixels());
    let projected = projected_errors(params, topo, x);
    let two = T::of(2.0);
    state
        .leaked_posterior
        .iter()
        .zip(&projected)
        .fold(T::zero(), |acc, (&w, &pe)| acc + two * w * (energy + pe))
}

/// Per-sample objective `D(x)`.
pub fn sample_objective<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    x: &Sample<T>,
) -> Result<T> {
    let state = pmd_posterior(params, topo, x)?;
    Ok(objective_from_state(params, topo, x, &state))
}

/// Gradients for a given error vector `e` (projected or full).
pub fn gradients_with_errors<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    x: &Sample<T>,
    state: &PosteriorState<T>,
    e: Vec<T>,
) -> GradientSet<T> {
    let m = topo.neurons();
    let inter = ErrorIntermediates::new(topo, state, e);
    let drive = inter.bias_drive(state);
    let two_over_m = T::of(2.0) / T::of_usize(m);
    let four_over_m = T::of(4.0) / T::of_usize(m);
    let mut grads = GradientSet::zeros_like(params);
    for y in 0..m {
        let d_bias = two_over_m * drive[y] * (T::one() - state.raw[y]);
        grads.d_biases[y] = d_bias;
        let range = topo.rf_range(y);
        let field = topo.receptive_field(y);
        let refs = params.reference(y);
        for (k, slot) in range.enumerate() {
            let xi = x.0[field[k]];
            grads.d_weights[slot] = d_bias * xi;
            grads.d_references[slot] = -four_over_m * inter.ltp[y] * (xi - refs[k]);
        }
    }
    grads
}

/// Analytic per-sample gradients of `D`.
pub fn sample_gradients<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    x: &Sample<T>,
) -> Result<GradientSet<T>> {
    let state = pmd_posterior(params, topo, x)?;
    Ok(gradients_with_errors(
        params,
        topo,
        x,
        &state,
        projected_errors(params, topo, x),
    ))
}

/// Mean objective over a batch, accumulated in sample order.
pub fn batch_objective<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    samples: &[Sample<T>],
) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::Data("empty batch".into()));
    }
    let mut total = T::zero();
    for x in samples {
        total = total + sample_objective(params, topo, x)?;
    }
    Ok(total / T::of_usize(samples.len()))
}

/// Mean gradients over a batch, accumulated in sample order.
pub fn batch_gradients<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    samples: &[Sample<T>],
) -> Result<GradientSet<T>> {
    if samples.is_empty() {
        return Err(Error::Data("empty batch".into()));
    }
    let scale = T::one() / T::of_usize(samples.len());
    let mut total = GradientSet::zeros_like(params);
    for x in samples {
        total.accumulate(&sample_gradients(params, topo, x)?, scale);
    }
    Ok(total)
}
