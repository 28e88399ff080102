//! On-line gradient following with per-class step normalisation.
//!
//! Every update rescales the negative gradient of each parameter class so the
//! largest per-neuron change is exactly the requested step: `|dw(y)|` for
//! weights, `|db(y)|` for biases and `|dx'(y)|` for references, the last one
//! using three times the step.

use crate::data::SampleSource;
use crate::error::{Error, Result};
use crate::network::{NetworkParams, Sample};
use crate::objective::{gradients_with_errors, objective_from_state, projected_errors, GradientSet};
use crate::posterior::pmd_posterior;
use crate::scalar::Scalar;
use crate::topology::Topology;

/// Reference vectors move this many times faster than weights and biases.
pub const REFERENCE_STEP_FACTOR: f64 = 3.0;

/// Adaptive rates and progress of a training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainerState<T> {
    pub step_size: T,
    pub rate_w: T,
    pub rate_b: T,
    pub rate_x: T,
    pub updates_done: usize,
    pub rng_seed: u64,
}

impl<T: Scalar> TrainerState<T> {
    pub fn new(step_size: T, rng_seed: u64) -> Self {
        TrainerState {
            step_size,
            rate_w: step_size,
            rate_b: step_size,
            rate_x: step_size,
            updates_done: 0,
            rng_seed,
        }
    }
}

/// One stage of a training schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Phase {
    pub updates: usize,
    pub step_size: f64,
    pub leakage_sigma: (f64, f64),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Schedule {
    pub phases: Vec<Phase>,
}

impl Schedule {
    pub fn total_updates(&self) -> usize {
        self.phases.iter().map(|p| p.updates).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.phases.iter().enumerate() {
            if p.updates == 0 || !(p.step_size > 0.0) || !p.step_size.is_finite() {
                return Err(Error::ConfigValue(format!(
                    "phase {} needs a positive update count and step size",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Applies `params[slots] -= rate * grads[slots]` where `rate` maps the
/// largest change to `target`. Returns the rate, or `None` for a zero gradient.
fn scaled_descent<T: Scalar>(values: &mut [T], grads: &[T], largest: T, target: T) -> Option<T> {
    if !(largest > T::zero()) {
        return None;
    }
    let rate = target / largest;
    for (v, &g) in values.iter_mut().zip(grads) {
        *v = *v - rate * g;
    }
    Some(rate)
}

/// Applies an already computed gradient with the step-normalisation rule.
pub fn apply_update<T: Scalar>(
    params: &mut NetworkParams<T>,
    topo: &Topology<T>,
    state: &mut TrainerState<T>,
    grads: &GradientSet<T>,
) {
    let eps = state.step_size;
    if let Some(r) = scaled_descent(&mut params.weights, &grads.d_weights, grads.max_weight_norm(topo), eps) {
        state.rate_w = r;
    }
    if let Some(r) = scaled_descent(&mut params.biases, &grads.d_biases, grads.max_bias_abs(), eps) {
        state.rate_b = r;
    }
    let ref_step = eps * T::of(REFERENCE_STEP_FACTOR);
    if let Some(r) = scaled_descent(
        &mut params.references,
        &grads.d_references,
        grads.max_reference_norm(topo),
        ref_step,
    ) {
        state.rate_x = r;
    }
    state.updates_done += 1;
}

/// One on-line update from sample `x`. Returns `D(x)` before the update.
pub fn train_step<T: Scalar>(
    params: &mut NetworkParams<T>,
    topo: &Topology<T>,
    state: &mut TrainerState<T>,
    x: &Sample<T>,
) -> Result<T> {
    let post = pmd_posterior(params, topo, x)?;
    let objective = objective_from_state(params, topo, x, &post);
    let grads = gradients_with_errors(params, topo, x, &post, projected_errors(params, topo, x));
    if !grads.is_finite() {
        return Err(Error::NonFinite {
            what: "gradient",
            update: state.updates_done,
        });
    }
    apply_update(params, topo, state, &grads);
    if !params.is_finite() {
        return Err(Error::NonFinite {
            what: "parameter",
            update: state.updates_done,
        });
    }
    Ok(objective)
}

/// Mean objective over one logging window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub phase: usize,
    /// Global update count at the end of the window.
    pub update: usize,
    pub mean_objective: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub trace: Vec<TraceEntry>,
}

impl TrainReport {
    pub fn phase(&self, phase: usize) -> impl Iterator<Item = &TraceEntry> {
        self.trace.iter().filter(move |e| e.phase == phase)
    }
}

/// Runs every phase of `schedule`, drawing one sample per update.
///
/// The leakage kernel of `topo` is rebuilt at the start of each phase and is
/// left at the last phase's width. `on_window` sees each completed logging
/// window.
pub fn train<T, S, F>(
    params: &mut NetworkParams<T>,
    topo: &mut Topology<T>,
    schedule: &Schedule,
    source: &mut S,
    state: &mut TrainerState<T>,
    log_interval: usize,
    mut on_window: F,
) -> Result<TrainReport>
where
    T: Scalar,
    S: SampleSource<T> + ?Sized,
    F: FnMut(&TraceEntry),
{
    schedule.validate()?;
    params.check(topo)?;
    if source.input_len() != topo.input_len() {
        return Err(Error::Shape(format!(
            "data source yields {} components, topology expects {}",
            source.input_len(),
            topo.input_len()
        )));
    }
    let log_interval = log_interval.max(1);
    let mut report = TrainReport::default();
    for (index, phase) in schedule.phases.iter().enumerate() {
        topo.set_leakage_sigma(phase.leakage_sigma)?;
        state.step_size = T::of(phase.step_size);
        let mut window_sum = 0.0;
        let mut window_len = 0usize;
        for done in 1..=phase.updates {
            let x = source.next_sample()?;
            window_sum += train_step(params, topo, state, &x)?.as_f64();
            window_len += 1;
            if done % log_interval == 0 || done == phase.updates {
                let entry = TraceEntry {
                    phase: index,
                    update: state.updates_done,
                    mean_objective: window_sum / window_len as f64,
                };
                on_window(&entry);
                report.trace.push(entry);
                window_sum = 0.0;
                window_len = 0;
            }
        }
    }
    Ok(report)
}
