//! The verification table printed by `vicon verify`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    constant_cancellation_check, fd_gradients, full_error_gradients,
    naive_objective, subspace_reduction_check, ParamClass,
};
use crate::error::Result;
use crate::network::{InitScheme, NetworkParams, Sample};
use crate::objective::{sample_gradients, sample_objective, GradientSet};
use crate::posterior::pmd_posterior;
use crate::topology::{Dims, Topology, TopologySpec};

/// Finite-difference step used throughout the suite.
pub const FD_STEP: f64 = 1e-5;
/// Gradient components smaller than this are compared absolutely.
pub const FD_FLOOR: f64 = 1e-4;
pub const FD_TOLERANCE: f64 = 1e-5;
pub const EXACT_TOLERANCE: f64 = 1e-12;
pub const REARRANGED_TOLERANCE: f64 = 1e-10;

/// Deliberate corruption of one analytic gradient component (negative control).
#[derive(Clone, Copy, Debug)]
pub struct GradientPerturbation {
    pub class: ParamClass,
    pub index: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub perturb: Option<GradientPerturbation>,
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<4} {:<28} {}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// A small random network and input.
#[derive(Clone, Debug)]
pub struct Instance {
    pub topo: Topology<f64>,
    pub params: NetworkParams<f64>,
    pub x: Sample<f64>,
}

/// Random 1-D or 2-D network with 8 to 16 neurons, RF 3 and windows of 3 or 5.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_d = rng.gen_bool(0.3);
    let (grid, rf, window) = if two_d {
        let rows = rng.gen_range(3..=4);
        let cols = rng.gen_range(3..=4);
        let w = |rng: &mut ChaCha8Rng| Dims::new(3, if rng.gen_bool(0.5) { 3 } else { 1 });
        (Dims::new(rows, cols), Dims::square(3), w(&mut rng))
    } else {
        let m = rng.gen_range(8..=16);
        let w = if rng.gen_bool(0.5) { 3 } else { 5 };
        (Dims::line(m), Dims::line(3), Dims::line(w))
    };
    let leakage = if rng.gen_bool(0.5) { window } else { Dims::new(window.rows.min(3), 3) };
    let sigma = rng.gen_range(0.5..1.5);
    let spec = TopologySpec {
        grid,
        retina: grid,
        num_retinae: rng.gen_range(1..=2),
        receptive_field: rf,
        inhibition: window,
        leakage,
        leakage_sigma: (sigma, sigma),
        wrap: rng.gen_bool(0.5),
    };
    let topo = Topology::build(spec).expect("random instance geometry is valid");
    let init = InitScheme {
        weight_scale: 1.5,
        bias: 0.0,
        reference_scale: 0.6,
    };
    let mut params = NetworkParams::random(&topo, &init, &mut rng);
    for b in &mut params.biases {
        *b = rng.gen_range(-1.0..1.0);
    }
    let x = Sample((0..topo.input_len()).map(|_| rng.gen_range(-0.5..0.5)).collect());
    Instance { topo, params, x }
}

fn perturbed(mut grads: GradientSet<f64>, p: Option<GradientPerturbation>) -> GradientSet<f64> {
    if let Some(p) = p {
        let target = match p.class {
            ParamClass::Weight => grads.d_weights.get_mut(p.index),
            ParamClass::Bias => grads.d_biases.get_mut(p.index),
            ParamClass::Reference => grads.d_references.get_mut(p.index),
        };
        if let Some(v) = target {
            *v += p.delta;
        }
    }
    grads
}

/// Worst relative error and the component it occurred in.
fn worst_component(
    topo: &Topology<f64>,
    analytic: &GradientSet<f64>,
    numeric: &GradientSet<f64>,
) -> (f64, String) {
    let mut worst = (0.0, String::from("none"));
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(FD_FLOOR);
    let locate = |slot: usize| {
        let y = (0..topo.neurons())
            .find(|&y| topo.rf_range(y).contains(&slot))
            .unwrap_or(0);
        (y, slot - topo.rf_range(y).start)
    };
    for (i, (&a, &b)) in analytic.d_weights.iter().zip(&numeric.d_weights).enumerate() {
        if rel(a, b) > worst.0 {
            let (y, k) = locate(i);
            worst = (rel(a, b), format!("d_weights[neuron {y}, component {k}]"));
        }
    }
    for (y, (&a, &b)) in analytic.d_biases.iter().zip(&numeric.d_biases).enumerate() {
        if rel(a, b) > worst.0 {
            worst = (rel(a, b), format!("d_biases[neuron {y}]"));
        }
    }
    for (i, (&a, &b)) in analytic.d_references.iter().zip(&numeric.d_references).enumerate() {
        if rel(a, b) > worst.0 {
            let (y, k) = locate(i);
            worst = (rel(a, b), format!("d_references[neuron {y}, component {k}]"));
        }
    }
    worst
}

fn gradient_check(opts: &VerifyOptions) -> Result<CheckResult> {
    let mut worst = (0.0, String::new(), 0u64);
    for seed in 0..20u64 {
        let inst = random_instance(seed);
        let analytic = perturbed(sample_gradients(&inst.params, &inst.topo, &inst.x)?, opts.perturb);
        let numeric = fd_gradients(&inst.params, &inst.topo, &inst.x, FD_STEP);
        let (err, at) = worst_component(&inst.topo, &analytic, &numeric);
        if err > worst.0 {
            worst = (err, at, seed);
        }
    }
    Ok(CheckResult {
        name: "gradient vs finite diff",
        passed: worst.0 < FD_TOLERANCE,
        detail: format!(
            "20 instances, max rel err {:.2e} at {} (seed {})",
            worst.0, worst.1, worst.2
        ),
    })
}

fn normalisation_check() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let inst = random_instance(1_000 + seed);
        let state = pmd_posterior(&inst.params, &inst.topo, &inst.x)?;
        let total: f64 = state.posterior.iter().sum();
        let leaked: f64 = state.leaked_posterior.iter().sum();
        worst = worst.max((total - 1.0).abs()).max((leaked - 1.0).abs());
    }
    Ok(CheckResult {
        name: "posterior normalisation",
        passed: worst <= EXACT_TOLERANCE,
        detail: format!("100 instances, max |sum - 1| {worst:.2e}"),
    })
}

fn equivalence_check() -> Result<Vec<CheckResult>> {
    let mut obj_err: f64 = 0.0;
    let mut proj_err: f64 = 0.0;
    for seed in 0..50u64 {
        let inst = random_instance(2_000 + seed);
        let fast = sample_objective(&inst.params, &inst.topo, &inst.x)?;
        let slow = naive_objective(&inst.params, &inst.topo, &inst.x);
        obj_err = obj_err.max((fast - slow).abs());

        let projected = sample_gradients(&inst.params, &inst.topo, &inst.x)?;
        let full = full_error_gradients(&inst.params, &inst.topo, &inst.x)?;
        for (a, b) in projected
            .d_biases
            .iter()
            .zip(&full.d_biases)
            .chain(projected.d_weights.iter().zip(&full.d_weights))
        {
            proj_err = proj_err.max((a - b).abs());
        }
    }
    Ok(vec![
        CheckResult {
            name: "objective vs naive loops",
            passed: obj_err <= EXACT_TOLERANCE,
            detail: format!("50 instances, max |diff| {obj_err:.2e}"),
        },
        CheckResult {
            name: "projected vs full errors",
            passed: proj_err <= REARRANGED_TOLERANCE,
            detail: format!("50 instances, max |diff| {proj_err:.2e}"),
        },
    ])
}

/// Wrapped featureless-input network with references constant per retina.
pub fn featureless_instance(
    seed: u64,
    retinae: usize,
    len: usize,
    rf: usize,
) -> (Topology<f64>, NetworkParams<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = TopologySpec {
        grid: Dims::line(len),
        retina: Dims::line(len),
        num_retinae: retinae,
        receptive_field: Dims::line(rf),
        inhibition: Dims::line(5),
        leakage: Dims::line(3),
        leakage_sigma: (1.0, 1.0),
        wrap: true,
    };
    let topo = Topology::build(spec).expect("featureless geometry is valid");
    let init = InitScheme {
        weight_scale: 1.0,
        bias: 0.0,
        reference_scale: 0.0,
    };
    let mut params = NetworkParams::random(&topo, &init, &mut rng);
    for y in 0..topo.neurons() {
        params.biases[y] = rng.gen_range(-1.0..1.0);
        let per = topo.rf_per_retina(y);
        let values: Vec<f64> = (0..retinae).map(|_| rng.gen_range(-0.5..0.5)).collect();
        for (k, r) in params.reference_mut(y).iter_mut().enumerate() {
            *r = values[k / per];
        }
    }
    (topo, params)
}

pub fn featureless_brightness(seed: u64, retinae: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..retinae).map(|_| rng.gen_range(-0.5..0.5)).collect())
        .collect()
}

fn subspace_check() -> Result<Vec<CheckResult>> {
    let (topo, params) = featureless_instance(7, 1, 12, 5);
    let one = subspace_reduction_check(&topo, &params, &featureless_brightness(8, 1, 64))?;
    // Field covering the whole input: D = d * (2 sum_y Pr(y) (x1 - x1'(y))^2).
    let (topo, params) = featureless_instance(9, 1, 11, 11);
    let whole = subspace_reduction_check(&topo, &params, &featureless_brightness(10, 1, 64))?;
    let scalar_form = whole.input_len as f64 * 2.0 * whole.quantiser;
    let (topo2, params2) = featureless_instance(11, 2, 12, 5);
    let two = subspace_reduction_check(&topo2, &params2, &featureless_brightness(12, 2, 64))?;
    let d = two.input_len as f64;
    let w = two.field_len as f64;
    let reduced_form = (d - w) * two.moment + w * two.quantiser;
    Ok(vec![
        CheckResult {
            name: "one-subspace reduction",
            passed: one.difference() <= REARRANGED_TOLERANCE
                && (whole.full - scalar_form).abs() <= REARRANGED_TOLERANCE,
            detail: format!(
                "|D - reduced| {:.2e}, |D - d*D_scalar| {:.2e}",
                one.difference(),
                (whole.full - scalar_form).abs()
            ),
        },
        CheckResult {
            name: "two-subspace reduction",
            passed: (two.full - reduced_form).abs() <= REARRANGED_TOLERANCE,
            detail: format!(
                "|D - ((d-w) moment + w D_2d)| {:.2e} (d={}, w={})",
                (two.full - reduced_form).abs(),
                two.input_len,
                two.field_len
            ),
        },
    ])
}

fn cancellation_check() -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let shifts = [0.0, 1e6]
        .into_iter()
        .chain((0..100).map(|_| rng.gen_range(-1e3..1e3)));
    for (trial, c) in shifts.enumerate() {
        let inst = random_instance(3_000 + trial as u64);
        let report = constant_cancellation_check(&inst.params, &inst.topo, &inst.x, c)?;
        worst = worst.max(report.max_abs_diff / report.tolerance);
        if !report.passed {
            failures += 1;
        }
    }
    Ok(CheckResult {
        name: "constant cancellation",
        passed: failures == 0,
        detail: format!("102 shifts, worst diff/tolerance {worst:.2e}"),
    })
}

/// Runs every oracle comparison and collects the outcomes.
pub fn run_suite(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = vec![gradient_check(opts)?, normalisation_check()?];
    checks.extend(equivalence_check()?);
    checks.extend(subspace_check()?);
    checks.push(cancellation_check()?);
    Ok(VerifyReport { checks })
}
