//! Slow, loop-literal reference implementations.
//!
//! Nothing here is used by training. Neighbourhoods and leakage weights are
//! recomputed from grid coordinates instead of reusing the topology's index
//! lists, so the oracle and the production path only share the parameter
//! layout (which input pixel each weight slot reads).

mod suite;

pub use suite::{
    featureless_brightness, featureless_instance, random_instance, run_suite, CheckResult, GradientPerturbation,
    Instance, VerifyOptions, VerifyReport,
};

use crate::error::{Error, Result};
use crate::network::{NetworkParams, Sample};
use crate::objective::{
    gradients_with_errors, sample_objective, ErrorIntermediates, GradientSet,
};
use crate::posterior::pmd_posterior;
use crate::topology::{Dims, Topology, TopologySpec};

fn coords(y: usize, grid: Dims) -> (isize, isize) {
    ((y / grid.cols) as isize, (y % grid.cols) as isize)
}

fn offset(a: isize, b: isize, extent: usize, wrap: bool) -> isize {
    let d = b - a;
    if !wrap {
        return d;
    }
    let n = extent as isize;
    let d = d.rem_euclid(n);
    if d > n / 2 {
        d - n
    } else {
        d
    }
}

/// Whether neuron `b` lies in the centred `win` window of neuron `a`.
fn in_window(a: usize, b: usize, win: Dims, spec: &TopologySpec) -> bool {
    let (ar, ac) = coords(a, spec.grid);
    let (br, bc) = coords(b, spec.grid);
    let dr = offset(ar, br, spec.grid.rows, spec.wrap);
    let dc = offset(ac, bc, spec.grid.cols, spec.wrap);
    dr.unsigned_abs() <= win.rows / 2 && dc.unsigned_abs() <= win.cols / 2
}

/// Dense `N` membership: `n[a][b]` iff `b` is in `N(a)`.
pub fn dense_inhibition(spec: &TopologySpec) -> Vec<Vec<bool>> {
    let m = spec.grid.len();
    (0..m)
        .map(|a| (0..m).map(|b| in_window(a, b, spec.inhibition, spec)).collect())
        .collect()
}

/// Dense leakage matrix `L[a][b] = Pr(b|a)` from the Gaussian profile.
pub fn dense_leakage(spec: &TopologySpec) -> Vec<Vec<f64>> {
    let m = spec.grid.len();
    let (sr, sc) = spec.leakage_sigma;
    (0..m)
        .map(|a| {
            let row: Vec<f64> = (0..m)
                .map(|b| {
                    if !in_window(a, b, spec.leakage, spec) {
                        return 0.0;
                    }
                    if spec.leakage.len() == 1 {
                        return 1.0;
                    }
                    let (ar, ac) = coords(a, spec.grid);
                    let (br, bc) = coords(b, spec.grid);
                    let dr = offset(ar, br, spec.grid.rows, spec.wrap) as f64;
                    let dc = offset(ac, bc, spec.grid.cols, spec.wrap) as f64;
                    (-dr * dr / (2.0 * sr * sr) - dc * dc / (2.0 * sc * sc)).exp()
                })
                .collect();
            let total: f64 = row.iter().sum();
            row.into_iter().map(|v| v / total).collect()
        })
        .collect()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `Q(x|y)` from dense weight vectors.
fn naive_raw(params: &NetworkParams<f64>, topo: &Topology<f64>, x: &Sample<f64>) -> Vec<f64> {
    let d = topo.input_len();
    (0..topo.neurons())
        .map(|y| {
            let mut w = vec![0.0; d];
            for (&i, &v) in topo.receptive_field(y).iter().zip(params.weight(y)) {
                w[i] = v;
            }
            let mut z = params.biases[y];
            for i in 0..d {
                z += w[i] * x.0[i];
            }
            sigmoid(z)
        })
        .collect()
}

/// Full errors `e_y = |x - x'(y)|^2` with dense, zero-padded references.
pub fn full_errors(params: &NetworkParams<f64>, topo: &Topology<f64>, x: &Sample<f64>) -> Vec<f64> {
    (0..topo.neurons())
        .map(|y| {
            let r = params.dense_reference(topo, y);
            x.0.iter().zip(&r).map(|(a, b)| (a - b) * (a - b)).sum()
        })
        .collect()
}

/// Quadruple-loop transcription of the complete objective.
pub fn naive_objective(params: &NetworkParams<f64>, topo: &Topology<f64>, x: &Sample<f64>) -> f64 {
    let spec = topo.spec();
    let m = topo.neurons();
    let n = dense_inhibition(spec);
    let l = dense_leakage(spec);
    let q = naive_raw(params, topo, x);
    let e = full_errors(params, topo, x);
    let mut total = 0.0;
    for y in 0..m {
        for y1 in 0..m {
            // Pr(y|y1) = L[y1][y]
            let leak = l[y1][y];
            if leak == 0.0 {
                continue;
            }
            let mut inhibition = 0.0;
            for y2 in 0..m {
                if !n[y2][y1] {
                    continue;
                }
                let mut z = 0.0;
                for y3 in 0..m {
                    if n[y2][y3] {
                        z += q[y3];
                    }
                }
                inhibition += 1.0 / z;
            }
            total += leak * q[y1] * inhibition * e[y];
        }
    }
    2.0 * total / m as f64
}

/// Naive posterior `Pr(y|x)` by the same loops (no leakage).
pub fn naive_posterior(params: &NetworkParams<f64>, topo: &Topology<f64>, x: &Sample<f64>) -> Vec<f64> {
    let m = topo.neurons();
    let n = dense_inhibition(topo.spec());
    let q = naive_raw(params, topo, x);
    naive_pmd(&n, &q, m)
}

fn naive_pmd(n: &[Vec<bool>], q: &[f64], m: usize) -> Vec<f64> {
    (0..m)
        .map(|y| {
            let mut acc = 0.0;
            for owner in 0..m {
                if n[owner][y] {
                    let z: f64 = (0..m).filter(|&t| n[owner][t]).map(|t| q[t]).sum();
                    acc += q[y] / z;
                }
            }
            acc / m as f64
        })
        .collect()
}

/// Central finite differences of [`naive_objective`] for every parameter.
pub fn fd_gradients(
    params: &NetworkParams<f64>,
    topo: &Topology<f64>,
    x: &Sample<f64>,
    step: f64,
) -> GradientSet<f64> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let mut grads = GradientSet::zeros_like(params);
    let mut probe = params.clone();
    let mut diff = |class: ParamClass, i: usize| {
        let orig = *class.slot(&mut probe, i);
        *class.slot(&mut probe, i) = orig + step;
        let plus = naive_objective(&probe, topo, x);
        *class.slot(&mut probe, i) = orig - step;
        let minus = naive_objective(&probe, topo, x);
        *class.slot(&mut probe, i) = orig;
        (plus - minus) / (2.0 * step)
    };
    for i in 0..params.weights.len() {
        grads.d_weights[i] = diff(ParamClass::Weight, i);
    }
    for i in 0..params.biases.len() {
        grads.d_biases[i] = diff(ParamClass::Bias, i);
    }
    for i in 0..params.references.len() {
        grads.d_references[i] = diff(ParamClass::Reference, i);
    }
    grads
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamClass {
    Weight,
    Bias,
    Reference,
}

impl ParamClass {
    fn slot(self, params: &mut NetworkParams<f64>, i: usize) -> &mut f64 {
        match self {
            ParamClass::Weight => &mut params.weights[i],
            ParamClass::Bias => &mut params.biases[i],
            ParamClass::Reference => &mut params.references[i],
        }
    }
}

/// Largest componentwise relative error `|a - b| / max(|a|, |b|, floor)`.
pub fn max_relative_error(a: &GradientSet<f64>, b: &GradientSet<f64>, floor: f64) -> f64 {
    let rel = |u: &[f64], v: &[f64]| {
        u.iter()
            .zip(v)
            .map(|(p, q)| (p - q).abs() / p.abs().max(q.abs()).max(floor))
            .fold(0.0, f64::max)
    };
    rel(&a.d_weights, &b.d_weights)
        .max(rel(&a.d_biases, &b.d_biases))
        .max(rel(&a.d_references, &b.d_references))
}

/// Gradients evaluated with the full `e_y` instead of the projected form.
pub fn full_error_gradients(
    params: &NetworkParams<f64>,
    topo: &Topology<f64>,
    x: &Sample<f64>,
) -> Result<GradientSet<f64>> {
    let state = pmd_posterior(params, topo, x)?;
    Ok(gradients_with_errors(params, topo, x, &state, full_errors(params, topo, x)))
}

/// Outcome of adding a constant to every `e_y` before forming the bias drive.
#[derive(Clone, Debug)]
pub struct CancellationReport {
    pub shift: f64,
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks that `p_y (Le)_y - (P^T P L e)_y` ignores a common shift `c` of `e`.
pub fn constant_cancellation_check(
    params: &NetworkParams<f64>,
    topo: &Topology<f64>,
    x: &Sample<f64>,
    c: f64,
) -> Result<CancellationReport> {
    let state = pmd_posterior(params, topo, x)?;
    let e = full_errors(params, topo, x);
    let shifted: Vec<f64> = e.iter().map(|v| v + c).collect();
    let base = ErrorIntermediates::new(topo, &state, e).bias_drive(&state);
    let moved = ErrorIntermediates::new(topo, &state, shifted).bias_drive(&state);
    let max_abs_diff = base
        .iter()
        .zip(&moved)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let tolerance = 1e-10 * c.abs().max(1.0);
    Ok(CancellationReport {
        shift: c,
        max_abs_diff,
        tolerance,
        passed: max_abs_diff <= tolerance,
    })
}

/// Full-network objective against its low-dimensional soft-quantiser reduction.
#[derive(Clone, Debug)]
pub struct SubspaceReport {
    pub subspaces: usize,
    /// Input dimension `d`.
    pub input_len: usize,
    /// Receptive-field size `w` (all retinae together).
    pub field_len: usize,
    /// Mean full-network objective.
    pub full: f64,
    /// Mean outside-field term `sum_s 2 (d_s - w_s) x_s^2`.
    pub outside: f64,
    /// Mean reduced quantiser term `2 sum_y Pr(y) sum_s w_s (x_s - x'_s(y))^2`.
    pub inside: f64,
    /// Mean per-subspace second moment `sum_s x_s^2`.
    pub moment: f64,
    /// Mean quantiser objective `sum_y Pr(y) sum_s (x_s - x'_s(y))^2`.
    pub quantiser: f64,
}

impl SubspaceReport {
    pub fn reduced(&self) -> f64 {
        self.outside + self.inside
    }

    pub fn difference(&self) -> f64 {
        (self.full - self.reduced()).abs()
    }
}

/// Evaluates `D` on featureless inputs and independently through the reduced quantiser.
///
/// Each entry of `brightness` holds one value per retina. Every neuron must
/// see the same number of components (use wrapped windows or a field that
/// covers the retina) and hold a reference that is constant within each
/// retina, which is the setting in which the reduction is exact.
pub fn subspace_reduction_check(
    topo: &Topology<f64>,
    params: &NetworkParams<f64>,
    brightness: &[Vec<f64>],
) -> Result<SubspaceReport> {
    let spec = topo.spec();
    let k = spec.num_retinae;
    let m = topo.neurons();
    let retina_len = spec.retina.len();
    let d = topo.input_len();
    if brightness.is_empty() {
        return Err(Error::Data("no brightness samples".into()));
    }
    if let Some(bad) = brightness.iter().find(|b| b.len() != k) {
        return Err(Error::Data(format!(
            "featureless sample has {} values for {k} retinae",
            bad.len()
        )));
    }
    let per_retina = topo.rf_per_retina(0);
    if (0..m).any(|y| topo.rf_per_retina(y) != per_retina) {
        return Err(Error::Data(
            "receptive fields differ in size; wrap the grid or cover the retina".into(),
        ));
    }
    // Reduced parameters: summed weights and the constant reference per retina.
    let mut gain = vec![vec![0.0; k]; m];
    let mut centre = vec![vec![0.0; k]; m];
    for y in 0..m {
        let w = params.weight(y);
        let r = params.reference(y);
        for s in 0..k {
            let block = s * per_retina..(s + 1) * per_retina;
            gain[y][s] = w[block.clone()].iter().sum();
            let first = r[block.start];
            if r[block.clone()].iter().any(|&v| (v - first).abs() > 1e-12) {
                return Err(Error::Data(format!(
                    "reference of neuron {y} is not constant within retina {s}"
                )));
            }
            centre[y][s] = first;
        }
    }
    let n = dense_inhibition(spec);
    let l = dense_leakage(spec);
    let w_s = per_retina as f64;
    let d_s = retina_len as f64;

    let mut report = SubspaceReport {
        subspaces: k,
        input_len: d,
        field_len: k * per_retina,
        full: 0.0,
        outside: 0.0,
        inside: 0.0,
        moment: 0.0,
        quantiser: 0.0,
    };
    for b in brightness {
        let mut x = Sample::zeros(d);
        for s in 0..k {
            x.0[s * retina_len..(s + 1) * retina_len].fill(b[s]);
        }
        report.full += sample_objective(params, topo, &x)?;

        let q: Vec<f64> = (0..m)
            .map(|y| sigmoid(params.biases[y] + (0..k).map(|s| gain[y][s] * b[s]).sum::<f64>()))
            .collect();
        let post = naive_pmd(&n, &q, m);
        let leaked: Vec<f64> = (0..m)
            .map(|y| (0..m).map(|src| l[src][y] * post[src]).sum())
            .collect();
        let moment: f64 = b.iter().map(|v| v * v).sum();
        let quantiser: f64 = (0..m)
            .map(|y| leaked[y] * (0..k).map(|s| (b[s] - centre[y][s]).powi(2)).sum::<f64>())
            .sum();
        report.outside += 2.0 * (d_s - w_s) * moment;
        report.inside += 2.0 * w_s * quantiser;
        report.moment += moment;
        report.quantiser += quantiser;
    }
    let count = brightness.len() as f64;
    report.full /= count;
    report.outside /= count;
    report.inside /= count;
    report.moment /= count;
    report.quantiser /= count;
    Ok(report)
}
