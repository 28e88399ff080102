//! Partitioned-mixture posterior: local softmax per inhibition window, averaged over windows.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{raw_response, NetworkParams, Sample};
use crate::scalar::Scalar;
use crate::topology::Topology;

/// Networks smaller than this are evaluated on the calling thread.
pub(crate) const PARALLEL_MIN_NEURONS: usize = 256;

/// Everything the posterior computation produces for one input.
#[derive(Clone, Debug)]
pub struct PosteriorState<T> {
    /// Raw responses `Q(x|y)`.
    pub raw: Vec<T>,
    /// Inhibition sums `Z(y) = sum over N(y) of Q`.
    pub inhibition_sums: Vec<T>,
    /// Local posteriors `P[y][y'] = Pr(y'|x; y)`, stored aligned with the inhibition rows.
    pub local: Vec<T>,
    /// `p_y = sum over N^-1(y) of P[y'][y]`; sums to `M`.
    pub accumulated: Vec<T>,
    /// `Pr(y|x) = p_y / M`.
    pub posterior: Vec<T>,
    /// `sum_y' Pr(y|y') Pr(y'|x)`.
    pub leaked_posterior: Vec<T>,
}

impl<T: Scalar> PosteriorState<T> {
    /// Local row `P[y][.]`, aligned with `topo.inhibition().row(y)`.
    pub fn local_row<'a>(&'a self, topo: &Topology<T>, y: usize) -> &'a [T] {
        &self.local[topo.inhibition().slots(y)]
    }
}

pub(crate) fn raw_responses<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    x: &Sample<T>,
) -> Vec<T> {
    let m = topo.neurons();
    if m >= PARALLEL_MIN_NEURONS {
        (0..m)
            .into_par_iter()
            .with_min_len(64)
            .map(|y| raw_response(params, topo, x, y))
            .collect()
    } else {
        (0..m).map(|y| raw_response(params, topo, x, y)).collect()
    }
}

/// Posterior state built from externally supplied raw responses.
///
/// `pmd_posterior` is this applied to the sigmoid responses; tests use it to
/// set `Q` directly.
pub fn posterior_from_raw<T: Scalar>(topo: &Topology<T>, raw: Vec<T>) -> Result<PosteriorState<T>> {
    let m = topo.neurons();
    if raw.len() != m {
        return Err(Error::Shape(format!("{} raw responses for {m} neurons", raw.len())));
    }
    let inhibition = topo.inhibition();
    let mut inhibition_sums = Vec::with_capacity(m);
    let mut local = vec![T::zero(); inhibition.nnz()];
    for y in 0..m {
        let z: T = inhibition.row(y).iter().map(|&t| raw[t]).sum();
        if !(z > T::zero()) || !z.is_finite() {
            return Err(Error::DegenerateResponse {
                neuron: y,
                value: z.as_f64(),
            });
        }
        for (slot, &t) in inhibition.slots(y).zip(inhibition.row(y)) {
            local[slot] = raw[t] / z;
        }
        inhibition_sums.push(z);
    }
    let accumulated: Vec<T> = (0..m)
        .map(|y| inhibition.inverse(y).iter().map(|&(_, slot)| local[slot]).sum())
        .collect();
    let scale = T::of_usize(m);
    let posterior: Vec<T> = accumulated.iter().map(|&p| p / scale).collect();
    let leakage = topo.leakage();
    let leaked_posterior = (0..m)
        .map(|y| leakage.column(y).map(|(src, w)| w * posterior[src]).sum())
        .collect();
    Ok(PosteriorState {
        raw,
        inhibition_sums,
        local,
        accumulated,
        posterior,
        leaked_posterior,
    })
}

/// Computes the partitioned-mixture posterior field for input `x`.
pub fn pmd_posterior<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    x: &Sample<T>,
) -> Result<PosteriorState<T>> {
    params.check(topo)?;
    x.check(topo)?;
    posterior_from_raw(topo, raw_responses(params, topo, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::InitScheme;
    use crate::topology::{Dims, TopologySpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(m: usize, n: usize, l: usize, wrap: bool) -> Topology<f64> {
        Topology::build(TopologySpec {
            grid: Dims::line(m),
            retina: Dims::line(m),
            num_retinae: 1,
            receptive_field: Dims::line(1),
            inhibition: Dims::line(n),
            leakage: Dims::line(l),
            leakage_sigma: (1.0, 1.0),
            wrap,
        })
        .unwrap()
    }

    #[test]
    fn hand_set_responses_match_nested_loops() {
        let topo = line(4, 3, 1, false);
        let q = vec![0.1, 0.2, 0.3, 0.4];
        let state = posterior_from_raw(&topo, q.clone()).unwrap();
        // Windows: {0,1}, {0,1,2}, {1,2,3}, {2,3}.
        let windows: [&[usize]; 4] = [&[0, 1], &[0, 1, 2], &[1, 2, 3], &[2, 3]];
        for y in 0..4 {
            let mut acc = 0.0;
            for w in &windows {
                if w.contains(&y) {
                    acc += q[y] / w.iter().map(|&t| q[t]).sum::<f64>();
                }
            }
            assert!((state.posterior[y] - acc / 4.0).abs() < 1e-15);
        }
        // Frozen from the loops above: (1/4) * [0.1/0.3 + 0.1/0.6, ...].
        assert!((state.posterior[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn equal_responses_on_torus_are_uniform() {
        let topo = line(9, 3, 3, true);
        let state = posterior_from_raw(&topo, vec![0.5; 9]).unwrap();
        for p in &state.posterior {
            assert!((p - 1.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn whole_grid_window_is_global_softmax() {
        let topo = line(7, 7, 3, true);
        let q = vec![0.05, 0.9, 0.3, 0.3, 0.6, 0.11, 0.42];
        let total: f64 = q.iter().sum();
        let state = posterior_from_raw(&topo, q.clone()).unwrap();
        for y in 0..7 {
            assert!((state.posterior[y] - q[y] / total).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_inhibition_sum_is_degenerate() {
        let topo = line(5, 3, 1, false);
        let err = posterior_from_raw(&topo, vec![0.0, 0.0, 0.0, 0.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::DegenerateResponse { neuron: 0, .. }));
    }

    #[test]
    fn raising_one_response_inhibits_neighbours() {
        let topo = line(10, 5, 1, false);
        let base = vec![0.3, 0.4, 0.5, 0.2, 0.6, 0.7, 0.1, 0.5, 0.4, 0.3];
        let before = posterior_from_raw(&topo, base.clone()).unwrap();
        let mut raised = base;
        raised[4] = 0.95;
        let after = posterior_from_raw(&topo, raised).unwrap();
        assert!(after.posterior[4] > before.posterior[4]);
        for y in [2, 3, 5, 6] {
            assert!(after.posterior[y] < before.posterior[y], "neuron {y}");
        }
        // Too far to share any inhibition window.
        assert_eq!(after.posterior[9], before.posterior[9]);
    }

    proptest! {
        #[test]
        fn posterior_and_leaked_posterior_normalised(
            seed in any::<u64>(),
            m in 3usize..20,
            n_half in 0usize..3,
            l_half in 0usize..3,
            wrap in any::<bool>(),
        ) {
            let n = (2 * n_half + 1).min(if m % 2 == 1 { m } else { m - 1 });
            let l = (2 * l_half + 1).min(if m % 2 == 1 { m } else { m - 1 });
            let topo = Topology::<f64>::build(TopologySpec {
                grid: Dims::line(m),
                retina: Dims::line(m),
                num_retinae: 2,
                receptive_field: Dims::line(3.min(if m % 2 == 1 { m } else { m - 1 })),
                inhibition: Dims::line(n),
                leakage: Dims::line(l),
                leakage_sigma: (0.8, 0.8),
                wrap,
            }).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let init = InitScheme { weight_scale: 2.0, bias: 0.0, reference_scale: 0.5 };
            let params = NetworkParams::random(&topo, &init, &mut rng);
            let x = Sample((0..topo.input_len()).map(|i| ((i as f64) * 0.37 + seed as f64 * 1e-3).sin()).collect());
            let state = pmd_posterior(&params, &topo, &x).unwrap();
            let total: f64 = state.posterior.iter().sum();
            let leaked: f64 = state.leaked_posterior.iter().sum();
            let acc: f64 = state.accumulated.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!((leaked - 1.0).abs() < 1e-12);
            prop_assert!((acc - m as f64).abs() < 1e-10);
            for y in 0..m {
                let row: f64 = state.local_row(&topo, y).iter().sum();
                prop_assert!((row - 1.0).abs() < 1e-12);
                prop_assert!(state.raw[y] > 0.0 && state.raw[y] < 1.0);
            }
        }
    }
}
