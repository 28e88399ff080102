use super::*;
use crate::network::{InitScheme, Sample};
use crate::topology::TopologySpec;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn stripes() -> Topology<f64> {
    Topology::build(TopologySpec::stripes_1d()).unwrap()
}

fn grid_2d(rows: usize, cols: usize, retinae: usize) -> Topology<f64> {
    let fit = |n: usize| if n >= 3 { 3 } else { 1 };
    let window = Dims::new(fit(rows), fit(cols));
    Topology::build(TopologySpec {
        grid: Dims::new(rows, cols),
        retina: Dims::new(rows.max(3), cols.max(3)),
        num_retinae: retinae,
        receptive_field: Dims::square(3),
        inhibition: window,
        leakage: window,
        leakage_sigma: (1.0, 1.0),
        wrap: true,
    })
    .unwrap()
}

/// References constant per retina, given per neuron as (left, right).
fn with_references(topo: &Topology<f64>, values: impl Fn(usize) -> (f64, f64)) -> NetworkParams<f64> {
    let mut params = NetworkParams::zeros(topo);
    for y in 0..topo.neurons() {
        let k = topo.rf_per_retina(y);
        let (l, r) = values(y);
        let refs = params.reference_mut(y);
        refs[..k].fill(l);
        refs[k..].fill(r);
    }
    params
}

#[test]
fn zero_references_give_zero_profiles() {
    let topo = stripes();
    let p = ocularity_profile(&NetworkParams::zeros(&topo), &topo).unwrap();
    assert!(p.left.iter().chain(&p.right).all(|&v| v == 0.0));
}

#[test]
fn deviation_is_absolute() {
    let topo = stripes();
    let p = ocularity_profile(&with_references(&topo, |_| (0.5, -0.5)), &topo).unwrap();
    assert!(p.left.iter().chain(&p.right).all(|&v| v == 0.5));
}

#[test]
fn origin_separates_mirrored_retinae() {
    let topo = stripes();
    let params = with_references(&topo, |y| if y % 10 < 5 { (0.2, -0.2) } else { (-0.2, 0.2) });
    let about_zero = ocularity_profile(&params, &topo).unwrap();
    assert_eq!(about_zero.left, about_zero.right);
    let about_floor = ocularity_profile_about(&params, &topo, -0.5).unwrap();
    assert!((about_floor.left[0] - 0.7).abs() < 1e-15);
    assert!((about_floor.right[0] - 0.3).abs() < 1e-15);
    let stats = stripe_stats(&about_floor).unwrap();
    assert_eq!(stats.dominant_period, Some(10.0));
    assert!((stats.antiphase_corr + 1.0).abs() < 1e-12);
}

#[test]
fn single_retina_has_no_ocularity() {
    let topo = grid_2d(4, 4, 1);
    assert!(ocularity_profile(&NetworkParams::zeros(&topo), &topo).is_err());
}

#[test]
fn built_period_six_profile_is_antiphase() {
    let topo = stripes();
    let wave = |y: usize| 0.2 * (2.0 * PI * y as f64 / 6.0).sin();
    let params = with_references(&topo, |y| (0.25 + wave(y), 0.25 - wave(y)));
    let profile = ocularity_profile(&params, &topo).unwrap();
    let stats = stripe_stats(&profile).unwrap();
    assert!((stats.antiphase_corr + 1.0).abs() < 1e-12);
    assert_eq!(stats.dominant_period, Some(6.0));
}

#[test]
fn sine_profile_at_seven_and_a_half() {
    let left: Vec<f64> = (0..30).map(|y| (2.0 * PI * y as f64 / 7.5).sin()).collect();
    let right: Vec<f64> = left.iter().map(|v| -v).collect();
    let stats = stripe_stats(&OcularityProfile { left, right }).unwrap();
    assert!((stats.dominant_period.unwrap() - 7.5).abs() < 1e-12);
    assert!((stats.antiphase_corr + 1.0).abs() < 1e-12);
}

#[test]
fn identical_profiles_have_no_period() {
    let left: Vec<f64> = (0..12).map(|y| (y as f64).sqrt()).collect();
    let stats = stripe_stats(&OcularityProfile { left: left.clone(), right: left }).unwrap();
    assert!((stats.antiphase_corr - 1.0).abs() < 1e-12);
    assert_eq!(stats.amplitude, 0.0);
    assert_eq!(stats.dominant_period, None);
}

#[test]
fn short_profile_is_rejected() {
    let p = OcularityProfile { left: vec![0.0; 7], right: vec![1.0; 7] };
    assert!(matches!(stripe_stats(&p), Err(Error::Analysis(_))));
}

#[test]
fn csv_rows_per_neuron() {
    let p = OcularityProfile { left: vec![0.5, 0.25], right: vec![0.125, 1.0] };
    assert_eq!(p.to_csv(), "index,left,right\n0,0.5,0.125\n1,0.25,1\n");
}

#[test]
fn vertical_stripes_are_reproduced() {
    let topo = grid_2d(6, 12, 2);
    let params = with_references(&topo, |y| if (y % 12) / 3 % 2 == 0 { (0.3, -0.3) } else { (-0.3, 0.3) });
    let map = dominance_map_2d(&params, &topo, -0.5).unwrap();
    for y in 0..72 {
        assert_eq!(map.left[y], (y % 12) / 3 % 2 == 0, "neuron {y}");
    }
    assert_eq!(map.left_fraction(), 0.5);
    let length = map.label_correlation_length().unwrap();
    assert!(length > 1.0, "{length}");
}

#[test]
fn all_left_map_is_uniform() {
    let topo = grid_2d(4, 4, 2);
    let map = dominance_map_2d(&with_references(&topo, |_| (0.4, -0.4)), &topo, -0.5).unwrap();
    assert!(map.left.iter().all(|&l| l));
    assert_eq!(map.label_correlation_length(), None);
    assert!(map.to_image().pixels.iter().all(|&v| v == 1.0));
}

#[test]
fn ties_go_left() {
    let topo = grid_2d(4, 4, 2);
    let map = dominance_map_2d(&NetworkParams::zeros(&topo), &topo, -0.5).unwrap();
    assert!(map.left.iter().all(|&l| l));
}

#[test]
fn checkerboard_has_short_correlation() {
    let map = DominanceMap {
        grid: Dims::new(8, 8),
        left: (0..64).map(|y| (y / 8 + y % 8) % 2 == 0).collect(),
    };
    assert!(map.label_correlation_length().unwrap() < 1.0);
}

#[test]
fn line_grid_has_no_dominance_map() {
    let topo = stripes();
    assert!(dominance_map_2d(&NetworkParams::zeros(&topo), &topo, 0.0).is_err());
}

#[test]
fn constant_tiles_with_separators() {
    let topo = grid_2d(2, 2, 1);
    let mut params = NetworkParams::zeros(&topo);
    params.weights.fill(0.3);
    let Montage::Gray(img) = montage(&params, &topo, MontageSource::Weights).unwrap() else {
        panic!("single retina renders gray");
    };
    assert_eq!((img.width, img.height), (9, 9));
    for r in 0..9 {
        for c in 0..9 {
            let expected = if r % 4 == 0 || c % 4 == 0 { 0.0 } else { 0.5 };
            assert_eq!(img.get(r, c), expected, "({r}, {c})");
        }
    }
}

#[test]
fn tiles_scale_to_unit_range() {
    let topo = grid_2d(3, 3, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = NetworkParams::random(&topo, &InitScheme::default(), &mut rng);
    let Montage::Gray(img) = montage(&params, &topo, MontageSource::References).unwrap() else {
        panic!("single retina renders gray");
    };
    for (gr, gc) in [(0, 0), (1, 2), (2, 1)] {
        let tile: Vec<f64> = (0..3)
            .flat_map(|r| (0..3).map(move |c| (gr * 4 + 1 + r, gc * 4 + 1 + c)))
            .map(|(r, c)| img.get(r, c))
            .collect();
        assert_eq!(tile.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
        assert_eq!(tile.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
    }
}

#[test]
fn two_retina_montage_is_blue_and_yellow() {
    let topo = grid_2d(2, 2, 2);
    let params = with_references(&topo, |_| (1.0, -1.0));
    let Montage::Rgb(img) = montage(&params, &topo, MontageSource::References).unwrap() else {
        panic!("two retinae render colour");
    };
    assert_eq!(img.get(1, 1), [0.0, 0.0, 1.0]);
    assert_eq!(img.get(0, 0), [0.0; 3]);
}

#[test]
fn single_neuron_reconstruction_is_its_reference() {
    let topo = Topology::build(TopologySpec {
        grid: Dims::line(1),
        retina: Dims::line(3),
        num_retinae: 1,
        receptive_field: Dims::line(3),
        inhibition: Dims::line(1),
        leakage: Dims::line(1),
        leakage_sigma: (1.0, 1.0),
        wrap: false,
    })
    .unwrap();
    let mut params = NetworkParams::zeros(&topo);
    params.references.copy_from_slice(&[0.1, -0.2, 0.3]);
    let rec = reconstruct(&params, &topo, &Sample(vec![0.5, 0.5, 0.5])).unwrap();
    assert_eq!(rec.image.0, vec![0.1, -0.2, 0.3]);
    assert_eq!(rec.posterior, vec![1.0]);
}

#[test]
fn zero_references_reconstruct_zero() {
    let topo = stripes();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut params = NetworkParams::random(&topo, &InitScheme::default(), &mut rng);
    params.references.fill(0.0);
    let x = Sample((0..60).map(|i| (i as f64 * 0.1).sin()).collect());
    assert!(reconstruct(&params, &topo, &x).unwrap().image.0.iter().all(|&v| v == 0.0));
}

#[test]
fn reconstruction_is_linear_in_references() {
    let topo = grid_2d(4, 5, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = NetworkParams::random(&topo, &InitScheme::default(), &mut rng);
    let mut b = a.clone();
    let mut sum = a.clone();
    for ((rb, rs), ra) in b.references.iter_mut().zip(&mut sum.references).zip(&a.references) {
        *rb = ra * 0.7 - 0.01;
        *rs = ra + *rb;
    }
    let x = Sample((0..20).map(|i| (i as f64 * 0.3).cos() * 0.4).collect());
    let (ra, rb, rs) = (
        reconstruct(&a, &topo, &x).unwrap(),
        reconstruct(&b, &topo, &x).unwrap(),
        reconstruct(&sum, &topo, &x).unwrap(),
    );
    for i in 0..20 {
        assert!((ra.image.0[i] + rb.image.0[i] - rs.image.0[i]).abs() < 1e-15);
    }
}

#[test]
fn triptych_layout() {
    let topo = stripes();
    let x = Sample((0..60).map(|i| i as f64 / 60.0 - 0.5).collect());
    let rec = reconstruct(&NetworkParams::zeros(&topo), &topo, &x).unwrap();
    let img = triptych(&topo, &x, &rec.posterior, &rec.image);
    assert_eq!((img.width, img.height), (92, 2));
    assert_eq!(img.get(0, 0), 0.0);
    assert_eq!(img.get(1, 29), 1.0);
    let peak = (0..30).map(|c| img.get(0, 31 + c)).fold(0.0, f64::max);
    assert_eq!(peak, 1.0);
}

proptest! {
    #[test]
    fn ocularity_ignores_pixel_order_within_retina(seed in any::<u64>()) {
        let topo = stripes();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = InitScheme { weight_scale: 0.1, bias: 0.0, reference_scale: 0.5 };
        let params = NetworkParams::random(&topo, &init, &mut rng);
        let mut shuffled = params.clone();
        for y in 0..topo.neurons() {
            let k = topo.rf_per_retina(y);
            let refs = shuffled.reference_mut(y);
            refs[..k].shuffle(&mut rng);
            refs[k..].shuffle(&mut rng);
        }
        let a = ocularity_profile_about(&params, &topo, -0.5).unwrap();
        let b = ocularity_profile_about(&shuffled, &topo, -0.5).unwrap();
        for (u, v) in a.left.iter().chain(&a.right).zip(b.left.iter().chain(&b.right)) {
            prop_assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn dominance_map_ignores_positive_scaling(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let topo = grid_2d(5, 6, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = InitScheme { weight_scale: 0.1, bias: 0.0, reference_scale: 0.5 };
        let params = NetworkParams::random(&topo, &init, &mut rng);
        let mut scaled = params.clone();
        scaled.references.iter_mut().for_each(|r| *r *= scale);
        prop_assert_eq!(
            dominance_map_2d(&params, &topo, 0.0).unwrap(),
            dominance_map_2d(&scaled, &topo, 0.0).unwrap()
        );
    }
}
