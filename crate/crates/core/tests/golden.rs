//! Frozen outputs of the exhaustive searches and the Lévy selection chain,
//! cross-checked once against an independent enumeration.

use gridopt::dsm::{brute_force_schedule, generate_dsm_instance, Category, Objective, TariffShape, Weights};
use gridopt::heuristic::{levy_step, LevyParams, RngStream};
use gridopt::idfpa::global_select;
use gridopt::tsp::{brute_force_tsp, TspInstance};

#[test]
fn three_uninterruptible_appliances() {
    let mut inst = generate_dsm_instance(3, 6, TariffShape::Random, 7).unwrap();
    for a in inst.appliances.iter_mut() {
        a.category = Category::Uninterruptible;
        a.window = (0, 5);
    }
    inst.validate().unwrap();
    let obj = Objective::new(&inst, Weights::default(), 10.0).unwrap();
    let best = brute_force_schedule(&inst, &obj).unwrap();
    let starts: Vec<_> = (0..3).map(|a| best.start_of(a).unwrap()).collect();
    assert_eq!(starts, vec![0, 0, 4]);
    let value = obj.evaluate(&best, &inst).unwrap();
    assert!((value - 0.827_084_234_787_872_7).abs() < 1e-12, "{value}");
}

#[test]
fn eight_random_points() {
    let inst = TspInstance::random_euclidean(8, 13).unwrap();
    let best = brute_force_tsp(&inst).unwrap();
    assert_eq!(best.order, vec![0, 1, 6, 3, 5, 2, 4, 7]);
    assert!((best.length - 233.540_590_388_499_08).abs() < 1e-9, "{}", best.length);
}

#[test]
fn uniform_five_node_global_move() {
    // masses 0.0799, 0.2789, 0.2611, 0.2107, 0.1694; the stream's first draw is 0.167
    let mut rng = RngStream::new(2024, 0);
    let node = global_select(&[0, 1, 2, 3, 4], &[0.2; 5], &LevyParams::default(), &mut rng).unwrap();
    assert_eq!(node, 1);
}

#[test]
fn levy_steps_have_heavier_tails_than_gaussian() {
    let mut rng = RngStream::new(99, 0);
    let mut steps = levy_step(&mut rng, 1.5, 100_000).unwrap();
    let far = steps.iter().filter(|s| s.abs() > 10.0).count() as f64 / steps.len() as f64;
    steps.sort_by(f64::total_cmp);
    let q = |p: f64| steps[(p * (steps.len() - 1) as f64) as usize];
    // normal with the same interquartile range
    let sigma = (q(0.75) - q(0.25)) / 1.348_979_5;
    let gaussian = libm::erfc(10.0 / (sigma * std::f64::consts::SQRT_2));
    assert!(far > gaussian, "levy {far} vs gaussian {gaussian}");
    assert!(far > 0.01, "{far}");
}
