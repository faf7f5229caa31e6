use proptest::prelude::*;
use tgeom::euclideanity::{check_conditions, gram_determinant, BasisFrame, ConditionReport, ConditionSuite};
use tgeom::{Point, Region, WorldFunction};

fn run(sigma: &WorldFunction, n: usize, region: &Region, seed: u64) -> [ConditionReport; 4] {
    let cloud: Vec<Point> = (0..30).map(|i| region.sobol_point(i, seed)).collect();
    let frame = BasisFrame::new(sigma, cloud[0].clone(), cloud[1..=n].to_vec()).unwrap();
    check_conditions(sigma, n, &cloud, &frame, region, &ConditionSuite::default()).unwrap()
}

fn verdicts(reports: &[ConditionReport; 4]) -> Vec<bool> {
    reports.iter().map(|r| r.passed).collect()
}

#[test]
fn euclidean_spaces_pass_every_condition() {
    for n in 1..=4 {
        let w = WorldFunction::euclidean_identity(n).unwrap();
        let region = Region::cube(n, -5.0, 5.0).unwrap();
        for seed in [1, 2, 3] {
            assert_eq!(
                verdicts(&run(&w, n, &region, seed)),
                vec![true; 4],
                "n = {n}, seed = {seed}"
            );
        }
    }
}

#[test]
fn constant_metric_passes_every_condition() {
    let g = [2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.5];
    let w = WorldFunction::euclidean(3, &g).unwrap();
    let region = Region::cube(3, -5.0, 5.0).unwrap();
    assert_eq!(verdicts(&run(&w, 3, &region, 4)), vec![true; 4]);
}

#[test]
fn minkowski_fails_only_the_signature_condition() {
    let w = WorldFunction::minkowski();
    let region = Region::cube(4, -5.0, 5.0).unwrap();
    for seed in [1, 2, 3] {
        let reports = run(&w, 4, &region, seed);
        assert_eq!(verdicts(&reports), vec![true, true, false, true], "seed = {seed}");
        let negative = reports[2].witness.eigenvalues.iter().filter(|&&l| l < 0.0).count();
        assert_eq!(negative, 3, "{:?}", reports[2].witness.eigenvalues);
    }
}

#[test]
fn sphere_fails_dimension_condition_with_witness() {
    let w = WorldFunction::sphere(1.0).unwrap();
    let band = Region::new(vec![0.5, -1.0], vec![2.6, 1.0]).unwrap();
    for seed in [1, 2, 3] {
        let reports = run(&w, 2, &band, seed);
        assert!(!reports[0].passed, "seed = {seed}");
        assert_eq!(reports[0].witness.points.len(), 4, "{:?}", reports[0].witness);
        assert!(reports[0].witness.max_residual > 1e-8);
    }
}

fn point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-5.0..5.0f64, dim).prop_map(|c| Point::new(c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn determinant_is_invariant_under_relabelling(
        p0 in point(4),
        heads in prop::collection::vec(point(4), 1..5),
        shuffle in any::<prop::sample::Index>(),
        minkowski in any::<bool>(),
    ) {
        let w = if minkowski { WorldFunction::minkowski() } else { WorldFunction::euclidean_identity(4).unwrap() };
        let mut permuted = heads.clone();
        let k = shuffle.index(permuted.len());
        permuted.rotate_left(k);
        permuted.reverse();
        let a = gram_determinant(&w, &p0, &heads).unwrap();
        let b = gram_determinant(&w, &p0, &permuted).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
}
