use proptest::prelude::*;
use tgeom::riemannian::MetricField;
use tgeom::sigma::{
    collinearity_surface_residual, is_collinear, is_parallel, scalar_product, squared_norm, PointPairVector,
};
use tgeom::{Point, WorldFunction};

fn point(dim: usize, lo: f64, hi: f64) -> impl Strategy<Value = Point> {
    prop::collection::vec(lo..hi, dim).prop_map(|c| Point::new(c).unwrap())
}

fn vector(a: &Point, b: &Point) -> PointPairVector {
    PointPairVector::new(a.clone(), b.clone()).unwrap()
}

/// World function and a strategy for points inside its chart.
fn geometry(which: usize) -> (WorldFunction, BoxedStrategy<Point>) {
    match which {
        0 => (
            WorldFunction::euclidean_identity(3).unwrap(),
            point(3, -10.0, 10.0).boxed(),
        ),
        1 => (WorldFunction::minkowski(), point(4, -10.0, 10.0).boxed()),
        2 => (
            WorldFunction::distorted_minkowski(0.01, 0.005).unwrap(),
            point(4, -10.0, 10.0).boxed(),
        ),
        3 => (
            WorldFunction::sphere(1.0).unwrap(),
            (0.2..2.9f64, -3.1..3.1f64)
                .prop_map(|(t, p)| Point::new(vec![t, p]).unwrap())
                .boxed(),
        ),
        _ => (
            WorldFunction::from_metric(MetricField::flat(2).unwrap()),
            point(2, -3.0, 3.0).boxed(),
        ),
    }
}

fn quadruple(which: usize) -> impl Strategy<Value = (usize, [Point; 5])> {
    let (_, s) = geometry(which);
    (s.clone(), s.clone(), s.clone(), s.clone(), s).prop_map(move |(a, b, c, d, e)| (which, [a, b, c, d, e]))
}

fn any_geometry() -> impl Strategy<Value = (usize, [Point; 5])> {
    prop_oneof![quadruple(0), quadruple(1), quadruple(2), quadruple(3), quadruple(4)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn symmetry_is_exact((which, p) in any_geometry()) {
        let (w, _) = geometry(which);
        let (a, b) = (vector(&p[0], &p[1]), vector(&p[2], &p[3]));
        prop_assert_eq!(
            scalar_product(&w, &a, &b).unwrap().to_bits(),
            scalar_product(&w, &b, &a).unwrap().to_bits()
        );
    }

    #[test]
    fn antisymmetry_is_exact((which, p) in any_geometry()) {
        let (w, _) = geometry(which);
        let (a, b) = (vector(&p[0], &p[1]), vector(&p[2], &p[3]));
        prop_assert_eq!(
            scalar_product(&w, &a.reversed(), &b).unwrap().to_bits(),
            (-scalar_product(&w, &a, &b).unwrap()).to_bits()
        );
    }

    #[test]
    fn additivity_within_eight_ulp((which, p) in any_geometry()) {
        let (w, _) = geometry(which);
        let b = vector(&p[3], &p[4]);
        let s01 = scalar_product(&w, &vector(&p[0], &p[1]), &b).unwrap();
        let s12 = scalar_product(&w, &vector(&p[1], &p[2]), &b).unwrap();
        let s02 = scalar_product(&w, &vector(&p[0], &p[2]), &b).unwrap();
        // Largest term: the world-function values entering the three products.
        let mut largest: f64 = 0.0;
        for i in 0..3 {
            for j in 3..5 {
                largest = largest.max(w.evaluate(&p[i], &p[j]).unwrap().abs());
            }
        }
        let err = (s01 + s12 - s02).abs();
        prop_assert!(err <= 8.0 * f64::EPSILON * largest, "err {:e}, largest {:e}", err, largest);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn euclidean_scalar_product_is_dot_product(n in 2usize..5, c in prop::collection::vec(-10.0..10.0f64, 16)) {
        let w = WorldFunction::euclidean_identity(n).unwrap();
        let p: Vec<Point> = (0..4).map(|k| Point::new(c[4 * k..4 * k + n].to_vec()).unwrap()).collect();
        let da: Vec<f64> = (0..n).map(|i| p[1][i] - p[0][i]).collect();
        let db: Vec<f64> = (0..n).map(|i| p[3][i] - p[2][i]).collect();
        let dot: f64 = da.iter().zip(&db).map(|(a, b)| a * b).sum();
        let norms = da.iter().map(|x| x * x).sum::<f64>().sqrt() * db.iter().map(|x| x * x).sum::<f64>().sqrt();
        let got = scalar_product(&w, &vector(&p[0], &p[1]), &vector(&p[2], &p[3])).unwrap();
        prop_assert!((got - dot).abs() <= 1e-12 * norms.max(dot.abs()), "{} vs {}", got, dot);
    }

    #[test]
    fn self_parallel(o in point(3, -10.0, 10.0), h in point(3, -10.0, 10.0)) {
        let w = WorldFunction::euclidean_identity(3).unwrap();
        let a = vector(&o, &h);
        prop_assume!(squared_norm(&w, &a).unwrap() > 1e-6);
        prop_assert!(is_parallel(&w, &a, &a, 1e-9).unwrap());
    }

    #[test]
    fn collinear_is_parallel_or_antiparallel(
        o in point(3, -10.0, 10.0),
        h in point(3, -10.0, 10.0),
        q in point(3, -10.0, 10.0),
        k in -3.0..3.0f64,
        scaled in any::<bool>(),
        sphere in any::<bool>(),
    ) {
        let (w, o, h, q) = if sphere {
            let s = |p: &Point| Point::new(vec![0.3 + 0.12 * (p[0] + 10.0), 0.15 * p[1]]).unwrap();
            (WorldFunction::sphere(1.0).unwrap(), s(&o), s(&h), s(&q))
        } else {
            (WorldFunction::euclidean_identity(3).unwrap(), o, h, q)
        };
        let a = vector(&o, &h);
        let head: Vec<f64> = if scaled {
            (0..o.dim()).map(|i| q[i] + k * (h[i] - o[i])).collect()
        } else {
            (0..o.dim()).map(|i| q[i] + 0.5 * (h[i] - o[i]) + (i as f64 + 1.0) * 0.37).collect()
        };
        let b = vector(&q, &Point::new(head).unwrap());
        let (aa, bb) = (squared_norm(&w, &a).unwrap(), squared_norm(&w, &b).unwrap());
        prop_assume!(aa > 1e-6 && bb > 1e-6);
        let ab = scalar_product(&w, &a, &b).unwrap();
        // Stay clear of the tolerance band where the two tests may legitimately differ.
        let rel = (ab * ab - aa * bb).abs() / (aa * bb).max(ab * ab);
        prop_assume!(!(1e-12..=1e-6).contains(&rel));
        let either = is_parallel(&w, &a, &b, 1e-9).unwrap() || is_parallel(&w, &a, &b.reversed(), 1e-9).unwrap();
        prop_assert_eq!(is_collinear(&w, &a, &b, 1e-9).unwrap(), either);
    }

    #[test]
    fn surface_and_determinant_collinearity_agree_in_euclidean_space(
        n in 2usize..5,
        c in prop::collection::vec(-5.0..5.0f64, 4 * 6),
        t in -3.0..3.0f64,
        on_line in any::<bool>(),
    ) {
        let w = WorldFunction::euclidean_identity(n).unwrap();
        let pts: Vec<Point> = (0..n + 2).map(|k| Point::new(c[4 * k..4 * k + n].to_vec()).unwrap()).collect();
        let (p0, p1, aux, free) = (&pts[0], &pts[1], &pts[2..n + 1], &pts[n + 1]);
        let r = if on_line {
            Point::new((0..n).map(|i| p0[i] + t * (p1[i] - p0[i])).collect()).unwrap()
        } else {
            free.clone()
        };
        let e = vector(p0, p1);
        let x = vector(p0, &r);
        let ee = squared_norm(&w, &e).unwrap();
        let xx = squared_norm(&w, &x).unwrap();
        prop_assume!(ee > 1e-3 && xx > 1e-3);
        // The aux vectors and e must span the space for the surfaces to cut out a line.
        let frame = tgeom::euclideanity::BasisFrame::new(&w, p0.clone(), pts[1..n + 1].to_vec()).unwrap();
        prop_assume!(frame.gram_inverse.is_some());
        let scale = |pk: &Point| ee * squared_norm(&w, &vector(p0, pk)).unwrap().sqrt() * xx.sqrt();
        let surfaces = aux
            .iter()
            .all(|pk| collinearity_surface_residual(&w, p0, p1, pk, &r).unwrap().abs() <= 1e-9 * scale(pk));
        let ex = scalar_product(&w, &e, &x).unwrap();
        prop_assume!(on_line || (ex * ex - ee * xx).abs() > 1e-6 * ee * xx);
        prop_assert_eq!(surfaces, is_collinear(&w, &e, &x, 1e-9).unwrap());
    }
}
