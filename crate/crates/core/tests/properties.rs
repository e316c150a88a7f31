use proptest::prelude::*;

use sdinc::coefficients::{osgood_iterate, OsgoodModulus};
use sdinc::config::ScenarioConfig;
use sdinc::convexset::{distance_to_point, hausdorff_distance, steiner_point, ConvexBody, Direction, QuadratureSpec};
use sdinc::semigroup::SemigroupOperator;
use sdinc::{Matrix, Vector};

const TOL: f64 = 1e-6;

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, d)
}

fn hull(d: usize) -> impl Strategy<Value = ConvexBody> {
    prop::collection::vec(point(d), 1..7)
        .prop_map(|ps| ConvexBody::hull(ps.into_iter().map(Vector::from_vec).collect()).unwrap())
}

fn ball(d: usize) -> impl Strategy<Value = ConvexBody> {
    (point(d), 0.0..1.5f64).prop_map(|(c, r)| ConvexBody::ball(Vector::from_vec(c), r).unwrap())
}

fn body(d: usize) -> impl Strategy<Value = ConvexBody> {
    prop_oneof![
        3 => hull(d),
        1 => ball(d),
        1 => (hull(d), ball(d)).prop_map(|(a, b)| ConvexBody::minkowski_sum(a, b).unwrap()),
    ]
}

/// `2Γ(d/2 + 1) / (√π Γ((d + 1)/2))`; `4/π` in the plane, `3/2` in space.
fn steiner_lipschitz(d: usize) -> f64 {
    match d {
        2 => 4.0 / std::f64::consts::PI,
        3 => 1.5,
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn hausdorff_is_a_metric((a, b, c) in (2usize..4).prop_flat_map(|d| (body(d), body(d), body(d)))) {
        let ab = hausdorff_distance(&a, &b, TOL).unwrap();
        let ba = hausdorff_distance(&b, &a, TOL).unwrap();
        let bc = hausdorff_distance(&b, &c, TOL).unwrap();
        let ac = hausdorff_distance(&a, &c, TOL).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ab >= 0.0);
        prop_assert!(ac <= ab + bc + 3.0 * TOL);
        prop_assert!(hausdorff_distance(&a, &a, TOL).unwrap() <= TOL);
    }

    #[test]
    fn support_dominates_members(k in body(3), u in point(3), w in prop::collection::vec(0.0..1.0f64, 6)) {
        prop_assume!(u.iter().any(|x| x.abs() > 1e-3));
        let dir = Direction::normalize(Vector::from_vec(u)).unwrap();
        let h = k.support_value(&dir).unwrap();
        // Convex combinations of support points in other directions lie in K.
        let dirs: Vec<Direction> = (0..3)
            .map(|i| {
                let mut e = vec![0.1; 3];
                e[i] = 1.0;
                Direction::normalize(Vector::from_vec(e)).unwrap()
            })
            .collect();
        let total: f64 = w.iter().take(3).sum::<f64>().max(1e-12);
        let mut x = Vector::zeros(3);
        for (wi, di) in w.iter().zip(&dirs) {
            x += k.support_point(di).unwrap() * (wi / total);
        }
        prop_assert!(x.dot(dir.as_vector()) <= h + 1e-9);
        prop_assert!(k.support_point(&dir).unwrap().dot(dir.as_vector()) >= h - 1e-9);
    }

    #[test]
    fn steiner_point_is_a_member(k in body(2)) {
        let s = steiner_point(&k, &QuadratureSpec::default()).unwrap();
        prop_assert!(distance_to_point(&k, &s, TOL).unwrap().distance <= TOL);
    }

    #[test]
    fn steiner_point_is_lipschitz((a, b) in (2usize..4).prop_flat_map(|d| (body(d), body(d)))) {
        let d = a.dim();
        let q = QuadratureSpec::default();
        let sa = steiner_point(&a, &q).unwrap();
        let sb = steiner_point(&b, &q).unwrap();
        let h = hausdorff_distance(&a, &b, TOL).unwrap();
        prop_assert!((sa - sb).norm() <= steiner_lipschitz(d) * (h + TOL) + 2.0 * q.tol);
    }

    #[test]
    fn steiner_of_translate_is_translated(k in body(2), v in point(2)) {
        let q = QuadratureSpec::default();
        let off = Vector::from_vec(v);
        let moved = ConvexBody::translated(off.clone(), k.clone()).unwrap();
        let diff = steiner_point(&moved, &q).unwrap() - steiner_point(&k, &q).unwrap() - off;
        prop_assert!(diff.norm() <= 1e-9);
    }

    #[test]
    fn semigroup_law(entries in prop::collection::vec(-2.0..2.0f64, 9), s in 0.0..1.0f64, t in 0.0..1.0f64, x in point(3)) {
        let op = SemigroupOperator::new(Matrix::from_vec(3, 3, entries), 2.0).unwrap();
        let x = Vector::from_vec(x);
        let lhs = op.evolve(s, &op.evolve(t, &x).unwrap()).unwrap();
        let rhs = op.evolve(s + t, &x).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-8);
    }

    #[test]
    fn yosida_ladder_approaches_generator(entries in prop::collection::vec(-1.0..1.0f64, 9), rho in 0.0..4.0f64, x in point(3)) {
        let b = Matrix::from_vec(3, 3, entries);
        let r = b.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assume!(r > 1e-9);
        let a = b * (rho / r);
        let op = SemigroupOperator::new(a.clone(), 1.0).unwrap();
        let x = Vector::from_vec(x);
        let mut prev = f64::INFINITY;
        for n in [4u64, 16, 64, 256] {
            let e = ((op.yosida(n).unwrap().generator() - &a) * &x).norm();
            prop_assert!(e <= prev + 1e-9);
            prev = e;
        }
    }

    #[test]
    fn osgood_iterates_decrease_when_dominated(c in 0.1..3.0f64, k in 0.1..2.0f64) {
        let o = osgood_iterate(&OsgoodModulus::linear(c), k, 1.0, 1.0, 100, 30).unwrap();
        if o.dominating {
            for w in o.iterates.windows(2) {
                for (a, b) in w[1].iter().zip(&w[0]) {
                    prop_assert!(*a <= *b * (1.0 + 1e-12));
                }
            }
        }
        prop_assert!(o.limit_sup <= o.r0);
    }

    #[test]
    fn config_round_trip(seed in any::<u64>(), paths in 1usize..100_000, lambda in -3.0..0.0f64, r in 0.0..2.0f64) {
        let text = format!(
            "[space]\ndE = 2\ndH = 1\nT = 1\n[operator]\nA = scaled_identity(2, {lambda:?})\n\
             [coefficients]\nF = tube(center=[0, 0], matrix=[[0.1, 0], [0, 0.1]], body=ball([0, 0], {r:?}), radius_fn=linear(1, 0.5))\n\
             G = ball(matrix_fn=const([[1], [0]]), radius={r:?})\nL = loglinear(C=2)\np = 3.5\neta = 4\nxi = point([1, 2])\n\
             [scheme]\nn_ladder = [2, 4]\ndt = 0.125\npaths = {paths}\nseed = {seed}\nselector = vertex_random\n"
        );
        let cfg = ScenarioConfig::parse(&text).unwrap();
        let again = ScenarioConfig::parse(&cfg.print()).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(again.scenario_hash(), cfg.scenario_hash());
    }
}

#[test]
fn shipped_configs_round_trip() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let cfg = ScenarioConfig::load(&path).unwrap();
            assert_eq!(ScenarioConfig::parse(&cfg.print()).unwrap(), cfg, "{}", path.display());
            cfg.build().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
