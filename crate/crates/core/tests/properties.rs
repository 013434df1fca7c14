use std::f64::consts::FRAC_PI_4;
use std::sync::OnceLock;

use anosov_core::domination::margins;
use anosov_core::flow::{cocycle, ShiftPoint};
use anosov_core::limit::{LimitMapSolver, LimitOptions};
use anosov_core::linalg::{grassmann_distance, rotation2, singular_values_dense, Representation, Subspace};
use anosov_core::subset::{is_primitive, SubsetP};
use anosov_core::word::{geodesic_through, project_to_geodesic, BoundaryPoint, Letter, ReducedWord};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn letters(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0..rank, any::<bool>()), 0..=max_len)
        .prop_map(|v| v.into_iter().map(|(g, i)| Letter::new(g, i)).collect())
}

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = ReducedWord> {
    letters(rank, max_len).prop_map(ReducedWord::reduce)
}

fn nonempty_word(rank: usize, max_len: usize) -> impl Strategy<Value = ReducedWord> {
    word(rank, max_len).prop_filter("nonempty", |w| !w.is_empty())
}

fn point(rank: usize) -> impl Strategy<Value = BoundaryPoint> {
    (word(rank, 5), nonempty_word(rank, 4)).prop_map(|(u, p)| BoundaryPoint::from_limit(&u, &p).unwrap())
}

fn matrix(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, d * d)
        .prop_map(move |v| DMatrix::from_row_slice(d, d, &v))
        .prop_filter("well conditioned", |m| {
            let s = singular_values_dense(m);
            s[s.len() - 1] > 1e-3 * s[0]
        })
}

fn subspace(d: usize, k: usize) -> impl Strategy<Value = Subspace> {
    prop::collection::vec(-1.0f64..1.0, d * k)
        .prop_filter_map("full rank", move |v| {
            let m = DMatrix::from_column_slice(d, k, &v);
            let s = singular_values_dense(&m);
            (s[k - 1] > 1e-3).then(|| Subspace::span(&m).ok()).flatten()
        })
}

/// Repeatedly removes the first adjacent cancelling pair.
fn naive_reduce(mut v: Vec<Letter>) -> Vec<Letter> {
    while let Some(i) = (1..v.len()).find(|&i| v[i] == v[i - 1].inv()) {
        v.drain(i - 1..=i);
    }
    v
}

fn dist(u: &ReducedWord, v: &ReducedWord) -> usize {
    u.inverse().concat(v).len()
}

fn schottky() -> &'static Representation {
    static R: OnceLock<Representation> = OnceLock::new();
    R.get_or_init(|| {
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&[5.0, 0.2]));
        let r = rotation2(FRAC_PI_4);
        let b = &r * &a * r.transpose();
        Representation::new(vec![a, b]).unwrap()
    })
}

fn schottky_solver() -> &'static LimitMapSolver<'static> {
    static S: OnceLock<LimitMapSolver<'static>> = OnceLock::new();
    S.get_or_init(|| {
        let opts = LimitOptions {
            budget: 8,
            ..LimitOptions::default()
        };
        LimitMapSolver::new(schottky(), &SubsetP::full(2), 1, &opts).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reduction_is_confluent(v in letters(3, 30)) {
        let w = ReducedWord::reduce(v.clone());
        let naive = naive_reduce(v.clone());
        prop_assert_eq!(w.letters(), naive.as_slice());
        let mut rev: Vec<Letter> = v.iter().rev().map(|l| l.inv()).collect();
        rev = naive_reduce(rev);
        let inv = w.inverse();
        prop_assert_eq!(inv.letters(), rev.as_slice());
    }

    #[test]
    fn left_action_is_isometric(g in word(2, 8), u in word(2, 8), v in word(2, 8)) {
        prop_assert_eq!(dist(&g.concat(&u), &g.concat(&v)), dist(&u, &v));
    }

    #[test]
    fn visual_metric_is_symmetric_ultrametric(x in point(2), y in point(2), z in point(2)) {
        let d = |p: &BoundaryPoint, q: &BoundaryPoint| p.visual_distance(q, 1.0);
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y).max(d(&y, &z)));
        prop_assert_eq!(d(&x, &x), 0.0);
    }

    #[test]
    fn projection_follows_reparametrization(x in point(2), y in point(2), z in point(2), s in -4i64..4) {
        prop_assume!(x != y && z != x && z != y);
        let l = geodesic_through(&x, &y, &ReducedWord::identity());
        prop_assume!(l.is_ok());
        let l = l.unwrap();
        let (t, v) = project_to_geodesic(&l, &z).unwrap();
        let (t2, v2) = project_to_geodesic(&l.shifted(s), &z).unwrap();
        prop_assert_eq!(t2, t - s);
        prop_assert_eq!(v2, v);
    }

    #[test]
    fn primitivity_is_invariant(w in nonempty_word(2, 6), g in word(2, 3)) {
        let p = is_primitive(&w, 2).unwrap();
        prop_assert_eq!(is_primitive(&w.inverse(), 2).unwrap(), p);
        let conj = g.concat(&w).concat(&g.inverse());
        prop_assert_eq!(is_primitive(&conj, 2).unwrap(), p);
    }

    #[test]
    fn inverse_singular_values(m in matrix(4)) {
        let s = singular_values_dense(&m);
        let si = singular_values_dense(&m.clone().try_inverse().unwrap());
        for k in 0..4 {
            prop_assert!((s[k] * si[3 - k] - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn grassmann_triangle(u in subspace(4, 2), v in subspace(4, 2), w in subspace(4, 2)) {
        let d = |a: &Subspace, b: &Subspace| grassmann_distance(a, b).unwrap();
        prop_assert!(d(&u, &w) <= d(&u, &v) + d(&v, &w) + 1e-12);
        prop_assert!((d(&u, &v) - d(&v, &u)).abs() <= 1e-12);
    }

    #[test]
    fn evaluate_matches_naive_product(a in matrix(3), b in matrix(3), w in word(2, 10)) {
        let rho = Representation::new(vec![a, b]).unwrap();
        let naive = w.letters().iter().fold(DMatrix::identity(3, 3), |acc, &l| acc * rho.image(l));
        let fast = rho.evaluate(&w).to_dense();
        prop_assert!((&fast - &naive).norm() <= 1e-10 * naive.norm());
    }

    #[test]
    fn scalar_rescaling_keeps_margins(a in matrix(3), b in matrix(3), c in prop::sample::select(vec![10.0, -0.1, 3.5])) {
        let rho = Representation::new(vec![a.clone(), b.clone()]).unwrap();
        let scaled = Representation::new(vec![a * c, b]).unwrap();
        let p = SubsetP::full(2);
        let m1 = margins(&rho, &p, 1, 5).unwrap();
        let m2 = margins(&scaled, &p, 1, 5).unwrap();
        for t in 1..=5 {
            let (x, y) = (m1.at(t).unwrap(), m2.at(t).unwrap());
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn inversion_symmetry_of_margins(a in matrix(3), b in matrix(3), k in 1usize..3) {
        let rho = Representation::new(vec![a, b]).unwrap();
        for p in [SubsetP::full(2), SubsetP::directed(2, &[Letter::gen(0), Letter::gen(1)]).unwrap()] {
            let m1 = margins(&rho, &p, k, 5).unwrap();
            let m2 = margins(&rho, &p.hat(), 3 - k, 5).unwrap();
            for t in 1..=5 {
                let (x, y) = (m1.at(t).unwrap(), m2.at(t).unwrap());
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn cocycle_law(x in point(2), y in point(2), n in 0usize..6, m in 0usize..6) {
        prop_assume!(x.gromov_product(&y) == Some(0));
        let rho = schottky();
        let q = ShiftPoint::new(&SubsetP::full(2), x, y).unwrap();
        let lhs = cocycle(rho, &q, n + m).to_dense();
        let rhs = cocycle(rho, &q.shift_by(n as i64), m).to_dense() * cocycle(rho, &q, n).to_dense();
        prop_assert!((&lhs - &rhs).norm() <= 1e-10 * lhs.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn limit_map_is_equivariant(x in point(2), g in word(2, 3)) {
        let solver = schottky_solver();
        let gx = x.translate(&g);
        let lhs = solver.xi(&gx).unwrap().subspace;
        let rhs = schottky().evaluate(&g).apply(&solver.xi(&x).unwrap().subspace);
        prop_assert!(grassmann_distance(&lhs, &rhs).unwrap() < 1e-8);
    }

    #[test]
    fn positive_sets_are_sound_and_monotone(spec in 0usize..4, l in 2usize..7) {
        let p = match spec {
            0 => SubsetP::full(2),
            1 => SubsetP::directed(2, &[Letter::gen(0), Letter::gen(1)]).unwrap(),
            2 => SubsetP::axis_family(2, &["ab".parse().unwrap()]).unwrap(),
            _ => SubsetP::primitive(2, 3).unwrap(),
        };
        let big = p.gamma_p_plus(l).unwrap();
        prop_assert!(big.words().all(|u| big.verify_witness(u)));
        let small = p.gamma_p_plus(l - 1).unwrap();
        let cut: Vec<&ReducedWord> = big.words().filter(|u| u.len() < l).collect();
        prop_assert_eq!(cut, small.words().collect::<Vec<_>>());
    }
}

#[test]
fn smaller_subsets_have_larger_margins() {
    let rho = schottky();
    let pairs = [
        (SubsetP::axis_family(2, &["a".parse().unwrap()]).unwrap(), SubsetP::primitive(2, 4).unwrap()),
        (SubsetP::directed(2, &[Letter::gen(0), Letter::gen(1)]).unwrap(), SubsetP::full(2)),
    ];
    for (small, big) in pairs {
        let ms = margins(rho, &small, 1, 8).unwrap();
        let mb = margins(rho, &big, 1, 8).unwrap();
        for t in 1..=8 {
            if let (Some(s), Some(b)) = (ms.at(t), mb.at(t)) {
                assert!(s >= b - 1e-12, "{small} vs {big} at {t}");
            }
        }
    }
}
