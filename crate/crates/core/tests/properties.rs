use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use proptest::prelude::*;

use toric_complexity::divisor::{canonical_divisor, ToricDivisor};
use toric_complexity::fan::{enumerate_fans, Fan};
use toric_complexity::lattice::{det2, frac, int, LatticeVector, Matrix2, Rational};
use toric_complexity::lp::{LinearProgram, LpResult, Relation};
use toric_complexity::mmp::{run_k_mmp, MmpTerminal};

fn fans() -> &'static [Fan] {
    static F: OnceLock<Vec<Fan>> = OnceLock::new();
    F.get_or_init(|| enumerate_fans(2, 6))
}

fn unimodular(ops: &[u8]) -> Matrix2 {
    let gens = [
        Matrix2::new(1, 1, 0, 1),
        Matrix2::new(1, 0, 1, 1),
        Matrix2::new(0, 1, 1, 0),
        Matrix2::new(-1, 0, 0, 1),
    ];
    ops.iter()
        .fold(Matrix2::IDENTITY, |m, &k| m.compose(&gens[k as usize % 4]))
}

/// Brute force for two variables: the optimum of a bounded feasible LP is
/// attained at an intersection of two tight lines, axes included.
fn vertex_optimum(lp: &LinearProgram) -> Option<Rational> {
    let mut lines: Vec<(Rational, Rational, Rational)> = lp
        .constraints
        .iter()
        .map(|c| (c.coeffs[0].clone(), c.coeffs[1].clone(), c.rhs.clone()))
        .collect();
    lines.push((int(1), int(0), int(0)));
    lines.push((int(0), int(1), int(0)));
    let mut best: Option<Rational> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a, b, e) = &lines[i];
            let (c, d, f) = &lines[j];
            let det = a * d - b * c;
            if det.is_zero() {
                continue;
            }
            let x = vec![(e * d - b * f) / &det, (a * f - e * c) / &det];
            if lp.is_feasible_point(&x) {
                let v = lp.objective_value(&x);
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
    }
    best
}

fn q() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=3).prop_map(|(n, d)| frac(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn lp_matches_vertex_enumeration(
        obj in prop::collection::vec(q(), 2),
        rows in prop::collection::vec((prop::collection::vec(q(), 2), 0i64..=8), 1..5),
    ) {
        let mut lp = LinearProgram::new(2);
        lp.objective = obj;
        for (c, r) in rows {
            lp.add(c, Relation::Le, int(r));
        }
        lp.add(vec![int(1), int(0)], Relation::Le, int(5));
        lp.add(vec![int(0), int(1)], Relation::Le, int(5));
        let s = match lp.solve() {
            LpResult::Optimal(s) => s,
            other => panic!("origin is feasible and the box bounds it: {other:?}"),
        };
        prop_assert!(lp.is_feasible_point(&s.x));
        prop_assert!(lp.certify(&s));
        prop_assert_eq!(Some(s.value.clone()), vertex_optimum(&lp));
        prop_assert_eq!(lp.dual_bound(&s.dual), Some(s.value));
    }

    #[test]
    fn infeasible_lp_has_farkas_certificate(
        rows in prop::collection::vec(prop::collection::vec(q(), 3), 0..3),
        excess in 1i64..5,
    ) {
        let mut lp = LinearProgram::new(3);
        for c in rows {
            lp.add(c, Relation::Le, int(4));
        }
        lp.add(vec![int(1); 3], Relation::Le, int(2));
        lp.add(vec![int(1), int(1), int(1)], Relation::Ge, int(2 + excess));
        match lp.solve() {
            LpResult::Infeasible(y) => prop_assert!(lp.check_farkas(&y)),
            other => prop_assert!(false, "expected infeasible, got {:?}", other),
        }
    }

    #[test]
    fn mmp_trace_is_valid(i in 0usize..10_000) {
        let x = &fans()[i % fans().len()];
        let t = run_k_mmp(x);
        prop_assert!(t.is_valid());
        prop_assert!(t.steps.iter().all(|s| s.k_intersection.is_negative()));
        prop_assert_eq!(t.end().picard_rank() + t.steps.len(), x.picard_rank());
        if let MmpTerminal::PicardRankOne = t.terminal {
            prop_assert_eq!(t.end().picard_rank(), 1);
        }
    }

    #[test]
    fn canonical_form_is_invariant(i in 0usize..10_000, ops in prop::collection::vec(0u8..4, 0..8)) {
        let x = &fans()[i % fans().len()];
        let m = unimodular(&ops);
        let y = x.apply(&m);
        prop_assert_eq!(x.canonical_form(), y.canonical_form());
        let g = x.lattice_equivalent(&y).expect("image is equivalent");
        prop_assert!(g.is_unimodular());
    }

    #[test]
    fn minimal_resolution_is_smooth_and_minimal(i in 0usize..10_000) {
        let x = &fans()[i % fans().len()];
        let (y, f) = x.minimal_resolution();
        prop_assert!(y.is_smooth());
        prop_assert!(x.rays().iter().all(|r| y.contains(r)));
        for e in &f.exceptional_rays {
            let d = ToricDivisor::prime(&y, *e).unwrap();
            prop_assert!(d.intersect(&d).unwrap() <= int(-2), "(-1)-curve {} in the resolution", e);
        }
    }

    #[test]
    fn principal_divisors_are_trivial(
        i in 0usize..10_000,
        m in (-5i64..=5, -5i64..=5),
        c in prop::collection::vec(q(), 6),
    ) {
        let x = &fans()[i % fans().len()];
        let d = ToricDivisor::new(x.clone(), c[..x.len()].to_vec()).unwrap();
        let form = [int(m.0), int(m.1)];
        let shifted = d.try_add(&ToricDivisor::principal(x, &form)).unwrap();
        prop_assert!(d.linear_equivalent(&shifted, false).unwrap());
        prop_assert!(ToricDivisor::principal(x, &form).is_torsion());
        let k = canonical_divisor(x);
        prop_assert_eq!(k.intersect(&shifted).unwrap(), k.intersect(&d).unwrap());
    }
}

#[test]
fn resolution_of_a_cyclic_quotient() {
    // the cone ⟨(0,1), (7,-3)⟩ is 1/7(1,3), and 7/3 = [3, 2, 2]
    let (u, v) = (LatticeVector::new(0, 1), LatticeVector::new(7, -3));
    let x = Fan::from_pairs(&[(0, 1), (7, -3), (-1, 0)]).unwrap();
    let (y, f) = x.minimal_resolution();
    let s = det2(u, v).signum();
    let mut selfs: Vec<Rational> = f
        .exceptional_rays
        .iter()
        .filter(|&&e| det2(u, e).signum() == s && det2(e, v).signum() == s)
        .map(|e| {
            let d = ToricDivisor::prime(&y, *e).unwrap();
            -d.intersect(&d).unwrap()
        })
        .collect();
    selfs.sort();
    assert_eq!(selfs, vec![int(2), int(2), int(3)]);
}
