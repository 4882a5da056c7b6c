use super::*;
use crate::linalg::GroupType;

fn z() -> ChainComplex {
    ChainComplex::concentrated(0, FGAbelianGroup::free(1))
}

fn ty(s: &str) -> GroupType {
    match s {
        "0" => GroupType::zero(),
        "Z" => GroupType::free(1),
        _ => GroupType::cyclic(s.trim_start_matches("Z/").parse().unwrap()),
    }
}

#[test]
fn ins0_graded_pieces() {
    let x = ins(CoeffRing::Z, 0, z());
    for i in -3..=3 {
        let g = x.graded_piece(i);
        let expect = if i == 0 { "Z" } else { "0" };
        assert_eq!(g.homology(0).group_type(), ty(expect), "weight {i}");
        assert!(g.homology(1).is_trivial());
    }
    assert!(x.is_complete());
    assert_eq!(x.underlying().homology(0).group_type(), ty("Z"));
}

#[test]
fn polynomial_graded_pieces_are_even() {
    let p = PolynomialFiltered::new(CoeffRing::Z, 5, false);
    for i in -7..=2 {
        let g = p.filtered.graded_piece(i);
        for n in -14..=4 {
            let h = g.homology(n).group_type();
            let expect = if i <= 0 && i >= -5 && n == 2 * i { ty("Z") } else { GroupType::zero() };
            assert_eq!(h, expect, "gr^{i} in degree {n}");
        }
        let mons = p.monomials_in(i);
        let lvl = p.filtered.level(i);
        assert_eq!(mons.len(), lvl.degrees().len());
    }
}

#[test]
fn constant_filtration_is_not_complete() {
    let c = FilteredComplex::constant(CoeffRing::Z, z());
    assert!(!c.is_complete());
    assert!(FilteredComplex::constant(CoeffRing::Z, ChainComplex::zero()).is_complete());
}

#[test]
fn fiber_of_multiplication() {
    let x = ins(CoeffRing::Z, 0, z());
    let f = FilteredMap::levelwise(&x, &x, |_, c, _| ChainMap::identity(c).scale(&BigInt::from(5))).unwrap();
    let fib = f.fiber();
    assert!(fib.homology(0, 0).is_trivial());
    assert_eq!(fib.homology(-1, 0).group_type(), ty("Z/5"));
    f.check_long_exact_sequence((-2, 2), (-1, 1)).unwrap();
}

#[test]
fn pullback_along_identities() {
    let p = PolynomialFiltered::new(CoeffRing::Z, 2, false).filtered;
    let id = FilteredMap::identity(&p);
    let pb = pullback(&id, &id).unwrap();
    assert_eq!(pb.table((-5, 1), (-3, 1)).levels, p.table((-5, 1), (-3, 1)).levels);
}

#[test]
fn truncations() {
    let x = ins(CoeffRing::Z, 0, z());
    let t = x.truncate_postnikov(0);
    assert_eq!(t.table((-3, 3), (-3, 3)), x.table((-3, 3), (-3, 3)));
    let neg = ins(CoeffRing::Z, 0, ChainComplex::concentrated(-1, FGAbelianGroup::free(1)));
    let n = neg.truncate_neutral(0);
    assert!(n.table((-3, 3), (-3, 3)).levels.is_empty());
    let p = PolynomialFiltered::new(CoeffRing::Z, 3, true).filtered;
    let once = p.truncate_postnikov(0);
    let twice = once.truncate_postnikov(0);
    assert_eq!(once.table((-8, 8), (-5, 5)), twice.table((-8, 8), (-5, 5)));
}

#[test]
fn heart_pi_examples() {
    let mut m = GradedAbelianGroup::new();
    m.insert(-1, FGAbelianGroup::cyclic(&BigInt::from(4)));
    m.insert(2, FGAbelianGroup::free(1));
    let d = FilteredComplex::discrete(CoeffRing::Z, &m);
    assert!(d.heart_pi().unwrap().is_isomorphic(&m));
    // Z in (deg 0, wt 0) and (deg 1, wt 1)
    let t = FilteredComplex::new(
        CoeffRing::Z,
        0,
        Policy::Zero,
        Policy::Zero,
        vec![z(), ChainComplex::concentrated(1, FGAbelianGroup::free(1))],
        vec![ChainMap::zero()],
    )
    .unwrap();
    let h = t.heart_pi().unwrap();
    assert_eq!(h.types().len(), 2);
    assert!(FilteredComplex::zero(CoeffRing::Z).heart_pi().unwrap().types().is_empty());
    assert!(matches!(ins(CoeffRing::Z, 0, z()).heart_pi(), Err(FilteredError::NotInHeart { .. })));
}

#[test]
fn n_series_matches_group_cohomology() {
    for n in [1u64, 2, 3, 6] {
        let (_, t) = cyclic_fixed_points_via_n_series(n, CoeffRing::Z, 8).unwrap();
        let oracle = n_series_oracle(n, 8);
        assert_eq!(t.levels, oracle.levels, "n = {n}");
        let low = t.weights.0;
        for m in 0..=8i64 {
            let expect = match (m, n) {
                (0, _) => ty("Z"),
                (_, 1) => GroupType::zero(),
                (m, n) if m % 2 == 0 => GroupType::cyclic(n),
                _ => GroupType::zero(),
            };
            assert_eq!(t.level(-m, low), expect, "n = {n}, degree {}", -m);
        }
    }
}

#[test]
fn z_tate_matches_orbit_term() {
    let zt = z_tate(4).unwrap();
    let [_, _, cof] = zt.tables();
    assert_eq!(cof.levels, zt.orbit_oracle().levels);
    for i in -2..=5i64 {
        for k in 1..=4 {
            let expect = if k >= i.max(1) { ty("Z") } else { GroupType::zero() };
            assert_eq!(cof.level(2 * k, i), expect);
        }
    }
    zt.map.check_long_exact_sequence(zt.degrees(), zt.weights()).unwrap();
}

#[test]
fn rational_tc_sphere_table() {
    let n = 4;
    let (_, t) = rational_tc_sphere(n).unwrap();
    let q = GroupType::free(1);
    let col: Vec<i64> = t.column(0).into_keys().collect();
    let mut expect = vec![-1, 0];
    expect.extend((1..=n).map(|k| 2 * k - 1));
    assert_eq!(col, expect);
    for i in 1..=n {
        let gr: Vec<(i64, GroupType)> =
            t.graded.iter().filter(|((_, w), _)| *w == i).map(|((d, _), g)| (*d, g.clone())).collect();
        assert_eq!(gr, vec![(2 * i - 1, q.clone())], "gr^{i}");
    }
    assert!(t.graded.keys().all(|(_, w)| *w <= n));
}

#[test]
fn day_tensor_unit_and_weights() {
    let unit = ins(CoeffRing::Z, 0, z());
    let p = PolynomialFiltered::new(CoeffRing::Z, 2, false).filtered;
    let up = day_tensor(&unit, &p).unwrap();
    assert_eq!(up.table((-6, 2), (-4, 2)).levels, p.table((-6, 2), (-4, 2)).levels);
    let one = ins(CoeffRing::Z, 1, z());
    let two = day_tensor(&one, &one).unwrap();
    assert_eq!(two.table((-1, 1), (-1, 4)), ins(CoeffRing::Z, 2, z()).table((-1, 1), (-1, 4)));
    let m2 = ins(CoeffRing::Z, 0, ChainComplex::concentrated(0, FGAbelianGroup::cyclic(&BigInt::from(2))));
    let pm = day_tensor(&p, &m2).unwrap();
    for i in -3..=1i64 {
        for n in -6..=2 {
            let expect = if (-2..=0).contains(&i) && n == 2 * i { ty("Z/2") } else { GroupType::zero() };
            assert_eq!(pm.graded_piece(i).homology(n).group_type(), expect, "gr^{i} degree {n}");
        }
    }
}
