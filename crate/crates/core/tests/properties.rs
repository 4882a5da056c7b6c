use std::collections::BTreeMap;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cartier_lab_core::cartier::{fixed_map, fixed_pi0, norm_pi0, orbit_map, orbit_pi0, CartierStage};
use cartier_lab_core::dieudonne::{self, is_formal, is_v_complete, newton_slopes, random_gl2, verify_dieudonne};
use cartier_lab_core::drw::{check_identities, random_element, DRWComplex};
use cartier_lab_core::eta::{check_braiding, random_base_module, EtaRing, GradedEtaModule};
use cartier_lab_core::filtered::{day_tensor, double_speed_map, double_speed_whitehead, ins, ChainComplex, ChainMap, CoeffRing};
use cartier_lab_core::linalg::{smith_normal_form, FGAbelianGroup, GroupHom, IntMatrix};
use cartier_lab_core::oracle;
use cartier_lab_core::witt::{PrimeField, WittVector};

fn matrix(rows: usize, cols: usize, entries: Vec<i64>) -> IntMatrix {
    IntMatrix::from_rows(cols, entries.chunks(cols.max(1)).take(rows).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
}

/// `Z^a → Z^b` in degrees `1 → 0`.
fn two_term(a: usize, b: usize, entries: Vec<i64>) -> ChainComplex {
    let mut groups = BTreeMap::new();
    groups.insert(1, FGAbelianGroup::free(a));
    groups.insert(0, FGAbelianGroup::free(b));
    let mut diffs = BTreeMap::new();
    diffs.insert(1, matrix(a, b, entries));
    ChainComplex::from_parts(groups, diffs).unwrap()
}

fn complex_strategy() -> impl Strategy<Value = ChainComplex> {
    (1..=2usize, 1..=2usize)
        .prop_flat_map(|(a, b)| (Just(a), Just(b), proptest::collection::vec(-4i64..=4, a * b)))
        .prop_map(|(a, b, e)| two_term(a, b, e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn witt_integers_form_a_ring(p in prop::sample::select(vec![2u64, 3, 5]), n in 1usize..=4, a in 0u64..10_000, b in 0u64..10_000) {
        let size = p.pow(n as u32);
        let f = PrimeField { p };
        let w = |k: u64| WittVector::from_integer(p, f.clone(), n, &BigInt::from(k)).unwrap();
        prop_assert_eq!(w(a).add(&w(b)).unwrap(), w((a + b) % size));
        prop_assert_eq!(w(a).mul(&w(b)).unwrap(), w(a * b % size));
        prop_assert_eq!(oracle::witt_integer_by_addition(p, n, a % size).unwrap(), w(a));
    }

    #[test]
    fn smith_form_is_equivalent_and_divisible(rows in 1usize..=4, cols in 1usize..=4, e in proptest::collection::vec(-9i64..=9, 16)) {
        let m = matrix(rows, cols, e[..rows * cols].to_vec());
        let s = smith_normal_form(&m);
        prop_assert_eq!(s.left.mul(&m).mul(&s.right), s.diag.clone());
        prop_assert_eq!(s.left.determinant().magnitude().clone(), 1u32.into());
        prop_assert_eq!(s.right.determinant().magnitude().clone(), 1u32.into());
        let d = s.nonzero_diagonal();
        for w in d.windows(2) {
            prop_assert!((&w[1] % &w[0]) == BigInt::from(0));
        }
    }

    #[test]
    fn drw_identities_on_random_elements(p in prop::sample::select(vec![2u64, 3]), m in 1u32..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rep = check_identities(p, m, 5, 10, &mut rng).unwrap();
        prop_assert!(rep.failures.is_empty(), "{:?}", rep.failures.first());
    }

    #[test]
    fn drw_products_match_models(p in prop::sample::select(vec![2u64, 3]), m in 1u32..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = DRWComplex::new(p, m, 6).unwrap();
        let a = random_element(&mut rng, &c, 0, 3);
        let b = random_element(&mut rng, &c, 0, 3);
        let w = random_element(&mut rng, &c, 1, 3);
        prop_assert!(oracle::ghost_product_agrees(&a, &b, 12).unwrap());
        prop_assert!(oracle::dwork_check(&DRWComplex::new(p, m, 0).unwrap(), &[(a.clone(), b), (a, w)]).passed());
    }

    #[test]
    fn day_tensor_unit(c in complex_strategy()) {
        let x = double_speed_whitehead(CoeffRing::Z, &c);
        let unit = ins(CoeffRing::Z, 0, ChainComplex::concentrated(0, FGAbelianGroup::free(1)));
        let y = day_tensor(&unit, &x).unwrap();
        prop_assert_eq!(y.table((-3, 3), (-2, 2)).levels, x.table((-3, 3), (-2, 2)).levels);
    }

    #[test]
    fn postnikov_truncation_is_idempotent(c in complex_strategy(), k in -2i64..=2) {
        let x = double_speed_whitehead(CoeffRing::Z, &c);
        let once = x.truncate_postnikov(k);
        prop_assert_eq!(once.truncate_postnikov(k).table((-3, 3), (-2, 2)), once.table((-3, 3), (-2, 2)));
    }

    #[test]
    fn cofiber_sequences_are_exact(c in complex_strategy(), k in -3i64..=3) {
        let f = ChainMap::identity(&c).scale(&BigInt::from(k));
        let map = double_speed_map(CoeffRing::Z, &f, &c, &c).unwrap();
        prop_assert!(map.check_long_exact_sequence((-3, 3), (-2, 2)).is_ok());
    }

    #[test]
    fn norm_is_natural(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_stage(&mut rng, p);
        let b = random_stage(&mut rng, p);
        // inclusion M → M ⊕ M'
        let sum = CartierStage { module: a.module.direct_sum(&b.module), d: IntMatrix::block_diag(&[&a.d, &b.d]) };
        let phi = IntMatrix::identity(a.ngens()).hstack(&IntMatrix::zeros(a.ngens(), b.ngens()));
        let (na, ns) = (fixed_pi0(p, &a), fixed_pi0(p, &sum));
        let fixed = fixed_map(&phi, &na, &ns).unwrap();
        let lhs = norm_pi0(p, &a, &na).unwrap().matrix.mul(&fixed);
        let rhs = phi.mul(&norm_pi0(p, &sum, &ns).unwrap().matrix);
        let hom = |m: IntMatrix| GroupHom { src: a.group(), dst: ns.group.clone(), matrix: m };
        prop_assert!(hom(lhs).equals(&hom(rhs)));
        let (oa, os) = (orbit_pi0(p, &a), orbit_pi0(p, &sum));
        let lhs = oa.canonical.mul(&orbit_map(&phi));
        let rhs = phi.mul(&os.canonical);
        let hom = |m: IntMatrix| GroupHom { src: a.group(), dst: os.module.group(), matrix: m };
        prop_assert!(hom(lhs).equals(&hom(rhs)));
    }

    #[test]
    fn braiding_is_symmetric_monoidal_data(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_base_module(&mut rng, 3, 3);
        let n = random_base_module(&mut rng, 3, 3);
        prop_assert!(check_braiding(&m, &n).unwrap().ok());
    }

    #[test]
    fn dieudonne_invariants(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = dieudonne::random_module(&mut rng, p, 6);
        prop_assert!(verify_dieudonne(&m).valid);
        prop_assert_eq!(is_formal(&m), is_v_complete(&m));
        let (g, gi) = random_gl2(&mut rng, p, 6);
        let c = m.conjugate(&g, &gi);
        prop_assert!(verify_dieudonne(&c).valid);
        prop_assert_eq!(newton_slopes(&c).unwrap(), newton_slopes(&m).unwrap());
        prop_assert_eq!(is_formal(&c), is_formal(&m));
    }
}

/// One or two cyclic generators of weight 0 or 1 with a random `d`.
fn random_stage(rng: &mut ChaCha8Rng, p: u64) -> CartierStage {
    use rand::Rng;
    let k = rng.gen_range(1..=2usize);
    let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=1)).collect();
    let orders: Vec<i64> = (0..k).map(|_| (p as i64).pow(rng.gen_range(1..=3))).collect();
    let mut d = IntMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if weights[j] == weights[i] + 1 {
                let g = num_integer::gcd(orders[i], orders[j]);
                d[(i, j)] = BigInt::from(orders[j] / g * rng.gen_range(0..9));
            }
        }
    }
    let rel = IntMatrix::from_diagonal(&orders.iter().map(|&o| BigInt::from(o)).collect::<Vec<_>>());
    CartierStage { module: GradedEtaModule::trivial_action(EtaRing::Base, weights, rel), d }
}
