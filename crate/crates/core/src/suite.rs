//! Named check suites. Each returns a JSON-ready report with one entry per
//! check and enough witness data to reproduce a failure.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Pow, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cartier::{compare_norm, fixed_pi0, is_derived_v_complete, orbit_pi0, tc_heart, CartierStage, EtaCartierComplex};
use crate::dieudonne::{self, bridge_faithfulness, hom_dieudonne, is_formal, is_v_complete, DieudonneModule};
use crate::drw::{self, check_identities, random_element, DRWComplex};
use crate::eta::{check_braiding, random_base_module, ring_normal_form, EtaRing, GradedEtaModule};
use crate::filtered::{cyclic_fixed_points_via_n_series, n_series_oracle, rational_tc_sphere, z_tate, CoeffRing};
use crate::linalg::{GroupType, IntMatrix};
use crate::oracle;
use crate::witt::{structure_polys, IntPoly, Integers, PrimeField, WittBase, WittVector};

pub const SUITES: [&str; 12] = [
    "witt-ring",
    "structure-polys",
    "relations-drw",
    "cartier-norm",
    "tc-fp",
    "tc-sphere",
    "n-series",
    "z-tate",
    "v-complete",
    "bridge",
    "heart-ring",
    "koszul-braiding",
];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.into(), passed: true, checks: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: Value) {
        self.passed &= passed;
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    /// First failing checks, for one-line summaries.
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}")]
    Unknown(String),
}

/// Runs one named suite, or every suite for `"all"`.
pub fn run(name: &str, seed: u64) -> Result<Vec<SuiteReport>, SuiteError> {
    if name == "all" {
        return Ok(SUITES.iter().map(|s| run_one(s, seed).expect("known")).collect());
    }
    Ok(vec![run_one(name, seed)?])
}

pub fn run_one(name: &str, seed: u64) -> Result<SuiteReport, SuiteError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match name {
        "witt-ring" => witt_ring(&mut rng),
        "structure-polys" => structure_polys_suite(),
        "relations-drw" => relations_drw(&mut rng),
        "cartier-norm" => cartier_norm(&mut rng),
        "tc-fp" => tc_fp(),
        "tc-sphere" => tc_sphere(),
        "n-series" => n_series(),
        "z-tate" => z_tate_suite(),
        "v-complete" => v_complete(&mut rng),
        "bridge" => bridge(),
        "heart-ring" => heart_ring(),
        "koszul-braiding" => koszul_braiding(&mut rng),
        _ => return Err(SuiteError::Unknown(name.into())),
    })
}

// ---------------------------------------------------------------- 1

fn all_vectors(p: u64, n: usize) -> Vec<WittVector<PrimeField>> {
    let mut comps = vec![Vec::new()];
    for _ in 0..n {
        comps = comps.into_iter().flat_map(|v: Vec<u64>| (0..p).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    comps.into_iter().map(|c| WittVector::new(p, PrimeField { p }, c).unwrap()).collect()
}

fn ring_axioms(p: u64, n: usize) -> Result<(), String> {
    let els = all_vectors(p, n);
    let f = PrimeField { p };
    let zero = WittVector::zero(p, f.clone(), n).unwrap();
    let one = WittVector::one(p, f, n).unwrap();
    let show = |x: &WittVector<PrimeField>| format!("{:?}", x.digits());
    let add = |a: &WittVector<PrimeField>, b: &WittVector<PrimeField>| a.add(b).unwrap();
    let mul = |a: &WittVector<PrimeField>, b: &WittVector<PrimeField>| a.mul(b).unwrap();
    let sums: Vec<Vec<_>> = els.iter().map(|a| els.iter().map(|b| add(a, b)).collect()).collect();
    let prods: Vec<Vec<_>> = els.iter().map(|a| els.iter().map(|b| mul(a, b)).collect()).collect();
    let idx = |x: &WittVector<PrimeField>| x.digits().iter().fold(0usize, |acc, &d| acc * p as usize + d as usize);
    // all_vectors enumerates with the first component most significant
    for (i, a) in els.iter().enumerate() {
        assert_eq!(idx(a), i);
        if add(a, &zero) != *a || mul(a, &one) != *a || mul(a, &zero) != zero {
            return Err(format!("identity elements fail at {}", show(a)));
        }
        if add(a, &a.neg().unwrap()) != zero {
            return Err(format!("additive inverse fails at {}", show(a)));
        }
        for (j, b) in els.iter().enumerate() {
            if sums[i][j] != sums[j][i] || prods[i][j] != prods[j][i] {
                return Err(format!("commutativity fails at {}, {}", show(a), show(b)));
            }
            for k in 0..els.len() {
                let (ab, bc) = (idx(&sums[i][j]), idx(&sums[j][k]));
                if sums[ab][k] != sums[i][bc] {
                    return Err(format!("additive associativity at {}, {}, {}", show(a), show(b), show(&els[k])));
                }
                let (ab, bc) = (idx(&prods[i][j]), idx(&prods[j][k]));
                if prods[ab][k] != prods[i][bc] {
                    return Err(format!("multiplicative associativity at {}, {}, {}", show(a), show(b), show(&els[k])));
                }
                let left = prods[i][idx(&sums[j][k])].clone();
                if left != add(&prods[i][j], &prods[i][k]) {
                    return Err(format!("distributivity at {}, {}, {}", show(a), show(b), show(&els[k])));
                }
            }
        }
    }
    Ok(())
}

fn random_int_poly(rng: &mut impl Rng, deg: usize, c: i64) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = (0..=rng.gen_range(0..=deg)).map(|_| BigInt::from(rng.gen_range(-c..=c))).collect();
    while v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

fn eval_poly(f: &[BigInt], x: &BigInt) -> BigInt {
    f.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn ghost_naturality(p: u64, rng: &mut impl Rng) -> Result<(), String> {
    let n = 4;
    let vec = |rng: &mut dyn rand::RngCore| {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(rng.next_u64());
        WittVector::new(p, IntPoly, (0..n).map(|_| random_int_poly(&mut r, 2, 2)).collect()).unwrap()
    };
    let b = IntPoly;
    let a = vec(rng);
    let c = vec(rng);
    let (ga, gc) = (a.ghost().unwrap(), c.ghost().unwrap());
    let gs = a.add(&c).unwrap().ghost().unwrap();
    let gp = a.mul(&c).unwrap().ghost().unwrap();
    for m in 0..n {
        if gs[m] != b.add(&ga[m], &gc[m]) {
            return Err(format!("w_{m}(a+b) ≠ w_{m}(a)+w_{m}(b) for a = {:?}, b = {:?}", a.components(), c.components()));
        }
        if gp[m] != b.mul(&ga[m], &gc[m]) {
            return Err(format!("w_{m}(ab) ≠ w_{m}(a)w_{m}(b) for a = {:?}, b = {:?}", a.components(), c.components()));
        }
    }
    // V shifts ghosts: (0, p·w_0, p·w_1, …)
    let gv = a.verschiebung().unwrap().ghost().unwrap();
    let want: Vec<Vec<BigInt>> =
        std::iter::once(Vec::new()).chain(ga.iter().map(|g| b.mul(&b.from_int(&BigInt::from(p)), g))).collect();
    if gv != want {
        return Err(format!("ghost(V a) for a = {:?}", a.components()));
    }
    // F lifts the Frobenius of F_p[x]: reduce(F a) = (reduce a)^(p)
    let deg = 2 * p.pow(n as u32) as usize;
    let fa = a.frobenius().unwrap().reduce(deg).map_err(|e| e.to_string())?;
    let fr = a.reduce(deg).unwrap().restrict().unwrap();
    let base = fr.base().clone();
    let fr = WittVector::new(p, base.clone(), fr.components().iter().map(|x| base.pow(x, p)).collect()).map_err(|e| e.to_string())?;
    if fa != fr {
        return Err(format!("F mod p for a = {:?}", a.components()));
    }
    // x ↦ t commutes with ghosts and with the ring operations
    let t = BigInt::from(rng.gen_range(-3i64..=3));
    let ev = |v: &WittVector<IntPoly>| v.map_base(Integers, |f| eval_poly(f, &t)).unwrap();
    let ge = ev(&a).ghost().unwrap();
    if ge != ga.iter().map(|g| eval_poly(g, &t)).collect::<Vec<_>>() {
        return Err(format!("evaluation at {t} for a = {:?}", a.components()));
    }
    if ev(&a.mul(&c).unwrap()) != ev(&a).mul(&ev(&c)).unwrap() {
        return Err(format!("evaluation at {t} of a product, a = {:?}, b = {:?}", a.components(), c.components()));
    }
    Ok(())
}

fn witt_ring(rng: &mut impl Rng) -> SuiteReport {
    let mut r = SuiteReport::new("witt-ring");
    for p in [2u64, 3, 5] {
        for n in 1..=4usize {
            let size = p.pow(n as u32);
            let f = PrimeField { p };
            let one = WittVector::one(p, f.clone(), n).unwrap();
            let mut acc = WittVector::zero(p, f.clone(), n).unwrap();
            let mut seen = HashSet::new();
            let mut bad = None;
            for k in 0..size {
                let direct = WittVector::from_integer(p, f.clone(), n, &BigInt::from(k)).unwrap();
                if direct != acc && bad.is_none() {
                    bad = Some(k);
                }
                seen.insert(acc.digits());
                acc = acc.add(&one).unwrap();
            }
            let cyclic = acc.is_zero() && seen.len() as u64 == size;
            let mut hom = true;
            for _ in 0..50 {
                let (a, b) = (rng.gen_range(0..size), rng.gen_range(0..size));
                let w = |k: u64| WittVector::from_integer(p, f.clone(), n, &BigInt::from(k)).unwrap();
                hom &= w(a).mul(&w(b)).unwrap() == w(a * b % size) && w(a).add(&w(b)).unwrap() == w((a + b) % size);
            }
            r.check(
                format!("W_{n}(F_{p}) = Z/{size}"),
                bad.is_none() && cyclic && hom,
                json!({"first_mismatch": bad, "order_of_one": if cyclic { Some(size) } else { None }, "ring_map": hom}),
            );
        }
    }
    for (p, n) in [(2u64, 3usize), (3, 2)] {
        let res = ring_axioms(p, n);
        r.check(format!("ring axioms W_{n}(F_{p})"), res.is_ok(), json!({"elements": p.pow(n as u32), "error": res.err()}));
    }
    for p in [2u64, 3] {
        let mut err = None;
        for _ in 0..200 {
            if let Err(e) = ghost_naturality(p, rng) {
                err = Some(e);
                break;
            }
        }
        r.check(format!("ghost naturality W_4(Z[x]), p = {p}"), err.is_none(), json!({"pairs": 200, "error": err}));
    }
    r
}

// ---------------------------------------------------------------- 2

fn structure_polys_suite() -> SuiteReport {
    let mut r = SuiteReport::new("structure-polys");
    for p in [2u64, 3, 5, 7] {
        for n in 1..=4usize {
            match structure_polys(p, n) {
                Ok(sp) => {
                    let ck = sp.verify_ghost_identities();
                    let (s, m) = sp.term_counts();
                    r.check(
                        format!("S, P for p = {p}, n = {n}"),
                        ck.all_ok(),
                        json!({"sum_terms": s, "prod_terms": m, "sums_ok": ck.sums_ok, "prods_ok": ck.prods_ok}),
                    );
                }
                Err(e) => r.check(format!("S, P for p = {p}, n = {n}"), false, json!({"error": e.to_string()})),
            }
        }
    }
    r
}

// ---------------------------------------------------------------- 3

fn relations_drw(rng: &mut impl Rng) -> SuiteReport {
    let cases: Vec<(u64, u32)> = [2u64, 3].iter().flat_map(|&p| (1..=3u32).map(move |m| (p, m))).collect();
    relations_drw_cases(rng, &cases, 12)
}

/// The `relations-drw` suite restricted to one `(p, m)` and weight bound.
pub fn relations_drw_for(p: u64, m: u32, bound: u64, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    relations_drw_cases(&mut rng, &[(p, m)], bound)
}

fn relations_drw_cases(rng: &mut impl Rng, cases: &[(u64, u32)], bound: u64) -> SuiteReport {
    let mut r = SuiteReport::new("relations-drw");
    for &(p, m) in cases {
        {
            let tag = format!("p = {p}, m = {m}, D = {bound}");
            match check_identities(p, m, bound, 100, rng) {
                Ok(rep) => r.check(
                    format!("identities, {tag}"),
                    rep.failures.is_empty(),
                    json!({"checked": rep.checked, "failures": rep.failures.iter().take(5).map(|f| format!("{}: {}", f.identity, f.element)).collect::<Vec<_>>()}),
                ),
                Err(e) => r.check(format!("identities, {tag}"), false, json!({"error": e.to_string()})),
            }
            let c = match DRWComplex::new(p, m, bound) {
                Ok(c) => c,
                Err(e) => {
                    r.check(format!("complex, {tag}"), false, json!({"error": e.to_string()}));
                    continue;
                }
            };
            let mut bad = Vec::new();
            let mut products = Vec::new();
            for _ in 0..300 {
                let a = random_element(rng, &c, 0, 3);
                let b = random_element(rng, &c, 0, 3);
                let ok = oracle::ghost_product_agrees(&a, &b, 2 * bound as usize).unwrap_or(false)
                    && oracle::ghost_sum_agrees(&a, &b, 2 * bound as usize).unwrap_or(false);
                if !ok && bad.len() < 3 {
                    bad.push(format!("({a}, {b})"));
                }
                let q = rng.gen_range(0..2u8);
                products.push((a, random_element(rng, &c, q, 2)));
            }
            r.check(format!("ghost oracle, 300 pairs, {tag}"), bad.is_empty(), json!({"failures": bad}));
            let dw = oracle::dwork_check(&c, &products);
            r.check(
                format!("integral-forms model, {tag}"),
                dw.passed(),
                json!({"checked": dw.checked, "failures": dw.failures.iter().take(3).collect::<Vec<_>>()}),
            );
            let orders = match oracle::degree_one_orders(&c) {
                Ok(o) => o,
                Err(e) => {
                    r.check(format!("degree-1 orders vs universal quotient, {tag}"), false, json!({"error": e.to_string()}));
                    continue;
                }
            };
            let mismatches: Vec<Value> = orders
                .iter()
                .filter(|(_, mine, k, d)| BigInt::from(*mine) != *k || k != d)
                .take(5)
                .map(|(w, mine, k, d)| json!({"weight": w.render(p), "normal_form": mine.to_string(), "kahler": k.to_string(), "integral_forms": d.to_string()}))
                .collect();
            r.check(
                format!("degree-1 orders vs universal quotient, {tag}"),
                mismatches.is_empty(),
                json!({"weights": orders.len(), "mismatches": mismatches}),
            );
        }
    }
    r
}

// ---------------------------------------------------------------- 4

/// Diagonal module on `≤ 2` generators of weights in `{0, 1}` over
/// `Z/p^e` with a random well-defined `d` raising weight, `η = 0`.
fn random_stage(rng: &mut impl Rng, p: u64, e: u32) -> CartierStage {
    let k = rng.gen_range(1..=2usize);
    let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=1)).collect();
    let exps: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=e)).collect();
    let orders: Vec<BigInt> = exps.iter().map(|&x| BigInt::from(p).pow(x)).collect();
    let mut d = IntMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if weights[j] == weights[i] + 1 {
                // c·ord_i ≡ 0 mod ord_j
                let step = &orders[j] / orders[i].gcd(&orders[j]);
                d[(i, j)] = step * rng.gen_range(0..p.pow(e));
            }
        }
    }
    let module = GradedEtaModule::trivial_action(EtaRing::Base, weights, IntMatrix::from_diagonal(&orders));
    CartierStage { module, d }
}

fn cartier_norm(rng: &mut impl Rng) -> SuiteReport {
    let mut r = SuiteReport::new("cartier-norm");
    for (p, m, bound) in [(2u64, 1u32, 1u64), (2, 2, 1), (2, 2, 2), (2, 3, 2), (3, 1, 1), (3, 2, 1), (3, 2, 2), (3, 3, 1)] {
        let tag = format!("W_{m}Ω of F_{p}[x], D = {bound}");
        match drw::to_cartier(p, m, bound, 0) {
            Ok(c) => {
                let rep = c.verify();
                r.check(format!("verify {tag}"), rep.valid, json!({"violations": rep.violations.iter().take(3).map(|v| v.identity.clone()).collect::<Vec<_>>()}));
                let cmp = compare_norm(&c);
                r.check(format!("F̂V̂ = norm, {tag}"), cmp.as_ref().is_ok_and(|x| x.equal), json!(cmp.map_err(|e| e.to_string())));
            }
            Err(e) => r.check(format!("verify {tag}"), false, json!({"error": e.to_string()})),
        }
    }
    for p in [2u64, 3] {
        let mut catalog: Vec<(String, EtaCartierComplex)> = vec![(format!("W_4(F_{p})"), EtaCartierComplex::witt(p, 4))];
        for (name, d) in DieudonneModule::catalog(p, 4) {
            catalog.push((format!("{name} Dieudonné module, p = {p}"), dieudonne::to_cartier(&d)));
        }
        for (name, c) in catalog {
            let cmp = compare_norm(&c.as_truncated());
            r.check(format!("F̂V̂ = norm, {name}"), cmp.as_ref().is_ok_and(|x| x.equal), json!(cmp.map_err(|e| e.to_string())));
        }
    }
    for p in [2u64, 3] {
        for e in [2u32, 3] {
            let mut bad = None;
            let samples = 100;
            for _ in 0..samples {
                let st = random_stage(rng, p, e);
                let fixed = fixed_pi0(p, &st).group.order();
                let brute: Option<u64> = (-1..=1).map(|w| oracle::brute_fixed_count(p, &st, w)).product();
                let orbit = orbit_pi0(p, &st).module.group().order();
                let brute_orbit = oracle::brute_orbit_order(p, &st);
                let ok = fixed == brute.map(BigInt::from) && orbit == brute_orbit.map(BigInt::from);
                if !ok {
                    bad = Some(json!({"module": st, "fixed": fixed.map(|x| x.to_string()), "fixed_brute": brute, "orbit": orbit.map(|x| x.to_string()), "orbit_brute": brute_orbit}));
                    break;
                }
            }
            r.check(format!("fixed/orbit vs enumeration over Z/{}", p.pow(e)), bad.is_none(), json!({"samples": samples, "counterexample": bad}));
        }
    }
    r
}

// ---------------------------------------------------------------- 5

fn tc_fp() -> SuiteReport {
    let mut r = SuiteReport::new("tc-fp");
    for p in [2u64, 3, 5] {
        for k in 1..=8u32 {
            let q = BigInt::from(p).pow(k);
            let res = tc_heart(&EtaCartierComplex::witt(p, k), &IntMatrix::identity(1), k);
            let (ok, detail) = match res {
                Ok(h) => {
                    let h0 = h.h0.get(&0).map(|g| g.group_type()).unwrap_or_else(GroupType::zero);
                    let h1 = h.h_minus1.get(&0).map(|g| g.group_type()).unwrap_or_else(GroupType::zero);
                    let want = GroupType { invariant_factors: vec![q.clone()], free_rank: 0 };
                    (h0 == want && h1 == want, json!({"H0": h0.to_string(), "H-1": h1.to_string()}))
                }
                Err(e) => (false, json!({"error": e.to_string()})),
            };
            r.check(format!("TC of Z/{q}"), ok, detail);
        }
    }
    r
}

// ---------------------------------------------------------------- 6

fn tc_sphere() -> SuiteReport {
    let mut r = SuiteReport::new("tc-sphere");
    let n = 10;
    match rational_tc_sphere(n) {
        Ok((_, t)) => {
            let mut bad = Vec::new();
            for w in -1..=n {
                for deg in -2 * n..=2 * n {
                    let expect = (deg == 0 && w <= 0) || (deg % 2 != 0 && deg >= -1 && w <= (deg + 1) / 2);
                    let got = t.level(deg, w);
                    if got != if expect { GroupType::free(1) } else { GroupType::zero() } {
                        bad.push(json!({"degree": deg, "weight": w, "got": got.to_string()}));
                    }
                }
            }
            r.check("bigraded table, N = 10", bad.is_empty(), json!({"mismatches": bad, "table": t.to_json()}));
        }
        Err(e) => r.check("bigraded table, N = 10", false, json!({"error": e.to_string()})),
    }
    r
}

// ---------------------------------------------------------------- 7

fn n_series() -> SuiteReport {
    let mut r = SuiteReport::new("n-series");
    let bound = 20;
    for n in [2u64, 3, 4, 6, 12] {
        match cyclic_fixed_points_via_n_series(n, CoeffRing::Z, bound) {
            Ok((_, t)) => {
                let oracle = n_series_oracle(n, bound);
                r.check(format!("n = {n}: table vs periodic resolution"), t.levels == oracle.levels, json!({"table": t.to_json()}));
                let low = t.weights.0;
                let mut bad = Vec::new();
                for m in 0..=bound {
                    let expect = match m {
                        0 => GroupType::free(1),
                        m if m % 2 == 0 => GroupType::cyclic(n),
                        _ => GroupType::zero(),
                    };
                    if t.level(-m, low) != expect {
                        bad.push(json!({"degree": -m, "got": t.level(-m, low).to_string(), "expected": expect.to_string()}));
                    }
                }
                r.check(format!("n = {n}: H^*(BC_{n}; Z)"), bad.is_empty(), json!({"mismatches": bad}));
            }
            Err(e) => r.check(format!("n = {n}"), false, json!({"error": e.to_string()})),
        }
    }
    r
}

// ---------------------------------------------------------------- 8

fn z_tate_suite() -> SuiteReport {
    let mut r = SuiteReport::new("z-tate");
    let bound = 10;
    match z_tate(bound) {
        Ok(zt) => {
            let [_, _, cof] = zt.tables();
            r.check("cofiber vs orbit term", cof.levels == zt.orbit_oracle().levels, json!({"table": cof.to_json()}));
            let mut bad = Vec::new();
            let (w0, w1) = zt.weights();
            for i in w0..=w1 {
                for k in 1..=bound {
                    let expect = if k >= i.max(1) { GroupType::free(1) } else { GroupType::zero() };
                    if cof.level(2 * k, i) != expect {
                        bad.push(json!({"degree": 2 * k, "weight": i}));
                    }
                }
            }
            r.check("Z in degrees 2..2D at weights ≤ k", bad.is_empty(), json!({"mismatches": bad}));
            let les = zt.map.check_long_exact_sequence(zt.degrees(), zt.weights());
            r.check("long exact sequence", les.is_ok(), json!({"error": les.err()}));
        }
        Err(e) => r.check("z-tate", false, json!({"error": e.to_string()})),
    }
    r
}

// ---------------------------------------------------------------- 9

fn v_complete(rng: &mut impl Rng) -> SuiteReport {
    let mut r = SuiteReport::new("v-complete");
    for (p, m, bound) in [(2u64, 1u32, 1u64), (2, 2, 1), (3, 1, 1), (3, 2, 1), (2, 2, 2), (2, 3, 1)] {
        let c = drw::to_cartier(p, m, bound, 0).unwrap();
        r.check(format!("W_{m}Ω of F_{p}[x], D = {bound} complete"), is_derived_v_complete(&c, 6), json!({}));
    }
    for p in [2u64, 3] {
        let f = DieudonneModule::formal(p, 6);
        let ss = DieudonneModule::supersingular(p, 6);
        for (name, d) in [("formal", f.clone()), ("supersingular", ss.clone()), ("formal + supersingular", f.direct_sum(&ss))] {
            r.check(format!("{name}, p = {p} complete"), is_v_complete(&d), json!({}));
        }
        let bad = EtaCartierComplex::weight_zero(p, 6, IntMatrix::scalar(1, &BigInt::from(p)), IntMatrix::identity(1));
        r.check(format!("Z/{p}^6 with V = 1 not complete"), !is_derived_v_complete(&bad.as_truncated(), 6), json!({}));
        let mut disagree = Vec::new();
        let mut samples: Vec<DieudonneModule> = DieudonneModule::catalog(p, 6).into_iter().map(|(_, m)| m).collect();
        samples.extend((0..50).map(|_| dieudonne::random_module(rng, p, 6)));
        let formal_count = samples.iter().filter(|m| is_formal(m)).count();
        for m in &samples {
            if is_formal(m) != is_v_complete(m) {
                disagree.push(json!(m));
            }
        }
        r.check(
            format!("formal ⇔ complete, catalog + 50 random, p = {p}"),
            disagree.is_empty(),
            json!({"modules": samples.len(), "formal": formal_count, "disagreements": disagree}),
        );
    }
    r
}

// ---------------------------------------------------------------- 10

fn bridge() -> SuiteReport {
    let mut r = SuiteReport::new("bridge");
    let k = 6;
    for p in [2u64, 3] {
        let cat = DieudonneModule::catalog(p, k);
        for (a, m) in &cat {
            for (b, n) in &cat {
                let name = format!("Hom({a}, {b}), p = {p}");
                match bridge_faithfulness(m, n, k) {
                    Ok(rep) => r.check(
                        name,
                        rep.agree,
                        json!({"dieudonne": rep.dieudonne.at_depth.group_type.to_string(), "cartier": rep.cartier.at_depth.group_type.to_string()}),
                    ),
                    Err(e) => r.check(name, false, json!({"error": e.to_string()})),
                }
            }
        }
        let ss = DieudonneModule::supersingular(p, k);
        let end = hom_dieudonne(&ss, &ss, k).map(|h| h.at_depth);
        let (ok, detail) = match end {
            Ok(h) => (
                h.full == 4,
                json!({"rank": h.full, "expected_rank": 4, "group": h.group_type.to_string(),
                       "note": "commutant of F = [[0,p],[1,0]] over Z_p is Z_p[F], free of rank 2"}),
            ),
            Err(e) => (false, json!({"error": e.to_string()})),
        };
        r.check(format!("End(supersingular) rank 4 over Z/{p}^{k}"), ok, detail);
    }
    r
}

// ---------------------------------------------------------------- 11

fn heart_ring() -> SuiteReport {
    let mut r = SuiteReport::new("heart-ring");
    let g = ring_normal_form(EtaRing::Circle, 8);
    for w in 0..=8i64 {
        let t = g.get(w).group_type();
        let want = match w {
            0 => GroupType::free(1),
            1 => GroupType { invariant_factors: vec![BigInt::from(2)], free_rank: 1 },
            _ => GroupType { invariant_factors: vec![BigInt::from(2), BigInt::from(2)], free_rank: 0 },
        };
        r.check(format!("weight {w}"), t == want, json!({"group": t.to_string(), "expected": want.to_string()}));
    }
    r
}

// ---------------------------------------------------------------- 12

fn koszul_braiding(rng: &mut impl Rng) -> SuiteReport {
    let mut r = SuiteReport::new("koszul-braiding");
    let mut bad = None;
    let mut odd_odd = 0;
    for i in 0..100 {
        let m = random_base_module(rng, 3, 3);
        let n = random_base_module(rng, 3, 3);
        odd_odd += m.weights.iter().filter(|w| *w % 2 == 1).count() * n.weights.iter().filter(|w| *w % 2 == 1).count();
        match check_braiding(&m, &n) {
            Ok(rep) if rep.ok() => {}
            Ok(rep) => {
                bad = Some(json!({"pair": i, "report": rep, "m": m, "n": n}));
                break;
            }
            Err(e) => {
                bad = Some(json!({"pair": i, "error": e.to_string()}));
                break;
            }
        }
    }
    r.check("100 random pairs", bad.is_none(), json!({"odd_odd_generator_pairs": odd_odd, "failure": bad}));
    r
}
