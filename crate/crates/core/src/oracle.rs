//! Independent computations used to cross-check the main algorithms.
//!
//! Nothing here calls the operator code it is meant to check: the ghost
//! route rebuilds degree-0 de Rham–Witt elements inside `W(Z[x])`, the
//! Dwork model works with explicit fractional-exponent forms, the Kähler
//! quotient is a presentation solved by SNF, and the fixed/orbit checks
//! enumerate finite groups.

use std::collections::{BTreeMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::cartier::CartierStage;
use crate::drw::{DRWComplex, DRWElement, DrwError, Weight};
use crate::linalg::{FGAbelianGroup, IntMatrix};
use crate::witt::{IntPoly, PrimeField, PrimeFieldPoly, WittError, WittVector};

fn pw(p: u64, e: u32) -> BigInt {
    BigInt::from(p).pow(e)
}

// ---------------------------------------------------------------- Witt

/// `k·1` in `W_n(F_p)` by repeated Witt addition of `1`.
pub fn witt_integer_by_addition(p: u64, n: usize, k: u64) -> Result<WittVector<PrimeField>, WittError> {
    let f = PrimeField { p };
    let one = WittVector::one(p, f.clone(), n)?;
    let mut acc = WittVector::zero(p, f, n)?;
    for _ in 0..k {
        acc = acc.add(&one)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------- ghost route

/// Ghost components of the Teichmüller-style lift of a degree-0 element:
/// `V^s(c[x^j])` has `w_n = p^s c x^{j p^{n−s}}` for `n ≥ s`.
pub fn drw_ghost(e: &DRWElement) -> Vec<Vec<BigInt>> {
    assert_eq!(e.q, 0, "ghost route is for degree 0");
    let p = e.p;
    let mut out = vec![Vec::new(); e.m as usize];
    for (s, j, c) in e.terms() {
        for (n, slot) in out.iter_mut().enumerate().skip(s as usize) {
            let deg = (j * p.pow(n as u32 - s)) as usize;
            if slot.len() <= deg {
                slot.resize(deg + 1, BigInt::zero());
            }
            slot[deg] += pw(p, s) * c;
        }
    }
    out
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

/// Reduction to `W_m(F_p[x])` of the vector with the given ghost components.
pub fn witt_from_ghost(p: u64, ghost: &[Vec<BigInt>], deg_bound: usize) -> Result<WittVector<PrimeFieldPoly>, WittError> {
    let g: Vec<Vec<BigInt>> = ghost.iter().cloned().map(trim).collect();
    WittVector::from_ghost(p, IntPoly, &g)?.reduce(deg_bound)
}

pub fn drw_to_witt(e: &DRWElement, deg_bound: usize) -> Result<WittVector<PrimeFieldPoly>, WittError> {
    witt_from_ghost(e.p, &drw_ghost(e), deg_bound)
}

/// `a·b` computed by the normal form versus the ghost route.
pub fn ghost_product_agrees(a: &DRWElement, b: &DRWElement, deg_bound: usize) -> Result<bool, WittError> {
    let ga = drw_ghost(a);
    let gb = drw_ghost(b);
    let prod: Vec<Vec<BigInt>> = ga.iter().zip(&gb).map(|(x, y)| poly_mul(x, y)).collect();
    let via_ghost = witt_from_ghost(a.p, &prod, deg_bound)?;
    let direct = drw_to_witt(&a.mul(b).expect("same space"), deg_bound)?;
    Ok(via_ghost == direct)
}

pub fn ghost_sum_agrees(a: &DRWElement, b: &DRWElement, deg_bound: usize) -> Result<bool, WittError> {
    let wa = drw_to_witt(a, deg_bound)?;
    let wb = drw_to_witt(b, deg_bound)?;
    Ok(wa.add(&wb)? == drw_to_witt(&a.add(b).expect("same space"), deg_bound)?)
}

// ---------------------------------------------------------------- Dwork model

/// An element of the integral-forms model: `(degree, weight) ↦ num/p^den`,
/// the coefficient of `x^w` (degree 0) or `x^{w−1}dx` (degree 1).
#[derive(Clone, Debug, Default)]
pub struct DworkForm {
    pub p: u64,
    pub terms: BTreeMap<(u8, Weight), (BigInt, u32)>,
}

fn norm_weight(p: u64, mut s: u32, mut j: u64) -> Weight {
    while s > 0 && j % p == 0 {
        s -= 1;
        j /= p;
    }
    if j == 0 {
        s = 0;
    }
    Weight { s, j }
}

fn add_weights(p: u64, a: Weight, b: Weight) -> Weight {
    let s = a.s.max(b.s);
    norm_weight(p, s, a.j * p.pow(s - a.s) + b.j * p.pow(s - b.s))
}

impl DworkForm {
    fn zero(p: u64) -> Self {
        DworkForm { p, terms: BTreeMap::new() }
    }

    fn add_term(&mut self, q: u8, w: Weight, num: BigInt, den: u32) {
        let p = BigInt::from(self.p);
        let e = self.terms.entry((q, w)).or_insert((BigInt::zero(), 0));
        let d = e.1.max(den);
        let mut n = &e.0 * p.clone().pow(d - e.1) + num * p.clone().pow(d - den);
        let mut d = d;
        while d > 0 && n.is_multiple_of(&p) {
            n /= &p;
            d -= 1;
        }
        *e = (n, d);
        if e.0.is_zero() {
            self.terms.remove(&(q, w));
        }
    }

    /// Image of a normal-form element: `V^s([x]^j) ↦ p^s x^w`,
    /// `[x]^{j−1}d[x] ↦ x^{j−1}dx`, `dV^s([x]^j) ↦ j x^{w−1}dx`.
    pub fn embed(e: &DRWElement) -> Self {
        let mut f = Self::zero(e.p);
        for (s, j, c) in e.terms() {
            let w = Weight { s, j };
            let c = BigInt::from(c);
            match (e.q, s) {
                (0, _) => f.add_term(0, w, c * pw(e.p, s), 0),
                (_, 0) => f.add_term(1, w, c, 0),
                _ => f.add_term(1, w, c * j, 0),
            }
        }
        f
    }

    pub fn d(&self) -> Self {
        let mut f = Self::zero(self.p);
        for (&(q, w), (n, den)) in &self.terms {
            if q == 0 && w.j != 0 {
                f.add_term(1, w, n * w.j, den + w.s);
            }
        }
        f
    }

    /// `p^{−q}φ*` with `φ*(x) = x^p`.
    pub fn frobenius(&self) -> Self {
        let mut f = Self::zero(self.p);
        for (&(q, w), (n, den)) in &self.terms {
            f.add_term(q, norm_weight(self.p, w.s, w.j * self.p), n.clone(), *den);
        }
        f
    }

    pub fn verschiebung(&self) -> Self {
        let mut f = Self::zero(self.p);
        for (&(q, w), (n, den)) in &self.terms {
            let w2 = if w.j == 0 { w } else { norm_weight(self.p, w.s + 1, w.j) };
            f.add_term(q, w2, n * self.p, *den);
        }
        f
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut f = Self::zero(self.p);
        for (&(q1, w1), (n1, d1)) in &self.terms {
            for (&(q2, w2), (n2, d2)) in &other.terms {
                if q1 + q2 <= 1 {
                    f.add_term(q1 + q2, add_weights(self.p, w1, w2), n1 * n2, d1 + d2);
                }
            }
        }
        f
    }

    /// Class in `E/Fil^m` written in the normal-form basis; `None` if some
    /// coefficient is not integral where the model requires it.
    pub fn reduce(&self, m: u32, q: u8) -> Option<DRWElement> {
        let p = self.p;
        let pb = BigInt::from(p);
        let mut out = DRWElement::zero(p, m, q);
        for (&(qq, w), (n, den)) in &self.terms {
            if qq != q {
                continue;
            }
            let shift = if q == 0 { den + w.s } else { *den };
            let scale = pb.clone().pow(shift);
            if !n.is_multiple_of(&scale) {
                return None;
            }
            let mut c = n / scale;
            if w.s >= m {
                continue;
            }
            let md = pw(p, m - w.s);
            if q == 1 && w.s > 0 {
                let inv = BigInt::from(w.j).extended_gcd(&md).x;
                c *= inv;
            }
            let c = c.mod_floor(&md).to_i64()?;
            let t = if q == 0 {
                DRWElement::v_monomial(p, m, w.s, w.j, c)
            } else if w.s == 0 {
                DRWElement::omega(p, m, w.j, c)
            } else {
                DRWElement::dv_monomial(p, m, w.s, w.j, c)
            };
            out = out.add(&t).ok()?;
        }
        Some(out)
    }
}

/// `|E^q_w / Fil^m_w|` from the model, `Fil^m = V^m E + dV^m E`.
pub fn dwork_weight_order(p: u64, m: u32, q: u8, w: Weight) -> BigInt {
    // generator of E^q_w relative to x^w (resp. x^{w−1}dx)
    let gen = |w: Weight| -> (BigInt, u32) { if q == 0 { (pw(p, w.s), 0) } else { (BigInt::one(), 0) } };
    if q == 1 && w.j == 0 {
        return BigInt::one();
    }
    let up = norm_weight(p, w.s, w.j * p.pow(m));
    let mut fil = DworkForm::zero(p);
    let mut dfil = DworkForm::zero(p);
    let (n, d) = gen(up);
    let mut src = DworkForm::zero(p);
    src.add_term(q, up, n, d);
    for _ in 0..m {
        src = src.verschiebung();
    }
    for (k, v) in src.terms {
        fil.terms.insert(k, v);
    }
    if q == 1 {
        let mut src0 = DworkForm::zero(p);
        src0.add_term(0, up, pw(p, up.s), 0);
        for _ in 0..m {
            src0 = src0.verschiebung();
        }
        dfil = src0.d();
    }
    let (gn, gd) = gen(w);
    // each Fil generator as a multiple of the E generator: (n/p^d)/(gn/p^gd)
    let mut rows = IntMatrix::zeros(0, 1);
    for f in [&fil, &dfil] {
        if let Some((n, d)) = f.terms.get(&(q, w)) {
            let num = n * pw(p, gd);
            let den = &gn * pw(p, *d);
            assert!(num.is_multiple_of(&den), "filtration generator outside the lattice");
            rows.push_row(vec![num / den]);
        }
    }
    FGAbelianGroup::new(1, rows).order().unwrap_or_else(|| BigInt::from(-1))
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct OracleReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl OracleReport {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares `d`, `F`, `V` on every basis element of `W_mΩ^{≤bound}` and the
/// given products with the Dwork model.
pub fn dwork_check(c: &DRWComplex, products: &[(DRWElement, DRWElement)]) -> OracleReport {
    let mut r = OracleReport::default();
    let m = c.m;
    for q in 0..2u8 {
        for e in c.elements(q) {
            let f = DworkForm::embed(&e);
            if q == 0 {
                r.record(f.d().reduce(m, 1).as_ref() == Some(&e.d()), || format!("d {e}"));
            }
            r.record(f.verschiebung().reduce(m + 1, q).as_ref() == Some(&e.verschiebung()), || format!("V {e}"));
            if m > 1 {
                let want = e.frobenius().ok();
                r.record(f.frobenius().reduce(m - 1, q) == want, || format!("F {e}"));
            }
        }
    }
    for (a, b) in products {
        let f = DworkForm::embed(a).mul(&DworkForm::embed(b));
        let ab = a.mul(b).expect("same space");
        r.record(f.reduce(m, ab.q).as_ref() == Some(&ab), || format!("({a})·({b})"));
    }
    r
}

// ---------------------------------------------------------------- Kähler quotient

/// `V^s([x]^{n−1}d[x])` as symbols `u·dv` (degree-0 weights), from the
/// rules `V(F(y)) = p·y`, `Fd[x] = [x]^{p−1}d[x]` and `Vd = p·dV`.
fn v_omega_symbols(p: u64, m: u32, mut s: u32, mut n: u64, mut c: BigInt) -> Vec<(Weight, Weight, BigInt)> {
    while s > 0 && n % p == 0 {
        c *= p;
        s -= 1;
        n /= p;
    }
    if s == 0 {
        return vec![(Weight { s: 0, j: n - 1 }, Weight { s: 0, j: 1 }, c)];
    }
    let md = pw(p, m);
    let inv = BigInt::from(n).extended_gcd(&md).x;
    vec![(Weight { s: 0, j: 0 }, Weight { s, j: n }, c * inv * pw(p, s))]
}

fn expand(e: &DRWElement) -> Vec<(Weight, BigInt)> {
    e.terms().map(|(s, j, c)| (Weight { s, j }, BigInt::from(c))).collect()
}

/// Order of the weight-`w` part of the universal quotient: symbols
/// `u·dv` (`u`, `v` degree-0 basis weights, `v > 0`, `u + v = w`) modulo
/// coefficient orders, Leibniz multiplied by every basis element, and the
/// instances `V^s(a)·dV^t(b) = V^s(a·F^{s−t}db)` for `s ≥ t` rewritten by
/// `Fd[x] = [x]^{p−1}d[x]`.
pub fn kahler_weight_order(p: u64, m: u32, w: Weight) -> BigInt {
    if w.j == 0 {
        return BigInt::one();
    }
    // weights in units of 1/p^{m−1}
    let units = |x: Weight| x.j * p.pow(m - 1 - x.s);
    let wt = |k: u64| norm_weight(p, m - 1, k);
    let total = units(w);
    let mut index = BTreeMap::new();
    for k in 0..total {
        index.insert((wt(k), wt(total - k)), index.len());
    }
    let n = index.len();
    let sym = |u: Weight, v: Weight| -> usize { index[&(u, v)] };
    let order = |x: Weight| pw(p, m - x.s);
    let basis = |x: Weight| DRWElement::basis(p, m, 0, x.s, x.j);
    let mut rows = IntMatrix::zeros(0, n);
    let mut push = |terms: Vec<(usize, BigInt)>| {
        let mut row = vec![BigInt::zero(); n];
        for (i, c) in terms {
            row[i] += c;
        }
        rows.push_row(row);
    };
    for (&(u, v), &i) in &index {
        push(vec![(i, order(u))]);
        push(vec![(i, order(v))]);
        if u.s >= v.s {
            let big_n = u.j + v.j * p.pow(u.s - v.s);
            let mut terms = vec![(i, BigInt::one())];
            for (a, b, c) in v_omega_symbols(p, m, u.s, big_n, BigInt::from(v.j)) {
                terms.push((sym(a, b), -c));
            }
            push(terms);
        }
    }
    // z·d(ab) = (za)·db + (zb)·da
    for kz in 0..total {
        let z = wt(kz);
        let rest = total - kz;
        for ka in 1..rest {
            let kb = rest - ka;
            if ka > kb {
                break;
            }
            let (a, b) = (wt(ka), wt(kb));
            let ab = basis(a).mul(&basis(b)).expect("same space");
            let mut terms = Vec::new();
            for (x, c) in expand(&ab) {
                if x.j > 0 {
                    terms.push((sym(z, x), c));
                }
            }
            for (x, y) in [(a, b), (b, a)] {
                for (zx, c) in expand(&basis(z).mul(&basis(x)).expect("same space")) {
                    terms.push((sym(zx, y), -c));
                }
            }
            push(terms);
        }
    }
    FGAbelianGroup::new(n, rows).order().expect("finite")
}

/// All weights `j/p^s ≤ bound` with `s < m`, positive.
pub fn weights_up_to(p: u64, m: u32, bound: u64) -> Vec<Weight> {
    let top = p.pow(m - 1);
    (1..=bound * top).map(|k| norm_weight(p, m - 1, k)).collect()
}

// ---------------------------------------------------------------- brute force

/// Enumerates a finite group `⊕ Z/orders[i]` given as diagonal orders.
fn elements(orders: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &o in orders {
        out = out.into_iter().flat_map(|v| (0..o).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

fn diagonal_orders(g: &FGAbelianGroup) -> Option<Vec<u64>> {
    let rel = g.relations();
    let mut orders = vec![0u64; g.ngens()];
    for r in rel.row_iter() {
        let nz: Vec<usize> = (0..r.len()).filter(|&i| !r[i].is_zero()).collect();
        if nz.len() != 1 {
            return None;
        }
        let o = r[nz[0]].abs().to_u64()?;
        orders[nz[0]] = if orders[nz[0]] == 0 { o } else { orders[nz[0]].gcd(&o) };
    }
    orders.iter().all(|&o| o > 0).then_some(orders)
}

/// `#{(x, y) ∈ M_w × M_{w+1} : d x = p y}` by enumeration; the module must
/// be finite with a diagonal presentation.
pub fn brute_fixed_count(p: u64, m: &CartierStage, w: i64) -> Option<u64> {
    let orders = diagonal_orders(&m.group())?;
    let (ix, iy) = (m.module.gens_in_weight(w), m.module.gens_in_weight(w + 1));
    let ox: Vec<u64> = ix.iter().map(|&i| orders[i]).collect();
    let oy: Vec<u64> = iy.iter().map(|&i| orders[i]).collect();
    let ys = elements(&oy);
    let mut count = 0;
    for x in elements(&ox) {
        for y in &ys {
            let ok = iy.iter().enumerate().all(|(b, &j)| {
                let mut v = -(BigInt::from(p) * y[b]);
                for (a, &i) in ix.iter().enumerate() {
                    v += &m.d[(i, j)] * x[a];
                }
                v.is_multiple_of(&BigInt::from(orders[j]))
            });
            count += ok as u64;
        }
    }
    Some(count)
}

/// Order of `(M ⊕ eM)/⟨d m − p·e m, e·d m − p·η·e m⟩` by closing the
/// relation subgroup under addition inside the finite group.
pub fn brute_orbit_order(p: u64, m: &CartierStage) -> Option<u64> {
    let orders = diagonal_orders(&m.group())?;
    let n = orders.len();
    let all: Vec<u64> = orders.iter().chain(orders.iter()).copied().collect();
    let reduce = |v: Vec<BigInt>| -> Vec<u64> {
        v.iter().zip(&all).map(|(c, o)| c.mod_floor(&BigInt::from(*o)).to_u64().unwrap()).collect()
    };
    let mut gens = Vec::new();
    for i in 0..n {
        let mut a = vec![BigInt::zero(); 2 * n];
        let mut b = vec![BigInt::zero(); 2 * n];
        for j in 0..n {
            a[j] = m.d[(i, j)].clone();
            b[n + j] = &m.d[(i, j)] - BigInt::from(p) * &m.module.eta[(i, j)];
        }
        a[n + i] -= BigInt::from(p);
        gens.push(reduce(a));
        gens.push(reduce(b));
    }
    let zero = vec![0u64; 2 * n];
    let mut seen: HashSet<Vec<u64>> = HashSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero]);
    while let Some(v) = queue.pop_front() {
        for g in &gens {
            let s: Vec<u64> = v.iter().zip(g).zip(&all).map(|((a, b), o)| (a + b) % o).collect();
            if seen.insert(s.clone()) {
                queue.push_back(s);
            }
        }
    }
    let size: u64 = all.iter().product();
    Some(size / seen.len() as u64)
}

/// Kähler and Dwork orders of `W_mΩ^1` up to x-degree `bound`, per weight.
pub fn degree_one_orders(c: &DRWComplex) -> Result<Vec<(Weight, u64, BigInt, BigInt)>, DrwError> {
    Ok(weights_up_to(c.p, c.m, c.bound)
        .into_iter()
        .map(|w| (w, c.weight_order(1, w), kahler_weight_order(c.p, c.m, w), dwork_weight_order(c.p, c.m, 1, w)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartier::fixed_pi0;
    use crate::cartier::{orbit_pi0, EtaCartierComplex};

    #[test]
    fn witt_integers() {
        let w = witt_integer_by_addition(2, 3, 5).unwrap();
        assert_eq!(w, WittVector::from_integer(2, PrimeField { p: 2 }, 3, &BigInt::from(5)).unwrap());
    }

    #[test]
    fn ghost_route_small() {
        let (p, m) = (3, 2);
        let a = DRWElement::v_monomial(p, m, 1, 2, 1).add(&DRWElement::monomial(p, m, 1, 4)).unwrap();
        let b = DRWElement::v_monomial(p, m, 1, 1, 2);
        assert!(ghost_product_agrees(&a, &b, 8).unwrap());
        assert!(ghost_sum_agrees(&a, &b, 8).unwrap());
        let w = drw_to_witt(&DRWElement::v_monomial(p, m, 1, 0, 1), 2).unwrap();
        assert_eq!(w, WittVector::from_integer(p, PrimeFieldPoly { p, deg_bound: 2 }, 2, &BigInt::from(3)).unwrap());
    }

    #[test]
    fn dwork_orders_match_basis() {
        for p in [2, 3] {
            for m in 1..=3 {
                let c = DRWComplex::new(p, m, 3).unwrap();
                for w in weights_up_to(p, m, 3) {
                    for q in 0..2 {
                        assert_eq!(dwork_weight_order(p, m, q, w), BigInt::from(c.weight_order(q, w)), "p={p} m={m} q={q} w={w:?}");
                    }
                }
                assert!(dwork_check(&c, &[]).passed());
            }
        }
    }

    #[test]
    fn kahler_orders_match_basis() {
        for p in [2, 3] {
            for m in 1..=3 {
                let c = DRWComplex::new(p, m, 3).unwrap();
                for (w, mine, kahler, _) in degree_one_orders(&c).unwrap() {
                    assert_eq!(BigInt::from(mine), kahler, "p={p} m={m} w={w:?}");
                }
            }
        }
    }

    #[test]
    fn brute_force_fixed_and_orbit() {
        let c = EtaCartierComplex::discrete(
            2,
            vec![0, 1],
            IntMatrix::from_i64(&[&[4, 0], &[0, 8]]),
            IntMatrix::from_i64(&[&[0, 2], &[0, 0]]),
            IntMatrix::identity(2),
            IntMatrix::identity(2),
        )
        .unwrap();
        let st = c.stage();
        let n = fixed_pi0(2, &st);
        let total: u64 = (-1..=1).map(|w| brute_fixed_count(2, &st, w).unwrap()).product();
        assert_eq!(n.group.order(), Some(BigInt::from(total)));
        let o = orbit_pi0(2, &st);
        assert_eq!(o.module.group().order(), Some(BigInt::from(brute_orbit_order(2, &st).unwrap())));
    }
}
