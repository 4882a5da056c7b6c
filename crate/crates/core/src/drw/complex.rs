use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cartier::{CartierStage, TruncatedCartierComplex};
use crate::eta::{EtaRing, GradedEtaModule};
use crate::linalg::{FGAbelianGroup, GroupHom, IntMatrix, LeftSolver};
use crate::witt::structure::is_prime;

use super::element::{pow, DRWElement, Weight};
use super::DrwError;

#[derive(Debug)]
struct Basis {
    idx: [Vec<(u32, u64)>; 2],
    pos: [HashMap<(u32, u64), usize>; 2],
}

type BasisKey = (u64, u32, u64);

fn basis_cache() -> &'static RwLock<HashMap<BasisKey, Arc<Basis>>> {
    static CACHE: OnceLock<RwLock<HashMap<BasisKey, Arc<Basis>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn enumerate(p: u64, m: u32, bound: u64, q: u8) -> Vec<(u32, u64)> {
    let mut out: Vec<(u32, u64)> = (q as u64..=bound).map(|j| (0, j)).collect();
    for s in 1..m {
        out.extend((1..=bound * pow(p, s)).filter(|j| j % p != 0).map(|j| (s, j)));
    }
    out
}

fn basis(p: u64, m: u32, bound: u64) -> Arc<Basis> {
    let key = (p, m, bound);
    if let Some(b) = basis_cache().read().expect("basis cache").get(&key) {
        return b.clone();
    }
    let idx = [enumerate(p, m, bound, 0), enumerate(p, m, bound, 1)];
    let pos = [0, 1].map(|q| idx[q].iter().enumerate().map(|(i, k)| (*k, i)).collect());
    let b = Arc::new(Basis { idx, pos });
    basis_cache().write().expect("basis cache").insert(key, b.clone());
    b
}

/// `W_mΩ^•_{F_p[x]}` cut at x-degree `bound`; `bound = 0` gives `W_m(F_p)`.
#[derive(Clone, Debug)]
pub struct DRWComplex {
    pub p: u64,
    pub m: u32,
    pub bound: u64,
    basis: Arc<Basis>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Operator {
    D,
    F,
    V,
    R,
}

impl Operator {
    pub fn parse(s: &str) -> Option<Operator> {
        match s {
            "d" | "D" => Some(Operator::D),
            "F" | "f" => Some(Operator::F),
            "V" | "v" => Some(Operator::V),
            "R" | "r" => Some(Operator::R),
            _ => None,
        }
    }

    pub fn apply(&self, e: &DRWElement) -> Result<DRWElement, DrwError> {
        match self {
            Operator::D => Ok(e.d()),
            Operator::F => e.frobenius(),
            Operator::V => Ok(e.verschiebung()),
            Operator::R => e.restrict(),
        }
    }
}

/// Largest `p^m` accepted; coefficients are reduced machine integers.
pub const MAX_MODULUS: u64 = 1 << 31;
pub const MAX_BOUND: u64 = 1 << 14;

pub(crate) fn check_params(p: u64, m: u32) -> Result<(), DrwError> {
    if !is_prime(p) {
        return Err(DrwError::NonPrime(p));
    }
    if m == 0 {
        return Err(DrwError::TruncationUnderflow);
    }
    if p.checked_pow(m).map_or(true, |q| q > MAX_MODULUS) {
        return Err(DrwError::TooLarge(format!("p^m = {p}^{m} exceeds {MAX_MODULUS}")));
    }
    Ok(())
}

impl DRWComplex {
    pub fn new(p: u64, m: u32, bound: u64) -> Result<Self, DrwError> {
        check_params(p, m)?;
        if bound > MAX_BOUND {
            return Err(DrwError::TooLarge(format!("weight bound {bound} exceeds {MAX_BOUND}")));
        }
        Ok(DRWComplex { p, m, bound, basis: basis(p, m, bound) })
    }

    /// `W_mΩ_{F_p} = W_m(F_p)` in degree 0.
    pub fn perfect(p: u64, m: u32) -> Result<Self, DrwError> {
        Self::new(p, m, 0)
    }

    pub fn basis(&self, q: u8) -> &[(u32, u64)] {
        match q {
            0 | 1 => &self.basis.idx[q as usize],
            _ => &[],
        }
    }

    pub fn rank(&self, q: u8) -> usize {
        self.basis(q).len()
    }

    /// Order of the coefficient ring of terms with `V`-index `s`.
    pub fn order(&self, s: u32) -> u64 {
        pow(self.p, self.m - s)
    }

    pub fn element(&self, q: u8, i: usize) -> DRWElement {
        let (s, j) = self.basis(q)[i];
        DRWElement::basis(self.p, self.m, q, s, j)
    }

    pub fn elements(&self, q: u8) -> impl Iterator<Item = DRWElement> + '_ {
        (0..self.rank(q)).map(move |i| self.element(q, i))
    }

    pub fn coords(&self, e: &DRWElement) -> Result<Vec<BigInt>, DrwError> {
        if e.p != self.p || e.m != self.m {
            return Err(DrwError::Mismatch(format!("element of W_{}Ω in W_{}Ω", e.m, self.m)));
        }
        let mut v = vec![BigInt::zero(); self.rank(e.q)];
        for (s, j, c) in e.terms() {
            let i = self.basis.pos[e.q as usize]
                .get(&(s, j))
                .ok_or_else(|| DrwError::DegreeOverflow { weight: Weight { s, j }.render(self.p), bound: self.bound })?;
            v[*i] = BigInt::from(c);
        }
        Ok(v)
    }

    pub fn relations(&self, q: u8) -> IntMatrix {
        let diag: Vec<BigInt> = self.basis(q).iter().map(|&(s, _)| BigInt::from(self.order(s))).collect();
        IntMatrix::from_diagonal(&diag)
    }

    pub fn group(&self, q: u8) -> FGAbelianGroup {
        FGAbelianGroup::new(self.rank(q), self.relations(q))
    }

    /// `|W_mΩ^q|` restricted to weights `≤ d`.
    pub fn order_up_to(&self, q: u8, d: u64) -> BigInt {
        self.basis(q)
            .iter()
            .filter(|&&(s, j)| Weight { s, j }.fits(self.p, d))
            .fold(BigInt::one(), |acc, &(s, _)| acc * self.order(s))
    }

    /// Order of the weight-`(j/p^s)` part, as counted by the normal form.
    pub fn weight_order(&self, q: u8, w: Weight) -> u64 {
        self.basis.pos[q as usize].get(&(w.s, w.j)).map_or(1, |_| self.order(w.s))
    }

    /// Complex receiving `op`.
    pub fn target(&self, op: Operator) -> Result<DRWComplex, DrwError> {
        match op {
            Operator::D => Ok(self.clone()),
            Operator::F if self.m > 1 => Self::new(self.p, self.m - 1, self.p * self.bound),
            Operator::R if self.m > 1 => Self::new(self.p, self.m - 1, self.bound),
            Operator::V => Self::new(self.p, self.m + 1, self.bound),
            _ => Err(DrwError::TruncationUnderflow),
        }
    }

    /// Matrix of `op` on degree `q` (rows are images of basis elements).
    pub fn operator_matrix(&self, op: Operator, q: u8) -> Result<IntMatrix, DrwError> {
        let t = self.target(op)?;
        let tq = if op == Operator::D { q + 1 } else { q };
        let mut m = IntMatrix::zeros(0, t.rank(tq));
        for e in self.elements(q) {
            let img = op.apply(&e)?;
            m.push_row(if tq > 1 { Vec::new() } else { t.coords(&img)? });
        }
        Ok(m)
    }

    /// Both degrees as one generator list (degree 0 first).
    fn total_rank(&self) -> usize {
        self.rank(0) + self.rank(1)
    }

    fn total_coords(&self, e: &DRWElement) -> Result<Vec<BigInt>, DrwError> {
        let mut v = vec![BigInt::zero(); self.total_rank()];
        if e.q > 1 {
            return Ok(v);
        }
        let off = if e.q == 0 { 0 } else { self.rank(0) };
        for (i, c) in self.coords(e)?.into_iter().enumerate() {
            v[off + i] = c;
        }
        Ok(v)
    }

    fn total_matrix(
        &self,
        dst: &DRWComplex,
        f: impl Fn(&DRWElement) -> Result<DRWElement, DrwError>,
    ) -> Result<IntMatrix, DrwError> {
        let mut m = IntMatrix::zeros(0, dst.total_rank());
        for q in 0..2 {
            for e in self.elements(q) {
                m.push_row(dst.total_coords(&f(&e)?)?);
            }
        }
        Ok(m)
    }

    fn total_relations(&self) -> IntMatrix {
        IntMatrix::block_diag(&[&self.relations(0), &self.relations(1)])
    }

    /// Brutal truncation `W_mΩ^{≥i}`.
    pub fn hodge_brutal(&self, i: u8) -> DRWSubcomplex {
        let gens = [0u8, 1].map(|q| if q >= i { IntMatrix::identity(self.rank(q)) } else { IntMatrix::zeros(0, self.rank(q)) });
        DRWSubcomplex { complex: self.clone(), gens }
    }

    /// `Fil^n = V^n W_{m−n}Ω + dV^n W_{m−n}Ω`.
    pub fn standard_v_filtration(&self, n: u32) -> Result<DRWSubcomplex, DrwError> {
        let mut gens = [IntMatrix::zeros(0, self.rank(0)), IntMatrix::zeros(0, self.rank(1))];
        if n == 0 {
            return Ok(self.hodge_brutal(0));
        }
        if n < self.m {
            let src = DRWComplex::new(self.p, self.m - n, self.bound * pow(self.p, n))?;
            for q in 0..2u8 {
                for e in src.elements(q) {
                    let v = e.verschiebung_n(n);
                    gens[q as usize].push_row(self.coords(&v)?);
                    if q == 0 {
                        gens[1].push_row(self.coords(&v.d())?);
                    }
                }
            }
        }
        Ok(DRWSubcomplex { complex: self.clone(), gens })
    }

    pub fn to_json(&self) -> Value {
        let describe = |q: u8| -> Vec<Value> {
            self.basis(q)
                .iter()
                .map(|&(s, j)| {
                    let e = DRWElement::basis(self.p, self.m, q, s, j);
                    json!({"s": s, "j": j, "weight": Weight { s, j }.render(self.p), "order": self.order(s).to_string(), "element": e.to_string()})
                })
                .collect()
        };
        json!({
            "p": self.p,
            "m": self.m,
            "bound": self.bound,
            "degree0": describe(0),
            "degree1": describe(1),
            "order0": self.order_up_to(0, self.bound).to_string(),
            "order1": self.order_up_to(1, self.bound).to_string(),
        })
    }
}

/// A graded subgroup given by generators in each degree.
#[derive(Clone, Debug)]
pub struct DRWSubcomplex {
    pub complex: DRWComplex,
    pub gens: [IntMatrix; 2],
}

impl DRWSubcomplex {
    fn span(&self, q: u8) -> LeftSolver {
        LeftSolver::new(&self.gens[q as usize].vstack(&self.complex.relations(q)))
    }

    pub fn subgroup_order(&self, q: u8) -> BigInt {
        let g = &self.gens[q as usize];
        let hom = GroupHom { src: FGAbelianGroup::free(g.rows()), dst: self.complex.group(q), matrix: g.clone() };
        hom.image().order().expect("finite")
    }

    pub fn is_zero(&self) -> bool {
        (0..2).all(|q| self.complex.group(q).rows_are_zero(&self.gens[q as usize]).is_none())
    }

    pub fn contains(&self, e: &DRWElement) -> Result<bool, DrwError> {
        if e.q > 1 {
            return Ok(true);
        }
        Ok(self.span(e.q).contains(&self.complex.coords(e)?))
    }

    pub fn is_d_closed(&self) -> Result<bool, DrwError> {
        let c = &self.complex;
        let span = self.span(1);
        for row in self.gens[0].row_iter() {
            let mut e = DRWElement::zero(c.p, c.m, 0);
            for (i, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    let k = i64::try_from(x % BigInt::from(pow(c.p, c.m))).expect("small");
                    e = e.add(&c.element(0, i).scale(k))?;
                }
            }
            if !span.contains(&c.coords(&e.d())?) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `W_mΩ^{≤pD}` below `W_{m+1}Ω^{≤D}` with `R`, `F`, `V` between them;
/// degree `q` sits in weight `q − twist`, `η = 0`.
pub fn to_cartier(p: u64, m: u32, bound: u64, twist: i64) -> Result<TruncatedCartierComplex, DrwError> {
    let lower = DRWComplex::new(p, m, p * bound)?;
    let upper = DRWComplex::new(p, m + 1, bound)?;
    let stage = |c: &DRWComplex| -> Result<CartierStage, DrwError> {
        let mut weights = vec![-twist; c.rank(0)];
        weights.extend(vec![1 - twist; c.rank(1)]);
        let module = GradedEtaModule::trivial_action(EtaRing::Base, weights, c.total_relations());
        let d = c.total_matrix(c, |e| Ok(e.d()))?;
        Ok(CartierStage { module, d })
    };
    Ok(TruncatedCartierComplex {
        p,
        lower: stage(&lower)?,
        upper: stage(&upper)?,
        r: upper.total_matrix(&lower, DRWElement::restrict)?,
        f: upper.total_matrix(&lower, DRWElement::frobenius)?,
        v: lower.total_matrix(&upper, |e| Ok(e.verschiebung()))?,
    })
}

/// Random element with up to `terms` terms.
pub fn random_element<R: Rng>(rng: &mut R, c: &DRWComplex, q: u8, terms: usize) -> DRWElement {
    let mut e = DRWElement::zero(c.p, c.m, q);
    if c.rank(q) == 0 {
        return e;
    }
    for _ in 0..terms {
        let i = rng.gen_range(0..c.rank(q));
        let k = rng.gen_range(1..pow(c.p, c.m)) as i64;
        e = e.add(&c.element(q, i).scale(k)).expect("same space");
    }
    e
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityFailure {
    pub identity: String,
    pub element: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub p: u64,
    pub m: u32,
    pub bound: u64,
    pub checked: usize,
    pub failures: Vec<IdentityFailure>,
}

struct Checker {
    checked: usize,
    failures: Vec<IdentityFailure>,
}

impl Checker {
    fn check(&mut self, name: &str, x: &DRWElement, lhs: Result<DRWElement, DrwError>, rhs: Result<DRWElement, DrwError>) {
        self.checked += 1;
        match (lhs, rhs) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => self.failures.push(IdentityFailure {
                identity: name.into(),
                element: format!("{x}: {:?} vs {:?}", a.map(|e| e.to_string()), b.map(|e| e.to_string())),
            }),
        }
    }

    fn linear(&mut self, x: &DRWElement) {
        let p = x.p as i64;
        let m = x.m;
        self.check("d²=0", x, Ok(x.d().d()), Ok(DRWElement::zero(x.p, m, (x.q + 2).min(2))));
        self.check("FV=p", x, x.verschiebung().frobenius(), Ok(x.scale(p)));
        self.check("FdV=d", x, x.verschiebung().d().frobenius(), Ok(x.d()));
        self.check("Vd=pdV", x, Ok(x.d().verschiebung()), Ok(x.verschiebung().d().scale(p)));
        if m >= 2 {
            self.check("dF=pFd", x, x.frobenius().map(|e| e.d()), x.d().frobenius().map(|e| e.scale(p)));
            self.check("Rd=dR", x, x.d().restrict(), x.restrict().map(|e| e.d()));
            self.check("RV=VR", x, x.verschiebung().restrict(), x.restrict().map(|e| e.verschiebung()));
        }
        if m >= 3 {
            self.check("RF=FR", x, x.frobenius().and_then(|e| e.restrict()), x.restrict().and_then(|e| e.frobenius()));
        }
        if m >= 2 && x.q == 0 {
            // F(x·d[x]) = F(x)·[x]^{p−1}d[x]
            let dx = DRWElement::monomial(x.p, m, 1, 1).d();
            let lhs = x.mul(&dx).and_then(|e| e.frobenius());
            let rhs = x.frobenius().and_then(|f| f.mul(&DRWElement::omega(x.p, m - 1, x.p, 1)));
            self.check("Fd[x]=[x]^{p-1}d[x]", x, lhs, rhs);
        }
    }

    fn products(&mut self, a: &DRWElement, b: &DRWElement) {
        // Leibniz, F multiplicative, projection formula
        let lhs = a.mul(b).map(|e| e.d());
        let rhs = a.mul(&b.d()).and_then(|x| a.d().mul(b).and_then(|y| x.add(&y)));
        self.check("d(ab)=a·db+da·b", a, lhs, rhs);
        if a.m >= 2 {
            let lhs = a.mul(b).and_then(|e| e.frobenius());
            let rhs = a.frobenius().and_then(|x| b.frobenius().and_then(|y| x.mul(&y)));
            self.check("F(ab)=F(a)F(b)", a, lhs, rhs);
            // V(a'·F(b)) = V(a')·b with a' = F-target of level m−1
            if let Ok(a1) = a.restrict() {
                let lhs = b.frobenius().and_then(|fb| a1.mul(&fb)).map(|e| e.verschiebung());
                let rhs = a1.verschiebung().mul(b);
                self.check("V(x·F(y))=V(x)·y", a, lhs, rhs);
            }
        }
    }
}

/// Every identity on every basis element of `W_mΩ^{≤bound}`, then on
/// `samples` random sums and products.
pub fn check_identities<R: Rng>(p: u64, m: u32, bound: u64, samples: usize, rng: &mut R) -> Result<IdentityReport, DrwError> {
    let c = DRWComplex::new(p, m, bound)?;
    let mut ck = Checker { checked: 0, failures: Vec::new() };
    if m >= 2 {
        let dx = DRWElement::monomial(p, m, 1, 1).d();
        ck.check("Fd[x]=[x]^{p-1}d[x]", &dx, dx.frobenius(), Ok(DRWElement::omega(p, m - 1, p, 1)));
    }
    for q in 0..2 {
        for x in c.elements(q) {
            ck.linear(&x);
        }
    }
    for _ in 0..samples {
        let q = rng.gen_range(0..2u8);
        let x = random_element(rng, &c, q, 3);
        ck.linear(&x);
        let a = random_element(rng, &c, 0, 2);
        let qb = rng.gen_range(0..2u8);
        let b = random_element(rng, &c, qb, 2);
        ck.products(&a, &b);
    }
    Ok(IdentityReport { p, m, bound, checked: ck.checked, failures: ck.failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartier::{compare_norm, is_derived_v_complete, EtaCartierComplex};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identities_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [2, 3] {
            for m in 1..=3 {
                let r = check_identities(p, m, 4, 40, &mut rng).unwrap();
                assert!(r.failures.is_empty(), "p={p} m={m}: {:?}", &r.failures[..r.failures.len().min(3)]);
            }
        }
    }

    #[test]
    fn basis_counts() {
        let c = DRWComplex::new(2, 2, 3).unwrap();
        // degree 0: [x]^0..3 and V([x]^{1,3,5})
        assert_eq!(c.rank(0), 7);
        assert_eq!(c.rank(1), 6);
        assert_eq!(c.order_up_to(0, 3), BigInt::from(4u64.pow(4) * 8));
        assert_eq!(DRWComplex::perfect(3, 4).unwrap().rank(0), 1);
    }

    #[test]
    fn filtrations() {
        let c = DRWComplex::new(3, 3, 3).unwrap();
        assert_eq!(c.hodge_brutal(0).subgroup_order(1), c.order_up_to(1, 3));
        assert!(c.hodge_brutal(2).is_zero());
        assert!(c.standard_v_filtration(3).unwrap().is_zero());
        for n in 0..=3 {
            let f = c.standard_v_filtration(n).unwrap();
            assert!(f.is_d_closed().unwrap(), "n = {n}");
            assert!(c.hodge_brutal(1).is_d_closed().unwrap());
        }
        let f1 = c.standard_v_filtration(1).unwrap();
        assert!(f1.contains(&DRWElement::v_monomial(3, 3, 1, 2, 1)).unwrap());
        assert!(!f1.contains(&DRWElement::monomial(3, 3, 1, 1)).unwrap());
    }

    #[test]
    fn cartier_packaging() {
        for (p, m, d) in [(2, 1, 1), (2, 2, 1), (3, 2, 1)] {
            let c = to_cartier(p, m, d, 0).unwrap();
            let r = c.verify();
            assert!(r.valid, "p={p} m={m}: {:?}", &r.violations[..r.violations.len().min(3)]);
            assert!(is_derived_v_complete(&c, 4));
            assert!(compare_norm(&c).unwrap().equal);
        }
        let c = to_cartier(3, 3, 0, 0).unwrap().collapse().unwrap();
        let w = EtaCartierComplex::witt(3, 3);
        assert_eq!(c.f, w.f);
        assert_eq!(c.v, w.v);
        assert_eq!(c.group().group_type(), w.group().group_type());
        let t = to_cartier(2, 2, 1, 1).unwrap();
        assert_eq!(t.lower.module.weights, to_cartier(2, 2, 1, 0).unwrap().lower.module.twist(-1).weights);
    }
}
