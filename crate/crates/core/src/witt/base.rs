//! Base rings for Witt vectors and evaluation of the structure polynomials.

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::poly::{MonoMap, Mono, MAX_VARS};
use super::structure::structure_polys;
use super::WittError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaseTag {
    Fp,
    Z,
    Zx,
    Fpx,
}

impl BaseTag {
    pub fn name(&self) -> &'static str {
        match self {
            BaseTag::Fp => "Fp",
            BaseTag::Z => "Z",
            BaseTag::Zx => "Z[x]",
            BaseTag::Fpx => "Fp[x]",
        }
    }

    pub fn parse(s: &str) -> Option<BaseTag> {
        match s {
            "Fp" => Some(BaseTag::Fp),
            "Z" => Some(BaseTag::Z),
            "Z[x]" | "Zx" => Some(BaseTag::Zx),
            "Fp[x]" | "Fpx" => Some(BaseTag::Fpx),
            _ => None,
        }
    }
}

/// Structure polynomials with coefficients mapped into a base.
#[derive(Debug)]
pub struct Compiled<C> {
    pub sums: Vec<Vec<(Mono, C)>>,
    pub prods: Vec<Vec<(Mono, C)>>,
    pub max_exp: [u16; MAX_VARS],
}

pub trait WittBase: Clone + Debug + PartialEq + Send + Sync + 'static {
    type Elem: Clone + Debug + PartialEq + Eq;
    type Coeff: Clone + Debug + Send + Sync + 'static;

    fn tag(&self) -> BaseTag;
    /// `Some(p)` when the base has characteristic `p`.
    fn characteristic(&self) -> Option<u64>;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, c: &BigInt) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn scale(&self, c: &Self::Coeff, a: &Self::Elem) -> Self::Elem;
    /// Exact division by an integer; `None` if impossible.
    fn div_exact(&self, a: &Self::Elem, k: &BigInt) -> Option<Self::Elem>;
    fn compiled(&self, p: u64, n: usize) -> Result<Arc<Compiled<Self::Coeff>>, WittError>;

    /// Degree for polynomial bases, used by degree bounds.
    fn degree(&self, _a: &Self::Elem) -> Option<usize> {
        None
    }

    fn deg_bound(&self) -> Option<usize> {
        None
    }

    /// Enforce any size bound on component `i` of a result.
    fn check_component(&self, _p: u64, _i: usize, _a: &Self::Elem) -> Result<(), WittError> {
        Ok(())
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    fn elem_to_json(&self, a: &Self::Elem) -> Value;
    fn elem_from_json(&self, v: &Value) -> Result<Self::Elem, WittError>;
}

fn bad(v: &Value) -> WittError {
    WittError::InvalidComponent(v.to_string())
}

fn json_int(v: &Value) -> Result<BigInt, WittError> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| bad(v)),
        Value::String(s) => s.trim().parse().map_err(|_| bad(v)),
        _ => Err(bad(v)),
    }
}

fn json_list(v: &Value) -> Result<Vec<BigInt>, WittError> {
    match v {
        Value::Array(xs) => xs.iter().map(json_int).collect(),
        _ => json_int(v).map(|c| vec![c]),
    }
}

fn reduce_u64(c: &BigInt, p: u64) -> u64 {
    c.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

type IntCache = RwLock<HashMap<(u64, usize), Arc<Compiled<BigInt>>>>;
type ModCache = RwLock<HashMap<(u64, usize, bool), Arc<Compiled<u64>>>>;

fn max_exp_of<C>(sums: &[Vec<(Mono, C)>], prods: &[Vec<(Mono, C)>]) -> [u16; MAX_VARS] {
    let mut out = [0u16; MAX_VARS];
    for (m, _) in sums.iter().chain(prods).flatten() {
        for (o, e) in out.iter_mut().zip(m.exps()) {
            *o = (*o).max(e);
        }
    }
    out
}

fn int_compiled(p: u64, n: usize) -> Result<Arc<Compiled<BigInt>>, WittError> {
    static CACHE: OnceLock<IntCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.read().unwrap().get(&(p, n)) {
        return Ok(c.clone());
    }
    let polys = structure_polys(p, n)?;
    let conv = |ps: &[super::MPoly]| -> Vec<Vec<(Mono, BigInt)>> {
        ps.iter().map(|q| q.sorted_terms()).collect()
    };
    let sums = conv(&polys.sums);
    let prods = conv(&polys.prods);
    let max_exp = max_exp_of(&sums, &prods);
    let out = Arc::new(Compiled { sums, prods, max_exp });
    cache.write().unwrap().insert((p, n), out.clone());
    Ok(out)
}

/// Coefficients reduced mod p; with `fermat`, exponents are also reduced
/// using `a^p = a` on F_p.
fn mod_compiled(p: u64, n: usize, fermat: bool) -> Result<Arc<Compiled<u64>>, WittError> {
    static CACHE: OnceLock<ModCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.read().unwrap().get(&(p, n, fermat)) {
        return Ok(c.clone());
    }
    let polys = structure_polys(p, n)?;
    let conv = |ps: &[super::MPoly]| -> Vec<Vec<(Mono, u64)>> {
        ps.iter()
            .map(|q| {
                let mut acc: MonoMap<u64> = MonoMap::default();
                for (m, c) in q.terms() {
                    let c = reduce_u64(&c, p);
                    if c == 0 {
                        continue;
                    }
                    let mut m = m;
                    if fermat {
                        let mut exps = m.exps();
                        for e in exps.iter_mut() {
                            if *e > 0 {
                                *e = ((*e as u64 - 1) % (p - 1) + 1) as u16;
                            }
                        }
                        m = Mono::from_exps(&exps);
                    }
                    let slot = acc.entry(m).or_insert(0);
                    *slot = (*slot + c) % p;
                }
                let mut v: Vec<(Mono, u64)> = acc.into_iter().filter(|(_, c)| *c != 0).collect();
                v.sort_by(|a, b| a.0.cmp(&b.0));
                v
            })
            .collect()
    };
    let sums = conv(&polys.sums);
    let prods = conv(&polys.prods);
    let max_exp = max_exp_of(&sums, &prods);
    let out = Arc::new(Compiled { sums, prods, max_exp });
    cache.write().unwrap().insert((p, n, fermat), out.clone());
    Ok(out)
}

/// The integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Integers;

impl WittBase for Integers {
    type Elem = BigInt;
    type Coeff = BigInt;

    fn tag(&self) -> BaseTag {
        BaseTag::Z
    }
    fn characteristic(&self) -> Option<u64> {
        None
    }
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn from_int(&self, c: &BigInt) -> BigInt {
        c.clone()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn scale(&self, c: &BigInt, a: &BigInt) -> BigInt {
        c * a
    }
    fn div_exact(&self, a: &BigInt, k: &BigInt) -> Option<BigInt> {
        let (q, r) = a.div_rem(k);
        r.is_zero().then_some(q)
    }
    fn compiled(&self, p: u64, n: usize) -> Result<Arc<Compiled<BigInt>>, WittError> {
        int_compiled(p, n)
    }
    fn elem_to_json(&self, a: &BigInt) -> Value {
        json!(a.to_string())
    }
    fn elem_from_json(&self, v: &Value) -> Result<BigInt, WittError> {
        json_int(v)
    }
}

/// The prime field F_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField {
    pub p: u64,
}

impl WittBase for PrimeField {
    type Elem = u64;
    type Coeff = u64;

    fn tag(&self) -> BaseTag {
        BaseTag::Fp
    }
    fn characteristic(&self) -> Option<u64> {
        Some(self.p)
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_int(&self, c: &BigInt) -> u64 {
        reduce_u64(c, self.p)
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a % self.p) % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn scale(&self, c: &u64, a: &u64) -> u64 {
        c * a % self.p
    }
    fn div_exact(&self, _a: &u64, _k: &BigInt) -> Option<u64> {
        None
    }
    fn compiled(&self, p: u64, n: usize) -> Result<Arc<Compiled<u64>>, WittError> {
        mod_compiled(p, n, true)
    }
    fn elem_to_json(&self, a: &u64) -> Value {
        json!(a.to_string())
    }
    fn elem_from_json(&self, v: &Value) -> Result<u64, WittError> {
        json_int(v).map(|c| reduce_u64(&c, self.p))
    }
}

fn trim<T: PartialEq>(mut v: Vec<T>, zero: &T) -> Vec<T> {
    while v.last() == Some(zero) {
        v.pop();
    }
    v
}

/// Z[x], dense coefficient lists (constant term first, no trailing zeros).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly;

impl WittBase for IntPoly {
    type Elem = Vec<BigInt>;
    type Coeff = BigInt;

    fn tag(&self) -> BaseTag {
        BaseTag::Zx
    }
    fn characteristic(&self) -> Option<u64> {
        None
    }
    fn zero(&self) -> Vec<BigInt> {
        Vec::new()
    }
    fn one(&self) -> Vec<BigInt> {
        vec![BigInt::one()]
    }
    fn from_int(&self, c: &BigInt) -> Vec<BigInt> {
        trim(vec![c.clone()], &BigInt::zero())
    }
    fn add(&self, a: &Vec<BigInt>, b: &Vec<BigInt>) -> Vec<BigInt> {
        let n = a.len().max(b.len());
        let z = BigInt::zero();
        let out = (0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect();
        trim(out, &z)
    }
    fn mul(&self, a: &Vec<BigInt>, b: &Vec<BigInt>) -> Vec<BigInt> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        trim(out, &BigInt::zero())
    }
    fn neg(&self, a: &Vec<BigInt>) -> Vec<BigInt> {
        a.iter().map(|c| -c).collect()
    }
    fn is_zero(&self, a: &Vec<BigInt>) -> bool {
        a.is_empty()
    }
    fn scale(&self, c: &BigInt, a: &Vec<BigInt>) -> Vec<BigInt> {
        trim(a.iter().map(|x| x * c).collect(), &BigInt::zero())
    }
    fn div_exact(&self, a: &Vec<BigInt>, k: &BigInt) -> Option<Vec<BigInt>> {
        a.iter()
            .map(|c| {
                let (q, r) = c.div_rem(k);
                r.is_zero().then_some(q)
            })
            .collect()
    }
    fn compiled(&self, p: u64, n: usize) -> Result<Arc<Compiled<BigInt>>, WittError> {
        int_compiled(p, n)
    }
    fn degree(&self, a: &Vec<BigInt>) -> Option<usize> {
        a.len().checked_sub(1)
    }
    fn elem_to_json(&self, a: &Vec<BigInt>) -> Value {
        json!(a.iter().map(|c| c.to_string()).collect::<Vec<_>>())
    }
    fn elem_from_json(&self, v: &Value) -> Result<Vec<BigInt>, WittError> {
        Ok(trim(json_list(v)?, &BigInt::zero()))
    }
}

/// F_p[x] with a weighted degree bound: component `i` of a Witt vector may
/// have degree at most `deg_bound · p^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeFieldPoly {
    pub p: u64,
    pub deg_bound: usize,
}

impl PrimeFieldPoly {
    pub fn component_bound(&self, i: usize) -> usize {
        self.deg_bound * (self.p as usize).pow(i as u32)
    }
}

impl WittBase for PrimeFieldPoly {
    type Elem = Vec<u64>;
    type Coeff = u64;

    fn tag(&self) -> BaseTag {
        BaseTag::Fpx
    }
    fn characteristic(&self) -> Option<u64> {
        Some(self.p)
    }
    fn zero(&self) -> Vec<u64> {
        Vec::new()
    }
    fn one(&self) -> Vec<u64> {
        vec![1]
    }
    fn from_int(&self, c: &BigInt) -> Vec<u64> {
        trim(vec![reduce_u64(c, self.p)], &0)
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let n = a.len().max(b.len());
        let out = (0..n).map(|i| (a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)) % self.p).collect();
        trim(out, &0)
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % self.p;
            }
        }
        trim(out, &0)
    }
    fn neg(&self, a: &Vec<u64>) -> Vec<u64> {
        a.iter().map(|c| (self.p - c) % self.p).collect()
    }
    fn is_zero(&self, a: &Vec<u64>) -> bool {
        a.is_empty()
    }
    fn scale(&self, c: &u64, a: &Vec<u64>) -> Vec<u64> {
        trim(a.iter().map(|x| x * c % self.p).collect(), &0)
    }
    fn div_exact(&self, _a: &Vec<u64>, _k: &BigInt) -> Option<Vec<u64>> {
        None
    }
    fn compiled(&self, p: u64, n: usize) -> Result<Arc<Compiled<u64>>, WittError> {
        mod_compiled(p, n, false)
    }
    fn degree(&self, a: &Vec<u64>) -> Option<usize> {
        a.len().checked_sub(1)
    }
    fn deg_bound(&self) -> Option<usize> {
        Some(self.deg_bound)
    }
    fn check_component(&self, _p: u64, i: usize, a: &Vec<u64>) -> Result<(), WittError> {
        match self.degree(a) {
            Some(d) if d > self.component_bound(i) => {
                Err(WittError::DegreeOverflow { component: i, degree: d, bound: self.component_bound(i) })
            }
            _ => Ok(()),
        }
    }
    fn elem_to_json(&self, a: &Vec<u64>) -> Value {
        json!(a.iter().map(|c| c.to_string()).collect::<Vec<_>>())
    }
    fn elem_from_json(&self, v: &Value) -> Result<Vec<u64>, WittError> {
        Ok(trim(json_list(v)?.iter().map(|c| reduce_u64(c, self.p)).collect(), &0))
    }
}

/// Evaluate structure polynomials at `x = a`, `y = b`.
pub(crate) struct Evaluator<'a, B: WittBase> {
    base: &'a B,
    pows: Vec<Vec<B::Elem>>,
}

impl<'a, B: WittBase> Evaluator<'a, B> {
    pub fn new(base: &'a B, a: &[B::Elem], b: &[B::Elem], max_exp: &[u16; MAX_VARS]) -> Self {
        let mut pows = Vec::with_capacity(2 * a.len());
        for i in 0..a.len() {
            for (v, val) in [(2 * i, &a[i]), (2 * i + 1, &b[i])] {
                let top = max_exp[v] as usize;
                let mut row = Vec::with_capacity(top + 1);
                row.push(base.one());
                for k in 1..=top {
                    let next = base.mul(&row[k - 1], val);
                    row.push(next);
                }
                pows.push(row);
            }
        }
        Evaluator { base, pows }
    }

    pub fn eval(&self, table: &[(Mono, B::Coeff)]) -> B::Elem {
        let base = self.base;
        let mut acc = base.zero();
        'terms: for (m, c) in table {
            let mut t: Option<B::Elem> = None;
            for (v, e) in m.exps().into_iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let f = &self.pows[v][e as usize];
                if base.is_zero(f) {
                    continue 'terms;
                }
                t = Some(match t {
                    None => f.clone(),
                    Some(t) => base.mul(&t, f),
                });
            }
            let t = t.unwrap_or_else(|| base.one());
            acc = base.add(&acc, &base.scale(c, &t));
        }
        acc
    }
}
