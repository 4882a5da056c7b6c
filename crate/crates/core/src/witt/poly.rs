//! Sparse multivariate integer polynomials, sized for Witt structure
//! polynomials: at most `MAX_VARS` variables, exponents at most `MAX_EXP`.
//!
//! Monomials are packed 10 bits per variable into a `u128`, so monomial
//! multiplication is a single addition. Coefficients stay in `i128` until
//! they overflow.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

pub const MAX_VARS: usize = 12;
pub const MAX_EXP: u16 = 1023;
const BITS: u32 = 10;
const MASK: u128 = (1 << BITS) - 1;

/// Packed exponent vector.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Mono(u128);

impl Mono {
    pub fn var(i: usize, e: u16) -> Mono {
        Mono::default().with(i, e)
    }

    pub fn from_exps(exps: &[u16; MAX_VARS]) -> Mono {
        let mut m = Mono::default();
        for (i, &e) in exps.iter().enumerate() {
            m = m.with(i, e);
        }
        m
    }

    pub fn exp(&self, i: usize) -> u16 {
        ((self.0 >> (BITS * i as u32)) & MASK) as u16
    }

    pub fn with(self, i: usize, e: u16) -> Mono {
        assert!(e <= MAX_EXP, "exponent {e} exceeds {MAX_EXP}");
        let shift = BITS * i as u32;
        Mono((self.0 & !(MASK << shift)) | ((e as u128) << shift))
    }

    pub fn exps(&self) -> [u16; MAX_VARS] {
        std::array::from_fn(|i| self.exp(i))
    }

    /// Caller guarantees exponent sums stay within `MAX_EXP`.
    #[inline]
    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0 + other.0)
    }

    pub fn degree(&self) -> u32 {
        self.exps().iter().map(|&e| e as u32).sum()
    }
}

#[derive(Default)]
pub struct MonoHasher(u64);

impl Hasher for MonoHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.write_u64(u64::from_le_bytes(buf));
        }
    }

    #[inline]
    fn write_u64(&mut self, x: u64) {
        self.0 = (self.0.rotate_left(5) ^ x).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    }

    #[inline]
    fn write_u128(&mut self, x: u128) {
        self.write_u64(x as u64);
        self.write_u64((x >> 64) as u64);
    }
}

pub type MonoMap<V> = HashMap<Mono, V, BuildHasherDefault<MonoHasher>>;

/// Integer coefficient with an `i128` fast path. Normalized: `Big` only
/// holds values outside the `i128` range.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Coef {
    Small(i128),
    Big(BigInt),
}

impl Coef {
    fn from_big(b: BigInt) -> Coef {
        match b.to_i128() {
            Some(s) => Coef::Small(s),
            None => Coef::Big(b),
        }
    }

    fn to_big(&self) -> BigInt {
        match self {
            Coef::Small(s) => BigInt::from(*s),
            Coef::Big(b) => b.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Coef::Small(0))
    }

    #[inline]
    fn add_assign(&mut self, other: &Coef) {
        if let (Coef::Small(a), Coef::Small(b)) = (&*self, other) {
            if let Some(s) = a.checked_add(*b) {
                *self = Coef::Small(s);
                return;
            }
        }
        *self = Coef::from_big(self.to_big() + other.to_big());
    }

    #[inline]
    fn mul(&self, other: &Coef) -> Coef {
        if let (Coef::Small(a), Coef::Small(b)) = (self, other) {
            if let Some(s) = a.checked_mul(*b) {
                return Coef::Small(s);
            }
        }
        Coef::from_big(self.to_big() * other.to_big())
    }
}

#[derive(Clone, Debug, Default)]
pub struct MPoly {
    terms: MonoMap<Coef>,
}

impl PartialEq for MPoly {
    fn eq(&self, other: &MPoly) -> bool {
        self.terms.len() == other.terms.len()
            && self.terms.iter().all(|(m, c)| other.terms.get(m) == Some(c))
    }
}

impl Eq for MPoly {}

impl MPoly {
    pub fn zero() -> MPoly {
        MPoly::default()
    }

    pub fn constant(c: BigInt) -> MPoly {
        let mut p = MPoly::zero();
        p.add_term(Mono::default(), c);
        p
    }

    pub fn one() -> MPoly {
        Self::constant(BigInt::one())
    }

    pub fn var(i: usize) -> MPoly {
        let mut p = MPoly::zero();
        p.add_term(Mono::var(i, 1), BigInt::one());
        p
    }

    pub fn monomial(m: Mono, c: BigInt) -> MPoly {
        let mut p = MPoly::zero();
        p.add_term(m, c);
        p
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> BigInt {
        self.terms.get(m).map(Coef::to_big).unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mono, BigInt)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, c.to_big()))
    }

    /// Terms sorted by monomial, for deterministic output.
    pub fn sorted_terms(&self) -> Vec<(Mono, BigInt)> {
        let mut v: Vec<(Mono, BigInt)> = self.terms().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    fn add_coef(&mut self, m: Mono, c: Coef) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                e.get_mut().add_assign(&c);
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add_term(&mut self, m: Mono, c: BigInt) {
        self.add_coef(m, Coef::from_big(c));
    }

    pub fn add_scaled(&mut self, other: &MPoly, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        let k = Coef::from_big(k.clone());
        for (m, c) in &other.terms {
            self.add_coef(*m, c.mul(&k));
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        out.add_scaled(other, &BigInt::one());
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        out.add_scaled(other, &BigInt::from(-1));
        out
    }

    pub fn scale(&self, k: &BigInt) -> MPoly {
        let mut out = MPoly::zero();
        out.add_scaled(self, k);
        out
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let mut terms: MonoMap<Coef> = MonoMap::default();
        terms.reserve(big.len() * 2);
        for (m1, c1) in &small.terms {
            for (m2, c2) in &big.terms {
                let key = m1.mul(m2);
                let v = c1.mul(c2);
                match terms.entry(key) {
                    std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().add_assign(&v),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(v);
                    }
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        MPoly { terms }
    }

    /// Multiply by a monomial times a constant.
    pub fn mul_term(&self, m: &Mono, k: &BigInt) -> MPoly {
        let mut terms: MonoMap<Coef> = MonoMap::default();
        if !k.is_zero() {
            terms.reserve(self.len());
            let k = Coef::from_big(k.clone());
            for (m2, c) in &self.terms {
                terms.insert(m.mul(m2), c.mul(&k));
            }
        }
        MPoly { terms }
    }

    /// Binary exponentiation.
    pub fn pow(&self, mut e: u32) -> MPoly {
        let mut base = self.clone();
        let mut acc = MPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact division by an integer; `Err` carries a monomial whose
    /// coefficient is not divisible.
    pub fn div_exact(&self, k: &BigInt) -> Result<MPoly, Mono> {
        let mut terms: MonoMap<Coef> = MonoMap::default();
        terms.reserve(self.len());
        let ks = k.to_i128();
        for (m, c) in &self.terms {
            let q = match (c, ks) {
                (Coef::Small(a), Some(b)) => {
                    if a % b != 0 {
                        return Err(*m);
                    }
                    Coef::Small(a / b)
                }
                _ => {
                    let (q, r) = c.to_big().div_rem(k);
                    if !r.is_zero() {
                        return Err(*m);
                    }
                    Coef::from_big(q)
                }
            };
            terms.insert(*m, q);
        }
        Ok(MPoly { terms })
    }

    pub fn max_exponent(&self, var: usize) -> u16 {
        self.terms.keys().map(|m| m.exp(var)).max().unwrap_or(0)
    }

    /// Render with variable names, terms in monomial order.
    pub fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.sorted_terms().into_iter().rev().enumerate() {
            let neg = c < BigInt::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            for (v, e) in m.exps().into_iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(names[v].clone()),
                    _ => factors.push(format!("{}^{}", names[v], e)),
                }
            }
            if factors.is_empty() || !abs.is_one() {
                factors.insert(0, abs.to_string());
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

/// `n choose k` as a big integer.
pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_matches_repeated_product() {
        let p = MPoly::var(0).add(&MPoly::var(1)).add(&MPoly::constant(BigInt::from(2)));
        let mut q = MPoly::one();
        for _ in 0..7 {
            q = q.mul(&p);
        }
        assert_eq!(p.pow(7), q);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 3), BigInt::from(35));
        assert_eq!(binomial(49, 0), BigInt::one());
        assert_eq!(binomial(3, 5), BigInt::zero());
    }

    #[test]
    fn packed_monomials() {
        let m = Mono::var(3, 7).mul(&Mono::var(11, 1000));
        assert_eq!(m.exp(3), 7);
        assert_eq!(m.exp(11), 1000);
        assert_eq!(Mono::from_exps(&m.exps()), m);
    }

    #[test]
    fn big_coefficients_round_trip() {
        let big = BigInt::from(10).pow(60u32);
        let p = MPoly::constant(big.clone()).mul(&MPoly::constant(big.clone()));
        assert_eq!(p.coeff(&Mono::default()), &big * &big);
        let q = p.div_exact(&big).unwrap();
        assert_eq!(q, MPoly::constant(big));
    }
}
