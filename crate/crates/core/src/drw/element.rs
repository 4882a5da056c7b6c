//! Normal-form elements of `W_mΩ^q_{F_p[x]}` and the operators on them.
//!
//! A term `(s, j, c)` stands for
//! * degree 0: `c·V^s([x]^j)`, with `s = 0` or `p ∤ j`;
//! * degree 1: `c·[x]^{j−1}d[x]` when `s = 0` (`j ≥ 1`), else `c·dV^s([x]^j)`.
//!
//! Its weight is `j/p^s` and `c` lives in `Z/p^{m−s} = W_{m−s}(F_p)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use serde_json::{json, Value};

use crate::witt::{PrimeField, WittVector};

use super::DrwError;

pub(crate) fn pow(p: u64, e: u32) -> u64 {
    p.pow(e)
}

fn inv_mod(a: i128, m: i128) -> i128 {
    let g = a.rem_euclid(m).extended_gcd(&m);
    debug_assert_eq!(g.gcd, 1);
    g.x.rem_euclid(m)
}

/// Weight `j/p^s` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight {
    pub s: u32,
    pub j: u64,
}

impl Weight {
    pub fn fits(&self, p: u64, bound: u64) -> bool {
        self.j <= bound.saturating_mul(pow(p, self.s))
    }

    pub fn render(&self, p: u64) -> String {
        if self.s == 0 {
            self.j.to_string()
        } else {
            format!("{}/{}", self.j, pow(p, self.s))
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DRWElement {
    pub p: u64,
    pub m: u32,
    /// Form degree; degree 2 exists only as the zero element.
    pub q: u8,
    terms: BTreeMap<(u32, u64), u64>,
}

impl fmt::Debug for DRWElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for DRWElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(s, j), c)| match (self.q, s) {
                (0, 0) => format!("{c}[x]^{j}"),
                (0, _) => format!("{c}V^{s}([x]^{j})"),
                (_, 0) => format!("{c}[x]^{}d[x]", j - 1),
                _ => format!("{c}dV^{s}([x]^{j})"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl DRWElement {
    pub fn zero(p: u64, m: u32, q: u8) -> Self {
        DRWElement { p, m, q, terms: BTreeMap::new() }
    }

    fn modulus(&self) -> i128 {
        pow(self.p, self.m) as i128
    }

    /// Adds `c` to the coefficient of an already normalized index.
    fn push(&mut self, s: u32, j: u64, c: i128) {
        if s >= self.m || self.q > 1 {
            return;
        }
        let md = pow(self.p, self.m - s) as i128;
        let c = c.rem_euclid(md);
        if c == 0 {
            return;
        }
        let e = self.terms.entry((s, j)).or_insert(0);
        let v = (*e as i128 + c) % md;
        if v == 0 {
            self.terms.remove(&(s, j));
        } else {
            *e = v as u64;
        }
    }

    /// `c·V^t([x]^n)` in degree 0.
    fn add_v(&mut self, mut t: u32, mut n: u64, mut c: i128) {
        let (p, md) = (self.p, self.modulus());
        while t > 0 && n % p == 0 {
            c = c * p as i128 % md;
            t -= 1;
            n /= p;
        }
        self.push(t, n, c);
    }

    /// `c·dV^t([x]^n)` in degree 1.
    fn add_dv(&mut self, mut t: u32, mut n: u64, mut c: i128) {
        let (p, md) = (self.p, self.modulus());
        if n == 0 {
            return;
        }
        while t > 0 && n % p == 0 {
            c = c * p as i128 % md;
            t -= 1;
            n /= p;
        }
        if t == 0 {
            self.push(0, n, c * (n as i128 % md) % md);
        } else {
            self.push(t, n, c);
        }
    }

    /// `c·V^t([x]^{n−1}d[x])` in degree 1, `n ≥ 1`.
    fn add_v_omega(&mut self, mut t: u32, mut n: u64, mut c: i128) {
        let (p, md) = (self.p, self.modulus());
        while t > 0 && n % p == 0 {
            c = c * p as i128 % md;
            t -= 1;
            n /= p;
        }
        if t == 0 {
            self.push(0, n, c);
        } else {
            let u = inv_mod(n as i128 % md, md);
            let pt = pow(p, t) as i128 % md;
            self.push(t, n, c * u % md * pt % md);
        }
    }

    /// `c·V^s([x]^j)`, normalized.
    pub fn v_monomial(p: u64, m: u32, s: u32, j: u64, c: i64) -> Self {
        let mut e = Self::zero(p, m, 0);
        e.add_v(s, j, c as i128);
        e
    }

    /// `c·[x]^j`.
    pub fn monomial(p: u64, m: u32, j: u64, c: i64) -> Self {
        Self::v_monomial(p, m, 0, j, c)
    }

    /// `c·dV^s([x]^j)`, normalized.
    pub fn dv_monomial(p: u64, m: u32, s: u32, j: u64, c: i64) -> Self {
        let mut e = Self::zero(p, m, 1);
        e.add_dv(s, j, c as i128);
        e
    }

    /// `c·[x]^{j−1}d[x]`.
    pub fn omega(p: u64, m: u32, j: u64, c: i64) -> Self {
        let mut e = Self::zero(p, m, 1);
        e.push(0, j, c as i128);
        e
    }

    /// Basis element for the index `(s, j)`.
    pub fn basis(p: u64, m: u32, q: u8, s: u32, j: u64) -> Self {
        let mut e = Self::zero(p, m, q);
        e.push(s, j, 1);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(s, j, coefficient)` sorted by `(s, j)`.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u64, u64)> + '_ {
        self.terms.iter().map(|(&(s, j), &c)| (s, j, c))
    }

    pub fn coefficient(&self, s: u32, j: u64) -> u64 {
        self.terms.get(&(s, j)).copied().unwrap_or(0)
    }

    pub fn weights(&self) -> impl Iterator<Item = Weight> + '_ {
        self.terms.keys().map(|&(s, j)| Weight { s, j })
    }

    /// Whether every term has x-degree at most `bound`.
    pub fn fits(&self, bound: u64) -> bool {
        self.weights().all(|w| w.fits(self.p, bound))
    }

    pub fn check_bound(&self, bound: u64) -> Result<(), DrwError> {
        match self.weights().find(|w| !w.fits(self.p, bound)) {
            Some(w) => Err(DrwError::DegreeOverflow { weight: w.render(self.p), bound }),
            None => Ok(()),
        }
    }

    fn same_space(&self, other: &Self) -> Result<(), DrwError> {
        if self.p != other.p || self.m != other.m {
            return Err(DrwError::Mismatch(format!("W_{}Ω (p={}) vs W_{}Ω (p={})", self.m, self.p, other.m, other.p)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, DrwError> {
        self.same_space(other)?;
        if self.q != other.q {
            return Err(DrwError::Mismatch(format!("degree {} plus degree {}", self.q, other.q)));
        }
        let mut out = self.clone();
        for (s, j, c) in other.terms() {
            out.push(s, j, c as i128);
        }
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = Self::zero(self.p, self.m, self.q);
        for (s, j, c) in self.terms() {
            out.push(s, j, c as i128 * (k as i128 % self.modulus()));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, DrwError> {
        self.add(&other.neg())
    }

    pub fn d(&self) -> Self {
        let mut out = Self::zero(self.p, self.m, (self.q + 1).min(2));
        if self.q == 0 {
            for (s, j, c) in self.terms() {
                out.add_dv(s, j, c as i128);
            }
        }
        out
    }

    /// `F: W_mΩ → W_{m−1}Ω`.
    pub fn frobenius(&self) -> Result<Self, DrwError> {
        if self.m < 2 {
            return Err(DrwError::TruncationUnderflow);
        }
        let p = self.p;
        let mut out = Self::zero(p, self.m - 1, self.q);
        for (s, j, c) in self.terms() {
            let c = c as i128;
            match (self.q, s) {
                (0, 0) => out.push(0, p * j, c),
                (0, _) => out.add_v(s - 1, j, c * p as i128),
                (1, 0) => out.push(0, p * j, c),
                (1, _) => out.add_dv(s - 1, j, c),
                _ => {}
            }
        }
        Ok(out)
    }

    /// `V: W_mΩ → W_{m+1}Ω`.
    pub fn verschiebung(&self) -> Self {
        let p = self.p;
        let mut out = Self::zero(p, self.m + 1, self.q);
        for (s, j, c) in self.terms() {
            let c = c as i128;
            match (self.q, s) {
                (0, _) => out.add_v(s + 1, j, c),
                (1, 0) => out.add_v_omega(1, j, c),
                (1, _) => out.add_dv(s + 1, j, c * p as i128),
                _ => {}
            }
        }
        out
    }

    /// `R: W_mΩ → W_{m−1}Ω`.
    pub fn restrict(&self) -> Result<Self, DrwError> {
        if self.m < 2 {
            return Err(DrwError::TruncationUnderflow);
        }
        let mut out = Self::zero(self.p, self.m - 1, self.q);
        for (s, j, c) in self.terms() {
            out.push(s, j, c as i128);
        }
        Ok(out)
    }

    /// Iterated `F`, `V`, `R`.
    pub fn frobenius_n(&self, n: u32) -> Result<Self, DrwError> {
        (0..n).try_fold(self.clone(), |e, _| e.frobenius())
    }

    pub fn verschiebung_n(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |e, _| e.verschiebung())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, DrwError> {
        self.same_space(other)?;
        if self.q > other.q {
            return other.mul(self);
        }
        let mut out = Self::zero(self.p, self.m, (self.q + other.q).min(2));
        if out.q > 1 {
            return Ok(out);
        }
        for a in self.terms() {
            for b in other.terms() {
                if self.q == 0 && other.q == 0 {
                    out.mul00(a, b);
                } else {
                    out.mul01(a, b);
                }
            }
        }
        Ok(out)
    }

    /// `V^s(a[x]^i)·V^t(b[x]^j) = p^s V^t(ab[x]^{i p^{t−s} + j})` for `s ≤ t`.
    fn mul00(&mut self, x: (u32, u64, u64), y: (u32, u64, u64)) {
        let ((s, i, a), (t, j, b)) = if x.0 <= y.0 { (x, y) } else { (y, x) };
        let md = self.modulus();
        let c = a as i128 * b as i128 % md * (pow(self.p, s) as i128 % md) % md;
        self.add_v(t, i * pow(self.p, t - s) + j, c);
    }

    /// Degree-0 term times degree-1 term.
    fn mul01(&mut self, (s, i, a): (u32, u64, u64), (t, n, b): (u32, u64, u64)) {
        let p = self.p;
        let md = self.modulus();
        let ab = a as i128 * b as i128 % md;
        if t == 0 {
            // V^s(a[x]^i)·b[x]^{n−1}d[x] = V^s(ab[x]^{i + p^s n − 1}d[x])
            self.add_v_omega(s, i + pow(p, s) * n, ab);
        } else if s >= t {
            // V^s(a[x]^i F^{s−t} d(b[x]^n))
            self.add_v_omega(s, i + n * pow(p, s - t), ab * (n as i128 % md) % md);
        } else {
            // Leibniz: d(V^s(a[x]^i)·V^t(b[x]^n)) − V^t(b[x]^n)·dV^s(a[x]^i)
            let mut prod = Self::zero(p, self.m, 0);
            prod.mul00((s, i, a), (t, n, b));
            for (u, k, c) in prod.terms() {
                self.add_dv(u, k, c as i128);
            }
            self.add_v_omega(t, n + i * pow(p, t - s), -(ab * (i as i128 % md) % md));
        }
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms()
            .map(|(s, j, c)| {
                let w = WittVector::from_integer(self.p, PrimeField { p: self.p }, (self.m - s) as usize, &BigInt::from(c))
                    .expect("positive length");
                json!({
                    "s": s,
                    "j": j,
                    "weight": Weight { s, j }.render(self.p),
                    "coeff": c.to_string(),
                    "witt": w.to_json()["components"].clone(),
                })
            })
            .collect();
        json!({"p": self.p, "m": self.m, "degree": self.q, "terms": terms, "display": self.to_string()})
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_on_powers() {
        let x2 = DRWElement::monomial(3, 2, 2, 1);
        assert_eq!(x2.d(), DRWElement::omega(3, 2, 2, 2));
        let x = DRWElement::monomial(5, 3, 1, 1);
        assert_eq!(x.d().frobenius().unwrap(), DRWElement::omega(5, 2, 5, 1));
    }

    #[test]
    fn verschiebung_of_frobenius_image() {
        // V([x]^p) = V(F[x]) = p[x]
        let e = DRWElement::monomial(3, 2, 3, 1).verschiebung();
        assert_eq!(e, DRWElement::monomial(3, 3, 1, 3));
        // FV = p and FdV = d on V([x])
        let v = DRWElement::monomial(2, 2, 1, 1).verschiebung();
        assert_eq!(v.frobenius().unwrap(), DRWElement::monomial(2, 2, 1, 2));
        assert_eq!(v.d().frobenius().unwrap(), DRWElement::omega(2, 2, 1, 1));
    }

    #[test]
    fn orders_of_basis_elements() {
        assert!(DRWElement::v_monomial(3, 3, 2, 1, 3).is_zero());
        assert!(!DRWElement::v_monomial(3, 3, 1, 1, 3).is_zero());
        assert!(DRWElement::v_monomial(3, 3, 1, 1, 9).is_zero());
        assert!(DRWElement::v_monomial(3, 3, 3, 1, 1).is_zero());
        assert!(DRWElement::monomial(3, 3, 0, 27).is_zero());
    }

    #[test]
    fn products_with_verschiebung() {
        // V(1)·V(1) = V(F V 1) = p V(1)
        let v1 = DRWElement::v_monomial(2, 3, 1, 0, 1);
        assert_eq!(v1, DRWElement::monomial(2, 3, 0, 2));
        let vx = DRWElement::v_monomial(3, 3, 1, 1, 1);
        let sq = vx.mul(&vx).unwrap();
        assert_eq!(sq, DRWElement::v_monomial(3, 3, 1, 2, 3));
        let prod = DRWElement::monomial(3, 3, 1, 1).mul(&vx).unwrap();
        assert_eq!(prod, DRWElement::v_monomial(3, 3, 1, 4, 1));
    }
}
