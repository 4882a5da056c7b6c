//! Truncated Witt vectors over a [`WittBase`].

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde_json::{json, Value};

use super::base::{Evaluator, Integers, IntPoly, PrimeField, PrimeFieldPoly, WittBase};
use super::structure::{is_prime, MAX_LENGTH};
use super::WittError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittVector<B: WittBase> {
    p: u64,
    base: B,
    comps: Vec<B::Elem>,
}

fn check_len(n: usize) -> Result<(), WittError> {
    if n == 0 {
        return Err(WittError::TruncationUnderflow);
    }
    if n > MAX_LENGTH {
        return Err(WittError::LengthTooLarge { n, max: MAX_LENGTH });
    }
    Ok(())
}

impl<B: WittBase> WittVector<B> {
    pub fn new(p: u64, base: B, comps: Vec<B::Elem>) -> Result<Self, WittError> {
        if !is_prime(p) {
            return Err(WittError::NonPrime(p));
        }
        if let Some(q) = base.characteristic() {
            if q != p {
                return Err(WittError::MismatchedPrime { left: p, right: q });
            }
        }
        check_len(comps.len())?;
        for (i, c) in comps.iter().enumerate() {
            base.check_component(p, i, c)?;
        }
        Ok(WittVector { p, base, comps })
    }

    pub fn zero(p: u64, base: B, n: usize) -> Result<Self, WittError> {
        let z = base.zero();
        Self::new(p, base, vec![z; n])
    }

    pub fn one(p: u64, base: B, n: usize) -> Result<Self, WittError> {
        Self::teichmuller(p, base.clone(), n, base.one())
    }

    /// `[c] = (c, 0, 0, …)`.
    pub fn teichmuller(p: u64, base: B, n: usize, c: B::Elem) -> Result<Self, WittError> {
        let mut comps = vec![base.zero(); n];
        if n > 0 {
            comps[0] = c;
        }
        Self::new(p, base, comps)
    }

    /// Image of the integer `k` under `Z → W_n(Z) → W_n(base)`.
    pub fn from_integer(p: u64, base: B, n: usize, k: &BigInt) -> Result<Self, WittError> {
        check_len(n)?;
        let ghost = vec![k.clone(); n];
        let over_z = WittVector::from_ghost(p, Integers, &ghost)?;
        let comps = over_z.comps.iter().map(|c| base.from_int(c)).collect();
        Self::new(p, base, comps)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn components(&self) -> &[B::Elem] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| self.base.is_zero(c))
    }

    fn compatible(&self, other: &Self) -> Result<(), WittError> {
        if self.p != other.p {
            return Err(WittError::MismatchedPrime { left: self.p, right: other.p });
        }
        if self.len() != other.len() {
            return Err(WittError::MismatchedTruncation { left: self.len(), right: other.len() });
        }
        if self.base != other.base {
            return Err(WittError::MismatchedBase);
        }
        Ok(())
    }

    fn combine(&self, other: &Self, prods: bool) -> Result<Self, WittError> {
        self.compatible(other)?;
        let table = self.base.compiled(self.p, self.len())?;
        let ev = Evaluator::new(&self.base, &self.comps, &other.comps, &table.max_exp);
        let polys = if prods { &table.prods } else { &table.sums };
        let comps = polys.iter().map(|t| ev.eval(t)).collect();
        Self::new(self.p, self.base.clone(), comps)
    }

    pub fn add(&self, other: &Self) -> Result<Self, WittError> {
        self.combine(other, false)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, WittError> {
        self.combine(other, true)
    }

    pub fn scalar(&self, k: &BigInt) -> Result<Self, WittError> {
        let kk = Self::from_integer(self.p, self.base.clone(), self.len(), k)?;
        kk.mul(self)
    }

    pub fn neg(&self) -> Result<Self, WittError> {
        self.scalar(&BigInt::from(-1))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, WittError> {
        self.add(&other.neg()?)
    }

    /// Ghost components `w_0..w_{n−1}`.
    pub fn ghost(&self) -> Result<Vec<B::Elem>, WittError> {
        if self.base.characteristic().is_some() {
            return Err(WittError::BaseHasPTorsion);
        }
        let b = &self.base;
        let mut out = Vec::with_capacity(self.len());
        for m in 0..self.len() {
            let mut acc = b.zero();
            for (i, a) in self.comps[..=m].iter().enumerate() {
                let term = b.pow(a, self.p.pow((m - i) as u32));
                acc = b.add(&acc, &b.scale_int(&BigInt::from(self.p).pow(i as u32), &term));
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Inverse of the ghost map over a p-torsion-free base.
    pub fn from_ghost(p: u64, base: B, ghost: &[B::Elem]) -> Result<Self, WittError> {
        if base.characteristic().is_some() {
            return Err(WittError::BaseHasPTorsion);
        }
        if !is_prime(p) {
            return Err(WittError::NonPrime(p));
        }
        let mut comps: Vec<B::Elem> = Vec::with_capacity(ghost.len());
        for (m, w) in ghost.iter().enumerate() {
            let mut acc = w.clone();
            for (i, a) in comps.iter().enumerate() {
                let term = base.pow(a, p.pow((m - i) as u32));
                acc = base.sub(&acc, &base.scale_int(&BigInt::from(p).pow(i as u32), &term));
            }
            let a = base.div_exact(&acc, &BigInt::from(p).pow(m as u32)).ok_or(WittError::NotGhostImage(m))?;
            comps.push(a);
        }
        Self::new(p, base, comps)
    }

    /// Frobenius `W_n → W_{n−1}`.
    pub fn frobenius(&self) -> Result<Self, WittError> {
        let n = self.len();
        if n < 2 {
            return Err(WittError::TruncationUnderflow);
        }
        match self.base.characteristic() {
            Some(_) => {
                let comps = self.comps[..n - 1].iter().map(|a| self.base.pow(a, self.p)).collect();
                Self::new(self.p, self.base.clone(), comps)
            }
            None => {
                let g = self.ghost()?;
                Self::from_ghost(self.p, self.base.clone(), &g[1..])
            }
        }
    }

    /// Verschiebung `W_n → W_{n+1}`, `(a_0, …) ↦ (0, a_0, …)`.
    pub fn verschiebung(&self) -> Result<Self, WittError> {
        let mut comps = Vec::with_capacity(self.len() + 1);
        comps.push(self.base.zero());
        comps.extend(self.comps.iter().cloned());
        Self::new(self.p, self.base.clone(), comps)
    }

    /// Restriction `W_n → W_{n−1}`.
    pub fn restrict(&self) -> Result<Self, WittError> {
        if self.len() < 2 {
            return Err(WittError::TruncationUnderflow);
        }
        Self::new(self.p, self.base.clone(), self.comps[..self.len() - 1].to_vec())
    }

    /// Apply a ring map componentwise (valid for any ring homomorphism).
    pub fn map_base<C: WittBase>(&self, target: C, f: impl Fn(&B::Elem) -> C::Elem) -> Result<WittVector<C>, WittError> {
        WittVector::new(self.p, target, self.comps.iter().map(f).collect())
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "p": self.p,
            "n": self.len(),
            "base": self.base.tag().name(),
            "components": self.comps.iter().map(|c| self.base.elem_to_json(c)).collect::<Vec<_>>(),
        });
        if let Some(d) = self.base.deg_bound() {
            v["deg_bound"] = json!(d);
        }
        v
    }

    pub fn from_json_components(p: u64, base: B, comps: &[Value]) -> Result<Self, WittError> {
        let elems = comps.iter().map(|c| base.elem_from_json(c)).collect::<Result<Vec<_>, _>>()?;
        Self::new(p, base, elems)
    }
}

trait ScaleInt: WittBase {
    fn scale_int(&self, k: &BigInt, a: &Self::Elem) -> Self::Elem {
        self.mul(&self.from_int(k), a)
    }
}

impl<B: WittBase> ScaleInt for B {}

impl WittVector<Integers> {
    pub fn reduce(&self) -> WittVector<PrimeField> {
        let f = PrimeField { p: self.p };
        let g = f.clone();
        self.map_base(f, |c| g.from_int(c)).expect("reduction preserves shape")
    }
}

impl WittVector<IntPoly> {
    pub fn reduce(&self, deg_bound: usize) -> Result<WittVector<PrimeFieldPoly>, WittError> {
        let f = PrimeFieldPoly { p: self.p, deg_bound };
        let g = f.clone();
        self.map_base(f, |c| {
            let v: Vec<u64> = c.iter().map(|x| g.from_int(x).first().copied().unwrap_or(0)).collect();
            let mut v = v;
            while v.last() == Some(&0) {
                v.pop();
            }
            v
        })
    }
}

impl WittVector<PrimeField> {
    /// Lift components to `{0, …, p−1} ⊂ Z`.
    pub fn lift(&self) -> WittVector<Integers> {
        self.map_base(Integers, |c| BigInt::from(*c)).expect("lift preserves shape")
    }

    /// Components as plain integers.
    pub fn digits(&self) -> Vec<u64> {
        self.comps.clone()
    }
}

impl WittVector<PrimeFieldPoly> {
    pub fn lift(&self) -> WittVector<IntPoly> {
        self.map_base(IntPoly, |c| c.iter().map(|&x| BigInt::from(x)).collect()).expect("lift preserves shape")
    }
}

/// Residue of an integer modulo `p^n` as `u64`, for the isomorphism
/// `W_n(F_p) ≅ Z/p^n`.
pub fn residue(k: &BigInt, p: u64, n: usize) -> u64 {
    use num_integer::Integer;
    let m = BigInt::from(p).pow(n as u32);
    k.mod_floor(&m).to_u64().unwrap()
}

pub fn is_unit_int(k: &BigInt) -> bool {
    k.is_one() || *k == BigInt::from(-1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64, comps: &[u64]) -> WittVector<PrimeField> {
        WittVector::new(p, PrimeField { p }, comps.to_vec()).unwrap()
    }

    #[test]
    fn v1_plus_v1_in_w2_f2() {
        let a = fp(2, &[0, 1]);
        assert_eq!(a.add(&a).unwrap(), fp(2, &[0, 0]));
    }

    #[test]
    fn ghost_of_one_one() {
        let a = WittVector::new(2, Integers, vec![BigInt::from(1), BigInt::from(1)]).unwrap();
        assert_eq!(a.ghost().unwrap(), vec![BigInt::from(1), BigInt::from(3)]);
    }

    #[test]
    fn ghost_rejects_fp() {
        assert_eq!(fp(3, &[1, 2]).ghost(), Err(WittError::BaseHasPTorsion));
    }

    #[test]
    fn teichmuller_ghost() {
        let t = WittVector::teichmuller(3, Integers, 3, BigInt::from(2)).unwrap();
        assert_eq!(t.ghost().unwrap(), vec![BigInt::from(2), BigInt::from(8), BigInt::from(512)]);
    }

    #[test]
    fn three_in_w3_f3() {
        let one = WittVector::one(3, PrimeField { p: 3 }, 3).unwrap();
        let three = one.add(&one).unwrap().add(&one).unwrap();
        let v1 = one.restrict().unwrap().verschiebung().unwrap();
        assert_eq!(three, v1);
    }

    #[test]
    fn frobenius_of_verschiebung() {
        let a = fp(5, &[2, 3]);
        let fv = a.verschiebung().unwrap().frobenius().unwrap();
        assert_eq!(fv, a.scalar(&BigInt::from(5)).unwrap());
    }

    #[test]
    fn mismatch_errors() {
        let a = fp(2, &[1, 1]);
        let b = fp(2, &[1, 1, 0]);
        assert!(matches!(a.add(&b), Err(WittError::MismatchedTruncation { .. })));
        assert_eq!(fp(2, &[1]).restrict(), Err(WittError::TruncationUnderflow));
    }

    #[test]
    fn degree_bound_enforced() {
        let base = PrimeFieldPoly { p: 2, deg_bound: 1 };
        let x = WittVector::teichmuller(2, base, 2, vec![0, 1]).unwrap();
        assert!(x.mul(&x).is_err());
        assert!(x.add(&x).is_ok());
    }
}
