//! Expression trees over `W_m(F_p[x])`-symbols and their normalization.
//!
//! Truncation levels are inferred top-down: below `F` or `R` the level is
//! one higher, below `V` one lower (and `V` out of level 1 is zero).

use serde::{Deserialize, Serialize};

use super::element::{pow, DRWElement};
use super::DrwError;

/// Default cap on evaluation steps.
pub const STEP_LIMIT: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Expr {
    /// Teichmüller lift `[c·x^j]`.
    Teich { c: u64, j: u64 },
    Int { n: i64 },
    Sum { args: Vec<Expr> },
    Prod { args: Vec<Expr> },
    Neg { arg: Box<Expr> },
    D { arg: Box<Expr> },
    F { arg: Box<Expr> },
    V { arg: Box<Expr> },
    R { arg: Box<Expr> },
}

impl Expr {
    pub fn x() -> Expr {
        Expr::Teich { c: 1, j: 1 }
    }

    pub fn x_pow(j: u64) -> Expr {
        Expr::Teich { c: 1, j }
    }

    pub fn int(n: i64) -> Expr {
        Expr::Int { n }
    }

    pub fn sum(args: Vec<Expr>) -> Expr {
        Expr::Sum { args }
    }

    pub fn prod(args: Vec<Expr>) -> Expr {
        Expr::Prod { args }
    }

    pub fn d(self) -> Expr {
        Expr::D { arg: Box::new(self) }
    }

    pub fn f(self) -> Expr {
        Expr::F { arg: Box::new(self) }
    }

    pub fn v(self) -> Expr {
        Expr::V { arg: Box::new(self) }
    }

    pub fn r(self) -> Expr {
        Expr::R { arg: Box::new(self) }
    }

    /// Form degree, or an error for sums of mixed degree.
    pub fn degree(&self) -> Result<u8, DrwError> {
        Ok(match self {
            Expr::Teich { .. } | Expr::Int { .. } => 0,
            Expr::Sum { args } => {
                let mut ds = args.iter().map(Expr::degree);
                let first = ds.next().transpose()?.unwrap_or(0);
                for d in ds {
                    if d? != first {
                        return Err(DrwError::Mismatch("sum of forms of different degree".into()));
                    }
                }
                first
            }
            Expr::Prod { args } => args.iter().try_fold(0u8, |a, e| Ok::<_, DrwError>((a + e.degree()?).min(2)))?,
            Expr::Neg { arg } | Expr::F { arg } | Expr::V { arg } | Expr::R { arg } => arg.degree()?,
            Expr::D { arg } => (arg.degree()? + 1).min(2),
        })
    }
}

/// Canonical form of `e` in `W_mΩ`, all terms of x-degree at most `bound`.
pub fn normalize(p: u64, m: u32, bound: u64, e: &Expr) -> Result<DRWElement, DrwError> {
    normalize_with_limit(p, m, bound, e, STEP_LIMIT)
}

pub fn normalize_with_limit(p: u64, m: u32, bound: u64, e: &Expr, limit: usize) -> Result<DRWElement, DrwError> {
    super::complex::check_params(p, m)?;
    let mut steps = 0;
    let out = eval(p, m, e, &mut steps, limit)?;
    out.check_bound(bound)?;
    Ok(out)
}

fn teichmuller(p: u64, m: u32, c: u64) -> i64 {
    // [c] = lim c^{p^n}; c^{p^{m−1}} is already fixed mod p^m
    let md = pow(p, m) as u128;
    let mut t = (c % p) as u128;
    for _ in 1..m {
        let mut acc = 1u128;
        for _ in 0..p {
            acc = acc * t % md;
        }
        t = acc;
    }
    t as i64
}

fn eval(p: u64, m: u32, e: &Expr, steps: &mut usize, limit: usize) -> Result<DRWElement, DrwError> {
    *steps += 1;
    if *steps > limit {
        return Err(DrwError::StepLimit(limit));
    }
    if matches!(e, Expr::F { .. } | Expr::R { .. }) {
        super::complex::check_params(p, m + 1)?;
    }
    Ok(match e {
        Expr::Teich { c, j } => DRWElement::monomial(p, m, *j, teichmuller(p, m, *c)),
        Expr::Int { n } => DRWElement::monomial(p, m, 0, (*n).rem_euclid(pow(p, m) as i64)),
        Expr::Sum { args } => {
            let mut acc = DRWElement::zero(p, m, e.degree()?);
            for a in args {
                acc = acc.add(&eval(p, m, a, steps, limit)?)?;
            }
            acc
        }
        Expr::Prod { args } => {
            let mut acc = DRWElement::monomial(p, m, 0, 1);
            for a in args {
                let x = eval(p, m, a, steps, limit)?;
                *steps += acc.terms().count() * x.terms().count();
                acc = acc.mul(&x)?;
            }
            acc
        }
        Expr::Neg { arg } => eval(p, m, arg, steps, limit)?.neg(),
        Expr::D { arg } => eval(p, m, arg, steps, limit)?.d(),
        Expr::F { arg } => eval(p, m + 1, arg, steps, limit)?.frobenius()?,
        Expr::R { arg } => eval(p, m + 1, arg, steps, limit)?.restrict()?,
        Expr::V { arg } => {
            if m == 1 {
                DRWElement::zero(p, m, arg.degree()?)
            } else {
                eval(p, m - 1, arg, steps, limit)?.verschiebung()
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_square() {
        let e = normalize(3, 2, 10, &Expr::x_pow(2).d()).unwrap();
        assert_eq!(e, DRWElement::omega(3, 2, 2, 2));
    }

    #[test]
    fn frobenius_of_dx() {
        for p in [2, 3, 5] {
            let e = normalize(p, 2, 10, &Expr::x().d().f()).unwrap();
            let want = normalize(p, 2, 10, &Expr::prod(vec![Expr::x_pow(p - 1), Expr::x().d()])).unwrap();
            assert_eq!(e, want);
        }
    }

    #[test]
    fn square_of_v_x() {
        // p = 2, m = 2: V([x])² = V([x]·FV[x]) = 2V([x]²) = 4[x] = 0
        let vx = Expr::x().v();
        let e = normalize(2, 2, 4, &Expr::prod(vec![vx.clone(), vx])).unwrap();
        assert!(e.is_zero());
        let vx = Expr::x().v();
        let e = normalize(2, 3, 4, &Expr::prod(vec![vx.clone(), vx])).unwrap();
        assert_eq!(e, DRWElement::monomial(2, 3, 1, 4));
    }

    #[test]
    fn guards() {
        let big = Expr::x_pow(4).f().f();
        assert!(matches!(normalize(3, 1, 20, &big), Err(DrwError::DegreeOverflow { .. })));
        assert!(matches!(normalize_with_limit(3, 2, 20, &Expr::x().d().d(), 2), Err(DrwError::StepLimit(2))));
        assert!(normalize(3, 2, 20, &Expr::x().d().d()).unwrap().is_zero());
        assert!(matches!(normalize(3, 2, 20, &Expr::sum(vec![Expr::x(), Expr::x().d()])), Err(DrwError::Mismatch(_))));
        assert!(normalize(3, 1, 5, &Expr::x().v()).unwrap().is_zero());
    }

    #[test]
    fn teichmuller_is_multiplicative() {
        let (p, m) = (5, 3);
        let md = pow(p, m) as i64;
        for a in 1..5u64 {
            for b in 1..5u64 {
                let ab = teichmuller(p, m, a * b);
                assert_eq!(ab, teichmuller(p, m, a) * teichmuller(p, m, b) % md);
            }
        }
    }
}
