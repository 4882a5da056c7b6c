//! Smith normal form with smallest-nonzero-entry pivoting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;

/// Result of [`smith_normal_form`]: `left · m · right = diag`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub left: IntMatrix,
    pub diag: IntMatrix,
    pub right: IntMatrix,
}

impl Smith {
    /// Nonzero diagonal entries, in order (each divides the next).
    pub fn nonzero_diagonal(&self) -> Vec<BigInt> {
        let n = self.diag.rows().min(self.diag.cols());
        (0..n).map(|i| self.diag[(i, i)].clone()).take_while(|d| !d.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.nonzero_diagonal().len()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let out = Reducer::new(m, true, true, false).run();
    Smith {
        left: out.left.unwrap(),
        diag: out.diag,
        right: out.right.unwrap(),
    }
}

/// What the reducer produced; transforms are present only when requested.
pub(crate) struct Reduced {
    pub diag: IntMatrix,
    pub invariants: Vec<BigInt>,
    pub left: Option<IntMatrix>,
    pub right: Option<IntMatrix>,
    pub right_inv: Option<IntMatrix>,
}

/// Working state. Rows and columns are stored as nested vectors because the
/// elimination is dominated by whole-row and whole-column updates.
pub(crate) struct Reducer {
    a: Vec<Vec<BigInt>>,
    rows: usize,
    cols: usize,
    left: Option<Vec<Vec<BigInt>>>,
    right: Option<Vec<Vec<BigInt>>>,
    right_inv: Option<Vec<Vec<BigInt>>>,
}

fn ident(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

impl Reducer {
    pub fn new(m: &IntMatrix, want_left: bool, want_right: bool, want_right_inv: bool) -> Self {
        Reducer {
            a: m.to_rows(),
            rows: m.rows(),
            cols: m.cols(),
            left: want_left.then(|| ident(m.rows())),
            right: want_right.then(|| ident(m.cols())),
            right_inv: want_right_inv.then(|| ident(m.cols())),
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.a.swap(i, j);
        if let Some(l) = &mut self.left {
            l.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in &mut self.a {
            r.swap(i, j);
        }
        if let Some(rt) = &mut self.right {
            for r in rt.iter_mut() {
                r.swap(i, j);
            }
        }
        if let Some(ri) = &mut self.right_inv {
            ri.swap(i, j);
        }
    }

    /// row_i -= q · row_t
    fn row_axpy(&mut self, i: usize, t: usize, q: &BigInt) {
        let (src, dst) = borrow_two(&mut self.a, t, i);
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            if !s.is_zero() {
                *d -= q * s;
            }
        }
        if let Some(l) = &mut self.left {
            let (src, dst) = borrow_two(l, t, i);
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                if !s.is_zero() {
                    *d -= q * s;
                }
            }
        }
    }

    /// col_j -= q · col_t
    fn col_axpy(&mut self, j: usize, t: usize, q: &BigInt) {
        for r in &mut self.a {
            if !r[t].is_zero() {
                let v = q * &r[t];
                r[j] -= v;
            }
        }
        if let Some(rt) = &mut self.right {
            for r in rt.iter_mut() {
                if !r[t].is_zero() {
                    let v = q * &r[t];
                    r[j] -= v;
                }
            }
        }
        // right ← right·E with E = I − q e_t e_jᵀ, so right_inv ← E⁻¹·right_inv,
        // i.e. row_t += q · row_j.
        if let Some(ri) = &mut self.right_inv {
            let (src, dst) = borrow_two(ri, j, t);
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                if !s.is_zero() {
                    *d += q * s;
                }
            }
        }
    }

    fn negate_row(&mut self, t: usize) {
        for x in &mut self.a[t] {
            *x = -&*x;
        }
        if let Some(l) = &mut self.left {
            for x in &mut l[t] {
                *x = -&*x;
            }
        }
    }

    fn smallest_in_block(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let v = &self.a[i][j];
                if v.is_zero() {
                    continue;
                }
                let av = v.abs();
                if av.is_one() {
                    return Some((i, j));
                }
                if best.as_ref().map_or(true, |b| av < b.2) {
                    best = Some((i, j, av));
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }

    fn smallest_in_col(&self, t: usize) -> usize {
        (t..self.rows)
            .filter(|&i| !self.a[i][t].is_zero())
            .min_by(|&x, &y| self.a[x][t].abs().cmp(&self.a[y][t].abs()))
            .unwrap()
    }

    fn smallest_in_row(&self, t: usize) -> usize {
        (t..self.cols)
            .filter(|&j| !self.a[t][j].is_zero())
            .min_by(|&x, &y| self.a[t][x].abs().cmp(&self.a[t][y].abs()))
            .unwrap()
    }

    pub fn run(mut self) -> Reduced {
        let n = self.rows.min(self.cols);
        let mut t = 0;
        while t < n {
            let Some((pi, pj)) = self.smallest_in_block(t) else { break };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                let mut dirty = false;
                for i in t + 1..self.rows {
                    if self.a[i][t].is_zero() {
                        continue;
                    }
                    let q = nearest_quotient(&self.a[i][t], &self.a[t][t]);
                    if !q.is_zero() {
                        self.row_axpy(i, t, &q);
                    }
                    dirty |= !self.a[i][t].is_zero();
                }
                if dirty {
                    let i = self.smallest_in_col(t);
                    self.swap_rows(t, i);
                    continue;
                }
                for j in t + 1..self.cols {
                    if self.a[t][j].is_zero() {
                        continue;
                    }
                    let q = nearest_quotient(&self.a[t][j], &self.a[t][t]);
                    if !q.is_zero() {
                        self.col_axpy(j, t, &q);
                    }
                    dirty |= !self.a[t][j].is_zero();
                }
                if dirty {
                    let j = self.smallest_in_row(t);
                    self.swap_cols(t, j);
                    continue;
                }
                let piv = self.a[t][t].clone();
                let bad = (t + 1..self.rows)
                    .find(|&i| (t + 1..self.cols).any(|j| !self.a[i][j].is_multiple_of(&piv)));
                match bad {
                    Some(i) => self.row_axpy(t, i, &BigInt::from(-1)),
                    None => break,
                }
            }
            if self.a[t][t].is_negative() {
                self.negate_row(t);
            }
            t += 1;
        }
        let invariants: Vec<BigInt> = (0..t).map(|i| self.a[i][i].clone()).collect();
        let mut diag = IntMatrix::zeros(self.rows, self.cols);
        for (i, d) in invariants.iter().enumerate() {
            diag[(i, i)] = d.clone();
        }
        let to_m = |v: Option<Vec<Vec<BigInt>>>, k: usize| v.map(|rows| IntMatrix::from_rows(k, rows));
        Reduced {
            diag,
            invariants,
            left: to_m(self.left, self.rows),
            right: to_m(self.right, self.cols),
            right_inv: to_m(self.right_inv, self.cols),
        }
    }
}

/// Quotient rounding to the nearest integer so remainders stay small.
fn nearest_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    let twice: BigInt = &r * 2;
    // r has the sign of b, so r − b is the other candidate remainder
    if twice.abs() > b.abs() {
        q + 1
    } else {
        q
    }
}

fn borrow_two<T>(v: &mut [T], src: usize, dst: usize) -> (&T, &mut T) {
    assert_ne!(src, dst);
    if src < dst {
        let (a, b) = v.split_at_mut(dst);
        (&a[src], &mut b[0])
    } else {
        let (a, b) = v.split_at_mut(src);
        (&b[0], &mut a[dst])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(m: &IntMatrix) -> Smith {
        let s = smith_normal_form(m);
        assert_eq!(s.left.mul(m).mul(&s.right), s.diag);
        assert!(s.left.determinant().abs().is_one());
        assert!(s.right.determinant().abs().is_one());
        let d = s.nonzero_diagonal();
        for w in d.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]));
        }
        s
    }

    #[test]
    fn nearest_quotient_shrinks_remainder() {
        for a in -20i64..=20 {
            for b in [-7i64, -4, -1, 1, 4, 7] {
                let (a, b) = (BigInt::from(a), BigInt::from(b));
                let r = &a - nearest_quotient(&a, &b) * &b;
                assert!(BigInt::from(2) * r.abs() <= b.abs(), "{a} / {b}");
            }
        }
    }

    #[test]
    fn two_by_two_example() {
        let s = check(&IntMatrix::from_i64(&[&[2, 4], &[6, 8]]));
        assert_eq!(s.nonzero_diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn trivial_shapes() {
        let s = check(&IntMatrix::identity(3));
        assert_eq!(s.nonzero_diagonal(), vec![BigInt::one(); 3]);
        let s = check(&IntMatrix::zeros(2, 2));
        assert!(s.nonzero_diagonal().is_empty());
        check(&IntMatrix::zeros(0, 3));
        check(&IntMatrix::zeros(3, 0));
    }

    #[test]
    fn needs_divisibility_fix() {
        let s = check(&IntMatrix::from_i64(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.nonzero_diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn right_inverse_is_tracked() {
        let m = IntMatrix::from_i64(&[&[3, 5, 7], &[2, 4, 9], &[1, 1, 1], &[6, 0, 2]]);
        let r = Reducer::new(&m, false, true, true).run();
        let right = r.right.unwrap();
        assert_eq!(right.mul(&r.right_inv.unwrap()), IntMatrix::identity(3));
    }
}
