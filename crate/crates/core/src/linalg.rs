//! Exact integer and rational linear algebra: dense matrices over `BigInt`,
//! Smith normal form with tracked transforms, Bareiss determinants, exact
//! symmetric signatures, and linear solvers over `Z`, `Q` and `GF(2)`.
//!
//! Everything here is deterministic and allocation-happy; diagrams in this
//! crate stay small, so clarity wins over tuning.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix in row-major order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(x));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.at(i, j) == self.at(j, i)))
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.at(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * other.at(k, j);
                    let cur = out.at(i, j) + add;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * &v[j]).sum())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.at(i, j).clone();
            self.set(i, j, v);
        }
    }

    /// row_i += c * row_k
    fn add_row_multiple(&mut self, i: usize, k: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.at(i, j) + c * self.at(k, j);
            self.set(i, j, v);
        }
    }

    /// col_j += c * col_k
    fn add_col_multiple(&mut self, j: usize, k: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.at(i, j) + c * self.at(i, k);
            self.set(i, j, v);
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m.at(k, k).is_zero() {
                match (k + 1..n).find(|&i| !m.at(i, k).is_zero()) {
                    Some(i) => {
                        m.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j)) / &prev;
                    m.set(i, j, v);
                }
                m.set(i, k, BigInt::zero());
            }
            prev = m.at(k, k).clone();
        }
        let d = m.at(n - 1, n - 1).clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }
}

/// Smith decomposition `u * a * v = d` with `u`, `v` unimodular and `d`
/// diagonal, nonnegative, each entry dividing the next.
pub struct Smith {
    pub u: IntMat,
    pub d: IntMat,
    pub v: IntMat,
}

impl Smith {
    /// Diagonal entries of `d`, length min(rows, cols).
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d.at(i, i).clone())
            .collect()
    }
}

fn find_min_abs_nonzero(m: &IntMat, from: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in from..m.rows() {
        for j in from..m.cols() {
            let v = m.at(i, j);
            if v.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if m.at(bi, bj).abs() <= v.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

/// Smith normal form with tracked row and column transforms.
pub fn smith_normal_form(a: &IntMat) -> Smith {
    let (r, c) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMat::identity(r);
    let mut v = IntMat::identity(c);

    let mut t = 0;
    while t < r.min(c) {
        let Some((pi, pj)) = find_min_abs_nonzero(&d, t) else {
            break;
        };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            if d.at(t, t).is_negative() {
                d.negate_row(t);
                u.negate_row(t);
            }
            // clear below and to the right of the pivot
            for i in t + 1..r {
                let q = -(d.at(i, t) / d.at(t, t));
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
            }
            for j in t + 1..c {
                let q = -(d.at(t, j) / d.at(t, t));
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
            }
            let col_clean = (t + 1..r).all(|i| d.at(i, t).is_zero());
            let row_clean = (t + 1..c).all(|j| d.at(t, j).is_zero());
            if !(col_clean && row_clean) {
                // a remainder smaller than the pivot appeared; re-pivot on it
                let (pi, pj) = find_min_abs_nonzero(&d, t).expect("nonzero residue");
                d.swap_rows(t, pi);
                u.swap_rows(t, pi);
                d.swap_cols(t, pj);
                v.swap_cols(t, pj);
                continue;
            }
            // enforce divisibility of the remaining block by the pivot
            let pivot = d.at(t, t).clone();
            let bad = (t + 1..r)
                .flat_map(|i| (t + 1..c).map(move |j| (i, j)))
                .find(|&(i, j)| !(d.at(i, j) % &pivot).is_zero());
            match bad {
                Some((i, _)) => {
                    d.add_row_multiple(t, i, &BigInt::one());
                    u.add_row_multiple(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        t += 1;
    }
    Smith { u, d, v }
}

/// Signature of a symmetric integer matrix, computed exactly by congruence
/// reduction over the rationals (no floating point).
pub fn signature(a: &IntMat) -> i64 {
    assert!(a.is_symmetric(), "signature of non-symmetric matrix");
    let n = a.rows();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from(a.at(i, j).clone())).collect())
        .collect();
    let mut pos = 0i64;
    let mut neg = 0i64;
    let mut k = 0;
    while k < n {
        if m[k][k].is_zero() {
            if let Some(l) = (k + 1..n).find(|&l| !m[l][l].is_zero()) {
                m.swap(k, l);
                for row in m.iter_mut() {
                    row.swap(k, l);
                }
            } else {
                // all diagonal entries vanish; use an off-diagonal entry
                let mut found = None;
                'outer: for i in k..n {
                    for j in i + 1..n {
                        if !m[i][j].is_zero() {
                            found = Some((i, j));
                            break 'outer;
                        }
                    }
                }
                let Some((i, j)) = found else {
                    break; // zero block contributes nothing
                };
                // row_i += row_j and col_i += col_j gives a nonzero diagonal
                for col in 0..n {
                    let v = m[i][col].clone() + m[j][col].clone();
                    m[i][col] = v;
                }
                for row in m.iter_mut() {
                    let v = row[i].clone() + row[j].clone();
                    row[i] = v;
                }
                m.swap(k, i);
                for row in m.iter_mut() {
                    row.swap(k, i);
                }
            }
        }
        let pivot = m[k][k].clone();
        if pivot.is_zero() {
            break;
        }
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            let factor = m[i][k].clone() / pivot.clone();
            if factor.is_zero() {
                continue;
            }
            for j in k..n {
                let v = m[i][j].clone() - factor.clone() * m[k][j].clone();
                m[i][j] = v;
            }
            for row in m.iter_mut().skip(k) {
                let v = row[i].clone() - factor.clone() * row[k].clone();
                row[i] = v;
            }
        }
        k += 1;
    }
    pos - neg
}

/// Solve `a x = b` over the rationals for square nonsingular `a`.
pub fn solve_rational(a: &IntMat, b: &[BigInt]) -> Option<Vec<BigRational>> {
    assert_eq!(a.rows(), a.cols(), "solve_rational wants a square matrix");
    assert_eq!(a.rows(), b.len(), "dimension mismatch");
    let n = a.rows();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigRational::from(a.at(i, j).clone()))
                .chain(std::iter::once(BigRational::from(b[i].clone())))
                .collect()
        })
        .collect();
    for k in 0..n {
        let pivot_row = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, pivot_row);
        let pivot = m[k][k].clone();
        for j in k..=n {
            let v = m[k][j].clone() / pivot.clone();
            m[k][j] = v;
        }
        for i in 0..n {
            if i == k || m[i][k].is_zero() {
                continue;
            }
            let factor = m[i][k].clone();
            for j in k..=n {
                let v = m[i][j].clone() - factor.clone() * m[k][j].clone();
                m[i][j] = v;
            }
        }
    }
    Some(m.into_iter().map(|row| row[row.len() - 1].clone()).collect())
}

/// Solve `a x = b` over the integers (any shape) via the Smith form.
/// Returns one solution if the system is consistent.
pub fn solve_integer(a: &IntMat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(a.rows(), b.len(), "dimension mismatch");
    let smith = smith_normal_form(a);
    let c = smith.u.mul_vec(b);
    let rank = smith
        .diagonal()
        .iter()
        .take_while(|d| !d.is_zero())
        .count();
    let mut w = vec![BigInt::zero(); a.cols()];
    for (i, ci) in c.iter().enumerate() {
        if i < rank {
            let di = smith.d.at(i, i);
            if !(ci % di).is_zero() {
                return None;
            }
            w[i] = ci / di;
        } else if !ci.is_zero() {
            return None;
        }
    }
    Some(smith.v.mul_vec(&w))
}

/// Solutions of a linear system over GF(2): one particular solution plus a
/// basis of the kernel.
pub struct Gf2Solutions {
    pub particular: Vec<u8>,
    pub kernel: Vec<Vec<u8>>,
    pub rank: usize,
}

/// Solve `a x = b` over GF(2); entries of `a` and `b` are reduced mod 2.
/// `None` means the system is inconsistent.
pub fn solve_gf2(a: &IntMat, b: &[BigInt]) -> Option<Gf2Solutions> {
    assert_eq!(a.rows(), b.len(), "dimension mismatch");
    let (r, n) = (a.rows(), a.cols());
    let bit = |x: &BigInt| u8::from(x.bit(0));
    let mut rows: Vec<Vec<u8>> = (0..r)
        .map(|i| {
            (0..n)
                .map(|j| bit(a.at(i, j)))
                .chain(std::iter::once(bit(&b[i])))
                .collect()
        })
        .collect();

    let mut pivot_col_of_row = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..r).find(|&i| rows[i][col] == 1) else {
            continue;
        };
        rows.swap(row, p);
        for i in 0..r {
            if i != row && rows[i][col] == 1 {
                let (head, tail) = if i < row {
                    let (a, b) = rows.split_at_mut(row);
                    (&mut a[i], &b[0])
                } else {
                    let (a, b) = rows.split_at_mut(i);
                    (&mut b[0], &a[row])
                };
                for k in 0..=n {
                    head[k] ^= tail[k];
                }
            }
        }
        pivot_col_of_row.push(col);
        row += 1;
        if row == r {
            break;
        }
    }
    let rank = pivot_col_of_row.len();
    if rows.iter().skip(rank).any(|r| r[n] == 1) {
        return None;
    }

    let mut particular = vec![0u8; n];
    for (i, &col) in pivot_col_of_row.iter().enumerate() {
        particular[col] = rows[i][n];
    }
    let pivot_set: Vec<bool> = {
        let mut s = vec![false; n];
        for &c in &pivot_col_of_row {
            s[c] = true;
        }
        s
    };
    let mut kernel = Vec::new();
    for free in (0..n).filter(|&j| !pivot_set[j]) {
        let mut v = vec![0u8; n];
        v[free] = 1;
        for (i, &col) in pivot_col_of_row.iter().enumerate() {
            v[col] = rows[i][free];
        }
        kernel.push(v);
    }
    Some(Gf2Solutions { particular, kernel, rank })
}

/// Rank of a matrix over GF(2).
pub fn gf2_rank(a: &IntMat) -> usize {
    let zeros = vec![BigInt::zero(); a.rows()];
    solve_gf2(a, &zeros).expect("homogeneous system is consistent").rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMat {
        IntMat::from_rows(rows)
    }

    #[test]
    fn determinant_small() {
        assert_eq!(m(&[vec![-1]]).determinant(), BigInt::from(-1));
        assert_eq!(m(&[vec![-1, 1], vec![1, 0]]).determinant(), BigInt::from(-1));
        assert_eq!(m(&[vec![2, 0], vec![0, 3]]).determinant(), BigInt::from(6));
        assert_eq!(m(&[vec![0, 1], vec![1, 0]]).determinant(), BigInt::from(-1));
        assert_eq!(
            m(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]).determinant(),
            BigInt::zero()
        );
    }

    #[test]
    fn smith_factors() {
        let a = m(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);
        let diag = s.diagonal();
        assert_eq!(diag, vec![BigInt::from(2), BigInt::from(2), BigInt::from(156)]);
        assert_eq!(s.u.determinant().abs(), BigInt::one());
        assert_eq!(s.v.determinant().abs(), BigInt::one());
    }

    #[test]
    fn smith_rectangular() {
        let a = m(&[vec![2, 4, 6], vec![2, 4, 8]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);
        assert_eq!(s.diagonal(), vec![BigInt::from(2), BigInt::from(2)]);
    }

    #[test]
    fn signature_cases() {
        assert_eq!(signature(&m(&[vec![1, 0], vec![0, -1]])), 0);
        assert_eq!(signature(&m(&[vec![0, 1], vec![1, 0]])), 0);
        assert_eq!(signature(&m(&[vec![-2, 3], vec![3, -4]])), 0);
        assert_eq!(signature(&m(&[vec![-1]])), -1);
        assert_eq!(signature(&m(&[vec![2, 1], vec![1, 2]])), 2);
        assert_eq!(signature(&m(&[vec![0, 0], vec![0, 0]])), 0);
        assert_eq!(signature(&m(&[vec![-2, 1], vec![1, -1]])), -2);
    }

    #[test]
    fn rational_solver() {
        let a = m(&[vec![-1]]);
        let x = solve_rational(&a, &[BigInt::from(1)]).unwrap();
        assert_eq!(x[0], BigRational::from(BigInt::from(-1)));

        let a = m(&[vec![0, 1], vec![1, 0]]);
        let x = solve_rational(&a, &[BigInt::from(2), BigInt::from(2)]).unwrap();
        assert_eq!(x[0], BigRational::from(BigInt::from(2)));

        let singular = m(&[vec![1, 1], vec![1, 1]]);
        assert!(solve_rational(&singular, &[BigInt::one(), BigInt::zero()]).is_none());
    }

    #[test]
    fn integer_solver() {
        let a = m(&[vec![2, 4], vec![0, 3]]);
        let b = vec![BigInt::from(6), BigInt::from(3)];
        let x = solve_integer(&a, &b).unwrap();
        assert_eq!(a.mul_vec(&x), b);
        // 2x = 3 has no integer solution
        assert!(solve_integer(&m(&[vec![2]]), &[BigInt::from(3)]).is_none());
    }

    #[test]
    fn gf2_solver() {
        // x1 + x2 = 1, x2 = 1 over GF(2)
        let a = m(&[vec![1, 1], vec![0, 1]]);
        let sol = solve_gf2(&a, &[BigInt::one(), BigInt::one()]).unwrap();
        assert_eq!(sol.particular, vec![0, 1]);
        assert_eq!(sol.rank, 2);
        assert!(sol.kernel.is_empty());

        // inconsistent: 0 = 1
        let a = m(&[vec![0]]);
        assert!(solve_gf2(&a, &[BigInt::one()]).is_none());

        let a = m(&[vec![0]]);
        let sol = solve_gf2(&a, &[BigInt::zero()]).unwrap();
        assert_eq!(sol.kernel.len(), 1);
    }
}
