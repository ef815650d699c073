//! Dense integer matrices over arbitrary-precision integers, with Hermite and
//! Smith normal forms.
//!
//! Everything in the abelian-group layer reduces to two questions about an
//! integer lattice: "what is its canonical basis" (Hermite form) and "what does
//! the quotient look like" (Smith form). Both are computed exactly.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Int = BigInt;

/// Row-major dense matrix of [`Int`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = Int;
    fn index(&self, (r, c): (usize, usize)) -> &Int {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Int {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: &[Vec<Int>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged row");
            data.extend(row.iter().cloned());
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<Vec<Int>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Int::from(x)).collect())
            .collect();
        Self::from_rows(cols, &rows)
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Int>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "ragged column");
            for (r, x) in col.iter().enumerate() {
                m[(r, c)] = x.clone();
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Int] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vec(&self, r: usize) -> Vec<Int> {
        self.row(r).to_vec()
    }

    pub fn column(&self, c: usize) -> Vec<Int> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn rows_vec(&self) -> Vec<Vec<Int>> {
        (0..self.rows).map(|r| self.row_vec(r)).collect()
    }

    pub fn columns_vec(&self) -> Vec<Vec<Int>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Int::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Selects the given rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        let rows: Vec<Vec<Int>> = idx.iter().map(|&r| self.row_vec(r)).collect();
        Self::from_rows(self.cols, &rows)
    }

    pub fn select_columns(&self, idx: &[usize]) -> IntMatrix {
        let cols: Vec<Vec<Int>> = idx.iter().map(|&c| self.column(c)).collect();
        Self::from_columns(self.rows, &cols)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, k: &Int) {
        if k.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = &self.data[src * self.cols + c] * k;
            self.data[dst * self.cols + c] += v;
        }
    }

    /// col[dst] += k * col[src]
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, k: &Int) {
        if k.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = &self.data[r * self.cols + src] * k;
            self.data[r * self.cols + dst] += v;
        }
    }

    pub fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -std::mem::take(&mut self.data[r * self.cols + c]);
            self.data[r * self.cols + c] = v;
        }
    }

    pub fn negate_col(&mut self, c: usize) {
        for r in 0..self.rows {
            let v = -std::mem::take(&mut self.data[r * self.cols + c]);
            self.data[r * self.cols + c] = v;
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    pub fn rank(&self) -> usize {
        hermite_rows(&self.rows_vec(), self.cols).len()
    }
}

/// Row-style Hermite normal form of the lattice spanned by `rows`.
///
/// Returns the nonzero rows of the echelon basis: each pivot is positive and
/// the entries above a pivot lie in `[0, pivot)`. The result depends only on
/// the lattice, not on the generators.
pub fn hermite_rows(rows: &[Vec<Int>], ncols: usize) -> Vec<Vec<Int>> {
    let mut a: Vec<Vec<Int>> = rows
        .iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .cloned()
        .collect();
    for r in &a {
        assert_eq!(r.len(), ncols, "ragged generator");
    }
    let mut pivot_row = 0;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in 0..ncols {
        if pivot_row >= a.len() {
            break;
        }
        // Euclid on column `col` over rows pivot_row..
        loop {
            let mut best: Option<usize> = None;
            for i in pivot_row..a.len() {
                if !a[i][col].is_zero()
                    && best.is_none_or(|b| a[i][col].abs() < a[b][col].abs())
                {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            a.swap(pivot_row, b);
            let mut done = true;
            for i in pivot_row + 1..a.len() {
                if a[i][col].is_zero() {
                    continue;
                }
                let q = a[i][col].div_floor(&a[pivot_row][col]);
                let (head, tail) = a.split_at_mut(i);
                let p = &head[pivot_row];
                for (x, y) in tail[0].iter_mut().zip(p.iter()) {
                    *x -= &q * y;
                }
                if !a[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if pivot_row < a.len() && !a[pivot_row][col].is_zero() {
            if a[pivot_row][col].is_negative() {
                for x in a[pivot_row].iter_mut() {
                    *x = -std::mem::take(x);
                }
            }
            pivots.push((pivot_row, col));
            pivot_row += 1;
        }
    }
    a.truncate(pivot_row);
    // Reduce above each pivot in order; row pr is zero left of pc, so later
    // reductions never disturb earlier pivot columns.
    for &(pr, pc) in pivots.iter() {
        for i in 0..pr {
            let q = a[i][pc].div_floor(&a[pr][pc]);
            if q.is_zero() {
                continue;
            }
            let (head, tail) = a.split_at_mut(pr);
            for (x, y) in head[i].iter_mut().zip(tail[0].iter()) {
                *x -= &q * y;
            }
        }
    }
    a
}

/// Reduces `v` against a Hermite basis; returns the remainder, which is zero
/// exactly when `v` lies in the lattice.
pub fn reduce_against_hermite(basis: &[Vec<Int>], v: &[Int]) -> Vec<Int> {
    let mut v = v.to_vec();
    for row in basis {
        let Some(pc) = row.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        let q = v[pc].div_floor(&row[pc]);
        if !q.is_zero() {
            for (x, y) in v.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
    }
    v
}

pub fn hermite_contains(basis: &[Vec<Int>], v: &[Int]) -> bool {
    reduce_against_hermite(basis, v).iter().all(Zero::is_zero)
}

/// Smith normal form with transforms: `u * m * v == s`, with `v_inv` the
/// inverse of `v`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
    /// Number of nonzero diagonal entries.
    pub rank: usize,
}

impl Smith {
    /// Diagonal entries `s[(i,i)]` for `i < min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<Int> {
        (0..self.s.nrows().min(self.s.ncols()))
            .map(|i| self.s[(i, i)].clone())
            .collect()
    }

    /// The nonzero elementary divisors.
    pub fn elementary_divisors(&self) -> Vec<Int> {
        self.diagonal().into_iter().take(self.rank).collect()
    }
}

pub fn smith(m: &IntMatrix) -> Smith {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut v_inv = IntMatrix::identity(cols);

    // Column ops on `a` are mirrored on `v`, and inversely on the rows of `v_inv`.
    fn col_swap(a: &mut IntMatrix, v: &mut IntMatrix, vi: &mut IntMatrix, i: usize, j: usize) {
        a.swap_cols(i, j);
        v.swap_cols(i, j);
        vi.swap_rows(i, j);
    }
    fn col_add(a: &mut IntMatrix, v: &mut IntMatrix, vi: &mut IntMatrix, dst: usize, src: usize, k: &Int) {
        a.add_col_multiple(dst, src, k);
        v.add_col_multiple(dst, src, k);
        vi.add_row_multiple(src, dst, &-k);
    }

    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[(i, j)].is_zero()
                    && best.is_none_or(|(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        col_swap(&mut a, &mut v, &mut v_inv, t, pj);

        loop {
            let mut changed = false;
            for i in t + 1..rows {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = a[(i, t)].div_floor(&a[(t, t)]);
                a.add_row_multiple(i, t, &-&q);
                u.add_row_multiple(i, t, &-&q);
                if !a[(i, t)].is_zero() {
                    a.swap_rows(t, i);
                    u.swap_rows(t, i);
                    changed = true;
                }
            }
            for j in t + 1..cols {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = a[(t, j)].div_floor(&a[(t, t)]);
                col_add(&mut a, &mut v, &mut v_inv, j, t, &-&q);
                if !a[(t, j)].is_zero() {
                    col_swap(&mut a, &mut v, &mut v_inv, t, j);
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // Row and column are clear; enforce divisibility of the trailing block.
            let mut bad = None;
            'search: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !a[(i, j)].is_multiple_of(&a[(t, t)]) {
                        bad = Some(i);
                        break 'search;
                    }
                }
            }
            match bad {
                Some(i) => {
                    a.add_row_multiple(t, i, &Int::one());
                    u.add_row_multiple(t, i, &Int::one());
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    Smith {
        u,
        s: a,
        v,
        v_inv,
        rank: t,
    }
}

/// Saturated basis (as columns) of the integer kernel `{x : m x = 0}`.
/// Column basis of `{z : m z = 0}`, read off the Hermite form of `[mᵀ | I]`
/// and reduced again, so entries stay small.
pub fn integer_kernel(m: &IntMatrix) -> IntMatrix {
    let (k, n) = (m.nrows(), m.ncols());
    let rows: Vec<Vec<Int>> = (0..n)
        .map(|j| {
            let mut r: Vec<Int> = (0..k).map(|i| m[(i, j)].clone()).collect();
            r.extend((0..n).map(|i| Int::from(u8::from(i == j))));
            r
        })
        .collect();
    let kernel: Vec<Vec<Int>> = hermite_rows(&rows, k + n)
        .into_iter()
        .filter(|r| r[..k].iter().all(Zero::is_zero))
        .map(|r| r[k..].to_vec())
        .collect();
    IntMatrix::from_columns(n, &hermite_rows(&kernel, n))
}

/// Lattice `{z : a z ≡ 0 (mod modulus)}` as a column basis.
pub fn congruence_kernel(a: &IntMatrix, modulus: &Int) -> IntMatrix {
    let n = a.ncols();
    if a.nrows() == 0 || modulus.is_one() {
        return IntMatrix::identity(n);
    }
    let sm = smith(a);
    let diag = sm.diagonal();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let col = sm.v.column(i);
        let scale = if i < sm.rank {
            modulus / diag[i].gcd(modulus)
        } else {
            Int::one()
        };
        cols.push(col.into_iter().map(|x| x * &scale).collect::<Vec<_>>());
    }
    IntMatrix::from_columns(n, &cols)
}

pub fn to_i64(x: &Int) -> i64 {
    x.to_i64().expect("integer out of i64 range")
}

pub fn int_vec(xs: &[i64]) -> Vec<Int> {
    xs.iter().map(|&x| Int::from(x)).collect()
}

pub fn lcm_all<'a>(xs: impl IntoIterator<Item = &'a Int>) -> Int {
    xs.into_iter().fold(Int::one(), |acc, x| {
        if x.is_zero() {
            acc
        } else {
            acc.lcm(x)
        }
    })
}
