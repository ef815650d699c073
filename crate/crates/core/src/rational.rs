use num_traits::{One, Signed, Zero};

use crate::exact::Rational;
use crate::intmat::{lcm_all, Int};

/// Row-reduced echelon form of a list of rational row vectors.
/// Returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vec<Rational>], ncols: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let top = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (y, x) in row.iter_mut().zip(&top) {
                    *y -= &f * x;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of `{x : row · x = 0 for every row}`.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let (m, pivots) = rref(rows, ncols);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); ncols];
        v[free] = Rational::one();
        for (row, &pc) in m.iter().zip(&pivots) {
            v[pc] = -row[free].clone();
        }
        out.push(v);
    }
    out
}

/// Basis of the intersection of two row spans.
pub fn intersect_spans(a: &[Vec<Rational>], b: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Solve x·A = y·B through the left kernel of [A; -B].
    let mut cols: Vec<Vec<Rational>> = vec![Vec::with_capacity(a.len() + b.len()); ncols];
    for row in a {
        for (c, x) in row.iter().enumerate() {
            cols[c].push(x.clone());
        }
    }
    for row in b {
        for (c, x) in row.iter().enumerate() {
            cols[c].push(-x.clone());
        }
    }
    let ker = nullspace(&cols, a.len() + b.len());
    let vecs: Vec<Vec<Rational>> = ker
        .iter()
        .map(|k| {
            (0..ncols)
                .map(|c| a.iter().zip(k).map(|(row, x)| &row[c] * x).sum())
                .collect()
        })
        .collect();
    rref(&vecs, ncols).0
}

/// Whether every row of `sub` lies in the span of `sup`.
pub fn span_contains(sup: &[Vec<Rational>], sub: &[Vec<Rational>], ncols: usize) -> bool {
    let base = rank(sup, ncols);
    let mut all = sup.to_vec();
    all.extend(sub.iter().cloned());
    rank(&all, ncols) == base
}

/// Scales a rational vector to a primitive integer vector.
pub fn primitive_integer(v: &[Rational]) -> Vec<Int> {
    let den = lcm_all(v.iter().map(|x| x.denom()));
    let ints: Vec<Int> = v
        .iter()
        .map(|x| (x * Rational::from_integer(den.clone())).to_integer())
        .collect();
    let g = ints
        .iter()
        .fold(Int::zero(), |acc, x| num_integer::Integer::gcd(&acc, x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

pub fn to_rational_rows(rows: &[Vec<Int>]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect())
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn max_abs_entry(rows: &[Vec<Rational>]) -> Rational {
    rows.iter()
        .flatten()
        .map(|x| x.abs())
        .fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};

    fn q(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| rat_int(x)).collect()).collect()
    }

    #[test]
    fn rank_and_kernel() {
        let m = q(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&m, 3), 2);
        let k = nullspace(&m, 3);
        assert_eq!(k.len(), 1);
        for row in &m {
            assert!(dot(row, &k[0]).is_zero());
        }
    }

    #[test]
    fn intersection_of_planes() {
        let a = q(&[&[1, 0, 0], &[0, 1, 0]]);
        let b = q(&[&[0, 1, 0], &[0, 0, 1]]);
        let i = intersect_spans(&a, &b, 3);
        assert_eq!(i, q(&[&[0, 1, 0]]));
        assert!(span_contains(&a, &i, 3));
        assert!(!span_contains(&a, &b, 3));
    }

    #[test]
    fn primitive_vectors() {
        let v = vec![rat(1, 2), rat(-3, 4), rat_int(0)];
        assert_eq!(primitive_integer(&v), vec![Int::from(2), Int::from(-3), Int::from(0)]);
    }
}
