//! Certificates for weighted rank inequalities over all rational subspaces of
//! a lattice span.
//!
//! Given a subspace `E₀ ⊆ Q^n`, coordinate blocks `π_j` and weights `w_j ≥ 0`,
//! the question is whether `f(E) = Σ w_j·dim π_j(E) − dim E ≥ c` for every
//! subspace `E ⊆ E₀`. Reducing a saturated basis modulo a prime `p` sends each
//! rational `E` to an `F_p` subspace of the same dimension whose projections
//! can only lose rank, so a full `F_p` scan without violations proves the
//! rational statement. Violations found mod `p` are lifted and re-checked
//! exactly.

use std::ops::Range;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{BlError, Result};
use crate::exact::Rational;
use crate::intmat::{hermite_rows, integer_kernel, smith, Int, IntMatrix};
use crate::rational::{intersect_spans, rank, rref, to_rational_rows};

pub const DEFAULT_PRIMES: [u64; 3] = [2, 3, 5];
pub const DEFAULT_CAP_RANK: usize = 6;
const DEFAULT_MAX_SUBSPACES: u128 = 4_000_000;
const MAX_LIFT_ATTEMPTS: usize = 256;

#[derive(Clone, Debug)]
pub struct RankCheckConfig {
    pub primes: Vec<u64>,
    /// Largest span dimension scanned subspace by subspace.
    pub cap_rank: usize,
    /// Largest number of candidate subspaces examined for one prime.
    pub max_subspaces: u128,
}

impl Default for RankCheckConfig {
    fn default() -> Self {
        RankCheckConfig {
            primes: DEFAULT_PRIMES.to_vec(),
            cap_rank: DEFAULT_CAP_RANK,
            max_subspaces: DEFAULT_MAX_SUBSPACES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankVerdict {
    /// The inequality holds for every rational subspace; `prime` is the
    /// prime whose scan passed (`None` when the span is zero).
    Holds { prime: Option<u64> },
    /// A rational subspace (rows, reduced echelon form) with `f(E) < c`.
    Violated { subspace: Vec<Vec<Rational>>, value: Rational },
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct RankCheckOutcome {
    pub verdict: RankVerdict,
    pub primes_used: Vec<u64>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RankProblem {
    pub span: Vec<Vec<Int>>,
    pub ncols: usize,
    pub blocks: Vec<Range<usize>>,
    pub weights: Vec<Rational>,
    pub threshold: Rational,
    /// Restrict to subspaces other than zero and the whole span.
    pub proper: bool,
}

impl RankProblem {
    /// `Σ w_j·dim π_j(E) − dim E` for the span of `rows`.
    pub fn functional(&self, rows: &[Vec<Rational>]) -> Rational {
        let dim = rank(rows, self.ncols);
        let mut v = -Rational::from_integer(dim.into());
        for (b, w) in self.blocks.iter().zip(&self.weights) {
            let proj: Vec<Vec<Rational>> = rows.iter().map(|r| r[b.clone()].to_vec()).collect();
            v += w * Rational::from_integer(rank(&proj, b.len()).into());
        }
        v
    }

    pub fn check(&self, cfg: &RankCheckConfig) -> Result<RankCheckOutcome> {
        let mut notes = Vec::new();
        let basis = saturate(&self.span, self.ncols);
        let r = basis.len();
        let span_q = to_rational_rows(&basis);
        let zero = Rational::zero();
        if !self.proper && zero < self.threshold {
            return Ok(outcome(
                RankVerdict::Violated {
                    subspace: Vec::new(),
                    value: zero,
                },
                vec![],
                vec!["the zero subspace violates the inequality".into()],
            ));
        }
        if r == 0 || (self.proper && r == 1) {
            return Ok(outcome(RankVerdict::Holds { prime: None }, vec![], notes));
        }
        if let Some((sub, value)) = self.quick_candidates(&span_q) {
            notes.push("violation found among coordinate-kernel candidates".into());
            return Ok(outcome(RankVerdict::Violated { subspace: sub, value }, vec![], notes));
        }

        let weights = self.scaled_weights();
        let mut used = Vec::new();
        let mut any_scanned = false;
        for &p in &cfg.primes {
            if p < 2 || !is_prime(p) {
                notes.push(format!("{p} is not prime; skipped"));
                continue;
            }
            if divides_elementary_divisor(&basis, self.ncols, p) {
                notes.push(format!("prime {p} divides an elementary divisor; skipped"));
                continue;
            }
            let bp: Vec<Vec<u64>> = basis.iter().map(|row| reduce_row(row, p)).collect();
            let direct_cost = subspace_count(r, p);
            let proj_ranks: Vec<usize> = self
                .blocks
                .iter()
                .map(|b| rank_mod(bp.iter().map(|row| row[b.clone()].to_vec()).collect(), p))
                .collect();
            let tuple_cost = proj_ranks
                .iter()
                .fold(1u128, |acc, &k| acc.saturating_mul(subspace_count(k, p)));
            let direct_ok = r <= cfg.cap_rank && direct_cost <= cfg.max_subspaces;
            let tuple_ok = !self.proper && tuple_cost <= cfg.max_subspaces;
            if !direct_ok && !tuple_ok {
                if r > cfg.cap_rank {
                    return Err(BlError::Capacity {
                        what: "rank of the scanned span".into(),
                        size: r as u128,
                        cap: cfg.cap_rank as u128,
                    });
                }
                notes.push(format!(
                    "prime {p}: {} candidate subspaces exceed the budget; skipped",
                    direct_cost.min(tuple_cost)
                ));
                continue;
            }
            any_scanned = true;
            used.push(p);
            let scan = Scan {
                problem: self,
                bp: &bp,
                p,
                weights: &weights,
            };
            let violations = if direct_ok && (direct_cost <= tuple_cost || !tuple_ok) {
                scan.direct()
            } else {
                scan.by_tuples()
            };
            if violations.is_empty() {
                notes.push(format!("prime {p}: full scan passed"));
                return Ok(outcome(RankVerdict::Holds { prime: Some(p) }, used, notes));
            }
            notes.push(format!("prime {p}: {} violating subspaces mod p", violations.len()));
            for e in violations.iter().take(MAX_LIFT_ATTEMPTS) {
                if let Some((sub, value)) = self.lift(e, p, &basis, &span_q) {
                    notes.push(format!("prime {p}: violation lifted to the rationals"));
                    return Ok(outcome(RankVerdict::Violated { subspace: sub, value }, used, notes));
                }
            }
            notes.push(format!("prime {p}: no lift verified"));
        }
        if !any_scanned && r > cfg.cap_rank {
            return Err(BlError::Capacity {
                what: "rank of the scanned span".into(),
                size: r as u128,
                cap: cfg.cap_rank as u128,
            });
        }
        Ok(outcome(RankVerdict::Inconclusive, used, notes))
    }

    /// Weights and threshold over a common denominator.
    fn scaled_weights(&self) -> (Vec<i64>, i64, i64) {
        let den = self
            .weights
            .iter()
            .chain(std::iter::once(&self.threshold))
            .fold(Int::from(1), |acc, w| acc.lcm(w.denom()));
        let scale = |x: &Rational| {
            (x * Rational::from_integer(den.clone()))
                .to_integer()
                .to_i64()
                .expect("weight fits")
        };
        (
            self.weights.iter().map(scale).collect(),
            scale(&self.threshold),
            den.to_i64().expect("denominator fits"),
        )
    }

    /// `Some(f(E))` when the span of `rows` violates the inequality.
    pub fn is_violation(&self, rows: &[Vec<Rational>]) -> Option<Rational> {
        if self.proper {
            let d = rank(rows, self.ncols);
            if d == 0 || d == rank(&to_rational_rows(&self.span), self.ncols) {
                return None;
            }
        }
        let v = self.functional(rows);
        (v < self.threshold).then_some(v)
    }

    /// The whole span and the kernels of projections onto factor subsets.
    fn quick_candidates(&self, span: &[Vec<Rational>]) -> Option<(Vec<Vec<Rational>>, Rational)> {
        let m = self.blocks.len();
        let mut best: Option<(Vec<Vec<Rational>>, Rational)> = None;
        for mask in 0u32..(1 << m.min(16)) {
            let mut cur = span.to_vec();
            for j in (0..m).filter(|j| mask >> j & 1 == 1) {
                let mut eqs = Vec::new();
                for c in self.blocks[j].clone() {
                    let mut e = vec![Rational::zero(); self.ncols];
                    e[c] = Rational::from_integer(1.into());
                    eqs.push(e);
                }
                let kernel = crate::rational::nullspace(&eqs, self.ncols);
                cur = intersect_spans(&cur, &kernel, self.ncols);
            }
            if let Some(v) = self.is_violation(&cur) {
                if best.as_ref().is_none_or(|(_, b)| v < *b) {
                    best = Some((rref(&cur, self.ncols).0, v));
                }
            }
        }
        best
    }

    /// Lifts an `F_p` subspace (coefficient rows) and closes it so its
    /// projections stay fixed while its dimension grows.
    fn lift(
        &self,
        coeffs: &[Vec<u64>],
        p: u64,
        basis: &[Vec<Int>],
        span: &[Vec<Rational>],
    ) -> Option<(Vec<Vec<Rational>>, Rational)> {
        for symmetric in [false, true] {
            let rows: Vec<Vec<Rational>> = coeffs
                .iter()
                .map(|c| {
                    let lifted: Vec<Int> = c
                        .iter()
                        .map(|&x| {
                            if symmetric && x > p / 2 {
                                Int::from(x) - Int::from(p)
                            } else {
                                Int::from(x)
                            }
                        })
                        .collect();
                    (0..self.ncols)
                        .map(|col| {
                            let s: Int = lifted.iter().zip(basis).map(|(a, b)| a * &b[col]).sum();
                            Rational::from_integer(s)
                        })
                        .collect()
                })
                .collect();
            let closed = self.close(&rows, span);
            if let Some(v) = self.is_violation(&closed) {
                return Some((rref(&closed, self.ncols).0, v));
            }
            if let Some(v) = self.is_violation(&rows) {
                return Some((rref(&rows, self.ncols).0, v));
            }
        }
        None
    }

    /// `span ∩ ∏_j span(π_j E)`.
    fn close(&self, rows: &[Vec<Rational>], span: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        let mut product = Vec::new();
        for b in &self.blocks {
            let proj: Vec<Vec<Rational>> = rows.iter().map(|r| r[b.clone()].to_vec()).collect();
            for v in rref(&proj, b.len()).0 {
                let mut e = vec![Rational::zero(); self.ncols];
                e[b.clone()].clone_from_slice(&v);
                product.push(e);
            }
        }
        intersect_spans(span, &product, self.ncols)
    }
}

/// `target ∩ ∏_j (π_j E)^⊥`, with orthogonal complements taken inside each
/// coordinate block.
pub fn transverse_subspace(
    target: &[Vec<Rational>],
    e: &[Vec<Rational>],
    blocks: &[Range<usize>],
    ncols: usize,
) -> Vec<Vec<Rational>> {
    let mut product = Vec::new();
    for b in blocks {
        let proj: Vec<Vec<Rational>> = e.iter().map(|r| r[b.clone()].to_vec()).collect();
        for v in crate::rational::nullspace(&proj, b.len()) {
            let mut full = vec![Rational::zero(); ncols];
            full[b.clone()].clone_from_slice(&v);
            product.push(full);
        }
    }
    intersect_spans(target, &product, ncols)
}

fn outcome(verdict: RankVerdict, primes_used: Vec<u64>, notes: Vec<String>) -> RankCheckOutcome {
    RankCheckOutcome {
        verdict,
        primes_used,
        notes,
    }
}

/// Hermite basis of `span_Q(rows) ∩ Z^n`.
pub fn saturate(rows: &[Vec<Int>], ncols: usize) -> Vec<Vec<Int>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let ortho = integer_kernel(&IntMatrix::from_rows(ncols, rows));
    let sat = integer_kernel(&ortho.transpose());
    hermite_rows(&sat.columns_vec(), ncols)
}

fn divides_elementary_divisor(basis: &[Vec<Int>], ncols: usize, p: u64) -> bool {
    let sm = smith(&IntMatrix::from_rows(ncols, basis));
    let pp = Int::from(p);
    sm.elementary_divisors()
        .iter()
        .any(|d| !d.is_zero() && d.is_multiple_of(&pp))
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn reduce_row(row: &[Int], p: u64) -> Vec<u64> {
    let pp = Int::from(p);
    row.iter()
        .map(|x| x.mod_floor(&pp).to_u64().expect("residue fits"))
        .collect()
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// Reduced echelon form over `F_p`; returns nonzero rows and pivots.
fn rref_mod(mut m: Vec<Vec<u64>>, p: u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        let inv = inv_mod(m[r][c], p);
        for x in m[r].iter_mut() {
            *x = *x * inv % p;
        }
        let top = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (y, x) in row.iter_mut().zip(&top) {
                    *y = (*y + p * p - f * x % p) % p;
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

fn rank_mod(m: Vec<Vec<u64>>, p: u64) -> usize {
    rref_mod(m, p).1.len()
}

fn nullspace_mod(rows: Vec<Vec<u64>>, ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let (m, pivots) = rref_mod(rows, p);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u64; ncols];
        v[free] = 1;
        for (row, &pc) in m.iter().zip(&pivots) {
            v[pc] = (p - row[free]) % p;
        }
        out.push(v);
    }
    out
}

fn mat_mul_mod(a: &[Vec<u64>], b: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let ncols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..ncols)
                .map(|c| row.iter().zip(b).map(|(x, brow)| x * brow[c] % p).sum::<u64>() % p)
                .collect()
        })
        .collect()
}

/// Number of subspaces of `F_p^n`, saturating.
pub fn subspace_count(n: usize, p: u64) -> u128 {
    (0..=n).fold(0u128, |acc, k| acc.saturating_add(gaussian_binomial(n, k, p)))
}

fn gaussian_binomial(n: usize, k: usize, p: u64) -> u128 {
    let mut num = 1u128;
    let mut den = 1u128;
    let p = p as u128;
    for i in 0..k {
        let a = p.saturating_pow((n - i) as u32).saturating_sub(1);
        let b = p.saturating_pow((i + 1) as u32).saturating_sub(1);
        num = num.saturating_mul(a);
        den = den.saturating_mul(b);
        if num == u128::MAX {
            return u128::MAX;
        }
    }
    num / den
}

/// Calls `f` on a row basis (reduced echelon form) of every subspace of
/// `F_p^n`, including the zero and full subspaces. Stops when `f` returns
/// false.
pub fn for_each_subspace(n: usize, p: u64, mut f: impl FnMut(&[Vec<u64>]) -> bool) {
    for d in 0..=n {
        let mut pivots: Vec<usize> = (0..d).collect();
        loop {
            // Free positions: right of the row's pivot and not a pivot column.
            let slots: Vec<(usize, usize)> = (0..d)
                .flat_map(|i| {
                    let pv = &pivots;
                    ((pv[i] + 1)..n).filter(move |c| !pv.contains(c)).map(move |c| (i, c))
                })
                .collect();
            let mut vals = vec![0u64; slots.len()];
            loop {
                let mut rows = vec![vec![0u64; n]; d];
                for (i, &pc) in pivots.iter().enumerate() {
                    rows[i][pc] = 1;
                }
                for (&(i, c), &v) in slots.iter().zip(&vals) {
                    rows[i][c] = v;
                }
                if !f(&rows) {
                    return;
                }
                // Odometer over the free entries.
                let mut k = 0;
                while k < vals.len() {
                    vals[k] += 1;
                    if vals[k] < p {
                        break;
                    }
                    vals[k] = 0;
                    k += 1;
                }
                if k == vals.len() {
                    break;
                }
            }
            // Next pivot combination.
            let mut i = d;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if pivots[i] < n - d + i {
                    pivots[i] += 1;
                    for t in i + 1..d {
                        pivots[t] = pivots[t - 1] + 1;
                    }
                    i = usize::MAX;
                    break;
                }
            }
            if i != usize::MAX {
                break;
            }
        }
    }
}

struct Scan<'a> {
    problem: &'a RankProblem,
    bp: &'a [Vec<u64>],
    p: u64,
    weights: &'a (Vec<i64>, i64, i64),
}

const MAX_RECORDED: usize = 1024;

impl Scan<'_> {
    /// Scaled functional of the subspace with coefficient rows `coeffs`.
    fn value(&self, coeffs: &[Vec<u64>]) -> i64 {
        let amb = mat_mul_mod(coeffs, self.bp, self.p);
        let dim = rank_mod(amb.clone(), self.p) as i64;
        let (w, _, den) = self.weights;
        let mut v = -dim * den;
        for (b, wj) in self.problem.blocks.iter().zip(w) {
            if *wj == 0 {
                continue;
            }
            let proj: Vec<Vec<u64>> = amb.iter().map(|r| r[b.clone()].to_vec()).collect();
            v += wj * rank_mod(proj, self.p) as i64;
        }
        v
    }

    fn direct(&self) -> Vec<Vec<Vec<u64>>> {
        let mut found = Vec::new();
        let c = self.weights.1;
        let r = self.bp.len();
        for_each_subspace(r, self.p, |e| {
            let trivial = e.is_empty() || e.len() == r;
            if !(self.problem.proper && trivial) && self.value(e) < c {
                found.push(e.to_vec());
            }
            found.len() < MAX_RECORDED
        });
        found
    }

    fn by_tuples(&self) -> Vec<Vec<Vec<u64>>> {
        let p = self.p;
        let r = self.bp.len();
        // Per block: constraint matrices `B_j · Ann(U_j)^T` for every
        // subspace `U_j` of the projected span.
        let mut options: Vec<Vec<Vec<Vec<u64>>>> = Vec::new();
        for b in &self.problem.blocks {
            let bj: Vec<Vec<u64>> = self.bp.iter().map(|row| row[b.clone()].to_vec()).collect();
            let (proj_basis, _) = rref_mod(bj.clone(), p);
            let mut opts = Vec::new();
            for_each_subspace(proj_basis.len(), p, |coef| {
                let u = mat_mul_mod(coef, &proj_basis, p);
                let ann = if u.is_empty() {
                    identity_mod(b.len())
                } else {
                    nullspace_mod(u, b.len(), p)
                };
                // Columns of bj · ann^T, stored as constraint rows on coefficients.
                let cons: Vec<Vec<u64>> = ann
                    .iter()
                    .map(|a| {
                        (0..r)
                            .map(|i| bj[i].iter().zip(a).map(|(x, y)| x * y % p).sum::<u64>() % p)
                            .collect()
                    })
                    .collect();
                opts.push(cons);
                true
            });
            options.push(opts);
        }
        let mut found = Vec::new();
        let c = self.weights.1;
        let mut idx = vec![0usize; options.len()];
        loop {
            let mut cons: Vec<Vec<u64>> = Vec::new();
            for (j, &k) in idx.iter().enumerate() {
                cons.extend(options[j][k].iter().cloned());
            }
            let e = if cons.is_empty() {
                identity_mod(r)
            } else {
                nullspace_mod(cons, r, p)
            };
            if self.value(&e) < c {
                found.push(e);
                if found.len() >= MAX_RECORDED {
                    break;
                }
            }
            let mut j = 0;
            while j < idx.len() {
                idx[j] += 1;
                if idx[j] < options[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == idx.len() {
                break;
            }
        }
        found
    }
}

fn identity_mod(n: usize) -> Vec<Vec<u64>> {
    (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::intmat::int_vec;

    #[test]
    fn subspace_counts_match_enumeration() {
        for (n, p) in [(0usize, 2u64), (1, 3), (2, 2), (3, 2), (3, 3), (4, 2)] {
            let mut count = 0u128;
            for_each_subspace(n, p, |_| {
                count += 1;
                true
            });
            assert_eq!(count, subspace_count(n, p), "n={n} p={p}");
        }
        assert_eq!(subspace_count(2, 2), 5);
        assert_eq!(subspace_count(3, 2), 16);
    }

    fn young_problem(w: Rational) -> RankProblem {
        // {x + y + z = 0} inside Z^3 with one coordinate per factor.
        RankProblem {
            span: vec![int_vec(&[1, -1, 0]), int_vec(&[0, 1, -1])],
            ncols: 3,
            blocks: vec![0..1, 1..2, 2..3],
            weights: vec![w.clone(), w.clone(), w],
            threshold: Rational::zero(),
            proper: false,
        }
    }

    #[test]
    fn young_exponents_hold() {
        let out = young_problem(rat(2, 3)).check(&RankCheckConfig::default()).unwrap();
        assert_eq!(out.verdict, RankVerdict::Holds { prime: Some(2) });
    }

    #[test]
    fn young_with_large_exponents_fails() {
        let out = young_problem(rat(1, 3)).check(&RankCheckConfig::default()).unwrap();
        match out.verdict {
            RankVerdict::Violated { subspace, value } => {
                assert_eq!(subspace.len(), 2);
                assert_eq!(value, rat(-1, 1));
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn both_routes_agree() {
        let prob = RankProblem {
            span: vec![int_vec(&[1, 0, 1, 1]), int_vec(&[0, 1, 1, -1]), int_vec(&[1, 1, 0, 2])],
            ncols: 4,
            blocks: vec![0..2, 2..4],
            weights: vec![rat(1, 2), rat(3, 4)],
            threshold: Rational::zero(),
            proper: false,
        };
        let basis = saturate(&prob.span, 4);
        let weights = prob.scaled_weights();
        for p in [2u64, 3] {
            let bp: Vec<Vec<u64>> = basis.iter().map(|r| reduce_row(r, p)).collect();
            let scan = Scan {
                problem: &prob,
                bp: &bp,
                p,
                weights: &weights,
            };
            assert_eq!(scan.direct().is_empty(), scan.by_tuples().is_empty());
        }
    }

    #[test]
    fn proper_mode_skips_trivial_subspaces() {
        let mut prob = young_problem(rat(2, 3));
        prob.proper = true;
        prob.threshold = rat(1, 3);
        let out = prob.check(&RankCheckConfig::default()).unwrap();
        assert!(matches!(out.verdict, RankVerdict::Holds { .. }));
        let full = RankProblem {
            span: vec![int_vec(&[1, 0]), int_vec(&[0, 1])],
            ncols: 2,
            blocks: vec![0..1, 1..2],
            weights: vec![rat(1, 1), rat(1, 1)],
            threshold: rat(1, 1),
            proper: true,
        };
        match full.check(&RankCheckConfig::default()).unwrap().verdict {
            RankVerdict::Violated { subspace, value } => {
                assert_eq!(subspace.len(), 1);
                assert_eq!(value, Rational::zero());
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn saturation_removes_index() {
        let s = saturate(&[int_vec(&[2, 4])], 2);
        assert_eq!(s, vec![int_vec(&[1, 2])]);
    }

    #[test]
    fn capacity_when_rank_too_large() {
        let span: Vec<Vec<Int>> = (0..8)
            .map(|i| (0..8).map(|j| Int::from(i32::from(i == j))).collect())
            .collect();
        let prob = RankProblem {
            span,
            ncols: 8,
            blocks: vec![0..8],
            weights: vec![rat(1, 1)],
            threshold: Rational::zero(),
            proper: false,
        };
        let cfg = RankCheckConfig {
            max_subspaces: 10,
            ..RankCheckConfig::default()
        };
        assert!(matches!(prob.check(&cfg), Err(BlError::Capacity { .. })));
    }
}
