//! Brascamp–Lieb data on euclidean spaces: exact structural checks on
//! rational subspaces and numerical gaussian optimization.

mod bfgs;
mod gaussian;
mod witness;

pub use bfgs::{minimize, BfgsConfig, BfgsOutcome};
pub use gaussian::{
    extremiser_pushforward_check, gaussian_bl_value, optimize_gaussian, verify_euclidean_duality,
    EuclideanDualityReport, GaussianInput, GaussianOptimum, OptimizeConfig, PushforwardReport,
};
pub use witness::{dual_witness_subspace, WitnessReport};

use std::ops::Range;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{BlError, Result};
use crate::exact::{conjugate_all, ExtRational, Rational};
use crate::intmat::{lcm_all, Int};
use crate::rankcheck::{RankCheckConfig, RankProblem, RankVerdict};
use crate::rational::{nullspace, primitive_integer, rank, rref, span_contains};

/// How Lebesgue measure on `H` is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MeasureConvention {
    /// Lebesgue measure induced by the inner product of the ambient space.
    #[default]
    Induced,
    /// Pushforward of Lebesgue measure on `R^d` through the stored basis.
    Parametrized,
}

/// A subspace `H ⊆ R^{n₁} × … × R^{n_m}` with exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EuclideanDatum {
    factor_dims: Vec<usize>,
    /// Basis vectors of `H`, each of length `Σ n_j`.
    basis: Vec<Vec<Rational>>,
    exponents: Vec<ExtRational>,
    measure: MeasureConvention,
}

impl EuclideanDatum {
    pub fn new(factor_dims: Vec<usize>, basis: Vec<Vec<Rational>>, exponents: Vec<ExtRational>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(BlError::InvalidDatum("at least one factor is required".into()));
        }
        if exponents.len() != factor_dims.len() {
            return Err(BlError::DimensionMismatch(format!(
                "{} exponents for {} factors",
                exponents.len(),
                factor_dims.len()
            )));
        }
        let n: usize = factor_dims.iter().sum();
        if let Some(v) = basis.iter().find(|v| v.len() != n) {
            return Err(BlError::DimensionMismatch(format!(
                "basis vector of length {} in an ambient space of dimension {n}",
                v.len()
            )));
        }
        if rank(&basis, n) != basis.len() {
            return Err(BlError::InvalidDatum("basis vectors are linearly dependent".into()));
        }
        Ok(EuclideanDatum {
            factor_dims,
            basis,
            exponents,
            measure: MeasureConvention::Induced,
        })
    }

    pub fn from_i64_basis(factor_dims: Vec<usize>, basis: &[&[i64]], exponents: Vec<ExtRational>) -> Result<Self> {
        let basis = basis
            .iter()
            .map(|v| v.iter().map(|&x| Rational::from_integer(x.into())).collect())
            .collect();
        Self::new(factor_dims, basis, exponents)
    }

    pub fn with_measure(mut self, measure: MeasureConvention) -> Self {
        self.measure = measure;
        self
    }

    pub fn with_exponents(&self, exponents: Vec<ExtRational>) -> Result<Self> {
        Ok(Self::new(self.factor_dims.clone(), self.basis.clone(), exponents)?.with_measure(self.measure))
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn exponents(&self) -> &[ExtRational] {
        &self.exponents
    }

    pub fn measure(&self) -> MeasureConvention {
        self.measure
    }

    pub fn nfactors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.factor_dims.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn blocks(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.factor_dims
            .iter()
            .map(|&n| {
                start += n;
                start - n..start
            })
            .collect()
    }

    /// Dimension of `π_j(V)` for `V` spanned by `rows`.
    pub fn projected_dim(&self, rows: &[Vec<Rational>], j: usize) -> usize {
        let b = &self.blocks()[j];
        let proj: Vec<Vec<Rational>> = rows.iter().map(|r| r[b.clone()].to_vec()).collect();
        rank(&proj, b.len())
    }

    pub fn contains_subspace(&self, rows: &[Vec<Rational>]) -> bool {
        rows.iter().all(|r| r.len() == self.ambient_dim()) && span_contains(&self.basis, rows, self.ambient_dim())
    }

    /// The basis as an `N × d` floating point matrix.
    pub(crate) fn basis_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.ambient_dim();
        nalgebra::DMatrix::from_fn(n, self.dim(), |i, k| self.basis[k][i].to_f64().unwrap_or(f64::NAN))
    }

    fn rank_problem(&self, weights: Vec<Rational>, threshold: Rational, proper: bool) -> RankProblem {
        RankProblem {
            span: self.basis.iter().map(|v| primitive_integer(v)).collect(),
            ncols: self.ambient_dim(),
            blocks: self.blocks(),
            weights,
            threshold,
            proper,
        }
    }

    fn weights(&self) -> Vec<Rational> {
        self.exponents.iter().map(ExtRational::reciprocal).collect()
    }
}

/// `Σ n_j / p_j − dim H`; zero exactly when the scaling condition holds.
pub fn scaling_defect(datum: &EuclideanDatum) -> Rational {
    let mut s = -Rational::from_integer(datum.dim().into());
    for (n, p) in datum.factor_dims.iter().zip(&datum.exponents) {
        s += p.reciprocal() * Rational::from_integer((*n).into());
    }
    s
}

/// `(scaling_ok, dim_ok)`: the global scaling identity and the dimension
/// inequality `dim V ≤ Σ p_j⁻¹ dim π_j(V)` for the given `V ⊆ H`.
pub fn scaling_dimension_check(datum: &EuclideanDatum, v: &[Vec<Rational>]) -> Result<(bool, bool)> {
    if !datum.contains_subspace(v) {
        return Err(BlError::NotSubgroup("V is not contained in H".into()));
    }
    let scaling_ok = scaling_defect(datum).is_zero();
    let n = datum.ambient_dim();
    let mut rhs = Rational::zero();
    for (j, p) in datum.exponents.iter().enumerate() {
        rhs += p.reciprocal() * Rational::from_integer(datum.projected_dim(v, j).into());
    }
    let dim_ok = Rational::from_integer(rank(v, n).into()) <= rhs;
    Ok((scaling_ok, dim_ok))
}

/// Orthogonal complement of `H` with conjugate exponents. Basis vectors are
/// primitive integer vectors whose first nonzero entry is positive.
pub fn orthocomplement(datum: &EuclideanDatum) -> EuclideanDatum {
    let n = datum.ambient_dim();
    let basis: Vec<Vec<Rational>> = nullspace(&datum.basis, n)
        .iter()
        .map(|v| {
            let mut w = primitive_integer(v);
            if w.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
                w.iter_mut().for_each(|x| *x = -x.clone());
            }
            w.into_iter().map(Rational::from_integer).collect()
        })
        .collect();
    EuclideanDatum {
        factor_dims: datum.factor_dims.clone(),
        basis,
        exponents: conjugate_all(&datum.exponents),
        measure: MeasureConvention::Induced,
    }
}

/// `∏ (p_j^{1/p_j} / p'_j^{1/p'_j})^{n_j/2}`.
pub fn becks_constant(p: &[ExtRational], factor_dims: &[usize]) -> Result<f64> {
    if p.len() != factor_dims.len() {
        return Err(BlError::DimensionMismatch(format!(
            "{} exponents for {} factors",
            p.len(),
            factor_dims.len()
        )));
    }
    // ln(x^{1/x}) with the limits 0 at x = 1 and x = ∞.
    let self_power = |e: &ExtRational| {
        let s = e.recip_f64();
        if s == 0.0 || s == 1.0 {
            0.0
        } else {
            -s * s.ln()
        }
    };
    let ln: f64 = p
        .iter()
        .zip(factor_dims)
        .map(|(pj, &n)| 0.5 * n as f64 * (self_power(pj) - self_power(&pj.conjugate())))
        .sum();
    Ok(ln.exp())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EuclideanFiniteness {
    Finite,
    /// The scaling identity fails.
    ScalingFails,
    /// A subspace of `H` violating the dimension inequality.
    DimensionWitness(Vec<Vec<Rational>>),
    Inconclusive,
}

/// Exact check of the scaling and dimension conditions over all subspaces.
pub fn finiteness_check(datum: &EuclideanDatum, cfg: &RankCheckConfig) -> Result<EuclideanFiniteness> {
    if !scaling_defect(datum).is_zero() {
        return Ok(EuclideanFiniteness::ScalingFails);
    }
    let problem = datum.rank_problem(datum.weights(), Rational::zero(), false);
    Ok(match problem.check(cfg)?.verdict {
        RankVerdict::Holds { .. } => EuclideanFiniteness::Finite,
        RankVerdict::Violated { subspace, .. } => EuclideanFiniteness::DimensionWitness(subspace),
        RankVerdict::Inconclusive => EuclideanFiniteness::Inconclusive,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplicityVerdict {
    Simple,
    /// A nonzero proper subspace on which the dimension inequality is an
    /// equality, or fails outright.
    CriticalWitness(Vec<Vec<Rational>>),
    Inconclusive,
}

/// Searches for nonzero proper subspaces `V` with `dim V ≥ Σ p_j⁻¹ dim π_j(V)`.
pub fn simplicity_check(datum: &EuclideanDatum, cfg: &RankCheckConfig) -> Result<SimplicityVerdict> {
    let weights = datum.weights();
    let den = lcm_all(weights.iter().map(|w| w.denom()));
    let threshold = Rational::new(Int::one(), den);
    let problem = datum.rank_problem(weights, threshold, true);
    Ok(match problem.check(cfg)?.verdict {
        RankVerdict::Holds { .. } => SimplicityVerdict::Simple,
        RankVerdict::Violated { subspace, .. } => SimplicityVerdict::CriticalWitness(subspace),
        RankVerdict::Inconclusive => SimplicityVerdict::Inconclusive,
    })
}

/// The diagonal `{(x, …, x)} ⊆ (R^n)^m`.
pub fn build_diagonal(n: usize, p: &[ExtRational]) -> Result<EuclideanDatum> {
    let m = p.len();
    let basis = (0..n)
        .map(|c| {
            let mut v = vec![Rational::zero(); n * m];
            for j in 0..m {
                v[j * n + c] = Rational::one();
            }
            v
        })
        .collect();
    EuclideanDatum::new(vec![n; m], basis, p.to_vec())
}

/// `{(x₁, …, x_m) : Σ x_j = 0} ⊆ (R^n)^m`.
pub fn build_young(n: usize, p: &[ExtRational]) -> Result<EuclideanDatum> {
    let m = p.len();
    let mut basis = Vec::new();
    for i in 0..m.saturating_sub(1) {
        for c in 0..n {
            let mut v = vec![Rational::zero(); n * m];
            v[i * n + c] = Rational::one();
            v[(m - 1) * n + c] = -Rational::one();
            basis.push(v);
        }
    }
    EuclideanDatum::new(vec![n; m], basis, p.to_vec())
}

/// The cube configuration space `{(x + ω·h)_ω}` in `R^{2^k}`, with the basis
/// `x, h₁, …, h_k` and the measure `dx dh₁ ⋯ dh_k`.
pub fn build_gowers(k: usize, p: &[ExtRational]) -> Result<EuclideanDatum> {
    let nv = 1usize << k;
    if p.len() != nv {
        return Err(BlError::DimensionMismatch(format!("{} exponents for {nv} vertices", p.len())));
    }
    let mut basis = vec![vec![Rational::one(); nv]];
    for i in 0..k {
        basis.push(
            (0..nv)
                .map(|w| Rational::from_integer(Int::from((w >> i) & 1)))
                .collect(),
        );
    }
    Ok(EuclideanDatum::new(vec![1; nv], basis, p.to_vec())?.with_measure(MeasureConvention::Parametrized))
}

/// Reduced echelon basis of a rational span, for comparisons.
pub fn canonical_span(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    rref(rows, ncols).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat_int;

    fn p(s: &str) -> ExtRational {
        s.parse().unwrap()
    }

    fn q(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| rat_int(x)).collect()).collect()
    }

    #[test]
    fn scaling_and_dimension() {
        let d = build_diagonal(1, &[p("2"), p("2")]).unwrap();
        assert_eq!(scaling_dimension_check(&d, &[]).unwrap(), (true, true));
        assert_eq!(scaling_dimension_check(&d, d.basis()).unwrap(), (true, true));
        let d1 = d.with_exponents(vec![p("1"), p("1")]).unwrap();
        assert!(!scaling_dimension_check(&d1, d1.basis()).unwrap().0);
        assert!(scaling_dimension_check(&d, &q(&[&[1, 0]])).is_err());
    }

    #[test]
    fn complements() {
        let d = build_diagonal(1, &[p("2"), p("2")]).unwrap();
        assert_eq!(orthocomplement(&d).basis(), q(&[&[1, -1]]).as_slice());
        let h = EuclideanDatum::from_i64_basis(vec![2, 1], &[&[1, 0, -1]], vec![p("inf"), p("1")]).unwrap();
        let hp = orthocomplement(&h);
        assert_eq!(
            canonical_span(hp.basis(), 3),
            canonical_span(&q(&[&[1, 0, 1], &[0, 1, 0]]), 3)
        );
        assert_eq!(hp.exponents(), &[p("1"), p("inf")]);
        let back = orthocomplement(&hp);
        assert_eq!(canonical_span(back.basis(), 3), canonical_span(h.basis(), 3));
        let full = EuclideanDatum::from_i64_basis(vec![1, 1], &[&[1, 0], &[0, 1]], vec![p("1"), p("1")]).unwrap();
        assert_eq!(orthocomplement(&full).dim(), 0);
    }

    #[test]
    fn becks_values() {
        assert!((becks_constant(&[p("2"), p("2")], &[1, 3]).unwrap() - 1.0).abs() < 1e-15);
        assert!((becks_constant(&[p("1"), p("inf")], &[2, 2]).unwrap() - 1.0).abs() < 1e-15);
        let direct = ((4.0f64 / 3.0).powf(0.75) / 4f64.powf(0.25)).sqrt();
        assert!((becks_constant(&[p("4/3")], &[1]).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.936_687).abs() < 1e-6);
    }

    #[test]
    fn simplicity_examples() {
        let cfg = RankCheckConfig::default();
        let d = build_diagonal(1, &[p("2"), p("2")]).unwrap();
        assert_eq!(simplicity_check(&d, &cfg).unwrap(), SimplicityVerdict::Simple);
        let h = EuclideanDatum::from_i64_basis(vec![2, 1], &[&[1, 0, -1]], vec![p("inf"), p("1")]).unwrap();
        assert_eq!(simplicity_check(&h, &cfg).unwrap(), SimplicityVerdict::Simple);
        match simplicity_check(&orthocomplement(&h), &cfg).unwrap() {
            SimplicityVerdict::CriticalWitness(w) => {
                // Every line in the complement is critical, including ⟨(1,0,1)⟩.
                assert_eq!(w.len(), 1);
                assert!(orthocomplement(&h).contains_subspace(&w));
                let dual = orthocomplement(&h);
                assert_eq!(dual.projected_dim(&w, 0), 1);
                let line = q(&[&[1, 0, 1]]);
                assert_eq!(dual.projected_dim(&line, 0), 1);
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn finiteness_of_builders() {
        let cfg = RankCheckConfig::default();
        let g = build_gowers(2, &vec![p("4/3"); 4]).unwrap();
        assert_eq!(finiteness_check(&g, &cfg).unwrap(), EuclideanFiniteness::Finite);
        let y = build_young(1, &[p("3/2"), p("3/2"), p("3/2")]).unwrap();
        assert_eq!(finiteness_check(&y, &cfg).unwrap(), EuclideanFiniteness::Finite);
        let d = build_diagonal(1, &[p("1"), p("1")]).unwrap();
        assert_eq!(finiteness_check(&d, &cfg).unwrap(), EuclideanFiniteness::ScalingFails);
        let bad = EuclideanDatum::from_i64_basis(vec![1, 1], &[&[1, 0], &[0, 1]], vec![p("2"), p("1")]).unwrap();
        assert!(matches!(finiteness_check(&bad, &cfg).unwrap(), EuclideanFiniteness::ScalingFails));
        let h = EuclideanDatum::from_i64_basis(vec![1, 1, 1], &[&[1, 1, 0], &[0, 0, 1]], vec![p("2"), p("2"), p("1")])
            .unwrap();
        assert_eq!(finiteness_check(&h, &cfg).unwrap(), EuclideanFiniteness::Finite);
        let h = h.with_exponents(vec![p("1"), p("2"), p("2")]).unwrap();
        match finiteness_check(&h, &cfg).unwrap() {
            EuclideanFiniteness::DimensionWitness(v) => assert_eq!(v, q(&[&[0, 0, 1]])),
            v => panic!("unexpected {v:?}"),
        }
    }
}
