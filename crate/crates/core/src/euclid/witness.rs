use num_traits::Zero;

use super::{orthocomplement, EuclideanDatum};
use crate::error::{BlError, Result};
use crate::rankcheck::transverse_subspace;
use crate::rational::{rank, span_contains};

#[derive(Clone, Debug)]
pub struct WitnessReport {
    /// `V = H ∩ ∏_j (π_j W)^⊥`.
    pub subspace: Vec<Vec<crate::exact::Rational>>,
    pub dim: usize,
    /// `Σ_j dim (π_j W)^⊥ − dim W^⊥`, with `W^⊥` taken inside `H^⊥`.
    pub global_bound: i64,
    /// `(dim π_j V, dim (π_j W)^⊥)` per factor.
    pub local: Vec<(usize, usize)>,
    pub global_ok: bool,
    pub local_ok: bool,
}

/// Builds the subspace of `H` attached to a subspace `W ⊆ H^⊥` and re-checks
/// both dimension bounds exactly.
pub fn dual_witness_subspace(
    datum: &EuclideanDatum,
    w: &[Vec<crate::exact::Rational>],
) -> Result<WitnessReport> {
    let n = datum.ambient_dim();
    let perp = orthocomplement(datum);
    if w.iter().any(|r| r.len() != n) || !span_contains(perp.basis(), w, n) {
        return Err(BlError::NotSubgroup("W is not contained in the orthogonal complement".into()));
    }
    let blocks = datum.blocks();
    let subspace = transverse_subspace(datum.basis(), w, &blocks, n);
    let dim = rank(&subspace, n);
    let dim_w = rank(w, n);
    let w_complement = perp.dim() - dim_w;
    let mut sum = 0i64;
    let mut local = Vec::new();
    for (j, &nj) in datum.factor_dims().iter().enumerate() {
        let complement = nj - datum.projected_dim(w, j);
        sum += complement as i64;
        let pv = if subspace.iter().all(|r| r.iter().all(Zero::is_zero)) {
            0
        } else {
            datum.projected_dim(&subspace, j)
        };
        local.push((pv, complement));
    }
    let global_bound = sum - w_complement as i64;
    Ok(WitnessReport {
        global_ok: dim as i64 >= global_bound,
        local_ok: local.iter().all(|(a, b)| a <= b),
        subspace,
        dim,
        global_bound,
        local,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclid::build_diagonal;

    #[test]
    fn diagonal_examples() {
        let p: crate::exact::ExtRational = "2".parse().unwrap();
        let d = build_diagonal(1, &[p.clone(), p]).unwrap();
        let r = dual_witness_subspace(&d, &[]).unwrap();
        assert_eq!(r.dim, 1);
        assert!(r.global_ok && r.local_ok);
        let perp = orthocomplement(&d);
        let r = dual_witness_subspace(&d, perp.basis()).unwrap();
        assert_eq!(r.dim, 0);
        assert_eq!(r.global_bound, 0);
        assert_eq!(r.local, vec![(0, 0), (0, 0)]);
        assert!(dual_witness_subspace(&d, d.basis()).is_err());
    }
}
