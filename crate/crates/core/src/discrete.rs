use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::abelian::{
    enumerate_index_subgroups, CompactSubgroup, FgAbGroup, IndexSubgroup, IndexedGroup, ProductGroup, SubgroupPres,
    DEFAULT_ENUMERATION_CAP,
};
use crate::error::{BlError, Result};
use crate::exact::{conjugate_all, ExactPosValue, ExtRational, Rational};
use crate::intmat::{integer_kernel, Int, IntMatrix};
use crate::rankcheck::{transverse_subspace, RankCheckConfig, RankProblem, RankVerdict};
use crate::rational::{nullspace, primitive_integer, to_rational_rows};

/// A subgroup `H` of `G₁ × … × G_m` together with exponents `p_j ∈ [1, ∞]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BLDatum {
    groups: Vec<FgAbGroup>,
    product: ProductGroup,
    subgroup: SubgroupPres,
    exponents: Vec<ExtRational>,
}

impl BLDatum {
    pub fn new(groups: Vec<FgAbGroup>, subgroup: SubgroupPres, exponents: Vec<ExtRational>) -> Result<Self> {
        if groups.is_empty() {
            return Err(BlError::InvalidDatum("at least one factor group is required".into()));
        }
        if exponents.len() != groups.len() {
            return Err(BlError::DimensionMismatch(format!(
                "{} exponents for {} factors",
                exponents.len(),
                groups.len()
            )));
        }
        let product = ProductGroup::new(groups.clone());
        if subgroup.parent() != &product {
            return Err(BlError::NotSubgroup("subgroup lives in a different product".into()));
        }
        Ok(BLDatum {
            groups,
            product,
            subgroup,
            exponents,
        })
    }

    pub fn from_generators(groups: Vec<FgAbGroup>, gens: &[Vec<Int>], exponents: Vec<ExtRational>) -> Result<Self> {
        let product = ProductGroup::new(groups.clone());
        let h = SubgroupPres::from_rows(&product, gens)?;
        Self::new(groups, h, exponents)
    }

    pub fn groups(&self) -> &[FgAbGroup] {
        &self.groups
    }

    pub fn product(&self) -> &ProductGroup {
        &self.product
    }

    pub fn subgroup(&self) -> &SubgroupPres {
        &self.subgroup
    }

    pub fn exponents(&self) -> &[ExtRational] {
        &self.exponents
    }

    pub fn nfactors(&self) -> usize {
        self.groups.len()
    }

    pub fn with_exponents(&self, exponents: Vec<ExtRational>) -> Result<Self> {
        Self::new(self.groups.clone(), self.subgroup.clone(), exponents)
    }

    /// Rank of the projection of `v` to factor `j`.
    pub fn projected_rank(&self, v: &SubgroupPres, j: usize) -> usize {
        let cols: Vec<usize> = self
            .product
            .block(j)
            .filter(|&i| self.product.moduli()[i].is_zero())
            .collect();
        IntMatrix::from_rows(self.product.dim(), v.basis())
            .select_columns(&cols)
            .rank()
    }

    /// `Σ p_j⁻¹ rank π_j(V) − rank V`.
    pub fn rank_slack(&self, v: &SubgroupPres) -> Rational {
        let mut s = -Rational::from_integer(v.rank().into());
        for (j, p) in self.exponents.iter().enumerate() {
            s += p.reciprocal() * Rational::from_integer(self.projected_rank(v, j).into());
        }
        s
    }
}

/// Whether `rank V ≤ Σ p_j⁻¹ rank π_j(V)` holds.
pub fn rank_condition_check(datum: &BLDatum, v: &SubgroupPres) -> Result<bool> {
    if !v.is_subgroup_of(datum.subgroup()) {
        return Err(BlError::NotSubgroup("V is not contained in H".into()));
    }
    Ok(datum.rank_slack(v) >= Rational::zero())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FinitenessVerdict {
    Finite,
    InfiniteWitness(SubgroupPres),
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct FinitenessCertificate {
    pub verdict: FinitenessVerdict,
    pub primes_used: Vec<u64>,
    pub notes: Vec<String>,
}

impl FinitenessCertificate {
    pub fn is_finite(&self) -> bool {
        self.verdict == FinitenessVerdict::Finite
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.verdict, FinitenessVerdict::InfiniteWitness(_))
    }
}

/// Coordinate ranges of each factor's free part inside the concatenated free
/// coordinates.
pub(crate) fn free_blocks(groups: &[FgAbGroup]) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    groups
        .iter()
        .map(|g| {
            let r = start..start + g.free_rank();
            start += g.free_rank();
            r
        })
        .collect()
}

pub(crate) fn discrete_rank_problem(groups: &[FgAbGroup], h: &SubgroupPres, p: &[ExtRational]) -> RankProblem {
    RankProblem {
        span: h.free_projection_rows(),
        ncols: h.parent().free_positions().len(),
        blocks: free_blocks(groups),
        weights: p.iter().map(ExtRational::reciprocal).collect(),
        threshold: Rational::zero(),
        proper: false,
    }
}

/// The codimension inequality on the subtori of `m(S)`, in free coordinates.
pub(crate) fn torus_rank_problem(s: &CompactSubgroup, q: &[ExtRational]) -> RankProblem {
    let amb = s.ambient();
    let free = amb.free_positions();
    let weights: Vec<Rational> = q.iter().map(ExtRational::reciprocal).collect();
    let mut threshold = -Rational::from_integer(s.dim().into());
    for (j, w) in weights.iter().enumerate() {
        threshold += w * Rational::from_integer(amb.factor(j).free_rank().into());
    }
    RankProblem {
        span: s
            .torus_lattice()
            .iter()
            .map(|t| free.iter().map(|&i| t[i].clone()).collect())
            .collect(),
        ncols: free.len(),
        blocks: free_blocks(amb.factors()),
        weights,
        threshold,
        proper: false,
    }
}

pub fn certify_finiteness(datum: &BLDatum, cfg: &RankCheckConfig) -> Result<FinitenessCertificate> {
    let h = datum.subgroup();
    let nfree = datum.product().free_positions().len();
    let problem = discrete_rank_problem(datum.groups(), h, datum.exponents());
    let out = problem.check(cfg)?;
    let mut notes = out.notes;
    let mut violation = match out.verdict {
        RankVerdict::Holds { .. } => {
            return Ok(FinitenessCertificate {
                verdict: FinitenessVerdict::Finite,
                primes_used: out.primes_used,
                notes,
            })
        }
        RankVerdict::Violated { subspace, .. } => Some(subspace),
        RankVerdict::Inconclusive => None,
    };
    if violation.is_none() {
        // Transfer a violating subtorus of the annihilator back to H.
        let s = CompactSubgroup::annihilator_of(h);
        let tp = torus_rank_problem(&s, &conjugate_all(datum.exponents()));
        if let RankVerdict::Violated { subspace: w, .. } = tp.check(cfg)?.verdict {
            let span = to_rational_rows(&problem.span);
            let v = transverse_subspace(&span, &w, &problem.blocks, nfree);
            if problem.is_violation(&v).is_some() {
                notes.push("violation transferred from the annihilator".into());
                violation = Some(v);
            }
        }
    }
    let verdict = match violation {
        None => FinitenessVerdict::Inconclusive,
        Some(subspace) => {
            let w = subgroup_over_free_subspace(h, &subspace, nfree);
            if rank_condition_check(datum, &w)? {
                notes.push("lifted witness failed exact re-verification".into());
                FinitenessVerdict::Inconclusive
            } else {
                FinitenessVerdict::InfiniteWitness(w)
            }
        }
    };
    Ok(FinitenessCertificate {
        verdict,
        primes_used: out.primes_used,
        notes,
    })
}

/// `{x ∈ H : free(x) ∈ E}` for a rational subspace `E` of the free coordinates.
fn subgroup_over_free_subspace(h: &SubgroupPres, e_rows: &[Vec<Rational>], nfree: usize) -> SubgroupPres {
    let free = h.parent().free_positions();
    let ortho: Vec<Vec<Int>> = nullspace(e_rows, nfree)
        .iter()
        .map(|v| primitive_integer(v))
        .collect();
    let b = h.basis_matrix();
    let bf = b.select_columns(&free);
    if ortho.is_empty() {
        return h.clone();
    }
    let a = IntMatrix::from_rows(nfree, &ortho).transpose();
    let m = bf.mul(&a);
    let ker = integer_kernel(&m.transpose());
    let rows: Vec<Vec<Int>> = (0..ker.ncols())
        .map(|k| IntMatrix::from_rows(b.nrows(), &[ker.column(k)]).mul(&b).row_vec(0))
        .collect();
    SubgroupPres::from_rows(h.parent(), &rows).expect("rows live in the parent")
}

#[derive(Clone, Debug)]
pub struct DiscreteConstant {
    pub value: ExactPosValue,
    pub maximizers: Vec<SubgroupPres>,
}

pub fn bl_constant_discrete(datum: &BLDatum, cert: &FinitenessCertificate) -> Result<DiscreteConstant> {
    bl_constant_discrete_capped(datum, cert, DEFAULT_ENUMERATION_CAP)
}

pub fn bl_constant_discrete_capped(
    datum: &BLDatum,
    cert: &FinitenessCertificate,
    cap: u64,
) -> Result<DiscreteConstant> {
    match &cert.verdict {
        FinitenessVerdict::Finite => {}
        FinitenessVerdict::InfiniteWitness(_) => {
            return Ok(DiscreteConstant {
                value: ExactPosValue::Infinite,
                maximizers: Vec::new(),
            })
        }
        FinitenessVerdict::Inconclusive => {
            return Err(BlError::MissingCertificate(
                "finiteness was not certified for this datum".into(),
            ))
        }
    }
    let tors = datum.subgroup().torsion();
    let (abs, emb) = tors.structure();
    let ig = IndexedGroup::new(&ProductGroup::single(abs))?;
    let subs = enumerate_index_subgroups(&ig, cap)?;
    let prod = datum.product();
    let maps: Vec<Vec<u64>> = (0..datum.nfactors())
        .map(|j| {
            let tpos: Vec<usize> = prod.block(j).filter(|&i| !prod.moduli()[i].is_zero()).collect();
            let target = IndexedGroup::new(&ProductGroup::single(datum.groups()[j].torsion_part()))
                .expect("torsion part is finite");
            (0..ig.order())
                .map(|x| {
                    let c: Vec<Int> = ig.decode(x).into_iter().map(Int::from).collect();
                    let y = emb.matrix.mul_vec(&c);
                    let tc: Vec<Int> = tpos.iter().map(|&i| y[i].clone()).collect();
                    target.encode_int(&tc)
                })
                .collect()
        })
        .collect();
    let exps: Vec<Rational> = datum.exponents().iter().map(|p| -p.reciprocal()).collect();
    let (value, best) = maximize(&subs, |s| {
        let mut v = ExactPosValue::from_u64(s.order());
        for (map, e) in maps.iter().zip(&exps) {
            v = v.mul(&ExactPosValue::power_of(s.image_size(map), e));
        }
        v
    });
    let mut maximizers: Vec<SubgroupPres> = best
        .iter()
        .map(|s| {
            let gens: Vec<Vec<Int>> = s
                .generators()
                .iter()
                .map(|&x| {
                    let c: Vec<Int> = ig.decode(x).into_iter().map(Int::from).collect();
                    emb.matrix.mul_vec(&c)
                })
                .collect();
            SubgroupPres::from_rows(prod, &gens).expect("maximizer rows")
        })
        .collect();
    maximizers.sort();
    Ok(DiscreteConstant { value, maximizers })
}

/// Exact maximum of `score` over subgroups, with every maximizer.
pub(crate) fn maximize<'a>(
    subs: &'a [IndexSubgroup],
    score: impl Fn(&IndexSubgroup) -> ExactPosValue,
) -> (ExactPosValue, Vec<&'a IndexSubgroup>) {
    let mut best = ExactPosValue::one();
    let mut arg: Vec<&IndexSubgroup> = Vec::new();
    for s in subs {
        let v = score(s);
        match v.cmp(&best) {
            Ordering::Greater => {
                best = v;
                arg = vec![s];
            }
            Ordering::Equal => arg.push(s),
            Ordering::Less => {}
        }
    }
    (best, arg)
}

/// `H_k(G) ⊆ G^{2^k}`: vertex `ω ∈ {0,1}^k` (bit `i` of the index) carries
/// `x + Σ ω_i h_i`.
pub fn build_gowers_datum(g: &FgAbGroup, k: usize, p: &[ExtRational]) -> Result<BLDatum> {
    if k == 0 {
        return Err(BlError::InvalidDatum("Gowers datum needs k ≥ 1".into()));
    }
    let nv = 1usize << k;
    if p.len() != nv {
        return Err(BlError::DimensionMismatch(format!("{} exponents for {nv} vertices", p.len())));
    }
    let d = g.ngens();
    let groups = vec![g.clone(); nv];
    let mut gens = Vec::new();
    for c in 0..d {
        let mut diag = vec![Int::zero(); nv * d];
        for w in 0..nv {
            diag[w * d + c] = Int::one();
        }
        gens.push(diag);
        for i in 0..k {
            let mut dir = vec![Int::zero(); nv * d];
            for w in (0..nv).filter(|w| w >> i & 1 == 1) {
                dir[w * d + c] = Int::one();
            }
            gens.push(dir);
        }
    }
    BLDatum::from_generators(groups, &gens, p.to_vec())
}

/// `{x₁ + … + x_m = 0} ⊆ G^m`.
pub fn build_young_datum(g: &FgAbGroup, p: &[ExtRational]) -> Result<BLDatum> {
    let m = p.len();
    let d = g.ngens();
    let mut gens = Vec::new();
    for i in 0..m.saturating_sub(1) {
        for c in 0..d {
            let mut v = vec![Int::zero(); m * d];
            v[i * d + c] = Int::one();
            v[(m - 1) * d + c] = -Int::one();
            gens.push(v);
        }
    }
    BLDatum::from_generators(vec![g.clone(); m], &gens, p.to_vec())
}

/// The diagonal `{(x, …, x)} ⊆ G^m`.
pub fn build_diagonal_datum(g: &FgAbGroup, p: &[ExtRational]) -> Result<BLDatum> {
    let m = p.len();
    let d = g.ngens();
    let gens: Vec<Vec<Int>> = (0..d)
        .map(|c| {
            let mut v = vec![Int::zero(); m * d];
            for i in 0..m {
                v[i * d + c] = Int::one();
            }
            v
        })
        .collect();
    BLDatum::from_generators(vec![g.clone(); m], &gens, p.to_vec())
}

/// `‖f‖_p` for counting measure.
pub fn lp_norm_counting(f: &[f64], p: &ExtRational) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    }
    let pf = p.to_f64();
    f.iter().map(|x| x.abs().powf(pf)).sum::<f64>().powf(1.0 / pf)
}

/// `Σ_{h ∈ H} ∏ f_j(h_j)` for a datum whose factors are all finite; each
/// `f_j` is indexed by the element indices of `G_j`.
pub fn evaluate_form(datum: &BLDatum, fs: &[Vec<f64>]) -> Result<f64> {
    let prod = datum.product();
    if !prod.is_finite() {
        return Err(BlError::InvalidGroup("form evaluation needs finite factors".into()));
    }
    let factor_idx: Vec<IndexedGroup> = datum
        .groups()
        .iter()
        .map(|g| IndexedGroup::new(&ProductGroup::single(g.clone())))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for h in datum.subgroup().elements()? {
        let mut term = 1.0;
        for (j, ig) in factor_idx.iter().enumerate() {
            term *= fs[j][ig.encode_int(&h[prod.block(j)]) as usize];
        }
        total += term;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExtRational as P;

    fn p(s: &str) -> P {
        s.parse().unwrap()
    }

    fn certified(d: &BLDatum) -> DiscreteConstant {
        let cert = certify_finiteness(d, &RankCheckConfig::default()).unwrap();
        bl_constant_discrete(d, &cert).unwrap()
    }

    #[test]
    fn diagonal_z2_constants() {
        let d = build_diagonal_datum(&FgAbGroup::cyclic(2), &[p("inf"), p("inf")]).unwrap();
        let c = certified(&d);
        assert_eq!(c.value, ExactPosValue::from_u64(2));
        assert_eq!(c.maximizers, vec![d.subgroup().clone()]);
        let d2 = d.with_exponents(vec![p("2"), p("2")]).unwrap();
        assert!(certified(&d2).value.is_one());
    }

    #[test]
    fn cyclic_four_in_product() {
        let groups = vec![FgAbGroup::cyclic(4), FgAbGroup::cyclic(2)];
        let d = BLDatum::from_generators(groups, &[crate::intmat::int_vec(&[1, 0])], vec![p("2"), p("1")]).unwrap();
        let c = certified(&d);
        assert_eq!(c.value, ExactPosValue::from_u64(2));
    }

    #[test]
    fn rank_condition_examples() {
        let d = build_diagonal_datum(&FgAbGroup::free(1), &[p("2"), p("2")]).unwrap();
        let h = d.subgroup().clone();
        assert!(rank_condition_check(&d, &h).unwrap());
        assert!(rank_condition_check(&d, &SubgroupPres::trivial(d.product())).unwrap());
        let d4 = d.with_exponents(vec![p("4"), p("4")]).unwrap();
        assert!(!rank_condition_check(&d4, &h).unwrap());
    }

    #[test]
    fn young_on_integers() {
        let d = build_young_datum(&FgAbGroup::free(1), &[p("3/2"), p("3/2"), p("3/2")]).unwrap();
        let cert = certify_finiteness(&d, &RankCheckConfig::default()).unwrap();
        assert!(cert.is_finite());
        assert!(bl_constant_discrete(&d, &cert).unwrap().value.is_one());
        let d3 = d.with_exponents(vec![p("3"), p("3"), p("3")]).unwrap();
        let cert = certify_finiteness(&d3, &RankCheckConfig::default()).unwrap();
        match cert.verdict {
            FinitenessVerdict::InfiniteWitness(w) => {
                assert_eq!(&w, d3.subgroup());
                assert!(!rank_condition_check(&d3, &w).unwrap());
            }
            v => panic!("unexpected verdict {v:?}"),
        }
    }

    #[test]
    fn gowers_over_z2() {
        let g = FgAbGroup::cyclic(2);
        let d = build_gowers_datum(&g, 2, &vec![p("4/3"); 4]).unwrap();
        assert_eq!(d.subgroup().order_u64(), Some(8));
        assert!(certified(&d).value.is_one());
        let d1 = build_gowers_datum(&FgAbGroup::free(1), 1, &[p("1"), p("1")]).unwrap();
        assert_eq!(d1.subgroup(), &SubgroupPres::full(d1.product()));
    }

    #[test]
    fn missing_certificate_is_an_error() {
        let d = build_diagonal_datum(&FgAbGroup::cyclic(2), &[p("2"), p("2")]).unwrap();
        let cert = FinitenessCertificate {
            verdict: FinitenessVerdict::Inconclusive,
            primes_used: vec![],
            notes: vec![],
        };
        assert!(matches!(bl_constant_discrete(&d, &cert), Err(BlError::MissingCertificate(_))));
    }

    #[test]
    fn brute_force_indicator_pairs() {
        // All 16 pairs of indicator inputs on (Z/2)² for the diagonal.
        let d = build_diagonal_datum(&FgAbGroup::cyclic(2), &[p("inf"), p("inf")]).unwrap();
        let mut best = 0.0f64;
        for a in 1..4u32 {
            for b in 1..4u32 {
                let f: Vec<f64> = (0..2).map(|i| f64::from(a >> i & 1)).collect();
                let g: Vec<f64> = (0..2).map(|i| f64::from(b >> i & 1)).collect();
                let form = evaluate_form(&d, &[f.clone(), g.clone()]).unwrap();
                let norms = lp_norm_counting(&f, &p("inf")) * lp_norm_counting(&g, &p("inf"));
                best = best.max(form / norms);
            }
        }
        assert!((best - 2.0).abs() < 1e-12);
    }
}
