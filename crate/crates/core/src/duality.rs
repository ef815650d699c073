use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;

use crate::abelian::{CompactSubgroup, FgAbGroup, IndexedGroup, ProductGroup, SubgroupPres};
use crate::compact::{bl_constant_compact_capped, certify_finiteness_compact, CompactCertificate, CompactConstant};
use crate::discrete::{
    bl_constant_discrete_capped, certify_finiteness, BLDatum, DiscreteConstant, FinitenessCertificate,
};
use crate::error::{BlError, Result};
use crate::exact::{conjugate_all, ExactPosValue, ExtRational, Rational};
use crate::intmat::Int;
use crate::rankcheck::RankCheckConfig;

pub fn conjugate_exponents(p: &[ExtRational]) -> Vec<ExtRational> {
    conjugate_all(p)
}

/// A datum paired with its annihilator and conjugate exponents.
#[derive(Clone, Debug)]
pub struct DualDatumPair {
    pub primal: BLDatum,
    pub dual_subgroup: CompactSubgroup,
    pub dual_exponents: Vec<ExtRational>,
}

impl DualDatumPair {
    /// The discrete datum recovered from the dual side.
    pub fn undualize(&self) -> Result<BLDatum> {
        BLDatum::new(
            self.primal.groups().to_vec(),
            self.dual_subgroup.annihilator().clone(),
            conjugate_all(&self.dual_exponents),
        )
    }
}

pub fn dualize(datum: &BLDatum) -> DualDatumPair {
    DualDatumPair {
        primal: datum.clone(),
        dual_subgroup: CompactSubgroup::annihilator_of(datum.subgroup()),
        dual_exponents: conjugate_all(datum.exponents()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualityStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct DualityReport {
    pub status: DualityStatus,
    pub discrete_certificate: FinitenessCertificate,
    pub compact_certificate: CompactCertificate,
    pub discrete: Option<DiscreteConstant>,
    pub compact: Option<CompactConstant>,
    pub notes: Vec<String>,
}

impl DualityReport {
    pub fn discrete_value(&self) -> Option<&ExactPosValue> {
        self.discrete.as_ref().map(|c| &c.value)
    }

    pub fn compact_value(&self) -> Option<&ExactPosValue> {
        self.compact.as_ref().map(|c| &c.value)
    }
}

#[derive(Clone, Debug)]
pub struct DualityConfig {
    pub rank: RankCheckConfig,
    pub cap_torsion: u64,
}

impl Default for DualityConfig {
    fn default() -> Self {
        DualityConfig {
            rank: RankCheckConfig::default(),
            cap_torsion: crate::abelian::DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Computes both sides of the duality identity and compares them exactly.
pub fn verify_duality(datum: &BLDatum, cfg: &DualityConfig) -> Result<DualityReport> {
    let pair = dualize(datum);
    let dcert = certify_finiteness(datum, &cfg.rank)?;
    let ccert = certify_finiteness_compact(&pair.dual_subgroup, &pair.dual_exponents, &cfg.rank)?;
    let mut notes = Vec::new();
    let mut report = DualityReport {
        status: DualityStatus::Inconclusive,
        discrete_certificate: dcert.clone(),
        compact_certificate: ccert.clone(),
        discrete: None,
        compact: None,
        notes: Vec::new(),
    };
    if !dcert.is_finite() && !dcert.is_infinite() {
        notes.push("discrete certificate inconclusive".into());
    }
    if !ccert.is_finite() && !ccert.is_infinite() {
        notes.push("compact certificate inconclusive".into());
    }
    if !notes.is_empty() {
        report.notes = notes;
        return Ok(report);
    }
    report.status = if dcert.is_infinite() && ccert.is_infinite() {
        notes.push("both sides infinite".into());
        DualityStatus::Pass
    } else if dcert.is_infinite() != ccert.is_infinite() {
        notes.push("certificates disagree on finiteness".into());
        DualityStatus::Fail
    } else {
        let d = bl_constant_discrete_capped(datum, &dcert, cfg.cap_torsion)?;
        let c = bl_constant_compact_capped(&pair.dual_subgroup, &pair.dual_exponents, &ccert, cfg.cap_torsion)?;
        let ok = d.value == c.value;
        if !ok {
            notes.push(format!("constants differ: {} vs {}", d.value, c.value));
        }
        report.discrete = Some(d);
        report.compact = Some(c);
        if ok {
            DualityStatus::Pass
        } else {
            DualityStatus::Fail
        }
    };
    report.notes = notes;
    Ok(report)
}

/// A complex function on a finite abelian group, indexed by the mixed-radix
/// element order of its invariant-factor coordinates.
#[derive(Clone, Debug)]
pub struct ComplexFunctionOnGroup {
    pub group: FgAbGroup,
    pub values: Vec<Complex64>,
}

impl ComplexFunctionOnGroup {
    pub fn new(group: FgAbGroup, values: Vec<Complex64>) -> Result<Self> {
        let order = ProductGroup::single(group.clone())
            .order_u64()
            .ok_or_else(|| BlError::InvalidGroup("functions need a finite group".into()))?;
        if values.len() as u64 != order {
            return Err(BlError::DimensionMismatch(format!(
                "{} values for a group of order {order}",
                values.len()
            )));
        }
        Ok(ComplexFunctionOnGroup { group, values })
    }

    pub fn from_real(group: FgAbGroup, values: &[f64]) -> Result<Self> {
        Self::new(group, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum()
    }

    /// `L^p` norm for counting measure, or for the uniform probability
    /// measure when `probability` is set.
    pub fn lp_norm(&self, p: &ExtRational, probability: bool) -> f64 {
        let n = self.values.len() as f64;
        if p.is_infinite() {
            return self.values.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        }
        let pf = p.to_f64();
        let s: f64 = self.values.iter().map(|z| z.norm().powf(pf)).sum();
        let s = if probability { s / n } else { s };
        s.powf(1.0 / pf)
    }
}

/// `f̂(γ) = Σ_x f(x)·conj(χ_γ(x))` with `χ_γ(x) = exp(2πi Σ γ_k x_k / d_k)`.
pub fn dft_finite_abelian(f: &ComplexFunctionOnGroup) -> ComplexFunctionOnGroup {
    let pg = ProductGroup::single(f.group.clone());
    let ig = IndexedGroup::new(&pg).expect("finite group");
    let mods = ig.moduli().to_vec();
    let l = mods.iter().copied().fold(1u64, num_integer::lcm);
    let table: Vec<Complex64> = (0..l)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / l as f64))
        .collect();
    let n = ig.order();
    let coords: Vec<Vec<u64>> = (0..n).map(|x| ig.decode(x)).collect();
    let values = (0..n as usize)
        .map(|g| {
            let gc = &coords[g];
            let mut acc = Complex64::zero();
            for (x, xc) in coords.iter().enumerate() {
                let fx = f.values[x];
                if fx == Complex64::zero() {
                    continue;
                }
                let phase = gc
                    .iter()
                    .zip(xc)
                    .zip(&mods)
                    .map(|((a, b), m)| a * b % m * (l / m))
                    .sum::<u64>()
                    % l;
                acc += fx * table[phase as usize];
            }
            acc
        })
        .collect();
    ComplexFunctionOnGroup {
        group: f.group.clone(),
        values,
    }
}

/// `H⊥` for `H` in a finite product, identified with a subgroup of the same
/// product through `γ ↦ χ_γ`.
pub fn finite_annihilator(h: &SubgroupPres) -> Result<SubgroupPres> {
    let parent = h.parent();
    if !parent.is_finite() {
        return Err(BlError::InvalidGroup("finite annihilator needs a finite product".into()));
    }
    let s = CompactSubgroup::annihilator_of(h);
    let gens: Vec<Vec<Int>> = s
        .component_reps()
        .iter()
        .map(|r| {
            r.iter()
                .zip(parent.moduli())
                .map(|(x, d)| (x * Rational::from_integer(d.clone())).to_integer())
                .collect()
        })
        .collect();
    SubgroupPres::from_rows(parent, &gens)
}

#[derive(Clone, Copy, Debug)]
pub struct FourierCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_diff: f64,
}

const FOURIER_SIZE_CAP: u64 = 1 << 16;

fn product_of(fs: &[ComplexFunctionOnGroup]) -> ProductGroup {
    ProductGroup::new(fs.iter().map(|f| f.group.clone()).collect())
}

fn tensor_sum(elems: &[Vec<Int>], prod: &ProductGroup, fs: &[ComplexFunctionOnGroup]) -> Complex64 {
    let idx: Vec<IndexedGroup> = fs
        .iter()
        .map(|f| IndexedGroup::new(&ProductGroup::single(f.group.clone())).expect("finite"))
        .collect();
    elems
        .iter()
        .map(|h| {
            fs.iter()
                .zip(&idx)
                .enumerate()
                .map(|(j, (f, ig))| f.values[ig.encode_int(&h[prod.block(j)]) as usize])
                .product::<Complex64>()
        })
        .sum()
}

/// Both sides of `Σ_H ∏ f_j = |H⊥|⁻¹ Σ_{H⊥} ∏ f̂_j`.
pub fn check_fourier_invariance(h: &SubgroupPres, fs: &[ComplexFunctionOnGroup]) -> Result<FourierCheck> {
    let prod = product_of(fs);
    if h.parent() != &prod {
        return Err(BlError::DimensionMismatch("functions do not match the product".into()));
    }
    let order = prod
        .order_u64()
        .ok_or_else(|| BlError::InvalidGroup("Fourier check needs finite groups".into()))?;
    if order > FOURIER_SIZE_CAP {
        return Err(BlError::Capacity {
            what: "product order for the Fourier check".into(),
            size: order as u128,
            cap: FOURIER_SIZE_CAP as u128,
        });
    }
    let lhs = tensor_sum(&h.elements()?, &prod, fs);
    let hats: Vec<ComplexFunctionOnGroup> = fs.iter().map(dft_finite_abelian).collect();
    let perp = finite_annihilator(h)?.elements()?;
    let rhs = tensor_sum(&perp, &prod, &hats) / perp.len() as f64;
    Ok(FourierCheck {
        lhs,
        rhs,
        abs_diff: (lhs - rhs).norm(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct HausdorffYoung {
    pub form_value: f64,
    pub standard_bound: f64,
    pub dual_bound: f64,
}

/// The form, the bound `C·∏‖f_j‖_{p_j}` and the bound `C·∏‖f̂_j‖_{p′_j}`
/// (probability measure on the dual), for a given constant `C`.
pub fn hausdorff_young_improvement(
    datum: &BLDatum,
    constant: &ExactPosValue,
    fs: &[ComplexFunctionOnGroup],
) -> Result<HausdorffYoung> {
    let prod = product_of(fs);
    if datum.product() != &prod {
        return Err(BlError::DimensionMismatch("functions do not match the datum".into()));
    }
    let c = constant.to_f64();
    let form_value = tensor_sum(&datum.subgroup().elements()?, &prod, fs).norm();
    let pp = conjugate_all(datum.exponents());
    let standard: f64 = fs
        .iter()
        .zip(datum.exponents())
        .map(|(f, p)| f.lp_norm(p, false))
        .product();
    let dual: f64 = fs
        .iter()
        .zip(&pp)
        .map(|(f, q)| dft_finite_abelian(f).lp_norm(q, true))
        .product();
    Ok(HausdorffYoung {
        form_value,
        standard_bound: c * standard,
        dual_bound: c * dual,
    })
}

/// Value of the dual form at the Fourier transforms of the normalized
/// indicators of `π_j(V)`: `∏|A_j|^{1/p′_j} · |{γ ∈ H⊥ : γ_j ∈ A_j⊥}| / |H⊥|`.
pub fn fourier_extremiser_value(datum: &BLDatum, v: &SubgroupPres) -> Result<ExactPosValue> {
    let prod = datum.product();
    if !prod.is_finite() {
        return Err(BlError::InvalidGroup("needs finite factors".into()));
    }
    if !v.is_subgroup_of(datum.subgroup()) {
        return Err(BlError::NotSubgroup("V is not contained in H".into()));
    }
    let pp = conjugate_all(datum.exponents());
    let mut value = ExactPosValue::one();
    let mut constraint_gens: Vec<Vec<Int>> = Vec::new();
    for j in 0..datum.nfactors() {
        let a = v.image(&prod.projection(j))?;
        let a_order = a.order_u64().expect("finite image");
        value = value.mul(&ExactPosValue::power_of(a_order, &pp[j].reciprocal()));
        // A_j⊥ inside Ĝ_j, embedded in the product with zeros elsewhere.
        let a_perp = finite_annihilator(&a)?;
        let block = prod.block(j);
        for row in a_perp.basis() {
            let mut g = vec![Int::zero(); prod.dim()];
            g[block.clone()].clone_from_slice(row);
            constraint_gens.push(g);
        }
    }
    let box_group = SubgroupPres::from_rows(prod, &constraint_gens)?;
    let perp = finite_annihilator(datum.subgroup())?;
    let gamma = perp.intersection(&box_group)?;
    let ratio = ExactPosValue::from_u64(gamma.order_u64().expect("finite"))
        .div(&ExactPosValue::from_u64(perp.order_u64().expect("finite")));
    Ok(value.mul(&ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::build_diagonal_datum;

    fn p(s: &str) -> ExtRational {
        s.parse().unwrap()
    }

    #[test]
    fn conjugates() {
        assert_eq!(conjugate_exponents(&[p("2"), p("2")]), vec![p("2"), p("2")]);
        assert_eq!(conjugate_exponents(&[p("1"), p("inf")]), vec![p("inf"), p("1")]);
        assert_eq!(conjugate_exponents(&[p("4/3"), p("4")]), vec![p("4"), p("4/3")]);
    }

    #[test]
    fn diagonal_duality() {
        for e in ["inf", "2", "1", "3/2"] {
            let d = build_diagonal_datum(&FgAbGroup::cyclic(2), &[p(e), p(e)]).unwrap();
            let r = verify_duality(&d, &DualityConfig::default()).unwrap();
            assert_eq!(r.status, DualityStatus::Pass, "exponent {e}");
        }
    }

    #[test]
    fn dft_basics() {
        let g = FgAbGroup::cyclic(2);
        let delta = ComplexFunctionOnGroup::from_real(g.clone(), &[1.0, 0.0]).unwrap();
        let hat = dft_finite_abelian(&delta);
        assert!(hat.values.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let one = ComplexFunctionOnGroup::from_real(g, &[1.0, 1.0]).unwrap();
        let hat = dft_finite_abelian(&one);
        assert!((hat.values[0] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(hat.values[1].norm() < 1e-15);
    }

    #[test]
    fn subgroup_indicator_transform() {
        // Indicator of {0, 2} in Z/4 transforms to 2·indicator{0, 2}.
        let g = FgAbGroup::cyclic(4);
        let f = ComplexFunctionOnGroup::from_real(g, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        let hat = dft_finite_abelian(&f);
        let expect = [2.0, 0.0, 2.0, 0.0];
        for (z, e) in hat.values.iter().zip(expect) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn invariance_with_constants() {
        let d = build_diagonal_datum(&FgAbGroup::cyclic(3), &[p("2"), p("2")]).unwrap();
        let g = FgAbGroup::cyclic(3);
        let ones = ComplexFunctionOnGroup::from_real(g, &[1.0; 3]).unwrap();
        let chk = check_fourier_invariance(d.subgroup(), &[ones.clone(), ones]).unwrap();
        assert!((chk.lhs - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        assert!(chk.abs_diff < 1e-12);
    }

    #[test]
    fn two_point_input_improves() {
        let g = FgAbGroup::cyclic(4);
        let prod = ProductGroup::single(g.clone());
        let d = BLDatum::new(vec![g.clone()], SubgroupPres::full(&prod), vec![p("4/3")]).unwrap();
        let f = ComplexFunctionOnGroup::from_real(g, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        let hy = hausdorff_young_improvement(&d, &ExactPosValue::one(), &[f]).unwrap();
        assert!((hy.standard_bound - 2f64.powf(0.75)).abs() < 1e-12);
        assert!((hy.dual_bound - 6f64.powf(0.25)).abs() < 1e-12);
        assert!(hy.dual_bound < hy.standard_bound);
    }
}
