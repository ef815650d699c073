use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};
use std::ops::{Add, Mul};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::table::{enumerate_subgroups_nonabelian, FiniteGroupTable, TableSubgroup, DEFAULT_FINITE_ORDER_CAP};
use crate::discrete::BLDatum;
use crate::error::{BlError, Result};
use crate::exact::{ExactPosValue, ExtRational, Rational};
use crate::intmat::Int;

/// A subgroup `H ≤ G₁ × … × G_m` of finite groups with weights `s_j ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct FiniteBLDatum {
    groups: Vec<FiniteGroupTable>,
    elements: Vec<Vec<usize>>,
    table: FiniteGroupTable,
    weights: Vec<Rational>,
}

impl FiniteBLDatum {
    /// `elements` lists the tuples of `H`; closure and inverses are checked.
    pub fn new(groups: Vec<FiniteGroupTable>, elements: Vec<Vec<usize>>, weights: Vec<Rational>) -> Result<Self> {
        let m = groups.len();
        if m == 0 {
            return Err(BlError::InvalidDatum("at least one factor group is required".into()));
        }
        if weights.len() != m {
            return Err(BlError::DimensionMismatch(format!("{} weights for {m} factors", weights.len())));
        }
        if let Some(s) = weights.iter().find(|s| s.is_negative() || **s > Rational::one()) {
            return Err(BlError::InvalidDatum(format!("weight {s} is outside [0, 1]")));
        }
        for t in &elements {
            if t.len() != m || t.iter().zip(&groups).any(|(&x, g)| x >= g.order()) {
                return Err(BlError::NotSubgroup(format!("{t:?} is not an element of the product")));
            }
        }
        let identity: Vec<usize> = groups.iter().map(|g| g.identity()).collect();
        let mut uniq: Vec<Vec<usize>> = elements.into_iter().collect::<HashSet<_>>().into_iter().collect();
        uniq.sort();
        let Some(pos) = uniq.iter().position(|t| *t == identity) else {
            return Err(BlError::NotSubgroup("the identity is missing".into()));
        };
        let id = uniq.remove(pos);
        uniq.insert(0, id);
        let index: HashMap<&[usize], usize> = uniq.iter().enumerate().map(|(i, t)| (t.as_slice(), i)).collect();
        let n = uniq.len();
        let mut mul = vec![vec![0; n]; n];
        for (a, ta) in uniq.iter().enumerate() {
            let inv: Vec<usize> = ta.iter().zip(&groups).map(|(&x, g)| g.inv(x)).collect();
            if !index.contains_key(inv.as_slice()) {
                return Err(BlError::NotSubgroup(format!("inverse of {ta:?} is missing")));
            }
            for (b, tb) in uniq.iter().enumerate() {
                let prod: Vec<usize> = (0..m).map(|j| groups[j].mul(ta[j], tb[j])).collect();
                mul[a][b] = *index
                    .get(prod.as_slice())
                    .ok_or_else(|| BlError::NotSubgroup(format!("product {ta:?}·{tb:?} is missing")))?;
            }
        }
        let table = FiniteGroupTable::from_trusted(mul, 0);
        Ok(FiniteBLDatum {
            groups,
            elements: uniq,
            table,
            weights,
        })
    }

    /// `H` generated by the given tuples.
    pub fn from_generators(groups: Vec<FiniteGroupTable>, gens: &[Vec<usize>], weights: Vec<Rational>) -> Result<Self> {
        let m = groups.len();
        for t in gens {
            if t.len() != m || t.iter().zip(&groups).any(|(&x, g)| x >= g.order()) {
                return Err(BlError::NotSubgroup(format!("{t:?} is not an element of the product")));
            }
        }
        let identity: Vec<usize> = groups.iter().map(|g| g.identity()).collect();
        let mut seen: HashSet<Vec<usize>> = HashSet::from([identity.clone()]);
        let mut queue = VecDeque::from([identity]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y: Vec<usize> = (0..m).map(|j| groups[j].mul(x[j], g[j])).collect();
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        Self::new(groups, seen.into_iter().collect(), weights)
    }

    /// The diagonal copy of `g` in `g^m`, one factor per weight.
    pub fn diagonal(g: &FiniteGroupTable, weights: Vec<Rational>) -> Result<Self> {
        let m = weights.len();
        let elements = (0..g.order()).map(|x| vec![x; m]).collect();
        Self::new(vec![g.clone(); m], elements, weights)
    }

    /// Weights `s_j = 1/p_j`.
    pub fn weights_from_exponents(p: &[ExtRational]) -> Vec<Rational> {
        p.iter().map(|x| x.reciprocal()).collect()
    }

    /// The same datum as a finite abelian one, with `s_j = 1/p_j`.
    pub fn from_abelian(datum: &BLDatum) -> Result<Self> {
        if datum.groups().iter().any(|g| !g.is_finite()) {
            return Err(BlError::InvalidGroup("every factor group must be finite".into()));
        }
        let groups = datum
            .groups()
            .iter()
            .map(FiniteGroupTable::from_abelian)
            .collect::<Result<Vec<_>>>()?;
        let indexers = datum
            .groups()
            .iter()
            .map(|g| crate::abelian::IndexedGroup::new(&crate::abelian::ProductGroup::single(g.clone())))
            .collect::<Result<Vec<_>>>()?;
        let prod = datum.product();
        let elements = datum
            .subgroup()
            .elements()?
            .into_iter()
            .map(|x| {
                (0..datum.nfactors())
                    .map(|j| {
                        let c: Vec<Int> = prod.block(j).map(|i| x[i].clone()).collect();
                        indexers[j].encode_int(&c) as usize
                    })
                    .collect()
            })
            .collect();
        Self::new(groups, elements, Self::weights_from_exponents(datum.exponents()))
    }

    pub fn with_weights(&self, weights: Vec<Rational>) -> Result<Self> {
        Self::new(self.groups.clone(), self.elements.clone(), weights)
    }

    pub fn groups(&self) -> &[FiniteGroupTable] {
        &self.groups
    }

    /// Tuples of `H`; index 0 is the identity.
    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    /// Multiplication table of `H` on the indices of [`Self::elements`].
    pub fn subgroup_table(&self) -> &FiniteGroupTable {
        &self.table
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn nfactors(&self) -> usize {
        self.groups.len()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// `π_j` on the indices of `H`.
    pub fn projection(&self, j: usize) -> Vec<usize> {
        self.elements.iter().map(|t| t[j]).collect()
    }

    /// `|V| · ∏ |π_j V|^{-s_j}`.
    pub fn subgroup_score(&self, v: &TableSubgroup) -> ExactPosValue {
        let mut out = ExactPosValue::from_u64(v.order() as u64);
        for (j, s) in self.weights.iter().enumerate() {
            let img = v.image_size(&self.projection(j));
            out = out.mul(&ExactPosValue::power_of(img as u64, &-s));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct FiniteConfig {
    pub order_cap: usize,
    /// Cap on the number of factor-subgroup tuples in the cross-check.
    pub tuple_cap: usize,
}

impl Default for FiniteConfig {
    fn default() -> Self {
        FiniteConfig {
            order_cap: DEFAULT_FINITE_ORDER_CAP,
            tuple_cap: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiniteConstant {
    pub value: ExactPosValue,
    /// Maximizing subgroups `V ≤ H`, as sorted indices into the elements of `H`.
    pub maximizers: Vec<Vec<usize>>,
    /// Maximizing tuples `(V₁, …, V_m)` of factor subgroups.
    pub factor_maximizers: Vec<Vec<Vec<usize>>>,
    pub subgroups_examined: usize,
    pub tuples_examined: usize,
}

impl FiniteConstant {
    /// `f_j = χ_{π_j V}` for the first maximizer.
    pub fn extremiser(&self, datum: &FiniteBLDatum) -> Vec<Vec<f64>> {
        indicator_family(datum, &self.maximizers[0])
    }
}

/// The family `χ_{π_j V}` for `V` given by indices into the elements of `H`.
pub fn indicator_family(datum: &FiniteBLDatum, v: &[usize]) -> Vec<Vec<f64>> {
    (0..datum.nfactors())
        .map(|j| {
            let mut f = vec![0.0; datum.groups[j].order()];
            for &h in v {
                f[datum.elements[h][j]] = 1.0;
            }
            f
        })
        .collect()
}

/// Exact constant as a maximum over `V ≤ H`, cross-checked against the
/// maximum over tuples of factor subgroups `V_j ≤ G_j` of
/// `|H ∩ ∏ V_j| · ∏ |V_j|^{-s_j}`.
pub fn bl_constant_finite(datum: &FiniteBLDatum, cfg: &FiniteConfig) -> Result<FiniteConstant> {
    let subs = enumerate_subgroups_nonabelian(&datum.table, cfg.order_cap)?;
    let mut best = ExactPosValue::one();
    let mut maximizers: Vec<Vec<usize>> = Vec::new();
    for v in &subs {
        let score = datum.subgroup_score(v);
        match score.cmp(&best) {
            Ordering::Greater => {
                best = score;
                maximizers = vec![v.elements()];
            }
            Ordering::Equal => maximizers.push(v.elements()),
            Ordering::Less => {}
        }
    }

    let factor_subs = datum
        .groups
        .iter()
        .map(|g| enumerate_subgroups_nonabelian(g, cfg.order_cap))
        .collect::<Result<Vec<_>>>()?;
    let tuples = factor_subs
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.len()))
        .unwrap_or(usize::MAX);
    if tuples > cfg.tuple_cap {
        return Err(BlError::Capacity {
            what: "factor subgroup tuples".into(),
            size: tuples as u128,
            cap: cfg.tuple_cap as u128,
        });
    }
    let words = datum.order().div_ceil(64);
    // masks[j][k]: elements of H whose j-th coordinate lies in the k-th subgroup of G_j.
    let masks: Vec<Vec<Vec<u64>>> = factor_subs
        .iter()
        .enumerate()
        .map(|(j, subs)| {
            subs.iter()
                .map(|v| {
                    let mut bits = vec![0u64; words];
                    for (h, t) in datum.elements.iter().enumerate() {
                        if v.contains(t[j]) {
                            bits[h / 64] |= 1 << (h % 64);
                        }
                    }
                    bits
                })
                .collect()
        })
        .collect();
    let factor_weight: Vec<Vec<ExactPosValue>> = factor_subs
        .iter()
        .zip(&datum.weights)
        .map(|(subs, s)| subs.iter().map(|v| ExactPosValue::power_of(v.order() as u64, &-s)).collect())
        .collect();
    let m = datum.nfactors();
    let mut pick = vec![0usize; m];
    let mut tuple_best = ExactPosValue::one();
    let mut factor_maximizers: Vec<Vec<usize>> = Vec::new();
    loop {
        let mut bits = vec![u64::MAX; words];
        for j in 0..m {
            for (b, w) in bits.iter_mut().zip(&masks[j][pick[j]]) {
                *b &= w;
            }
        }
        let count: u32 = bits.iter().map(|w| w.count_ones()).sum();
        let mut score = ExactPosValue::from_u64(count as u64);
        for j in 0..m {
            score = score.mul(&factor_weight[j][pick[j]]);
        }
        match score.cmp(&tuple_best) {
            Ordering::Greater => {
                tuple_best = score;
                factor_maximizers = vec![pick.clone()];
            }
            Ordering::Equal => factor_maximizers.push(pick.clone()),
            Ordering::Less => {}
        }
        let mut j = 0;
        while j < m {
            pick[j] += 1;
            if pick[j] < factor_subs[j].len() {
                break;
            }
            pick[j] = 0;
            j += 1;
        }
        if j == m {
            break;
        }
    }
    if tuple_best != best {
        return Err(BlError::InvalidDatum(format!(
            "subgroup maximum {best} and factor-subgroup maximum {tuple_best} disagree"
        )));
    }
    let factor_maximizers = factor_maximizers
        .into_iter()
        .map(|p| p.iter().enumerate().map(|(j, &k)| factor_subs[j][k].elements()).collect())
        .collect();
    Ok(FiniteConstant {
        value: best,
        maximizers,
        factor_maximizers,
        subgroups_examined: subs.len(),
        tuples_examined: tuples,
    })
}

fn check_inputs<T>(datum: &FiniteBLDatum, fs: &[Vec<T>]) -> Result<()> {
    if fs.len() != datum.nfactors() {
        return Err(BlError::DimensionMismatch(format!(
            "{} functions for {} factors",
            fs.len(),
            datum.nfactors()
        )));
    }
    for (j, (f, g)) in fs.iter().zip(&datum.groups).enumerate() {
        if f.len() != g.order() {
            return Err(BlError::DimensionMismatch(format!(
                "function {j} has {} values on a group of order {}",
                f.len(),
                g.order()
            )));
        }
    }
    Ok(())
}

/// `f^s` with `f^0` read as the support indicator.
fn weighted_power(x: f64, s: f64) -> f64 {
    if s == 0.0 {
        if x > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        x.powf(s)
    }
}

/// `Σ_{h ∈ H} ∏ f_j(h_j)^{s_j} / ∏ (Σ f_j)^{s_j}` with counting measures.
/// Returns `+∞` when a denominator vanishes under a nonzero numerator.
pub fn bl_functional(datum: &FiniteBLDatum, fs: &[Vec<f64>]) -> Result<f64> {
    check_inputs(datum, fs)?;
    if fs.iter().flatten().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(BlError::InvalidDatum("functions must be finite and nonnegative".into()));
    }
    let s: Vec<f64> = datum.weights.iter().map(|w| w.to_f64().unwrap_or(0.0)).collect();
    let numerator: f64 = datum
        .elements
        .iter()
        .map(|t| t.iter().enumerate().map(|(j, &x)| weighted_power(fs[j][x], s[j])).product::<f64>())
        .sum();
    let denominator: f64 = fs
        .iter()
        .zip(&s)
        .map(|(f, &sj)| weighted_power(f.iter().sum(), sj))
        .product();
    if denominator == 0.0 {
        if numerator > 0.0 {
            return Ok(f64::INFINITY);
        }
        return Err(BlError::InvalidDatum("the functional is 0/0 on these inputs".into()));
    }
    Ok(numerator / denominator)
}

fn rational_value(r: &Rational) -> Result<ExactPosValue> {
    let too_big = || BlError::Capacity {
        what: "exact function value".into(),
        size: u128::MAX,
        cap: u64::MAX as u128,
    };
    let n = r.numer().to_u64().ok_or_else(too_big)?;
    let d = r.denom().to_u64().ok_or_else(too_big)?;
    Ok(ExactPosValue::from_u64(n).div(&ExactPosValue::from_u64(d)))
}

/// Exact value of the functional for rational inputs whose integrand takes a
/// single nonzero value on its support (scaled subgroup indicators, say).
/// `None` means the functional vanishes.
pub fn bl_functional_exact(datum: &FiniteBLDatum, fs: &[Vec<Rational>]) -> Result<Option<ExactPosValue>> {
    check_inputs(datum, fs)?;
    if fs.iter().flatten().any(|x| x.is_negative()) {
        return Err(BlError::InvalidDatum("functions must be nonnegative".into()));
    }
    let mut term: Option<ExactPosValue> = None;
    let mut count = 0u64;
    for t in &datum.elements {
        let mut v = ExactPosValue::one();
        let mut zero = false;
        for (j, &x) in t.iter().enumerate() {
            let fx = &fs[j][x];
            if fx.is_zero() {
                zero = true;
                break;
            }
            v = v.mul(&rational_value(fx)?.pow(&datum.weights[j]));
        }
        if zero {
            continue;
        }
        match &term {
            None => term = Some(v),
            Some(prev) if *prev == v => {}
            Some(_) => {
                return Err(BlError::InvalidDatum(
                    "exact evaluation needs an integrand that is constant on its support".into(),
                ))
            }
        }
        count += 1;
    }
    let mut denominator = ExactPosValue::one();
    let mut zero_denominator = false;
    for (f, s) in fs.iter().zip(&datum.weights) {
        let mass: Rational = f.iter().fold(Rational::zero(), |a, b| a + b);
        if mass.is_zero() {
            zero_denominator = true;
        } else {
            denominator = denominator.mul(&rational_value(&mass)?.pow(s));
        }
    }
    match (term, zero_denominator) {
        (None, true) => Err(BlError::InvalidDatum("the functional is 0/0 on these inputs".into())),
        (None, false) => Ok(None),
        (Some(_), true) => Ok(Some(ExactPosValue::Infinite)),
        (Some(v), false) => Ok(Some(ExactPosValue::from_u64(count).mul(&v).div(&denominator))),
    }
}

/// `(f * g)(x) = Σ_y f(y) · g(x · y⁻¹)`.
pub fn convolve<T>(f: &[T], g: &[T], group: &FiniteGroupTable) -> Result<Vec<T>>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    let n = group.order();
    if f.len() != n || g.len() != n {
        return Err(BlError::DimensionMismatch(format!(
            "convolution of functions with {} and {} values on a group of order {n}",
            f.len(),
            g.len()
        )));
    }
    let mut out = vec![T::zero(); n];
    for (y, fy) in f.iter().enumerate() {
        if fy.is_zero() {
            continue;
        }
        let yinv = group.inv(y);
        for (x, slot) in out.iter_mut().enumerate() {
            let gx = &g[group.mul(x, yinv)];
            if !gx.is_zero() {
                *slot = slot.clone() + fy.clone() * gx.clone();
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BallCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `BL(f) · BL(g) ≤ BL · BL(f * g)` up to `tol`.
pub fn ball_inequality_check(
    datum: &FiniteBLDatum,
    constant: &FiniteConstant,
    f: &[Vec<f64>],
    g: &[Vec<f64>],
    tol: f64,
) -> Result<BallCheck> {
    let fg = f
        .iter()
        .zip(g)
        .zip(&datum.groups)
        .map(|((a, b), grp)| convolve(a, b, grp))
        .collect::<Result<Vec<_>>>()?;
    let lhs = bl_functional(datum, f)? * bl_functional(datum, g)?;
    let rhs = constant.value.to_f64() * bl_functional(datum, &fg)?;
    Ok(BallCheck { lhs, rhs, ok: lhs <= rhs + tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn convolution_on_z2() {
        let g = FiniteGroupTable::cyclic(2).unwrap();
        let out = convolve(&[2i64, 3], &[5, 7], &g).unwrap();
        assert_eq!(out, vec![2 * 5 + 3 * 7, 2 * 7 + 3 * 5]);
    }

    #[test]
    fn diagonal_s3_values() {
        let s3 = FiniteGroupTable::named("S3").unwrap();
        let d = FiniteBLDatum::diagonal(&s3, vec![rat(1, 2), rat(0, 1)]).unwrap();
        let c = bl_constant_finite(&d, &FiniteConfig::default()).unwrap();
        assert_eq!(c.value, ExactPosValue::from_u64(6).pow(&rat(1, 2)));
        assert_eq!(c.maximizers, vec![(0..6).collect::<Vec<_>>()]);
        let d = d.with_weights(vec![rat(1, 1), rat(1, 1)]).unwrap();
        let c = bl_constant_finite(&d, &FiniteConfig::default()).unwrap();
        assert!(c.value.is_one());
        assert_eq!(c.maximizers, vec![vec![0]]);
    }
}
