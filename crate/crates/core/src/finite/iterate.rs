use super::datum::{bl_functional, convolve, FiniteBLDatum};
use super::table::{FiniteGroupTable, TableSubgroup};
use crate::error::{BlError, Result};

#[derive(Clone, Debug)]
pub struct IterationConfig {
    /// Sup-norm distance to the predicted limit at which iteration stops.
    pub tol: f64,
    /// Maximum number of outer steps.
    pub budget: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig { tol: 1e-10, budget: 500 }
    }
}

/// Convergence of the convolution powers of one normalized function.
#[derive(Clone, Debug)]
pub struct ConvolutionLimit {
    /// First point of the support.
    pub base_point: usize,
    /// Order of the base point; powers are taken in blocks of this length.
    pub period: usize,
    /// The subgroup carrying the limit.
    pub subgroup: TableSubgroup,
    /// `1/|Γ| · χ_Γ`.
    pub limit: Vec<f64>,
    /// Outer steps; step `i` holds the `period · 2^(i-1)`-fold power.
    pub iterations: usize,
    /// The number of factors of `f` in the final power.
    pub effective_iterations: usize,
    /// Sup-norm distance to the limit after each outer step.
    pub trace: Vec<f64>,
    /// Largest deviation of the total mass from 1 after a step, before the
    /// rounding error is divided out.
    pub mass_drift: f64,
}

#[derive(Clone, Debug)]
pub struct ExtremiserIteration {
    pub factors: Vec<ConvolutionLimit>,
    /// The functional at the family of limits.
    pub functional: f64,
}

/// Squares `g, g*g, (g*g)*(g*g), …` with `g` the `k`-fold power of `f`,
/// where `k` is the order of the first point of the support. Then
/// `e ∈ supp g` and the powers converge to the normalized indicator of the
/// subgroup generated by `supp g`.
pub fn convolution_limit(group: &FiniteGroupTable, f: &[f64], cfg: &IterationConfig) -> Result<ConvolutionLimit> {
    if f.len() != group.order() {
        return Err(BlError::DimensionMismatch(format!(
            "{} values on a group of order {}",
            f.len(),
            group.order()
        )));
    }
    if f.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(BlError::InvalidDatum("the function must be finite and nonnegative".into()));
    }
    let mass: f64 = f.iter().sum();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(BlError::InvalidDatum(format!("the function has mass {mass}, expected 1")));
    }
    let base_point = f.iter().position(|&x| x > 0.0).expect("positive mass");
    let period = group.element_order(base_point);
    let mut step = f.to_vec();
    for _ in 1..period {
        step = convolve(&step, f, group)?;
    }
    let support: Vec<usize> = (0..group.order()).filter(|&x| step[x] > 0.0).collect();
    let subgroup = group.generate(&support);
    let weight = 1.0 / subgroup.order() as f64;
    let limit: Vec<f64> = (0..group.order())
        .map(|x| if subgroup.contains(x) { weight } else { 0.0 })
        .collect();
    let distance = |h: &[f64]| h.iter().zip(&limit).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let drift = |h: &[f64]| (h.iter().sum::<f64>() - 1.0).abs();
    let mut current = step;
    let mut trace = vec![distance(&current)];
    let mut mass_drift = drift(&current);
    let mut iterations = 1;
    while *trace.last().expect("nonempty") > cfg.tol {
        if iterations >= cfg.budget {
            return Err(BlError::NoConvergence(format!(
                "convolution powers still at distance {:e} after {iterations} steps",
                trace.last().expect("nonempty")
            )));
        }
        current = convolve(&current, &current, group)?;
        iterations += 1;
        mass_drift = mass_drift.max(drift(&current));
        let total: f64 = current.iter().sum();
        current.iter_mut().for_each(|x| *x /= total);
        trace.push(distance(&current));
    }
    Ok(ConvolutionLimit {
        base_point,
        period,
        subgroup,
        limit,
        iterations,
        effective_iterations: period.saturating_mul(1usize.checked_shl(iterations as u32 - 1).unwrap_or(usize::MAX)),
        trace,
        mass_drift,
    })
}

/// Runs [`convolution_limit`] on every factor and evaluates the functional
/// at the resulting family of normalized subgroup indicators.
pub fn extremiser_iteration(
    datum: &FiniteBLDatum,
    fs: &[Vec<f64>],
    cfg: &IterationConfig,
) -> Result<ExtremiserIteration> {
    if fs.len() != datum.nfactors() {
        return Err(BlError::DimensionMismatch(format!(
            "{} functions for {} factors",
            fs.len(),
            datum.nfactors()
        )));
    }
    let factors = fs
        .iter()
        .zip(datum.groups())
        .map(|(f, g)| convolution_limit(g, f, cfg))
        .collect::<Result<Vec<_>>>()?;
    let limits: Vec<Vec<f64>> = factors.iter().map(|c| c.limit.clone()).collect();
    let functional = bl_functional(datum, &limits)?;
    Ok(ExtremiserIteration { factors, functional })
}
