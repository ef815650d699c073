use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::bfgs::{minimize, BfgsConfig};
use super::{becks_constant, finiteness_check, orthocomplement, EuclideanDatum, EuclideanFiniteness, MeasureConvention};
use crate::error::{BlError, Result};
use crate::rankcheck::RankCheckConfig;

/// Centred gaussians `f_j(x) = exp(−π x·A_j x)`, one matrix per factor. A
/// zero matrix stands for the constant function 1.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianInput {
    mats: Vec<DMatrix<f64>>,
}

impl GaussianInput {
    pub fn new(mats: Vec<DMatrix<f64>>) -> Result<Self> {
        for (j, a) in mats.iter().enumerate() {
            if !a.is_square() {
                return Err(BlError::DimensionMismatch(format!("matrix {j} is not square")));
            }
            let scale = a.amax().max(1.0);
            if (a - a.transpose()).amax() > 1e-12 * scale {
                return Err(BlError::NotPositiveDefinite(format!("matrix {j} is not symmetric")));
            }
            if a.iter().all(|x| *x == 0.0) {
                continue;
            }
            if a.clone().cholesky().is_none() {
                return Err(BlError::NotPositiveDefinite(format!("matrix {j}")));
            }
        }
        Ok(GaussianInput { mats })
    }

    pub fn identity(dims: &[usize]) -> Self {
        GaussianInput {
            mats: dims.iter().map(|&n| DMatrix::identity(n, n)).collect(),
        }
    }

    /// Scalar multiples of the identity.
    pub fn from_scalars(dims: &[usize], scalars: &[f64]) -> Result<Self> {
        Self::new(
            dims.iter()
                .zip(scalars)
                .map(|(&n, &s)| DMatrix::identity(n, n) * s)
                .collect(),
        )
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn is_constant(&self, j: usize) -> bool {
        self.mats[j].iter().all(|x| *x == 0.0)
    }

    /// Frequency-side gaussians: `A_j ↦ A_j⁻¹`.
    pub fn fourier_pushforward(&self) -> Result<Self> {
        let mats = self
            .mats
            .iter()
            .enumerate()
            .map(|(j, a)| {
                if a.iter().all(|x| *x == 0.0) {
                    return Err(BlError::InvalidDatum(format!(
                        "factor {j} is constant; its transform is not a gaussian"
                    )));
                }
                a.clone()
                    .try_inverse()
                    .map(|b| (&b + b.transpose()) * 0.5)
                    .ok_or_else(|| BlError::NotPositiveDefinite(format!("matrix {j}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mats)
    }
}

fn log_det_pd(m: &DMatrix<f64>) -> Option<f64> {
    if m.nrows() == 0 {
        return Some(0.0);
    }
    let ch = m.clone().cholesky()?;
    Some(2.0 * ch.l().diagonal().iter().map(|x| x.ln()).sum::<f64>())
}

/// Precomputed pieces of the gaussian ratio for one datum.
struct Evaluator {
    /// Row blocks `B_j` of the basis matrix, each `n_j × d`.
    blocks: Vec<DMatrix<f64>>,
    dims: Vec<usize>,
    /// `1/p_j`.
    inv_p: Vec<f64>,
    /// `ln p_j` for finite exponents.
    ln_p: Vec<f64>,
    measure_offset: f64,
    d: usize,
}

impl Evaluator {
    fn new(datum: &EuclideanDatum) -> Self {
        let b = datum.basis_matrix();
        let blocks = datum
            .blocks()
            .iter()
            .map(|r| b.rows(r.start, r.len()).into_owned())
            .collect();
        let measure_offset = match datum.measure() {
            MeasureConvention::Induced => 0.5 * log_det_pd(&(b.transpose() * &b)).unwrap_or(0.0),
            MeasureConvention::Parametrized => 0.0,
        };
        Evaluator {
            blocks,
            dims: datum.factor_dims().to_vec(),
            inv_p: datum.exponents().iter().map(|p| p.recip_f64()).collect(),
            ln_p: datum
                .exponents()
                .iter()
                .map(|p| if p.is_infinite() { 0.0 } else { p.to_f64().ln() })
                .collect(),
            measure_offset,
            d: datum.dim(),
        }
    }

    fn gram(&self, mats: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.d, self.d);
        for (bj, a) in self.blocks.iter().zip(mats) {
            m += bj.transpose() * a * bj;
        }
        m
    }

    /// Log of the ratio; `+∞` when the integral diverges.
    fn log_ratio(&self, mats: &[DMatrix<f64>]) -> f64 {
        let Some(ld) = log_det_pd(&self.gram(mats)) else {
            return f64::INFINITY;
        };
        let mut v = self.measure_offset - 0.5 * ld;
        for (j, a) in mats.iter().enumerate() {
            if self.inv_p[j] > 0.0 {
                let lda = log_det_pd(a).unwrap_or(f64::NEG_INFINITY);
                v += 0.5 * self.inv_p[j] * (self.dims[j] as f64 * self.ln_p[j] + lda);
            }
        }
        v
    }

    fn free_factors(&self) -> Vec<usize> {
        (0..self.dims.len()).filter(|&j| self.inv_p[j] > 0.0).collect()
    }

    fn nparams(&self) -> usize {
        self.free_factors()
            .iter()
            .map(|&j| self.dims[j] * (self.dims[j] + 1) / 2)
            .sum()
    }

    /// Lower-triangular factors with log-diagonal entries.
    fn factors(&self, theta: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut k = 0;
        self.dims
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                let mut l = DMatrix::zeros(n, n);
                if self.inv_p[j] > 0.0 {
                    for a in 0..n {
                        for b in 0..=a {
                            l[(a, b)] = if a == b { theta[k].exp() } else { theta[k] };
                            k += 1;
                        }
                    }
                }
                l
            })
            .collect()
    }

    fn matrices(&self, theta: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.factors(theta).iter().map(|l| l * l.transpose()).collect()
    }

    /// Negative log ratio and its gradient in the parameters.
    fn objective(&self, theta: &DVector<f64>) -> (f64, DVector<f64>) {
        let ls = self.factors(theta);
        let mats: Vec<DMatrix<f64>> = ls.iter().map(|l| l * l.transpose()).collect();
        let gram = self.gram(&mats);
        let mut grad = DVector::zeros(theta.len());
        let Some(ch) = (if self.d == 0 { None } else { gram.clone().cholesky() }) else {
            if self.d == 0 {
                let v = self.log_ratio(&mats);
                let mut k = 0;
                for j in self.free_factors() {
                    for a in 0..self.dims[j] {
                        for b in 0..=a {
                            if a == b {
                                grad[k] = -self.inv_p[j];
                            }
                            k += 1;
                        }
                    }
                }
                return (-v, grad);
            }
            return (f64::NAN, grad);
        };
        let ld = 2.0 * ch.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let minv = ch.inverse();
        let mut v = self.measure_offset - 0.5 * ld;
        let mut k = 0;
        for j in 0..self.dims.len() {
            if self.inv_p[j] == 0.0 {
                continue;
            }
            let l = &ls[j];
            let n = self.dims[j];
            let mut ldl = 0.0;
            for a in 0..n {
                ldl += 2.0 * theta[k + a * (a + 1) / 2 + a];
            }
            v += 0.5 * self.inv_p[j] * (n as f64 * self.ln_p[j] + ldl);
            let pl = &self.blocks[j] * &minv * self.blocks[j].transpose() * l;
            for a in 0..n {
                for b in 0..=a {
                    grad[k] = if a == b {
                        -pl[(a, a)] * l[(a, a)] + self.inv_p[j]
                    } else {
                        -pl[(a, b)]
                    };
                    k += 1;
                }
            }
        }
        (-v, -grad)
    }
}

/// The ratio `|∫_H ⊗f_j| / ∏ ‖f_j‖_{p_j}` at centred gaussians.
pub fn gaussian_bl_value(datum: &EuclideanDatum, input: &GaussianInput) -> Result<f64> {
    if input.mats.len() != datum.nfactors() {
        return Err(BlError::DimensionMismatch(format!(
            "{} matrices for {} factors",
            input.mats.len(),
            datum.nfactors()
        )));
    }
    for (j, (a, &n)) in input.mats.iter().zip(datum.factor_dims()).enumerate() {
        if a.nrows() != n {
            return Err(BlError::DimensionMismatch(format!("matrix {j} has size {}, expected {n}", a.nrows())));
        }
        if input.is_constant(j) && !datum.exponents()[j].is_infinite() {
            return Err(BlError::NotPositiveDefinite(format!(
                "matrix {j} is zero but its exponent is finite"
            )));
        }
    }
    Ok(Evaluator::new(datum).log_ratio(&input.mats).exp())
}

#[derive(Clone, Debug)]
pub struct OptimizeConfig {
    pub restarts: usize,
    pub seed: u64,
    pub bfgs: BfgsConfig,
    pub screen: RankCheckConfig,
    /// Relative gap accepted by the duality checks.
    pub duality_tol: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            restarts: 8,
            seed: 0,
            bfgs: BfgsConfig::default(),
            screen: RankCheckConfig::default(),
            duality_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GaussianOptimum {
    /// Best ratio found; `∞` when the constant is certified infinite or the
    /// ascent diverged.
    pub value: f64,
    pub argmax: Option<GaussianInput>,
    /// Whether the best restart met the stopping tolerances.
    pub converged: bool,
    pub restart_values: Vec<f64>,
    pub converged_restarts: usize,
    pub iterations: usize,
    pub finiteness: EuclideanFiniteness,
}

/// Multi-start quasi-Newton ascent of the gaussian ratio over positive
/// definite matrices `A_j = L_j L_jᵀ`. Factors with `p_j = ∞` are held at
/// the constant function.
pub fn optimize_gaussian(datum: &EuclideanDatum, cfg: &OptimizeConfig) -> Result<GaussianOptimum> {
    let finiteness = finiteness_check(datum, &cfg.screen)?;
    if matches!(
        finiteness,
        EuclideanFiniteness::ScalingFails | EuclideanFiniteness::DimensionWitness(_)
    ) {
        return Ok(GaussianOptimum {
            value: f64::INFINITY,
            argmax: None,
            converged: false,
            restart_values: Vec::new(),
            converged_restarts: 0,
            iterations: 0,
            finiteness,
        });
    }
    let ev = Evaluator::new(datum);
    let np = ev.nparams();
    let runs: Vec<_> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9).wrapping_add(r as u64));
            let start = if r == 0 {
                DVector::zeros(np)
            } else {
                DVector::from_fn(np, |_, _| rng.gen_range(-1.0..1.0))
            };
            minimize(|t| ev.objective(t), start, &cfg.bfgs)
        })
        .collect();
    let restart_values: Vec<f64> = runs
        .iter()
        .map(|o| if o.unbounded { f64::INFINITY } else { (-o.value).exp() })
        .collect();
    let converged_restarts = runs.iter().filter(|o| o.converged).count();
    let iterations = runs.iter().map(|o| o.iterations).sum();
    let top = restart_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Prefer a converged restart whose value ties the best one.
    let best = (0..runs.len())
        .filter(|&i| runs[i].converged && restart_values[i] >= top * (1.0 - 1e-9))
        .max_by(|&a, &b| restart_values[a].total_cmp(&restart_values[b]))
        .or_else(|| (0..runs.len()).max_by(|&a, &b| restart_values[a].total_cmp(&restart_values[b])))
        .expect("at least one restart");
    let out = &runs[best];
    let (value, argmax) = if out.unbounded {
        (f64::INFINITY, None)
    } else {
        (restart_values[best], Some(GaussianInput { mats: ev.matrices(&out.x) }))
    };
    Ok(GaussianOptimum {
        value,
        argmax,
        converged: out.converged && !out.unbounded,
        restart_values,
        converged_restarts,
        iterations,
        finiteness,
    })
}

#[derive(Clone, Debug)]
pub struct EuclideanDualityReport {
    pub primal: GaussianOptimum,
    pub dual: GaussianOptimum,
    pub becks: f64,
    /// `|BL − B_p·BL⊥| / BL` when both sides are finite.
    pub gap: Option<f64>,
    pub converged: bool,
    pub pass: bool,
}

/// Compares the primal optimum with `B_p` times the optimum on the
/// orthogonal complement, both for induced Lebesgue measure.
pub fn verify_euclidean_duality(datum: &EuclideanDatum, cfg: &OptimizeConfig) -> Result<EuclideanDualityReport> {
    let primal_datum = datum.clone().with_measure(MeasureConvention::Induced);
    let dual_datum = orthocomplement(&primal_datum);
    let primal = optimize_gaussian(&primal_datum, cfg)?;
    let dual = optimize_gaussian(&dual_datum, cfg)?;
    let becks = becks_constant(datum.exponents(), datum.factor_dims())?;
    let (gap, converged, pass) = match (primal.value.is_finite(), dual.value.is_finite()) {
        (true, true) => {
            let gap = (primal.value - becks * dual.value).abs() / primal.value;
            let converged = primal.converged && dual.converged;
            (Some(gap), converged, converged && gap <= cfg.duality_tol)
        }
        (false, false) => (None, true, true),
        _ => (None, primal.converged || dual.converged, false),
    };
    Ok(EuclideanDualityReport {
        primal,
        dual,
        becks,
        gap,
        converged,
        pass,
    })
}

#[derive(Clone, Debug)]
pub struct PushforwardReport {
    pub primal_value: f64,
    pub pushforward_value: f64,
    pub dual_optimum: f64,
    /// `|pushforward − optimum| / optimum`.
    pub gap: f64,
}

/// Evaluates the dual ratio at the Fourier transforms of the given gaussians
/// and compares it with the dual optimum.
pub fn extremiser_pushforward_check(
    datum: &EuclideanDatum,
    a_star: &GaussianInput,
    cfg: &OptimizeConfig,
) -> Result<PushforwardReport> {
    let primal_datum = datum.clone().with_measure(MeasureConvention::Induced);
    let dual_datum = orthocomplement(&primal_datum);
    let primal_value = gaussian_bl_value(&primal_datum, a_star)?;
    let pushed = a_star.fourier_pushforward()?;
    let pushforward_value = gaussian_bl_value(&dual_datum, &pushed)?;
    let dual_optimum = optimize_gaussian(&dual_datum, cfg)?.value;
    Ok(PushforwardReport {
        primal_value,
        pushforward_value,
        dual_optimum,
        gap: (pushforward_value - dual_optimum).abs() / dual_optimum,
    })
}
