use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::corpus::{generate_corpus, CorpusParams};
use super::datum_file::{datum_digest, int_rows_json, Datum, ParsedDatum};
use super::record::{ResultRecord, Status, ValueRecord};
use crate::abelian::{CompactSubgroup, DEFAULT_ENUMERATION_CAP};
use crate::compact::{bl_constant_compact_capped, certify_finiteness_compact, CompactVerdict};
use crate::discrete::{
    bl_constant_discrete_capped, certify_finiteness, rank_condition_check, BLDatum, FinitenessVerdict,
};
use crate::duality::{check_fourier_invariance, dualize, verify_duality, ComplexFunctionOnGroup, DualityConfig, DualityStatus};
use crate::error::{BlError, Result};
use crate::euclid::{
    finiteness_check, optimize_gaussian, orthocomplement, simplicity_check, verify_euclidean_duality, EuclideanDatum,
    EuclideanFiniteness, OptimizeConfig, SimplicityVerdict,
};
use crate::exact::Rational;
use crate::finite::{
    bl_constant_finite, extremiser_iteration, FiniteBLDatum, FiniteConfig, IterationConfig, DEFAULT_FINITE_ORDER_CAP,
};
use crate::rankcheck::RankCheckConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verb {
    Finiteness,
    Constant,
    Dual,
    VerifyDuality,
    FourierCheck,
    EuclidOptimize,
    EuclidVerify,
    FiniteConstant,
    Extremise,
    Corpus,
}

impl Verb {
    pub const ALL: [Verb; 10] = [
        Verb::Finiteness,
        Verb::Constant,
        Verb::Dual,
        Verb::VerifyDuality,
        Verb::FourierCheck,
        Verb::EuclidOptimize,
        Verb::EuclidVerify,
        Verb::FiniteConstant,
        Verb::Extremise,
        Verb::Corpus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verb::Finiteness => "finiteness",
            Verb::Constant => "constant",
            Verb::Dual => "dual",
            Verb::VerifyDuality => "verify-duality",
            Verb::FourierCheck => "fourier-check",
            Verb::EuclidOptimize => "euclid-optimize",
            Verb::EuclidVerify => "euclid-verify",
            Verb::FiniteConstant => "finite-constant",
            Verb::Extremise => "extremise",
            Verb::Corpus => "corpus",
        }
    }

    pub fn needs_datum(self) -> bool {
        self != Verb::Corpus
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verb {
    type Err = BlError;
    fn from_str(s: &str) -> Result<Self> {
        Verb::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| BlError::Parse(format!("unknown verb {s:?}")))
    }
}

/// Options shared by every verb. `None` selects the verb's default.
#[derive(Clone, Debug)]
pub struct Flags {
    pub primes: Option<Vec<u64>>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub cap_torsion: Option<u64>,
    pub cap_rank: Option<usize>,
    /// Number of corpus instances.
    pub count: usize,
    /// Number of random trials in `fourier-check`.
    pub trials: usize,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            primes: None,
            seed: 0,
            tol: None,
            cap_torsion: None,
            cap_rank: None,
            count: 100,
            trials: 20,
        }
    }
}

impl Flags {
    pub fn rank_config(&self) -> RankCheckConfig {
        let mut cfg = RankCheckConfig::default();
        if let Some(p) = &self.primes {
            cfg.primes = p.clone();
        }
        if let Some(r) = self.cap_rank {
            cfg.cap_rank = r;
        }
        cfg
    }

    pub fn duality_config(&self) -> DualityConfig {
        DualityConfig {
            rank: self.rank_config(),
            cap_torsion: self.cap_torsion.unwrap_or(DEFAULT_ENUMERATION_CAP),
        }
    }

    pub fn optimize_config(&self) -> OptimizeConfig {
        OptimizeConfig {
            seed: self.seed,
            screen: self.rank_config(),
            duality_tol: self.tol.unwrap_or(1e-3),
            ..OptimizeConfig::default()
        }
    }

    pub fn finite_config(&self) -> FiniteConfig {
        FiniteConfig {
            order_cap: self.cap_torsion.map_or(DEFAULT_FINITE_ORDER_CAP, |c| c as usize),
            ..FiniteConfig::default()
        }
    }
}

fn wrong_kind(verb: Verb, datum: &Datum) -> BlError {
    let hint = match (verb, datum) {
        (Verb::Constant | Verb::VerifyDuality, Datum::Euclidean(_)) => "; use euclid-optimize or euclid-verify",
        (Verb::Dual | Verb::VerifyDuality | Verb::FourierCheck, Datum::Finite(_)) => {
            "; finite-table data have no Fourier dual here"
        }
        _ => "",
    };
    BlError::InvalidDatum(format!("verb {verb} does not apply to a {} datum{hint}", datum.kind()))
}

/// Runs one verb. Every verb except `corpus` needs a datum.
pub fn run_command(verb: Verb, datum: Option<&ParsedDatum>, flags: &Flags) -> Result<ResultRecord> {
    let start = Instant::now();
    let mut record = if verb == Verb::Corpus {
        run_corpus(flags)?
    } else {
        let parsed = datum.ok_or_else(|| BlError::InvalidDatum(format!("verb {verb} needs a datum file")))?;
        let mut r = ResultRecord::new(verb.as_str(), parsed.datum.kind(), datum_digest(&parsed.datum)?);
        r.notes.extend(parsed.diagnostics.iter().cloned());
        match (verb, &parsed.datum) {
            (Verb::Finiteness, Datum::Discrete(d)) => discrete_finiteness(d, flags, &mut r)?,
            (Verb::Finiteness, Datum::Euclidean(d)) => euclidean_finiteness(d, flags, &mut r)?,
            (Verb::Finiteness, Datum::Finite(_)) => {
                r.verdict("finiteness", "finite");
                r.notes.push("every datum on finite groups has a finite constant".into());
            }
            (Verb::Constant, Datum::Discrete(d)) => discrete_constant(d, flags, &mut r)?,
            (Verb::Constant | Verb::FiniteConstant, Datum::Finite(d)) => finite_constant(d, flags, &mut r)?,
            (Verb::Dual, Datum::Discrete(d)) => discrete_dual(d, flags, &mut r)?,
            (Verb::Dual, Datum::Euclidean(d)) => euclidean_dual(d, &mut r)?,
            (Verb::VerifyDuality, Datum::Discrete(d)) => duality(d, flags, &mut r)?,
            (Verb::FourierCheck, Datum::Discrete(d)) => fourier(d, flags, &mut r)?,
            (Verb::EuclidOptimize, Datum::Euclidean(d)) => euclid_optimize(d, flags, &mut r)?,
            (Verb::EuclidVerify, Datum::Euclidean(d)) => euclid_verify(d, flags, &mut r)?,
            (Verb::Extremise, Datum::Finite(d)) => extremise(d, flags, &mut r)?,
            (v, d) => return Err(wrong_kind(v, d)),
        }
        r
    };
    record
        .timings_ms
        .insert("total".into(), start.elapsed().as_secs_f64() * 1e3);
    Ok(record)
}

fn rational_rows(rows: &[Vec<Rational>]) -> Value {
    json!(rows
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn discrete_verdict(v: &FinitenessVerdict) -> &'static str {
    match v {
        FinitenessVerdict::Finite => "finite",
        FinitenessVerdict::InfiniteWitness(_) => "infinite",
        FinitenessVerdict::Inconclusive => "inconclusive",
    }
}

fn compact_verdict(v: &CompactVerdict) -> &'static str {
    match v {
        CompactVerdict::Finite => "finite",
        CompactVerdict::InfiniteWitness(_) => "infinite",
        CompactVerdict::Inconclusive => "inconclusive",
    }
}

fn compact_json(s: &CompactSubgroup) -> Result<Value> {
    Ok(json!({
        "torus": int_rows_json(s.torus_lattice())?,
        "components": rational_rows(s.component_reps()),
    }))
}

fn discrete_finiteness(d: &BLDatum, flags: &Flags, r: &mut ResultRecord) -> Result<()> {
    let cfg = flags.rank_config();
    let cert = certify_finiteness(d, &cfg)?;
    r.verdict("discrete", discrete_verdict(&cert.verdict));
    if let FinitenessVerdict::InfiniteWitness(w) = &cert.verdict {
        r.detail("discrete_witness", int_rows_json(w.basis())?);
        r.detail("discrete_witness_reverified", !rank_condition_check(d, w)?);
    }
    let pair = dualize(d);
    let ccert = certify_finiteness_compact(&pair.dual_subgroup, &pair.dual_exponents, &cfg)?;
    r.verdict("compact", compact_verdict(&ccert.verdict));
    if let CompactVerdict::InfiniteWitness(w) = &ccert.verdict {
        r.detail("compact_witness", compact_json(w)?);
    }
    r.detail("primes_used", json!(cert.primes_used));
    r.notes.extend(cert.notes.iter().map(|n| format!("discrete: {n}")));
    r.notes.extend(ccert.notes.iter().map(|n| format!("compact: {n}")));
    r.status = match (cert.is_finite() || cert.is_infinite(), ccert.is_finite() || ccert.is_infinite()) {
        (true, true) if cert.is_infinite() != ccert.is_infinite() => Status::Fail,
        (true, true) => Status::Ok,
        _ => Status::Inconclusive,
    };
    Ok(())
}

fn euclidean_finiteness(d: &EuclideanDatum, flags: &Flags, r: &mut ResultRecord) -> Result<()> {
    let cfg = flags.rank_config();
    let fin = finiteness_check(d, &cfg)?;
    r.verdict(
        "finiteness",
        match &fin {
            EuclideanFiniteness::Finite => "finite",
            EuclideanFiniteness::ScalingFails => "infinite (scaling fails)",
            EuclideanFiniteness::DimensionWitness(_) => "infinite (dimension witness)",
            EuclideanFiniteness::Inconclusive => "inconclusive",
        },
    );
    if let EuclideanFiniteness::DimensionWitness(w) = &fin {
        r.detail("witness", rational_rows(w));
    }
    let simple = simplicity_check(d, &cfg)?;
    r.verdict(
        "simplicity",
        match &simple {
            SimplicityVerdict::Simple => "simple",
            SimplicityVerdict::CriticalWitness(_) => "not simple",
            SimplicityVerdict::Inconclusive => "inconclusive",
        },
    );
    if let SimplicityVerdict::CriticalWitness(w) = &simple {
        r.detail("critical_subspace", rational_rows(w));
    }
    if matches!(fin, EuclideanFiniteness::Inconclusive) {
        r.status = Status::Inconclusive;
    }
    Ok(())
}

fn discrete_constant(d: &BLDatum, flags: &Flags, r: &mut ResultRecord) -> Result<()> {
    let cfg = flags.duality_config();
    let cert = certify_finiteness(d, &cfg.rank)?;
    r.verdict("finiteness", discrete_verdict(&cert.verdict));
    r.notes.extend(cert.notes.iter().cloned());
    if !cert.is_finite() && !cert.is_infinite() {
        r.status = Status::Inconclusive;
        return Ok(());
    }
    let c = bl_constant_discrete_capped(d, &cert, cfg.cap_torsion)?;
    r.value("constant", ValueRecord::exact(&c.value));
    for m in &c.maximizers {
        r.maximizers.push(int_rows_json(m.basis())?);
    }
    Ok(())
}

fn discrete_dual(d: &BLDatum, flags: &Flags, r: &mut ResultRecord) -> Result<()> {
    let cfg = flags.duality_config();
    let pair = dualize(d);
    r.detail("annihilator", compact_json(&pair.dual_subgroup)?);
    r.detail("dual_exponents", json!(pair.dual_exponents.iter().map(|p| p.to_string()).collect::<Vec<_>>()));
    let cert = certify_finiteness_compact(&pair.dual_subgroup, &pair.dual_exponents, &cfg.rank)?;
    r.verdict("finiteness", compact_verdict(&cert.verdict));
    r.notes.extend(cert.notes.iter().cloned());
    if !cert.is_finite() && !cert.is_infinite() {
        r.status = Status::Inconclusive;
        return Ok(());
    }
    let c = bl_constant_compact_capped(&pair.dual_subgroup, &pair.dual_exponents, &cert, cfg.cap_torsion)?;
    r.value("constant", ValueRecord::exact(&c.value));
    for m in &c.maximizers {
        r.maximizers.push(int_rows_json(m.basis())?);
    }
    r.detail(
        "component_group",
        json!(c.components.group.invariant_factors().iter().map(|x| x.to_string()).collect::<Vec<_>>()),
    );
    Ok(())
}

fn euclidean_dual(d: &EuclideanDatum, r: &mut ResultRecord) -> Result<()> {
    let perp = orthocomplement(d);
    r.detail("dual_basis", rational_rows(perp.basis()));
    r.detail("dual_exponents", json!(perp.exponents().iter().map(|p| p.to_string()).collect::<Vec<_>>()));
    Ok(())
}

fn duality(d: &BLDatum, flags: &Flags, r: &mut ResultRecord) -> Result<()> {
    let rep = verify_duality(d, &flags.duality_config())?;
    r.verdict("discrete", discrete_verdict(&rep.discrete_certificate.verdict));
    r.verdict("compact", compact_verdict(&rep.compact_certificate.verdict));
    if let Some(v) = rep.discrete_value() {
        r.value("discrete", ValueRecord::exact(v));
    }
    if let Some(v) = rep.compact_value() {
        r.value("compact", ValueRecord::exact(v));
    }
    if let FinitenessVerdict::InfiniteWitness(w) = &rep.discrete_certificate.verdict {
        r.detail("discrete_witness_reverified", !rank_condition_check(d, w)?);
    }
    r.notes.extend(rep.notes.iter().cloned());
    r.status = match rep.status {
        DualityStatus::Pass => Status::Pass,
        DualityStatus::Fail => Status::Fail,
        DualityStatus::Inconclusive => Status::Inconclusive,
    };
    Ok(())
}

fn fourier(d: &BLDatum, flags: &Flags, r: &mut ResultRecord) -> Result<()> {
    let tol = flags.tol.unwrap_or(1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(flags.seed);
    let mut worst = 0.0f64;
    for _ in 0..flags.trials {
        let fs = d
            .groups()
            .iter()
            .map(|g| {
                let n = g
                    .order()
                    .and_then(|o| u64::try_from(o).ok())
                    .ok_or_else(|| BlError::InvalidGroup("the Fourier check needs finite groups".into()))?;
                let values = (0..n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                ComplexFunctionOnGroup::new(g.clone(), values)
            })
            .collect::<Result<Vec<_>>>()?;
        let scale: f64 = fs.iter().map(|f| f.l1_norm()).product();
        let check = check_fourier_invariance(d.subgroup(), &fs)?;
        worst = worst.max(check.abs_diff / scale);
    }
    r.detail("trials", flags.trials);
    r.detail("max_relative_difference", worst);
    r.detail("tolerance", tol);
    r.status = if worst <= tol { Status::Pass } else { Status::Fail };
    Ok(())
}

fn matrices_json(mats: &[nalgebra::DMatrix<f64>]) -> Value {
    json!(mats
        .iter()
        .map(|m| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn euclid_optimize(d: &EuclideanDatum, flags: &Flags, r: &mut ResultRecord) -> Result<()> {
    let out = optimize_gaussian(d, &flags.optimize_config())?;
    r.value("constant", ValueRecord::approximate(out.value));
    r.verdict("converged", out.converged.to_string());
    r.detail("converged_restarts", out.converged_restarts);
    r.detail("restart_values", json!(out.restart_values));
    r.detail("iterations", out.iterations);
    if let Some(a) = &out.argmax {
        r.detail("argmax", matrices_json(a.matrices()));
    }
    if !out.converged {
        r.status = Status::Inconclusive;
    }
    Ok(())
}

fn euclid_verify(d: &EuclideanDatum, flags: &Flags, r: &mut ResultRecord) -> Result<()> {
    let cfg = flags.optimize_config();
    let rep = verify_euclidean_duality(d, &cfg)?;
    r.value("primal", ValueRecord::approximate(rep.primal.value));
    r.value("dual", ValueRecord::approximate(rep.dual.value));
    r.value("duality_factor", ValueRecord::approximate(rep.becks));
    if let Some(g) = rep.gap {
        r.detail("relative_gap", g);
    }
    r.detail("tolerance", cfg.duality_tol);
    r.verdict("converged", rep.converged.to_string());
    r.status = if rep.pass {
        Status::Pass
    } else if !rep.converged {
        Status::Inconclusive
    } else {
        Status::Fail
    };
    Ok(())
}

fn finite_constant(d: &FiniteBLDatum, flags: &Flags, r: &mut ResultRecord) -> Result<()> {
    let c = bl_constant_finite(d, &flags.finite_config())?;
    r.value("constant", ValueRecord::exact(&c.value));
    for v in &c.maximizers {
        r.maximizers.push(json!(v.iter().map(|&h| &d.elements()[h]).collect::<Vec<_>>()));
    }
    r.detail("factor_maximizers", json!(c.factor_maximizers));
    r.detail("subgroups_examined", c.subgroups_examined);
    r.detail("tuples_examined", c.tuples_examined);
    Ok(())
}

fn normalized(f: Vec<f64>) -> Vec<f64> {
    let m: f64 = f.iter().sum();
    f.into_iter().map(|x| x / m).collect()
}

fn extremise(d: &FiniteBLDatum, flags: &Flags, r: &mut ResultRecord) -> Result<()> {
    let tol = flags.tol.unwrap_or(1e-9);
    let c = bl_constant_finite(d, &flags.finite_config())?;
    let best = c.value.to_f64();
    r.value("constant", ValueRecord::exact(&c.value));
    let cfg = IterationConfig::default();

    let mut rng = ChaCha8Rng::seed_from_u64(flags.seed);
    let start: Vec<Vec<f64>> = d
        .groups()
        .iter()
        .map(|g| {
            let mut f: Vec<f64> = (0..g.order())
                .map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.1..1.0) } else { 0.0 })
                .collect();
            if f.iter().all(|&x| x == 0.0) {
                f[rng.gen_range(0..g.order())] = 1.0;
            }
            normalized(f)
        })
        .collect();
    let random = extremiser_iteration(d, &start, &cfg)?;
    let ext: Vec<Vec<f64>> = c.extremiser(d).into_iter().map(normalized).collect();
    let from_ext = extremiser_iteration(d, &ext, &cfg)?;

    r.value("random_start_limit", ValueRecord::approximate(random.functional));
    r.value("extremiser_limit", ValueRecord::approximate(from_ext.functional));
    let factors: Vec<Value> = random
        .factors
        .iter()
        .map(|f| {
            json!({
                "base_point": f.base_point,
                "period": f.period,
                "subgroup": f.subgroup.elements(),
                "iterations": f.iterations,
                "effective_iterations": f.effective_iterations,
                "final_distance": f.trace.last().copied().unwrap_or(0.0),
                "mass_drift": f.mass_drift,
            })
        })
        .collect();
    r.detail("random_start", json!(start));
    r.detail("factors", json!(factors));
    let ok = random.functional <= best + tol && (from_ext.functional - best).abs() <= tol;
    r.status = if ok { Status::Pass } else { Status::Fail };
    Ok(())
}

fn run_corpus(flags: &Flags) -> Result<ResultRecord> {
    let params = CorpusParams::default();
    let data = generate_corpus(flags.seed, flags.count, &params);
    let cfg = flags.duality_config();
    let records = data
        .par_iter()
        .map(|d| {
            let parsed = ParsedDatum {
                datum: Datum::Discrete(d.clone()),
                diagnostics: Vec::new(),
            };
            let start = Instant::now();
            let mut r = ResultRecord::new(Verb::VerifyDuality.as_str(), "discrete", datum_digest(&parsed.datum)?);
            duality(d, flags, &mut r)?;
            r.timings_ms.insert("total".into(), start.elapsed().as_secs_f64() * 1e3);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let _ = cfg;
    let mut hasher = Sha256::new();
    for r in &records {
        hasher.update(r.input_digest.as_bytes());
    }
    let mut out = ResultRecord::new(Verb::Corpus.as_str(), "discrete", hex::encode(hasher.finalize()));
    let count = |s: Status| records.iter().filter(|r| r.status == s).count();
    let (pass, fail, inconclusive) = (count(Status::Pass), count(Status::Fail), count(Status::Inconclusive));
    out.detail("seed", flags.seed);
    out.detail("count", records.len());
    out.detail("pass", pass);
    out.detail("fail", fail);
    out.detail("inconclusive", inconclusive);
    out.detail("records", serde_json::to_value(&records).expect("records serialize"));
    out.status = if fail == 0 { Status::Pass } else { Status::Fail };
    Ok(out)
}
