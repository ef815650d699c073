use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::abelian::FgAbGroup;
use crate::discrete::BLDatum;
use crate::euclid::{finiteness_check, simplicity_check, EuclideanDatum, EuclideanFiniteness, SimplicityVerdict};
use crate::exact::{rat, rat_int, ExtRational, Rational};
use crate::intmat::Int;
use crate::rankcheck::RankCheckConfig;

#[derive(Clone, Debug)]
pub struct CorpusParams {
    pub max_factors: usize,
    pub max_free_rank: usize,
    pub max_torsion: u64,
    pub max_generators: usize,
    pub max_denominator: i64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            max_factors: 3,
            max_free_rank: 3,
            max_torsion: 64,
            max_generators: 4,
            max_denominator: 64,
        }
    }
}

fn random_exponent(rng: &mut ChaCha8Rng, max_den: i64) -> ExtRational {
    match rng.gen_range(0..10) {
        0 => ExtRational::Infinity,
        1 => ExtRational::one(),
        2 => ExtRational::integer(2).expect("valid"),
        _ => {
            let den = rng.gen_range(1..=max_den.min(8));
            let num = den + rng.gen_range(0..=3 * den);
            ExtRational::from_ratio(num, den).expect("at least one")
        }
    }
}

fn random_torsion(rng: &mut ChaCha8Rng, budget: &mut u64) -> Vec<u64> {
    let mut moduli = Vec::new();
    for _ in 0..2 {
        if rng.gen_bool(0.5) {
            let choices: Vec<u64> = (2..=6).filter(|d| *d <= *budget).collect();
            if choices.is_empty() {
                break;
            }
            let d = choices[rng.gen_range(0..choices.len())];
            *budget /= d;
            moduli.push(d);
        }
    }
    moduli
}

/// One random discrete datum; the same seed always yields the same datum.
pub fn random_datum(rng: &mut ChaCha8Rng, params: &CorpusParams) -> BLDatum {
    let m = rng.gen_range(1..=params.max_factors);
    let mut budget = params.max_torsion;
    let mut groups = Vec::with_capacity(m);
    for _ in 0..m {
        let free = rng.gen_range(0..=params.max_free_rank);
        let tors = random_torsion(rng, &mut budget);
        let moduli: Vec<Int> = tors.iter().map(|&d| Int::from(d)).collect();
        let (g, _) = FgAbGroup::from_cyclic_factors(free, &moduli).expect("valid moduli");
        groups.push(g);
    }
    let dim: usize = groups.iter().map(FgAbGroup::ngens).sum();
    let ngens = rng.gen_range(0..=params.max_generators);
    let gens: Vec<Vec<Int>> = (0..ngens)
        .map(|_| (0..dim).map(|_| Int::from(rng.gen_range(-2i64..=2))).collect())
        .collect();
    let exps = (0..m).map(|_| random_exponent(rng, params.max_denominator)).collect();
    BLDatum::from_generators(groups, &gens, exps).expect("generated datum is valid")
}

pub fn generate_corpus(seed: u64, count: usize, params: &CorpusParams) -> Vec<BLDatum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_datum(&mut rng, params)).collect()
}

/// A random rational euclidean datum with exponents in `(1, ∞)` that is
/// certified finite and simple.
pub fn random_simple_euclidean(rng: &mut ChaCha8Rng, max_factors: usize, max_factor_dim: usize) -> EuclideanDatum {
    let cfg = RankCheckConfig::default();
    loop {
        let m = rng.gen_range(2..=max_factors.max(2));
        let dims: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=max_factor_dim.max(1))).collect();
        let n: usize = dims.iter().sum();
        let d = rng.gen_range(1..n);
        let basis: Vec<Vec<Rational>> = (0..d)
            .map(|_| (0..n).map(|_| rat_int(rng.gen_range(-2i64..=2))).collect())
            .collect();
        let mut weights: Vec<Rational> = (0..m - 1)
            .map(|_| {
                let den = rng.gen_range(2i64..=6);
                rat(rng.gen_range(1..den), den)
            })
            .collect();
        let used: Rational = weights
            .iter()
            .zip(&dims)
            .map(|(w, &nj)| w * rat_int(nj as i64))
            .sum();
        let last = (rat_int(d as i64) - used) / rat_int(dims[m - 1] as i64);
        if last <= rat_int(0) || last >= rat_int(1) {
            continue;
        }
        weights.push(last);
        let exps = weights
            .iter()
            .map(|w| ExtRational::from_reciprocal(w).expect("weight in (0, 1)"))
            .collect();
        let Ok(datum) = EuclideanDatum::new(dims, basis, exps) else {
            continue;
        };
        if finiteness_check(&datum, &cfg).ok() == Some(EuclideanFiniteness::Finite)
            && simplicity_check(&datum, &cfg).ok() == Some(SimplicityVerdict::Simple)
        {
            return datum;
        }
    }
}

pub fn generate_simple_euclidean(seed: u64, count: usize) -> Vec<EuclideanDatum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_simple_euclidean(&mut rng, 3, 2)).collect()
}
