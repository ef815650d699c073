use bl_duality::discrete::{bl_constant_discrete, certify_finiteness};
use bl_duality::exact::{rat, ExactPosValue, Rational};
use bl_duality::finite::{
    ball_inequality_check, bl_constant_finite, bl_functional, bl_functional_exact, convolution_limit, convolve,
    enumerate_subgroups_nonabelian, extremiser_iteration, indicator_family, FiniteBLDatum, FiniteConfig,
    FiniteGroupTable, IterationConfig,
};
use bl_duality::io::corpus::{random_datum, CorpusParams};
use bl_duality::rankcheck::RankCheckConfig;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counts subsets closed under the group law by brute force.
fn subset_closure_count(g: &FiniteGroupTable) -> usize {
    let n = g.order();
    (0u32..1 << n)
        .filter(|mask| {
            let has = |x: usize| mask >> x & 1 == 1;
            has(g.identity())
                && (0..n).filter(|&a| has(a)).all(|a| (0..n).filter(|&b| has(b)).all(|b| has(g.mul(a, b))))
        })
        .count()
}

#[test]
fn subgroup_counts_match_subset_oracle() {
    for (name, expected) in [("Z/5", 2), ("Z/7", 2), ("S3", 6), ("Q8", 6), ("Z/6", 4), ("D4", 10), ("Z/12", 6)] {
        let g = FiniteGroupTable::named(name).unwrap();
        let subs = enumerate_subgroups_nonabelian(&g, 1000).unwrap();
        assert_eq!(subs.len(), expected, "{name}");
        if g.order() <= 12 {
            assert_eq!(subs.len(), subset_closure_count(&g), "{name}");
        }
    }
    let s4 = FiniteGroupTable::named("S4").unwrap();
    assert_eq!(enumerate_subgroups_nonabelian(&s4, 1000).unwrap().len(), 30);
    assert!(enumerate_subgroups_nonabelian(&s4, 10).is_err());
}

#[test]
fn s3_subgroup_orders() {
    let g = FiniteGroupTable::named("S3").unwrap();
    let orders: Vec<usize> = enumerate_subgroups_nonabelian(&g, 1000).unwrap().iter().map(|s| s.order()).collect();
    assert_eq!(orders, vec![1, 2, 2, 2, 3, 6]);
}

fn half_zero() -> Vec<Rational> {
    vec![rat(1, 2), Rational::zero()]
}

#[test]
fn diagonal_s3_constant_and_attainment() {
    let s3 = FiniteGroupTable::named("S3").unwrap();
    let datum = FiniteBLDatum::diagonal(&s3, half_zero()).unwrap();
    let c = bl_constant_finite(&datum, &FiniteConfig::default()).unwrap();
    let expected = ExactPosValue::power_of(2, &rat(1, 2)).mul(&ExactPosValue::power_of(3, &rat(1, 2)));
    assert_eq!(c.value, expected);
    for v in &c.maximizers {
        let fam: Vec<Vec<Rational>> = indicator_family(&datum, v)
            .into_iter()
            .map(|f| f.into_iter().map(|x| if x > 0.0 { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        assert_eq!(bl_functional_exact(&datum, &fam).unwrap(), Some(c.value.clone()));
    }
    for tuple in &c.factor_maximizers {
        let fam: Vec<Vec<Rational>> = tuple
            .iter()
            .map(|v| (0..6).map(|x| if v.contains(&x) { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        assert_eq!(bl_functional_exact(&datum, &fam).unwrap(), Some(c.value.clone()));
    }

    let ones = FiniteBLDatum::diagonal(&s3, vec![Rational::one(), Rational::one()]).unwrap();
    let c1 = bl_constant_finite(&ones, &FiniteConfig::default()).unwrap();
    assert!(c1.value.is_one());
    assert_eq!(c1.maximizers, vec![vec![0]]);
}

#[test]
fn injective_projections_with_unit_weights_give_one() {
    for name in ["Q8", "D5", "Z/9"] {
        let g = FiniteGroupTable::named(name).unwrap();
        let gens: Vec<Vec<usize>> = (0..g.order()).map(|x| vec![x, g.inv(x), x]).collect();
        let datum = FiniteBLDatum::from_generators(vec![g.clone(); 3], &gens, vec![Rational::one(); 3]).unwrap();
        assert!(bl_constant_finite(&datum, &FiniteConfig::default()).unwrap().value.is_one(), "{name}");
    }
}

#[test]
fn functional_basic_identities() {
    let g = FiniteGroupTable::named("D4").unwrap();
    let datum = FiniteBLDatum::diagonal(&g, vec![Rational::one(), Rational::one()]).unwrap();
    let ones = vec![vec![1.0; 8]; 2];
    assert!((bl_functional(&datum, &ones).unwrap() - 1.0 / 8.0).abs() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f: Vec<Vec<f64>> = (0..2).map(|_| (0..8).map(|_| rng.gen::<f64>()).collect()).collect();
    let mut scaled = f.clone();
    scaled[1].iter_mut().for_each(|x| *x *= 37.5);
    let (a, b) = (bl_functional(&datum, &f).unwrap(), bl_functional(&datum, &scaled).unwrap());
    assert!((a - b).abs() <= 1e-12 * a);
}

#[test]
fn abelian_tables_agree_with_discrete_constants() {
    let params = CorpusParams {
        max_free_rank: 0,
        ..CorpusParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 40 {
        let datum = random_datum(&mut rng, &params);
        let Ok(finite) = FiniteBLDatum::from_abelian(&datum) else {
            continue;
        };
        if finite.order() > 200 || finite.groups().iter().map(|g| g.order()).product::<usize>() > 4096 {
            continue;
        }
        let cert = certify_finiteness(&datum, &RankCheckConfig::default()).unwrap();
        let discrete = bl_constant_discrete(&datum, &cert).unwrap();
        let table = bl_constant_finite(&finite, &FiniteConfig::default()).unwrap();
        assert_eq!(discrete.value, table.value);
        assert_eq!(discrete.maximizers.len(), table.maximizers.len());
        checked += 1;
    }
}

#[test]
fn convolution_identities() {
    let g = FiniteGroupTable::named("S3").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f: Vec<f64> = (0..6).map(|_| rng.gen()).collect();
    let h: Vec<f64> = (0..6).map(|_| rng.gen()).collect();
    let mut delta = vec![0.0; 6];
    delta[g.identity()] = 1.0;
    assert_eq!(convolve(&delta, &f, &g).unwrap(), f);
    assert_eq!(convolve(&f, &delta, &g).unwrap(), f);
    let fh = convolve(&f, &h, &g).unwrap();
    let mass = |v: &[f64]| v.iter().sum::<f64>();
    assert!((mass(&fh) - mass(&f) * mass(&h)).abs() < 1e-12);
    // Orientation: (f * g)(x) = Σ_y f(y) g(x y⁻¹).
    for x in 0..6 {
        let direct: f64 = (0..6).map(|y| f[y] * h[g.mul(x, g.inv(y))]).sum();
        assert!((fh[x] - direct).abs() < 1e-15);
    }
}

#[test]
fn z6_iteration() {
    let g = FiniteGroupTable::cyclic(6).unwrap();
    let mut f = vec![0.0; 6];
    f[1] = 0.5;
    f[5] = 0.5;
    let out = convolution_limit(&g, &f, &IterationConfig::default()).unwrap();
    let expected = [1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0];
    assert_eq!(out.limit, expected);
    assert!(*out.trace.last().unwrap() <= 1e-10);
    assert!(out.effective_iterations <= 60);
}

#[test]
fn nonabelian_limit_uses_the_shifted_power() {
    // A transposition followed by a 3-cycle: the supports of the powers fill S3.
    let g = FiniteGroupTable::named("S3").unwrap();
    let transposition = (0..6).find(|&x| g.element_order(x) == 2).unwrap();
    let three_cycle = (0..6).find(|&x| g.element_order(x) == 3).unwrap();
    let mut f = vec![0.0; 6];
    f[transposition] = 0.5;
    f[three_cycle] = 0.5;
    let out = convolution_limit(&g, &f, &IterationConfig::default()).unwrap();
    assert_eq!(out.subgroup.order(), 6);
}

#[test]
fn iteration_of_an_extremiser_stays_extremal() {
    let s3 = FiniteGroupTable::named("S3").unwrap();
    let datum = FiniteBLDatum::diagonal(&s3, half_zero()).unwrap();
    let c = bl_constant_finite(&datum, &FiniteConfig::default()).unwrap();
    let fam: Vec<Vec<f64>> = c
        .extremiser(&datum)
        .into_iter()
        .map(|f| {
            let m: f64 = f.iter().sum();
            f.into_iter().map(|x| x / m).collect()
        })
        .collect();
    let out = extremiser_iteration(&datum, &fam, &IterationConfig::default()).unwrap();
    assert!((out.functional - c.value.to_f64()).abs() < 1e-12);
}

#[test]
fn ball_inequality_equality_and_uniform() {
    let s3 = FiniteGroupTable::named("S3").unwrap();
    let datum = FiniteBLDatum::diagonal(&s3, half_zero()).unwrap();
    let c = bl_constant_finite(&datum, &FiniteConfig::default()).unwrap();
    let ext = c.extremiser(&datum);
    let r = ball_inequality_check(&datum, &c, &ext, &ext, 1e-12).unwrap();
    assert!(r.ok && (r.lhs - r.rhs).abs() < 1e-9);
    let uniform = vec![vec![1.0; 6]; 2];
    let r = ball_inequality_check(&datum, &c, &uniform, &uniform, 1e-12).unwrap();
    assert!(r.ok);
}

fn nonneg(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..10.0], n)
        .prop_filter("not identically zero", |v| v.iter().any(|&x| x > 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn functional_never_exceeds_constant(f in nonneg(6), g in nonneg(6), s in 0u32..=4, t in 0u32..=4) {
        let s3 = FiniteGroupTable::named("S3").unwrap();
        let datum = FiniteBLDatum::diagonal(&s3, vec![rat(s as i64, 4), rat(t as i64, 4)]).unwrap();
        let c = bl_constant_finite(&datum, &FiniteConfig::default()).unwrap();
        let v = bl_functional(&datum, &[f.clone(), g.clone()]).unwrap();
        prop_assert!(v <= c.value.to_f64() * (1.0 + 1e-12));
        let fg = [convolve(&f, &f, &s3).unwrap(), convolve(&g, &g, &s3).unwrap()];
        prop_assert!(v * v <= c.value.to_f64() * bl_functional(&datum, &fg).unwrap() + 1e-12);
    }

    #[test]
    fn limits_are_normalized_subgroup_indicators(f in nonneg(8)) {
        let q8 = FiniteGroupTable::quaternion();
        let m: f64 = f.iter().sum();
        let f: Vec<f64> = f.iter().map(|x| x / m).collect();
        let out = convolution_limit(&q8, &f, &IterationConfig::default()).unwrap();
        let w = 1.0 / out.subgroup.order() as f64;
        for x in 0..8 {
            prop_assert_eq!(out.limit[x], if out.subgroup.contains(x) { w } else { 0.0 });
        }
        prop_assert!(out.mass_drift <= 1e-12);
    }
}
