use std::time::Instant;

use bl_duality::euclid::{
    build_diagonal, build_gowers, build_young, dual_witness_subspace, extremiser_pushforward_check,
    gaussian_bl_value, optimize_gaussian, orthocomplement, simplicity_check, verify_euclidean_duality,
    finiteness_check, EuclideanDatum, EuclideanFiniteness, GaussianInput, OptimizeConfig, SimplicityVerdict,
};
use bl_duality::exact::{rat_int, ExtRational, Rational};
use bl_duality::io::corpus::generate_simple_euclidean;
use bl_duality::rankcheck::RankCheckConfig;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(s: &str) -> ExtRational {
    s.parse().unwrap()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Adaptive quadrature over `[-L, L]^dim` for `dim ≤ 2`.
fn integrate(f: &dyn Fn(&[f64]) -> f64, dim: usize, half_width: f64) -> f64 {
    match dim {
        0 => f(&[]),
        1 => simpson(&|x| f(&[x]), -half_width, half_width, 1e-12),
        2 => simpson(
            &|x| simpson(&|y| f(&[x, y]), -half_width, half_width, 1e-12),
            -half_width,
            half_width,
            1e-11,
        ),
        _ => unreachable!(),
    }
}

/// The gaussian ratio by direct quadrature of the numerator and each norm.
fn quadrature_ratio(datum: &EuclideanDatum, input: &GaussianInput) -> f64 {
    let n = datum.ambient_dim();
    let d = datum.dim();
    let b = DMatrix::from_fn(n, d, |i, k| {
        use num_traits::ToPrimitive;
        datum.basis()[k][i].to_f64().unwrap()
    });
    let blocks = datum.blocks();
    let mats = input.matrices();
    let integrand = |t: &[f64]| {
        let x = &b * DVector::from_column_slice(t);
        let mut e = 0.0;
        for (r, a) in blocks.iter().zip(mats) {
            let xj = x.rows(r.start, r.len()).into_owned();
            e += (xj.transpose() * a * &xj)[(0, 0)];
        }
        (-std::f64::consts::PI * e).exp()
    };
    let jac = (b.transpose() * &b).determinant().sqrt();
    let numerator = integrate(&integrand, d, 8.0) * jac;
    let mut denom = 1.0;
    for (j, a) in mats.iter().enumerate() {
        let pj = datum.exponents()[j].to_f64();
        if pj.is_infinite() {
            continue;
        }
        let nj = a.nrows();
        let g = |x: &[f64]| {
            let v = DVector::from_column_slice(x);
            (-std::f64::consts::PI * pj * (v.transpose() * a * &v)[(0, 0)]).exp()
        };
        denom *= integrate(&g, nj, 8.0).powf(1.0 / pj);
    }
    numerator / denom
}

#[test]
fn closed_form_matches_quadrature() {
    let cases: Vec<(EuclideanDatum, GaussianInput)> = vec![
        (
            build_diagonal(1, &[p("2"), p("2")]).unwrap(),
            GaussianInput::from_scalars(&[1, 1], &[1.0, 1.0]).unwrap(),
        ),
        (
            build_diagonal(1, &[p("3"), p("3/2")]).unwrap(),
            GaussianInput::from_scalars(&[1, 1], &[0.7, 1.9]).unwrap(),
        ),
        (
            build_young(1, &[p("3/2"), p("3/2"), p("3/2")]).unwrap(),
            GaussianInput::from_scalars(&[1, 1, 1], &[1.0, 2.0, 0.5]).unwrap(),
        ),
        (
            EuclideanDatum::from_i64_basis(vec![2, 1], &[&[1, 0, 1], &[0, 1, 2]], vec![p("4/3"), p("5")]).unwrap(),
            GaussianInput::new(vec![
                DMatrix::from_row_slice(2, 2, &[1.5, 0.3, 0.3, 0.8]),
                DMatrix::from_row_slice(1, 1, &[1.2]),
            ])
            .unwrap(),
        ),
        (
            EuclideanDatum::from_i64_basis(vec![2, 2], &[&[1, 0, 2, -1]], vec![p("2"), p("inf")]).unwrap(),
            GaussianInput::new(vec![
                DMatrix::from_row_slice(2, 2, &[2.0, -0.4, -0.4, 1.0]),
                DMatrix::from_row_slice(2, 2, &[0.6, 0.1, 0.1, 0.9]),
            ])
            .unwrap(),
        ),
    ];
    for (datum, input) in &cases {
        let closed = gaussian_bl_value(datum, input).unwrap();
        let quad = quadrature_ratio(datum, input);
        assert!((closed - quad).abs() <= 1e-6 * closed, "closed {closed} vs quadrature {quad}");
    }
    let (d, a) = &cases[0];
    assert!((gaussian_bl_value(d, a).unwrap() - 2f64.sqrt()).abs() < 1e-14);
}

#[test]
fn ratio_is_scale_invariant_under_scaling_condition() {
    let d = build_young(1, &[p("3/2"), p("3/2"), p("3/2")]).unwrap();
    let a = GaussianInput::from_scalars(&[1, 1, 1], &[1.0, 2.0, 0.5]).unwrap();
    let b = GaussianInput::from_scalars(&[1, 1, 1], &[3.0, 6.0, 1.5]).unwrap();
    let (va, vb) = (gaussian_bl_value(&d, &a).unwrap(), gaussian_bl_value(&d, &b).unwrap());
    assert!((va - vb).abs() < 1e-12 * va);
}

#[test]
fn fubini_ratio_is_one() {
    let d = EuclideanDatum::from_i64_basis(vec![1, 2], &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]], vec![p("1"), p("1")])
        .unwrap();
    let a = GaussianInput::new(vec![
        DMatrix::from_row_slice(1, 1, &[3.0]),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]),
    ])
    .unwrap();
    assert!((gaussian_bl_value(&d, &a).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn diagonal_optimum_is_sqrt_two() {
    let d = build_diagonal(1, &[p("2"), p("2")]).unwrap();
    let opt = optimize_gaussian(&d, &OptimizeConfig::default()).unwrap();
    assert!(opt.converged);
    assert!((opt.value - 2f64.sqrt()).abs() < 1e-6, "{}", opt.value);
    let at_identity = gaussian_bl_value(&d, &GaussianInput::identity(&[1, 1])).unwrap();
    assert!(at_identity <= opt.value + 1e-12);
}

#[test]
fn gowers_constant() {
    let start = Instant::now();
    let d = build_gowers(2, &vec![p("4/3"); 4]).unwrap();
    let opt = optimize_gaussian(&d, &OptimizeConfig::default()).unwrap();
    let target = 4.0 / 3f64.powf(1.5);
    assert!(opt.converged);
    assert!((opt.value - target).abs() < 1e-4, "{} vs {target}", opt.value);
    assert!(start.elapsed().as_secs_f64() < 30.0);
    let push = extremiser_pushforward_check(&d, opt.argmax.as_ref().unwrap(), &OptimizeConfig::default()).unwrap();
    assert!(push.gap <= 1e-3, "{push:?}");
}

/// Fixed-point iteration for one-dimensional factors: at a critical point
/// `a_j · p_j · b_j M(a)⁻¹ b_jᵀ = 1`.
fn fixed_point_oracle(datum: &EuclideanDatum) -> f64 {
    use num_traits::ToPrimitive;
    let n = datum.ambient_dim();
    let d = datum.dim();
    let b = DMatrix::from_fn(n, d, |i, k| datum.basis()[k][i].to_f64().unwrap());
    let ps: Vec<f64> = datum.exponents().iter().map(|e| e.to_f64()).collect();
    let mut a = vec![1.0; n];
    for _ in 0..20_000 {
        let mut m = DMatrix::zeros(d, d);
        for j in 0..n {
            let row = b.row(j);
            m += row.transpose() * row * a[j];
        }
        let minv = m.try_inverse().unwrap();
        let next: Vec<f64> = (0..n)
            .map(|j| {
                let row = b.row(j);
                1.0 / (ps[j] * (row * &minv * row.transpose())[(0, 0)])
            })
            .collect();
        let done = next.iter().zip(&a).all(|(x, y)| ((x - y) / y).abs() < 1e-14);
        a = next;
        if done {
            break;
        }
    }
    gaussian_bl_value(datum, &GaussianInput::from_scalars(&vec![1; n], &a).unwrap()).unwrap()
}

#[test]
fn young_matches_fixed_point_oracle() {
    let d = build_young(1, &[p("3/2"), p("3/2"), p("3/2")]).unwrap();
    let oracle = fixed_point_oracle(&d);
    let opt = optimize_gaussian(&d, &OptimizeConfig::default()).unwrap();
    assert!((opt.value - oracle).abs() < 1e-5, "{} vs {oracle}", opt.value);
    // With the induced measure on {x + y + z = 0} the sharp constant is 3/2.
    assert!((oracle - 1.5).abs() < 1e-9);
    let d = build_young(1, &[p("5/4"), p("5/3"), p("5/3")]).unwrap();
    let opt = optimize_gaussian(&d, &OptimizeConfig::default()).unwrap();
    assert!((opt.value - fixed_point_oracle(&d)).abs() < 1e-5);
}

#[test]
fn duality_on_examples() {
    let cfg = OptimizeConfig::default();
    let d = build_diagonal(1, &[p("2"), p("2")]).unwrap();
    let r = verify_euclidean_duality(&d, &cfg).unwrap();
    assert!(r.pass && r.gap.unwrap() < 1e-9, "{r:?}");
    let fubini = EuclideanDatum::from_i64_basis(vec![1, 1], &[&[1, 0], &[0, 1]], vec![p("1"), p("1")]).unwrap();
    let r = verify_euclidean_duality(&fubini, &cfg).unwrap();
    assert!(r.pass);
    assert!((r.primal.value - 1.0).abs() < 1e-12 && (r.dual.value - 1.0).abs() < 1e-12);
    let push = extremiser_pushforward_check(&d, &GaussianInput::identity(&[1, 1]), &cfg).unwrap();
    assert!(push.gap < 1e-9);
    let push = extremiser_pushforward_check(&fubini, &GaussianInput::from_scalars(&[1, 1], &[2.0, 0.3]).unwrap(), &cfg)
        .unwrap();
    assert!((push.pushforward_value - 1.0).abs() < 1e-12);
}

#[test]
fn duality_on_random_simple_data() {
    let cfg = OptimizeConfig::default();
    let data = generate_simple_euclidean(5, 20);
    let mut converged = 0;
    for d in &data {
        let r = verify_euclidean_duality(d, &cfg).unwrap();
        if r.converged {
            converged += 1;
            assert!(r.gap.is_some_and(|g| g <= 1e-3), "{d:?}: {r:?}");
        }
    }
    assert!(converged >= 18, "{converged}/20 converged");
}

fn random_subspace(rng: &mut ChaCha8Rng, span: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    let k = rng.gen_range(0..=span.len());
    (0..k)
        .map(|_| {
            let mut v = vec![rat_int(0); n];
            for s in span {
                let c = rat_int(rng.gen_range(-2i64..=2));
                for (x, y) in v.iter_mut().zip(s) {
                    *x += &c * y;
                }
            }
            v
        })
        .collect()
}

#[test]
fn witness_bounds_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let m = rng.gen_range(1..=3);
        let dims: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=2)).collect();
        let n: usize = dims.iter().sum();
        let d = rng.gen_range(0..=n);
        let basis: Vec<Vec<Rational>> = (0..d)
            .map(|_| (0..n).map(|_| rat_int(rng.gen_range(-2i64..=2))).collect())
            .collect();
        let Ok(datum) = EuclideanDatum::new(dims, basis, vec![p("2"); m]) else {
            continue;
        };
        let perp = orthocomplement(&datum);
        let w = random_subspace(&mut rng, perp.basis(), n);
        let r = dual_witness_subspace(&datum, &w).unwrap();
        assert!(r.global_ok && r.local_ok, "{r:?}");
    }
}

/// Random data obeying the scaling identity with exponents in `(1, ∞)`.
fn random_scaling_datum(rng: &mut ChaCha8Rng) -> Option<EuclideanDatum> {
    let m = rng.gen_range(2..=3);
    let dims: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=2)).collect();
    let n: usize = dims.iter().sum();
    let d = rng.gen_range(1..n);
    let basis: Vec<Vec<Rational>> = (0..d)
        .map(|_| (0..n).map(|_| rat_int(rng.gen_range(-1i64..=1))).collect())
        .collect();
    let mut weights: Vec<Rational> = (0..m - 1)
        .map(|_| {
            let den = rng.gen_range(2i64..=4);
            Rational::new(rng.gen_range(1..den).into(), den.into())
        })
        .collect();
    let used: Rational = weights.iter().zip(&dims).map(|(w, &k)| w * rat_int(k as i64)).sum();
    let last = (rat_int(d as i64) - used) / rat_int(dims[m - 1] as i64);
    if last <= rat_int(0) || last >= rat_int(1) {
        return None;
    }
    weights.push(last);
    let exps = weights.iter().map(|w| ExtRational::from_reciprocal(w).unwrap()).collect();
    EuclideanDatum::new(dims, basis, exps).ok()
}

#[test]
fn simplicity_is_preserved_by_duality() {
    let cfg = RankCheckConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut simple, mut critical, mut inconclusive) = (0, 0, 0);
    for _ in 0..400 {
        let Some(datum) = random_scaling_datum(&mut rng) else {
            continue;
        };
        if finiteness_check(&datum, &cfg).unwrap() != EuclideanFiniteness::Finite {
            continue;
        }
        let primal = simplicity_check(&datum, &cfg).unwrap();
        let dual = simplicity_check(&orthocomplement(&datum), &cfg).unwrap();
        match (&primal, &dual) {
            (SimplicityVerdict::Simple, SimplicityVerdict::Simple) => simple += 1,
            (SimplicityVerdict::CriticalWitness(_), SimplicityVerdict::CriticalWitness(_)) => critical += 1,
            (SimplicityVerdict::Inconclusive, _) | (_, SimplicityVerdict::Inconclusive) => inconclusive += 1,
            _ => panic!("{datum:?}: {primal:?} vs {dual:?}"),
        }
    }
    eprintln!("simple {simple}, critical {critical}, inconclusive {inconclusive}");
    assert!(simple > 0 && critical > 0);
}
