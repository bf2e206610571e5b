//! Library results against independent brute-force computations.

use lpideal::bounds::{verify_lemma25, BasisGrowthProfile};
use lpideal::constructions::formal_identity_section;
use lpideal::khintchine::{fss_witness, khintchine_system, EquivalenceConfig, FlatSearchConfig};
use lpideal::opnorm::{opnorm_bracket, PowerIterConfig};
use lpideal::rng::{gaussian_matrix, seeded};
use lpideal::{BlockOperator, Exponent, Matrix};
use rand::Rng;
use rand_distr::StandardNormal;

fn e(p: f64) -> Exponent {
    Exponent::new(p).unwrap()
}

fn pnorm(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn apply(m: &Matrix, x: &[f64]) -> Vec<f64> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j) * x[j]).sum()).collect()
}

#[test]
fn gaussian_bracket_against_sampling() {
    let (p, q) = (1.5, 3.0);
    let m = gaussian_matrix(&mut seeded(2024), 6, 6);
    let b = opnorm_bracket(&BlockOperator::plain(m.clone(), e(p), e(q)).unwrap(), &PowerIterConfig::default()).unwrap();
    let mut rng = seeded(77);
    let mut best = 0.0f64;
    for _ in 0..1_000_000 {
        let x: Vec<f64> = (0..6).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        best = best.max(pnorm(&apply(&m, &x), q) / pnorm(&x, p));
    }
    assert!(best <= b.upper * (1.0 + 1e-9), "sampled {best} above upper {}", b.upper);
    assert!(b.lower >= best * (1.0 - 1e-6), "lower {} below sampled {best}", b.lower);
    assert!(b.lower <= b.upper);
}

#[test]
fn khintchine_constants_against_sphere_sampling() {
    let (n, p) = (4, 1.5);
    let sys = khintchine_system(n, e(p), &EquivalenceConfig::default(), &PowerIterConfig::default()).unwrap();
    let c = sys.constants().unwrap();
    let k = 1 << n;
    let mut rng = seeded(4);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..100_000 {
        let a: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        // Σ a_i x_i with x_i = 2^{-n/p}·(i-th dyadic sign pattern), built from scratch
        let x: Vec<f64> = (0..k)
            .map(|j| {
                let s: f64 = (0..n).map(|i| if (j >> (n - 1 - i)) & 1 == 0 { a[i] } else { -a[i] }).sum();
                s * (k as f64).powf(-1.0 / p)
            })
            .collect();
        let r = pnorm(&x, p) / pnorm(&a, 2.0);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    assert!(c.lo <= lo + 1e-9 && hi <= c.hi + 1e-9, "[{lo}, {hi}] not inside [{}, {}]", c.lo, c.hi);
    assert!(c.hi <= 1.0 + 1e-9);
    let big = sys.measured_c().unwrap();
    assert!(big <= 3.0, "C = {big}");
}

#[test]
fn counting_bound_holds_for_identity_when_s_within_dual_t() {
    // s = 2 ≤ t' = 3
    let m = 64;
    let t = formal_identity_section(e(1.5), e(1.5), m).unwrap();
    let t = BlockOperator::plain(t.matrix().clone(), e(2.0), e(1.5)).unwrap();
    let profile = BasisGrowthProfile::unit(2.0, 1.5).unwrap();
    let norm = (m as f64).powf(1.0 / 1.5 - 0.5);
    for rho in [0.99 / norm, 0.5 / norm, 0.1] {
        let rep = verify_lemma25(&t, rho, &profile, &PowerIterConfig::default()).unwrap();
        assert!(rep.pass, "ρ = {rho}: {} > {}", rep.lhs, rep.rhs);
    }
}

#[test]
fn counting_bound_fails_for_identity_when_s_exceeds_dual_t() {
    // s = 3 > t' = 2.25: all m columns reach ρ‖I‖ but ρ^{-κ} grows like m^{5/6}
    let m = 64;
    let t = BlockOperator::plain(Matrix::identity(m), e(3.0), e(1.8)).unwrap();
    let profile = BasisGrowthProfile::unit(3.0, 1.8).unwrap();
    let rho = 0.99 * (m as f64).powf(-(1.0 / 1.8 - 1.0 / 3.0));
    let rep = verify_lemma25(&t, rho, &profile, &PowerIterConfig::default()).unwrap();
    assert_eq!(rep.lhs, m as f64);
    assert!(!rep.pass, "{} ≤ {}", rep.lhs, rep.rhs);
}

#[test]
fn fss_equality_on_disjoint_supports() {
    let (p, q) = (1.5, 3.0);
    for n in 1..=5 {
        // rows with disjoint supports of size 2
        let basis = Matrix::from_fn(n, 2 * n, |i, j| if j / 2 == i { 1.0 + (j % 2) as f64 } else { 0.0 });
        let w = fss_witness(e(p), e(q), &basis, &FlatSearchConfig::default()).unwrap();
        let bound = (n as f64).powf(-(q - p) / (p * q));
        assert!(w.report.lhs <= bound + 1e-9);
        let identity = Matrix::identity(n);
        let w = fss_witness(e(p), e(q), &identity, &FlatSearchConfig::default()).unwrap();
        assert!((w.report.lhs - bound).abs() < 1e-9, "n={n}: {} vs {bound}", w.report.lhs);
        assert!((pnorm(&w.x, p) - 1.0).abs() < 1e-12);
    }
}
