//! Rademacher systems inside `ℓp(2ⁿ)`, their measured Khintchine constants,
//! and the flat-vector search behind finite strict singularity of `ℓp → ℓq`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, Exponent};
use crate::matrix::Matrix;
use crate::operator::BlockOperator;
use crate::opnorm::{opnorm_bracket, power_iterate, restart_vector, NormBracket, PowerIterConfig};
use crate::report::{digest_f64s, BoundReport};
use crate::rng::{gaussian_vec, SeedTree};

/// Largest `2ⁿ` for which the dense projection is materialized.
pub const SYSTEM_DIM_CAP: usize = 2048;

/// `r_i(j) = (−1)^{⌊j / 2^{n−i}⌋}` for `j = 0, …, 2ⁿ − 1`, `1 ≤ i ≤ n`.
pub fn rademacher_signs(n: usize, i: usize) -> Result<Vec<i8>> {
    if i < 1 || i > n {
        return Err(Error::Domain(format!("Rademacher index {i} outside 1..={n}")));
    }
    if n > 30 {
        return Err(Error::Capacity(format!("2^{n} coordinates")));
    }
    let shift = n - i;
    Ok((0..1usize << n).map(|j| if (j >> shift) & 1 == 0 { 1 } else { -1 }).collect())
}

pub fn rademacher_vector(n: usize, i: usize) -> Result<Vec<f64>> {
    Ok(rademacher_signs(n, i)?.into_iter().map(f64::from).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConstants {
    /// min of `‖Σ aᵢ xᵢ‖_p` over `‖a‖₂ = 1` (estimated from above)
    pub lo: f64,
    /// max of `‖Σ aᵢ xᵢ‖_p` over `‖a‖₂ = 1` (estimated from below)
    pub hi: f64,
    pub projection: NormBracket,
    pub measured_c: f64,
}

/// `x_i = 2^{−n/p} r_i`, `x*_i = 2^{−n/p′} r_i` and `P = Σ x_i ⊗ x*_i` in `ℓp(2ⁿ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KhintchineSystem {
    n: usize,
    p: Exponent,
    signs: Vec<Vec<i8>>,
    vectors: Matrix,
    duals: Matrix,
    constants: Option<SystemConstants>,
}

impl KhintchineSystem {
    /// The system without measured constants.
    pub fn new(n: usize, p: Exponent) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("Khintchine systems need n ≥ 1".into()));
        }
        if n > 11 || (1usize << n) > SYSTEM_DIM_CAP {
            return Err(Error::Capacity(format!("2^{n} exceeds the system cap {SYSTEM_DIM_CAP}")));
        }
        let signs: Vec<Vec<i8>> = (1..=n).map(|i| rademacher_signs(n, i)).collect::<Result<_>>()?;
        let k = 1usize << n;
        let sx = 2f64.powf(-(n as f64) * p.reciprocal());
        let sd = 2f64.powf(-(n as f64) * p.dual().reciprocal());
        let vectors = Matrix::from_fn(n, k, |i, j| sx * signs[i][j] as f64);
        let duals = Matrix::from_fn(n, k, |i, j| sd * signs[i][j] as f64);
        Ok(KhintchineSystem { n, p, signs, vectors, duals, constants: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn k(&self) -> usize {
        1 << self.n
    }

    /// Rows are `x_{(n,i)}`.
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    /// Rows are `x*_{(n,i)}`.
    pub fn duals(&self) -> &Matrix {
        &self.duals
    }

    pub fn constants(&self) -> Option<&SystemConstants> {
        self.constants.as_ref()
    }

    pub fn measured_c(&self) -> Option<f64> {
        self.constants.as_ref().map(|c| c.measured_c)
    }

    /// `⟨x*_i, x_j⟩` from the integer product `⟨r_i, r_j⟩` scaled by `2^{−n}`;
    /// exact in floating point. Indices are 1-based.
    pub fn pairing(&self, i: usize, j: usize) -> f64 {
        let dot: i64 = self.signs[i - 1].iter().zip(&self.signs[j - 1]).map(|(a, b)| (*a as i64) * (*b as i64)).sum();
        dot as f64 / self.k() as f64
    }

    /// `P = 2^{−n} Σ r_i r_iᵀ`, dense `2ⁿ × 2ⁿ`.
    pub fn projection(&self) -> Matrix {
        let k = self.k();
        let scale = 1.0 / k as f64;
        Matrix::from_fn(k, k, |a, b| {
            let s: i32 = self.signs.iter().map(|r| (r[a] * r[b]) as i32).sum();
            s as f64 * scale
        })
    }

    pub fn projection_operator(&self) -> BlockOperator {
        BlockOperator::plain(self.projection(), self.p, self.p).expect("square projection")
    }

    /// `a ↦ Σ aᵢ x_i`, as a `2ⁿ × n` matrix.
    pub fn synthesis(&self) -> Matrix {
        self.vectors.transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceConfig {
    pub samples: usize,
    pub refine_iters: usize,
    pub seed: u64,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        EquivalenceConfig { samples: 2000, refine_iters: 200, seed: 0 }
    }
}

fn unit2(mut a: Vec<f64>) -> Vec<f64> {
    let n = lp::norm(&a, Exponent::TWO);
    if n > 0.0 {
        a.iter_mut().for_each(|v| *v /= n);
    }
    a
}

/// Equivalence constants `(lo, hi)` of `(x_i)` against the `ℓ₂(n)` basis.
///
/// Candidates are the basis vectors, all `(e_i ± e_j)/√2`, the normalized
/// constant vector and seeded Gaussian directions; the minimum is refined by
/// projected gradient descent on the sphere and the maximum by power
/// iteration of `ℓ₂ → ℓp`.
pub fn equivalence_constants(sys: &KhintchineSystem, cfg: &EquivalenceConfig) -> (f64, f64) {
    let g = sys.synthesis();
    let n = sys.n();
    let p = sys.p();
    let f = |a: &[f64]| lp::norm(&g.mul_vec(a), p) / lp::norm(a, Exponent::TWO);

    let mut cands: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        cands.push(e);
        for j in i + 1..n {
            for s in [1.0, -1.0] {
                let mut a = vec![0.0; n];
                a[i] = 1.0;
                a[j] = s;
                cands.push(unit2(a));
            }
        }
    }
    cands.push(unit2(vec![1.0; n]));
    let seeds = SeedTree::new(cfg.seed);
    for s in 0..cfg.samples {
        cands.push(unit2(gaussian_vec(&mut seeds.rng("khintchine-sample", s as u64), n)));
    }

    let vals: Vec<f64> = cands.iter().map(|a| f(a)).collect();
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&x, &y| vals[x].total_cmp(&vals[y]).then(x.cmp(&y)));
    let mut lo = vals[order[0]];
    let mut hi = vals[*order.last().expect("nonempty")];

    for &start in order.iter().take(4) {
        lo = lo.min(descend(&g, p, &cands[start], cfg.refine_iters));
    }

    let op = BlockOperator::plain(g.clone(), Exponent::TWO, p).expect("synthesis shape");
    let pcfg = PowerIterConfig { max_iters: cfg.refine_iters.max(1), ..PowerIterConfig::default() };
    for r in 0..4 {
        hi = hi.max(power_iterate(&op, &restart_vector(n, r, cfg.seed), &pcfg).value);
    }
    hi = hi.max(power_iterate(&op, &cands[*order.last().expect("nonempty")], &pcfg).value);
    (lo, hi)
}

/// Projected gradient descent of `a ↦ ‖Ga‖_p` on the unit sphere of `ℓ₂`.
fn descend(g: &Matrix, p: Exponent, a0: &[f64], iters: usize) -> f64 {
    let f = |a: &[f64]| lp::norm(&g.mul_vec(a), p);
    let mut a = unit2(a0.to_vec());
    let mut val = f(&a);
    let mut step = 0.5;
    for _ in 0..iters {
        let y = g.mul_vec(&a);
        let grad = g.tmul_vec(&lp::duality_map_unchecked(&y, p));
        let radial = lp::dot(&grad, &a);
        let tangent: Vec<f64> = grad.iter().zip(&a).map(|(gi, ai)| gi - radial * ai).collect();
        if lp::norm(&tangent, Exponent::TWO) < 1e-14 {
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            let trial = unit2(a.iter().zip(&tangent).map(|(ai, ti)| ai - step * ti).collect());
            let v = f(&trial);
            if v < val {
                a = trial;
                val = v;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    val
}

/// Bracket of `‖P‖_{ℓp→ℓp}`.
pub fn projection_norm(sys: &KhintchineSystem, cfg: &PowerIterConfig) -> Result<NormBracket> {
    opnorm_bracket(&sys.projection_operator(), cfg)
}

/// The system with `measured_C = max(hi, 1/lo, ‖P‖ upper)`.
pub fn khintchine_system(
    n: usize,
    p: Exponent,
    eq_cfg: &EquivalenceConfig,
    power_cfg: &PowerIterConfig,
) -> Result<KhintchineSystem> {
    let mut sys = KhintchineSystem::new(n, p)?;
    let (lo, hi) = equivalence_constants(&sys, eq_cfg);
    let projection = projection_norm(&sys, power_cfg)?;
    let measured_c = hi.max(1.0 / lo).max(projection.upper);
    sys.constants = Some(SystemConstants { lo, hi, projection, measured_c });
    Ok(sys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatSearchConfig {
    pub max_n: usize,
    pub max_m: usize,
    pub tol: f64,
}

impl Default for FlatSearchConfig {
    fn default() -> Self {
        FlatSearchConfig { max_n: 6, max_m: 14, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatVectorWitness {
    pub x: Vec<f64>,
    /// Coordinates with `|x_i| ≥ 1 − tol`.
    pub attaining_set: Vec<usize>,
    /// `x = Σ_k coefficients[k] · basis row k`.
    pub coefficients: Vec<f64>,
    pub subset: Vec<usize>,
    pub signs: Vec<f64>,
}

fn next_combination(c: &mut [usize], m: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < m - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// A vector of `span(basis rows) ⊂ ℓ∞(m)` attaining its sup-norm on at least
/// `n = rank` coordinates.
///
/// Subsets `J` (lexicographic) and sign patterns `σ` (lexicographic, `−1 < +1`)
/// are enumerated; for each, the system `x|_J = σ` is solved and accepted when
/// `‖x‖_∞ ≤ 1 + tol`. The first accepted pair is returned. A vertex of the
/// unit ball of `E` always qualifies, so failure signals numerical trouble.
pub fn flat_vector_search(basis: &Matrix, cfg: &FlatSearchConfig) -> Result<FlatVectorWitness> {
    let (n, m) = basis.shape();
    if n > cfg.max_n || m > cfg.max_m {
        return Err(Error::Capacity(format!(
            "flat-vector search on {n}×{m} exceeds caps {}×{}",
            cfg.max_n, cfg.max_m
        )));
    }
    if n > m {
        return Err(Error::Dimension(format!("{n} basis vectors in dimension {m}")));
    }
    let sv = basis.singular_values();
    let smax = sv.iter().fold(0.0_f64, |a, b| a.max(*b));
    let smin = sv.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    if !(smin > 1e-10 * smax) {
        return Err(Error::DegenerateInput("basis rows are linearly dependent".into()));
    }

    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let a = DMatrix::from_fn(n, n, |r, k| basis.get(k, subset[r]));
        let lu = a.lu();
        if lu.is_invertible() {
            for code in 0..1u64 << n {
                let sigma: Vec<f64> = (0..n).map(|r| if code >> (n - 1 - r) & 1 == 1 { 1.0 } else { -1.0 }).collect();
                let Some(c) = lu.solve(&DVector::from_vec(sigma.clone())) else { continue };
                let coefficients: Vec<f64> = c.iter().copied().collect();
                if coefficients.iter().any(|v| !v.is_finite()) {
                    continue;
                }
                let x = basis.tmul_vec(&coefficients);
                let sup = x.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
                let hits = subset.iter().zip(&sigma).all(|(&j, s)| (x[j] - s).abs() <= cfg.tol);
                if hits && sup <= 1.0 + cfg.tol {
                    let attaining_set = (0..m).filter(|&i| x[i].abs() >= 1.0 - cfg.tol).collect();
                    return Ok(FlatVectorWitness { x, attaining_set, coefficients, subset, signs: sigma });
                }
            }
        }
        if !next_combination(&mut subset, m) {
            break;
        }
    }
    Err(Error::SearchFailure(format!("no flat vector found in a {n}-dimensional subspace of ℓ∞({m})")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FssWitness {
    /// Unit vector of `E ⊂ ℓp(m)`.
    pub x: Vec<f64>,
    pub flat: FlatVectorWitness,
    pub sup_norm: f64,
    pub sup_bound: f64,
    /// `‖x‖_q ≤ n^{−(1/p − 1/q)}`; `pass` also requires `‖x‖_∞ ≤ n^{−1/p}`.
    pub report: BoundReport,
}

/// A unit vector `x` of `E = span(basis) ⊂ ℓp(m)` with small `ℓq` norm.
///
/// The flat vector `y` has `n` coordinates of modulus `‖y‖_∞ = 1`, so
/// `x = y/‖y‖_p` has `‖x‖_∞ ≤ n^{−1/p}`, and then
/// `‖x‖_q^q ≤ ‖x‖_∞^{q−p} ‖x‖_p^p` gives `‖x‖_q ≤ n^{−(1/p−1/q)}`.
pub fn fss_witness(p: Exponent, q: Exponent, basis: &Matrix, cfg: &FlatSearchConfig) -> Result<FssWitness> {
    if p.reciprocal() <= q.reciprocal() {
        return Err(Error::Domain(format!("FSS witness needs p < q, got p = {p}, q = {q}")));
    }
    let flat = flat_vector_search(basis, cfg)?;
    let n = basis.rows() as f64;
    let np = lp::norm(&flat.x, p);
    let x: Vec<f64> = flat.x.iter().map(|v| v / np).collect();
    let sup_norm = lp::norm(&x, Exponent::INFINITY);
    let sup_bound = n.powf(-p.reciprocal());
    let exponent = p.reciprocal() - q.reciprocal();
    let lhs = lp::norm(&x, q);
    let rhs = n.powf(-exponent);
    let mut report = BoundReport::new("fss", lhs, rhs, cfg.tol, digest_f64s("fss", basis.data()))
        .with_constant("n", n)
        .with_constant("p", p.value())
        .with_constant("q", q.value())
        .with_constant("sup_norm", sup_norm)
        .with_constant("sup_bound", sup_bound);
    report.pass = report.pass && sup_norm <= sup_bound + cfg.tol;
    Ok(FssWitness { x, flat, sup_norm, sup_bound, report })
}
