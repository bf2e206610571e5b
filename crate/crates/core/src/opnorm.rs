//! Brackets `[lower, upper]` for `‖T‖_{X→Y}` between (mixed) `ℓp` spaces.
//!
//! Lower ends always come from an explicit witness vector. Upper ends come
//! from closed forms where they exist, from two-point Riesz–Thorin
//! interpolation between computable anchors, and from norm-of-identity
//! relaxations otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, Exponent};
use crate::matrix::Matrix;
use crate::operator::BlockOperator;
use crate::rng::{gaussian_vec, SeedTree};
use crate::space::{diagonal_sum_norm, identity_norm_from_plain, identity_norm_to_plain, BlockSpace};

/// Sign enumeration is used inside [`opnorm_bracket`] up to this dimension.
const BRACKET_ENUM_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerIterConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Endpoint exponents are replaced by `1 + eps` and `1/eps`.
    pub endpoint_eps: f64,
    pub sign_enum_cap: usize,
}

impl Default for PowerIterConfig {
    fn default() -> Self {
        PowerIterConfig {
            max_iters: 200,
            tol: 1e-10,
            restarts: 8,
            seed: 0,
            endpoint_eps: 1e-6,
            sign_enum_cap: 22,
        }
    }
}

impl PowerIterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 || self.restarts < 1 || !(self.tol > 0.0) {
            return Err(Error::Config("power iteration needs max_iters ≥ 1, restarts ≥ 1, tol > 0".into()));
        }
        if !(self.endpoint_eps > 0.0 && self.endpoint_eps < 0.5) {
            return Err(Error::Config(format!("endpoint_eps {} outside (0, 0.5)", self.endpoint_eps)));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub witness: Vec<f64>,
    pub method_tags: Vec<String>,
}

impl NormBracket {
    pub fn is_exact(&self, tol: f64) -> bool {
        self.upper - self.lower <= tol * self.upper.max(1.0)
    }
}

/// One power-iteration run, or the best of several.
#[derive(Debug, Clone)]
pub struct PowerRun {
    /// `‖Tx‖_Y / ‖x‖_X` of the witness in the true (unperturbed) norms.
    pub value: f64,
    pub witness: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Objective per iteration in the norms actually iterated.
    pub trace: Vec<f64>,
    pub monotone: bool,
    pub perturbed: bool,
}

/// `‖Tx‖_Y / ‖x‖_X`, zero for the zero vector.
pub fn ratio(t: &BlockOperator, x: &[f64]) -> f64 {
    let nx = t.domain().norm_unchecked(x);
    if nx == 0.0 {
        return 0.0;
    }
    t.codomain().norm_unchecked(&t.matrix().mul_vec(x)) / nx
}

fn plain_exponents(t: &BlockOperator) -> Option<(Exponent, Exponent)> {
    let (p, _) = t.domain().as_plain()?;
    let (q, _) = t.codomain().as_plain()?;
    Some((p, q))
}

fn columns(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.cols()).map(|j| m.column(j)).collect()
}

/// `‖T‖_{ℓ1→ℓq} = max_j ‖T e_j‖_q`.
pub fn opnorm_exact_1_to_q(t: &BlockOperator, q: Exponent) -> Result<f64> {
    match t.domain().as_plain() {
        Some((p, _)) if p.is_one() => Ok(max_column(t.matrix(), |c| lp::norm(c, q)).0),
        _ => Err(Error::Domain("closed form 1→q needs a plain ℓ1 domain".into())),
    }
}

/// `‖T‖_{ℓ∞→ℓq} = max_σ ‖Tσ‖_q` over sign vectors; exact by convexity.
pub fn opnorm_exact_from_inf(t: &BlockOperator, q: Exponent, cap: usize) -> Result<f64> {
    match t.domain().as_plain() {
        Some((p, _)) if p.is_infinite() => {
            Ok(enumerate_signs(t.matrix(), &|y: &[f64]| lp::norm(y, q), cap)?.0)
        }
        _ => Err(Error::Domain("sign enumeration needs a plain ℓ∞ domain".into())),
    }
}

fn max_column(m: &Matrix, norm: impl Fn(&[f64]) -> f64) -> (f64, usize) {
    let mut best = (0.0, 0);
    for j in 0..m.cols() {
        let v = norm(&m.column(j));
        if v > best.0 {
            best = (v, j);
        }
    }
    best
}

fn max_row(m: &Matrix, norm: impl Fn(&[f64]) -> f64) -> (f64, usize) {
    let mut best = (0.0, 0);
    for i in 0..m.rows() {
        let v = norm(m.row(i));
        if v > best.0 {
            best = (v, i);
        }
    }
    best
}

/// `max_σ norm(Mσ)` over `σ ∈ {±1}^cols`, returning the lexicographically
/// smallest maximizer (with `−1 < +1`).
///
/// `σ` and `−σ` give the same value, so only `σ_0 = −1` is visited, in Gray
/// code order; the winner is re-evaluated from scratch.
pub fn enumerate_signs(m: &Matrix, norm: &dyn Fn(&[f64]) -> f64, cap: usize) -> Result<(f64, Vec<f64>)> {
    let k = m.cols();
    if k > cap {
        return Err(Error::Capacity(format!("sign enumeration over {k} coordinates exceeds cap {cap}")));
    }
    let cols = columns(m);
    // code bit (k-1-j) set  <=>  sigma_j = +1, so integer order is lexicographic order
    let sigma_of = |code: u64| -> Vec<f64> {
        (0..k).map(|j| if code >> (k - 1 - j) & 1 == 1 { 1.0 } else { -1.0 }).collect()
    };
    let mut y = m.mul_vec(&vec![-1.0; k]);
    let mut code = 0u64;
    let mut best = norm(&y);
    let mut best_code = 0u64;
    let free = k - 1;
    for step in 1..(1u64 << free) {
        let bit = step.trailing_zeros() as usize;
        let j = k - 1 - bit;
        code ^= 1 << bit;
        let s = if code >> bit & 1 == 1 { 2.0 } else { -2.0 };
        for (yi, ci) in y.iter_mut().zip(&cols[j]) {
            *yi += s * ci;
        }
        let v = norm(&y);
        if v > best * (1.0 + 1e-12) {
            best = v;
            best_code = code;
        } else if v >= best * (1.0 - 1e-12) && code < best_code {
            best = best.max(v);
            best_code = code;
        }
    }
    let sigma = sigma_of(best_code);
    Ok((norm(&m.mul_vec(&sigma)), sigma))
}

/// Power iteration `x ← J_{X*}(Tᵀ J_Y(Tx))` from `x0`.
///
/// The iterated objective `‖Tx‖_Y` (with `‖x‖_X = 1`) is nondecreasing; the
/// returned witness is the best iterate measured in the true norms.
pub fn power_iterate(t: &BlockOperator, x0: &[f64], cfg: &PowerIterConfig) -> PowerRun {
    let perturbed = t.domain().has_endpoint_exponent() || t.codomain().has_endpoint_exponent();
    let (xs, ys) = if perturbed {
        (t.domain().perturbed(cfg.endpoint_eps), t.codomain().perturbed(cfg.endpoint_eps))
    } else {
        (t.domain().clone(), t.codomain().clone())
    };
    let xs_dual = xs.dual();
    let m = t.matrix();

    let mut x = x0.to_vec();
    let nx = xs.norm_unchecked(&x);
    if nx == 0.0 {
        x = vec![1.0; x.len()];
    }
    let nx = xs.norm_unchecked(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut tx = m.mul_vec(&x);
    let mut f = ys.norm_unchecked(&tx);
    let mut trace = vec![f];
    let mut best_val = ratio(t, &x);
    let mut best_x = x.clone();
    let mut monotone = true;
    let mut converged = false;
    let mut calm = 0;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        if f == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;
        let z = ys.duality_map_unchecked(&tx);
        let w = m.tmul_vec(&z);
        if w.iter().all(|v| *v == 0.0) {
            converged = true;
            break;
        }
        x = xs_dual.duality_map_unchecked(&w);
        tx = m.mul_vec(&x);
        let f_new = ys.norm_unchecked(&tx);
        if f_new < f * (1.0 - 1e-10) {
            monotone = false;
        }
        trace.push(f_new);
        let v = ratio(t, &x);
        if v > best_val {
            best_val = v;
            best_x = x.clone();
        }
        let rel = (f_new - f).abs() / f_new.max(f64::MIN_POSITIVE);
        f = f_new;
        calm = if rel < cfg.tol { calm + 1 } else { 0 };
        if calm >= 3 {
            converged = true;
            break;
        }
    }
    PowerRun { value: best_val, witness: best_x, converged, iterations, trace, monotone, perturbed }
}

/// Restart `r`: the constant vector, then `e_1`, then seeded Gaussians.
pub fn restart_vector(dim: usize, r: usize, seed: u64) -> Vec<f64> {
    match r {
        0 => vec![1.0; dim],
        1 => {
            let mut e = vec![0.0; dim];
            e[0] = 1.0;
            e
        }
        _ => gaussian_vec(&mut SeedTree::new(seed).rng("power-restart", r as u64), dim),
    }
}

/// Best of `cfg.restarts` power-iteration runs; ties go to the earliest restart.
pub fn opnorm_power(t: &BlockOperator, cfg: &PowerIterConfig) -> Result<PowerRun> {
    cfg.validate()?;
    let dim = t.domain().total_dim();
    let mut best: Option<PowerRun> = None;
    for r in 0..cfg.restarts {
        let run = power_iterate(t, &restart_vector(dim, r, cfg.seed), cfg);
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts ≥ 1"))
}

/// Two-point Riesz–Thorin bound `b₀^{1−θ} b₁^θ` at `(p, q)`.
///
/// Each anchor is `(p_i, q_i, bound_i)` with `bound_i ≥ ‖T‖_{p_i→q_i}`. Over
/// real scalars the constant is 1 only when `p_i ≤ q_i`; other anchors are
/// rejected.
pub fn opnorm_upper_interpolation(
    p: Exponent,
    q: Exponent,
    anchors: [(Exponent, Exponent, f64); 2],
) -> Result<f64> {
    let [(p0, q0, b0), (p1, q1, b1)] = anchors;
    for (pi, qi) in [(p0, q0), (p1, q1)] {
        if pi.reciprocal() < qi.reciprocal() - 1e-12 {
            return Err(Error::InterpolationInfeasible(format!(
                "anchor ({pi}, {qi}) has p > q; the real-scalar constant is not 1 there"
            )));
        }
    }
    let (a, b) = (p.reciprocal(), q.reciprocal());
    let (a0, a1, c0, c1) = (p0.reciprocal(), p1.reciprocal(), q0.reciprocal(), q1.reciprocal());
    let theta = if (a1 - a0).abs() > 1e-12 {
        (a - a0) / (a1 - a0)
    } else if (c1 - c0).abs() > 1e-12 {
        (b - c0) / (c1 - c0)
    } else if (a - a0).abs() <= 1e-9 && (b - c0).abs() <= 1e-9 {
        0.0
    } else {
        return Err(Error::InterpolationInfeasible("anchors coincide away from the target".into()));
    };
    if !(-1e-12..=1.0 + 1e-12).contains(&theta) {
        return Err(Error::InterpolationInfeasible(format!("θ = {theta} outside [0, 1]")));
    }
    let theta = theta.clamp(0.0, 1.0);
    let miss_a = ((1.0 - theta) * a0 + theta * a1 - a).abs();
    let miss_b = ((1.0 - theta) * c0 + theta * c1 - b).abs();
    if miss_a > 1e-9 || miss_b > 1e-9 {
        return Err(Error::InterpolationInfeasible(format!(
            "target ({p}, {q}) is off the anchor segment by {}",
            miss_a.max(miss_b)
        )));
    }
    Ok(interpolate(b0, b1, theta))
}

fn interpolate(b0: f64, b1: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        b0
    } else if theta == 1.0 {
        b1
    } else if b0 == 0.0 || b1 == 0.0 {
        0.0
    } else {
        b0.powf(1.0 - theta) * b1.powf(theta)
    }
}

fn recip(a: f64) -> Exponent {
    Exponent::from_reciprocal(a.clamp(0.0, 1.0)).expect("clamped reciprocal")
}

/// Certified upper bounds for a plain matrix between `ℓ_{1/a}` and `ℓ_{1/b}`,
/// in reciprocal coordinates.
struct PlainUpper<'a> {
    m: &'a Matrix,
    sigma: f64,
}

impl<'a> PlainUpper<'a> {
    fn new(m: &'a Matrix) -> Self {
        PlainUpper { m, sigma: m.spectral_norm() }
    }

    /// `a = 1` edge: max column norm.
    fn edge_a1(&self, b: f64) -> f64 {
        let q = recip(b);
        max_column(self.m, |c| lp::norm(c, q)).0
    }

    /// `b = 0` edge: max row norm in the dual exponent.
    fn edge_b0(&self, a: f64) -> f64 {
        let pd = recip(1.0 - a);
        max_row(self.m, |r| lp::norm(r, pd)).0
    }

    /// Bound at a point of the lower triangle `a ≥ b`.
    fn lower_triangle(&self, a: f64, b: f64) -> (f64, &'static str) {
        if a >= 1.0 - 1e-15 {
            return (self.edge_a1(b), "closed-form:max-column");
        }
        if b <= 1e-15 {
            return (self.edge_b0(a), "closed-form:max-row");
        }
        let (da, db) = (a - 0.5, b - 0.5);
        let mut best = (f64::INFINITY, "riesz-thorin");
        if da.abs() < 1e-15 && db.abs() < 1e-15 {
            return (self.sigma, "spectral");
        }
        // ray from (1/2, 1/2) through the target to the boundary
        let mut hits = Vec::new();
        if da > 1e-15 {
            hits.push((0.5 / da, true));
        }
        if db < -1e-15 {
            hits.push((0.5 / -db, false));
        }
        if let Some(&(t, on_a1)) = hits.iter().min_by(|x, y| x.0.total_cmp(&y.0)) {
            let (ea, eb) = (0.5 + t * da, 0.5 + t * db);
            let anchor = if on_a1 { self.edge_a1(eb) } else { self.edge_b0(ea) };
            best.0 = best.0.min(interpolate(self.sigma, anchor, 1.0 / t));
        }
        // lines from (1, b1) on the a = 1 edge through the target down to b = 0
        let n1 = self.edge_a1(b);
        for k in 1..=8 {
            let b1 = b + (1.0 - b) * k as f64 / 8.0;
            let t = b1 / (b1 - b);
            let a2 = 1.0 + t * (a - 1.0);
            if a2 < -1e-15 {
                continue;
            }
            let v = interpolate(self.edge_a1(b1), self.edge_b0(a2.max(0.0)), 1.0 / t);
            best.0 = best.0.min(v);
        }
        best.0 = best.0.min(n1 * (self.m.cols() as f64).powf(1.0 - a));
        best.0 = best.0.min(self.edge_b0(a) * (self.m.rows() as f64).powf(b));
        best.0 = best.0.min(self.crude(a, b));
        best
    }

    /// `σ_max · m^{max(0, 1/2 − a)} · d^{max(0, b − 1/2)}`.
    fn crude(&self, a: f64, b: f64) -> f64 {
        let (m, d) = (self.m.cols() as f64, self.m.rows() as f64);
        self.sigma * m.powf((0.5 - a).max(0.0)) * d.powf((b - 0.5).max(0.0))
    }

    fn relaxation(&self, a: f64, b: f64, a2: f64, b2: f64) -> f64 {
        let (m, d) = (self.m.cols() as f64, self.m.rows() as f64);
        m.powf((a2 - a).max(0.0)) * d.powf((b - b2).max(0.0))
    }

    fn bound(&self, a: f64, b: f64) -> (f64, &'static str) {
        if a >= b - 1e-15 {
            return self.lower_triangle(a, b);
        }
        let mut best = (self.crude(a, b), "relaxation:spectral");
        let mut candidates = vec![(a, a), (b, b), (0.5, 0.5), (1.0, b), (a, 0.0)];
        candidates.push((0.5_f64.clamp(b, 1.0), 0.5_f64.clamp(0.0, a)));
        for (a2, b2) in candidates {
            let v = self.lower_triangle(a2, b2).0 * self.relaxation(a, b, a2, b2);
            if v < best.0 {
                best = (v, "relaxation:riesz-thorin");
            }
        }
        best
    }
}

/// Certified upper bound only; no power iteration.
pub fn opnorm_upper(t: &BlockOperator, cfg: &PowerIterConfig) -> Result<(f64, Vec<String>)> {
    Ok(bracket_impl(t, cfg, false)?).map(|b| (b.upper, b.method_tags))
}

/// `[lower, upper]` for `‖T‖_{X→Y}` with a witness attaining `lower`.
pub fn opnorm_bracket(t: &BlockOperator, cfg: &PowerIterConfig) -> Result<NormBracket> {
    bracket_impl(t, cfg, true)
}

fn finish(t: &BlockOperator, witness: Vec<f64>, upper: f64, tags: Vec<String>) -> NormBracket {
    let lower = ratio(t, &witness);
    // closed forms and their witnesses can disagree in the last ulp
    let upper = if lower > upper && lower <= upper * (1.0 + 1e-12) { lower } else { upper };
    NormBracket { lower, upper, witness, method_tags: tags }
}

fn bracket_impl(t: &BlockOperator, cfg: &PowerIterConfig, want_lower: bool) -> Result<NormBracket> {
    cfg.validate()?;
    if t.is_block_diagonal() && !t.matrix().is_zero() {
        return block_diagonal_bracket(t, cfg, want_lower);
    }
    let dom = t.domain().canonical();
    let cod = t.codomain().canonical();
    let t = t.with_spaces(dom.clone(), cod.clone())?;
    let m = t.matrix();

    if m.is_zero() {
        return Ok(finish(&t, dom.unit_vector(0), 0.0, vec!["zero".into()]));
    }

    if let Some(b) = exact_bracket(&t, cfg)? {
        return Ok(b);
    }

    let mut tags = Vec::new();
    let upper = match plain_exponents(&t) {
        Some((p, q)) => {
            let (u, tag) = PlainUpper::new(m).bound(p.reciprocal(), q.reciprocal());
            tags.push(tag.to_string());
            u
        }
        None => {
            tags.push("relaxation:mixed-to-plain".into());
            mixed_upper(&t)
        }
    };

    // unit vectors have norm 1 in every block space
    let (mut lower, j) = max_column(m, |c| cod.norm_unchecked(c));
    let mut witness = dom.unit_vector(j);
    if !want_lower {
        return Ok(finish(&t, witness, upper, tags));
    }
    tags.push("basis-probe".into());
    let run = opnorm_power(&t, cfg)?;
    if run.perturbed {
        tags.push(format!("perturbed-endpoints(eps={:e})", cfg.endpoint_eps));
    }
    tags.push(if run.converged { "power".into() } else { "power:unconverged".into() });
    if run.value > lower {
        lower = run.value;
        witness = run.witness.clone();
    }
    if dom.as_plain().is_some_and(|(p, _)| p.is_infinite()) {
        let signs: Vec<f64> = run.witness.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
        if ratio(&t, &signs) > lower {
            witness = signs;
            tags.push("sign-rounding".into());
        }
    }
    Ok(finish(&t, witness, upper, tags))
}

/// Closed forms between plain spaces: `ℓ1` domain, `ℓ∞` codomain, `(2, 2)`,
/// and small sign enumerations for `ℓ∞` domains and `ℓ1` codomains.
fn exact_bracket(t: &BlockOperator, cfg: &PowerIterConfig) -> Result<Option<NormBracket>> {
    let dom = t.domain();
    let cod = t.codomain();
    let m = t.matrix();
    let cap = cfg.sign_enum_cap.min(BRACKET_ENUM_DIM);
    if let Some((p, _)) = dom.as_plain() {
        if p.is_one() {
            let (v, j) = max_column(m, |c| cod.norm_unchecked(c));
            return Ok(Some(finish(t, dom.unit_vector(j), v, vec!["closed-form:max-column".into()])));
        }
        if p.is_infinite() && m.cols() <= cap {
            let (v, sigma) = enumerate_signs(m, &|y: &[f64]| cod.norm_unchecked(y), cap)?;
            return Ok(Some(finish(t, sigma, v, vec!["closed-form:sign-enumeration".into()])));
        }
    }
    let dual = dom.dual();
    if let Some((q, _)) = cod.as_plain() {
        if q.is_infinite() {
            let (v, i) = max_row(m, |r| dual.norm_unchecked(r));
            let w = dual.duality_map_unchecked(m.row(i));
            return Ok(Some(finish(t, w, v, vec!["closed-form:max-row".into()])));
        }
        if q.is_one() && m.rows() <= cap {
            let mt = m.transpose();
            let (v, sigma) = enumerate_signs(&mt, &|y: &[f64]| dual.norm_unchecked(y), cap)?;
            let w = dual.duality_map_unchecked(&mt.mul_vec(&sigma));
            return Ok(Some(finish(t, w, v, vec!["closed-form:adjoint-sign-enumeration".into()])));
        }
    }
    if let Some((p, q)) = plain_exponents(t) {
        if p.approx_eq(Exponent::TWO) && q.approx_eq(Exponent::TWO) {
            let (sigma, v) = top_singular_pair(m);
            return Ok(Some(finish(t, v, sigma, vec!["spectral".into()])));
        }
    }
    Ok(None)
}

fn top_singular_pair(m: &Matrix) -> (f64, Vec<f64>) {
    let svd = m.to_nalgebra().svd(false, true);
    let (k, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
    let vt = svd.v_t.expect("requested right singular vectors");
    (sigma, vt.row(k).iter().copied().collect())
}

/// Exact combination of per-block brackets for `⊕ T_j : (⊕X_j)_P → (⊕Y_j)_Q`.
fn block_diagonal_bracket(t: &BlockOperator, cfg: &PowerIterConfig, want_lower: bool) -> Result<NormBracket> {
    let dom = t.domain();
    let cod = t.codomain();
    let nb = dom.block_count();
    let mut lowers = Vec::with_capacity(nb);
    let mut uppers = Vec::with_capacity(nb);
    let mut witnesses = Vec::with_capacity(nb);
    let mut tags = vec!["block-diagonal".to_string()];
    for j in 0..nb {
        let bj = bracket_impl(&t.block(j, j)?, cfg, want_lower)?;
        lowers.push(bj.lower);
        uppers.push(bj.upper);
        for tag in bj.method_tags {
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        witnesses.push(bj.witness);
    }
    let (pa, qb) = (dom.outer().reciprocal(), cod.outer().reciprocal());
    let upper = diagonal_sum_norm(&uppers, dom.outer(), cod.outer());
    // block weights that realise the combination of the lower ends
    let weights: Vec<f64> = if qb <= pa + 1e-15 {
        let (_, jmax) = lowers.iter().enumerate().fold((0.0, 0), |acc, (j, &l)| if l > acc.0 { (l, j) } else { acc });
        (0..nb).map(|j| if j == jmax { 1.0 } else { 0.0 }).collect()
    } else {
        let e = pa / (qb - pa);
        lowers.iter().map(|l| if *l > 0.0 { l.powf(e) } else { 0.0 }).collect()
    };
    let mut witness = vec![0.0; dom.total_dim()];
    for (j, r) in dom.block_ranges().into_iter().enumerate() {
        let w = &witnesses[j];
        let nw = lp::norm(w, dom.blocks()[j].exponent);
        if nw > 0.0 && weights[j] > 0.0 {
            for (x, v) in witness[r].iter_mut().zip(w) {
                *x = weights[j] * v / nw;
            }
        }
    }
    if witness.iter().all(|v| *v == 0.0) {
        witness[0] = 1.0;
    }
    Ok(finish(t, witness, upper, tags))
}

/// Upper bound through plain spaces: `‖I: X→ℓa‖·‖T‖_{a→b}·‖I: ℓb→Y‖`, with
/// `a, b` ranging over the exponents that occur in the two spaces.
fn mixed_upper(t: &BlockOperator) -> f64 {
    let exps = |s: &BlockSpace| {
        let mut v = vec![s.outer()];
        v.extend(s.blocks().iter().map(|b| b.exponent));
        v
    };
    let pu = PlainUpper::new(t.matrix());
    let mut best = f64::INFINITY;
    for a in exps(t.domain()) {
        let into = identity_norm_to_plain(t.domain(), a);
        for b in exps(t.codomain()) {
            let out = identity_norm_from_plain(b, t.codomain());
            let v = into * pu.bound(a.reciprocal(), b.reciprocal()).0 * out;
            best = best.min(v);
        }
    }
    best
}
