//! The functionals `Φ_n` and `Ψ_n` that separate the ideals generated by `S`
//! and `T`, their exact values on `S` and `T`, and decay experiments on random
//! operators factoring through `I(p,2)` and `I(2,q)`.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::bounds::decay_exponent_r;
use crate::constructions::{build_s, build_t, BlockDimRule, TruncationPlan};
use crate::error::{Error, Result};
use crate::khintchine::{fss_witness, khintchine_system, EquivalenceConfig, FlatSearchConfig, KhintchineSystem};
use crate::lp::{self, Exponent};
use crate::matrix::Matrix;
use crate::operator::BlockOperator;
use crate::opnorm::{opnorm_upper, PowerIterConfig};
use crate::rng::{gaussian_matrix, SeedTree};

/// Slack for floating-point comparisons along the inequality chains.
const CHAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalKind {
    Phi,
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSpec {
    pub kind: FunctionalKind,
    pub n: usize,
    pub p: Exponent,
    pub q: Exponent,
}

impl FunctionalSpec {
    pub fn phi(n: usize, p: Exponent, q: Exponent) -> Self {
        FunctionalSpec { kind: FunctionalKind::Phi, n, p, q }
    }

    pub fn psi(n: usize, p: Exponent, q: Exponent) -> Self {
        FunctionalSpec { kind: FunctionalKind::Psi, n, p, q }
    }

    fn check(&self, sys: &KhintchineSystem) -> Result<()> {
        let want = match self.kind {
            FunctionalKind::Phi => self.p,
            FunctionalKind::Psi => self.q,
        };
        if self.n < 1 || sys.n() != self.n || !sys.p().approx_eq(want) {
            return Err(Error::Config(format!(
                "system ({}, {}) does not match functional {:?} at n = {} with exponent {want}",
                sys.n(),
                sys.p(),
                self.kind,
                self.n
            )));
        }
        Ok(())
    }
}

/// `Φ̃_n(V) = (1/n) Σ_i (V x_{(n,i)})_i` for an `n × 2ⁿ` matrix `V`.
pub fn phi_tilde(v: &Matrix, sys: &KhintchineSystem) -> Result<f64> {
    let n = sys.n();
    if v.shape() != (n, sys.k()) {
        return Err(Error::Dimension(format!("Φ̃ needs an {n}×{} block, got {:?}", sys.k(), v.shape())));
    }
    let total: f64 = (0..n).map(|i| lp::dot(v.row(i), sys.vectors().row(i))).sum();
    Ok(total / n as f64)
}

/// `Ψ̃_n(W) = (1/n) Σ_i ⟨y*_{(n,i)}, W e_i⟩` for a `2ⁿ × n` matrix `W`.
pub fn psi_tilde(w: &Matrix, sys: &KhintchineSystem) -> Result<f64> {
    let n = sys.n();
    if w.shape() != (sys.k(), n) {
        return Err(Error::Dimension(format!("Ψ̃ needs a {}×{n} block, got {:?}", sys.k(), w.shape())));
    }
    let total: f64 = (0..n).map(|i| lp::dot(&w.column(i), sys.duals().row(i))).sum();
    Ok(total / n as f64)
}

fn check_block(u: &BlockOperator, block: usize, dom: (usize, Exponent), cod: (usize, Exponent)) -> Result<()> {
    let (db, cb) = (u.domain().blocks(), u.codomain().blocks());
    if block >= db.len() || block >= cb.len() {
        return Err(Error::Dimension(format!("operator has no block {}", block + 1)));
    }
    let ok = db[block].dim == dom.0
        && cb[block].dim == cod.0
        && (dom.0 == 1 || db[block].exponent.approx_eq(dom.1))
        && (cod.0 == 1 || cb[block].exponent.approx_eq(cod.1));
    if !ok {
        return Err(Error::Dimension(format!(
            "block {} is ℓ{}({}) → ℓ{}({}), expected ℓ{}({}) → ℓ{}({})",
            block + 1,
            db[block].exponent,
            db[block].dim,
            cb[block].exponent,
            cb[block].dim,
            dom.1,
            dom.0,
            cod.1,
            cod.0
        )));
    }
    Ok(())
}

/// `Φ_n(U) = Φ̃_n(F_n U E_n)`: the `n`-th diagonal block of `U` must map
/// `ℓp(2ⁿ)` into `ℓq(n)`.
pub fn phi_n(u: &BlockOperator, spec: &FunctionalSpec, sys: &KhintchineSystem) -> Result<f64> {
    spec.check(sys)?;
    let b = spec.n - 1;
    check_block(u, b, (sys.k(), spec.p), (spec.n, spec.q))?;
    phi_tilde(u.block(b, b)?.matrix(), sys)
}

/// `Ψ_n(U) = Ψ̃_n(F′_n U E′_n)`: the `n`-th diagonal block of `U` must map
/// `ℓp(n)` into `ℓq(2ⁿ)`.
pub fn psi_n(u: &BlockOperator, spec: &FunctionalSpec, sys: &KhintchineSystem) -> Result<f64> {
    spec.check(sys)?;
    let b = spec.n - 1;
    check_block(u, b, (spec.n, spec.p), (sys.k(), spec.q))?;
    psi_tilde(u.block(b, b)?.matrix(), sys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    pub power: PowerIterConfig,
    pub equivalence: EquivalenceConfig,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 50,
            seed: 0,
            power: PowerIterConfig::default(),
            equivalence: EquivalenceConfig::default(),
        }
    }
}

/// Intermediate quantities of the decay chain for one sampled operator.
///
/// For `Φ` the vectors are `b_i = B x_{(n,i)}`; for `Ψ` they are
/// `g_i = Aᵀ y*_{(n,i)}`. Exponent `α = (2−u)/2` with `u = p` or `q′`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    /// `(1/n) Σ ‖b_i‖_∞` against `2C n^{−r}`.
    pub average_sup: f64,
    pub average_sup_bound: f64,
    /// `(1/n) Σ ‖b_i‖_∞^α` against `((1/n) Σ ‖b_i‖_∞)^α` (Jensen).
    pub jensen_lhs: f64,
    pub jensen_rhs: f64,
    /// `(1/n) Σ ‖b_i‖_∞^α` against `(2C)^α n^{−rα}`.
    pub power_average_bound: f64,
    /// `max_i (‖b_i‖₂ − ‖b_i‖_∞^α ‖b_i‖_u^{u/2})`, nonpositive when every
    /// interpolation step holds.
    pub interpolation_excess: f64,
    /// `max_i (‖b_i‖_u − C)`.
    pub norm_excess: f64,
    /// `max_i (|pairing_i| − ‖b_i‖₂)`, the Cauchy–Schwarz/Hölder step.
    pub pairing_excess: f64,
    pub all_steps_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: usize,
    pub sample_id: usize,
    pub measured: f64,
    pub bound: f64,
    pub constant_used: f64,
    pub pass: bool,
    pub chain: ChainCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySummary {
    pub n: usize,
    pub c: f64,
    pub bound: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub kind: FunctionalKind,
    pub p: Exponent,
    pub q: Exponent,
    pub rows: Vec<DecayRow>,
    pub summary: Vec<DecaySummary>,
    /// Least-squares slope of `ln median` against `ln n`.
    pub slope: Option<f64>,
    /// Every constant that entered a bound, by name.
    pub notes: Vec<String>,
}

impl DecayTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass && r.chain.all_steps_pass)
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`, over points with `x, y > 0`;
/// `None` with fewer than two distinct abscissae.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx < 1e-300 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Chain for vectors `vecs[i]` in `ℓu`, pairings `pair[i]` and constant `C`.
fn chain_check(vecs: &[Vec<f64>], pair: &[f64], u: Exponent, c: f64, r: f64) -> ChainCheck {
    let n = vecs.len() as f64;
    let alpha = (2.0 - u.value()) / 2.0;
    let sups: Vec<f64> = vecs.iter().map(|b| lp::norm(b, Exponent::INFINITY)).collect();
    let average_sup = sups.iter().sum::<f64>() / n;
    let average_sup_bound = 2.0 * c * n.powf(-r);
    let jensen_lhs = sups.iter().map(|v| v.powf(alpha)).sum::<f64>() / n;
    let jensen_rhs = average_sup.powf(alpha);
    let power_average_bound = (2.0 * c).powf(alpha) * n.powf(-r * alpha);
    let mut interpolation_excess = f64::NEG_INFINITY;
    let mut norm_excess = f64::NEG_INFINITY;
    let mut pairing_excess = f64::NEG_INFINITY;
    for ((b, sup), pv) in vecs.iter().zip(&sups).zip(pair) {
        let two = lp::norm(b, Exponent::TWO);
        let un = lp::norm(b, u);
        interpolation_excess = interpolation_excess.max(two - sup.powf(alpha) * un.powf(u.value() / 2.0));
        norm_excess = norm_excess.max(un - c);
        pairing_excess = pairing_excess.max(pv.abs() - two);
    }
    let slack = |x: f64| CHAIN_TOL * x.abs().max(1.0);
    let all_steps_pass = average_sup <= average_sup_bound + slack(average_sup_bound)
        && jensen_lhs <= jensen_rhs + slack(jensen_rhs)
        && jensen_lhs <= power_average_bound + slack(power_average_bound)
        && interpolation_excess <= CHAIN_TOL
        && norm_excess <= CHAIN_TOL
        && pairing_excess <= CHAIN_TOL;
    ChainCheck {
        average_sup,
        average_sup_bound,
        jensen_lhs,
        jensen_rhs,
        power_average_bound,
        interpolation_excess,
        norm_excess,
        pairing_excess,
        all_steps_pass,
    }
}

fn normalized_gaussian(rows: usize, cols: usize, p: Exponent, q: Exponent, seeds: &SeedTree, label: &str, idx: u64, cfg: &PowerIterConfig) -> Result<Matrix> {
    let g = gaussian_matrix(&mut seeds.rng(label, idx), rows, cols);
    let (upper, _) = opnorm_upper(&BlockOperator::plain(g.clone(), p, q)?, cfg)?;
    Ok(if upper > 0.0 { g.scaled(1.0 / upper) } else { g })
}

fn finish_table(kind: FunctionalKind, p: Exponent, q: Exponent, rows: Vec<DecayRow>, consts: Vec<(usize, f64, f64)>, notes: Vec<String>) -> DecayTable {
    let summary: Vec<DecaySummary> = consts
        .into_iter()
        .map(|(n, c, bound)| {
            let mut vals: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.measured).collect();
            let max = vals.iter().fold(0.0_f64, |a, b| a.max(*b));
            DecaySummary { n, c, bound, median: median(&mut vals), max }
        })
        .collect();
    let slope = loglog_slope(&summary.iter().map(|s| (s.n as f64, s.median)).collect::<Vec<_>>());
    DecayTable { kind, p, q, rows, summary, slope, notes }
}

fn check_range(n_range: &RangeInclusive<usize>) -> Result<()> {
    if *n_range.start() < 1 || n_range.is_empty() {
        return Err(Error::Config("n range must be nonempty and start at 1 or later".into()));
    }
    Ok(())
}

/// `|Φ_n(A ∘ I(p,2) ∘ B)|` for random `B : ℓp(2ⁿ) → ℓp(M)` and
/// `A : ℓ₂(M) → ℓq(n)` with `M = 2ⁿ`, both scaled to bracket upper end 1,
/// against `C^{p/2} (2C)^{(2−p)/2} n^{−r(2,p)(2−p)/2}`.
pub fn decay_experiment_phi(p: Exponent, q: Exponent, n_range: RangeInclusive<usize>, cfg: &SamplerConfig) -> Result<DecayTable> {
    decay_phi_with(p, q, n_range, cfg, &mut |n| khintchine_system(n, p, &cfg.equivalence, &cfg.power))
}

fn decay_phi_with(
    p: Exponent,
    q: Exponent,
    n_range: RangeInclusive<usize>,
    cfg: &SamplerConfig,
    system: &mut dyn FnMut(usize) -> Result<KhintchineSystem>,
) -> Result<DecayTable> {
    let a = p.reciprocal();
    if !(a > 0.5 && a < 1.0) {
        return Err(Error::Domain(format!("Φ decay needs 1 < p < 2, got {p}")));
    }
    check_range(&n_range)?;
    let pv = p.value();
    let alpha = (2.0 - pv) / 2.0;
    let r = decay_exponent_r(2.0, pv)?;
    let seeds = SeedTree::new(cfg.seed).child("phi", 0);
    let mut rows = Vec::new();
    let mut consts = Vec::new();
    for n in n_range {
        let sys = system(n)?;
        let c = sys.measured_c().ok_or_else(|| Error::Config("system without measured constants".into()))?;
        let bound = c.powf(pv / 2.0) * (2.0 * c).powf(alpha) * (n as f64).powf(-r * alpha);
        consts.push((n, c, bound));
        let k = sys.k();
        let mdim = k;
        let tree = seeds.child("n", n as u64);
        for s in 0..cfg.samples {
            let b = normalized_gaussian(mdim, k, p, p, &tree, "B", s as u64, &cfg.power)?;
            let am = normalized_gaussian(n, mdim, Exponent::TWO, q, &tree, "A", s as u64, &cfg.power)?;
            let bx: Vec<Vec<f64>> = (0..n).map(|i| b.mul_vec(sys.vectors().row(i))).collect();
            let pair: Vec<f64> = (0..n).map(|i| lp::dot(am.row(i), &bx[i])).collect();
            let v = am.matmul(&b)?;
            let measured = phi_tilde(&v, &sys)?.abs();
            let chain = chain_check(&bx, &pair, p, c, r);
            rows.push(DecayRow { n, sample_id: s, measured, bound, constant_used: c, pass: measured <= bound + CHAIN_TOL, chain });
        }
    }
    let notes = vec![
        "ensemble: iid standard Gaussian entries scaled by the opnorm bracket upper end".into(),
        format!("r(2,p) = {r}"),
    ];
    Ok(finish_table(FunctionalKind::Phi, p, q, rows, consts, notes))
}

/// `|Ψ_n(A ∘ I(2,q) ∘ B)|` for random `B : ℓp(n) → ℓ₂(M)` and
/// `A : ℓq(M) → ℓq(2ⁿ)`, against `C^{q′/2} K^{(2−q′)/2} n^{−r(2,q′)(2−q′)/2}`
/// with `K = max(2C, C+1)`.
pub fn decay_experiment_psi(p: Exponent, q: Exponent, n_range: RangeInclusive<usize>, cfg: &SamplerConfig) -> Result<DecayTable> {
    decay_psi_with(p, q, n_range, cfg, &mut |n| khintchine_system(n, q, &cfg.equivalence, &cfg.power))
}

fn decay_psi_with(
    p: Exponent,
    q: Exponent,
    n_range: RangeInclusive<usize>,
    cfg: &SamplerConfig,
    system: &mut dyn FnMut(usize) -> Result<KhintchineSystem>,
) -> Result<DecayTable> {
    let b = q.reciprocal();
    if !(b > 0.0 && b < 0.5) {
        return Err(Error::Domain(format!("Ψ decay needs 2 < q < ∞, got {q}")));
    }
    check_range(&n_range)?;
    let qd = q.dual();
    let qdv = qd.value();
    let alpha = (2.0 - qdv) / 2.0;
    let r = decay_exponent_r(2.0, qdv)?;
    let seeds = SeedTree::new(cfg.seed).child("psi", 0);
    let mut rows = Vec::new();
    let mut consts = Vec::new();
    let mut notes = vec![
        "ensemble: iid standard Gaussian entries scaled by the opnorm bracket upper end".into(),
        format!("r(2,q') = {r}"),
    ];
    for n in n_range {
        let sys = system(n)?;
        let c = sys.measured_c().ok_or_else(|| Error::Config("system without measured constants".into()))?;
        let (k2, k1) = (2.0 * c, c + 1.0);
        notes.push(format!("n = {n}: 2C = {k2}, C+1 = {k1}, using {}", k2.max(k1)));
        let bound = c.powf(qdv / 2.0) * k2.max(k1).powf(alpha) * (n as f64).powf(-r * alpha);
        consts.push((n, c, bound));
        let k = sys.k();
        let mdim = k;
        let tree = seeds.child("n", n as u64);
        for s in 0..cfg.samples {
            let bm = normalized_gaussian(mdim, n, p, Exponent::TWO, &tree, "B", s as u64, &cfg.power)?;
            let am = normalized_gaussian(k, mdim, q, q, &tree, "A", s as u64, &cfg.power)?;
            let g: Vec<Vec<f64>> = (0..n).map(|i| am.tmul_vec(sys.duals().row(i))).collect();
            let pair: Vec<f64> = (0..n).map(|i| lp::dot(&g[i], &bm.column(i))).collect();
            let w = am.matmul(&bm)?;
            let measured = psi_tilde(&w, &sys)?.abs();
            let chain = chain_check(&g, &pair, qd, c, r);
            rows.push(DecayRow { n, sample_id: s, measured, bound, constant_used: c, pass: measured <= bound + CHAIN_TOL, chain });
        }
    }
    Ok(finish_table(FunctionalKind::Psi, p, q, rows, consts, notes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    pub n: usize,
    pub phi_s: f64,
    pub psi_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FssRow {
    pub section: String,
    pub n: usize,
    pub m: usize,
    pub norm_q: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateConfig {
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub flat: FlatSearchConfig,
    /// FSS witnesses are produced for subspace dimensions `1..=fss_max_n`.
    pub fss_max_n: usize,
    pub exact_tol: f64,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        CertificateConfig {
            seed: 0,
            sampler: SamplerConfig::default(),
            flat: FlatSearchConfig::default(),
            fss_max_n: 5,
            exact_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub p: Exponent,
    pub q: Exponent,
    pub n_max: usize,
    pub seed: u64,
    pub exact: Vec<ExactRow>,
    pub phi: DecayTable,
    pub psi: DecayTable,
    pub fss: Vec<FssRow>,
    pub exact_pass: bool,
    pub decay_pass: bool,
    pub fss_pass: bool,
    pub all_pass: bool,
}

/// Finite-scale separation certificate for `1 < p < 2 < q < ∞`:
/// `Φ_n(S) = Ψ_n(T) = 1`, decay of `Φ_n`/`Ψ_n` on sampled operators through
/// `I(p,2)` and `I(2,q)`, and FSS witnesses for both formal identities.
pub fn separation_certificate(p: Exponent, q: Exponent, n_max: usize, cfg: &CertificateConfig) -> Result<Certificate> {
    let (a, b) = (p.reciprocal(), q.reciprocal());
    if !(a > 0.5 && a < 1.0 && b > 0.0 && b < 0.5) {
        return Err(Error::Domain(format!("certificate needs 1 < p < 2 < q < ∞, got p = {p}, q = {q}")));
    }
    let plan = TruncationPlan::new(n_max, BlockDimRule::Khintchine)?;
    let sampler = SamplerConfig { seed: cfg.seed, ..cfg.sampler.clone() };
    let mut sys_p = Vec::with_capacity(n_max);
    let mut sys_q = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        sys_p.push(khintchine_system(n, p, &sampler.equivalence, &sampler.power)?);
        sys_q.push(khintchine_system(n, q, &sampler.equivalence, &sampler.power)?);
    }
    let s_op = build_s(p, q, &plan, &sys_p)?;
    let t_op = build_t(p, q, &plan, &sys_q)?;
    let mut exact = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let phi_s = phi_n(&s_op, &FunctionalSpec::phi(n, p, q), &sys_p[n - 1])?;
        let psi_t = psi_n(&t_op, &FunctionalSpec::psi(n, p, q), &sys_q[n - 1])?;
        exact.push(ExactRow { n, phi_s, psi_t });
    }
    let exact_pass = exact
        .iter()
        .all(|r| (r.phi_s - 1.0).abs() <= cfg.exact_tol && (r.psi_t - 1.0).abs() <= cfg.exact_tol);

    let phi = decay_phi_with(p, q, 1..=n_max, &sampler, &mut |n| Ok(sys_p[n - 1].clone()))?;
    let psi = decay_psi_with(p, q, 1..=n_max, &sampler, &mut |n| Ok(sys_q[n - 1].clone()))?;
    let decay_pass = phi.all_pass() && psi.all_pass();

    let seeds = SeedTree::new(cfg.seed).child("fss", 0);
    let mut fss = Vec::new();
    for n in 1..=cfg.fss_max_n.min(n_max.max(1)).min(cfg.flat.max_n) {
        let m = (2 * n + 2).min(cfg.flat.max_m);
        let basis = gaussian_matrix(&mut seeds.rng("basis", n as u64), n, m);
        for (section, pp, qq) in [("I(2,q)", Exponent::TWO, q), ("I(p,2)", p, Exponent::TWO)] {
            let w = fss_witness(pp, qq, &basis, &cfg.flat)?;
            fss.push(FssRow { section: section.into(), n, m, norm_q: w.report.lhs, bound: w.report.rhs, pass: w.report.pass });
        }
    }
    let fss_pass = fss.iter().all(|r| r.pass);
    Ok(Certificate {
        p,
        q,
        n_max,
        seed: cfg.seed,
        exact,
        phi,
        psi,
        fss,
        exact_pass,
        decay_pass,
        fss_pass,
        all_pass: exact_pass && decay_pass && fss_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn one_block_hand_values() {
        let (p, q) = (e(1.5), e(3.0));
        let sp = KhintchineSystem::new(1, p).unwrap();
        let u = Matrix::from_rows(&[vec![0.7, -0.2]]).unwrap();
        let want = (0.7 + 0.2) * 2f64.powf(-1.0 / 1.5);
        assert!((phi_tilde(&u, &sp).unwrap() - want).abs() < 1e-15);
        let sq = KhintchineSystem::new(1, q).unwrap();
        let v = Matrix::from_rows(&[vec![0.3], vec![1.1]]).unwrap();
        let want = 2f64.powf(-1.0 / q.dual().value()) * (0.3 - 1.1);
        assert!((psi_tilde(&v, &sq).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn zero_operator_and_shape_errors() {
        let sys = KhintchineSystem::new(3, e(1.5)).unwrap();
        assert_eq!(phi_tilde(&Matrix::zeros(3, 8), &sys).unwrap(), 0.0);
        assert!(phi_tilde(&Matrix::zeros(3, 4), &sys).is_err());
        assert!(psi_tilde(&Matrix::zeros(3, 8), &sys).is_err());
    }

    #[test]
    fn exact_values_on_s_and_t() {
        let (p, q) = (e(1.5), e(3.0));
        let plan = TruncationPlan::new(4, BlockDimRule::Khintchine).unwrap();
        let sp: Vec<_> = (1..=4).map(|n| KhintchineSystem::new(n, p).unwrap()).collect();
        let sq: Vec<_> = (1..=4).map(|n| KhintchineSystem::new(n, q).unwrap()).collect();
        let s = build_s(p, q, &plan, &sp).unwrap();
        let t = build_t(p, q, &plan, &sq).unwrap();
        for n in 1..=4 {
            assert!((phi_n(&s, &FunctionalSpec::phi(n, p, q), &sp[n - 1]).unwrap() - 1.0).abs() < 1e-12);
            assert!((psi_n(&t, &FunctionalSpec::psi(n, p, q), &sq[n - 1]).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(phi_n(&s, &FunctionalSpec::phi(2, p, q), &sp[0]).is_err());
        assert!(psi_n(&s, &FunctionalSpec::psi(2, p, q), &sq[1]).is_err());
    }

    #[test]
    fn slope_fit() {
        assert_eq!(loglog_slope(&[(1.0, 2.0)]), None);
        let s = loglog_slope(&[(1.0, 3.0), (2.0, 3.0), (4.0, 3.0)]).unwrap();
        assert!(s.abs() < 1e-15);
        let s = loglog_slope(&[(1.0, 1.0), (2.0, 0.25), (4.0, 0.0625)]).unwrap();
        assert!((s + 2.0).abs() < 1e-12);
    }

    #[test]
    fn rademacher_interpolation_step_is_an_equality() {
        // b_i = x_{(n,i)} itself: ‖x‖₂ = 2^{n/2 − n/p} = ‖x‖_∞^{(2−p)/2} ‖x‖_p^{p/2}
        for n in 1..=6 {
            let p = e(1.5);
            let sys = KhintchineSystem::new(n, p).unwrap();
            let x = sys.vectors().row(0);
            let lhs = lp::norm(x, Exponent::TWO);
            let sup = lp::norm(x, Exponent::INFINITY);
            let rhs = sup.powf((2.0 - 1.5) / 2.0) * lp::norm(x, p).powf(1.5 / 2.0);
            assert!((lhs - rhs).abs() < 1e-9 && (lhs - 2f64.powf(n as f64 * (0.5 - 1.0 / 1.5))).abs() < 1e-12);
        }
    }

    #[test]
    fn small_decay_tables_pass() {
        let cfg = SamplerConfig { samples: 4, ..SamplerConfig::default() };
        let phi = decay_experiment_phi(e(1.5), e(3.0), 1..=3, &cfg).unwrap();
        assert_eq!(phi.rows.len(), 12);
        assert!(phi.all_pass(), "{:?}", phi.rows.iter().find(|r| !r.pass || !r.chain.all_steps_pass));
        let psi = decay_experiment_psi(e(1.5), e(3.0), 1..=3, &cfg).unwrap();
        assert!(psi.all_pass(), "{:?}", psi.rows.iter().find(|r| !r.pass || !r.chain.all_steps_pass));
        assert!(decay_experiment_phi(e(2.5), e(3.0), 1..=2, &cfg).is_err());
        assert!(decay_experiment_psi(e(1.5), e(1.8), 1..=2, &cfg).is_err());
    }

    #[test]
    fn degenerate_certificate() {
        let cfg = CertificateConfig { sampler: SamplerConfig { samples: 3, ..SamplerConfig::default() }, ..Default::default() };
        let c = separation_certificate(e(1.5), e(3.0), 1, &cfg).unwrap();
        assert!(c.all_pass);
        assert_eq!(c.exact.len(), 1);
    }
}
