//! Checks of the counting bound, the column-average decay bound and the
//! factorization lower bound, plus the randomized campaigns that drive them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, Exponent};
use crate::matrix::Matrix;
use crate::operator::BlockOperator;
use crate::opnorm::{opnorm_bracket, opnorm_upper, power_iterate, NormBracket, PowerIterConfig};
use crate::report::{digest_f64s, BoundReport};
use crate::rng::{gaussian_matrix, SeedTree};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Growth exponents `s > t ≥ 1` of the domain and codomain bases, with the
/// constants `c₁, c₂, c_u` of the growth hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisGrowthProfile {
    pub s: f64,
    pub t: f64,
    pub c1: f64,
    pub c2: f64,
    pub cu: f64,
}

impl BasisGrowthProfile {
    /// Exact `ℓs`/`ℓt` unit bases: all constants equal 1.
    pub fn unit(s: f64, t: f64) -> Result<Self> {
        check_st(s, t)?;
        Ok(BasisGrowthProfile { s, t, c1: 1.0, c2: 1.0, cu: 1.0 })
    }

    pub fn kappa(&self) -> f64 {
        counting_exponent(self.s, self.t).expect("validated profile")
    }

    pub fn r(&self) -> f64 {
        decay_exponent_r(self.s, self.t).expect("validated profile")
    }

    fn require_unit(&self) -> Result<()> {
        check_st(self.s, self.t)?;
        if self.c1 != 1.0 || self.c2 != 1.0 || self.cu != 1.0 {
            return Err(Error::Domain("only unit constants c₁ = c₂ = c_u = 1 are supported".into()));
        }
        Ok(())
    }
}

fn check_st(s: f64, t: f64) -> Result<()> {
    if !(t >= 1.0 && t < s && s.is_finite()) {
        return Err(Error::Domain(format!("need 1 ≤ t < s < ∞, got s = {s}, t = {t}")));
    }
    Ok(())
}

/// `r(s,t) = (s−1)(s−t) / ((s−1)(s−t) + s²)`
pub fn decay_exponent_r(s: f64, t: f64) -> Result<f64> {
    check_st(s, t)?;
    let d = (s - 1.0) * (s - t);
    Ok(d / (d + s * s))
}

/// `κ(s,t) = s² / ((s−1)(s−t))`, the exponent of `ρ` in the counting bound.
pub fn counting_exponent(s: f64, t: f64) -> Result<f64> {
    check_st(s, t)?;
    if s == 1.0 {
        return Err(Error::Domain("s must exceed 1".into()));
    }
    Ok(s * s / ((s - 1.0) * (s - t)))
}

/// `‖T e_j‖_∞` for every column.
pub fn column_sup_norms(m: &Matrix) -> Vec<f64> {
    (0..m.cols()).map(|j| lp::norm(&m.column(j), Exponent::INFINITY)).collect()
}

fn check_operator(t: &BlockOperator, profile: &BasisGrowthProfile) -> Result<()> {
    profile.require_unit()?;
    let dom = t.domain().as_plain().map(|(p, _)| p);
    let cod = t.codomain().as_plain().map(|(q, _)| q);
    let want = (Exponent::new(profile.s)?, Exponent::new(profile.t)?);
    match (dom, cod) {
        (Some(p), Some(q)) if p.approx_eq(want.0) && q.approx_eq(want.1) => Ok(()),
        _ => Err(Error::Config(format!(
            "operator must act from ℓ{} to ℓ{} (plain spaces)",
            profile.s, profile.t
        ))),
    }
}

/// The counting bound `|{j : ‖Te_j‖_∞ ≥ ρ‖T‖}| ≤ ρ^{−κ}` with `c = 1`.
///
/// The threshold uses `bracket.lower`, which can only enlarge the counted
/// set, so a pass is a proof for this `T`. The count at `bracket.upper` is
/// reported alongside.
pub fn verify_lemma25(t: &BlockOperator, rho: f64, profile: &BasisGrowthProfile, cfg: &PowerIterConfig) -> Result<BoundReport> {
    check_operator(t, profile)?;
    let bracket = opnorm_bracket(t, cfg)?;
    verify_lemma25_with(t, &bracket, rho, profile)
}

/// [`verify_lemma25`] with a precomputed bracket of `‖T‖_{s→t}`.
pub fn verify_lemma25_with(t: &BlockOperator, bracket: &NormBracket, rho: f64, profile: &BasisGrowthProfile) -> Result<BoundReport> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("ρ must be positive, got {rho}")));
    }
    check_operator(t, profile)?;
    let sups = column_sup_norms(t.matrix());
    let count = |norm: f64| sups.iter().filter(|v| **v >= norm * rho).count();
    let kappa = profile.kappa();
    let count_lower = count(bracket.lower);
    let count_upper = count(bracket.upper);
    let rhs = rho.powf(-kappa);
    let digest = digest_f64s("lemma25", t.matrix().data());
    Ok(BoundReport::new("lemma25", count_lower as f64, rhs, DEFAULT_TOL, digest)
        .with_constant("rho", rho)
        .with_constant("kappa", kappa)
        .with_constant("c", 1.0)
        .with_constant("norm_lower", bracket.lower)
        .with_constant("norm_upper", bracket.upper)
        .with_constant("count_at_upper", count_upper as f64))
}

/// Column-average decay `(1/m) Σ ‖Te_j‖_∞ ≤ (1+c) ‖T‖ m^{−r(s,t)}` with `c = 1`.
///
/// Pass/fail uses `bracket.lower` for `‖T‖` (a proof when it passes); the
/// right-hand side with `bracket.upper` is reported as `rhs_at_upper`.
pub fn verify_cor26(t: &BlockOperator, profile: &BasisGrowthProfile, cfg: &PowerIterConfig) -> Result<BoundReport> {
    check_operator(t, profile)?;
    let bracket = opnorm_bracket(t, cfg)?;
    verify_cor26_with(t, &bracket, profile)
}

pub fn verify_cor26_with(t: &BlockOperator, bracket: &NormBracket, profile: &BasisGrowthProfile) -> Result<BoundReport> {
    check_operator(t, profile)?;
    let sups = column_sup_norms(t.matrix());
    let m = sups.len() as f64;
    let lhs = sups.iter().sum::<f64>() / m;
    let r = profile.r();
    let factor = 2.0 * m.powf(-r);
    let digest = digest_f64s("cor26", t.matrix().data());
    Ok(BoundReport::new("cor26", lhs, factor * bracket.lower, DEFAULT_TOL, digest)
        .with_constant("r", r)
        .with_constant("c", 1.0)
        .with_constant("m", m)
        .with_constant("norm_lower", bracket.lower)
        .with_constant("norm_upper", bracket.upper)
        .with_constant("rhs_at_upper", factor * bracket.upper))
}

/// `max_k k·(v_(k)/norm)^κ` over the decreasingly sorted column sup norms:
/// the largest value of `count(ρ)·ρ^κ`, i.e. of lhs/rhs in the counting bound.
pub fn counting_ratio(sups: &[f64], norm: f64, kappa: f64) -> f64 {
    if norm <= 0.0 {
        return 0.0;
    }
    let mut v = sups.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.iter()
        .enumerate()
        .map(|(k, x)| (k + 1) as f64 * (x / norm).powf(kappa))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialConfig {
    pub restarts: usize,
    pub sweeps: usize,
    /// Entries visited per sweep (chosen at random); `0` visits every entry.
    pub entries_per_sweep: usize,
    /// Warm-started power iterations per candidate evaluation.
    pub power_iters: usize,
    pub seed: u64,
    pub power: PowerIterConfig,
}

impl Default for AdversarialConfig {
    fn default() -> Self {
        AdversarialConfig {
            restarts: 8,
            sweeps: 20,
            entries_per_sweep: 0,
            power_iters: 8,
            seed: 0,
            power: PowerIterConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialResult {
    /// Worst ratio with `‖T‖` replaced by its bracket lower end (≥ the true ratio).
    pub worst_ratio: f64,
    /// The same matrix with the bracket upper end (≤ the true ratio).
    pub worst_ratio_at_upper: f64,
    pub restart_ratios: Vec<f64>,
    pub worst_matrix: Matrix,
}

/// Hill climbing on matrix entries to maximize the counting ratio
/// `count(ρ)/ρ^{−κ}` over `ρ`, for `T : ℓs(m) → ℓt(n)`.
///
/// Starts: a partial identity, a Sylvester sign pattern, then Gaussians. Each
/// visited entry tries the factors `{0.5, 0.9, 1.1, 2.0}`; the norm is
/// re-estimated by a few warm-started power iterations.
pub fn adversarial_lemma25(s: f64, t: f64, m: usize, n: usize, cfg: &AdversarialConfig) -> Result<AdversarialResult> {
    let profile = BasisGrowthProfile::unit(s, t)?;
    if m == 0 || n == 0 || m > 256 || n > 256 {
        return Err(Error::Capacity(format!("adversarial search on {n}×{m} outside 1..=256")));
    }
    let (ps, pt) = (Exponent::new(s)?, Exponent::new(t)?);
    let kappa = profile.kappa();
    let seeds = SeedTree::new(cfg.seed);
    let warm = PowerIterConfig { max_iters: cfg.power_iters.max(1), ..cfg.power.clone() };

    let mut restart_ratios = Vec::with_capacity(cfg.restarts);
    let mut worst: Option<(f64, f64, Matrix)> = None;
    for r in 0..cfg.restarts {
        let mut rng = seeds.rng("adversarial", r as u64);
        let mut mat = match r {
            0 => Matrix::from_fn(n, m, |i, j| if i == j { 1.0 } else { 0.0 }),
            1 => Matrix::from_fn(n, m, |i, j| if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 }),
            _ => gaussian_matrix(&mut rng, n, m),
        };
        if mat.is_zero() {
            mat.set(0, 0, 1.0);
        }
        let mut op = BlockOperator::plain(mat.clone(), ps, pt)?;
        let mut witness = opnorm_bracket(&op, &cfg.power)?.witness;
        let eval = |op: &BlockOperator, x: &[f64]| {
            let run = power_iterate(op, x, &warm);
            (counting_ratio(&column_sup_norms(op.matrix()), run.value, kappa), run.witness)
        };
        let (mut current, w) = eval(&op, &witness);
        witness = w;
        let total = n * m;
        for _ in 0..cfg.sweeps {
            let visits: Vec<usize> = if cfg.entries_per_sweep == 0 || cfg.entries_per_sweep >= total {
                (0..total).collect()
            } else {
                (0..cfg.entries_per_sweep).map(|_| rng.random_range(0..total)).collect()
            };
            let mut improved = false;
            for idx in visits {
                let (i, j) = (idx / m, idx % m);
                let old = mat.get(i, j);
                if old == 0.0 {
                    continue;
                }
                let mut best: Option<(f64, f64, Vec<f64>)> = None;
                for f in [0.5, 0.9, 1.1, 2.0] {
                    mat.set(i, j, old * f);
                    let cand = BlockOperator::plain(mat.clone(), ps, pt)?;
                    let (v, w) = eval(&cand, &witness);
                    if v > current && best.as_ref().is_none_or(|b| v > b.0) {
                        best = Some((v, f, w));
                    }
                }
                match best {
                    Some((v, f, w)) => {
                        mat.set(i, j, old * f);
                        current = v;
                        witness = w;
                        improved = true;
                    }
                    None => mat.set(i, j, old),
                }
            }
            if !improved {
                break;
            }
        }
        op = BlockOperator::plain(mat.clone(), ps, pt)?;
        let bracket = opnorm_bracket(&op, &cfg.power)?;
        let sups = column_sup_norms(&mat);
        let at_lower = counting_ratio(&sups, bracket.lower, kappa);
        let at_upper = counting_ratio(&sups, bracket.upper, kappa);
        restart_ratios.push(at_lower);
        if worst.as_ref().is_none_or(|w| at_lower > w.0) {
            worst = Some((at_lower, at_upper, mat));
        }
    }
    let (worst_ratio, worst_ratio_at_upper, worst_matrix) = worst.ok_or_else(|| Error::Config("restarts must be at least 1".into()))?;
    Ok(AdversarialResult { worst_ratio, worst_ratio_at_upper, restart_ratios, worst_matrix })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub trials: usize,
    pub seed: u64,
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub min_dim: usize,
    pub max_dim: usize,
    pub power: PowerIterConfig,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            trials: 1000,
            seed: 0,
            s_grid: vec![1.8, 2.0, 3.0],
            t_grid: vec![1.2, 1.5],
            rho_grid: vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            min_dim: 2,
            max_dim: 24,
            power: PowerIterConfig { restarts: 4, ..PowerIterConfig::default() },
        }
    }
}

/// One campaign row; `rho` is NaN for column-average rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzRow {
    pub check: String,
    pub trial: usize,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub s: f64,
    pub t: f64,
    pub rho: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Random `T : ℓs(m) → ℓt(n)`, normalized so that its bracket upper end is 1,
/// checked against the counting bound at every `ρ` of the grid and against the
/// column-average bound.
///
/// `checks` selects `"lemma25"`, `"cor26"` or both.
pub fn fuzz_campaign(cfg: &FuzzConfig, checks: &[&str]) -> Result<Vec<FuzzRow>> {
    if cfg.s_grid.is_empty() || cfg.t_grid.is_empty() || cfg.min_dim < 1 || cfg.max_dim < cfg.min_dim {
        return Err(Error::Config("fuzz campaign needs nonempty grids and 1 ≤ min_dim ≤ max_dim".into()));
    }
    let pairs: Vec<(f64, f64)> = cfg
        .s_grid
        .iter()
        .flat_map(|&s| cfg.t_grid.iter().map(move |&t| (s, t)))
        .filter(|(s, t)| t < s)
        .collect();
    if pairs.is_empty() {
        return Err(Error::Config("no grid pair with t < s".into()));
    }
    let seeds = SeedTree::new(cfg.seed);
    let mut rows = Vec::new();
    for trial in 0..cfg.trials {
        let trial_seed = seeds.derive("fuzz-trial", trial as u64);
        let mut rng = crate::rng::seeded(trial_seed);
        let (s, t) = pairs[trial % pairs.len()];
        let profile = BasisGrowthProfile::unit(s, t)?;
        let m = rng.random_range(cfg.min_dim..=cfg.max_dim);
        let n = rng.random_range(cfg.min_dim..=cfg.max_dim);
        let g = gaussian_matrix(&mut rng, n, m);
        let raw = BlockOperator::plain(g, Exponent::new(s)?, Exponent::new(t)?)?;
        let pcfg = cfg.power.clone().with_seed(trial_seed);
        let b = opnorm_bracket(&raw, &pcfg)?;
        let op = raw.scaled(1.0 / b.upper);
        let bracket = NormBracket { lower: b.lower / b.upper, upper: 1.0, witness: b.witness, method_tags: b.method_tags };
        let base = |check: &str, rho: f64, rep: &BoundReport| FuzzRow {
            check: check.to_string(),
            trial,
            seed: trial_seed,
            m,
            n,
            s,
            t,
            rho,
            lhs: rep.lhs,
            rhs: rep.rhs,
            pass: rep.pass,
        };
        if checks.contains(&"lemma25") {
            for &rho in &cfg.rho_grid {
                let rep = verify_lemma25_with(&op, &bracket, rho, &profile)?;
                rows.push(base("lemma25", rho, &rep));
            }
        }
        if checks.contains(&"cor26") {
            let rep = verify_cor26_with(&op, &bracket, &profile)?;
            rows.push(base("cor26", f64::NAN, &rep));
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationBound {
    /// Upper end of the bracket of `‖V⁻¹‖` on the configured exponent pair.
    pub delta: f64,
    /// `1/δ`
    pub bound: f64,
    pub pair: (Exponent, Exponent),
    pub delta_bracket: NormBracket,
}

/// `δ⁻¹` with `δ = ‖V⁻¹‖` measured from `ℓ_{pair.0}` to `ℓ_{pair.1}`;
/// the pair defaults to `(r′, r′)`.
pub fn factorization_lower_bound(
    v: &BlockOperator,
    r: Exponent,
    pair: Option<(Exponent, Exponent)>,
    cfg: &PowerIterConfig,
) -> Result<FactorizationBound> {
    let (rows, cols) = v.matrix().shape();
    if rows != cols {
        return Err(Error::Dimension(format!("V is {rows}×{cols}, not square")));
    }
    let pair = pair.unwrap_or((r.dual(), r.dual()));
    let inv = v.matrix().inverse()?;
    let delta_bracket = opnorm_bracket(&BlockOperator::plain(inv, pair.0, pair.1)?, cfg)?;
    let delta = delta_bracket.upper;
    Ok(FactorizationBound { delta, bound: 1.0 / delta, pair, delta_bracket })
}

/// `V = A·B` through `k` intermediate dimensions: `B` is a `k × m` Gaussian
/// and `A = V·B⁺` with `B⁺` the left inverse of `B` (`k ≥ m`).
pub fn random_factorization(v: &Matrix, k: usize, rng: &mut impl Rng) -> Result<(Matrix, Matrix)> {
    let m = v.cols();
    if k < m {
        return Err(Error::Dimension(format!("intermediate dimension {k} below {m}")));
    }
    let b = gaussian_matrix(rng, k, m);
    let a = v.matmul(&b.left_inverse()?)?;
    Ok((a, b))
}

/// `‖A‖_{r→q} · ‖B‖_{p→r}` from upper bracket ends.
pub fn factorization_cost(a: &Matrix, b: &Matrix, p: Exponent, q: Exponent, r: Exponent, cfg: &PowerIterConfig) -> Result<f64> {
    let (ua, _) = opnorm_upper(&BlockOperator::plain(a.clone(), r, q)?, cfg)?;
    let (ub, _) = opnorm_upper(&BlockOperator::plain(b.clone(), p, r)?, cfg)?;
    Ok(ua * ub)
}

/// For `Ṽ` within `(2 max_i ‖V⁻¹e_i‖_p)⁻¹` of `V` in `ℓp → ℓq`, every
/// factorization of `Ṽ` through `ℓr` costs at least `(2δ)⁻¹`.
///
/// The report compares `(2δ)⁻¹` (lhs) with the cost of the trivial
/// factorization `Ṽ = Ṽ ∘ I` through `ℓr` (rhs). It is marked inapplicable
/// when the perturbation hypothesis fails.
pub fn perturbed_factorization_bound(
    v: &BlockOperator,
    v_tilde: &BlockOperator,
    p: Exponent,
    q: Exponent,
    r: Exponent,
    cfg: &PowerIterConfig,
) -> Result<BoundReport> {
    if v.matrix().shape() != v_tilde.matrix().shape() {
        return Err(Error::Dimension("V and Ṽ differ in shape".into()));
    }
    let fb = factorization_lower_bound(v, r, None, cfg)?;
    let inv = v.matrix().inverse()?;
    let max_col = (0..inv.cols()).map(|j| lp::norm(&inv.column(j), p)).fold(0.0, f64::max);
    let radius = 1.0 / (2.0 * max_col);
    let diff = v_tilde.matrix().sub(v.matrix())?;
    let distance = if diff.is_zero() { 0.0 } else { opnorm_upper(&BlockOperator::plain(diff, p, q)?, cfg)?.0 };
    let lhs = 1.0 / (2.0 * fb.delta);
    let n = v.matrix().cols();
    let id = Matrix::identity(n);
    let rhs = factorization_cost(v_tilde.matrix(), &id, p, q, r, cfg)?;
    let mut data = v.matrix().data().to_vec();
    data.extend_from_slice(v_tilde.matrix().data());
    let report = BoundReport::new("perturbed-factorization", lhs, rhs, DEFAULT_TOL, digest_f64s("perturbed", &data))
        .with_constant("delta", fb.delta)
        .with_constant("radius", radius)
        .with_constant("distance", distance);
    Ok(if distance <= radius { report } else { report.inapplicable() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::scaled_hadamard_block;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn exponent_formulas() {
        assert!((decay_exponent_r(2.0, 1.0).unwrap() - 0.2).abs() < 1e-15);
        assert!((decay_exponent_r(2.0, 1.5).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(decay_exponent_r(2.0, 2.0 - 1e-9).unwrap() < 1e-8);
        assert_eq!(counting_exponent(2.0, 1.0).unwrap(), 4.0);
        assert_eq!(counting_exponent(3.0, 2.0).unwrap(), 4.5);
        assert!(matches!(decay_exponent_r(1.5, 2.0), Err(Error::Domain(_))));
        assert!(counting_exponent(2.0, 2.0).is_err());
    }

    #[test]
    fn single_attaining_column() {
        let mut m = Matrix::zeros(3, 4);
        m.set(1, 2, 2.0);
        let t = BlockOperator::plain(m, e(2.0), e(1.5)).unwrap();
        let p = BasisGrowthProfile::unit(2.0, 1.5).unwrap();
        let r = verify_lemma25(&t, 1.0, &p, &PowerIterConfig::default()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (1.0, 1.0, true));
        assert!(verify_lemma25(&t, 0.0, &p, &PowerIterConfig::default()).is_err());
    }

    #[test]
    fn operator_spaces_must_match_profile() {
        let t = BlockOperator::plain(Matrix::identity(2), e(2.0), e(2.0)).unwrap();
        let p = BasisGrowthProfile::unit(2.0, 1.5).unwrap();
        assert!(matches!(verify_cor26(&t, &p, &PowerIterConfig::default()), Err(Error::Config(_))));
    }

    #[test]
    fn one_column_average() {
        let t = BlockOperator::plain(Matrix::from_rows(&[vec![0.5], vec![-2.0]]).unwrap(), e(2.0), e(1.2)).unwrap();
        let r = verify_cor26(&t, &BasisGrowthProfile::unit(2.0, 1.2).unwrap(), &PowerIterConfig::default()).unwrap();
        assert!(r.pass && r.lhs == 2.0);
    }

    #[test]
    fn counting_ratio_matches_direct_count() {
        let sups = [0.9, 0.5, 0.5, 0.1];
        let kappa = 3.0;
        let direct = [0.05, 0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .map(|rho: &f64| sups.iter().filter(|v| **v >= *rho).count() as f64 * rho.powf(kappa))
            .fold(0.0, f64::max);
        assert!(counting_ratio(&sups, 1.0, kappa) >= direct);
        assert!((counting_ratio(&sups, 1.0, kappa) - 0.9f64.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn identity_factorization_bound() {
        let v = BlockOperator::plain(Matrix::identity(4), e(2.0), e(2.0)).unwrap();
        let fb = factorization_lower_bound(&v, Exponent::TWO, None, &PowerIterConfig::default()).unwrap();
        assert!((fb.delta - 1.0).abs() < 1e-12 && (fb.bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_factorization_bound_grows() {
        let (p, q) = (e(1.5), e(3.0));
        let mut prev = 0.0;
        for n in 1..=4 {
            let u = scaled_hadamard_block(n, p, q).unwrap();
            let fb = factorization_lower_bound(&u, Exponent::TWO, None, &PowerIterConfig::default()).unwrap();
            assert!(fb.bound >= prev - 1e-12);
            prev = fb.bound;
            // A = V, B = I through ℓ2
            let cost = factorization_cost(u.matrix(), &Matrix::identity(1 << n), p, q, Exponent::TWO, &PowerIterConfig::default()).unwrap();
            assert!(cost >= fb.bound - 1e-9);
        }
    }

    #[test]
    fn perturbation_hypothesis() {
        let (p, q) = (e(1.5), e(3.0));
        let u = scaled_hadamard_block(2, p, q).unwrap();
        let cfg = PowerIterConfig::default();
        let same = perturbed_factorization_bound(&u, &u, p, q, Exponent::TWO, &cfg).unwrap();
        assert!(same.applicable && same.pass);
        let radius = same.constants["radius"];
        let mut tiny = u.matrix().clone();
        tiny.set(0, 0, tiny.get(0, 0) + radius * 0.1);
        let near = perturbed_factorization_bound(&u, &BlockOperator::plain(tiny, p, q).unwrap(), p, q, Exponent::TWO, &cfg).unwrap();
        assert!(near.applicable);
        let far = perturbed_factorization_bound(&u, &u.scaled(-3.0), p, q, Exponent::TWO, &cfg).unwrap();
        assert!(!far.applicable);
    }

    #[test]
    fn small_campaign_passes() {
        let cfg = FuzzConfig { trials: 30, ..FuzzConfig::default() };
        let rows = fuzz_campaign(&cfg, &["lemma25", "cor26"]).unwrap();
        assert_eq!(rows.len(), 30 * 10);
        assert!(rows.iter().all(|r| r.pass));
    }

    #[test]
    fn adversarial_small() {
        let cfg = AdversarialConfig { restarts: 3, sweeps: 3, ..AdversarialConfig::default() };
        let r = adversarial_lemma25(2.0, 1.5, 4, 4, &cfg).unwrap();
        assert!(r.worst_ratio <= 1.0 + 1e-9, "{r:?}");
        assert!(r.worst_ratio_at_upper <= r.worst_ratio + 1e-12);
        let one = adversarial_lemma25(2.0, 1.5, 1, 1, &cfg).unwrap();
        assert!(one.worst_ratio <= 1.0 + 1e-9);
    }
}
