use lpideal::bounds::{factorization_cost, factorization_lower_bound, fuzz_campaign, random_factorization, FuzzConfig, FuzzRow};
use lpideal::constructions::{
    build_s, build_t, build_tpq, build_u, formal_identity_section, hadamard, scaled_hadamard_block, BlockDimRule, TruncationPlan,
};
use lpideal::functionals::{
    decay_experiment_phi, decay_experiment_psi, separation_certificate, CertificateConfig, DecayTable, SamplerConfig,
};
use lpideal::khintchine::{flat_vector_search, fss_witness, khintchine_system, EquivalenceConfig, FlatSearchConfig, KhintchineSystem};
use lpideal::operator::OperatorDoc;
use lpideal::opnorm::{opnorm_bracket, PowerIterConfig};
use lpideal::rng::{gaussian_matrix, SeedTree};
use lpideal::{BlockOperator, Exponent, Matrix};
use serde::Serialize;

use crate::output::{f, Output};
use crate::params::{fill, Params};
use crate::{CheckResult, LabError};

type Checks = Result<Vec<CheckResult>, LabError>;

pub(crate) fn dispatch(command: &str, params: &mut Params, out: &mut Output) -> Checks {
    match command {
        "opnorm" => opnorm(params, out),
        "construct" => construct(params, out),
        "khintchine" => khintchine(params, out),
        "fss" => fss(params, out),
        "flat-vector" => flat_vector(params, out),
        "verify lemma25" => verify_fuzz(params, out, "lemma25"),
        "verify cor26" => verify_fuzz(params, out, "cor26"),
        "verify factor-bound" => factor_bound(params, out),
        "functionals phi" => functionals(params, out, true),
        "functionals psi" => functionals(params, out, false),
        "functionals certify" | "certify" => certify(params, out),
        other => Err(LabError::Config(format!("unknown command {other}"))),
    }
}

fn exponent(v: f64) -> Result<Exponent, LabError> {
    Ok(Exponent::new(v)?)
}

fn power_config(params: &mut Params, seed: u64, restarts: usize) -> Result<PowerIterConfig, LabError> {
    let base = PowerIterConfig::default();
    let cfg = PowerIterConfig {
        restarts: fill(&mut params.restarts, restarts),
        max_iters: fill(&mut params.max_iters, base.max_iters),
        seed,
        ..base
    };
    cfg.validate()?;
    Ok(cfg)
}

fn opnorm(params: &mut Params, out: &mut Output) -> Checks {
    let path = params.matrix.clone().ok_or_else(|| LabError::Config("opnorm needs --matrix".into()))?;
    let text = std::fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    let doc: OperatorDoc =
        serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    let p = params.p.map(exponent).transpose()?;
    let q = params.q.map(exponent).transpose()?;
    let op = doc.into_operator(p, q)?;
    let seed = fill(&mut params.seed, 0);
    let cfg = power_config(params, seed, PowerIterConfig::default().restarts)?;
    let b = opnorm_bracket(&op, &cfg)?;
    out.json("bracket.json", &b)?;
    out.note(format!("[{}, {}]", f(b.lower), f(b.upper)));
    Ok(vec![CheckResult::new("bracket-ordered", [b.lower <= b.upper * (1.0 + 1e-12)])])
}

fn systems(n_max: usize, p: Exponent) -> Result<Vec<KhintchineSystem>, LabError> {
    (1..=n_max).map(|n| KhintchineSystem::new(n, p).map_err(LabError::from)).collect()
}

fn construct(params: &mut Params, out: &mut Output) -> Checks {
    let name = fill(&mut params.name, "u".into());
    let p = exponent(fill(&mut params.p, 1.5))?;
    let q = exponent(fill(&mut params.q, 3.0))?;
    let op = match name.as_str() {
        "u" | "s" | "t" | "tpq" => {
            let n_max = fill(&mut params.n_max, 4);
            match name.as_str() {
                "u" => build_u(p, q, &TruncationPlan::new(n_max, BlockDimRule::Hadamard)?)?,
                "s" => build_s(p, q, &TruncationPlan::new(n_max, BlockDimRule::Khintchine)?, &systems(n_max, p)?)?,
                "t" => build_t(p, q, &TruncationPlan::new(n_max, BlockDimRule::Khintchine)?, &systems(n_max, q)?)?,
                _ => build_tpq(p, q, &TruncationPlan::new(n_max, BlockDimRule::Linear)?)?,
            }
        }
        "hadamard" => {
            let n = fill(&mut params.n, 3);
            BlockOperator::plain(hadamard(n as u32)?, p, q)?
        }
        "identity" => formal_identity_section(p, q, fill(&mut params.m, 8))?,
        other => return Err(LabError::Config(format!("unknown operator {other}; expected u, s, t, tpq, hadamard or identity"))),
    };
    out.json("operator.json", &op.to_doc())?;
    Ok(vec![CheckResult::new("block-diagonal", [op.is_block_diagonal()])])
}

#[derive(Serialize)]
struct KhintchineReport<'a> {
    n: usize,
    p: Exponent,
    lo: f64,
    hi: f64,
    measured_c: f64,
    projection: &'a lpideal::opnorm::NormBracket,
}

fn khintchine(params: &mut Params, out: &mut Output) -> Checks {
    let n = fill(&mut params.n, 4);
    let p = exponent(fill(&mut params.p, 1.5))?;
    let seed = fill(&mut params.seed, 0);
    let samples = fill(&mut params.samples, EquivalenceConfig::default().samples);
    let eq = EquivalenceConfig { samples, seed, ..EquivalenceConfig::default() };
    let cfg = power_config(params, seed, PowerIterConfig::default().restarts)?;
    let sys = khintchine_system(n, p, &eq, &cfg)?;
    let c = sys.constants().expect("measured system");
    out.json("khintchine.json", &KhintchineReport { n, p, lo: c.lo, hi: c.hi, measured_c: c.measured_c, projection: &c.projection })?;
    out.note(format!("lo = {}, hi = {}, C = {}", f(c.lo), f(c.hi), f(c.measured_c)));
    Ok(vec![CheckResult::new("constants-ordered", [c.lo <= c.hi])])
}

fn flat_config(params: &mut Params) -> FlatSearchConfig {
    let base = FlatSearchConfig::default();
    FlatSearchConfig { tol: fill(&mut params.tol, base.tol), ..base }
}

fn fss(params: &mut Params, out: &mut Output) -> Checks {
    let p = exponent(fill(&mut params.p, 2.0))?;
    let q = exponent(fill(&mut params.q, 3.0))?;
    let n = fill(&mut params.n, 3);
    let m = fill(&mut params.m, 2 * n + 2);
    let trials = fill(&mut params.trials, 100);
    let seeds = SeedTree::new(fill(&mut params.seed, 0));
    let cfg = flat_config(params);
    let mut rows = Vec::with_capacity(trials);
    let mut pass = Vec::with_capacity(trials);
    for trial in 0..trials {
        let basis = gaussian_matrix(&mut seeds.rng("fss", trial as u64), n, m);
        let w = fss_witness(p, q, &basis, &cfg)?;
        rows.push(vec![
            trial.to_string(),
            n.to_string(),
            m.to_string(),
            f(w.report.lhs),
            f(w.report.rhs),
            f(w.sup_norm),
            w.report.pass.to_string(),
        ]);
        pass.push(w.report.pass);
    }
    out.csv("fss.csv", &["trial", "n", "m", "lhs", "rhs", "sup_norm", "pass"], &rows)?;
    Ok(vec![CheckResult::new("fss", pass)])
}

/// Independent check of a flat vector: `x = Σ cₖ·rowₖ` and at least `n`
/// coordinates of modulus `‖x‖_∞ = 1`.
fn flat_check(basis: &Matrix, x: &[f64], coeffs: &[f64], tol: f64) -> (f64, usize, bool) {
    let rebuilt = basis.tmul_vec(coeffs);
    let residual = rebuilt.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sup = x.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let attaining = x.iter().filter(|v| v.abs() >= 1.0 - tol).count();
    let ok = residual < tol && (sup - 1.0).abs() <= tol && attaining >= basis.rows();
    (residual, attaining, ok)
}

fn flat_vector(params: &mut Params, out: &mut Output) -> Checks {
    let cfg = flat_config(params);
    if let Some(path) = params.matrix.clone() {
        let text = std::fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
        let doc: OperatorDoc =
            serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let basis = Matrix::new(doc.rows, doc.cols, doc.data)?;
        let w = flat_vector_search(&basis, &cfg)?;
        let (_, _, ok) = flat_check(&basis, &w.x, &w.coefficients, cfg.tol);
        out.json("flat_vector.json", &w)?;
        return Ok(vec![CheckResult::new("flat-vector", [ok])]);
    }
    let n = fill(&mut params.n, 3);
    let m = fill(&mut params.m, 8);
    let trials = fill(&mut params.trials, 100);
    let seeds = SeedTree::new(fill(&mut params.seed, 0));
    let mut rows = Vec::with_capacity(trials);
    let mut pass = Vec::with_capacity(trials);
    for trial in 0..trials {
        let basis = gaussian_matrix(&mut seeds.rng("flat", trial as u64), n, m);
        let w = flat_vector_search(&basis, &cfg)?;
        let (residual, attaining, ok) = flat_check(&basis, &w.x, &w.coefficients, cfg.tol);
        rows.push(vec![trial.to_string(), n.to_string(), m.to_string(), attaining.to_string(), f(residual), ok.to_string()]);
        pass.push(ok);
    }
    out.csv("flat_vector.csv", &["trial", "n", "m", "attaining", "residual", "pass"], &rows)?;
    Ok(vec![CheckResult::new("flat-vector", pass)])
}

fn fuzz_rows(rows: &[FuzzRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.seed.to_string(),
                r.m.to_string(),
                r.n.to_string(),
                f(r.s),
                f(r.t),
                f(r.rho),
                f(r.lhs),
                f(r.rhs),
                r.pass.to_string(),
            ]
        })
        .collect()
}

fn verify_fuzz(params: &mut Params, out: &mut Output, check: &str) -> Checks {
    let base = FuzzConfig::default();
    let seed = fill(&mut params.seed, 0);
    let mut cfg = FuzzConfig {
        trials: fill(&mut params.trials, base.trials),
        seed,
        min_dim: fill(&mut params.min_dim, base.min_dim),
        max_dim: fill(&mut params.max_dim, base.max_dim),
        power: power_config(params, seed, base.power.restarts)?,
        ..base
    };
    if let Some(s) = params.s {
        cfg.s_grid = vec![s];
    }
    if let Some(t) = params.t {
        cfg.t_grid = vec![t];
    }
    if let Some(rho) = params.rho {
        cfg.rho_grid = vec![rho];
    }
    let rows = fuzz_campaign(&cfg, &[check])?;
    out.csv(&format!("{check}.csv"), &["seed", "m", "n", "s", "t", "rho", "lhs", "rhs", "pass"], &fuzz_rows(&rows))?;
    let trials = (0..cfg.trials).map(|i| rows.iter().filter(|r| r.trial == i).all(|r| r.pass));
    Ok(vec![CheckResult::new(check, trials), CheckResult::new(&format!("{check}-rows"), rows.iter().map(|r| r.pass))])
}

#[derive(Serialize)]
struct FactorSummary {
    n: usize,
    delta: f64,
    bound: f64,
    sound_delta: f64,
    sound_bound: f64,
    min_cost: f64,
}

fn factor_bound(params: &mut Params, out: &mut Output) -> Checks {
    let p = exponent(fill(&mut params.p, 1.5))?;
    let q = exponent(fill(&mut params.q, 3.0))?;
    let r = exponent(fill(&mut params.r, 2.0))?;
    let n_max = fill(&mut params.n_max, 4);
    let trials = fill(&mut params.trials, 200);
    let tol = fill(&mut params.tol, 1e-6);
    let seed = fill(&mut params.seed, 0);
    let cfg = power_config(params, seed, PowerIterConfig::default().restarts)?;
    let seeds = SeedTree::new(seed);
    let mut rows = Vec::new();
    let mut pass = Vec::new();
    let mut summary = Vec::new();
    for n in 1..=n_max {
        let v = scaled_hadamard_block(n as u32, p, q)?;
        let fb = factorization_lower_bound(&v, r, None, &cfg)?;
        let sound = factorization_lower_bound(&v, r, Some((q, p)), &cfg)?;
        let dim = v.matrix().cols();
        let tree = seeds.child("factor", n as u64);
        let mut min_cost = f64::INFINITY;
        for trial in 0..trials {
            let k = dim + trial % 4;
            let (a, b) = random_factorization(v.matrix(), k, &mut tree.rng("trial", trial as u64))?;
            let cost = factorization_cost(&a, &b, p, q, r, &cfg)?;
            let ok = cost >= fb.bound - tol;
            min_cost = min_cost.min(cost);
            rows.push(vec![
                n.to_string(),
                trial.to_string(),
                k.to_string(),
                f(cost),
                f(fb.bound),
                f(sound.bound),
                ok.to_string(),
            ]);
            pass.push(ok);
        }
        summary.push(FactorSummary { n, delta: fb.delta, bound: fb.bound, sound_delta: sound.delta, sound_bound: sound.bound, min_cost });
    }
    out.csv("factor_bound.csv", &["n", "trial", "k", "cost", "bound", "sound_bound", "pass"], &rows)?;
    out.json("factor_bound.json", &summary)?;
    for s in &summary {
        out.note(format!("n = {}: 1/delta = {} (sound pair {}), cheapest factorization {}", s.n, f(s.bound), f(s.sound_bound), f(s.min_cost)));
    }
    let trend = summary.windows(2).map(|w| w[1].bound >= w[0].bound * (1.0 - 1e-9));
    Ok(vec![CheckResult::new("factor-bound", pass), CheckResult::new("factor-trend", trend)])
}

fn sampler(params: &mut Params, seed: u64) -> Result<SamplerConfig, LabError> {
    let base = SamplerConfig::default();
    Ok(SamplerConfig {
        samples: fill(&mut params.samples, base.samples),
        seed,
        power: power_config(params, seed, base.power.restarts)?,
        equivalence: EquivalenceConfig { seed, ..base.equivalence },
    })
}

fn decay_rows(t: &DecayTable) -> Vec<Vec<String>> {
    t.rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.sample_id.to_string(),
                f(r.measured),
                f(r.bound),
                f(r.constant_used),
                r.pass.to_string(),
                r.chain.all_steps_pass.to_string(),
            ]
        })
        .collect()
}

const DECAY_HEADER: [&str; 7] = ["n", "sample_id", "measured", "bound", "C", "pass", "chain_pass"];

/// Writes `<name>.csv`, `<name>_plot.csv` and the slope sidecar; returns the
/// bound, chain and slope checks.
fn write_decay(name: &str, t: &DecayTable, out: &mut Output) -> Checks {
    out.csv(&format!("{name}.csv"), &DECAY_HEADER, &decay_rows(t))?;
    let plot = out.plot(&format!("{name}_plot.csv"), t)?;
    let mut checks = vec![
        CheckResult::new(&format!("{name}-bound"), t.rows.iter().map(|r| r.pass)),
        CheckResult::new(&format!("{name}-chain"), t.rows.iter().map(|r| r.chain.all_steps_pass)),
    ];
    if let Some(s) = plot.slope {
        out.note(format!("{name}: fitted slope {} (reference {:?})", f(s), plot.reference_slope.map(f)));
        checks.push(CheckResult::new(&format!("{name}-slope-negative"), [s < 0.0]));
    }
    Ok(checks)
}

fn without_rows(t: &DecayTable) -> DecayTable {
    DecayTable { rows: Vec::new(), ..t.clone() }
}

fn functionals(params: &mut Params, out: &mut Output, phi: bool) -> Checks {
    let p = exponent(fill(&mut params.p, 1.5))?;
    let q = exponent(fill(&mut params.q, 3.0))?;
    let n_max = fill(&mut params.n_max, 8);
    let seed = fill(&mut params.seed, 0);
    let cfg = sampler(params, seed)?;
    let (name, table) = if phi {
        ("phi", decay_experiment_phi(p, q, 1..=n_max, &cfg)?)
    } else {
        ("psi", decay_experiment_psi(p, q, 1..=n_max, &cfg)?)
    };
    out.json(&format!("{name}_summary.json"), &without_rows(&table))?;
    write_decay(name, &table, out)
}

fn certify(params: &mut Params, out: &mut Output) -> Checks {
    let p = exponent(fill(&mut params.p, 1.5))?;
    let q = exponent(fill(&mut params.q, 3.0))?;
    let n_max = fill(&mut params.n_max, 6);
    let seed = fill(&mut params.seed, 0);
    let base = CertificateConfig::default();
    let exact_tol = fill(&mut params.tol, base.exact_tol);
    let cfg = CertificateConfig {
        seed,
        sampler: sampler(params, seed)?,
        fss_max_n: base.fss_max_n.min(n_max),
        exact_tol,
        ..base
    };
    let cert = separation_certificate(p, q, n_max, &cfg)?;
    let mut checks = vec![
        CheckResult::new("exact-phi-s", cert.exact.iter().map(|r| (r.phi_s - 1.0).abs() <= exact_tol)),
        CheckResult::new("exact-psi-t", cert.exact.iter().map(|r| (r.psi_t - 1.0).abs() <= exact_tol)),
    ];
    checks.extend(write_decay("phi", &cert.phi, out)?);
    checks.extend(write_decay("psi", &cert.psi, out)?);
    let fss_rows: Vec<Vec<String>> = cert
        .fss
        .iter()
        .map(|r| vec![r.section.clone(), r.n.to_string(), r.m.to_string(), f(r.norm_q), f(r.bound), r.pass.to_string()])
        .collect();
    out.csv("fss.csv", &["section", "n", "m", "norm_q", "bound", "pass"], &fss_rows)?;
    checks.push(CheckResult::new("fss", cert.fss.iter().map(|r| r.pass)));
    let mut compact = cert.clone();
    compact.phi = without_rows(&cert.phi);
    compact.psi = without_rows(&cert.psi);
    out.json("certificate.json", &compact)?;
    Ok(checks)
}
