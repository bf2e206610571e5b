//! Acceptance suite: one PASS/FAIL line per criterion, with timings.
//! Runs as a plain binary so that the lines always reach the test log.

use std::time::{Duration, Instant};

use lpideal::bounds::{factorization_cost, factorization_lower_bound, fuzz_campaign, random_factorization, FuzzConfig};
use lpideal::constructions::{build_s, build_t, build_u, hadamard, scaled_hadamard_block, sylvester_signs, is_scaled_orthogonal, BlockDimRule, TruncationPlan, DEFAULT_DIM_CAP};
use lpideal::functionals::{decay_experiment_phi, decay_experiment_psi, phi_n, psi_n, FunctionalSpec, SamplerConfig};
use lpideal::khintchine::{flat_vector_search, fss_witness, FlatSearchConfig, KhintchineSystem};
use lpideal::opnorm::{opnorm_bracket, PowerIterConfig};
use lpideal::rng::{gaussian_matrix, SeedTree};
use lpideal::{BlockOperator, Exponent, Matrix};

fn e(p: f64) -> Exponent {
    Exponent::new(p).unwrap()
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// `H_n[i][j] = (−1)^{popcount(i ∧ j)}`, and `HHᵀ = 2ⁿI` from packed rows.
fn hadamard_oracle(n: u32, h: &Matrix) -> bool {
    let k = 1usize << n;
    for i in 0..k {
        for j in 0..k {
            let want = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            if h.get(i, j) != want {
                return false;
            }
        }
    }
    let words = k.div_ceil(64);
    let rows: Vec<Vec<u64>> = (0..k)
        .map(|i| {
            let mut w = vec![0u64; words];
            for j in 0..k {
                if h.get(i, j) < 0.0 {
                    w[j / 64] |= 1 << (j % 64);
                }
            }
            w
        })
        .collect();
    (0..k).all(|a| {
        (0..k).all(|b| {
            let diff: u32 = rows[a].iter().zip(&rows[b]).map(|(x, y)| (x ^ y).count_ones()).sum();
            let dot = k as i64 - 2 * diff as i64;
            dot == if a == b { k as i64 } else { 0 }
        })
    })
}

fn c1_hadamard() -> Verdict {
    let start = Instant::now();
    let mut built = Vec::new();
    for n in 0..=10u32 {
        let signs = sylvester_signs(n, DEFAULT_DIM_CAP).unwrap();
        if !is_scaled_orthogonal(&signs) {
            return verdict(false, format!("library orthogonality check fails at n = {n}"));
        }
        built.push(hadamard(n).unwrap());
    }
    let elapsed = start.elapsed();
    for (n, h) in built.iter().enumerate() {
        if !hadamard_oracle(n as u32, h) {
            return verdict(false, format!("oracle disagrees at n = {n}"));
        }
    }
    verdict(elapsed < Duration::from_secs(1), format!("n ≤ 10 exact; construction and check {:.3} s (< 1 s)", elapsed.as_secs_f64()))
}

fn c2_norm_anchors() -> Verdict {
    let cfg = PowerIterConfig::default();
    let mut worst: f64 = 0.0;
    for n in 0..=8u32 {
        let h = hadamard(n).unwrap();
        let b = opnorm_bracket(&BlockOperator::plain(h.clone(), e(1.0), Exponent::INFINITY).unwrap(), &cfg).unwrap();
        if b.lower != 1.0 || b.upper != 1.0 {
            return verdict(false, format!("‖H_{n}‖_(1→∞) bracket [{}, {}]", b.lower, b.upper));
        }
        let scaled = h.scaled(2f64.powf(-(n as f64) / 2.0));
        let b = opnorm_bracket(&BlockOperator::plain(scaled, e(2.0), e(2.0)).unwrap(), &cfg).unwrap();
        worst = worst.max((b.lower - 1.0).abs()).max((b.upper - 1.0).abs());
    }
    verdict(worst <= 1e-9, format!("1→∞ brackets exactly [1,1]; (2,2) brackets within {worst:.1e} of [1,1]"))
}

fn c3_riesz_thorin() -> Verdict {
    let cfg = PowerIterConfig::default();
    let (mut max_upper, mut min_lower) = (0.0f64, f64::INFINITY);
    for p in [1.2, 1.5, 1.8] {
        for q in [2.5, 3.0, 4.0] {
            for n in 1..=6u32 {
                let b = opnorm_bracket(&scaled_hadamard_block(n, e(p), e(q)).unwrap(), &cfg).unwrap();
                max_upper = max_upper.max(b.upper);
                min_lower = min_lower.min(b.lower);
            }
            let u = build_u(e(p), e(q), &TruncationPlan::new(6, BlockDimRule::Hadamard).unwrap()).unwrap();
            let b = opnorm_bracket(&u, &cfg).unwrap();
            max_upper = max_upper.max(b.upper);
            min_lower = min_lower.min(b.lower);
        }
    }
    verdict(
        max_upper <= 1.0 + 1e-9 && min_lower >= 0.5,
        format!("max upper {max_upper:.12}, min lower {min_lower:.12} over the 3×3 grid, blocks n ≤ 6 and their sum"),
    )
}

fn c4_exact_values() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (p, q) in [(1.5, 3.0), (1.2, 4.0)] {
        let (p, q) = (e(p), e(q));
        let plan = TruncationPlan::new(8, BlockDimRule::Khintchine).unwrap();
        let sp: Vec<_> = (1..=8).map(|n| KhintchineSystem::new(n, p).unwrap()).collect();
        let sq: Vec<_> = (1..=8).map(|n| KhintchineSystem::new(n, q).unwrap()).collect();
        let s = build_s(p, q, &plan, &sp).unwrap();
        let t = build_t(p, q, &plan, &sq).unwrap();
        for n in 1..=8 {
            let a = phi_n(&s, &FunctionalSpec::phi(n, p, q), &sp[n - 1]).unwrap();
            let b = psi_n(&t, &FunctionalSpec::psi(n, p, q), &sq[n - 1]).unwrap();
            worst = worst.max((a - 1.0).abs()).max((b - 1.0).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(worst <= 1e-10 && elapsed < 30.0, format!("max |value − 1| = {worst:.1e}, {elapsed:.2} s (< 30 s)"))
}

fn c5_decay() -> Verdict {
    let start = Instant::now();
    let cfg = SamplerConfig { samples: 50, seed: 5, ..SamplerConfig::default() };
    let mut notes = Vec::new();
    let mut pass = true;
    for (p, q) in [(1.5, 3.0), (1.2, 4.0)] {
        let phi = decay_experiment_phi(e(p), e(q), 1..=8, &cfg).unwrap();
        let psi = decay_experiment_psi(e(p), e(q), 1..=8, &cfg).unwrap();
        for t in [&phi, &psi] {
            let bad = t.rows.iter().filter(|r| !r.pass || !r.chain.all_steps_pass).count();
            let slope = t.slope.unwrap_or(f64::NAN);
            pass &= bad == 0 && slope < 0.0;
            notes.push(format!("{:?}({p},{q}): {bad} failing rows, slope {slope:.3}", t.kind));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 300.0;
    verdict(pass, format!("{}; {elapsed:.1} s (< 300 s)", notes.join("; ")))
}

fn c6_fuzz() -> Verdict {
    let start = Instant::now();
    let cfg = FuzzConfig { trials: 10_000, seed: 6, ..FuzzConfig::default() };
    let rows = fuzz_campaign(&cfg, &["lemma25", "cor26"]).unwrap();
    let count = |check: &str| rows.iter().filter(|r| r.check == check).count();
    let bad = |check: &str| rows.iter().filter(|r| r.check == check && !r.pass).count();
    let elapsed = start.elapsed().as_secs_f64();
    let (bl, bc) = (bad("lemma25"), bad("cor26"));
    verdict(
        bl == 0 && bc == 0 && elapsed < 300.0,
        format!(
            "{} trials: counting bound {bl}/{} violations, column average {bc}/{} violations; {elapsed:.1} s (< 300 s)",
            cfg.trials,
            count("lemma25"),
            count("cor26")
        ),
    )
}

/// 500 random subspaces, `n ≤ 5`, `m ≤ 12`, as `n × m` bases.
fn subspaces() -> Vec<Matrix> {
    let seeds = SeedTree::new(7);
    (0..500u64)
        .map(|i| {
            let n = 1 + (seeds.derive("dim-n", i) % 5) as usize;
            let m = n + (seeds.derive("dim-m", i) % (13 - n as u64)) as usize;
            gaussian_matrix(&mut seeds.rng("basis", i), n, m)
        })
        .collect()
}

fn c7_flat_vectors(bases: &[Matrix]) -> Verdict {
    let cfg = FlatSearchConfig::default();
    let mut failures = 0;
    let mut min_excess = usize::MAX;
    for basis in bases {
        let Ok(w) = flat_vector_search(basis, &cfg) else {
            failures += 1;
            continue;
        };
        let rebuilt = basis.tmul_vec(&w.coefficients);
        let residual = rebuilt.iter().zip(&w.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let sup = w.x.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let attaining = w.x.iter().filter(|v| (v.abs() - sup).abs() <= 1e-9).count();
        if residual >= 1e-9 || attaining < basis.rows() {
            failures += 1;
        } else {
            min_excess = min_excess.min(attaining - basis.rows());
        }
    }
    verdict(failures == 0, format!("{} subspaces, {failures} failures; min (attaining − n) = {min_excess}", bases.len()))
}

fn c8_fss(bases: &[Matrix]) -> Verdict {
    let cfg = FlatSearchConfig::default();
    let mut violations = 0;
    let mut total = 0;
    for (p, q) in [(1.5, 3.0), (1.2, 4.0), (2.0, 3.0), (1.5, 2.0)] {
        for basis in bases {
            let w = fss_witness(e(p), e(q), basis, &cfg).unwrap();
            let n = basis.rows() as f64;
            let bound = n.powf(-(q - p) / (p * q));
            let lq = w.x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q);
            total += 1;
            if lq > bound + 1e-9 {
                violations += 1;
            }
        }
    }
    let mut tight = 0.0f64;
    for n in 1..=5 {
        let w = fss_witness(e(1.5), e(3.0), &Matrix::identity(n), &cfg).unwrap();
        let bound = (n as f64).powf(-(3.0 - 1.5) / (1.5 * 3.0));
        tight = tight.max((w.report.lhs - bound).abs());
    }
    verdict(
        violations == 0 && tight <= 1e-9,
        format!("{violations}/{total} violations; disjoint-support equality within {tight:.1e}"),
    )
}

fn c9_factorization() -> Verdict {
    let (p, q, r) = (e(1.5), e(3.0), e(2.0));
    let cfg = PowerIterConfig::default();
    let seeds = SeedTree::new(9);
    let mut bad = 0;
    let mut bounds = Vec::new();
    let mut notes = Vec::new();
    for n in 1..=4u32 {
        let v = scaled_hadamard_block(n, p, q).unwrap();
        let fb = factorization_lower_bound(&v, r, None, &cfg).unwrap();
        let dim = v.matrix().cols();
        let mut min_cost = f64::INFINITY;
        for trial in 0..200u64 {
            let k = dim + (trial % 4) as usize;
            let (a, b) = random_factorization(v.matrix(), k, &mut seeds.child("n", n as u64).rng("trial", trial)).unwrap();
            let cost = factorization_cost(&a, &b, p, q, r, &cfg).unwrap();
            min_cost = min_cost.min(cost);
            if cost < fb.bound - 1e-6 {
                bad += 1;
            }
        }
        notes.push(format!("n={n}: 1/δ={:.4}, cheapest {:.4}", fb.bound, min_cost));
        bounds.push(fb.bound);
    }
    let monotone = bounds.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    verdict(bad == 0 && monotone, format!("{bad}/800 below 1/δ; nondecreasing: {monotone}; {}", notes.join(", ")))
}

fn c10_determinism() -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let run = |dir: &str| {
        let out = root.path().join(dir);
        let args = ["lplab", "certify", "--p", "1.5", "--q", "3", "--n-max", "6", "--seed", "42", "--out-dir", out.to_str().unwrap()];
        (lplab::run_args(args).map(|o| o.exit).unwrap_or(-1), out)
    };
    let (c1, d1) = run("first");
    let (c2, d2) = run("second");
    if c1 != 0 || c2 != 0 {
        return verdict(false, format!("exit codes {c1}, {c2}"));
    }
    let mut names: Vec<_> = std::fs::read_dir(&d1).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let differing: Vec<_> = names
        .iter()
        .filter(|n| std::fs::read(d1.join(n)).ok() != std::fs::read(d2.join(n)).ok())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    verdict(differing.is_empty() && !names.is_empty(), format!("{} files compared, differing: {differing:?}", names.len()))
}

fn main() {
    let bases = subspaces();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("1 Hadamard exactness", Box::new(c1_hadamard)),
        ("2 norm anchors", Box::new(c2_norm_anchors)),
        ("3 Riesz–Thorin construction", Box::new(c3_riesz_thorin)),
        ("4 exact functional values", Box::new(c4_exact_values)),
        ("5 decay bounds", Box::new(c5_decay)),
        ("6 counting and column-average fuzz", Box::new(c6_fuzz)),
        ("7 flat vectors", Box::new(|| c7_flat_vectors(&bases))),
        ("8 FSS witnesses", Box::new(|| c8_fss(&bases))),
        ("9 factorization bound", Box::new(c9_factorization)),
        ("10 determinism", Box::new(c10_determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += !v.pass as usize;
        println!("{tag} [{name}] {} ({:.2} s)", v.detail, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
