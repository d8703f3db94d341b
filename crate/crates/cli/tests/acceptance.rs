//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runtime budgets are wall-clock on the unoptimized test profile.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use braidq::algebra::{Degree, Index, Letter};
use braidq::braided::{sort_word, sort_word_bubble, LegLayout, LeggedLetter, LeggedPoly};
use braidq::fusion::{check_fusion_ring, dimension, fuse, FusionResult, Irrep};
use braidq::graphalg::{
    check_dagger, kms_eval, tau_cuntz_word, vertex_matrix, DaggerOutcome, GraphData,
};
use braidq::scalars::{rat, Scalar, ZetaSpec};
use braidq_cli::run;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const GRID_BUDGET: Duration = Duration::from_secs(60);
const KMS_BUDGET: Duration = Duration::from_secs(300);
const FUSION_BUDGET: Duration = Duration::from_secs(30);
const INVARIANT_BUDGET: Duration = Duration::from_secs(30);
const FLOAT_RESIDUAL: f64 = 1e-12;
const RANDOM_INSTANCES: usize = 1000;
const SANDWICH_TRIPLES: usize = 100;

const PROPS: [&str; 5] = [
    "coproduct",
    "fundamental",
    "cuntz-action",
    "matricial",
    "quotient",
];

struct Outcome {
    ok: bool,
    detail: String,
}

fn call(args: &[String]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("braidq".to_string()).chain(args.iter().cloned());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).expect("utf-8 report"),
        String::from_utf8(err).expect("utf-8 error"),
    )
}

fn list(v: impl IntoIterator<Item = i64>) -> String {
    v.into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// `(n, fdiag, d)` over the replay grid, without duplicates.
fn grid() -> Vec<(usize, String, String)> {
    let mut out = Vec::new();
    for n in 1..=3usize {
        let fs = [list(std::iter::repeat_n(1, n)), list(1..=n as i64)];
        let ds = [
            list(std::iter::repeat_n(0, n)),
            list(0..n as i64),
            list(1..=n as i64),
        ];
        for f in &fs {
            for d in &ds {
                let item = (n, f.clone(), d.clone());
                if !out.contains(&item) {
                    out.push(item);
                }
            }
        }
    }
    out
}

fn grid_args(zeta: &str, trace: bool) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for (n, f, d) in grid() {
        for p in PROPS {
            let mut a: Vec<String> = [
                "verify",
                "--prop",
                p,
                "--n",
                &n.to_string(),
                "--fdiag",
                &f,
                "--d",
                &d,
                "--zeta",
                zeta,
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            if trace {
                a.push("--trace".into());
            }
            out.push(a);
        }
    }
    out
}

fn run_grid(zeta: &str) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    let all = grid_args(zeta, false);
    for a in &all {
        let (code, out, err) = call(a);
        let verified = out
            .lines()
            .last()
            .is_some_and(|l| l.starts_with("verdict: Verified"));
        if code != 0 || !verified {
            failures.push(format!("{} -> exit {code} {}", a.join(" "), err.trim()));
        }
    }
    (all.len(), failures)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let (count, failures) = run_grid("formal");
    let el = t.elapsed();
    Outcome {
        ok: failures.is_empty() && el < GRID_BUDGET,
        detail: format!(
            "{count} suites, {} unverified, {:.1}s (budget {}s){}",
            failures.len(),
            el.as_secs_f64(),
            GRID_BUDGET.as_secs(),
            first(&failures)
        ),
    }
}

fn first(failures: &[String]) -> String {
    failures
        .first()
        .map(|f| format!("; first: {f}"))
        .unwrap_or_default()
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let args: Vec<String> = [
        "verify",
        "--prop",
        "kms-preserve",
        "--n",
        "2",
        "--d",
        "0,1",
        "--len",
        "3",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let (code, out, _) = call(&args);
    let el = t.elapsed();
    let last = out.lines().last().unwrap_or("").to_string();
    Outcome {
        ok: code == 0 && last.starts_with("verdict: Verified") && el < KMS_BUDGET,
        detail: format!(
            "{last}, {:.1}s (budget {}s)",
            el.as_secs_f64(),
            KMS_BUDGET.as_secs()
        ),
    }
}

fn s_letter(i: u32, starred: bool) -> Letter {
    let l = Letter::new("S", Index::One(i), 0);
    if starred {
        l.star()
    } else {
        l
    }
}

fn n_pow(n: usize, k: usize) -> BigRational {
    let mut v = BigRational::one();
    for _ in 0..k {
        v /= rat(n as i64, 1);
    }
    v
}

fn criterion_3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let mut pairs = 0usize;
    let mut bad = Vec::new();
    let mut triples = 0usize;
    for n in [2usize, 3] {
        let g = GraphData::cuntz(&vec![0; n]);
        let k = check_dagger(&g)
            .kms()
            .cloned()
            .expect("O_n satisfies the condition");
        let paths: Vec<Vec<usize>> = (0..=3).flat_map(|l| g.paths(l)).collect();
        for a in &paths {
            for b in &paths {
                pairs += 1;
                let want = if a == b {
                    n_pow(n, a.len())
                } else {
                    BigRational::zero()
                };
                let got = kms_eval(&g, &k, a, b).expect("valid paths");
                if got.exact() != Some(&want) {
                    bad.push(format!("O_{n} tau({a:?},{b:?}) = {got}"));
                }
            }
        }
        for l in 0..=3 {
            let sum: BigRational = g
                .paths(l)
                .iter()
                .map(|a| kms_eval(&g, &k, a, a).unwrap().exact().unwrap().clone())
                .sum();
            if !sum.is_one() {
                bad.push(format!("O_{n} normalization at length {l} is {sum}"));
            }
        }
        for _ in 0..SANDWICH_TRIPLES / 2 {
            triples += 1;
            let len = rng.gen_range(0..=3);
            let alpha: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=n as u32)).collect();
            let beta: Vec<u32> = if rng.gen_bool(0.5) {
                alpha.clone()
            } else {
                (0..len).map(|_| rng.gen_range(1..=n as u32)).collect()
            };
            // x = S_μ S*_ν, often with μ = ν so that τ(x) is nonzero.
            let ml = rng.gen_range(0..=3);
            let mu: Vec<u32> = (0..ml).map(|_| rng.gen_range(1..=n as u32)).collect();
            let nu: Vec<u32> = if rng.gen_bool(0.6) {
                mu.clone()
            } else {
                (0..rng.gen_range(0..=3))
                    .map(|_| rng.gen_range(1..=n as u32))
                    .collect()
            };
            let x: Vec<Letter> = mu
                .iter()
                .map(|&i| s_letter(i, false))
                .chain(nu.iter().rev().map(|&i| s_letter(i, true)))
                .collect();
            let word: Vec<Letter> = alpha
                .iter()
                .map(|&i| s_letter(i, false))
                .chain(x.iter().copied())
                .chain(beta.iter().rev().map(|&i| s_letter(i, true)))
                .collect();
            let lhs = tau_cuntz_word(&g, &k, &word).unwrap();
            let tx = tau_cuntz_word(&g, &k, &x).unwrap();
            let rhs = if alpha == beta {
                n_pow(n, len) * tx
            } else {
                BigRational::zero()
            };
            if lhs != rhs {
                bad.push(format!(
                    "O_{n} sandwich identity at {alpha:?} {mu:?}/{nu:?} {beta:?}: {lhs} vs {rhs}"
                ));
            }
        }
    }
    Outcome {
        ok: bad.is_empty(),
        detail: format!(
            "{pairs} path pairs, {triples} random triples, lengths <= 3, exact{}",
            first(&bad)
        ),
    }
}

fn criterion_4() -> Outcome {
    let mut bad = Vec::new();
    for n in 2..=4usize {
        let g = GraphData::cuntz(&vec![0; n]);
        match check_dagger(&g) {
            DaggerOutcome::Satisfied(k) if k.exact && k.rho.exact() == Some(&rat(n as i64, 1)) => {}
            other => bad.push(format!("O_{n}: {other:?}")),
        }
    }
    let cycle = GraphData::new(2, &[(1, 2), (2, 1)], &[0, 0]).unwrap();
    match check_dagger(&cycle) {
        DaggerOutcome::Satisfied(k)
            if k.exact
                && k.rho.exact() == Some(&rat(1, 1))
                && k.weights.iter().all(|w| w.exact() == Some(&rat(1, 2))) => {}
        other => bad.push(format!("2-cycle: {other:?}")),
    }
    let golden = GraphData::new(2, &[(1, 1), (1, 2), (2, 1)], &[0, 0, 0]).unwrap();
    let mut residual = f64::NAN;
    match check_dagger(&golden) {
        DaggerOutcome::Satisfied(k) if !k.exact => {
            let d = vertex_matrix(&golden);
            let w: Vec<f64> = k.weights.iter().map(|x| x.to_f64()).collect();
            let rho = k.rho.to_f64();
            residual = (0..d.len())
                .map(|i| {
                    let dw: f64 = (0..d.len()).map(|j| d[i][j] as f64 * w[j]).sum();
                    (dw - rho * w[i]).abs()
                })
                .fold(0.0, f64::max);
            if residual.is_nan() || residual >= FLOAT_RESIDUAL || w.iter().any(|&x| x < 0.0) {
                bad.push(format!("golden-mean residual {residual:e}"));
            }
        }
        other => bad.push(format!("golden-mean graph: {other:?}")),
    }
    Outcome {
        ok: bad.is_empty(),
        detail: format!(
            "O_2..O_4 exact, 2-cycle rho=1 weights 1/2,1/2, float residual {residual:.2e} < {FLOAT_RESIDUAL:e}{}",
            first(&bad)
        ),
    }
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut checks = 0;
    for n in [2u64, 3] {
        let rep = check_fusion_ring(n, 4);
        checks += rep.checks.len();
        if !rep.is_verified() {
            bad.push(format!("ring n={n}: {}", rep.render(false)));
        }
    }
    let a: Irrep = "(0; a)".parse().unwrap();
    let b: Irrep = "(0; b)".parse().unwrap();
    let mut want = FusionResult::default();
    want.add("(0; ab)".parse().unwrap(), 1);
    want.add(Irrep::trivial(), 1);
    if fuse(&a, &b) != want {
        bad.push(format!("a ⊗ b = {}", fuse(&a, &b)));
    }
    let ab: Irrep = "(0; ab)".parse().unwrap();
    if dimension(&ab.w, 2) != 3 {
        bad.push("dimension(ab, 2) != 3".into());
    }
    let el = t.elapsed();
    Outcome {
        ok: bad.is_empty() && el < FUSION_BUDGET,
        detail: format!(
            "{checks} ring checks at n=2,3 max_len 4, a⊗b = ab+e, dim(ab,2)=3, {:.1}s (budget {}s){}",
            el.as_secs_f64(),
            FUSION_BUDGET.as_secs(),
            first(&bad)
        ),
    }
}

fn random_word(rng: &mut StdRng, legs: usize) -> Vec<LeggedLetter> {
    (0..rng.gen_range(0..5))
        .map(|_| {
            let l = Letter::new(
                "u",
                Index::Two(rng.gen_range(1..=2), rng.gen_range(1..=2)),
                rng.gen_range(-2..=2),
            );
            let l = if rng.gen_bool(0.5) { l.star() } else { l };
            LeggedLetter::new(rng.gen_range(1..=legs), l)
        })
        .collect()
}

fn random_scalar(rng: &mut StdRng) -> Scalar {
    let mut s = Scalar::zero();
    for _ in 0..rng.gen_range(1..4) {
        let r = [1u64, 2, 3, 6][rng.gen_range(0..4)];
        s += &Scalar::monomial(
            rat(rng.gen_range(-5..=5), rng.gen_range(1..=4)),
            rng.gen_range(-9..=9),
            r,
        );
    }
    s
}

fn random_poly(rng: &mut StdRng, lay: &LegLayout) -> LeggedPoly {
    let words: Vec<_> = (0..rng.gen_range(1..4))
        .map(|_| (random_word(rng, lay.num_legs()), random_scalar(rng)))
        .collect();
    LeggedPoly::from_words(lay, words)
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let lay = LegLayout::braided(3);
    let mut bad = Vec::new();
    for i in 0..RANDOM_INSTANCES {
        let (p, q, r) = (
            random_poly(&mut rng, &lay),
            random_poly(&mut rng, &lay),
            random_poly(&mut rng, &lay),
        );
        if p.mul(&q).mul(&r) != p.mul(&q.mul(&r)) {
            bad.push(format!("associativity #{i}"));
        }
        let w = random_word(&mut rng, 3);
        let (mut a, mut b) = (w.clone(), w.clone());
        let pa = sort_word(&mut a, &lay);
        let (pb, _) = sort_word_bubble(&mut b, &lay);
        if a != b || pa != pb {
            bad.push(format!("confluence #{i}"));
        }
        if p.star().star() != p {
            bad.push(format!("star #{i}"));
        }
        let (x, y) = (random_word(&mut rng, 3), random_word(&mut rng, 3));
        let px = LeggedPoly::from_words(&lay, [(x, Scalar::one())]);
        let py = LeggedPoly::from_words(&lay, [(y, Scalar::one())]);
        match (px.degree(), py.degree(), px.mul(&py).degree()) {
            (Degree::Homogeneous(a), Degree::Homogeneous(b), Degree::Homogeneous(c))
                if a + b == c => {}
            other => bad.push(format!("degree #{i}: {other:?}")),
        }
        for nn in [2u32, 3, 4, 6, 8] {
            let s = ZetaSpec::RootOfUnity(nn);
            let (a, b) = (random_scalar(&mut rng), random_scalar(&mut rng));
            let prod = (&a * &b).specialize(s);
            let via = (&a.specialize(s) * &b.specialize(s)).specialize(s);
            let sum = (&a + &b).specialize(s);
            let sum_via = &a.specialize(s) + &b.specialize(s);
            if prod != via || sum != sum_via {
                bad.push(format!("specialization N={nn} #{i}"));
            }
        }
    }
    let el = t.elapsed();
    Outcome {
        ok: bad.is_empty() && el < INVARIANT_BUDGET,
        detail: format!(
            "{RANDOM_INSTANCES} instances per invariant, specialization at N=2,3,4,6,8, {:.1}s (budget {}s){}",
            el.as_secs_f64(),
            INVARIANT_BUDGET.as_secs(),
            first(&bad)
        ),
    }
}

fn criterion_7() -> Outcome {
    let mut bad = Vec::new();
    let mut total = 0;
    for nn in [3, 4, 8] {
        let (count, failures) = run_grid(&format!("root:{nn}"));
        total += count;
        bad.extend(failures);
    }
    Outcome {
        ok: bad.is_empty(),
        detail: format!(
            "{total} suites re-verified at root:3, root:4, root:8{}",
            first(&bad)
        ),
    }
}

fn full_transcript() -> String {
    let mut all = grid_args("formal", true);
    all.push(
        [
            "verify",
            "--prop",
            "kms-preserve",
            "--n",
            "2",
            "--d",
            "0,1",
            "--len",
            "2",
            "--trace",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    );
    all.push(
        ["fusion", "--check", "3", "--n", "3"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    let mut text = String::new();
    for a in all {
        let (code, out, err) = call(&a);
        text.push_str(&format!("$ {}\n{out}{err}exit {code}\n", a.join(" ")));
    }
    text
}

fn criterion_8() -> Outcome {
    let a = full_transcript();
    let b = full_transcript();
    Outcome {
        ok: a == b,
        detail: format!(
            "two runs with traces, {} bytes each, identical: {}",
            a.len(),
            a == b
        ),
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("verification grid", criterion_1),
        ("kms preservation n=2 len 3", criterion_2),
        ("kms state on O_2, O_3", criterion_3),
        ("condition (†)", criterion_4),
        ("fusion ring", criterion_5),
        ("structural invariants", criterion_6),
        ("specialization soundness", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let tag = if o.ok { "PASS" } else { "FAIL" };
        if !o.ok {
            failed += 1;
        }
        println!("{tag} [{}] {name}: {}", k + 1, o.detail);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
