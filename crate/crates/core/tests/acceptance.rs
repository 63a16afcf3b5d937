//! Acceptance criteria, one line per criterion. Exits non-zero if any fails.

use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hsball::appendix::{self, CoeffTable};
use hsball::drury::{DrurySystem, POWER_SUM_SLACK};
use hsball::error::ErrorKind;
use hsball::extension::{
    dual_bounded_test, extend, glue_sequences, rademacher_experiment, split_sequence, weighted_interp,
    DEFAULT_KERNEL_CAP,
};
use hsball::kernels::{kernel, kernel_norm_proxy, model_kernel_value, KernelConvention};
use hsball::moebius::{cocycle_residual, unitary_gram_check, Automorphism};
use hsball::multipliers::pick_min_norm;
use hsball::norms::{ball_points, hs2_inner, hs2_norm, mc_mean, monomial_moment, QuadratureSpec};
use hsball::params::{DualExponent, Point, PointSeq, SpaceParams};
use hsball::poly::{indices_up_to, MultiIndex, PolyFn};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn rand_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Point {
    let z = hsball::norms::sample_ball(rng, n);
    Point::new(z.into_iter().map(|x| x * radius).collect()).unwrap()
}

fn rand_poly(rng: &mut ChaCha8Rng, n: usize, deg: u32, cap: u32) -> PolyFn {
    PolyFn::from_terms(n, cap, indices_up_to(n, deg).into_iter().map(|a| (a, rand_c(rng)))).unwrap()
}

fn rand_seq(params: SpaceParams, len: usize, radius: f64, seed: u64) -> PointSeq {
    let pts = ball_points(params.n(), len, seed)
        .into_iter()
        .map(|z| Point::new(z.into_iter().map(|x| x * radius).collect()).unwrap())
        .collect();
    PointSeq::new(params, pts).unwrap()
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

/// The four `(n, s)` pairs of `{1,2} x {0, 1/2, 1}` that avoid `s = n/2`.
fn reproducing_params() -> Vec<SpaceParams> {
    vec![
        SpaceParams::new(1, 0.0, 2.0).unwrap(),
        SpaceParams::with_override(1, 1.0, 2.0, true).unwrap(),
        SpaceParams::new(2, 0.0, 2.0).unwrap(),
        SpaceParams::new(2, 0.5, 2.0).unwrap(),
    ]
}

fn ac1_reproducing() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for params in reproducing_params() {
        for _ in 0..100 {
            let f = rand_poly(&mut rng, params.n(), 12, 12);
            let a = rand_point(&mut rng, params.n(), 0.95);
            let k = kernel(&a, &params, KernelConvention::Exact, 12).unwrap().poly;
            let fa = f.eval(a.coords());
            worst = worst.max((hs2_inner(&f, &k, &params) - fa).norm() / fa.norm());
            count += 1;
        }
    }
    let skipped = [(1, 0.5), (2, 1.0)]
        .iter()
        .all(|&(n, s)| SpaceParams::new(n, s, 2.0).unwrap_err().kind == ErrorKind::LogKernelCase);
    verdict(
        worst <= 1e-10 && skipped,
        format!("max rel err {worst:.2e} over {count} pairs (tol 1e-10); s = n/2 pairs rejected: {skipped}"),
    )
}

fn ac2_moments() -> Verdict {
    let mut cases: Vec<(MultiIndex, MultiIndex)> = Vec::new();
    let pick = |n: usize, pairs: &[(&[u32], &[u32])]| -> Vec<(MultiIndex, MultiIndex)> {
        pairs
            .iter()
            .map(|(a, b)| {
                assert_eq!(a.len(), n);
                (MultiIndex::new(a.to_vec()), MultiIndex::new(b.to_vec()))
            })
            .collect()
    };
    cases.extend(pick(1, &[(&[0], &[0]), (&[1], &[1]), (&[3], &[3]), (&[2], &[1]), (&[4], &[2]), (&[1], &[0])]));
    cases.extend(pick(
        2,
        &[(&[1, 0], &[1, 0]), (&[1, 1], &[1, 1]), (&[2, 1], &[2, 1]), (&[3, 0], &[3, 0]), (&[2, 2], &[2, 2]), (&[1, 0], &[0, 1]), (&[2, 0], &[1, 1])],
    ));
    cases.extend(pick(
        3,
        &[(&[1, 0, 0], &[1, 0, 0]), (&[1, 1, 1], &[1, 1, 1]), (&[2, 1, 0], &[2, 1, 0]), (&[0, 0, 3], &[0, 0, 3]), (&[2, 0, 0], &[0, 1, 1]), (&[1, 1, 0], &[1, 1, 0]), (&[0, 2, 1], &[0, 2, 1])],
    ));
    let mut worst_z: f64 = 0.0;
    let mut all = true;
    for (i, (a, b)) in cases.iter().enumerate() {
        let n = a.len();
        let exact = monomial_moment(a, b, n);
        let (mean, se) = mc_mean(n, 200_000, 42 + i as u64, |z| (a.monomial(z) * b.monomial(z).conj()).re);
        let diff = (mean - exact).abs();
        // |z^alpha|^2 is constant on the circle, so its sample variance vanishes.
        let ok = if se == 0.0 { diff <= 1e-12 } else { diff <= 4.0 * se };
        if se > 0.0 {
            worst_z = worst_z.max(diff / se);
        }
        all &= ok;
    }
    verdict(all, format!("{} moments, worst |MC - exact| = {worst_z:.2} stderr (tol 4)", cases.len()))
}

fn ac3_exponents() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst1: f64 = 0.0;
    let mut worst4: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=3usize);
        let mut s = rng.gen_range(0.0..n as f64);
        if (s - n as f64 / 2.0).abs() < 1e-3 {
            s += 0.1;
        }
        let params = SpaceParams::with_override(n, s, 2.0, true).unwrap();
        let a = rand_point(&mut rng, n, 0.98);
        let r = rng.gen_range(1.01..8.0);
        let rp = DualExponent::of(r).value();
        let diag = model_kernel_value(a.coords(), a.coords(), params.rho()).re;
        let p2 = kernel_norm_proxy(&a, &params, 2.0);
        let lhs = kernel_norm_proxy(&a, &params, r) * kernel_norm_proxy(&a, &params, rp);
        worst1 = worst1.max((lhs - diag).abs() / diag).max((p2 * p2 - diag).abs() / diag);

        let p: f64 = rng.gen_range(1.0..6.0);
        let q_min = 1.0 / (1.0 - 1.0 / p).max(1e-9);
        let q = if p == 1.0 { f64::INFINITY } else { rng.gen_range(q_min..q_min + 6.0) };
        let rr = 1.0 / (1.0 / p + 1.0 / q);
        let rr_prime = DualExponent::of(rr).value();
        let pp = DualExponent::of(p).value();
        let qp = DualExponent::of(q).value();
        let lhs = kernel_norm_proxy(&a, &params, rr_prime);
        let rhs = a.defect().powf(-s) * kernel_norm_proxy(&a, &params, pp) * kernel_norm_proxy(&a, &params, qp);
        worst4 = worst4.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
    }
    verdict(
        worst1 <= 1e-12 && worst4 <= 1e-12,
        format!("product identity {worst1:.2e}, triple identity {worst4:.2e} over 50 draws (tol 1e-12)"),
    )
}

fn drury_configs() -> Vec<PointSeq> {
    let mut out = Vec::new();
    for params in [SpaceParams::new(1, 0.0, 2.0).unwrap(), SpaceParams::new(2, 0.5, 2.0).unwrap()] {
        for (len, seed) in [(3usize, 11u64), (5, 12), (8, 13)] {
            out.push(rand_seq(params, len, 0.7, seed));
        }
    }
    out
}

fn ac4_drury() -> Verdict {
    let (mut dual, mut planch, mut deriv): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seq in drury_configs() {
        let n = seq.params().n();
        let sys = DrurySystem::build(&seq, 12).unwrap();
        dual = dual.max(sys.dual_residual()).max(sys.beta_residual());
        let h = rand_poly(&mut rng, n, 2, 12);
        for z in ball_points(n, 100, 40 + seq.len() as u64) {
            planch = planch.max(sys.plancherel_residual(&z));
            for j in 0..=2 {
                deriv = deriv.max(sys.derivative_plancherel_residual(&h, j, &z).unwrap());
            }
        }
    }
    verdict(
        dual <= 1e-8 && planch <= 1e-10 && deriv <= 1e-9,
        format!("dual {dual:.2e} (1e-8), Plancherel {planch:.2e} (1e-10), derivative {deriv:.2e} (1e-9); 6 sequences"),
    )
}

fn ac5_power_sum() -> Verdict {
    let mut min_margin = f64::INFINITY;
    let mut all = true;
    let mut cases = 0;
    for seq in drury_configs() {
        let sys = DrurySystem::build(&seq, 12).unwrap();
        for l in 1..=3 {
            let r = sys.ha0_bound_check(l, 1000, 5);
            all &= r.pass && r.points_tested >= 1000;
            min_margin = min_margin.min(r.margin / (r.bound * POWER_SUM_SLACK));
            cases += 1;
        }
    }
    let rejects = SpaceParams::new(2, 1.0, 2.0).is_err();
    verdict(
        all && rejects,
        format!("{cases} (sequence, l) cases pass, smallest relative margin {min_margin:.3}; n=2, s=1 rejected: {rejects}"),
    )
}

fn ac6_pick() -> Verdict {
    let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
    let two = PointSeq::new(
        params,
        vec![Point::new(vec![c(0.0, 0.0)]).unwrap(), Point::new(vec![c(0.5, 0.0)]).unwrap()],
    )
    .unwrap();
    let t = pick_min_norm(&two, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap().t_min;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut single: f64 = 0.0;
    for params in [params, SpaceParams::new(2, 0.5, 2.0).unwrap()] {
        for _ in 0..10 {
            let a = rand_point(&mut rng, params.n(), 0.9);
            let lam = rand_c(&mut rng);
            let seq = PointSeq::new(params, vec![a]).unwrap();
            single = single.max((pick_min_norm(&seq, &[lam]).unwrap().t_min - lam.norm()).abs());
        }
    }
    verdict(
        (t - 2.0).abs() <= 1e-6 && single <= 1e-10,
        format!("two-point t_min = {t:.10} (2 +- 1e-6); single-point max |t - |lambda|| = {single:.2e} (1e-10)"),
    )
}

fn ac7_appendix() -> Verdict {
    let examples = (2..10).all(|l| {
        appendix::rational_i64(&appendix::exclusion_coeffs(1, l))
            == Some(vec![(1 - i64::from(l), 1), (i64::from(l), 1)])
    }) && appendix::rational_i64(&appendix::exclusion_coeffs(2, 3)) == Some(vec![(1, 1), (-3, 1), (3, 1)]);
    let inclusion = (0..=5).all(|j| appendix::inclusion_coeffs(j) == appendix::signed_binomial_row(j));
    let table = CoeffTable::build(4, 5);
    let paths = table.paths_agree().unwrap();
    let report = appendix::verify_identities(4, 5, 50, 7).unwrap();
    verdict(
        examples && inclusion && paths && report.max_residual <= 1e-10,
        format!(
            "examples {examples}, inclusion {inclusion}, exact paths agree {paths}, max residual {:.2e} over {} trials (1e-10)",
            report.max_residual, report.trials
        ),
    )
}

fn desk_configs() -> Vec<PointSeq> {
    vec![
        rand_seq(SpaceParams::new(1, 0.0, 2.0).unwrap(), 5, 0.7, 21),
        rand_seq(SpaceParams::new(2, 0.5, 2.0).unwrap(), 5, 0.6, 22),
        rand_seq(SpaceParams::new(1, 0.0, 4.0).unwrap(), 5, 0.6, 23),
    ]
}

fn ac8_extension() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let quad = QuadratureSpec::exact();
    let (mut value, mut linear, mut homog): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut finite = true;
    for seq in desk_configs() {
        let sys = DrurySystem::build(&seq, 12).unwrap();
        let l = hsball::extension::default_power(seq.params().s());
        let lam: Vec<Complex64> = (0..5).map(|_| rand_c(&mut rng)).collect();
        let mu: Vec<Complex64> = (0..5).map(|_| rand_c(&mut rng)).collect();
        let sum: Vec<Complex64> = lam.iter().zip(&mu).map(|(a, b)| a + b).collect();
        let scaled: Vec<Complex64> = lam.iter().map(|a| a * c(2.5, -1.0)).collect();
        let rl = extend(&sys, &lam, l, DEFAULT_KERNEL_CAP, &quad).unwrap();
        let rm = extend(&sys, &mu, l, DEFAULT_KERNEL_CAP, &quad).unwrap();
        let rs = extend(&sys, &sum, l, DEFAULT_KERNEL_CAP, &quad).unwrap();
        let rc = extend(&sys, &scaled, l, DEFAULT_KERNEL_CAP, &quad).unwrap();
        for r in [&rl, &rm, &rs, &rc] {
            for (e, t) in r.value_residuals.iter().zip(&r.targets) {
                value = value.max(rel(*e, t.norm()));
            }
            finite &= r.norm_ratio.is_finite() && r.norm_ratio > 0.0;
        }
        let add = &rl.f + &rm.f;
        linear = linear
            .max(rs.f.max_coeff_diff(&add) / rs.f.max_coeff())
            .max(rc.f.max_coeff_diff(&rl.f.scale(c(2.5, -1.0))) / rc.f.max_coeff());
        homog = homog.max((rc.norm_ratio - rl.norm_ratio).abs() / rl.norm_ratio);
    }
    verdict(
        value <= 1e-8 && linear <= 1e-12 && homog <= 1e-10 && finite,
        format!("value {value:.2e} (1e-8), linearity {linear:.2e} (1e-12), homogeneity {homog:.2e} (1e-10), ratios finite {finite}"),
    )
}

fn ac9_gluing() -> Verdict {
    let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
    let p = |re: f64, im: f64| Point::new(vec![c(re, im)]).unwrap();
    let s1 = PointSeq::new(params, vec![p(0.5, 0.0), p(0.0, 0.5)]).unwrap();
    let s2 = PointSeq::new(params, vec![p(-0.5, 0.0), p(0.0, -0.6)]).unwrap();
    let l1 = [c(1.0, 0.0), c(0.0, 1.0)];
    let l2 = [c(-0.5, 0.2), c(0.3, 0.3)];
    let r = glue_sequences(&s1, &s2, &l1, &l2, 1, 12).unwrap();
    verdict(
        r.value_residual <= 1e-7,
        format!("glued values residual {:.2e} (1e-7), m residual {:.2e}", r.value_residual, r.m_residual),
    )
}

fn ac10_unitary() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut gram, mut cocycle): (f64, f64) = (0.0, 0.0);
    for params in [SpaceParams::new(1, 0.0, 2.0).unwrap(), SpaceParams::new(2, 0.5, 2.0).unwrap()] {
        let n = params.n();
        for _ in 0..50 {
            let phi = Automorphism::involution(&rand_point(&mut rng, n, 0.9));
            let psi = Automorphism::involution(&rand_point(&mut rng, n, 0.9));
            let a = rand_point(&mut rng, n, 0.9);
            let b = rand_point(&mut rng, n, 0.9);
            let pair = PointSeq::new(params, vec![a.clone(), b]).unwrap();
            gram = gram.max(unitary_gram_check(&phi, &pair).unwrap().max_residual);
            cocycle = cocycle.max(cocycle_residual(&psi, &phi, &a, params.rho()));
        }
    }
    verdict(
        gram <= 1e-10 && cocycle <= 1e-10,
        format!("Gram {gram:.2e}, cocycle {cocycle:.2e} over 100 instances with rho = 1 (tol 1e-10)"),
    )
}

fn ac11_weighted() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut gamma, mut value, mut split): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let cases = [
        (rand_seq(SpaceParams::new(1, 0.0, 2.0).unwrap(), 4, 0.6, 31), 2.0),
        (rand_seq(SpaceParams::new(2, 0.5, 2.0).unwrap(), 4, 0.6, 32), 4.0),
        (rand_seq(SpaceParams::new(1, 0.0, 4.0).unwrap(), 3, 0.6, 33), 4.0),
    ];
    for (seq, q) in cases {
        let quad = QuadratureSpec::default();
        let dual = dual_bounded_test(&seq, 12, &quad).unwrap();
        let lam: Vec<Complex64> = (0..seq.len()).map(|_| rand_c(&mut rng)).collect();
        let r = weighted_interp(&seq, &dual.functions, &lam, q, DEFAULT_KERNEL_CAP, &quad).unwrap();
        gamma = gamma.max(r.gamma_residual);
        for (e, t) in r.value_residuals.iter().zip(&r.targets) {
            value = value.max(rel(*e, t.norm()));
        }
        split = split.max(r.splitting.residual);
        split = split.max(split_sequence(&lam, seq.params().p(), q, r.r).residual);
    }
    verdict(
        gamma <= 1e-12 && value <= 1e-8 && split <= 1e-12,
        format!("weight compensation {gamma:.2e} (1e-12), values {value:.2e} (1e-8), splitting {split:.2e} (1e-12)"),
    )
}

fn ac12_type() -> Verdict {
    let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
    let exact = QuadratureSpec::exact();
    let family: Vec<PolyFn> = (0..6u32)
        .map(|k| {
            let m = PolyFn::monomial(12, MultiIndex::new(vec![k]), c(1.0, 0.0));
            m.scale_re(1.0 / hs2_norm(&m, &params))
        })
        .collect();
    let parseval = rademacher_experiment(&family, &params, 0, 1, &exact).unwrap().ratio;

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut holds = true;
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for (p, max_len) in [(2.0, 10usize), (3.0, 8)] {
        let params = SpaceParams::with_override(1, 0.0, p, true).unwrap();
        let quad = QuadratureSpec::monte_carlo(20_000, 12);
        for len in 1..=max_len {
            let fam: Vec<PolyFn> = (0..len).map(|_| rand_poly(&mut rng, 1, 4, 12)).collect();
            let r = rademacher_experiment(&fam, &params, 0, 1, &quad).unwrap();
            holds &= r.convexity.holds;
            worst = worst.max(r.convexity.norm_ratio);
            runs += 1;
        }
    }
    verdict(
        (parseval - 1.0).abs() <= 0.02 && holds,
        format!("Parseval ratio {parseval:.6} (1 +- 0.02); convexity holds on all {runs} enumerated families, max ratio {worst:.4}"),
    )
}

fn ac13_determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("hsball-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(
        &cfg,
        r#"{"n":2,"s":0.5,"p":3,"generator":{"kind":"random","count":4,"seed":5,"radius":0.6},"quadrature":{"samples":20000}}"#,
    )
    .unwrap();
    let strip = |bytes: Vec<u8>| -> String {
        String::from_utf8(bytes)
            .unwrap()
            .lines()
            .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_hsball"))
            .args(["all-checks", "--config", cfg.to_str().unwrap(), "--out", "-"])
            .env_remove("HSBALL_SEED")
            .output()
            .unwrap();
        (out.status.code(), strip(out.stdout))
    };
    let (code_a, a) = run();
    let (code_b, b) = run();
    let _ = std::fs::remove_dir_all(&dir);
    let same = a == b && !a.is_empty();
    verdict(
        same && code_a == code_b && code_a.is_some(),
        format!("two all-checks runs: identical bytes {same} ({} bytes), exit codes {code_a:?}/{code_b:?}", a.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 13] = [
        ("reproducing identity", ac1_reproducing),
        ("monomial moments", ac2_moments),
        ("kernel norm exponent identities", ac3_exponents),
        ("Drury identities", ac4_drury),
        ("dual system power bound", ac5_power_sum),
        ("Pick bisection", ac6_pick),
        ("coefficient tables", ac7_appendix),
        ("extension operator", ac8_extension),
        ("gluing", ac9_gluing),
        ("unitary representation", ac10_unitary),
        ("weighted interpolation", ac11_weighted),
        ("type experiment", ac12_type),
        ("determinism", ac13_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] AC-{} {name}: {} [{:.1}s]",
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if !v.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
