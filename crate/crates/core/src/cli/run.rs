use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{points_from_flat, values_or_default, RunConfig};
use super::report::{Check, Outcome};
use super::Command;
use crate::appendix::{self, CoeffTable};
use crate::drury::{DrurySystem, NormPath};
use crate::error::{Result, ToolkitError};
use crate::extension::{
    default_power, dual_bounded_test, extend, glue_sequences, rademacher_experiment, weighted_interp,
};
use crate::kernels::{
    carleson_box_sup, default_boxes, gram, kernel, model_kernel_value, riesz_bounds, separation_stats, KernelConvention,
};
use crate::moebius::{cocycle_residual, rudin_residual, unitary_gram_check, Automorphism, MoebiusMap};
use crate::multipliers::{pick_min_norm, PICK_WIDTH};
use crate::norms::{ball_points, hp_norm, hs2_inner, hs2_norm, hsp_norm, NormFlavor};
use crate::params::{Point, PointSeq};
use crate::poly::{indices_up_to, MultiIndex, PolyFn};

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results contain only serializable data")
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

/// Run one command on a validated configuration.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    let mut out = dispatch(command, cfg)?;
    if let Ok(params) = cfg.params() {
        out.warnings.extend(params.warnings());
    }
    if out.truncated {
        if cfg.strict {
            return Err(ToolkitError::overflow(
                "a series was truncated at its degree cap and strict mode is on",
            ));
        }
        out.warnings
            .push(format!(
                "series were truncated (degree cap {}, kernel cap {})",
                cfg.degree_cap, cfg.options.kernel_cap
            ));
    }
    Ok(out)
}

fn dispatch(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Norms => norms(cfg),
        Command::KernelGram => kernel_gram(cfg),
        Command::Carleson => carleson(cfg),
        Command::Separation => separation(cfg),
        Command::Pick => pick(cfg),
        Command::Drury => drury(cfg),
        Command::Extend => extend_cmd(cfg),
        Command::Glue => glue(cfg),
        Command::Weighted => weighted(cfg),
        Command::Automorphism => automorphism(cfg),
        Command::TypeExp => type_exp(cfg),
        Command::Appendix => appendix_cmd(cfg),
        Command::AllChecks => all_checks(cfg),
    }
}

fn seeded_poly(n: usize, deg: u32, cap: u32, seed: u64) -> Result<PolyFn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PolyFn::from_terms(
        n,
        cap,
        indices_up_to(n, deg)
            .into_iter()
            .map(|a| (a, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
    )
}

/// Largest relative gap between the closed-form diagonal kernel value and
/// its degree-`cap` series over the sequence.
fn kernel_tail(seq: &PointSeq, cap: u32) -> Result<f64> {
    let params = seq.params();
    let mut worst: f64 = 0.0;
    for a in seq.points() {
        let k = kernel(a, params, KernelConvention::Model, cap)?.poly;
        let exact = model_kernel_value(a.coords(), a.coords(), params.rho());
        worst = worst.max((k.eval(a.coords()) - exact).norm() / exact.norm());
    }
    Ok(worst)
}

fn note_kernel_tail(out: &mut Outcome, seq: &PointSeq, cap: u32) -> Result<()> {
    let tail = kernel_tail(seq, cap)?;
    if tail > KERNEL_TAIL_TOL {
        out.truncated = true;
        out.warnings.push(format!(
            "kernel series of degree {cap} misses a relative tail of {tail:.3e}; raise options.kernel_cap"
        ));
    }
    Ok(())
}

const KERNEL_TAIL_TOL: f64 = 1e-12;

fn norms(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let params = *seq.params();
    let cap = cfg.degree_cap;
    let f = match &cfg.options.function {
        Some(f) if f.n() != params.n() => {
            return Err(ToolkitError::invalid("config key `options.function` has the wrong dimension"))
        }
        Some(f) => f.clone(),
        None => kernel(&seq.points()[0], &params, KernelConvention::Exact, cap)?.poly,
    };
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for a in seq.points() {
        let k = kernel(a, &params, KernelConvention::Exact, f.cap().max(f.degree()))?.poly;
        let fa = f.eval(a.coords());
        worst = worst.max(rel((hs2_inner(&f, &k, &params) - fa).norm(), fa.norm()));
    }
    checks.push(Check::at_most("reproducing_identity", worst, 1e-10));
    let hp = hp_norm(&f, params.p(), &cfg.quadrature)?;
    let shift = hsp_norm(&f, &params, &cfg.quadrature, NormFlavor::FractionalShift)?;
    let max_der = match params.integer_s() {
        Some(_) => Some(hsp_norm(&f, &params, &cfg.quadrature, NormFlavor::MaxDerivative)?),
        None => None,
    };
    checks.push(Check::holds("norms_finite", hp.value.is_finite() && shift.value.is_finite()));
    Ok(Outcome {
        checks,
        result: json!({
            "function": to_value(&f),
            "hp_norm": hp,
            "hsp_norm_fractional_shift": shift,
            "hsp_norm_max_derivative": max_der,
            "hs2_norm": hs2_norm(&f, &params),
        }),
        truncated: f.is_truncated(),
        ..Outcome::default()
    })
}

fn kernel_gram(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let g = gram(&seq, cfg.options.convention, cfg.degree_cap)?;
    let rows = g.to_rows();
    let mut herm: f64 = 0.0;
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let y = rows[j][i];
            herm = herm.max(((x[0] - y[0]).powi(2) + (x[1] + y[1]).powi(2)).sqrt());
        }
    }
    let eig = g.eigenvalues();
    let top = eig.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let min = eig.first().copied().unwrap_or(0.0);
    let riesz = if seq.params().p() == 2.0 { Some(riesz_bounds(&seq)?) } else { None };
    Ok(Outcome {
        checks: vec![
            Check::at_most("hermitian_residual", herm, 1e-12),
            Check::at_least("min_eigenvalue", min, -1e-10 * top),
        ],
        result: json!({
            "gram": to_value(&g),
            "condition_number": g.condition_number(),
            "riesz_bounds": riesz,
        }),
        ..Outcome::default()
    })
}

fn carleson(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let report = carleson_box_sup(&seq, seq.params(), &default_boxes(&seq));
    Ok(Outcome {
        checks: vec![Check::holds("sup_ratio_finite", report.sup_ratio.is_finite())],
        csv: vec![("carleson.csv".to_string(), report.to_csv())],
        warnings: report.warnings.clone(),
        result: json!({
            "sup_ratio": report.sup_ratio,
            "argmax_box": report.argmax_box,
            "boxes_tested": report.boxes_tested,
            "exponent": report.exponent,
        }),
        ..Outcome::default()
    })
}

fn separation(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let stats = separation_stats(&seq)?;
    let riesz = if seq.params().p() == 2.0 { Some(riesz_bounds(&seq)?) } else { None };
    Ok(Outcome {
        checks: vec![Check::at_least("min_pseudo_hyperbolic", stats.min_pseudo_hyperbolic, f64::MIN_POSITIVE)],
        result: json!({ "separation": stats, "riesz_bounds": riesz }),
        ..Outcome::default()
    })
}

fn pick(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let values = cfg.lambda(seq.len())?;
    let r = pick_min_norm(&seq, &values)?;
    let vmax = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(Outcome {
        checks: vec![
            Check::at_most("bracket_width", r.bracket_width, PICK_WIDTH),
            Check::at_least("t_min_vs_max_value", r.t_min, vmax),
        ],
        result: to_value(&r),
        ..Outcome::default()
    })
}

fn drury(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let opts = &cfg.options;
    let mut sys = DrurySystem::build(&seq, cfg.degree_cap)?;
    let summary = sys.summary(opts.identity_samples, cfg.seed)?;
    let mut checks = vec![
        Check::at_most("beta_interpolation_residual", summary.beta_residual, 1e-8),
        Check::at_most("dual_residual", summary.dual_residual, 1e-8),
        Check::at_most("plancherel_residual", summary.plancherel_residual, 1e-10),
    ];
    let h = seeded_poly(seq.params().n(), 2, cfg.degree_cap, cfg.seed ^ 0x4b)?;
    let zs = ball_points(seq.params().n(), opts.identity_samples, cfg.seed.wrapping_add(1));
    let mut derivative = Vec::new();
    for j in 0..=opts.derivative_orders {
        let mut worst: f64 = 0.0;
        for z in &zs {
            worst = worst.max(sys.derivative_plancherel_residual(&h, j, z)?);
        }
        checks.push(Check::at_most(format!("derivative_plancherel_j{j}"), worst, 1e-9));
        derivative.push(worst);
    }
    let mut ha0 = Vec::new();
    let mut warnings = Vec::new();
    for &l in &opts.ha0_powers {
        let r = sys.ha0_bound_check(l, opts.ha0_samples, cfg.seed);
        if sys.norm_path() == NormPath::Pick {
            checks.push(Check::at_least(format!("ha0_margin_l{l}"), r.margin, 0.0));
        } else if !r.pass {
            warnings.push(format!(
                "power-sum bound for l = {l} fails against the Galerkin norm estimate (not asserted)"
            ));
        }
        ha0.push(r);
    }
    if sys.norm_path() == NormPath::Galerkin {
        warnings.push("C estimate is a Galerkin value; power-sum margins are reported, not asserted".to_string());
    }
    Ok(Outcome {
        checks,
        result: json!({
            "summary": summary,
            "derivative_plancherel": derivative,
            "ha0": ha0,
        }),
        warnings,
        truncated: summary.truncated,
        ..Outcome::default()
    })
}

fn extend_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let params = *seq.params();
    let lambda = cfg.lambda(seq.len())?;
    let l = cfg.options.power.unwrap_or_else(|| default_power(params.s()));
    let sys = DrurySystem::build(&seq, cfg.degree_cap)?;
    let r = extend(&sys, &lambda, l, cfg.options.kernel_cap, &cfg.quadrature)?;
    let scaled: Vec<Complex64> = lambda.iter().map(|x| x * 3.0).collect();
    let r3 = extend(&sys, &scaled, l, cfg.options.kernel_cap, &cfg.quadrature)?;
    let value = r
        .value_residuals
        .iter()
        .zip(&r.targets)
        .map(|(e, t)| rel(*e, t.norm()))
        .fold(0.0, f64::max);
    let linearity = rel(r3.f.max_coeff_diff(&r.f.scale_re(3.0)), r3.f.max_coeff());
    let homogeneity = (r3.norm_ratio - r.norm_ratio).abs() / r.norm_ratio.max(1e-300);
    let mut out = Outcome {
        checks: vec![
            Check::at_most("value_residual", value, 1e-8),
            Check::at_most("linearity", linearity, 1e-12),
            Check::at_most("norm_ratio_homogeneity", homogeneity, 1e-10),
            Check::holds("norm_ratio_finite", r.norm_ratio.is_finite()),
        ],
        truncated: r.f.is_truncated(),
        result: json!({
            "l": r.l,
            "targets": r.targets,
            "value_residuals": r.value_residuals,
            "norm_ratio": r.norm_ratio,
            "norm_stderr": r.norm_stderr,
            "c_estimate": sys.c_estimate(),
        }),
        ..Outcome::default()
    };
    note_kernel_tail(&mut out, &seq, cfg.options.kernel_cap)?;
    Ok(out)
}

fn split_or_second(cfg: &RunConfig, seq: &PointSeq) -> Result<(PointSeq, PointSeq, Vec<Complex64>, Vec<Complex64>)> {
    let opts = &cfg.options;
    let params = *seq.params();
    let (s1, s2) = match &opts.second_points {
        Some(flat) => (seq.clone(), points_from_flat(params, flat)?),
        None => {
            if seq.len() < 2 {
                return Err(ToolkitError::invalid("gluing needs two sequences or at least two points"));
            }
            let half = seq.len() / 2;
            let pts = seq.points();
            (
                PointSeq::new(params, pts[..half].to_vec())?,
                PointSeq::new(params, pts[half..].to_vec())?,
            )
        }
    };
    let (l1, l2) = match (&opts.second_points, &opts.lambda) {
        (None, Some(_)) => {
            let all = cfg.lambda(seq.len())?;
            let (a, b) = all.split_at(s1.len());
            (a.to_vec(), b.to_vec())
        }
        _ => (
            cfg.lambda(s1.len())?,
            values_or_default(opts.second_lambda.as_deref(), s2.len(), "options.second_lambda")?
                .into_iter()
                .map(|v| v * Complex64::new(0.0, 1.0))
                .collect(),
        ),
    };
    let mut union: Vec<Point> = s1.points().to_vec();
    union.extend(s2.points().iter().cloned());
    PointSeq::new(params, union).map_err(|e| ToolkitError::invalid(format!("glued sequences overlap: {}", e.message)))?;
    Ok((s1, s2, l1, l2))
}

fn glue(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let (s1, s2, l1, l2) = split_or_second(cfg, &seq)?;
    let l = cfg.options.power.unwrap_or_else(|| default_power(seq.params().s()));
    let r = glue_sequences(&s1, &s2, &l1, &l2, l, cfg.degree_cap)?;
    Ok(Outcome {
        checks: vec![
            Check::at_most("value_residual", r.value_residual, 1e-7),
            Check::at_most("m_residual", r.m_residual, 1e-7),
            Check::at_most("witness_residual", r.witness_residual, 1e-8),
        ],
        truncated: r.glued.is_truncated(),
        result: json!({
            "l": l,
            "sizes": [s1.len(), s2.len()],
            "lambda1": l1,
            "lambda2": l2,
            "value_residual": r.value_residual,
            "m_residual": r.m_residual,
            "witness_residual": r.witness_residual,
        }),
        ..Outcome::default()
    })
}

fn weighted(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let lambda = cfg.lambda(seq.len())?;
    let dual = dual_bounded_test(&seq, cfg.degree_cap, &cfg.quadrature)?;
    let r = weighted_interp(&seq, &dual.functions, &lambda, cfg.options.q, cfg.options.kernel_cap, &cfg.quadrature)?;
    let value = r
        .value_residuals
        .iter()
        .zip(&r.targets)
        .map(|(e, t)| rel(*e, t.norm()))
        .fold(0.0, f64::max);
    let mut out = Outcome {
        checks: vec![
            Check::at_most("dual_value_residual", dual.value_residual, 1e-8),
            Check::at_most("gamma_residual", r.gamma_residual, 1e-12),
            Check::at_most("value_residual", value, 1e-8),
            Check::at_most("splitting_residual", r.splitting.residual, 1e-12),
        ],
        truncated: r.h.is_truncated(),
        result: json!({
            "r": r.r,
            "targets": r.targets,
            "gamma": r.gamma,
            "splitting": r.splitting,
            "h_norm": r.h_norm,
            "bound_ratio": r.bound_ratio,
            "dual": dual,
        }),
        ..Outcome::default()
    };
    note_kernel_tail(&mut out, &seq, cfg.options.kernel_cap)?;
    Ok(out)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Result<Point> {
    let z = crate::norms::sample_ball(rng, n);
    Point::new(z.into_iter().map(|c| c * radius).collect())
}

fn automorphism(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let params = *seq.params();
    let n = params.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mu = match &cfg.options.mu {
        Some(flat) if flat.len() != 2 * n => {
            return Err(ToolkitError::invalid(format!("config key `options.mu` needs {} numbers", 2 * n)))
        }
        Some(flat) => Point::from_re_im(flat)?,
        None => random_point(&mut rng, n, 0.9)?,
    };
    let map = MoebiusMap::new(mu.clone(), params)?;
    let rho = params.rho();
    let unitary = unitary_gram_check(map.automorphism(), &seq)?;
    let mut involution: f64 = 0.0;
    let mut rudin: f64 = 0.0;
    for a in seq.points() {
        let back = map.apply_phi(&map.apply_phi(a)?)?;
        let d = back.coords().iter().zip(a.coords()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        involution = involution.max(d);
        rudin = rudin.max(rudin_residual(&map, a)?);
    }
    let mut cocycle: f64 = 0.0;
    let mut random_gram: f64 = 0.0;
    for _ in 0..cfg.options.instances {
        let psi = Automorphism::involution(&random_point(&mut rng, n, 0.9)?);
        let phi = Automorphism::involution(&random_point(&mut rng, n, 0.9)?);
        let a = random_point(&mut rng, n, 0.9)?;
        let b = random_point(&mut rng, n, 0.9)?;
        cocycle = cocycle.max(cocycle_residual(&psi, &phi, &a, rho));
        let pair = PointSeq::new(params, vec![a, b])?;
        random_gram = random_gram.max(unitary_gram_check(&psi, &pair)?.max_residual);
    }
    Ok(Outcome {
        checks: vec![
            Check::at_most("unitary_gram_residual", unitary.max_residual.max(random_gram), 1e-10),
            Check::at_most("cocycle_residual", cocycle, 1e-10),
            Check::at_most("involution_residual", involution, 1e-12),
            Check::at_most("defect_identity_residual", rudin, 1e-10),
        ],
        result: json!({
            "mu": mu.to_re_im(),
            "rho": rho,
            "pairs": unitary.pairs,
            "instances": cfg.options.instances,
            "unitary_gram_residual": unitary.max_residual,
            "random_gram_residual": random_gram,
            "cocycle_residual": cocycle,
            "involution_residual": involution,
            "defect_identity_residual": rudin,
        }),
        ..Outcome::default()
    })
}

fn type_exp(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.params()?;
    let n = params.n();
    let size = cfg.options.family_size;
    if size == 0 || size as u32 > cfg.degree_cap + 1 {
        return Err(ToolkitError::invalid("config key `options.family_size` must lie in 1..=degree_cap+1"));
    }
    let family: Vec<PolyFn> = (0..size as u32)
        .map(|k| {
            let mut e = vec![0; n];
            e[0] = k;
            let m = PolyFn::monomial(cfg.degree_cap, MultiIndex::new(e), Complex64::new(1.0, 0.0));
            let norm = hs2_norm(&m, &params);
            m.scale_re(1.0 / norm)
        })
        .collect();
    let r = rademacher_experiment(&family, &params, cfg.options.draws, cfg.seed, &cfg.quadrature)?;
    let mut checks = vec![Check::holds("convexity", r.convexity.holds)];
    if params.p() == 2.0 {
        checks.push(Check::at_most("parseval_ratio_deviation", (r.ratio - 1.0).abs(), 0.02));
    }
    Ok(Outcome {
        checks,
        result: to_value(&r),
        ..Outcome::default()
    })
}

#[derive(Serialize)]
struct TableRow {
    j: u32,
    l: Option<u32>,
    coefficients: Vec<[String; 2]>,
}

fn appendix_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (jmax, lmax) = (cfg.options.jmax, cfg.options.lmax);
    let table = CoeffTable::build(jmax, lmax);
    let identities = appendix::verify_identities(jmax, lmax, cfg.options.trials, cfg.seed)?;
    let paths = table.paths_agree()?;
    let inclusion_ok = table.inclusion.iter().all(|(j, row)| *row == appendix::signed_binomial_row(*j));
    let polynomial = (0..=jmax).all(|j| appendix::exclusion_is_polynomial_in_l(j, 5.max(j + 1)));
    let rows: Vec<TableRow> = table
        .exclusion
        .iter()
        .map(|((j, l), row)| TableRow {
            j: *j,
            l: Some(*l),
            coefficients: appendix::rational_strings(row),
        })
        .collect();
    let inclusion: Vec<TableRow> = table
        .inclusion
        .iter()
        .map(|(j, row)| TableRow {
            j: *j,
            l: None,
            coefficients: appendix::rational_strings(row),
        })
        .collect();
    Ok(Outcome {
        checks: vec![
            Check::at_most("max_residual", identities.max_residual, 1e-10),
            Check::holds("paths_agree", paths),
            Check::holds("inclusion_signed_binomial", inclusion_ok),
            Check::holds("polynomial_in_l", polynomial),
            Check::holds("coefficients_sum_to_one", table.sums_to_one()),
        ],
        csv: vec![
            ("appendix_exclusion.csv".to_string(), table.exclusion_csv()),
            ("appendix_inclusion.csv".to_string(), table.inclusion_csv()),
        ],
        result: json!({
            "identities": identities,
            "exclusion": rows,
            "inclusion": inclusion,
        }),
        ..Outcome::default()
    })
}

/// Preconditions that make a command meaningless rather than failing.
fn skip_reason(command: Command, cfg: &RunConfig, seq: &PointSeq) -> Option<String> {
    let params = seq.params();
    match command {
        Command::Pick if params.p() != 2.0 || !(params.rho() > 0.0 && params.rho() <= 1.0) => {
            Some("needs p = 2 and 0 < n - 2s <= 1".to_string())
        }
        Command::Separation if seq.len() < 2 => Some("needs at least two points".to_string()),
        Command::Glue if seq.len() < 2 && cfg.options.second_points.is_none() => {
            Some("needs at least two points".to_string())
        }
        Command::Weighted if 1.0 / params.p() + 1.0 / cfg.options.q > 1.0 => {
            Some("needs 1/p + 1/q <= 1".to_string())
        }
        _ => None,
    }
}

fn all_checks(cfg: &RunConfig) -> Result<Outcome> {
    let seq = cfg.sequence()?;
    let mut out = Outcome::default();
    let mut per_command = serde_json::Map::new();
    for command in Command::EXPERIMENTS {
        let name = command.name();
        if let Some(reason) = skip_reason(command, cfg, &seq) {
            out.warnings.push(format!("{name}: skipped, {reason}"));
            per_command.insert(name.to_string(), json!({ "skipped": reason }));
            continue;
        }
        let sub = dispatch(command, cfg)?;
        out.checks.extend(sub.checks.iter().cloned().map(|c| c.prefixed(name)));
        out.warnings.extend(sub.warnings.iter().map(|w| format!("{name}: {w}")));
        out.csv.extend(sub.csv.iter().cloned());
        out.truncated |= sub.truncated;
        per_command.insert(name.to_string(), json!({ "passed": sub.passed() }));
    }
    out.result = Value::Object(per_command);
    Ok(out)
}
