use std::fmt::Write as _;

use cmc_core::{
    admissible, build_point, classify, curvature_scalars, eval_f, gauss_map, integrate_profile,
    kappas, phi_bounds, quadrature_period, sweep, thresholds, verify, ImmersionOptions,
    ImmersionSpec, ProfileParams, SolutionTag, VerificationReport, VerifyPlan,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, VerifyLimits};
use crate::exit::{CliError, NOT_ADMISSIBLE, OK, VERIFICATION};

/// What a command produced: the main document, plus side documents keyed by
/// a file-name suffix.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub code: u8,
    pub body: String,
    pub side: Vec<(&'static str, String)>,
}

impl Output {
    fn ok(body: String) -> Self {
        Self {
            code: OK,
            body,
            side: Vec::new(),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn tag_list(tags: &[SolutionTag]) -> Vec<&'static str> {
    tags.iter().map(|t| t.label()).collect()
}

fn params_json(cfg: &RunConfig, p: &ProfileParams) -> Value {
    json!({
        "case": cfg.case.name(),
        "n": p.n,
        "a": p.a,
        "b": p.b,
        "d": p.d,
        "H": p.h,
        "C": p.c,
    })
}

/// `C` values probing every regime of the tables at a fixed `H`.
fn probe_values(r1: Option<f64>, r2: Option<f64>) -> Vec<f64> {
    let mut cs = vec![-10.0, -1.0, 0.0, 1.0, 10.0];
    for r in [r1, r2].into_iter().flatten() {
        cs.extend([r - 0.5, r, r + 0.5]);
    }
    if let (Some(a), Some(b)) = (r1, r2) {
        cs.push(0.5 * (a + b));
    }
    cs.sort_by(f64::total_cmp);
    cs.dedup();
    cs
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Output, CliError> {
    let h = cfg.require_h()?;
    // outside a curve's domain the entries are null rather than errors
    let th = thresholds(cfg.case, cfg.n, h).unwrap_or_default();
    let bounds = phi_bounds(cfg.case, cfg.n, h).unwrap_or_default();
    let doc = match cfg.resolve_c()? {
        Some(_) => {
            let p = cfg.params()?;
            let report = admissible(cfg.case, cfg.n, h, p.c);
            let cls = classify(&p);
            json!({
                "params": params_json(cfg, &p),
                "admissible": report.admissible,
                "types": tag_list(&report.types),
                "boundary": report.boundary,
                "notes": report.notes,
                "thresholds": th,
                "bounds": bounds,
                "branches": cls.solutions,
            })
        }
        None => {
            // without C, report which types occur for some C at this H
            let regimes: Vec<Value> = probe_values(th.r1, th.r2)
                .into_iter()
                .map(|c| {
                    let r = admissible(cfg.case, cfg.n, h, c);
                    json!({ "C": c, "admissible": r.admissible, "types": tag_list(&r.types) })
                })
                .collect();
            let any = regimes.iter().any(|r| r["admissible"] == Value::Bool(true));
            let mut types: Vec<SolutionTag> = probe_values(th.r1, th.r2)
                .into_iter()
                .flat_map(|c| admissible(cfg.case, cfg.n, h, c).types)
                .collect();
            types.sort();
            types.dedup();
            let s = cfg.case.canonical_signs();
            json!({
                "params": { "case": cfg.case.name(), "n": cfg.n, "a": s.a, "b": s.b, "d": s.d, "H": h, "C": null },
                "admissible": any,
                "types": tag_list(&types),
                "thresholds": th,
                "bounds": bounds,
                "regimes": regimes,
            })
        }
    };
    let code = if doc["admissible"] == Value::Bool(true) {
        OK
    } else {
        NOT_ADMISSIBLE
    };
    Ok(Output {
        code,
        body: pretty(&doc),
        side: Vec::new(),
    })
}

fn check_branch(p: &ProfileParams, g0: f64) -> Result<(), CliError> {
    if classify(p).branch_containing(g0).is_none() {
        return Err(CliError::new(
            NOT_ADMISSIBLE,
            format!(
                "no complete solution through g0 = {g0} at H = {}, C = {}",
                p.h, p.c
            ),
        ));
    }
    Ok(())
}

pub fn cmd_profile(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.params()?;
    let g0 = cfg.resolve_g0()?;
    check_branch(&p, g0)?;
    let sol = integrate_profile(&p, g0, &cfg.integration)?;
    let mut out = String::from("t,g,g_prime,kappa1,kappa2,norm_phi,energy_residual\n");
    for i in (0..sol.len()).step_by(cfg.stride.unwrap_or(1)) {
        let (g, gp) = (sol.g[i], sol.g_prime[i]);
        let (k1, k2) = kappas(&p, g)?;
        let phi = curvature_scalars(&p, g)?.norm_phi;
        let residual = gp * gp - eval_f(&p, g)?;
        let row = [sol.t_grid[i], g, gp, k1, k2, phi, residual]
            .map(num)
            .join(",");
        out.push_str(&row);
        out.push('\n');
    }
    let mut footer = json!({
        "solution_type": sol.solution_type,
        "energy_drift": sol.energy_drift,
        "truncated": sol.truncated,
    });
    if sol.solution_type.tag == SolutionTag::Type1Periodic {
        let quad = quadrature_period(&p, sol.solution_type.interval)?;
        let measured = sol.measured_period();
        footer["period"] = json!({
            "quadrature": quad,
            "measured": measured,
            "rel_err": measured.map(|m| (m - quad).abs() / quad),
        });
    }
    let _ = writeln!(out, "# {footer}");
    Ok(Output::ok(out))
}

fn build_spec(cfg: &RunConfig) -> Result<ImmersionSpec, CliError> {
    let p = cfg.params()?;
    let g0 = cfg.resolve_g0()?;
    check_branch(&p, g0)?;
    let opts = ImmersionOptions {
        integration: cfg.integration,
        index: cfg.index,
        s_count: cfg.s_count,
        seed: cfg.seed,
        flat_radius: cfg.flat_radius,
        ..ImmersionOptions::default()
    };
    Ok(ImmersionSpec::build(&p, g0, &opts)?)
}

pub fn cmd_immerse(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = build_spec(cfg)?;
    let dim = spec.metric().dim();
    let mut out = String::from("t,y_index");
    for prefix in ["phi", "nu"] {
        for k in 0..dim {
            let _ = write!(out, ",{prefix}_{k}");
        }
    }
    out.push('\n');
    let stride = cfg.stride.unwrap_or(100);
    for i in (0..spec.frame.len()).step_by(stride) {
        for (j, y) in spec.s_points.iter().take(cfg.y_count).enumerate() {
            let phi = build_point(&spec, y, i)?;
            let nu = gauss_map(&spec, y, i)?;
            let _ = write!(out, "{},{j}", num(spec.frame.t_grid[i]));
            for x in phi.iter().chain(nu.iter()) {
                out.push(',');
                out.push_str(&num(*x));
            }
            out.push('\n');
        }
    }
    Ok(Output::ok(out))
}

pub fn passes(report: &VerificationReport, limits: &VerifyLimits) -> bool {
    let residuals = [
        report.max_ambient_residual,
        report.max_gauss_norm_residual,
        report.max_tangency_residual,
    ];
    let kappa = [
        report.kappa1_err,
        report.kappa2_err,
        report.mean_curvature_err,
    ];
    // NaN compares false, so an undefined residual fails
    residuals.iter().all(|&r| r < limits.residual)
        && kappa.iter().all(|&k| k < limits.kappa)
        && report.mean_curvature_stddev < limits.mean_stddev
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = build_spec(cfg)?;
    let plan = match cfg.t_window {
        Some([lo, hi]) => {
            VerifyPlan::window(&spec, cfg.y_count, cfg.t_count, (lo, hi), cfg.fd_step)
        }
        None => VerifyPlan::spread(&spec, cfg.y_count, cfg.t_count, cfg.fd_step),
    };
    let report = verify(&spec, &plan)?;
    let passed = passes(&report, &cfg.limits);
    let doc = json!({
        "params": params_json(cfg, &spec.params),
        "construction": spec.case,
        "space": { "n": spec.space.n, "k": spec.space.k, "a": spec.space.a },
        "plan": plan,
        "limits": cfg.limits,
        "passed": passed,
        "report": to_json(&report),
    });
    Ok(Output {
        code: if passed { OK } else { VERIFICATION },
        body: pretty(&doc),
        side: Vec::new(),
    })
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let h_range = cfg
        .h_range
        .ok_or_else(|| CliError::invalid("missing H_range"))?;
    let c_range = cfg
        .c_range
        .ok_or_else(|| CliError::invalid("missing C_range"))?;
    let [nh, nc] = cfg.grid;
    let grid = sweep(
        cfg.case,
        cfg.n,
        (h_range[0], h_range[1]),
        (c_range[0], c_range[1]),
        (nh, nc),
    )?;
    let mut out = String::from("H,C,admissible,types,boundary\n");
    for i in 0..nh {
        for j in 0..nc {
            let r = grid.at(i, j);
            let boundary = to_json(&r.boundary);
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                num(grid.h_values[i]),
                num(grid.c_values[j]),
                r.admissible,
                tag_list(&r.types).join(";"),
                boundary.as_str().unwrap_or_default(),
            );
        }
    }
    let mut curves = String::from("H,r1,r2\n");
    for s in &grid.curves {
        let _ = writeln!(curves, "{},{},{}", num(s.h), opt_num(s.r1), opt_num(s.r2));
    }
    Ok(Output {
        code: OK,
        body: out,
        side: vec![("curves", curves)],
    })
}
