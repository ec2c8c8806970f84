//! Subcommand bodies: each fills tables, then the artifacts are written with a manifest.

use std::path::{Path, PathBuf};

use lamegap::expansion::{bounds_cylinder, bounds_field, bounds_flat, bounds_segment, grad_u_asymptotic, ExpansionConfig};
use lamegap::factors::{definiteness_check, det_d, det_f, leading_factor_data, solve_cramer, solve_direct, FactorFile};
use lamegap::oracle::{extrapolate_starred, fit_k_star, sweep, FullSolution};
use lamegap::quadrature::{energy_leading_with, moment_integral_with, q_leading_with, QuadResult};
use lamegap::verify::{Verifier, ALL, QUICK};
use lamegap::{basis_count, rate_table, BoundsInput, Error, FactorData, RateCertificate, RateTerm, Theorem};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

use crate::config::{ProfileKind, RunConfig};
use crate::error::CliError;
use crate::output::{num, Artifacts, Table};
use crate::{Command, ExpandArgs, Provider, QuadKind, StarredSource, Suite, TheoremArg, TheoremSel};

pub fn dispatch(cfg: &RunConfig, cmd: &Command, arguments: &Value, argv: &[String]) -> Result<(), CliError> {
    let name = match cmd {
        Command::Rates(_) => "rates",
        Command::Quad(_) => "quad",
        Command::Factors(_) => "factors",
        Command::Expand(_) => "expand",
        Command::Bounds(_) => "bounds",
        Command::Verify(_) => "verify",
        Command::Sweep(_) => "sweep",
    };
    let dir = PathBuf::from(cfg.out_dir());
    let mut arts = Artifacts::new(&dir, name);
    let mut failure = None;
    let stdout = match cmd {
        Command::Rates(a) => rates(cfg, &a.sel, &mut arts)?,
        Command::Quad(a) => quad(cfg, a, &mut arts)?,
        Command::Factors(a) => factors(cfg, a, &mut arts)?,
        Command::Expand(a) => expand(cfg, a, &mut arts)?,
        Command::Bounds(a) => bounds(cfg, &a.sel, &a.source, &mut arts)?,
        Command::Verify(a) => {
            let (text, failed) = verify(cfg, a, &mut arts)?;
            failure = failed;
            text
        }
        Command::Sweep(a) => sweep_cmd(cfg, a.dump, &mut arts)?,
    };
    print!("{stdout}");
    let manifest = arts.write(cfg, arguments, argv)?;
    eprintln!("lamegap: wrote {}", manifest.display());
    match failure {
        Some(msg) => Err(CliError::Acceptance(msg)),
        None => Ok(()),
    }
}

fn exponent_string(r: &RateTerm) -> String {
    let e = r.exponent;
    if *e.denom() == 1 {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

fn theorem(sel: &TheoremSel) -> Theorem {
    match sel.theorem {
        TheoremArg::Segment => Theorem::Segment,
        TheoremArg::Cylinder => Theorem::Cylinder,
        TheoremArg::Field => Theorem::Field { xnorm: sel.xnorm },
        TheoremArg::Flat => Theorem::Flat { sigma: sel.sigma },
    }
}

fn expansion_config(cfg: &RunConfig) -> Result<ExpansionConfig, CliError> {
    let mut e = ExpansionConfig::new(cfg.profile()?, cfg.lame()?, cfg.boundary()?);
    e.tau = cfg.geometry.tau.clone();
    Ok(e)
}

fn bounds_input(cfg: &RunConfig) -> Result<BoundsInput, CliError> {
    Ok(expansion_config(cfg)?.bounds_input())
}

fn rates(cfg: &RunConfig, sel: &TheoremSel, arts: &mut Artifacts) -> Result<String, CliError> {
    let input = bounds_input(cfg)?;
    let certs = rate_table(theorem(sel), &input)?;
    let mut t = Table::new("rates", &["case", "side", "exponent", "log_power", "prefactor_expr", "eps", "value"]);
    for c in &certs {
        for &eps in &cfg.eps_list() {
            let v = c.evaluate(eps)?;
            t.push(vec![
                c.case_label.clone(),
                c.side.to_string(),
                exponent_string(&c.rate),
                c.rate.log_power.to_string(),
                c.prefactor_string(),
                num(eps),
                num(v.value),
            ]);
        }
    }
    arts.table(&t)
}

fn quad(cfg: &RunConfig, a: &crate::QuadArgs, arts: &mut Artifacts) -> Result<String, CliError> {
    let base = cfg.profile()?;
    let lame = cfg.lame()?;
    let phi = cfg.boundary()?;
    let s = cfg.quad_settings();
    let rad = a.radius.unwrap_or(base.radius);
    let mut t = Table::new("quad", &["eps", "value", "error_estimate", "n_evals"]);
    for &eps in &cfg.eps_list() {
        let p = base.with_eps(eps);
        let r: QuadResult = match a.kind {
            QuadKind::Moment => moment_integral_with(&p, a.k, rad, &s)?,
            QuadKind::Energy => energy_leading_with(a.alpha, &p, &lame, rad, &s)?,
            QuadKind::Q => q_leading_with(a.alpha, &phi, &p, &lame, rad, &s)?,
        };
        t.push(vec![num(eps), num(r.value), num(r.abs_error_estimate), r.n_evals.to_string()]);
    }
    arts.table(&t)
}

/// JSON form of factor data; infinite entries become the string "inf".
fn factor_json(fd: &FactorData) -> Value {
    let f = fd.to_file();
    let cell = |v: f64| if v.is_finite() { Value::from(v) } else { Value::from(if v > 0.0 { "inf" } else { "-inf" }) };
    serde_json::json!({
        "d": f.d,
        "a": f.a.iter().map(|r| r.iter().map(|&v| cell(v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "q": f.q.iter().map(|&v| cell(v)).collect::<Vec<_>>(),
        "provenance": f.provenance,
        "eps": f.eps,
    })
}

fn restore_infinities(v: &mut Value) {
    match v {
        Value::String(s) if s == "inf" => *v = Value::from(f64::MAX),
        Value::String(s) if s == "-inf" => *v = Value::from(f64::MIN),
        Value::Array(a) => a.iter_mut().for_each(restore_infinities),
        _ => {}
    }
}

fn read_factor_file(path: &Path) -> Result<Vec<FactorData>, CliError> {
    let bad = |msg: String| CliError::Config { key: "--factors".into(), msg: format!("{}: {msg}", path.display()) };
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let entries = match v.take() {
        Value::Array(a) => a,
        other => vec![other],
    };
    entries
        .into_iter()
        .map(|mut e| {
            for key in ["a", "q"] {
                if let Some(x) = e.get_mut(key) {
                    restore_infinities(x);
                }
            }
            let mut f: FactorFile = serde_json::from_value(e).map_err(|err| bad(err.to_string()))?;
            for row in &mut f.a {
                for x in row.iter_mut() {
                    if x.abs() == f64::MAX {
                        *x = x.signum() * f64::INFINITY;
                    }
                }
            }
            FactorData::from_file(&f).map_err(|err| bad(err.to_string()))
        })
        .collect()
}

fn need_oracle(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.geometry.dimension != 2 {
        return Err(CliError::Config { key: "geometry.dimension".into(), msg: "the oracle is two-dimensional".into() });
    }
    Ok(())
}

struct OracleLimit {
    solutions: Vec<FullSolution>,
    starred: lamegap::oracle::StarredFit,
    k_star: Vec<f64>,
}

fn oracle_limit(cfg: &RunConfig, eps_list: &[f64]) -> Result<OracleLimit, CliError> {
    need_oracle(cfg)?;
    let ocfg = cfg.oracle()?;
    let phi = cfg.boundary()?;
    let solutions = sweep(&phi, eps_list, &ocfg)?;
    let samples: Vec<(f64, &FactorData)> = solutions.iter().map(|s| (s.eps(), &s.factors)).collect();
    let starred = extrapolate_starred(&samples)?;
    let tau = [1.0 / ocfg.r1 - 1.0 / ocfg.r0];
    let k_star = fit_k_star(&samples, &ocfg.lame, &tau)?;
    Ok(OracleLimit { solutions, starred, k_star })
}

fn factor_rows(t: &mut Table, provider: &str, fd: &FactorData, cramer: bool) -> Result<(), CliError> {
    let eps = num(fd.eps.unwrap_or(0.0));
    let n = fd.n();
    let mut row = |q: &str, i: usize, j: usize, v: f64| {
        t.push(vec![eps.clone(), provider.into(), q.into(), i.to_string(), j.to_string(), num(v)]);
    };
    for i in 0..n {
        for j in i..n {
            row("a", i + 1, j + 1, fd.a[(i, j)]);
        }
    }
    for i in 0..n {
        row("Q", i + 1, 0, fd.q[i]);
    }
    if let Ok(v) = det_d(fd) {
        row("det_D", 0, 0, v);
    }
    if fd.a.iter().all(|v| v.is_finite()) {
        let def = definiteness_check(fd);
        row("lambda_min", 0, 0, def.lambda_min);
        row("det_F", 0, 0, det_f(fd));
        if !def.passed {
            return Err(Error::NotPositiveDefinite(def.lambda_min).into());
        }
        let x = solve_direct(&fd.a, &fd.q)?;
        for i in 0..n {
            row("X", i + 1, 0, x[i]);
        }
        if cramer {
            let xc = solve_cramer(&fd.a, &fd.q)?;
            row("cramer_agreement", 0, 0, (&x - &xc).amax() / x.amax().max(1e-300));
        }
    }
    Ok(())
}

fn factors(cfg: &RunConfig, a: &crate::FactorsArgs, arts: &mut Artifacts) -> Result<String, CliError> {
    let mut t = Table::new("factors", &["eps", "provider", "quantity", "i", "j", "value"]);
    let mut data: Vec<FactorData> = Vec::new();
    let mut k_star = None;
    let provider = match a.provider {
        Provider::Oracle => {
            let eps = cfg.eps_list_or(&cfg.execution.sweep_eps);
            if a.starred {
                let lim = oracle_limit(cfg, &eps)?;
                data.extend(lim.solutions.iter().map(|s| s.factors.clone()));
                data.push(lim.starred.data.clone());
                k_star = Some(lim.k_star);
            } else {
                need_oracle(cfg)?;
                let sols = sweep(&cfg.boundary()?, &eps, &cfg.oracle()?)?;
                data.extend(sols.into_iter().map(|s| s.factors));
            }
            "oracle"
        }
        Provider::Leading => {
            let base = cfg.profile()?;
            let (phi, lame) = (cfg.boundary()?, cfg.lame()?);
            for &e in &cfg.eps_list() {
                data.push(leading_factor_data(&base.with_eps(e), &phi, &lame, base.radius)?);
            }
            "leading"
        }
        Provider::File => {
            let path = a.factors.as_ref().ok_or_else(|| CliError::Config {
                key: "--factors".into(),
                msg: "--provider file needs --factors PATH".into(),
            })?;
            data = read_factor_file(path)?;
            "file"
        }
    };
    for fd in &data {
        factor_rows(&mut t, provider, fd, a.cramer)?;
    }
    if let Some(k) = k_star {
        for (i, v) in k.iter().enumerate() {
            t.push(vec![num(0.0), provider.into(), "K".into(), (i + 1).to_string(), "0".into(), num(*v)]);
        }
    }
    let json: Vec<Value> = data.iter().map(factor_json).collect();
    arts.text("factors.json", serde_json::to_string_pretty(&json).expect("json") + "\n");
    arts.table(&t)
}

/// Limit data and K* from a file or the oracle; `None` when neither is requested.
fn starred(cfg: &RunConfig, src: &StarredSource) -> Result<Option<(FactorData, Option<Vec<f64>>)>, CliError> {
    if let Some(path) = &src.factors {
        let all = read_factor_file(path)?;
        let fd = all.into_iter().find(|f| f.eps.is_none()).ok_or_else(|| {
            CliError::Core(Error::MissingFactorData(format!("{} has no entry with eps = null", path.display())))
        })?;
        return Ok(Some((fd, cfg.execution.k_star.clone())));
    }
    if src.oracle {
        if cfg.geometry.profile.kind != ProfileKind::Disks {
            return Err(CliError::Config {
                key: "geometry.profile.kind".into(),
                msg: "oracle limit data belong to the disks profile".into(),
            });
        }
        let lim = oracle_limit(cfg, &cfg.execution.sweep_eps)?;
        return Ok(Some((lim.starred.data, Some(lim.k_star))));
    }
    Ok(None)
}

fn parse_list<T: std::str::FromStr>(s: &str, key: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|p| p.trim().parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config { key: key.into(), msg: format!("cannot parse `{s}`") })
}

fn gap_point(profile: &lamegap::GapProfile, xp: &[f64], frac: f64) -> Vec<f64> {
    let mut x = xp.to_vec();
    x.push(profile.h.value(xp) + frac * profile.delta_unchecked(xp));
    x
}

fn expand(cfg: &RunConfig, a: &ExpandArgs, arts: &mut Artifacts) -> Result<String, CliError> {
    let mut ec = expansion_config(cfg)?;
    if let Some((fd, k)) = starred(cfg, &a.source)? {
        ec = ec.with_starred(fd, k);
    }
    let d = ec.profile.d;
    let n = d - 1;
    let mut cols: Vec<String> = vec!["eps".into()];
    cols.extend((1..=d).map(|i| format!("x{i}")));
    for i in 1..=d {
        cols.extend((1..=d).map(|j| format!("g{i}{j}")));
    }
    cols.push("uncertainty".into());
    let mut t = Table::with_columns("expand", cols);
    let base = ec.profile.clone();
    for &eps in &cfg.eps_list() {
        ec.profile = base.with_eps(eps);
        let p = &ec.profile;
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for s in &a.points {
            let x: Vec<f64> = parse_list(s, "--point")?;
            if x.len() != d {
                return Err(CliError::Config { key: "--point".into(), msg: format!("needs {d} coordinates") });
            }
            pts.push(x);
        }
        if let Some(g) = &a.grid {
            let v: Vec<usize> = parse_list(g, "--grid")?;
            let [nx, nf] = v[..] else {
                return Err(CliError::Config { key: "--grid".into(), msg: "expected NX,NF".into() });
            };
            for ix in 0..nx {
                let x1 = if nx == 1 { 0.0 } else { -p.radius + 2.0 * p.radius * ix as f64 / (nx - 1) as f64 };
                let mut xp = vec![0.0; n];
                xp[0] = x1;
                for jf in 0..nf {
                    pts.push(gap_point(p, &xp, (jf + 1) as f64 / (nf + 1) as f64));
                }
            }
        }
        if let Some(count) = a.sample {
            let mut rng = StdRng::seed_from_u64(cfg.execution.seed);
            let target = pts.len() + count;
            while pts.len() < target {
                let xp: Vec<f64> = (0..n).map(|_| rng.random_range(-p.radius..p.radius)).collect();
                if xp.iter().map(|v| v * v).sum::<f64>() > p.radius * p.radius {
                    continue;
                }
                let frac = rng.random_range(0.05..0.95);
                pts.push(gap_point(p, &xp, frac));
            }
        }
        if pts.is_empty() {
            pts.push(gap_point(p, &vec![0.0; n], 0.5));
        }
        for x in &pts {
            let g = grad_u_asymptotic(&ec, x)?;
            let mut row = vec![num(eps)];
            row.extend(x.iter().map(|v| num(*v)));
            for i in 0..d {
                row.extend((0..d).map(|j| num(g.gradient[(i, j)])));
            }
            row.push(num(g.uncertainty));
            t.push(row);
        }
    }
    arts.table(&t)
}

fn bounds(cfg: &RunConfig, sel: &TheoremSel, src: &StarredSource, arts: &mut Artifacts) -> Result<String, CliError> {
    let mut input = bounds_input(cfg)?;
    if let Some((fd, _)) = starred(cfg, src)? {
        input = input.with_starred(fd);
    }
    let certs: Vec<RateCertificate> = match sel.theorem {
        TheoremArg::Segment => {
            let b = bounds_segment(&input)?;
            vec![b.lower, b.upper]
        }
        TheoremArg::Cylinder => {
            let b = bounds_cylinder(&input)?;
            vec![b.lower, b.upper]
        }
        TheoremArg::Field => vec![bounds_field(&input, sel.xnorm)?],
        TheoremArg::Flat => bounds_flat(&input, sel.sigma)?,
    };
    let mut t = Table::new(
        "bounds",
        &["theorem", "case", "side", "exponent", "log_power", "prefactor_expr", "eps", "value", "resolved", "notes"],
    );
    for c in &certs {
        for &eps in &cfg.eps_list() {
            let v = c.evaluate(eps)?;
            t.push(vec![
                c.theorem.clone(),
                c.case_label.clone(),
                c.side.to_string(),
                exponent_string(&c.rate),
                c.rate.log_power.to_string(),
                c.prefactor_string(),
                num(eps),
                num(v.value),
                v.resolved.to_string(),
                v.notes.join("; "),
            ]);
        }
    }
    arts.table(&t)
}

fn dumps(arts: &mut Artifacts, sols: &[FullSolution]) {
    for (i, s) in sols.iter().enumerate() {
        arts.text(&format!("mesh_{i}.txt"), s.dump_text());
    }
}

fn verify(cfg: &RunConfig, a: &crate::VerifyArgs, arts: &mut Artifacts) -> Result<(String, Option<String>), CliError> {
    let ids: Vec<u8> = match (&a.criteria, a.suite) {
        (Some(c), _) => c.clone(),
        (None, Suite::Quick) => QUICK.to_vec(),
        (None, Suite::Full) => ALL.to_vec(),
    };
    let v = Verifier::new(cfg.oracle()?);
    let reports = v.run_all(&ids).map_err(|e| CliError::Config { key: "--criteria".into(), msg: e.to_string() })?;
    if a.dump {
        dumps(arts, &v.sweep()?.solutions);
    }
    let mut t = Table::new("verify", &["id", "name", "passed", "detail"]);
    let mut text = String::new();
    for r in &reports {
        text.push_str(&r.line());
        text.push('\n');
        t.push(vec![r.id.to_string(), r.name.into(), r.passed.to_string(), r.detail.clone()]);
    }
    arts.table(&t)?;
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    let failure = (!failed.is_empty()).then(|| format!("criteria {} failed", failed.join(", ")));
    Ok((text, failure))
}

fn sweep_cmd(cfg: &RunConfig, dump: bool, arts: &mut Artifacts) -> Result<String, CliError> {
    let eps = cfg.eps_list_or(&cfg.execution.sweep_eps);
    let lim = oracle_limit(cfg, &eps)?;
    let n = basis_count(2);
    let mut t = Table::new(
        "sweep",
        &[
            "eps", "nodes", "triangles", "a11", "a22", "a33", "a12", "a13", "a23", "Q1", "Q2", "Q3", "C1", "C2", "C3",
            "flux_residual", "lambda_min", "grad_midgap",
        ],
    );
    for s in &lim.solutions {
        let f = &s.factors;
        let mut row = vec![num(s.eps()), s.mesh().nodes.len().to_string(), s.mesh().triangles.len().to_string()];
        for (i, j) in [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)] {
            row.push(num(f.a[(i, j)]));
        }
        row.extend((0..n).map(|i| num(f.q[i])));
        row.extend((0..n).map(|i| num(s.constants[i])));
        row.push(num(s.flux_residual));
        row.push(num(s.diagnostics.lambda_min));
        row.push(num(s.grad_u(s.midgap())?.norm()));
        t.push(row);
    }
    let mut st = Table::new("sweep_starred", &["quantity", "value", "exponent", "residual"]);
    for (name, fit) in &lim.starred.fits {
        st.push(vec![name.clone(), num(fit.v_star), num(fit.p), num(fit.residual)]);
    }
    for (i, k) in lim.k_star.iter().enumerate() {
        st.push(vec![format!("K[{}]", i + 1), num(*k), String::new(), String::new()]);
    }
    if dump {
        dumps(arts, &lim.solutions);
    }
    arts.table(&st)?;
    arts.table(&t)
}
