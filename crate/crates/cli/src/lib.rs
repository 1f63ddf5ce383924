//! Command-line front end. [`run`] returns the process exit code:
//! 0 on success, 2 when a solve stops at the inner-iteration cap,
//! 1 on usage errors and oracle faults.

pub mod args;
pub mod emit;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use clap::Parser;
use serde_json::Value;
use tpldca::registry::abs1d;
use tpldca::{
    ap_solution_set_abs, criticality_residual, dc_value, ista_solver, registry_get, run_example_32,
    souza_solve, subgradient_solver, tpldca_solve, DcProblem, InnerSolver, ScriptedSolver,
    SolveStatus, SolveTrace, SolverConfig, StepPolicy, SubgradientSolver, Vector, ZetaSchedule,
    REGISTRY_NAMES,
};

use args::{
    parse_formats, parse_list, Algorithm, Cli, Command, CounterexampleArgs, Formats, InnerKind,
    SolveArgs,
};
use emit::{fmt_f64, num, vec_value, Flat, Outbox};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INNER_CAP: i32 = 2;

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Counterexample(a) => cmd_counterexample(a),
        Command::List => {
            for name in REGISTRY_NAMES {
                println!("{name}");
            }
            Ok(EXIT_OK)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_ERROR
    })
}

pub fn status_exit_code(status: &SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged | SolveStatus::MaxOuterReached => EXIT_OK,
        SolveStatus::InnerCapHit { .. } => EXIT_INNER_CAP,
        SolveStatus::OracleFault { .. } => EXIT_ERROR,
    }
}

/// Everything a solve needs, validated before any computation starts.
struct Prepared {
    problem_name: String,
    problem: DcProblem,
    config: SolverConfig,
    inner_kind: InnerKind,
    inner: Box<dyn InnerSolver>,
    x0: Vector,
    inner_k: Vec<usize>,
    out: PathBuf,
    formats: Formats,
}

fn parse_zeta(s: &str) -> Result<ZetaSchedule> {
    match s.trim() {
        "inverse-square" | "inverse_square" => Ok(ZetaSchedule::InverseSquare),
        other => other
            .parse::<f64>()
            .map(ZetaSchedule::Constant)
            .map_err(|_| {
                anyhow!("--zeta expects `inverse-square` or a positive number, got `{other}`")
            }),
    }
}

fn prepare(mut a: SolveArgs) -> Result<Prepared> {
    a.merge_config()?;
    let problem_name = a.problem.clone().unwrap_or_else(|| "paper2d".into());
    let problem = registry_get(&problem_name, a.instance_seed)?;

    let mut b = SolverConfig::builder().record_inner(a.record_inner);
    if let Some(v) = a.sigma {
        b = b.sigma(v);
    }
    if let Some(v) = a.lambda {
        b = b.lambda(v);
    }
    if let Some(v) = a.theta {
        b = b.theta(v);
    }
    if let Some(v) = a.rho {
        b = b.rho(v);
    }
    if let Some(v) = a.gamma {
        b = b.gamma(v);
    }
    if let Some(z) = &a.zeta {
        b = b.zeta(parse_zeta(z)?);
    }
    if let Some(v) = a.outer_tol {
        b = b.outer_tol(v);
    }
    if let Some(v) = a.max_outer {
        b = b.max_outer(v);
    }
    if let Some(v) = a.inner_cap {
        b = b.inner_cap(v);
    }
    if let Some(v) = a.noise_radius {
        b = b.noise_radius(v);
    }
    if let Some(v) = a.seed {
        b = b.seed(v);
    }
    let config = b.build()?;

    let x0 = match &a.x0 {
        Some(s) => Vector::from_vec(parse_list::<f64>(s, "--x0")?),
        None => problem.default_start().clone(),
    };
    if x0.len() != problem.dim() {
        bail!(
            "--x0 has {} entries but {} has dimension {}",
            x0.len(),
            problem.name(),
            problem.dim()
        );
    }
    if x0.iter().any(|v| !v.is_finite()) {
        bail!("--x0 must be finite");
    }

    let inner_kind = a.inner.unwrap_or(InnerKind::Ista);
    let inner: Box<dyn InnerSolver> = match (inner_kind, a.step) {
        (InnerKind::Ista, None) => Box::new(ista_solver(StepPolicy::Auto)),
        (InnerKind::Ista, Some(t)) if t.is_finite() && t > 0.0 => {
            Box::new(ista_solver(StepPolicy::Fixed(t)))
        }
        (InnerKind::Ista, Some(t)) => bail!("--step must be > 0, got {t}"),
        (InnerKind::Subgradient, None) => Box::new(SubgradientSolver::lipschitz_scaled()),
        (InnerKind::Subgradient, Some(c)) => Box::new(subgradient_solver(c)?),
        (InnerKind::Halving, None) => Box::new(ScriptedSolver::halving()),
        (InnerKind::Halving, Some(_)) => bail!("--step does not apply to --inner halving"),
    };
    if inner_kind == InnerKind::Ista && problem.split().is_none() {
        bail!(
            "{} has no smooth/proximable split; use --inner subgradient",
            problem.name()
        );
    }

    let inner_k = match &a.inner_k {
        Some(s) => parse_list::<usize>(s, "--inner-k")?,
        None => Vec::new(),
    };
    if !inner_k.is_empty() && !config.record_inner() {
        bail!("--inner-k needs the per-inner series; rerun with --record-inner");
    }

    Ok(Prepared {
        problem_name,
        problem,
        config,
        inner_kind,
        inner,
        x0,
        inner_k,
        out: a.output.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        formats: parse_formats(a.output.format.as_deref())?,
    })
}

fn require_tpldca(config: &SolverConfig) -> Result<()> {
    if !config.admits_tpldca() {
        bail!(
            "tpldca requires θ > 1/λ, got θ = {} and λ = {}",
            config.theta(),
            config.lambda()
        );
    }
    Ok(())
}

fn solve_with(p: &Prepared, algorithm: Algorithm) -> Result<(SolveTrace, f64)> {
    let start = Instant::now();
    let trace = match algorithm {
        Algorithm::Tpldca => tpldca_solve(&p.problem, &p.config, p.inner.as_ref(), &p.x0, None)?,
        Algorithm::Souza => souza_solve(&p.problem, &p.config, p.inner.as_ref(), &p.x0)?,
    };
    Ok((trace, start.elapsed().as_secs_f64()))
}

fn inner_label(kind: InnerKind) -> &'static str {
    match kind {
        InnerKind::Ista => "ista",
        InnerKind::Subgradient => "subgradient",
        InnerKind::Halving => "halving",
    }
}

fn zeta_label(z: &ZetaSchedule) -> String {
    match z {
        ZetaSchedule::InverseSquare => "inverse-square".into(),
        ZetaSchedule::Constant(c) => fmt_f64(*c),
        ZetaSchedule::Custom(_) => "custom".into(),
    }
}

fn summary(p: &Prepared, algorithm: Algorithm, trace: &SolveTrace) -> Flat {
    let c = &p.config;
    let mut m = Flat::new();
    let mut put = |k: &str, v: Value| {
        m.insert(k.to_string(), v);
    };
    put("algorithm", algorithm.label().into());
    put("problem", p.problem_name.clone().into());
    put("inner_solver", inner_label(p.inner_kind).into());
    put("status", trace.status.label().into());
    put("exit_code", status_exit_code(&trace.status).into());
    put("x0", vec_value(&p.x0));
    put("final_x", vec_value(&trace.final_x));
    put(
        "f",
        dc_value(&p.problem, &trace.final_x)
            .map(num)
            .unwrap_or(Value::Null),
    );
    put(
        "criticality_residual",
        criticality_residual(&p.problem, &trace.final_x)
            .map(num)
            .unwrap_or(Value::Null),
    );
    put("records", trace.records.len().into());
    put(
        "max_inner_iterations",
        trace
            .records
            .iter()
            .map(|r| r.inner_iterations)
            .max()
            .unwrap_or(-1)
            .into(),
    );
    put(
        "warnings",
        Value::Array(trace.warnings.iter().cloned().map(Value::from).collect()),
    );
    match &trace.status {
        SolveStatus::InnerCapHit {
            k,
            iterates,
            descent_unmet,
            strict_unmet,
            strict_checked,
        } => {
            put("inner_cap.k", (*k).into());
            put("inner_cap.iterates", (*iterates).into());
            put("inner_cap.descent_unmet", (*descent_unmet).into());
            put("inner_cap.strict_unmet", (*strict_unmet).into());
            put("inner_cap.strict_checked", (*strict_checked).into());
        }
        SolveStatus::OracleFault { k, message } => {
            put("oracle_fault.k", (*k).into());
            put("oracle_fault.message", message.clone().into());
        }
        _ => {}
    }
    put("config.sigma", num(c.sigma()));
    put("config.lambda", num(c.lambda()));
    put("config.theta", num(c.theta()));
    put("config.rho", num(c.rho()));
    put("config.gamma", num(c.gamma()));
    put("config.zeta", zeta_label(c.zeta()).into());
    put("config.outer_tol", num(c.outer_tol()));
    put("config.max_outer", c.max_outer().into());
    put("config.inner_cap", c.inner_cap().into());
    put("config.noise_radius", num(c.noise_radius()));
    put("config.seed", c.seed().into());
    put("config.record_inner", c.record_inner().into());
    m
}

/// Queues trace.csv, summary.json and the requested inner series under `dir`.
fn queue_trace(
    outbox: &mut Outbox,
    p: &Prepared,
    dir: &Path,
    algorithm: Algorithm,
    trace: &SolveTrace,
) -> Result<Flat> {
    let s = summary(p, algorithm, trace);
    if p.formats.csv {
        outbox.add(dir.join("trace.csv"), emit::trace_csv(trace)?);
        for &k in &p.inner_k {
            let record = trace.record(k).ok_or_else(|| {
                anyhow!(
                    "--inner-k {k} is beyond the {} trace, which has records 0..{}",
                    algorithm.label(),
                    trace.records.len()
                )
            })?;
            let text = emit::inner_series_csv(record)?.ok_or_else(|| {
                anyhow!("record {k} has no inner series; rerun with --record-inner")
            })?;
            outbox.add(dir.join(format!("inner_k{k}.csv")), text);
        }
    }
    if p.formats.json {
        outbox.add(dir.join("summary.json"), emit::json_text(&s)?);
    }
    Ok(s)
}

fn timing(entries: &[(&str, f64)]) -> Result<String> {
    let m: Flat = entries
        .iter()
        .map(|(k, v)| (k.to_string(), num(*v)))
        .collect();
    emit::json_text(&m)
}

fn announce(outbox: &Outbox) {
    for path in outbox.paths() {
        println!("wrote {}", path.display());
    }
}

fn cmd_solve(a: SolveArgs) -> Result<i32> {
    let algorithm = a.algorithm.unwrap_or(Algorithm::Tpldca);
    let p = prepare(a)?;
    if algorithm == Algorithm::Tpldca {
        require_tpldca(&p.config)?;
    }
    let (trace, wall) = solve_with(&p, algorithm)?;
    let mut outbox = Outbox::default();
    queue_trace(&mut outbox, &p, &p.out, algorithm, &trace)?;
    if p.formats.json {
        outbox.add(p.out.join("timing.json"), timing(&[("wall_time_s", wall)])?);
    }
    announce(&outbox);
    outbox.flush()?;
    println!(
        "{} on {}: {} after {} records",
        algorithm.label(),
        p.problem_name,
        trace.status.label(),
        trace.records.len()
    );
    Ok(status_exit_code(&trace.status))
}

fn cmd_compare(a: SolveArgs) -> Result<i32> {
    let p = prepare(a)?;
    require_tpldca(&p.config)?;
    let (ours, base) = std::thread::scope(|s| {
        let ours = s.spawn(|| solve_with(&p, Algorithm::Tpldca));
        let base = s.spawn(|| solve_with(&p, Algorithm::Souza));
        (ours.join(), base.join())
    });
    let ours = ours.map_err(|_| anyhow!("tpldca solve panicked"))??;
    let base = base.map_err(|_| anyhow!("souza solve panicked"))??;

    let mut outbox = Outbox::default();
    let mut side = Flat::new();
    let mut worst = EXIT_OK;
    for (alg, (trace, _)) in [(Algorithm::Tpldca, &ours), (Algorithm::Souza, &base)] {
        let s = queue_trace(&mut outbox, &p, &p.out.join(alg.label()), alg, trace)?;
        for key in [
            "status",
            "exit_code",
            "f",
            "criticality_residual",
            "records",
            "max_inner_iterations",
            "final_x",
        ] {
            side.insert(format!("{}.{key}", alg.label()), s[key].clone());
        }
        if matches!(trace.status, SolveStatus::OracleFault { .. }) {
            worst = EXIT_ERROR;
        }
    }
    side.insert("problem".into(), p.problem_name.clone().into());
    if p.formats.json {
        outbox.add(p.out.join("compare.json"), emit::json_text(&side)?);
        outbox.add(
            p.out.join("timing.json"),
            timing(&[
                ("souza.wall_time_s", base.1),
                ("tpldca.wall_time_s", ours.1),
            ])?,
        );
    }
    announce(&outbox);
    outbox.flush()?;
    println!(
        "tpldca: {} ({} records); souza: {} ({} records)",
        ours.0.status.label(),
        ours.0.records.len(),
        base.0.status.label(),
        base.0.records.len()
    );
    Ok(worst)
}

/// ε samples for the approximate-problem table: 99 in (0, 1) and 100 in [1, 10].
fn ap_samples() -> Vec<f64> {
    let below = (1..100).map(|j| j as f64 / 100.0);
    let above = (0..100).map(|j| 1.0 + 9.0 * j as f64 / 99.0);
    below.chain(above).collect()
}

fn cmd_counterexample(mut a: CounterexampleArgs) -> Result<i32> {
    a.merge_config()?;
    let theta = a.theta.unwrap_or(1.0);
    let lambda = a.lambda.unwrap_or(1.0);
    let i_max = a.imax.unwrap_or(10_000);
    let zeta = a.zeta.unwrap_or(0.1);
    let out = a.output.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let formats = parse_formats(a.output.format.as_deref())?;

    let report = run_example_32(theta, lambda, i_max, zeta)?;
    let ap: Vec<(f64, &'static str)> = ap_samples()
        .into_iter()
        .map(|e| ap_solution_set_abs(e).map(|s| (e, s.label())))
        .collect::<tpldca::Result<_>>()?;

    // baseline leg: the exact-subdifferential test against the halving sequence
    let problem = abs1d();
    let x_k = Vector::from_element(1, report.x_k);
    let base_cfg = SolverConfig::builder()
        .sigma(report.sigma)
        .theta(theta)
        .lambda(lambda)
        .inner_cap(i_max)
        .max_outer(1)
        .build()?;
    let halving = ScriptedSolver::halving();
    let baseline = souza_solve(&problem, &base_cfg, &halving, &x_k)?;

    let mut m = Flat::new();
    m.insert("theta".into(), num(theta));
    m.insert("lambda".into(), num(lambda));
    m.insert("sigma".into(), num(report.sigma));
    m.insert("x_k".into(), num(report.x_k));
    m.insert("i_max".into(), i_max.into());
    m.insert("zeta_used".into(), num(report.zeta_used));
    m.insert(
        "baseline_failed_all".into(),
        report.baseline_failed_all.into(),
    );
    m.insert("chain_holds".into(), report.chain_holds.into());
    m.insert(
        "tpldca_accept_index".into(),
        report.tpldca_accept_index.into(),
    );
    m.insert(
        "strict_accept_index".into(),
        report.strict_accept_index.into(),
    );
    m.insert(
        "strict_matches_interval".into(),
        report.strict_matches_interval.into(),
    );
    m.insert("baseline.status".into(), baseline.status.label().into());
    m.insert(
        "baseline.exit_code".into(),
        status_exit_code(&baseline.status).into(),
    );
    if let SolveStatus::InnerCapHit {
        iterates,
        strict_unmet,
        ..
    } = baseline.status
    {
        m.insert("baseline.iterates_scanned".into(), iterates.into());
        m.insert("baseline.strict_unmet".into(), strict_unmet.into());
    }

    // tpldca leg, run only where its parameter condition θ > 1/λ holds
    let ours_cfg = base_cfg
        .to_builder()
        .zeta(ZetaSchedule::Constant(zeta))
        .build()?;
    if ours_cfg.admits_tpldca() {
        let ours = tpldca_solve(&problem, &ours_cfg, &halving, &x_k, None)?;
        m.insert("tpldca.status".into(), ours.status.label().into());
        m.insert(
            "tpldca.exit_code".into(),
            status_exit_code(&ours.status).into(),
        );
        m.insert(
            "tpldca.accept_index".into(),
            ours.records[0].inner_iterations.into(),
        );
    } else {
        m.insert(
            "tpldca.status".into(),
            "skipped_theta_not_above_inverse_lambda".into(),
        );
    }
    m.insert(
        "ap.eps_below_one".into(),
        ap.iter()
            .filter(|(e, _)| *e < 1.0)
            .all(|(_, s)| *s == "singleton_zero")
            .into(),
    );

    let mut outbox = Outbox::default();
    if formats.json {
        outbox.add(out.join("report.json"), emit::json_text(&m)?);
    }
    if formats.csv {
        outbox.add(
            out.join("example32_series.csv"),
            emit::example32_csv(&report.series)?,
        );
        outbox.add(out.join("ap_table.csv"), emit::ap_table_csv(&ap)?);
    }
    announce(&outbox);
    outbox.flush()?;
    println!(
        "baseline leg: {} (exit code {}); interval-oracle accept index {:?}, strict accept index {:?}",
        baseline.status.label(),
        status_exit_code(&baseline.status),
        report.tpldca_accept_index,
        report.strict_accept_index
    );
    Ok(EXIT_OK)
}
