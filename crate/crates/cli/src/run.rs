//! Subcommand implementations and output rendering.
//!
//! Every subcommand produces a [`Report`]: human-readable lines (five
//! decimal places) and a flat JSON document carrying the same values at
//! full round-trip precision, so the two formats agree to the printed
//! precision.  Warnings appear in both renderings and never change the
//! exit status.

use crate::data::{self, Response};
use crate::error::CliError;
use crate::registry::{self, ModelEntry};
use crate::{
    Cli, Command, ConstantsArgs, CritvalArgs, Format, ManifoldArgs, MixtureArgs, ModeArg,
    NlregArgs, ProcArg, ProcessArgs, ScbArgs, SideArg, TailpArgs, ValidateArgs,
};
use serde_json::{Map, Value};
use std::collections::BTreeSet;
use std::time::Instant;
use tube_core::models::expreg::ExpRegression;
use tube_core::models::mixture::{normal_mixture_test, NormalLocation, ScoreFamily, ScoreManifold};
use tube_core::models::scb::{confidence_band, BandOptions, ScbModel};
use tube_core::quadrature::DomainRect;
use tube_core::{
    critval, simulate_sup_tail, tailp, tube_constants, EvalMode, Manifold, McOptions, ProcessSpec,
    Side, TubeConstants, TubeOptions,
};

type Result<T> = std::result::Result<T, CliError>;

/// Collected output of one subcommand.
pub struct Report {
    lines: Vec<String>,
    json: Map<String, Value>,
    warnings: Vec<String>,
}

impl Report {
    fn new(subcommand: &str) -> Self {
        let mut json = Map::new();
        json.insert("subcommand".into(), Value::from(subcommand));
        Report {
            lines: Vec::new(),
            json,
            warnings: Vec::new(),
        }
    }

    fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.json.insert(key.into(), value.into());
    }

    fn warn(&mut self, text: impl Into<String>) {
        self.warnings.push(text.into());
    }

    fn print(mut self, format: Format) {
        match format {
            Format::Text => {
                for line in &self.lines {
                    println!("{line}");
                }
                for warning in &self.warnings {
                    println!("warning: {warning}");
                }
            }
            Format::Json => {
                self.json
                    .insert("warnings".into(), Value::from(self.warnings));
                let doc = Value::Object(self.json);
                let rendered =
                    serde_json::to_string_pretty(&doc).expect("a JSON map always serializes");
                println!("{rendered}");
            }
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<()> {
    configure_threads(cli.common.threads)?;
    let verbose = cli.common.verbose;
    let report = match &cli.command {
        Command::Constants(args) => cmd_constants(args, verbose)?,
        Command::Tailp(args) => cmd_tailp(args)?,
        Command::Critval(args) => cmd_critval(args)?,
        Command::Nlreg(args) => cmd_nlreg(args)?,
        Command::Scb(args) => cmd_scb(args)?,
        Command::Mixture(args) => cmd_mixture(args)?,
        Command::Validate(args) => cmd_validate(args, verbose)?,
    };
    report.print(cli.common.format);
    Ok(())
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let requested = match flag {
        Some(t) => Some(t),
        None => match std::env::var("TUBE_THREADS") {
            Ok(raw) => Some(raw.trim().parse::<usize>().map_err(|_| {
                CliError::usage(format!(
                    "TUBE_THREADS must be a positive integer, got '{raw}'"
                ))
            })?),
            Err(_) => None,
        },
    };
    match requested {
        None => Ok(()),
        Some(0) => Err(CliError::usage("the thread count must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot configure {t} worker threads: {e}"))),
    }
}

fn fmt5(value: f64) -> String {
    format!("{value:.5}")
}

fn kap_line(kap: &[f64]) -> String {
    let parts: Vec<String> = kap.iter().map(|&v| fmt5(v)).collect();
    format!("kap = {}", parts.join(", "))
}

/// Record the coefficient vector, its breakdown, and accumulated warnings.
fn record_constants(report: &mut Report, constants: &TubeConstants) {
    report.set("dim", constants.dim() as u64);
    report.set("kap", constants.kap().to_vec());
    if let Some(b) = constants.breakdown() {
        report.set("kappa0", b.kappa0);
        report.set("l0", b.l0);
        report.set("boundary_increment", b.boundary_increment);
        if let Some(v) = b.kappa2 {
            report.set("kappa2", v);
        }
        if let Some(v) = b.l1 {
            report.set("l1", v);
        }
        if let Some(v) = b.m0 {
            report.set("m0", v);
        }
        if let Some(v) = b.euler_term {
            report.set("euler_term", v);
        }
    }
    for warning in constants.warnings() {
        report.warn(warning.clone());
    }
}

fn breakdown_lines(report: &mut Report, constants: &TubeConstants) {
    let Some(b) = constants.breakdown() else {
        return;
    };
    report.line(format!("kappa0 (interior volume) = {}", fmt5(b.kappa0)));
    report.line(format!("l0 (boundary volume) = {}", fmt5(b.l0)));
    if b.boundary_increment != 0.0 {
        report.line(format!(
            "boundary increment = {}",
            fmt5(b.boundary_increment)
        ));
    }
    if let Some(v) = b.kappa2 {
        report.line(format!("kappa2 (curvature integral) = {}", fmt5(v)));
    }
    if let Some(v) = b.l1 {
        report.line(format!("l1 (boundary curvature) = {}", fmt5(v)));
    }
    if let Some(v) = b.m0 {
        report.line(format!("m0 (corner angles) = {}", fmt5(v)));
    }
    if let Some(v) = b.euler_term {
        report.line(format!("Euler closure term = {}", fmt5(v)));
    }
}

/// A model manifold with its domain and computation options, resolved from
/// the command line.
struct Resolved {
    entry: &'static ModelEntry,
    manifold: Box<dyn Manifold>,
    domain: DomainRect,
    options: TubeOptions,
}

fn resolve_manifold(args: &ManifoldArgs) -> Result<Resolved> {
    let name = args.model.as_deref().ok_or_else(|| {
        CliError::usage(format!(
            "--model is required here; known models: {}",
            registry::known_names()
        ))
    })?;
    let entry = registry::lookup(name).ok_or_else(|| {
        CliError::usage(format!(
            "unknown model '{name}'; known models: {}",
            registry::known_names()
        ))
    })?;

    let dataset = match (&args.data, entry.needs_data) {
        (Some(path), true) => {
            let table = data::read_table(path)?;
            Some(data::to_dataset(
                &table,
                path,
                entry.dim,
                Response::Optional,
            )?)
        }
        (None, true) => {
            return Err(CliError::usage(format!(
                "model '{}' requires --data <file>",
                entry.name
            )))
        }
        (Some(_), false) => {
            return Err(CliError::usage(format!(
                "model '{}' does not read a data file",
                entry.name
            )))
        }
        (None, false) => None,
    };

    let domain = build_domain(args, entry)?;
    let manifold = registry::build(entry, dataset)?;
    let mode = match args.mode {
        Some(ModeArg::Vector) => EvalMode::Vector,
        Some(ModeArg::Covariance) => EvalMode::Covariance,
        None => entry.default_mode,
    };
    let boundary_increment = args
        .boundary_increment
        .unwrap_or_else(|| registry::auto_boundary_increment(entry, &domain));
    let options = TubeOptions {
        mode,
        terms: args.terms,
        mesh: args.grid.clone().unwrap_or_else(|| vec![100]),
        boundary_increment,
        euler_closure: args.euler_closure,
    };
    Ok(Resolved {
        entry,
        manifold,
        domain,
        options,
    })
}

fn build_domain(args: &ManifoldArgs, entry: &ModelEntry) -> Result<DomainRect> {
    let limits: Vec<f64> = match (&args.limits, entry.default_limits) {
        (Some(given), _) => given.clone(),
        (None, Some(defaults)) => defaults.to_vec(),
        (None, None) => {
            return Err(CliError::usage(format!(
                "model '{}' requires --limits lo1,hi1,... ({} values)",
                entry.name,
                2 * entry.dim
            )))
        }
    };
    let mut domain = domain_from_limits(&limits, entry.dim, entry.name)?;
    let periodic: BTreeSet<usize> = entry
        .periodic_axes
        .iter()
        .chain(args.periodic.iter())
        .copied()
        .collect();
    for axis in periodic {
        domain = domain.with_periodic(axis)?;
    }
    for spec in &args.exclude {
        let (axis, lo, hi) = parse_exclusion(spec)?;
        domain = domain.with_exclusion(axis, lo, hi)?;
    }
    Ok(domain)
}

fn domain_from_limits(limits: &[f64], d: usize, what: &str) -> Result<DomainRect> {
    if limits.len() != 2 * d {
        return Err(CliError::usage(format!(
            "--limits needs {} values (lo,hi per axis) for the {d}-dimensional {what}, found {}",
            2 * d,
            limits.len()
        )));
    }
    let bounds: Vec<(f64, f64)> = limits.chunks(2).map(|pair| (pair[0], pair[1])).collect();
    DomainRect::new(&bounds).map_err(CliError::from)
}

fn parse_exclusion(spec: &str) -> Result<(usize, f64, f64)> {
    let parts: Vec<&str> = spec.split(',').collect();
    let bad = || CliError::usage(format!("--exclude expects AXIS,LO,HI, got '{spec}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let axis = parts[0].trim().parse().map_err(|_| bad())?;
    let lo = parts[1].trim().parse().map_err(|_| bad())?;
    let hi = parts[2].trim().parse().map_err(|_| bad())?;
    Ok((axis, lo, hi))
}

fn resolve_process(args: &ProcessArgs) -> Result<ProcessSpec> {
    let side = match args.side {
        SideArg::One => Side::OneSided,
        SideArg::Two => Side::TwoSided,
    };
    let reject_df = |kind: &str| -> Result<()> {
        if args.df.is_some() {
            Err(CliError::usage(format!(
                "--df does not apply to --process {kind}"
            )))
        } else {
            Ok(())
        }
    };
    let reject_n = |kind: &str| -> Result<()> {
        if args.n.is_some() {
            Err(CliError::usage(format!(
                "--n does not apply to --process {kind}"
            )))
        } else {
            Ok(())
        }
    };
    match args.process {
        ProcArg::Gauss => {
            reject_df("gauss")?;
            reject_n("gauss")?;
            Ok(ProcessSpec::gaussian(side))
        }
        ProcArg::T => {
            reject_n("t")?;
            let df = args
                .df
                .ok_or_else(|| CliError::usage("--process t requires --df"))?;
            Ok(ProcessSpec::studentized(df, side)?)
        }
        ProcArg::Unif => {
            reject_df("unif")?;
            let n = args
                .n
                .ok_or_else(|| CliError::usage("--process unif requires --n"))?;
            Ok(ProcessSpec::sphere_uniform(n, side)?)
        }
    }
}

fn record_process(report: &mut Report, args: &ProcessArgs) {
    report.set(
        "process",
        match args.process {
            ProcArg::Gauss => "gauss",
            ProcArg::T => "t",
            ProcArg::Unif => "unif",
        },
    );
    report.set(
        "side",
        match args.side {
            SideArg::One => "one",
            SideArg::Two => "two",
        },
    );
    if let Some(df) = args.df {
        report.set("df", df);
    }
    if let Some(n) = args.n {
        report.set("n", n as u64);
    }
}

/// Coefficients either supplied on the command line (`--constants` with
/// `--d`) or computed from a model.
fn resolve_constants_source(
    supplied: &Option<Vec<f64>>,
    d: Option<usize>,
    manifold: &ManifoldArgs,
    report: &mut Report,
) -> Result<TubeConstants> {
    match supplied {
        Some(kap) => {
            if manifold.model.is_some() {
                return Err(CliError::usage(
                    "give either --constants or --model, not both",
                ));
            }
            let d = d.ok_or_else(|| CliError::usage("--constants requires --d <dimension>"))?;
            let constants = TubeConstants::from_parts(d, kap.clone())?;
            report.set("source", "supplied");
            record_constants(report, &constants);
            Ok(constants)
        }
        None => {
            if d.is_some() {
                return Err(CliError::usage(
                    "--d accompanies --constants; a model fixes its own dimension",
                ));
            }
            if manifold.model.is_none() {
                return Err(CliError::usage(
                    "give --constants kap0,kap1,... with --d, or --model <name>",
                ));
            }
            let resolved = resolve_manifold(manifold)?;
            let constants =
                tube_constants(&resolved.manifold, &resolved.domain, &resolved.options)?;
            report.set("source", resolved.entry.name);
            record_constants(report, &constants);
            Ok(constants)
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "alpha must lie strictly between 0 and 1, got {alpha}"
        )))
    }
}

fn cmd_constants(args: &ConstantsArgs, verbose: u8) -> Result<Report> {
    let resolved = resolve_manifold(&args.manifold)?;
    let started = Instant::now();
    let constants = tube_constants(&resolved.manifold, &resolved.domain, &resolved.options)?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

    let mut report = Report::new("constants");
    report.set("model", resolved.entry.name);
    report.set(
        "mesh",
        resolved
            .options
            .mesh
            .iter()
            .map(|&m| m as u64)
            .collect::<Vec<_>>(),
    );
    record_constants(&mut report, &constants);
    report.set("elapsed_ms", elapsed_ms);

    if verbose > 0 {
        report.line(format!(
            "model: {} ({}), d = {}",
            resolved.entry.name,
            resolved.entry.summary,
            constants.dim()
        ));
    }
    report.line(kap_line(constants.kap()));
    if verbose > 0 {
        breakdown_lines(&mut report, &constants);
        report.line(format!("elapsed = {elapsed_ms:.1} ms"));
    }
    Ok(report)
}

fn cmd_tailp(args: &TailpArgs) -> Result<Report> {
    let mut report = Report::new("tailp");
    let constants = resolve_constants_source(&args.constants, args.d, &args.manifold, &mut report)?;
    let spec = resolve_process(&args.process)?;
    record_process(&mut report, &args.process);
    let tail = tailp(args.cutoff, &constants, &spec)?;
    report.set("cutoff", args.cutoff);
    report.set("tailp", tail.value);
    report.set("clamped", tail.clamped);
    if tail.clamped {
        report.warn("the tail series value fell outside [0, 1] and was clamped");
    }
    report.line(format!(
        "Tail probability at {} = {}",
        fmt5(args.cutoff),
        fmt5(tail.value)
    ));
    Ok(report)
}

fn cmd_critval(args: &CritvalArgs) -> Result<Report> {
    check_alpha(args.alpha)?;
    let mut report = Report::new("critval");
    let constants = resolve_constants_source(&args.constants, args.d, &args.manifold, &mut report)?;
    let spec = resolve_process(&args.process)?;
    record_process(&mut report, &args.process);
    let critical_value = critval(args.alpha, &constants, &spec)?;
    report.set("alpha", args.alpha);
    report.set("critical_value", critical_value);
    report.line(format!(
        "Level {} critical value = {}",
        args.alpha,
        fmt5(critical_value)
    ));
    Ok(report)
}

fn cmd_nlreg(args: &NlregArgs) -> Result<Report> {
    if let Some(alpha) = args.alpha {
        check_alpha(alpha)?;
    }
    let table = data::read_table(&args.data)?;
    let dataset = data::to_dataset(&table, &args.data, 1, Response::Required)?;
    let observations = dataset.len();
    let domain = domain_from_limits(&args.limits, 1, "rate window")?;
    let model = ExpRegression::new(dataset)?;
    let outcome = model.run_test(&domain, &[args.grid])?;

    let mut report = Report::new("nlreg");
    report.set("observations", observations as u64);
    record_constants(&mut report, &outcome.constants);
    report.set("statistic", outcome.statistic);
    report.set("best_rate", outcome.best_rate);
    report.set("p_value", outcome.p_value.value);
    report.set("p_clamped", outcome.p_value.clamped);
    if outcome.p_value.clamped {
        report.warn("the p-value series fell outside [0, 1] and was clamped");
    }

    report.line(kap_line(outcome.constants.kap()));
    report.line(format!(
        "Alignment statistic = {} (at rate = {})",
        fmt5(outcome.statistic),
        fmt5(outcome.best_rate)
    ));
    report.line(format!("p-value = {}", fmt5(outcome.p_value.value)));
    if let Some(alpha) = args.alpha {
        let reject = outcome.p_value.value < alpha;
        report.set("alpha", alpha);
        report.set("reject", reject);
        report.line(format!(
            "Reject at level {}: {}",
            alpha,
            if reject { "yes" } else { "no" }
        ));
    }
    Ok(report)
}

fn cmd_scb(args: &ScbArgs) -> Result<Report> {
    check_alpha(args.alpha)?;
    if args.limits.is_empty() {
        return Err(CliError::usage(
            "--limits is required: prediction box lo1,hi1[,lo2,hi2,...]",
        ));
    }
    if args.limits.len() < 2 || args.limits.len() % 2 != 0 {
        return Err(CliError::usage(format!(
            "--limits needs an even number of values (lo,hi per axis), found {}",
            args.limits.len()
        )));
    }
    if args.points < 2 {
        return Err(CliError::usage("--points must be at least 2"));
    }
    let d = args.limits.len() / 2;
    let table = data::read_table(&args.data)?;
    let dataset = data::to_dataset(&table, &args.data, d, Response::Required)?;
    let domain = domain_from_limits(&args.limits, d, "prediction box")?;
    let model = ScbModel::fit(&dataset)?;
    let options = BandOptions {
        mesh: args.grid.clone().unwrap_or_else(|| vec![100]),
        grid_per_axis: args.points,
    };
    let band = confidence_band(&model, &domain, args.alpha, &options)?;

    let mut report = Report::new("scb");
    report.set("observations", model.observations() as u64);
    record_constants(&mut report, &band.constants);
    report.set("alpha", band.alpha);
    report.set("critical_value", band.critical_value);
    report.set("sigma_hat", band.sigma_hat);
    report.set("residual_df", band.residual_df);
    report.set("coefficients", model.coefficients().to_vec());
    report.set(
        "x",
        band.points
            .iter()
            .map(|p| Value::from(p.x.clone()))
            .collect::<Vec<_>>(),
    );
    report.set(
        "center",
        band.points.iter().map(|p| p.center).collect::<Vec<_>>(),
    );
    report.set(
        "half_width",
        band.points.iter().map(|p| p.half_width).collect::<Vec<_>>(),
    );

    report.line(format!(
        "Level {} critical value = {}",
        band.alpha,
        fmt5(band.critical_value)
    ));
    report.line(format!(
        "sigma_hat = {} (residual df = {})",
        fmt5(band.sigma_hat),
        band.residual_df
    ));
    let mut header = String::new();
    for axis in 1..=d {
        header.push_str(&format!("{:>10}", format!("x{axis}")));
    }
    header.push_str(&format!("{:>11}{:>11}", "center", "half-width"));
    report.line(header);
    for point in &band.points {
        let mut row = String::new();
        for &x in &point.x {
            row.push_str(&format!("{x:>10.5}"));
        }
        row.push_str(&format!("{:>11.5}{:>11.5}", point.center, point.half_width));
        report.line(row);
    }
    Ok(report)
}

fn cmd_mixture(args: &MixtureArgs) -> Result<Report> {
    check_alpha(args.alpha)?;
    let domain = domain_from_limits(&args.limits, 1, "scan window")?;
    let mesh = vec![args.grid];
    let mut report = Report::new("mixture");

    let (constants, critical_value, scan) = match &args.data {
        Some(path) => {
            let table = data::read_table(path)?;
            let dataset = data::to_dataset(&table, path, 1, Response::Forbidden)?;
            report.set("observations", dataset.len() as u64);
            let outcome = normal_mixture_test(&dataset, &domain, args.alpha, &mesh)?;
            (
                outcome.constants.clone(),
                outcome.critical_value,
                Some(outcome),
            )
        }
        None => {
            let family = NormalLocation;
            let manifold = ScoreManifold::new(family);
            let options = TubeOptions {
                mesh,
                boundary_increment: family.hidden_boundary_increment(&domain),
                ..TubeOptions::new(EvalMode::Covariance)
            };
            let constants = tube_constants(&manifold, &domain, &options)?;
            let spec = ProcessSpec::gaussian(Side::OneSided);
            let critical_value = critval(args.alpha, &constants, &spec)?;
            (constants, critical_value, None)
        }
    };

    record_constants(&mut report, &constants);
    report.set("alpha", args.alpha);
    report.set("critical_value", critical_value);

    let kap = constants.kap();
    report.line(format!("kappa0 = {}", fmt5(kap[0])));
    if kap.len() > 1 {
        report.line(format!("l0/2 = {}", fmt5(kap[1])));
    }
    report.line(format!(
        "Level {} critical value = {}",
        args.alpha,
        fmt5(critical_value)
    ));

    if let Some(outcome) = scan {
        report.set("statistic", outcome.statistic);
        report.set("best_lambda", outcome.best_lambda);
        report.set("reject", outcome.reject);
        report.line(format!(
            "Scan statistic = {} (at lambda = {})",
            fmt5(outcome.statistic),
            fmt5(outcome.best_lambda)
        ));
        match &outcome.p_value {
            Some(p) => {
                report.set("p_value", p.value);
                if p.clamped {
                    report.warn("the p-value series fell outside [0, 1] and was clamped");
                }
                report.line(format!("p-value = {}", fmt5(p.value)));
            }
            None => {
                report.set("p_value", Value::Null);
                report.line("p-value = n/a (the scan statistic is not positive)");
            }
        }
        report.line(format!(
            "Reject at level {}: {}",
            args.alpha,
            if outcome.reject { "yes" } else { "no" }
        ));
    }
    Ok(report)
}

fn cmd_validate(args: &ValidateArgs, verbose: u8) -> Result<Report> {
    let resolved = resolve_manifold(&args.manifold)?;
    let spec = resolve_process(&args.process)?;
    let constants = tube_constants(&resolved.manifold, &resolved.domain, &resolved.options)?;
    let tail = tailp(args.cutoff, &constants, &spec)?;
    let mc_options = McOptions {
        mode: resolved.options.mode,
        mesh: resolved.options.mesh.clone(),
        grid_mult: args.grid_mult,
        reps: args.reps,
        seed: args.seed,
        tube_reference: Some(tail.value),
    };
    let mc = simulate_sup_tail(
        resolved.manifold.as_ref(),
        &resolved.domain,
        &spec,
        args.cutoff,
        &mc_options,
    )?;

    let mut report = Report::new("validate");
    report.set("model", resolved.entry.name);
    record_constants(&mut report, &constants);
    record_process(&mut report, &args.process);
    report.set("cutoff", args.cutoff);
    report.set("tube_tailp", tail.value);
    report.set("clamped", tail.clamped);
    if tail.clamped {
        report.warn("the tail series value fell outside [0, 1] and was clamped");
    }
    report.set("mc_estimate", mc.estimate);
    report.set("std_error", mc.std_error);
    report.set("reps", mc.reps);
    report.set("seed", mc.seed);
    report.set("grid_points", mc.grid_points as u64);
    report.set("dropped_points", mc.dropped_points as u64);
    report.set("grid", mc.grid.clone());

    report.line(format!("Tube tail probability = {}", fmt5(tail.value)));
    report.line(format!(
        "MC estimate = {} (SE = {}, {} reps, seed {})",
        fmt5(mc.estimate),
        fmt5(mc.std_error),
        mc.reps,
        mc.seed
    ));
    if let Some(cmp) = &mc.comparison {
        report.set("z_score", cmp.z_score);
        report.line(format!("z-score = {:.2}", cmp.z_score));
    }
    if verbose > 0 {
        report.line(format!(
            "grid: {} ({} points, {} dropped)",
            mc.grid, mc.grid_points, mc.dropped_points
        ));
    }
    Ok(report)
}
