mod args;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use marscore::io::{
    read_csv, read_csv_grouped, write_power_curve, write_report, write_simulation_report,
    ColumnSpec, ReportEntry, RunConfig,
};
use marscore::score::analyze;
use marscore::sim::{power_curve, run_rejection_study, Departure, RejectionRateReport, StudyConfig};
use marscore::{Error, Result};

use args::{Cli, Command, DesignArgs, PowerCurveArgs, SimulateArgs, TestArgs};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Test(a) => run_test(a),
        Command::Simulate(a) => {
            design(&a.design).map(|cfg| run_simulate(&a, &cfg).map_err(Failure::from))
        }
        Command::PowerCurve(a) => {
            design(&a.design).map(|cfg| run_power_curve(&a, &cfg).map_err(Failure::from))
        }
    };
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure { error, group })) => {
            match group {
                Some(g) => eprintln!("error[{}]: group {g:?}: {error}", error.name()),
                None => eprintln!("error[{}]: {error}", error.name()),
            }
            ExitCode::from(1)
        }
        Err(usage) => usage.exit(),
    }
}

fn design(d: &DesignArgs) -> Result<StudyConfig, clap::Error> {
    d.study_config().map_err(|msg| {
        Cli::command().error(clap::error::ErrorKind::ArgumentConflict, msg)
    })
}

fn run_test(a: TestArgs) -> Result<Result<(), Failure>, clap::Error> {
    let columns = ColumnSpec {
        outcome_column: a.outcome,
        covariate_columns: a.covariates,
        propensity_columns: a.propensity,
        mean_basis: a.mean_basis,
        logvar_basis: a.logvar_basis,
    };
    let cfg = RunConfig {
        columns,
        variants: a.variants,
        alpha: a.alpha,
        group_by: a.group_by,
        output: a.out.output,
        format: a.out.format.into(),
    };
    if let Err(e) = cfg.validate() {
        return Err(Cli::command().error(clap::error::ErrorKind::ValueValidation, e.to_string()));
    }
    Ok(test_dataset(&cfg, &a.data))
}

fn test_dataset(cfg: &RunConfig, path: &std::path::Path) -> Result<(), Failure> {
    let groups = match &cfg.group_by {
        Some(col) => read_csv_grouped(path, &cfg.columns, col)?
            .into_iter()
            .map(|(label, data)| (Some(label), data))
            .collect(),
        None => vec![(None, read_csv(path, &cfg.columns)?)],
    };
    let spec = cfg.columns.analysis_spec()?;
    let mut entries = Vec::new();
    for (label, data) in &groups {
        let analysis = analyze(data, &spec, &cfg.variants).map_err(|error| Failure {
            error,
            group: label.clone(),
        })?;
        entries.extend(ReportEntry::from_analysis(label.as_deref(), data, &analysis));
    }
    print_tests(&entries, cfg.alpha);
    if let Some(path) = &cfg.output {
        write_report(&entries, path, cfg.format)?;
    }
    Ok(())
}

/// A runtime error and, for per-group tests, the group it came from.
struct Failure {
    error: Error,
    group: Option<String>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, group: None }
    }
}

fn print_tests(entries: &[ReportEntry], alpha: f64) {
    println!(
        "{:<12} {:<7} {:>6} {:>8} {:>12} {:>9} {:>8}  decision at alpha = {alpha}",
        "group", "variant", "n", "missing", "statistic", "z", "p-value"
    );
    for e in entries {
        let decision = if e.test.rejects(alpha) {
            "reject MAR"
        } else {
            "do not reject"
        };
        println!(
            "{:<12} {:<7} {:>6} {:>7.2}% {:>12.4} {:>9.4} {:>8.4}  {decision}",
            e.group.as_deref().unwrap_or("all"),
            e.test.variant.name(),
            e.n,
            100.0 * e.missing_fraction,
            e.test.statistic,
            e.test.z,
            e.test.p_value,
        );
    }
}

fn print_rates(rep: &RejectionRateReport) {
    for (name, r) in [("S1", &rep.rate_s1), ("S2", &rep.rate_s2)] {
        println!(
            "{name}: rejection rate {:.2}% (SE {:.2}; {} rejections in {} valid replications)",
            100.0 * r.rate,
            100.0 * r.std_error,
            r.rejections,
            r.valid
        );
    }
    if let Some(w) = &rep.warning {
        eprintln!("warning: {w}");
    }
}

fn run_simulate(a: &SimulateArgs, cfg: &StudyConfig) -> Result<()> {
    let reps = a.run.replications();
    let rep = run_rejection_study(cfg, reps, a.run.alpha, a.run.seed, a.run.threads)?;
    println!(
        "{reps} replications, n = {}, alpha = {}, seed = {}, fit failures = {}",
        cfg.n(),
        a.run.alpha,
        a.run.seed,
        rep.fit_failure_count
    );
    print_rates(&rep);
    if let Some(path) = &a.out.output {
        write_simulation_report(&rep, path, a.out.format.into())?;
    }
    Ok(())
}

fn run_power_curve(a: &PowerCurveArgs, cfg: &StudyConfig) -> Result<()> {
    let departure = match cfg {
        StudyConfig::Example1(_) => Departure::C1,
        StudyConfig::Example2(_) => Departure::Gamma,
    };
    let reps = a.run.replications();
    let curve = power_curve(cfg, departure, &a.grid, reps, a.run.alpha, a.run.seed, a.run.threads)?;
    println!(
        "{:>10} {:>9} {:>9} {:>9} {:>9}",
        departure.name(),
        "S1 rate",
        "S1 SE",
        "S2 rate",
        "S2 SE"
    );
    for (v, rep) in curve.grid.iter().zip(&curve.reports) {
        println!(
            "{v:>10} {:>8.2}% {:>9.2} {:>8.2}% {:>9.2}",
            100.0 * rep.rate_s1.rate,
            100.0 * rep.rate_s1.std_error,
            100.0 * rep.rate_s2.rate,
            100.0 * rep.rate_s2.std_error
        );
        if let Some(w) = &rep.warning {
            eprintln!("warning at {} = {v}: {w}", departure.name());
        }
    }
    if let Some(path) = &a.out.output {
        write_power_curve(&curve, path, a.out.format.into())?;
    }
    Ok(())
}
