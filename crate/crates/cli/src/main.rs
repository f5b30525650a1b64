use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use choptrey::bench::{
    compared_series, converged_reference, convergence_against, format_g17, model, period_ladder,
    run_fuzz, trace_script, write_context_csv, write_convergence_csv, write_errors_csv,
    write_pi_csv, write_trace_csv, ConvergenceStudy, ErrorReport, MODEL_NAMES,
};
use choptrey::chopatt::ContextConfig;
use choptrey::chopoly::{build_predictor_matrix, exact_predictor_matrix, PredictorSpec, WeightPower};
use choptrey::config::{PolicyChoice, RunConfig};
use choptrey::sim::run_master;

#[derive(Parser)]
#[command(name = "choptrey", version, about = "Extrapolated co-simulation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark from a configuration file and write CSV artifacts.
    Run {
        config: PathBuf,
        /// Overrides `output_directory` from the configuration.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Also write a gnuplot script for the trace.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Print the predictor matrix of P(degree, frame_length, weight) as CSV.
    DumpPi {
        degree: usize,
        frame_length: usize,
        weight: String,
        /// Print exact fractions instead of decimals (integer weights only).
        #[arg(long)]
        exact: bool,
    },
    /// Convergence table of error against communication period.
    Convergence {
        #[arg(long, default_value = "coupled_oscillator")]
        model: String,
        /// zoh, choptrey or poly(d,l,w); may be repeated.
        #[arg(long = "policy", default_value = "zoh")]
        policies: Vec<String>,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the randomized property checks.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
}

enum Failure {
    Usage(String),
    Simulation(anyhow::Error),
    Check(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Simulation(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Simulation(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            output_dir,
            gnuplot,
        } => cmd_run(&config, output_dir, gnuplot),
        Command::DumpPi {
            degree,
            frame_length,
            weight,
            exact,
        } => cmd_dump_pi(degree, frame_length, &weight, exact),
        Command::Convergence {
            model,
            policies,
            levels,
            output,
        } => cmd_convergence(&model, &policies, levels, output),
        Command::Fuzz { seed, cases } => cmd_fuzz(seed, cases),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Simulation(e)) => {
            eprintln!("simulation failed: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn cmd_run(path: &Path, output_dir: Option<PathBuf>, gnuplot: bool) -> Result<(), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let master = cfg.master().map_err(|e| Failure::Usage(e.to_string()))?;
    let out_dir = output_dir.unwrap_or_else(|| {
        if cfg.output_directory.is_absolute() {
            cfg.output_directory.clone()
        } else {
            path.parent().unwrap_or(Path::new(".")).join(&cfg.output_directory)
        }
    });
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let bench = cfg.benchmark();
    let reference = converged_reference(&bench).context("building the reference")?;
    let trace = run_master(&master, &cfg.solver).context("co-simulation")?;

    let mut rows = Vec::new();
    for port in &bench.compared_outputs {
        let r = reference.trace.output(&port.block, &port.port).expect("model output");
        let y = trace.output(&port.block, &port.port).expect("model output");
        rows.push((port.to_string(), ErrorReport::compare(&r, &y).context("comparing")?));
    }
    let overall = ErrorReport::compare(
        &compared_series(&bench, &reference.trace).context("reference series")?,
        &compared_series(&bench, &trace).context("trace series")?,
    )
    .context("comparing")?;
    rows.push(("all".to_string(), overall.clone()));

    let mut slopes = Vec::new();
    if cfg.convergence_levels > 0 {
        let ladder = period_ladder(&bench, cfg.convergence_levels);
        for p in &cfg.convergence_policies {
            let study = convergence_against(&bench, &reference.trace, &p.resolve(&cfg.context), &ladder)
                .with_context(|| format!("convergence study for {p}"))?;
            slopes.push((p.to_string(), study));
        }
    }

    let mut w = create(&out_dir.join("trace.csv"))?;
    write_trace_csv(&mut w, &trace)?;
    w.flush()?;
    let mut w = create(&out_dir.join("errors.csv"))?;
    write_errors_csv(&mut w, &rows)?;
    w.flush()?;
    let mut w = create(&out_dir.join("contexts.csv"))?;
    write_context_csv(&mut w, &trace.contexts, &bench.channel_names())?;
    w.flush()?;

    let mut s = create(&out_dir.join("summary.txt"))?;
    writeln!(s, "model: {}", cfg.model)?;
    writeln!(s, "channel_policy: {}", cfg.channel_policy)?;
    writeln!(s, "H: {}", format_g17(cfg.period))?;
    writeln!(s, "total_time: {}", format_g17(cfg.total_time))?;
    writeln!(s, "reference_rel_tol: {}", format_g17(reference.rel_tol))?;
    writeln!(s, "er_percent: {}", format_g17(overall.er_percent))?;
    writeln!(s, "cumulative_abs_error: {}", format_g17(overall.cumulative_abs_error))?;
    writeln!(s, "max_abs_error: {}", format_g17(overall.max_abs_error()))?;
    writeln!(s, "excluded_points: {}", overall.excluded)?;
    writeln!(s, "exchanges: {}", trace.exchanges.len())?;
    writeln!(s, "events: {}", trace.events.len())?;
    for (name, study) in &slopes {
        let slope = study.slope.map_or_else(|| "saturated".to_string(), format_g17);
        writeln!(s, "slope[{name}]: {slope}")?;
    }
    s.flush()?;

    if gnuplot {
        let columns: Vec<String> = bench.compared_outputs.iter().map(|p| p.to_string()).collect();
        let script = trace_script("trace.csv", &columns, "trace.png");
        fs::write(out_dir.join("trace.gp"), script)?;
    }
    Ok(())
}

fn cmd_dump_pi(degree: usize, frame_length: usize, weight: &str, exact: bool) -> Result<(), Failure> {
    let weight: WeightPower = weight
        .parse()
        .map_err(|e| Failure::Usage(format!("weight `{weight}`: {e}")))?;
    let spec = PredictorSpec::new(degree, frame_length, weight).map_err(|e| Failure::Usage(e.to_string()))?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if exact {
        let rows = exact_predictor_matrix(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
        for row in rows {
            let fields: Vec<String> = row.iter().map(|r| r.to_string()).collect();
            writeln!(out, "{}", fields.join(","))?;
        }
    } else {
        write_pi_csv(&mut out, &build_predictor_matrix(spec).rows())?;
    }
    Ok(())
}

fn cmd_convergence(
    model_name: &str,
    policies: &[String],
    levels: usize,
    output: Option<PathBuf>,
) -> Result<(), Failure> {
    let bench = model(model_name).ok_or_else(|| {
        Failure::Usage(format!("unknown model `{model_name}` (known: {})", MODEL_NAMES.join(", ")))
    })?;
    if levels < 4 {
        return Err(Failure::Usage(format!("need at least 4 levels, got {levels}")));
    }
    let choices: Vec<PolicyChoice> = policies
        .iter()
        .map(|p| p.parse().map_err(Failure::Usage))
        .collect::<Result<_, _>>()?;
    let reference = converged_reference(&bench).context("building the reference")?;
    let ladder = period_ladder(&bench, levels);
    let context = ContextConfig::default();
    let mut rows: Vec<(String, ConvergenceStudy)> = Vec::new();
    for c in &choices {
        let study = convergence_against(&bench, &reference.trace, &c.resolve(&context), &ladder)
            .with_context(|| format!("convergence study for {c}"))?;
        rows.push((c.to_string(), study));
    }
    match output {
        Some(path) => {
            let mut w = create(&path)?;
            write_convergence_csv(&mut w, &rows)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            write_convergence_csv(stdout.lock(), &rows)?;
        }
    }
    Ok(())
}

fn cmd_fuzz(seed: u64, cases: usize) -> Result<(), Failure> {
    let report = run_fuzz(seed, cases);
    println!("property,cases,failures,worst");
    for o in &report.outcomes {
        println!("{},{},{},{}", o.name, o.cases, o.failures, format_g17(o.worst));
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!("property failures with seed {seed}")))
    }
}
