use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sandwich_core::harness::sweep::parse_values;
use sandwich_core::surface_code::build_decoder_graph;
use sandwich_core::{
    build_layout, build_memory_circuit, run_experiment, run_sweep, BoundaryState, CoreStyle, Error, ExperimentConfig,
    InnerKind, PauliType, PreparedSchedule, ResultsDocument, Schedule, Scheme, SweepAxis,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "sandwich", version, about = "Surface-code memory experiments with sliding-window decoders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write results JSON and CSV.
    Run(RunArgs),
    /// Run one experiment per value of a single parameter.
    Sweep(SweepArgs),
    /// Print the window schedule for one distance and cycle count.
    Schedule(ScheduleArgs),
    /// Print a decoder graph as JSON.
    Graph(GraphArgs),
}

#[derive(Args, Clone, Default)]
struct ExperimentArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Code distances, comma separated.
    #[arg(long = "d", value_delimiter = ',')]
    distances: Vec<usize>,
    /// Physical error rates, comma separated.
    #[arg(long = "p", value_delimiter = ',')]
    error_rates: Vec<f64>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    inner: Option<InnerKind>,
    /// Step size s.
    #[arg(long)]
    step: Option<usize>,
    /// Buffer size b.
    #[arg(long)]
    buffer: Option<usize>,
    /// Window size w; the buffer is derived from it.
    #[arg(long)]
    window: Option<usize>,
    /// Seam offset t.
    #[arg(long, allow_hyphen_values = true)]
    seam_offset: Option<i64>,
    /// forward-cross or incident.
    #[arg(long)]
    core_style: Option<CoreStyle>,
    /// Artificial window boundaries: open or closed.
    #[arg(long)]
    boundary: Option<BoundaryState>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Explicit cycle counts, replacing the k grid.
    #[arg(long, value_delimiter = ',')]
    rounds: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shot workers; the SANDWICH_WORKERS environment variable overrides it.
    #[arg(long)]
    workers: Option<usize>,
    /// Threads per shot for window decoding.
    #[arg(long)]
    window_workers: Option<usize>,
    /// Results path; `.json` and `.csv` files are written next to it.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Per-shot failure dump (seed, d, p, shot, n, failed).
    #[arg(long)]
    shot_dump: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// step, buffer, seam-offset, boundary or scheme.
    #[arg(long)]
    vary: SweepAxis,
    /// Inclusive range `a..b` or comma list.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Cycle count of the graph to cut; defaults to the longest of the grid.
    #[arg(long)]
    cycles: Option<usize>,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long = "d")]
    distance: usize,
    #[arg(long)]
    cycles: usize,
    #[arg(long = "p", default_value_t = 0.001)]
    error_rate: f64,
    /// z or x.
    #[arg(long, default_value = "z")]
    pauli: String,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn build_config(args: &ExperimentArgs) -> Result<ExperimentConfig, Error> {
    let mut c = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if !args.distances.is_empty() {
        c.distances = args.distances.clone();
    }
    if !args.error_rates.is_empty() {
        c.error_rates = args.error_rates.clone();
    }
    if !args.rounds.is_empty() {
        c.rounds = Some(args.rounds.clone());
    }
    macro_rules! set {
        ($($field:ident <- $arg:ident),*) => {$(
            if let Some(v) = args.$arg.clone() {
                c.$field = v;
            }
        )*};
    }
    set!(scheme <- scheme, inner <- inner, seam_offset <- seam_offset, core_style <- core_style,
         artificial_boundary <- boundary, shots <- shots, seed <- seed, workers <- workers,
         window_workers <- window_workers);
    if args.step.is_some() {
        c.step = args.step;
    }
    if args.buffer.is_some() || args.window.is_some() {
        c.buffer = args.buffer;
        c.window = args.window;
    }
    if let Some(k) = args.k_min {
        c.k_range.0 = k;
    }
    if let Some(k) = args.k_max {
        c.k_range.1 = k;
    }
    if args.output.is_some() {
        c.output = args.output.clone();
    }
    c.apply_env()?;
    c.validate()?;
    Ok(c)
}

fn print_summary(doc: &ResultsDocument) {
    println!("{:>3} {:>8} {:>9} {:>12} {:>25} {:>9}", "d", "p", "scheme", "p_L(d)", "95% interval", "seconds");
    for c in &doc.cells {
        match &c.fit {
            Some(f) => println!(
                "{:>3} {:>8} {:>9} {:>12.4e} [{:>10.3e}, {:>10.3e}] {:>9.1}",
                c.d, c.p, c.params.scheme, f.p_l, f.interval.0, f.interval.1, c.timing.wall_seconds
            ),
            None => println!(
                "{:>3} {:>8} {:>9} {:>12} {}",
                c.d,
                c.p,
                c.params.scheme,
                "no fit",
                c.fit_error.as_deref().unwrap_or("")
            ),
        }
    }
    if let Some(x) = doc.crossing {
        println!("crossing at p = {x:.5}");
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.write_all(b"\n")) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(Error::from),
            }
        }
    }
}

#[derive(Serialize)]
struct ScheduleDump<'a> {
    d: usize,
    cycles: usize,
    schedule: &'a Schedule,
    stages: &'a [Vec<usize>],
    windows: Vec<sandwich_core::windows::WindowSummary>,
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let mut config = build_config(&args.experiment)?;
            config.output.get_or_insert_with(|| PathBuf::from("results.json"));
            if args.shot_dump.is_some() {
                config.shot_dump = args.shot_dump;
            }
            let doc = run_experiment(&config)?;
            print_summary(&doc);
            if let Some(path) = &config.output {
                println!("results written to {}", path.with_extension("json").display());
            }
        }
        Command::Sweep(args) => {
            let mut config = build_config(&args.experiment)?;
            config.output.get_or_insert_with(|| PathBuf::from(format!("sweep_{}.json", args.vary)));
            let values = parse_values(&args.values)?;
            let doc = run_sweep(&config, args.vary, &values)?;
            for pt in &doc.points {
                println!("{} = {}", doc.axis, pt.value);
                print_summary(&pt.results);
            }
        }
        Command::Schedule(args) => {
            let config = build_config(&args.experiment)?;
            for &d in &config.distances {
                let cycles = match args.cycles {
                    Some(n) => n,
                    None => *config.rounds_for(d).last().expect("validated non-empty"),
                };
                let graph = build_decoder_graph(&build_memory_circuit(&build_layout(d)?, cycles)?, config.error_rates[0], PauliType::Z)?;
                let schedule = Schedule::build(&config.params_for(d)?, graph.num_layers)?;
                let prepared = PreparedSchedule::new(&graph, schedule)?;
                let dump = ScheduleDump {
                    d,
                    cycles,
                    schedule: &prepared.schedule,
                    stages: prepared.stages(),
                    windows: prepared.summary(),
                };
                emit(&serde_json::to_string_pretty(&dump)?, config.output.as_ref())?;
            }
        }
        Command::Graph(args) => {
            let pauli = match args.pauli.to_ascii_lowercase().as_str() {
                "z" => PauliType::Z,
                "x" => PauliType::X,
                other => return Err(Error::Config(format!("unknown Pauli type '{other}' (expected z or x)"))),
            };
            let circuit = build_memory_circuit(&build_layout(args.distance)?, args.cycles)?;
            let graph = build_decoder_graph(&circuit, args.error_rate, pauli)?;
            emit(&graph.to_json()?, args.output.as_ref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Invariant(_) => 2,
                _ => 1,
            })
        }
    }
}
