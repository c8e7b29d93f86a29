//! `easytime`: compile EasyTime programs, set up a data directory, and run the
//! timing agent over batch files or live connections.

mod report;

use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use easytime::diagnostic::Severity;
use easytime::runtime::{AgentRuntime, RuntimeError, Server};
use easytime::semantics::{compile_source, CompileFailure, CompiledProgram};
use easytime::simulator::{self, Scenario};
use easytime::store::{create_db, load_runners, DataDir, StoreError};
use easytime::vm::serialize_code;
use easytime::Diagnostic;

#[derive(Debug, Parser)]
#[command(name = "easytime", version, about = "EasyTime race-timing toolchain")]
struct Cli {
    /// Data directory holding runners.csv, results.csv, pgm.txt and archive/.
    #[arg(long, global = true, env = "EASYTIME_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,

    /// More log output; repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Suppress the per-event log lines on standard error.
    #[arg(short, long, global = true)]
    quiet: bool,

    /// Tab-separated output, one record per line.
    #[arg(long, global = true)]
    porcelain: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report diagnostics for a program.
    Check { program: PathBuf },
    /// Translate a program to machine code text.
    Compile {
        program: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Create pgm.txt, runners.csv and a fresh results.csv in the data directory.
    InitDb {
        program: PathBuf,
        #[arg(long)]
        runners: PathBuf,
        /// Replace an existing results.csv.
        #[arg(long)]
        force: bool,
    },
    /// Apply a file of manual events, then move it to the archive.
    RunBatch { events: PathBuf },
    /// Accept device lines over TCP and operator requests over HTTP.
    Serve(ServeArgs),
    /// Generate a deterministic race.
    Simulate(SimulateArgs),
    /// Print the ranked results table.
    Results {
        /// Column to rank by.
        #[arg(long)]
        sort: String,
        /// Treat a zero value as did-not-finish.
        #[arg(long)]
        dnf_zero: bool,
        /// Add a column `A-B` holding the difference of two columns.
        #[arg(long, value_name = "A-B")]
        diff: Option<String>,
    },
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 4000)]
    tcp: u16,
    #[arg(long, default_value_t = 8080)]
    http: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    competitors: u32,
    /// Event file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Emit device quadruples with tags `TAG<id>` instead of manual triplets.
    #[arg(long)]
    auto: bool,
    /// Also write a matching runners.csv.
    #[arg(long)]
    runners_out: Option<PathBuf>,
    /// Stream to a running agent at this address instead of writing a file.
    #[arg(long, value_name = "ADDR")]
    live: Option<SocketAddr>,
    /// Simulated seconds per real second in live mode; 0 sends at once.
    #[arg(long, default_value_t = 0.0)]
    speedup: f64,
}

#[derive(Debug)]
enum Failure {
    Compile,
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Compile => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownColumn(_) => Failure::Usage(e.to_string()),
            other => Failure::Io(other.to_string()),
        }
    }
}

impl From<RuntimeError> for Failure {
    fn from(e: RuntimeError) -> Self {
        match e {
            RuntimeError::Store(s) => s.into(),
            other => Failure::Io(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Compile => {}
                Failure::Usage(m) | Failure::Io(m) => eprintln!("easytime: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Check { program } => {
            let compiled = compile_file(cli, program)?;
            if cli.porcelain {
                println!("status\tOK");
            } else {
                println!(
                    "{}: OK ({} measuring places, {} variables)",
                    program.display(),
                    compiled.unit.blocks.len(),
                    compiled.state.len()
                );
            }
            Ok(())
        }
        Command::Compile { program, output } => {
            let compiled = compile_file(cli, program)?;
            let text = serialize_code(&compiled.unit);
            match output {
                Some(path) => fs::write(path, text).map_err(io_err(path)),
                None => io::stdout().write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
            }
        }
        Command::InitDb { program, runners, force } => {
            let compiled = compile_file(cli, program)?;
            let runners = load_runners(runners)?;
            let data = DataDir::create(&cli.data_dir)?;
            if data.results_path().exists() && !force {
                return Err(Failure::Usage(format!(
                    "{} already exists; pass --force to replace it",
                    data.results_path().display()
                )));
            }
            let db = create_db(&compiled.state, &runners)?;
            data.save_pgm(&compiled.unit)?;
            data.save_runners(&runners)?;
            data.save_results(&db)?;
            if !cli.porcelain {
                println!("initialised {} with {} runners", data.root().display(), runners.len());
            }
            Ok(())
        }
        Command::RunBatch { events } => {
            let data = DataDir::new(&cli.data_dir);
            let mut rt = open_runtime(cli, &data)?;
            let summary = rt.process_batch(events, &data.archive_dir())?;
            rt.save()?;
            if cli.porcelain {
                println!(
                    "applied\t{}\nskipped\t{}\narchived\t{}",
                    summary.applied,
                    summary.skipped,
                    summary.archived_to.display()
                );
            } else {
                println!(
                    "applied {}, skipped {}; archived to {}",
                    summary.applied,
                    summary.skipped,
                    summary.archived_to.display()
                );
            }
            Ok(())
        }
        Command::Serve(args) => serve(cli, args),
        Command::Simulate(args) => simulate(args),
        Command::Results { sort, dnf_zero, diff } => {
            let data = DataDir::new(&cli.data_dir);
            let rt = open_runtime(cli, &data)?;
            let diff = diff.as_deref().map(parse_diff).transpose()?;
            let table = report::results_table(rt.db(), rt.registry(), sort, *dnf_zero, diff)?;
            let out = if cli.porcelain { table.porcelain() } else { table.render() };
            io::stdout().write_all(out.as_bytes()).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn print_diagnostics(cli: &Cli, program: &Path, diags: &[Diagnostic]) {
    for d in diags {
        if cli.porcelain {
            let sev = match d.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            eprintln!(
                "diagnostic\t{}\t{}\t{}\t{sev}\t{}\t{}",
                program.display(),
                d.span.line,
                d.span.column,
                d.code,
                d.message
            );
        } else {
            eprintln!("{}:{d}", program.display());
        }
    }
}

fn compile_file(cli: &Cli, program: &Path) -> Result<CompiledProgram, Failure> {
    let source = fs::read_to_string(program).map_err(io_err(program))?;
    compile_source(&source).map_err(|failure| {
        print_diagnostics(cli, program, &failure.diagnostics);
        if cli.porcelain {
            eprintln!("status\t{}", CompileFailure::STATUS);
        } else {
            eprintln!("{}", CompileFailure::STATUS);
        }
        Failure::Compile
    })
}

fn open_runtime(cli: &Cli, data: &DataDir) -> Result<AgentRuntime, Failure> {
    if !data.pgm_path().exists() {
        return Err(Failure::Io(format!("{} not found; run `easytime init-db` first", data.pgm_path().display())));
    }
    let mut rt = AgentRuntime::open(data)?;
    rt.set_echo(!cli.quiet);
    Ok(rt)
}

fn parse_diff(spec: &str) -> Result<(String, String), Failure> {
    match spec.split_once('-') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
        _ => Err(Failure::Usage(format!("--diff expects A-B, got `{spec}`"))),
    }
}

fn serve(cli: &Cli, args: &ServeArgs) -> Result<(), Failure> {
    let data = DataDir::new(&cli.data_dir);
    let rt = open_runtime(cli, &data)?;
    let server = Server::new(SocketAddr::new(args.bind, args.tcp), SocketAddr::new(args.bind, args.http));
    let handle = server.start(rt).map_err(|e| Failure::Io(format!("cannot listen: {e}")))?;
    if cli.porcelain {
        println!("tcp\t{}\nhttp\t{}", handle.tcp_addr(), handle.http_addr());
    } else {
        println!("devices: tcp://{}  api: http://{}", handle.tcp_addr(), handle.http_addr());
    }
    let _ = io::stdout().flush();

    let signals =
        tokio::runtime::Builder::new_current_thread().enable_all().build().map_err(|e| Failure::Io(e.to_string()))?;
    signals.block_on(wait_for_stop());
    drop(signals);

    let rt = handle.shutdown();
    let received = rt.log().len();
    let applied = rt.applied_count();
    eprintln!("stopped: received {received}, applied {applied}, skipped {}", received - applied);
    Ok(())
}

async fn wait_for_stop() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut term) => {
                tokio::select! {
                    _ = tokio::signal::ctrl_c() => {}
                    _ = term.recv() => {}
                }
            }
            Err(_) => {
                let _ = tokio::signal::ctrl_c().await;
            }
        }
    }
    #[cfg(not(unix))]
    {
        let _ = tokio::signal::ctrl_c().await;
    }
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let scenario = Scenario::with(args.competitors, args.seed);
    let events = simulator::simulate(&scenario).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(path) = &args.runners_out {
        easytime::store::save_runners(path, &simulator::synthetic_runners(args.competitors))?;
    }
    if let Some(addr) = args.live {
        let sent =
            simulator::stream_tcp(addr, &events, args.speedup).map_err(|e| Failure::Io(format!("{addr}: {e}")))?;
        eprintln!("sent {sent} events to {addr}");
        return Ok(());
    }
    let events: Vec<_> = if args.auto { events.iter().map(simulator::as_auto).collect() } else { events };
    match &args.output {
        Some(path) => {
            let file = fs::File::create(path).map_err(io_err(path))?;
            simulator::write_events(io::BufWriter::new(file), &scenario, &events).map_err(io_err(path))
        }
        None => simulator::write_events(io::stdout().lock(), &scenario, &events).map_err(io_err(Path::new("<stdout>"))),
    }
}
