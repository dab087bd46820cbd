//! `scc` — command-line front end for the SCC architecture toolchain:
//! static checking, contract denotations, framework manifest generation,
//! simulation, reachability queries, invariant checking and Promela export.
//!
//! Exit codes: 0 on success (checks pass, invariants hold), 1 on findings,
//! violations or failed verdicts, 2 on usage or I/O errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scc_core::check;
use scc_core::manifest::{diff_manifests, generate_manifest, render_stubs, FrameworkManifest};
use scc_core::model::{Architecture, ChildRef, ComponentId};
use scc_core::parser::{parse, SourceText};
use scc_core::sim::{
    install_passthrough, install_passthrough_pulling, install_webserver_demo, parse_scenario,
    Scheduler, SimConfig, Simulator, SyncPolicy,
};
use scc_core::verify::{
    check_invariant, emit_promela, parse_invariant, parse_invariants, reach_witness, CheckerConfig,
};

#[derive(Parser)]
#[command(
    name = "scc",
    version,
    about = "Compiler, verifier and simulator for SCC architecture descriptions"
)]
struct Cli {
    /// Output format for reports and traces.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an architecture and run consistency, determinacy and typing
    /// checks.
    Check(InputArgs),
    /// Print the abstract method signature each interaction contract imposes.
    Denote(InputArgs),
    /// Generate the framework manifest and stub skeletons.
    Generate(GenerateArgs),
    /// Execute a scenario against an architecture with a handler pack.
    Simulate(SimulateArgs),
    /// Query data reachability between a component and a name.
    Reach(ReachArgs),
    /// Check interaction invariants with the built-in bounded checker.
    Verify(VerifyArgs),
    /// Emit a Promela model for external checking with SPIN.
    EmitPromela(EmitArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Architecture description (.adl file).
    input: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    input: PathBuf,
    /// Directory receiving `<Architecture>.manifest.json`.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Write the stub listing here instead of standard output.
    #[arg(long)]
    stubs: Option<PathBuf>,
    /// Diff the freshly generated manifest against a previous one instead of
    /// writing files.
    #[arg(long)]
    diff: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HandlerPack {
    /// Forward activation values; optional emissions always publish.
    Passthrough,
    /// Like passthrough, but also performs every declared pull.
    PassthroughPulling,
    /// Table-backed application logic for the bundled web server fixture.
    WebserverDemo,
}

#[derive(Args)]
struct SimulateArgs {
    input: PathBuf,
    /// Scenario file (`publish Sensor.source <literal>` / `pull Op (...)`).
    scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = HandlerPack::Passthrough)]
    handlers: HandlerPack,
    /// Drain pending interactions in seeded random order instead of FIFO.
    #[arg(long)]
    seed: Option<u64>,
    /// Queueing discipline for joint activations.
    #[arg(long, value_enum, default_value_t = SyncPolicyArg::Queue)]
    sync_policy: SyncPolicyArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SyncPolicyArg {
    Queue,
    Latest,
}

#[derive(Args)]
struct ReachArgs {
    input: PathBuf,
    /// Component the query starts from.
    from: String,
    /// Target name: a context operator or `Sensor.source`.
    to: String,
}

#[derive(Args)]
struct VerifyArgs {
    input: PathBuf,
    /// Inline invariant, e.g. `always publish(S.a) leadsto activated(X)`.
    #[arg(long = "invariant")]
    invariants: Vec<String>,
    /// File with one invariant per line.
    #[arg(long = "invariants")]
    invariants_file: Option<PathBuf>,
    /// State limit for the explicit-state search.
    #[arg(long, default_value_t = 1_000_000)]
    bound: usize,
    /// Capacity of every channel in the flow model.
    #[arg(long, default_value_t = 1)]
    channel_capacity: u8,
}

#[derive(Args)]
struct EmitArgs {
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    channel_capacity: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Parse the input, rendering diagnostics to stderr on failure.
fn require_arch(path: &Path) -> Result<Result<Architecture, ExitCode>, String> {
    let src = SourceText::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
    match parse(&src) {
        Ok(arch) => Ok(Ok(arch)),
        Err(diags) => {
            let shown = src.path.display().to_string();
            for d in diags {
                eprintln!("{}", d.render(&shown));
            }
            Ok(Err(ExitCode::from(1)))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check(args) => {
            let arch = match require_arch(&args.input)? {
                Ok(a) => a,
                Err(code) => return Ok(code),
            };
            let report = check::full_check(&arch);
            match cli.format {
                Format::Machine => {
                    for f in &report.findings {
                        println!("{}", serde_json::to_string(f).expect("findings serialize"));
                    }
                }
                Format::Text => {
                    for f in &report.findings {
                        let witness = f
                            .witness
                            .map(|(i, j)| format!(" (contracts {i}, {j})"))
                            .unwrap_or_default();
                        println!(
                            "{}[{}] {}: {}{witness}",
                            f.severity, f.rule, f.subject, f.message
                        );
                    }
                    if report.passed() {
                        println!("consistent, deterministic");
                    } else {
                        let errors = report.errors().count();
                        println!("{errors} error(s)");
                    }
                }
            }
            Ok(exit_for(report.passed()))
        }
        Command::Denote(args) => {
            let arch = match require_arch(&args.input)? {
                Ok(a) => a,
                Err(code) => return Ok(code),
            };
            let report = check::check_architecture_consistency(&arch);
            if !report.passed() {
                eprintln!("architecture is inconsistent; run `scc check` for details");
                return Ok(ExitCode::from(1));
            }
            let table = scc_core::denote::denote_architecture(&arch).map_err(|e| e.to_string())?;
            for (op, descriptors) in table {
                match cli.format {
                    Format::Machine => {
                        let record = serde_json::json!({
                            "operator": op,
                            "methods": descriptors,
                        });
                        println!("{record}");
                    }
                    Format::Text => {
                        for d in descriptors {
                            println!("{op}.{}: {}", d.name, d.denotation());
                        }
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate(args) => {
            let arch = match require_arch(&args.input)? {
                Ok(a) => a,
                Err(code) => return Ok(code),
            };
            let manifest = match generate_manifest(&arch) {
                Ok(m) => m,
                Err(scc_core::manifest::GenerateError::ChecksFailed(report)) => {
                    for f in &report.findings {
                        eprintln!("{}[{}] {}: {}", f.severity, f.rule, f.subject, f.message);
                    }
                    eprintln!("generation aborted: architecture fails its checks");
                    return Ok(ExitCode::from(1));
                }
                Err(e) => return Err(e.to_string()),
            };
            if let Some(old_path) = &args.diff {
                let old_text = std::fs::read_to_string(old_path)
                    .map_err(|e| format!("{}: {e}", old_path.display()))?;
                let old = FrameworkManifest::from_json(&old_text)
                    .map_err(|e| format!("{}: {e}", old_path.display()))?;
                for entry in diff_manifests(&old, &manifest) {
                    match cli.format {
                        Format::Machine => println!(
                            "{}",
                            serde_json::to_string(&entry).expect("diff entries serialize")
                        ),
                        Format::Text => println!("{entry}"),
                    }
                }
                return Ok(ExitCode::SUCCESS);
            }
            std::fs::create_dir_all(&args.out_dir)
                .map_err(|e| format!("{}: {e}", args.out_dir.display()))?;
            let manifest_path = args
                .out_dir
                .join(format!("{}.manifest.json", manifest.architecture_name));
            std::fs::write(&manifest_path, manifest.to_canonical_json())
                .map_err(|e| format!("{}: {e}", manifest_path.display()))?;
            eprintln!("wrote {}", manifest_path.display());
            let stubs = render_stubs(&manifest);
            match &args.stubs {
                Some(path) => {
                    std::fs::write(path, stubs).map_err(|e| format!("{}: {e}", path.display()))?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{stubs}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(args) => {
            let arch = match require_arch(&args.input)? {
                Ok(a) => a,
                Err(code) => return Ok(code),
            };
            let scenario_text = std::fs::read_to_string(&args.scenario)
                .map_err(|e| format!("{}: {e}", args.scenario.display()))?;
            let scenario = match parse_scenario(&scenario_text, &arch) {
                Ok(s) => s,
                Err(errors) => {
                    for e in errors {
                        eprintln!("{}: {e}", args.scenario.display());
                    }
                    return Ok(ExitCode::from(1));
                }
            };
            let config = SimConfig {
                sync_policy: match args.sync_policy {
                    SyncPolicyArg::Queue => SyncPolicy::QueueAll,
                    SyncPolicyArg::Latest => SyncPolicy::KeepLatest,
                },
                sync_overrides: BTreeMap::new(),
                scheduler: match args.seed {
                    Some(seed) => Scheduler::SeededRandom(seed),
                    None => Scheduler::Fifo,
                },
            };
            let mut sim = Simulator::new(arch, config).map_err(|e| e.to_string())?;
            match args.handlers {
                HandlerPack::Passthrough => {
                    install_passthrough(&mut sim, scc_core::sim::MaybeMode::Publish)
                        .map_err(|e| e.to_string())?;
                }
                HandlerPack::PassthroughPulling => {
                    install_passthrough_pulling(&mut sim, scc_core::sim::MaybeMode::Publish)
                        .map_err(|e| e.to_string())?;
                }
                HandlerPack::WebserverDemo => {
                    install_webserver_demo(&mut sim).map_err(|e| e.to_string())?;
                }
            }
            let report = sim.run(&scenario).map_err(|e| e.to_string())?;
            match cli.format {
                Format::Machine => print!("{}", report.trace.machine_lines()),
                Format::Text => print!("{}", report.trace.render()),
            }
            for failure in &report.failures {
                eprintln!("failure: {failure}");
            }
            Ok(exit_for(report.passed()))
        }
        Command::Reach(args) => {
            let arch = match require_arch(&args.input)? {
                Ok(a) => a,
                Err(code) => return Ok(code),
            };
            let from = ComponentId::new(&args.from);
            if arch.kind_of(&from).is_none() {
                return Err(format!("unknown component `{}`", args.from));
            }
            let target = parse_target(&args.to, &arch)?;
            match reach_witness(&from, &target, &arch) {
                Some(path) => {
                    let rendered: Vec<String> = path.iter().map(|c| c.to_string()).collect();
                    match cli.format {
                        Format::Machine => println!(
                            "{}",
                            serde_json::json!({"reachable": true, "path": rendered})
                        ),
                        Format::Text => println!("reachable: {}", rendered.join(" -> ")),
                    }
                }
                None => match cli.format {
                    Format::Machine => println!("{}", serde_json::json!({"reachable": false})),
                    Format::Text => println!("not reachable"),
                },
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let arch = match require_arch(&args.input)? {
                Ok(a) => a,
                Err(code) => return Ok(code),
            };
            let mut invariants = Vec::new();
            for line in &args.invariants {
                invariants.push(parse_invariant(line, &arch).map_err(|e| format!("{line}: {e}"))?);
            }
            if let Some(path) = &args.invariants_file {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                match parse_invariants(&text, &arch) {
                    Ok(list) => invariants.extend(list),
                    Err(errors) => {
                        for e in errors {
                            eprintln!("{}: {e}", path.display());
                        }
                        return Ok(ExitCode::from(2));
                    }
                }
            }
            if invariants.is_empty() {
                return Err("no invariants given; use --invariant or --invariants".to_string());
            }
            let config = CheckerConfig {
                state_limit: args.bound,
                channel_capacity: args.channel_capacity,
            };
            let mut all_hold = true;
            for invariant in &invariants {
                let verdict = check_invariant(&arch, invariant, &config);
                all_hold &= verdict.holds;
                match cli.format {
                    Format::Machine => {
                        let record = serde_json::json!({
                            "invariant": invariant.to_string(),
                            "holds": verdict.holds,
                            "statesExplored": verdict.states_explored,
                            "bounded": verdict.bounded,
                            "bound": verdict.bound,
                            "assumptions": verdict.assumptions,
                            "counterexample": verdict
                                .counterexample
                                .as_ref()
                                .map(|events| {
                                    events.iter().map(|e| e.to_string()).collect::<Vec<_>>()
                                }),
                        });
                        println!("{record}");
                    }
                    Format::Text => {
                        let status = match (verdict.holds, verdict.bounded) {
                            (true, false) => "holds".to_string(),
                            (true, true) => {
                                format!("holds within bound {} (inconclusive)", verdict.bound)
                            }
                            (false, _) => "fails".to_string(),
                        };
                        println!(
                            "{invariant}: {status} [{} states, {}]",
                            verdict.states_explored, verdict.assumptions
                        );
                        if let Some(events) = &verdict.counterexample {
                            println!("counterexample:");
                            for e in events {
                                println!("  {e}");
                            }
                        }
                    }
                }
            }
            Ok(exit_for(all_hold))
        }
        Command::EmitPromela(args) => {
            let arch = match require_arch(&args.input)? {
                Ok(a) => a,
                Err(code) => return Ok(code),
            };
            let text = emit_promela(&arch, args.channel_capacity);
            match &args.out {
                Some(path) => {
                    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_target(text: &str, arch: &Architecture) -> Result<ChildRef, String> {
    if let Some((sensor, source)) = text.split_once('.') {
        let r = scc_core::model::SourceRef::new(sensor, source);
        if arch.source(&r).is_none() {
            return Err(format!("unknown source `{text}`"));
        }
        Ok(ChildRef::Source(r))
    } else {
        let id = ComponentId::new(text);
        if arch.kind_of(&id).is_none() {
            return Err(format!("unknown component `{text}`"));
        }
        Ok(ChildRef::Operator(id))
    }
}

fn exit_for(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
