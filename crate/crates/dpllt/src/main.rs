//! Command-line front end: solve, certify, check, replay, translate.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dpllt::dpll::{Engine, Verdict};
use dpllt::format::{
    self, parse_problem, parse_trace, write_certificate, write_lkt_certificate, write_problem,
    write_sizes, write_trace, ParsedProblem,
};
use dpllt::lkdpll::{eliminate_admissible, Sequent};
use dpllt::simulate::{certify_unsat, SimConfig};
use dpllt::translate::{translate_proof, SeqCorrespondence};
use dpllt::{TheoryKind, TheorySolver};

#[derive(Parser)]
#[command(
    name = "dpllt",
    version,
    about = "DPLL(T) solver that certifies refutations in two sequent calculi"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a problem. Exits 10 when satisfiable, 20 when unsatisfiable.
    Solve {
        /// Problem file.
        file: PathBuf,
        /// Also write the step trace here.
        #[arg(long, value_name = "FILE")]
        trace_out: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Refute a problem and write a checked clausal certificate
    /// (plus a `.sizes` growth log, and optionally a focused certificate).
    Certify {
        /// Problem file (must be unsatisfiable).
        file: PathBuf,
        /// Where to write the clausal certificate.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Also translate and write a focused certificate here.
        #[arg(long, value_name = "FILE")]
        lkt: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Check a certificate against its problem. Exits 0 iff it is accepted.
    Check {
        /// Certificate file (clausal or focused; detected from its header).
        cert: PathBuf,
        /// The problem the certificate claims to refute.
        #[arg(long, value_name = "FILE")]
        problem: PathBuf,
        /// Re-verify every rule's theory side conditions, not just the
        /// digest-pinned reconstruction.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Replay a recorded trace against a problem, validating every step.
    Replay {
        /// Problem file.
        file: PathBuf,
        /// Trace file, as written by `solve --trace-out`.
        trace: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Convert a clausal certificate into a focused one.
    Translate {
        /// Clausal certificate to convert.
        cert: PathBuf,
        /// The problem the certificate refutes.
        #[arg(long, value_name = "FILE")]
        problem: PathBuf,
        /// Where to write the focused certificate.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Theory to interpret atoms in. Defaults to `eq` when the problem
    /// declares equality atoms, `empty` otherwise.
    #[arg(long, value_enum)]
    theory: Option<TheoryArg>,
    /// Abort the solver after this many steps (exit 2).
    #[arg(long, value_name = "N", default_value_t = 200_000)]
    step_limit: u64,
    /// Step budget for each lemma-discharging sub-run during certification.
    #[arg(long, value_name = "N", default_value_t = 200_000)]
    lemma_budget: u64,
    /// Randomize decision phases with this seed. Without it decisions are
    /// deterministic (lowest unassigned atom, positive phase).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoryArg {
    /// Purely propositional: only complementary literals clash.
    Empty,
    /// Equalities and disequalities over named constants.
    Eq,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Solve {
            file,
            trace_out,
            opts,
        } => cmd_solve(&file, trace_out.as_deref(), &opts),
        Command::Certify {
            file,
            out,
            lkt,
            opts,
        } => cmd_certify(&file, &out, lkt.as_deref(), &opts),
        Command::Check {
            cert,
            problem,
            strict,
            opts,
        } => cmd_check(&cert, &problem, strict, &opts),
        Command::Replay { file, trace, opts } => cmd_replay(&file, &trace, &opts),
        Command::Translate {
            cert,
            problem,
            out,
            opts,
        } => cmd_translate(&cert, &problem, &out, &opts),
    }
}

fn read_to_string(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_problem(path: &Path) -> Result<ParsedProblem, String> {
    let text = read_to_string(path)?;
    parse_problem(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn build_theory(parsed: &ParsedProblem, opts: &RunOpts) -> Result<TheorySolver, String> {
    let kind = match opts.theory {
        Some(TheoryArg::Empty) => {
            if parsed.table.has_theory_atoms() {
                return Err(
                    "the problem declares equality atoms; the empty theory cannot interpret them"
                        .into(),
                );
            }
            TheoryKind::Empty
        }
        Some(TheoryArg::Eq) => TheoryKind::Equality,
        None => {
            if parsed.table.has_theory_atoms() {
                TheoryKind::Equality
            } else {
                TheoryKind::Empty
            }
        }
    };
    Ok(TheorySolver::new(kind, parsed.table.clone()))
}

fn cmd_solve(file: &Path, trace_out: Option<&Path>, opts: &RunOpts) -> Result<u8, String> {
    let parsed = load_problem(file)?;
    let theory = build_theory(&parsed, opts)?;
    let engine = Engine::new(&theory).with_step_limit(opts.step_limit);
    let outcome = engine
        .run(parsed.goal.clone(), opts.seed)
        .map_err(|e| e.to_string())?;
    if let Some(path) = trace_out {
        write_file(path, &write_trace(&outcome.trace))?;
    }
    match outcome.verdict {
        Verdict::Sat => {
            println!("SAT");
            let model = outcome.model.expect("sat verdict carries a model");
            let codes: Vec<String> = model.iter().map(|l| l.to_dimacs().to_string()).collect();
            println!("v {} 0", codes.join(" "));
            Ok(10)
        }
        Verdict::Unsat => {
            println!("UNSAT");
            Ok(20)
        }
        Verdict::StepLimit => {
            println!("UNKNOWN (step limit reached after {} steps)", opts.step_limit);
            Ok(2)
        }
    }
}

fn sim_config(opts: &RunOpts) -> SimConfig {
    SimConfig {
        step_limit: opts.lemma_budget,
        ..SimConfig::default()
    }
}

fn cmd_certify(
    file: &Path,
    out: &Path,
    lkt_out: Option<&Path>,
    opts: &RunOpts,
) -> Result<u8, String> {
    let parsed = load_problem(file)?;
    let theory = build_theory(&parsed, opts)?;
    let engine = Engine::new(&theory).with_step_limit(opts.step_limit);
    let outcome = engine
        .run(parsed.goal.clone(), opts.seed)
        .map_err(|e| e.to_string())?;
    match outcome.verdict {
        Verdict::Sat => return Err("the problem is satisfiable; nothing to certify".into()),
        Verdict::StepLimit => {
            println!("UNKNOWN (step limit reached after {} steps)", opts.step_limit);
            return Ok(2);
        }
        Verdict::Unsat => {}
    }

    let run = certify_unsat(parsed.goal.clone(), &outcome.trace, &theory, sim_config(opts))
        .map_err(|e| e.to_string())?;
    run.tree.check(&theory).map_err(|e| e.to_string())?;

    let canonical = write_problem(&parsed.goal, &parsed.table);
    let cert = write_certificate(&run.tree, &canonical).map_err(|e| e.to_string())?;
    write_file(out, &cert)?;
    let sizes_path = out.with_extension(match out.extension() {
        Some(ext) => format!("{}.sizes", ext.to_string_lossy()),
        None => "sizes".to_string(),
    });
    write_file(&sizes_path, &write_sizes(&run.logs))?;

    println!("UNSAT: {} solver steps certified", outcome.trace.len());
    println!(
        "clausal proof: counted size {}, {} nodes",
        run.tree.counted_size(),
        run.tree.node_count()
    );
    let mut worst: Option<(usize, usize)> = None;
    let extensions: usize = run.logs.iter().map(|l| l.leaf_deltas.len()).sum();
    for log in &run.logs {
        for d in &log.leaf_deltas {
            if worst.map_or(true, |(w, _)| d.delta > w) {
                worst = Some((d.delta, d.bound));
            }
        }
    }
    match worst {
        Some((delta, bound)) => println!(
            "per-leaf growth: max {delta} against bound {bound} over {extensions} extensions; all within bounds"
        ),
        None => println!("per-leaf growth: no extensions recorded"),
    }
    println!("wrote {} and {}", out.display(), sizes_path.display());

    if let Some(lkt_path) = lkt_out {
        let base = eliminate_admissible(&run.tree, &theory).map_err(|e| e.to_string())?;
        let (lkt_tree, emissions) = translate_proof(&base, &theory).map_err(|e| e.to_string())?;
        lkt_tree.check_complete(&theory).map_err(|e| e.to_string())?;
        let lkt_cert = write_lkt_certificate(&lkt_tree, &canonical).map_err(|e| e.to_string())?;
        write_file(lkt_path, &lkt_cert)?;
        let max_emit = emissions
            .iter()
            .map(|e| (e.emitted, e.members + 4))
            .max_by_key(|&(e, _)| e);
        println!(
            "focused proof: counted size {}, {} nodes",
            lkt_tree.counted_size(),
            lkt_tree.node_count()
        );
        match max_emit {
            Some((emitted, bound)) => println!(
                "per-node emission: max {emitted} against bound {bound} over {} nodes; all within bounds",
                emissions.len()
            ),
            None => println!("per-node emission: nothing emitted"),
        }
        println!("wrote {}", lkt_path.display());
    }
    Ok(0)
}

fn cmd_check(cert: &Path, problem: &Path, strict: bool, opts: &RunOpts) -> Result<u8, String> {
    let parsed = load_problem(problem)?;
    let theory = build_theory(&parsed, opts)?;
    let canonical = write_problem(&parsed.goal, &parsed.table);
    let text = read_to_string(cert)?;

    let first = text.lines().next().unwrap_or("").trim();
    match first {
        "c dpllt-cert v1" => {
            let tree = format::read_certificate(&text, &parsed.goal, &canonical)
                .map_err(|e| format!("{}: {e}", cert.display()))?;
            if strict {
                tree.check(&theory).map_err(|e| e.to_string())?;
            }
            println!(
                "accepted: clausal proof, counted size {}, {} nodes{}",
                tree.counted_size(),
                tree.node_count(),
                if strict { " (strict)" } else { "" }
            );
        }
        "c dpllt-lkt-cert v1" => {
            let root = SeqCorrespondence::fresh(&Sequent::root(parsed.goal.clone()))
                .map_err(|e| e.to_string())?
                .to_sequent();
            let tree = format::read_lkt_certificate(&text, root, &canonical)
                .map_err(|e| format!("{}: {e}", cert.display()))?;
            if strict {
                tree.check_complete(&theory).map_err(|e| e.to_string())?;
            }
            println!(
                "accepted: focused proof, counted size {}, {} nodes{}",
                tree.counted_size(),
                tree.node_count(),
                if strict { " (strict)" } else { "" }
            );
        }
        _ => return Err(format!("{}: unrecognized certificate header", cert.display())),
    }
    Ok(0)
}

fn cmd_replay(file: &Path, trace_path: &Path, opts: &RunOpts) -> Result<u8, String> {
    let parsed = load_problem(file)?;
    let theory = build_theory(&parsed, opts)?;
    let trace_text = read_to_string(trace_path)?;
    let trace = parse_trace(&trace_text).map_err(|e| format!("{}: {e}", trace_path.display()))?;
    let engine = Engine::new(&theory);
    let final_state = engine
        .replay(parsed.goal.clone(), &trace)
        .map_err(|e| format!("replay rejected: {e}"))?;
    match final_state.running() {
        None => println!("replay accepted: {} steps, final state UNSAT", trace.len()),
        Some((trail, _)) => println!(
            "replay accepted: {} steps, trail holds {} literals",
            trace.len(),
            trail.entries().len()
        ),
    }
    Ok(0)
}

fn cmd_translate(cert: &Path, problem: &Path, out: &Path, opts: &RunOpts) -> Result<u8, String> {
    let parsed = load_problem(problem)?;
    let theory = build_theory(&parsed, opts)?;
    let canonical = write_problem(&parsed.goal, &parsed.table);
    let text = read_to_string(cert)?;
    let tree = format::read_certificate(&text, &parsed.goal, &canonical)
        .map_err(|e| format!("{}: {e}", cert.display()))?;
    tree.check(&theory).map_err(|e| e.to_string())?;

    let base = eliminate_admissible(&tree, &theory).map_err(|e| e.to_string())?;
    let (lkt_tree, emissions) = translate_proof(&base, &theory).map_err(|e| e.to_string())?;
    lkt_tree.check_complete(&theory).map_err(|e| e.to_string())?;
    let lkt_cert = write_lkt_certificate(&lkt_tree, &canonical).map_err(|e| e.to_string())?;
    write_file(out, &lkt_cert)?;
    println!(
        "translated: {} clausal nodes to focused counted size {} ({} emissions, all within bounds)",
        tree.node_count(),
        lkt_tree.counted_size(),
        emissions.len()
    );
    println!("wrote {}", out.display());
    Ok(0)
}
