//! `metaguard`: model systems as I/O automata, express safety requirements
//! as constraint automata over transition names, synthesize the constrained
//! system, and run bounded trace analyses.
//!
//! Exit codes: 0 success or property holds, 1 property violated, 2
//! validation error, 3 usage or parse error. Reports go to standard output,
//! diagnostics to standard error; `--json` switches reports to one JSON
//! object per result.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use metaguard_core::model::{export_dot, parse_model, serialize_model, ModelFile};
use metaguard_core::{
    accepts_execution, accepts_transition_trace, check_language_inclusion, check_theorem1,
    complete_meta, compose, compose_full, diagnose_hazards, enumerate_traces, meta_compose,
    validate, validate_meta, CompletionPolicy, ComponentCollection, Error as CoreError,
    ExecutionTrace, Finding, IoAutomaton, MetaAutomaton, TransitionTrace, ValidationReport,
};

/// Largest bound the bounded subcommands accept.
const BOUND_CAP: usize = 12;

#[derive(Parser)]
#[command(
    name = "metaguard",
    version,
    about = "I/O automata with safety constraints over transition names"
)]
struct Cli {
    /// Emit one JSON object per result instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check automata and constraints against their defining rules.
    Validate {
        file: PathBuf,
        /// Only validate the declaration with this id.
        #[arg(long)]
        id: Option<String>,
    },
    /// Build the synchronous product of strongly compatible components.
    Compose {
        file: PathBuf,
        /// Comma-separated component ids, in index order.
        #[arg(long, value_delimiter = ',', required = true)]
        components: Vec<String>,
        /// Keep the full Cartesian state space instead of the reachable part.
        #[arg(long)]
        full_product: bool,
        /// Output model file; `-` writes to standard output.
        #[arg(short, long)]
        output: PathBuf,
        /// Id for the produced automaton (default: ids joined with `.`).
        #[arg(long)]
        out_id: Option<String>,
    },
    /// Synthesize the system restricted by a constraint.
    MetaCompose {
        file: PathBuf,
        #[arg(long)]
        system: String,
        #[arg(long)]
        constraint: String,
        /// Override the constraint's declared completion policy.
        #[arg(long)]
        policy: Option<CompletionPolicy>,
        /// Output model file; `-` writes to standard output.
        #[arg(short, long)]
        output: PathBuf,
        /// Id for the produced automaton (default: `<system>.<constraint>`).
        #[arg(long)]
        out_id: Option<String>,
    },
    /// Test whether an automaton accepts an execution trace.
    CheckTrace {
        file: PathBuf,
        #[arg(long)]
        id: String,
        /// Whitespace-separated action names.
        #[arg(long)]
        trace: String,
    },
    /// Test whether a constraint accepts a transition trace.
    CheckMetaTrace {
        file: PathBuf,
        #[arg(long)]
        constraint: String,
        /// Whitespace-separated atomic transition labels.
        #[arg(long)]
        trace: String,
    },
    /// Exhaustively compare the synthesized product against run-level
    /// acceptance up to a bound.
    Theorem1 {
        file: PathBuf,
        #[arg(long)]
        system: String,
        #[arg(long)]
        constraint: String,
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
    /// Bounded language inclusion with a shortest counterexample.
    Inclusion {
        file: PathBuf,
        #[arg(long)]
        sub: String,
        #[arg(long)]
        sup: String,
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
    /// List the transition labels a constraint eliminates from a system.
    Diagnose {
        file: PathBuf,
        #[arg(long)]
        system: String,
        #[arg(long)]
        constraint: String,
    },
    /// Export an automaton as a DOT digraph.
    ExportDot {
        file: PathBuf,
        #[arg(long)]
        id: String,
        /// Output file; standard output when omitted or `-`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List every trace up to a bound.
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn core_failure(err: CoreError) -> Failure {
    let code = match err {
        CoreError::ValidationFailed { .. }
        | CoreError::Incompatible(_)
        | CoreError::SharedTransitionLabel(_) => 2,
        _ => 3,
    };
    fail(code, err.to_string())
}

type CmdResult = Result<u8, Failure>;

/// Die quietly on a closed pipe, like any other line-oriented tool, instead
/// of panicking in the middle of a print.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn load_model(path: &Path) -> Result<ModelFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(3, format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text).map_err(|diags| {
        let mut message = format!("{} is not a valid model file", path.display());
        for d in diags {
            let _ = write!(message, "\n  {d}");
        }
        fail(3, message)
    })
}

fn find_automaton<'a>(file: &'a ModelFile, id: &str) -> Result<&'a IoAutomaton, Failure> {
    file.automaton(id)
        .ok_or_else(|| fail(3, format!("no automaton `{id}` in the file")))
}

fn find_meta<'a>(file: &'a ModelFile, id: &str) -> Result<&'a MetaAutomaton, Failure> {
    file.meta(id)
        .ok_or_else(|| fail(3, format!("no constraint `{id}` in the file")))
}

fn check_bound(bound: usize) -> Result<(), Failure> {
    if bound > BOUND_CAP {
        return Err(fail(
            3,
            format!("bound {bound} exceeds the cap {BOUND_CAP}"),
        ));
    }
    Ok(())
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    if path.as_os_str() == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text)
            .map_err(|e| fail(3, format!("cannot write {}: {e}", path.display())))
    }
}

/// Appends a freshly produced automaton to the input declarations so that
/// downstream subcommands can reference both old and new ids in one file.
fn extend_model(mut file: ModelFile, automaton: IoAutomaton) -> Result<ModelFile, Failure> {
    if file.automaton(&automaton.id).is_some() {
        return Err(fail(
            3,
            format!("output id `{}` already declared in the input", automaton.id),
        ));
    }
    file.automata.push(automaton);
    Ok(file)
}

fn finding_json(f: &Finding) -> Value {
    json!({
        "severity": f.severity.to_string(),
        "code": f.code.to_string(),
        "message": f.message,
        "witness": f.witness.as_ref().map(|w| w.to_string()),
    })
}

fn print_report_text(kind: &str, id: &str, report: &ValidationReport) {
    if report.findings.is_empty() {
        println!("OK {kind} {id}");
    } else {
        println!("{kind} {id}:");
        for f in &report.findings {
            println!("  {f}");
        }
    }
}

fn effective_policy(m: &MetaAutomaton, flag: Option<CompletionPolicy>) -> CompletionPolicy {
    flag.unwrap_or(m.policy)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Validate { file, id } => cmd_validate(&file, id.as_deref(), cli.json),
        Command::Compose {
            file,
            components,
            full_product,
            output,
            out_id,
        } => cmd_compose(&file, &components, full_product, &output, out_id, cli.json),
        Command::MetaCompose {
            file,
            system,
            constraint,
            policy,
            output,
            out_id,
        } => cmd_meta_compose(
            &file,
            &system,
            &constraint,
            policy,
            &output,
            out_id,
            cli.json,
        ),
        Command::CheckTrace { file, id, trace } => cmd_check_trace(&file, &id, &trace, cli.json),
        Command::CheckMetaTrace {
            file,
            constraint,
            trace,
        } => cmd_check_meta_trace(&file, &constraint, &trace, cli.json),
        Command::Theorem1 {
            file,
            system,
            constraint,
            bound,
        } => cmd_theorem1(&file, &system, &constraint, bound, cli.json),
        Command::Inclusion {
            file,
            sub,
            sup,
            bound,
        } => cmd_inclusion(&file, &sub, &sup, bound, cli.json),
        Command::Diagnose {
            file,
            system,
            constraint,
        } => cmd_diagnose(&file, &system, &constraint, cli.json),
        Command::ExportDot { file, id, output } => {
            cmd_export_dot(&file, &id, output.as_deref(), cli.json)
        }
        Command::Enumerate { file, id, bound } => cmd_enumerate(&file, &id, bound, cli.json),
    }
}

fn cmd_validate(path: &Path, only: Option<&str>, as_json: bool) -> CmdResult {
    let file = load_model(path)?;
    let mut matched = false;
    let mut any_error = false;
    for a in &file.automata {
        if only.is_some_and(|id| id != a.id) {
            continue;
        }
        matched = true;
        let report = validate(a);
        any_error |= !report.ok();
        if as_json {
            println!(
                "{}",
                json!({
                    "command": "validate",
                    "kind": "automaton",
                    "id": a.id,
                    "ok": report.ok(),
                    "findings": report.findings.iter().map(finding_json).collect::<Vec<_>>(),
                })
            );
        } else {
            print_report_text("automaton", &a.id, &report);
        }
    }
    for m in &file.metas {
        if only.is_some_and(|id| id != m.id) {
            continue;
        }
        matched = true;
        let subject = find_automaton(&file, &m.subject)?;
        let report = validate_meta(m, subject).map_err(core_failure)?;
        any_error |= !report.ok();
        if as_json {
            println!(
                "{}",
                json!({
                    "command": "validate",
                    "kind": "constraint",
                    "id": m.id,
                    "subject": m.subject,
                    "ok": report.ok(),
                    "findings": report.findings.iter().map(finding_json).collect::<Vec<_>>(),
                })
            );
        } else {
            print_report_text("constraint", &m.id, &report);
        }
    }
    if !matched {
        return Err(fail(
            3,
            match only {
                Some(id) => format!("no declaration `{id}` in the file"),
                None => "the file declares nothing to validate".into(),
            },
        ));
    }
    Ok(if any_error { 2 } else { 0 })
}

fn cmd_compose(
    path: &Path,
    components: &[String],
    full_product: bool,
    output: &Path,
    out_id: Option<String>,
    as_json: bool,
) -> CmdResult {
    let file = load_model(path)?;
    let mut parts = Vec::new();
    for id in components {
        parts.push(find_automaton(&file, id)?.clone());
    }
    let collection = ComponentCollection::new(parts).map_err(core_failure)?;
    let mut composed = if full_product {
        compose_full(&collection)
    } else {
        compose(&collection)
    }
    .map_err(core_failure)?;
    if let Some(id) = out_id {
        composed = composed.with_id(id);
    }
    let summary = json!({
        "command": "compose",
        "id": composed.id,
        "components": components,
        "full_product": full_product,
        "states": composed.states.len(),
        "transitions": composed.transitions.len(),
        "output": output.display().to_string(),
    });
    let id = composed.id.clone();
    let (states, transitions) = (composed.states.len(), composed.transitions.len());
    let extended = extend_model(file, composed)?;
    write_output(output, &serialize_model(&extended))?;
    if as_json {
        println!("{summary}");
    } else {
        println!(
            "composed {} into `{id}` ({states} states, {transitions} transitions)",
            components.join(", ")
        );
    }
    Ok(0)
}

fn cmd_meta_compose(
    path: &Path,
    system: &str,
    constraint: &str,
    policy: Option<CompletionPolicy>,
    output: &Path,
    out_id: Option<String>,
    as_json: bool,
) -> CmdResult {
    let file = load_model(path)?;
    let subject = find_automaton(&file, system)?.clone();
    let meta = find_meta(&file, constraint)?;
    if meta.subject != subject.id {
        return Err(fail(
            3,
            format!(
                "constraint `{constraint}` is over `{}`, not `{system}`",
                meta.subject
            ),
        ));
    }
    let policy = effective_policy(meta, policy);
    let completed = complete_meta(meta, &subject, policy);
    let result = meta_compose(&subject, &completed).map_err(core_failure)?;
    let mut composed = result.automaton;
    composed = composed.with_id(out_id.unwrap_or_else(|| format!("{system}.{constraint}")));
    for warning in &result.report.findings {
        eprintln!("{warning}");
    }
    let authorized: Vec<Value> = result
        .authorizations
        .iter()
        .map(|(t, labels)| {
            json!({
                "transition": t.name.to_string(),
                "source": t.source.to_string(),
                "action": t.action,
                "target": t.target.to_string(),
                "by": labels.iter().collect::<Vec<_>>(),
            })
        })
        .collect();
    let summary = json!({
        "command": "meta-compose",
        "id": composed.id,
        "system": system,
        "constraint": constraint,
        "policy": policy.to_string(),
        "states": composed.states.len(),
        "transitions": composed.transitions.len(),
        "warnings": result.report.findings.iter().map(finding_json).collect::<Vec<_>>(),
        "authorized": authorized,
        "output": output.display().to_string(),
    });
    let id = composed.id.clone();
    let (states, transitions) = (composed.states.len(), composed.transitions.len());
    let extended = extend_model(file, composed)?;
    write_output(output, &serialize_model(&extended))?;
    if as_json {
        println!("{summary}");
    } else {
        println!(
            "synthesized `{id}` from `{system}` under `{constraint}` ({states} states, {transitions} transitions, policy {policy})"
        );
    }
    Ok(0)
}

fn cmd_check_trace(path: &Path, id: &str, trace: &str, as_json: bool) -> CmdResult {
    let file = load_model(path)?;
    let automaton = find_automaton(&file, id)?;
    let trace = ExecutionTrace::parse(trace);
    let accepted = accepts_execution(automaton, &trace).map_err(core_failure)?;
    if as_json {
        println!(
            "{}",
            json!({
                "command": "check-trace",
                "id": id,
                "trace": trace.to_string(),
                "accepted": accepted,
            })
        );
    } else {
        println!("{}", if accepted { "ACCEPTED" } else { "REJECTED" });
    }
    Ok(if accepted { 0 } else { 1 })
}

fn cmd_check_meta_trace(path: &Path, constraint: &str, trace: &str, as_json: bool) -> CmdResult {
    let file = load_model(path)?;
    let meta = find_meta(&file, constraint)?;
    let subject = find_automaton(&file, &meta.subject)?;
    let completed = complete_meta(meta, subject, meta.policy);
    let trace = TransitionTrace::parse(trace);
    let accepted = accepts_transition_trace(&completed, &trace).map_err(core_failure)?;
    if as_json {
        println!(
            "{}",
            json!({
                "command": "check-meta-trace",
                "constraint": constraint,
                "trace": trace.to_string(),
                "accepted": accepted,
            })
        );
    } else {
        println!("{}", if accepted { "ACCEPTED" } else { "REJECTED" });
    }
    Ok(if accepted { 0 } else { 1 })
}

fn cmd_theorem1(
    path: &Path,
    system: &str,
    constraint: &str,
    bound: usize,
    as_json: bool,
) -> CmdResult {
    check_bound(bound)?;
    let file = load_model(path)?;
    let subject = find_automaton(&file, system)?;
    let meta = find_meta(&file, constraint)?;
    if meta.subject != subject.id {
        return Err(fail(
            3,
            format!(
                "constraint `{constraint}` is over `{}`, not `{system}`",
                meta.subject
            ),
        ));
    }
    let completed = complete_meta(meta, subject, meta.policy);
    let report = check_theorem1(subject, &completed, bound).map_err(core_failure)?;
    if as_json {
        println!(
            "{}",
            json!({
                "command": "theorem1",
                "system": system,
                "constraint": constraint,
                "bound": bound,
                "traces_checked": report.traces_checked,
                "ok": report.ok(),
                "counterexamples": report
                    .counterexamples
                    .iter()
                    .map(|c| json!({
                        "trace": c.trace.to_string(),
                        "in_composed": c.in_composed,
                        "has_accepted_run": c.has_accepted_run,
                    }))
                    .collect::<Vec<_>>(),
            })
        );
    } else if report.ok() {
        println!(
            "THEOREM1 HOLDS (bound {bound}, {} traces checked)",
            report.traces_checked
        );
    } else {
        println!(
            "THEOREM1 VIOLATED ({} counterexamples)",
            report.counterexamples.len()
        );
        for c in &report.counterexamples {
            println!(
                "  trace `{}`: in product {}, accepted run {}",
                c.trace, c.in_composed, c.has_accepted_run
            );
        }
    }
    Ok(if report.ok() { 0 } else { 1 })
}

fn cmd_inclusion(path: &Path, sub: &str, sup: &str, bound: usize, as_json: bool) -> CmdResult {
    check_bound(bound)?;
    let file = load_model(path)?;
    let sub_automaton = find_automaton(&file, sub)?;
    let sup_automaton = find_automaton(&file, sup)?;
    let outcome = check_language_inclusion(sub_automaton, sup_automaton, bound);
    if as_json {
        println!(
            "{}",
            json!({
                "command": "inclusion",
                "sub": sub,
                "sup": sup,
                "bound": bound,
                "included": outcome.included,
                "counterexample": outcome.counterexample.as_ref().map(|t| t.to_string()),
            })
        );
    } else if outcome.included {
        println!("INCLUDED");
    } else {
        let witness = outcome
            .counterexample
            .as_ref()
            .map(|t| t.to_string())
            .unwrap_or_default();
        println!("NOT INCLUDED (counterexample: `{witness}`)");
    }
    Ok(if outcome.included { 0 } else { 1 })
}

fn cmd_diagnose(path: &Path, system: &str, constraint: &str, as_json: bool) -> CmdResult {
    let file = load_model(path)?;
    let subject = find_automaton(&file, system)?;
    let meta = find_meta(&file, constraint)?;
    if meta.subject != subject.id {
        return Err(fail(
            3,
            format!(
                "constraint `{constraint}` is over `{}`, not `{system}`",
                meta.subject
            ),
        ));
    }
    let completed = complete_meta(meta, subject, meta.policy);
    let hazards = diagnose_hazards(subject, &completed).map_err(core_failure)?;
    if as_json {
        println!(
            "{}",
            json!({
                "command": "diagnose",
                "system": system,
                "constraint": constraint,
                "hazards": hazards.iter().collect::<Vec<_>>(),
            })
        );
    } else {
        for label in &hazards {
            println!("{label}");
        }
    }
    Ok(0)
}

fn cmd_export_dot(path: &Path, id: &str, output: Option<&Path>, as_json: bool) -> CmdResult {
    let file = load_model(path)?;
    let automaton = find_automaton(&file, id)?;
    let dot = export_dot(automaton);
    match output {
        Some(out) if out.as_os_str() != "-" => {
            write_output(out, &dot)?;
            if as_json {
                println!(
                    "{}",
                    json!({
                        "command": "export-dot",
                        "id": id,
                        "output": out.display().to_string(),
                    })
                );
            } else {
                println!("wrote DOT for `{id}` to {}", out.display());
            }
        }
        _ => {
            if as_json {
                println!(
                    "{}",
                    json!({ "command": "export-dot", "id": id, "dot": dot })
                );
            } else {
                print!("{dot}");
            }
        }
    }
    Ok(0)
}

fn cmd_enumerate(path: &Path, id: &str, bound: usize, as_json: bool) -> CmdResult {
    let file = load_model(path)?;
    let automaton = find_automaton(&file, id)?;
    let traces = enumerate_traces(automaton, bound).map_err(core_failure)?;
    if as_json {
        println!(
            "{}",
            json!({
                "command": "enumerate",
                "id": id,
                "bound": bound,
                "count": traces.len(),
                "traces": traces.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            })
        );
    } else {
        for t in &traces {
            if t.is_empty() {
                println!("ε");
            } else {
                println!("{t}");
            }
        }
    }
    Ok(0)
}
