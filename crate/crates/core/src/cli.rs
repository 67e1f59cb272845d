//! Command-line front end. [`main`] returns the process exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, Family};
use crate::bridge::check_trace;
use crate::compiler::compile_program;
use crate::cost::{check_bound, check_preservation, cost_of_trace, label_costs, read_bounds};
use crate::parser::{parse_program, SourceText};
use crate::runtime::{run_rt, RtConfig};
use crate::source_lang::SourceProgram;
use crate::source_sem::{self, RandomPolicy, RoundRobinPolicy, SchedulerPolicy, ScriptedPolicy, SourceConfig};
use crate::trace::{write_jsonl, Ref, StepLabel, Termination};
use crate::{Cost, ExactCostModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEADLOCK: i32 = 3;
pub const EXIT_FUEL: i32 = 4;

const DEFAULT_FUEL: usize = 1_000_000;

#[derive(Parser, Debug)]
#[command(name = "actorcps", version, about = "Run, compile and cross-check actor programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a program and report how it ended.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Sem::Rt)]
        sem: Sem,
        /// rr, random, or script:FILE (source semantics only; the runtime is
        /// always round-robin).
        #[arg(long)]
        scheduler: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Write the step trace as JSON Lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compile a program and print the method table.
    Compile {
        file: PathBuf,
        /// Print the table as s-expressions.
        #[arg(long)]
        dump: bool,
    },
    /// Run the compiled program and check every step against the source semantics.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Cost of the runtime trace, checked against its source replay.
    Cost {
        file: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        per_object: bool,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Step counts and wall time of a benchmark family.
    Bench {
        family: String,
        #[arg(long)]
        n: Option<u64>,
        /// Comma-separated sizes; replaces --n.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<u64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = usize::MAX)]
        fuel: usize,
    },
    /// Check per-object costs against the upper bounds listed in a CSV file.
    Bounds {
        file: PathBuf,
        #[arg(long)]
        bounds: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Built-in model: steps or memory.
    #[arg(long, conflicts_with = "model_file")]
    model: Option<String>,
    /// Model file: a name line followed by `Rule=weight` lines.
    #[arg(long)]
    model_file: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Sem {
    Source,
    Rt,
}

/// An error with the exit code it maps to.
struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

pub fn main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Run { file, sem, scheduler, seed, fuel, trace } => {
            cmd_run(&file, sem, scheduler.as_deref(), seed, fuel, trace.as_deref(), out)
        }
        Command::Compile { file, dump } => cmd_compile(&file, dump, out),
        Command::Check { file, fuel } => cmd_check(&file, fuel, out),
        Command::Cost { file, model, per_object, fuel } => cmd_cost(&file, &model, per_object, fuel, out),
        Command::Bench { family, n, sweep, csv, model, fuel } => {
            cmd_bench(&family, n, sweep, csv.as_deref(), &model, fuel, out)
        }
        Command::Bounds { file, bounds, model, fuel } => cmd_bounds(&file, &bounds, &model, fuel, out),
    }
}

fn io<E: std::fmt::Display>(e: E) -> Failure {
    usage(e.to_string())
}

fn load_program(path: &Path) -> Result<SourceProgram, Failure> {
    let src = SourceText::from_file(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_program(&src).map_err(|e| usage(e.to_string()))
}

fn load_model(args: &ModelArgs) -> Result<ExactCostModel, Failure> {
    match (&args.model, &args.model_file) {
        (_, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            ExactCostModel::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
        (Some(name), None) => ExactCostModel::builtin(name).map_err(io),
        (None, None) => Ok(ExactCostModel::steps()),
    }
}

fn status_code(status: Termination) -> i32 {
    match status {
        Termination::Finished => EXIT_OK,
        Termination::Deadlock => EXIT_DEADLOCK,
        Termination::FuelExhausted => EXIT_FUEL,
    }
}

fn runtime_trace(p: &SourceProgram, fuel: usize) -> Result<crate::runtime::RtTrace, Failure> {
    let table = Arc::new(compile_program(p).map_err(io)?);
    let cfg = RtConfig::load(table).map_err(|e| Failure(EXIT_VIOLATION, e.to_string()))?;
    run_rt(cfg, fuel).map_err(|e| Failure(EXIT_VIOLATION, format!("runtime error: {e}")))
}

fn policy(spec: Option<&str>, seed: u64) -> Result<Box<dyn SchedulerPolicy>, Failure> {
    match spec {
        None | Some("random") => Ok(Box::new(RandomPolicy::new(seed))),
        Some("rr") => Ok(Box::new(RoundRobinPolicy::default())),
        Some(s) => {
            let Some(path) = s.strip_prefix("script:") else {
                return Err(usage(format!("unknown scheduler `{s}` (expected rr, random or script:FILE)")));
            };
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?;
            let script = text
                .split_whitespace()
                .map(Ref::from_str)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| usage(format!("{path}: {e}")))?;
            Ok(Box::new(ScriptedPolicy::new(script)))
        }
    }
}

fn write_final_state(out: &mut dyn Write, c: &SourceConfig) -> Result<(), Failure> {
    for (r, store) in &c.heap.objects {
        let attrs: Vec<String> = store.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "object {r}: {}", attrs.join(" ")).map_err(io)?;
    }
    Ok(())
}

fn cmd_run(
    file: &Path,
    sem: Sem,
    scheduler: Option<&str>,
    seed: u64,
    fuel: usize,
    trace_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let p = load_program(file)?;
    let (steps, status, final_state): (Vec<StepLabel>, Termination, SourceConfig) = match sem {
        Sem::Source => {
            let mut pol = policy(scheduler, seed)?;
            let t = source_sem::run(&p, pol.as_mut(), fuel)
                .map_err(|e| Failure(EXIT_VIOLATION, format!("runtime error: {e}")))?;
            (t.steps, t.status, t.final_config)
        }
        Sem::Rt => {
            if !matches!(scheduler, None | Some("rr")) {
                return Err(usage("the runtime semantics always schedules round-robin"));
            }
            let t = runtime_trace(&p, fuel)?;
            let fin =
                crate::bridge::from_target(&t.final_config).map_err(|e| Failure(EXIT_VIOLATION, e.to_string()))?;
            (t.labels(), t.status, fin)
        }
    };
    if let Some(path) = trace_out {
        let mut f =
            std::io::BufWriter::new(fs::File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?);
        write_jsonl(&mut f, &steps).map_err(io)?;
        f.flush().map_err(io)?;
    }
    writeln!(out, "{status} after {} steps", steps.len()).map_err(io)?;
    write_final_state(out, &final_state)?;
    Ok(status_code(status))
}

fn cmd_compile(file: &Path, dump: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = load_program(file)?;
    let t = compile_program(&p).map_err(io)?;
    if dump {
        write!(out, "{t}").map_err(io)?;
    } else {
        writeln!(out, "{} methods, {} attributes", t.methods.len(), t.attr_count()).map_err(io)?;
    }
    Ok(EXIT_OK)
}

fn cmd_check(file: &Path, fuel: usize, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = load_program(file)?;
    let t = runtime_trace(&p, fuel)?;
    let labels = t.labels();
    let v = check_trace(&labels, &p);
    let failed_at = v.first_failure().map(|f| f.index);
    for (i, s) in labels.iter().enumerate() {
        if Some(i) == failed_at {
            let f = v.first_failure().unwrap();
            writeln!(out, "FAIL {i} {} {} {}", s.object, s.rule, f.reason).map_err(io)?;
            break;
        }
        writeln!(out, "OK {i} {} {}", s.object, s.rule).map_err(io)?;
    }
    match failed_at {
        None => {
            writeln!(out, "SOUND {} steps", labels.len()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Some(i) => {
            writeln!(out, "UNSOUND at {i}").map_err(io)?;
            Ok(EXIT_VIOLATION)
        }
    }
}

fn cmd_cost(
    file: &Path,
    model: &ModelArgs,
    per_object: bool,
    fuel: usize,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let p = load_program(file)?;
    let m = load_model(model)?;
    let t = runtime_trace(&p, fuel)?;
    let labels = t.labels();
    let v = check_trace(&labels, &p);
    let report = cost_of_trace(label_costs(&labels), &m);
    writeln!(out, "model {}", m.name).map_err(io)?;
    if per_object {
        for (o, c) in &report.per_object {
            writeln!(out, "object {o}: {c}").map_err(io)?;
        }
    }
    writeln!(out, "total {}", report.total).map_err(io)?;
    if !v.ok {
        writeln!(out, "source replay diverges at step {}", v.failures[0].index).map_err(io)?;
        return Ok(EXIT_VIOLATION);
    }
    let pres = check_preservation(&labels, &v.source_steps, &m);
    if pres.equal {
        writeln!(out, "preserved").map_err(io)?;
        Ok(EXIT_OK)
    } else {
        for (o, a, b) in &pres.diff {
            writeln!(out, "object {o}: runtime {a} source {b}").map_err(io)?;
        }
        Ok(EXIT_VIOLATION)
    }
}

fn cmd_bench(
    family: &str,
    n: Option<u64>,
    sweep: Vec<u64>,
    csv_out: Option<&Path>,
    model: &ModelArgs,
    fuel: usize,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let fam: Family = family.parse().map_err(usage)?;
    let ns = if sweep.is_empty() { vec![n.ok_or_else(|| usage("give --n or --sweep"))?] } else { sweep };
    if ns.contains(&0) {
        return Err(usage("sizes must be positive"));
    }
    let m = load_model(model)?;
    let rows = bench::sweep(fam, &ns, &m, fuel).map_err(|e| Failure(EXIT_VIOLATION, e))?;
    match csv_out {
        Some(path) => {
            let f = fs::File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            bench::write_csv(f, &rows).map_err(io)?;
        }
        None => bench::write_csv(&mut *out, &rows).map_err(io)?,
    }
    Ok(EXIT_OK)
}

fn cmd_bounds(file: &Path, bounds: &Path, model: &ModelArgs, fuel: usize, out: &mut dyn Write) -> Result<i32, Failure> {
    let m = load_model(model)?;
    let text = fs::read_to_string(bounds).map_err(|e| usage(format!("{}: {e}", bounds.display())))?;
    let rows = read_bounds(&text).map_err(|e| usage(format!("{}: {e}", bounds.display())))?;
    let own = load_program(file)?;
    let mut violated = false;
    for row in rows {
        let bound: Cost = row.bound.parse().map_err(|e| usage(format!("bound `{}`: {e}", row.bound)))?;
        let p = match row.program.parse::<Family>() {
            Ok(f) => f.gen(row.n),
            Err(_) => own.clone(),
        };
        let t = runtime_trace(&p, fuel)?;
        let report = cost_of_trace(label_costs(&t.labels()), &m);
        let ok = check_bound(&report, row.object, &bound);
        violated |= !ok;
        writeln!(
            out,
            "{},{},{}: cost {} bound {} {}",
            row.program,
            row.n,
            row.object,
            report.of(row.object),
            bound,
            if ok { "OK" } else { "VIOLATED" }
        )
        .map_err(io)?;
    }
    Ok(if violated { EXIT_VIOLATION } else { EXIT_OK })
}
