use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ordsat::automaton::{is_accepting, validate_run, AutomatonView, RunExpr, SimpleAutomaton};
use ordsat::emptiness::{check_nonempty, Config, EmptinessError, TopDown, Verdict};
use ordsat::formula::{Formula, Formulas};
use ordsat::io::{parse_automaton, parse_run, run_to_json, AutomatonFile, IoError};
use ordsat::oracle::{self, OracleError};
use ordsat::ordinal::{def_formula, CodeLevel, Ordinal, OrdinalCode, OrdinalError};
use ordsat::solver::quant::{parse_quant, translate_quant, QuantError};
use ordsat::solver::{sat, sat_at, Engine, Length, SatOutcome, SolveError, SolveOptions};
use ordsat::translate::{build_automaton, FormulaAutomaton, TranslateError};

#[derive(Parser)]
#[command(name = "ordsat", version, about = "Satisfiability of LTL(U,S) over countable ordinals")]
struct Cli {
    /// Print a JSON verdict on standard output.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, value_enum, default_value_t = EngineArg::Saturate)]
    engine: EngineArg,
    /// Cap on locations touched by the emptiness check.
    #[arg(long, global = true)]
    max_locations: Option<usize>,
    /// Cap on saturation stages.
    #[arg(long, global = true)]
    max_stages: Option<usize>,
    #[arg(long, global = true)]
    timeout_ms: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Saturate,
    Topdown,
}

#[derive(Subcommand)]
enum Command {
    /// Is the formula satisfied by some model of countable length?
    Sat {
        formula: String,
        /// Write the accepting run of the formula automaton here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Is the formula satisfied by a model of the given length?
    SatAt {
        formula: String,
        #[command(flatten)]
        length: LengthArgs,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Nonemptiness of an automaton given as JSON.
    Emptiness {
        automaton: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Export the explicit automaton of a formula as JSON.
    Translate {
        formula: String,
        /// Largest closure to build explicitly.
        #[arg(long, default_value_t = ordsat::translate::DEFAULT_EXPLICIT_CAP)]
        cap: usize,
        /// Emit Graphviz instead of JSON.
        #[arg(long)]
        dot: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the formula that holds exactly in models of length alpha.
    DefAlpha { alpha: String },
    /// Translate a formula with X^[b] and U^[b] and decide it.
    Quant {
        formula: String,
        /// Level k of the translation: exponents below w^k (or w).
        #[arg(long, default_value = "w")]
        level: String,
        /// Only print the translation.
        #[arg(long)]
        no_solve: bool,
    },
    /// Re-check a run file against an automaton or a formula.
    CheckRun {
        run: PathBuf,
        #[arg(long, conflicts_with = "formula", required_unless_present = "formula")]
        automaton: Option<PathBuf>,
        #[arg(long)]
        formula: Option<String>,
    },
    /// Brute-force checkers and generators.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
#[group(required = true, multiple = true)]
struct LengthArgs {
    /// An ordinal below w^w, e.g. `w^2*3+w+1`.
    #[arg(long, conflicts_with = "code")]
    alpha: Option<String>,
    /// An m-code `(p,[a_n,...,a_0])`, with p in {-2,-1}.
    #[arg(long, requires = "code_m")]
    code: Option<String>,
    #[arg(long)]
    code_m: Option<String>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Search all finite models of length n.
    Enum {
        formula: String,
        #[arg(long)]
        n: usize,
        /// Variables to range over; defaults to those of the formula.
        #[arg(long, value_delimiter = ',')]
        vars: Option<Vec<String>>,
    },
    /// Evaluate at a position of a finite model or of a lasso `{"u":..,"v":..}`.
    Eval {
        formula: String,
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        at: usize,
    },
    GenFormula {
        #[arg(long, default_value_t = 6)]
        size: usize,
        #[arg(long, value_delimiter = ',', default_value = "p,q")]
        vars: Vec<String>,
        #[arg(long, env = "ORDSAT_SEED", default_value_t = 0)]
        seed: u64,
    },
    GenAutomaton {
        #[arg(long, default_value_t = 3)]
        basis: usize,
        #[arg(long, env = "ORDSAT_SEED", default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Cap(String),
}

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<EmptinessError> for Failure {
    fn from(e: EmptinessError) -> Self {
        match e {
            EmptinessError::ResourceCap(_) => Failure::Cap(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Emptiness(e) => e.into(),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::CapExceeded { .. } | OracleError::Unstable(_) => Failure::Cap(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<TranslateError> for Failure {
    fn from(e: TranslateError) -> Self {
        Failure::Cap(e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::TooManySets(_) => Failure::Cap(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::usage(e)
            }
        }
    )*};
}
usage_from!(OrdinalError, QuantError, ordsat::formula::ParseError, serde_json::Error);

/// What a command decided: exit 0 when `positive`, 1 otherwise.
struct Report {
    positive: bool,
    text: String,
    json: Value,
}

struct Ctx {
    json: bool,
    opts: SolveOptions,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut config = Config::default();
    if let Some(n) = cli.max_locations {
        config.max_locations = n;
    }
    if let Some(n) = cli.max_stages {
        config.max_stages = n;
    }
    config.timeout = cli.timeout_ms.map(Duration::from_millis);
    let engine = match cli.engine {
        EngineArg::Saturate => Engine::Saturate,
        EngineArg::Topdown => Engine::TopDown,
    };
    let ctx = Ctx {
        json: cli.json,
        opts: SolveOptions { config, engine },
    };
    match run(&ctx, cli.command) {
        Ok(r) => {
            if ctx.json {
                println!("{}", serde_json::to_string(&r.json).expect("JSON values serialize"));
            } else {
                print!("{}", r.text);
            }
            ExitCode::from(if r.positive { 0 } else { 1 })
        }
        Err(f) => {
            let (code, kind, msg) = match f {
                Failure::Usage(m) => (2, "error", m),
                Failure::Cap(m) => (3, "resource-cap", m),
            };
            if ctx.json {
                println!("{}", json!({ "verdict": kind, "message": msg }));
            }
            eprintln!("ordsat: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(ctx: &Ctx, cmd: Command) -> Result<Report, Failure> {
    match cmd {
        Command::Sat { formula, witness } => {
            let mut fs = Formulas::new();
            let phi = fs.parse(&formula)?;
            let out = sat(&fs, phi, &ctx.opts)?;
            solved(&fs, phi, &out, None, witness.as_deref())
        }
        Command::SatAt { formula, length, witness } => {
            let mut fs = Formulas::new();
            let phi = fs.parse(&formula)?;
            let alpha = parse_length(&length)?;
            let (out, beta) = sat_at(&mut fs, phi, &alpha, &ctx.opts)?;
            let def = def_formula(&mut fs, &beta)?;
            let checked = fs.and(phi, def);
            solved(&fs, checked, &out, Some(&beta), witness.as_deref())
        }
        Command::Emptiness { automaton, witness } => emptiness(ctx, &automaton, witness.as_deref()),
        Command::Translate { formula, cap, dot, output } => {
            let mut fs = Formulas::new();
            let phi = fs.parse(&formula)?;
            let a = build_automaton(&fs, phi, cap)?;
            let file = AutomatonFile::from_automaton(&a)?;
            let body = if dot {
                to_dot(&a)
            } else {
                serde_json::to_string_pretty(&file)? + "\n"
            };
            let summary = json!({
                "locations": a.locations().len(),
                "next": a.next_edges().len(),
                "basis": a.basis(),
            });
            let text = match output {
                Some(path) => {
                    write_file(&path, &body)?;
                    format!("{} locations written to {}\n", a.locations().len(), path.display())
                }
                None => body,
            };
            Ok(Report { positive: true, text, json: summary })
        }
        Command::DefAlpha { alpha } => {
            let alpha: Ordinal = alpha.parse()?;
            let mut fs = Formulas::new();
            let f = def_formula(&mut fs, &alpha)?;
            let shown = fs.display(f);
            Ok(Report {
                positive: true,
                text: format!("{shown}\n"),
                json: json!({ "alpha": alpha.to_string(), "formula": shown, "size": fs.size(f) }),
            })
        }
        Command::Quant { formula, level, no_solve } => {
            let level: CodeLevel = level.parse()?;
            let q = parse_quant(&formula)?;
            let mut fs = Formulas::new();
            let t = translate_quant(&mut fs, &q, level)?;
            let shown = fs.display(t);
            if no_solve {
                return Ok(Report {
                    positive: true,
                    text: format!("{shown}\n"),
                    json: json!({ "translation": shown, "size": fs.size(t) }),
                });
            }
            let out = sat(&fs, t, &ctx.opts)?;
            let mut r = solved(&fs, t, &out, None, None)?;
            r.json["translation"] = json!(shown);
            r.text = format!("{shown}\n{}", r.text);
            Ok(r)
        }
        Command::CheckRun { run, automaton, formula } => {
            let text = read_file(&run)?;
            match (automaton, formula) {
                (Some(path), _) => {
                    let a = parse_automaton(&read_file(&path)?)?;
                    let r = parse_run(a.basis(), &text)?;
                    Ok(check(&a, &r))
                }
                (None, Some(src)) => {
                    let mut fs = Formulas::new();
                    let phi = fs.parse(&src)?;
                    let view = FormulaAutomaton::new(&fs, phi);
                    let r = parse_run(&labels(&view), &text)?;
                    Ok(check(&view, &r))
                }
                (None, None) => Err(Failure::usage("check-run needs --automaton or --formula")),
            }
        }
        Command::Oracle(o) => oracle_cmd(o),
    }
}

fn parse_length(l: &LengthArgs) -> Result<Length, Failure> {
    match (&l.alpha, &l.code, &l.code_m) {
        (Some(a), None, None) => Ok(Length::Ordinal(a.parse()?)),
        (None, Some(c), Some(m)) => Ok(Length::Code(OrdinalCode::parse(c, m.parse()?)?)),
        _ => Err(Failure::usage("give either --alpha or both --code and --code-m")),
    }
}

fn labels<A: AutomatonView + ?Sized>(a: &A) -> Vec<String> {
    (0..a.basis_len()).map(|i| a.basis_label(i)).collect()
}

fn solved(
    fs: &Formulas,
    checked: Formula,
    out: &SatOutcome,
    beta: Option<&Ordinal>,
    witness_path: Option<&Path>,
) -> Result<Report, Failure> {
    let verdict = if out.sat { "SAT" } else { "UNSAT" };
    let mut text = format!("{verdict}\n");
    let mut j = json!({
        "verdict": verdict,
        "closure": out.size,
        "triples": out.triples,
        "stages": out.stages,
    });
    if let Some(b) = beta {
        writeln!(text, "truncated length: {b}").unwrap();
        j["truncated_length"] = json!(b.to_string());
        j["checked"] = json!(fs.display(checked));
    }
    if let Some(w) = &out.witness {
        let model = run_to_json(&w.vars, &w.model);
        writeln!(text, "model length: {}", w.length).unwrap();
        writeln!(text, "model: {model}").unwrap();
        j["length"] = json!(w.length.to_string());
        j["model"] = model;
        if let Some(path) = witness_path {
            let view = FormulaAutomaton::new(fs, checked);
            let run = run_to_json(&labels(&view), &w.run);
            write_file(path, &(run.to_string() + "\n"))?;
        }
    } else if out.sat && witness_path.is_some() {
        return Err(Failure::usage("the top-down engine does not produce witnesses"));
    }
    Ok(Report { positive: out.sat, text, json: j })
}

fn emptiness(ctx: &Ctx, path: &Path, witness_path: Option<&Path>) -> Result<Report, Failure> {
    let a = parse_automaton(&read_file(path)?)?;
    let (nonempty, run) = match ctx.opts.engine {
        Engine::TopDown => {
            if witness_path.is_some() {
                return Err(Failure::usage("the top-down engine does not produce witnesses"));
            }
            let ok = TopDown::new(&a).with_timeout(ctx.opts.config.timeout).decide()?;
            (ok, None)
        }
        Engine::Saturate => match check_nonempty(&a, &ctx.opts.config)?.0 {
            Verdict::Empty => (false, None),
            Verdict::NonEmpty { witness, .. } => (true, Some(witness)),
        },
    };
    let verdict = if nonempty { "NONEMPTY" } else { "EMPTY" };
    let mut text = format!("{verdict}\n");
    let mut j = json!({ "verdict": verdict });
    if let Some(r) = run {
        let attrs = validate_run(&a, &r).map_err(|e| Failure::usage(format!("internal witness rejected: {e}")))?;
        let rj = run_to_json(a.basis(), &r);
        writeln!(text, "run length: {}", attrs.length).unwrap();
        j["length"] = json!(attrs.length.to_string());
        j["run"] = rj.clone();
        if let Some(p) = witness_path {
            write_file(p, &(rj.to_string() + "\n"))?;
        }
    }
    Ok(Report { positive: nonempty, text, json: j })
}

fn check<A: AutomatonView + ?Sized>(a: &A, r: &RunExpr) -> Report {
    match validate_run(a, r) {
        Ok(attrs) => {
            let accepting = is_accepting(a, &attrs);
            let verdict = if accepting { "ACCEPTED" } else { "REJECTED" };
            let reason = if accepting { None } else { Some("valid run, but not accepting".to_string()) };
            let mut text = format!("{verdict}\nrun length: {}\n", attrs.length);
            if let Some(m) = &reason {
                writeln!(text, "{m}").unwrap();
            }
            Report {
                positive: accepting,
                text,
                json: json!({ "verdict": verdict, "length": attrs.length.to_string(), "reason": reason }),
            }
        }
        Err(e) => Report {
            positive: false,
            text: format!("REJECTED\n{e}\n"),
            json: json!({ "verdict": "REJECTED", "reason": e.to_string() }),
        },
    }
}

fn oracle_cmd(o: OracleCommand) -> Result<Report, Failure> {
    match o {
        OracleCommand::Enum { formula, n, vars } => {
            let mut fs = Formulas::new();
            let phi = fs.parse(&formula)?;
            let vars = vars.unwrap_or_else(|| fs.vars_of(phi));
            let found = oracle::enum_sat_finite(&fs, phi, n, &vars)?;
            let verdict = if found.is_some() { "SAT" } else { "UNSAT" };
            let mut text = format!("{verdict}\n");
            if let Some(m) = &found {
                writeln!(text, "model: {}", serde_json::to_string(m)?).unwrap();
            }
            Ok(Report {
                positive: found.is_some(),
                text,
                json: json!({ "verdict": verdict, "length": n, "model": found }),
            })
        }
        OracleCommand::Eval { formula, model, at } => {
            let mut fs = Formulas::new();
            let phi = fs.parse(&formula)?;
            let v: Value = serde_json::from_str(&read_file(&model)?)?;
            let holds = if v.is_object() {
                let m: oracle::LassoModel = serde_json::from_value(v)?;
                oracle::eval_lasso(&fs, phi, &m, at)?
            } else {
                let m: oracle::FiniteModel = serde_json::from_value(v)?;
                oracle::eval_finite(&fs, phi, &m, at)?
            };
            let verdict = if holds { "TRUE" } else { "FALSE" };
            Ok(Report {
                positive: holds,
                text: format!("{verdict}\n"),
                json: json!({ "verdict": verdict, "position": at }),
            })
        }
        OracleCommand::GenFormula { size, vars, seed } => {
            let mut fs = Formulas::new();
            let f = oracle::gen_formula(&mut fs, seed, size, &vars);
            let shown = fs.display(f);
            Ok(Report {
                positive: true,
                text: format!("{shown}\n"),
                json: json!({ "formula": shown, "seed": seed }),
            })
        }
        OracleCommand::GenAutomaton { basis, seed } => {
            if basis == 0 {
                return Err(Failure::usage("--basis must be positive"));
            }
            let a = oracle::gen_automaton(seed, basis);
            let file = serde_json::to_value(AutomatonFile::from_automaton(&a)?)?;
            Ok(Report {
                positive: true,
                text: serde_json::to_string_pretty(&file)? + "\n",
                json: file,
            })
        }
    }
}

fn to_dot(a: &SimpleAutomaton) -> String {
    let name = |i: usize| {
        let q = &a.locations()[i];
        let members: Vec<&str> = q.iter().map(|b| a.basis()[b].as_str()).collect();
        format!("{{{}}}", members.join(", ")).replace('"', "\\\"")
    };
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n");
    let initial = a.initial_indices();
    let finals = a.final_indices();
    for i in 0..a.locations().len() {
        let shape = if finals.contains(&i) { "doublecircle" } else { "circle" };
        writeln!(out, "  q{i} [label=\"{}\", shape={shape}];", name(i)).unwrap();
        if initial.contains(&i) {
            writeln!(out, "  start{i} [shape=point];\n  start{i} -> q{i};").unwrap();
        }
    }
    for &(i, j) in a.next_edges() {
        writeln!(out, "  q{i} -> q{j};").unwrap();
    }
    out.push_str("}\n");
    out
}

fn read_file(p: &Path) -> Result<String, Failure> {
    fs::read_to_string(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))
}

fn write_file(p: &Path, body: &str) -> Result<(), Failure> {
    fs::write(p, body).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))
}
