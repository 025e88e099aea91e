use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use optinv::bench::{run_bench, FamilySpec, InverterSpec, SpeedupReport, StepRatio};
use optinv::extrapolate::{predict_next, WeightMode};
use optinv::kt::{invert_with, ProgramTable, SearchConfig, SearchReport, SearchVerdict, HARD_MAX_K};
use optinv::machine::ProgramCode;
use optinv::problems::reduction::reduce_to_tiling;
use optinv::problems::{CnfFormula, Graph, InversionTask, TilingInstance};
use optinv::{BitString, Error, ExactPrediction, FloatPrediction, ParseError};

#[derive(Parser, Debug)]
#[command(name = "optinv", version, about = "Optimal inversion by phase search over a prefix-free bit machine")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Last search phase (at most 28).
    #[arg(long, global = true, default_value_t = 16)]
    max_k: u32,
    /// Stop searching before a phase once this many steps are spent.
    #[arg(long, global = true)]
    fuel_cap: Option<u64>,
    /// Work-tape cells available to each program.
    #[arg(long, global = true, default_value_t = optinv::machine::DEFAULT_TAPE_LIMIT)]
    tape_limit: usize,
    /// Report format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit the generation timestamp so identical runs give identical bytes.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Problem {
    #[value(name = "3col")]
    ThreeCol,
    Sat,
    Identity,
    Tiling,
}

#[derive(Args, Debug)]
struct TaskArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    /// Edge list (`p edge n m`, then `e u v` lines).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// DIMACS CNF file.
    #[arg(long)]
    cnf: Option<PathBuf>,
    /// Target bit string for the identity problem.
    #[arg(long)]
    x: Option<String>,
    /// Tiling instance file.
    #[arg(long)]
    tiling: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Weighting {
    Length,
    Kt,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for a witness in increasing Kt order.
    Invert {
        #[command(flatten)]
        task: TaskArgs,
        /// Also write the witness bits to this file.
        #[arg(long)]
        witness_out: Option<PathBuf>,
        /// Evaluate each phase on the thread pool.
        #[arg(long)]
        parallel: bool,
    },
    /// Upper-bound Kt(w | x).
    Kt {
        #[arg(long, default_value = "")]
        w: String,
        #[arg(long, default_value = "")]
        x: String,
    },
    /// Weighted next-bit prediction from all short programs extending the data.
    Predict {
        #[arg(long, default_value = "")]
        data: String,
        #[arg(long, value_enum, default_value_t = Weighting::Length)]
        weighting: Weighting,
        /// Use binary floating point instead of exact fractions.
        #[arg(long)]
        float: bool,
    },
    /// Reduce a bounded witness question to a tiling instance.
    Reduce {
        #[command(flatten)]
        task: TaskArgs,
        /// Acceptor step bound.
        #[arg(long)]
        steps: usize,
        /// Witness length in bits.
        #[arg(long)]
        witness_bits: usize,
    },
    /// Compare phase search with native brute force over an instance family.
    Bench {
        /// Family spec such as `3col-n4` or `sat-random vars=3 clauses=4 width=2 count=10 seed=1`.
        #[arg(long, conflicts_with = "family_file")]
        family: Option<String>,
        /// File with one family spec per line.
        #[arg(long)]
        family_file: Option<PathBuf>,
        /// Speed-up threshold, an integer or fraction above 1.
        #[arg(long, default_value = "10")]
        c: String,
        /// Candidate limit for the native inverter.
        #[arg(long, default_value_t = 1 << 20)]
        native_cap: u64,
        /// Also write the JSON summary here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Decode a program given as bits or as a file holding bits.
    Disasm { program: String },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => Failure::Input(p.to_string()),
            Error::PhaseCap { .. } | Error::InvalidParameter(_) => Failure::Input(e.to_string()),
            other => Failure::Run(other),
        }
    }
}

type CmdResult = Result<Outcome, Failure>;

enum Outcome {
    Success,
    NotFound,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Outcome::Success) => ExitCode::from(0),
        Ok(Outcome::NotFound) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    if g.max_k > HARD_MAX_K {
        return Err(Failure::Input(format!("--max-k {} exceeds hard limit {HARD_MAX_K}", g.max_k)));
    }
    match &cli.command {
        Command::Invert { task, witness_out, parallel } => cmd_invert(g, task, witness_out.as_deref(), *parallel),
        Command::Kt { w, x } => cmd_kt(g, w, x),
        Command::Predict { data, weighting, float } => cmd_predict(g, data, *weighting, *float),
        Command::Reduce { task, steps, witness_bits } => cmd_reduce(g, task, *steps, *witness_bits),
        Command::Bench { family, family_file, c, native_cap, summary } => {
            cmd_bench(g, family.as_deref(), family_file.as_deref(), c, *native_cap, summary.as_deref())
        }
        Command::Disasm { program } => cmd_disasm(g, program),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: ParseError) -> Failure {
    Failure::Input(format!("{}:{e}", path.display()))
}

fn parse_bits(flag: &str, s: &str) -> Result<BitString, Failure> {
    s.parse().map_err(|e| Failure::Input(format!("--{flag}: {e}")))
}

fn required<'a>(flag: &str, v: &'a Option<PathBuf>) -> Result<&'a Path, Failure> {
    v.as_deref().ok_or_else(|| Failure::Input(format!("--{flag} is required for this problem")))
}

fn load_task(args: &TaskArgs) -> Result<InversionTask, Failure> {
    Ok(match args.problem {
        Problem::ThreeCol => {
            let path = required("graph", &args.graph)?;
            let g = Graph::parse_edge_list(&read_file(path)?).map_err(|e| located(path, e))?;
            InversionTask::three_coloring(g)
        }
        Problem::Sat => {
            let path = required("cnf", &args.cnf)?;
            let f = CnfFormula::parse_dimacs(&read_file(path)?).map_err(|e| located(path, e))?;
            InversionTask::sat(f)
        }
        Problem::Tiling => {
            let path = required("tiling", &args.tiling)?;
            let t = TilingInstance::parse_text(&read_file(path)?).map_err(|e| located(path, e))?;
            InversionTask::tiling(t)
        }
        Problem::Identity => {
            let x = args.x.as_deref().ok_or_else(|| Failure::Input("--x is required for this problem".into()))?;
            InversionTask::identity(parse_bits("x", x)?)
        }
    })
}

fn timestamp(g: &GlobalOpts) -> Option<u64> {
    (!g.no_timestamp).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

/// Wraps a JSON report with the optional timestamp.
fn json_doc(g: &GlobalOpts, report: Value) -> String {
    let mut doc = serde_json::Map::new();
    if let Some(t) = timestamp(g) {
        doc.insert("generated_unix".into(), json!(t));
    }
    doc.insert("report".into(), report);
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
    s.push('\n');
    s
}

fn text_doc(g: &GlobalOpts, mut body: String) -> String {
    if let Some(t) = timestamp(g) {
        body.push_str(&format!("generated_unix: {t}\n"));
    }
    body
}

fn emit(g: &GlobalOpts, content: &str) -> Result<(), Failure> {
    match &g.out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn search_config(g: &GlobalOpts) -> SearchConfig {
    let mut config = SearchConfig::new(g.max_k);
    config.work_tape_limit = g.tape_limit;
    config.step_cap = g.fuel_cap;
    config
}

fn report_text(r: &SearchReport) -> String {
    let mut s = format!("task: {}\nverdict: {:?}\nterminal_k: {}\ntotal_steps: {}\n", r.task, r.verdict, r.terminal_k, r.total_steps());
    if let (Some(w), Some(b)) = (&r.witness, &r.bound) {
        s.push_str(&format!(
            "witness: {}\nkt: {}\nprogram: {}\ngen_steps: {}\nverify_steps: {}\n",
            w,
            b.kt,
            b.program.raw(),
            b.gen_steps,
            b.verify_steps
        ));
    }
    s
}

fn cmd_invert(g: &GlobalOpts, args: &TaskArgs, witness_out: Option<&Path>, parallel: bool) -> CmdResult {
    let task = load_task(args)?;
    let mut config = search_config(g);
    if parallel {
        config = config.parallel();
    }
    let report = invert_with(&task, &config, &ProgramTable::up_to(g.max_k as usize))?;
    let content = match g.format.unwrap_or(Format::Json) {
        Format::Json => json_doc(g, to_value(&report)),
        Format::Csv => report.phases_csv(),
        Format::Text => text_doc(g, report_text(&report)),
    };
    emit(g, &content)?;
    match (report.verdict, &report.witness) {
        (SearchVerdict::Found, Some(w)) => {
            if let Some(path) = witness_out {
                write_file(path, &format!("{w}\n"))?;
            }
            Ok(Outcome::Success)
        }
        _ => Ok(Outcome::NotFound),
    }
}

fn cmd_kt(g: &GlobalOpts, w: &str, x: &str) -> CmdResult {
    let (w, x) = (parse_bits("w", w)?, parse_bits("x", x)?);
    let task = InversionTask::generate(w.clone(), x.clone());
    let report = invert_with(&task, &search_config(g), &ProgramTable::up_to(g.max_k as usize))?;
    let bound = report.bound;
    let content = match g.format.unwrap_or(Format::Json) {
        Format::Json => json_doc(g, json!({ "w": w, "x": x, "max_k": g.max_k, "bound": bound })),
        Format::Csv => {
            let row = bound.as_ref().map_or(",,,,".to_string(), |b| {
                format!("{},{},{},{},{}", b.kt, b.program.raw(), b.gen_steps, b.verify_steps, b.total_steps)
            });
            format!("w,x,kt,program,gen_steps,verify_steps,total_steps\n{w},{x},{row}\n")
        }
        Format::Text => text_doc(
            g,
            match &bound {
                Some(b) => format!("kt: {}\nprogram: {}\n{}", b.kt, b.program.raw(), b.program.disassemble()),
                None => format!("kt: none within max_k {}\n", g.max_k),
            },
        ),
    };
    emit(g, &content)?;
    Ok(if bound.is_some() { Outcome::Success } else { Outcome::NotFound })
}

fn prediction_csv_rows<W: optinv::scalar::Weight>(p: &optinv::extrapolate::Prediction<W>) -> String {
    let mut s = String::from("program,output,steps,weight_num,weight_den,weight\n");
    for h in &p.hypotheses {
        let (num, den) = h.weight.as_fraction().map_or((String::new(), String::new()), |(n, d)| (n.to_string(), d.to_string()));
        s.push_str(&format!("{},{},{},{},{},{}\n", h.program.raw(), h.output, h.gen_steps, num, den, h.weight.to_f64()));
    }
    s
}

fn cmd_predict(g: &GlobalOpts, data: &str, weighting: Weighting, float: bool) -> CmdResult {
    let data = parse_bits("data", data)?;
    let mode = match weighting {
        Weighting::Length => WeightMode::Length,
        Weighting::Kt => WeightMode::Kt,
    };
    let result = if float {
        predict_next::<f64>(&data, g.max_k, mode).map(|p: FloatPrediction| (p.to_json(), prediction_csv_rows(&p), p.p1.to_string()))
    } else {
        predict_next(&data, g.max_k, mode).map(|p: ExactPrediction| (p.to_json(), prediction_csv_rows(&p), p.p1.to_string()))
    };
    let (json_text, csv, p1) = match result {
        Ok(parts) => parts,
        Err(Error::NoHypotheses) => {
            eprintln!("no program of at most {} bits extends the data", g.max_k);
            return Ok(Outcome::NotFound);
        }
        Err(e) => return Err(e.into()),
    };
    let content = match g.format.unwrap_or(Format::Json) {
        Format::Json => json_doc(g, serde_json::from_str(&json_text).expect("json")),
        Format::Csv => csv,
        Format::Text => text_doc(g, format!("data: {data}\np1: {p1}\n")),
    };
    emit(g, &content)?;
    Ok(Outcome::Success)
}

fn cmd_reduce(g: &GlobalOpts, args: &TaskArgs, steps: usize, witness_bits: usize) -> CmdResult {
    let task = load_task(args)?;
    let reduction = reduce_to_tiling(&task, steps, witness_bits)?;
    let content = match g.format.unwrap_or(Format::Text) {
        Format::Json => json_doc(
            g,
            json!({
                "step_bound": reduction.step_bound,
                "witness_bits": reduction.witness_bits,
                "instance": reduction.instance.to_text(),
            }),
        ),
        Format::Csv | Format::Text => reduction.instance.to_text(),
    };
    emit(g, &content)?;
    Ok(Outcome::Success)
}

fn cmd_bench(
    g: &GlobalOpts,
    family: Option<&str>,
    family_file: Option<&Path>,
    c: &str,
    native_cap: u64,
    summary: Option<&Path>,
) -> CmdResult {
    let families = match (family, family_file) {
        (Some(spec), _) => vec![spec.parse::<FamilySpec>().map_err(|e| Failure::Input(format!("--family: {}", e.message)))?],
        (None, Some(path)) => FamilySpec::parse_file(&read_file(path)?).map_err(|e| located(path, e))?,
        (None, None) => return Err(Failure::Input("one of --family or --family-file is required".into())),
    };
    let c: StepRatio = c.parse().map_err(|_| Failure::Input(format!("--c: invalid ratio {c:?}")))?;
    let optimal = InverterSpec::OptimalKt { max_k: g.max_k };
    let native = InverterSpec::NativeBruteForce { candidate_cap: native_cap };
    let reports = families.iter().map(|f| run_bench(f, optimal, native, c)).collect::<Result<Vec<SpeedupReport>, _>>()?;

    let summary_doc = || json_doc(g, Value::Array(reports.iter().map(to_value).collect()));
    let content = match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = String::from(SpeedupReport::CSV_HEADER);
            csv.push('\n');
            for r in &reports {
                csv.extend(r.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
            }
            csv
        }
        Format::Json => summary_doc(),
        Format::Text => text_doc(g, reports.iter().map(bench_text).collect()),
    };
    emit(g, &content)?;
    if let Some(path) = summary {
        write_file(path, &summary_doc())?;
    }
    Ok(Outcome::Success)
}

fn bench_text(r: &SpeedupReport) -> String {
    let show = |q: Option<StepRatio>| q.map_or("-".to_string(), |q| q.to_string());
    format!(
        "family: {}\nnote: {}\ninstances: {}\nnot_found_optimal: {}\nnot_found_native: {}\nratio min/median/max: {} / {} / {}\noverhead: {}\nsubset (ratio >= {}): {}\n",
        r.family,
        r.note,
        r.records.len(),
        r.not_found_a,
        r.not_found_b,
        show(r.min_ratio),
        show(r.median_ratio),
        show(r.max_ratio),
        show(r.overhead),
        r.c,
        r.subset.len()
    )
}

fn cmd_disasm(g: &GlobalOpts, program: &str) -> CmdResult {
    let text = if !program.is_empty() && program.chars().all(|ch| ch == '0' || ch == '1') {
        program.to_string()
    } else {
        read_file(Path::new(program))?
    };
    let bits: BitString = text.split_whitespace().collect::<String>().parse().map_err(|e| Failure::Input(format!("{program}: {e}")))?;
    let code = ProgramCode::decode(&bits).map_err(|f| Failure::Input(format!("{program}: {f:?}")))?;
    let content = match g.format.unwrap_or(Format::Text) {
        Format::Json => json_doc(g, to_value(&code)),
        Format::Csv => {
            let mut s = String::from("index,opcode\n");
            for (i, op) in code.opcodes().iter().enumerate() {
                s.push_str(&format!("{i},{}\n", op.mnemonic()));
            }
            s
        }
        Format::Text => code.disassemble(),
    };
    emit(g, &content)?;
    Ok(Outcome::Success)
}
