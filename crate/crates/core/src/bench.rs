//! Constant-factor experiments: the optimal inverter against problem-specific
//! brute force, on finite instance families.
//!
//! Both sides are charged under the same cost model (machine steps for
//! generation plus the verifier's step cost per candidate), and ratios are
//! exact. Families are finite samples, so any speed-up subset found here is
//! evidence about particular instances, never a statement about infinite sets.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, ParseError};
use crate::kt::{invert_with, ProgramTable, SearchConfig, HARD_MAX_K};
use crate::problems::graph::encode_coloring;
use crate::problems::{CnfFormula, Graph, InversionTask, TaskKind};

pub type StepRatio = Ratio<u64>;

pub const DEFAULT_THRESHOLD: u64 = 10;

pub const FINITE_SAMPLE_NOTE: &str =
    "finite sample of instances: subsets with large ratios are evidence about these instances only, not about infinite families";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InverterSpec {
    /// Phase search through `max_k`.
    OptimalKt { max_k: u32 },
    /// Enumerate the task's natural witness space in lexicographic order,
    /// charging the verifier's cost per candidate.
    NativeBruteForce { candidate_cap: u64 },
}

impl InverterSpec {
    pub fn label(&self) -> String {
        match self {
            InverterSpec::OptimalKt { max_k } => format!("optimal-kt(max_k={max_k})"),
            InverterSpec::NativeBruteForce { candidate_cap } => format!("native(cap={candidate_cap})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InverterOutcome {
    pub steps: u64,
    pub witness: Option<BitString>,
    pub kt: Option<u32>,
}

impl InverterOutcome {
    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

fn base_digits(mut code: u64, base: u64, len: usize) -> Vec<u64> {
    let mut digits = vec![0; len];
    for d in digits.iter_mut().rev() {
        *d = code % base;
        code /= base;
    }
    digits
}

/// Candidate witnesses in the order the native inverter tries them, or
/// `None` for tasks without a known witness space.
fn native_candidates(task: &InversionTask) -> Option<Box<dyn Iterator<Item = BitString> + '_>> {
    match &task.kind {
        TaskKind::ThreeColoring(g) => {
            let n = g.n();
            let total = 3u64.checked_pow(n as u32)?;
            Some(Box::new((0..total).map(move |code| {
                let colors: Vec<u8> = base_digits(code, 3, n).into_iter().map(|d| d as u8).collect();
                encode_coloring(&colors)
            })))
        }
        TaskKind::Sat(f) => (f.num_vars() < 64).then(|| Box::new(BitString::all_of_len(f.num_vars())) as Box<dyn Iterator<Item = _>>),
        TaskKind::Identity(target) => {
            let max = target.len().min(62);
            Some(Box::new((0..=max).flat_map(BitString::all_of_len)))
        }
        TaskKind::Tiling(t) => {
            let cells = t.n() * t.n();
            let k = t.tiles().len() as u64;
            let total = k.checked_pow(cells as u32)?;
            Some(Box::new((0..total).map(move |code| {
                let placement: Vec<usize> = base_digits(code, k, cells).into_iter().map(|d| d as usize).collect();
                t.encode_placement(&placement)
            })))
        }
        TaskKind::Custom(_) => None,
    }
}

pub fn native_brute_force(task: &InversionTask, candidate_cap: u64) -> InverterOutcome {
    let mut steps = 0u64;
    if let Some(candidates) = native_candidates(task) {
        for w in candidates.take(candidate_cap as usize) {
            let v = task.verify(&w);
            steps += v.steps;
            if v.accepted {
                return InverterOutcome { steps, witness: Some(w), kt: None };
            }
        }
    }
    InverterOutcome { steps, witness: None, kt: None }
}

/// Runs inverters against tasks, sharing one program table.
#[derive(Debug, Clone)]
pub struct BenchRunner {
    table: ProgramTable,
}

impl BenchRunner {
    pub fn new(specs: &[InverterSpec]) -> Result<Self, Error> {
        let mut bits = 0;
        for s in specs {
            if let InverterSpec::OptimalKt { max_k } = s {
                if *max_k > HARD_MAX_K {
                    return Err(Error::PhaseCap { requested: *max_k, limit: HARD_MAX_K });
                }
                bits = bits.max(*max_k as usize);
            }
        }
        Ok(Self { table: ProgramTable::up_to(bits) })
    }

    pub fn run(&self, spec: &InverterSpec, task: &InversionTask) -> Result<InverterOutcome, Error> {
        match *spec {
            InverterSpec::OptimalKt { max_k } => {
                let report = invert_with(task, &SearchConfig::new(max_k), &self.table)?;
                Ok(InverterOutcome { steps: report.total_steps(), kt: report.bound.as_ref().map(|b| b.kt), witness: report.witness })
            }
            InverterSpec::NativeBruteForce { candidate_cap } => Ok(native_brute_force(task, candidate_cap)),
        }
    }
}

/// `optimal.steps / native.steps`; `Err` when either side finds nothing.
pub fn overhead_factor(task: &InversionTask, optimal: &InverterSpec, native: &InverterSpec) -> Result<StepRatio, Error> {
    let runner = BenchRunner::new(&[*optimal, *native])?;
    let a = runner.run(optimal, task)?;
    let b = runner.run(native, task)?;
    step_ratio(&a, &b).ok_or(Error::RatioUndefined)
}

fn step_ratio(a: &InverterOutcome, b: &InverterOutcome) -> Option<StepRatio> {
    (a.found() && b.found() && b.steps > 0).then(|| Ratio::new(a.steps, b.steps))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchRecord {
    pub instance_id: String,
    pub a: InverterOutcome,
    pub b: InverterOutcome,
    /// `a.steps / b.steps`, defined only when both found a witness.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub ratio: Option<StepRatio>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpeedupReport {
    pub note: &'static str,
    pub family: String,
    pub inverter_a: InverterSpec,
    pub inverter_b: InverterSpec,
    #[serde(serialize_with = "ser_ratio")]
    pub c: StepRatio,
    pub records: Vec<BenchRecord>,
    /// Instances with `ratio >= c`.
    pub subset: Vec<String>,
    pub not_found_a: usize,
    pub not_found_b: usize,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub min_ratio: Option<StepRatio>,
    /// Lower median.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub median_ratio: Option<StepRatio>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub max_ratio: Option<StepRatio>,
    /// Total `a` steps over total `b` steps across instances with a ratio.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub overhead: Option<StepRatio>,
}

fn ratio_json(r: &StepRatio) -> serde_json::Value {
    serde_json::json!({ "num": r.numer(), "den": r.denom() })
}

fn ser_ratio<S: serde::Serializer>(r: &StepRatio, s: S) -> Result<S::Ok, S::Error> {
    ratio_json(r).serialize(s)
}

fn ser_opt_ratio<S: serde::Serializer>(r: &Option<StepRatio>, s: S) -> Result<S::Ok, S::Error> {
    r.as_ref().map(ratio_json).serialize(s)
}

impl SpeedupReport {
    pub const CSV_HEADER: &'static str = "instance_id,steps_optimal,steps_native,ratio_num,ratio_den,found_optimal,found_native,kt";

    /// One row per instance. Undefined ratios and missing `kt` are empty fields.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let (num, den) = r.ratio.map_or((String::new(), String::new()), |q| (q.numer().to_string(), q.denom().to_string()));
            let kt = r.a.kt.map_or(String::new(), |k| k.to_string());
            let _ = writeln!(s, "{},{},{},{},{},{},{},{}", r.instance_id, r.a.steps, r.b.steps, num, den, r.a.found(), r.b.found(), kt);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Benchmarks every instance of `family` with inverter `a` against `b`.
/// Instances run concurrently; records keep family order.
pub fn run_bench(family: &FamilySpec, a: InverterSpec, b: InverterSpec, c: StepRatio) -> Result<SpeedupReport, Error> {
    if c <= Ratio::from_integer(1) {
        return Err(Error::InvalidParameter(format!("threshold {c} must exceed 1")));
    }
    let runner = BenchRunner::new(&[a, b])?;
    let instances = family.instances();
    let records = instances
        .par_iter()
        .map(|(id, task)| -> Result<BenchRecord, Error> {
            let ra = runner.run(&a, task)?;
            let rb = runner.run(&b, task)?;
            let ratio = step_ratio(&ra, &rb);
            Ok(BenchRecord { instance_id: id.clone(), a: ra, b: rb, ratio })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(family.to_string(), a, b, c, records))
}

pub fn summarize(family: String, a: InverterSpec, b: InverterSpec, c: StepRatio, records: Vec<BenchRecord>) -> SpeedupReport {
    let subset = records.iter().filter(|r| r.ratio.is_some_and(|q| q >= c)).map(|r| r.instance_id.clone()).collect();
    let mut ratios: Vec<StepRatio> = records.iter().filter_map(|r| r.ratio).collect();
    ratios.sort();
    let (sa, sb) = records.iter().filter(|r| r.ratio.is_some()).fold((0u64, 0u64), |(x, y), r| (x + r.a.steps, y + r.b.steps));
    SpeedupReport {
        note: FINITE_SAMPLE_NOTE,
        family,
        inverter_a: a,
        inverter_b: b,
        c,
        not_found_a: records.iter().filter(|r| !r.a.found()).count(),
        not_found_b: records.iter().filter(|r| !r.b.found()).count(),
        min_ratio: ratios.first().copied(),
        median_ratio: (!ratios.is_empty()).then(|| ratios[(ratios.len() - 1) / 2]),
        max_ratio: ratios.last().copied(),
        overhead: (sb > 0).then(|| Ratio::new(sa, sb)),
        subset,
        records,
    }
}

/// A finite, seeded instance family.
///
/// Text form, one family per line (`#` starts a comment):
///
/// ```text
/// 3col-all max_n=4
/// 3col-random n=5 edges=6 count=10 seed=1
/// sat-random vars=3 clauses=4 width=2 count=10 seed=7
/// identity-all max_len=3
/// empty
/// ```
///
/// Shorthands `3col-n4` and `identity-l3` are also accepted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    /// Every graph on `1..=max_n` labelled vertices.
    ThreeColAll {
        max_n: usize,
    },
    ThreeColRandom {
        n: usize,
        edges: usize,
        count: usize,
        seed: u64,
    },
    SatRandom {
        vars: usize,
        clauses: usize,
        width: usize,
        count: usize,
        seed: u64,
    },
    /// Every string of length `0..=max_len`.
    IdentityAll {
        max_len: usize,
    },
    Empty,
}

impl FamilySpec {
    pub fn instances(&self) -> Vec<(String, InversionTask)> {
        match *self {
            FamilySpec::ThreeColAll { max_n } => {
                let mut out = Vec::new();
                for n in 1..=max_n {
                    let pairs: Vec<(usize, usize)> = Graph::complete(n).edges().to_vec();
                    for mask in 0u64..1 << pairs.len() {
                        let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
                        let g = Graph::new(n, edges).expect("pairs of a complete graph");
                        out.push((format!("3col-n{n}-m{mask}"), InversionTask::three_coloring(g)));
                    }
                }
                out
            }
            FamilySpec::ThreeColRandom { n, edges, count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pairs = Graph::complete(n).edges().to_vec();
                let m = edges.min(pairs.len());
                (0..count)
                    .map(|i| {
                        let mut chosen: Vec<usize> = sample(&mut rng, pairs.len(), m).into_vec();
                        chosen.sort_unstable();
                        let g = Graph::new(n, chosen.into_iter().map(|j| pairs[j]).collect()).expect("valid pairs");
                        (format!("3col-rand-s{seed}-{i}"), InversionTask::three_coloring(g))
                    })
                    .collect()
            }
            FamilySpec::SatRandom { vars, clauses, width, count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let width = width.clamp(1, vars.max(1));
                (0..count)
                    .map(|i| {
                        let cls = (0..clauses)
                            .map(|_| {
                                let mut vs: Vec<usize> = sample(&mut rng, vars, width).into_vec();
                                vs.sort_unstable();
                                vs.into_iter().map(|v| if rng.gen::<bool>() { -(v as i32 + 1) } else { v as i32 + 1 }).collect()
                            })
                            .collect();
                        let f = CnfFormula::new(vars, cls).expect("literals in range");
                        (format!("sat-rand-s{seed}-{i}"), InversionTask::sat(f))
                    })
                    .collect()
            }
            FamilySpec::IdentityAll { max_len } => (0..=max_len)
                .flat_map(BitString::all_of_len)
                .map(|x| (format!("identity-{}", if x.is_empty() { "e".to_string() } else { x.to_string() }), InversionTask::identity(x)))
                .collect(),
            FamilySpec::Empty => Vec::new(),
        }
    }

    /// Parses a family file, one spec per non-comment line.
    pub fn parse_file(text: &str) -> Result<Vec<FamilySpec>, ParseError> {
        text.lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let body = l.split('#').next().unwrap_or("").trim();
                (!body.is_empty()).then_some((i + 1, body))
            })
            .map(|(lineno, body)| body.parse::<FamilySpec>().map_err(|e| ParseError::new(lineno, e.column, e.message)))
            .collect()
    }
}

impl std::fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilySpec::ThreeColAll { max_n } => write!(f, "3col-all max_n={max_n}"),
            FamilySpec::ThreeColRandom { n, edges, count, seed } => {
                write!(f, "3col-random n={n} edges={edges} count={count} seed={seed}")
            }
            FamilySpec::SatRandom { vars, clauses, width, count, seed } => {
                write!(f, "sat-random vars={vars} clauses={clauses} width={width} count={count} seed={seed}")
            }
            FamilySpec::IdentityAll { max_len } => write!(f, "identity-all max_len={max_len}"),
            FamilySpec::Empty => f.write_str("empty"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(n) = s.strip_prefix("3col-n").and_then(|r| r.parse().ok()) {
            return Ok(FamilySpec::ThreeColAll { max_n: n });
        }
        if let Some(l) = s.strip_prefix("identity-l").and_then(|r| r.parse().ok()) {
            return Ok(FamilySpec::IdentityAll { max_len: l });
        }
        let mut fields = s.split_whitespace();
        let kind = fields.next().unwrap_or("");
        let mut params = std::collections::HashMap::new();
        for field in fields {
            let column = field.as_ptr() as usize - s.as_ptr() as usize + 1;
            let (k, v) = field.split_once('=').ok_or_else(|| ParseError::new(1, column, format!("expected key=value, found {field:?}")))?;
            let v: u64 = v.parse().map_err(|_| ParseError::new(1, column, format!("invalid number in {field:?}")))?;
            params.insert(k, v);
        }
        let get = |k: &str| params.get(k).copied().ok_or_else(|| ParseError::new(1, 1, format!("{kind}: missing `{k}=`")));
        Ok(match kind {
            "3col-all" => FamilySpec::ThreeColAll { max_n: get("max_n")? as usize },
            "3col-random" => FamilySpec::ThreeColRandom {
                n: get("n")? as usize,
                edges: get("edges")? as usize,
                count: get("count")? as usize,
                seed: get("seed")?,
            },
            "sat-random" => FamilySpec::SatRandom {
                vars: get("vars")? as usize,
                clauses: get("clauses")? as usize,
                width: get("width")? as usize,
                count: get("count")? as usize,
                seed: get("seed")?,
            },
            "identity-all" => FamilySpec::IdentityAll { max_len: get("max_len")? as usize },
            "empty" => FamilySpec::Empty,
            other => return Err(ParseError::new(1, 1, format!("unknown family kind {other:?}"))),
        })
    }
}
