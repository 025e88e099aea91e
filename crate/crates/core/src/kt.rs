//! Time-refined complexity and the optimal inverter.
//!
//! Phase `k` runs every program `p` with `|p| <= k` for `2^(k - |p|)` steps,
//! shared between generating a candidate `w` and verifying it. A program
//! whose generation plus verification takes `T` steps is first accepted in
//! phase `|p| + ceil(log2 T)`, which is its `Kt`. Phases recompute from
//! scratch: a program that ran out of fuel in phase `k` is simply rerun with
//! twice the fuel in phase `k + 1`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::Error;
use crate::machine::{enumerate_programs, run, ExecOutcome, MachineConfig, ProgramCode, DEFAULT_TAPE_LIMIT};
use crate::problems::InversionTask;

/// No phase beyond this is ever run.
pub const HARD_MAX_K: u32 = 28;

/// Fuel for a program of `p_len` bits in phase `k`: `2^(k - p_len)`, or 0
/// when the program is longer than the phase. Each extra program bit halves it.
pub fn phase_budget(k: u32, p_len: usize) -> u64 {
    match (k as usize).checked_sub(p_len) {
        Some(d) if d < 64 => 1u64 << d,
        Some(_) => u64::MAX,
        None => 0,
    }
}

/// `ceil(log2 t)` with `ceil_log2(1) = 0`.
pub fn ceil_log2(t: u64) -> u32 {
    assert!(t >= 1, "time is at least one step");
    64 - (t - 1).leading_zeros()
}

/// A program that produced a verified witness, with the time it took.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KtBound {
    pub program: ProgramCode,
    pub gen_steps: u64,
    pub verify_steps: u64,
    pub total_steps: u64,
    pub kt: u32,
}

impl KtBound {
    pub fn new(program: ProgramCode, gen_steps: u64, verify_steps: u64) -> Self {
        let total_steps = gen_steps + verify_steps;
        let kt = program.bit_length() as u32 + ceil_log2(total_steps);
        Self { program, gen_steps, verify_steps, total_steps, kt }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhaseStats {
    pub k: u32,
    pub programs_tried: u64,
    pub steps_spent: u64,
    pub found: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SearchVerdict {
    Found,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub task: String,
    pub max_k: u32,
    pub verdict: SearchVerdict,
    pub witness: Option<BitString>,
    pub bound: Option<KtBound>,
    pub terminal_k: u32,
    pub phases: Vec<PhaseStats>,
}

impl SearchReport {
    pub fn total_steps(&self) -> u64 {
        self.phases.iter().map(|p| p.steps_spent).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-phase CSV with columns `k,programs_tried,steps_spent,found`.
    pub fn phases_csv(&self) -> String {
        let mut s = String::from("k,programs_tried,steps_spent,found\n");
        for p in &self.phases {
            s.push_str(&format!("{},{},{},{}\n", p.k, p.programs_tried, p.steps_spent, p.found));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    Serial,
    /// Programs within a phase are evaluated on the rayon pool; results are
    /// merged in enumeration order.
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_k: u32,
    pub work_tape_limit: usize,
    pub schedule: Schedule,
    /// Stop before starting a phase once this many steps have been spent.
    pub step_cap: Option<u64>,
}

impl SearchConfig {
    pub fn new(max_k: u32) -> Self {
        Self { max_k, work_tape_limit: DEFAULT_TAPE_LIMIT, schedule: Schedule::Serial, step_cap: None }
    }

    pub fn parallel(mut self) -> Self {
        self.schedule = Schedule::Parallel;
        self
    }
}

/// Programs in (length, lexicographic) order, shared between searches.
#[derive(Debug, Clone)]
pub struct ProgramTable {
    programs: Arc<Vec<ProgramCode>>,
    max_bits: usize,
}

impl ProgramTable {
    pub fn up_to(max_bits: usize) -> Self {
        Self { programs: Arc::new(enumerate_programs(max_bits).collect()), max_bits }
    }

    pub fn max_bits(&self) -> usize {
        self.max_bits
    }

    /// Programs of at most `bits` bits.
    pub fn prefix(&self, bits: usize) -> &[ProgramCode] {
        assert!(bits <= self.max_bits, "table built for {} bits, asked for {bits}", self.max_bits);
        let end = self.programs.partition_point(|p| p.bit_length() <= bits);
        &self.programs[..end]
    }
}

#[derive(Debug, Clone)]
struct Trial {
    steps: u64,
    accepted: Option<(BitString, u64, u64)>,
}

fn try_program(program: &ProgramCode, task: &InversionTask, fuel: u64, tape: usize) -> Trial {
    match run(program, &task.input, MachineConfig { work_tape_limit: tape, fuel }) {
        ExecOutcome::Halted { output, steps, .. } => {
            let remaining = fuel - steps;
            let verdict = task.verify(&output);
            if verdict.accepted && verdict.steps <= remaining {
                Trial { steps: steps + verdict.steps, accepted: Some((output, steps, verdict.steps)) }
            } else {
                Trial { steps: steps + verdict.steps.min(remaining), accepted: None }
            }
        }
        other => Trial { steps: other.steps_charged(fuel), accepted: None },
    }
}

/// Runs phases `1..=max_k` over `table` and returns the first accepted
/// witness in (phase, program length, program bits) order.
pub fn invert_with(task: &InversionTask, config: &SearchConfig, table: &ProgramTable) -> Result<SearchReport, Error> {
    if config.max_k > HARD_MAX_K {
        return Err(Error::PhaseCap { requested: config.max_k, limit: HARD_MAX_K });
    }
    let mut phases = Vec::new();
    let mut spent = 0u64;
    for k in 1..=config.max_k {
        if config.step_cap.is_some_and(|cap| spent >= cap) {
            break;
        }
        let programs = table.prefix(k as usize);
        let fuel_of = |p: &ProgramCode| phase_budget(k, p.bit_length());
        let tape = config.work_tape_limit;

        let mut stats = PhaseStats { k, programs_tried: 0, steps_spent: 0, found: false };
        let mut winner = None;
        match config.schedule {
            Schedule::Serial => {
                for p in programs {
                    let trial = try_program(p, task, fuel_of(p), tape);
                    stats.programs_tried += 1;
                    stats.steps_spent += trial.steps;
                    if let Some(acc) = trial.accepted {
                        winner = Some((p, acc));
                        break;
                    }
                }
            }
            Schedule::Parallel => {
                let trials: Vec<Trial> = programs.par_iter().map(|p| try_program(p, task, fuel_of(p), tape)).collect();
                for (p, trial) in programs.iter().zip(trials) {
                    stats.programs_tried += 1;
                    stats.steps_spent += trial.steps;
                    if let Some(acc) = trial.accepted {
                        winner = Some((p, acc));
                        break;
                    }
                }
            }
        }
        spent += stats.steps_spent;
        stats.found = winner.is_some();
        phases.push(stats);
        if let Some((program, (w, gen, verify))) = winner {
            return Ok(SearchReport {
                task: task.name.clone(),
                max_k: config.max_k,
                verdict: SearchVerdict::Found,
                witness: Some(w),
                bound: Some(KtBound::new(program.clone(), gen, verify)),
                terminal_k: k,
                phases,
            });
        }
    }
    Ok(SearchReport {
        task: task.name.clone(),
        max_k: config.max_k,
        verdict: SearchVerdict::BudgetExhausted,
        witness: None,
        bound: None,
        terminal_k: phases.last().map_or(0, |p| p.k),
        phases,
    })
}

pub fn invert(task: &InversionTask, max_k: u32) -> Result<SearchReport, Error> {
    let config = SearchConfig::new(max_k);
    if max_k > HARD_MAX_K {
        return Err(Error::PhaseCap { requested: max_k, limit: HARD_MAX_K });
    }
    invert_with(task, &config, &ProgramTable::up_to(max_k as usize))
}

/// Smallest `Kt(w | x)` witnessed by a program producing exactly `w` from
/// `x` within phase `max_k`, with output checking charged `|w| + 1` steps.
/// `None` when no phase up to `max_k` finds one.
pub fn kt_upper_bound(w: &BitString, x: &BitString, max_k: u32) -> Result<Option<KtBound>, Error> {
    let task = InversionTask::generate(w.clone(), x.clone());
    Ok(invert(&task, max_k)?.bound)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankedCandidate {
    pub w: BitString,
    pub x: BitString,
    pub bound: Option<KtBound>,
}

/// Candidates sorted by `Kt` ascending (stable); unbounded ones go last.
pub fn kt_rank(candidates: &[(BitString, BitString)], max_k: u32) -> Result<Vec<RankedCandidate>, Error> {
    if max_k > HARD_MAX_K {
        return Err(Error::PhaseCap { requested: max_k, limit: HARD_MAX_K });
    }
    let table = ProgramTable::up_to(max_k as usize);
    let config = SearchConfig::new(max_k);
    let mut ranked = candidates
        .iter()
        .map(|(w, x)| {
            let task = InversionTask::generate(w.clone(), x.clone());
            invert_with(&task, &config, &table).map(|r| RankedCandidate { w: w.clone(), x: x.clone(), bound: r.bound })
        })
        .collect::<Result<Vec<_>, _>>()?;
    ranked.sort_by_key(|c| c.bound.as_ref().map_or(u32::MAX, |b| b.kt));
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Opcode;
    use crate::problems::{CnfFormula, Graph};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn budget_examples() {
        assert_eq!(phase_budget(10, 4), 64);
        assert_eq!(phase_budget(10, 11), 0);
        assert_eq!(phase_budget(10, 5), 32);
        assert_eq!(phase_budget(10, 4), 2 * phase_budget(10, 5));
        assert_eq!(phase_budget(4, 4), 1);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
    }

    #[test]
    fn empty_string_from_empty_input() {
        let b = kt_upper_bound(&bs(""), &bs(""), 10).unwrap().unwrap();
        assert_eq!(b.program.opcodes(), &[Opcode::Halt]);
        assert_eq!((b.gen_steps, b.verify_steps, b.kt), (1, 1, 5));
    }

    #[test]
    fn single_zero_from_empty_input() {
        let b = kt_upper_bound(&bs("0"), &bs(""), 14).unwrap().unwrap();
        assert_eq!(b.program.opcodes(), &[Opcode::Emit, Opcode::Halt]);
        assert_eq!((b.gen_steps, b.verify_steps, b.kt), (2, 2, 11));
    }

    #[test]
    fn zero_phases_find_nothing() {
        assert_eq!(kt_upper_bound(&bs(""), &bs(""), 0).unwrap(), None);
        let r = invert(&InversionTask::identity(bs("")), 0).unwrap();
        assert_eq!(r.verdict, SearchVerdict::BudgetExhausted);
        assert_eq!(r.terminal_k, 0);
    }

    #[test]
    fn identity_zero() {
        let r = invert(&InversionTask::identity(bs("0")), 14).unwrap();
        assert_eq!(r.witness, Some(bs("0")));
        let b = r.bound.unwrap();
        assert_eq!(b.kt, r.terminal_k);
        assert!(b.total_steps <= phase_budget(r.terminal_k, b.program.bit_length()));
    }

    #[test]
    fn contradiction_exhausts_budget() {
        let f = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        let r = invert(&InversionTask::sat(f), 16).unwrap();
        assert_eq!(r.verdict, SearchVerdict::BudgetExhausted);
        assert_eq!(r.phases.len(), 16);
        assert!(r.witness.is_none());
    }

    #[test]
    fn phase_cap_enforced() {
        assert!(matches!(invert(&InversionTask::identity(bs("")), 29), Err(Error::PhaseCap { .. })));
    }

    #[test]
    fn serial_and_parallel_reports_match() {
        let tasks = [
            InversionTask::identity(bs("1")),
            InversionTask::three_coloring(Graph::new(1, vec![]).unwrap()),
            InversionTask::sat(CnfFormula::new(1, vec![vec![1]]).unwrap()),
        ];
        let table = ProgramTable::up_to(16);
        for t in &tasks {
            let serial = invert_with(t, &SearchConfig::new(16), &table).unwrap();
            let parallel = invert_with(t, &SearchConfig::new(16).parallel(), &table).unwrap();
            assert_eq!(serial.to_json(), parallel.to_json());
        }
    }

    #[test]
    fn rank_examples() {
        let ranked = kt_rank(&[(bs("0"), bs("")), (bs(""), bs(""))], 12).unwrap();
        let kts: Vec<_> = ranked.iter().map(|c| c.bound.as_ref().map(|b| b.kt)).collect();
        assert_eq!(kts, vec![Some(5), Some(11)]);
        assert_eq!(ranked[0].w, bs(""));

        let none = kt_rank(&[(bs("0101"), bs("")), (bs("0110"), bs(""))], 4).unwrap();
        assert!(none.iter().all(|c| c.bound.is_none()));
        assert_eq!(none[0].w, bs("0101"));
    }

    #[test]
    fn csv_header() {
        let r = invert(&InversionTask::identity(bs("")), 5).unwrap();
        let csv = r.phases_csv();
        assert!(csv.starts_with("k,programs_tried,steps_spent,found\n"));
        assert!(csv.ends_with("5,1,2,true\n"), "{csv}");
    }
}
