//! The universal machine: a fuel-metered binary tape machine running
//! self-delimiting programs.
//!
//! A program is the Elias-gamma code of its opcode count `L >= 1` followed by
//! exactly `3L` opcode bits, so the set of valid programs is prefix-free by
//! construction. The machine has a read-once binary input tape (padded with
//! zeros), a binary work tape starting at all zeros with the head on cell 0,
//! and an append-only output tape. Every executed opcode costs one step.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::bits::{gamma_len, BitReader, BitString};
use crate::error::ParseError;

pub const DEFAULT_TAPE_LIMIT: usize = 1 << 16;

/// Smallest valid program: `γ(1)` plus one opcode.
pub const MIN_PROGRAM_BITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[repr(u8)]
pub enum Opcode {
    Halt = 0b000,
    Left = 0b001,
    Right = 0b010,
    Flip = 0b011,
    /// Skip past the matching `LoopEnd` if the current cell is 0.
    LoopStart = 0b100,
    /// Jump back to the matching `LoopStart`.
    LoopEnd = 0b101,
    /// Copy the next input bit into the current cell (0 once input is exhausted).
    Read = 0b110,
    /// Append the current cell to the output.
    Emit = 0b111,
}

impl Opcode {
    pub const ALL: [Opcode; 8] =
        [Opcode::Halt, Opcode::Left, Opcode::Right, Opcode::Flip, Opcode::LoopStart, Opcode::LoopEnd, Opcode::Read, Opcode::Emit];

    pub fn from_bits(v: u8) -> Opcode {
        Self::ALL[(v & 0b111) as usize]
    }

    pub fn bits(self) -> u8 {
        self as u8
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Halt => "HALT",
            Opcode::Left => "LEFT",
            Opcode::Right => "RIGHT",
            Opcode::Flip => "FLIP",
            Opcode::LoopStart => "LOOP-START",
            Opcode::LoopEnd => "LOOP-END",
            Opcode::Read => "READ",
            Opcode::Emit => "EMIT",
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

impl FromStr for Opcode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Opcode::ALL.into_iter().find(|op| op.mnemonic().eq_ignore_ascii_case(s)).ok_or_else(|| format!("unknown opcode {s:?}"))
    }
}

/// Why a bit string is not a valid program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error, Serialize)]
pub enum Fault {
    #[error("malformed length header or wrong total length")]
    BadHeader,
    #[error("unmatched loop bracket")]
    UnmatchedLoop,
    #[error("program declares zero opcodes")]
    ZeroLengthBody,
}

const NO_MATCH: u32 = u32::MAX;

/// A decoded program.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ProgramCode {
    raw: BitString,
    opcodes: Vec<Opcode>,
    loop_table: Vec<u32>,
}

impl ProgramCode {
    /// Decodes `raw`, which must be exactly one program with no trailing bits.
    pub fn decode(raw: &BitString) -> Result<ProgramCode, Fault> {
        let mut reader = BitReader::new(raw);
        let count = reader.read_gamma().ok_or(Fault::BadHeader)?;
        if count == 0 {
            return Err(Fault::ZeroLengthBody);
        }
        if (reader.remaining() as u64) != 3 * count {
            return Err(Fault::BadHeader);
        }
        let opcodes = (0..count).map(|_| Opcode::from_bits(reader.read_uint(3).expect("length checked") as u8)).collect();
        Self::with_raw(raw.clone(), opcodes)
    }

    /// Encodes an opcode list into a program, adding the length header.
    pub fn from_opcodes(opcodes: Vec<Opcode>) -> Result<ProgramCode, Fault> {
        if opcodes.is_empty() {
            return Err(Fault::ZeroLengthBody);
        }
        let mut raw = BitString::new();
        raw.push_gamma(opcodes.len() as u64);
        for op in &opcodes {
            raw.push_uint(u64::from(op.bits()), 3);
        }
        Self::with_raw(raw, opcodes)
    }

    fn with_raw(raw: BitString, opcodes: Vec<Opcode>) -> Result<ProgramCode, Fault> {
        let loop_table = match_loops(&opcodes).ok_or(Fault::UnmatchedLoop)?;
        Ok(ProgramCode { raw, opcodes, loop_table })
    }

    pub fn raw(&self) -> &BitString {
        &self.raw
    }

    pub fn opcodes(&self) -> &[Opcode] {
        &self.opcodes
    }

    /// Position of the bracket matching the one at `pc`, if `pc` holds a bracket.
    pub fn matching(&self, pc: usize) -> Option<usize> {
        match self.loop_table.get(pc) {
            Some(&m) if m != NO_MATCH => Some(m as usize),
            _ => None,
        }
    }

    /// `|p|` in bits: header plus three bits per opcode.
    pub fn bit_length(&self) -> usize {
        self.raw.len()
    }

    pub fn header_bits(&self) -> usize {
        gamma_len(self.opcodes.len() as u64)
    }

    /// One mnemonic per line.
    pub fn disassemble(&self) -> String {
        let mut s = String::new();
        for op in &self.opcodes {
            s.push_str(op.mnemonic());
            s.push('\n');
        }
        s
    }

    /// Inverse of [`disassemble`](Self::disassemble). Blank lines and `#`
    /// comments are ignored.
    pub fn assemble(text: &str) -> Result<ProgramCode, ParseError> {
        let mut ops = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            ops.push(line.parse::<Opcode>().map_err(|e| ParseError::new(i + 1, 1, e))?);
        }
        ProgramCode::from_opcodes(ops).map_err(|f| ParseError::new(1, 1, f.to_string()))
    }
}

impl Serialize for ProgramCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("ProgramCode", 3)?;
        st.serialize_field("bits", &self.raw)?;
        st.serialize_field("bit_length", &self.bit_length())?;
        st.serialize_field("opcodes", &self.opcodes.iter().map(|o| o.mnemonic()).collect::<Vec<_>>())?;
        st.end()
    }
}

impl fmt::Debug for ProgramCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops: Vec<_> = self.opcodes.iter().map(|o| o.mnemonic()).collect();
        write!(f, "ProgramCode({} bits: [{}])", self.bit_length(), ops.join(" "))
    }
}

fn match_loops(opcodes: &[Opcode]) -> Option<Vec<u32>> {
    let mut table = vec![NO_MATCH; opcodes.len()];
    let mut open = Vec::new();
    for (i, op) in opcodes.iter().enumerate() {
        match op {
            Opcode::LoopStart => open.push(i),
            Opcode::LoopEnd => {
                let j = open.pop()?;
                table[i] = j as u32;
                table[j] = i as u32;
            }
            _ => {}
        }
    }
    open.is_empty().then_some(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MachineConfig {
    pub work_tape_limit: usize,
    pub fuel: u64,
}

impl MachineConfig {
    pub fn with_fuel(fuel: u64) -> Self {
        Self { work_tape_limit: DEFAULT_TAPE_LIMIT, fuel }
    }
}

impl Default for MachineConfig {
    fn default() -> Self {
        Self::with_fuel(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum ExecOutcome {
    /// HALT executed after `steps` opcodes. `head_bit` is the work cell under
    /// the head when the machine stopped.
    Halted {
        output: BitString,
        steps: u64,
        head_bit: bool,
    },
    /// HALT not reached within the fuel. A program that runs past its last
    /// opcode never halts.
    OutOfFuel,
    Fault(Fault),
}

impl ExecOutcome {
    pub fn is_halted(&self) -> bool {
        matches!(self, ExecOutcome::Halted { .. })
    }

    /// Steps charged against the fuel: the step count when halted, else all of it.
    pub fn steps_charged(&self, fuel: u64) -> u64 {
        match self {
            ExecOutcome::Halted { steps, .. } => *steps,
            ExecOutcome::OutOfFuel => fuel,
            ExecOutcome::Fault(_) => 0,
        }
    }
}

/// Runs a decoded program on `input`.
pub fn run(program: &ProgramCode, input: &BitString, config: MachineConfig) -> ExecOutcome {
    run_observed(program, input, config, |_, _| {})
}

/// Decodes then runs; decode faults surface as [`ExecOutcome::Fault`].
pub fn run_raw(raw: &BitString, input: &BitString, config: MachineConfig) -> ExecOutcome {
    match ProgramCode::decode(raw) {
        Ok(p) => run(&p, input, config),
        Err(f) => ExecOutcome::Fault(f),
    }
}

/// Like [`run`], calling `observe(pc, opcode)` once per executed opcode.
pub fn run_observed<F>(program: &ProgramCode, input: &BitString, config: MachineConfig, mut observe: F) -> ExecOutcome
where
    F: FnMut(usize, Opcode),
{
    let ops = program.opcodes();
    let input = input.as_slice();
    let limit = config.work_tape_limit.max(1);
    let mut tape = vec![false; 1];
    let mut head = 0usize;
    let mut input_pos = 0usize;
    let mut output = BitString::new();
    let mut pc = 0usize;
    let mut steps = 0u64;

    loop {
        if pc >= ops.len() || steps == config.fuel {
            return ExecOutcome::OutOfFuel;
        }
        steps += 1;
        let op = ops[pc];
        observe(pc, op);
        match op {
            Opcode::Halt => {
                return ExecOutcome::Halted { output, steps, head_bit: tape[head] };
            }
            Opcode::Left => head = head.saturating_sub(1),
            Opcode::Right => {
                if head + 1 < limit {
                    head += 1;
                    if head == tape.len() {
                        tape.push(false);
                    }
                }
            }
            Opcode::Flip => tape[head] = !tape[head],
            Opcode::LoopStart => {
                if !tape[head] {
                    pc = program.loop_table[pc] as usize + 1;
                    continue;
                }
            }
            Opcode::LoopEnd => {
                pc = program.loop_table[pc] as usize;
                continue;
            }
            Opcode::Read => {
                tape[head] = input.get(input_pos).copied().unwrap_or(false);
                input_pos += 1;
            }
            Opcode::Emit => output.push(tape[head]),
        }
        pc += 1;
    }
}

/// Total bit length of a program with `count` opcodes.
pub fn program_bits(count: usize) -> usize {
    gamma_len(count as u64) + 3 * count
}

/// Every valid program with `bit_length <= max_bits`, ordered by
/// (bit length, raw bits lexicographically).
pub fn enumerate_programs(max_bits: usize) -> impl Iterator<Item = ProgramCode> {
    (1usize..).take_while(move |&count| program_bits(count) <= max_bits).flat_map(programs_with_opcodes)
}

/// All loop-balanced programs with exactly `count` opcodes, in lexicographic
/// order of their opcode bits.
pub fn programs_with_opcodes(count: usize) -> impl Iterator<Item = ProgramCode> {
    BalancedSequences::new(count).map(|ops| ProgramCode::from_opcodes(ops).expect("balanced by construction"))
}

/// Depth-first generator of bracket-balanced opcode sequences.
struct BalancedSequences {
    len: usize,
    stack: Vec<u8>,
    done: bool,
}

impl BalancedSequences {
    fn new(len: usize) -> Self {
        Self { len, stack: Vec::with_capacity(len), done: len == 0 }
    }

    fn depth_ok(ops: &[u8], len: usize) -> bool {
        let mut depth = 0i64;
        for &o in ops {
            match Opcode::from_bits(o) {
                Opcode::LoopStart => depth += 1,
                Opcode::LoopEnd => {
                    depth -= 1;
                    if depth < 0 {
                        return false;
                    }
                }
                _ => {}
            }
        }
        depth <= (len - ops.len()) as i64
    }

    /// Advance the last position to its next value, popping exhausted positions.
    fn bump(&mut self) -> bool {
        while let Some(last) = self.stack.pop() {
            if last < 7 {
                self.stack.push(last + 1);
                return true;
            }
        }
        false
    }
}

impl Iterator for BalancedSequences {
    type Item = Vec<Opcode>;

    fn next(&mut self) -> Option<Vec<Opcode>> {
        if self.done {
            return None;
        }
        // Resume after the previously emitted sequence.
        if self.stack.len() == self.len && !self.bump() {
            self.done = true;
            return None;
        }
        loop {
            if Self::depth_ok(&self.stack, self.len) {
                if self.stack.len() == self.len {
                    return Some(self.stack.iter().map(|&o| Opcode::from_bits(o)).collect());
                }
                self.stack.push(0);
            } else if !self.bump() {
                self.done = true;
                return None;
            }
        }
    }
}
