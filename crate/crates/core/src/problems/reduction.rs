//! Reduction of bounded verification to Tiling through a computation tableau.
//!
//! The verifier is first expressed as a machine program (an *acceptor*) that
//! reads the witness from its input tape and accepts by halting with a 1
//! under the work head. [`reduce_program`] then builds a square instance of
//! side `S + 2` whose rows are machine configurations:
//!
//! * row 0 holds the initial configuration; the tile chosen in each of the
//!   first `m` columns fixes one witness bit on the input track;
//! * rows `1..=S` each apply one machine step;
//! * row `S + 1` only admits halted, accepting configurations.
//!
//! Column `j` holds work cell `j` and the `j`-th not yet consumed input bit.
//! A READ shifts the whole input track one column west, so the next input
//! bit is always in column 0 and travels east along the horizontal edges.
//! Every cell also carries the control state, and each row guesses the
//! successor state on its horizontal edges, checked by the head's tile.

use std::collections::HashMap;

use serde::Serialize;

use super::tiling::{Tile, TilingInstance};
use super::InversionTask;
use crate::bits::BitString;
use crate::error::Error;
use crate::machine::{run, ExecOutcome, MachineConfig, Opcode, ProgramCode};

/// Largest grid side the reduction will build.
pub const GRID_CAP: usize = 64;

/// Largest witness the decision-tree acceptor compiler will expand.
pub const MAX_ACCEPTOR_BITS: usize = 12;

/// Compiles `task`'s verifier, restricted to witnesses of exactly `m` bits,
/// into a decision-tree acceptor: it reads the `m` bits and halts with the
/// head cell equal to the verdict. Runs in at most `2m + 2` steps.
pub fn compile_acceptor(task: &InversionTask, m: usize) -> Result<ProgramCode, Error> {
    if m > MAX_ACCEPTOR_BITS {
        return Err(Error::InvalidParameter(format!("acceptor witness length {m} exceeds {MAX_ACCEPTOR_BITS}")));
    }
    let mut ops = Vec::new();
    emit_node(task, m, &mut Vec::new(), false, &mut ops);
    Ok(ProgramCode::from_opcodes(ops).expect("decision tree is bracket-balanced"))
}

fn emit_node(task: &InversionTask, m: usize, prefix: &mut Vec<bool>, cell: bool, ops: &mut Vec<Opcode>) {
    if prefix.len() == m {
        let accept = task.verify(&BitString::from_bits(prefix.clone())).accepted;
        if accept != cell {
            ops.push(Opcode::Flip);
        }
        ops.push(Opcode::Halt);
        return;
    }
    ops.extend([Opcode::Read, Opcode::LoopStart]);
    prefix.push(true);
    emit_node(task, m, prefix, true, ops);
    prefix.pop();
    ops.push(Opcode::LoopEnd);
    prefix.push(false);
    emit_node(task, m, prefix, false, ops);
    prefix.pop();
}

/// Acceptance semantics for acceptor programs: halts within `step_bound`
/// steps with a 1 under the work head.
pub fn acceptor_accepts(program: &ProgramCode, w: &BitString, step_bound: u64) -> bool {
    matches!(run(program, w, MachineConfig::with_fuel(step_bound)), ExecOutcome::Halted { head_bit: true, .. })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Ctl {
    Pc(u32),
    Halted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Pos {
    Left,
    Mid,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Move {
    None,
    /// The head crosses this edge eastwards.
    East,
    /// The head crosses this edge westwards.
    West,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Cell {
    pos: Pos,
    work: bool,
    input: bool,
    head: bool,
    ctl: Ctl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Edge {
    ctl: Ctl,
    next: Ctl,
    /// Input bit under the input head (held by column 0).
    current: bool,
    /// Input bit of the cell east of this edge.
    east_input: bool,
    mv: Move,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Color {
    Border,
    Init(usize),
    Cell(Cell),
    Edge(Edge),
    Top,
}

#[derive(Default)]
struct Palette {
    ids: HashMap<Color, u32>,
}

impl Palette {
    fn id(&mut self, c: Color) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry(c).or_insert(next)
    }
}

/// A tiling instance built from an acceptor plus the data needed to read a
/// witness back out of a solution.
#[derive(Debug, Clone, Serialize)]
pub struct TilingReduction {
    pub instance: TilingInstance,
    pub step_bound: usize,
    pub witness_bits: usize,
    /// Witness bit selected by each tile of row 0, indexed by tile.
    #[serde(skip)]
    init_bits: Vec<Option<bool>>,
}

impl TilingReduction {
    /// The witness fixed by the first row of a valid placement.
    pub fn extract_witness(&self, placement: &[usize]) -> BitString {
        placement[..self.witness_bits].iter().map(|&t| self.init_bits.get(t).copied().flatten().unwrap_or(false)).collect()
    }
}

/// Compiles the task's verifier and reduces "some `m`-bit witness is
/// accepted within `step_bound` steps" to Tiling.
pub fn reduce_to_tiling(task: &InversionTask, step_bound: usize, witness_bits: usize) -> Result<TilingReduction, Error> {
    check_bounds(step_bound, witness_bits)?;
    let acceptor = compile_acceptor(task, witness_bits)?;
    reduce_program(&acceptor, step_bound, witness_bits)
}

fn check_bounds(step_bound: usize, witness_bits: usize) -> Result<usize, Error> {
    let n = step_bound + 2;
    if n > GRID_CAP {
        return Err(Error::InvalidParameter(format!("grid side {n} exceeds cap {GRID_CAP}")));
    }
    if witness_bits > n {
        return Err(Error::InvalidParameter(format!("witness length {witness_bits} exceeds grid side {n}")));
    }
    Ok(n)
}

/// Tableau reduction for an arbitrary acceptor program.
pub fn reduce_program(program: &ProgramCode, step_bound: usize, witness_bits: usize) -> Result<TilingReduction, Error> {
    let n = check_bounds(step_bound, witness_bits)?;
    let ops = program.opcodes();
    let len = ops.len() as u32;

    let mut palette = Palette::default();
    let border = palette.id(Color::Border);
    let mut tiles: Vec<Tile> = Vec::new();
    let mut init_bits = Vec::new();

    let pos_of = |j: usize| {
        if j == 0 {
            Pos::Left
        } else if j + 1 == n {
            Pos::Right
        } else {
            Pos::Mid
        }
    };

    // Row 0: initial configuration, witness bits chosen per column.
    for j in 0..n {
        let choices: &[bool] = if j < witness_bits { &[false, true] } else { &[false] };
        for &bit in choices {
            let cell = Cell { pos: pos_of(j), work: false, input: bit, head: j == 0, ctl: Ctl::Pc(0) };
            let north = palette.id(Color::Cell(cell));
            let west = if j == 0 { border } else { palette.id(Color::Init(j)) };
            let east = if j + 1 == n { border } else { palette.id(Color::Init(j + 1)) };
            tiles.push([north, east, border, west]);
            init_bits.push((j < witness_bits).then_some(bit));
        }
    }

    // Transition tiles.
    let mut states: Vec<Ctl> = (0..=len).map(Ctl::Pc).collect();
    states.push(Ctl::Halted);
    let op_at = |ctl: Ctl| match ctl {
        Ctl::Pc(i) if i < len => Some(ops[i as usize]),
        _ => None,
    };
    let matching = |i: u32| program.matching(i as usize).expect("bracket has a match") as u32;
    let successors = |ctl: Ctl| -> Vec<Ctl> {
        match (ctl, op_at(ctl)) {
            (Ctl::Pc(_), Some(Opcode::Halt)) => vec![Ctl::Halted],
            (Ctl::Pc(i), Some(Opcode::LoopStart)) => vec![Ctl::Pc(i + 1), Ctl::Pc(matching(i) + 1)],
            (Ctl::Pc(i), Some(Opcode::LoopEnd)) => vec![Ctl::Pc(matching(i))],
            (Ctl::Pc(i), Some(_)) => vec![Ctl::Pc(i + 1)],
            (other, _) => vec![other],
        }
    };

    let step = |ctl: Ctl, work: bool| match (ctl, op_at(ctl)) {
        (Ctl::Pc(_), Some(Opcode::Halt)) => Ctl::Halted,
        (Ctl::Pc(i), Some(Opcode::LoopStart)) if !work => Ctl::Pc(matching(i) + 1),
        (Ctl::Pc(i), Some(Opcode::LoopEnd)) => Ctl::Pc(matching(i)),
        (Ctl::Pc(i), Some(_)) => Ctl::Pc(i + 1),
        (other, _) => other,
    };

    let positions: &[Pos] = if n == 2 { &[Pos::Left, Pos::Right] } else { &[Pos::Left, Pos::Mid, Pos::Right] };
    for &ctl in &states {
        let op = op_at(ctl);
        for next in successors(ctl) {
            for &pos in positions {
                for work in [false, true] {
                    for input in [false, true] {
                        for current in [false, true] {
                            if pos == Pos::Left && current != input {
                                continue;
                            }
                            let east_inputs: &[bool] = if pos == Pos::Right { &[false] } else { &[false, true] };
                            for &east_input in east_inputs {
                                let new_input = if op == Some(Opcode::Read) { east_input } else { input };
                                let edge = |next, east_input, mv| Edge { ctl, next, current, east_input, mv };
                                let south = Cell { pos, work, input, head: false, ctl };

                                // Head in this column.
                                if let Some(t) = head_tile(op, next, step(ctl, work), pos, work, current) {
                                    let (new_work, head_stays, west_mv, east_mv) = t;
                                    let north = Cell { pos, work: new_work, input: new_input, head: head_stays, ctl: next };
                                    tiles.push([
                                        palette.id(Color::Cell(north)),
                                        side(&mut palette, pos == Pos::Right, border, edge(next, east_input, east_mv)),
                                        palette.id(Color::Cell(Cell { head: true, ..south })),
                                        side(&mut palette, pos == Pos::Left, border, edge(next, input, west_mv)),
                                    ]);
                                    init_bits.push(None);
                                }

                                // Head elsewhere; it may arrive from either side.
                                for arrival in [Move::None, Move::East, Move::West] {
                                    let (west_mv, east_mv) = match arrival {
                                        Move::None => (Move::None, Move::None),
                                        Move::East if op == Some(Opcode::Right) && pos != Pos::Left => (Move::East, Move::None),
                                        Move::West if op == Some(Opcode::Left) && pos != Pos::Right => (Move::None, Move::West),
                                        _ => continue,
                                    };
                                    let north = Cell { pos, work, input: new_input, head: arrival != Move::None, ctl: next };
                                    tiles.push([
                                        palette.id(Color::Cell(north)),
                                        side(&mut palette, pos == Pos::Right, border, edge(next, east_input, east_mv)),
                                        palette.id(Color::Cell(south)),
                                        side(&mut palette, pos == Pos::Left, border, edge(next, input, west_mv)),
                                    ]);
                                    init_bits.push(None);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Top row: only halted configurations with a 1 under the head.
    let top = palette.id(Color::Top);
    for &pos in positions {
        for work in [false, true] {
            for input in [false, true] {
                for head in [false, true] {
                    if head && !work {
                        continue;
                    }
                    let south = palette.id(Color::Cell(Cell { pos, work, input, head, ctl: Ctl::Halted }));
                    let east = if pos == Pos::Right { border } else { top };
                    let west = if pos == Pos::Left { border } else { top };
                    tiles.push([border, east, south, west]);
                    init_bits.push(None);
                }
            }
        }
    }

    let num_colors = palette.ids.len() as u32;
    let instance = TilingInstance::new(n, tiles, num_colors, border, vec![]).map_err(Error::InvalidParameter)?;
    Ok(TilingReduction { instance, step_bound, witness_bits, init_bits })
}

fn side(palette: &mut Palette, is_border: bool, border: u32, edge: Edge) -> u32 {
    if is_border {
        border
    } else {
        palette.id(Color::Edge(edge))
    }
}

/// Effect of one step on the head's column given the successor state the
/// step actually produces: `(new work bit, head stays, west edge move, east
/// edge move)`. `None` when the row guessed a different successor.
fn head_tile(op: Option<Opcode>, next: Ctl, actual: Ctl, pos: Pos, work: bool, current: bool) -> Option<(bool, bool, Move, Move)> {
    if next != actual {
        return None;
    }
    Some(match op {
        Some(Opcode::Flip) => (!work, true, Move::None, Move::None),
        Some(Opcode::Read) => (current, true, Move::None, Move::None),
        Some(Opcode::Left) if pos != Pos::Left => (work, false, Move::West, Move::None),
        Some(Opcode::Right) if pos != Pos::Right => (work, false, Move::None, Move::East),
        _ => (work, true, Move::None, Move::None),
    })
}
