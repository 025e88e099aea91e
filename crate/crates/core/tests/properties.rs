use proptest::prelude::*;

use optinv::kt::{ceil_log2, invert, phase_budget, KtBound};
use optinv::machine::{run, run_observed, ExecOutcome, MachineConfig, Opcode, ProgramCode};
use optinv::problems::tiling::{Pin, TilingInstance};
use optinv::problems::{CnfFormula, Graph, InversionTask};
use optinv::BitString;

fn opcode() -> impl Strategy<Value = Opcode> {
    (0u8..8).prop_map(Opcode::from_bits)
}

/// Random opcode lists with brackets repaired into balance.
fn balanced_program() -> impl Strategy<Value = ProgramCode> {
    prop::collection::vec(opcode(), 1..14).prop_map(|ops| {
        let mut depth = 0usize;
        let mut fixed = Vec::new();
        for op in ops {
            match op {
                Opcode::LoopStart => depth += 1,
                Opcode::LoopEnd if depth == 0 => continue,
                Opcode::LoopEnd => depth -= 1,
                _ => {}
            }
            fixed.push(op);
        }
        fixed.extend(std::iter::repeat_n(Opcode::LoopEnd, depth));
        if fixed.is_empty() {
            fixed.push(Opcode::Halt);
        }
        ProgramCode::from_opcodes(fixed).expect("balanced")
    })
}

fn bitstring(max: usize) -> impl Strategy<Value = BitString> {
    prop::collection::vec(any::<bool>(), 0..=max).prop_map(BitString::from_bits)
}

proptest! {
    #[test]
    fn programs_round_trip(p in balanced_program()) {
        prop_assert_eq!(&ProgramCode::decode(p.raw()).unwrap(), &p);
        prop_assert_eq!(&ProgramCode::assemble(&p.disassemble()).unwrap(), &p);
        prop_assert_eq!(p.bit_length(), p.header_bits() + 3 * p.opcodes().len());
    }

    #[test]
    fn truncated_or_extended_programs_do_not_decode(p in balanced_program(), extra in any::<bool>()) {
        let mut longer = p.raw().clone();
        longer.push(extra);
        prop_assert!(ProgramCode::decode(&longer).is_err());
        let shorter: BitString = p.raw().iter().take(p.bit_length() - 1).collect();
        prop_assert!(ProgramCode::decode(&shorter).is_err());
    }

    #[test]
    fn steps_equal_executed_opcodes(p in balanced_program(), input in bitstring(6), fuel in 1u64..500) {
        let mut executed = 0u64;
        let observed = run_observed(&p, &input, MachineConfig::with_fuel(fuel), |_, _| executed += 1);
        prop_assert_eq!(&observed, &run(&p, &input, MachineConfig::with_fuel(fuel)));
        match observed {
            ExecOutcome::Halted { steps, output, .. } => {
                prop_assert_eq!(steps, executed);
                prop_assert!(steps <= fuel);
                let emits = p.opcodes().iter().filter(|o| **o == Opcode::Emit).count();
                prop_assert!(emits > 0 || output.is_empty());
            }
            ExecOutcome::OutOfFuel => prop_assert!(executed <= fuel),
            ExecOutcome::Fault(f) => prop_assert!(false, "decoded program faulted: {:?}", f),
        }
    }

    #[test]
    fn more_fuel_never_changes_a_halt(p in balanced_program(), input in bitstring(6), fuel in 1u64..200, more in 1u64..2000) {
        let a = run(&p, &input, MachineConfig::with_fuel(fuel));
        if a.is_halted() {
            prop_assert_eq!(a, run(&p, &input, MachineConfig::with_fuel(fuel + more)));
        }
    }

    #[test]
    fn budget_halves_per_bit(k in 0u32..=28, len in 0usize..28) {
        if len < k as usize {
            prop_assert_eq!(phase_budget(k, len), 2 * phase_budget(k, len + 1));
        }
        if len > k as usize {
            prop_assert_eq!(phase_budget(k, len), 0);
        }
    }

    #[test]
    fn kt_is_length_plus_log_time(p in balanced_program(), gen in 1u64..10_000, verify in 1u64..10_000) {
        let b = KtBound::new(p.clone(), gen, verify);
        let t = gen + verify;
        prop_assert_eq!(b.kt, p.bit_length() as u32 + ceil_log2(t));
        prop_assert!(1u64 << ceil_log2(t) >= t);
        prop_assert!(ceil_log2(t) == 0 || 1u64 << (ceil_log2(t) - 1) < t);
    }

    #[test]
    fn bitstrings_round_trip_text(b in bitstring(40)) {
        let text = b.to_string();
        prop_assert_eq!(text.parse::<BitString>().unwrap(), b);
    }

    #[test]
    fn graphs_round_trip(n in 1usize..7, mask in any::<u32>()) {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let g = Graph::new(n, edges).unwrap();
        prop_assert_eq!(&Graph::decode(&g.encode()).unwrap(), &g);
        prop_assert_eq!(&Graph::parse_edge_list(&g.to_edge_list()).unwrap(), &g);
    }

    #[test]
    fn formulas_round_trip(vars in 1usize..5, raw in prop::collection::vec(prop::collection::vec((1i32..5, any::<bool>()), 1..4), 1..5)) {
        let clauses: Vec<Vec<i32>> = raw
            .into_iter()
            .map(|c| c.into_iter().map(|(v, neg)| { let v = (v - 1) % vars as i32 + 1; if neg { -v } else { v } }).collect())
            .collect();
        let f = CnfFormula::new(vars, clauses).unwrap();
        prop_assert_eq!(&CnfFormula::decode(&f.encode()).unwrap(), &f);
        prop_assert_eq!(&CnfFormula::parse_dimacs(&f.to_dimacs()).unwrap(), &f);
    }

    #[test]
    fn tilings_round_trip(n in 1usize..4, tiles in prop::collection::vec(prop::array::uniform4(0u32..3), 1..5), pin in any::<bool>()) {
        let pinned = if pin { vec![Pin { row: 0, col: 0, tile: 0 }] } else { vec![] };
        let t = TilingInstance::new(n, tiles, 3, 0, pinned).unwrap();
        prop_assert_eq!(&TilingInstance::decode(&t.encode()).unwrap(), &t);
        prop_assert_eq!(&TilingInstance::parse_text(&t.to_text()).unwrap(), &t);
        let placement: Vec<usize> = (0..n * n).map(|i| i % t.tiles().len()).collect();
        prop_assert_eq!(t.decode_placement(&t.encode_placement(&placement)).unwrap(), placement);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn found_witnesses_verify(x in bitstring(2), vars in 1usize..3) {
        for task in [InversionTask::identity(x.clone()), InversionTask::sat(CnfFormula::new(vars, vec![vec![-1]]).unwrap())] {
            let report = invert(&task, 16).unwrap();
            if let (Some(w), Some(b)) = (&report.witness, &report.bound) {
                prop_assert!(task.verify(w).accepted);
                prop_assert_eq!(b.kt, report.terminal_k);
                prop_assert_eq!(task.verify(w).steps, b.verify_steps);
            }
        }
    }
}
