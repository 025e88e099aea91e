//! Occam-style sequence extrapolation.
//!
//! Every program of at most `max_k` bits is run on an empty input with its
//! phase-`max_k` fuel. Programs that halt with an output strictly extending
//! the observed data become hypotheses weighted `2^-|p|` (or `2^-Kt`), and the
//! next-bit prediction is the weight fraction voting for 1. Slow programs
//! simply run out of fuel, which is how speed enters the prior.

use serde::Serialize;
use serde_json::json;

use crate::bits::BitString;
use crate::error::Error;
use crate::kt::{ceil_log2, phase_budget, ProgramTable, HARD_MAX_K};
use crate::machine::{run, ExecOutcome, MachineConfig, ProgramCode};
use crate::scalar::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum WeightMode {
    /// `2^-|p|`
    #[default]
    Length,
    /// `2^-(|p| + ceil(log2 steps))`
    Kt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis<W> {
    pub program: ProgramCode,
    pub output: BitString,
    pub gen_steps: u64,
    #[serde(skip)]
    pub weight: W,
}

impl<W: Weight> Hypothesis<W> {
    /// The bit this hypothesis predicts after `data`.
    pub fn next_bit(&self, data: &BitString) -> bool {
        self.output.get(data.len()).expect("output extends data")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<W> {
    pub data: BitString,
    pub max_k: u32,
    pub mode: WeightMode,
    /// Weight fraction predicting a 1.
    pub p1: W,
    pub total_weight: W,
    pub hypotheses: Vec<Hypothesis<W>>,
}

fn check_cap(max_k: u32) -> Result<(), Error> {
    if max_k > HARD_MAX_K {
        return Err(Error::PhaseCap { requested: max_k, limit: HARD_MAX_K });
    }
    Ok(())
}

/// Hypotheses in (program length, program bits) order.
pub fn find_hypotheses<W: Weight>(data: &BitString, max_k: u32, mode: WeightMode) -> Result<Vec<Hypothesis<W>>, Error> {
    check_cap(max_k)?;
    let table = ProgramTable::up_to(max_k as usize);
    Ok(find_hypotheses_in(&table, data, max_k, mode))
}

pub fn find_hypotheses_in<W: Weight>(table: &ProgramTable, data: &BitString, max_k: u32, mode: WeightMode) -> Vec<Hypothesis<W>> {
    let empty = BitString::new();
    table
        .prefix(max_k as usize)
        .iter()
        .filter_map(|p| {
            let fuel = phase_budget(max_k, p.bit_length());
            match run(p, &empty, MachineConfig::with_fuel(fuel)) {
                ExecOutcome::Halted { output, steps, .. } if output.len() > data.len() && output.starts_with(data) => {
                    let exp = match mode {
                        WeightMode::Length => p.bit_length() as u32,
                        WeightMode::Kt => p.bit_length() as u32 + ceil_log2(steps),
                    };
                    Some(Hypothesis { program: p.clone(), output, gen_steps: steps, weight: W::dyadic(exp) })
                }
                _ => None,
            }
        })
        .collect()
}

/// Fails with [`Error::NoHypotheses`] when no program fits the data.
pub fn predict_next<W: Weight>(data: &BitString, max_k: u32, mode: WeightMode) -> Result<Prediction<W>, Error> {
    let hypotheses = find_hypotheses::<W>(data, max_k, mode)?;
    if hypotheses.is_empty() {
        return Err(Error::NoHypotheses);
    }
    Ok(aggregate(data, max_k, mode, hypotheses))
}

fn aggregate<W: Weight>(data: &BitString, max_k: u32, mode: WeightMode, hypotheses: Vec<Hypothesis<W>>) -> Prediction<W> {
    let mut total = W::zero();
    let mut ones = W::zero();
    for h in &hypotheses {
        total = total + h.weight.clone();
        if h.next_bit(data) {
            ones = ones + h.weight.clone();
        }
    }
    let p1 = ones / total.clone();
    Prediction { data: data.clone(), max_k, mode, p1, total_weight: total, hypotheses }
}

impl<W: Weight> Prediction<W> {
    /// Exact values are written as `{"num": "..", "den": ".."}`, floats as numbers.
    pub fn to_json(&self) -> String {
        let value = |w: &W| match w.as_fraction() {
            Some((n, d)) => json!({ "num": n.to_string(), "den": d.to_string() }),
            None => json!(w.to_f64()),
        };
        let table: Vec<_> = self
            .hypotheses
            .iter()
            .map(|h| {
                json!({
                    "program": h.program.raw().to_string(),
                    "opcodes": h.program.opcodes().iter().map(|o| o.mnemonic()).collect::<Vec<_>>(),
                    "output": h.output.to_string(),
                    "steps": h.gen_steps,
                    "weight": value(&h.weight),
                })
            })
            .collect();
        let doc = json!({
            "data": self.data.to_string(),
            "max_k": self.max_k,
            "weighting": self.mode,
            "p1": value(&self.p1),
            "total_weight": value(&self.total_weight),
            "hypotheses": table,
        });
        serde_json::to_string_pretty(&doc).expect("json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Opcode;
    use num_rational::BigRational;
    use num_traits::One;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn empty_data_includes_emit_halt() {
        let hs = find_hypotheses::<BigRational>(&bs(""), 11, WeightMode::Length).unwrap();
        assert!(hs.iter().any(|h| h.program.opcodes() == [Opcode::Emit, Opcode::Halt] && h.output == bs("0")));
    }

    #[test]
    fn no_hypothesis_for_one_at_small_k() {
        // Producing "1?" needs FLIP EMIT EMIT HALT or longer: at least 17 bits.
        let hs = find_hypotheses::<BigRational>(&bs("1"), 14, WeightMode::Length).unwrap();
        assert!(hs.is_empty());
        assert!(matches!(predict_next::<BigRational>(&bs("1"), 14, WeightMode::Length), Err(Error::NoHypotheses)));
    }

    #[test]
    fn hypotheses_rerun_identically() {
        for h in find_hypotheses::<f64>(&bs("0"), 14, WeightMode::Length).unwrap() {
            match run(&h.program, &BitString::new(), MachineConfig::with_fuel(h.gen_steps)) {
                ExecOutcome::Halted { output, steps, .. } => {
                    assert_eq!(output, h.output);
                    assert_eq!(steps, h.gen_steps);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn kraft_and_monotone() {
        let mut prev = BigRational::from_integer(0.into());
        for k in 11..=16 {
            let p = predict_next::<BigRational>(&bs(""), k, WeightMode::Length).unwrap();
            assert!(p.total_weight <= BigRational::one());
            assert!(p.total_weight >= prev);
            prev = p.total_weight;
        }
    }

    #[test]
    fn kt_weighting_never_exceeds_length_weighting() {
        let a = predict_next::<BigRational>(&bs("0"), 14, WeightMode::Length).unwrap();
        let b = predict_next::<BigRational>(&bs("0"), 14, WeightMode::Kt).unwrap();
        assert!(b.total_weight <= a.total_weight);
        assert_eq!(a.hypotheses.len(), b.hypotheses.len());
    }

    #[test]
    fn float_and_exact_agree() {
        let exact = predict_next::<BigRational>(&bs("0"), 14, WeightMode::Length).unwrap();
        let float = predict_next::<f64>(&bs("0"), 14, WeightMode::Length).unwrap();
        assert_eq!(Weight::to_f64(&exact.total_weight), float.total_weight);
        assert_eq!(Weight::to_f64(&exact.p1), float.p1);
    }

    #[test]
    fn json_has_exact_fractions() {
        let p = predict_next::<BigRational>(&bs(""), 11, WeightMode::Length).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["total_weight"]["den"], "512");
        assert_eq!(v["p1"]["num"], "0");
    }
}
