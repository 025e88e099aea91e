//! CNF formulas and the satisfying-assignment verifier.

use std::fmt::Write as _;

use serde::Serialize;

use super::graph::{column_of, parse_field};
use super::Verdict;
use crate::bits::{index_width, BitReader, BitString};
use crate::error::ParseError;

/// Clauses are lists of non-zero literals; `v` means variable `v` (1-based)
/// is true and `-v` that it is false.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, String> {
        for clause in &clauses {
            if clause.is_empty() {
                return Err("empty clause".into());
            }
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(format!("literal {lit} out of range for {num_vars} variables"));
                }
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn literal_count(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    /// Truth value of the formula under `assignment[v - 1]`.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&lit| assignment[lit.unsigned_abs() as usize - 1] == (lit > 0)))
    }

    /// `γ(vars+1) γ(clauses+1)`, then per clause `γ(len)` followed by
    /// `(sign, var-1)` pairs with a fixed-width variable index.
    pub fn encode(&self) -> BitString {
        let mut s = BitString::new();
        s.push_gamma(self.num_vars as u64 + 1);
        s.push_gamma(self.clauses.len() as u64 + 1);
        let w = index_width(self.num_vars);
        for clause in &self.clauses {
            s.push_gamma(clause.len() as u64);
            for &lit in clause {
                s.push(lit < 0);
                s.push_uint(u64::from(lit.unsigned_abs() - 1), w);
            }
        }
        s
    }

    pub fn decode(bits: &BitString) -> Option<Self> {
        let mut r = BitReader::new(bits);
        let num_vars = r.read_gamma()? as usize - 1;
        let count = r.read_gamma()? as usize - 1;
        let w = index_width(num_vars);
        let mut clauses = Vec::with_capacity(count);
        for _ in 0..count {
            let len = r.read_gamma()? as usize;
            let mut clause = Vec::with_capacity(len);
            for _ in 0..len {
                let neg = r.read_bit()?;
                let var = r.read_uint(w)? as i32 + 1;
                clause.push(if neg { -var } else { var });
            }
            clauses.push(clause);
        }
        if r.remaining() != 0 {
            return None;
        }
        CnfFormula::new(num_vars, clauses).ok()
    }

    /// DIMACS `cnf`: `p cnf <vars> <clauses>`, clauses as 0-terminated
    /// literal lists that may span lines, `c` comment lines.
    pub fn parse_dimacs(text: &str) -> Result<Self, ParseError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let trimmed = line.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
                continue;
            }
            if trimmed.starts_with('p') {
                let fields: Vec<&str> = trimmed.split_whitespace().collect();
                if header.is_some() || fields.len() != 4 || fields[1] != "cnf" {
                    return Err(ParseError::new(lineno, 1, "expected a single `p cnf <vars> <clauses>` line"));
                }
                header = Some((parse_field(fields[2], line, lineno)?, parse_field(fields[3], line, lineno)?));
                continue;
            }
            let (vars, _) = header.ok_or_else(|| ParseError::new(lineno, 1, "clause before problem line"))?;
            for field in line.split_whitespace() {
                let lit: i32 = parse_field(field, line, lineno)?;
                if lit == 0 {
                    if current.is_empty() {
                        return Err(ParseError::new(lineno, column_of(line, field), "empty clause"));
                    }
                    clauses.push(std::mem::take(&mut current));
                } else if lit.unsigned_abs() as usize > vars {
                    return Err(ParseError::new(lineno, column_of(line, field), format!("variable {lit} exceeds {vars}")));
                } else {
                    current.push(lit);
                }
            }
        }
        let (vars, count) = header.ok_or_else(|| ParseError::new(1, 1, "missing `p cnf` line"))?;
        if !current.is_empty() {
            clauses.push(current);
        }
        if clauses.len() != count {
            return Err(ParseError::new(1, 1, format!("header declares {count} clauses, found {}", clauses.len())));
        }
        CnfFormula::new(vars, clauses).map_err(|e| ParseError::new(1, 1, e))
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                let _ = write!(s, "{lit} ");
            }
            s.push_str("0\n");
        }
        s
    }
}

/// Accepts satisfying assignments given as `num_vars` bits (variable 1
/// first). Cost: `num_vars` + total literal count + 1.
pub fn verify_sat(f: &CnfFormula, w: &BitString) -> Verdict {
    let mut steps = 0u64;
    let mut ok = w.len() == f.num_vars;
    let mut assignment = vec![false; f.num_vars];
    for (i, slot) in assignment.iter_mut().enumerate() {
        steps += 1;
        *slot = w.get(i).unwrap_or(false);
    }
    for clause in &f.clauses {
        let mut sat = false;
        for &lit in clause {
            steps += 1;
            sat |= assignment[lit.unsigned_abs() as usize - 1] == (lit > 0);
        }
        ok &= sat;
    }
    steps += 1;
    Verdict { accepted: ok, steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn examples() {
        let or = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        assert_eq!(verify_sat(&or, &bs("10")), Verdict { accepted: true, steps: 2 + 2 + 1 });
        let contradiction = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        for w in ["0", "1"] {
            assert_eq!(verify_sat(&contradiction, &bs(w)), Verdict { accepted: false, steps: 4 });
        }
        assert!(!verify_sat(&or, &bs("1")).accepted);
    }

    #[test]
    fn matches_truth_table() {
        let f = CnfFormula::new(3, vec![vec![1, 2], vec![-1, 3], vec![-2, -3], vec![1, -3]]).unwrap();
        let mut accepted = Vec::new();
        for w in BitString::all_of_len(3) {
            let assignment: Vec<bool> = w.iter().collect();
            let truth = f.eval(&assignment);
            assert_eq!(verify_sat(&f, &w).accepted, truth);
            if truth {
                accepted.push(w.to_string());
            }
        }
        assert_eq!(accepted, vec!["010", "101"]);
    }

    #[test]
    fn dimacs_parse() {
        let f = CnfFormula::parse_dimacs("c x\np cnf 2 2\n1 -2 0\n2\n0\n").unwrap();
        assert_eq!(f.clauses(), &[vec![1, -2], vec![2]]);
        assert_eq!(CnfFormula::parse_dimacs(&f.to_dimacs()).unwrap(), f);
        let err = CnfFormula::parse_dimacs("p cnf 2 1\n1 x 0\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert!(CnfFormula::parse_dimacs("p cnf 1 1\n2 0\n").is_err());
    }

    proptest! {
        #[test]
        fn codec_roundtrip(vars in 1usize..6, raw in proptest::collection::vec(proptest::collection::vec((1i32..6, any::<bool>()), 1..4), 0..5)) {
            let clauses = raw.into_iter()
                .map(|c| c.into_iter().map(|(v, neg)| { let v = (v - 1) % vars as i32 + 1; if neg { -v } else { v } }).collect())
                .collect();
            let f = CnfFormula::new(vars, clauses).unwrap();
            prop_assert_eq!(CnfFormula::decode(&f.encode()), Some(f));
        }
    }
}
