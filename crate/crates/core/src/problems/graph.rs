//! Undirected graphs, 3-coloring witnesses and the 3-coloring verifier.

use std::fmt::Write as _;

use serde::Serialize;

use super::Verdict;
use crate::bits::{index_width, BitReader, BitString};
use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Rejects self-loops and out-of-range endpoints.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, String> {
        for &(u, v) in &edges {
            if u == v {
                return Err(format!("self-loop on vertex {u}"));
            }
            if u >= n || v >= n {
                return Err(format!("edge ({u}, {v}) out of range for {n} vertices"));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `γ(n+1) γ(m+1)` then each edge as two fixed-width vertex indices.
    pub fn encode(&self) -> BitString {
        let mut s = BitString::new();
        s.push_gamma(self.n as u64 + 1);
        s.push_gamma(self.edges.len() as u64 + 1);
        let w = index_width(self.n);
        for &(u, v) in &self.edges {
            s.push_uint(u as u64, w);
            s.push_uint(v as u64, w);
        }
        s
    }

    pub fn decode(bits: &BitString) -> Option<Self> {
        let mut r = BitReader::new(bits);
        let n = r.read_gamma()? as usize - 1;
        let m = r.read_gamma()? as usize - 1;
        let w = index_width(n);
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let u = r.read_uint(w)? as usize;
            let v = r.read_uint(w)? as usize;
            edges.push((u, v));
        }
        if r.remaining() != 0 {
            return None;
        }
        Graph::new(n, edges).ok()
    }

    /// DIMACS-like edge list: `p edge <n> <m>` then `e <u> <v>` lines with
    /// 1-based vertices; `c` lines are comments.
    pub fn parse_edge_list(text: &str) -> Result<Self, ParseError> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.first().copied() {
                None | Some("c") => continue,
                Some("p") => {
                    if header.is_some() {
                        return Err(ParseError::new(lineno, 1, "duplicate problem line"));
                    }
                    if fields.len() != 4 || fields[1] != "edge" {
                        return Err(ParseError::new(lineno, 1, "expected `p edge <n> <m>`"));
                    }
                    header = Some((parse_field(fields[2], line, lineno)?, parse_field(fields[3], line, lineno)?));
                }
                Some("e") => {
                    let (n, _) = header.ok_or_else(|| ParseError::new(lineno, 1, "edge before problem line"))?;
                    if fields.len() != 3 {
                        return Err(ParseError::new(lineno, 1, "expected `e <u> <v>`"));
                    }
                    let u: usize = parse_field(fields[1], line, lineno)?;
                    let v: usize = parse_field(fields[2], line, lineno)?;
                    for (f, x) in [(fields[1], u), (fields[2], v)] {
                        if x == 0 || x > n {
                            return Err(ParseError::new(lineno, column_of(line, f), format!("vertex {x} not in 1..={n}")));
                        }
                    }
                    if u == v {
                        return Err(ParseError::new(lineno, 1, format!("self-loop on vertex {u}")));
                    }
                    edges.push((u - 1, v - 1));
                }
                Some(other) => {
                    return Err(ParseError::new(lineno, 1, format!("unknown line type {other:?}")));
                }
            }
        }
        let (n, m) = header.ok_or_else(|| ParseError::new(1, 1, "missing `p edge` line"))?;
        if edges.len() != m {
            return Err(ParseError::new(1, 1, format!("header declares {m} edges, found {}", edges.len())));
        }
        Graph::new(n, edges).map_err(|e| ParseError::new(1, 1, e))
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("p edge {} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "e {} {}", u + 1, v + 1);
        }
        s
    }
}

pub(crate) fn parse_field<T: std::str::FromStr>(field: &str, line: &str, lineno: usize) -> Result<T, ParseError> {
    field.parse().map_err(|_| ParseError::new(lineno, column_of(line, field), format!("invalid number {field:?}")))
}

pub(crate) fn column_of(line: &str, field: &str) -> usize {
    // `field` is a subslice of `line`
    (field.as_ptr() as usize).saturating_sub(line.as_ptr() as usize) + 1
}

/// Two bits per vertex, most significant first: 0 = `00`, 1 = `01`, 2 = `10`.
pub fn encode_coloring(colors: &[u8]) -> BitString {
    let mut s = BitString::new();
    for &c in colors {
        assert!(c < 3, "color out of range");
        s.push_uint(u64::from(c), 2);
    }
    s
}

/// Inverse of [`encode_coloring`]; `None` on a wrong length or a `11` field.
pub fn decode_coloring(n: usize, w: &BitString) -> Option<Vec<u8>> {
    if w.len() != 2 * n {
        return None;
    }
    let mut r = BitReader::new(w);
    (0..n).map(|_| r.read_uint(2).map(|v| v as u8).filter(|&c| c < 3)).collect()
}

/// Accepts proper 3-colorings. Cost: `n` (decode) + `|E|` (edge checks) + 1.
pub fn verify_3col(g: &Graph, w: &BitString) -> Verdict {
    let mut steps = 0u64;
    let mut ok = w.len() == 2 * g.n;
    let mut colors = vec![0u8; g.n];
    for (v, slot) in colors.iter_mut().enumerate() {
        steps += 1;
        if ok {
            let c = u8::from(w.get(2 * v).unwrap_or(false)) << 1 | u8::from(w.get(2 * v + 1).unwrap_or(false));
            ok &= c < 3;
            *slot = c;
        }
    }
    for &(u, v) in &g.edges {
        steps += 1;
        ok &= colors[u] != colors[v];
    }
    steps += 1;
    Verdict { accepted: ok, steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn triangle_examples() {
        let k3 = Graph::complete(3);
        assert_eq!(verify_3col(&k3, &encode_coloring(&[0, 1, 2])), Verdict { accepted: true, steps: 7 });
        assert!(!verify_3col(&k3, &encode_coloring(&[0, 0, 2])).accepted);
        // value 3 rejects with full cost
        let bad: BitString = "110110".parse().unwrap();
        assert_eq!(verify_3col(&k3, &bad), Verdict { accepted: false, steps: 7 });
        // wrong length rejects with full cost
        let short: BitString = "0001".parse().unwrap();
        assert_eq!(verify_3col(&k3, &short), Verdict { accepted: false, steps: 7 });
    }

    #[test]
    fn k4_rejects_everything() {
        let k4 = Graph::complete(4);
        for w in BitString::all_of_len(8) {
            let v = verify_3col(&k4, &w);
            assert!(!v.accepted);
            assert_eq!(v.steps, 4 + 6 + 1);
        }
    }

    #[test]
    fn k3_accepts_exactly_the_six_permutations() {
        let k3 = Graph::complete(3);
        let mut accepted = 0;
        for a in 0..3u8 {
            for b in 0..3u8 {
                for c in 0..3u8 {
                    let proper = a != b && a != c && b != c;
                    assert_eq!(verify_3col(&k3, &encode_coloring(&[a, b, c])).accepted, proper);
                    accepted += usize::from(proper);
                }
            }
        }
        assert_eq!(accepted, 6);
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(2, vec![(0, 0)]).is_err());
        assert!(Graph::new(2, vec![(0, 2)]).is_err());
    }

    #[test]
    fn edge_list_parse() {
        let g = Graph::parse_edge_list("c triangle\np edge 3 3\ne 1 2\ne 1 3\ne 2 3\n").unwrap();
        assert_eq!(g, Graph::complete(3));
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
        let err = Graph::parse_edge_list("p edge 3 1\ne 1 9\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 5));
        assert!(Graph::parse_edge_list("e 1 2\n").is_err());
        assert!(Graph::parse_edge_list("p edge 3 2\ne 1 2\n").is_err());
    }

    #[test]
    fn triangle_encoding() {
        assert_eq!(Graph::complete(3).encode().to_string(), "0010000100000100100110");
    }

    proptest! {
        #[test]
        fn graph_codec_roundtrip(n in 1usize..9, raw in proptest::collection::vec((0usize..9, 0usize..9), 0..12)) {
            let edges: Vec<_> = raw.into_iter().map(|(u, v)| (u % n, v % n)).filter(|(u, v)| u != v).collect();
            let g = Graph::new(n, edges).unwrap();
            prop_assert_eq!(Graph::decode(&g.encode()), Some(g));
        }

        #[test]
        fn coloring_codec_roundtrip(colors in proptest::collection::vec(0u8..3, 0..10)) {
            prop_assert_eq!(decode_coloring(colors.len(), &encode_coloring(&colors)), Some(colors));
        }
    }
}
