//! Square Wang tiling instances, their verifier, text format, and the
//! backtracking solver used as an oracle.
//!
//! Rows are numbered from the south: row 0 is the bottom row, and the north
//! edge of `(r, c)` meets the south edge of `(r + 1, c)`. Witnesses list
//! tile indices row-major from `(0, 0)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::graph::parse_field;
use super::Verdict;
use crate::bits::{index_width, BitReader, BitString};
use crate::error::{Error, ParseError};

pub const NORTH: usize = 0;
pub const EAST: usize = 1;
pub const SOUTH: usize = 2;
pub const WEST: usize = 3;

/// Edge colors in (north, east, south, west) order.
pub type Tile = [u32; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Pin {
    pub row: usize,
    pub col: usize,
    pub tile: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TilingInstance {
    n: usize,
    tiles: Vec<Tile>,
    num_colors: u32,
    border_color: u32,
    pinned: Vec<Pin>,
}

impl TilingInstance {
    pub fn new(n: usize, tiles: Vec<Tile>, num_colors: u32, border_color: u32, pinned: Vec<Pin>) -> Result<Self, String> {
        if n == 0 {
            return Err("grid side must be positive".into());
        }
        if tiles.is_empty() {
            return Err("tile set is empty".into());
        }
        if border_color >= num_colors {
            return Err(format!("border color {border_color} not below {num_colors}"));
        }
        if let Some(t) = tiles.iter().find(|t| t.iter().any(|&c| c >= num_colors)) {
            return Err(format!("tile {t:?} uses a color not below {num_colors}"));
        }
        for p in &pinned {
            if p.row >= n || p.col >= n || p.tile >= tiles.len() {
                return Err(format!("pin {p:?} out of range"));
            }
        }
        Ok(Self { n, tiles, num_colors, border_color, pinned })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn num_colors(&self) -> u32 {
        self.num_colors
    }

    pub fn border_color(&self) -> u32 {
        self.border_color
    }

    pub fn pinned(&self) -> &[Pin] {
        &self.pinned
    }

    /// Bits per tile index in a witness.
    pub fn index_bits(&self) -> usize {
        index_width(self.tiles.len())
    }

    pub fn encode_placement(&self, placement: &[usize]) -> BitString {
        let w = self.index_bits();
        let mut s = BitString::new();
        for &t in placement {
            s.push_uint(t as u64, w);
        }
        s
    }

    /// `None` unless `w` holds exactly `n²` in-range indices.
    pub fn decode_placement(&self, w: &BitString) -> Option<Vec<usize>> {
        let width = self.index_bits();
        if w.len() != self.n * self.n * width {
            return None;
        }
        let mut r = BitReader::new(w);
        (0..self.n * self.n).map(|_| r.read_uint(width).map(|v| v as usize).filter(|&t| t < self.tiles.len())).collect()
    }

    /// Instance bits: `γ(n) γ(tiles) γ(colors)`, the border color, each tile's
    /// four colors, then `γ(pins+1)` and `(row, col, tile)` triples, all
    /// fixed-width.
    pub fn encode(&self) -> BitString {
        let cw = index_width(self.num_colors as usize);
        let nw = index_width(self.n);
        let tw = self.index_bits();
        let mut s = BitString::new();
        s.push_gamma(self.n as u64);
        s.push_gamma(self.tiles.len() as u64);
        s.push_gamma(u64::from(self.num_colors));
        s.push_uint(u64::from(self.border_color), cw);
        for t in &self.tiles {
            for &c in t {
                s.push_uint(u64::from(c), cw);
            }
        }
        s.push_gamma(self.pinned.len() as u64 + 1);
        for p in &self.pinned {
            s.push_uint(p.row as u64, nw);
            s.push_uint(p.col as u64, nw);
            s.push_uint(p.tile as u64, tw);
        }
        s
    }

    pub fn decode(bits: &BitString) -> Option<Self> {
        let mut r = BitReader::new(bits);
        let n = r.read_gamma()? as usize;
        let count = r.read_gamma()? as usize;
        let num_colors = u32::try_from(r.read_gamma()?).ok()?;
        let cw = index_width(num_colors as usize);
        let nw = index_width(n);
        let tw = index_width(count);
        let border = r.read_uint(cw)? as u32;
        let mut tiles = Vec::with_capacity(count);
        for _ in 0..count {
            let mut t = [0u32; 4];
            for c in &mut t {
                *c = r.read_uint(cw)? as u32;
            }
            tiles.push(t);
        }
        let pins = r.read_gamma()? as usize - 1;
        let mut pinned = Vec::with_capacity(pins);
        for _ in 0..pins {
            pinned.push(Pin { row: r.read_uint(nw)? as usize, col: r.read_uint(nw)? as usize, tile: r.read_uint(tw)? as usize });
        }
        if r.remaining() != 0 {
            return None;
        }
        TilingInstance::new(n, tiles, num_colors, border, pinned).ok()
    }

    /// Line-oriented text format:
    ///
    /// ```text
    /// # comment
    /// <n> <tiles> <colors>
    /// border <color>
    /// <north> <east> <south> <west>      (one line per tile)
    /// pin <row> <col> <tile>             (zero or more)
    /// ```
    pub fn parse_text(text: &str) -> Result<Self, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l, l.split('#').next().unwrap_or("")))
            .filter(|(_, _, body)| !body.trim().is_empty());

        let (lineno, line, body) = lines.next().ok_or_else(|| ParseError::new(1, 1, "missing header"))?;
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.len() != 3 {
            return Err(ParseError::new(lineno, 1, "expected header `<n> <tiles> <colors>`"));
        }
        let n: usize = parse_field(f[0], line, lineno)?;
        let count: usize = parse_field(f[1], line, lineno)?;
        let colors: u32 = parse_field(f[2], line, lineno)?;

        let (lineno, line, body) = lines.next().ok_or_else(|| ParseError::new(lineno + 1, 1, "missing border line"))?;
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.len() != 2 || f[0] != "border" {
            return Err(ParseError::new(lineno, 1, "expected `border <color>`"));
        }
        let border: u32 = parse_field(f[1], line, lineno)?;

        let mut tiles = Vec::with_capacity(count);
        let mut pinned = Vec::new();
        let mut last = lineno;
        for (lineno, line, body) in lines {
            last = lineno;
            let f: Vec<&str> = body.split_whitespace().collect();
            if f[0] == "pin" {
                if f.len() != 4 {
                    return Err(ParseError::new(lineno, 1, "expected `pin <row> <col> <tile>`"));
                }
                pinned.push(Pin {
                    row: parse_field(f[1], line, lineno)?,
                    col: parse_field(f[2], line, lineno)?,
                    tile: parse_field(f[3], line, lineno)?,
                });
                continue;
            }
            if !pinned.is_empty() {
                return Err(ParseError::new(lineno, 1, "tile after pin lines"));
            }
            if f.len() != 4 {
                return Err(ParseError::new(lineno, 1, "expected four edge colors"));
            }
            let mut t = [0u32; 4];
            for (slot, field) in t.iter_mut().zip(&f) {
                *slot = parse_field(field, line, lineno)?;
            }
            tiles.push(t);
        }
        if tiles.len() != count {
            return Err(ParseError::new(last, 1, format!("header declares {count} tiles, found {}", tiles.len())));
        }
        TilingInstance::new(n, tiles, colors, border, pinned).map_err(|e| ParseError::new(last, 1, e))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\nborder {}\n", self.n, self.tiles.len(), self.num_colors, self.border_color);
        for t in &self.tiles {
            let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], t[3]);
        }
        for p in &self.pinned {
            let _ = writeln!(s, "pin {} {} {}", p.row, p.col, p.tile);
        }
        s
    }
}

/// Accepts valid placements. Cost: `n²` (decode) + `2n(n-1)` (adjacencies)
/// + `4n` (border edges) + `|pinned|` + 1.
pub fn verify_tiling(t: &TilingInstance, w: &BitString) -> Verdict {
    let n = t.n;
    let mut steps = 0u64;
    let width = t.index_bits();
    let mut ok = w.len() == n * n * width;
    let mut grid = vec![0usize; n * n];
    let mut reader = BitReader::new(w);
    for cell in grid.iter_mut() {
        steps += 1;
        if ok {
            match reader.read_uint(width).map(|v| v as usize) {
                Some(idx) if idx < t.tiles.len() => *cell = idx,
                _ => ok = false,
            }
        }
    }
    let tile = |r: usize, c: usize| &t.tiles[grid[r * n + c]];
    for r in 0..n {
        for c in 0..n - 1 {
            steps += 1;
            ok &= tile(r, c)[EAST] == tile(r, c + 1)[WEST];
        }
    }
    for r in 0..n - 1 {
        for c in 0..n {
            steps += 1;
            ok &= tile(r, c)[NORTH] == tile(r + 1, c)[SOUTH];
        }
    }
    let b = t.border_color;
    for i in 0..n {
        steps += 4;
        ok &= tile(0, i)[SOUTH] == b && tile(n - 1, i)[NORTH] == b && tile(i, 0)[WEST] == b && tile(i, n - 1)[EAST] == b;
    }
    for p in &t.pinned {
        steps += 1;
        ok &= grid[p.row * n + p.col] == p.tile;
    }
    steps += 1;
    Verdict { accepted: ok, steps }
}

/// Backtracking search for the row-major lexicographically first valid
/// placement. Gives up with [`Error::SearchOverflow`] after `node_limit`
/// tile placements.
pub fn solve_tiling_bruteforce(t: &TilingInstance, node_limit: u64) -> Result<Option<Vec<usize>>, Error> {
    let n = t.n;
    let cells = n * n;
    let b = t.border_color;

    let mut by_west_south: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (i, tile) in t.tiles.iter().enumerate() {
        by_west_south.entry((tile[WEST], tile[SOUTH])).or_default().push(i);
    }
    let mut pins: Vec<Option<usize>> = vec![None; cells];
    for p in &t.pinned {
        let slot = &mut pins[p.row * n + p.col];
        match slot {
            Some(prev) if *prev != p.tile => return Ok(None),
            _ => *slot = Some(p.tile),
        }
    }

    let empty: Vec<usize> = Vec::new();
    let mut placed: Vec<usize> = Vec::with_capacity(cells);
    let mut cursor: Vec<usize> = Vec::with_capacity(cells);
    let mut nodes = 0u64;

    let candidates = |placed: &[usize]| -> &Vec<usize> {
        let pos = placed.len();
        let (r, c) = (pos / n, pos % n);
        let west = if c == 0 { b } else { t.tiles[placed[pos - 1]][EAST] };
        let south = if r == 0 { b } else { t.tiles[placed[pos - n]][NORTH] };
        by_west_south.get(&(west, south)).unwrap_or(&empty)
    };
    let fits = |pos: usize, idx: usize| -> bool {
        let (r, c) = (pos / n, pos % n);
        let tile = &t.tiles[idx];
        (c + 1 < n || tile[EAST] == b) && (r + 1 < n || tile[NORTH] == b) && pins[pos].is_none_or(|p| p == idx)
    };

    let mut next_try = 0usize;
    loop {
        if placed.len() == cells {
            return Ok(Some(placed));
        }
        let pos = placed.len();
        let list = candidates(&placed);
        match (next_try..list.len()).find(|&j| fits(pos, list[j])) {
            Some(j) => {
                nodes += 1;
                if nodes > node_limit {
                    return Err(Error::SearchOverflow(node_limit));
                }
                placed.push(list[j]);
                cursor.push(j);
                next_try = 0;
            }
            None => {
                if placed.pop().is_none() {
                    return Ok(None);
                }
                next_try = cursor.pop().expect("cursor tracks placed") + 1;
            }
        }
    }
}
