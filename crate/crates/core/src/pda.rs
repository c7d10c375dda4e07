//! Placement delivery arrays: storage, verification and the text format.
//!
//! A `(K, F, Z, S)` PDA is an `F x K` grid of stars and integer labels such
//! that every column holds exactly `Z` stars, the labels are exactly
//! `{1, ..., S}`, and any two cells sharing a label sit in distinct rows and
//! columns with stars at the two crossing cells.
//!
//! Rows and columns are 1-based throughout the public API.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A single cell of a PDA.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PdaEntry {
    Star,
    Label(u32),
}

impl PdaEntry {
    pub fn is_star(self) -> bool {
        matches!(self, PdaEntry::Star)
    }

    pub fn label(self) -> Option<u32> {
        match self {
            PdaEntry::Star => None,
            PdaEntry::Label(s) => Some(s),
        }
    }
}

impl fmt::Display for PdaEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PdaEntry::Star => f.write_str("*"),
            PdaEntry::Label(s) => write!(f, "{s}"),
        }
    }
}

/// Cell coordinates as `(row, column)`, both 1-based.
pub type Cell = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PdaError {
    #[error("array must have at least one row and one column")]
    EmptyArray,
    #[error("expected {expected} entries for a {rows}x{cols} grid, got {found}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        found: usize,
    },
    #[error("label 0 at {0:?}; labels are positive integers")]
    ZeroLabel(Cell),
    #[error("A1 violated: column {column} has {count} stars, expected {expected}")]
    A1Violation {
        column: usize,
        count: usize,
        expected: usize,
    },
    #[error("A2 violated: label {missing} is absent")]
    A2Violation { missing: u32 },
    #[error("A2 violated: array contains no integer labels")]
    NoLabels,
    #[error("A3 violated: label {label} at {first:?} and {second:?}")]
    A3Violation {
        label: u32,
        first: Cell,
        second: Cell,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: invalid token {token:?}")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: row has {found} entries, expected {expected}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("no rows found")]
    Empty,
}

/// Rectangular grid of [`PdaEntry`] values, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PdaArray {
    rows: usize,
    cols: usize,
    entries: Vec<PdaEntry>,
}

impl PdaArray {
    /// Builds an array from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<PdaEntry>) -> Result<Self, PdaError> {
        if rows == 0 || cols == 0 {
            return Err(PdaError::EmptyArray);
        }
        if entries.len() != rows * cols {
            return Err(PdaError::ShapeMismatch {
                rows,
                cols,
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if let Some(i) = entries.iter().position(|e| *e == PdaEntry::Label(0)) {
            return Err(PdaError::ZeroLabel((i / cols + 1, i % cols + 1)));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// An all-star grid.
    pub fn stars(rows: usize, cols: usize) -> Result<Self, PdaError> {
        Self::new(rows, cols, vec![PdaEntry::Star; rows * cols])
    }

    /// Builds from nested rows; `None` is a star.
    pub fn from_rows(rows: &[Vec<Option<u32>>]) -> Result<Self, PdaError> {
        let cols = rows.first().map_or(0, Vec::len);
        let entries: Vec<PdaEntry> = rows
            .iter()
            .flat_map(|r| r.iter().map(|e| e.map_or(PdaEntry::Star, PdaEntry::Label)))
            .collect();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(PdaError::ShapeMismatch {
                rows: rows.len(),
                cols,
                expected: rows.len() * cols,
                found: entries.len(),
            });
        }
        Self::new(rows.len(), cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at 1-based `(row, col)`.
    ///
    /// Panics when out of range.
    pub fn get(&self, row: usize, col: usize) -> PdaEntry {
        assert!(
            (1..=self.rows).contains(&row) && (1..=self.cols).contains(&col),
            "cell ({row}, {col}) outside {}x{} array",
            self.rows,
            self.cols
        );
        self.entries[(row - 1) * self.cols + (col - 1)]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, entry: PdaEntry) {
        self.entries[(row - 1) * self.cols + (col - 1)] = entry;
    }

    /// Iterates `((row, col), entry)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (Cell, PdaEntry)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(move |(i, e)| ((i / self.cols + 1, i % self.cols + 1), *e))
    }

    /// 1-based rows holding a star in column `col`, ascending.
    pub fn star_rows(&self, col: usize) -> Vec<usize> {
        (1..=self.rows)
            .filter(|&r| self.get(r, col).is_star())
            .collect()
    }

    /// Rows and labels of the integer entries in column `col`.
    pub fn labels_in_column(&self, col: usize) -> Vec<(usize, u32)> {
        (1..=self.rows)
            .filter_map(|r| self.get(r, col).label().map(|s| (r, s)))
            .collect()
    }

    /// Cells carrying each label, keyed by label, cells in row-major order.
    pub fn label_positions(&self) -> BTreeMap<u32, Vec<Cell>> {
        let mut map: BTreeMap<u32, Vec<Cell>> = BTreeMap::new();
        for (cell, e) in self.cells() {
            if let PdaEntry::Label(s) = e {
                map.entry(s).or_default().push(cell);
            }
        }
        map
    }

    pub fn max_label(&self) -> u32 {
        self.entries
            .iter()
            .filter_map(|e| e.label())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for PdaArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_pda_text(self))
    }
}

/// Parameters established by [`verify_pda`].
///
/// `k` counts columns and `f` counts rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PdaParams {
    pub k: usize,
    pub f: usize,
    pub z: usize,
    pub s: u32,
    pub g: Option<usize>,
    pub l: Option<usize>,
}

impl PdaParams {
    pub fn tuple(&self) -> (usize, usize, usize, u32) {
        (self.k, self.f, self.z, self.s)
    }
}

impl fmt::Display for PdaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.k, self.f, self.z, self.s)?;
        if let Some(g) = self.g {
            write!(f, ", g={g}")?;
        }
        if let Some(l) = self.l {
            write!(f, ", l={l}")?;
        }
        Ok(())
    }
}

/// Checks conditions A1, A2 and A3 and returns `(K, F, Z, S)`.
///
/// `g` is filled when the array is regular; `l` is left unset (see
/// [`analyze`]).
pub fn verify_pda(array: &PdaArray) -> Result<PdaParams, PdaError> {
    let z = array.star_rows(1).len();
    for col in 2..=array.cols() {
        let count = array.star_rows(col).len();
        if count != z {
            return Err(PdaError::A1Violation {
                column: col,
                count,
                expected: z,
            });
        }
    }

    let positions = array.label_positions();
    let s = array.max_label();
    if s == 0 {
        return Err(PdaError::NoLabels);
    }
    if let Some(missing) = (1..=s).find(|t| !positions.contains_key(t)) {
        return Err(PdaError::A2Violation { missing });
    }

    for (&label, cells) in &positions {
        for (i, &(r1, c1)) in cells.iter().enumerate() {
            for &(r2, c2) in &cells[i + 1..] {
                let crossed = r1 != r2
                    && c1 != c2
                    && array.get(r1, c2).is_star()
                    && array.get(r2, c1).is_star();
                if !crossed {
                    return Err(PdaError::A3Violation {
                        label,
                        first: (r1, c1),
                        second: (r2, c2),
                    });
                }
            }
        }
    }

    Ok(PdaParams {
        k: array.cols(),
        f: array.rows(),
        z,
        s,
        g: check_regularity(array),
        l: None,
    })
}

/// Runs [`verify_pda`] and additionally reports the smallest cyclic shift
/// `l` for which the array is l-cyclic, if any.
pub fn analyze(array: &PdaArray) -> Result<PdaParams, PdaError> {
    let mut params = verify_pda(array)?;
    if params.g.is_some() {
        params.l = (0..array.rows()).find(|&l| check_l_cyclic(array, l));
    }
    Ok(params)
}

/// Common multiplicity of every label, or `None` when multiplicities differ.
pub fn check_regularity(array: &PdaArray) -> Option<usize> {
    let positions = array.label_positions();
    let mut counts = positions.values().map(Vec::len);
    let g = counts.next()?;
    counts.all(|c| c == g).then_some(g)
}

/// First row of a cyclically consecutive star block in a column, or `None`
/// if the stars are not consecutive modulo the row count. Columns that are
/// all stars or star-free report `Some(1)`.
fn star_block_start(array: &PdaArray, col: usize) -> Option<usize> {
    let rows = array.rows();
    let stars = array.star_rows(col);
    if stars.is_empty() || stars.len() == rows {
        return Some(1);
    }
    let is_star = |r: usize| array.get(r, col).is_star();
    // The block starts at the unique star whose cyclic predecessor is not a star.
    let mut starts = stars
        .iter()
        .copied()
        .filter(|&r| !is_star(if r == 1 { rows } else { r - 1 }));
    let start = starts.next()?;
    if starts.next().is_some() {
        return None;
    }
    Some(start)
}

/// True iff every column's stars form one cyclically consecutive block and
/// each block is the previous column's shifted down by `l` rows.
pub fn check_l_cyclic(array: &PdaArray, l: usize) -> bool {
    let rows = array.rows();
    let z = array.star_rows(1).len();
    let mut prev: Option<usize> = None;
    for col in 1..=array.cols() {
        if array.star_rows(col).len() != z {
            return false;
        }
        let Some(start) = star_block_start(array, col) else {
            return false;
        };
        if let Some(p) = prev {
            if z != 0 && z != rows && start != (p - 1 + l) % rows + 1 {
                return false;
            }
        }
        prev = Some(start);
    }
    true
}

pub fn transpose(array: &PdaArray) -> PdaArray {
    let (rows, cols) = (array.cols(), array.rows());
    let entries = (1..=rows)
        .flat_map(|r| (1..=cols).map(move |c| (r, c)))
        .map(|(r, c)| array.get(c, r))
        .collect();
    PdaArray {
        rows,
        cols,
        entries,
    }
}

/// Parses whitespace-separated rows of `*` and positive integers.
///
/// Blank lines are ignored; line numbers in errors are 1-based physical
/// lines.
pub fn parse_pda_text(text: &str) -> Result<PdaArray, ParseError> {
    let mut entries = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(tokens.len()),
            Some(c) if c != tokens.len() => {
                return Err(ParseError::RaggedRow {
                    line: line_no,
                    expected: c,
                    found: tokens.len(),
                })
            }
            _ => {}
        }
        for tok in tokens {
            entries.push(parse_token(tok).ok_or_else(|| ParseError::InvalidToken {
                line: line_no,
                token: tok.to_string(),
            })?);
        }
        rows += 1;
    }
    let cols = cols.ok_or(ParseError::Empty)?;
    Ok(PdaArray {
        rows,
        cols,
        entries,
    })
}

fn parse_token(tok: &str) -> Option<PdaEntry> {
    if tok == "*" {
        return Some(PdaEntry::Star);
    }
    if !tok.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    match tok.parse::<u32>() {
        Ok(0) | Err(_) => None,
        Ok(s) => Some(PdaEntry::Label(s)),
    }
}

/// Canonical text: single spaces between tokens, one row per line, trailing
/// newline.
pub fn serialize_pda_text(array: &PdaArray) -> String {
    let mut out = String::with_capacity(array.rows() * array.cols() * 3);
    for r in 1..=array.rows() {
        for c in 1..=array.cols() {
            if c > 1 {
                out.push(' ');
            }
            out.push_str(&array.get(r, c).to_string());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(text: &str) -> PdaArray {
        parse_pda_text(text).unwrap()
    }

    const P2: &str = "* 6 12 10 5 *
* * 1 7 11 6
1 * * 2 8 12
7 2 * * 3 9
10 8 3 * * 4
5 11 9 4 * *
";

    #[test]
    fn verifies_consecutive_example() {
        let p = grid(P2);
        let params = verify_pda(&p).unwrap();
        assert_eq!(params.tuple(), (6, 6, 2, 12));
        assert_eq!(params.g, Some(2));
        assert!(check_l_cyclic(&p, 1));
        assert!(!check_l_cyclic(&p, 2));
        assert_eq!(analyze(&p).unwrap().l, Some(1));
    }

    #[test]
    fn minimal_pattern() {
        let p = grid("1 *\n* 1");
        assert_eq!(verify_pda(&p).unwrap().tuple(), (2, 2, 1, 1));
    }

    #[test]
    fn same_row_repeat_is_a3() {
        let p = grid("1 1\n* *");
        assert_eq!(
            verify_pda(&p),
            Err(PdaError::A3Violation {
                label: 1,
                first: (1, 1),
                second: (1, 2)
            })
        );
    }

    #[test]
    fn non_star_cross_is_a3() {
        let p = grid("1 2\n2 1");
        assert!(matches!(verify_pda(&p), Err(PdaError::A3Violation { .. })));
    }

    #[test]
    fn unequal_stars_is_a1() {
        let p = grid("* 1\n* *");
        assert_eq!(
            verify_pda(&p),
            Err(PdaError::A1Violation {
                column: 2,
                count: 1,
                expected: 2
            })
        );
    }

    #[test]
    fn label_gap_is_a2() {
        let p = grid("2 *\n* 2");
        assert_eq!(verify_pda(&p), Err(PdaError::A2Violation { missing: 1 }));
        assert_eq!(verify_pda(&grid("* *")), Err(PdaError::NoLabels));
    }

    #[test]
    fn regularity() {
        let p1 = grid("* * 1\n* 1 *\n1 * *");
        assert_eq!(check_regularity(&p1), Some(3));
        // labels {1, 1, 2}
        let irregular = grid("1 * 2\n* 1 *");
        assert_eq!(check_regularity(&irregular), None);
    }

    #[test]
    fn single_column_is_cyclic_for_any_shift() {
        let p = grid("*\n*\n1\n2");
        for l in 0..6 {
            assert!(check_l_cyclic(&p, l));
        }
        let wrapped = grid("*\n1\n2\n*");
        assert!(check_l_cyclic(&wrapped, 3));
        let split = grid("*\n1\n*\n2");
        assert!(!check_l_cyclic(&split, 0));
    }

    #[test]
    fn cyclic_check_ignores_labels() {
        let p = grid(P2);
        let relabeled = PdaArray::new(
            6,
            6,
            p.cells()
                .map(|(_, e)| match e {
                    PdaEntry::Star => PdaEntry::Star,
                    PdaEntry::Label(s) => PdaEntry::Label(13 - s),
                })
                .collect(),
        )
        .unwrap();
        assert!(check_l_cyclic(&relabeled, 1));
        assert_eq!(verify_pda(&relabeled).unwrap().tuple(), (6, 6, 2, 12));
    }

    #[test]
    fn transpose_swaps_dimensions() {
        let p1 = grid("* * 1\n* 1 *\n1 * *");
        assert_eq!(transpose(&p1), p1);
        let a = grid("1 * 2\n* 1 *");
        let t = transpose(&a);
        assert_eq!((t.rows(), t.cols()), (3, 2));
        assert_eq!(t.get(3, 1), PdaEntry::Label(2));
        assert_eq!(transpose(&t), a);
    }

    #[test]
    fn parse_and_serialize() {
        let p = grid("* 1\n1 *");
        assert_eq!(p.get(1, 2), PdaEntry::Label(1));
        assert_eq!(p.get(2, 1), PdaEntry::Label(1));
        assert!(p.get(1, 1).is_star());
        let p1 = grid("*   *  1\n* 1 *\n\n1 * *   \n");
        assert_eq!(serialize_pda_text(&p1), "* * 1\n* 1 *\n1 * *\n");
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_pda_text("* x"),
            Err(ParseError::InvalidToken {
                line: 1,
                token: "x".into()
            })
        );
        assert_eq!(
            parse_pda_text("* 1\n0 *"),
            Err(ParseError::InvalidToken {
                line: 2,
                token: "0".into()
            })
        );
        assert!(matches!(
            parse_pda_text("* 1\n-1 *"),
            Err(ParseError::InvalidToken { line: 2, .. })
        ));
        assert!(matches!(
            parse_pda_text("+1 *"),
            Err(ParseError::InvalidToken { line: 1, .. })
        ));
        assert_eq!(
            parse_pda_text("* 1\n1"),
            Err(ParseError::RaggedRow {
                line: 2,
                expected: 2,
                found: 1
            })
        );
        assert_eq!(parse_pda_text("\n  \n"), Err(ParseError::Empty));
    }

    #[test]
    fn zero_label_rejected_on_construction() {
        assert_eq!(
            PdaArray::new(1, 2, vec![PdaEntry::Star, PdaEntry::Label(0)]),
            Err(PdaError::ZeroLabel((1, 2)))
        );
    }
}
