//! Sparse GF(2) matrices, their Tanner-graph view, alist I/O and short-cycle
//! enumeration.
//!
//! Bits are stored as `u8` holding 0 or 1. All indices are 0-based; the alist
//! reader and writer translate to and from the 1-based file convention.

use std::fmt::Write as _;

use crate::error::{check_len, Error, Result};

/// A binary matrix stored as sorted row and column supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl SparseBinaryMatrix {
    /// Builds a matrix from its row supports. Indices are sorted; duplicates
    /// and out-of-range columns are rejected.
    pub fn from_rows(n_rows: usize, n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        check_len(n_rows, rows.len())?;
        let mut rows = rows;
        let mut cols = vec![Vec::new(); n_cols];
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!("duplicate column in row {r}")));
            }
            for &c in row.iter() {
                if c >= n_cols {
                    return Err(Error::InvalidInput(format!(
                        "column index {c} out of range in row {r}"
                    )));
                }
                cols[c].push(r);
            }
        }
        Ok(Self { n_rows, n_cols, rows, cols })
    }

    /// Builds a matrix from its column supports.
    pub fn from_cols(n_rows: usize, n_cols: usize, cols: Vec<Vec<usize>>) -> Result<Self> {
        check_len(n_cols, cols.len())?;
        Ok(Self::from_rows(n_cols, n_rows, cols)?.transpose())
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, rows: vec![Vec::new(); n_rows], cols: vec![Vec::new(); n_cols] }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].binary_search(&c).is_ok()
    }

    pub fn transpose(&self) -> Self {
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        check_len(self.n_rows, other.n_rows)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|&c| c + self.n_cols)).collect())
            .collect();
        Self::from_rows(self.n_rows, self.n_cols + other.n_cols, rows)
    }

    /// Columns `start..end` as a new matrix.
    pub fn column_slice(&self, start: usize, end: usize) -> Self {
        let cols = self.cols[start..end].to_vec();
        Self::from_cols(self.n_rows, end - start, cols).expect("slice of a valid matrix")
    }

    /// Checks that row and column supports describe the same incidences.
    pub fn is_consistent(&self) -> bool {
        if self.rows.len() != self.n_rows || self.cols.len() != self.n_cols {
            return false;
        }
        let mut rebuilt = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &c in row {
                if c >= self.n_cols {
                    return false;
                }
                rebuilt[c].push(r);
            }
        }
        rebuilt == self.cols
    }

    pub fn tanner(&self) -> TannerGraph<'_> {
        TannerGraph { h: self }
    }
}

/// Bipartite view of a parity-check matrix: variables are columns, checks are
/// rows.
#[derive(Debug, Clone, Copy)]
pub struct TannerGraph<'a> {
    h: &'a SparseBinaryMatrix,
}

impl<'a> TannerGraph<'a> {
    pub fn matrix(&self) -> &'a SparseBinaryMatrix {
        self.h
    }

    pub fn n_variables(&self) -> usize {
        self.h.n_cols
    }

    pub fn n_checks(&self) -> usize {
        self.h.n_rows
    }

    pub fn variable_degree(&self, v: usize) -> usize {
        self.h.cols[v].len()
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.h.rows[c].len()
    }

    pub fn variable_degrees(&self) -> Vec<usize> {
        self.h.cols.iter().map(Vec::len).collect()
    }

    pub fn check_degrees(&self) -> Vec<usize> {
        self.h.rows.iter().map(Vec::len).collect()
    }

    /// Checks adjacent to variable `v`.
    pub fn checks_of(&self, v: usize) -> &'a [usize] {
        &self.h.cols[v]
    }

    /// Variables adjacent to check `c`.
    pub fn variables_of(&self, c: usize) -> &'a [usize] {
        &self.h.rows[c]
    }

    pub fn edge_count(&self) -> usize {
        self.h.edge_count()
    }

    /// See [`enumerate_short_cycles`].
    pub fn short_cycles(&self, through_variable: usize, max_length: usize) -> Result<Vec<Cycle>> {
        enumerate_short_cycles(*self, through_variable, max_length)
    }
}

/// `H x` over GF(2).
pub fn syndrome(h: &SparseBinaryMatrix, x: &[u8]) -> Result<Vec<u8>> {
    check_len(h.n_cols, x.len())?;
    Ok(h.rows.iter().map(|row| row.iter().fold(0u8, |acc, &c| acc ^ (x[c] & 1))).collect())
}

/// True when `x` has zero syndrome. Panics on length mismatch.
pub fn is_codeword(h: &SparseBinaryMatrix, x: &[u8]) -> bool {
    assert_eq!(h.n_cols, x.len(), "word length does not match matrix");
    h.rows.iter().all(|row| row.iter().fold(0u8, |acc, &c| acc ^ (x[c] & 1)) == 0)
}

// ---------------------------------------------------------------------------
// alist
// ---------------------------------------------------------------------------

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("expected a nonnegative integer, found {tok:?}"),
            })
        })
        .collect()
}

/// Parses an index list line: `degree` 1-based indices in `1..=bound`, then
/// optional zero padding up to `max_degree` entries.
fn parse_index_line(
    line: &str,
    lineno: usize,
    degree: usize,
    max_degree: usize,
    bound: usize,
) -> Result<Vec<usize>> {
    let nums = parse_numbers(line, lineno)?;
    if nums.len() != degree && nums.len() != max_degree {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected {degree} indices (or {max_degree} padded), found {}", nums.len()),
        });
    }
    let (idx, pad) = nums.split_at(degree.min(nums.len()));
    if pad.iter().any(|&p| p != 0) {
        return Err(Error::Parse { line: lineno, msg: "nonzero entry in padding".into() });
    }
    let mut out = Vec::with_capacity(degree);
    for &i in idx {
        if i == 0 || i > bound {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("index {i} out of range 1..={bound}"),
            });
        }
        out.push(i - 1);
    }
    let mut sorted = out.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Parse { line: lineno, msg: "duplicate index".into() });
    }
    Ok(sorted)
}

/// Parses a matrix in alist format.
///
/// Both the column lists and the row lists are read, and the two must agree
/// incidence for incidence.
pub fn load_alist(text: &str) -> Result<SparseBinaryMatrix> {
    // Lines are positional: an empty index list is an empty line.
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse { line: 0, msg: format!("unexpected end of input, expected {what}") })
    };

    let (ln, l) = next("dimensions")?;
    let dims = parse_numbers(l, ln)?;
    let [n, m] = dims[..] else {
        return Err(Error::Parse { line: ln, msg: "expected \"N M\"".into() });
    };
    let (ln, l) = next("maximum degrees")?;
    let maxes = parse_numbers(l, ln)?;
    let [max_col, max_row] = maxes[..] else {
        return Err(Error::Parse { line: ln, msg: "expected \"max_col_deg max_row_deg\"".into() });
    };
    let (ln, l) = next("column degrees")?;
    let col_deg = parse_numbers(l, ln)?;
    if col_deg.len() != n {
        return Err(Error::Parse { line: ln, msg: format!("expected {n} column degrees, found {}", col_deg.len()) });
    }
    if col_deg.iter().copied().max().unwrap_or(0) != max_col {
        return Err(Error::Parse { line: ln, msg: format!("column degrees disagree with maximum {max_col}") });
    }
    let (ln, l) = next("row degrees")?;
    let row_deg = parse_numbers(l, ln)?;
    if row_deg.len() != m {
        return Err(Error::Parse { line: ln, msg: format!("expected {m} row degrees, found {}", row_deg.len()) });
    }
    if row_deg.iter().copied().max().unwrap_or(0) != max_row {
        return Err(Error::Parse { line: ln, msg: format!("row degrees disagree with maximum {max_row}") });
    }

    let mut cols = Vec::with_capacity(n);
    for &d in &col_deg {
        let (ln, l) = next("column list")?;
        cols.push((ln, parse_index_line(l, ln, d, max_col, m)?));
    }
    let mut rows = Vec::with_capacity(m);
    for &d in &row_deg {
        let (ln, l) = next("row list")?;
        rows.push((ln, parse_index_line(l, ln, d, max_row, n)?));
    }
    if let Some((ln, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::Parse { line: ln, msg: "trailing content after row lists".into() });
    }

    // Cross-check: every column incidence must appear in the row list.
    for (c, (ln, col)) in cols.iter().enumerate() {
        for &r in col {
            if rows[r].1.binary_search(&c).is_err() {
                return Err(Error::Parse {
                    line: *ln,
                    msg: format!("column {} names row {} but that row's list omits it", c + 1, r + 1),
                });
            }
        }
    }
    for (r, (ln, row)) in rows.iter().enumerate() {
        for &c in row {
            if cols[c].1.binary_search(&r).is_err() {
                return Err(Error::Parse {
                    line: *ln,
                    msg: format!("row {} names column {} but that column's list omits it", r + 1, c + 1),
                });
            }
        }
    }
    SparseBinaryMatrix::from_rows(m, n, rows.into_iter().map(|(_, r)| r).collect())
}

fn write_padded(out: &mut String, idx: &[usize], width: usize) {
    let mut first = true;
    for v in idx.iter().map(|&i| i + 1).chain(std::iter::repeat_n(0, width - idx.len())) {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

fn write_list(out: &mut String, nums: impl Iterator<Item = usize>) {
    let line: Vec<String> = nums.map(|n| n.to_string()).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

/// Canonical alist text: sorted 1-based indices, zero padding to the maximum
/// degree, single spaces, LF line endings.
pub fn save_alist(h: &SparseBinaryMatrix) -> String {
    let max_col = h.cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = h.rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    writeln!(out, "{} {}", h.n_cols, h.n_rows).unwrap();
    writeln!(out, "{max_col} {max_row}").unwrap();
    write_list(&mut out, h.cols.iter().map(Vec::len));
    write_list(&mut out, h.rows.iter().map(Vec::len));
    for col in &h.cols {
        write_padded(&mut out, col, max_col);
    }
    for row in &h.rows {
        write_padded(&mut out, row, max_row);
    }
    out
}

// ---------------------------------------------------------------------------
// Cycles
// ---------------------------------------------------------------------------

/// A simple cycle in the Tanner graph. `variables[0]` is the node the search
/// started from; the walk is `variables[0], checks[0], variables[1], ...,
/// checks[k-1]` and back to `variables[0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub variables: Vec<usize>,
    pub checks: Vec<usize>,
}

impl Cycle {
    /// Number of edges in the cycle.
    pub fn len(&self) -> usize {
        2 * self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }
}

/// Depth-first search for simple cycles through `start` of length at most
/// `max_length`, each reported once (the reversed traversal is suppressed).
///
/// `var_adj[v]` lists the checks of variable `v`, `chk_adj[c]` the variables
/// of check `c`. The visitor receives the variable and check sequences.
pub(crate) fn visit_cycles<F>(
    var_adj: &[Vec<usize>],
    chk_adj: &[Vec<usize>],
    start: usize,
    max_length: usize,
    mut visit: F,
) where
    F: FnMut(&[usize], &[usize]),
{
    struct Search<'a, F> {
        var_adj: &'a [Vec<usize>],
        chk_adj: &'a [Vec<usize>],
        start: usize,
        max_vars: usize,
        vars: Vec<usize>,
        checks: Vec<usize>,
        visit: F,
    }

    impl<F: FnMut(&[usize], &[usize])> Search<'_, F> {
        // Extend from the last variable on the path.
        fn at_variable(&mut self) {
            let v = *self.vars.last().unwrap();
            for &c in &self.var_adj[v] {
                if self.checks.contains(&c) {
                    continue;
                }
                self.checks.push(c);
                self.at_check();
                self.checks.pop();
            }
        }

        fn at_check(&mut self) {
            let c = *self.checks.last().unwrap();
            for &u in &self.chk_adj[c] {
                if u == self.start {
                    // Closing edge; at least two variables, and each cycle
                    // once: the first check must be below the last.
                    if self.vars.len() >= 2 && self.checks[0] < c {
                        (self.visit)(&self.vars, &self.checks);
                    }
                    continue;
                }
                if self.vars.len() >= self.max_vars || self.vars.contains(&u) {
                    continue;
                }
                self.vars.push(u);
                self.at_variable();
                self.vars.pop();
            }
        }
    }

    let mut search = Search {
        var_adj,
        chk_adj,
        start,
        max_vars: max_length / 2,
        vars: vec![start],
        checks: Vec::new(),
        visit: &mut visit,
    };
    search.at_variable();
}

pub(crate) fn check_cycle_args(n_vars: usize, v: usize, max_length: usize) -> Result<()> {
    if v >= n_vars {
        return Err(Error::InvalidInput(format!("variable {v} out of range (N = {n_vars})")));
    }
    if max_length < 4 || !max_length.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("cycle length bound must be even and >= 4, got {max_length}")));
    }
    Ok(())
}

/// All simple cycles of length at most `max_length` passing through variable
/// `through_variable`.
pub fn enumerate_short_cycles(
    graph: TannerGraph<'_>,
    through_variable: usize,
    max_length: usize,
) -> Result<Vec<Cycle>> {
    check_cycle_args(graph.n_variables(), through_variable, max_length)?;
    let mut out = Vec::new();
    visit_cycles(graph.h.cols(), graph.h.rows(), through_variable, max_length, |vars, checks| {
        out.push(Cycle { variables: vars.to_vec(), checks: checks.to_vec() })
    });
    Ok(out)
}
