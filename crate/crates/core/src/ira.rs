//! Systematic irregular repeat-accumulate codes.
//!
//! The parity-check matrix is `H = [H1 | H2]` where `H2` is the `M x M`
//! dual-diagonal accumulator section and `H1` carries the systematic
//! columns. `H1` is grown column by column under an ACE constraint.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::gf2::{check_cycle_args, SparseBinaryMatrix, TannerGraph};
use crate::spa::{DecodeResult, SpaDecoder};

/// Check degree used by every code in the reference construction.
pub const DEFAULT_CHECK_DEGREE: usize = 10;

/// Variable degrees of the systematic columns plus the target check degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSpec {
    pub h1_column_degrees: Vec<usize>,
    pub check_degree_target: usize,
}

/// Number of `H1` edges available once `H2` is in place.
pub fn h1_edge_budget(m: usize, check_degree: usize) -> Option<usize> {
    (m * check_degree).checked_sub(2 * m - 1)
}

impl DegreeSpec {
    /// Validates the spec against the code shape.
    pub fn validate(&self, k: usize, m: usize) -> Result<()> {
        if self.h1_column_degrees.len() != k {
            return Err(Error::InvalidInput(format!(
                "degree spec has {} columns, expected K = {k}",
                self.h1_column_degrees.len()
            )));
        }
        if let Some(j) = self.h1_column_degrees.iter().position(|&d| d < 3) {
            return Err(Error::InvalidInput(format!(
                "systematic column {j} has degree {} (< 3); weight-2 columns belong to H2",
                self.h1_column_degrees[j]
            )));
        }
        if let Some(j) = self.h1_column_degrees.iter().position(|&d| d > m) {
            return Err(Error::InvalidInput(format!("column {j} degree exceeds M = {m}")));
        }
        let budget = h1_edge_budget(m, self.check_degree_target).ok_or_else(|| {
            Error::InvalidInput("check degree too small for the accumulator section".into())
        })?;
        let total: usize = self.h1_column_degrees.iter().sum();
        if total != budget {
            return Err(Error::InvalidInput(format!(
                "degree spec has {total} edges, the row budget needs exactly {budget}"
            )));
        }
        Ok(())
    }
}

/// Default 3/4 degree mix filling the edge budget exactly. Degree-4 columns
/// come first.
pub fn default_degree_spec(k: usize, m: usize, check_degree: usize) -> Result<DegreeSpec> {
    let budget = h1_edge_budget(m, check_degree)
        .ok_or_else(|| Error::Construction("check degree too small for the accumulator".into()))?;
    if budget < 3 * k {
        return Err(Error::Construction(format!(
            "edge budget {budget} cannot give {k} columns degree 3"
        )));
    }
    let fours = budget - 3 * k;
    if fours > k {
        return Err(Error::Construction(format!(
            "edge budget {budget} needs {fours} degree-4 columns but K = {k}"
        )));
    }
    let mut h1_column_degrees = vec![4; fours];
    h1_column_degrees.resize(k, 3);
    Ok(DegreeSpec { h1_column_degrees, check_degree_target: check_degree })
}

/// Parameters of the ACE conditioning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AceParams {
    /// Cycles of length up to `2 * d_ace` are inspected.
    pub d_ace: usize,
    /// Minimum ACE a short cycle must have.
    pub eta: usize,
    /// Placement attempts per column before restarting.
    pub max_resample: usize,
    /// Full restarts before giving up; see [`restart_seed`].
    pub max_restarts: usize,
}

/// Seed of restart `attempt`. Attempt 0 uses `seed` itself; later attempts
/// are mixed so that nearby seeds do not share restart sequences.
pub fn restart_seed(seed: u64, attempt: usize) -> u64 {
    if attempt == 0 {
        return seed;
    }
    let mut z = seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Default for AceParams {
    fn default() -> Self {
        Self { d_ace: 4, eta: 2, max_resample: 200, max_restarts: 1000 }
    }
}

impl AceParams {
    pub fn validate(&self) -> Result<()> {
        if self.d_ace < 2 || self.max_resample < 1 || self.max_restarts < 1 {
            return Err(Error::InvalidInput(format!("invalid ACE parameters {self:?}")));
        }
        Ok(())
    }
}

/// `M x M` dual-diagonal accumulator section.
pub fn build_h2(m: usize) -> SparseBinaryMatrix {
    let cols = (0..m).map(|j| if j + 1 < m { vec![j, j + 1] } else { vec![j] }).collect();
    SparseBinaryMatrix::from_cols(m, m, cols).expect("dual diagonal is well formed")
}

/// Outcome of an ACE test on one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AceOutcome {
    pub pass: bool,
    /// Smallest ACE over the inspected cycles; `None` when no short cycle
    /// passes through the variable.
    pub min_ace: Option<usize>,
}

/// Branch-and-bound search for the smallest cycle ACE through `start`,
/// considering only cycles with ACE below `bound`.
fn min_cycle_ace(
    var_adj: &[Vec<usize>],
    chk_adj: &[Vec<usize>],
    start: usize,
    max_length: usize,
    bound: usize,
) -> Option<usize> {
    struct Search<'a> {
        var_adj: &'a [Vec<usize>],
        chk_adj: &'a [Vec<usize>],
        start: usize,
        max_vars: usize,
        vars: Vec<usize>,
        checks: Vec<usize>,
        best: usize,
    }

    impl Search<'_> {
        fn ace(&self, v: usize) -> usize {
            self.var_adj[v].len().saturating_sub(2)
        }

        fn at_variable(&mut self, partial: usize) {
            let v = *self.vars.last().unwrap();
            for &c in &self.var_adj[v] {
                if self.checks.contains(&c) {
                    continue;
                }
                self.checks.push(c);
                self.at_check(partial);
                self.checks.pop();
            }
        }

        fn at_check(&mut self, partial: usize) {
            let c = *self.checks.last().unwrap();
            for &u in &self.chk_adj[c] {
                if u == self.start {
                    if self.vars.len() >= 2 && partial < self.best {
                        self.best = partial;
                    }
                    continue;
                }
                if self.vars.len() >= self.max_vars || self.vars.contains(&u) {
                    continue;
                }
                let next = partial + self.ace(u);
                if next >= self.best {
                    continue;
                }
                self.vars.push(u);
                self.at_variable(next);
                self.vars.pop();
            }
        }
    }

    let mut s = Search {
        var_adj,
        chk_adj,
        start,
        max_vars: max_length / 2,
        vars: vec![start],
        checks: Vec::new(),
        best: bound,
    };
    let own = s.ace(start);
    if own >= bound {
        return None;
    }
    s.at_variable(own);
    (s.best < bound).then_some(s.best)
}

/// ACE test of variable `v`: every cycle of length at most `2 * d_ace`
/// through `v` must have ACE (sum of `degree - 2` over its variables) at
/// least `eta`.
pub fn ace_check(graph: TannerGraph<'_>, v: usize, d_ace: usize, eta: usize) -> Result<AceOutcome> {
    check_cycle_args(graph.n_variables(), v, 2 * d_ace)?;
    let h = graph.matrix();
    let min_ace = min_cycle_ace(h.cols(), h.rows(), v, 2 * d_ace, usize::MAX);
    Ok(AceOutcome { pass: min_ace.is_none_or(|a| a >= eta), min_ace })
}

/// Grows `H1` column by column (highest degree first) with uniformly random
/// rows among those with remaining budget, rejecting placements that fail the
/// ACE test. After `max_resample` rejections of one column the construction
/// restarts with a derived seed.
///
/// Returns the `M x K` section and the seed that succeeded.
pub fn build_h1(
    k: usize,
    m: usize,
    spec: &DegreeSpec,
    ace: &AceParams,
    seed: u64,
) -> Result<(SparseBinaryMatrix, u64)> {
    spec.validate(k, m)?;
    ace.validate()?;
    let h2 = build_h2(m);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&j| std::cmp::Reverse(spec.h1_column_degrees[j]));

    let mut ace_rejections = 0usize;
    let mut stalls = 0usize;
    let mut deepest = 0usize;
    for restart in 0..ace.max_restarts {
        let attempt_seed = restart_seed(seed, restart);
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
        // Variables 0..K are H1 columns, K..N are H2 columns.
        let mut var_adj: Vec<Vec<usize>> = vec![Vec::new(); k];
        var_adj.extend(h2.cols().iter().cloned());
        let mut chk_adj: Vec<Vec<usize>> =
            h2.rows().iter().map(|r| r.iter().map(|&c| c + k).collect()).collect();
        let mut budget: Vec<usize> =
            (0..m).map(|r| spec.check_degree_target - h2.row(r).len()).collect();

        let mut ok = true;
        'columns: for (placed, &col) in order.iter().enumerate() {
            let deg = spec.h1_column_degrees[col];
            for _ in 0..ace.max_resample {
                let open: Vec<usize> = (0..m).filter(|&r| budget[r] > 0).collect();
                if open.len() < deg {
                    stalls += 1;
                    ok = false;
                    break 'columns;
                }
                let mut rows: Vec<usize> =
                    sample(&mut rng, open.len(), deg).into_iter().map(|i| open[i]).collect();
                rows.sort_unstable();
                for &r in &rows {
                    chk_adj[r].push(col);
                }
                var_adj[col] = rows;
                if ace.eta == 0
                    || min_cycle_ace(&var_adj, &chk_adj, col, 2 * ace.d_ace, ace.eta).is_none()
                {
                    for &r in &var_adj[col] {
                        budget[r] -= 1;
                    }
                    deepest = deepest.max(placed + 1);
                    continue 'columns;
                }
                ace_rejections += 1;
                for &r in &var_adj[col] {
                    chk_adj[r].pop();
                }
                var_adj[col].clear();
            }
            ok = false;
            break;
        }
        if ok {
            let h1 = SparseBinaryMatrix::from_cols(m, k, var_adj[..k].to_vec())?;
            return Ok((h1, attempt_seed));
        }
    }
    Err(Error::Construction(format!(
        "no H1 after {} restarts: {ace_rejections} placements rejected by ACE (d_ace = {}, eta = {}), \
         {stalls} row-budget stalls, at most {deepest}/{k} columns placed",
        ace.max_restarts, ace.d_ace, ace.eta
    )))
}

/// A systematic `[N, K]` IRA code.
#[derive(Debug, Clone)]
pub struct IraCode {
    k: usize,
    n: usize,
    h: SparseBinaryMatrix,
    h1_rows: Vec<Vec<usize>>,
    degree_spec: DegreeSpec,
    ace: AceParams,
    seed: u64,
    effective_seed: u64,
    decoder: SpaDecoder,
}

impl IraCode {
    /// Constructs a code with the default degree spec.
    pub fn construct(k: usize, n: usize, check_degree: usize, ace: AceParams, seed: u64) -> Result<Self> {
        let m = parity_count(k, n)?;
        let spec = default_degree_spec(k, m, check_degree)?;
        Self::construct_with_spec(k, n, spec, ace, seed)
    }

    pub fn construct_with_spec(
        k: usize,
        n: usize,
        spec: DegreeSpec,
        ace: AceParams,
        seed: u64,
    ) -> Result<Self> {
        let m = parity_count(k, n)?;
        let (h1, effective_seed) = build_h1(k, m, &spec, &ace, seed)?;
        let h = h1.hstack(&build_h2(m))?;
        Ok(Self::assemble(k, h, spec, ace, seed, effective_seed))
    }

    /// Wraps an existing `[H1 | H2]` matrix, checking the structural
    /// invariants.
    pub fn from_parts(
        k: usize,
        h: SparseBinaryMatrix,
        degree_spec: DegreeSpec,
        ace: AceParams,
        seed: u64,
        effective_seed: u64,
    ) -> Result<Self> {
        let violations = audit_structure(&h, k, degree_spec.check_degree_target);
        if let Some(first) = violations.first() {
            return Err(Error::InvalidInput(format!(
                "not an IRA matrix ({} violations, first: {first})",
                violations.len()
            )));
        }
        let actual: Vec<usize> = (0..k).map(|j| h.col(j).len()).collect();
        if actual != degree_spec.h1_column_degrees {
            return Err(Error::InvalidInput("matrix column weights disagree with degree spec".into()));
        }
        Ok(Self::assemble(k, h, degree_spec, ace, seed, effective_seed))
    }

    fn assemble(
        k: usize,
        h: SparseBinaryMatrix,
        degree_spec: DegreeSpec,
        ace: AceParams,
        seed: u64,
        effective_seed: u64,
    ) -> Self {
        let h1_rows = h.rows().iter().map(|r| r.iter().copied().filter(|&c| c < k).collect()).collect();
        let decoder = SpaDecoder::new(&h);
        Self { k, n: h.n_cols(), h, h1_rows, degree_spec, ace, seed, effective_seed, decoder }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.n - self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn h(&self) -> &SparseBinaryMatrix {
        &self.h
    }

    pub fn degree_spec(&self) -> &DegreeSpec {
        &self.degree_spec
    }

    pub fn ace_params(&self) -> &AceParams {
        &self.ace
    }

    /// Seed requested at construction.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Seed of the restart that produced the matrix.
    pub fn effective_seed(&self) -> u64 {
        self.effective_seed
    }

    pub fn decoder(&self) -> &SpaDecoder {
        &self.decoder
    }

    /// Systematic encoding through the accumulator: `p[0] = <h1_0, s>`,
    /// `p[m] = p[m-1] ^ <h1_m, s>`.
    pub fn encode(&self, source: &[u8]) -> Result<Vec<u8>> {
        check_len(self.k, source.len())?;
        let mut out = Vec::with_capacity(self.n);
        out.extend(source.iter().map(|b| b & 1));
        self.append_parity(&mut out);
        Ok(out)
    }

    /// Encodes `source` into the first `N` entries of `out`.
    pub fn encode_into(&self, source: &[u8], out: &mut [u8]) -> Result<()> {
        check_len(self.k, source.len())?;
        check_len(self.n, out.len())?;
        for (o, s) in out.iter_mut().zip(source) {
            *o = s & 1;
        }
        let mut acc = 0u8;
        for (m, row) in self.h1_rows.iter().enumerate() {
            acc ^= row.iter().fold(0u8, |a, &c| a ^ out[c]);
            out[self.k + m] = acc;
        }
        Ok(())
    }

    fn append_parity(&self, word: &mut Vec<u8>) {
        let mut acc = 0u8;
        for row in &self.h1_rows {
            acc ^= row.iter().fold(0u8, |a, &c| a ^ word[c]);
            word.push(acc);
        }
    }

    /// Sum-product decoding; see [`SpaDecoder::decode`].
    pub fn decode(&self, channel: &[f64], prior: &[f64], max_iter: usize) -> Result<DecodeResult> {
        self.decoder.decode(channel, prior, max_iter)
    }

    /// Structural invariant violations (empty for a valid code).
    pub fn audit(&self) -> Vec<String> {
        audit_structure(&self.h, self.k, self.degree_spec.check_degree_target)
    }

    /// Variables failing the ACE test under the construction parameters.
    pub fn ace_audit(&self) -> Vec<usize> {
        let g = self.h.tanner();
        (0..self.n)
            .filter(|&v| !ace_check(g, v, self.ace.d_ace, self.ace.eta).map(|o| o.pass).unwrap_or(false))
            .collect()
    }

    /// Key-value metadata accompanying the alist file.
    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            k: self.k,
            n: self.n,
            seed: self.seed,
            effective_seed: self.effective_seed,
            degree_spec: self.degree_spec.clone(),
            ace: self.ace,
        }
    }

    /// Rebuilds a code from its matrix and sidecar.
    pub fn from_files(h: SparseBinaryMatrix, meta: &Sidecar) -> Result<Self> {
        check_len(meta.n, h.n_cols())?;
        check_len(meta.n - meta.k, h.n_rows())?;
        Self::from_parts(meta.k, h, meta.degree_spec.clone(), meta.ace, meta.seed, meta.effective_seed)
    }
}

fn parity_count(k: usize, n: usize) -> Result<usize> {
    if k == 0 || n <= k {
        return Err(Error::InvalidInput(format!("need 0 < K < N, got K = {k}, N = {n}")));
    }
    Ok(n - k)
}

/// Lists every violated IRA invariant of `h` for the given `K`.
pub fn audit_structure(h: &SparseBinaryMatrix, k: usize, check_degree: usize) -> Vec<String> {
    let mut out = Vec::new();
    if !h.is_consistent() {
        out.push("row and column supports disagree".to_string());
    }
    let n = h.n_cols();
    if k >= n {
        out.push(format!("K = {k} not below N = {n}"));
        return out;
    }
    let m = n - k;
    if h.n_rows() != m {
        out.push(format!("{} rows, expected M = {m}", h.n_rows()));
        return out;
    }
    for j in 0..m {
        let want: &[usize] = if j + 1 < m { &[j, j + 1] } else { &[j] };
        if h.col(k + j) != want {
            out.push(format!("parity column {j} has support {:?}, expected {want:?}", h.col(k + j)));
        }
    }
    for j in 0..k {
        if h.col(j).len() < 3 {
            out.push(format!("systematic column {j} has weight {}", h.col(j).len()));
        }
    }
    for r in 0..m {
        if h.row(r).len() != check_degree {
            out.push(format!("row {r} has weight {}, expected {check_degree}", h.row(r).len()));
        }
    }
    out
}

/// Code metadata stored next to the alist file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sidecar {
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub effective_seed: u64,
    pub degree_spec: DegreeSpec,
    pub ace: AceParams,
}

const SIDECAR_FORMAT: &str = "ira-code/1";

impl Sidecar {
    /// Serializes as `key = value` lines in a fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "format = {SIDECAR_FORMAT}").unwrap();
        writeln!(s, "k = {}", self.k).unwrap();
        writeln!(s, "n = {}", self.n).unwrap();
        writeln!(s, "check_degree = {}", self.degree_spec.check_degree_target).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "effective_seed = {}", self.effective_seed).unwrap();
        writeln!(s, "d_ace = {}", self.ace.d_ace).unwrap();
        writeln!(s, "eta = {}", self.ace.eta).unwrap();
        writeln!(s, "max_resample = {}", self.ace.max_resample).unwrap();
        writeln!(s, "max_restarts = {}", self.ace.max_restarts).unwrap();
        let degs: Vec<String> = self.degree_spec.h1_column_degrees.iter().map(|d| d.to_string()).collect();
        writeln!(s, "h1_column_degrees = {}", degs.join(" ")).unwrap();
        s
    }

    /// Parses the `key = value` format. `#` starts a comment line; every key
    /// is required exactly once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut fields: std::collections::BTreeMap<&str, (usize, &str)> = Default::default();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (key, value) = t
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: "expected key = value".into() })?;
            if fields.insert(key.trim(), (i + 1, value.trim())).is_some() {
                return Err(Error::Parse { line: i + 1, msg: format!("duplicate key {:?}", key.trim()) });
            }
        }
        const KEYS: [&str; 11] = [
            "format", "k", "n", "check_degree", "seed", "effective_seed", "d_ace", "eta",
            "max_resample", "max_restarts", "h1_column_degrees",
        ];
        if let Some((key, (line, _))) = fields.iter().find(|(k, _)| !KEYS.contains(k)) {
            return Err(Error::Parse { line: *line, msg: format!("unknown key {key:?}") });
        }
        let get = |key: &str| {
            fields.get(key).copied().ok_or_else(|| Error::Parse { line: 0, msg: format!("missing key {key:?}") })
        };
        fn num<T: std::str::FromStr>((line, v): (usize, &str)) -> Result<T> {
            v.parse().map_err(|_| Error::Parse { line, msg: format!("invalid number {v:?}") })
        }
        let (line, format) = get("format")?;
        if format != SIDECAR_FORMAT {
            return Err(Error::Parse { line, msg: format!("unsupported format {format:?}") });
        }
        let (dline, degs) = get("h1_column_degrees")?;
        let h1_column_degrees = degs
            .split_whitespace()
            .map(|d| num((dline, d)))
            .collect::<Result<Vec<usize>>>()?;
        let meta = Self {
            k: num(get("k")?)?,
            n: num(get("n")?)?,
            seed: num(get("seed")?)?,
            effective_seed: num(get("effective_seed")?)?,
            degree_spec: DegreeSpec { h1_column_degrees, check_degree_target: num(get("check_degree")?)? },
            ace: AceParams {
                d_ace: num(get("d_ace")?)?,
                eta: num(get("eta")?)?,
                max_resample: num(get("max_resample")?)?,
                max_restarts: num(get("max_restarts")?)?,
            },
        };
        if meta.k >= meta.n {
            return Err(Error::Parse { line: 0, msg: "k must be below n".into() });
        }
        meta.degree_spec
            .validate(meta.k, meta.n - meta.k)
            .map_err(|e| Error::Parse { line: dline, msg: e.to_string() })?;
        Ok(meta)
    }
}
