//! `K x N` block interleavers and their stopping-set-aware design.
//!
//! A permutation acts on flat positions `r * N + c` of the row-coded block
//! and is oriented in the encoder direction: the bit at source position `p`
//! lands at `forward[p]` in the block whose columns feed the inner encoder.
//!
//! A *bad mapping* is a source position whose column is sensitive for the
//! row (outer) code and whose image row is sensitive for the column (inner)
//! code.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Infeasibility, Result};
use crate::stopping::{select_sensitive, SensitivityHistogram};

/// Sensitive positions of the two component codes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SensitiveSets {
    /// Column indices `0..N` of the row code.
    pub row_code_nodes: Vec<usize>,
    /// Row indices `0..K` of the column code (its systematic part).
    pub col_code_nodes: Vec<usize>,
}

impl SensitiveSets {
    pub fn new(row_code_nodes: Vec<usize>, col_code_nodes: Vec<usize>) -> Self {
        Self { row_code_nodes, col_code_nodes }
    }

    pub fn is_empty(&self) -> bool {
        self.row_code_nodes.is_empty() && self.col_code_nodes.is_empty()
    }

    /// Two lines, `row_code_nodes ...` and `col_code_nodes ...`, indices in
    /// selection order.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| format!(" {x}")).collect::<String>();
        format!("row_code_nodes{}\ncol_code_nodes{}\n", join(&self.row_code_nodes), join(&self.col_code_nodes))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut field = |line: usize, key: &str| -> Result<Vec<usize>> {
            let l = lines.next().ok_or_else(|| Error::Parse { line, msg: format!("missing {key}") })?;
            let mut it = l.split_whitespace();
            if it.next() != Some(key) {
                return Err(Error::Parse { line, msg: format!("expected {key}") });
            }
            it.map(|x| x.parse().map_err(|_| Error::Parse { line, msg: format!("bad index {x:?}") }))
                .collect()
        };
        let row_code_nodes = field(1, "row_code_nodes")?;
        let col_code_nodes = field(2, "col_code_nodes")?;
        Ok(Self { row_code_nodes, col_code_nodes })
    }

    fn masks(&self, k: usize, n: usize) -> Result<(Vec<bool>, Vec<bool>)> {
        let mut row_mask = vec![false; n];
        for &c in &self.row_code_nodes {
            if c >= n {
                return Err(Error::InvalidInput(format!("row-code node {c} outside 0..{n}")));
            }
            row_mask[c] = true;
        }
        let mut col_mask = vec![false; k];
        for &r in &self.col_code_nodes {
            if r >= k {
                return Err(Error::InvalidInput(format!(
                    "column-code node {r} outside the systematic range 0..{k}"
                )));
            }
            col_mask[r] = true;
        }
        Ok((row_mask, col_mask))
    }
}

/// How a permutation was obtained from its random starting point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DesignRecord {
    /// Number of sensitive nodes per code selected by escalation (0 when
    /// undesigned).
    pub t: usize,
    pub sets: SensitiveSets,
    /// Swaps performed by the repair.
    pub repairs: usize,
}

/// A bijection on the `K * N` positions of the row-coded block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPermutation {
    k: usize,
    n: usize,
    forward: Vec<usize>,
    seed: u64,
    design: DesignRecord,
}

impl BlockPermutation {
    /// Wraps a forward map after checking it is a bijection.
    pub fn from_forward(k: usize, n: usize, forward: Vec<usize>, seed: u64) -> Result<Self> {
        check_len(k * n, forward.len())?;
        let mut seen = vec![false; forward.len()];
        for &d in &forward {
            if d >= seen.len() || std::mem::replace(&mut seen[d], true) {
                return Err(Error::InvalidInput(format!("not a bijection at image {d}")));
            }
        }
        Ok(Self { k, n, forward, seed, design: DesignRecord::default() })
    }

    pub fn identity(k: usize, n: usize) -> Self {
        Self { k, n, forward: (0..k * n).collect(), seed: 0, design: DesignRecord::default() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn design(&self) -> &DesignRecord {
        &self.design
    }

    pub fn with_design(mut self, design: DesignRecord) -> Self {
        self.design = design;
        self
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    /// Image of flat position `p`.
    #[inline]
    pub fn map(&self, p: usize) -> usize {
        self.forward[p]
    }

    /// Image of `(row, col)` as `(row', col')`.
    pub fn map_rc(&self, r: usize, c: usize) -> (usize, usize) {
        let d = self.forward[r * self.n + c];
        (d / self.n, d % self.n)
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.forward.len()];
        self.forward.iter().all(|&d| d < seen.len() && !std::mem::replace(&mut seen[d], true))
    }

    /// Moves the element at position `p` to `forward[p]`.
    pub fn apply<T: Copy + Default>(&self, block: &[T]) -> Result<Vec<T>> {
        check_len(self.forward.len(), block.len())?;
        let mut out = vec![T::default(); block.len()];
        for (p, &d) in self.forward.iter().enumerate() {
            out[d] = block[p];
        }
        Ok(out)
    }

    /// Inverse of [`apply`](Self::apply): `out[p] = block[forward[p]]`.
    pub fn apply_inverse<T: Copy>(&self, block: &[T]) -> Result<Vec<T>> {
        check_len(self.forward.len(), block.len())?;
        Ok(self.forward.iter().map(|&d| block[d]).collect())
    }

    pub fn invert(&self) -> BlockPermutation {
        let mut inv = vec![0; self.forward.len()];
        for (p, &d) in self.forward.iter().enumerate() {
            inv[d] = p;
        }
        Self { k: self.k, n: self.n, forward: inv, seed: self.seed, design: self.design.clone() }
    }

    /// Text form: header `K N seed t`, then one `src dst` line per position.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(12 * self.forward.len());
        writeln!(s, "{} {} {} {}", self.k, self.n, self.seed, self.design.t).unwrap();
        for (p, d) in self.forward.iter().enumerate() {
            writeln!(s, "{p} {d}").unwrap();
        }
        s
    }

    /// Strict parser for [`to_text`](Self::to_text). Lines may come in any
    /// order but every source and every destination must appear exactly
    /// once. The design record carries only `t`; the sets are not stored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
        if fields.len() != 4 {
            return Err(parse_err(1, "header must be \"K N seed t\"".into()));
        }
        let k: usize = fields[0].parse().map_err(|_| parse_err(1, "bad K".into()))?;
        let n: usize = fields[1].parse().map_err(|_| parse_err(1, "bad N".into()))?;
        let seed: u64 = fields[2].parse().map_err(|_| parse_err(1, "bad seed".into()))?;
        let t: usize = fields[3].parse().map_err(|_| parse_err(1, "bad t".into()))?;
        if k == 0 || n == 0 {
            return Err(parse_err(1, "K and N must be positive".into()));
        }
        let len = k * n;
        let mut forward = vec![usize::MAX; len];
        let mut taken = vec![false; len];
        let mut rows = 0usize;
        for (i, line) in lines {
            let ln = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(ln, "expected \"src dst\"".into()));
            };
            let src: usize = a.parse().map_err(|_| parse_err(ln, format!("bad source {a:?}")))?;
            let dst: usize = b.parse().map_err(|_| parse_err(ln, format!("bad destination {b:?}")))?;
            if src >= len || dst >= len {
                return Err(parse_err(ln, format!("position out of range 0..{len}")));
            }
            if forward[src] != usize::MAX {
                return Err(parse_err(ln, format!("source {src} mapped twice")));
            }
            if std::mem::replace(&mut taken[dst], true) {
                return Err(parse_err(ln, format!("destination {dst} used twice")));
            }
            forward[src] = dst;
            rows += 1;
        }
        if rows != len {
            return Err(parse_err(0, format!("expected {len} mappings, found {rows}")));
        }
        Ok(Self { k, n, forward, seed, design: DesignRecord { t, ..Default::default() } })
    }
}

/// Uniform random permutation (Fisher-Yates) determined by `seed`.
pub fn random_permutation(k: usize, n: usize, seed: u64) -> Result<BlockPermutation> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidInput("K and N must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forward: Vec<usize> = (0..k * n).collect();
    forward.shuffle(&mut rng);
    Ok(BlockPermutation { k, n, forward, seed, design: DesignRecord::default() })
}

/// Source positions whose column is row-code sensitive and whose image row
/// is column-code sensitive.
pub fn count_bad_mappings(pi: &BlockPermutation, sets: &SensitiveSets) -> Result<(usize, Vec<usize>)> {
    let (row_mask, col_mask) = sets.masks(pi.k, pi.n)?;
    let bad: Vec<usize> = (0..pi.len())
        .filter(|&p| row_mask[p % pi.n] && col_mask[pi.forward[p] / pi.n])
        .collect();
    Ok((bad.len(), bad))
}

/// Removes every bad mapping by swapping images.
///
/// Each offending position swaps images with a uniformly random partner
/// whose own source column is not row-code sensitive and whose image row is
/// not column-code sensitive, so every swap removes one violation and
/// creates none. Fails immediately when the counting bound
/// `K * |rows| <= (K - |cols|) * N` is violated.
pub fn design<R: Rng + ?Sized>(
    pi0: &BlockPermutation,
    sets: &SensitiveSets,
    rng: &mut R,
    max_attempts: usize,
) -> Result<BlockPermutation> {
    let (k, n) = (pi0.k, pi0.n);
    let (row_mask, col_mask) = sets.masks(k, n)?;
    let n_row = row_mask.iter().filter(|&&b| b).count();
    let n_col = col_mask.iter().filter(|&&b| b).count();
    let demand = k * n_row;
    let capacity = (k - n_col) * n;
    if demand > capacity {
        return Err(Error::Infeasible(Infeasibility::CountingBound { demand, capacity }));
    }

    let mut forward = pi0.forward.clone();
    let bad: Vec<usize> = (0..forward.len())
        .filter(|&p| row_mask[p % n] && col_mask[forward[p] / n])
        .collect();
    // Legal partners only ever leave this pool (their image becomes
    // sensitive), so it is maintained with swap_remove.
    let mut partners: Vec<usize> = (0..forward.len())
        .filter(|&q| !row_mask[q % n] && !col_mask[forward[q] / n])
        .collect();

    let mut repairs = 0usize;
    for (i, &p) in bad.iter().enumerate() {
        if repairs >= max_attempts {
            return Err(Error::Infeasible(Infeasibility::AttemptsExhausted {
                attempts: max_attempts,
                remaining: bad.len() - i,
            }));
        }
        if partners.is_empty() {
            return Err(Error::Infeasible(Infeasibility::NoLegalPartner { remaining: bad.len() - i }));
        }
        let j = rng.random_range(0..partners.len());
        let q = partners.swap_remove(j);
        forward.swap(p, q);
        repairs += 1;
        debug_assert!(!col_mask[forward[p] / n] && col_mask[forward[q] / n]);
    }

    let out = BlockPermutation {
        k,
        n,
        forward,
        seed: pi0.seed,
        design: DesignRecord { t: pi0.design.t, sets: sets.clone(), repairs },
    };
    debug_assert!(out.is_bijection());
    Ok(out)
}

/// Default swap budget: `50 * K * N`.
pub fn default_max_attempts(k: usize, n: usize) -> usize {
    50 * k * n
}

/// Grows the sensitive sets `step` nodes at a time, designing from `pi0` at
/// each level, and returns the last level that succeeded. The column-code
/// set is restricted to the systematic range `0..K`. If the first level
/// already fails, `pi0` is returned unchanged with `t = 0`.
pub fn escalate_design<R: Rng + ?Sized>(
    hist_row: &SensitivityHistogram,
    hist_col: &SensitivityHistogram,
    pi0: &BlockPermutation,
    step: usize,
    rng: &mut R,
) -> Result<BlockPermutation> {
    escalate_design_capped(hist_row, hist_col, pi0, step, usize::MAX, rng)
}

/// [`escalate_design`] that also stops once `t` would exceed `max_t`.
pub fn escalate_design_capped<R: Rng + ?Sized>(
    hist_row: &SensitivityHistogram,
    hist_col: &SensitivityHistogram,
    pi0: &BlockPermutation,
    step: usize,
    max_t: usize,
    rng: &mut R,
) -> Result<BlockPermutation> {
    if step == 0 {
        return Err(Error::InvalidInput("escalation step must be at least 1".into()));
    }
    check_len(pi0.n, hist_row.counts.len())?;
    let (k, n) = (pi0.k, pi0.n);
    let mut best = pi0.clone().with_design(DesignRecord::default());
    let mut prev_sizes = (0, 0);
    let mut t = step;
    while t <= max_t {
        let sets = SensitiveSets::new(
            select_sensitive(hist_row, t, None),
            select_sensitive(hist_col, t, Some(k)),
        );
        let sizes = (sets.row_code_nodes.len(), sets.col_code_nodes.len());
        if sizes == prev_sizes {
            // Both histograms exhausted; larger t selects nothing new.
            break;
        }
        prev_sizes = sizes;
        match design(pi0, &sets, rng, default_max_attempts(k, n)) {
            Ok(pi) => {
                let repairs = pi.design.repairs;
                best = pi.with_design(DesignRecord { t, sets, repairs });
            }
            Err(Error::Infeasible(_)) => break,
            Err(e) => return Err(e),
        }
        t += step;
    }
    Ok(best)
}

/// Picks the best of `candidates` random permutations (seeds `base_seed`,
/// `base_seed + 1`, ...) by a caller-supplied score; lower is better and
/// the earliest candidate wins ties.
pub fn select_by_pilot<S, F>(k: usize, n: usize, base_seed: u64, candidates: usize, mut score: F) -> Result<(BlockPermutation, Vec<S>)>
where
    S: PartialOrd + Clone,
    F: FnMut(&BlockPermutation) -> S,
{
    if candidates == 0 {
        return Err(Error::InvalidInput("need at least one candidate".into()));
    }
    let mut best: Option<(BlockPermutation, S)> = None;
    let mut scores = Vec::with_capacity(candidates);
    for i in 0..candidates {
        let pi = random_permutation(k, n, base_seed.wrapping_add(i as u64))?;
        let s = score(&pi);
        scores.push(s.clone());
        if best.as_ref().is_none_or(|(_, b)| s < *b) {
            best = Some((pi, s));
        }
    }
    Ok((best.unwrap().0, scores))
}
