//! Stopping sets and per-variable sensitivity counts.
//!
//! A set of variables is a stopping set when every check touching it touches
//! it at least twice. Detection grows a set greedily from a start node; the
//! result is a stopping set containing the start node but need not be
//! minimal. Running the detector from every variable and counting how often
//! each node is included gives the sensitivity histogram used for
//! interleaver design.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2::TannerGraph;

/// A detected stopping set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingSet {
    /// Sorted member variables.
    pub members: Vec<usize>,
    /// Start node of the detection run.
    pub origin: usize,
    /// True when the greedy expansion stalled on a degree-1 check or hit the
    /// size cap and the full variable set was returned instead.
    pub fallback: bool,
}

impl StoppingSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// Whether `set` is a stopping set of `graph`.
pub fn is_stopping_set(graph: TannerGraph<'_>, set: &[usize]) -> Result<bool> {
    if set.is_empty() {
        return Err(Error::InvalidInput("stopping-set test needs a nonempty set".into()));
    }
    let mut count = vec![0usize; graph.n_checks()];
    let mut seen = vec![false; graph.n_variables()];
    for &v in set {
        if v >= graph.n_variables() {
            return Err(Error::InvalidInput(format!("variable {v} out of range")));
        }
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        for &c in graph.checks_of(v) {
            count[c] += 1;
        }
    }
    Ok(count.iter().all(|&n| n != 1))
}

/// Greedy stopping-set detection from `start`.
///
/// While some check has exactly one edge into the set, take the lowest such
/// check and add its outside neighbour that creates the fewest newly
/// single-connected checks (lowest index on ties).
pub fn detect_from(graph: TannerGraph<'_>, start: usize, size_cap: usize) -> Result<StoppingSet> {
    let n = graph.n_variables();
    if start >= n {
        return Err(Error::InvalidInput(format!("start variable {start} out of range")));
    }
    if size_cap == 0 {
        return Err(Error::InvalidInput("size cap must be at least 1".into()));
    }
    let mut in_set = vec![false; n];
    let mut count = vec![0usize; graph.n_checks()];
    let mut deficient = BTreeSet::new();
    let mut size = 0usize;

    let add = |v: usize, in_set: &mut [bool], count: &mut [usize], deficient: &mut BTreeSet<usize>| {
        in_set[v] = true;
        for &c in graph.checks_of(v) {
            count[c] += 1;
            match count[c] {
                1 => {
                    deficient.insert(c);
                }
                2 => {
                    deficient.remove(&c);
                }
                _ => {}
            }
        }
    };

    add(start, &mut in_set, &mut count, &mut deficient);
    size += 1;
    let mut fallback = false;
    while let Some(&c) = deficient.first() {
        let best = graph
            .variables_of(c)
            .iter()
            .copied()
            .filter(|&u| !in_set[u])
            .min_by_key(|&u| (graph.checks_of(u).iter().filter(|&&d| count[d] == 0).count(), u));
        let Some(u) = best else {
            fallback = true;
            break;
        };
        add(u, &mut in_set, &mut count, &mut deficient);
        size += 1;
        if size > size_cap {
            fallback = true;
            break;
        }
    }
    let members = if fallback {
        (0..n).collect()
    } else {
        (0..n).filter(|&v| in_set[v]).collect()
    };
    Ok(StoppingSet { members, origin: start, fallback })
}

/// Per-variable counts of membership in detected stopping sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitivityHistogram {
    pub counts: Vec<usize>,
    pub runs: usize,
}

impl SensitivityHistogram {
    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Two-column CSV `index,count` with 0-based indices.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(s, "{i},{c}").unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "index,count")) => {}
            _ => return Err(Error::Parse { line: 1, msg: "expected header \"index,count\"".into() }),
        }
        let mut counts = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Parse { line: i + 1, msg: format!("malformed row {line:?}") };
            let (idx, count) = line.split_once(',').ok_or_else(bad)?;
            let idx: usize = idx.trim().parse().map_err(|_| bad())?;
            if idx != counts.len() {
                return Err(Error::Parse { line: i + 1, msg: format!("expected index {}", counts.len()) });
            }
            counts.push(count.trim().parse().map_err(|_| bad())?);
        }
        let runs = counts.len();
        Ok(Self { counts, runs })
    }
}

/// Runs the detector from every variable (uncapped) and accumulates
/// membership counts. Start nodes are processed in parallel; the result does
/// not depend on scheduling.
pub fn sensitivity_histogram(graph: TannerGraph<'_>) -> SensitivityHistogram {
    let sets = detect_all(graph);
    let mut counts = vec![0usize; graph.n_variables()];
    for set in &sets {
        for &u in &set.members {
            counts[u] += 1;
        }
    }
    SensitivityHistogram { counts, runs: sets.len() }
}

/// One detection run per start variable, in start order.
pub fn detect_all(graph: TannerGraph<'_>) -> Vec<StoppingSet> {
    let n = graph.n_variables();
    (0..n)
        .into_par_iter()
        .map(|v| detect_from(graph, v, n).expect("start in range"))
        .collect()
}

/// The `t` most sensitive indices (highest count first, lower index on
/// ties), optionally restricted to indices below `restrict_below`.
pub fn select_sensitive(hist: &SensitivityHistogram, t: usize, restrict_below: Option<usize>) -> Vec<usize> {
    let bound = restrict_below.unwrap_or(hist.counts.len()).min(hist.counts.len());
    let mut idx: Vec<usize> = (0..bound).collect();
    idx.sort_by_key(|&i| (std::cmp::Reverse(hist.counts[i]), i));
    idx.truncate(t);
    idx
}
