//! Index sequences, their difference sequences, Even/Odd blocks and
//! finite-window tail equivalence.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("sequence needs at least two values, got {0}")]
    TooShort(usize),
    #[error("sequence must start at 0, starts at {0}")]
    NonZeroStart(u64),
    #[error("sequence is not strictly increasing at index {index} ({prev} then {next})")]
    NotIncreasing { index: usize, prev: u64, next: u64 },
    #[error("{what} {value} is outside the window determined by the prefix (limit {limit})")]
    OutOfWindow {
        what: &'static str,
        value: u64,
        limit: u64,
    },
    #[error("cannot parse sequence: {0}")]
    Parse(String),
    #[error(
        "no family of {requested} sequences of length {length} fits in u64 (at most {achievable})"
    )]
    Infeasible {
        requested: usize,
        length: usize,
        achievable: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Parity of the block `[n_i, n_{i+1})` containing a natural number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(i: u64) -> Parity {
        if i.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_even(self) -> bool {
        self == Parity::Even
    }
}

/// Finite prefix of a strictly increasing natural sequence starting at 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSequence {
    values: Vec<u64>,
}

impl IndexSequence {
    pub fn new(values: Vec<u64>) -> Result<Self, SequenceError> {
        if values.len() < 2 {
            return Err(SequenceError::TooShort(values.len()));
        }
        if values[0] != 0 {
            return Err(SequenceError::NonZeroStart(values[0]));
        }
        for (index, w) in values.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(SequenceError::NotIncreasing {
                    index: index + 1,
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        Ok(IndexSequence { values })
    }

    /// Rebuilds the sequence from its differences by prefix summation from 0.
    pub fn from_deltas(delta: &DeltaSequence) -> Result<Self, SequenceError> {
        let mut values = Vec::with_capacity(delta.len() + 1);
        values.push(0u64);
        let mut acc = 0u64;
        for &d in delta.diffs() {
            acc = acc
                .checked_add(d)
                .ok_or_else(|| SequenceError::InvalidArgument("prefix sum overflows u64".into()))?;
            values.push(acc);
        }
        IndexSequence::new(values)
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> u64 {
        *self.values.last().expect("at least two values")
    }

    pub fn get(&self, i: usize) -> Option<u64> {
        self.values.get(i).copied()
    }

    /// Whether the differences are strictly increasing, the standing
    /// hypothesis of the tail-equivalence lemmas.
    pub fn is_delta_increasing(&self) -> bool {
        self.delta().is_strictly_increasing()
    }

    pub fn delta(&self) -> DeltaSequence {
        DeltaSequence {
            diffs: self.values.windows(2).map(|w| w[1] - w[0]).collect(),
        }
    }

    /// Index `i` with `n_i <= k < n_{i+1}`.
    ///
    /// The prefix determines this for every `k <= last`: the final value
    /// starts the block `[n_{L-1}, n_L)` whatever `n_L` turns out to be.
    pub fn block_index(&self, k: u64) -> Result<usize, SequenceError> {
        let last = self.last();
        if k > last {
            return Err(SequenceError::OutOfWindow {
                what: "block argument",
                value: k,
                limit: last,
            });
        }
        // values[0] = 0 <= k, so the partition point is at least 1.
        Ok(self.values.partition_point(|&v| v <= k) - 1)
    }

    /// Even iff `k` lies in `[n_i, n_{i+1})` for an even `i`.
    pub fn block_parity(&self, k: u64) -> Result<Parity, SequenceError> {
        self.block_index(k).map(|i| Parity::of(i as u64))
    }

    /// `2 (n_{u+1} - n_u) - 1`, the length parameter of the `u`-th arrow.
    pub fn p_value(&self, u: usize) -> Result<u64, SequenceError> {
        if u + 1 >= self.values.len() {
            return Err(SequenceError::OutOfWindow {
                what: "p index",
                value: u as u64,
                limit: self.values.len() as u64 - 2,
            });
        }
        Ok(2 * (self.values[u + 1] - self.values[u]) - 1)
    }

    /// Vertex interval `[2n_t, 2n_{t+1} - 1]` of the `t`-th arrow of `G_n`.
    pub fn arrow(&self, t: usize) -> Option<(i64, i64)> {
        if t + 1 >= self.values.len() {
            return None;
        }
        Some((2 * self.values[t] as i64, 2 * self.values[t + 1] as i64 - 1))
    }

    /// The arrow containing vertex `v` of `G_n`, if the prefix determines it.
    pub fn arrow_of(&self, v: i64) -> Option<usize> {
        if v < 0 || v > 2 * self.last() as i64 - 1 {
            return None;
        }
        self.block_index(v as u64 / 2).ok()
    }

    /// Number of arrows fully described by the prefix.
    pub fn arrow_count(&self) -> usize {
        self.values.len() - 1
    }

    /// Comma separated rendering used in report lines.
    pub fn compact(&self) -> String {
        join(&self.values, ",")
    }
}

fn join(values: &[u64], sep: &str) -> String {
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

impl fmt::Display for IndexSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join(&self.values, " "))
    }
}

impl FromStr for IndexSequence {
    type Err = SequenceError;

    /// Accepts whitespace and/or comma separated naturals.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IndexSequence::new(parse_naturals(s)?)
    }
}

pub(crate) fn parse_naturals(s: &str) -> Result<Vec<u64>, SequenceError> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| SequenceError::Parse(format!("`{t}` is not a natural number")))
        })
        .collect()
}

/// Parses the plain-text sequence file format: one sequence per line,
/// whitespace separated, `#` starts a comment line.
pub fn parse_sequence_file(text: &str) -> Result<Vec<IndexSequence>, SequenceError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let seq = line
            .parse::<IndexSequence>()
            .map_err(|e| SequenceError::Parse(format!("line {}: {e}", lineno + 1)))?;
        out.push(seq);
    }
    Ok(out)
}

pub fn write_sequence_file(seqs: &[IndexSequence]) -> String {
    let mut out = String::new();
    for s in seqs {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

/// Successive differences of an index sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeltaSequence {
    diffs: Vec<u64>,
}

impl DeltaSequence {
    pub fn new(diffs: Vec<u64>) -> Result<Self, SequenceError> {
        if let Some(i) = diffs.iter().position(|&d| d == 0) {
            return Err(SequenceError::InvalidArgument(format!(
                "difference at index {i} is zero"
            )));
        }
        Ok(DeltaSequence { diffs })
    }

    pub fn diffs(&self) -> &[u64] {
        &self.diffs
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.diffs.windows(2).all(|w| w[0] < w[1])
    }
}

impl fmt::Display for DeltaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join(&self.diffs, " "))
    }
}

impl FromStr for DeltaSequence {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DeltaSequence::new(parse_naturals(s)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailKind {
    /// `a_i = b_{i + shift}` for every `i >= start` up to the end of the
    /// shorter aligned prefix.
    EquivalentOnWindow {
        shift: i64,
        start: usize,
    },
    InequivalentOnWindow,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailVerdict {
    pub kind: TailKind,
    pub max_shift: u64,
    pub min_overlap: usize,
}

impl TailVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self.kind, TailKind::EquivalentOnWindow { .. })
    }

    pub fn is_inequivalent(&self) -> bool {
        self.kind == TailKind::InequivalentOnWindow
    }
}

impl fmt::Display for TailVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TailKind::EquivalentOnWindow { shift, start } => write!(
                f,
                "equivalent shift={shift} start={start} max_shift={} min_overlap={}",
                self.max_shift, self.min_overlap
            ),
            TailKind::InequivalentOnWindow => write!(
                f,
                "inequivalent max_shift={} min_overlap={}",
                self.max_shift, self.min_overlap
            ),
            TailKind::Undetermined => write!(
                f,
                "undetermined max_shift={} min_overlap={}",
                self.max_shift, self.min_overlap
            ),
        }
    }
}

/// Finite-window tail equivalence of two difference prefixes.
///
/// For every shift `|j| <= max_shift` the aligned overlap `a_i` vs `b_{i+j}`
/// runs to the end of whichever prefix ends first; the shift is accepted when
/// the agreeing suffix of that overlap has at least `min_overlap` entries.
/// Shifts are tried by `|j|`, negative first, and the reported start is the
/// beginning of the maximal agreeing suffix.
pub fn e_tail_check(
    a: &DeltaSequence,
    b: &DeltaSequence,
    max_shift: u64,
    min_overlap: usize,
) -> TailVerdict {
    let verdict = |kind| TailVerdict {
        kind,
        max_shift,
        min_overlap,
    };
    if min_overlap == 0 || a.len() < min_overlap || b.len() < min_overlap {
        return verdict(TailKind::Undetermined);
    }
    let (la, lb) = (a.len() as i64, b.len() as i64);
    let max_shift = max_shift.min(i64::MAX as u64) as i64;
    for mag in 0..=max_shift {
        let shifts: &[i64] = if mag == 0 { &[0] } else { &[-mag, mag] };
        for &j in shifts {
            let begin = 0.max(-j);
            let end = la.min(lb - j);
            if end - begin < min_overlap as i64 {
                continue;
            }
            let mut start = end;
            while start > begin
                && a.diffs[(start - 1) as usize] == b.diffs[(start - 1 + j) as usize]
            {
                start -= 1;
            }
            if end - start >= min_overlap as i64 {
                return verdict(TailKind::EquivalentOnWindow {
                    shift: j,
                    start: start as usize,
                });
            }
        }
        // Past this magnitude no overlap can be long enough.
        if mag > la.max(lb) {
            break;
        }
    }
    verdict(TailKind::InequivalentOnWindow)
}

/// Deterministic family of `count` sequences with `length` values whose
/// difference prefixes are pairwise inequivalent for `max_shift = length`,
/// `min_overlap = 2`.
///
/// Member `k` has differences `1, 1 + (k+1), 1 + 2(k+1), ...`: arithmetic
/// progressions with pairwise distinct steps never share two consecutive
/// aligned entries.
pub fn generate_inequivalent_family(
    count: usize,
    length: usize,
) -> Result<Vec<IndexSequence>, SequenceError> {
    if count == 0 {
        return Err(SequenceError::InvalidArgument(
            "count must be at least 1".into(),
        ));
    }
    if length < 3 {
        return Err(SequenceError::InvalidArgument(
            "length must be at least 3".into(),
        ));
    }
    let mut family = Vec::with_capacity(count);
    for k in 0..count {
        let step = k as u64 + 1;
        let diffs: Option<Vec<u64>> = (0..length as u64 - 1)
            .map(|i| step.checked_mul(i).and_then(|x| x.checked_add(1)))
            .collect();
        let seq = diffs
            .and_then(|d| DeltaSequence::new(d).ok())
            .and_then(|d| IndexSequence::from_deltas(&d).ok());
        match seq {
            Some(s) => family.push(s),
            None => {
                return Err(SequenceError::Infeasible {
                    requested: count,
                    length,
                    achievable: k,
                })
            }
        }
    }
    Ok(family)
}
