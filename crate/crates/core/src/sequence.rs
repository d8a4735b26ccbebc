//! Elements of `R^N` encoded as finitely many constant runs plus a symbolic tail.

use serde::{Deserialize, Serialize};

use crate::error::{ModtopError, Result};

/// A constant block `x_n = value` for `start <= n <= end` (1-based, inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub start: u64,
    pub end: u64,
    pub value: f64,
}

impl Run {
    pub fn len(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Zero,
    Constant(f64),
}

impl Tail {
    pub fn value(&self) -> f64 {
        match self {
            Tail::Zero => 0.0,
            Tail::Constant(c) => *c,
        }
    }

    fn from_value(c: f64) -> Tail {
        if c == 0.0 {
            Tail::Zero
        } else {
            Tail::Constant(c)
        }
    }
}

/// Runs cover `1..=N` contiguously; the tail holds for every `n > N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceVec {
    runs: Vec<Run>,
    tail: Tail,
}

impl SequenceVec {
    /// Builds a vector from contiguous runs starting at index 1.
    pub fn new(runs: Vec<Run>, tail: Tail) -> Result<Self> {
        let mut next = 1u64;
        for r in &runs {
            if r.start != next || r.end < r.start {
                return Err(ModtopError::InvalidSequence(format!(
                    "run {}..={} does not continue the initial segment ending at {}",
                    r.start,
                    r.end,
                    next - 1
                )));
            }
            if !r.value.is_finite() {
                return Err(ModtopError::InvalidSequence("run values must be finite".into()));
            }
            next = r.end + 1;
        }
        if !tail.value().is_finite() {
            return Err(ModtopError::InvalidSequence("tail constant must be finite".into()));
        }
        let mut v = Self { runs, tail: Tail::from_value(tail.value()) };
        v.normalize();
        Ok(v)
    }

    /// Like [`SequenceVec::new`] but accepts gaps (filled with zeros) between runs.
    pub fn from_runs(mut runs: Vec<Run>, tail: Tail) -> Result<Self> {
        runs.sort_by_key(|r| r.start);
        let mut filled = Vec::with_capacity(runs.len() * 2);
        let mut next = 1u64;
        for r in runs {
            if r.start < next || r.end < r.start || r.start == 0 {
                return Err(ModtopError::InvalidSequence(format!("overlapping or empty run {}..={}", r.start, r.end)));
            }
            if r.start > next {
                filled.push(Run { start: next, end: r.start - 1, value: 0.0 });
            }
            next = r.end + 1;
            filled.push(r);
        }
        Self::new(filled, tail)
    }

    pub fn zero() -> Self {
        Self { runs: Vec::new(), tail: Tail::Zero }
    }

    /// `c * 1_N`.
    pub fn constant(c: f64) -> Self {
        Self::new(Vec::new(), Tail::Constant(c)).expect("finite constant")
    }

    /// `c` on `1..=n`, zero afterwards.
    pub fn prefix_constant(n: u64, c: f64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        Self::new(vec![Run { start: 1, end: n, value: c }], Tail::Zero).expect("finite constant")
    }

    /// Dense values `x_1..x_k`, zero afterwards.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let runs = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Run { start: i as u64 + 1, end: i as u64 + 1, value: v })
            .collect();
        Self::new(runs, Tail::Zero)
    }

    /// Sparse `(index, value)` entries, zero elsewhere.
    pub fn from_sparse(entries: &[(u64, f64)]) -> Result<Self> {
        let runs = entries.iter().map(|&(n, v)| Run { start: n, end: n, value: v }).collect();
        Self::from_runs(runs, Tail::Zero)
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Last index covered by runs (0 if none).
    pub fn runs_end(&self) -> u64 {
        self.runs.last().map_or(0, |r| r.end)
    }

    /// Largest index with a nonzero value, `None` for infinite support.
    pub fn support_end(&self) -> Option<u64> {
        if self.tail != Tail::Zero {
            return None;
        }
        Some(self.runs.iter().rev().find(|r| r.value != 0.0).map_or(0, |r| r.end))
    }

    pub fn is_zero(&self) -> bool {
        self.tail == Tail::Zero && self.runs.iter().all(|r| r.value == 0.0)
    }

    pub fn value_at(&self, n: u64) -> f64 {
        if n == 0 || n > self.runs_end() {
            return self.tail.value();
        }
        let i = self.runs.partition_point(|r| r.end < n);
        self.runs[i].value
    }

    /// `sup_n |x_n|`.
    pub fn sup_abs(&self) -> f64 {
        self.runs.iter().map(|r| r.value.abs()).fold(self.tail.value().abs(), f64::max)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        let runs = self.runs.iter().map(|r| Run { value: r.value * lambda, ..*r }).collect();
        let mut v = Self { runs, tail: Tail::from_value(self.tail.value() * lambda) };
        v.normalize();
        v
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// `a * self + b * other`, refined to common breakpoints.
    pub fn lin_comb(a: f64, x: &SequenceVec, b: f64, y: &SequenceVec) -> SequenceVec {
        let end = x.runs_end().max(y.runs_end());
        let mut cuts: Vec<u64> = x
            .runs
            .iter()
            .chain(y.runs.iter())
            .map(|r| r.end)
            .chain(std::iter::once(end))
            .collect();
        cuts.sort_unstable();
        cuts.dedup();
        let mut runs = Vec::with_capacity(cuts.len());
        let mut start = 1u64;
        for &c in &cuts {
            if c < start {
                continue;
            }
            let value = a * x.value_at(start) + b * y.value_at(start);
            runs.push(Run { start, end: c, value });
            start = c + 1;
        }
        let tail = Tail::from_value(a * x.tail.value() + b * y.tail.value());
        let mut v = SequenceVec { runs, tail };
        v.normalize();
        v
    }

    pub fn sub(&self, other: &SequenceVec) -> SequenceVec {
        Self::lin_comb(1.0, self, -1.0, other)
    }

    pub fn add(&self, other: &SequenceVec) -> SequenceVec {
        Self::lin_comb(1.0, self, 1.0, other)
    }

    /// `(x_1, ..., x_n, 0, 0, ...)`.
    pub fn prefix(&self, n: u64) -> SequenceVec {
        let mut runs = Vec::new();
        for r in &self.runs {
            if r.start > n {
                break;
            }
            runs.push(Run { end: r.end.min(n), ..*r });
        }
        let covered = runs.last().map_or(0, |r: &Run| r.end);
        if n > covered && self.tail != Tail::Zero {
            runs.push(Run { start: covered + 1, end: n, value: self.tail.value() });
        }
        let mut v = SequenceVec { runs, tail: Tail::Zero };
        v.normalize();
        v
    }

    /// Merges adjacent equal runs and drops trailing runs equal to the tail.
    fn normalize(&mut self) {
        let mut merged: Vec<Run> = Vec::with_capacity(self.runs.len());
        for r in self.runs.drain(..) {
            match merged.last_mut() {
                Some(last) if last.value == r.value => last.end = r.end,
                _ => merged.push(r),
            }
        }
        let t = self.tail.value();
        while merged.last().is_some_and(|r| r.value == t) {
            merged.pop();
        }
        self.runs = merged;
    }
}
