//! Elements of `M(Omega)` on an interval: piecewise-constant functions with an
//! optional closed-form catalog component near the left endpoint.

use serde::{Deserialize, Serialize};

use crate::error::{ModtopError, Result};

/// Catalog steps expanded beyond this index are refused.
const MAX_STEP_EXPANSION: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

/// `scale * sum_{n >= first} n^{1/n} 1_{(1/(n+1), 1/n)}`, supported on `(0, 1/first)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSteps {
    pub scale: f64,
    pub first: u64,
}

/// Endpoints `(1/(n+1), 1/n)` of the `n`-th catalog step. Every caller goes
/// through here so breakpoints compare exactly.
pub fn step_bounds(n: u64) -> (f64, f64) {
    (1.0 / (n as f64 + 1.0), 1.0 / n as f64)
}

/// `n^{1/n}`.
pub fn step_height(n: u64) -> f64 {
    let nf = n as f64;
    nf.powf(1.0 / nf)
}

impl HarmonicSteps {
    /// Right end of the catalog support.
    pub fn boundary(&self) -> f64 {
        step_bounds(self.first).1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFunction {
    domain: (f64, f64),
    pieces: Vec<Piece>,
    catalog: Option<HarmonicSteps>,
}

impl PiecewiseFunction {
    /// Pieces must be sorted and contiguous, covering the domain (or, with a
    /// catalog, the part of the domain right of the catalog support).
    pub fn new(domain: (f64, f64), pieces: Vec<Piece>, catalog: Option<HarmonicSteps>) -> Result<Self> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(ModtopError::InvalidFunction(format!("bad domain ({a}, {b})")));
        }
        let start = match &catalog {
            Some(c) => {
                if a != 0.0 || c.first == 0 || c.boundary() > b || !c.scale.is_finite() {
                    return Err(ModtopError::InvalidFunction(
                        "catalog steps live on (0, 1/first) inside a domain starting at 0".into(),
                    ));
                }
                c.boundary()
            }
            None => a,
        };
        let mut at = start;
        for p in &pieces {
            if p.lo != at || !(p.hi > p.lo) || !p.value.is_finite() {
                return Err(ModtopError::InvalidFunction(format!(
                    "piece ({}, {}) does not continue the partition at {}",
                    p.lo, p.hi, at
                )));
            }
            at = p.hi;
        }
        if at != b {
            return Err(ModtopError::InvalidFunction(format!("pieces end at {at}, domain ends at {b}")));
        }
        let mut f = Self { domain, pieces, catalog };
        f.normalize();
        Ok(f)
    }

    /// `c` on `(a, b)`.
    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new((a, b), vec![Piece { lo: a, hi: b, value: c }], None)
    }

    /// The catalog function `v = sum_n n^{1/n} 1_{(1/(n+1), 1/n)}` on `(0, 1)`, scaled.
    pub fn harmonic_steps(scale: f64) -> Self {
        Self::new((0.0, 1.0), Vec::new(), Some(HarmonicSteps { scale, first: 1 })).expect("valid catalog")
    }

    /// `v_k = 1_{(1/(k+1), 1)} v`, a finite piecewise-constant function.
    pub fn harmonic_steps_truncated(k: u64, scale: f64) -> Self {
        let mut pieces = vec![Piece { lo: 0.0, hi: step_bounds(k).0, value: 0.0 }];
        for n in (1..=k).rev() {
            let (lo, hi) = step_bounds(n);
            pieces.push(Piece { lo, hi, value: scale * step_height(n) });
        }
        Self::new((0.0, 1.0), pieces, None).expect("valid steps")
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn catalog(&self) -> Option<HarmonicSteps> {
        self.catalog
    }

    pub fn is_zero(&self) -> bool {
        self.catalog.is_none() && self.pieces.iter().all(|p| p.value == 0.0)
    }

    /// Value at `x` (at a breakpoint the right piece wins).
    pub fn value_at(&self, x: f64) -> f64 {
        if let Some(c) = self.catalog {
            if x < c.boundary() {
                if x <= 0.0 {
                    return 0.0;
                }
                let n = (1.0 / x).floor().max(1.0) as u64;
                // x in [1/(n+1), 1/n) for n = floor(1/x), up to rounding at breakpoints
                let n = if step_bounds(n).0 > x { n + 1 } else { n };
                return c.scale * step_height(n);
            }
        }
        let i = self.pieces.partition_point(|p| p.hi <= x).min(self.pieces.len().saturating_sub(1));
        self.pieces.get(i).map_or(0.0, |p| p.value)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        let pieces = self.pieces.iter().map(|p| Piece { value: p.value * lambda, ..*p }).collect();
        let catalog = self.catalog.map(|c| HarmonicSteps { scale: c.scale * lambda, ..c });
        let mut f = Self { domain: self.domain, pieces, catalog };
        f.normalize();
        f
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn sub(&self, other: &PiecewiseFunction) -> Result<Self> {
        Self::lin_comb(1.0, self, -1.0, other)
    }

    pub fn add(&self, other: &PiecewiseFunction) -> Result<Self> {
        Self::lin_comb(1.0, self, 1.0, other)
    }

    /// Right end of the initial interval `(a, c)` where the piecewise part is zero.
    fn zero_prefix_end(&self) -> f64 {
        let mut c = self.domain.0;
        for p in &self.pieces {
            if p.value != 0.0 {
                break;
            }
            c = p.hi;
        }
        c
    }

    /// Rewrites catalog steps `first..m` as explicit pieces.
    fn expand_catalog(&self, m: u64) -> Self {
        let Some(cat) = self.catalog else { return self.clone() };
        if m <= cat.first {
            return self.clone();
        }
        let mut pieces = Vec::with_capacity((m - cat.first) as usize + self.pieces.len());
        for n in (cat.first..m).rev() {
            let (lo, hi) = step_bounds(n);
            pieces.push(Piece { lo, hi, value: cat.scale * step_height(n) });
        }
        pieces.extend_from_slice(&self.pieces);
        Self { domain: self.domain, pieces, catalog: Some(HarmonicSteps { scale: cat.scale, first: m }) }
    }

    /// `a * f + b * g`. A catalog component may only meet the other operand
    /// where that operand's piecewise part vanishes near 0.
    pub fn lin_comb(a: f64, f: &PiecewiseFunction, b: f64, g: &PiecewiseFunction) -> Result<Self> {
        if f.domain != g.domain {
            return Err(ModtopError::DomainMismatch(format!(
                "({}, {}) vs ({}, {})",
                f.domain.0, f.domain.1, g.domain.0, g.domain.1
            )));
        }
        let first_needed = |cat: HarmonicSteps, other: &PiecewiseFunction| -> Result<u64> {
            let c = other.zero_prefix_end();
            if c <= 0.0 {
                return Err(ModtopError::Unsupported(
                    "catalog steps combined with a function that is nonzero near 0".into(),
                ));
            }
            let mut m = cat.first.max((1.0 / c).ceil() as u64);
            while step_bounds(m).1 > c {
                m += 1;
            }
            Ok(m)
        };
        let m = match (f.catalog, g.catalog) {
            (Some(cf), Some(cg)) => Some(cf.first.max(cg.first)),
            (Some(cf), None) => Some(first_needed(cf, g)?),
            (None, Some(cg)) => Some(first_needed(cg, f)?),
            (None, None) => None,
        };
        if m.is_some_and(|m| m > MAX_STEP_EXPANSION) {
            return Err(ModtopError::Unsupported("catalog expansion beyond 10^6 steps".into()));
        }
        let (f, g) = match m {
            Some(m) => (f.expand_catalog(m), g.expand_catalog(m)),
            None => (f.clone(), g.clone()),
        };
        let start = m.map_or(f.domain.0, |m| step_bounds(m).1);
        let mut cuts: Vec<f64> = f
            .pieces
            .iter()
            .chain(g.pieces.iter())
            .flat_map(|p| [p.lo, p.hi])
            .filter(|&x| x >= start)
            .chain([start, f.domain.1])
            .collect();
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();
        let pieces = cuts
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                Piece { lo: w[0], hi: w[1], value: a * f.value_at(mid) + b * g.value_at(mid) }
            })
            .collect::<Vec<_>>();
        let catalog = m.map(|m| {
            let sf = f.catalog.map_or(0.0, |c| c.scale);
            let sg = g.catalog.map_or(0.0, |c| c.scale);
            HarmonicSteps { scale: a * sf + b * sg, first: m }
        });
        let mut out = Self { domain: f.domain, pieces, catalog };
        out.normalize();
        Ok(out)
    }

    fn normalize(&mut self) {
        if let Some(c) = self.catalog {
            if c.scale == 0.0 {
                self.catalog = None;
                self.pieces.insert(0, Piece { lo: self.domain.0, hi: c.boundary(), value: 0.0 });
            }
        }
        let mut merged: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in self.pieces.drain(..) {
            match merged.last_mut() {
                Some(last) if last.value == p.value => last.hi = p.hi,
                _ => merged.push(p),
            }
        }
        self.pieces = merged;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        let v = PiecewiseFunction::harmonic_steps(1.0);
        assert_eq!(v.value_at(0.75), 1.0);
        assert!((v.value_at(0.4) - 2f64.sqrt()).abs() < 1e-15);
        assert!((v.value_at(0.3) - 3f64.powf(1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn v_minus_vk_is_a_shifted_catalog() {
        let v = PiecewiseFunction::harmonic_steps(1.0);
        let vk = PiecewiseFunction::harmonic_steps_truncated(5, 1.0);
        let d = v.sub(&vk).unwrap();
        let c = d.catalog().unwrap();
        assert_eq!(c.first, 6);
        assert_eq!(c.scale, 1.0);
        assert!(d.pieces().iter().all(|p| p.value == 0.0));
    }

    #[test]
    fn v_minus_eps_vk_keeps_head_pieces() {
        let v = PiecewiseFunction::harmonic_steps(1.0);
        let vk = PiecewiseFunction::harmonic_steps_truncated(3, 0.5);
        let d = v.sub(&vk).unwrap();
        assert_eq!(d.catalog().unwrap().first, 4);
        assert!((d.value_at(0.75) - 0.5).abs() < 1e-15);
        assert!((d.value_at(0.4) - 0.5 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn catalog_against_nonzero_head_is_unsupported() {
        let v = PiecewiseFunction::harmonic_steps(1.0);
        let one = PiecewiseFunction::constant(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(v.sub(&one), Err(ModtopError::Unsupported(_))));
    }

    #[test]
    fn piecewise_subtraction_refines() {
        let f = PiecewiseFunction::new(
            (0.0, 1.0),
            vec![Piece { lo: 0.0, hi: 0.5, value: 1.0 }, Piece { lo: 0.5, hi: 1.0, value: 2.0 }],
            None,
        )
        .unwrap();
        let g = PiecewiseFunction::new(
            (0.0, 1.0),
            vec![Piece { lo: 0.0, hi: 0.25, value: 1.0 }, Piece { lo: 0.25, hi: 1.0, value: 0.0 }],
            None,
        )
        .unwrap();
        let d = f.sub(&g).unwrap();
        assert_eq!(d.value_at(0.1), 0.0);
        assert_eq!(d.value_at(0.3), 1.0);
        assert_eq!(d.value_at(0.7), 2.0);
        assert!(f.sub(&PiecewiseFunction::constant(0.0, 0.5, 1.0).unwrap()).is_err());
    }
}
