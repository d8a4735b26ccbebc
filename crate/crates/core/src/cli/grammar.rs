//! Text forms for vectors used on the command line and in configs.
//!
//! Sequences: `runs=[(1..2,0.5),(4..4,-1)];tail=zero` or `tail=const:0.25`.
//! Gaps between runs are zero. Either part may be omitted.
//!
//! Functions: `pieces=[(0..0.5,1),(0.5..1,2)]`, `const:a,b,c` (the value `c`
//! on `(a, b)`), `harmonic:s` (the catalog steps on `(0, 1)` scaled by `s`)
//! and `harmonic:s;k=K` (the first `K` catalog steps only).

use crate::error::{ModtopError, Result};
use crate::function::{Piece, PiecewiseFunction};
use crate::sequence::{Run, SequenceVec, Tail};

fn bad(what: &str, s: &str) -> ModtopError {
    ModtopError::Config(format!("cannot parse {what} '{s}'"))
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| bad(what, s))
}

/// Splits `[(a..b,v),(c..d,w)]` into `(a, b, v)` string triples.
fn tuples<'a>(body: &'a str, what: &str) -> Result<Vec<(&'a str, &'a str, &'a str)>> {
    let inner = body
        .trim()
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| bad(what, body))?
        .trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').ok_or_else(|| bad(what, rest))?;
        let close = open.find(')').ok_or_else(|| bad(what, rest))?;
        let tuple = &open[..close];
        let (range, value) = tuple.split_once(',').ok_or_else(|| bad(what, tuple))?;
        let (lo, hi) = range.split_once("..").ok_or_else(|| bad(what, range))?;
        out.push((lo, hi, value));
        rest = open[close + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    Ok(out)
}

pub fn parse_sequence(s: &str) -> Result<SequenceVec> {
    let mut runs = Vec::new();
    let mut tail = Tail::Zero;
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| bad("sequence part", part))?;
        match key.trim() {
            "runs" => {
                for (lo, hi, v) in tuples(value, "runs")? {
                    runs.push(Run { start: num(lo, "run start")?, end: num(hi, "run end")?, value: num(v, "run value")? });
                }
            }
            "tail" => {
                tail = match value.trim() {
                    "zero" => Tail::Zero,
                    t => Tail::Constant(num(t.strip_prefix("const:").ok_or_else(|| bad("tail", t))?, "tail")?),
                }
            }
            k => return Err(bad("sequence key", k)),
        }
    }
    SequenceVec::from_runs(runs, tail).map_err(|e| ModtopError::Config(e.to_string()))
}

pub fn parse_function(s: &str) -> Result<PiecewiseFunction> {
    let s = s.trim();
    let f = if let Some(body) = s.strip_prefix("pieces=") {
        let pieces = tuples(body, "pieces")?
            .into_iter()
            .map(|(lo, hi, v)| Ok(Piece { lo: num(lo, "piece start")?, hi: num(hi, "piece end")?, value: num(v, "piece value")? }))
            .collect::<Result<Vec<_>>>()?;
        let (Some(first), Some(last)) = (pieces.first(), pieces.last()) else {
            return Err(bad("function", s));
        };
        PiecewiseFunction::new((first.lo, last.hi), pieces, None)
    } else if let Some(body) = s.strip_prefix("const:") {
        let v: Vec<f64> = body.split(',').map(|t| num(t, "constant function")).collect::<Result<_>>()?;
        match v.as_slice() {
            [a, b, c] => PiecewiseFunction::constant(*a, *b, *c),
            _ => return Err(bad("constant function", s)),
        }
    } else if let Some(body) = s.strip_prefix("harmonic:") {
        match body.split_once(';') {
            None => Ok(PiecewiseFunction::harmonic_steps(num(body, "catalog scale")?)),
            Some((scale, k)) => {
                let k = k.trim().strip_prefix("k=").ok_or_else(|| bad("catalog truncation", k))?;
                Ok(PiecewiseFunction::harmonic_steps_truncated(num(k, "catalog truncation")?, num(scale, "catalog scale")?))
            }
        }
    } else {
        return Err(bad("function", s));
    };
    f.map_err(|e| ModtopError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequences() {
        let x = parse_sequence("runs=[(1..2,0.5)];tail=zero").unwrap();
        assert_eq!(x, SequenceVec::prefix_constant(2, 0.5));
        let y = parse_sequence("runs=[(3..4, -1)]; tail=const:0.25").unwrap();
        assert_eq!(y.value_at(1), 0.0);
        assert_eq!(y.value_at(4), -1.0);
        assert_eq!(y.value_at(100), 0.25);
        assert_eq!(parse_sequence("tail=const:0.5").unwrap(), SequenceVec::constant(0.5));
        assert_eq!(parse_sequence("runs=[]").unwrap(), SequenceVec::zero());
        for bad in ["runs=(1..2,0.5)", "runs=[(1..2)]", "tail=one", "foo=1", "runs=[(2..1,1)]"] {
            assert!(matches!(parse_sequence(bad), Err(ModtopError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn functions() {
        let u = parse_function("const:0,0.5,1").unwrap();
        assert_eq!(u, PiecewiseFunction::constant(0.0, 0.5, 1.0).unwrap());
        let v = parse_function("pieces=[(0..0.5,1),(0.5..1,2)]").unwrap();
        assert_eq!(v.value_at(0.75), 2.0);
        assert_eq!(parse_function("harmonic:0.5").unwrap(), PiecewiseFunction::harmonic_steps(0.5));
        assert_eq!(
            parse_function("harmonic:0.5;k=5").unwrap(),
            PiecewiseFunction::harmonic_steps_truncated(5, 0.5)
        );
        assert!(parse_function("pieces=[(0..0.5,1),(0.6..1,2)]").is_err());
        assert!(parse_function("sin").is_err());
    }
}
