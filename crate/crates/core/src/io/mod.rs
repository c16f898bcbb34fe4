//! Field files, synthetic fields and JSON serialization.
//!
//! SFG text: a header line `SFG <d> <nx> <ny> [<nz>]` followed by the values,
//! x fastest, separated by any whitespace. [`write_sfg`] puts one x-row per
//! line. SFGB binary: the bytes `SFGB`, `d` as u32 LE, the `d` dims as u32 LE,
//! then the values as f64 LE.

mod synth;

use std::collections::BTreeSet;

use crate::mesh::{Triangulation, VertexId};
use crate::order::ScalarField;
use crate::persistence::{PersistenceCurve, PersistencePair};
use crate::{Error, Result};

pub use synth::{synth_field, Bump, SplitMix64, SynthKind, SynthSpec};

/// A grid field as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub dims: Vec<usize>,
    pub field: ScalarField,
}

impl GridField {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if values.len() != expected {
            return Err(Error::SizeMismatch { expected, got: values.len() });
        }
        Triangulation::grid(&dims)?;
        Ok(Self { dims, field: ScalarField::new(values)? })
    }

    pub fn mesh(&self) -> Triangulation {
        Triangulation::grid(&self.dims).expect("dims validated on construction")
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_sfg(text: &str) -> Result<GridField> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.find(|(_, l)| !l.trim().is_empty()).ok_or_else(|| parse_err(1, "empty input"))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("SFG") {
        return Err(parse_err(hline, "expected header `SFG <d> <nx> <ny> [<nz>]`"));
    }
    let nums: Vec<usize> = tok
        .map(|t| t.parse().map_err(|_| parse_err(hline, format!("bad header field `{t}`"))))
        .collect::<Result<_>>()?;
    let Some((&d, dims)) = nums.split_first() else {
        return Err(parse_err(hline, "missing dimension"));
    };
    if !(2..=3).contains(&d) || dims.len() != d {
        return Err(parse_err(hline, format!("dimension {d} does not match {} sizes", dims.len())));
    }
    let dims = dims.to_vec();
    let expected: usize = dims.iter().product();
    let mut values = Vec::with_capacity(expected);
    let mut last = hline;
    for (ln, line) in lines {
        for t in line.split_whitespace() {
            let v: f64 = t.parse().map_err(|_| parse_err(ln, format!("bad value `{t}`")))?;
            if !v.is_finite() {
                return Err(parse_err(ln, format!("non-finite value `{t}`")));
            }
            if values.len() == expected {
                return Err(parse_err(ln, format!("more than {expected} values")));
            }
            values.push(v);
            last = ln;
        }
    }
    if values.len() != expected {
        return Err(parse_err(last, format!("expected {expected} values, found {}", values.len())));
    }
    GridField::new(dims, values)
}

pub fn write_sfg(dims: &[usize], values: &[f64]) -> String {
    let mut out = format!("SFG {}", dims.len());
    for d in dims {
        out.push_str(&format!(" {d}"));
    }
    out.push('\n');
    let nx = dims.first().copied().unwrap_or(1).max(1);
    for row in values.chunks(nx) {
        let parts: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_sfgb(bytes: &[u8]) -> Result<GridField> {
    let err = |msg: &str| parse_err(0, msg);
    if bytes.len() < 8 || &bytes[..4] != b"SFGB" {
        return Err(err("missing SFGB magic"));
    }
    let u32_at = |i: usize| -> Result<u32> {
        bytes.get(i..i + 4).map(|b| u32::from_le_bytes(b.try_into().unwrap())).ok_or_else(|| err("truncated header"))
    };
    let d = u32_at(4)? as usize;
    if !(2..=3).contains(&d) {
        return Err(err("dimension must be 2 or 3"));
    }
    let dims: Vec<usize> = (0..d).map(|i| u32_at(8 + 4 * i).map(|x| x as usize)).collect::<Result<_>>()?;
    let start = 8 + 4 * d;
    let body = &bytes[start..];
    if !body.len().is_multiple_of(8) {
        return Err(err("value block is not a whole number of f64"));
    }
    let values: Vec<f64> = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    GridField::new(dims, values)
}

pub fn write_sfgb(dims: &[usize], values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 4 * dims.len() + 8 * values.len());
    out.extend_from_slice(b"SFGB");
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Reads SFGB when the magic matches, SFG text otherwise.
pub fn read_field(bytes: &[u8]) -> Result<GridField> {
    if bytes.starts_with(b"SFGB") {
        read_sfgb(bytes)
    } else {
        let text = std::str::from_utf8(bytes).map_err(|e| parse_err(0, e.to_string()))?;
        read_sfg(text)
    }
}

pub fn write_diagram_json(pairs: &[PersistencePair]) -> String {
    serde_json::to_string_pretty(pairs).expect("pairs serialize")
}

pub fn read_diagram_json(text: &str) -> Result<Vec<PersistencePair>> {
    serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))
}

pub fn write_curve_json(curve: &PersistenceCurve) -> String {
    serde_json::to_string_pretty(&curve.points).expect("curve serializes")
}

pub fn read_curve_json(text: &str) -> Result<PersistenceCurve> {
    let points = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    Ok(PersistenceCurve { points })
}

/// One vertex id per line; blank lines and `#` comments are skipped.
pub fn read_preserve_list(text: &str, n: usize) -> Result<BTreeSet<VertexId>> {
    let mut out = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        let v: VertexId = t.parse().map_err(|_| parse_err(i + 1, format!("bad vertex id `{t}`")))?;
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        out.insert(v);
    }
    Ok(out)
}

pub fn write_preserve_list(ids: impl IntoIterator<Item = VertexId>) -> String {
    ids.into_iter().map(|v| format!("{v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::{persistence_curve, Polarity};

    #[test]
    fn reads_small_field() {
        let g = read_sfg("SFG 2 2 2\n0 1 2 3").unwrap();
        assert_eq!(g.dims, vec![2, 2]);
        assert_eq!(g.field.values(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn count_mismatch_names_line() {
        assert_eq!(
            read_sfg("SFG 2 2 2\n0 1\n2\n"),
            Err(Error::Parse { line: 3, msg: "expected 4 values, found 3".into() })
        );
        assert!(matches!(read_sfg("SFG 2 2 2\n0 1 2 3 4"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_sfg("SFG 2 2 2\n0 1\nx 3"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(read_sfg("SFG 2 2 2\n0 1 inf 3"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_sfg("SFG 3 2 2\n0 1 2 3"), Err(Error::Parse { line: 1, .. })));
        assert!(read_sfg("").is_err());
        assert!(matches!(read_sfg("SFG 2 1 4\n0 1 2 3"), Err(Error::InvalidDims(_))));
    }

    #[test]
    fn text_and_binary_round_trip() {
        let vals = vec![0.1, -0.0, 1e-300, 12345.678, 3.0, f64::MAX, f64::MIN_POSITIVE, 7.0, 8.5];
        let text = write_sfg(&[3, 3], &vals);
        let back = read_sfg(&text).unwrap();
        assert_eq!(back.field.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), vals.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(write_sfg(&back.dims, back.field.values()), text);
        let bin = write_sfgb(&[3, 3], &vals);
        assert_eq!(read_field(&bin).unwrap(), back);
        assert!(read_sfgb(&bin[..bin.len() - 3]).is_err());
    }

    #[test]
    fn diagram_json_has_all_keys() {
        let p = PersistencePair {
            extremum_vertex: 18,
            saddle_vertex: Some(12),
            birth: 6.0,
            death: 4.0,
            persistence: 2.0,
            polarity: Polarity::MaxSaddle,
        };
        let text = write_diagram_json(std::slice::from_ref(&p));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let obj = v.as_array().unwrap()[0].as_object().unwrap();
        for k in ["extremumVertex", "saddleVertex", "birth", "death", "persistence", "polarity"] {
            assert!(obj.contains_key(k), "{k}");
        }
        assert_eq!(read_diagram_json(&text).unwrap(), vec![p.clone()]);
        let curve = persistence_curve(&[p]);
        assert_eq!(read_curve_json(&write_curve_json(&curve)).unwrap(), curve);
    }

    #[test]
    fn preserve_lists() {
        assert_eq!(read_preserve_list("0\n24\n", 25).unwrap(), BTreeSet::from([0, 24]));
        assert_eq!(read_preserve_list("25\n", 25), Err(Error::VertexOutOfRange { vertex: 25, n: 25 }));
        assert!(matches!(read_preserve_list("1\nabc\n", 25), Err(Error::Parse { line: 2, .. })));
        assert_eq!(read_preserve_list(&write_preserve_list([3, 1]), 5).unwrap(), BTreeSet::from([1, 3]));
    }
}
