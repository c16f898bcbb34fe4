use super::Triangulation;
use crate::{Error, Result};

/// Parses an OFF file with triangle faces only.
pub fn load_off(text: &str) -> Result<Triangulation> {
    // (line number, tokens) with comments and blank lines removed
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then(|| (i + 1, l))
    });
    let parse_err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };

    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let mut rest = header.strip_prefix("OFF").ok_or_else(|| parse_err(line, "missing OFF header"))?.trim();
    let mut counts_line = line;
    if rest.is_empty() {
        let (l, r) = lines.next().ok_or_else(|| parse_err(line, "missing counts line"))?;
        counts_line = l;
        rest = r;
    }
    let counts: Vec<usize> = rest
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(counts_line, "bad count")))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(parse_err(counts_line, "expected vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut coords = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, text) = lines.next().ok_or_else(|| parse_err(counts_line, "truncated vertex list"))?;
        let xyz: Vec<f64> = text
            .split_whitespace()
            .take(3)
            .map(|t| t.parse().map_err(|_| parse_err(l, "bad coordinate")))
            .collect::<Result<_>>()?;
        if xyz.len() != 3 {
            return Err(parse_err(l, "expected three coordinates"));
        }
        coords.push([xyz[0], xyz[1], xyz[2]]);
    }

    let mut triangles = Vec::with_capacity(nf);
    for face in 0..nf {
        let (l, text) = lines.next().ok_or_else(|| parse_err(counts_line, "truncated face list"))?;
        let ids: Vec<usize> = text
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(l, "bad face index")))
            .collect::<Result<_>>()?;
        let arity = *ids.first().ok_or_else(|| parse_err(l, "empty face"))?;
        if ids.len() < arity + 1 {
            return Err(parse_err(l, "face shorter than its arity"));
        }
        if arity != 3 {
            return Err(Error::NonTriangleFace { face, arity });
        }
        triangles.push([ids[1], ids[2], ids[3]]);
    }
    Triangulation::from_triangles(coords, triangles)
}

/// Serializes coordinates and triangles as OFF text.
pub fn write_off(coords: &[[f64; 3]], triangles: &[[usize; 3]]) -> String {
    let mut out = format!("OFF\n{} {} 0\n", coords.len(), triangles.len());
    for c in coords {
        out.push_str(&format!("{} {} {}\n", c[0], c[1], c[2]));
    }
    for t in triangles {
        out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    out
}
