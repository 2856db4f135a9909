//! On-disk formats: binary fields with a one-line text header, and text rectangle lists.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::{Dim, Rect, ScalarField};

const MAGIC: &str = "HMAXFIELD";
const VERSION: &str = "v1";

/// A field read from disk, with header tokens beyond the fixed ones.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub dim: Dim,
    pub field: ScalarField,
    pub extra: Vec<(String, String)>,
}

fn join_ints(xs: &[i64]) -> String {
    xs.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

fn parse_ints(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("bad integer {t:?}: {e}"))))
        .collect()
}

/// Writes `HMAXFIELD v1 n=.. lo=.. hi=.. dtype=f64 [extra..]\n` and the raw values
/// as little-endian f64 in row-major order (last axis fastest).
pub fn write_field<W: Write>(
    mut w: W,
    dim: Dim,
    field: &ScalarField,
    extra: &[(&str, String)],
) -> Result<()> {
    if field.dim() != dim.d() {
        return Err(Error::DimensionMismatch {
            expected: dim.d(),
            got: field.dim(),
        });
    }
    let mut header = format!(
        "{MAGIC} {VERSION} n={} lo={} hi={} dtype=f64",
        dim.n(),
        join_ints(field.window().lo()),
        join_ints(field.window().hi())
    );
    for (k, v) in extra {
        header.push_str(&format!(" {k}={v}"));
    }
    header.push('\n');
    w.write_all(header.as_bytes())?;
    let mut buf = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: BufRead>(mut r: R) -> Result<FieldFile> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    let header = std::str::from_utf8(&line)
        .map_err(|_| Error::Parse("field header is not UTF-8".into()))?
        .trim_end();
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(Error::Parse("missing HMAXFIELD magic".into()));
    }
    if tokens.next() != Some(VERSION) {
        return Err(Error::Parse("unsupported field version".into()));
    }
    let (mut n, mut lo, mut hi, mut dtype) = (None, None, None, None);
    let mut extra = Vec::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("header token {tok:?} is not key=value")))?;
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|e| Error::Parse(format!("n: {e}")))?),
            "lo" => lo = Some(parse_ints(v)?),
            "hi" => hi = Some(parse_ints(v)?),
            "dtype" => dtype = Some(v.to_string()),
            _ => extra.push((k.to_string(), v.to_string())),
        }
    }
    let missing = |what: &str| Error::Parse(format!("field header lacks {what}"));
    let dim = Dim::new(n.ok_or_else(|| missing("n"))?)?;
    if dtype.as_deref() != Some("f64") {
        return Err(Error::Parse("only dtype=f64 is supported".into()));
    }
    let window = Rect::new(lo.ok_or_else(|| missing("lo"))?, hi.ok_or_else(|| missing("hi"))?)?;
    if window.dim() != dim.d() {
        return Err(Error::DimensionMismatch {
            expected: dim.d(),
            got: window.dim(),
        });
    }
    let count = window.cell_count()?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Parse(format!(
            "expected {} value bytes, found {}",
            count * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FieldFile {
        dim,
        field: ScalarField::new(window, values)?,
        extra,
    })
}

/// One rectangle per line, `lo_1 .. lo_d hi_1 .. hi_d`; `#` starts a comment.
pub fn parse_rect_list(text: &str) -> Result<Vec<Rect>> {
    let mut rects = Vec::new();
    let mut dim = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums = line
            .split_whitespace()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|e| Error::Parse(format!("line {}: {t:?}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if nums.len() % 2 != 0 {
            return Err(Error::Parse(format!(
                "line {}: odd number of coordinates",
                lineno + 1
            )));
        }
        let d = nums.len() / 2;
        if *dim.get_or_insert(d) != d {
            return Err(Error::Parse(format!(
                "line {}: dimension {d} differs from earlier lines",
                lineno + 1
            )));
        }
        let r = Rect::new(nums[..d].to_vec(), nums[d..].to_vec())
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        rects.push(r);
    }
    Ok(rects)
}

pub fn format_rect_list(rects: &[Rect]) -> String {
    let mut out = String::new();
    for r in rects {
        let line: Vec<String> = r.lo().iter().chain(r.hi()).map(i64::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
