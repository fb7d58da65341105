//! Plain-text checkpoints of network parameters and Adam state.
//!
//! ```text
//! seqmo-pointernet 1
//! adam_step 12
//! tensor param/embedding 2 20 64
//! <values, one line per leading index>
//! ...
//! ```
//! Values are written with Rust's shortest round-trip formatting, so a
//! loaded checkpoint is bit-identical to the saved one.

use std::fmt::Write as _;
use std::path::Path;

use super::network::{PointerNetParams, GROUP_NAMES};
use super::tensor::Tensor;
use super::train::AdamState;
use crate::error::{Error, ParseError, ParseErrorKind, Result};

const MAGIC: &str = "seqmo-pointernet 1";

fn write_tensor(out: &mut String, name: &str, t: &Tensor) {
    let shape: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "tensor {name} {} {}", shape.len(), shape.join(" "));
    let width = t.shape().last().copied().unwrap_or(1).max(1);
    for row in t.data().chunks(width) {
        let vals: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", vals.join(" "));
    }
}

pub fn checkpoint_to_string(params: &PointerNetParams, adam: &AdamState) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "adam_step {}", adam.step);
    for (prefix, p) in [("param", params), ("adam_m", &adam.m), ("adam_v", &adam.v)] {
        for (name, t) in GROUP_NAMES.iter().zip(p.groups()) {
            write_tensor(&mut out, &format!("{prefix}/{name}"), t);
        }
    }
    out
}

pub fn save_checkpoint(path: &Path, params: &PointerNetParams, adam: &AdamState) -> Result<()> {
    std::fs::write(path, checkpoint_to_string(params, adam)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(PointerNetParams, AdamState)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &'static str) -> Result<(usize, &'a str), ParseError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim()))
            }
            None => Err(ParseError { line: 0, kind: ParseErrorKind::MissingSection(what.into()) }),
        }
    }
}

fn bad(line: usize, field: &str, message: impl Into<String>) -> ParseError {
    ParseError { line, kind: ParseErrorKind::BadField { field: field.into(), message: message.into() } }
}

fn parse_usize(line: usize, field: &str, s: &str) -> Result<usize, ParseError> {
    s.parse().map_err(|_| bad(line, field, format!("`{s}` is not a non-negative integer")))
}

fn read_tensor(lines: &mut Lines<'_>, expected_name: &str, expected: &Tensor) -> Result<Tensor, ParseError> {
    let (ln, header) = lines.next("tensor")?;
    let mut it = header.split_whitespace();
    if it.next() != Some("tensor") || it.next() != Some(expected_name) {
        return Err(ParseError { line: ln, kind: ParseErrorKind::MissingSection(expected_name.into()) });
    }
    let rank = parse_usize(ln, "rank", it.next().unwrap_or(""))?;
    let shape: Vec<usize> = it.map(|s| parse_usize(ln, "shape", s)).collect::<Result<_, _>>()?;
    if shape.len() != rank {
        return Err(bad(ln, "shape", format!("rank {rank} but {} dimensions", shape.len())));
    }
    if shape != expected.shape() {
        return Err(bad(ln, "shape", format!("{shape:?} does not match {:?}", expected.shape())));
    }
    let width = shape.last().copied().unwrap_or(1).max(1);
    let rows = expected.len() / width;
    let mut data = Vec::with_capacity(expected.len());
    for _ in 0..rows {
        let (ln, row) = lines.next("tensor values")?;
        let start = data.len();
        for tok in row.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| bad(ln, expected_name, format!("`{tok}` is not a number")))?;
            data.push(v);
        }
        if data.len() - start != width {
            return Err(ParseError { line: ln, kind: ParseErrorKind::RowLength { expected: width, actual: data.len() - start } });
        }
    }
    Ok(Tensor::from_vec(&shape, data).expect("shape checked"))
}

pub fn parse_checkpoint(text: &str) -> Result<(PointerNetParams, AdamState)> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (ln, magic) = lines.next("header")?;
    if magic != MAGIC {
        return Err(ParseError { line: ln, kind: ParseErrorKind::Unexpected(format!("expected `{MAGIC}`")) }.into());
    }
    let (ln, step_line) = lines.next("adam_step")?;
    let step = match step_line.split_once(' ') {
        Some(("adam_step", v)) => v.trim().parse::<u64>().map_err(|_| bad(ln, "adam_step", "not an integer"))?,
        _ => return Err(ParseError { line: ln, kind: ParseErrorKind::MissingField("adam_step".into()) }.into()),
    };
    // shapes come from the embedding header, so peek it before building templates
    let dims = {
        let rest: Vec<&str> = text.lines().skip(lines.last).take(1).collect();
        let tokens: Vec<&str> = rest.first().map(|l| l.split_whitespace().collect()).unwrap_or_default();
        if tokens.len() != 5 || tokens[1] != "param/embedding" {
            return Err(ParseError { line: lines.last + 1, kind: ParseErrorKind::MissingSection("param/embedding".into()) }.into());
        }
        let n = parse_usize(lines.last + 1, "shape", tokens[3])?;
        let d = parse_usize(lines.last + 1, "shape", tokens[4])?;
        (n, d)
    };
    // hidden size from the w_a header further down
    let hidden = text
        .lines()
        .find_map(|l| l.strip_prefix("tensor param/w_a 2 "))
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or(ParseError { line: 0, kind: ParseErrorKind::MissingSection("param/w_a".into()) })?;
    let template = PointerNetParams::zeros(dims.0, dims.1, hidden);
    let mut read = |prefix: &str| -> Result<PointerNetParams, ParseError> {
        let mut p = template.clone();
        for (name, slot) in GROUP_NAMES.iter().zip(p.groups_mut()) {
            *slot = read_tensor(&mut lines, &format!("{prefix}/{name}"), slot)?;
        }
        Ok(p)
    };
    let params = read("param")?;
    let m = read("adam_m")?;
    let v = read("adam_v")?;
    Ok((params, AdamState { m, v, step }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = RngStream::new(5);
        let p = PointerNetParams::init(4, 3, 2, &mut rng).unwrap();
        let mut adam = AdamState::new(&p);
        adam.m = PointerNetParams::init(4, 3, 2, &mut rng).unwrap();
        adam.v.w_c.data_mut()[1] = 1e-300;
        adam.step = 7;
        let text = checkpoint_to_string(&p, &adam);
        let (p2, a2) = parse_checkpoint(&text).unwrap();
        assert_eq!(p2, p);
        assert_eq!(a2, adam);
        assert_eq!(checkpoint_to_string(&p2, &a2), text);
    }

    #[test]
    fn corrupt_checkpoints_report_lines() {
        let p = PointerNetParams::zeros(3, 2, 2);
        let text = checkpoint_to_string(&p, &AdamState::new(&p));
        assert!(parse_checkpoint("nonsense").is_err());
        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            parse_checkpoint(&truncated),
            Err(Error::Parse(ParseError { kind: ParseErrorKind::MissingSection(_), .. }))
        ));
        let broken = text.replacen("0.0 0.0", "0.0 x", 1);
        match parse_checkpoint(&broken) {
            Err(Error::Parse(e)) => assert!(e.line > 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.txt");
        let p = PointerNetParams::init(3, 2, 2, &mut RngStream::new(1)).unwrap();
        let adam = AdamState::new(&p);
        save_checkpoint(&path, &p, &adam).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap().0, p);
        assert!(matches!(load_checkpoint(&dir.path().join("missing")), Err(Error::Io { .. })));
    }
}
