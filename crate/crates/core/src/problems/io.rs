//! Plain-text instance files.
//!
//! ```text
//! seqmo-instance 1
//! problem motsp
//! n 3
//! k 2
//! seed 42
//! distance 1
//! 0 0.25 0.5
//! ...
//! distance 2
//! ...
//! ```
//!
//! MOQAP files carry one `distance` block followed by `flow 1` .. `flow K`.
//! `seed none` marks an instance with no recorded seed. Floats are written in
//! shortest round-trip form so save/load is bit-exact. Blank lines and lines
//! starting with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Instance, MoqapInstance, MotspInstance, ProblemKind, SquareMatrix};
use crate::error::{Error, ParseError, ParseErrorKind, Result};

const MAGIC: &str = "seqmo-instance";
const VERSION: u32 = 1;

pub fn write_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let seed = instance.seed().map_or_else(|| "none".to_string(), |s| s.to_string());
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "problem {}", instance.kind());
    let _ = writeln!(out, "n {}", instance.size());
    let _ = writeln!(out, "k {}", instance.n_objectives());
    let _ = writeln!(out, "seed {seed}");
    match instance {
        Instance::Motsp(m) => {
            for (k, d) in m.distances().iter().enumerate() {
                write_block(&mut out, &format!("distance {}", k + 1), d);
            }
        }
        Instance::Moqap(q) => {
            write_block(&mut out, "distance", q.distance());
            for (k, f) in q.flows().iter().enumerate() {
                write_block(&mut out, &format!("flow {}", k + 1), f);
            }
        }
    }
    out
}

fn write_block(out: &mut String, name: &str, m: &SquareMatrix) {
    let _ = writeln!(out, "{name}");
    for i in 0..m.n() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_instance(instance)).map_err(|e| Error::io(path, e))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text)
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines { inner: it.peekable(), last_line: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.inner.next();
        if let Some((n, _)) = item {
            self.last_line = n;
        }
        item
    }

    fn field(&mut self, name: &str) -> Result<(usize, &'a str), ParseError> {
        let (line, text) = self
            .next()
            .ok_or_else(|| ParseError::new(0, ParseErrorKind::MissingField(name.into())))?;
        let mut parts = text.splitn(2, char::is_whitespace);
        match (parts.next(), parts.next()) {
            (Some(key), Some(value)) if key == name => Ok((line, value.trim())),
            _ => Err(ParseError::new(line, ParseErrorKind::MissingField(name.into()))),
        }
    }

    fn section(&mut self, name: &str, n: usize) -> Result<SquareMatrix, ParseError> {
        let (line, header) = self
            .next()
            .ok_or_else(|| ParseError::new(0, ParseErrorKind::MissingSection(name.into())))?;
        if header != name {
            return Err(ParseError::new(line, ParseErrorKind::MissingSection(name.into())));
        }
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, text) = match self.inner.peek() {
                Some(&(l, t)) if !is_section_header(t) => {
                    self.next();
                    (l, t)
                }
                Some(&(l, _)) => {
                    return Err(ParseError::new(
                        l,
                        ParseErrorKind::Unexpected(format!("section `{name}` has {} of {n} rows", rows.len())),
                    ))
                }
                None => {
                    return Err(ParseError::new(
                        0,
                        ParseErrorKind::Unexpected(format!(
                            "file ends inside section `{name}` after {} of {n} rows",
                            rows.len()
                        )),
                    ))
                }
            };
            let row = text
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|e| {
                        ParseError::new(
                            line,
                            ParseErrorKind::BadField { field: name.into(), message: format!("`{tok}`: {e}") },
                        )
                    })
                })
                .collect::<Result<Vec<f64>, ParseError>>()?;
            if row.len() != n {
                return Err(ParseError::new(line, ParseErrorKind::RowLength { expected: n, actual: row.len() }));
            }
            rows.push(row);
        }
        Ok(SquareMatrix::from_rows(rows).expect("row lengths checked"))
    }
}

fn is_section_header(line: &str) -> bool {
    line.starts_with(|c: char| c.is_ascii_alphabetic())
}

fn parse_num<T: std::str::FromStr>(line: usize, field: &str, value: &str) -> Result<T, ParseError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| {
        ParseError::new(line, ParseErrorKind::BadField { field: field.into(), message: e.to_string() })
    })
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    let (line, version) = lines.field(MAGIC)?;
    if version != VERSION.to_string() {
        return Err(ParseError::new(
            line,
            ParseErrorKind::BadField { field: MAGIC.into(), message: format!("unsupported version `{version}`") },
        )
        .into());
    }
    let (line, problem) = lines.field("problem")?;
    let kind: ProblemKind = problem.parse().map_err(|_| {
        ParseError::new(
            line,
            ParseErrorKind::BadField { field: "problem".into(), message: format!("unknown kind `{problem}`") },
        )
    })?;
    let (line, n) = lines.field("n")?;
    let n: usize = parse_num(line, "n", n)?;
    let (line, k) = lines.field("k")?;
    let k: usize = parse_num(line, "k", k)?;
    let (line, seed) = lines.field("seed")?;
    let seed = match seed {
        "none" => None,
        s => Some(parse_num::<u64>(line, "seed", s)?),
    };
    let header_line = line;

    let instance = match kind {
        ProblemKind::Motsp => {
            let mats = (1..=k)
                .map(|i| lines.section(&format!("distance {i}"), n))
                .collect::<Result<Vec<_>, _>>()?;
            MotspInstance::new(mats, seed).map(Instance::Motsp)
        }
        ProblemKind::Moqap => {
            let distance = lines.section("distance", n)?;
            let flows = (1..=k)
                .map(|i| lines.section(&format!("flow {i}"), n))
                .collect::<Result<Vec<_>, _>>()?;
            MoqapInstance::new(distance, flows, seed).map(Instance::Moqap)
        }
    };
    if let Some((line, text)) = lines.next() {
        return Err(ParseError::new(line, ParseErrorKind::Unexpected(text.chars().take(40).collect())).into());
    }
    instance.map_err(|e| {
        ParseError::new(header_line, ParseErrorKind::BadField { field: "matrix".into(), message: e.to_string() })
            .into()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for kind in [ProblemKind::Motsp, ProblemKind::Moqap] {
            let inst = Instance::generate(kind, 15, 2, &mut RngStream::new(77)).unwrap();
            let path = dir.path().join(format!("{kind}.txt"));
            save_instance(&inst, &path).unwrap();
            let back = load_instance(&path).unwrap();
            assert_eq!(back, inst);
        }
    }

    #[test]
    fn truncated_file_names_missing_section() {
        let inst = Instance::generate(ProblemKind::Motsp, 4, 2, &mut RngStream::new(1)).unwrap();
        let text = write_instance(&inst);
        let cut: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        match parse_instance(&cut) {
            Err(Error::Parse(ParseError { kind: ParseErrorKind::MissingSection(s), .. })) => {
                assert_eq!(s, "distance 2")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_row_is_a_dimension_error() {
        let inst = Instance::generate(ProblemKind::Moqap, 3, 2, &mut RngStream::new(1)).unwrap();
        let text = write_instance(&inst);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        // first data row of the distance block
        let idx = lines.iter().position(|l| l == "distance").unwrap() + 1;
        lines[idx] = "0 0.5".into();
        let err = parse_instance(&lines.join("\n")).unwrap_err();
        match err {
            Error::Parse(ParseError { line, kind: ParseErrorKind::RowLength { expected: 3, actual: 2 } }) => {
                assert_eq!(line, idx + 1)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_header_values() {
        assert!(parse_instance("seqmo-instance 1\nproblem vrp\n").is_err());
        assert!(parse_instance("seqmo-instance 2\n").is_err());
        assert!(parse_instance("").is_err());
    }
}
