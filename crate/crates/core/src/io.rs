//! JSONL persistence for configurations, Plato configurations and measures.
//!
//! Line 1 is a header `{"d":<int>,"kind":"configuration"|"plato"|"measure"}`,
//! followed by one object per atom: `{"s":<mark>,"x":[…]}` for the two
//! configuration kinds and `{"w":<weight>,"x":[…]}` for measures. Atoms are
//! written in canonical order and floats in shortest round-trip form, so a
//! canonical file re-serializes to identical bytes.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::DiscreteMeasure;
use crate::configuration::Configuration;
use crate::plato::{to_plato, PlatoConfiguration};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid content: {0}")]
    Invalid(#[from] crate::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Configuration,
    Plato,
    Measure,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Configuration => "configuration",
            Kind::Plato => "plato",
            Kind::Measure => "measure",
        })
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "configuration" => Ok(Kind::Configuration),
            "plato" => Ok(Kind::Plato),
            "measure" => Ok(Kind::Measure),
            other => Err(format!("unknown kind {other:?}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    d: usize,
    kind: Kind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointLine {
    s: f64,
    x: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomLine {
    w: f64,
    x: Vec<f64>,
}

/// Any of the three file kinds, loaded and validated.
#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Configuration(Configuration),
    Plato(PlatoConfiguration),
    Measure(DiscreteMeasure),
}

impl Record {
    pub fn kind(&self) -> Kind {
        match self {
            Record::Configuration(_) => Kind::Configuration,
            Record::Plato(_) => Kind::Plato,
            Record::Measure(_) => Kind::Measure,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Record::Configuration(c) => c.dim(),
            Record::Plato(p) => p.dim(),
            Record::Measure(m) => m.dim(),
        }
    }

    pub fn write<W: Write>(&self, w: W) -> io::Result<()> {
        match self {
            Record::Configuration(c) => write_points(w, Kind::Configuration, c),
            Record::Plato(p) => write_points(w, Kind::Plato, p.configuration()),
            Record::Measure(m) => write_measure(w, m),
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

fn json_line<W: Write, T: Serialize>(w: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}

fn write_points<W: Write>(mut w: W, kind: Kind, gamma: &Configuration) -> io::Result<()> {
    json_line(&mut w, &Header { d: gamma.dim(), kind })?;
    for p in gamma {
        json_line(
            &mut w,
            &PointLine {
                s: p.mark(),
                x: p.coords().to_vec(),
            },
        )?;
    }
    Ok(())
}

pub fn write_configuration<W: Write>(w: W, gamma: &Configuration) -> io::Result<()> {
    write_points(w, Kind::Configuration, gamma)
}

pub fn write_plato<W: Write>(w: W, gamma: &PlatoConfiguration) -> io::Result<()> {
    write_points(w, Kind::Plato, gamma.configuration())
}

pub fn write_measure<W: Write>(mut w: W, eta: &DiscreteMeasure) -> io::Result<()> {
    json_line(
        &mut w,
        &Header {
            d: eta.dim(),
            kind: Kind::Measure,
        },
    )?;
    for (x, weight) in eta.atoms() {
        json_line(
            &mut w,
            &AtomLine {
                w: weight,
                x: x.coords().to_vec(),
            },
        )?;
    }
    Ok(())
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: &str, number: usize) -> Result<T, FormatError> {
    serde_json::from_str(line).map_err(|e| FormatError::Parse {
        line: number,
        message: e.to_string(),
    })
}

/// Reads and validates a JSONL file body. Plato files are re-checked for
/// the pinpointing property.
pub fn read_record<R: BufRead>(reader: R) -> Result<Record, FormatError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header: Header = loop {
        match lines.next() {
            None => {
                return Err(FormatError::Parse {
                    line: 1,
                    message: "missing header".into(),
                })
            }
            Some((n, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break parse_line(&line, n)?;
                }
            }
        }
    };
    let body = lines.filter_map(|(n, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        other => Some((n, other)),
    });
    match header.kind {
        Kind::Measure => {
            let mut atoms = Vec::new();
            for (n, line) in body {
                let a: AtomLine = parse_line(&line?, n)?;
                atoms.push((a.w, a.x));
            }
            Ok(Record::Measure(DiscreteMeasure::new(atoms, header.d)?))
        }
        kind => {
            let mut points = Vec::new();
            for (n, line) in body {
                let p: PointLine = parse_line(&line?, n)?;
                points.push((p.s, p.x));
            }
            let gamma = Configuration::from_pairs(points, header.d)?;
            Ok(if kind == Kind::Plato {
                Record::Plato(to_plato(gamma)?)
            } else {
                Record::Configuration(gamma)
            })
        }
    }
}

pub fn read_str(text: &str) -> Result<Record, FormatError> {
    read_record(text.as_bytes())
}

pub fn read_path(path: &Path) -> Result<Record, FormatError> {
    let file = std::fs::File::open(path)?;
    read_record(io::BufReader::new(file))
}

pub fn write_path(path: &Path, record: &Record) -> Result<(), FormatError> {
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    record.write(&mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn canonical_bytes() {
        let g = Configuration::from_pairs(vec![(1.0, vec![0.5]), (2.0, vec![0.1])], 1).unwrap();
        let text = Record::Configuration(g).to_jsonl();
        assert_eq!(
            text,
            "{\"d\":1,\"kind\":\"configuration\"}\n{\"s\":2.0,\"x\":[0.1]}\n{\"s\":1.0,\"x\":[0.5]}\n"
        );
        assert_eq!(read_str(&text).unwrap().to_jsonl(), text);
    }

    #[test]
    fn measure_format() {
        let m = DiscreteMeasure::new(vec![(1e-8, vec![-0.0, 3.25])], 2).unwrap();
        let text = Record::Measure(m.clone()).to_jsonl();
        assert_eq!(text, "{\"d\":2,\"kind\":\"measure\"}\n{\"w\":1e-8,\"x\":[-0.0,3.25]}\n");
        assert_eq!(read_str(&text).unwrap(), Record::Measure(m));
    }

    #[test]
    fn plato_reload_revalidates() {
        let text = "{\"d\":1,\"kind\":\"plato\"}\n{\"s\":1.0,\"x\":[0.0]}\n{\"s\":2.0,\"x\":[0.0]}\n";
        match read_str(text) {
            Err(FormatError::Invalid(Error::NotPinpointing { position })) => {
                assert_eq!(position, vec![0.0])
            }
            other => panic!("unexpected {other:?}"),
        }
        let as_cfg = text.replace("plato", "configuration");
        assert!(matches!(read_str(&as_cfg), Ok(Record::Configuration(_))));
    }

    #[test]
    fn parse_failures() {
        assert!(matches!(read_str(""), Err(FormatError::Parse { .. })));
        assert!(matches!(
            read_str("{\"d\":1,\"kind\":\"blob\"}\n"),
            Err(FormatError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_str("{\"d\":1,\"kind\":\"measure\"}\n{\"s\":1.0,\"x\":[0.0]}\n"),
            Err(FormatError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_str("{\"d\":1,\"kind\":\"measure\"}\n{\"w\":-1.0,\"x\":[0.0]}\n"),
            Err(FormatError::Invalid(Error::NonPositiveWeight { .. }))
        ));
    }

    #[test]
    fn empty_files() {
        let text = "{\"d\":3,\"kind\":\"configuration\"}\n";
        let r = read_str(text).unwrap();
        assert_eq!(r, Record::Configuration(Configuration::empty(3)));
        assert_eq!(r.to_jsonl(), text);
    }
}
