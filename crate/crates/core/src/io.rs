//! Line-delimited JSON formats.
//!
//! * `anon-jsonl`: `{"id": "...", "terms": [{"mbr": [xmin, ymin, xmax, ymax], "activities": [...]}]}`
//! * `wlas-jsonl`: `{"id": "...", "terms": [{"cells": [[id, "n/d"], ...], "activities": [...]}]}`
//! * `raw-jsonl`:  `{"id": "...", "points": [{"x": .., "y": .., "activities": [...]}]}`
//!
//! Numbers may be JSON numbers or strings holding `n/d`, an integer or a
//! decimal; both are parsed from their text, so rational backends read
//! `0.1` as exactly `1/10`. Blank lines are skipped. Cell ids in files are
//! offset by `id_base` from the internal 0-based ids.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::anonymize::{AnonymousTerm, AnonymousTrajectory, RawPoint, RawTrajectory};
use crate::error::{Error, Result};
use crate::grid::{encode_database, CellGrid, CellId, Mbr, WeightedLocationSet};
use crate::model::{WlasDatabase, WlasSequence, WlasTerm};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    AnonJsonl,
    WlasJsonl,
    RawJsonl,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::AnonJsonl => "anon-jsonl",
            Format::WlasJsonl => "wlas-jsonl",
            Format::RawJsonl => "raw-jsonl",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Format::AnonJsonl, Format::WlasJsonl, Format::RawJsonl]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown format `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReadOptions {
    /// Added to internal cell ids in files.
    pub id_base: u32,
    /// Turn weight-sum warnings into errors.
    pub strict_weights: bool,
    /// Allowed distance of a term's weight sum from 1.
    pub epsilon: f64,
}

impl Default for ReadOptions {
    fn default() -> Self {
        Self {
            id_base: 0,
            strict_weights: false,
            epsilon: 1e-9,
        }
    }
}

/// A wLAS term whose weights do not sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightWarning {
    pub line: usize,
    pub term: usize,
    pub sum: f64,
}

impl fmt::Display for WeightWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: term {} weights sum to {}", self.line, self.term, self.sum)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnonLine {
    id: String,
    terms: Vec<AnonTermLine>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct AnonTermLine {
    mbr: [Value; 4],
    activities: Vec<String>,
}

#[derive(Serialize)]
struct AnonLineOut<'a> {
    id: &'a str,
    terms: Vec<AnonTermLine>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WlasLine {
    id: String,
    terms: Vec<WlasTermLine>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct WlasTermLine {
    cells: Vec<(u64, Value)>,
    activities: Vec<String>,
}

#[derive(Serialize)]
struct WlasLineOut<'a> {
    id: &'a str,
    terms: Vec<WlasTermLine>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    id: String,
    points: Vec<RawPointLine>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawPointLine {
    x: Value,
    y: Value,
    activities: Vec<String>,
}

#[derive(Serialize)]
struct RawLineOut<'a> {
    id: &'a str,
    points: Vec<RawPointLine>,
}

fn scalar_of<S: Scalar>(v: &Value, line: usize, what: &str) -> Result<S> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => {
            return Err(Error::Parse {
                line,
                message: format!("{what}: expected a number or numeric string"),
            })
        }
    };
    S::parse_weight(&text).ok_or_else(|| Error::Parse {
        line,
        message: format!("{what}: cannot parse `{text}`"),
    })
}

/// JSON number when the rendering is one, string otherwise (e.g. `"1/3"`).
fn number_value<S: Scalar>(x: &S) -> Value {
    let text = x.render();
    match serde_json::from_str::<serde_json::Number>(&text) {
        Ok(n) => Value::Number(n),
        Err(_) => Value::String(text),
    }
}

fn lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: usize, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })
}

pub fn read_anon_jsonl<S: Scalar, R: BufRead>(reader: R) -> Result<Vec<AnonymousTrajectory<S>>> {
    let mut out = Vec::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let parsed: AnonLine = parse_line(line, &text)?;
        let mut terms = Vec::with_capacity(parsed.terms.len());
        for (k, t) in parsed.terms.iter().enumerate() {
            let [x0, y0, x1, y1] = &t.mbr;
            let mbr = Mbr::new(
                scalar_of(x0, line, "mbr")?,
                scalar_of(y0, line, "mbr")?,
                scalar_of(x1, line, "mbr")?,
                scalar_of(y1, line, "mbr")?,
            )
            .map_err(|e| Error::Validation {
                line,
                message: format!("term {k}: {e}"),
            })?;
            if t.activities.is_empty() {
                return Err(Error::Validation {
                    line,
                    message: format!("term {k}: empty activity set"),
                });
            }
            terms.push(AnonymousTerm {
                mbr,
                activities: t.activities.clone(),
            });
        }
        out.push(AnonymousTrajectory { id: parsed.id, terms });
    }
    Ok(out)
}

pub fn write_anon_jsonl<S: Scalar, W: Write>(trajectories: &[AnonymousTrajectory<S>], mut w: W) -> Result<()> {
    for t in trajectories {
        let line = AnonLineOut {
            id: &t.id,
            terms: t
                .terms
                .iter()
                .map(|term| AnonTermLine {
                    mbr: [
                        number_value(&term.mbr.x_min),
                        number_value(&term.mbr.y_min),
                        number_value(&term.mbr.x_max),
                        number_value(&term.mbr.y_max),
                    ],
                    activities: term.activities.clone(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut w, &line).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_wlas_jsonl<S: Scalar, R: BufRead>(
    reader: R,
    opts: &ReadOptions,
) -> Result<(WlasDatabase<S>, Vec<WeightWarning>)> {
    let mut sequences = Vec::new();
    let mut warnings = Vec::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let parsed: WlasLine = parse_line(line, &text)?;
        let mut terms = Vec::with_capacity(parsed.terms.len());
        for (k, t) in parsed.terms.iter().enumerate() {
            let mut entries = Vec::with_capacity(t.cells.len());
            for (id, w) in &t.cells {
                let internal = id
                    .checked_sub(u64::from(opts.id_base))
                    .and_then(|i| u32::try_from(i).ok())
                    .ok_or_else(|| Error::Validation {
                        line,
                        message: format!("term {k}: cell id {id} out of range for id base {}", opts.id_base),
                    })?;
                entries.push((CellId(internal), scalar_of::<S>(w, line, "weight")?));
            }
            let wls = WeightedLocationSet::new(entries).map_err(|e| Error::Validation {
                line,
                message: format!("term {k}: {e}"),
            })?;
            let sum = wls.total().to_f64();
            if (sum - 1.0).abs() > opts.epsilon {
                let warning = WeightWarning { line, term: k, sum };
                if opts.strict_weights {
                    return Err(Error::Validation {
                        line,
                        message: format!("term {k}: weights sum to {sum}, expected 1"),
                    });
                }
                warn!("{warning}");
                warnings.push(warning);
            }
            terms.push(WlasTerm::new(wls, t.activities.iter().cloned()));
        }
        sequences.push(WlasSequence::new(parsed.id, terms));
    }
    let db = WlasDatabase::new(sequences).map_err(|e| Error::Validation {
        line: 0,
        message: e.to_string(),
    })?;
    Ok((db, warnings))
}

pub fn write_wlas_jsonl<S: Scalar, W: Write>(db: &WlasDatabase<S>, id_base: u32, mut w: W) -> Result<()> {
    for seq in db.sequences() {
        let line = WlasLineOut {
            id: &seq.id,
            terms: seq
                .terms
                .iter()
                .map(|t| WlasTermLine {
                    cells: t
                        .locations()
                        .entries()
                        .iter()
                        .map(|(c, weight)| (u64::from(c.0) + u64::from(id_base), Value::String(weight.render())))
                        .collect(),
                    activities: t.activities().to_vec(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut w, &line).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_raw_jsonl<S: Scalar, R: BufRead>(reader: R) -> Result<Vec<RawTrajectory<S>>> {
    let mut out = Vec::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let parsed: RawLine = parse_line(line, &text)?;
        let points = parsed
            .points
            .iter()
            .map(|p| {
                Ok(RawPoint {
                    x: scalar_of(&p.x, line, "x")?,
                    y: scalar_of(&p.y, line, "y")?,
                    activities: p.activities.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(RawTrajectory { id: parsed.id, points });
    }
    Ok(out)
}

pub fn write_raw_jsonl<S: Scalar, W: Write>(trajectories: &[RawTrajectory<S>], mut w: W) -> Result<()> {
    for t in trajectories {
        let line = RawLineOut {
            id: &t.id,
            points: t
                .points
                .iter()
                .map(|p| RawPointLine {
                    x: number_value(&p.x),
                    y: number_value(&p.y),
                    activities: p.activities.clone(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut w, &line).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a database from a file. `anon-jsonl` input is encoded on `grid`,
/// which must then be given.
pub fn ingest<S: Scalar>(
    path: &Path,
    format: Format,
    grid: Option<&CellGrid<S>>,
    opts: &ReadOptions,
) -> Result<(WlasDatabase<S>, Vec<WeightWarning>)> {
    let reader = BufReader::new(File::open(path)?);
    match format {
        Format::WlasJsonl => read_wlas_jsonl(reader, opts),
        Format::AnonJsonl => {
            let grid =
                grid.ok_or_else(|| Error::InvalidArgument("anon-jsonl input needs a region and cell size".into()))?;
            let anon = read_anon_jsonl(reader)?;
            Ok((encode_database(&anon, grid)?, Vec::new()))
        }
        Format::RawJsonl => Err(Error::InvalidArgument(
            "raw-jsonl holds unanonymized points; anonymize it first".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Rect;
    use crate::model::fixtures::*;
    use num_rational::Ratio;

    const ENCODED_SAMPLE: &str = r#"{"id":"at1","terms":[{"cells":[[1,"2/9"],[2,"1/9"],[5,"4/9"],[6,"2/9"]],"activities":["a","b","h"]},{"cells":[[11,"1/3"],[12,"1/6"],[15,"1/3"],[16,"1/6"]],"activities":["a","c","f","g"]},{"cells":[[22,"1/6"],[23,"1/6"],[26,"1/3"],[27,"1/3"]],"activities":["b","c","e"]},{"cells":[[25,"1/2"],[26,"1/2"]],"activities":["a","c","h"]}]}
"#;

    const ANON_SAMPLE: &str = r#"{"id":"at1","terms":[{"mbr":[0.5,0.5,1.25,2.0],"activities":["a","b","h"]},{"mbr":[2.5,2.5,3.25,3.5],"activities":["a","c","f","g"]},{"mbr":[1.5,5.75,2.5,6.5],"activities":["b","c","e"]},{"mbr":[0.5,6.25,1.5,6.75],"activities":["a","c","h"]}]}"#;

    fn one_based() -> ReadOptions {
        ReadOptions {
            id_base: 1,
            ..ReadOptions::default()
        }
    }

    #[test]
    fn wlas_round_trip_is_byte_identical() {
        let (db, warnings) = read_wlas_jsonl::<Q, _>(ENCODED_SAMPLE.as_bytes(), &one_based()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(db.sequences()[0].terms[0].locations().weight(CellId(0)), Some(&q(2, 9)));
        let mut out = Vec::new();
        write_wlas_jsonl(&db, 1, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), ENCODED_SAMPLE);
    }

    #[test]
    fn anon_encoding_reproduces_wlas_representation() {
        let anon = read_anon_jsonl::<Q, _>(ANON_SAMPLE.as_bytes()).unwrap();
        let grid = CellGrid::new(Rect::new(q(0, 1), q(0, 1), q(4, 1), q(8, 1)).unwrap(), q(1, 1), q(1, 1)).unwrap();
        let db = encode_database(&anon, &grid).unwrap();
        let mut out = Vec::new();
        write_wlas_jsonl(&db, 1, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), ENCODED_SAMPLE);
    }

    #[test]
    fn decimals_are_read_exactly() {
        let text = r#"{"id":"s","terms":[{"cells":[[0,"0.1"],[1,0.9]],"activities":["a"]}]}"#;
        let (db, warnings) = read_wlas_jsonl::<Q, _>(text.as_bytes(), &ReadOptions::default()).unwrap();
        assert!(warnings.is_empty());
        let wls = db.sequences()[0].terms[0].locations();
        assert_eq!(wls.weight(CellId(0)), Some(&q(1, 10)));
        assert_eq!(wls.weight(CellId(1)), Some(&q(9, 10)));
        let (small, _) = read_wlas_jsonl::<Ratio<i64>, _>(text.as_bytes(), &ReadOptions::default()).unwrap();
        assert_eq!(
            small.sequences()[0].terms[0].locations().weight(CellId(0)),
            Some(&Ratio::new(1, 10))
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text =
            format!("{ENCODED_SAMPLE}\n{{\"id\":\"x\",\"terms\":[{{\"cells\":[[1,\"zz\"]],\"activities\":[]}}]}}\n");
        match read_wlas_jsonl::<Q, _>(text.as_bytes(), &one_based()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match read_anon_jsonl::<Q, _>("not json".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        let unsorted = r#"{"id":"x","terms":[{"cells":[[2,"1/2"],[1,"1/2"]],"activities":["a"]}]}"#;
        assert!(matches!(
            read_wlas_jsonl::<Q, _>(unsorted.as_bytes(), &ReadOptions::default()),
            Err(Error::Validation { line: 1, .. })
        ));
        let below_base = r#"{"id":"x","terms":[{"cells":[[0,"1"]],"activities":["a"]}]}"#;
        assert!(read_wlas_jsonl::<Q, _>(below_base.as_bytes(), &one_based()).is_err());
    }

    #[test]
    fn weight_sum_warns_or_fails() {
        let text = r#"{"id":"x","terms":[{"cells":[[0,"1/2"]],"activities":["a"]}]}"#;
        let (db, warnings) = read_wlas_jsonl::<f64, _>(text.as_bytes(), &ReadOptions::default()).unwrap();
        assert_eq!(db.len(), 1);
        assert_eq!(
            warnings,
            vec![WeightWarning {
                line: 1,
                term: 0,
                sum: 0.5
            }]
        );
        let strict = ReadOptions {
            strict_weights: true,
            ..ReadOptions::default()
        };
        assert!(matches!(
            read_wlas_jsonl::<f64, _>(text.as_bytes(), &strict),
            Err(Error::Validation { line: 1, .. })
        ));
    }

    #[test]
    fn empty_input_is_empty_database() {
        let (db, _) = read_wlas_jsonl::<Q, _>("".as_bytes(), &ReadOptions::default()).unwrap();
        assert!(db.is_empty());
        let (db, _) = read_wlas_jsonl::<Q, _>("\n\n".as_bytes(), &ReadOptions::default()).unwrap();
        assert!(db.is_empty());
        assert!(read_anon_jsonl::<f64, _>("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = format!("{ENCODED_SAMPLE}{ENCODED_SAMPLE}");
        assert!(read_wlas_jsonl::<Q, _>(text.as_bytes(), &one_based()).is_err());
    }

    #[test]
    fn anon_and_raw_round_trip() {
        let anon = read_anon_jsonl::<Q, _>(ANON_SAMPLE.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_anon_jsonl(&anon, &mut out).unwrap();
        assert_eq!(read_anon_jsonl::<Q, _>(out.as_slice()).unwrap(), anon);

        let raw = vec![RawTrajectory {
            id: "u".into(),
            points: vec![RawPoint {
                x: q(1, 3),
                y: q(5, 2),
                activities: vec!["a".into()],
            }],
        }];
        let mut out = Vec::new();
        write_raw_jsonl(&raw, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out.clone()).unwrap(),
            "{\"id\":\"u\",\"points\":[{\"x\":\"1/3\",\"y\":\"5/2\",\"activities\":[\"a\"]}]}\n"
        );
        assert_eq!(read_raw_jsonl::<Q, _>(out.as_slice()).unwrap(), raw);
    }

    #[test]
    fn anon_term_without_activities_is_invalid() {
        let text = r#"{"id":"x","terms":[{"mbr":[0,0,1,1],"activities":[]}]}"#;
        assert!(matches!(
            read_anon_jsonl::<f64, _>(text.as_bytes()),
            Err(Error::Validation { line: 1, .. })
        ));
    }

    #[test]
    fn format_names() {
        for f in [Format::AnonJsonl, Format::WlasJsonl, Format::RawJsonl] {
            assert_eq!(f.name().parse::<Format>().unwrap(), f);
        }
        assert!("csv".parse::<Format>().is_err());
    }
}
