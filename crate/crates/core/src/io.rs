//! Stream files: one JSON object per line, plus an optional CSV matrix.
//!
//! ```text
//! {"id":0,"t_arr":1,"t_del":4,"coords":[0.25,0.5]}
//! {"id":1,"t_arr":2,"t_del":9}
//! ```
//!
//! A line without `coords` refers to a matrix metric: the point's id is its
//! row in the matrix file (`n` lines of `n` comma-separated distances).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{DistanceMatrix, Metric};
use crate::model::{Payload, PointId, Time, TimedPoint};

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: PointId,
    t_arr: Time,
    t_del: Time,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<f64>>,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Parses a stream from any reader; `source` only labels errors.
pub fn parse_stream(reader: impl BufRead, source: &str) -> Result<Vec<TimedPoint>> {
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: source.to_string(),
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let r: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: source.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        let payload = match r.coords {
            Some(c) => Payload::Coords(c),
            None => Payload::Index(usize::try_from(r.id).map_err(|_| Error::Parse {
                path: source.to_string(),
                line: i + 1,
                message: format!("id {} cannot index a matrix", r.id),
            })?),
        };
        points.push(TimedPoint::new(r.id, payload, r.t_arr, r.t_del));
    }
    Ok(points)
}

pub fn read_stream(path: impl AsRef<Path>) -> Result<Vec<TimedPoint>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    parse_stream(BufReader::new(file), &path.display().to_string())
}

/// Writes points in the given order.
///
/// Matrix points must sit on the row equal to their id, since the id is
/// all the file records.
pub fn write_stream_to(mut w: impl Write, points: &[TimedPoint]) -> std::io::Result<()> {
    for p in points {
        let coords = match &p.payload {
            Payload::Coords(c) => Some(c.clone()),
            Payload::Index(i) => {
                if *i as u64 != p.id {
                    return Err(std::io::Error::new(
                        std::io::ErrorKind::InvalidInput,
                        format!("point {} sits on matrix row {i}", p.id),
                    ));
                }
                None
            }
        };
        let r = Record {
            id: p.id,
            t_arr: p.t_arr,
            t_del: p.t_del,
            coords,
        };
        serde_json::to_writer(&mut w, &r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_stream(path: impl AsRef<Path>, points: &[TimedPoint]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    write_stream_to(BufWriter::new(file), points).map_err(|e| io_error(path, e))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Metric> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_error(path, e))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| io_error(path, e))?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|e| Error::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: format!("{field:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Metric::matrix(rows)
}

pub fn write_matrix(path: impl AsRef<Path>, matrix: &DistanceMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| io_error(path, e))?;
    for row in matrix.rows() {
        w.write_record(row.iter().map(|d| d.to_string()))
            .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Where the matrix of a matrix-metric stream file is stored by default.
pub fn matrix_sidecar(stream_path: impl AsRef<Path>) -> std::path::PathBuf {
    let mut s = stream_path.as_ref().as_os_str().to_owned();
    s.push(".matrix.csv");
    s.into()
}
