//! Episode trace CSV: per-control-step contact forces, CoM motion and
//! reward, with the frozen header
//! `t,fz_left,fz_right,fx_left,fx_right,com_x,com_z,reward`.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

pub const TRACE_HEADER: &str = "t,fz_left,fz_right,fx_left,fx_right,com_x,com_z,reward";

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("trace io: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace row {row}: {msg}")]
    Parse { row: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub fz_left: f64,
    pub fz_right: f64,
    pub fx_left: f64,
    pub fx_right: f64,
    pub com_x: f64,
    pub com_z: f64,
    pub reward: f64,
}

/// Time series of one episode; timestamps strictly increase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeTrace {
    pub rows: Vec<TraceRow>,
}

impl EpisodeTrace {
    pub fn push(&mut self, row: TraceRow) {
        debug_assert!(
            self.rows.last().map_or(true, |last| row.t > last.t),
            "timestamps must strictly increase"
        );
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn write_trace_to<W: Write>(mut w: W, trace: &EpisodeTrace) -> Result<(), TraceError> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in &trace.rows {
        writeln!(
            w,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            r.t, r.fz_left, r.fz_right, r.fx_left, r.fx_right, r.com_x, r.com_z, r.reward
        )?;
    }
    Ok(())
}

pub fn write_trace<P: AsRef<Path>>(path: P, trace: &EpisodeTrace) -> Result<(), TraceError> {
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write_trace_to(&mut buf, trace)?;
    buf.flush()?;
    Ok(())
}

pub fn read_trace_from<R: Read>(r: R) -> Result<EpisodeTrace, TraceError> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| TraceError::Parse { row: 0, msg: "empty file".into() })?
        .map_err(TraceError::Io)?;
    if header.trim_end() != TRACE_HEADER {
        return Err(TraceError::Parse {
            row: 0,
            msg: format!("bad header {header:?}, expected {TRACE_HEADER:?}"),
        });
    }
    let mut trace = EpisodeTrace::default();
    let mut prev_t = f64::NEG_INFINITY;
    for (i, line) in lines.enumerate() {
        let row_no = i + 1;
        let line = line.map_err(TraceError::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(TraceError::Parse {
                row: row_no,
                msg: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let mut v = [0.0f64; 8];
        for (k, field) in fields.iter().enumerate() {
            v[k] = field.trim().parse::<f64>().map_err(|_| TraceError::Parse {
                row: row_no,
                msg: format!("field {}: not a number: {field:?}", k + 1),
            })?;
        }
        if !(v[0] > prev_t) {
            return Err(TraceError::Parse {
                row: row_no,
                msg: format!("timestamp {} does not increase past {prev_t}", v[0]),
            });
        }
        prev_t = v[0];
        trace.rows.push(TraceRow {
            t: v[0],
            fz_left: v[1],
            fz_right: v[2],
            fx_left: v[3],
            fx_right: v[4],
            com_x: v[5],
            com_z: v[6],
            reward: v[7],
        });
    }
    Ok(trace)
}

pub fn read_trace<P: AsRef<Path>>(path: P) -> Result<EpisodeTrace, TraceError> {
    let file = std::fs::File::open(path)?;
    read_trace_from(file)
}
