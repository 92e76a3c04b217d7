use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vehicle::FlightMode;

pub const CSV_HEADER: &str = "t,uav,tx,ty,tz,ex,ey,ez,mode,corrections";

#[derive(Debug, Error)]
pub enum LogError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected header {found:?}, want {CSV_HEADER:?}")]
    Header { found: String },
    #[error("row {row}: time {t} does not increase for uav {uav}")]
    NonMonotonic { row: usize, uav: usize, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub uav: usize,
    pub truth: [f64; 3],
    pub estimate: [f64; 3],
    pub mode: FlightMode,
    /// Corrections applied so far.
    pub corrections: usize,
}

impl LogRecord {
    pub fn error_sq(&self) -> f64 {
        (0..3).map(|i| (self.estimate[i] - self.truth[i]).powi(2)).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct Row {
    t: f64,
    uav: usize,
    tx: f64,
    ty: f64,
    tz: f64,
    ex: f64,
    ey: f64,
    ez: f64,
    mode: FlightMode,
    corrections: usize,
}

impl From<&LogRecord> for Row {
    fn from(r: &LogRecord) -> Self {
        Row {
            t: r.t,
            uav: r.uav,
            tx: r.truth[0],
            ty: r.truth[1],
            tz: r.truth[2],
            ex: r.estimate[0],
            ey: r.estimate[1],
            ez: r.estimate[2],
            mode: r.mode,
            corrections: r.corrections,
        }
    }
}

impl From<Row> for LogRecord {
    fn from(r: Row) -> Self {
        LogRecord {
            t: r.t,
            uav: r.uav,
            truth: [r.tx, r.ty, r.tz],
            estimate: [r.ex, r.ey, r.ez],
            mode: r.mode,
            corrections: r.corrections,
        }
    }
}

/// Per-tick records of every UAV, in tick order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    records: Vec<LogRecord>,
}

impl TrajectoryLog {
    pub fn push(&mut self, record: LogRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LogError> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(Row::from(r))?;
        }
        if self.records.is_empty() {
            w.write_record(CSV_HEADER.split(','))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, LogError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
        if header != CSV_HEADER {
            return Err(LogError::Header { found: header });
        }
        let mut log = TrajectoryLog::default();
        let mut last: Vec<(usize, f64)> = Vec::new();
        for (row, rec) in r.deserialize::<Row>().enumerate() {
            let rec = LogRecord::from(rec?);
            match last.iter_mut().find(|(u, _)| *u == rec.uav) {
                Some((_, t)) if rec.t <= *t => {
                    return Err(LogError::NonMonotonic {
                        row: row + 1,
                        uav: rec.uav,
                        t: rec.t,
                    })
                }
                Some((_, t)) => *t = rec.t,
                None => last.push((rec.uav, rec.t)),
            }
            log.push(rec);
        }
        Ok(log)
    }
}
