use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::MetricsRecord;
use crate::optimizer::Termination;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Svm,
    Oksvm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Svm => "svm",
            Method::Oksvm => "oksvm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(Method::Svm),
            "oksvm" => Ok(Method::Oksvm),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

/// One trained-and-evaluated model.
///
/// `seed` is the seed of the data cell, shared by the SVM and OKSVM rows
/// trained on the same split, so `(dataset, seed, fold)` pairs them up.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub dataset: String,
    pub dim: usize,
    pub sep: Option<f64>,
    pub c: f64,
    /// Fixed gamma for SVM; starting gamma for OKSVM.
    pub gamma0: f64,
    pub rep: usize,
    pub fold: Option<usize>,
    pub seed: u64,
    pub standardized: bool,
    pub metrics: MetricsRecord,
    pub final_gamma: f64,
    /// Solver converged and, for OKSVM, the outer loop stopped on its own
    /// rules rather than on the step cap.
    pub converged: bool,
    pub terminated_by: Option<Termination>,
    pub outer_steps: usize,
    pub wall_time: Option<f64>,
}

const COLUMNS: [&str; 23] = [
    "method",
    "dataset",
    "dim",
    "sep",
    "c",
    "gamma0",
    "rep",
    "fold",
    "seed",
    "standardized",
    "acc",
    "precision",
    "recall",
    "f1",
    "auc",
    "tp",
    "fp",
    "tn",
    "fn",
    "final_gamma",
    "converged",
    "terminated_by",
    "outer_steps",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes rows as CSV. The `wall_time` column is present only when
/// `timing` is set, so untimed output is reproducible byte for byte.
pub fn write_rows<W: Write>(rows: &[ResultRow], out: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = COLUMNS.to_vec();
    if timing {
        header.push("wall_time");
    }
    w.write_record(&header)?;
    for r in rows {
        let m = &r.metrics;
        let mut rec = vec![
            r.method.to_string(),
            r.dataset.clone(),
            r.dim.to_string(),
            opt(r.sep),
            r.c.to_string(),
            r.gamma0.to_string(),
            r.rep.to_string(),
            opt(r.fold),
            r.seed.to_string(),
            r.standardized.to_string(),
            m.acc.to_string(),
            m.precision.to_string(),
            m.recall.to_string(),
            m.f1.to_string(),
            m.auc.to_string(),
            m.tp.to_string(),
            m.fp.to_string(),
            m.tn.to_string(),
            m.fn_.to_string(),
            r.final_gamma.to_string(),
            r.converged.to_string(),
            opt(r.terminated_by),
            r.outer_steps.to_string(),
        ];
        if timing {
            rec.push(opt(r.wall_time));
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<rows>", e))?;
    Ok(())
}

pub fn write_rows_file(rows: &[ResultRow], path: &Path, timing: bool) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(rows, std::io::BufWriter::new(file), timing)
}

fn field<T: FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let raw = rec.get(idx).unwrap_or_default();
    raw.parse()
        .map_err(|_| Error::ResultFormat(format!("bad `{name}` value {raw:?}")))
}

fn opt_field<T: FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<Option<T>> {
    match rec.get(idx).unwrap_or_default() {
        "" => Ok(None),
        _ => field(rec, idx, name).map(Some),
    }
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let pos = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::ResultFormat(format!("missing column `{name}`")))
    };
    let idx: Vec<usize> = COLUMNS.iter().map(|c| pos(c)).collect::<Result<_>>()?;
    let wall = header.iter().position(|h| h == "wall_time");

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |k: usize| idx[k];
        let method: Method = rec
            .get(f(0))
            .unwrap_or_default()
            .parse()
            .map_err(|_| Error::ResultFormat("bad method".into()))?;
        let terminated_by = match rec.get(f(21)).unwrap_or_default() {
            "" => None,
            s => Some(s.parse::<Termination>()?),
        };
        rows.push(ResultRow {
            method,
            dataset: rec.get(f(1)).unwrap_or_default().to_string(),
            dim: field(&rec, f(2), "dim")?,
            sep: opt_field(&rec, f(3), "sep")?,
            c: field(&rec, f(4), "c")?,
            gamma0: field(&rec, f(5), "gamma0")?,
            rep: field(&rec, f(6), "rep")?,
            fold: opt_field(&rec, f(7), "fold")?,
            seed: field(&rec, f(8), "seed")?,
            standardized: field(&rec, f(9), "standardized")?,
            metrics: MetricsRecord {
                acc: field(&rec, f(10), "acc")?,
                precision: field(&rec, f(11), "precision")?,
                recall: field(&rec, f(12), "recall")?,
                f1: field(&rec, f(13), "f1")?,
                auc: field(&rec, f(14), "auc")?,
                tp: field(&rec, f(15), "tp")?,
                fp: field(&rec, f(16), "fp")?,
                tn: field(&rec, f(17), "tn")?,
                fn_: field(&rec, f(18), "fn")?,
            },
            final_gamma: field(&rec, f(19), "final_gamma")?,
            converged: field(&rec, f(20), "converged")?,
            terminated_by,
            outer_steps: field(&rec, f(22), "outer_steps")?,
            wall_time: match wall {
                Some(w) => opt_field(&rec, w, "wall_time")?,
                None => None,
            },
        });
    }
    Ok(rows)
}

pub fn read_rows_file(path: &Path) -> Result<Vec<ResultRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_rows(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            method: Method::Oksvm,
            dataset: "synthetic".into(),
            dim: 3,
            sep: Some(0.6),
            c: 1.5,
            gamma0: 0.1,
            rep: 4,
            fold: None,
            seed: u64::MAX,
            standardized: false,
            metrics: MetricsRecord {
                acc: 0.1 + 0.2,
                precision: 1.0 / 3.0,
                recall: 0.75,
                f1: 0.428_571_428_571_428_6,
                auc: 0.5,
                tp: 1,
                fp: 2,
                tn: 3,
                fn_: 4,
            },
            final_gamma: 0.123_456_789_012_345_67,
            converged: true,
            terminated_by: Some(Termination::Converged),
            outer_steps: 17,
            wall_time: Some(0.25),
        }
    }

    #[test]
    fn round_trip() {
        let mut svm = row();
        svm.method = Method::Svm;
        svm.terminated_by = None;
        svm.sep = None;
        svm.fold = Some(2);
        let rows = vec![row(), svm];
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf, true).unwrap();
        assert_eq!(read_rows(buf.as_slice()).unwrap(), rows);

        let mut buf = Vec::new();
        write_rows(&rows, &mut buf, false).unwrap();
        let back = read_rows(buf.as_slice()).unwrap();
        assert_eq!(back[0].wall_time, None);
        assert_eq!(back[0].metrics, rows[0].metrics);
        assert!(!String::from_utf8(buf).unwrap().contains("wall_time"));
    }

    #[test]
    fn missing_column_reported() {
        let err = read_rows("method,dataset\nsvm,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ResultFormat(_)));
    }
}
