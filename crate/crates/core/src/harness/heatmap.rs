use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use super::{Method, ResultRow};
use crate::error::{Error, Result};
use crate::metrics::{f1_diff, wins_losses_ratio, METRIC_NAMES};

/// A column rows can be grouped by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Dataset,
    Method,
    Dim,
    Sep,
    C,
    Gamma0,
    Rep,
    Fold,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Dataset => "dataset",
            Axis::Method => "method",
            Axis::Dim => "dim",
            Axis::Sep => "sep",
            Axis::C => "c",
            Axis::Gamma0 => "gamma0",
            Axis::Rep => "rep",
            Axis::Fold => "fold",
        }
    }

    fn key(self, row: &ResultRow) -> KeyPart {
        match self {
            Axis::Dataset => KeyPart::Text(row.dataset.clone()),
            Axis::Method => KeyPart::Text(row.method.to_string()),
            Axis::Dim => KeyPart::Num(row.dim as f64),
            Axis::Sep => row.sep.map_or(KeyPart::Missing, KeyPart::Num),
            Axis::C => KeyPart::Num(row.c),
            Axis::Gamma0 => KeyPart::Num(row.gamma0),
            Axis::Rep => KeyPart::Num(row.rep as f64),
            Axis::Fold => row.fold.map_or(KeyPart::Missing, |f| KeyPart::Num(f as f64)),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dataset" => Axis::Dataset,
            "method" => Axis::Method,
            "dim" => Axis::Dim,
            "sep" => Axis::Sep,
            "c" => Axis::C,
            "gamma0" | "gamma" => Axis::Gamma0,
            "rep" => Axis::Rep,
            "fold" => Axis::Fold,
            other => return Err(Error::InvalidConfig(format!("unknown axis `{other}`"))),
        })
    }
}

/// Value of one axis for one row. Numbers sort numerically.
#[derive(Debug, Clone, PartialEq)]
pub enum KeyPart {
    Missing,
    Num(f64),
    Text(String),
}

impl Eq for KeyPart {}

impl Ord for KeyPart {
    fn cmp(&self, other: &Self) -> Ordering {
        use KeyPart::*;
        match (self, other) {
            (Missing, Missing) => Ordering::Equal,
            (Missing, _) => Ordering::Less,
            (_, Missing) => Ordering::Greater,
            (Num(a), Num(b)) => a.total_cmp(b),
            (Num(_), Text(_)) => Ordering::Less,
            (Text(_), Num(_)) => Ordering::Greater,
            (Text(a), Text(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for KeyPart {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for KeyPart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KeyPart::Missing => Ok(()),
            KeyPart::Num(v) => write!(f, "{v}"),
            KeyPart::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeatValue {
    /// Mean of a metric, optionally restricted to one method.
    Metric { name: String, method: Option<Method> },
    /// `100 * (mean F1 of OKSVM - mean F1 of SVM)` per cell.
    F1Diff,
    /// Wins-losses ratio over the paired runs of a cell.
    Wlr,
}

impl HeatValue {
    pub fn parse(name: &str, method: Option<Method>) -> Result<Self> {
        match name {
            "f1_diff" => Ok(HeatValue::F1Diff),
            "wlr" => Ok(HeatValue::Wlr),
            m if METRIC_NAMES.contains(&m) => Ok(HeatValue::Metric {
                name: m.to_string(),
                method,
            }),
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatCell {
    pub key: Vec<KeyPart>,
    pub value: f64,
    /// Rows (metric) or pairs (`f1_diff`, `wlr`) behind the value.
    pub n: usize,
}

fn key_of(row: &ResultRow, axes: &[Axis]) -> Vec<KeyPart> {
    axes.iter().map(|a| a.key(row)).collect()
}

/// Aggregates rows into one value per distinct combination of `axes`,
/// sorted by the axis values.
///
/// `f1_diff` and `wlr` pair SVM and OKSVM rows that share
/// `(dataset, seed, fold)`; a pair's cell is taken from its SVM row.
pub fn emit_heatmap(rows: &[ResultRow], axes: &[Axis], value: &HeatValue) -> Result<Vec<HeatCell>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    match value {
        HeatValue::Metric { name, method } => {
            let mut groups: BTreeMap<Vec<KeyPart>, Vec<f64>> = BTreeMap::new();
            for r in rows.iter().filter(|r| method.is_none_or(|m| r.method == m)) {
                groups.entry(key_of(r, axes)).or_default().push(r.metrics.get(name)?);
            }
            if groups.is_empty() {
                return Err(Error::EmptyInput);
            }
            Ok(groups
                .into_iter()
                .map(|(key, v)| HeatCell {
                    key,
                    value: v.iter().sum::<f64>() / v.len() as f64,
                    n: v.len(),
                })
                .collect())
        }
        HeatValue::F1Diff | HeatValue::Wlr => {
            if axes.contains(&Axis::Method) {
                return Err(Error::InvalidConfig("paired values cannot be grouped by method".into()));
            }
            let pairs = pair_rows(rows)?;
            let mut groups: BTreeMap<Vec<KeyPart>, Vec<(f64, f64)>> = BTreeMap::new();
            for (svm, ok) in pairs {
                groups
                    .entry(key_of(svm, axes))
                    .or_default()
                    .push((svm.metrics.f1, ok.metrics.f1));
            }
            groups
                .into_iter()
                .map(|(key, v)| {
                    let n = v.len();
                    let value = if *value == HeatValue::F1Diff {
                        let svm = v.iter().map(|p| p.0).sum::<f64>() / n as f64;
                        let ok = v.iter().map(|p| p.1).sum::<f64>() / n as f64;
                        f1_diff(ok, svm)
                    } else {
                        let diffs: Vec<f64> = v.iter().map(|&(s, o)| f1_diff(o, s)).collect();
                        wins_losses_ratio(&diffs)?
                    };
                    Ok(HeatCell { key, value, n })
                })
                .collect()
        }
    }
}

type PairKey<'a> = (&'a str, u64, Option<usize>);

fn pair_rows(rows: &[ResultRow]) -> Result<Vec<(&ResultRow, &ResultRow)>> {
    let mut map: BTreeMap<PairKey<'_>, (Option<&ResultRow>, Option<&ResultRow>)> = BTreeMap::new();
    for r in rows {
        let slot = map.entry((r.dataset.as_str(), r.seed, r.fold)).or_default();
        let target = match r.method {
            Method::Svm => &mut slot.0,
            Method::Oksvm => &mut slot.1,
        };
        if target.is_some() {
            return Err(Error::ResultFormat(format!(
                "duplicate {} row for seed {} fold {:?}",
                r.method, r.seed, r.fold
            )));
        }
        *target = Some(r);
    }
    map.into_iter()
        .map(|(k, v)| match v {
            (Some(s), Some(o)) => Ok((s, o)),
            _ => Err(Error::ResultFormat(format!(
                "unpaired row for seed {} fold {:?}",
                k.1, k.2
            ))),
        })
        .collect()
}

/// Long-format CSV: one column per axis, then `value` and `n`.
pub fn write_heatmap_csv<W: Write>(cells: &[HeatCell], axes: &[Axis], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = axes.iter().map(|a| a.as_str()).collect();
    header.extend(["value", "n"]);
    w.write_record(&header)?;
    for cell in cells {
        let mut rec: Vec<String> = cell.key.iter().map(ToString::to_string).collect();
        rec.push(cell.value.to_string());
        rec.push(cell.n.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<heatmap>", e))?;
    Ok(())
}
