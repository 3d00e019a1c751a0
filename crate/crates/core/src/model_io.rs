//! Text format for trained models.
//!
//! ```text
//! format=oksvm-model
//! version=1
//! gamma=...
//! c=...
//! bias=...
//! n_features=...
//! n_train=...
//! n_support=...
//! converged=true
//! bias_fallback=false
//! [support]
//! index,label,alpha,x0,x1,...
//! ...
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly. Multipliers outside the support set are zero and are not
//! stored.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::SvmModel;

const FORMAT: &str = "oksvm-model";
const VERSION: u32 = 1;

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_model<W: Write>(model: &SvmModel, mut out: W) -> Result<()> {
    let io = |e| Error::io("<model>", e);
    let mut text = String::new();
    text.push_str(&format!("format={FORMAT}\nversion={VERSION}\n"));
    text.push_str(&format!("gamma={}\n", real(model.gamma)));
    text.push_str(&format!("c={}\n", real(model.c)));
    text.push_str(&format!("bias={}\n", real(model.bias)));
    text.push_str(&format!("n_features={}\n", model.n_features));
    text.push_str(&format!("n_train={}\n", model.alphas.len()));
    text.push_str(&format!("n_support={}\n", model.n_support()));
    text.push_str(&format!("converged={}\n", model.converged));
    text.push_str(&format!("bias_fallback={}\n", model.bias_fallback));
    text.push_str(&format!("dual_value={}\n", real(model.dual_value)));
    text.push_str(&format!("iterations={}\n", model.iterations));
    text.push_str("[support]\nindex,label,alpha");
    for f in 0..model.n_features {
        text.push_str(&format!(",x{f}"));
    }
    text.push('\n');
    for (s, &i) in model.support_indices.iter().enumerate() {
        text.push_str(&format!("{i},{},{}", model.support_labels[s], real(model.alphas[i])));
        for v in &model.support_vectors[s * model.n_features..(s + 1) * model.n_features] {
            text.push(',');
            text.push_str(&real(*v));
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(io)?;
    out.flush().map_err(io)
}

pub fn save_model(model: &SvmModel, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(model, std::io::BufWriter::new(file))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

fn parse<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<T> {
    let raw = map.get(key).ok_or_else(|| bad(format!("missing key `{key}`")))?;
    raw.parse()
        .map_err(|_| bad(format!("cannot parse `{key}` value {raw:?}")))
}

pub fn read_model<R: Read>(input: R) -> Result<SvmModel> {
    let mut lines = BufReader::new(input).lines();
    let mut header = HashMap::new();
    loop {
        let line = lines
            .next()
            .ok_or_else(|| bad("missing [support] block"))?
            .map_err(|e| Error::io("<model>", e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "[support]" {
            break;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
        header.insert(k.trim().to_string(), v.trim().to_string());
    }
    if header.get("format").map(String::as_str) != Some(FORMAT) {
        return Err(bad("not an oksvm model file"));
    }
    let version: u32 = parse(&header, "version")?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let gamma: f64 = parse(&header, "gamma")?;
    let c: f64 = parse(&header, "c")?;
    let bias: f64 = parse(&header, "bias")?;
    let n_features: usize = parse(&header, "n_features")?;
    let n_train: usize = parse(&header, "n_train")?;
    let n_support: usize = parse(&header, "n_support")?;
    let converged: bool = parse(&header, "converged")?;
    let bias_fallback: bool = parse(&header, "bias_fallback")?;
    let dual_value: f64 = parse(&header, "dual_value")?;
    let iterations: usize = parse(&header, "iterations")?;
    if n_features == 0 {
        return Err(bad("n_features must be positive"));
    }

    let rest: String = lines
        .map(|l| l.map(|l| l + "\n"))
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io("<model>", e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_bytes());
    let mut alphas = vec![0.0; n_train];
    let mut support_indices = Vec::with_capacity(n_support);
    let mut support_labels = Vec::with_capacity(n_support);
    let mut support_vectors = Vec::with_capacity(n_support * n_features);
    for record in reader.records() {
        let record = record?;
        if record.len() != 3 + n_features {
            return Err(bad(format!("support row has {} fields", record.len())));
        }
        let field = |i: usize| record.get(i).unwrap_or_default();
        let index: usize = field(0).parse().map_err(|_| bad("bad support index"))?;
        let label: i8 = field(1).parse().map_err(|_| bad("bad support label"))?;
        let alpha: f64 = field(2).parse().map_err(|_| bad("bad multiplier"))?;
        if index >= n_train || !(label == 1 || label == -1) {
            return Err(bad(format!("invalid support row for index {index}")));
        }
        alphas[index] = alpha;
        support_indices.push(index);
        support_labels.push(label);
        for f in 0..n_features {
            support_vectors.push(field(3 + f).parse().map_err(|_| bad("bad feature value"))?);
        }
    }
    if support_indices.len() != n_support {
        return Err(bad(format!(
            "expected {n_support} support rows, found {}",
            support_indices.len()
        )));
    }
    Ok(SvmModel {
        alphas,
        bias,
        support_indices,
        gamma,
        c,
        n_features,
        support_vectors,
        support_labels,
        dual_value,
        converged,
        iterations,
        bias_fallback,
    })
}

pub fn load_model(path: &Path) -> Result<SvmModel> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticConfig};
    use crate::optimizer::train_svm_baseline;
    use crate::solver::SolverConfig;

    #[test]
    fn round_trip_is_bit_exact() {
        let ds = generate_synthetic(&SyntheticConfig {
            n_samples: 30,
            dim: 3,
            sep: 0.8,
            seed: 4,
        })
        .unwrap();
        let model = train_svm_baseline(&ds, 0.7, 0.3, &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_model(&model, &mut buf).unwrap();
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back, model);
        let a = model.decision_values(ds.features(), 3).unwrap();
        let b = back.decision_values(ds.features(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_model("hello\n".as_bytes()).is_err());
        assert!(read_model("format=other\n[support]\n".as_bytes()).is_err());
    }
}
