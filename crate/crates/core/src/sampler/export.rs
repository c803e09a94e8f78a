use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FieldSampleBatch;
use crate::error::{Error, Result};

/// Metadata written next to a binary batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySidecar {
    pub n: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub order: Option<usize>,
}

/// CSV without header: one row per weight, one column per sample.
pub fn write_csv(weights: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut line = String::new();
    for row in weights.row_iter() {
        line.clear();
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:e}"));
        }
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Little-endian `f64`, sample after sample, plus a `<path>.json` sidecar.
pub fn write_binary(batch: &FieldSampleBatch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes: Vec<u8> = batch.weights.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let meta = BinarySidecar {
        n: batch.n(),
        n_samples: batch.n_samples(),
        seed: batch.meta.seed,
        order: batch.meta.order,
    };
    let side = sidecar_path(path);
    std::fs::write(&side, serde_json::to_string_pretty(&meta)?).map_err(|e| Error::io(&side, e))
}

pub fn read_binary(path: impl AsRef<Path>) -> Result<(DMatrix<f64>, BinarySidecar)> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: BinarySidecar = serde_json::from_str(&text)?;
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() != 8 * meta.n * meta.n_samples {
        return Err(Error::DimensionMismatch {
            expected: 8 * meta.n * meta.n_samples,
            got: bytes.len(),
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((DMatrix::from_vec(meta.n, meta.n_samples, values), meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::BatchMeta;

    #[test]
    fn csv_and_binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let weights = DMatrix::from_fn(3, 2, |i, j| (i as f64 - 1.3) * (j as f64 + 0.1) / 7.0);
        let batch = FieldSampleBatch {
            weights: weights.clone(),
            meta: BatchMeta {
                seed: 11,
                order: Some(64),
                interval: None,
                mesh_hash: None,
            },
        };
        let csv = dir.path().join("z.csv");
        write_csv(&weights, &csv).unwrap();
        let text = std::fs::read_to_string(&csv).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 3);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r, &weights.row(i).iter().cloned().collect::<Vec<_>>());
        }

        let bin = dir.path().join("z.bin");
        write_binary(&batch, &bin).unwrap();
        let (back, meta) = read_binary(&bin).unwrap();
        assert_eq!(back, weights);
        assert_eq!(meta, BinarySidecar { n: 3, n_samples: 2, seed: 11, order: Some(64) });
        assert_eq!(std::fs::metadata(&bin).unwrap().len(), 48);
    }
}
