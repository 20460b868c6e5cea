//! Monte Carlo information-matrix oracle for models without a closed form,
//! with a plain-text disk cache.
//!
//! The oracle averages the analytic dataset Hessian over `reps` freshly
//! sampled pseudo datasets. Replication `r` draws from a child stream keyed
//! by `r` alone, and partial sums are reduced in fixed chunk order, so the
//! result is bit-identical whatever the worker count.

use super::Model;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, SymmetricMatrix, Vector};
use crate::rng::{labels, RngStream};
use rayon::prelude::*;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

const CHUNK: usize = 512;

/// Averages `reps` analytic dataset Hessians sampled at `theta`.
pub fn monte_carlo_fim<M: Model + Sync + ?Sized>(
    model: &M,
    theta: &Vector,
    reps: usize,
    parent: &RngStream,
) -> Result<SymmetricMatrix> {
    if reps == 0 {
        return Err(Error::InvalidInput("oracle needs at least 1 replication".into()));
    }
    if !model.has_hessian() {
        return Err(model.missing("an analytic Hessian"));
    }
    let p = model.dim_theta();
    let chunks = reps.div_ceil(CHUNK);
    let partials: Result<Vec<Matrix>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(reps);
            let mut acc = Matrix::zeros(p, p);
            for r in lo..hi {
                let mut rng = parent.child(r as u64);
                let data = model.sample_pseudo(theta, &mut rng)?;
                acc += model.hessian_neg_loglik(theta, &data)?.into_matrix();
            }
            Ok(acc)
        })
        .collect();
    let mut total = Matrix::zeros(p, p);
    for part in partials? {
        total += part;
    }
    SymmetricMatrix::symmetrized(&(total / reps as f64))
}

/// Disk cache for Monte Carlo oracles, keyed by model, evaluation point,
/// replication count, and seed.
///
/// Each entry is a plain-text matrix file: one header line `p reps seed`
/// followed by `p` rows of `p` decimal values.
pub struct OracleCache {
    dir: PathBuf,
}

impl OracleCache {
    pub fn new<P: Into<PathBuf>>(dir: P) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Loads a cached oracle or computes and stores it.
    ///
    /// Returns the matrix and whether it came from the cache.
    pub fn load_or_compute<M: Model + Sync + ?Sized>(
        &self,
        model: &M,
        theta: &Vector,
        reps: usize,
        seed: u64,
    ) -> Result<(SymmetricMatrix, bool)> {
        let path = self.entry_path(model, theta, reps, seed);
        if path.exists() {
            let fim = read_matrix_file(&path, model.dim_theta(), reps, seed)?;
            return Ok((fim, true));
        }
        let parent = RngStream::from_seed(seed).child(labels::ORACLE);
        let fim = monte_carlo_fim(model, theta, reps, &parent)?;
        write_matrix_file(&path, &fim, reps, seed)?;
        Ok((fim, false))
    }

    fn entry_path<M: Model + ?Sized>(
        &self,
        model: &M,
        theta: &Vector,
        reps: usize,
        seed: u64,
    ) -> PathBuf {
        let mut key: u64 = 0xFEED_FACE_CAFE_BEEF;
        for byte in model.name().bytes() {
            key = mix(key, byte as u64);
        }
        key = mix(key, model.num_data() as u64);
        for &x in theta.iter() {
            key = mix(key, x.to_bits());
        }
        key = mix(key, reps as u64);
        key = mix(key, seed);
        self.dir
            .join(format!("fim-oracle-{}-{key:016x}.txt", model.name()))
    }
}

fn mix(state: u64, value: u64) -> u64 {
    let mut z = state ^ value.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn write_matrix_file(path: &Path, fim: &SymmetricMatrix, reps: usize, seed: u64) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("txt.partial");
    {
        let mut file = fs::File::create(&tmp)?;
        let p = fim.order();
        writeln!(file, "{p} {reps} {seed}")?;
        for i in 0..p {
            let row: Vec<String> = (0..p).map(|j| format!("{:.17e}", fim.get(i, j))).collect();
            writeln!(file, "{}", row.join(" "))?;
        }
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_matrix_file(path: &Path, p: usize, reps: usize, seed: u64) -> Result<SymmetricMatrix> {
    let text = fs::read_to_string(path)?;
    let malformed = |reason: &str| Error::MalformedCache {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed("missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(malformed("header must be `p reps seed`"));
    }
    let (hp, hreps, hseed): (usize, usize, u64) = (
        fields[0].parse().map_err(|_| malformed("bad p"))?,
        fields[1].parse().map_err(|_| malformed("bad reps"))?,
        fields[2].parse().map_err(|_| malformed("bad seed"))?,
    );
    if hp != p || hreps != reps || hseed != seed {
        return Err(malformed("header does not match requested oracle"));
    }
    let mut m = Matrix::zeros(p, p);
    for i in 0..p {
        let line = lines.next().ok_or_else(|| malformed("missing matrix row"))?;
        let values: Vec<&str> = line.split_whitespace().collect();
        if values.len() != p {
            return Err(malformed("wrong row length"));
        }
        for (j, v) in values.iter().enumerate() {
            m[(i, j)] = v.parse().map_err(|_| malformed("bad matrix entry"))?;
        }
    }
    SymmetricMatrix::new(m)
}
