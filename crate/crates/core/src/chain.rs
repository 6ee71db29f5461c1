//! Chain persistence: NDJSON draws plus a `meta.json` sidecar.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::sampler::{ChainMeta, Draw, PosteriorChain};

pub const CHAIN_FILE: &str = "chain.ndjson";
pub const META_FILE: &str = "meta.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to a sibling temp file and renames it over `path`, so
/// readers never observe a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let tmp = temp_name(path);
    {
        let mut f = BufWriter::new(File::create(&tmp)?);
        f.write_all(bytes)?;
        f.flush()?;
        f.get_ref().sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn temp_name(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.partial"))
}

/// One JSON record per line, in draw order.
pub fn draws_to_ndjson(draws: &[Draw]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for d in draws {
        serde_json::to_writer(&mut out, d)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn write_draws(path: impl AsRef<Path>, draws: &[Draw]) -> Result<()> {
    write_atomic(path, &draws_to_ndjson(draws)?)
}

pub fn read_draws(path: impl AsRef<Path>) -> Result<Vec<Draw>> {
    let f = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let d: Draw = serde_json::from_str(&line).map_err(|e| invalid(format!("chain line {}: {e}", i + 1)))?;
        out.push(d);
    }
    Ok(out)
}

pub fn write_meta(path: impl AsRef<Path>, meta: &ChainMeta) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_meta(path: impl AsRef<Path>) -> Result<ChainMeta> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Writes `chain.ndjson` and `meta.json` into `dir`.
pub fn save(dir: impl AsRef<Path>, chain: &PosteriorChain) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_draws(dir.join(CHAIN_FILE), &chain.draws)?;
    write_meta(dir.join(META_FILE), &chain.meta)
}

/// Loads a chain file and the `meta.json` next to it.
pub fn load(chain_path: impl AsRef<Path>) -> Result<PosteriorChain> {
    let chain_path = chain_path.as_ref();
    let meta_path = chain_path.with_file_name(META_FILE);
    let meta = read_meta(&meta_path)?;
    let draws = read_draws(chain_path)?;
    let (d, s) = (meta.param_names.len(), meta.subjects.len());
    for (i, dr) in draws.iter().enumerate() {
        if dr.mu.len() != d || dr.sigma.len() != d * d || dr.a.len() != d || dr.alpha.len() != d * s {
            return Err(invalid(format!("chain record {} does not match meta dimensions", i + 1)));
        }
    }
    Ok(PosteriorChain { meta, draws })
}
