//! On-disk cache of count tables, one JSON file per `(r, lambda, N)`.

use std::fs;
use std::path::{Path, PathBuf};

use rna_rainbow::{CountTable, Params, Result};

pub struct TableCache {
    dir: Option<PathBuf>,
}

pub fn file_name(params: Params, horizon: usize) -> String {
    format!("counts_r{}_l{}_n{}.json", params.r, params.lambda, horizon)
}

/// Horizon encoded in a cache file name for `params`, if it is one.
fn parse_horizon(name: &str, params: Params) -> Option<usize> {
    let prefix = format!("counts_r{}_l{}_n", params.r, params.lambda);
    name.strip_prefix(&prefix)?
        .strip_suffix(".json")?
        .parse()
        .ok()
}

impl TableCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        TableCache { dir }
    }

    /// Table covering `0..=horizon`, read from the smallest cached table
    /// that is large enough, or built and stored.
    pub fn load(&self, params: Params, horizon: usize) -> Result<CountTable> {
        let horizon = horizon.max(1);
        let Some(dir) = &self.dir else {
            return CountTable::build(params, horizon);
        };
        if let Some((path, cached)) = smallest_covering(dir, params, horizon) {
            match fs::read_to_string(&path)
                .ok()
                .map(|text| CountTable::from_json(&text))
            {
                Some(Ok(table)) if cached == horizon => return Ok(table),
                Some(Ok(table)) => return table.truncated(horizon),
                _ => eprintln!("warning: ignoring unreadable cache file {}", path.display()),
            }
        }
        let table = CountTable::build(params, horizon)?;
        let path = dir.join(file_name(params, horizon));
        if let Err(e) = fs::create_dir_all(dir).and_then(|_| fs::write(&path, table.to_json())) {
            eprintln!(
                "warning: could not write cache file {}: {e}",
                path.display()
            );
        }
        Ok(table)
    }
}

fn smallest_covering(dir: &Path, params: Params, horizon: usize) -> Option<(PathBuf, usize)> {
    fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            let n = parse_horizon(&name, params)?;
            (n >= horizon).then(|| (e.path(), n))
        })
        .min_by_key(|(_, n)| *n)
}
