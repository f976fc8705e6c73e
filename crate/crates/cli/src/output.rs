//! Output files and the solution cache.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::Result;

/// Environment variable overriding the cache location.
pub const CACHE_ENV: &str = "BILLIARD_CACHE_DIR";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Comment lines opening every CSV: code version, config hash and units.
pub fn header(cfg: &RunConfig, kind: &str, lead_width: Option<f64>) -> String {
    let mut h = format!(
        "# billiard {VERSION} {kind}\n# config {}\n# units: k in pi/w, E = k^2 (hbar^2/2m = 1), lengths in nominal lead widths\n",
        cfg.hash()
    );
    if let Some(w) = lead_width {
        h.push_str(&format!("# lead width w = {w:.12} (nominal 1)\n"));
    }
    h
}

pub fn cache_dir(cfg: &RunConfig) -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| cfg.output_dir.join("cache"))
}

pub fn write(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Writes `header` followed by `body` into the output directory.
pub fn write_csv(cfg: &RunConfig, name: &str, header: &str, body: &str) -> Result<PathBuf> {
    let path = cfg.output_dir.join(name);
    write(&path, format!("{header}{body}").as_bytes())?;
    Ok(path)
}

/// Strips `#` comment lines.
pub fn strip_header(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// File name stem for a reduced-k window, e.g. `6-9`.
pub fn window_tag(k_min: f64, k_max: f64) -> String {
    format!("{k_min}-{k_max}")
}
