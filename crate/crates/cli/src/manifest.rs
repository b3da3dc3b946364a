//! Dataset manifests: one `image[,ground_truth]` entry per line.
//! Blank lines and lines starting with `#` are ignored; relative paths are
//! resolved against the manifest's directory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub image: PathBuf,
    pub gt: Option<PathBuf>,
}

pub fn parse(text: &str, base: &Path) -> Result<Vec<Entry>> {
    let resolve = |p: &str| {
        let p = Path::new(p.trim());
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let image = resolve(parts.next().unwrap_or_default());
        let gt = parts.next().map(str::trim).filter(|s| !s.is_empty()).map(resolve);
        if !seen.insert(image.clone()) {
            bail!("manifest line {}: duplicate image {}", n + 1, image.display());
        }
        out.push(Entry { image, gt });
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<Entry>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    parse(&text, path.parent().unwrap_or(Path::new(".")))
}
