use std::fs;
use std::path::Path;

use anyhow::Context;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of a canonical config encoding.
pub fn config_hash(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn provenance(seed: u64, hash: &str) -> String {
    format!("oig-lab {VERSION} seed={seed} config_sha256={hash}")
}

/// Writes `body` under a `#` comment line carrying the provenance.
pub fn write_csv(path: &Path, provenance: &str, body: &str) -> anyhow::Result<()> {
    fs::write(path, format!("# {provenance}\n{body}")).with_context(|| format!("writing {}", path.display()))
}

/// Writes an SVG document with the provenance as an XML comment right
/// after the opening tag.
pub fn write_svg(path: &Path, provenance: &str, svg: &str) -> anyhow::Result<()> {
    let body = match svg.find('>') {
        Some(i) => format!("{}\n<!-- {provenance} -->{}", &svg[..=i], &svg[i + 1..]),
        None => svg.to_string(),
    };
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

pub fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialise"));
}
