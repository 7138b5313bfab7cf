#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use polarnet_cli::pipeline::MANIFEST;
use polarnet_cli::PipelineConfig;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// The fixture config writing into `out`.
pub fn fixture_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(fixtures().join("pipeline.toml")).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

/// Every file of a bundle except the manifest.
pub fn bundle(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != MANIFEST)
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}
