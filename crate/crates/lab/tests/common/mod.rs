#![allow(dead_code)]

use std::path::Path;

use gpphs_lab::config::ModelChoice;
use gpphs_lab::ExperimentConfig;

/// A short, cheap variant of the reference experiment.
pub fn quick_config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::with_seed(seed);
    cfg.dataset.samples = 120;
    cfg.gp.restarts = 1;
    cfg.gp.max_iterations = 80;
    cfg.reference.t_end = 3.0;
    cfg.reference.grid_step = Some(0.05);
    cfg.verify.directions = 12;
    cfg.verify.radial_steps = 8;
    cfg.verify.times = 2;
    cfg.closed_loop.output_step = 0.05;
    cfg
}

pub fn quick_exact(seed: u64) -> ExperimentConfig {
    let mut cfg = quick_config(seed);
    cfg.closed_loop.model = ModelChoice::Exact;
    cfg
}

/// File names and contents of every regular file in `dir`, sorted by name.
pub fn snapshot(dir: &Path, skip: &[&str]) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .filter(|p| !skip.contains(&p.file_name().unwrap().to_str().unwrap()))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}
