//! Run configuration: command-line flags override a TOML file, which overrides defaults.

use std::path::{Path, PathBuf};

use clap::Args;
use radial_tree::{LabelScheme, MonteCarloConfig};
use serde::Deserialize;

use crate::Failure;

/// Keys accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub intensity: Option<f64>,
    pub window_radius: Option<f64>,
    pub cut_fraction: Option<f64>,
    pub analysis_fraction: Option<f64>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub grid_points: Option<usize>,
    pub labeling: Option<String>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimArgs {
    /// Seed of the point process (base seed for `mc`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Intensity of the Poisson process.
    #[arg(long)]
    pub intensity: Option<f64>,
    /// Window radius.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub cut_fraction: Option<f64>,
    #[arg(long)]
    pub analysis_fraction: Option<f64>,
    /// Radii in the grid `analysis_radius * k / n`.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// `random` or `trig`.
    #[arg(long)]
    pub labeling: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub intensity: f64,
    pub window_radius: f64,
    pub cut_fraction: f64,
    pub analysis_fraction: f64,
    pub replicates: usize,
    pub seed: u64,
    pub grid_points: usize,
    pub labeling: LabelScheme,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn resolve(
        file: &FileConfig,
        sim: &SimArgs,
        replicates: Option<usize>,
        threads: Option<usize>,
        out_dir: Option<PathBuf>,
    ) -> Result<Self, Failure> {
        let labeling = match sim.labeling.as_deref().or(file.labeling.as_deref()) {
            Some(s) => s
                .parse()
                .map_err(|e: radial_tree::Error| Failure::usage(e.to_string()))?,
            None => LabelScheme::Random,
        };
        let cfg = RunConfig {
            intensity: sim.intensity.or(file.intensity).unwrap_or(1.0),
            window_radius: sim.radius.or(file.window_radius).unwrap_or(60.0),
            cut_fraction: sim.cut_fraction.or(file.cut_fraction).unwrap_or(0.8),
            analysis_fraction: sim
                .analysis_fraction
                .or(file.analysis_fraction)
                .unwrap_or(0.5),
            replicates: replicates.or(file.replicates).unwrap_or(100),
            seed: sim.seed.or(file.seed).unwrap_or(0),
            grid_points: sim.grid_points.or(file.grid_points).unwrap_or(10),
            labeling,
            threads: threads.or(file.threads),
            out_dir: out_dir
                .or_else(|| file.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from(".")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Failure::usage(format!("{name} must be positive, got {v}")))
            }
        };
        positive("intensity", self.intensity)?;
        positive("window radius", self.window_radius)?;
        if !(self.analysis_fraction > 0.0
            && self.analysis_fraction <= self.cut_fraction
            && self.cut_fraction <= 1.0)
        {
            return Err(Failure::usage(format!(
                "need 0 < analysis_fraction ({}) <= cut_fraction ({}) <= 1",
                self.analysis_fraction, self.cut_fraction
            )));
        }
        if self.replicates == 0 {
            return Err(Failure::usage("replicates must be at least 1"));
        }
        if self.grid_points == 0 {
            return Err(Failure::usage("grid points must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Failure::usage("threads must be at least 1"));
        }
        Ok(())
    }

    pub fn monte_carlo(&self) -> MonteCarloConfig {
        MonteCarloConfig {
            cut_fraction: self.cut_fraction,
            analysis_fraction: self.analysis_fraction,
            grid_points: self.grid_points,
            base_seed: self.seed,
            labeling: self.labeling,
            ..MonteCarloConfig::for_window(self.replicates, self.intensity, self.window_radius)
        }
    }

    /// Grid `a * k / n` for an analysis radius `a`.
    pub fn r_grid(&self, analysis_radius: f64) -> Vec<f64> {
        let n = self.grid_points;
        (1..=n)
            .map(|k| analysis_radius * k as f64 / n as f64)
            .collect()
    }
}
