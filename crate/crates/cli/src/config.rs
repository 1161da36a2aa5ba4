//! Layered settings: built-in defaults, then an optional TOML file, then
//! command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use palmkit::{DistanceMode, LaplacianKind, LinePipelineParams, PipelineParams, WaveletParams};

use crate::Failure;

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub line: LinePipelineParams,
    pub wavelet: WaveletParams,
    pub distance: Option<DistanceMode>,
    pub seed: Option<u64>,
    pub repeats: Option<usize>,
    pub train_counts: Option<Vec<usize>>,
    pub corpus: Option<PathBuf>,
    pub gallery: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LaplacianArg {
    FourNeighbor,
    EightNeighbor,
}

impl From<LaplacianArg> for LaplacianKind {
    fn from(v: LaplacianArg) -> Self {
        match v {
            LaplacianArg::FourNeighbor => LaplacianKind::FourNeighbor,
            LaplacianArg::EightNeighbor => LaplacianKind::EightNeighbor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Concat,
    PerBandMean,
}

impl From<DistanceArg> for DistanceMode {
    fn from(v: DistanceArg) -> Self {
        match v {
            DistanceArg::Concat => DistanceMode::Concat,
            DistanceArg::PerBandMean => DistanceMode::PerBandMean,
        }
    }
}

/// Feature-extraction flags; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Standard deviation of the Gaussian smoothing mask [default: 1]
    #[arg(long)]
    pub gaussian_sigma: Option<f64>,
    /// Side of the Gaussian mask, odd [default: 7]
    #[arg(long)]
    pub gaussian_size: Option<usize>,
    /// Gradient quantile an edge pixel must reach, in (0, 1) [default: 0.85]
    #[arg(long)]
    pub edge_quantile: Option<f64>,
    /// Edge pixels with fewer 8-neighbors are removed, 0..=8 [default: 3]
    #[arg(long)]
    pub min_neighbors: Option<usize>,
    /// Radius of the square edge dilation [default: 1]
    #[arg(long)]
    pub dilate_radius: Option<usize>,
    /// Side of the line-feature blocks [default: 4]
    #[arg(long)]
    pub block_size: Option<usize>,
    /// Laplacian stencil [default: four-neighbor]
    #[arg(long, value_enum)]
    pub laplacian: Option<LaplacianArg>,
    /// Wavelet decomposition levels [default: 3]
    #[arg(long)]
    pub levels: Option<usize>,
    /// Blocks per side of every wavelet detail band [default: 8]
    #[arg(long)]
    pub grid: Option<usize>,
}

impl PipelineArgs {
    /// Applies the flags on top of `file` and validates the result.
    pub fn resolve(&self, file: &FileConfig) -> Result<PipelineParams, Failure> {
        let mut line = file.line;
        let mut wavelet = file.wavelet;
        set(&mut line.gaussian_sigma, self.gaussian_sigma);
        set(&mut line.gaussian_size, self.gaussian_size);
        set(&mut line.edge_quantile, self.edge_quantile);
        set(&mut line.min_neighbors, self.min_neighbors);
        set(&mut line.dilate_radius, self.dilate_radius);
        set(&mut line.block_size, self.block_size);
        set(&mut line.laplacian, self.laplacian.map(Into::into));
        set(&mut wavelet.levels, self.levels);
        set(&mut wavelet.grid, self.grid);
        let params = PipelineParams { line, wavelet };
        params.validate().map_err(|e| Failure::Usage(format!("invalid configuration: {e}")))?;
        Ok(params)
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

/// Picks the flag, else the config value, else fails naming both.
pub fn required<T: Clone>(flag: &Option<T>, file: &Option<T>, name: &str) -> Result<T, Failure> {
    flag.clone()
        .or_else(|| file.clone())
        .ok_or_else(|| Failure::Usage(format!("--{name} is required (or `{}` in the config file)", name.replace('-', "_"))))
}
