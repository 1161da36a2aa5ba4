//! Principal-line extraction and line block-power features.
//!
//! The image is smoothed once; the smoothed image feeds both the Sobel edge
//! branch and the second-derivative branch. The edge map is pruned of
//! isolated pixels, dilated, and used to mask the positive second
//! derivative. Block powers of the masked image form the band feature.

use serde::{Deserialize, Serialize};

use crate::dataset::MultispectralSample;
use crate::error::{param, Result};
use crate::features::{Band, SpectralFeature};
use crate::imgcore::{
    block_power, convolve, dilate, gaussian_kernel, positive_laplacian, remove_isolated,
    sobel_edges, BinaryImage, Image, LaplacianKind,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinePipelineParams {
    pub gaussian_sigma: f64,
    /// Side of the square smoothing mask; odd.
    pub gaussian_size: usize,
    /// Gradient-magnitude quantile a pixel must reach to count as an edge.
    pub edge_quantile: f64,
    /// Edge pixels with fewer set 8-neighbors are dropped.
    pub min_neighbors: usize,
    pub dilate_radius: usize,
    /// Side of the square blocks the line image is tiled into.
    pub block_size: usize,
    pub laplacian: LaplacianKind,
}

impl Default for LinePipelineParams {
    fn default() -> Self {
        Self {
            gaussian_sigma: 1.0,
            gaussian_size: 7,
            edge_quantile: 0.85,
            min_neighbors: 3,
            dilate_radius: 1,
            block_size: 4,
            laplacian: LaplacianKind::FourNeighbor,
        }
    }
}

impl LinePipelineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma > 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(param("line.gaussian_sigma must be positive and finite"));
        }
        if self.gaussian_size.is_multiple_of(2) {
            return Err(param("line.gaussian_size must be odd"));
        }
        if !(self.edge_quantile > 0.0 && self.edge_quantile < 1.0) {
            return Err(param("line.edge_quantile must lie in (0, 1)"));
        }
        if self.min_neighbors > 8 {
            return Err(param("line.min_neighbors must be in 0..=8"));
        }
        if self.block_size == 0 {
            return Err(param("line.block_size must be positive"));
        }
        Ok(())
    }

    /// Checks that a square image of side `side` can go through the pipeline.
    pub fn check_geometry(&self, side: usize) -> Result<()> {
        self.validate()?;
        if !side.is_multiple_of(self.block_size) {
            return Err(param(format!(
                "image side {side} is not a multiple of line.block_size {}",
                self.block_size
            )));
        }
        if self.gaussian_size > side {
            return Err(param(format!(
                "line.gaussian_size {} exceeds image side {side}",
                self.gaussian_size
            )));
        }
        Ok(())
    }

    /// Feature length of one band for a square image of side `side`.
    pub fn band_len(&self, side: usize) -> usize {
        (side / self.block_size).pow(2)
    }
}

/// Intermediate images of the line pipeline, mostly for inspection.
#[derive(Debug, Clone)]
pub struct LineStages<T> {
    pub smoothed: Image<T>,
    pub edges: BinaryImage,
    pub pruned: BinaryImage,
    pub mask: BinaryImage,
    pub second_derivative: Image<T>,
    pub lines: Image<T>,
}

pub fn line_stages<T: Scalar>(image: &Image<T>, params: &LinePipelineParams) -> Result<LineStages<T>> {
    if !image.is_square() {
        return Err(param(format!(
            "line extraction needs a square image, got {}x{}",
            image.width(),
            image.height()
        )));
    }
    params.check_geometry(image.width())?;

    let kernel = gaussian_kernel(T::lit(params.gaussian_sigma), params.gaussian_size)?;
    let smoothed = convolve(image, &kernel)?;
    let edges = sobel_edges(&smoothed, params.edge_quantile)?;
    let pruned = remove_isolated(&edges, params.min_neighbors)?;
    let mask = dilate(&pruned, params.dilate_radius);
    let second_derivative = positive_laplacian(&smoothed, params.laplacian);

    let data = second_derivative
        .data()
        .iter()
        .zip(mask.data())
        .map(|(&v, &keep)| if keep { v } else { T::zero() })
        .collect();
    let lines = Image::new(image.width(), image.height(), data)?;
    Ok(LineStages { smoothed, edges, pruned, mask, second_derivative, lines })
}

/// The masked second-derivative image: nonnegative, and zero outside the
/// dilated edge mask.
pub fn extract_lines<T: Scalar>(image: &Image<T>, params: &LinePipelineParams) -> Result<Image<T>> {
    line_stages(image, params).map(|s| s.lines)
}

/// Block powers of the line image, `(side / block_size)²` values.
pub fn line_feature_band<T: Scalar>(image: &Image<T>, params: &LinePipelineParams) -> Result<Vec<T>> {
    let lines = extract_lines(image, params)?;
    block_power(&lines, params.block_size, params.block_size)
}

/// Band features concatenated in R, G, B, NIR order.
pub fn line_feature<T: Scalar>(
    sample: &MultispectralSample<T>,
    params: &LinePipelineParams,
) -> Result<SpectralFeature<T>> {
    let [r, g, b, n] = Band::ALL.map(|band| line_feature_band(sample.band(band), params));
    SpectralFeature::from_bands([r?, g?, b?, n?])
}
