use serde::{Deserialize, Serialize};

use super::{BinaryImage, Image, Kernel};
use crate::error::{param, Result};
use crate::scalar::Scalar;

/// Horizontal Sobel mask, applied in correlation form (responds to
/// intensity increasing with `x`).
pub const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
/// Vertical Sobel mask (responds to intensity increasing with `y`).
pub const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

const LAPLACIAN_4: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]];
const LAPLACIAN_8: [[f64; 3]; 3] = [[1.0, 1.0, 1.0], [1.0, -8.0, 1.0], [1.0, 1.0, 1.0]];

/// Discrete second-derivative mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplacianKind {
    #[default]
    FourNeighbor,
    EightNeighbor,
}

impl LaplacianKind {
    pub fn kernel<T: Scalar>(self) -> Kernel<T> {
        let rows = match self {
            LaplacianKind::FourNeighbor => LAPLACIAN_4,
            LaplacianKind::EightNeighbor => LAPLACIAN_8,
        };
        Kernel::from_rows(rows).expect("static kernel is valid")
    }
}

/// Zero-mean isotropic Gaussian sampled on the integer grid around the
/// kernel center and renormalized to unit sum.
pub fn gaussian_kernel<T: Scalar>(sigma: T, size: usize) -> Result<Kernel<T>> {
    if !sigma.is_finite() || sigma <= T::zero() {
        return Err(param(format!("gaussian sigma must be positive, got {sigma}")));
    }
    if size.is_multiple_of(2) {
        return Err(param(format!("gaussian kernel size must be odd, got {size}")));
    }
    let r = (size / 2) as isize;
    let denom = T::lit(2.0) * sigma * sigma;
    let mut weights = Vec::with_capacity(size * size);
    for m in -r..=r {
        for n in -r..=r {
            let d2 = T::from_isize(m * m + n * n).unwrap();
            weights.push((-d2 / denom).exp());
        }
    }
    let total: T = weights.iter().copied().sum();
    for w in &mut weights {
        *w /= total;
    }
    Kernel::new(size, weights)
}

/// Linear filtering in correlation form,
/// `out(x, y) = Σ k(dx, dy) · in(x + dx, y + dy)`, with replicate padding.
pub fn convolve<T: Scalar>(image: &Image<T>, kernel: &Kernel<T>) -> Result<Image<T>> {
    let (w, h) = image.dimensions();
    if kernel.size() > w || kernel.size() > h {
        return Err(param(format!(
            "kernel of size {} is larger than the {w}x{h} image",
            kernel.size()
        )));
    }
    Ok(Image::from_raw(w, h, correlate_any(image, kernel)))
}

/// `sqrt(gx² + gy²)` from the 3×3 Sobel pair.
///
/// Each response is evaluated as the difference of two `1·2·1` weighted
/// sums, so flat neighborhoods give exactly zero.
pub fn gradient_magnitude<T: Scalar>(image: &Image<T>) -> Image<T> {
    let (w, h) = image.dimensions();
    let two = T::lit(2.0);
    let p = |x: isize, y: isize| image.get_clamped(x, y);
    let mut data = Vec::with_capacity(w * h);
    // Clamping handles 1- and 2-pixel sides too.
    for y in 0..h as isize {
        for x in 0..w as isize {
            let col = |cx: isize| p(cx, y - 1) + two * p(cx, y) + p(cx, y + 1);
            let row = |cy: isize| p(x - 1, cy) + two * p(x, cy) + p(x + 1, cy);
            let gx = col(x + 1) - col(x - 1);
            let gy = row(y + 1) - row(y - 1);
            data.push((gx * gx + gy * gy).sqrt());
        }
    }
    Image::from_raw(w, h, data)
}

fn correlate_any<T: Scalar>(image: &Image<T>, kernel: &Kernel<T>) -> Vec<T> {
    let (w, h) = image.dimensions();
    let r = kernel.radius() as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = T::zero();
            for dy in -r..=r {
                for dx in -r..=r {
                    acc += kernel.weight(dx, dy) * image.get_clamped(x + dx, y + dy);
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Nearest-rank quantile: the smallest value `v` such that at least
/// `ceil(q · n)` of the values are `<= v`.
pub fn quantile_threshold<T: Scalar>(values: &[T], q: f64) -> Result<T> {
    if !(q > 0.0 && q < 1.0) {
        return Err(param(format!("quantile must lie in (0, 1), got {q}")));
    }
    if values.is_empty() {
        return Err(param("quantile of an empty set"));
    }
    let n = values.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    let mut scratch = values.to_vec();
    let (_, v, _) = scratch.select_nth_unstable_by(rank, |a, b| a.partial_cmp(b).unwrap());
    Ok(*v)
}

/// Binary edge map: a pixel is an edge when its Sobel magnitude is nonzero
/// and reaches the `threshold_quantile` quantile of the image's magnitudes.
///
/// The threshold is relative, so the map is unchanged by a global positive
/// rescaling of the image.
pub fn sobel_edges<T: Scalar>(image: &Image<T>, threshold_quantile: f64) -> Result<BinaryImage> {
    if !(threshold_quantile > 0.0 && threshold_quantile < 1.0) {
        return Err(param(format!(
            "edge quantile must lie in (0, 1), got {threshold_quantile}"
        )));
    }
    let mag = gradient_magnitude(image);
    let t = quantile_threshold(mag.data(), threshold_quantile)?;
    let data = mag.data().iter().map(|&m| m > T::zero() && m >= t).collect();
    BinaryImage::new(image.width(), image.height(), data)
}

/// Second derivative with the given mask (replicate padding), unclamped.
pub fn laplacian<T: Scalar>(image: &Image<T>, kind: LaplacianKind) -> Image<T> {
    let data = correlate_any(image, &kind.kernel());
    Image::from_raw(image.width(), image.height(), data)
}

/// Second derivative with negative responses clamped to zero. Dark ridges
/// on a brighter background respond positively.
pub fn positive_laplacian<T: Scalar>(image: &Image<T>, kind: LaplacianKind) -> Image<T> {
    let lap = laplacian(image, kind);
    let data = lap.data().iter().map(|&v| v.max(T::zero())).collect();
    Image::from_raw(image.width(), image.height(), data)
}
