//! Image primitives shared by the line and wavelet pipelines.
//!
//! Images are row-major buffers of intensities. Pixel `(x, y)` lives at
//! `data[y * width + x]`; `x` is the column and `y` the row.

mod block;
mod filter;
mod morphology;

pub use block::{block_power, pairwise_sum};
pub use filter::{
    convolve, gaussian_kernel, gradient_magnitude, laplacian, positive_laplacian,
    quantile_threshold, sobel_edges, LaplacianKind, SOBEL_X, SOBEL_Y,
};
pub use morphology::{dilate, remove_isolated};

use crate::error::{param, Result};
use crate::scalar::Scalar;

/// A single-channel image with real-valued pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> Image<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(param(format!("image must be non-empty, got {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(param(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(param(format!("pixel {i} is not finite")));
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    ///
    /// Panics if either dimension is zero or `f` yields a non-finite value.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data).expect("from_fn produced an invalid image")
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
            .expect("map produced an invalid image")
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }
}

impl<T: Copy> Image<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with coordinates clamped to the image (replicate padding).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }
}

/// A boolean mask with the same layout as [`Image`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(param(format!("mask must be non-empty, got {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(param(format!(
                "{width}x{height} mask needs {} pixels, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data).expect("mask must be non-empty")
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::from_fn(width, height, |_, _| false)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }
}

/// A square, odd-sized filter mask. `weight(dx, dy)` takes offsets from the
/// center in `-radius..=radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<T> {
    size: usize,
    weights: Vec<T>,
}

impl<T: Scalar> Kernel<T> {
    /// `weights` is row-major, `size * size` long.
    pub fn new(size: usize, weights: Vec<T>) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(param(format!("kernel size must be odd and >= 1, got {size}")));
        }
        if weights.len() != size * size {
            return Err(param(format!(
                "kernel of size {size} needs {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(param("kernel weights must be finite"));
        }
        Ok(Self { size, weights })
    }

    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Result<Self> {
        Self::new(N, rows.iter().flatten().map(|&w| T::lit(w)).collect())
    }

    pub fn identity() -> Self {
        Self { size: 1, weights: vec![T::one()] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, dx: isize, dy: isize) -> T {
        let r = self.radius() as isize;
        self.weights[((dy + r) as usize) * self.size + (dx + r) as usize]
    }

    pub fn sum(&self) -> T {
        self.weights.iter().copied().sum()
    }
}
