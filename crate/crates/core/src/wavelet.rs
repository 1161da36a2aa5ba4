//! Orthonormal Haar (db1) transform and detail-band block-energy features.
//!
//! One analysis step pairs samples `(2k, 2k + 1)`:
//! `approx = (a + b) / √2`, `detail = (a - b) / √2`.
//!
//! In 2-D the rows are filtered first (along `x`), then the columns (along
//! `y`). Sub-bands are named row-filter first: `LH` is lowpass along rows
//! then highpass along columns, `HL` is highpass along rows then lowpass
//! along columns, `HH` is highpass along both.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::MultispectralSample;
use crate::error::{param, Result};
use crate::features::{Band, SpectralFeature};
use crate::imgcore::{block_power, Image};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveletParams {
    pub levels: usize,
    /// Blocks per side of every detail band.
    pub grid: usize,
}

impl Default for WaveletParams {
    fn default() -> Self {
        Self { levels: 3, grid: 8 }
    }
}

impl WaveletParams {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(param("wavelet.levels must be at least 1"));
        }
        if self.levels > 31 {
            return Err(param("wavelet.levels is unreasonably large"));
        }
        if self.grid == 0 {
            return Err(param("wavelet.grid must be positive"));
        }
        Ok(())
    }

    pub fn check_geometry(&self, width: usize, height: usize) -> Result<()> {
        self.validate()?;
        let step = 1usize << self.levels;
        if !width.is_multiple_of(step) || !height.is_multiple_of(step) {
            return Err(param(format!(
                "{width}x{height} image is not divisible by 2^{} for wavelet.levels",
                self.levels
            )));
        }
        let (cw, ch) = (width / step, height / step);
        if cw % self.grid != 0 || ch % self.grid != 0 {
            return Err(param(format!(
                "coarsest detail band {cw}x{ch} is not divisible by wavelet.grid {}",
                self.grid
            )));
        }
        Ok(())
    }

    /// Feature length of one band: levels · 3 · grid².
    pub fn band_len(&self) -> usize {
        self.levels * 3 * self.grid * self.grid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    LH,
    HL,
    HH,
}

impl Orientation {
    /// Order of detail bands within one level of the feature vector.
    pub const ORDER: [Orientation; 3] = [Orientation::LH, Orientation::HL, Orientation::HH];
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One level of a 2-D analysis step; every band is half size.
#[derive(Debug, Clone, PartialEq)]
pub struct Subbands<T> {
    pub ll: Image<T>,
    pub lh: Image<T>,
    pub hl: Image<T>,
    pub hh: Image<T>,
}

impl<T: Scalar> Subbands<T> {
    pub fn detail(&self, o: Orientation) -> &Image<T> {
        match o {
            Orientation::LH => &self.lh,
            Orientation::HL => &self.hl,
            Orientation::HH => &self.hh,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetailBand<T> {
    /// 1 is the finest level.
    pub level: usize,
    pub orientation: Orientation,
    pub image: Image<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T> {
    /// Level-major, `LH, HL, HH` within a level.
    pub details: Vec<DetailBand<T>>,
    pub approx: Image<T>,
}

pub fn haar_step_1d<T: Scalar>(signal: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    if signal.len() < 2 || !signal.len().is_multiple_of(2) {
        return Err(param(format!(
            "haar step needs an even length >= 2, got {}",
            signal.len()
        )));
    }
    let s = T::SQRT_2();
    Ok(signal
        .chunks_exact(2)
        .map(|p| ((p[0] + p[1]) / s, (p[0] - p[1]) / s))
        .unzip())
}

/// Inverse of [`haar_step_1d`].
pub fn haar_inverse_1d<T: Scalar>(approx: &[T], detail: &[T]) -> Result<Vec<T>> {
    if approx.len() != detail.len() {
        return Err(param("approximation and detail lengths differ"));
    }
    let s = T::SQRT_2();
    Ok(approx
        .iter()
        .zip(detail)
        .flat_map(|(&a, &d)| [(a + d) / s, (a - d) / s])
        .collect())
}

pub fn dwt2_step<T: Scalar>(image: &Image<T>) -> Result<Subbands<T>> {
    let (w, h) = image.dimensions();
    if w % 2 != 0 || h % 2 != 0 {
        return Err(param(format!("dwt2 step needs even sides, got {w}x{h}")));
    }
    let (hw, hh) = (w / 2, h / 2);
    let s = T::SQRT_2();
    let src = image.data();

    // Rows: low half and high half, each hw wide and h tall.
    let mut low = vec![T::zero(); hw * h];
    let mut high = vec![T::zero(); hw * h];
    for y in 0..h {
        for k in 0..hw {
            let a = src[y * w + 2 * k];
            let b = src[y * w + 2 * k + 1];
            low[y * hw + k] = (a + b) / s;
            high[y * hw + k] = (a - b) / s;
        }
    }

    let columns = |half: &[T]| {
        let mut lo = vec![T::zero(); hw * hh];
        let mut hi = vec![T::zero(); hw * hh];
        for k in 0..hh {
            for x in 0..hw {
                let a = half[2 * k * hw + x];
                let b = half[(2 * k + 1) * hw + x];
                lo[k * hw + x] = (a + b) / s;
                hi[k * hw + x] = (a - b) / s;
            }
        }
        (Image::from_raw(hw, hh, lo), Image::from_raw(hw, hh, hi))
    };
    let (ll, lh) = columns(&low);
    let (hl, hh) = columns(&high);
    Ok(Subbands { ll, lh, hl, hh })
}

/// Inverse of [`dwt2_step`].
pub fn idwt2_step<T: Scalar>(bands: &Subbands<T>) -> Result<Image<T>> {
    let (hw, hh) = bands.ll.dimensions();
    if [&bands.lh, &bands.hl, &bands.hh].iter().any(|b| b.dimensions() != (hw, hh)) {
        return Err(param("sub-band dimensions differ"));
    }
    let (w, h) = (2 * hw, 2 * hh);
    let s = T::SQRT_2();

    let uncolumns = |lo: &Image<T>, hi: &Image<T>| {
        let mut half = vec![T::zero(); hw * h];
        for k in 0..hh {
            for x in 0..hw {
                let a = lo.get(x, k);
                let d = hi.get(x, k);
                half[2 * k * hw + x] = (a + d) / s;
                half[(2 * k + 1) * hw + x] = (a - d) / s;
            }
        }
        half
    };
    let low = uncolumns(&bands.ll, &bands.lh);
    let high = uncolumns(&bands.hl, &bands.hh);

    let mut out = vec![T::zero(); w * h];
    for y in 0..h {
        for k in 0..hw {
            let a = low[y * hw + k];
            let d = high[y * hw + k];
            out[y * w + 2 * k] = (a + d) / s;
            out[y * w + 2 * k + 1] = (a - d) / s;
        }
    }
    Ok(Image::from_raw(w, h, out))
}

/// Repeated analysis of the approximation band.
pub fn decompose<T: Scalar>(image: &Image<T>, params: &WaveletParams) -> Result<Decomposition<T>> {
    params.validate()?;
    let step = 1usize << params.levels;
    let (w, h) = image.dimensions();
    if w % step != 0 || h % step != 0 {
        return Err(param(format!(
            "{w}x{h} image cannot be decomposed to {} levels",
            params.levels
        )));
    }
    let mut details = Vec::with_capacity(3 * params.levels);
    let mut approx = image.clone();
    for level in 1..=params.levels {
        let bands = dwt2_step(&approx)?;
        for orientation in Orientation::ORDER {
            details.push(DetailBand { level, orientation, image: bands.detail(orientation).clone() });
        }
        approx = bands.ll;
    }
    Ok(Decomposition { details, approx })
}

/// Block energies of every detail band, `grid × grid` blocks per band,
/// concatenated level-major with `LH, HL, HH` inside each level.
pub fn wavelet_feature_band<T: Scalar>(image: &Image<T>, params: &WaveletParams) -> Result<Vec<T>> {
    params.check_geometry(image.width(), image.height())?;
    let dec = decompose(image, params)?;
    let mut out = Vec::with_capacity(params.band_len());
    for d in &dec.details {
        let bw = d.image.width() / params.grid;
        let bh = d.image.height() / params.grid;
        out.extend(block_power(&d.image, bw, bh)?);
    }
    Ok(out)
}

pub fn wavelet_feature<T: Scalar>(
    sample: &MultispectralSample<T>,
    params: &WaveletParams,
) -> Result<SpectralFeature<T>> {
    let [r, g, b, n] = Band::ALL.map(|band| wavelet_feature_band(sample.band(band), params));
    SpectralFeature::from_bands([r?, g?, b?, n?])
}
