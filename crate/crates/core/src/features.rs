//! Per-band feature stacks and whole-sample feature extraction.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::MultispectralSample;
use crate::error::{data, Result};
use crate::gallery::Fingerprint;
use crate::palmline::{line_feature, LinePipelineParams};
use crate::scalar::Scalar;
use crate::wavelet::{wavelet_feature, WaveletParams};

/// Illumination band of a multispectral capture, in concatenation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    Red,
    Green,
    Blue,
    Nir,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::Red, Band::Green, Band::Blue, Band::Nir];

    /// Single-letter tag used in file names.
    pub fn tag(self) -> char {
        match self {
            Band::Red => 'R',
            Band::Green => 'G',
            Band::Blue => 'B',
            Band::Nir => 'N',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Band> {
        match tag {
            "R" => Some(Band::Red),
            "G" => Some(Band::Green),
            "B" => Some(Band::Blue),
            "N" => Some(Band::Nir),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

/// Four equal-length band vectors stored back to back in R, G, B, NIR order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFeature<T> {
    band_len: usize,
    values: Vec<T>,
}

impl<T: Scalar> SpectralFeature<T> {
    pub fn from_bands(bands: [Vec<T>; 4]) -> Result<Self> {
        let band_len = bands[0].len();
        if bands.iter().any(|b| b.len() != band_len) {
            return Err(data("band feature vectors differ in length"));
        }
        Ok(Self { band_len, values: bands.concat() })
    }

    pub fn from_concatenated(values: Vec<T>) -> Result<Self> {
        if !values.len().is_multiple_of(4) {
            return Err(data(format!(
                "concatenated feature length {} is not a multiple of 4",
                values.len()
            )));
        }
        Ok(Self { band_len: values.len() / 4, values })
    }

    pub fn band(&self, band: Band) -> &[T] {
        let i = band.index();
        &self.values[i * self.band_len..(i + 1) * self.band_len]
    }

    pub fn band_len(&self) -> usize {
        self.band_len
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Elementwise arithmetic mean of equally shaped features.
    pub fn mean<'a>(features: impl IntoIterator<Item = &'a Self>) -> Result<Self>
    where
        T: 'a,
    {
        let mut iter = features.into_iter();
        let first = iter.next().ok_or_else(|| data("mean of zero features"))?;
        let mut acc = first.values.clone();
        let mut n = 1usize;
        for f in iter {
            if f.values.len() != acc.len() || f.band_len != first.band_len {
                return Err(data("cannot average features of different shapes"));
            }
            for (a, &v) in acc.iter_mut().zip(&f.values) {
                *a += v;
            }
            n += 1;
        }
        let n = T::from_usize_lossy(n);
        for a in &mut acc {
            *a /= n;
        }
        Ok(Self { band_len: first.band_len, values: acc })
    }
}

/// Everything needed to turn a sample into features.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub line: LinePipelineParams,
    pub wavelet: WaveletParams,
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        self.line.validate()?;
        self.wavelet.validate()
    }
}

/// Line and wavelet features of one sample, tagged with the geometry they
/// were computed under.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFeatures<T> {
    pub line: SpectralFeature<T>,
    pub wavelet: SpectralFeature<T>,
    pub fingerprint: Fingerprint,
}

pub fn extract_features<T: Scalar>(
    sample: &MultispectralSample<T>,
    params: &PipelineParams,
) -> Result<SampleFeatures<T>> {
    let fingerprint = Fingerprint::new(sample.side(), params)?;
    let (line, wavelet) = rayon::join(
        || line_feature(sample, &params.line),
        || wavelet_feature(sample, &params.wavelet),
    );
    Ok(SampleFeatures { line: line?, wavelet: wavelet?, fingerprint })
}

/// Extracts features for many samples in parallel, preserving order.
pub fn extract_all<T: Scalar>(
    samples: &[&MultispectralSample<T>],
    params: &PipelineParams,
) -> Result<Vec<SampleFeatures<T>>> {
    samples.par_iter().map(|s| extract_features(s, params)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_tags_round_trip() {
        for b in Band::ALL {
            assert_eq!(Band::from_tag(&b.tag().to_string()), Some(b));
        }
        assert_eq!(Band::from_tag("X"), None);
    }

    #[test]
    fn mean_of_features() {
        let a = SpectralFeature::from_concatenated(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = SpectralFeature::from_concatenated(vec![3.0, 2.0, 1.0, 0.0]).unwrap();
        let m = SpectralFeature::mean([&a, &b]).unwrap();
        assert_eq!(m.as_slice(), &[2.0, 2.0, 2.0, 2.0]);
        assert_eq!(m.band(Band::Blue), &[2.0]);
        assert!(SpectralFeature::<f64>::mean([]).is_err());
    }

    #[test]
    fn mismatched_bands_are_rejected() {
        let r = SpectralFeature::from_bands([vec![1.0f64], vec![1.0], vec![1.0, 2.0], vec![1.0]]);
        assert!(r.is_err());
    }
}
