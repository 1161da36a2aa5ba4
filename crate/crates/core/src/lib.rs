//! Multispectral palmprint identification.
//!
//! Each palm capture is four aligned grayscale bands (red, green, blue,
//! near-infrared). Two feature families are computed per band:
//!
//! * **line features**: block powers of the principal-line image, which is
//!   the positive second derivative of the smoothed palm masked by a
//!   dilated Sobel edge map ([`palmline`]);
//! * **wavelet features**: block energies of the nine detail bands of a
//!   3-level Haar decomposition ([`wavelet`]).
//!
//! Templates average the features of a subject's training samples
//! ([`gallery`]). A probe is assigned to the class minimizing the sum of
//! its mean-normalized line and wavelet distances ([`fusion`]).
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod gallery;
pub mod imgcore;
pub mod palmline;
pub mod scalar;
pub mod wavelet;

pub use error::{Error, GalleryError, Result};
pub use features::{Band, PipelineParams};
pub use fusion::DistanceMode;
pub use imgcore::{BinaryImage, LaplacianKind};
pub use palmline::LinePipelineParams;
pub use scalar::Scalar;
pub use wavelet::{Orientation, WaveletParams};

pub type GrayImage = imgcore::Image<f64>;
pub type GrayImageF32 = imgcore::Image<f32>;
pub type Kernel = imgcore::Kernel<f64>;
pub type MultispectralSample = dataset::MultispectralSample<f64>;
pub type Corpus = dataset::Corpus<f64>;
pub type LineFeature = features::SpectralFeature<f64>;
pub type WaveletFeature = features::SpectralFeature<f64>;
pub type SampleFeatures = features::SampleFeatures<f64>;
pub type Decomposition = wavelet::Decomposition<f64>;
pub type Template = gallery::Template<f64>;
pub type Gallery = gallery::Gallery<f64>;
pub type ScoreTable = fusion::ScoreTable<f64>;
