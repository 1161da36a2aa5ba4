use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain the operation accepts.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Inputs are individually valid but inconsistent with each other.
    #[error("data error: {0}")]
    Data(String),

    /// Every distance from the probe is zero, so normalization is undefined.
    #[error("degenerate probe: all {modality} distances are zero")]
    DegenerateProbe { modality: &'static str },

    #[error("no usable samples found under {}", .0.display())]
    EmptyCorpus(PathBuf),

    #[error("gallery file: {0}")]
    Gallery(#[from] GalleryError),

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failures specific to reading and assembling gallery files.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GalleryError {
    #[error("bad magic bytes (not a gallery file)")]
    BadMagic,
    #[error("unsupported format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u16, supported: u16 },
    #[error("fingerprint block is corrupt (digest mismatch)")]
    FingerprintCorrupt,
    #[error("file is truncated")]
    Truncated,
    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("class label is not valid UTF-8")]
    InvalidLabel,
    #[error("duplicate class id {0:?}")]
    DuplicateClass(String),
    #[error("template fingerprint does not match the gallery")]
    FingerprintMismatch,
    #[error("template {class_id:?} has {found} {kind} features, expected {expected}")]
    FeatureLength {
        class_id: String,
        kind: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("template {0:?} averages zero samples")]
    NoTrainingSamples(String),
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}

pub(crate) fn data(msg: impl Into<String>) -> Error {
    Error::Data(msg.into())
}
