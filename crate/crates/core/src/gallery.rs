//! Enrollment and the gallery file format.
//!
//! Gallery files are little-endian throughout:
//!
//! ```text
//! magic            4 bytes  "PKGL"
//! version          u16      FORMAT_VERSION
//! fingerprint_len  u32
//! fingerprint      fingerprint_len bytes (see Fingerprint::to_bytes)
//! digest           8 bytes  first 8 bytes of SHA-256(fingerprint)
//! template_count   u32
//! template_count × {
//!     label_len    u32
//!     label        label_len bytes, UTF-8
//!     n_train      u32
//!     line         line_len × f64
//!     wavelet      wavelet_len × f64
//! }
//! ```

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::dataset::MultispectralSample;
use crate::error::{data, param, GalleryError, Result};
use crate::features::{extract_all, PipelineParams, SampleFeatures, SpectralFeature};
use crate::imgcore::LaplacianKind;
use crate::palmline::LinePipelineParams;
use crate::scalar::Scalar;
use crate::wavelet::WaveletParams;

pub const MAGIC: &[u8; 4] = b"PKGL";
pub const FORMAT_VERSION: u16 = 1;

/// Tag for the detail-band order inside wavelet vectors: level-major,
/// `LH, HL, HH` within each level.
const DETAIL_ORDER_LEVEL_MAJOR: u8 = 0;

/// Image geometry and pipeline settings that features were computed under.
/// Features are only comparable between equal fingerprints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fingerprint {
    pub side: usize,
    pub params: PipelineParams,
}

impl Fingerprint {
    pub fn new(side: usize, params: &PipelineParams) -> Result<Self> {
        params.line.check_geometry(side)?;
        params.wavelet.check_geometry(side, side)?;
        Ok(Self { side, params: *params })
    }

    pub fn line_len(&self) -> usize {
        4 * self.params.line.band_len(self.side)
    }

    pub fn wavelet_len(&self) -> usize {
        4 * self.params.wavelet.band_len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let l = &self.params.line;
        let w = &self.params.wavelet;
        let mut b = Vec::with_capacity(64);
        put_u32(&mut b, self.side);
        b.extend(l.gaussian_sigma.to_le_bytes());
        put_u32(&mut b, l.gaussian_size);
        b.extend(l.edge_quantile.to_le_bytes());
        put_u32(&mut b, l.min_neighbors);
        put_u32(&mut b, l.dilate_radius);
        put_u32(&mut b, l.block_size);
        b.push(match l.laplacian {
            LaplacianKind::FourNeighbor => 0,
            LaplacianKind::EightNeighbor => 1,
        });
        put_u32(&mut b, w.levels);
        put_u32(&mut b, w.grid);
        b.push(DETAIL_ORDER_LEVEL_MAJOR);
        put_u32(&mut b, self.line_len());
        put_u32(&mut b, self.wavelet_len());
        b
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, GalleryError> {
        let corrupt = |_| GalleryError::FingerprintCorrupt;
        let mut r = Reader(bytes);
        let side = r.u32().map_err(corrupt)? as usize;
        let gaussian_sigma = r.f64().map_err(corrupt)?;
        let gaussian_size = r.u32().map_err(corrupt)? as usize;
        let edge_quantile = r.f64().map_err(corrupt)?;
        let min_neighbors = r.u32().map_err(corrupt)? as usize;
        let dilate_radius = r.u32().map_err(corrupt)? as usize;
        let block_size = r.u32().map_err(corrupt)? as usize;
        let laplacian = match r.u8().map_err(corrupt)? {
            0 => LaplacianKind::FourNeighbor,
            1 => LaplacianKind::EightNeighbor,
            _ => return Err(GalleryError::FingerprintCorrupt),
        };
        let levels = r.u32().map_err(corrupt)? as usize;
        let grid = r.u32().map_err(corrupt)? as usize;
        let order = r.u8().map_err(corrupt)?;
        let line_len = r.u32().map_err(corrupt)? as usize;
        let wavelet_len = r.u32().map_err(corrupt)? as usize;
        if order != DETAIL_ORDER_LEVEL_MAJOR || !r.0.is_empty() {
            return Err(GalleryError::FingerprintCorrupt);
        }
        let params = PipelineParams {
            line: LinePipelineParams {
                gaussian_sigma,
                gaussian_size,
                edge_quantile,
                min_neighbors,
                dilate_radius,
                block_size,
                laplacian,
            },
            wavelet: WaveletParams { levels, grid },
        };
        let fp = Fingerprint::new(side, &params).map_err(|_| GalleryError::FingerprintCorrupt)?;
        if fp.line_len() != line_len || fp.wavelet_len() != wavelet_len {
            return Err(GalleryError::FingerprintCorrupt);
        }
        Ok(fp)
    }

    /// Short hash of the canonical encoding.
    pub fn digest(&self) -> [u8; 8] {
        digest_bytes(&self.to_bytes())
    }
}

fn digest_bytes(bytes: &[u8]) -> [u8; 8] {
    let full = Sha256::digest(bytes);
    full[..8].try_into().expect("sha256 is 32 bytes")
}

/// An enrolled identity: features averaged over its training samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Template<T> {
    pub class_id: String,
    pub line: SpectralFeature<T>,
    pub wavelet: SpectralFeature<T>,
    pub n_train: usize,
    pub fingerprint: Fingerprint,
}

impl<T: Scalar> Template<T> {
    /// Averages precomputed features. All must share one fingerprint.
    pub fn from_features<'a>(
        class_id: impl Into<String>,
        features: impl IntoIterator<Item = &'a SampleFeatures<T>>,
    ) -> Result<Self> {
        let features: Vec<_> = features.into_iter().collect();
        let first = features
            .first()
            .ok_or_else(|| param("a template needs at least one training sample"))?;
        if features.iter().any(|f| f.fingerprint != first.fingerprint) {
            return Err(data("training samples differ in geometry"));
        }
        Ok(Self {
            class_id: class_id.into(),
            line: SpectralFeature::mean(features.iter().map(|f| &f.line))?,
            wavelet: SpectralFeature::mean(features.iter().map(|f| &f.wavelet))?,
            n_train: features.len(),
            fingerprint: first.fingerprint,
        })
    }
}

/// Extracts features from every sample and averages them.
pub fn build_template<T: Scalar>(
    class_id: impl Into<String>,
    samples: &[&MultispectralSample<T>],
    params: &PipelineParams,
) -> Result<Template<T>> {
    if samples.is_empty() {
        return Err(param("a template needs at least one training sample"));
    }
    let side = samples[0].side();
    if samples.iter().any(|s| s.side() != side) {
        return Err(data("training samples differ in geometry"));
    }
    let features = extract_all(samples, params)?;
    Template::from_features(class_id, &features)
}

/// Ordered templates sharing one fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct Gallery<T> {
    fingerprint: Fingerprint,
    templates: Vec<Template<T>>,
}

impl<T: Scalar> Gallery<T> {
    pub fn new(fingerprint: Fingerprint) -> Self {
        Self { fingerprint, templates: Vec::new() }
    }

    pub fn from_templates(fingerprint: Fingerprint, templates: Vec<Template<T>>) -> Result<Self> {
        let mut g = Self::new(fingerprint);
        for t in templates {
            g.insert(t)?;
        }
        Ok(g)
    }

    pub fn insert(&mut self, template: Template<T>) -> Result<(), GalleryError> {
        if template.fingerprint != self.fingerprint {
            return Err(GalleryError::FingerprintMismatch);
        }
        if template.n_train == 0 {
            return Err(GalleryError::NoTrainingSamples(template.class_id));
        }
        for (kind, found, expected) in [
            ("line", template.line.len(), self.fingerprint.line_len()),
            ("wavelet", template.wavelet.len(), self.fingerprint.wavelet_len()),
        ] {
            if found != expected {
                return Err(GalleryError::FeatureLength {
                    class_id: template.class_id,
                    kind,
                    found,
                    expected,
                });
            }
        }
        if self.templates.iter().any(|t| t.class_id == template.class_id) {
            return Err(GalleryError::DuplicateClass(template.class_id));
        }
        self.templates.push(template);
        Ok(())
    }

    pub fn fingerprint(&self) -> &Fingerprint {
        &self.fingerprint
    }

    pub fn templates(&self) -> &[Template<T>] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn class_ids(&self) -> impl Iterator<Item = &str> {
        self.templates.iter().map(|t| t.class_id.as_str())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let fp = self.fingerprint.to_bytes();
        let per_template = 8 * (self.fingerprint.line_len() + self.fingerprint.wavelet_len());
        let mut b = Vec::with_capacity(32 + fp.len() + self.templates.len() * (per_template + 16));
        b.extend(MAGIC);
        b.extend(FORMAT_VERSION.to_le_bytes());
        put_u32(&mut b, fp.len());
        b.extend(&fp);
        b.extend(digest_bytes(&fp));
        put_u32(&mut b, self.templates.len());
        for t in &self.templates {
            put_u32(&mut b, t.class_id.len());
            b.extend(t.class_id.as_bytes());
            put_u32(&mut b, t.n_train);
            for &v in t.line.as_slice().iter().chain(t.wavelet.as_slice()) {
                b.extend(v.as_f64().to_le_bytes());
            }
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader(bytes);
        if r.take(4).map_err(|_| GalleryError::BadMagic)? != MAGIC {
            return Err(GalleryError::BadMagic.into());
        }
        let version = r.u16()?;
        if version != FORMAT_VERSION {
            return Err(GalleryError::UnsupportedVersion { found: version, supported: FORMAT_VERSION }.into());
        }
        let fp_len = r.u32()? as usize;
        let fp_bytes = r.take(fp_len)?;
        let stored = r.take(8)?;
        if stored != digest_bytes(fp_bytes) {
            return Err(GalleryError::FingerprintCorrupt.into());
        }
        let fingerprint = Fingerprint::from_bytes(fp_bytes)?;
        let count = r.u32()? as usize;
        let mut gallery = Self::new(fingerprint);
        let mut seen = HashSet::new();
        for _ in 0..count {
            let label_len = r.u32()? as usize;
            let class_id = std::str::from_utf8(r.take(label_len)?)
                .map_err(|_| GalleryError::InvalidLabel)?
                .to_owned();
            if !seen.insert(class_id.clone()) {
                return Err(GalleryError::DuplicateClass(class_id).into());
            }
            let n_train = r.u32()? as usize;
            let line = r.f64_vec::<T>(fingerprint.line_len())?;
            let wavelet = r.f64_vec::<T>(fingerprint.wavelet_len())?;
            gallery.insert(Template {
                class_id,
                line: SpectralFeature::from_concatenated(line)?,
                wavelet: SpectralFeature::from_concatenated(wavelet)?,
                n_train,
                fingerprint,
            })?;
        }
        if !r.0.is_empty() {
            return Err(GalleryError::TrailingBytes(r.0.len()).into());
        }
        Ok(gallery)
    }
}

pub fn save_gallery<T: Scalar>(gallery: &Gallery<T>, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&gallery.to_bytes())?;
    f.sync_all()?;
    Ok(())
}

pub fn load_gallery<T: Scalar>(path: &Path) -> Result<Gallery<T>> {
    Gallery::from_bytes(&fs::read(path)?)
}

fn put_u32(b: &mut Vec<u8>, v: usize) {
    b.extend(u32::try_from(v).expect("value fits the u32 field").to_le_bytes());
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], GalleryError> {
        if self.0.len() < n {
            return Err(GalleryError::Truncated);
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, GalleryError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, GalleryError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, GalleryError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, GalleryError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64_vec<T: Scalar>(&mut self, n: usize) -> Result<Vec<T>, GalleryError> {
        let raw = self.take(n.checked_mul(8).ok_or(GalleryError::Truncated)?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap())))
            .collect())
    }
}
