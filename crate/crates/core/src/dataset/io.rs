//! Directory layout: `<root>/<subject_id>/<sample_index>_<band>.<png|pgm>`
//! with `<band>` one of `R`, `G`, `B`, `N`. Images are 8-bit grayscale;
//! level `k` maps to intensity `k / 255`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ColorType, ExtendedColorType, ImageEncoder, ImageReader};

use super::{Corpus, MultispectralSample, Subject};
use crate::error::{data, Error, Result};
use crate::features::Band;
use crate::imgcore::Image;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageFormat {
    #[default]
    Png,
    /// Binary (P5) graymap.
    Pgm,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Pgm => "pgm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadIssue {
    pub path: PathBuf,
    pub reason: String,
}

impl fmt::Display for LoadIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.reason)
    }
}

/// Files or samples skipped while loading, with the reason for each.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub issues: Vec<LoadIssue>,
}

impl LoadReport {
    fn push(&mut self, path: impl Into<PathBuf>, reason: impl Into<String>) {
        self.issues.push(LoadIssue { path: path.into(), reason: reason.into() });
    }

    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

pub(crate) fn level_to_intensity<T: Scalar>(level: u8) -> T {
    T::from_u8(level).expect("u8 converts to any Scalar") / T::lit(255.0)
}

pub(crate) fn intensity_to_level<T: Scalar>(v: T) -> u8 {
    (v.as_f64() * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Reads an 8-bit grayscale PNG or PGM into `[0, 1]` intensities.
pub fn read_gray<T: Scalar>(path: &Path) -> Result<Image<T>> {
    let img_err = |source| Error::Image { path: path.to_path_buf(), source };
    let decoded = ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(img_err)?;
    if decoded.color() != ColorType::L8 {
        return Err(data(format!(
            "{}: expected 8-bit grayscale, found {:?}",
            path.display(),
            decoded.color()
        )));
    }
    let gray = decoded.into_luma8();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let pixels = gray.into_raw().into_iter().map(level_to_intensity).collect();
    Image::new(w, h, pixels)
}

fn write_gray<T: Scalar>(image: &Image<T>, path: &Path, format: ImageFormat) -> Result<()> {
    let levels: Vec<u8> = image.data().iter().map(|&v| intensity_to_level(v)).collect();
    let (w, h) = (image.width() as u32, image.height() as u32);
    let img_err = |source| Error::Image { path: path.to_path_buf(), source };
    let out = BufWriter::new(File::create(path)?);
    match format {
        ImageFormat::Png => image::codecs::png::PngEncoder::new(out)
            .write_image(&levels, w, h, ExtendedColorType::L8)
            .map_err(img_err),
        ImageFormat::Pgm => PnmEncoder::new(out)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&levels, w, h, ExtendedColorType::L8)
            .map_err(img_err),
    }
}

/// Writes every sample under `root` in the documented layout and returns
/// the number of files written. Intensities are quantized to 8 bits.
pub fn write_corpus<T: Scalar>(corpus: &Corpus<T>, root: &Path, format: ImageFormat) -> Result<usize> {
    let mut written = 0;
    for subject in corpus.subjects() {
        let dir = root.join(&subject.id);
        fs::create_dir_all(&dir)?;
        for sample in &subject.samples {
            for band in Band::ALL {
                let name = format!("{}_{}.{}", sample.sample_index, band.tag(), format.extension());
                write_gray(sample.band(band), &dir.join(name), format)?;
                written += 1;
            }
        }
    }
    Ok(written)
}

fn parse_name(path: &Path) -> Option<(u32, Band)> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    if ext != "png" && ext != "pgm" {
        return None;
    }
    let stem = path.file_stem()?.to_str()?;
    let (index, band) = stem.rsplit_once('_')?;
    Some((index.parse().ok()?, Band::from_tag(band)?))
}

/// Loads every complete sample under `root`. Subjects are ordered by
/// directory name and samples by index. Samples with missing, unreadable
/// or mis-sized bands are skipped and listed in the report. The first
/// accepted sample fixes the corpus geometry.
pub fn load_corpus<T: Scalar>(root: &Path) -> Result<(Corpus<T>, LoadReport)> {
    let mut report = LoadReport::default();
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();

    let mut side: Option<usize> = None;
    let mut subjects = Vec::new();
    for dir in dirs {
        let Some(id) = dir.file_name().and_then(|n| n.to_str()).map(str::to_owned) else {
            report.push(&dir, "subject directory name is not valid UTF-8");
            continue;
        };
        let mut groups: BTreeMap<u32, [Option<PathBuf>; 4]> = BTreeMap::new();
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for file in files {
            match parse_name(&file) {
                Some((index, band)) => {
                    let slot = &mut groups.entry(index).or_default()[band.index()];
                    if slot.is_some() {
                        report.push(&file, format!("duplicate {band} band for sample {index}; ignored"));
                    } else {
                        *slot = Some(file);
                    }
                }
                None => report.push(&file, "file name does not match <index>_<R|G|B|N>.<png|pgm>"),
            }
        }

        let mut samples = Vec::new();
        'sample: for (index, paths) in groups {
            let mut bands = Vec::with_capacity(4);
            for (band, path) in Band::ALL.iter().zip(&paths) {
                let Some(path) = path else {
                    report.push(dir.join(format!("{index}_{}", band.tag())), format!("missing {band} band; sample {index} skipped"));
                    continue 'sample;
                };
                match read_gray::<T>(path) {
                    Ok(im) => bands.push(im),
                    Err(e) => {
                        report.push(path, format!("{e}; sample {index} skipped"));
                        continue 'sample;
                    }
                }
            }
            let bands: [Image<T>; 4] = bands.try_into().expect("four bands");
            let sample = match MultispectralSample::new(id.clone(), index, bands) {
                Ok(s) => s,
                Err(e) => {
                    report.push(dir.join(index.to_string()), format!("{e}; sample skipped"));
                    continue;
                }
            };
            if sample.side() % 8 != 0 {
                report.push(dir.join(index.to_string()), format!("side {} is not a multiple of 8; sample skipped", sample.side()));
                continue;
            }
            match side {
                Some(s) if s != sample.side() => {
                    report.push(dir.join(index.to_string()), format!("side {} differs from corpus side {s}; sample skipped", sample.side()));
                    continue;
                }
                _ => side = Some(sample.side()),
            }
            samples.push(sample);
        }
        if samples.is_empty() {
            report.push(&dir, "no complete samples; subject skipped");
        } else {
            subjects.push(Subject { id, samples });
        }
    }
    if subjects.is_empty() {
        return Err(Error::EmptyCorpus(root.to_path_buf()));
    }
    Ok((Corpus::new(subjects)?, report))
}

/// Loads the four band files of one sample from explicit paths.
pub fn read_sample<T: Scalar>(
    subject_id: &str,
    sample_index: u32,
    paths: [&Path; 4],
) -> Result<MultispectralSample<T>> {
    let [r, g, b, n] = paths.map(read_gray::<T>);
    MultispectralSample::new(subject_id, sample_index, [r?, g?, b?, n?])
}
