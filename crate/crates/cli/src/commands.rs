use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;

use palmkit::dataset::{choose_training, load_corpus, read_sample, synth_generate, write_corpus, ImageFormat, LoadReport};
use palmkit::eval::{format_table, sweep_train_count, table_rows, ExperimentConfig, ExperimentReport, TableRow};
use palmkit::features::{extract_all, extract_features};
use palmkit::fusion::identify as score_probe;
use palmkit::gallery::{load_gallery, save_gallery, Fingerprint};
use palmkit::{Band, Corpus, DistanceMode, Gallery, MultispectralSample, Template};

use crate::config::{required, FileConfig};
use crate::{DumpArgs, EnrollArgs, EvaluateArgs, Failure, FormatArg, IdentifyArgs, ProbeArgs, SynthArgs};

pub fn synth(a: SynthArgs) -> Result<(), Failure> {
    let corpus: Corpus = synth_generate(a.subjects, a.samples, a.side, a.seed)?;
    let format = match a.format {
        FormatArg::Png => ImageFormat::Png,
        FormatArg::Pgm => ImageFormat::Pgm,
    };
    let files = write_corpus(&corpus, &a.out, format)?;
    println!(
        "wrote {files} files: {} subjects x {} samples x 4 bands, {}x{} px, seed {} -> {}",
        a.subjects,
        a.samples,
        a.side,
        a.side,
        a.seed,
        a.out.display()
    );
    Ok(())
}

pub fn enroll(a: EnrollArgs) -> Result<(), Failure> {
    let file = FileConfig::load(a.config.as_deref())?;
    let params = a.pipeline.resolve(&file)?;
    let root = required(&a.corpus, &file.corpus, "corpus")?;
    let wanted = a.train_indices.as_deref().map(parse_indices).transpose()?;
    let corpus = load(&root)?;

    let chosen: Vec<Vec<usize>> = match (&wanted, a.train_count) {
        (Some(wanted), _) => corpus
            .subjects()
            .iter()
            .map(|s| {
                let picked: Vec<usize> = (0..s.samples.len())
                    .filter(|&i| wanted.contains(&s.samples[i].sample_index))
                    .collect();
                if picked.len() != wanted.len() {
                    let have: BTreeSet<u32> = s.samples.iter().map(|x| x.sample_index).collect();
                    let missing: Vec<String> = wanted.difference(&have).map(u32::to_string).collect();
                    return Err(anyhow!("subject {} has no sample(s) {}", s.id, missing.join(",")));
                }
                Ok(picked)
            })
            .collect::<anyhow::Result<_>>()?,
        (None, Some(k)) => choose_training(&corpus, k, a.seed.or(file.seed))?,
        (None, None) => corpus.subjects().iter().map(|s| (0..s.samples.len()).collect()).collect(),
    };

    let flat: Vec<&MultispectralSample> = corpus
        .subjects()
        .iter()
        .zip(&chosen)
        .flat_map(|(s, idx)| idx.iter().map(move |&i| &s.samples[i]))
        .collect();
    let mut features = extract_all(&flat, &params)?.into_iter();
    let templates = corpus
        .subjects()
        .iter()
        .zip(&chosen)
        .map(|(s, idx)| {
            let feats: Vec<_> = features.by_ref().take(idx.len()).collect();
            Template::from_features(&s.id, feats.iter())
        })
        .collect::<palmkit::Result<Vec<_>>>()?;
    let gallery: Gallery = Gallery::from_templates(Fingerprint::new(corpus.side(), &params)?, templates)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_gallery(&gallery, &a.out)?;
    println!(
        "enrolled {} classes from {} samples ({}x{} px) -> {}",
        gallery.len(),
        flat.len(),
        corpus.side(),
        corpus.side(),
        a.out.display()
    );
    Ok(())
}

pub fn identify(a: IdentifyArgs) -> Result<(), Failure> {
    let file = FileConfig::load(a.config.as_deref())?;
    let path = required(&a.gallery, &file.gallery, "gallery")?;
    let distance = a.distance.map(DistanceMode::from).or(file.distance).unwrap_or_default();
    if let Some(m) = a.warn_margin {
        if !m.is_finite() || m < 0.0 {
            return Err(Failure::Usage(format!("--warn-margin must be a non-negative number, got {m}")));
        }
    }
    let gallery: Gallery = load_gallery(&path).with_context(|| format!("loading gallery {}", path.display()))?;
    let probe = read_probe(&a.probe)?;
    let features = extract_features(&probe, &gallery.fingerprint().params)?;
    let table = score_probe(&features, &gallery, distance)?;

    println!("class: {}", table.decided_class());
    println!("df: {:.6}", table.decided_df());
    match table.margin {
        Some(m) => println!("margin: {m:.6}"),
        None => println!("margin: none"),
    }
    if table.tied > 1 {
        println!("tied: {} classes share the minimum; the first in gallery order was chosen", table.tied);
    }
    if let (Some(limit), Some(m)) = (a.warn_margin, table.margin) {
        if m < limit {
            eprintln!("warning: margin {m:.6} to the runner-up is below {limit}; the decision is weak");
        }
    }
    if let Some(out) = &a.scores_out {
        table.write_csv(create(out)?)?;
    }
    Ok(())
}

/// JSON document written by `evaluate --json-out`.
#[derive(Serialize)]
struct EvaluationOutput<'a> {
    table: &'a [TableRow],
    reports: &'a [ExperimentReport],
}

pub fn evaluate(a: EvaluateArgs) -> Result<(), Failure> {
    let file = FileConfig::load(a.config.as_deref())?;
    let params = a.pipeline.resolve(&file)?;
    let root = required(&a.corpus, &file.corpus, "corpus")?;
    let counts = a.train_counts.clone().or(file.train_counts.clone()).unwrap_or_else(|| vec![6]);
    let repeats = a.repeats.or(file.repeats).unwrap_or(10);
    let seed = a.seed.or(file.seed);
    let distance = a.distance.map(DistanceMode::from).or(file.distance).unwrap_or_default();
    if counts.is_empty() || counts.contains(&0) {
        return Err(Failure::Usage("--train-counts must list positive integers".into()));
    }
    if repeats == 0 {
        return Err(Failure::Usage("--repeats must be at least 1".into()));
    }
    if let Some(m) = a.min_accuracy {
        if !(0.0..=1.0).contains(&m) {
            return Err(Failure::Usage(format!("--min-accuracy must lie in [0, 1], got {m}")));
        }
    }
    let config = ExperimentConfig { line: params.line, wavelet: params.wavelet, distance };

    let corpus = load(&root)?;
    println!(
        "corpus: {} subjects, {} samples, {}x{} px; {repeats} repeat(s), seed {}",
        corpus.subjects().len(),
        corpus.n_samples(),
        corpus.side(),
        corpus.side(),
        seed.map_or("none (first samples)".to_owned(), |s| s.to_string())
    );
    let mut reports = sweep_train_count(&corpus, &counts, repeats, seed, &config)?;

    if let Some(out) = &a.scores_out {
        let several = reports.len() > 1;
        for r in &mut reports {
            let path = if several { with_count(out, r.n_train) } else { out.clone() };
            r.write_probe_csv(create(&path)?)?;
            r.scores_csv = Some(path.display().to_string());
        }
    }
    let rows = table_rows(&reports);
    print!("{}", format_table(&rows));

    if let Some(out) = &a.json_out {
        let mut w = create(out)?;
        serde_json::to_writer_pretty(&mut w, &EvaluationOutput { table: &rows, reports: &reports })
            .context("writing JSON report")?;
        writeln!(w)?;
        w.flush()?;
    }

    if let Some(min) = a.min_accuracy {
        let failing: Vec<String> = rows
            .iter()
            .filter(|r| r.hybrid < min)
            .map(|r| format!("n_train={} hybrid {:.4}", r.n_train, r.hybrid))
            .collect();
        if !failing.is_empty() {
            return Err(Failure::Threshold(format!("accuracy below {min}: {}", failing.join("; "))));
        }
    }
    Ok(())
}

pub fn dump_features(a: DumpArgs) -> Result<(), Failure> {
    let file = FileConfig::load(a.config.as_deref())?;
    let params = a.pipeline.resolve(&file)?;
    let probe = read_probe(&a.probe)?;
    let f = extract_features(&probe, &params)?;
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["feature", "band", "index", "value"]).context("writing CSV")?;
    for (kind, feature) in [("line", &f.line), ("wavelet", &f.wavelet)] {
        for band in Band::ALL {
            for (i, v) in feature.band(band).iter().enumerate() {
                w.write_record([kind, &band.tag().to_string(), &i.to_string(), &v.to_string()])
                    .context("writing CSV")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn load(root: &Path) -> Result<Corpus, Failure> {
    let (corpus, report): (Corpus, LoadReport) =
        load_corpus(root).with_context(|| format!("loading corpus {}", root.display()))?;
    for issue in &report.issues {
        eprintln!("warning: skipped {}: {}", issue.path.display(), issue.reason);
    }
    Ok(corpus)
}

fn read_probe(p: &ProbeArgs) -> Result<MultispectralSample, Failure> {
    if let Some(files) = &p.probe_files {
        let paths: [&Path; 4] = [&files[0], &files[1], &files[2], &files[3]];
        return Ok(read_sample("probe", 0, paths)?);
    }
    let (Some(dir), Some(index)) = (&p.probe_dir, p.sample_index) else {
        return Err(Failure::Usage("give --probe-files or --probe-dir with --sample-index".into()));
    };
    let paths = Band::ALL
        .map(|b| {
            ["png", "pgm"]
                .iter()
                .map(|ext| dir.join(format!("{index}_{}.{ext}", b.tag())))
                .find(|p| p.is_file())
                .ok_or_else(|| anyhow!("missing band file {}/{index}_{}.png (or .pgm)", dir.display(), b.tag()))
        })
        .into_iter()
        .collect::<anyhow::Result<Vec<PathBuf>>>()?;
    let id = dir.file_name().map_or_else(|| "probe".to_owned(), |n| n.to_string_lossy().into_owned());
    Ok(read_sample(&id, index, [&paths[0], &paths[1], &paths[2], &paths[3]])?)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// `scores.csv` -> `scores.n6.csv`.
fn with_count(path: &Path, n_train: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.n{n_train}.{}", ext.to_string_lossy()),
        None => format!("{stem}.n{n_train}"),
    };
    path.with_file_name(name)
}

/// Parses `0..5` (inclusive), `0..=5`, `0,2,4` and mixtures like `0..2,7`.
fn parse_indices(list: &str) -> Result<BTreeSet<u32>, Failure> {
    let bad = |why: &str| Failure::Usage(format!("invalid --train-indices {list:?}: {why}"));
    let num = |s: &str| s.trim().parse::<u32>().map_err(|_| bad(&format!("{:?} is not an index", s.trim())));
    let mut set = BTreeSet::new();
    for part in list.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(bad("empty item"));
        }
        if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi) = (num(lo)?, num(hi.strip_prefix('=').unwrap_or(hi))?);
            if lo > hi {
                return Err(bad(&format!("range {lo}..{hi} is empty")));
            }
            set.extend(lo..=hi);
        } else {
            set.insert(num(part)?);
        }
    }
    Ok(set)
}
