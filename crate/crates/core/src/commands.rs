//! Pipeline commands behind the `abx` binary. Every command writes files
//! (atomically, via a temporary file in the target directory) and returns
//! the paths it produced.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::abx::{group_contrast, score_matrix, AbxMode, AbxScoreMatrix};
use crate::manifest::load_manifest;
use crate::report::{render_heatmap, summarize, summary_csv, MatrixGroup};
use crate::reverb::{apply_reverb, ReverbParams};
use crate::snippet::{Pooling, SnippetParams};
use crate::wav::{read_wav, write_wav};
use crate::Error;

/// Snippet lengths of a default sweep, in seconds.
pub const SWEEP_SECONDS: [f64; 4] = [1.0, 5.0, 10.0, 20.0];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub snippet_seconds: Vec<f64>,
    pub pooling: Pooling,
    pub mode: AbxMode,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.snippet_seconds.is_empty() {
            return Err(Error::Usage("no snippet length given".into()));
        }
        for &s in &self.snippet_seconds {
            SnippetParams::new(s, self.pooling)?;
        }
        if let AbxMode::Sampled { count: 0, .. } = self.mode {
            return Err(Error::Usage("--max-triplets must be positive".into()));
        }
        Ok(())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// `scores_10s`, `scores_2.5s`, ...
pub fn scores_stem(snippet_seconds: f64) -> String {
    format!("scores_{snippet_seconds}s")
}

/// Scores the manifest once per snippet length; writes `scores_<L>s.json`
/// and `scores_<L>s.csv` into the output directory.
pub fn cmd_score(config: &RunConfig) -> Result<Vec<AbxScoreMatrix>, Error> {
    config.validate()?;
    let manifest = load_manifest(&config.manifest)?;
    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let mut out = Vec::with_capacity(config.snippet_seconds.len());
    for &seconds in &config.snippet_seconds {
        let params = SnippetParams::new(seconds, config.pooling)?;
        let matrix = score_matrix(&manifest, params, config.mode)?;
        let stem = scores_stem(seconds);
        write_atomic(&config.out_dir.join(format!("{stem}.json")), matrix.to_json().as_bytes())?;
        write_atomic(&config.out_dir.join(format!("{stem}.csv")), matrix.to_csv().as_bytes())?;
        out.push(matrix);
    }
    Ok(out)
}

/// Score at every length, then a heatmap per length and one summary table.
pub fn cmd_sweep(config: &RunConfig, group: Option<&str>) -> Result<Vec<PathBuf>, Error> {
    let matrices = cmd_score(config)?;
    let mut written = Vec::new();
    for m in &matrices {
        let seconds = m.params.snippet_seconds;
        let stem = scores_stem(seconds);
        written.push(config.out_dir.join(format!("{stem}.json")));
        written.push(config.out_dir.join(format!("{stem}.csv")));
        let svg = config.out_dir.join(format!("heatmap_{seconds}s.svg"));
        write_atomic(&svg, render_heatmap(m).as_bytes())?;
        written.push(svg);
    }
    let label = match group {
        Some(g) => g.to_string(),
        None => load_manifest(&config.manifest)?.dataset_name,
    };
    let rows = summarize(&[MatrixGroup {
        label,
        matrices,
    }])?;
    let summary = config.out_dir.join("summary.csv");
    write_atomic(&summary, summary_csv(&rows).as_bytes())?;
    written.push(summary);
    Ok(written)
}

pub fn read_scores(path: &Path) -> Result<AbxScoreMatrix, Error> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(AbxScoreMatrix::from_json(&text)?)
}

pub fn cmd_report(scores: &Path, out: &Path) -> Result<(), Error> {
    let matrix = read_scores(scores)?;
    write_atomic(out, render_heatmap(&matrix).as_bytes())
}

/// `groups` holds either one label for every file or one label per file.
pub fn cmd_summary(scores: &[PathBuf], groups: &[String], out: &Path) -> Result<(), Error> {
    if scores.is_empty() {
        return Err(Error::Usage("no score files given".into()));
    }
    let label_of = |i: usize| -> Result<String, Error> {
        match groups.len() {
            1 => Ok(groups[0].clone()),
            n if n == scores.len() => Ok(groups[i].clone()),
            n => Err(Error::Usage(format!(
                "{n} group labels for {} score files; give one, or one per file",
                scores.len()
            ))),
        }
    };
    let mut series: Vec<MatrixGroup> = Vec::new();
    for (i, path) in scores.iter().enumerate() {
        let label = label_of(i)?;
        let matrix = read_scores(path)?;
        match series.iter_mut().find(|g| g.label == label) {
            Some(g) => g.matrices.push(matrix),
            None => series.push(MatrixGroup {
                label,
                matrices: vec![matrix],
            }),
        }
    }
    let rows = summarize(&series)?;
    write_atomic(out, summary_csv(&rows).as_bytes())
}

pub fn cmd_contrast(scores: &Path, manifest: &Path, key: &str, out: &Path) -> Result<(), Error> {
    let matrix = read_scores(scores)?;
    let manifest = load_manifest(manifest)?;
    let contrast = group_contrast(&matrix, &manifest, key)?;
    let mut json = serde_json::to_string_pretty(&contrast).expect("contrast serializes");
    json.push('\n');
    write_atomic(out, json.as_bytes())
}

/// `wet_0.05`, `wet_0.1`, ...
pub fn wet_dir_name(wet: f64) -> String {
    format!("wet_{wet}")
}

/// Applies the reverberator to every `.wav` in `in_dir` once per wet value,
/// writing `out_dir/wet_<w>/<name>.wav`. Returns the created directories.
pub fn cmd_reverb(
    in_dir: &Path,
    out_dir: &Path,
    wets: &[f64],
    decay_seconds: f64,
) -> Result<Vec<PathBuf>, Error> {
    if wets.is_empty() {
        return Err(Error::Usage("no wet value given".into()));
    }
    let params: Vec<ReverbParams> = wets
        .iter()
        .map(|&w| ReverbParams::new(w, decay_seconds))
        .collect::<Result<_, _>>()?;

    let mut inputs: Vec<PathBuf> = fs::read_dir(in_dir)
        .map_err(io_err(in_dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(in_dir)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
        })
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        return Err(Error::Usage(format!(
            "{} contains no .wav files",
            in_dir.display()
        )));
    }

    let mut dirs = Vec::with_capacity(params.len());
    for p in &params {
        let dir = out_dir.join(wet_dir_name(p.wet()));
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        dirs.push(dir);
    }
    inputs.par_iter().try_for_each(|input| -> Result<(), Error> {
        let audio = read_wav(input)?;
        let name = input.file_name().expect("listed files have names");
        for (p, dir) in params.iter().zip(&dirs) {
            let processed = apply_reverb(&audio, p)?;
            let target = dir.join(name);
            let tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
            write_wav(&processed, tmp.path())?;
            tmp.persist(&target).map_err(|e| Error::Io {
                path: target.clone(),
                source: e.error,
            })?;
        }
        Ok(())
    })?;
    Ok(dirs)
}
