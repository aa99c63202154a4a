//! Reading inputs and writing outputs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::Value;
use ultragw::phylo::{parse_newick_all, tree_shape_space, TipMeasure};
use ultragw::{Exec, ScalarMeasure, UmSpace};

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_space(path: &Path) -> Result<UmSpace> {
    let (space, _) = UmSpace::from_json_str(&read(path)?)
        .with_context(|| format!("loading space {}", path.display()))?;
    Ok(space)
}

#[derive(Deserialize)]
struct MeasureFile {
    x: Vec<f64>,
    m: Vec<f64>,
}

/// Syntax errors are format errors; bad masses are validation errors.
pub fn load_measure(path: &Path) -> Result<ScalarMeasure> {
    let ctx = || format!("loading measure {}", path.display());
    let file: MeasureFile = serde_json::from_str(&read(path)?)
        .map_err(|e| ultragw::Error::Format(e.to_string()))
        .with_context(ctx)?;
    ScalarMeasure::new(&file.x, &file.m).with_context(ctx)
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    serde_json::from_str::<Vec<f64>>(&read(path)?)
        .map_err(|e| ultragw::Error::Format(e.to_string()))
        .with_context(|| format!("loading mass vector {}", path.display()))
}

fn sorted_files(dir: &Path, keep: impl Fn(&Path) -> bool) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && keep(p))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Every `*.json` space in `dir`, by file name; ids are file stems.
pub fn load_space_dir(dir: &Path) -> Result<Vec<(String, PathBuf, UmSpace)>> {
    sorted_files(dir, |p| p.extension().is_some_and(|e| e == "json"))?
        .into_iter()
        .map(|p| Ok((stem(&p), p.clone(), load_space(&p)?)))
        .collect()
}

/// Trees of a Newick file as tree-shape spaces; a file with several trees
/// yields ids `stem#1`, `stem#2`, ...
pub fn ingest_file(path: &Path, unit_edges: bool, measure: TipMeasure) -> Result<Vec<(String, UmSpace)>> {
    let trees = parse_newick_all(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let base = stem(path);
    let many = trees.len() > 1;
    trees
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let id = if many { format!("{base}#{}", k + 1) } else { base.clone() };
            let space = tree_shape_space(t, unit_edges, measure)
                .with_context(|| format!("converting tree {} of {}", k + 1, path.display()))?;
            Ok((id, space))
        })
        .collect()
}

/// Every Newick file in `dir` (extensions nwk, newick, tre, tree), ingested in parallel.
pub fn load_newick_dir(dir: &Path, unit_edges: bool, measure: TipMeasure, exec: Exec) -> Result<Vec<(String, PathBuf, UmSpace)>> {
    let files = sorted_files(dir, |p| {
        p.extension()
            .is_some_and(|e| ["nwk", "newick", "tre", "tree"].iter().any(|x| e == *x))
    })?;
    let per_file = ultragw::exec::map_range(exec, files.len(), |k| ingest_file(&files[k], unit_edges, measure));
    let mut out = Vec::new();
    for (path, spaces) in files.iter().zip(per_file) {
        for (id, s) in spaces? {
            out.push((id, path.clone(), s));
        }
    }
    Ok(out)
}

/// Write to `out` or stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

pub fn emit_json(out: Option<&Path>, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}
