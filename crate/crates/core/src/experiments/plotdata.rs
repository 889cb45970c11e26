//! Whitespace-separated data files for external plotting.
//!
//! * `<exp>_<norm>_vs_t.dat`: columns `n t value`, one blank-line separated
//!   block per `n`.
//! * `<exp>_<norm>_vs_n.dat`: columns `n value`.
//! * `<exp>_lower_bound.dat` (when `D` and `c0` exist): columns
//!   `t D(n_max,t) c0*t`.
//!
//! Lines starting with `#` are headers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::result::ExperimentResult;
use crate::error::Result;

/// `norm → n → [(t, value)]`.
type TimeSeries<'a> = BTreeMap<&'a str, BTreeMap<u32, Vec<(f64, f64)>>>;

pub fn emit_plotdata(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    let mut by_t: TimeSeries = BTreeMap::new();
    let mut by_n: BTreeMap<&str, Vec<(u32, f64)>> = BTreeMap::new();
    for r in &result.records {
        match (r.n, r.t) {
            (Some(n), Some(t)) => by_t
                .entry(&r.norm_name)
                .or_default()
                .entry(n)
                .or_default()
                .push((t, r.value)),
            (Some(n), None) => by_n.entry(&r.norm_name).or_default().push((n, r.value)),
            _ => {}
        }
    }
    for (name, blocks) in &by_t {
        let mut text = String::from("# n t value\n");
        for (i, (n, pts)) in blocks.iter().enumerate() {
            if i > 0 {
                text.push('\n');
            }
            for (t, v) in pts {
                writeln!(text, "{n} {t:e} {v:e}").expect("string write");
            }
        }
        files.insert(format!("{}_{name}_vs_t.dat", result.experiment), text);
    }
    for (name, pts) in &by_n {
        let mut text = String::from("# n value\n");
        for (n, v) in pts {
            writeln!(text, "{n} {v:e}").expect("string write");
        }
        files.insert(format!("{}_{name}_vs_n.dat", result.experiment), text);
    }
    if let (Some(blocks), Some(c0)) = (by_t.get("D"), result.constants.get("c0")) {
        if let Some((n, pts)) = blocks.iter().next_back() {
            let mut text = format!("# t D(n={n},t) c0*t\n");
            for (t, v) in pts {
                writeln!(text, "{t:e} {v:e} {:e}", c0 * t).expect("string write");
            }
            files.insert(format!("{}_lower_bound.dat", result.experiment), text);
        }
    }

    let mut paths = Vec::new();
    if files.is_empty() {
        return Ok(paths);
    }
    fs::create_dir_all(dir)?;
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text)?;
        paths.push(path);
    }
    Ok(paths)
}
