//! CSV tables and the JSON run manifest.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which round-trips
//! every `f64` exactly and keeps repeated runs byte-identical.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::basis::ConstrainedBasis;
use crate::entanglement::EntropyRecord;
use crate::error::Result;
use crate::evolution::EvolutionTrace;
use crate::spectral::{NupDistribution, ScarCriterion, ScarLabeling, SpectrumComparison};

pub const TRACE_HEADER: &str =
    "t,p_z2,p_z2bar,log_norm_sq,re_amp_z2,im_amp_z2,re_amp_z2bar,im_amp_z2bar";
pub const ENTROPY_HEADER: &str = "alpha,energy,g,entropy_bits,is_scar";
pub const SCARS_HEADER: &str = "alpha,energy,overlap,is_scar";
pub const BASIS_HEADER: &str = "index,bits,config,n_up";
pub const SPECTRUM_HEADER: &str = "alpha,energy";
pub const SPECTRUM_CHECK_HEADER: &str = "g,hausdorff,sorted_max_deviation,max_imag";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header of the per-eigenvector `p_{N↑}` table for a chain of `length` sites.
pub fn nup_header(length: usize) -> String {
    let mut header = String::from(SCARS_HEADER);
    for n in 0..=length / 2 {
        header.push_str(&format!(",nup_{n}"));
    }
    header
}

/// `g` as it appears in file names: `g-1`, `g0`, `g0.5`.
pub fn g_tag(g: f64) -> String {
    format!("g{g}")
}

fn write_table(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace_csv(path: &Path, trace: &EvolutionTrace) -> Result<()> {
    let rows = (0..trace.len()).map(|k| {
        [
            trace.times[k],
            trace.p_z2[k],
            trace.p_z2bar[k],
            trace.log_norm_sq[k],
            trace.amp_z2[k].re,
            trace.amp_z2[k].im,
            trace.amp_z2bar[k].re,
            trace.amp_z2bar[k].im,
        ]
        .map(fmt_f64)
        .join(",")
    });
    write_table(path, TRACE_HEADER, rows)
}

pub fn write_entropy_csv(path: &Path, records: &[EntropyRecord], scars: &ScarLabeling) -> Result<()> {
    let rows = records.iter().map(|r| {
        format!(
            "{},{},{},{},{}",
            r.alpha,
            fmt_f64(r.energy),
            fmt_f64(r.g),
            fmt_f64(r.entropy_bits),
            u8::from(scars.is_scar(r.alpha))
        )
    });
    write_table(path, ENTROPY_HEADER, rows)
}

pub fn write_scars_csv(
    path: &Path,
    energies: &[f64],
    overlaps: &[f64],
    scars: &ScarLabeling,
) -> Result<()> {
    let rows = energies.iter().zip(overlaps).enumerate().map(|(a, (e, o))| {
        format!("{a},{},{},{}", fmt_f64(*e), fmt_f64(*o), u8::from(scars.is_scar(a)))
    });
    write_table(path, SCARS_HEADER, rows)
}

pub fn write_nup_csv(
    path: &Path,
    length: usize,
    energies: &[f64],
    overlaps: &[f64],
    scars: &ScarLabeling,
    distributions: &[NupDistribution],
) -> Result<()> {
    let rows = distributions.iter().map(|d| {
        let mut row = format!(
            "{},{},{},{}",
            d.alpha,
            fmt_f64(energies[d.alpha]),
            fmt_f64(overlaps[d.alpha]),
            u8::from(scars.is_scar(d.alpha))
        );
        for p in &d.p {
            row.push(',');
            row.push_str(&fmt_f64(*p));
        }
        row
    });
    write_table(path, &nup_header(length), rows)
}

pub fn write_basis_csv(path: &Path, basis: &ConstrainedBasis) -> Result<()> {
    let rows = basis
        .states()
        .iter()
        .enumerate()
        .map(|(k, s)| format!("{k},{},{s},{}", s.bits(), s.n_up()));
    write_table(path, BASIS_HEADER, rows)
}

pub fn write_spectrum_csv(path: &Path, energies: &[f64]) -> Result<()> {
    let rows = energies.iter().enumerate().map(|(a, e)| format!("{a},{}", fmt_f64(*e)));
    write_table(path, SPECTRUM_HEADER, rows)
}

pub fn write_spectrum_check_csv(path: &Path, comparisons: &[SpectrumComparison]) -> Result<()> {
    let rows = comparisons.iter().map(|c| {
        [c.g, c.hausdorff, c.sorted_max_deviation, c.max_imag].map(fmt_f64).join(",")
    });
    write_table(path, SPECTRUM_CHECK_HEADER, rows)
}

/// Hex-encoded SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one CLI run, written as `manifest.json` next to its outputs.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: C,
    pub basis_dim: usize,
    pub stages: Vec<StageTiming>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scar_criterion: Option<ScarCriterion>,
    pub artifacts: Vec<Artifact>,
}

impl<C: Serialize> RunManifest<C> {
    pub fn new(config: C, basis_dim: usize) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config,
            basis_dim,
            stages: Vec::new(),
            tolerances: BTreeMap::new(),
            scar_criterion: None,
            artifacts: Vec::new(),
        }
    }

    /// Hashes `path` (inside `out_dir`) and appends it to the artifact list.
    pub fn register(&mut self, out_dir: &Path, path: &Path) -> Result<()> {
        let file = path.strip_prefix(out_dir).unwrap_or(path).to_string_lossy().into_owned();
        self.artifacts.push(Artifact {
            file,
            sha256: sha256_file(path)?,
            bytes: fs::metadata(path)?.len(),
        });
        Ok(())
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        let mut out = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        out.flush()?;
        Ok(path)
    }
}
