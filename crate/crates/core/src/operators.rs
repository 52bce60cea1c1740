//! The biased PXP Hamiltonian and its diagonal similarity weight.
//!
//! `H_g = Σ_i P_{i-1} (e^{g} σ⁺_i + e^{-g} σ⁻_i) P_{i+1}` on a periodic ring,
//! restricted to the blockaded sector. It is conjugate to the Hermitian PXP
//! Hamiltonian `H_0` through `V = e^{g N↑}`: `V H_0 V⁻¹ = H_g`.
//!
//! All matrix elements are real; complex arithmetic only enters through time
//! evolution, so operators store `f64` and promote at the point of use.

use std::collections::HashMap;
use std::io::{self, Write};

use faer::Mat;
use num_complex::Complex64;

use crate::basis::ConstrainedBasis;
use crate::error::{Result, ScarError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub length: usize,
    pub g: f64,
}

impl ModelParams {
    pub fn new(length: usize, g: f64) -> Result<Self> {
        crate::basis::validate_length(length)?;
        if !g.is_finite() {
            return Err(ScarError::NonFiniteBias(g));
        }
        Ok(ModelParams { length, g })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Hamiltonian,
    Diagonal,
}

/// Real sparse matrix over a constrained basis, stored column-compressed.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    dim: usize,
    kind: OperatorKind,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl OperatorMatrix {
    /// The zero operator; evolution under it leaves every state unchanged.
    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix {
            dim,
            kind: OperatorKind::Hamiltonian,
            col_ptr: vec![0; dim + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries as `(row, col, value)`, column by column.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |col| {
            (self.col_ptr[col]..self.col_ptr[col + 1])
                .map(move |k| (self.row_idx[k], col, self.values[k]))
        })
    }

    /// Value at `(row, col)`, zero if not stored.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        self.row_idx[range.clone()]
            .binary_search(&row)
            .map(|k| self.values[range.start + k])
            .unwrap_or(0.0)
    }

    /// Negates the `k`-th stored entry. Exists so that verification runs can
    /// prove they detect a corrupted Hamiltonian.
    pub fn negate_entry(&mut self, k: usize) {
        self.values[k] = -self.values[k];
    }

    /// `y = A x` for complex vectors.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for col in 0..self.dim {
            let xc = x[col];
            for k in self.col_ptr[col]..self.col_ptr[col + 1] {
                y[self.row_idx[k]] += xc * self.values[k];
            }
        }
    }

    /// `y = A x` for real vectors.
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for col in 0..self.dim {
            for k in self.col_ptr[col]..self.col_ptr[col + 1] {
                y[self.row_idx[k]] += self.values[k] * x[col];
            }
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// Coordinate-format dump: a `dim nnz` header, then one `row col value` per line.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "% {} {}", self.dim, self.nnz())?;
        for (r, c, v) in self.entries() {
            writeln!(out, "{r} {c} {v:.16e}")?;
        }
        Ok(())
    }

    fn from_columns(dim: usize, kind: OperatorKind, columns: Vec<Vec<(usize, f64)>>) -> Self {
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in columns {
            col.sort_unstable_by_key(|&(r, _)| r);
            for (r, v) in col {
                row_idx.push(r);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        OperatorMatrix { dim, kind, col_ptr, row_idx, values }
    }
}

/// `V = e^{g N↑}`, kept as `g·N↑` per basis state.
#[derive(Clone, Debug)]
pub struct DiagonalWeight {
    log_weights: Vec<f64>,
}

impl DiagonalWeight {
    pub fn dim(&self) -> usize {
        self.log_weights.len()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.log_weights[k].exp()
    }

    /// Matrix element ratio `V_mm / V_nn`, evaluated as a single exponential.
    pub fn ratio(&self, m: usize, n: usize) -> f64 {
        (self.log_weights[m] - self.log_weights[n]).exp()
    }

    pub fn to_operator(&self) -> OperatorMatrix {
        let columns = self.log_weights.iter().enumerate().map(|(k, w)| vec![(k, w.exp())]).collect();
        OperatorMatrix::from_columns(self.dim(), OperatorKind::Diagonal, columns)
    }
}

/// Builds `H_g` on the given basis.
pub fn build_h(basis: &ConstrainedBasis, params: &ModelParams) -> Result<OperatorMatrix> {
    if basis.length() != params.length {
        return Err(ScarError::LengthMismatch { basis: basis.length(), params: params.length });
    }
    if !params.g.is_finite() {
        return Err(ScarError::NonFiniteBias(params.g));
    }
    let raise = params.g.exp();
    let lower = (-params.g).exp();
    let length = basis.length();

    let columns = basis
        .states()
        .iter()
        .map(|&n| {
            (0..length)
                .filter(|&site| n.neighbours_down(site))
                .map(|site| {
                    let m = n.flipped(site);
                    let row = basis
                        .index_of(m.bits())
                        .expect("a flip with both neighbours down stays in the sector");
                    (row, if n.is_up(site) { lower } else { raise })
                })
                .collect()
        })
        .collect();

    Ok(OperatorMatrix::from_columns(basis.dim(), OperatorKind::Hamiltonian, columns))
}

pub fn build_v(basis: &ConstrainedBasis, g: f64) -> DiagonalWeight {
    DiagonalWeight { log_weights: basis.nup().iter().map(|&n| g * n as f64).collect() }
}

/// Largest entrywise deviation between `V H_0 V⁻¹` and `H_g`, taken over the
/// union of both sparsity patterns.
pub fn similarity_residual(h0: &OperatorMatrix, hg: &OperatorMatrix, v: &DiagonalWeight) -> f64 {
    let mut diff: HashMap<(usize, usize), f64> =
        hg.entries().map(|(r, c, val)| ((r, c), val)).collect();
    for (r, c, val) in h0.entries() {
        *diff.entry((r, c)).or_insert(0.0) -= v.ratio(r, c) * val;
    }
    diff.values().fold(0.0, |acc, d| acc.max(d.abs()))
}

/// Builds `H_0`, `H_g` and `V` independently and returns the residual of the
/// similarity relation. Callers compare it against their tolerance.
pub fn check_similarity(basis: &ConstrainedBasis, g: f64) -> Result<f64> {
    let h0 = build_h(basis, &ModelParams::new(basis.length(), 0.0)?)?;
    let hg = build_h(basis, &ModelParams::new(basis.length(), g)?)?;
    Ok(similarity_residual(&h0, &hg, &build_v(basis, g)))
}
