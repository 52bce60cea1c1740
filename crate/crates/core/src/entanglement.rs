//! Base-2 bipartite entanglement entropy across a contiguous half-ring cut.
//!
//! The constrained basis is not a tensor product, so a vector is reshaped
//! into a matrix indexed by (half-chain string on A, half-chain string on B),
//! where each half runs over the open-chain blockade-free strings. Pairs whose
//! glued configuration violates the blockade at either cut boundary are simply
//! absent from the basis and stay zero.

use std::collections::HashMap;

use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::ConstrainedBasis;
use crate::error::{Result, ScarError};
use crate::spectral::{right_eigvec, EigenSystem};

/// Squared singular values below this are dropped from the entropy sum.
pub const SCHMIDT_CUTOFF: f64 = 1e-14;
const NORM_TOL: f64 = 1e-10;

/// Region A: `len` consecutive sites starting at `start`, wrapping around the ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CutSpec {
    pub start: usize,
    pub len: usize,
    pub length: usize,
}

impl CutSpec {
    /// Half-ring cut `{start, …, start + L/2 - 1}`.
    pub fn half(length: usize, start: usize) -> Result<Self> {
        Self::new(length, start, length / 2)
    }

    pub fn new(length: usize, start: usize, len: usize) -> Result<Self> {
        if length < 2 || start >= length || len == 0 || len >= length {
            return Err(ScarError::InvalidCut { start, len, length });
        }
        Ok(CutSpec { start, len, length })
    }

    /// Splits a configuration into (A bits, B bits), each ordered from the
    /// site following the previous region's last site.
    pub fn split(&self, bits: u32) -> (u32, u32) {
        let l = self.length as u32;
        let mask = if l == 32 { u32::MAX } else { (1u32 << l) - 1 };
        let rotated = if self.start == 0 {
            bits
        } else {
            ((bits >> self.start) | (bits << (l - self.start as u32))) & mask
        };
        (rotated & ((1 << self.len) - 1), rotated >> self.len)
    }
}

/// Open-chain blockade-free strings of `len` sites, ascending.
fn open_chain_strings(len: usize) -> Vec<u32> {
    (0u32..1 << len).filter(|s| s & (s >> 1) == 0).collect()
}

/// Precomputed reshaping of basis vectors into Schmidt coefficient matrices.
#[derive(Clone, Debug)]
pub struct Bipartition {
    cut: CutSpec,
    dim_a: usize,
    dim_b: usize,
    coords: Vec<(usize, usize)>,
}

impl Bipartition {
    pub fn new(basis: &ConstrainedBasis, cut: CutSpec) -> Result<Self> {
        if cut.length != basis.length() {
            return Err(ScarError::InvalidCut { start: cut.start, len: cut.len, length: basis.length() });
        }
        let index = |strings: Vec<u32>| -> HashMap<u32, usize> {
            strings.into_iter().enumerate().map(|(i, s)| (s, i)).collect()
        };
        let a_index = index(open_chain_strings(cut.len));
        let b_index = index(open_chain_strings(cut.length - cut.len));
        let coords = basis
            .states()
            .iter()
            .map(|s| {
                let (a, b) = cut.split(s.bits());
                (a_index[&a], b_index[&b])
            })
            .collect();
        Ok(Bipartition { cut, dim_a: a_index.len(), dim_b: b_index.len(), coords })
    }

    pub fn cut(&self) -> CutSpec {
        self.cut
    }

    /// Number of blockade-free strings on A and on B.
    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    /// Upper bound `log₂ min(dim_A, dim_B)` on the entropy.
    pub fn max_entropy(&self) -> f64 {
        (self.dim_a.min(self.dim_b) as f64).log2()
    }

    pub fn coefficient_matrix(&self, vector: &[f64]) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim_a, self.dim_b);
        for (&(a, b), &v) in self.coords.iter().zip(vector) {
            m[(a, b)] = v;
        }
        m
    }

    /// Entropy in bits of a unit-norm real vector.
    pub fn entropy(&self, vector: &[f64]) -> Result<f64> {
        if vector.len() != self.coords.len() {
            return Err(ScarError::DimensionMismatch { expected: self.coords.len(), got: vector.len() });
        }
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(ScarError::NotNormalized { norm });
        }
        let singular = self
            .coefficient_matrix(vector)
            .singular_values()
            .map_err(|_| ScarError::Decomposition { what: "singular value decomposition", g: None })?;
        let entropy = singular
            .iter()
            .map(|s| s * s)
            .filter(|&p| p >= SCHMIDT_CUTOFF)
            .map(|p| -p * p.log2())
            .sum::<f64>();
        Ok(entropy.max(0.0))
    }
}

pub fn schmidt_entropy(basis: &ConstrainedBasis, vector: &[f64], cut: CutSpec) -> Result<f64> {
    Bipartition::new(basis, cut)?.entropy(vector)
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyRecord {
    pub alpha: usize,
    pub energy: f64,
    pub g: f64,
    pub entropy_bits: f64,
}

/// Entropy of every unit-normalized right eigenvector of `H_g`, ordered by `α`.
pub fn entropy_sweep(
    eig: &EigenSystem,
    basis: &ConstrainedBasis,
    g: f64,
    cut: CutSpec,
) -> Result<Vec<EntropyRecord>> {
    let split = Bipartition::new(basis, cut)?;
    (0..eig.dim())
        .into_par_iter()
        .map(|alpha| {
            let at = |source| ScarError::AtEigenvector { alpha, source: Box::new(source) };
            let v = right_eigvec(eig, basis, g, alpha).map_err(at)?;
            let entropy_bits = split.entropy(&v).map_err(at)?;
            Ok(EntropyRecord { alpha, energy: eig.energies()[alpha], g, entropy_bits })
        })
        .collect()
}
