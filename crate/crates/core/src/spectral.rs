//! Spectrum and eigenvectors of `H_0`, and the right eigenvectors of `H_g`
//! obtained from them through `H_g (V|α⟩) = E_α (V|α⟩)`.

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::ConstrainedBasis;
use crate::error::{Result, ScarError};
use crate::operators::{build_h, ModelParams};

/// Energies below this magnitude are treated as part of the degenerate
/// zero-energy eigenspace of `H_0`.
pub const ZERO_MODE_TOL: f64 = 1e-8;

/// Two bin maxima closer than this relative gap are flagged as ambiguous.
const AMBIGUITY_RATIO: f64 = 0.99;

/// Eigen-decomposition of the Hermitian PXP Hamiltonian.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    energies: Vec<f64>,
    vectors: Mat<f64>,
    zero_modes: usize,
}

impl EigenSystem {
    /// Energies in ascending order.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Column `alpha` is the eigenvector of `energies()[alpha]`.
    pub fn vectors(&self) -> &Mat<f64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn vector(&self, alpha: usize) -> Vec<f64> {
        (0..self.dim()).map(|k| self.vectors[(k, alpha)]).collect()
    }

    /// Size of the `|E| < ZERO_MODE_TOL` eigenspace.
    pub fn zero_modes(&self) -> usize {
        self.zero_modes
    }

    fn check_alpha(&self, alpha: usize) -> Result<()> {
        if alpha >= self.dim() {
            return Err(ScarError::IndexOutOfRange { index: alpha, dim: self.dim() });
        }
        Ok(())
    }
}

/// Diagonalizes `H_0` densely.
///
/// The zero-energy eigenspace is highly degenerate, so the solver's basis
/// inside it is arbitrary. It is rotated so that its first vector is the
/// normalized projection of `|ℤ₂⟩` onto the eigenspace and every other
/// vector in it is orthogonal to `|ℤ₂⟩`.
pub fn eigendecompose_h0(basis: &ConstrainedBasis) -> Result<EigenSystem> {
    let h0 = build_h(basis, &ModelParams::new(basis.length(), 0.0)?)?.to_dense();
    let evd = h0
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| ScarError::Decomposition { what: "symmetric eigensolver", g: None })?;

    let dim = basis.dim();
    let s = evd.S();
    let energies: Vec<f64> = (0..dim).map(|a| s[a]).collect();
    let mut vectors = evd.U().to_owned();

    let zero: Vec<usize> = (0..dim).filter(|&a| energies[a].abs() < ZERO_MODE_TOL).collect();
    let (z2, _) = basis.neel_states();
    if zero.len() > 1 {
        align_block_to(&mut vectors, &zero, z2);
    }

    Ok(EigenSystem { energies, vectors, zero_modes: zero.len() })
}

// Householder reflection within the columns `block` mapping the first column
// onto the (normalized) projection of basis vector `target`.
fn align_block_to(vectors: &mut Mat<f64>, block: &[usize], target: usize) {
    let c: Vec<f64> = block.iter().map(|&a| vectors[(target, a)]).collect();
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    // v = e₁ - ĉ, so that (I - 2vvᵀ/vᵀv) e₁ = ĉ
    let mut v: Vec<f64> = c.iter().map(|x| -x / norm).collect();
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    if vv < 1e-28 {
        return;
    }
    for row in 0..vectors.nrows() {
        let dot: f64 = block.iter().zip(&v).map(|(&a, vi)| vectors[(row, a)] * vi).sum();
        let scale = 2.0 * dot / vv;
        for (&a, vi) in block.iter().zip(&v) {
            vectors[(row, a)] -= scale * vi;
        }
    }
}

/// Unit-norm right eigenvector `V|α⟩/‖V|α⟩‖` of `H_g`.
pub fn right_eigvec(
    eig: &EigenSystem,
    basis: &ConstrainedBasis,
    g: f64,
    alpha: usize,
) -> Result<Vec<f64>> {
    eig.check_alpha(alpha)?;
    let nup = basis.nup();
    let shift = nup.iter().map(|&n| g * n as f64).fold(f64::NEG_INFINITY, f64::max);
    let mut v: Vec<f64> = (0..eig.dim())
        .map(|k| (g * nup[k] as f64 - shift).exp() * eig.vectors[(k, alpha)])
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

/// Outcome of comparing the spectrum of `H_g` with that of `H_0`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumComparison {
    pub g: f64,
    /// Hausdorff distance between the two eigenvalue sets in the complex plane.
    pub hausdorff: f64,
    /// Largest deviation after sorting both spectra by real part.
    pub sorted_max_deviation: f64,
    pub max_imag: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub per_g: Vec<SpectrumComparison>,
}

impl SpectrumReport {
    pub fn max_distance(&self) -> f64 {
        self.per_g.iter().map(|c| c.hausdorff).fold(0.0, f64::max)
    }

    pub fn max_sorted_deviation(&self) -> f64 {
        self.per_g.iter().map(|c| c.sorted_max_deviation).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.per_g.iter().map(|c| c.max_imag).fold(0.0, f64::max)
    }
}

/// Eigenvalues of `H_g` from a general (non-symmetric) dense eigensolver,
/// after diagonal balancing.
pub fn nonsymmetric_eigenvalues(basis: &ConstrainedBasis, g: f64) -> Result<Vec<Complex64>> {
    let mut h = build_h(basis, &ModelParams::new(basis.length(), g)?)?.to_dense();
    balance(&mut h);
    let values = h
        .eigenvalues()
        .map_err(|_| ScarError::Decomposition { what: "non-symmetric eigensolver", g: Some(g) })?;
    Ok(values.into_iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

/// Compares the spectrum of every `H_g` in `g_list` against that of `H_0`.
pub fn spectrum_invariance(basis: &ConstrainedBasis, g_list: &[f64]) -> Result<SpectrumReport> {
    let mut reference = nonsymmetric_eigenvalues(basis, 0.0)?;
    sort_by_real(&mut reference);

    let per_g = g_list
        .iter()
        .map(|&g| {
            let mut values = nonsymmetric_eigenvalues(basis, g)?;
            sort_by_real(&mut values);
            let sorted_max_deviation =
                values.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            Ok(SpectrumComparison {
                g,
                hausdorff: hausdorff(&values, &reference),
                sorted_max_deviation,
                max_imag: values.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
            })
        })
        .collect::<Result<_>>()?;
    Ok(SpectrumReport { per_g })
}

fn sort_by_real(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

// Both inputs sorted by real part.
fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

fn directed_hausdorff(from: &[Complex64], to: &[Complex64]) -> f64 {
    from.iter()
        .map(|z| {
            // nearest neighbour, scanning outward from the real-part insertion point
            let start = to.partition_point(|w| w.re < z.re);
            let mut best = f64::INFINITY;
            for w in to[start..].iter() {
                if w.re - z.re > best {
                    break;
                }
                best = best.min((z - w).norm());
            }
            for w in to[..start].iter().rev() {
                if z.re - w.re > best {
                    break;
                }
                best = best.min((z - w).norm());
            }
            best
        })
        .fold(0.0, f64::max)
}

/// Parlett–Reinsch balancing with radix-2 scale factors: a diagonal
/// similarity that equalizes row and column norms, applied in place.
pub fn balance(m: &mut Mat<f64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let sq_radix = radix * radix;
    loop {
        let mut converged = true;
        for i in 0..n {
            let (mut col, mut row) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].abs();
                    row += m[(i, j)].abs();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut c = col;
            let g = row / radix;
            while c < g {
                f *= radix;
                c *= sq_radix;
            }
            let g = row * radix;
            while c > g {
                f /= radix;
                c /= sq_radix;
            }
            if (c + row / f) < 0.95 * total {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// `|⟨ℤ₂|α⟩|²` for every eigenvector.
pub fn scar_overlaps(eig: &EigenSystem, basis: &ConstrainedBasis) -> Vec<f64> {
    let (z2, _) = basis.neel_states();
    (0..eig.dim()).map(|a| eig.vectors[(z2, a)].powi(2)).collect()
}

/// How scars were picked, recorded alongside every output that flags them.
#[derive(Clone, Debug, Serialize)]
pub struct ScarCriterion {
    pub rule: String,
    /// Bin spacing `ω`.
    pub spacing: f64,
    pub bin_centers: Vec<f64>,
    /// Bins whose two largest overlaps were within 1% of each other.
    pub ambiguous_bins: Vec<usize>,
    pub zero_mode_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScarLabeling {
    /// Eigenvector indices, ascending (and so ordered by energy).
    pub scar_indices: Vec<usize>,
    pub criterion: ScarCriterion,
}

impl ScarLabeling {
    pub fn is_scar(&self, alpha: usize) -> bool {
        self.scar_indices.binary_search(&alpha).is_ok()
    }
}

/// Picks the `L+1` tower states: energies are split into `L+1` bins centred
/// on `k·ω` for `k = -L/2..=L/2` (outermost bins unbounded), and each bin
/// contributes the eigenvector with the largest `|⟨ℤ₂|α⟩|²`.
///
/// `ω = max|E| / (L/2)` puts the outermost centres on the spectrum edges. The
/// tower is only roughly equidistant and compresses towards the edges, so a
/// spacing fitted to the central scars would push bulk states into the bins.
pub fn identify_scars(eig: &EigenSystem, basis: &ConstrainedBasis) -> ScarLabeling {
    let overlaps = scar_overlaps(eig, basis);
    let energies = eig.energies();
    let half = (basis.length() / 2) as i64;

    let e_max = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let spacing = e_max / half as f64;
    let picks = select(energies, &overlaps, spacing, half);

    let mut scar_indices: Vec<usize> = picks.iter().filter_map(|b| b.pick).collect();
    scar_indices.sort_unstable();
    scar_indices.dedup();

    ScarLabeling {
        scar_indices,
        criterion: ScarCriterion {
            rule: format!(
                "{} energy bins centred on k*spacing (k = -{half}..={half}, outer bins open), \
                 spacing = max|E|/{half}; \
                 max |<Z2|alpha>|^2 per bin; ties within 1% resolved by lower |E|; \
                 zero-energy eigenspace aligned with Z2",
                2 * half + 1
            ),
            spacing,
            bin_centers: (-half..=half).map(|k| k as f64 * spacing).collect(),
            ambiguous_bins: picks
                .iter()
                .enumerate()
                .filter(|(_, b)| b.ambiguous)
                .map(|(i, _)| i)
                .collect(),
            zero_mode_dim: eig.zero_modes(),
        },
    }
}

struct BinPick {
    pick: Option<usize>,
    ambiguous: bool,
}

fn select(energies: &[f64], overlaps: &[f64], omega: f64, half: i64) -> Vec<BinPick> {
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); (2 * half + 1) as usize];
    for (a, &e) in energies.iter().enumerate() {
        let k = (e / omega).round().clamp(-half as f64, half as f64) as i64;
        bins[(k + half) as usize].push(a);
    }
    bins.into_iter()
        .map(|members| {
            let top = members.iter().map(|&a| overlaps[a]).fold(0.0, f64::max);
            let close: Vec<usize> =
                members.iter().copied().filter(|&a| overlaps[a] >= AMBIGUITY_RATIO * top).collect();
            let pick = close
                .iter()
                .copied()
                .min_by(|&a, &b| energies[a].abs().total_cmp(&energies[b].abs()).then(a.cmp(&b)));
            BinPick { pick, ambiguous: close.len() > 1 }
        })
        .collect()
}

/// Up-spin weight distribution of a right eigenvector of `H_g`.
#[derive(Clone, Debug, Serialize)]
pub struct NupDistribution {
    pub alpha: usize,
    pub g: f64,
    /// `p[n]` for `n = 0..=L/2`.
    pub p: Vec<f64>,
    /// `ln Z` with `Z = Σ_n e^{2gn} p⁰_n`.
    pub log_z: f64,
}

/// Weight `p⁰_n` of `|α⟩` in each up-spin sector.
pub fn p_nup_hermitian(eig: &EigenSystem, basis: &ConstrainedBasis, alpha: usize) -> Result<Vec<f64>> {
    eig.check_alpha(alpha)?;
    let mut p0 = vec![0.0; basis.max_nup() + 1];
    for (k, &n) in basis.nup().iter().enumerate() {
        p0[n] += eig.vectors[(k, alpha)].powi(2);
    }
    Ok(p0)
}

/// `p_n = e^{2gn} p⁰_n / Z`.
pub fn p_nup(
    eig: &EigenSystem,
    basis: &ConstrainedBasis,
    g: f64,
    alpha: usize,
) -> Result<NupDistribution> {
    let p0 = p_nup_hermitian(eig, basis, alpha)?;
    let (p, log_z) = reweight(&p0, g);
    Ok(NupDistribution { alpha, g, p, log_z })
}

/// Applies the `e^{2gn}` reweighting to a sector distribution, returning the
/// normalized result and `ln Z`.
pub fn reweight(p0: &[f64], g: f64) -> (Vec<f64>, f64) {
    let shift = (0..p0.len())
        .filter(|&n| p0[n] > 0.0)
        .map(|n| 2.0 * g * n as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    let scaled: Vec<f64> =
        p0.iter().enumerate().map(|(n, &w)| w * (2.0 * g * n as f64 - shift).exp()).collect();
    let sum: f64 = scaled.iter().sum();
    let p = scaled.iter().map(|w| w / sum).collect();
    (p, shift + sum.ln())
}
