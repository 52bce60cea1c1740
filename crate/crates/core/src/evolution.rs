//! Time evolution `|ψ(t)⟩ = e^{-i H_g t}|n⟩` of a basis state.
//!
//! The similarity route uses `⟨m|e^{-iH_g t}|n⟩ = e^{g(N_m - N_n)} ⟨m|e^{-iH_0 t}|n⟩`
//! with the Hermitian propagator built from the eigendecomposition of `H_0`.
//! The direct route integrates the Schrödinger equation under `H_g` with an
//! adaptive Runge–Kutta pair and is kept as an independent oracle.

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::ConstrainedBasis;
use crate::error::{Result, ScarError};
use crate::operators::{build_h, ModelParams, OperatorMatrix};
use crate::spectral::EigenSystem;

/// Time points handled per dense propagation block.
const TIME_BLOCK: usize = 128;

/// Néel-state amplitudes, norm and normalized return probabilities on a time grid.
#[derive(Clone, Debug, Serialize)]
pub struct EvolutionTrace {
    pub g: f64,
    pub initial: usize,
    pub times: Vec<f64>,
    /// Unnormalized `⟨ℤ₂|ψ(t)⟩`.
    pub amp_z2: Vec<Complex64>,
    /// Unnormalized `⟨ℤ̄₂|ψ(t)⟩`.
    pub amp_z2bar: Vec<Complex64>,
    pub log_norm_sq: Vec<f64>,
    pub p_z2: Vec<f64>,
    pub p_z2bar: Vec<f64>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `P_ℤ₂(t) + P_ℤ̄₂(t)`.
    pub fn p_neel(&self) -> Vec<f64> {
        self.p_z2.iter().zip(&self.p_z2bar).map(|(a, b)| a + b).collect()
    }
}

/// Uniform grid `0, step, 2·step, …` up to and including `t_max` (within rounding).
pub fn time_grid(t_max: f64, step: f64) -> Vec<f64> {
    let n = (t_max / step + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(&t) = times.iter().find(|t| !t.is_finite()) {
        return Err(ScarError::NonFiniteTime(t));
    }
    Ok(())
}

fn check_index(index: usize, dim: usize) -> Result<()> {
    if index >= dim {
        return Err(ScarError::IndexOutOfRange { index, dim });
    }
    Ok(())
}

/// `ln Σ_k exp(x_k)` with a max shift; empty or all `-∞` input gives `-∞`.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `e^{-iH_0 t}|n⟩` for each requested time, as columns of a `(dim, times)` pair
/// of real and imaginary parts.
fn propagate_block(eig: &EigenSystem, initial: usize, times: &[f64]) -> (Mat<f64>, Mat<f64>) {
    let u = eig.vectors();
    let energies = eig.energies();
    let phase_re = Mat::<f64>::from_fn(eig.dim(), times.len(), |a, j| {
        u[(initial, a)] * (energies[a] * times[j]).cos()
    });
    let phase_im = Mat::<f64>::from_fn(eig.dim(), times.len(), |a, j| {
        -u[(initial, a)] * (energies[a] * times[j]).sin()
    });
    (u * &phase_re, u * &phase_im)
}

/// Hermitian propagation `⟨m|e^{-iH_0 t}|n⟩` for all `m` at a single time.
pub fn propagate_h0(eig: &EigenSystem, initial: usize, t: f64) -> Result<Vec<Complex64>> {
    check_index(initial, eig.dim())?;
    check_times(&[t])?;
    let (re, im) = propagate_block(eig, initial, &[t]);
    Ok((0..eig.dim()).map(|m| Complex64::new(re[(m, 0)], im[(m, 0)])).collect())
}

/// Evolves basis state `initial` under `H_g` through the similarity map.
pub fn evolve_similarity(
    basis: &ConstrainedBasis,
    eig: &EigenSystem,
    g: f64,
    initial: usize,
    times: &[f64],
) -> Result<EvolutionTrace> {
    check_index(initial, basis.dim())?;
    check_times(times)?;
    if !g.is_finite() {
        return Err(ScarError::NonFiniteBias(g));
    }
    if eig.dim() != basis.dim() {
        return Err(ScarError::DimensionMismatch { expected: basis.dim(), got: eig.dim() });
    }

    let nup = basis.nup();
    let n0 = nup[initial] as f64;
    let (z2, z2bar) = basis.neel_states();
    let sectors = basis.max_nup() + 1;
    // ln e^{2g(N - N_n)} per sector
    let sector_log_weight: Vec<f64> = (0..sectors).map(|n| 2.0 * g * (n as f64 - n0)).collect();
    let target_log_ratio = |m: usize| g * (nup[m] as f64 - n0);

    let mut trace = EvolutionTrace {
        g,
        initial,
        times: times.to_vec(),
        amp_z2: Vec::with_capacity(times.len()),
        amp_z2bar: Vec::with_capacity(times.len()),
        log_norm_sq: Vec::with_capacity(times.len()),
        p_z2: Vec::with_capacity(times.len()),
        p_z2bar: Vec::with_capacity(times.len()),
    };

    let mut sector_weight = vec![0.0; sectors];
    for chunk in times.chunks(TIME_BLOCK) {
        let (re, im) = propagate_block(eig, initial, chunk);
        for j in 0..chunk.len() {
            sector_weight.iter_mut().for_each(|w| *w = 0.0);
            for (m, &n) in nup.iter().enumerate() {
                sector_weight[n] += re[(m, j)].powi(2) + im[(m, j)].powi(2);
            }
            let log_norm_sq = log_sum_exp(
                sector_weight.iter().zip(&sector_log_weight).map(|(w, lw)| w.ln() + lw),
            );

            let record = |m: usize| {
                let psi0 = Complex64::new(re[(m, j)], im[(m, j)]);
                let log_ratio = target_log_ratio(m);
                let p = (2.0 * log_ratio + psi0.norm_sqr().ln() - log_norm_sq).exp();
                (psi0 * log_ratio.exp(), p)
            };
            let (a, p) = record(z2);
            trace.amp_z2.push(a);
            trace.p_z2.push(p);
            let (a, p) = record(z2bar);
            trace.amp_z2bar.push(a);
            trace.p_z2bar.push(p);
            trace.log_norm_sq.push(log_norm_sq);
        }
    }
    Ok(trace)
}

/// Terms of the squared norm of `e^{-iH_g t}|n⟩` resolved by basis state:
/// `e^{2g(N_m - N_n)} |⟨m|e^{-iH_0 t}|n⟩|²`. For `n = ℤ̄₂` the prefactor is
/// `e^{-g(L - 2N_m)}`.
pub fn norm_decomposition(
    basis: &ConstrainedBasis,
    eig: &EigenSystem,
    g: f64,
    initial: usize,
    t: f64,
) -> Result<Vec<f64>> {
    let psi0 = propagate_h0(eig, initial, t)?;
    let nup = basis.nup();
    let n0 = nup[initial] as f64;
    Ok(psi0
        .iter()
        .zip(nup)
        .map(|(a, &n)| (2.0 * g * (n as f64 - n0)).exp() * a.norm_sqr())
        .collect())
}

// Dormand–Prince 5(4) tableau. The system is autonomous, so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dψ/dt = -i H_g ψ` directly.
pub fn evolve_direct(
    basis: &ConstrainedBasis,
    g: f64,
    initial: usize,
    times: &[f64],
    rtol: f64,
) -> Result<EvolutionTrace> {
    let h = build_h(basis, &ModelParams::new(basis.length(), g)?)?;
    let mut trace = evolve_direct_with(&h, basis, initial, times, rtol)?;
    trace.g = g;
    Ok(trace)
}

/// Adaptive Dormand–Prince integration under an arbitrary operator.
///
/// The state is renormalized after every accepted step and the discarded
/// log-norm is accumulated, so unnormalized amplitudes remain recoverable
/// without overflow. `times` must be non-decreasing and start at or after 0.
pub fn evolve_direct_with(
    h: &OperatorMatrix,
    basis: &ConstrainedBasis,
    initial: usize,
    times: &[f64],
    rtol: f64,
) -> Result<EvolutionTrace> {
    if !(rtol > 1e-12 && rtol < 1e-4) {
        return Err(ScarError::InvalidTolerance(rtol));
    }
    check_index(initial, basis.dim())?;
    check_times(times)?;
    if h.dim() != basis.dim() {
        return Err(ScarError::DimensionMismatch { expected: basis.dim(), got: h.dim() });
    }
    if times.first().is_some_and(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(ScarError::Config("times must be non-negative and non-decreasing".into()));
    }

    let dim = basis.dim();
    let (z2, z2bar) = basis.neel_states();
    let atol = rtol;
    let zero = Complex64::new(0.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);

    let rhs = |psi: &[Complex64], out: &mut [Complex64]| {
        h.apply(psi, out);
        out.iter_mut().for_each(|v| *v *= minus_i);
    };

    let mut psi = vec![zero; dim];
    psi[initial] = Complex64::new(1.0, 0.0);
    let mut log_norm_sq = 0.0;
    let mut t = 0.0;

    let mut k: Vec<Vec<Complex64>> = vec![vec![zero; dim]; 7];
    let mut stage = vec![zero; dim];
    let mut next = vec![zero; dim];
    rhs(&psi, &mut k[0]);
    let mut h_step = 0.01;

    let mut trace = EvolutionTrace {
        g: f64::NAN,
        initial,
        times: times.to_vec(),
        amp_z2: Vec::with_capacity(times.len()),
        amp_z2bar: Vec::with_capacity(times.len()),
        log_norm_sq: Vec::with_capacity(times.len()),
        p_z2: Vec::with_capacity(times.len()),
        p_z2bar: Vec::with_capacity(times.len()),
    };

    for &target in times {
        while t < target {
            let remaining = target - t;
            let last = h_step >= remaining;
            let step = if last { remaining } else { h_step };
            if step < 1e-14 * t.abs().max(1.0) && !last {
                return Err(ScarError::StepSizeUnderflow { t, h: step });
            }

            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = psi[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += kj[i] * (step * A[s][j]);
                    }
                    stage[i] = acc;
                }
                rhs(&stage, &mut k[s]);
                if s == 6 {
                    next.copy_from_slice(&stage);
                }
            }

            let mut err: f64 = 0.0;
            for i in 0..dim {
                let mut e = zero;
                for (j, kj) in k.iter().enumerate() {
                    e += kj[i] * (step * E[j]);
                }
                let scale = atol + rtol * psi[i].norm().max(next[i].norm());
                err = err.max(e.norm() / scale);
            }

            if err <= 1.0 {
                t = if last { target } else { t + step };
                let norm_sq: f64 = next.iter().map(|z| z.norm_sqr()).sum();
                let inv = norm_sq.sqrt().recip();
                for i in 0..dim {
                    psi[i] = next[i] * inv;
                }
                log_norm_sq += norm_sq.ln();
                // first-same-as-last, rescaled with the state
                let (first, rest) = k.split_at_mut(1);
                for i in 0..dim {
                    first[0][i] = rest[5][i] * inv;
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let proposed = step * factor;
            if !last || err > 1.0 {
                h_step = proposed;
            }
            if h_step < 1e-14 * t.abs().max(1.0) {
                return Err(ScarError::StepSizeUnderflow { t, h: h_step });
            }
        }

        let half_log = 0.5 * log_norm_sq;
        trace.amp_z2.push(psi[z2] * half_log.exp());
        trace.amp_z2bar.push(psi[z2bar] * half_log.exp());
        trace.p_z2.push(psi[z2].norm_sqr());
        trace.p_z2bar.push(psi[z2bar].norm_sqr());
        trace.log_norm_sq.push(log_norm_sq);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate_basis;
    use crate::spectral::eigendecompose_h0;

    #[test]
    fn grid_includes_endpoint() {
        let grid = time_grid(40.0, 0.02);
        assert_eq!(grid.len(), 2001);
        assert!((grid[2000] - 40.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_at_time_zero() {
        let basis = enumerate_basis(8).unwrap();
        let eig = eigendecompose_h0(&basis).unwrap();
        let (_, z2bar) = basis.neel_states();
        let trace = evolve_similarity(&basis, &eig, 0.7, z2bar, &[0.0]).unwrap();
        assert!((trace.p_z2bar[0] - 1.0).abs() < 1e-12);
        assert!(trace.p_z2[0] < 1e-24);
        assert!(trace.log_norm_sq[0].abs() < 1e-12);

        let psi = propagate_h0(&eig, 5, 0.0).unwrap();
        for (m, a) in psi.iter().enumerate() {
            let expected = if m == 5 { 1.0 } else { 0.0 };
            assert!((a.re - expected).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let basis = enumerate_basis(6).unwrap();
        let eig = eigendecompose_h0(&basis).unwrap();
        assert!(matches!(
            evolve_similarity(&basis, &eig, 0.0, 0, &[0.0, f64::NAN]),
            Err(ScarError::NonFiniteTime(_))
        ));
        assert!(matches!(
            evolve_similarity(&basis, &eig, 0.0, basis.dim(), &[0.0]),
            Err(ScarError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            evolve_direct(&basis, 0.0, 0, &[0.0, 1.0], 1e-3),
            Err(ScarError::InvalidTolerance(_))
        ));
        assert!(matches!(
            evolve_direct(&basis, 0.0, 0, &[0.0, f64::INFINITY], 1e-8),
            Err(ScarError::NonFiniteTime(_))
        ));
    }

    #[test]
    fn zero_operator_freezes_the_state() {
        let basis = enumerate_basis(8).unwrap();
        let (_, z2bar) = basis.neel_states();
        let zero = OperatorMatrix::zeros(basis.dim());
        let trace = evolve_direct_with(&zero, &basis, z2bar, &[0.0, 1.0, 5.0, 30.0], 1e-8).unwrap();
        for k in 0..trace.len() {
            assert_eq!(trace.p_z2bar[k], 1.0);
            assert_eq!(trace.p_z2[k], 0.0);
            assert_eq!(trace.log_norm_sq[k], 0.0);
        }
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp([1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
