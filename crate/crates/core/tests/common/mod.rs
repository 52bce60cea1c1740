//! Oracles shared by the integration test targets.

use scarlab::ConstrainedBasis;

/// Every blockade-free configuration of the ring, by testing all `2^L` bit strings.
pub fn brute_force_states(length: usize) -> Vec<u32> {
    (0u32..1 << length)
        .filter(|s| (0..length).all(|i| !(s >> i & 1 == 1 && s >> ((i + 1) % length) & 1 == 1)))
        .collect()
}

/// Cyclic Jacobi rotations; returns ascending eigenvalues.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Entropy in bits of the reduced density matrix on `sites`, from a dense
/// embedding of `vector` in the full product space.
pub fn partial_trace_entropy(basis: &ConstrainedBasis, vector: &[f64], sites: &[usize]) -> f64 {
    let length = basis.length();
    let rest: Vec<usize> = (0..length).filter(|s| !sites.contains(s)).collect();
    let pack = |bits: u32, which: &[usize]| {
        which.iter().enumerate().fold(0usize, |acc, (k, &s)| acc | ((bits >> s & 1) as usize) << k)
    };
    let (da, db) = (1 << sites.len(), 1 << rest.len());
    let mut m = vec![vec![0.0; db]; da];
    for (k, state) in basis.states().iter().enumerate() {
        m[pack(state.bits(), sites)][pack(state.bits(), &rest)] = vector[k];
    }
    let rho: Vec<Vec<f64>> = (0..da)
        .map(|i| (0..da).map(|j| m[i].iter().zip(&m[j]).map(|(x, y)| x * y).sum()).collect())
        .collect();
    jacobi_eigenvalues(rho)
        .into_iter()
        .filter(|&p| p > 1e-14)
        .map(|p| -p * p.log2())
        .sum()
}
