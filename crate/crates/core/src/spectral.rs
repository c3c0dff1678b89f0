//! Eigendecomposition of unitary operators with explicit eigenvalue
//! clustering.

use nalgebra::linalg::{Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{Operator, Signal, ZERO};

/// Eigenvalues closer than this belong to the same cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Maximum allowed `|U v - λ v|` for a returned eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Gap below which the cluster structure is cross-checked against `U + U*`.
const CROSS_CHECK_GAP: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Signal,
    pub cluster: usize,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Sorted by cluster, then by argument of the eigenvalue.
    pub pairs: Vec<EigenPair>,
    /// Mean eigenvalue of each cluster, in order of increasing argument.
    pub cluster_values: Vec<Complex64>,
}

impl Spectrum {
    pub fn multiplicity(&self, cluster: usize) -> usize {
        self.pairs.iter().filter(|e| e.cluster == cluster).count()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        (0..self.cluster_values.len()).map(|c| self.multiplicity(c)).collect()
    }

    pub fn cluster(&self, cluster: usize) -> impl Iterator<Item = &EigenPair> {
        self.pairs.iter().filter(move |e| e.cluster == cluster)
    }
}

/// Full eigendecomposition of a unitary `U` (checked to `1e-10`).
///
/// Eigenvalues within [`CLUSTER_TOL`] are merged; two clusters closer than
/// ten times that tolerance are reported as [`Error::ClusterAmbiguity`]. Each
/// cluster carries an orthonormal basis of its eigenspace.
pub fn diagonalize_unitary(u: &Operator) -> Result<Spectrum> {
    if !u.is_unitary(1e-10) {
        return Err(Error::Spectral(format!(
            "operator is not unitary (defect {:.3e})",
            u.unitarity_defect()
        )));
    }
    let n = u.dim();
    let schur = Schur::try_new(u.matrix().clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Spectral("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();

    let mut order: Vec<usize> = (0..n).collect();
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    order.sort_by(|&i, &j| values[i].arg().total_cmp(&values[j].arg()));

    // Single-linkage clustering on the circle.
    let mut cluster_of = vec![usize::MAX; n];
    let mut n_clusters = 0;
    for &i in &order {
        if cluster_of[i] != usize::MAX {
            continue;
        }
        cluster_of[i] = n_clusters;
        let mut stack = vec![i];
        while let Some(k) = stack.pop() {
            for j in 0..n {
                if cluster_of[j] == usize::MAX && (values[j] - values[k]).norm() < CLUSTER_TOL {
                    cluster_of[j] = n_clusters;
                    stack.push(j);
                }
            }
        }
        n_clusters += 1;
    }

    let mut min_gap = f64::INFINITY;
    let mut min_pair_gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let d = (values[i] - values[j]).norm();
            min_pair_gap = min_pair_gap.min(d);
            if cluster_of[i] != cluster_of[j] {
                min_gap = min_gap.min(d);
            }
        }
    }
    if min_gap < 10.0 * CLUSTER_TOL {
        return Err(Error::ClusterAmbiguity {
            gap: min_gap,
            min_gap: 10.0 * CLUSTER_TOL,
        });
    }
    if min_pair_gap < CROSS_CHECK_GAP {
        cross_check_hermitian(u, &values)?;
    }

    let mut cluster_values = vec![ZERO; n_clusters];
    let mut counts = vec![0usize; n_clusters];
    for i in 0..n {
        cluster_values[cluster_of[i]] += values[i];
        counts[cluster_of[i]] += 1;
    }
    for (v, c) in cluster_values.iter_mut().zip(&counts) {
        *v /= *c as f64;
    }

    let mut pairs = Vec::with_capacity(n);
    for c in 0..n_clusters {
        let members: Vec<usize> = order.iter().copied().filter(|&i| cluster_of[i] == c).collect();
        let mut basis: Vec<Signal> = Vec::new();
        for &i in &members {
            let mut v = Signal::new(q.column(i).iter().copied().collect());
            for b in &basis {
                let proj = b.inner(&v);
                v = &v - &b.scale(proj);
            }
            basis.push(v.normalized()?);
        }
        for (vec, &i) in basis.into_iter().zip(&members) {
            let value = values[i];
            let residual = u.apply(&vec).distance(&vec.scale(value));
            if residual > RESIDUAL_TOL {
                return Err(Error::Spectral(format!(
                    "eigenpair residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
                )));
            }
            pairs.push(EigenPair {
                value,
                vector: vec,
                cluster: c,
            });
        }
    }
    Ok(Spectrum { pairs, cluster_values })
}

/// Compares the spectrum of the Hermitian `U + U*` with `2 Re λ`.
fn cross_check_hermitian(u: &Operator, values: &[Complex64]) -> Result<()> {
    let h = u.matrix() + u.matrix().adjoint();
    let eig = SymmetricEigen::try_new(h, 1e-15, 10_000)
        .ok_or_else(|| Error::Spectral("Hermitian cross-check did not converge".into()))?;
    let mut from_h: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut from_u: Vec<f64> = values.iter().map(|z| 2.0 * z.re).collect();
    from_h.sort_by(f64::total_cmp);
    from_u.sort_by(f64::total_cmp);
    let dev = from_h
        .iter()
        .zip(&from_u)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if dev > 10.0 * CLUSTER_TOL {
        return Err(Error::Spectral(format!(
            "U + U* spectrum disagrees with the unitary spectrum by {dev:.3e}"
        )));
    }
    Ok(())
}
