//! Eigendecomposition of the symmetric tridiagonal ladder operator:
//! quasienergy spectrum, orthonormal eigenvectors, symmetry and localization
//! diagnostics.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::model::{CellPartition, CouplingChain};
use crate::scalar::{lit, Real};

/// Iteration budget per eigenvalue for the implicit-shift QL sweep.
const MAX_QL_ITERATIONS: usize = 80;

/// Full orthonormal eigendecomposition of a coupling chain.
///
/// Eigenvalues are sorted ascending; column `q` of the eigenvector matrix is
/// the eigenvector of `E_q`, sign-fixed so that its largest-magnitude
/// component is positive.
#[derive(Debug, Clone)]
pub struct QeSpectrum<T> {
    eigenvalues: Array1<T>,
    eigenvectors: Array2<T>,
    chain: CouplingChain<T>,
}

/// Implicit-shift QL with eigenvector accumulation (EISPACK `imtql2`).
///
/// `d` holds the diagonal and is overwritten with eigenvalues; `e` holds the
/// `n-1` subdiagonal entries padded with a trailing zero; `z` accumulates the
/// rotations and must start as the identity.
fn ql_implicit<T: Real>(d: &mut [T], e: &mut [T], z: &mut Array2<T>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let two = lit::<T>(2.0);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            // locate a negligible subdiagonal element
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NonConvergence(format!(
                    "eigenvalue {l} of {n}: subdiagonal {} not negligible after {} sweeps",
                    e[l], MAX_QL_ITERATIONS
                )));
            }

            // implicit shift from the leading 2x2
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let denom = g + if g >= T::zero() { r } else { -r };
            g = d[m] - d[l] + e[l] / denom;

            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    // deflate without distorting the rest of the matrix
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                for k in 0..n {
                    f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Diagonalizes the chain, consuming it into the spectrum.
pub fn solve<T: Real>(chain: CouplingChain<T>) -> Result<QeSpectrum<T>> {
    let n = chain.len();
    let mut d: Vec<T> = chain.diagonal().to_vec();
    let mut e: Vec<T> = chain.off_diagonal().to_vec();
    e.push(T::zero());
    let mut z = Array2::<T>::eye(n);
    ql_implicit(&mut d, &mut e, &mut z)?;

    // sort ascending
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("eigenvalues are finite"));
    let eigenvalues = Array1::from_iter(order.iter().map(|&q| d[q]));
    let mut eigenvectors = Array2::<T>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, dst)] = z[(k, src)];
        }
    }

    // deterministic sign: first component of largest magnitude made positive
    for q in 0..n {
        let mut imax = 0;
        let mut vmax = T::zero();
        for k in 0..n {
            let a = eigenvectors[(k, q)].abs();
            if a > vmax {
                vmax = a;
                imax = k;
            }
        }
        if eigenvectors[(imax, q)] < T::zero() {
            for k in 0..n {
                eigenvectors[(k, q)] = -eigenvectors[(k, q)];
            }
        }
    }

    Ok(QeSpectrum {
        eigenvalues,
        eigenvectors,
        chain,
    })
}

/// Residual and orthogonality diagnostics of a computed decomposition.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumDiagnostics<T> {
    /// `max |<A^q, A^q'> - delta_qq'|`.
    pub orthonormality_defect: T,
    /// `max |(A A^T)_nn' - delta_nn'|` (column completeness).
    pub completeness_defect: T,
    /// `max_q ||H A^q - E_q A^q||_inf / (max|f| + max|d|)`.
    pub scaled_residual: T,
    /// `|sum_q E_q - sum_n d_n|`.
    pub trace_defect: T,
}

/// Eigenvalue/eigenvector pairing defects under the spectral reflection
/// `E -> -E`, `A_n -> (-1)^n A_n`.
#[derive(Debug, Clone, Copy)]
pub struct ParityReport<T> {
    /// `max_q |E_q + E_{N-1-q}|`.
    pub eigenvalue_defect: T,
    /// Worst mismatch between a reflected eigenvector and its partner (sign
    /// resolved per pair; near-degenerate partners compared against the
    /// whole degenerate subspace).
    pub pairing_defect: T,
}

/// Per-eigenstate localization record.
#[derive(Debug, Clone)]
pub struct StateLocalization<T> {
    pub energy: T,
    /// `1 / sum_n |A_n|^4`: number of levels effectively occupied.
    pub participation_ratio: T,
    /// Probability weight inside each cell of the partition.
    pub cell_weights: Vec<T>,
}

/// The `k` lowest and `k` highest gaps of the sorted spectrum.
#[derive(Debug, Clone)]
pub struct EdgeSpacings<T> {
    pub low: Vec<T>,
    pub high: Vec<T>,
}

impl<T: Real> QeSpectrum<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &Array1<T> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Array2<T> {
        &self.eigenvectors
    }

    pub fn chain(&self) -> &CouplingChain<T> {
        &self.chain
    }

    pub fn energy(&self, q: usize) -> T {
        self.eigenvalues[q]
    }

    pub fn eigenvector(&self, q: usize) -> ArrayView1<'_, T> {
        self.eigenvectors.column(q)
    }

    /// Energy scale `max|f| + max|d|` used for residual normalization.
    pub fn operator_scale(&self) -> T {
        self.chain.max_coupling() + self.chain.max_diagonal()
    }

    /// Recomputes the decomposition invariants.
    pub fn diagnostics(&self) -> SpectrumDiagnostics<T> {
        let n = self.len();
        let a = &self.eigenvectors;

        let mut ortho = T::zero();
        let mut complete = T::zero();
        for i in 0..n {
            for j in i..n {
                let mut dot_cols = T::zero();
                let mut dot_rows = T::zero();
                for k in 0..n {
                    dot_cols += a[(k, i)] * a[(k, j)];
                    dot_rows += a[(i, k)] * a[(j, k)];
                }
                let target = if i == j { T::one() } else { T::zero() };
                ortho = ortho.max((dot_cols - target).abs());
                complete = complete.max((dot_rows - target).abs());
            }
        }

        let d = self.chain.diagonal();
        let f = self.chain.off_diagonal();
        let mut residual = T::zero();
        for q in 0..n {
            for k in 0..n {
                let mut hv = d[k] * a[(k, q)];
                if k > 0 {
                    hv += f[k - 1] * a[(k - 1, q)];
                }
                if k + 1 < n {
                    hv += f[k] * a[(k + 1, q)];
                }
                residual = residual.max((hv - self.eigenvalues[q] * a[(k, q)]).abs());
            }
        }
        let scale = self.operator_scale();
        let scaled_residual = if scale > T::zero() {
            residual / scale
        } else {
            residual
        };

        let trace_defect =
            (self.eigenvalues.iter().copied().sum::<T>() - d.iter().copied().sum::<T>()).abs();

        SpectrumDiagnostics {
            orthonormality_defect: ortho,
            completeness_defect: complete,
            scaled_residual,
            trace_defect,
        }
    }

    /// Verifies the spectral reflection symmetry of the zero-detuning
    /// operator. Errors when called on a detuned chain, where the symmetry
    /// does not hold.
    pub fn parity_symmetry(&self, tol: T) -> Result<ParityReport<T>> {
        if self.chain.params().delta != T::zero() {
            return Err(Error::Precondition(
                "parity symmetry requires delta = 0".into(),
            ));
        }
        let n = self.len();
        let ev = &self.eigenvalues;
        let a = &self.eigenvectors;

        let mut eigenvalue_defect = T::zero();
        for q in 0..n {
            eigenvalue_defect = eigenvalue_defect.max((ev[q] + ev[n - 1 - q]).abs());
        }

        let scale = ev[n - 1].abs().max(ev[0].abs()).max(T::one());
        let mut pairing_defect = T::zero();
        let reflected = |q: usize| -> Vec<T> {
            (0..n)
                .map(|k| if k % 2 == 0 { a[(k, q)] } else { -a[(k, q)] })
                .collect()
        };
        for q in 0..n {
            let partner = n - 1 - q;
            let w = reflected(q);
            let mut dplus = T::zero();
            let mut dminus = T::zero();
            for k in 0..n {
                dplus = dplus.max((w[k] - a[(k, partner)]).abs());
                dminus = dminus.max((w[k] + a[(k, partner)]).abs());
            }
            let mut defect = dplus.min(dminus);

            if defect > tol {
                // near-degenerate partners mix freely inside their subspace;
                // compare against the span of the whole cluster instead
                let cluster_width = lit::<T>(1e-10) * scale;
                let cluster: Vec<usize> = (0..n)
                    .filter(|&p| (ev[p] + ev[q]).abs() <= cluster_width)
                    .collect();
                if cluster.len() > 1 {
                    let mut res = w.clone();
                    for &p in &cluster {
                        let mut proj = T::zero();
                        for k in 0..n {
                            proj += w[k] * a[(k, p)];
                        }
                        for k in 0..n {
                            res[k] -= proj * a[(k, p)];
                        }
                    }
                    let sub = res.iter().fold(T::zero(), |m, r| m.max(r.abs()));
                    defect = defect.min(sub);
                }
            }
            pairing_defect = pairing_defect.max(defect);
        }

        Ok(ParityReport {
            eigenvalue_defect,
            pairing_defect,
        })
    }

    /// Participation ratios and per-cell weights for every eigenstate.
    pub fn localization_profile(&self, partition: &CellPartition) -> Vec<StateLocalization<T>> {
        let n = self.len();
        (0..n)
            .map(|q| {
                let col = self.eigenvectors.column(q);
                let inv_pr: T = col.iter().map(|&v| v * v * v * v).sum();
                let cell_weights = partition
                    .cells()
                    .iter()
                    .map(|c| (c.start..c.end).map(|k| col[k] * col[k]).sum())
                    .collect();
                StateLocalization {
                    energy: self.eigenvalues[q],
                    participation_ratio: T::one() / inv_pr,
                    cell_weights,
                }
            })
            .collect()
    }

    /// The `k` lowest and `k` highest spacings of the sorted spectrum.
    pub fn edge_spacings(&self, k: usize) -> Result<EdgeSpacings<T>> {
        let n = self.len();
        if 2 * k >= n {
            return Err(Error::Precondition(format!(
                "edge_spacings: k = {k} must satisfy k < N/2 with N = {n}"
            )));
        }
        let ev = &self.eigenvalues;
        let low = (0..k).map(|i| ev[i + 1] - ev[i]).collect();
        let high = (0..k).map(|i| ev[n - 1 - i] - ev[n - 2 - i]).collect();
        Ok(EdgeSpacings { low, high })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cell_partition, ModelParams};
    use approx::assert_abs_diff_eq;

    fn chain(h: f64, v0: f64, delta: f64, n: usize) -> CouplingChain<f64> {
        CouplingChain::build(ModelParams::new(h, v0, delta, n).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_matrix_is_its_own_spectrum() {
        let spec = solve(chain(0.6, 0.0, 0.003, 5)).unwrap();
        for q in 0..5 {
            assert_abs_diff_eq!(spec.energy(q), 0.003 * q as f64, epsilon = 1e-15);
            for k in 0..5 {
                let want = if k == q { 1.0 } else { 0.0 };
                assert_eq!(spec.eigenvectors()[(k, q)], want);
            }
        }
    }

    #[test]
    fn two_level_closed_form() {
        // d = (0, 0), f = c: eigenvalues -c, +c with (1, -+1)/sqrt(2)
        let params = ModelParams::<f64>::new(1.0, 0.2, 0.0, 2).unwrap();
        let ch = CouplingChain::build(params).unwrap();
        let c = ch.off_diagonal()[0];
        let spec = solve(ch).unwrap();
        assert_abs_diff_eq!(spec.energy(0), -c.abs(), epsilon = 1e-16);
        assert_abs_diff_eq!(spec.energy(1), c.abs(), epsilon = 1e-16);
        let s = 0.5_f64.sqrt();
        let a = spec.eigenvectors();
        for q in 0..2 {
            assert_abs_diff_eq!(a[(0, q)].abs(), s, epsilon = 1e-15);
            assert_abs_diff_eq!(a[(1, q)].abs(), s, epsilon = 1e-15);
        }
        // sign convention: largest-magnitude component positive
        assert!(a[(0, 0)] > 0.0 || a[(1, 0)] > 0.0);

        let report = spec.parity_symmetry(1e-12).unwrap();
        assert_abs_diff_eq!(report.eigenvalue_defect, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(report.pairing_defect, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn reference_chain_invariants() {
        let spec = solve(chain(0.6, 0.1, 0.0, 432)).unwrap();
        let diag = spec.diagnostics();
        assert!(diag.orthonormality_defect < 1e-10);
        assert!(diag.completeness_defect < 1e-10);
        assert!(diag.scaled_residual < 1e-9);
        assert!(diag.trace_defect < 1e-8);

        let report = spec.parity_symmetry(1e-8).unwrap();
        assert!(report.eigenvalue_defect < 1e-8);
        assert!(report.pairing_defect < 1e-8);
    }

    #[test]
    fn parity_rejects_detuned_chain() {
        let spec = solve(chain(0.6, 0.1, 0.003, 16)).unwrap();
        assert!(spec.parity_symmetry(1e-8).is_err());
    }

    #[test]
    fn doubling_v0_doubles_spectrum_exactly() {
        let s1 = solve(chain(0.6, 0.1, 0.0, 64)).unwrap();
        let s2 = solve(chain(0.6, 0.2, 0.0, 64)).unwrap();
        for q in 0..64 {
            assert_eq!(s2.energy(q), 2.0 * s1.energy(q));
            for k in 0..64 {
                assert_eq!(s2.eigenvectors()[(k, q)], s1.eigenvectors()[(k, q)]);
            }
        }
    }

    #[test]
    fn localization_profile_identity_case() {
        let spec = solve(chain(0.6, 0.0, 0.003, 6)).unwrap();
        // degenerate partition is rejected for v0 = 0; use a handmade one
        let partition = cell_partition(&chain(0.6, 0.1, 0.0, 6)).unwrap();
        let profile = spec.localization_profile(&partition);
        for rec in &profile {
            assert_abs_diff_eq!(rec.participation_ratio, 1.0, epsilon = 1e-12);
            let total: f64 = rec.cell_weights.iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn extremal_states_localize_central_states_spread() {
        let ch = chain(0.6, 0.1, 0.0, 432);
        let partition = cell_partition(&ch).unwrap();
        let spec = solve(ch).unwrap();
        let profile = spec.localization_profile(&partition);
        let n = profile.len();

        // extremal state holds at least 90% of its weight in one cell
        let top = &profile[n - 1];
        let best = top.cell_weights.iter().cloned().fold(0.0, f64::max);
        assert!(best >= 0.9, "top-state best cell weight {best}");

        // central 5% of the spectral band is more delocalized than the edges
        let span = spec.energy(n - 1) - spec.energy(0);
        let central: Vec<f64> = profile
            .iter()
            .filter(|r| r.energy.abs() < 0.025 * span)
            .map(|r| r.participation_ratio)
            .collect();
        let extremal: Vec<f64> = profile
            .iter()
            .filter(|r| {
                (r.energy - spec.energy(0)).min(spec.energy(n - 1) - r.energy) < 0.025 * span
            })
            .map(|r| r.participation_ratio)
            .collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&central) > mean(&extremal));
    }

    #[test]
    fn edge_spacings_flat_for_diagonal_operator() {
        let spec = solve(chain(0.6, 0.0, 0.003, 10)).unwrap();
        let gaps = spec.edge_spacings(3).unwrap();
        for g in gaps.low.iter().chain(gaps.high.iter()) {
            assert_abs_diff_eq!(*g, 0.003, epsilon = 1e-15);
        }
        assert!(spec.edge_spacings(5).is_err());
    }
}
