//! Time evolution through the spectral propagator and the derived
//! observables: cell probabilities, time averages, penetration coefficients,
//! parameter scans and spreading boundaries.
//!
//! Evolution is always computed spectrally; the time argument is a free real
//! parameter measured in wave periods, and the phase of eigenstate `q` after
//! `t` periods is `-2 pi E_q t`.

use ndarray::{Array1, Array2};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{cell_partition, CellPartition, CouplingChain, ModelParams};
use crate::scalar::{lit, Real};
use crate::spectrum::{solve, QeSpectrum};

/// Norm tolerance accepted on construction of a state vector.
pub const STATE_NORM_TOL: f64 = 1e-10;

/// Complex amplitudes over the Landau levels at a given time.
#[derive(Debug, Clone)]
pub struct StateVector<T> {
    amplitudes: Array1<Complex<T>>,
    /// Time in wave periods at which the amplitudes are taken.
    pub time: T,
}

impl<T: Real> StateVector<T> {
    /// A single excited level, `C_n = delta_{n, level}`.
    pub fn delta_at(level: usize, n_levels: usize) -> Result<Self> {
        if level >= n_levels {
            return Err(Error::IndexOutOfRange {
                what: "delta_at",
                index: level,
                len: n_levels,
            });
        }
        let mut amplitudes = Array1::from_elem(n_levels, Complex::new(T::zero(), T::zero()));
        amplitudes[level] = Complex::new(T::one(), T::zero());
        Ok(Self {
            amplitudes,
            time: T::zero(),
        })
    }

    /// An eigenstate of the spectrum as an initial state.
    pub fn from_eigenstate(spectrum: &QeSpectrum<T>, q: usize) -> Result<Self> {
        if q >= spectrum.len() {
            return Err(Error::IndexOutOfRange {
                what: "from_eigenstate",
                index: q,
                len: spectrum.len(),
            });
        }
        let amplitudes = spectrum
            .eigenvector(q)
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        Ok(Self {
            amplitudes,
            time: T::zero(),
        })
    }

    /// Wraps explicit amplitudes; the norm must already be 1 within
    /// [`STATE_NORM_TOL`].
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>, time: T) -> Result<Self> {
        let state = Self {
            amplitudes: Array1::from_vec(amplitudes),
            time,
        };
        let defect = state.norm_defect();
        if defect > lit(STATE_NORM_TOL) {
            return Err(Error::Precondition(format!(
                "state norm deviates from 1 by {defect}"
            )));
        }
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &Array1<Complex<T>> {
        &self.amplitudes
    }

    /// `|C_n|^2` for every level.
    pub fn probabilities(&self) -> Array1<T> {
        self.amplitudes.mapv(|c| c.norm_sqr())
    }

    /// `| sum |C_n|^2 - 1 |`.
    pub fn norm_defect(&self) -> T {
        let total: T = self.amplitudes.iter().map(|c| c.norm_sqr()).sum();
        (total - T::one()).abs()
    }
}

/// Dense spectral propagator `G(t) = A diag(e^{-2 pi i E t}) A^T`.
#[derive(Debug, Clone)]
pub struct Propagator<T> {
    matrix: Array2<Complex<T>>,
    /// Propagation time in wave periods.
    pub time: T,
}

impl<T: Real> Propagator<T> {
    pub fn matrix(&self) -> &Array2<Complex<T>> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    /// Applies the propagator to a state (matrix-vector product).
    pub fn apply(&self, state: &StateVector<T>) -> Result<StateVector<T>> {
        let n = self.len();
        if state.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "propagator is {n}x{n}, state has {} levels",
                state.len()
            )));
        }
        let mut out = Array1::from_elem(n, Complex::new(T::zero(), T::zero()));
        for i in 0..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                acc = acc + self.matrix[(i, j)] * state.amplitudes[j];
            }
            out[i] = acc;
        }
        Ok(StateVector {
            amplitudes: out,
            time: state.time + self.time,
        })
    }

    /// `max |(G^dagger G - I)_ij|`.
    pub fn unitarity_defect(&self) -> T {
        let n = self.len();
        let g = &self.matrix;
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    acc = acc + g[(k, i)].conj() * g[(k, j)];
                }
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((acc - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }

    /// `max |G_ij(0) - I_ij|`, meaningful when `time == 0`.
    pub fn identity_defect(&self) -> T {
        let n = self.len();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((self.matrix[(i, j)] - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }
}

fn phases<T: Real>(spectrum: &QeSpectrum<T>, t: T) -> Vec<Complex<T>> {
    let two_pi = lit::<T>(std::f64::consts::TAU);
    spectrum
        .eigenvalues()
        .iter()
        .map(|&e| Complex::from_polar(T::one(), -two_pi * e * t))
        .collect()
}

/// Builds the dense propagator for time `t` (in periods).
pub fn propagator<T: Real>(spectrum: &QeSpectrum<T>, t: T) -> Result<Propagator<T>> {
    if !t.is_finite() {
        return Err(Error::Precondition(format!(
            "propagator: time must be finite, got {t}"
        )));
    }
    let n = spectrum.len();
    let a = spectrum.eigenvectors();
    let ph = phases(spectrum, t);
    let mut matrix = Array2::from_elem((n, n), Complex::new(T::zero(), T::zero()));
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for q in 0..n {
                acc = acc + ph[q] * (a[(i, q)] * a[(j, q)]);
            }
            matrix[(i, j)] = acc;
        }
    }
    Ok(Propagator { matrix, time: t })
}

/// Evolves a state by `t` periods in `O(N^2)` without forming the propagator:
/// expand on the eigenbasis, rotate the phases, transform back.
pub fn evolve<T: Real>(
    state0: &StateVector<T>,
    spectrum: &QeSpectrum<T>,
    t: T,
) -> Result<StateVector<T>> {
    let n = spectrum.len();
    if state0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "state has {} levels, spectrum has {n}",
            state0.len()
        )));
    }
    if !t.is_finite() {
        return Err(Error::Precondition(format!(
            "evolve: time must be finite, got {t}"
        )));
    }
    let a = spectrum.eigenvectors();
    let c0 = &state0.amplitudes;

    // y = A^T c0
    let mut y = vec![Complex::new(T::zero(), T::zero()); n];
    for k in 0..n {
        let ck = c0[k];
        for q in 0..n {
            y[q] = y[q] + ck * a[(k, q)];
        }
    }
    let ph = phases(spectrum, t);
    for q in 0..n {
        y[q] = y[q] * ph[q];
    }
    // c = A y
    let mut c = Array1::from_elem(n, Complex::new(T::zero(), T::zero()));
    for k in 0..n {
        let mut acc = Complex::new(T::zero(), T::zero());
        for q in 0..n {
            acc = acc + y[q] * a[(k, q)];
        }
        c[k] = acc;
    }
    Ok(StateVector {
        amplitudes: c,
        time: state0.time + t,
    })
}

/// Probability captured by each cell of the partition.
pub fn cell_probabilities<T: Real>(state: &StateVector<T>, partition: &CellPartition) -> Vec<T> {
    let p = state.probabilities();
    partition
        .cells()
        .iter()
        .map(|c| (c.start..c.end).map(|k| p[k]).sum())
        .collect()
}

/// Logarithmically spaced sample times in `[t_min, t_max]`.
pub fn log_spaced_times<T: Real>(t_min: T, t_max: T, samples: usize) -> Result<Vec<T>> {
    if !(t_min > T::zero()) || !(t_max > t_min) {
        return Err(Error::Precondition(format!(
            "log_spaced_times: need 0 < t_min < t_max, got [{t_min}, {t_max}]"
        )));
    }
    if samples < 2 {
        return Err(Error::Precondition(format!(
            "log_spaced_times: need at least 2 samples, got {samples}"
        )));
    }
    let lo = t_min.ln();
    let hi = t_max.ln();
    let step = (hi - lo) / lit::<T>((samples - 1) as f64);
    Ok((0..samples)
        .map(|i| (lo + step * lit::<T>(i as f64)).exp())
        .collect())
}

/// Arithmetic mean of the cell probabilities over log-spaced sample times.
pub fn time_averaged_cells<T: Real>(
    state0: &StateVector<T>,
    spectrum: &QeSpectrum<T>,
    partition: &CellPartition,
    t_min: T,
    t_max: T,
    samples: usize,
) -> Result<Vec<T>> {
    let times = log_spaced_times(t_min, t_max, samples)?;
    let mut acc = vec![T::zero(); partition.len()];
    for &t in &times {
        let state = evolve(state0, spectrum, t)?;
        for (a, p) in acc.iter_mut().zip(cell_probabilities(&state, partition)) {
            *a += p;
        }
    }
    let inv = T::one() / lit::<T>(times.len() as f64);
    Ok(acc.into_iter().map(|a| a * inv).collect())
}

/// Probability accumulated strictly above level `n0`.
pub fn penetration_coefficient<T: Real>(state: &StateVector<T>, n0: usize) -> Result<T> {
    if n0 + 1 >= state.len() {
        return Err(Error::IndexOutOfRange {
            what: "penetration_coefficient",
            index: n0,
            len: state.len().saturating_sub(1),
        });
    }
    let p = state.probabilities();
    Ok((n0 + 1..state.len()).map(|k| p[k]).sum())
}

/// How the barrier level is chosen at each scan point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierRule {
    /// The weakest coupling at the boundary between the second and third
    /// cells.
    SecondCellBoundary,
    /// A fixed coupling index.
    Fixed(usize),
}

/// One point of a penetration scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanPoint<T> {
    pub inv_h: T,
    /// Number of cells the chain splits into at this `h`.
    pub cells: usize,
    /// Barrier coupling index, when the rule could be applied.
    pub barrier: Option<usize>,
    /// Penetration beyond the barrier after the scan time; `None` when the
    /// point was skipped.
    pub penetration: Option<T>,
}

/// Penetration coefficient versus `1/h` after evolving a level state placed
/// at the centre of the second cell for `t` periods.
///
/// Chains are built on the Bessel coupling branch at every index so that the
/// blocking condition lands exactly on the grid and the couplings vary
/// smoothly with `h`. Grid points whose chain splits into fewer than three
/// cells are skipped. Points are independent and evaluated in parallel.
pub fn scan_penetration<T: Real>(
    base: &ModelParams<T>,
    inv_h_grid: &[T],
    t: T,
    rule: BarrierRule,
) -> Result<Vec<ScanPoint<T>>> {
    if inv_h_grid.is_empty() {
        return Err(Error::Precondition("scan_penetration: empty grid".into()));
    }
    let points: Vec<ScanPoint<T>> = inv_h_grid
        .par_iter()
        .map(|&inv_h| {
            let skip = |cells: usize| ScanPoint {
                inv_h,
                cells,
                barrier: None,
                penetration: None,
            };
            if !(inv_h > T::zero()) {
                return skip(0);
            }
            let params =
                match ModelParams::new(T::one() / inv_h, base.v0, base.delta, base.n_levels) {
                    Ok(p) => p.asymptotic_only(),
                    Err(_) => return skip(0),
                };
            let chain = match CouplingChain::build(params) {
                Ok(c) => c,
                Err(_) => return skip(0),
            };
            let partition = match cell_partition(&chain) {
                Ok(p) => p,
                Err(_) => return skip(0),
            };
            if partition.len() < 3 {
                return skip(partition.len());
            }
            let cells = partition.len();
            let barrier = match rule {
                BarrierRule::Fixed(m) => m,
                BarrierRule::SecondCellBoundary => {
                    let b = partition.boundaries()[1];
                    let f = chain.off_diagonal();
                    // the boundary level sits between couplings b-1 and b;
                    // take the weaker link
                    if b >= 1 && f[b - 1].abs() < f[b].abs() {
                        b - 1
                    } else {
                        b
                    }
                }
            };
            let start = partition.cells()[1].center();
            let spectrum = match solve(chain) {
                Ok(s) => s,
                Err(_) => return skip(cells),
            };
            let state0 = match StateVector::delta_at(start, params.n_levels) {
                Ok(s) => s,
                Err(_) => return skip(cells),
            };
            let state = match evolve(&state0, &spectrum, t) {
                Ok(s) => s,
                Err(_) => return skip(cells),
            };
            let p = match penetration_coefficient(&state, barrier) {
                Ok(p) => p,
                Err(_) => return skip(cells),
            };
            ScanPoint {
                inv_h,
                cells,
                barrier: Some(barrier),
                penetration: Some(p),
            }
        })
        .collect();
    Ok(points)
}

/// Largest level whose occupation is at least `threshold`.
pub fn spread_boundary<T: Real>(state: &StateVector<T>, threshold: T) -> Result<usize> {
    if !(threshold > T::zero()) || !(threshold < T::one()) {
        return Err(Error::Precondition(format!(
            "spread_boundary: threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let p = state.probabilities();
    (0..state.len())
        .rev()
        .find(|&k| p[k] >= threshold)
        .ok_or_else(|| {
            Error::Precondition(format!(
                "spread_boundary: no level reaches the threshold {threshold}"
            ))
        })
}
