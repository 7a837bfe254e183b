//! Dimensionless model definition: wave-coupling matrix elements between
//! neighbouring Landau levels, the tridiagonal operator they generate, and
//! the resonance-cell structure of the level ladder.
//!
//! Units: energies are measured in units of the photon quantum, times in wave
//! periods. The level ladder is controlled by three numbers: the effective
//! Planck constant `h`, the drive amplitude `v0` and the detuning coefficient
//! `delta` that multiplies the level index on the diagonal.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::special::{bessel_j1_unchecked, laguerre_l1};

/// Default level index at which the coupling switches from the exact
/// Laguerre form to the Bessel asymptotic form.
pub const DEFAULT_BRANCH_SWITCH: usize = 50;

/// Relative mismatch allowed between the two coupling branches at the switch
/// index (checked against the local oscillation envelope).
pub const BRANCH_CONTINUITY_TOL: f64 = 1e-2;

/// Dimensionless problem definition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Effective Planck constant `(ka)^2`, strictly positive.
    pub h: T,
    /// Wave amplitude in photon units, non-negative.
    pub v0: T,
    /// Detuning: coefficient of the level index on the operator diagonal.
    /// Positive `delta` raises level energies with `n`; the sign convention
    /// is documented, not enforced.
    pub delta: T,
    /// Number of Landau levels kept, at least 2.
    pub n_levels: usize,
    /// Coupling indices below this use the exact Laguerre matrix element,
    /// the rest use its Bessel limit. Zero selects the Bessel form
    /// everywhere.
    pub n_switch: usize,
}

impl<T: Real> ModelParams<T> {
    /// Validated construction with the default branch switch.
    pub fn new(h: T, v0: T, delta: T, n_levels: usize) -> Result<Self> {
        let params = Self {
            h,
            v0,
            delta,
            n_levels,
            n_switch: DEFAULT_BRANCH_SWITCH,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same parameters with a different branch-switch index.
    pub fn with_branch_switch(mut self, n_switch: usize) -> Self {
        self.n_switch = n_switch;
        self
    }

    /// Same parameters evaluating the Bessel branch at every index. Used by
    /// parameter scans, where the blocking condition must land exactly on
    /// the grid and the coupling must vary smoothly with `h`.
    pub fn asymptotic_only(self) -> Self {
        self.with_branch_switch(0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.h.is_finite() || self.h <= T::zero() {
            return Err(Error::Precondition(format!(
                "h must be > 0, got {}",
                self.h
            )));
        }
        if !self.v0.is_finite() || self.v0 < T::zero() {
            return Err(Error::Precondition(format!(
                "v0 must be >= 0, got {}",
                self.v0
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::Precondition(format!(
                "delta must be finite, got {}",
                self.delta
            )));
        }
        if self.n_levels < 2 {
            return Err(Error::Precondition(format!(
                "n_levels must be >= 2, got {}",
                self.n_levels
            )));
        }
        Ok(())
    }
}

/// Exact nearest-neighbour matrix element between levels `n` and `n + 1`:
/// `(v0/2) e^{-h/4} sqrt(h / (2(n+1))) L_n^(1)(h/2)`.
pub fn coupling_exact<T: Real>(n: usize, params: &ModelParams<T>) -> Result<T> {
    let half = lit::<T>(0.5);
    let x = params.h * half;
    let lag = laguerre_l1(n, x)?;
    let amp = (params.h / (lit::<T>(2.0) * lit::<T>((n + 1) as f64))).sqrt();
    Ok(half * params.v0 * (-params.h * lit::<T>(0.25)).exp() * amp * lag)
}

/// Large-`n` limit of the exact element: `(v0/2) J1(sqrt(2 (n+1) h))`.
///
/// The Laguerre asymptotics cancel the `e^{-h/4}` prefactor and place the
/// Bessel argument at `n + 1`; this is the form that stays within 1% of the
/// exact element from `n ~ 50` on.
pub fn coupling_asymptotic<T: Real>(n: usize, params: &ModelParams<T>) -> T {
    coupling_smooth(lit::<T>(n as f64), params)
}

/// The Bessel-form coupling extended to a continuous level variable. This is
/// the closed form differentiated by the resonance-centre analysis.
pub fn coupling_smooth<T: Real>(n: T, params: &ModelParams<T>) -> T {
    let arg = (lit::<T>(2.0) * (n + T::one()) * params.h).sqrt();
    lit::<T>(0.5) * params.v0 * bessel_j1_unchecked(arg)
}

/// Coupling between levels `n` and `n + 1`, selecting the branch by
/// `params.n_switch`.
pub fn coupling<T: Real>(n: usize, params: &ModelParams<T>) -> Result<T> {
    if n + 2 > params.n_levels {
        return Err(Error::IndexOutOfRange {
            what: "coupling",
            index: n,
            len: params.n_levels.saturating_sub(1),
        });
    }
    if n < params.n_switch {
        coupling_exact(n, params)
    } else {
        Ok(coupling_asymptotic(n, params))
    }
}

/// Amplitude of the `J1` oscillation envelope at argument `x`, used as the
/// local scale when comparing the two coupling branches near Bessel zeros.
fn j1_envelope<T: Real>(x: T) -> T {
    let peak = lit::<T>(0.5819);
    if x <= T::zero() {
        return peak;
    }
    peak.min((lit::<T>(2.0) / (lit::<T>(std::f64::consts::PI) * x)).sqrt())
}

/// Symmetric tridiagonal operator data: couplings on the off-diagonal,
/// `n * delta` on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingChain<T> {
    off_diagonal: Vec<T>,
    diagonal: Vec<T>,
    params: ModelParams<T>,
}

impl<T: Real> CouplingChain<T> {
    /// Builds the chain and enforces continuity of the two coupling branches
    /// at the switch index.
    pub fn build(params: ModelParams<T>) -> Result<Self> {
        params.validate()?;
        let n = params.n_levels;
        let mut off_diagonal = Vec::with_capacity(n - 1);
        for m in 0..n - 1 {
            off_diagonal.push(coupling(m, &params)?);
        }
        let diagonal = (0..n).map(|k| lit::<T>(k as f64) * params.delta).collect();

        let chain = Self {
            off_diagonal,
            diagonal,
            params,
        };
        chain.check_branch_continuity()?;
        Ok(chain)
    }

    fn check_branch_continuity(&self) -> Result<()> {
        let p = &self.params;
        let m = p.n_switch;
        if p.v0 == T::zero() || m == 0 || m > p.n_levels.saturating_sub(2) {
            return Ok(());
        }
        let exact = coupling_exact(m, p)?;
        let asym = coupling_asymptotic(m, p);
        let x = (lit::<T>(2.0) * lit::<T>((m + 1) as f64) * p.h).sqrt();
        let scale = lit::<T>(0.5) * p.v0 * j1_envelope(x);
        let diff = (exact - asym).abs();
        if diff > lit::<T>(BRANCH_CONTINUITY_TOL) * scale {
            return Err(Error::NumericalCheck(format!(
                "coupling branches disagree at switch index {m}: exact {exact}, \
                 asymptotic {asym}, allowed {}",
                lit::<T>(BRANCH_CONTINUITY_TOL) * scale
            )));
        }
        Ok(())
    }

    /// Number of levels.
    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Couplings `f(0..N-2)`.
    pub fn off_diagonal(&self) -> &[T] {
        &self.off_diagonal
    }

    /// Diagonal `d(0..N-1) = n * delta`.
    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    /// Largest coupling magnitude (zero for an empty off-diagonal).
    pub fn max_coupling(&self) -> T {
        self.off_diagonal
            .iter()
            .fold(T::zero(), |acc, f| acc.max(f.abs()))
    }

    /// Largest diagonal magnitude.
    pub fn max_diagonal(&self) -> T {
        self.diagonal
            .iter()
            .fold(T::zero(), |acc, d| acc.max(d.abs()))
    }
}

/// Half-open range of level indices forming one resonance cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub start: usize,
    /// One past the last level of the cell.
    pub end: usize,
}

impl Cell {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn contains(&self, n: usize) -> bool {
        n >= self.start && n < self.end
    }

    /// Integer nearest the midpoint of the cell's index range (half rounds
    /// up).
    pub fn center(&self) -> usize {
        (self.start + self.end) / 2
    }
}

/// Partition of the level ladder into resonance cells delimited by sign
/// changes of the coupling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellPartition {
    boundaries: Vec<usize>,
    cells: Vec<Cell>,
}

impl CellPartition {
    /// Boundary levels, strictly increasing.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell index containing level `n`, if in range.
    pub fn cell_of(&self, n: usize) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(n))
    }
}

/// Splits the ladder at sign changes of the coupling sequence.
///
/// A chain with identically zero couplings has no sign structure and is
/// rejected.
pub fn cell_partition<T: Real>(chain: &CouplingChain<T>) -> Result<CellPartition> {
    let n = chain.len();
    if n < 2 {
        return Err(Error::Precondition(
            "cell_partition: need at least 2 levels".into(),
        ));
    }
    let f = chain.off_diagonal();
    let mut boundaries = Vec::new();
    let mut last_sign = T::zero();
    for (m, &fm) in f.iter().enumerate() {
        if fm == T::zero() {
            continue;
        }
        let sign = fm.signum();
        if last_sign != T::zero() && sign * last_sign < T::zero() {
            boundaries.push(m);
        }
        last_sign = sign;
    }
    if last_sign == T::zero() {
        return Err(Error::DegenerateChain(
            "all couplings vanish; no usable cell structure".into(),
        ));
    }
    let mut cells = Vec::with_capacity(boundaries.len() + 1);
    let mut start = 0;
    for &b in &boundaries {
        cells.push(Cell { start, end: b });
        start = b;
    }
    cells.push(Cell { start, end: n });
    Ok(CellPartition { boundaries, cells })
}

/// Centered first derivative of the smooth coupling, step `1e-3`.
pub fn coupling_derivative<T: Real>(n: T, params: &ModelParams<T>) -> T {
    let dn = lit::<T>(1e-3);
    (coupling_smooth(n + dn, params) - coupling_smooth(n - dn, params)) / (lit::<T>(2.0) * dn)
}

/// Centered second derivative of the smooth coupling, step `1e-3`.
pub fn coupling_second_derivative<T: Real>(n: T, params: &ModelParams<T>) -> T {
    let dn = lit::<T>(1e-3);
    (coupling_smooth(n + dn, params) - lit::<T>(2.0) * coupling_smooth(n, params)
        + coupling_smooth(n - dn, params))
        / (dn * dn)
}

/// All real solutions `n0` of `delta + 2 f'(n0) = 0` in `(0, N)`, found on
/// the smooth coupling form. At `delta = 0` these are the extrema of the
/// coupling. Returns an empty list when the drive is too weak to satisfy the
/// condition anywhere.
pub fn resonance_centers<T: Real>(params: &ModelParams<T>) -> Vec<T> {
    let g = |n: T| params.delta + lit::<T>(2.0) * coupling_derivative(n, params);
    let n_max = lit::<T>(params.n_levels as f64);
    let step = lit::<T>(0.02);
    let mut roots: Vec<T> = Vec::new();
    let mut a = lit::<T>(0.01);
    let mut ga = g(a);
    while a < n_max - step {
        let b = (a + step).min(n_max - lit(1e-9));
        let gb = g(b);
        if ga == T::zero() || ga * gb < T::zero() {
            let mut lo = a;
            let mut hi = b;
            let mut glo = ga;
            for _ in 0..100 {
                let mid = lit::<T>(0.5) * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid);
                if gm == T::zero() {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if glo * gm < T::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            let root = lit::<T>(0.5) * (lo + hi);
            if roots.last().is_none_or(|&r| (root - r).abs() > lit(1e-6)) {
                roots.push(root);
            }
        }
        a = b;
        ga = gb;
    }
    roots
}

/// Level spacing of the locally harmonic reduction at a stable resonance
/// centre: `2 sqrt(|f(n0)| |f''(n0)|)`.
///
/// Errors when the centre is not stable, i.e. when `f` and `f''` share a
/// sign.
pub fn small_oscillation_frequency<T: Real>(n0: T, params: &ModelParams<T>) -> Result<T> {
    if params.v0 == T::zero() {
        return Ok(T::zero());
    }
    let f0 = coupling_smooth(n0, params);
    let f2 = coupling_second_derivative(n0, params);
    if f0 == T::zero() {
        return Err(Error::Precondition(format!(
            "small_oscillation_frequency: coupling vanishes at n0 = {n0}"
        )));
    }
    if f0 * f2 > T::zero() {
        return Err(Error::Precondition(format!(
            "small_oscillation_frequency: n0 = {n0} is not a stable centre \
             (f and f'' share a sign)"
        )));
    }
    Ok(lit::<T>(2.0) * (f0.abs() * f2.abs()).sqrt())
}

/// Coupling indices whose magnitude is at most `eps` times the largest
/// coupling; transitions through these links are (nearly) blocked.
pub fn blocked_levels<T: Real>(chain: &CouplingChain<T>, eps: T) -> Result<Vec<usize>> {
    if !(eps >= T::zero()) {
        return Err(Error::Precondition(format!(
            "blocked_levels: eps must be >= 0, got {eps}"
        )));
    }
    let scale = chain.max_coupling();
    Ok(chain
        .off_diagonal()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.abs() <= eps * scale)
        .map(|(m, _)| m)
        .collect())
}
