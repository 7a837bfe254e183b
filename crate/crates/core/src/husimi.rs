//! Coherent-state (Husimi) phase-space distribution of a ladder state.
//!
//! Conventions: `alpha = (x + i p) / sqrt(2)` with the standard oscillator
//! quadratures, `Q(alpha) = |<alpha|psi>|^2` and the completeness relation
//! `(1/2pi) integral Q dx dp = 1`. The overlap `<alpha|n>` is accumulated in
//! the log domain with a per-point maximum-term factorization, so level
//! indices up to several hundred stay clear of overflow.

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::StateVector;
use crate::scalar::{lit, Real};
use crate::special::ln_factorial_table;

/// Square sampling window of the phase plane, centred on the origin.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec<T> {
    /// Half-width of the square in quadrature units; `None` selects
    /// `sqrt(2 N) + 4` for an `N`-level state.
    pub half_width: Option<T>,
    /// Points per axis.
    pub resolution: usize,
}

impl<T> Default for GridSpec<T> {
    fn default() -> Self {
        Self {
            half_width: None,
            resolution: 256,
        }
    }
}

/// Sampled Husimi distribution.
#[derive(Debug, Clone)]
pub struct HusimiGrid<T> {
    coords: Vec<T>,
    values: Array2<T>,
    cell_area: T,
}

impl<T: Real> HusimiGrid<T> {
    /// Shared axis coordinates (the grid is square and symmetric).
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// `Q` values indexed as `(x index, p index)`.
    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn resolution(&self) -> usize {
        self.coords.len()
    }

    /// Area `dx * dp` of one grid cell.
    pub fn cell_area(&self) -> T {
        self.cell_area
    }

    /// Discrete mass `(dx dp / 2pi) sum Q`; 1 for a grid covering the state.
    pub fn captured_mass(&self) -> T {
        let total: T = self.values.iter().copied().sum();
        total * self.cell_area / lit(std::f64::consts::TAU)
    }

    /// `|captured_mass - 1|`.
    pub fn normalization_defect(&self) -> T {
        (self.captured_mass() - T::one()).abs()
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v))
    }
}

/// Evaluates the Husimi distribution of a state on the given grid.
pub fn husimi<T: Real>(state: &StateVector<T>, grid: &GridSpec<T>) -> Result<HusimiGrid<T>> {
    let n = state.len();
    if grid.resolution < 2 {
        return Err(Error::Precondition(format!(
            "husimi: resolution must be >= 2, got {}",
            grid.resolution
        )));
    }
    let half_width = match grid.half_width {
        Some(w) if w > T::zero() => w,
        Some(w) => {
            return Err(Error::Precondition(format!(
                "husimi: half_width must be > 0, got {w}"
            )))
        }
        None => (lit::<T>(2.0) * lit::<T>(n as f64)).sqrt() + lit(4.0),
    };
    let res = grid.resolution;
    let step = lit::<T>(2.0) * half_width / lit::<T>((res - 1) as f64);
    // symmetric coordinates: index i and res-1-i map to +-x exactly
    let centre = lit::<T>((res - 1) as f64) * lit::<T>(0.5);
    let coords: Vec<T> = (0..res)
        .map(|i| (lit::<T>(i as f64) - centre) * step)
        .collect();

    let ln_fact = ln_factorial_table::<T>(n);
    let amps: Vec<Complex<T>> = state.amplitudes().to_vec();
    let half = lit::<T>(0.5);

    let rows: Vec<Vec<T>> = coords
        .par_iter()
        .map(|&x| {
            coords
                .iter()
                .map(|&p| {
                    let re = x * lit::<T>(std::f64::consts::FRAC_1_SQRT_2);
                    let im = p * lit::<T>(std::f64::consts::FRAC_1_SQRT_2);
                    let r2 = re * re + im * im;
                    if r2 == T::zero() {
                        return amps[0].norm_sqr();
                    }
                    let ln_r = r2.ln() * half;
                    let theta = im.atan2(re);
                    // ln |<alpha|n>| = -r^2/2 + n ln r - ln(n!)/2, with the
                    // largest occupied term factored out
                    let mut peak = T::neg_infinity();
                    for (k, (c, lf)) in amps.iter().zip(ln_fact.iter()).enumerate() {
                        if c.norm_sqr() == T::zero() {
                            continue;
                        }
                        let l = -r2 * half + lit::<T>(k as f64) * ln_r - *lf * half;
                        if l > peak {
                            peak = l;
                        }
                    }
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (k, (c, lf)) in amps.iter().zip(ln_fact.iter()).enumerate() {
                        if c.norm_sqr() == T::zero() {
                            continue;
                        }
                        let l = -r2 * half + lit::<T>(k as f64) * ln_r - *lf * half;
                        let mag = (l - peak).exp();
                        // phase of (alpha*)^n
                        let ph = -lit::<T>(k as f64) * theta;
                        acc = acc + *c * Complex::from_polar(mag, ph);
                    }
                    let s = acc.norm();
                    let ln_q = lit::<T>(2.0) * (peak + s.ln());
                    if s == T::zero() {
                        T::zero()
                    } else {
                        ln_q.exp()
                    }
                })
                .collect()
        })
        .collect();

    let mut values = Array2::<T>::zeros((res, res));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            values[(i, j)] = v;
        }
    }

    Ok(HusimiGrid {
        coords,
        values,
        cell_area: step * step,
    })
}

/// Iso-levels used when none are requested: fractions of the grid maximum.
pub fn default_contour_levels<T: Real>(grid: &HusimiGrid<T>) -> Vec<T> {
    let m = grid.max_value();
    [0.1, 0.3, 0.5, 0.7, 0.9]
        .into_iter()
        .map(|f| m * lit(f))
        .collect()
}

/// Contour levels paired with the grid for export; levels above the grid
/// maximum are dropped.
#[derive(Debug, Clone)]
pub struct ContourSet<T> {
    pub levels: Vec<T>,
    /// Number of requested levels discarded for exceeding the maximum.
    pub clipped: usize,
}

/// Writes the grid as CSV together with iso-levels: the requested ones
/// (clipped to the grid maximum) or, when `None`, the default fractions of
/// the maximum. Returns the level set actually written.
pub fn export_with_contours<T: Real>(
    path: &std::path::Path,
    grid: &HusimiGrid<T>,
    requested: Option<&[T]>,
    metadata: &[String],
) -> Result<ContourSet<T>> {
    let set = match requested {
        Some(levels) => contour_levels(grid, levels)?,
        None => ContourSet {
            levels: default_contour_levels(grid),
            clipped: 0,
        },
    };
    crate::export::write_husimi(path, grid, &set.levels, metadata)?;
    Ok(set)
}

/// Validates and clips the requested iso-levels against the grid.
pub fn contour_levels<T: Real>(grid: &HusimiGrid<T>, requested: &[T]) -> Result<ContourSet<T>> {
    let mut previous = T::zero();
    for &l in requested {
        if !(l > T::zero()) {
            return Err(Error::Precondition(format!(
                "contour levels must be positive, got {l}"
            )));
        }
        if l <= previous {
            return Err(Error::Precondition(
                "contour levels must be strictly ascending".into(),
            ));
        }
        previous = l;
    }
    let max = grid.max_value();
    let levels: Vec<T> = requested.iter().copied().filter(|&l| l <= max).collect();
    let clipped = requested.len() - levels.len();
    Ok(ContourSet { levels, clipped })
}
