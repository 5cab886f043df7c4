//! Periodic box geometry, wavevector tables and cached FFT plans.

use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Smallest admissible number of points per axis.
pub const MIN_POINTS: usize = 8;

pub(crate) struct AxisPlan<T: Scalar> {
    pub(crate) forward: Arc<dyn Fft<T>>,
    pub(crate) inverse: Arc<dyn Fft<T>>,
}

struct Tables<T: Scalar> {
    /// Angular wavenumbers per axis, indexed by FFT bin.
    k_axis: Vec<Vec<T>>,
    /// Same as `k_axis` but zero on the Nyquist bin; used by odd symbols so
    /// that real inputs keep real outputs.
    k_odd_axis: Vec<Vec<T>>,
    /// |k| for every flat mode index.
    kmag: Vec<T>,
    /// Flat index of `-k` for every mode.
    mirror: Vec<usize>,
    plans: Vec<AxisPlan<T>>,
}

/// Uniform periodic grid on `[0, L_1) x ... x [0, L_N)`.
///
/// Points are located at `x_i = j * h_i`, `j = 0..M_i`, and stored
/// row-major (last axis fastest). Cloning is cheap: tables and FFT plans
/// are shared.
#[derive(Clone)]
pub struct Grid<T: Scalar> {
    points: Vec<usize>,
    lengths: Vec<T>,
    tables: Arc<Tables<T>>,
}

impl<T: Scalar> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.tables, &other.tables)
            || (self.points == other.points && self.lengths == other.lengths)
    }
}

impl<T: Scalar> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("points", &self.points)
            .field("lengths", &self.lengths)
            .finish()
    }
}

impl<T: Scalar> Grid<T> {
    pub fn new(points: &[usize], lengths: &[T]) -> Result<Self> {
        let dim = points.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1..={MAX_DIM}, got {dim}"
            )));
        }
        if lengths.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} lengths given for {dim} axes",
                lengths.len()
            )));
        }
        for (axis, (&m, &l)) in points.iter().zip(lengths).enumerate() {
            if m < MIN_POINTS || m % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: point count {m} must be even and >= {MIN_POINTS}"
                )));
            }
            if !(l > T::zero()) || !l.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: length {l} must be positive and finite"
                )));
            }
        }

        let two_pi = T::TAU();
        let mut k_axis = Vec::with_capacity(dim);
        let mut k_odd_axis = Vec::with_capacity(dim);
        let mut plans = Vec::with_capacity(dim);
        let mut planner = FftPlanner::<T>::new();
        for (&m, &l) in points.iter().zip(lengths) {
            let ks: Vec<T> = (0..m)
                .map(|j| two_pi * T::lit(signed_bin(j, m) as f64) / l)
                .collect();
            let mut odd = ks.clone();
            odd[m / 2] = T::zero();
            k_axis.push(ks);
            k_odd_axis.push(odd);
            plans.push(AxisPlan {
                forward: planner.plan_fft_forward(m),
                inverse: planner.plan_fft_inverse(m),
            });
        }

        let total: usize = points.iter().product();
        let mut kmag = Vec::with_capacity(total);
        let mut mirror = Vec::with_capacity(total);
        let mut idx = [0usize; MAX_DIM];
        for _ in 0..total {
            let mut k2 = T::zero();
            let mut q = 0;
            for a in 0..dim {
                let k = k_axis[a][idx[a]];
                k2 = k2 + k * k;
                q = q * points[a] + (points[a] - idx[a]) % points[a];
            }
            kmag.push(k2.sqrt());
            mirror.push(q);
            advance(&mut idx, points);
        }

        Ok(Self {
            points: points.to_vec(),
            lengths: lengths.to_vec(),
            tables: Arc::new(Tables {
                k_axis,
                k_odd_axis,
                kmag,
                mirror,
                plans,
            }),
        })
    }

    /// Cube `[0, L)^N` with `m` points per axis.
    pub fn cube(dim: usize, m: usize, length: T) -> Result<Self> {
        Self::new(&vec![m; dim], &vec![length; dim])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.tables.kmag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.lengths[axis] / T::from_usize_lossy(self.points[axis])
    }

    pub fn min_spacing(&self) -> T {
        (0..self.dim())
            .map(|a| self.spacing(a))
            .fold(T::infinity(), T::min)
    }

    /// Cell volume `h_1 ... h_N`.
    pub fn cell_volume(&self) -> T {
        (0..self.dim())
            .map(|a| self.spacing(a))
            .fold(T::one(), |acc, h| acc * h)
    }

    /// Box volume `L_1 ... L_N`.
    pub fn volume(&self) -> T {
        self.lengths.iter().fold(T::one(), |acc, &l| acc * l)
    }

    /// Box center, which is always a grid point.
    pub fn center(&self) -> Vec<T> {
        self.lengths.iter().map(|&l| l / T::lit(2.0)).collect()
    }

    /// Angular wavenumber of FFT bin `bin` on `axis`.
    pub fn wavenumber(&self, axis: usize, bin: usize) -> T {
        self.tables.k_axis[axis][bin]
    }

    pub(crate) fn k_axis(&self, axis: usize) -> &[T] {
        &self.tables.k_axis[axis]
    }

    pub(crate) fn k_odd_axis(&self, axis: usize) -> &[T] {
        &self.tables.k_odd_axis[axis]
    }

    /// |k| for every mode, in flat storage order.
    pub fn kmag(&self) -> &[T] {
        &self.tables.kmag
    }

    pub(crate) fn plan(&self, axis: usize) -> &AxisPlan<T> {
        &self.tables.plans[axis]
    }

    /// Splits a flat index into per-axis indices.
    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.points[a];
            flat /= self.points[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for a in 0..self.dim() {
            flat = flat * self.points[a] + idx[a];
        }
        flat
    }

    /// Flat index of the mode `-k` paired with `flat`.
    pub fn mirror(&self, flat: usize) -> usize {
        self.tables.mirror[flat]
    }

    /// Signed bin numbers `m~` in `[-M/2, M/2)` for the flat mode index.
    pub fn signed_bins(&self, flat: usize) -> [isize; MAX_DIM] {
        let idx = self.unravel(flat);
        let mut out = [0isize; MAX_DIM];
        for a in 0..self.dim() {
            out[a] = signed_bin(idx[a], self.points[a]);
        }
        out
    }

    /// Wavevector of a flat mode index (unused axes are zero).
    pub fn wavevector(&self, flat: usize) -> [T; MAX_DIM] {
        let idx = self.unravel(flat);
        let mut k = [T::zero(); MAX_DIM];
        for a in 0..self.dim() {
            k[a] = self.tables.k_axis[a][idx[a]];
        }
        k
    }

    /// Largest normalized bin `max_i |m~_i| / (M_i/2)` of a mode; 1 on the
    /// Nyquist planes.
    pub fn normalized_bin(&self, flat: usize) -> T {
        let bins = self.signed_bins(flat);
        (0..self.dim())
            .map(|a| {
                T::lit(bins[a].unsigned_abs() as f64) / T::lit(self.points[a] as f64 / 2.0)
            })
            .fold(T::zero(), T::max)
    }

    /// Physical coordinates of a flat point index.
    pub fn coordinate(&self, flat: usize) -> [T; MAX_DIM] {
        let idx = self.unravel(flat);
        let mut x = [T::zero(); MAX_DIM];
        for a in 0..self.dim() {
            x[a] = T::from_usize_lossy(idx[a]) * self.spacing(a);
        }
        x
    }

    /// Same geometry with a different resolution (used by refinement studies).
    pub fn with_points(&self, points: &[usize]) -> Result<Self> {
        Self::new(points, &self.lengths)
    }
}

/// Signed alias of FFT bin `j` on an axis with `m` points.
pub fn signed_bin(j: usize, m: usize) -> isize {
    if j < m / 2 {
        j as isize
    } else {
        j as isize - m as isize
    }
}

fn advance(idx: &mut [usize; MAX_DIM], points: &[usize]) {
    for a in (0..points.len()).rev() {
        idx[a] += 1;
        if idx[a] < points[a] {
            return;
        }
        idx[a] = 0;
    }
}
