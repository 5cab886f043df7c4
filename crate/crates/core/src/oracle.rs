//! Brute-force midpoint cubature of the singular-integral forms of
//! `Lambda^alpha` and the Riesz transform, used to cross-check the spectral
//! multipliers on localized data.
//!
//! Every sum skips the singular cell `y = x`. With
//! [`QuadratureSpec::singular_correction`] enabled the leading local error is
//! removed: the integrand's quadratic Taylor model is summed over the same
//! punctured lattice and compared with its closed-form integral, and the
//! difference (the lattice defect) is added back with finite-difference
//! derivatives of the data. Nothing here touches the FFT.

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::field::PhysicalField;
use crate::grid::{Grid, MAX_DIM};
use crate::operators::riesz_transform;
use crate::scalar::Scalar;
use crate::transform::{forward_transform, inverse_unchecked};

/// Double sums over more than `64^N` points need a subsample stride.
pub const DOUBLE_SUM_POINTS_PER_AXIS: usize = 64;

/// Upper bound on point pairs for the field-valued quadratures.
pub const MAX_PAIRS: usize = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec<T: Scalar> {
    /// Fraction of each box length excluded near the faces when comparing.
    pub interior_margin: T,
    /// Restrict to every `subsample`-th point per axis before summing.
    pub subsample: usize,
    /// Add the lattice-defect correction for the skipped singular cell.
    pub singular_correction: bool,
}

impl<T: Scalar> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            interior_margin: T::lit(0.25),
            subsample: 1,
            singular_correction: true,
        }
    }
}

impl<T: Scalar> QuadratureSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.interior_margin >= T::zero() && self.interior_margin <= T::lit(0.45)) {
            return Err(Error::InvalidParameter {
                name: "interior_margin",
                value: self.interior_margin.to_f64_lossy(),
                reason: "must lie in [0, 0.45]",
            });
        }
        if self.subsample == 0 {
            return Err(Error::InvalidParameter {
                name: "subsample",
                value: 0.0,
                reason: "stride must be >= 1",
            });
        }
        Ok(())
    }

    pub fn with_subsample(mut self, stride: usize) -> Self {
        self.subsample = stride;
        self
    }

    pub fn without_correction(mut self) -> Self {
        self.singular_correction = false;
        self
    }
}

/// Constant `C_alpha` making `C_alpha P.V. int (f(x)-f(y))/|x-y|^{N+alpha} dy`
/// agree with the symbol `|xi|^alpha`.
pub fn lambda_constant(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    alpha * 2f64.powf(alpha - 1.0) * gamma((n + alpha) / 2.0)
        / (std::f64::consts::PI.powf(n / 2.0) * gamma(1.0 - alpha / 2.0))
}

/// Constant `c_N` making `c_N P.V. int (x_j-y_j) f(y)/|x-y|^{N+1} dy` agree
/// with the symbol `-i xi_j/|xi|`.
pub fn riesz_constant(dim: usize) -> f64 {
    let n = dim as f64;
    gamma((n + 1.0) / 2.0) / std::f64::consts::PI.powf((n + 1.0) / 2.0)
}

fn sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * std::f64::consts::PI.powf(n / 2.0) / gamma(n / 2.0)
}

/// Weight of the lattice-defect model; `moment = Some(i)` multiplies by `z_i^2`.
#[derive(Clone, Copy)]
struct DefectModel {
    power: f64,
    moment: Option<usize>,
}

/// `int m(z)|z|^{-p} e^{-|z|^2/r^2} dz - sum_{j != 0} m(jh)|jh|^{-p} e^{-|jh|^2/r^2} prod h`.
fn lattice_defect(spacing: &[f64], model: DefectModel) -> f64 {
    let dim = spacing.len();
    let n = dim as f64;
    let hmax = spacing.iter().copied().fold(0.0, f64::max);
    let r = 8.0 * hmax;
    let (extra, moment_div) = match model.moment {
        Some(_) => (2.0, n),
        None => (0.0, 1.0),
    };
    let radial = n + extra - model.power;
    assert!(radial > 0.0, "lattice defect model is not integrable");
    let exact = sphere_area(dim) / moment_div * 0.5 * r.powf(radial) * gamma(radial / 2.0);

    let reach: Vec<isize> = spacing
        .iter()
        .map(|&h| (7.0 * r / h).ceil() as isize)
        .collect();
    let cell: f64 = spacing.iter().product();
    let mut sum = 0.0;
    let mut idx = [0isize; MAX_DIM];
    let lo: Vec<isize> = reach.iter().map(|&k| -k).collect();
    idx[..dim].copy_from_slice(&lo);
    loop {
        if idx[..dim].iter().any(|&j| j != 0) {
            let mut z2 = 0.0;
            for a in 0..dim {
                let z = idx[a] as f64 * spacing[a];
                z2 += z * z;
            }
            let m = match model.moment {
                Some(i) => {
                    let z = idx[i] as f64 * spacing[i];
                    z * z
                }
                None => 1.0,
            };
            sum += m * z2.powf(-model.power / 2.0) * (-z2 / (r * r)).exp();
        }
        // odometer over [-reach, reach]^dim
        let mut a = dim;
        loop {
            if a == 0 {
                return exact - sum * cell;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] <= reach[a] {
                break;
            }
            idx[a] = -reach[a];
        }
    }
}

/// Restriction to every `stride`-th point per axis.
pub fn restrict<T: Scalar>(f: &PhysicalField<T>, stride: usize) -> Result<PhysicalField<T>> {
    if stride == 1 {
        return Ok(f.clone());
    }
    let grid = f.grid();
    let dim = grid.dim();
    let mut pts = Vec::with_capacity(dim);
    for &m in grid.points() {
        if m % stride != 0 {
            return Err(Error::InvalidParameter {
                name: "subsample",
                value: stride as f64,
                reason: "stride must divide the points per axis",
            });
        }
        pts.push(m / stride);
    }
    let coarse = Grid::new(&pts, grid.lengths())?;
    let mut values = Vec::with_capacity(f.components() * coarse.len());
    for c in 0..f.components() {
        let comp = f.component(c);
        for p in 0..coarse.len() {
            let idx = coarse.unravel(p);
            let mut fine = [0usize; MAX_DIM];
            for a in 0..dim {
                fine[a] = idx[a] * stride;
            }
            values.push(comp[grid.ravel(&fine[..dim])]);
        }
    }
    PhysicalField::from_values(&coarse, f.components(), values)
}

/// Far-field value: mean over the outermost layer of grid points.
fn far_field_value<T: Scalar>(f: &PhysicalField<T>) -> T {
    let grid = f.grid();
    let comp = f.component(0);
    let mut sum = T::zero();
    let mut count = 0usize;
    for p in 0..grid.len() {
        if on_boundary_layer(grid, p) {
            sum = sum + comp[p];
            count += 1;
        }
    }
    sum / T::from_usize_lossy(count)
}

fn on_boundary_layer<T: Scalar>(grid: &Grid<T>, p: usize) -> bool {
    let idx = grid.unravel(p);
    (0..grid.dim()).any(|a| idx[a] == 0 || idx[a] == grid.points()[a] - 1)
}

/// Checks that `f` is (numerically) constant on the outermost layer of the
/// box, relative to its total variation: `|f - f_b| <= 1e-8 max|f - f_b|`.
/// Returns the deviations `f - f_b`.
pub fn localized_part<T: Scalar>(f: &PhysicalField<T>) -> Result<(PhysicalField<T>, T)> {
    f.require_scalar()?;
    let fb = far_field_value(f);
    let g = f.map(|v| v - fb);
    let grid = g.grid();
    let scale = g.max_abs();
    let mut boundary = T::zero();
    for p in 0..grid.len() {
        if on_boundary_layer(grid, p) {
            boundary = boundary.max(g.values()[p].abs());
        }
    }
    let limit = T::lit(1e-8) * scale;
    if boundary > limit {
        return Err(Error::NotLocalized {
            boundary: boundary.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    Ok((g, fb))
}

/// Lattice of displacement kernels `K(z)`, `z = (i - j) h`, for `|i - j| < M`.
struct DisplacementTable {
    dims: [usize; MAX_DIM],
    points: [usize; MAX_DIM],
    values: Vec<f64>,
}

impl DisplacementTable {
    fn new<T: Scalar>(grid: &Grid<T>, kernel: impl Fn(&[f64; MAX_DIM], f64) -> f64) -> Self {
        let dim = grid.dim();
        let mut points = [1usize; MAX_DIM];
        let mut dims = [1usize; MAX_DIM];
        let mut h = [0.0; MAX_DIM];
        for a in 0..dim {
            points[a] = grid.points()[a];
            dims[a] = 2 * points[a] - 1;
            h[a] = grid.spacing(a).to_f64_lossy();
        }
        let mut values = Vec::with_capacity(dims.iter().product());
        for d0 in 0..dims[0] {
            for d1 in 0..dims[1] {
                for d2 in 0..dims[2] {
                    let d = [d0, d1, d2];
                    let mut z = [0.0; MAX_DIM];
                    let mut r2 = 0.0;
                    for a in 0..MAX_DIM {
                        z[a] = (d[a] as f64 - (points[a] as f64 - 1.0)) * h[a];
                        r2 += z[a] * z[a];
                    }
                    values.push(if r2 == 0.0 { 0.0 } else { kernel(&z, r2.sqrt()) });
                }
            }
        }
        Self {
            dims,
            points,
            values,
        }
    }

    /// `sum_y K(x - y) v(y)`, the `y = x` term being zero by construction.
    fn apply_at(&self, x: [usize; MAX_DIM], v: &[f64]) -> f64 {
        let [m0, m1, m2] = self.points;
        let [_, t1, t2] = self.dims;
        let mut acc = 0.0;
        for j0 in 0..m0 {
            let d0 = x[0] + m0 - 1 - j0;
            for j1 in 0..m1 {
                let d1 = x[1] + m1 - 1 - j1;
                let row = (d0 * t1 + d1) * t2;
                let base = (j0 * m1 + j1) * m2;
                let vals = &v[base..base + m2];
                // d2 = x2 + m2 - 1 - j2 runs downwards as j2 increases
                let start = row + x[2] + m2 - 1;
                for (j2, &vy) in vals.iter().enumerate() {
                    acc += self.values[start - j2] * vy;
                }
            }
        }
        acc
    }
}

fn padded_index<T: Scalar>(grid: &Grid<T>, p: usize) -> [usize; MAX_DIM] {
    grid.unravel(p)
}

fn to_f64<T: Scalar>(f: &[T]) -> Vec<f64> {
    f.iter().map(|v| v.to_f64_lossy()).collect()
}

fn spacing_f64<T: Scalar>(grid: &Grid<T>) -> Vec<f64> {
    (0..grid.dim())
        .map(|a| grid.spacing(a).to_f64_lossy())
        .collect()
}

fn check_pairs<T: Scalar>(grid: &Grid<T>, limit: usize) -> Result<()> {
    let pairs = grid.len().saturating_mul(grid.len());
    if pairs > limit {
        return Err(Error::TooExpensive {
            points: grid.len(),
            limit: (limit as f64).sqrt() as usize,
        });
    }
    Ok(())
}

/// Periodic central differences: `d/dx_axis` and `d^2/dx_axis^2`.
fn central_differences(grid_points: &[usize], h: &[f64], v: &[f64], axis: usize) -> (Vec<f64>, Vec<f64>) {
    let dim = grid_points.len();
    let stride: usize = grid_points[axis + 1..dim].iter().product();
    let m = grid_points[axis];
    let n = v.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for p in 0..n {
        let i = (p / stride) % m;
        let up = if i + 1 == m { p + stride - m * stride } else { p + stride };
        let dn = if i == 0 { p + (m - 1) * stride } else { p - stride };
        d1[p] = (v[up] - v[dn]) / (2.0 * h[axis]);
        d2[p] = (v[up] - 2.0 * v[p] + v[dn]) / (h[axis] * h[axis]);
    }
    (d1, d2)
}

/// `int_{R^N \ box} |x - y|^{-N-alpha} dy` for the midpoint box
/// `[-h/2, L - h/2)`, by integrating `r_b(w)^{-alpha}/alpha` over directions.
fn exterior_weight(x: &[f64], lo: &[f64], hi: &[f64], alpha: f64) -> f64 {
    let exit = |dir: &[f64]| -> f64 {
        let mut t = f64::INFINITY;
        for a in 0..x.len() {
            if dir[a] > 0.0 {
                t = t.min((hi[a] - x[a]) / dir[a]);
            } else if dir[a] < 0.0 {
                t = t.min((lo[a] - x[a]) / dir[a]);
            }
        }
        t
    };
    match x.len() {
        1 => ((x[0] - lo[0]).powf(-alpha) + (hi[0] - x[0]).powf(-alpha)) / alpha,
        2 => {
            let n = 4096;
            let dphi = std::f64::consts::TAU / n as f64;
            let s: f64 = (0..n)
                .map(|i| {
                    let phi = (i as f64 + 0.5) * dphi;
                    exit(&[phi.cos(), phi.sin()]).powf(-alpha)
                })
                .sum();
            s * dphi / alpha
        }
        _ => {
            let (nt, np) = (256, 512);
            let dmu = 2.0 / nt as f64;
            let dphi = std::f64::consts::TAU / np as f64;
            let mut s = 0.0;
            for i in 0..nt {
                let mu = -1.0 + (i as f64 + 0.5) * dmu;
                let st = (1.0 - mu * mu).sqrt();
                for j in 0..np {
                    let phi = (j as f64 + 0.5) * dphi;
                    s += exit(&[st * phi.cos(), st * phi.sin(), mu]).powf(-alpha);
                }
            }
            s * dmu * dphi / alpha
        }
    }
}

/// Midpoint cubature of `C_alpha P.V. int (f(x) - f(y))/|x - y|^{N+alpha} dy`.
///
/// `f` must be constant (to 1e-8 of its variation) on the outermost grid
/// layer; it is extended by that constant outside the box, whose exterior
/// contribution is added in closed form.
pub fn lambda_alpha_quadrature<T: Scalar>(
    f: &PhysicalField<T>,
    alpha: T,
    spec: &QuadratureSpec<T>,
) -> Result<PhysicalField<T>> {
    spec.validate()?;
    if !(alpha < T::lit(2.0)) {
        return Err(Error::UnsupportedOrder(alpha.to_f64_lossy()));
    }
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha.to_f64_lossy(),
            reason: "quadrature order must be positive",
        });
    }
    let f = restrict(f, spec.subsample)?;
    let (g, _) = localized_part(&f)?;
    let grid = g.grid();
    check_pairs(grid, MAX_PAIRS)?;
    let dim = grid.dim();
    let a = alpha.to_f64_lossy();
    let h = spacing_f64(grid);
    let cell: f64 = h.iter().product();
    let v = to_f64(g.values());
    let table = DisplacementTable::new(grid, |_, r| r.powf(-(dim as f64) - a));
    let ones = vec![1.0; grid.len()];
    let lo: Vec<f64> = h.iter().map(|&hh| -hh / 2.0).collect();
    let hi: Vec<f64> = (0..dim)
        .map(|ax| grid.lengths()[ax].to_f64_lossy() - h[ax] / 2.0)
        .collect();

    let mut correction = vec![0.0; grid.len()];
    if spec.singular_correction {
        for axis in 0..dim {
            let defect = lattice_defect(
                &h,
                DefectModel {
                    power: dim as f64 + a,
                    moment: Some(axis),
                },
            );
            let (_, d2) = central_differences(grid.points(), &h, &v, axis);
            for (c, dd) in correction.iter_mut().zip(d2) {
                *c += -0.5 * dd * defect;
            }
        }
    }

    let scale = lambda_constant(dim, a);
    let out: Vec<T> = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let x = padded_index(grid, p);
            let box_weight = table.apply_at(x, &ones);
            let conv = table.apply_at(x, &v);
            let mut s = (v[p] * box_weight - conv) * cell + correction[p];
            if v[p] != 0.0 {
                let xc: Vec<f64> = (0..dim).map(|ax| x[ax] as f64 * h[ax]).collect();
                s += v[p] * exterior_weight(&xc, &lo, &hi, a);
            }
            T::lit(scale * s)
        })
        .collect();
    PhysicalField::from_values(grid, 1, out)
}

/// Midpoint cubature of `R_j f(x) = c_N P.V. int (x_j - y_j) f(y)/|x-y|^{N+1} dy`
/// for every `j`, returned as an N-component field.
pub fn riesz_quadrature<T: Scalar>(
    f: &PhysicalField<T>,
    spec: &QuadratureSpec<T>,
) -> Result<PhysicalField<T>> {
    spec.validate()?;
    let f = restrict(f, spec.subsample)?;
    let (g, _) = localized_part(&f)?;
    let grid = g.grid();
    check_pairs(grid, MAX_PAIRS)?;
    let dim = grid.dim();
    let h = spacing_f64(grid);
    let cell: f64 = h.iter().product();
    let v = to_f64(g.values());
    let scale = riesz_constant(dim);
    let mut values = Vec::with_capacity(dim * grid.len());
    for j in 0..dim {
        let table = DisplacementTable::new(grid, |z, r| z[j] * r.powi(-(dim as i32) - 1));
        let correction: Vec<f64> = if spec.singular_correction {
            let defect = lattice_defect(
                &h,
                DefectModel {
                    power: dim as f64 + 1.0,
                    moment: Some(j),
                },
            );
            let (d1, _) = central_differences(grid.points(), &h, &v, j);
            d1.into_iter().map(|d| -d * defect).collect()
        } else {
            vec![0.0; grid.len()]
        };
        let comp: Vec<T> = (0..grid.len())
            .into_par_iter()
            .map(|p| {
                let x = padded_index(grid, p);
                T::lit(scale * (table.apply_at(x, &v) * cell + correction[p]))
            })
            .collect();
        values.extend(comp);
    }
    PhysicalField::from_values(grid, dim, values)
}

/// Both sides of the Riesz symmetrization identity
/// `int phi f R f = (c_N/2) int int (x-y)(phi(x)-phi(y)) f(x) f(y) / |x-y|^{N+1}`,
/// one entry per component.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrizationReport<T: Scalar> {
    /// Spectral side, `int phi f R_j f dx`.
    pub lhs: Vec<T>,
    /// Double-sum side.
    pub rhs: Vec<T>,
    /// `|lhs - rhs| / |rhs|` (Euclidean over components); the absolute
    /// difference when `rhs` vanishes.
    pub rel_err: T,
}

pub fn riesz_symmetrization_check<T: Scalar>(
    f: &PhysicalField<T>,
    phi: &PhysicalField<T>,
    spec: &QuadratureSpec<T>,
) -> Result<SymmetrizationReport<T>> {
    spec.validate()?;
    f.require_scalar()?;
    phi.require_scalar()?;
    if f.grid() != phi.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let dim = grid.dim();

    let rf = inverse_unchecked(&riesz_transform(&forward_transform(f)?)?);
    let cell = grid.cell_volume();
    let lhs: Vec<T> = (0..dim)
        .map(|j| {
            rf.component(j)
                .iter()
                .zip(f.values())
                .zip(phi.values())
                .map(|((&r, &fv), &pv)| pv * fv * r)
                .sum::<T>()
                * cell
        })
        .collect();

    let fc = restrict(f, spec.subsample)?;
    let pc = restrict(phi, spec.subsample)?;
    let coarse = fc.grid();
    let limit = DOUBLE_SUM_POINTS_PER_AXIS.pow(dim as u32);
    if coarse.len() > limit {
        return Err(Error::TooExpensive {
            points: coarse.len(),
            limit,
        });
    }
    let h = spacing_f64(coarse);
    let fv = to_f64(fc.values());
    let pv = to_f64(pc.values());
    let cellc: f64 = h.iter().product();
    let cn = riesz_constant(dim);

    let mut rhs = Vec::with_capacity(dim);
    for j in 0..dim {
        let table = DisplacementTable::new(coarse, |z, r| z[j] * r.powi(-(dim as i32) - 1));
        // sum_x f(x) [phi(x) sum_y K f(y) - sum_y K phi f(y)]
        let pf: Vec<f64> = pv.iter().zip(&fv).map(|(a, b)| a * b).collect();
        let per_point: Vec<f64> = (0..coarse.len())
            .into_par_iter()
            .map(|p| {
                if fv[p] == 0.0 {
                    return 0.0;
                }
                let x = padded_index(coarse, p);
                fv[p] * (pv[p] * table.apply_at(x, &fv) - table.apply_at(x, &pf))
            })
            .collect();
        let mut total: f64 = per_point.iter().sum::<f64>() * cellc * cellc;
        if spec.singular_correction {
            let defect = lattice_defect(
                &h,
                DefectModel {
                    power: dim as f64 + 1.0,
                    moment: Some(j),
                },
            );
            let (dphi, _) = central_differences(coarse.points(), &h, &pv, j);
            let local: f64 = dphi.iter().zip(&fv).map(|(d, f)| d * f * f).sum();
            total += local * defect * cellc;
        }
        rhs.push(T::lit(0.5 * cn * total));
    }

    let diff = lhs
        .iter()
        .zip(&rhs)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<T>()
        .sqrt();
    let norm = rhs.iter().map(|&b| b * b).sum::<T>().sqrt();
    let rel_err = if norm > T::zero() { diff / norm } else { diff };
    Ok(SymmetrizationReport { lhs, rhs, rel_err })
}

/// Interaction energy `J_N = int int Theta(x) Theta(y) |x-y|^{-(N-1)} dx dy`.
///
/// In 1-D the kernel is identically 1 and the diagonal is included, so
/// `J_1 = (int Theta)^2` exactly.
pub fn virial_rhs<T: Scalar>(theta: &PhysicalField<T>, spec: &QuadratureSpec<T>) -> Result<T> {
    spec.validate()?;
    theta.require_scalar()?;
    let scale = theta.max_abs();
    let min = theta.min();
    if min < -T::lit(1e-10) * scale.max(T::one()) {
        return Err(Error::SignViolation {
            value: min.to_f64_lossy(),
        });
    }
    let th = restrict(theta, spec.subsample)?;
    let grid = th.grid();
    let dim = grid.dim();
    let limit = DOUBLE_SUM_POINTS_PER_AXIS.pow(dim as u32);
    if grid.len() > limit {
        return Err(Error::TooExpensive {
            points: grid.len(),
            limit,
        });
    }
    let h = spacing_f64(grid);
    let cell: f64 = h.iter().product();
    let v = to_f64(th.values());
    if dim == 1 {
        let m: f64 = v.iter().sum::<f64>() * cell;
        return Ok(T::lit(m * m));
    }
    let table = DisplacementTable::new(grid, |_, r| r.powi(1 - dim as i32));
    let per_point: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            if v[p] == 0.0 {
                0.0
            } else {
                v[p] * table.apply_at(padded_index(grid, p), &v)
            }
        })
        .collect();
    let mut total = per_point.iter().sum::<f64>() * cell * cell;
    if spec.singular_correction {
        let defect = lattice_defect(
            &h,
            DefectModel {
                power: dim as f64 - 1.0,
                moment: None,
            },
        );
        total += v.iter().map(|x| x * x).sum::<f64>() * cell * defect;
    }
    Ok(T::lit(total))
}

/// Interior mask: points with `margin L_i <= x_i <= (1 - margin) L_i` on all axes.
pub fn interior_mask<T: Scalar>(grid: &Grid<T>, margin: T) -> Vec<bool> {
    (0..grid.len())
        .map(|p| {
            let x = grid.coordinate(p);
            (0..grid.dim()).all(|a| {
                let l = grid.lengths()[a];
                x[a] >= margin * l && x[a] <= (T::one() - margin) * l
            })
        })
        .collect()
}

/// `max_interior |a - b| / max_interior |b|` over all components.
pub fn interior_relative_error<T: Scalar>(
    a: &PhysicalField<T>,
    reference: &PhysicalField<T>,
    margin: T,
) -> Result<T> {
    if a.grid() != reference.grid() || a.components() != reference.components() {
        return Err(Error::GridMismatch);
    }
    let mask = interior_mask(a.grid(), margin);
    let mut num = T::zero();
    let mut den = T::zero();
    for c in 0..a.components() {
        for ((&x, &y), &m) in a.component(c).iter().zip(reference.component(c)).zip(&mask) {
            if m {
                num = num.max((x - y).abs());
                den = den.max(y.abs());
            }
        }
    }
    Ok(if den > T::zero() { num / den } else { num })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(grid: &Grid<f64>, width: f64) -> PhysicalField<f64> {
        let c = grid.center();
        PhysicalField::from_fn(grid, |x| {
            let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            (-r2 / (2.0 * width * width)).exp()
        })
    }

    #[test]
    fn constants_match_known_values() {
        assert!((riesz_constant(1) - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!((riesz_constant(2) - 0.5 / std::f64::consts::PI).abs() < 1e-15);
        // C_1 in 1-D is 1/pi
        assert!((lambda_constant(1, 1.0) - 1.0 / std::f64::consts::PI).abs() < 1e-14);
        // C_1 in 2-D is 1/(2 pi)
        assert!((lambda_constant(2, 1.0) - 0.5 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn spec_validation() {
        let mut s = QuadratureSpec::<f64>::default();
        s.interior_margin = 0.5;
        assert!(s.validate().is_err());
        let s = QuadratureSpec::<f64>::default().with_subsample(0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn constant_input_gives_zero() {
        let g = Grid::<f64>::cube(1, 64, 20.0).unwrap();
        let f = PhysicalField::constant(&g, 3.0);
        let out = lambda_alpha_quadrature(&f, 0.7, &QuadratureSpec::default()).unwrap();
        assert!(out.max_abs() <= 1e-14 * 3.0);
        let r = riesz_quadrature(&f, &QuadratureSpec::default()).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn rejects_unlocalized_and_high_order() {
        let g = Grid::<f64>::cube(1, 64, 20.0).unwrap();
        let f = PhysicalField::from_fn(&g, |x| x[0]);
        assert!(matches!(
            lambda_alpha_quadrature(&f, 1.0, &QuadratureSpec::default()),
            Err(Error::NotLocalized { .. })
        ));
        let b = bump(&g, 1.0);
        assert!(matches!(
            lambda_alpha_quadrature(&b, 2.0, &QuadratureSpec::default()),
            Err(Error::UnsupportedOrder(_))
        ));
    }

    #[test]
    fn virial_in_one_dimension_is_mass_squared() {
        let g = Grid::<f64>::cube(1, 64, 20.0).unwrap();
        let b = bump(&g, 1.0);
        let m = b.integral(0);
        let j = virial_rhs(&b, &QuadratureSpec::default()).unwrap();
        assert!((j - m * m).abs() <= 1e-13 * m * m);
        assert_eq!(
            virial_rhs(&PhysicalField::zeros(&g, 1), &QuadratureSpec::default()).unwrap(),
            0.0
        );
        assert!(matches!(
            virial_rhs(&b.map(|v| -v), &QuadratureSpec::default()),
            Err(Error::SignViolation { .. })
        ));
    }

    #[test]
    fn double_sums_require_small_grids() {
        let g = Grid::<f64>::cube(2, 128, 20.0).unwrap();
        let b = bump(&g, 1.0);
        assert!(matches!(
            virial_rhs(&b, &QuadratureSpec::default()),
            Err(Error::TooExpensive { .. })
        ));
        assert!(virial_rhs(&b, &QuadratureSpec::default().with_subsample(2)).is_ok());
    }

    #[test]
    fn defect_vanishes_for_smooth_integrands() {
        // power 0 without a moment: lattice sum of a Gaussian is spectrally exact,
        // so the defect is just the missing j = 0 term h.
        let d = lattice_defect(
            &[0.1],
            DefectModel {
                power: 0.0,
                moment: None,
            },
        );
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn quadratures_track_spectral_operators_in_one_dimension() {
        let g = Grid::<f64>::cube(1, 256, 80.0).unwrap();
        let f = bump(&g, 1.0);
        let hat = forward_transform(&f).unwrap();
        let spec = QuadratureSpec::default();
        let lam = lambda_alpha_quadrature(&f, 1.0, &spec).unwrap();
        let lam_ref = inverse_unchecked(&crate::operators::fractional_laplacian(&hat, 1.0).unwrap());
        assert!(interior_relative_error(&lam, &lam_ref, 0.25).unwrap() < 0.02);
        let r = riesz_quadrature(&f, &spec).unwrap();
        let r_ref = inverse_unchecked(&riesz_transform(&hat).unwrap());
        assert!(interior_relative_error(&r, &r_ref, 0.25).unwrap() < 0.02);
    }
}
