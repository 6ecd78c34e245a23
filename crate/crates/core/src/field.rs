//! Spinor fields on a uniform periodic grid and line grids for
//! characteristic-coordinate profiles.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{lit, Real};

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("number of grid points must be a power of two, got {0}")]
    NotPowerOfTwo(usize),
    #[error("component sample counts differ: u has {u}, v has {v}")]
    LengthMismatch { u: usize, v: usize },
    #[error("half-width L must be positive and finite")]
    BadHalfWidth,
    #[error("line grid needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("line grid endpoints must satisfy xi_min < xi_max")]
    BadInterval,
}

/// Two-component complex field sampled on the uniform periodic grid
/// `x_j = -L + j*h`, `h = 2L/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField<T: Real> {
    u: Vec<Complex<T>>,
    v: Vec<Complex<T>>,
    half_width: T,
    t: T,
}

impl<T: Real> SpinorField<T> {
    pub fn new(u: Vec<Complex<T>>, v: Vec<Complex<T>>, half_width: T) -> Result<Self, GridError> {
        if u.len() != v.len() {
            return Err(GridError::LengthMismatch { u: u.len(), v: v.len() });
        }
        if !u.len().is_power_of_two() {
            return Err(GridError::NotPowerOfTwo(u.len()));
        }
        if half_width <= T::zero() || !half_width.is_finite() {
            return Err(GridError::BadHalfWidth);
        }
        Ok(Self { u, v, half_width, t: T::zero() })
    }

    pub fn zero(n: usize, half_width: T) -> Result<Self, GridError> {
        Self::new(vec![Complex::default(); n], vec![Complex::default(); n], half_width)
    }

    /// Builds a field from a closure giving (u, v) at each grid point.
    pub fn from_fn(
        n: usize,
        half_width: T,
        mut f: impl FnMut(T) -> (Complex<T>, Complex<T>),
    ) -> Result<Self, GridError> {
        let mut field = Self::zero(n, half_width)?;
        for j in 0..n {
            let (a, b) = f(field.x(j));
            field.u[j] = a;
            field.v[j] = b;
        }
        Ok(field)
    }

    /// Gaussian hump in the first component:
    /// `u = A exp(-(x-c)^2 / (2 w^2)) exp(i k0 x)`, `v = 0`.
    pub fn gaussian(
        n: usize,
        half_width: T,
        amplitude: T,
        width: T,
        center: T,
        phase_k: T,
    ) -> Result<Self, GridError> {
        Self::from_fn(n, half_width, |x| {
            let arg = -(x - center) * (x - center) / (lit::<T>(2.0) * width * width);
            let phase = Complex::new(T::zero(), phase_k * x).exp();
            (phase * arg.exp() * amplitude, Complex::default())
        })
    }

    /// Sech hump in the first component: `u = A sech(x/w)`, `v = 0`.
    pub fn sech(n: usize, half_width: T, amplitude: T, width: T) -> Result<Self, GridError> {
        Self::from_fn(n, half_width, |x| {
            let s = amplitude / (x / width).cosh();
            (Complex::new(s, T::zero()), Complex::default())
        })
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// Half-width L of the periodic domain [-L, L).
    pub fn half_width(&self) -> T {
        self.half_width
    }

    /// Grid spacing h = 2L/N.
    pub fn spacing(&self) -> T {
        lit::<T>(2.0) * self.half_width / T::from_usize(self.n()).unwrap()
    }

    pub fn x(&self, j: usize) -> T {
        -self.half_width + self.spacing() * T::from_usize(j).unwrap()
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn set_time(&mut self, t: T) {
        self.t = t;
    }

    pub fn u(&self) -> &[Complex<T>] {
        &self.u
    }

    pub fn v(&self) -> &[Complex<T>] {
        &self.v
    }

    pub fn u_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.u
    }

    pub fn v_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.v
    }

    pub fn components_mut(&mut self) -> (&mut [Complex<T>], &mut [Complex<T>]) {
        (&mut self.u, &mut self.v)
    }

    /// Largest pointwise density |u|^2 + |v|^2.
    pub fn max_density(&self) -> T {
        self.u.iter().zip(&self.v).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).fold(T::zero(), T::max)
    }

    /// Radius of the smallest centered interval holding every sample whose
    /// density exceeds `rel_floor` times the peak density.
    pub fn data_radius(&self, rel_floor: T) -> T {
        let floor = self.max_density() * rel_floor;
        let mut r = T::zero();
        for j in 0..self.n() {
            if self.u[j].norm_sqr() + self.v[j].norm_sqr() > floor {
                r = r.max(self.x(j).abs());
            }
        }
        r
    }

    /// Fraction of the total density held within `cells` grid points of the
    /// periodic seam at x = -L (equivalently x = L).
    pub fn boundary_mass_fraction(&self, cells: usize) -> T {
        let n = self.n();
        let total: T = (0..n).map(|j| self.u[j].norm_sqr() + self.v[j].norm_sqr()).sum();
        if total == T::zero() {
            return T::zero();
        }
        let mut near = T::zero();
        for j in 0..n {
            if j < cells || j >= n - cells {
                near += self.u[j].norm_sqr() + self.v[j].norm_sqr();
            }
        }
        near / total
    }

    /// Quadrature-weighted L^2 distance between two fields on the same grid.
    pub fn l2_distance(&self, other: &Self) -> T {
        let h = self.spacing();
        let sum: T = (0..self.n())
            .map(|j| (self.u[j] - other.u[j]).norm_sqr() + (self.v[j] - other.v[j]).norm_sqr())
            .sum();
        (sum * h).sqrt()
    }

    pub fn max_pointwise_distance(&self, other: &Self) -> T {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn has_non_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite())
    }
}

/// Uniform non-periodic grid on [xi_min, xi_max], endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGrid<T: Real> {
    xi_min: T,
    xi_max: T,
    n: usize,
}

impl<T: Real> LineGrid<T> {
    pub fn new(xi_min: T, xi_max: T, n: usize) -> Result<Self, GridError> {
        if n < 2 {
            return Err(GridError::TooFewPoints(n));
        }
        if xi_min >= xi_max || !xi_min.is_finite() || !xi_max.is_finite() {
            return Err(GridError::BadInterval);
        }
        Ok(Self { xi_min, xi_max, n })
    }

    pub fn symmetric(half_width: T, n: usize) -> Result<Self, GridError> {
        Self::new(-half_width, half_width, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn xi_min(&self) -> T {
        self.xi_min
    }

    pub fn xi_max(&self) -> T {
        self.xi_max
    }

    pub fn spacing(&self) -> T {
        (self.xi_max - self.xi_min) / T::from_usize(self.n - 1).unwrap()
    }

    pub fn xi(&self, j: usize) -> T {
        self.xi_min + self.spacing() * T::from_usize(j).unwrap()
    }

    /// Grid stretched by `factor` about the origin (same point count).
    pub fn stretched(&self, factor: T) -> Self {
        Self { xi_min: self.xi_min * factor, xi_max: self.xi_max * factor, n: self.n }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        let err = SpinorField::<f64>::zero(1000, 10.0).unwrap_err();
        assert_eq!(err, GridError::NotPowerOfTwo(1000));
    }

    #[test]
    fn grid_spacing_is_uniform() {
        let f = SpinorField::<f64>::zero(256, 20.0).unwrap();
        assert_eq!(f.spacing(), 40.0 / 256.0);
        assert_eq!(f.x(0), -20.0);
        let diffs: Vec<f64> = (1..256).map(|j| f.x(j) - f.x(j - 1)).collect();
        for d in diffs {
            assert!((d - f.spacing()).abs() < 1e-14);
        }
    }

    #[test]
    fn data_radius_tracks_support() {
        let f = SpinorField::<f64>::gaussian(512, 40.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let r = f.data_radius(1e-24);
        assert!(r > 4.0 && r < 9.0, "r = {r}");
    }

    #[test]
    fn line_grid_endpoints() {
        let g = LineGrid::new(-20.0_f64, 20.0, 2048).unwrap();
        assert!((g.xi(0) + 20.0).abs() < 1e-15);
        assert!((g.xi(2047) - 20.0).abs() < 1e-12);
    }
}
