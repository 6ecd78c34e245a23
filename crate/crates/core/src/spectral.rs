//! Discrete Fourier machinery shared by the linear propagator, the resolvent
//! and the spectral derivatives used in the diagnostics.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::field::SpinorField;
use crate::scalar::Real;

/// Cached FFT plans plus the signed wavenumbers `k_m = pi m / L`,
/// `m = -N/2 .. N/2 - 1`, stored in FFT bin order.
pub struct Spectral<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    wavenumbers: Vec<T>,
}

impl<T: Real> Spectral<T> {
    pub fn new(n: usize, half_width: T) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let base = T::PI() / half_width;
        let wavenumbers = (0..n)
            .map(|m| {
                let signed = if m < n / 2 { m as i64 } else { m as i64 - n as i64 };
                base * T::from_i64(signed).unwrap()
            })
            .collect();
        Self { n, forward, inverse, wavenumbers }
    }

    pub fn for_field(field: &SpinorField<T>) -> Self {
        Self::new(field.n(), field.half_width())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    pub fn forward(&self, data: &mut [Complex<T>]) {
        debug_assert_eq!(data.len(), self.n);
        self.forward.process(data);
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) {
        debug_assert_eq!(data.len(), self.n);
        self.inverse.process(data);
        let scale = T::one() / T::from_usize(self.n).unwrap();
        for z in data.iter_mut() {
            *z = z.scale(scale);
        }
    }

    /// Spectral derivative; the Nyquist mode is zeroed as usual.
    pub fn derivative(&self, data: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut modes = data.to_vec();
        self.forward(&mut modes);
        for (m, z) in modes.iter_mut().enumerate() {
            if m == self.n / 2 {
                *z = Complex::default();
            } else {
                *z *= Complex::new(T::zero(), self.wavenumbers[m]);
            }
        }
        let mut out = modes;
        self.inverse(&mut out);
        out
    }

    /// Applies a mode-wise 2x2 matrix multiplier to a spinor field in place.
    pub fn apply_multiplier(
        &self,
        field: &mut SpinorField<T>,
        multiplier: impl Fn(T) -> [[Complex<T>; 2]; 2],
    ) {
        let (u, v) = field.components_mut();
        self.forward(u);
        self.forward(v);
        for m in 0..self.n {
            let mat = multiplier(self.wavenumbers[m]);
            let a = u[m];
            let b = v[m];
            u[m] = mat[0][0] * a + mat[0][1] * b;
            v[m] = mat[1][0] * a + mat[1][1] * b;
        }
        self.inverse(u);
        self.inverse(v);
    }
}
