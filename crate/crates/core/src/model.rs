//! The nonlinear Dirac model family: the gauge-invariant polynomial potential
//! W, its Wirtinger-derivative force terms, named specializations, and the
//! u <-> psi frame change.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::SpinorField;
use crate::scalar::{lit, Real};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("moduli_only flag is {flag} but coefficients give {derived} (alpha3 = {alpha3}, alpha4 = {alpha4})")]
    ModuliFlagMismatch { flag: bool, derived: bool, alpha3: f64, alpha4: f64 },
    #[error("potential coefficients must be finite")]
    NonFiniteCoefficient,
}

/// Coefficients of the gauge-invariant polynomial potential
///
/// ```text
/// W = a1 (|u|^4 + |v|^4) + a2 |u|^2 |v|^2 + a3 (conj(u) v + u conj(v))^2
///   + a4 (|u|^2 + |v|^2)(conj(u) v + u conj(v))
///   + b  (|u|^2 + |v|^2) |u|^2 |v|^2
/// ```
///
/// `moduli_only` records whether W depends on (u, v) through |u|^2 and |v|^2
/// alone (a3 = a4 = 0); the integrator branches on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec<T: Real> {
    pub alpha1: T,
    pub alpha2: T,
    pub alpha3: T,
    pub alpha4: T,
    pub beta_sextic: T,
    moduli_only: bool,
}

impl<T: Real> PotentialSpec<T> {
    /// Builds a spec; the moduli-only flag is derived from the coefficients.
    pub fn new(
        alpha1: T,
        alpha2: T,
        alpha3: T,
        alpha4: T,
        beta_sextic: T,
    ) -> Result<Self, ModelError> {
        for c in [alpha1, alpha2, alpha3, alpha4, beta_sextic] {
            if !c.is_finite() {
                return Err(ModelError::NonFiniteCoefficient);
            }
        }
        let moduli_only = alpha3 == T::zero() && alpha4 == T::zero();
        Ok(Self { alpha1, alpha2, alpha3, alpha4, beta_sextic, moduli_only })
    }

    /// Builds a spec with an explicitly stored moduli-only flag, validating it
    /// against the coefficients.
    pub fn with_flag(
        alpha1: T,
        alpha2: T,
        alpha3: T,
        alpha4: T,
        beta_sextic: T,
        moduli_only: bool,
    ) -> Result<Self, ModelError> {
        let spec = Self::new(alpha1, alpha2, alpha3, alpha4, beta_sextic)?;
        if spec.moduli_only != moduli_only {
            return Err(ModelError::ModuliFlagMismatch {
                flag: moduli_only,
                derived: spec.moduli_only,
                alpha3: alpha3.to_f64().unwrap_or(f64::NAN),
                alpha4: alpha4.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(spec)
    }

    pub fn moduli_only(&self) -> bool {
        self.moduli_only
    }

    /// Massive Thirring model: W = 4 |u|^2 |v|^2.
    pub fn mtm() -> Self {
        Self::new(T::zero(), lit(4.0), T::zero(), T::zero(), T::zero()).unwrap()
    }

    /// Massive Gross-Neveu model: W = 2 (conj(u) v + u conj(v))^2.
    pub fn gross_neveu() -> Self {
        Self::new(T::zero(), T::zero(), lit(2.0), T::zero(), T::zero()).unwrap()
    }

    /// Bragg-resonance coupled-mode model:
    /// W = alpha (|u|^2 + |v|^2)^2 + 2 alpha |u|^2 |v|^2.
    pub fn coupled_mode(alpha: T) -> Self {
        Self::new(alpha, lit::<T>(4.0) * alpha, T::zero(), T::zero(), T::zero()).unwrap()
    }

    /// Photonic model with zero-mean periodic index modulation:
    /// W = alpha (conj(u) v + u conj(v))(|u|^2 + |v|^2)
    ///   + beta ((conj(u) v + u conj(v))^2 - 2 |u|^2 |v|^2).
    pub fn photonic(alpha: T, beta: T) -> Self {
        Self::new(T::zero(), -lit::<T>(2.0) * beta, beta, alpha, T::zero()).unwrap()
    }

    /// Sextic model from the Feshbach-resonance setting:
    /// W = alpha (|u|^2 + |v|^2) |u|^2 |v|^2.
    pub fn feshbach(alpha: T) -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero(), alpha).unwrap()
    }

    /// Free linear equation (W = 0).
    pub fn linear() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero(), T::zero()).unwrap()
    }
}

/// Evaluates W(u, v). Total and real-valued for all complex inputs.
pub fn eval_potential<T: Real>(spec: &PotentialSpec<T>, u: Complex<T>, v: Complex<T>) -> T {
    let r1 = u.norm_sqr();
    let r2 = v.norm_sqr();
    // s = conj(u) v + u conj(v) = 2 Re(conj(u) v)
    let s = lit::<T>(2.0) * (u.conj() * v).re;
    spec.alpha1 * (r1 * r1 + r2 * r2)
        + spec.alpha2 * r1 * r2
        + spec.alpha3 * s * s
        + spec.alpha4 * (r1 + r2) * s
        + spec.beta_sextic * (r1 + r2) * r1 * r2
}

/// Closed-form Wirtinger force (dW/d conj(u), dW/d conj(v)), differentiating
/// each monomial of W by hand with the convention
/// d/d conj(u) = (d/d Re(u) + i d/d Im(u)) / 2.
pub fn eval_force<T: Real>(
    spec: &PotentialSpec<T>,
    u: Complex<T>,
    v: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    let two = lit::<T>(2.0);
    let r1 = u.norm_sqr();
    let r2 = v.norm_sqr();
    let s = two * (u.conj() * v).re;

    // dW/d conj(u) = (2 a1 r1 + a2 r2 + a4 s + b r2 (r2 + 2 r1)) u
    //             + (2 a3 s + a4 (r1 + r2)) v
    let cu = two * spec.alpha1 * r1
        + spec.alpha2 * r2
        + spec.alpha4 * s
        + spec.beta_sextic * r2 * (r2 + two * r1);
    let cross = two * spec.alpha3 * s + spec.alpha4 * (r1 + r2);
    let fu = u.scale(cu) + v.scale(cross);

    let cv = two * spec.alpha1 * r2
        + spec.alpha2 * r1
        + spec.alpha4 * s
        + spec.beta_sextic * r1 * (r1 + two * r2);
    let fv = v.scale(cv) + u.scale(cross);

    (fu, fv)
}

/// Rates of the moduli-only phase flow: (dW/d(|u|^2), dW/d(|v|^2)) evaluated
/// at fixed moduli. Only meaningful when `spec.moduli_only()`.
pub fn phase_rates<T: Real>(spec: &PotentialSpec<T>, r1: T, r2: T) -> (T, T) {
    let two = lit::<T>(2.0);
    let a =
        two * spec.alpha1 * r1 + spec.alpha2 * r2 + spec.beta_sextic * (two * r1 * r2 + r2 * r2);
    let b =
        two * spec.alpha1 * r2 + spec.alpha2 * r1 + spec.beta_sextic * (two * r1 * r2 + r1 * r1);
    (a, b)
}

/// The constant frame change psi = T u with T = [[1, -1], [-i, -i]] and its
/// inverse; T turns the first-order system into the form with the off-diagonal
/// derivative matrix.
#[derive(Debug, Clone, Copy)]
pub struct FrameTransform<T: Real> {
    pub forward: [[Complex<T>; 2]; 2],
    pub inverse: [[Complex<T>; 2]; 2],
}

impl<T: Real> Default for FrameTransform<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> FrameTransform<T> {
    pub fn new() -> Self {
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        let half = Complex::new(lit::<T>(0.5), T::zero());
        let forward = [[one, -one], [-i, -i]];
        // inverse = [[1/2, i/2], [-1/2, i/2]]
        let inverse = [[half, i * half], [-half, i * half]];
        Self { forward, inverse }
    }

    fn apply(mat: &[[Complex<T>; 2]; 2], a: Complex<T>, b: Complex<T>) -> (Complex<T>, Complex<T>) {
        (mat[0][0] * a + mat[0][1] * b, mat[1][0] * a + mat[1][1] * b)
    }
}

/// Applies T pointwise, producing the psi-frame field.
pub fn to_psi_frame<T: Real>(field: &SpinorField<T>) -> SpinorField<T> {
    let tr = FrameTransform::new();
    let mut out = field.clone();
    let (u, v) = out.components_mut();
    for j in 0..u.len() {
        let (a, b) = FrameTransform::apply(&tr.forward, u[j], v[j]);
        u[j] = a;
        v[j] = b;
    }
    out
}

/// Applies T^{-1} pointwise, recovering the u-frame field.
pub fn from_psi_frame<T: Real>(field: &SpinorField<T>) -> SpinorField<T> {
    let tr = FrameTransform::new();
    let mut out = field.clone();
    let (u, v) = out.components_mut();
    for j in 0..u.len() {
        let (a, b) = FrameTransform::apply(&tr.inverse, u[j], v[j]);
        u[j] = a;
        v[j] = b;
    }
    out
}
