//! Exact linear theory of the one-dimensional Dirac operator
//! `H = [[-i d/dx, -1], [-1, i d/dx]]`: Fourier symbol, unitary propagator,
//! the resolvent in its Fourier-multiplier and Green's-function forms, and a
//! dispersive decay-rate probe.

use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::field::SpinorField;
use crate::fit::{loglog_fit, FitError, PowerLawFit};
use crate::scalar::{lit, Real};
use crate::spectral::Spectral;

#[derive(Debug, Error, PartialEq)]
pub enum LinError {
    #[error("spectral parameter on spectrum: lambda = {re} + {im}i is within {dist} of (-inf,-1] u [1,inf)")]
    OnSpectrum { re: f64, im: f64, dist: f64 },
    #[error("domain too small: data radius {radius} + evolution time {t_max} exceeds half-width {half_width}")]
    DomainTooSmall { radius: f64, t_max: f64, half_width: f64 },
    #[error("decay times must be strictly increasing and at least 1")]
    BadTimes,
    #[error("field norm is identically zero")]
    ZeroField,
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// The 2x2 Fourier symbol `M(k) = [[k, -1], [-1, -k]]` of H, with its
/// eigenvalue branch `omega(k) = sqrt(1 + k^2)` and orthonormal eigenvectors.
#[derive(Debug, Clone, Copy)]
pub struct DiracSymbol<T: Real> {
    pub k: T,
}

impl<T: Real> DiracSymbol<T> {
    pub fn new(k: T) -> Self {
        Self { k }
    }

    pub fn matrix(&self) -> [[T; 2]; 2] {
        [[self.k, -T::one()], [-T::one(), -self.k]]
    }

    pub fn omega(&self) -> T {
        (T::one() + self.k * self.k).sqrt()
    }

    /// Orthonormal eigenvectors for +omega and -omega. The +omega vector is
    /// written as (1, -1/(k + omega)) to avoid cancellation for large k.
    pub fn eigenvectors(&self) -> ([T; 2], [T; 2]) {
        let om = self.omega();
        let plus = [T::one(), -T::one() / (self.k + om)];
        let minus = [T::one(), self.k + om];
        (normalize(plus), normalize(minus))
    }

    /// Matrix exponential `exp(-i t M(k)) = cos(wt) I - i sin(wt)/w M(k)`.
    pub fn propagator(&self, t: T) -> [[Complex<T>; 2]; 2] {
        let om = self.omega();
        let c = (om * t).cos();
        let s = (om * t).sin() / om;
        let jc = |re: T, im: T| Complex::new(re, im);
        [[jc(c, -s * self.k), jc(T::zero(), s)], [jc(T::zero(), s), jc(c, s * self.k)]]
    }

    /// Resolvent multiplier `(M(k) - lambda)^{-1}`.
    pub fn resolvent(&self, lambda: Complex<T>) -> [[Complex<T>; 2]; 2] {
        let k = Complex::new(self.k, T::zero());
        let det = lambda * lambda - Complex::new(T::one(), T::zero()) - k * k;
        [
            [-(k + lambda) / det, Complex::new(T::one(), T::zero()) / det],
            [Complex::new(T::one(), T::zero()) / det, (k - lambda) / det],
        ]
    }
}

fn normalize<T: Real>(v: [T; 2]) -> [T; 2] {
    let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / norm, v[1] / norm]
}

/// Distance from lambda to the continuous spectrum (-inf,-1] u [1,inf).
pub fn spectrum_distance<T: Real>(lambda: Complex<T>) -> T {
    let re = lambda.re.abs();
    if re >= T::one() {
        lambda.im.abs()
    } else {
        ((T::one() - re) * (T::one() - re) + lambda.im * lambda.im).sqrt()
    }
}

fn reject_on_spectrum<T: Real>(lambda: Complex<T>) -> Result<(), LinError> {
    let dist = spectrum_distance(lambda);
    if dist < lit(1e-9) {
        return Err(LinError::OnSpectrum {
            re: lambda.re.to_f64().unwrap(),
            im: lambda.im.to_f64().unwrap(),
            dist: dist.to_f64().unwrap(),
        });
    }
    Ok(())
}

/// Principal root of `kappa^2 + lambda^2 = 1` with Re(kappa) > 0.
pub fn kappa<T: Real>(lambda: Complex<T>) -> Complex<T> {
    let k = (Complex::new(T::one(), T::zero()) - lambda * lambda).sqrt();
    if k.re < T::zero() {
        -k
    } else {
        k
    }
}

/// A spectral parameter off the continuous spectrum together with its
/// exponent root: `kappa^2 + lambda^2 = 1`, `Re(kappa) > 0`.
#[derive(Debug, Clone, Copy)]
pub struct ResolventQuery<T: Real> {
    pub lambda: Complex<T>,
    pub kappa: Complex<T>,
}

impl<T: Real> ResolventQuery<T> {
    pub fn new(lambda: Complex<T>) -> Result<Self, LinError> {
        reject_on_spectrum(lambda)?;
        Ok(Self { lambda, kappa: kappa(lambda) })
    }
}

/// Applies the free semi-group `exp(-i t H)` mode by mode. Unitary on L^2.
pub fn propagate_free<T: Real>(field: &SpinorField<T>, t: T) -> SpinorField<T> {
    let sp = Spectral::for_field(field);
    let mut out = field.clone();
    sp.apply_multiplier(&mut out, |k| DiracSymbol::new(k).propagator(t));
    out.set_time(field.time() + t);
    out
}

/// Resolvent `(H - lambda)^{-1}` as a Fourier multiplier.
pub fn resolvent_fourier<T: Real>(
    field: &SpinorField<T>,
    lambda: Complex<T>,
) -> Result<SpinorField<T>, LinError> {
    reject_on_spectrum(lambda)?;
    let sp = Spectral::for_field(field);
    let mut out = field.clone();
    sp.apply_multiplier(&mut out, |k| DiracSymbol::new(k).resolvent(lambda));
    Ok(out)
}

/// Relative boundary-mass threshold above which the Green's-function
/// convolution warns that the decaying-data assumption is dubious.
const BOUNDARY_MASS_WARN: f64 = 1e-8;

/// Resolvent `(H - lambda)^{-1}` evaluated as a convolution with the explicit
/// Green's kernel
///
/// ```text
/// G(z) = e^{-kappa |z|} / (2 kappa) * [[lambda + i kappa sgn(z), -1],
///                                      [-1, lambda - i kappa sgn(z)]]
/// ```
///
/// by trapezoid quadrature in y with Euler-Maclaurin corrections for the kink
/// of the kernel at y = x. The corrections use spectral derivatives of the
/// data only, keeping this route independent of `resolvent_fourier`.
pub fn resolvent_green<T: Real>(
    field: &SpinorField<T>,
    lambda: Complex<T>,
) -> Result<SpinorField<T>, LinError> {
    let query = ResolventQuery::new(lambda)?;
    let boundary = field.boundary_mass_fraction(10);
    if boundary > lit(BOUNDARY_MASS_WARN) {
        log::warn!(
            "resolvent_green: boundary mass fraction {:e} exceeds {:e}; data is not negligible near the domain edge",
            boundary.to_f64().unwrap(),
            BOUNDARY_MASS_WARN
        );
    }

    let n = field.n();
    let h = field.spacing();
    let kp = query.kappa;
    let half_inv_kappa = Complex::new(lit::<T>(0.5), T::zero()) / kp;
    let half_i = Complex::new(T::zero(), lit::<T>(0.5));

    // Per-entry kernel split G = (alpha + beta sgn(z)) e^{-kappa |z|} with
    // alpha_diag = lambda/(2 kappa), beta_diag = +- i/2, alpha_off = -1/(2 kappa).
    let alpha_d = lambda * half_inv_kappa;
    let alpha_o = -half_inv_kappa;

    let sp = Spectral::for_field(field);
    let du1 = sp.derivative(field.u());
    let du2: Vec<Complex<T>> = sp.derivative(&du1);
    let du3: Vec<Complex<T>> = sp.derivative(&du2);
    let dv1 = sp.derivative(field.v());
    let dv2: Vec<Complex<T>> = sp.derivative(&dv1);
    let dv3: Vec<Complex<T>> = sp.derivative(&dv2);

    let u = field.u();
    let v = field.v();
    let mut out = field.clone();

    // exp(-kappa |x_i - x_j|) depends on |i - j| only.
    let decay: Vec<Complex<T>> = (0..n).map(|d| (-kp * lit::<T>(d as f64) * h).exp()).collect();

    let h2_12 = h * h / lit::<T>(12.0);
    let h4_720 = h * h * h * h / lit::<T>(720.0);
    let three = lit::<T>(3.0);

    let (ou, ov) = out.components_mut();
    for i in 0..n {
        let mut acc_u = Complex::<T>::default();
        let mut acc_v = Complex::<T>::default();
        for j in 0..n {
            let d = i.abs_diff(j);
            let e = decay[d];
            let sgn = match i.cmp(&j) {
                std::cmp::Ordering::Greater => T::one(),
                std::cmp::Ordering::Equal => T::zero(),
                std::cmp::Ordering::Less => -T::one(),
            };
            let diag_plus = (alpha_d + half_i.scale(sgn)) * e; // (1,1)
            let diag_minus = (alpha_d - half_i.scale(sgn)) * e; // (2,2)
            let off = alpha_o * e;
            acc_u += diag_plus * u[j] + off * v[j];
            acc_v += off * u[j] + diag_minus * v[j];
        }
        acc_u = acc_u.scale(h);
        acc_v = acc_v.scale(h);

        // Euler-Maclaurin kink corrections at y = x_i. For a kernel piece
        // (alpha + beta sgn) e^{-kappa |z|} against data f the derivative
        // jumps are
        //   J1 = 2 alpha kappa f + 2 beta f'
        //   J3 = 2 alpha (kappa^3 f + 3 kappa f'') + 2 beta (3 kappa^2 f' + f''')
        // and I = T - h^2/12 J1 + h^4/720 J3 + O(h^6).
        let two = lit::<T>(2.0);
        let j1_uu = alpha_d.scale(two) * kp * u[i] + half_i.scale(two) * du1[i];
        let j3_uu = alpha_d.scale(two) * (kp * kp * kp * u[i] + kp.scale(three) * du2[i])
            + half_i.scale(two) * ((kp * kp).scale(three) * du1[i] + du3[i]);
        let j1_uv = alpha_o.scale(two) * kp * v[i];
        let j3_uv = alpha_o.scale(two) * (kp * kp * kp * v[i] + kp.scale(three) * dv2[i]);
        acc_u = acc_u - (j1_uu + j1_uv).scale(h2_12) + (j3_uu + j3_uv).scale(h4_720);

        let j1_vv = alpha_d.scale(two) * kp * v[i] - half_i.scale(two) * dv1[i];
        let j3_vv = alpha_d.scale(two) * (kp * kp * kp * v[i] + kp.scale(three) * dv2[i])
            - half_i.scale(two) * ((kp * kp).scale(three) * dv1[i] + dv3[i]);
        let j1_vu = alpha_o.scale(two) * kp * u[i];
        let j3_vu = alpha_o.scale(two) * (kp * kp * kp * u[i] + kp.scale(three) * du2[i]);
        acc_v = acc_v - (j1_vv + j1_vu).scale(h2_12) + (j3_vv + j3_vu).scale(h4_720);

        ou[i] = acc_u;
        ov[i] = acc_v;
    }
    Ok(out)
}

/// One decay sample: time plus the norms recorded for rate fitting.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecaySample<T: Real> {
    pub t: T,
    pub sup_norm: T,
    pub l2_norm: T,
    pub l4_norm: T,
}

/// Result of a free-flight decay measurement.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport<T: Real> {
    pub samples: Vec<DecaySample<T>>,
    pub sup_fit: PowerLawFit<T>,
    pub window: (T, T),
}

impl<T: Real> DecayReport<T> {
    pub fn slope(&self) -> T {
        self.sup_fit.slope
    }

    /// Fitted log-log slope of the L^q norm, q in {2, 4} or usize::MAX for sup.
    pub fn norm_slope(&self, q: usize) -> Result<PowerLawFit<T>, FitError> {
        let ts: Vec<T> = self.samples.iter().map(|s| s.t).collect();
        let ys: Vec<T> = self
            .samples
            .iter()
            .map(|s| match q {
                2 => s.l2_norm,
                4 => s.l4_norm,
                _ => s.sup_norm,
            })
            .collect();
        loglog_fit(&ts, &ys)
    }
}

/// Evolves `initial` freely to each requested time and fits the sup-norm
/// decay rate on a log-log scale.
///
/// Times must be strictly increasing and >= 1; the periodic box must be wide
/// enough that nothing wraps around (group speed is below 1).
pub fn measure_decay<T: Real>(
    initial: &SpinorField<T>,
    times: &[T],
) -> Result<DecayReport<T>, LinError> {
    if times.len() < 3
        || times.windows(2).any(|w| w[1] <= w[0])
        || times.first().map(|&t| t < T::one()).unwrap_or(true)
    {
        return Err(LinError::BadTimes);
    }
    if initial.max_density() == T::zero() {
        return Err(LinError::ZeroField);
    }
    let radius = initial.data_radius(lit(1e-24));
    let t_max = *times.last().unwrap();
    if radius + t_max >= initial.half_width() {
        return Err(LinError::DomainTooSmall {
            radius: radius.to_f64().unwrap(),
            t_max: t_max.to_f64().unwrap(),
            half_width: initial.half_width().to_f64().unwrap(),
        });
    }

    let h = initial.spacing();
    let samples: Vec<DecaySample<T>> = times
        .iter()
        .map(|&t| {
            let ft = propagate_free(initial, t);
            let mut sup = T::zero();
            let mut l2 = T::zero();
            let mut l4 = T::zero();
            for (a, b) in ft.u().iter().zip(ft.v()) {
                sup = sup.max(a.norm()).max(b.norm());
                l2 += a.norm_sqr() + b.norm_sqr();
                l4 += a.norm_sqr() * a.norm_sqr() + b.norm_sqr() * b.norm_sqr();
            }
            DecaySample {
                t,
                sup_norm: sup,
                l2_norm: (l2 * h).sqrt(),
                l4_norm: (l4 * h).powf(lit(0.25)),
            }
        })
        .collect();

    let ts: Vec<T> = samples.iter().map(|s| s.t).collect();
    let sups: Vec<T> = samples.iter().map(|s| s.sup_norm).collect();
    let sup_fit = loglog_fit(&ts, &sups)?;
    Ok(DecayReport { samples, sup_fit, window: (times[0], t_max) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{charge, lp_norm};
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_field(seed: u64, n: usize, half: f64) -> SpinorField<f64> {
        let mut rng = StdRng::seed_from_u64(seed);
        SpinorField::from_fn(n, half, |x| {
            let env = (-x * x / 8.0).exp();
            (
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * env,
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * env,
            )
        })
        .unwrap()
    }

    #[test]
    fn symbol_spectrum_bottom() {
        for &k in &[0.0, 0.5, -2.0, 7.0] {
            let sym = DiracSymbol::<f64>::new(k);
            assert!(sym.omega() >= 1.0);
            if k == 0.0 {
                assert_eq!(sym.omega(), 1.0);
            } else {
                assert!(sym.omega() > 1.0);
            }
        }
    }

    #[test]
    fn symbol_eigenvectors_orthonormal() {
        for &k in &[0.0, 0.3, -1.7, 12.0, -250.0] {
            let sym = DiracSymbol::<f64>::new(k);
            let (ep, em) = sym.eigenvectors();
            let m = sym.matrix();
            let om = sym.omega();
            // eigen relation
            for (e, sign) in [(ep, 1.0), (em, -1.0)] {
                let me = [m[0][0] * e[0] + m[0][1] * e[1], m[1][0] * e[0] + m[1][1] * e[1]];
                assert!((me[0] - sign * om * e[0]).abs() < 1e-12 * om, "k={k}");
                assert!((me[1] - sign * om * e[1]).abs() < 1e-12 * om, "k={k}");
            }
            let dot = ep[0] * em[0] + ep[1] * em[1];
            let nrm = (ep[0] * ep[0] + ep[1] * ep[1]).sqrt();
            assert!(dot.abs() < 1e-12, "k={k}");
            assert!((nrm - 1.0).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn propagate_at_zero_time_is_identity() {
        let f = random_field(1, 256, 20.0);
        let g = propagate_free(&f, 0.0);
        assert!(f.max_pointwise_distance(&g) < 1e-13);
    }

    #[test]
    fn propagate_preserves_l2() {
        let f = random_field(2, 512, 20.0);
        let g = propagate_free(&f, 5.0);
        let n0 = lp_norm(&f, 2.0);
        let n1 = lp_norm(&g, 2.0);
        assert!((n1 - n0).abs() < 1e-12 * n0);
    }

    #[test]
    fn propagate_group_property() {
        let f = random_field(3, 256, 15.0);
        let a = propagate_free(&propagate_free(&f, 1.3), 2.1);
        let b = propagate_free(&f, 3.4);
        assert!(a.max_pointwise_distance(&b) < 1e-11);
    }

    #[test]
    fn single_mode_picks_up_eigen_phase() {
        let n = 256;
        let half = 10.0;
        let m = 4; // k0 = pi m / L on-grid
        let k0 = std::f64::consts::PI * m as f64 / half;
        let sym = DiracSymbol::new(k0);
        let (ep, _) = sym.eigenvectors();
        let f = SpinorField::from_fn(n, half, |x| {
            let wave = Complex::new(0.0, k0 * x).exp();
            (wave * ep[0], wave * ep[1])
        })
        .unwrap();
        let t = 0.7;
        let g = propagate_free(&f, t);
        let phase = Complex::new(0.0, -t * sym.omega()).exp();
        for j in 0..n {
            assert!((g.u()[j] - f.u()[j] * phase).norm() < 1e-12);
            assert!((g.v()[j] - f.v()[j] * phase).norm() < 1e-12);
        }
    }

    /// (H - lambda) applied spectrally.
    fn apply_h_minus_lambda(f: &SpinorField<f64>, lambda: Complex<f64>) -> SpinorField<f64> {
        let sp = Spectral::for_field(f);
        let mut out = f.clone();
        sp.apply_multiplier(&mut out, |k| {
            let m = DiracSymbol::new(k).matrix();
            [
                [Complex::new(m[0][0], 0.0) - lambda, Complex::new(m[0][1], 0.0)],
                [Complex::new(m[1][0], 0.0), Complex::new(m[1][1], 0.0) - lambda],
            ]
        });
        out
    }

    #[test]
    fn resolvent_identity_fourier() {
        let f = random_field(4, 512, 20.0);
        let lambda = Complex::new(0.0, 1.0);
        let rf = resolvent_fourier(&f, lambda).unwrap();
        let back = apply_h_minus_lambda(&rf, lambda);
        let err = back.max_pointwise_distance(&f);
        let scale = f.max_density().sqrt();
        assert!(err < 1e-10 * scale, "err = {err}");
    }

    #[test]
    fn resolvent_of_zero_is_zero() {
        let f = SpinorField::<f64>::zero(128, 10.0).unwrap();
        let rf = resolvent_fourier(&f, Complex::new(0.0, 0.0)).unwrap();
        assert!(rf.max_density() == 0.0);
        let rg = resolvent_green(&f, Complex::new(0.5, 0.5)).unwrap();
        assert!(rg.max_density() == 0.0);
    }

    #[test]
    fn rejects_spectral_parameter_on_spectrum() {
        let f = random_field(5, 128, 10.0);
        assert!(matches!(
            resolvent_fourier(&f, Complex::new(1.5, 0.0)),
            Err(LinError::OnSpectrum { .. })
        ));
        assert!(matches!(
            resolvent_green(&f, Complex::new(-2.0, 1e-10)),
            Err(LinError::OnSpectrum { .. })
        ));
        // lambda = 0 is fine (spectral gap)
        assert!(resolvent_fourier(&f, Complex::new(0.0, 0.0)).is_ok());
    }

    fn gaussian_spinor(n: usize, half: f64) -> SpinorField<f64> {
        SpinorField::from_fn(n, half, |x| {
            (
                Complex::new((-x * x / 2.0).exp(), 0.0),
                Complex::new(0.4 * (-x * x / 2.0).exp(), 0.2 * (-x * x / 3.0).exp()),
            )
        })
        .unwrap()
    }

    fn rel_l2_discrepancy(a: &SpinorField<f64>, b: &SpinorField<f64>) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..a.n() {
            num += (a.u()[j] - b.u()[j]).norm_sqr() + (a.v()[j] - b.v()[j]).norm_sqr();
            den += b.u()[j].norm_sqr() + b.v()[j].norm_sqr();
        }
        (num / den).sqrt()
    }

    #[test]
    fn green_matches_fourier_on_gaussian() {
        let f = gaussian_spinor(1024, 40.0);
        for lambda in [Complex::new(0.0, 0.5), Complex::new(0.3, 0.7)] {
            let rf = resolvent_fourier(&f, lambda).unwrap();
            let rg = resolvent_green(&f, lambda).unwrap();
            let err = rel_l2_discrepancy(&rg, &rf);
            assert!(err < 1e-6, "lambda = {lambda}, rel L2 err = {err:e}");
        }
    }

    #[test]
    fn green_quadrature_error_shrinks_fast() {
        // With the kink corrections the discrepancy should drop by well over
        // 4x per refinement (the plain trapezoid rate).
        let coarse = {
            let f = gaussian_spinor(256, 40.0);
            let rf = resolvent_fourier(&f, Complex::new(0.0, 0.5)).unwrap();
            let rg = resolvent_green(&f, Complex::new(0.0, 0.5)).unwrap();
            rel_l2_discrepancy(&rg, &rf)
        };
        let fine = {
            let f = gaussian_spinor(512, 40.0);
            let rf = resolvent_fourier(&f, Complex::new(0.0, 0.5)).unwrap();
            let rg = resolvent_green(&f, Complex::new(0.0, 0.5)).unwrap();
            rel_l2_discrepancy(&rg, &rf)
        };
        assert!(fine < coarse / 8.0, "coarse {coarse:e} fine {fine:e}");
    }

    #[test]
    fn green_norm_decays_for_large_imaginary_lambda() {
        let f = gaussian_spinor(512, 40.0);
        let base = lp_norm(&f, 2.0);
        let mut bounds = Vec::new();
        for mu in [4.0, 8.0, 16.0] {
            let rg = resolvent_green(&f, Complex::new(0.0, mu)).unwrap();
            bounds.push(lp_norm(&rg, 2.0) * mu / base);
        }
        // |lambda| * ||R(lambda)|| should stay O(1)
        for b in &bounds {
            assert!(*b < 3.0, "bounds = {bounds:?}");
        }
    }

    #[test]
    fn resolvent_query_invariant() {
        for lambda in [Complex::new(0.0, 0.5), Complex::new(0.3, 0.7), Complex::new(-2.0, 0.4)] {
            let q = ResolventQuery::new(lambda).unwrap();
            assert!(q.kappa.re > 0.0);
            let defect = (q.kappa * q.kappa + lambda * lambda - Complex::new(1.0, 0.0)).norm();
            assert!(defect < 1e-14);
        }
        assert!(ResolventQuery::new(Complex::new(1.2, 0.0)).is_err());
    }

    #[test]
    fn kappa_branch_and_continuity() {
        let mut prev: Option<Complex<f64>> = None;
        for j in 0..200 {
            let s = j as f64 / 199.0;
            // path from 0.9i around to 0.9 + 0.9i staying off the spectrum
            let lambda = Complex::new(0.9 * s, 0.9);
            let k = kappa(lambda);
            assert!(k.re > 0.0);
            assert!((k * k + lambda * lambda - Complex::new(1.0, 0.0)).norm() < 1e-14);
            if let Some(p) = prev {
                assert!((k - p).norm() < 0.05);
            }
            prev = Some(k);
        }
    }

    #[test]
    fn decay_slope_of_gaussian_freeflight() {
        let f = SpinorField::<f64>::gaussian(2048, 100.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let times: Vec<f64> =
            (0..20).map(|j| 10.0 * (60.0_f64 / 10.0).powf(j as f64 / 19.0)).collect();
        let report = measure_decay(&f, &times).unwrap();
        assert!((report.slope() + 0.5).abs() < 0.07, "slope = {}", report.slope());
        // L2 stays flat by unitarity
        let l2 = report.norm_slope(2).unwrap();
        assert!(l2.slope.abs() < 0.01, "l2 slope = {}", l2.slope);
    }

    #[test]
    fn decay_rejects_zero_field_and_small_domains() {
        let zero = SpinorField::<f64>::zero(256, 200.0).unwrap();
        assert!(matches!(measure_decay(&zero, &[10.0, 20.0, 30.0]), Err(LinError::ZeroField)));

        let f = SpinorField::<f64>::gaussian(256, 30.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            measure_decay(&f, &[10.0, 20.0, 40.0]),
            Err(LinError::DomainTooSmall { .. })
        ));
        assert!(matches!(measure_decay(&f, &[10.0, 5.0, 40.0]), Err(LinError::BadTimes)));
        assert!(matches!(measure_decay(&f, &[0.5, 5.0, 8.0]), Err(LinError::BadTimes)));
    }

    #[test]
    fn charge_invariant_under_free_flow() {
        let f = random_field(6, 512, 20.0);
        let g = propagate_free(&f, 3.7);
        let q0 = charge(&f);
        let q1 = charge(&g);
        assert!((q1 - q0).abs() < 1e-12 * q0);
    }
}
