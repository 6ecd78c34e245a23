//! Direct spectral analysis of the characteristic-frame Lax problem
//!
//! ```text
//! d/dxi (psi1, psi2) = [[-i lambda^2, lambda w], [-lambda conj(w), i lambda^2]] (psi1, psi2)
//! ```
//!
//! via transfer integration of the gauged Jost solution, the analytic
//! coefficient a(lambda), winding-number eigenvalue search in the first
//! quadrant, the Lax symmetries, and the small-norm exclusion criteria.

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::characteristic::{ProfileError, ScatteringProfile};
use crate::scalar::{lit, Real};

#[derive(Debug, Error, PartialEq)]
pub enum ScatterError {
    #[error("spectral parameter must be nonzero")]
    ZeroLambda,
    #[error(
        "search box must lie in the open first quadrant, {margin} radians away from both axes"
    )]
    InvalidBox { margin: f64 },
    #[error("winding unresolved: contour refinement exceeded budget of {budget} evaluations")]
    WindingUnresolved { budget: usize },
    #[error("zero near contour persisted after {attempts} perturbation attempts")]
    ZeroNearContour { attempts: usize },
    #[error("jost solution lost finiteness (overflow) at lambda = {re} + {im}i")]
    NonFinite { re: f64, im: f64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Gauged Jost state (phi1, phi2) with psi = e^{-i lambda^2 xi} phi, normalized
/// to (1, 0) at the left end of the grid.
#[derive(Debug, Clone, Copy)]
pub struct JostState<T: Real> {
    pub phi1: Complex<T>,
    pub phi2: Complex<T>,
}

/// The coefficient a(lambda) = phi1(xi_max), kept in scaled form so that
/// magnitudes beyond the floating-point range survive the transfer.
#[derive(Debug, Clone, Copy)]
pub struct JostCoefficient<T: Real> {
    scaled: Complex<T>,
    log_scale: T,
}

impl<T: Real> JostCoefficient<T> {
    /// a(lambda) as a plain complex number; may overflow to infinity if the
    /// transfer was renormalized beyond the representable range.
    pub fn value(&self) -> Complex<T> {
        self.scaled.scale(self.log_scale.exp())
    }

    pub fn log_abs(&self) -> T {
        self.scaled.norm().ln() + self.log_scale
    }

    pub fn arg(&self) -> T {
        self.scaled.arg()
    }

    pub fn renormalized(&self) -> bool {
        self.log_scale != T::zero()
    }
}

const RENORM_THRESHOLD: f64 = 1e100;

fn lax_matrix<T: Real>(lambda: Complex<T>, w: Complex<T>) -> [[Complex<T>; 2]; 2] {
    let il2 = Complex::new(T::zero(), T::one()) * lambda * lambda;
    [[-il2, lambda * w], [-lambda * w.conj(), il2]]
}

/// Half-step samples of w for the RK4 transfer. The transfer coefficient
/// a(lambda) uses the linear interpolant; the symmetry checks use the
/// four-point (cubic) one to keep the marching defect at the differencing
/// order.
fn midpoints<T: Real>(w: &[Complex<T>], cubic: bool) -> Vec<Complex<T>> {
    let n = w.len();
    let half = lit::<T>(0.5);
    let nine = lit::<T>(9.0);
    let sixteenth = T::one() / lit::<T>(16.0);
    (0..n - 1)
        .map(|j| {
            if cubic && j >= 1 && j + 2 < n {
                (-w[j - 1] + w[j].scale(nine) + w[j + 1].scale(nine) - w[j + 2]).scale(sixteenth)
            } else {
                (w[j] + w[j + 1]).scale(half)
            }
        })
        .collect()
}

/// RK4 transfer of the gauged system
/// `phi1' = lambda w phi2`, `phi2' = 2 i lambda^2 phi2 - lambda conj(w) phi1`
/// across one grid cell; `w_mid` is the linear interpolant at the half-step.
#[inline]
fn rk4_cell<T: Real>(
    lambda: Complex<T>,
    two_i_l2: Complex<T>,
    h: T,
    w0: Complex<T>,
    w_mid: Complex<T>,
    w1: Complex<T>,
    state: JostState<T>,
) -> JostState<T> {
    let f = |w: Complex<T>, s: JostState<T>| JostState {
        phi1: lambda * w * s.phi2,
        phi2: two_i_l2 * s.phi2 - lambda * w.conj() * s.phi1,
    };
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let sixth = T::one() / lit::<T>(6.0);
    let k1 = f(w0, state);
    let k2 = f(
        w_mid,
        JostState {
            phi1: state.phi1 + k1.phi1.scale(h * half),
            phi2: state.phi2 + k1.phi2.scale(h * half),
        },
    );
    let k3 = f(
        w_mid,
        JostState {
            phi1: state.phi1 + k2.phi1.scale(h * half),
            phi2: state.phi2 + k2.phi2.scale(h * half),
        },
    );
    let k4 = f(
        w1,
        JostState { phi1: state.phi1 + k3.phi1.scale(h), phi2: state.phi2 + k3.phi2.scale(h) },
    );
    JostState {
        phi1: state.phi1 + (k1.phi1 + (k2.phi1 + k3.phi1).scale(two) + k4.phi1).scale(h * sixth),
        phi2: state.phi2 + (k1.phi2 + (k2.phi2 + k3.phi2).scale(two) + k4.phi2).scale(h * sixth),
    }
}

/// Integrates the gauged Jost system from xi_min to xi_max and returns
/// a(lambda) = phi1(xi_max), whose zeros in Im(lambda^2) > 0 are the L^2
/// eigenvalues of the Lax problem.
pub fn jost_transfer<T: Real>(
    profile: &ScatteringProfile<T>,
    lambda: Complex<T>,
) -> Result<JostCoefficient<T>, ScatterError> {
    if lambda.norm() == T::zero() {
        return Err(ScatterError::ZeroLambda);
    }
    profile.check_boundary_decay()?;
    let w = profile.w();
    let h = profile.grid().spacing();
    let two_i_l2 = Complex::new(T::zero(), lit::<T>(2.0)) * lambda * lambda;
    let threshold = lit::<T>(RENORM_THRESHOLD);

    let mids = midpoints(w, false);
    let mut state = JostState { phi1: Complex::new(T::one(), T::zero()), phi2: Complex::default() };
    let mut log_scale = T::zero();
    for j in 0..w.len() - 1 {
        state = rk4_cell(lambda, two_i_l2, h, w[j], mids[j], w[j + 1], state);
        let mag = state.phi1.norm().max(state.phi2.norm());
        if !mag.is_finite() {
            return Err(ScatterError::NonFinite {
                re: lambda.re.to_f64().unwrap(),
                im: lambda.im.to_f64().unwrap(),
            });
        }
        if mag > threshold {
            state.phi1 = state.phi1.unscale(mag);
            state.phi2 = state.phi2.unscale(mag);
            log_scale += mag.ln();
        }
    }
    Ok(JostCoefficient { scaled: state.phi1, log_scale })
}

/// Full gauged Jost trace phi(xi_j) on the profile grid (no renormalization;
/// errors on overflow). Uses the cubic half-step interpolant so the marching
/// defect stays at the differencing order of the symmetry checks.
pub fn jost_solution<T: Real>(
    profile: &ScatteringProfile<T>,
    lambda: Complex<T>,
) -> Result<Vec<JostState<T>>, ScatterError> {
    if lambda.norm() == T::zero() {
        return Err(ScatterError::ZeroLambda);
    }
    profile.check_boundary_decay()?;
    let w = profile.w();
    let h = profile.grid().spacing();
    let two_i_l2 = Complex::new(T::zero(), lit::<T>(2.0)) * lambda * lambda;
    let mids = midpoints(w, true);
    let mut states = Vec::with_capacity(w.len());
    let mut state = JostState { phi1: Complex::new(T::one(), T::zero()), phi2: Complex::default() };
    states.push(state);
    for j in 0..w.len() - 1 {
        state = rk4_cell(lambda, two_i_l2, h, w[j], mids[j], w[j + 1], state);
        if !state.phi1.norm().is_finite() || !state.phi2.norm().is_finite() {
            return Err(ScatterError::NonFinite {
                re: lambda.re.to_f64().unwrap(),
                im: lambda.im.to_f64().unwrap(),
            });
        }
        states.push(state);
    }
    Ok(states)
}

/// The exact sector integral `I(lambda) = 1/(2 sin(2 theta))` with
/// theta = arg(lambda), defined in the open first quadrant.
pub fn exclusion_integral<T: Real>(lambda: Complex<T>) -> Option<T> {
    let im_l2 = (lambda * lambda).im;
    if im_l2 <= T::zero() {
        return None;
    }
    Some(lambda.norm_sqr() / (lit::<T>(2.0) * im_l2))
}

/// The no-eigenvalue geometry derived from the profile norms.
#[derive(Debug, Clone, Copy)]
pub struct ExclusionGeometry<T: Real> {
    /// S(w) = ||w||_{L^2}^2
    pub l2_sq: T,
    /// K(w) = ||w||_{L^1}(||w||_{L^inf} + ||w'||_{L^1})
    pub exclusion_scalar: T,
    /// Angles theta with sin(2 theta) > S/2, where no eigenvalue can live;
    /// None when S >= 2 makes the sector empty.
    pub sector: Option<(T, T)>,
    /// K(w) below the configured heuristic threshold: no eigenvalue anywhere.
    pub global_exclusion_candidate: bool,
}

impl<T: Real> ExclusionGeometry<T> {
    /// Whether an angle lies strictly inside the excluded sector.
    pub fn excludes_angle(&self, theta: T) -> bool {
        match self.sector {
            Some((lo, hi)) => theta > lo && theta < hi,
            None => false,
        }
    }
}

/// Computes S(w), K(w) and the excluded sector `sin(2 theta) > S/2`.
pub fn exclusion_geometry<T: Real>(
    profile: &ScatteringProfile<T>,
    global_threshold: T,
) -> ExclusionGeometry<T> {
    let s = profile.l2_norm_sq();
    let k = profile.exclusion_scalar();
    let two = lit::<T>(2.0);
    let sector = if s >= two {
        None
    } else {
        let lo = (s / two).asin() / two;
        Some((lo, T::FRAC_PI_2() - lo))
    };
    ExclusionGeometry {
        l2_sq: s,
        exclusion_scalar: k,
        sector,
        global_exclusion_candidate: k < global_threshold,
    }
}

/// Rectangle in the open first quadrant of the spectral plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox<T: Real> {
    pub re_min: T,
    pub re_max: T,
    pub im_min: T,
    pub im_max: T,
}

impl<T: Real> SearchBox<T> {
    pub fn new(re_min: T, re_max: T, im_min: T, im_max: T) -> Self {
        Self { re_min, re_max, im_min, im_max }
    }

    fn diagonal(&self) -> T {
        ((self.re_max - self.re_min).powi(2) + (self.im_max - self.im_min).powi(2)).sqrt()
    }

    fn center(&self) -> Complex<T> {
        Complex::new(
            (self.re_min + self.re_max) * lit::<T>(0.5),
            (self.im_min + self.im_max) * lit::<T>(0.5),
        )
    }

    fn contains(&self, z: Complex<T>) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn corners(&self) -> [Complex<T>; 4] {
        [
            Complex::new(self.re_min, self.im_min),
            Complex::new(self.re_max, self.im_min),
            Complex::new(self.re_max, self.im_max),
            Complex::new(self.re_min, self.im_max),
        ]
    }

    fn split(&self) -> (Self, Self) {
        if self.re_max - self.re_min >= self.im_max - self.im_min {
            let mid = (self.re_min + self.re_max) * lit::<T>(0.5);
            (Self { re_max: mid, ..*self }, Self { re_min: mid, ..*self })
        } else {
            let mid = (self.im_min + self.im_max) * lit::<T>(0.5);
            (Self { im_max: mid, ..*self }, Self { im_min: mid, ..*self })
        }
    }

    fn expanded(&self, factor: T) -> Self {
        let cr = (self.re_min + self.re_max) * lit::<T>(0.5);
        let ci = (self.im_min + self.im_max) * lit::<T>(0.5);
        let hr = (self.re_max - self.re_min) * lit::<T>(0.5) * factor;
        let hi = (self.im_max - self.im_min) * lit::<T>(0.5) * factor;
        Self {
            re_min: (cr - hr).max(self.re_min * lit::<T>(0.5)),
            re_max: cr + hr,
            im_min: (ci - hi).max(self.im_min * lit::<T>(0.5)),
            im_max: ci + hi,
        }
    }
}

/// Knobs of the eigenvalue search.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions<T: Real> {
    /// Minimum angular distance of the box from both axes, in radians.
    pub axis_margin: T,
    /// Maximum a(lambda) evaluations per winding contour.
    pub contour_budget: usize,
    /// Box diagonal below which Newton polishing takes over from bisection.
    pub newton_start_diagonal: T,
    /// Threshold on K(w) for the global exclusion flag.
    pub global_exclusion_threshold: T,
}

impl<T: Real> Default for SearchOptions<T> {
    fn default() -> Self {
        Self {
            axis_margin: lit(0.02),
            contour_budget: 40_000,
            newton_start_diagonal: lit(0.05),
            global_exclusion_threshold: lit(0.1),
        }
    }
}

/// A located zero of a(lambda).
#[derive(Debug, Clone, Copy)]
pub struct Eigenvalue<T: Real> {
    pub lambda: Complex<T>,
    /// |a(lambda)| after Newton refinement.
    pub residual: T,
    /// Winding of a small contour around the refined zero (multiplicity
    /// evidence).
    pub winding: i32,
}

impl<T: Real> Eigenvalue<T> {
    /// The symmetric quartet (lambda, -lambda, conj, -conj) this first-quadrant
    /// zero represents.
    pub fn quartet(&self) -> [Complex<T>; 4] {
        [self.lambda, -self.lambda, self.lambda.conj(), -self.lambda.conj()]
    }
}

/// Outcome of a spectral search: criterion scalars, exclusion sector, and the
/// eigenvalues found in the box.
#[derive(Debug, Clone)]
pub struct SpectralReport<T: Real> {
    pub geometry: ExclusionGeometry<T>,
    pub eigenvalues: Vec<Eigenvalue<T>>,
    /// Total winding of a(lambda) around the full search box.
    pub total_winding: i32,
    pub search_box: SearchBox<T>,
}

fn wrap_phase<T: Real>(d: T) -> T {
    let two_pi = lit::<T>(2.0) * T::PI();
    let mut x = d;
    while x > T::PI() {
        x -= two_pi;
    }
    while x < -T::PI() {
        x += two_pi;
    }
    x
}

/// Winding number of a(lambda) along the rectangle boundary by adaptive
/// phase-increment summation.
fn winding_number<T: Real>(
    profile: &ScatteringProfile<T>,
    rect: &SearchBox<T>,
    budget: usize,
) -> Result<i32, ScatterError> {
    // parameterize the boundary by s in [0, 4), one unit per edge
    let corners = rect.corners();
    let point_at = |s: T| -> Complex<T> {
        let edge = s.floor().to_usize().unwrap().min(3);
        let frac = s - s.floor();
        let a = corners[edge];
        let b = corners[(edge + 1) % 4];
        a + (b - a).scale(frac)
    };

    let eval = |pts: &[T]| -> Result<Vec<(T, Complex<T>)>, ScatterError> {
        pts.par_iter()
            .map(|&s| {
                let lambda = point_at(s);
                let a = jost_transfer(profile, lambda)?;
                Ok((s, a.value()))
            })
            .collect()
    };

    let per_edge = 12;
    let mut params: Vec<T> =
        (0..4 * per_edge).map(|j| lit::<T>(j as f64 / per_edge as f64)).collect();
    let mut samples = eval(&params)?;
    let mut used = samples.len();
    let near_zero = lit::<T>(1e-13);

    loop {
        // check for a zero sitting on (or numerically at) the contour
        if samples.iter().any(|(_, v)| v.norm() < near_zero) {
            return Err(ScatterError::ZeroNearContour { attempts: 0 });
        }
        // find segments whose phase jump is too large to trust
        let mut refine: Vec<T> = Vec::new();
        let m = samples.len();
        for i in 0..m {
            let (s0, v0) = samples[i];
            let (s1, v1) = samples[(i + 1) % m];
            let d = wrap_phase(v1.arg() - v0.arg());
            if d.abs() > T::FRAC_PI_2() {
                let gap = if i + 1 == m { lit::<T>(4.0) - s0 + s1 } else { s1 - s0 };
                refine.push(s0 + gap * lit::<T>(0.5));
            }
        }
        if refine.is_empty() {
            let total: T =
                (0..m).map(|i| wrap_phase(samples[(i + 1) % m].1.arg() - samples[i].1.arg())).sum();
            let turns = total / (lit::<T>(2.0) * T::PI());
            let rounded = turns.round();
            if (turns - rounded).abs() < lit(0.2) {
                return Ok(rounded.to_f64().unwrap() as i32);
            }
            // total phase has not stabilized: densify everywhere
            let mut extra = Vec::with_capacity(m);
            for i in 0..m {
                let (s0, _) = samples[i];
                let s1 = if i + 1 == m { lit::<T>(4.0) } else { samples[i + 1].0 };
                extra.push(s0 + (s1 - s0) * lit::<T>(0.5));
            }
            refine = extra;
        }
        used += refine.len();
        if used > budget {
            return Err(ScatterError::WindingUnresolved { budget });
        }
        let fresh = eval(&refine)?;
        samples.extend(fresh);
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        params.clear();
    }
}

/// Winding with contour perturbation when a zero sits on the boundary.
fn winding_with_retries<T: Real>(
    profile: &ScatteringProfile<T>,
    rect: &SearchBox<T>,
    budget: usize,
) -> Result<(i32, SearchBox<T>), ScatterError> {
    let mut attempt = 0;
    let mut cur = *rect;
    loop {
        match winding_number(profile, &cur, budget) {
            Ok(w) => return Ok((w, cur)),
            Err(ScatterError::ZeroNearContour { .. }) if attempt < 5 => {
                attempt += 1;
                cur = cur.expanded(T::one() + lit::<T>(0.013) * lit::<T>(attempt as f64));
            }
            Err(ScatterError::ZeroNearContour { .. }) => {
                return Err(ScatterError::ZeroNearContour { attempts: attempt })
            }
            Err(e) => return Err(e),
        }
    }
}

/// Newton refinement of a zero of a(lambda), derivative by central difference.
fn newton_polish<T: Real>(
    profile: &ScatteringProfile<T>,
    start: Complex<T>,
) -> Result<(Complex<T>, T), ScatterError> {
    let mut z = start;
    let mut best = (z, T::infinity());
    for _ in 0..40 {
        let a = jost_transfer(profile, z)?.value();
        if a.norm() < best.1 {
            best = (z, a.norm());
        }
        let step = lit::<T>(1e-6) * (T::one() + z.norm());
        let ap = jost_transfer(profile, z + Complex::new(step, T::zero()))?.value();
        let am = jost_transfer(profile, z - Complex::new(step, T::zero()))?.value();
        let deriv = (ap - am).unscale(lit::<T>(2.0) * step);
        if deriv.norm() == T::zero() {
            break;
        }
        let delta = a / deriv;
        z -= delta;
        if delta.norm() < lit::<T>(1e-12) * (T::one() + z.norm()) {
            let res = jost_transfer(profile, z)?.value().norm();
            return Ok((z, res));
        }
    }
    Ok(best)
}

/// Locates the zeros of a(lambda) inside `search_box` by recursive winding
/// bisection followed by Newton polishing.
pub fn find_eigenvalues<T: Real>(
    profile: &ScatteringProfile<T>,
    search_box: SearchBox<T>,
    opts: &SearchOptions<T>,
) -> Result<SpectralReport<T>, ScatterError> {
    profile.check_boundary_decay()?;
    validate_box(&search_box, opts.axis_margin)?;

    let (total_winding, top_box) = winding_with_retries(profile, &search_box, opts.contour_budget)?;

    let mut zeros: Vec<Eigenvalue<T>> = Vec::new();
    if total_winding != 0 {
        let mut stack = vec![top_box];
        while let Some(b) = stack.pop() {
            let (w, eff) = winding_with_retries(profile, &b, opts.contour_budget)?;
            if w == 0 {
                continue;
            }
            if eff.diagonal() > opts.newton_start_diagonal {
                let (left, right) = eff.split();
                stack.push(left);
                stack.push(right);
                continue;
            }
            let (lambda, residual) = newton_polish(profile, eff.center())?;
            if !eff.expanded(lit(3.0)).contains(lambda) {
                // Newton escaped the bracketing box: keep bisecting
                let (left, right) = eff.split();
                stack.push(left);
                stack.push(right);
                continue;
            }
            let already = zeros
                .iter()
                .any(|e| (e.lambda - lambda).norm() < lit::<T>(1e-7) * (T::one() + lambda.norm()));
            if !already {
                // multiplicity evidence from a tiny contour around the zero
                let r = lit::<T>(2e-4) * (T::one() + lambda.norm());
                let tiny = SearchBox::new(
                    lambda.re - r,
                    lambda.re + r,
                    (lambda.im - r).max(lit(1e-6)),
                    lambda.im + r,
                );
                let (mult, _) = winding_with_retries(profile, &tiny, opts.contour_budget)?;
                zeros.push(Eigenvalue { lambda, residual, winding: mult });
            }
        }
    }
    zeros.sort_by(|a, b| a.lambda.norm().partial_cmp(&b.lambda.norm()).unwrap());

    Ok(SpectralReport {
        geometry: exclusion_geometry(profile, opts.global_exclusion_threshold),
        eigenvalues: zeros,
        total_winding,
        search_box,
    })
}

fn validate_box<T: Real>(b: &SearchBox<T>, margin: T) -> Result<(), ScatterError> {
    let ok = b.re_min > T::zero()
        && b.im_min > T::zero()
        && b.re_max > b.re_min
        && b.im_max > b.im_min
        && b.im_min.atan2(b.re_max) >= margin
        && b.im_max.atan2(b.re_min) <= T::FRAC_PI_2() - margin;
    if ok {
        Ok(())
    } else {
        Err(ScatterError::InvalidBox { margin: margin.to_f64().unwrap() })
    }
}

/// Residuals of the three transformed Lax-solution candidates built from one
/// numerical solution at `lambda`:
///
/// ```text
/// (psi1, -psi2)            checked at -lambda
/// (conj psi2,  conj psi1)  checked at -conj(lambda)
/// (conj psi2, -conj psi1)  checked at  conj(lambda)
/// ```
///
/// Each residual is the max pointwise-relative defect of the candidate in the
/// ungauged ODE, with fourth-order central differencing.
#[derive(Debug, Clone, Copy)]
pub struct SymmetryResiduals<T: Real> {
    pub negate_lambda: T,
    pub conj_swap: T,
    pub conj_reflect: T,
}

impl<T: Real> SymmetryResiduals<T> {
    pub fn max(&self) -> T {
        self.negate_lambda.max(self.conj_swap).max(self.conj_reflect)
    }
}

pub fn verify_symmetries<T: Real>(
    profile: &ScatteringProfile<T>,
    lambda: Complex<T>,
) -> Result<SymmetryResiduals<T>, ScatterError> {
    let states = jost_solution(profile, lambda)?;
    let grid = profile.grid();
    let n = grid.n();
    // ungauge: psi = e^{-i lambda^2 xi} phi
    let mut psi: Vec<(Complex<T>, Complex<T>)> = Vec::with_capacity(n);
    for (j, s) in states.iter().enumerate() {
        let gauge = (Complex::new(T::zero(), -T::one())
            * lambda
            * lambda
            * Complex::new(grid.xi(j), T::zero()))
        .exp();
        psi.push((gauge * s.phi1, gauge * s.phi2));
    }

    let residual = |mu: Complex<T>, chi: &[(Complex<T>, Complex<T>)]| -> T {
        let h = grid.spacing();
        let twelve_h = lit::<T>(12.0) * h;
        let eight = lit::<T>(8.0);
        let mut num_den: Vec<(T, T)> = Vec::with_capacity(n.saturating_sub(4));
        for j in 2..n - 2 {
            let d1 = (-chi[j + 2].0 + chi[j + 1].0.scale(eight) - chi[j - 1].0.scale(eight)
                + chi[j - 2].0)
                .unscale(twelve_h);
            let d2 = (-chi[j + 2].1 + chi[j + 1].1.scale(eight) - chi[j - 1].1.scale(eight)
                + chi[j - 2].1)
                .unscale(twelve_h);
            let m = lax_matrix(mu, profile.w()[j]);
            let r1 = m[0][0] * chi[j].0 + m[0][1] * chi[j].1;
            let r2 = m[1][0] * chi[j].0 + m[1][1] * chi[j].1;
            let num = ((d1 - r1).norm_sqr() + (d2 - r2).norm_sqr()).sqrt();
            let den =
                (d1.norm_sqr() + d2.norm_sqr()).sqrt() + (r1.norm_sqr() + r2.norm_sqr()).sqrt();
            num_den.push((num, den));
        }
        let den_max = num_den.iter().map(|&(_, d)| d).fold(T::zero(), T::max);
        let floor = den_max * lit::<T>(1e-12);
        num_den.iter().map(|&(nm, dn)| nm / dn.max(floor)).fold(T::zero(), T::max)
    };

    let cand1: Vec<_> = psi.iter().map(|&(a, b)| (a, -b)).collect();
    let cand2: Vec<_> = psi.iter().map(|&(a, b)| (b.conj(), a.conj())).collect();
    let cand3: Vec<_> = psi.iter().map(|&(a, b)| (b.conj(), -a.conj())).collect();

    Ok(SymmetryResiduals {
        negate_lambda: residual(-lambda, &cand1),
        conj_swap: residual(-lambda.conj(), &cand2),
        conj_reflect: residual(lambda.conj(), &cand3),
    })
}

/// One heatmap sample of log|a| over a lambda grid.
#[derive(Debug, Clone, Copy)]
pub struct TransmissionSample<T: Real> {
    pub lambda: Complex<T>,
    pub log_abs_a: T,
    pub arg_a: T,
}

/// Samples a(lambda) on an nx-by-ny grid over the box (for heatmap output).
pub fn sample_transmission_grid<T: Real>(
    profile: &ScatteringProfile<T>,
    rect: &SearchBox<T>,
    nx: usize,
    ny: usize,
) -> Result<Vec<TransmissionSample<T>>, ScatterError> {
    let points: Vec<Complex<T>> = (0..ny)
        .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
        .map(|(ix, iy)| {
            let fx = if nx > 1 { lit::<T>(ix as f64 / (nx - 1) as f64) } else { T::zero() };
            let fy = if ny > 1 { lit::<T>(iy as f64 / (ny - 1) as f64) } else { T::zero() };
            Complex::new(
                rect.re_min + (rect.re_max - rect.re_min) * fx,
                rect.im_min + (rect.im_max - rect.im_min) * fy,
            )
        })
        .collect();
    points
        .par_iter()
        .map(|&lambda| {
            let a = jost_transfer(profile, lambda)?;
            Ok(TransmissionSample { lambda, log_abs_a: a.log_abs(), arg_a: a.arg() })
        })
        .collect()
}
