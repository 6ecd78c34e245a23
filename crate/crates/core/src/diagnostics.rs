//! Conserved quantities (charge, momentum, Hamiltonian), discrete norms, and
//! the apriori-bound / decay-rate checks applied to trajectories.

use serde::Serialize;
use thiserror::Error;

use crate::evolve::Trajectory;
use crate::field::SpinorField;
use crate::fit::{loglog_fit, FitError, PowerLawFit};
use crate::model::{eval_potential, PotentialSpec};
use crate::scalar::{lit, Real};
use crate::spectral::Spectral;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("window [{lo}, {hi}] outside trajectory time range [{t0}, {t1}]")]
    WindowOutsideTrajectory { lo: f64, hi: f64, t0: f64, t1: f64 },
    #[error("trajectory produced by a non-moduli-only potential; the bound is not guaranteed")]
    NotModuliOnly,
    #[error("gronwall check supports p in {{1, 2, 3}}, got {0}")]
    UnsupportedP(u32),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// The three conserved functionals with the quadrature metadata they were
/// computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservedTriple<T: Real> {
    pub hamiltonian: T,
    pub momentum: T,
    pub charge: T,
    pub grid_points: usize,
    pub grid_step: T,
}

/// Charge `Q = integral(|u|^2 + |v|^2) dx` by the rectangle rule, which is
/// spectrally accurate on the periodic grid.
pub fn charge<T: Real>(field: &SpinorField<T>) -> T {
    let h = field.spacing();
    let sum: T = field.u().iter().zip(field.v()).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).sum();
    sum * h
}

/// Momentum `P = i/2 integral(u conj(u)_x - u_x conj(u) + v conj(v)_x - v_x conj(v)) dx`
/// = integral Im(u_x conj(u)) + Im(v_x conj(v)) dx, with spectral derivatives.
pub fn momentum<T: Real>(field: &SpinorField<T>) -> T {
    let sp = Spectral::for_field(field);
    let ux = sp.derivative(field.u());
    let vx = sp.derivative(field.v());
    let h = field.spacing();
    let mut acc = T::zero();
    for j in 0..field.n() {
        acc += (ux[j] * field.u()[j].conj()).im + (vx[j] * field.v()[j].conj()).im;
    }
    acc * h
}

/// Hamiltonian
/// `H = i/2 integral(u_x conj(u) - u conj(u)_x - v_x conj(v) + v conj(v)_x)`
/// `  + integral(v conj(u) + u conj(v) - W(u, v)) dx`.
pub fn hamiltonian<T: Real>(field: &SpinorField<T>, spec: &PotentialSpec<T>) -> T {
    let sp = Spectral::for_field(field);
    let ux = sp.derivative(field.u());
    let vx = sp.derivative(field.v());
    let h = field.spacing();
    let two = lit::<T>(2.0);
    let mut acc = T::zero();
    for j in 0..field.n() {
        let u = field.u()[j];
        let v = field.v()[j];
        let kinetic = -(ux[j] * u.conj()).im + (vx[j] * v.conj()).im;
        let mass = two * (v * u.conj()).re;
        acc += kinetic + mass - eval_potential(spec, u, v);
    }
    acc * h
}

pub fn conserved_triple<T: Real>(
    field: &SpinorField<T>,
    spec: &PotentialSpec<T>,
) -> ConservedTriple<T> {
    ConservedTriple {
        hamiltonian: hamiltonian(field, spec),
        momentum: momentum(field),
        charge: charge(field),
        grid_points: field.n(),
        grid_step: field.spacing(),
    }
}

/// Two-component discrete L^p norm `(integral(|u|^p + |v|^p) dx)^{1/p}`.
pub fn lp_norm<T: Real>(field: &SpinorField<T>, p: T) -> T {
    debug_assert!(p >= T::one());
    let h = field.spacing();
    let sum: T =
        field.u().iter().zip(field.v()).map(|(a, b)| a.norm().powf(p) + b.norm().powf(p)).sum();
    (sum * h).powf(T::one() / p)
}

/// Pointwise sup norm max(|u|, |v|).
pub fn sup_norm<T: Real>(field: &SpinorField<T>) -> T {
    field.u().iter().zip(field.v()).map(|(a, b)| a.norm().max(b.norm())).fold(T::zero(), T::max)
}

/// H^1 norm `sqrt(integral(|u|^2 + |v|^2 + |u_x|^2 + |v_x|^2))`, used by the
/// blow-up watchdog.
pub fn h1_norm<T: Real>(field: &SpinorField<T>) -> T {
    let sp = Spectral::for_field(field);
    let ux = sp.derivative(field.u());
    let vx = sp.derivative(field.v());
    let h = field.spacing();
    let mut acc = T::zero();
    for j in 0..field.n() {
        acc +=
            field.u()[j].norm_sqr() + field.v()[j].norm_sqr() + ux[j].norm_sqr() + vx[j].norm_sqr();
    }
    (acc * h).sqrt()
}

/// Outcome of checking `||u(t)||_{L^{2p+2}} <= e^{2t} ||u(0)||_{L^{2p+2}}`
/// along a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct GronwallReport<T: Real> {
    pub bound: &'static str,
    pub p: u32,
    pub max_ratio: T,
    pub violations: Vec<usize>,
}

impl<T: Real> GronwallReport<T> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the exponential apriori bound on the L^{2p+2} norm for a
/// moduli-only trajectory. The bound holds analytically for such potentials,
/// so a violation indicates an integrator bug.
pub fn check_gronwall<T: Real>(
    trajectory: &Trajectory<T>,
    p: u32,
) -> Result<GronwallReport<T>, DiagnosticsError> {
    if !trajectory.moduli_only {
        return Err(DiagnosticsError::NotModuliOnly);
    }
    if !(1..=3).contains(&p) {
        return Err(DiagnosticsError::UnsupportedP(p));
    }
    let exponent = 2 * p + 2;
    let initial = trajectory.rows.first().map(|r| r.lp(exponent)).unwrap_or(T::zero());
    let mut max_ratio = T::zero();
    let mut violations = Vec::new();
    let tol = lit::<T>(1e-8);
    for (idx, row) in trajectory.rows.iter().enumerate() {
        let bound = (lit::<T>(2.0) * row.t).exp() * initial;
        let ratio = if bound > T::zero() { row.lp(exponent) / bound } else { T::zero() };
        max_ratio = max_ratio.max(ratio);
        if ratio > T::one() + tol {
            violations.push(idx);
        }
    }
    Ok(GronwallReport { bound: "gronwall", p, max_ratio, violations })
}

/// Log-log slope of the recorded sup norm over the requested window of a
/// nonlinear trajectory.
pub fn fit_nonlinear_decay<T: Real>(
    trajectory: &Trajectory<T>,
    window: (T, T),
) -> Result<PowerLawFit<T>, DiagnosticsError> {
    let (lo, hi) = window;
    let t0 = trajectory.rows.first().map(|r| r.t).unwrap_or(T::zero());
    let t1 = trajectory.rows.last().map(|r| r.t).unwrap_or(T::zero());
    if lo < t0 || hi > t1 || lo >= hi {
        return Err(DiagnosticsError::WindowOutsideTrajectory {
            lo: lo.to_f64().unwrap(),
            hi: hi.to_f64().unwrap(),
            t0: t0.to_f64().unwrap(),
            t1: t1.to_f64().unwrap(),
        });
    }
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for row in &trajectory.rows {
        if row.t >= lo && row.t <= hi {
            ts.push(row.t);
            ys.push(row.sup);
        }
    }
    Ok(loglog_fit(&ts, &ys)?)
}
