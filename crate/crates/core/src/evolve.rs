//! Strang split-step integrator: the exact Fourier-space linear flow composed
//! with a pointwise nonlinear substep that is exact for moduli-only
//! potentials and classical RK4 otherwise.

use std::path::PathBuf;

use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::diagnostics::{conserved_triple, h1_norm, lp_norm, sup_norm, ConservedTriple};
use crate::field::{GridError, SpinorField};
use crate::io::SnapshotError;
use crate::model::{eval_force, phase_rates, PotentialSpec};
use crate::scalar::{lit, Real};
use crate::spectral::Spectral;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("blow-up suspected at t={t}: {reason}")]
    BlowUp { t: f64, reason: BlowUpReason },
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlowUpReason {
    NonFinite,
    H1Ceiling { h1: f64, ceiling: f64 },
}

impl std::fmt::Display for BlowUpReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlowUpReason::NonFinite => write!(f, "non-finite field values"),
            BlowUpReason::H1Ceiling { h1, ceiling } => {
                write!(f, "H1 norm {h1:e} exceeded ceiling {ceiling:e}")
            }
        }
    }
}

/// Initial data descriptor.
#[derive(Debug, Clone)]
pub enum InitialData<T: Real> {
    Gaussian { amplitude: T, width: T, center: T, phase_k: T },
    Sech { amplitude: T, width: T },
    Field(SpinorField<T>),
    Snapshot(PathBuf),
}

impl<T: Real> InitialData<T> {
    pub fn build(&self, n: usize, half_width: T) -> Result<SpinorField<T>, EvolveError> {
        match self {
            InitialData::Gaussian { amplitude, width, center, phase_k } => {
                Ok(SpinorField::gaussian(n, half_width, *amplitude, *width, *center, *phase_k)?)
            }
            InitialData::Sech { amplitude, width } => {
                Ok(SpinorField::sech(n, half_width, *amplitude, *width)?)
            }
            InitialData::Field(f) => Ok(f.clone()),
            InitialData::Snapshot(path) => Ok(crate::io::read_spinor(path)?),
        }
    }
}

/// Full simulation description.
#[derive(Debug, Clone)]
pub struct SimConfig<T: Real> {
    pub potential: PotentialSpec<T>,
    pub initial: InitialData<T>,
    pub half_width: T,
    pub n: usize,
    pub dt: T,
    pub t_final: T,
    /// Steps between diagnostic rows.
    pub cadence: usize,
    pub h1_ceiling: Option<T>,
    pub snapshot_times: Vec<T>,
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<(), EvolveError> {
        if self.dt <= T::zero() || !self.dt.is_finite() {
            return Err(EvolveError::BadConfig("dt must be positive".into()));
        }
        if !self.n.is_power_of_two() {
            return Err(EvolveError::BadConfig(format!("N = {} is not a power of two", self.n)));
        }
        if self.t_final < T::zero() {
            return Err(EvolveError::BadConfig("T_final must be non-negative".into()));
        }
        let h = lit::<T>(2.0) * self.half_width / T::from_usize(self.n).unwrap();
        if self.dt > h {
            return Err(EvolveError::BadConfig(format!(
                "dt = {} exceeds grid spacing h = {}",
                self.dt.to_f64().unwrap(),
                h.to_f64().unwrap()
            )));
        }
        if self.cadence == 0 {
            return Err(EvolveError::BadConfig("cadence must be at least 1".into()));
        }
        Ok(())
    }
}

/// One diagnostics row of a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow<T: Real> {
    pub t: T,
    pub conserved: ConservedTriple<T>,
    pub lp2: T,
    pub lp4: T,
    pub lp6: T,
    pub lp8: T,
    pub sup: T,
    pub h1: T,
}

impl<T: Real> TrajectoryRow<T> {
    fn record(field: &SpinorField<T>, spec: &PotentialSpec<T>) -> Self {
        Self {
            t: field.time(),
            conserved: conserved_triple(field, spec),
            lp2: lp_norm(field, lit(2.0)),
            lp4: lp_norm(field, lit(4.0)),
            lp6: lp_norm(field, lit(6.0)),
            lp8: lp_norm(field, lit(8.0)),
            sup: sup_norm(field),
            h1: h1_norm(field),
        }
    }

    /// Recorded L^p norm for p in {2, 4, 6, 8}.
    pub fn lp(&self, p: u32) -> T {
        match p {
            2 => self.lp2,
            4 => self.lp4,
            6 => self.lp6,
            8 => self.lp8,
            _ => panic!("L^{p} norm is not recorded in trajectory rows"),
        }
    }
}

/// Diagnostic rows plus optional field snapshots from a run.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub rows: Vec<TrajectoryRow<T>>,
    pub snapshots: Vec<SpinorField<T>>,
    pub final_state: SpinorField<T>,
    pub moduli_only: bool,
}

/// Advances the pointwise nonlinear flow `i du/dt = dW/dconj(u)`,
/// `i dv/dt = dW/dconj(v)` by `dt`.
///
/// For moduli-only potentials the moduli are constants of this flow, so the
/// step is the exact phase rotation `u -> u exp(-i dt A)`, `v -> v exp(-i dt B)`
/// with (A, B) the partial derivatives of W in |u|^2 and |v|^2. Otherwise one
/// classical RK4 step is taken.
pub fn nonlinear_step<T: Real>(
    field: &SpinorField<T>,
    spec: &PotentialSpec<T>,
    dt: T,
) -> SpinorField<T> {
    let mut out = field.clone();
    nonlinear_step_in_place(&mut out, spec, dt);
    out
}

fn nonlinear_step_in_place<T: Real>(field: &mut SpinorField<T>, spec: &PotentialSpec<T>, dt: T) {
    let (u, v) = field.components_mut();
    if spec.moduli_only() {
        for j in 0..u.len() {
            let (a, b) = phase_rates(spec, u[j].norm_sqr(), v[j].norm_sqr());
            u[j] *= Complex::from_polar(T::one(), -dt * a);
            v[j] *= Complex::from_polar(T::one(), -dt * b);
        }
    } else {
        let minus_i = Complex::new(T::zero(), -T::one());
        let rhs = |a: Complex<T>, b: Complex<T>| {
            let (fu, fv) = eval_force(spec, a, b);
            (minus_i * fu, minus_i * fv)
        };
        let half = lit::<T>(0.5);
        let sixth = T::one() / lit::<T>(6.0);
        let two = lit::<T>(2.0);
        for j in 0..u.len() {
            let (a0, b0) = (u[j], v[j]);
            let (k1u, k1v) = rhs(a0, b0);
            let (k2u, k2v) = rhs(a0 + k1u.scale(dt * half), b0 + k1v.scale(dt * half));
            let (k3u, k3v) = rhs(a0 + k2u.scale(dt * half), b0 + k2v.scale(dt * half));
            let (k4u, k4v) = rhs(a0 + k3u.scale(dt), b0 + k3v.scale(dt));
            u[j] = a0 + (k1u + (k2u + k3u).scale(two) + k4u).scale(dt * sixth);
            v[j] = b0 + (k1v + (k2v + k3v).scale(two) + k4v).scale(dt * sixth);
        }
    }
}

/// Split-step integrator with cached FFT plans and half-step multipliers.
pub struct StrangIntegrator<T: Real> {
    spec: PotentialSpec<T>,
    dt: T,
    spectral: Spectral<T>,
    half_multiplier: Vec<[[Complex<T>; 2]; 2]>,
}

impl<T: Real> StrangIntegrator<T> {
    pub fn new(spec: PotentialSpec<T>, n: usize, half_width: T, dt: T) -> Self {
        let spectral = Spectral::new(n, half_width);
        let half_multiplier = spectral
            .wavenumbers()
            .iter()
            .map(|&k| crate::linpde::DiracSymbol::new(k).propagator(dt * lit::<T>(0.5)))
            .collect();
        Self { spec, dt, spectral, half_multiplier }
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    fn half_free(&self, field: &mut SpinorField<T>) {
        let n = self.spectral.n();
        let (u, v) = field.components_mut();
        self.spectral.forward(u);
        self.spectral.forward(v);
        for m in 0..n {
            let mat = &self.half_multiplier[m];
            let a = u[m];
            let b = v[m];
            u[m] = mat[0][0] * a + mat[0][1] * b;
            v[m] = mat[1][0] * a + mat[1][1] * b;
        }
        self.spectral.inverse(u);
        self.spectral.inverse(v);
    }

    /// One Strang step: half linear flow, full nonlinear substep, half linear
    /// flow. Advances the field time by dt.
    pub fn step(&self, field: &mut SpinorField<T>) {
        let t0 = field.time();
        self.half_free(field);
        nonlinear_step_in_place(field, &self.spec, self.dt);
        self.half_free(field);
        field.set_time(t0 + self.dt);
    }
}

/// Convenience single Strang step.
pub fn strang_step<T: Real>(
    field: &SpinorField<T>,
    spec: &PotentialSpec<T>,
    dt: T,
) -> SpinorField<T> {
    let integrator = StrangIntegrator::new(*spec, field.n(), field.half_width(), dt);
    let mut out = field.clone();
    integrator.step(&mut out);
    out
}

fn check_health<T: Real>(field: &SpinorField<T>, ceiling: Option<T>) -> Result<(), EvolveError> {
    if field.has_non_finite() {
        return Err(EvolveError::BlowUp {
            t: field.time().to_f64().unwrap_or(f64::NAN),
            reason: BlowUpReason::NonFinite,
        });
    }
    if let Some(c) = ceiling {
        let h1 = h1_norm(field);
        if h1 > c {
            return Err(EvolveError::BlowUp {
                t: field.time().to_f64().unwrap_or(f64::NAN),
                reason: BlowUpReason::H1Ceiling {
                    h1: h1.to_f64().unwrap_or(f64::NAN),
                    ceiling: c.to_f64().unwrap_or(f64::NAN),
                },
            });
        }
    }
    Ok(())
}

/// Integrates the configured problem to T_final, recording diagnostics every
/// `cadence` steps (plus the initial and final states).
pub fn run<T: Real>(config: &SimConfig<T>) -> Result<Trajectory<T>, EvolveError> {
    config.validate()?;
    let mut field = config.initial.build(config.n, config.half_width)?;
    field.set_time(T::zero());
    let integrator =
        StrangIntegrator::new(config.potential, config.n, config.half_width, config.dt);

    let steps_f = (config.t_final / config.dt).to_f64().unwrap();
    let full_steps = steps_f.round() as usize;
    let exact_grid = (steps_f - steps_f.round()).abs() < 1e-9;
    let total_steps = if exact_grid { full_steps } else { steps_f.floor() as usize + 1 };

    check_health(&field, config.h1_ceiling)?;
    let mut rows = vec![TrajectoryRow::record(&field, &config.potential)];
    let mut snapshots = Vec::new();
    let mut pending_snapshots: Vec<T> = config.snapshot_times.clone();
    pending_snapshots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if pending_snapshots.first().map(|&s| s <= T::zero()).unwrap_or(false) {
        snapshots.push(field.clone());
        pending_snapshots.retain(|&s| s > T::zero());
    }

    for step in 1..=total_steps {
        if exact_grid || step < total_steps {
            integrator.step(&mut field);
            field.set_time(config.dt * T::from_usize(step).unwrap());
        } else {
            // final partial step onto T_final
            let rem = config.t_final - config.dt * T::from_usize(step - 1).unwrap();
            let mut out = strang_step(&field, &config.potential, rem);
            out.set_time(config.t_final);
            field = out;
        }

        while pending_snapshots
            .first()
            .map(|&s| field.time() + config.dt * lit::<T>(0.5) >= s)
            .unwrap_or(false)
        {
            snapshots.push(field.clone());
            pending_snapshots.remove(0);
        }

        let last = step == total_steps;
        if step % config.cadence == 0 || last {
            check_health(&field, config.h1_ceiling)?;
            rows.push(TrajectoryRow::record(&field, &config.potential));
        }
    }

    Ok(Trajectory {
        rows,
        snapshots,
        final_state: field,
        moduli_only: config.potential.moduli_only(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::charge;
    use crate::linpde::propagate_free;

    fn gaussian_config(spec: PotentialSpec<f64>) -> SimConfig<f64> {
        SimConfig {
            potential: spec,
            initial: InitialData::Gaussian {
                amplitude: 0.5,
                width: 1.0,
                center: 0.0,
                phase_k: 1.0,
            },
            half_width: 20.0,
            n: 512,
            dt: 0.01,
            t_final: 2.0,
            cadence: 10,
            h1_ceiling: None,
            snapshot_times: vec![],
        }
    }

    #[test]
    fn nonlinear_step_mtm_phase() {
        let spec = PotentialSpec::<f64>::mtm();
        let field =
            SpinorField::from_fn(8, 1.0, |_| (Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)))
                .unwrap();
        let out = nonlinear_step(&field, &spec, 0.1);
        let expect = Complex::from_polar(1.0, -0.4);
        assert!((out.u()[0] - expect).norm() < 1e-15);
        assert!((out.v()[0] - expect).norm() < 1e-15);
    }

    #[test]
    fn nonlinear_step_zero_dt_is_identity() {
        let spec = PotentialSpec::<f64>::photonic(1.0, 0.5);
        let field = SpinorField::<f64>::gaussian(64, 10.0, 0.8, 1.0, 0.0, 0.3).unwrap();
        let out = nonlinear_step(&field, &spec, 0.0);
        assert!(out.max_pointwise_distance(&field) < 1e-15);
    }

    #[test]
    fn moduli_only_step_preserves_moduli() {
        let spec = PotentialSpec::<f64>::coupled_mode(1.3);
        let field = SpinorField::from_fn(64, 10.0, |x: f64| {
            (Complex::new((-x * x / 4.0).exp(), 0.2), Complex::new(0.3, 0.5 * (-x * x / 7.0).exp()))
        })
        .unwrap();
        let out = nonlinear_step(&field, &spec, 0.37);
        for j in 0..field.n() {
            assert!((out.u()[j].norm() - field.u()[j].norm()).abs() < 1e-14);
            assert!((out.v()[j].norm() - field.v()[j].norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_phase_step_matches_rk4_limit() {
        // The exact moduli-only step must agree with many tiny RK4 steps of
        // the same pointwise ODE (forced through the generic branch by a
        // photonic spec with matching coefficients where a3 = a4 = 0 is not
        // available, so integrate manually here).
        let spec = PotentialSpec::<f64>::mtm();
        let u0 = Complex::new(0.6, -0.2);
        let v0 = Complex::new(-0.4, 0.9);
        let dt = 0.25;
        let exact = {
            let field = SpinorField::from_fn(8, 1.0, |_| (u0, v0)).unwrap();
            let out = nonlinear_step(&field, &spec, dt);
            (out.u()[0], out.v()[0])
        };
        // manual RK4 with tiny steps
        let minus_i = Complex::new(0.0, -1.0);
        let f = |a: Complex<f64>, b: Complex<f64>| {
            let (fu, fv) = eval_force(&spec, a, b);
            (minus_i * fu, minus_i * fv)
        };
        let steps = 2000;
        let h = dt / steps as f64;
        let (mut a, mut b) = (u0, v0);
        for _ in 0..steps {
            let (k1u, k1v) = f(a, b);
            let (k2u, k2v) = f(a + k1u * (h / 2.0), b + k1v * (h / 2.0));
            let (k3u, k3v) = f(a + k2u * (h / 2.0), b + k2v * (h / 2.0));
            let (k4u, k4v) = f(a + k3u * h, b + k3v * h);
            a += (k1u + (k2u + k3u) * 2.0 + k4u) * (h / 6.0);
            b += (k1v + (k2v + k3v) * 2.0 + k4v) * (h / 6.0);
        }
        assert!((exact.0 - a).norm() < 1e-12, "{} vs {}", exact.0, a);
        assert!((exact.1 - b).norm() < 1e-12);
    }

    #[test]
    fn strang_on_zero_field_stays_zero() {
        let spec = PotentialSpec::<f64>::gross_neveu();
        let field = SpinorField::<f64>::zero(128, 10.0).unwrap();
        let out = strang_step(&field, &spec, 0.05);
        assert_eq!(out.max_density(), 0.0);
    }

    #[test]
    fn strang_linear_only_equals_free_propagator() {
        let spec = PotentialSpec::<f64>::linear();
        let field = SpinorField::<f64>::gaussian(256, 15.0, 1.0, 1.0, 0.0, 0.5).unwrap();
        let a = strang_step(&field, &spec, 0.05);
        let b = propagate_free(&field, 0.05);
        assert!(a.max_pointwise_distance(&b) < 1e-12);
    }

    fn final_state(config: &SimConfig<f64>, dt: f64) -> SpinorField<f64> {
        let mut c = config.clone();
        c.dt = dt;
        run(&c).unwrap().final_state
    }

    #[test]
    fn strang_self_convergence_is_second_order() {
        for spec in [
            PotentialSpec::<f64>::mtm(),
            PotentialSpec::<f64>::gross_neveu(),
            PotentialSpec::<f64>::coupled_mode(1.0),
            PotentialSpec::<f64>::photonic(1.0, 0.5),
        ] {
            let mut config = gaussian_config(spec);
            config.t_final = 1.0;
            config.initial =
                InitialData::Gaussian { amplitude: 0.75, width: 1.0, center: 0.0, phase_k: 0.5 };
            let reference = final_state(&config, 0.02 / 64.0);
            let coarse = final_state(&config, 0.02).l2_distance(&reference);
            let fine = final_state(&config, 0.01).l2_distance(&reference);
            let ratio = coarse / fine;
            assert!(
                (3.6..=4.4).contains(&ratio),
                "spec {spec:?}: ratio = {ratio}, coarse = {coarse:e}, fine = {fine:e}"
            );
        }
    }

    #[test]
    fn charge_is_conserved_to_roundoff_over_many_steps() {
        // both substeps are unitary for moduli-only potentials
        let spec = PotentialSpec::<f64>::mtm();
        let field = SpinorField::<f64>::gaussian(256, 20.0, 0.5, 1.0, 0.0, 0.0).unwrap();
        let integrator = StrangIntegrator::new(spec, 256, 20.0, 0.005);
        let q0 = charge(&field);
        let mut f = field;
        for _ in 0..10_000 {
            integrator.step(&mut f);
        }
        let drift = (charge(&f) - q0).abs() / q0;
        assert!(drift < 1e-10, "drift = {drift:e}");
    }

    #[test]
    fn gauge_equivariance_of_evolution() {
        let spec = PotentialSpec::<f64>::photonic(1.0, 0.7);
        let field = SpinorField::<f64>::gaussian(256, 15.0, 0.7, 1.0, 0.0, 0.4).unwrap();
        let theta = 0.9;
        let rot = Complex::from_polar(1.0, theta);
        let mut rotated = field.clone();
        for z in rotated.u_mut() {
            *z *= rot;
        }
        for z in rotated.v_mut() {
            *z *= rot;
        }
        let integrator = StrangIntegrator::new(spec, 256, 15.0, 0.01);
        let mut a = field;
        let mut b = rotated;
        for _ in 0..50 {
            integrator.step(&mut a);
            integrator.step(&mut b);
        }
        for z in a.u_mut() {
            *z *= rot;
        }
        for z in a.v_mut() {
            *z *= rot;
        }
        assert!(a.max_pointwise_distance(&b) < 1e-11);
    }

    #[test]
    fn zero_final_time_gives_single_row() {
        let mut config = gaussian_config(PotentialSpec::mtm());
        config.t_final = 0.0;
        let tr = run(&config).unwrap();
        assert_eq!(tr.rows.len(), 1);
        assert_eq!(tr.rows[0].t, 0.0);
    }

    #[test]
    fn rows_strictly_increase_and_reach_t_final() {
        let mut config = gaussian_config(PotentialSpec::mtm());
        config.t_final = 0.55; // not an integer multiple of cadence*dt
        let tr = run(&config).unwrap();
        for w in tr.rows.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        assert!((tr.rows.last().unwrap().t - 0.55).abs() < 1e-12);
    }

    #[test]
    fn h1_ceiling_triggers_blowup_error() {
        let mut config = gaussian_config(PotentialSpec::mtm());
        config.h1_ceiling = Some(1e-6);
        match run(&config) {
            Err(EvolveError::BlowUp { reason: BlowUpReason::H1Ceiling { .. }, .. }) => {}
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn snapshot_times_are_captured() {
        let mut config = gaussian_config(PotentialSpec::mtm());
        config.t_final = 1.0;
        config.snapshot_times = vec![0.0, 0.5];
        let tr = run(&config).unwrap();
        assert_eq!(tr.snapshots.len(), 2);
        assert_eq!(tr.snapshots[0].time(), 0.0);
        assert!((tr.snapshots[1].time() - 0.5).abs() < config.dt);
    }

    #[test]
    fn rejects_bad_config() {
        let mut config = gaussian_config(PotentialSpec::mtm());
        config.dt = 0.2; // above h
        assert!(matches!(run(&config), Err(EvolveError::BadConfig(_))));
    }
}
