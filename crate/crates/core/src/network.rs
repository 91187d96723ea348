//! The seven-mode chain: mode ordering, loss rates, coupling schedules, the
//! dynamics matrix `M(t)` and the dark-state analysis built on it.
//!
//! The modes are ordered
//!
//! ```text
//! a_o1, b_m1, a_mw1, f, a_o2, b_m2, a_mw2
//! ```
//!
//! and every vector or matrix in the crate uses that order. The Langevin
//! equations read `i dv/dt = M(t) v + noise`, with `M` holding the
//! beam-splitter couplings off the diagonal and `-i kappa/2` on it.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::{ComplexMatrix, C64};

pub const MODE_COUNT: usize = 7;

/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum speed of light used for fiber mode counting, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Below this value of `adiabaticity_metric` a schedule is flagged as
/// non-adiabatic.
pub const ADIABATIC_THRESHOLD: f64 = 10.0;

/// Position of each mode in the state vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Optical1,
    Mechanical1,
    Microwave1,
    Fiber,
    Optical2,
    Mechanical2,
    Microwave2,
}

impl Mode {
    pub const ALL: [Mode; MODE_COUNT] = [
        Mode::Optical1,
        Mode::Mechanical1,
        Mode::Microwave1,
        Mode::Fiber,
        Mode::Optical2,
        Mode::Mechanical2,
        Mode::Microwave2,
    ];

    /// Zero-based index into state vectors.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Optical1 => "a_o1",
            Mode::Mechanical1 => "b_m1",
            Mode::Microwave1 => "a_mw1",
            Mode::Fiber => "f",
            Mode::Optical2 => "a_o2",
            Mode::Mechanical2 => "b_m2",
            Mode::Microwave2 => "a_mw2",
        }
    }

    pub fn is_mechanical(self) -> bool {
        matches!(self, Mode::Mechanical1 | Mode::Mechanical2)
    }
}

/// Loss rates, fiber coupling and bath occupation shared by both
/// optomechanical devices.
///
/// Rates are in whatever unit the schedule uses (typically `g = 1` or
/// `T = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Optical cavity decay rate.
    pub kappa_o: f64,
    /// Mechanical decay rate.
    pub kappa_m: f64,
    /// Microwave cavity decay rate.
    pub kappa_mw: f64,
    /// Fiber mode decay rate.
    pub kappa_f: f64,
    /// Fiber to optical cavity coupling.
    pub g_f: f64,
    /// Thermal occupation of the two mechanical baths.
    pub n_th: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self::lossless(1.0)
    }
}

impl NetworkParams {
    pub fn lossless(g_f: f64) -> Self {
        Self { kappa_o: 0.0, kappa_m: 0.0, kappa_mw: 0.0, kappa_f: 0.0, g_f, n_th: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("kappa_o", self.kappa_o),
            ("kappa_m", self.kappa_m),
            ("kappa_mw", self.kappa_mw),
            ("kappa_f", self.kappa_f),
            ("g_f", self.g_f),
            ("n_th", self.n_th),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Decay rate of each mode, in mode order.
    pub fn decay_rates(&self) -> [f64; MODE_COUNT] {
        [self.kappa_o, self.kappa_m, self.kappa_mw, self.kappa_f, self.kappa_o, self.kappa_m, self.kappa_mw]
    }

    /// Bath occupation of each mode: thermal for the mechanical baths, vacuum
    /// for the rest.
    pub fn bath_occupations(&self) -> [f64; MODE_COUNT] {
        Mode::ALL.map(|m| if m.is_mechanical() { self.n_th } else { 0.0 })
    }

    /// Every rate (including `g_f`) multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            kappa_o: self.kappa_o * s,
            kappa_m: self.kappa_m * s,
            kappa_mw: self.kappa_mw * s,
            kappa_f: self.kappa_f * s,
            g_f: self.g_f * s,
            n_th: self.n_th,
        }
    }
}

/// Instantaneous values of the four optomechanical couplings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Couplings {
    pub o1: f64,
    pub mw1: f64,
    pub o2: f64,
    pub mw2: f64,
}

impl Couplings {
    pub fn as_array(&self) -> [f64; 4] {
        [self.o1, self.mw1, self.o2, self.mw2]
    }

    /// `g_T^4 = g_mw1^2 g_o2^2 + 2 g_mw1^2 g_mw2^2 + g_o1^2 g_mw2^2`.
    pub fn g_t4(&self) -> f64 {
        let (o1, mw1, o2, mw2) = (self.o1 * self.o1, self.mw1 * self.mw1, self.o2 * self.o2, self.mw2 * self.mw2);
        mw1 * o2 + 2.0 * mw1 * mw2 + o1 * mw2
    }
}

type PulseFn = Arc<dyn Fn(f64) -> Couplings + Send + Sync>;

#[derive(Clone)]
enum Shape {
    LinearRamp,
    Custom(PulseFn),
}

/// Time dependence of the four couplings over `[0, T]`.
#[derive(Clone)]
pub struct CouplingSchedule {
    g: f64,
    duration: f64,
    shape: Shape,
}

impl fmt::Debug for CouplingSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shape = match self.shape {
            Shape::LinearRamp => "linear-ramp",
            Shape::Custom(_) => "custom",
        };
        f.debug_struct("CouplingSchedule")
            .field("g", &self.g)
            .field("duration", &self.duration)
            .field("shape", &shape)
            .finish()
    }
}

/// Counter-intuitive linear ramps:
/// `-g_o1 = g_mw2 = g (1 - t/T)` and `g_mw1 = -g_o2 = g t/T`.
pub fn linear_ramp_schedule(g: f64, duration: f64) -> Result<CouplingSchedule> {
    check_positive("g", g)?;
    check_positive("T", duration)?;
    Ok(CouplingSchedule { g, duration, shape: Shape::LinearRamp })
}

impl CouplingSchedule {
    /// Arbitrary pulse shapes. `g` is the peak strength used for scaling and
    /// reporting; the pulse function must be finite on `[0, duration]`.
    pub fn custom(
        g: f64,
        duration: f64,
        pulses: impl Fn(f64) -> Couplings + Send + Sync + 'static,
    ) -> Result<Self> {
        check_positive("g", g)?;
        check_positive("T", duration)?;
        Ok(Self { g, duration, shape: Shape::Custom(Arc::new(pulses)) })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn is_linear_ramp(&self) -> bool {
        matches!(self.shape, Shape::LinearRamp)
    }

    pub fn couplings(&self, t: f64) -> Couplings {
        match &self.shape {
            Shape::LinearRamp => {
                let s = t / self.duration;
                let down = self.g * (1.0 - s);
                let up = self.g * s;
                Couplings { o1: -down, mw1: up, o2: -up, mw2: down }
            }
            Shape::Custom(f) => f(t),
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.duration;
        if !t.is_finite() || t < -slack || t > self.duration + slack {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.duration)));
        }
        Ok(())
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// The 7x7 dynamics matrix `M(t)`.
pub fn build_dynamics_matrix(t: f64, sched: &CouplingSchedule, params: &NetworkParams) -> Result<ComplexMatrix> {
    sched.check_time(t)?;
    params.validate()?;
    let c = sched.couplings(t);
    if !c.as_array().iter().all(|v| v.is_finite()) {
        return Err(Error::Domain(format!("non-finite coupling at t = {t}")));
    }
    let mut m = DMatrix::<C64>::zeros(MODE_COUNT, MODE_COUNT);
    for (i, k) in params.decay_rates().iter().enumerate() {
        m[(i, i)] = C64::new(0.0, -0.5 * k);
    }
    let mut link = |a: Mode, b: Mode, v: f64| {
        m[(a.index(), b.index())] = C64::new(v, 0.0);
        m[(b.index(), a.index())] = C64::new(v, 0.0);
    };
    link(Mode::Optical1, Mode::Mechanical1, c.o1);
    link(Mode::Mechanical1, Mode::Microwave1, c.mw1);
    link(Mode::Optical1, Mode::Fiber, params.g_f);
    link(Mode::Fiber, Mode::Optical2, -params.g_f);
    link(Mode::Optical2, Mode::Mechanical2, c.o2);
    link(Mode::Mechanical2, Mode::Microwave2, c.mw2);
    ComplexMatrix::from_dmatrix(m)
}

/// Largest induced 1-norm of `M(t)` over `samples + 1` evenly spaced times.
pub fn max_generator_norm(sched: &CouplingSchedule, params: &NetworkParams, samples: usize) -> Result<f64> {
    let samples = samples.max(1);
    let mut best = 0.0f64;
    for k in 0..=samples {
        let t = sched.duration * k as f64 / samples as f64;
        best = best.max(build_dynamics_matrix(t, sched, params)?.norm_one());
    }
    Ok(best)
}

fn non_degenerate(t: f64, sched: &CouplingSchedule) -> Result<(Couplings, f64)> {
    sched.check_time(t)?;
    let c = sched.couplings(t);
    let gt4 = c.g_t4();
    let floor = (1e-12 * sched.g * sched.g).powi(2);
    if gt4.is_nan() || gt4 <= floor {
        return Err(Error::DegenerateSchedule { t });
    }
    Ok((c, gt4))
}

/// Zero-eigenvalue eigenvector of the lossless generator, normalised to unit
/// length. The sign follows the signed couplings literally.
pub fn dark_state(t: f64, sched: &CouplingSchedule) -> Result<[C64; MODE_COUNT]> {
    let (c, gt4) = non_degenerate(t, sched)?;
    let gt2 = gt4.sqrt();
    let v = [
        -c.mw1 * c.mw2,
        0.0,
        c.o1 * c.mw2,
        0.0,
        -c.mw1 * c.mw2,
        0.0,
        c.mw1 * c.o2,
    ];
    Ok(v.map(|x| C64::new(x / gt2, 0.0)))
}

/// First-order shift of the dark eigenvalue due to the loss terms on the
/// diagonal of `M`. Purely imaginary and independent of `kappa_m`, `kappa_f`.
pub fn dark_eigenvalue_perturbative(t: f64, sched: &CouplingSchedule, params: &NetworkParams) -> Result<C64> {
    params.validate()?;
    let (c, gt4) = non_degenerate(t, sched)?;
    let (o1, mw1, o2, mw2) = (c.o1 * c.o1, c.mw1 * c.mw1, c.o2 * c.o2, c.mw2 * c.mw2);
    let bracket = 2.0 * params.kappa_o * mw1 * mw2 + params.kappa_mw * o1 * mw2 + params.kappa_mw * mw1 * o2;
    Ok(C64::new(0.0, -bracket / (2.0 * gt4)))
}

/// Eigenvalue of the full (lossy) `M(t)` continuously connected to the dark
/// state, found by shifted inverse iteration seeded with the dark state and
/// the first-order estimate.
pub fn dark_eigenvalue_tracked(t: f64, sched: &CouplingSchedule, params: &NetworkParams) -> Result<C64> {
    let m = build_dynamics_matrix(t, sched, params)?;
    let shift = dark_eigenvalue_perturbative(t, sched, params)?;
    let mut x = DVector::from_column_slice(&dark_state(t, sched)?);
    let shifted = m.as_dmatrix() - DMatrix::<C64>::identity(MODE_COUNT, MODE_COUNT) * shift;
    let lu = shifted.lu();
    let mut lambda = shift;
    for _ in 0..50 {
        let Some(y) = lu.solve(&x) else {
            // shift is an exact eigenvalue
            return Ok(shift);
        };
        let norm = y.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Ok(shift);
        }
        x = y / C64::new(norm, 0.0);
        let mx = m.as_dmatrix() * &x;
        let next = x.dotc(&mx);
        let done = (next - lambda).norm() <= 1e-16 * (1.0 + next.norm());
        lambda = next;
        if done {
            break;
        }
    }
    Ok(lambda)
}

/// Slowest ratio between the instantaneous coupling strength and the rate of
/// change of the couplings.
///
/// For the linear ramp this is exactly `g T / 2`. Other schedules are scanned
/// for the minimum over `t` and over the four couplings of
/// `g_0j(t)^2 / |d g_ij / dt|`, where `g_0j^2 = g_oj^2 + g_mwj^2`, using
/// centred differences with step `T / 10^4`.
pub fn adiabaticity_metric(sched: &CouplingSchedule) -> f64 {
    if sched.is_linear_ramp() {
        return sched.g * sched.duration / 2.0;
    }
    let t_end = sched.duration;
    let h = t_end / 1e4;
    let samples = 2000;
    let mut best = f64::INFINITY;
    for k in 0..=samples {
        let t = t_end * k as f64 / samples as f64;
        let (lo, hi) = ((t - h).max(0.0), (t + h).min(t_end));
        let (a, b) = (sched.couplings(lo).as_array(), sched.couplings(hi).as_array());
        let now = sched.couplings(t);
        let strength = [now.o1 * now.o1 + now.mw1 * now.mw1, now.o2 * now.o2 + now.mw2 * now.mw2];
        for i in 0..4 {
            let rate = ((b[i] - a[i]) / (hi - lo)).abs();
            if rate > 0.0 {
                best = best.min(strength[i / 2] / rate);
            }
        }
    }
    best
}

pub fn is_adiabatic(metric: f64) -> bool {
    metric >= ADIABATIC_THRESHOLD
}

/// Device parameters of one optomechanical transducer in SI units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Cavity resonance, rad/s.
    pub omega_c: f64,
    /// Mechanical resonance, rad/s.
    pub omega_m: f64,
    /// Zero-point fluctuation amplitude, m.
    pub x_zpf: f64,
    /// Fabry-Perot cavity length, m.
    pub cavity_length: f64,
    /// Drive power, W.
    pub drive_power: f64,
    /// Cavity decay rate seen by the drive, rad/s.
    pub gamma_c: f64,
    /// Intracavity photon number.
    pub n_photons: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnhancedCoupling {
    /// Single-photon coupling magnitude `omega_c x_zpf / L`, rad/s.
    pub g0: f64,
    /// Drive-enhanced coupling `g0 sqrt(n)`, rad/s.
    pub g: f64,
    /// Drive amplitude `sqrt(P gamma_c / (hbar omega_c))`, 1/sqrt(s).
    pub drive_amplitude: f64,
}

/// Linearised optomechanical coupling for a driven Fabry-Perot cavity.
pub fn enhanced_coupling(p: &PhysicalParams) -> Result<EnhancedCoupling> {
    let fields = [
        ("omega_c", p.omega_c),
        ("omega_m", p.omega_m),
        ("x_zpf", p.x_zpf),
        ("cavity_length", p.cavity_length),
        ("drive_power", p.drive_power),
        ("gamma_c", p.gamma_c),
        ("n_photons", p.n_photons),
    ];
    for (name, v) in fields {
        check_positive(name, v)?;
    }
    let g0 = p.omega_c * p.x_zpf / p.cavity_length;
    Ok(EnhancedCoupling {
        g0,
        g: g0 * p.n_photons.sqrt(),
        drive_amplitude: (p.drive_power * p.gamma_c / (HBAR * p.omega_c)).sqrt(),
    })
}

/// Number of fiber modes within the cavity linewidth, `Γ l / (2 π c)`. The
/// single-mode fiber model needs this to be at most about one.
pub fn short_fiber_mode_count(gamma: f64, length_m: f64) -> f64 {
    gamma * length_m / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT)
}

pub fn short_fiber_limit_holds(mode_count: f64) -> bool {
    mode_count <= 1.0
}
