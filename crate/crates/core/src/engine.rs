//! Full transfer runs: the time-ordered propagator of the Langevin equations,
//! the bath-noise second moments it implies, and the resulting single-mode
//! channel from microwave cavity 1 to microwave cavity 2.
//!
//! The solution of `i dv/dt = M v + i sqrt(K) v_in` is
//!
//! ```text
//! v(T) = P(T,0) v(0) + ∫ P(T,t') sqrt(K) v_in(t') dt'
//! ```
//!
//! Baths are white: `<a_in(t) a_in†(t')> = (N+1) δ(t-t')` and
//! `<a_in† a_in> = N δ` with `N = n_th` for the mechanical baths and zero
//! otherwise. Symmetrised second moments of the output therefore pick up
//! `κ (N + 1/2) ∫ |P(T,t')|²` from every channel.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::matops::{self, ComplexMatrix, SamplePoint, C64};
use crate::network::{self, CouplingSchedule, Mode, NetworkParams, MODE_COUNT};

/// Target for `max |M| dt` when picking a default step count.
pub const DEFAULT_NORM_DT: f64 = 0.05;

/// `propagate` refuses step sizes with `max |M| dt` above this.
pub const MAX_NORM_DT: f64 = 0.5;

/// Floor on the default step count; keeps the trapezoidal noise integrals
/// well below the sum-rule tolerance.
pub const MIN_DEFAULT_STEPS: usize = 20_000;

/// Time-ordered propagator `P(T, 0)` together with the single-step factors
/// it was built from.
#[derive(Clone, Debug)]
pub struct Propagator {
    matrix: ComplexMatrix,
    duration: f64,
    steps: usize,
    per_step: Option<Vec<ComplexMatrix>>,
}

impl Propagator {
    /// `P(0, 0) = I`.
    pub fn identity() -> Self {
        Self { matrix: ComplexMatrix::identity(MODE_COUNT), duration: 0.0, steps: 0, per_step: Some(vec![]) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.duration / self.steps as f64
        }
    }

    pub fn per_step(&self) -> Option<&[ComplexMatrix]> {
        self.per_step.as_deref()
    }

    /// Drops the stored single-step factors.
    pub fn without_factors(mut self) -> Self {
        self.per_step = None;
        self
    }

    fn factors(&self) -> Result<&[ComplexMatrix]> {
        self.per_step()
            .ok_or_else(|| Error::State("propagator was built without per-step factors".into()))
    }

    /// Row `row` of `P(T, t_k)` for every grid time `t_k = k dt`, `k = 0..=steps`.
    pub fn suffix_rows(&self, row: usize) -> Result<Vec<[C64; MODE_COUNT]>> {
        if row >= MODE_COUNT {
            return Err(Error::Dimension(format!("row {row} out of range")));
        }
        let factors = self.factors()?;
        let mut out = vec![[C64::new(0.0, 0.0); MODE_COUNT]; factors.len() + 1];
        let mut r = [C64::new(0.0, 0.0); MODE_COUNT];
        r[row] = C64::new(1.0, 0.0);
        out[factors.len()] = r;
        for (k, f) in factors.iter().enumerate().rev() {
            let m = f.as_dmatrix();
            let mut next = [C64::new(0.0, 0.0); MODE_COUNT];
            for (j, slot) in next.iter_mut().enumerate() {
                *slot = (0..MODE_COUNT).map(|i| r[i] * m[(i, j)]).sum();
            }
            r = next;
            out[k] = r;
        }
        Ok(out)
    }

    /// Interior propagator `P(T, t_k)` built from the stored suffix of
    /// factors.
    pub fn from_step(&self, k: usize) -> Result<ComplexMatrix> {
        let factors = self.factors()?;
        if k > factors.len() {
            return Err(Error::Domain(format!("step {k} beyond {}", factors.len())));
        }
        if k == factors.len() {
            return Ok(ComplexMatrix::identity(MODE_COUNT));
        }
        matops::chain(&factors[k..])
    }
}

/// Step count that keeps `max |M| dt <= DEFAULT_NORM_DT`, never below
/// `MIN_DEFAULT_STEPS`.
pub fn default_steps(sched: &CouplingSchedule, params: &NetworkParams) -> Result<usize> {
    let norm = network::max_generator_norm(sched, params, 200)?;
    let needed = (norm * sched.duration() / DEFAULT_NORM_DT).ceil() as usize;
    Ok(needed.max(MIN_DEFAULT_STEPS))
}

/// Propagates over `[0, T]` with the midpoint product.
pub fn propagate(sched: &CouplingSchedule, params: &NetworkParams, steps: usize) -> Result<Propagator> {
    propagate_with(sched, params, steps, SamplePoint::Midpoint)
}

pub fn propagate_with(
    sched: &CouplingSchedule,
    params: &NetworkParams,
    steps: usize,
    point: SamplePoint,
) -> Result<Propagator> {
    if steps == 0 {
        return Err(Error::Domain("at least one time step is required".into()));
    }
    params.validate()?;
    let duration = sched.duration();
    let dt = duration / steps as f64;
    let norm_dt = network::max_generator_norm(sched, params, steps.min(1000))? * dt;
    if norm_dt > MAX_NORM_DT {
        return Err(Error::Resolution { norm_dt, limit: MAX_NORM_DT });
    }
    let factors = matops::step_factors(
        |t| network::build_dynamics_matrix(t, sched, params),
        0.0,
        duration,
        steps,
        point,
    )?;
    let matrix = matops::chain(&factors)?;
    Ok(Propagator { matrix, duration, steps, per_step: Some(factors) })
}

/// Bath contribution of one mode's decay channel to an output row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelNoise {
    pub mode: Mode,
    pub rate: f64,
    pub occupation: f64,
    /// `∫_0^T |P(T,t')_{out,ch}|² dt'` by the trapezoidal rule.
    pub integral: f64,
    /// `rate (occupation + 1/2) integral`.
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseMoments {
    pub out: Mode,
    /// Symmetrised per-quadrature variance injected by the baths.
    pub added_noise_var: f64,
    pub channels: Vec<ChannelNoise>,
    /// Row `out` of `P(T, 0)`.
    pub transmitted: [C64; MODE_COUNT],
    /// `Σ_j |P_{out,j}|² + Σ_ch κ_ch ∫ |P_{out,ch}|²`; one for an exact solution.
    pub sum_rule: f64,
    pub sum_rule_residual: f64,
}

/// Bath-noise second moments of output mode `out`.
pub fn noise_second_moments(prop: &Propagator, params: &NetworkParams, out: Mode) -> Result<NoiseMoments> {
    params.validate()?;
    let rows = prop.suffix_rows(out.index())?;
    let dt = prop.dt();
    let rates = params.decay_rates();
    let occupations = params.bath_occupations();

    let mut channels = Vec::with_capacity(MODE_COUNT);
    for mode in Mode::ALL {
        let ch = mode.index();
        let weights: Vec<f64> = rows.iter().map(|r| r[ch].norm_sqr()).collect();
        let integral = trapezoid(&weights, dt);
        channels.push(ChannelNoise {
            mode,
            rate: rates[ch],
            occupation: occupations[ch],
            integral,
            variance: rates[ch] * (occupations[ch] + 0.5) * integral,
        });
    }
    let transmitted = rows[0];
    let sum_rule = transmitted.iter().map(|z| z.norm_sqr()).sum::<f64>()
        + channels.iter().map(|c| c.rate * c.integral).sum::<f64>();
    Ok(NoiseMoments {
        out,
        added_noise_var: channels.iter().map(|c| c.variance).sum(),
        channels,
        transmitted,
        sum_rule,
        sum_rule_residual: (sum_rule - 1.0).abs(),
    })
}

/// `|S - 1|` for every output row.
pub fn sum_rule_residuals(prop: &Propagator, params: &NetworkParams) -> Result<[f64; MODE_COUNT]> {
    let mut out = [0.0; MODE_COUNT];
    for mode in Mode::ALL {
        out[mode.index()] = noise_second_moments(prop, params, mode)?.sum_rule_residual;
    }
    Ok(out)
}

fn trapezoid(samples: &[f64], dx: f64) -> f64 {
    samples.windows(2).map(|w| 0.5 * dx * (w[0] + w[1])).sum()
}

/// Single-mode Gaussian channel from microwave cavity 1 to microwave cavity 2:
/// `x_out = b x_in + noise` on the quadratures `(q, p)`, with isotropic
/// symmetrised noise variance `added_noise_var` per quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferChannel {
    pub b: Matrix2<f64>,
    pub added_noise_var: f64,
    /// `c = P(T,0)` from microwave 1 to microwave 2.
    pub transmitted_amp: C64,
    pub sum_rule_residual: f64,
}

impl TransferChannel {
    /// Phase-insensitive channel `a_out = c a_in + noise`.
    pub fn from_amplitude(c: C64, added_noise_var: f64) -> Self {
        Self { b: quadrature_map(c), added_noise_var, transmitted_amp: c, sum_rule_residual: 0.0 }
    }

    pub fn identity() -> Self {
        Self::from_amplitude(C64::new(1.0, 0.0), 0.0)
    }

    /// Output quadrature covariance `(σ_qq, σ_qp; σ_pq, σ_pp)` when the input
    /// is vacuum. Vacuum itself is `I / 2` here.
    pub fn vacuum_output_cov(&self) -> Matrix2<f64> {
        self.b * Matrix2::identity() * 0.5 * self.b.transpose() + Matrix2::identity() * self.added_noise_var
    }
}

/// Quadrature matrix of `a -> c a` with `q = (a + a†)/√2`, `p = -i(a - a†)/√2`.
pub fn quadrature_map(c: C64) -> Matrix2<f64> {
    Matrix2::new(c.re, -c.im, c.im, c.re)
}

/// Propagates and reduces the result to the microwave-1 to microwave-2
/// channel.
pub fn characterize_channel(sched: &CouplingSchedule, params: &NetworkParams, steps: usize) -> Result<TransferChannel> {
    let prop = propagate(sched, params, steps)?;
    channel_from_propagator(&prop, params)
}

pub fn channel_from_propagator(prop: &Propagator, params: &NetworkParams) -> Result<TransferChannel> {
    let input = Mode::Microwave1.index();
    let noise = noise_second_moments(prop, params, Mode::Microwave2)?;
    let c = noise.transmitted[input];
    // other initial modes start in vacuum and leak into the output
    let leaked: f64 = noise
        .transmitted
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != input)
        .map(|(_, z)| 0.5 * z.norm_sqr())
        .sum();
    Ok(TransferChannel {
        b: quadrature_map(c),
        added_noise_var: leaked + noise.added_noise_var,
        transmitted_amp: c,
        sum_rule_residual: noise.sum_rule_residual,
    })
}

/// First and second moments of a single mode: `<a>`, the symmetrised
/// `<{δa, δa†}>/2` and the anomalous `<δa δa>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMoments {
    pub mean: C64,
    pub normal: f64,
    pub anomalous: C64,
}

impl ModeMoments {
    pub fn vacuum() -> Self {
        Self { mean: C64::new(0.0, 0.0), normal: 0.5, anomalous: C64::new(0.0, 0.0) }
    }

    /// Builds moments from quadrature means `(<q>, <p>)` and a covariance
    /// matrix in the doubled convention (vacuum = identity).
    pub fn from_quadratures(mean: [f64; 2], cov2: &Matrix2<f64>) -> Self {
        Self {
            mean: C64::new(mean[0], mean[1]) / 2f64.sqrt(),
            normal: (cov2[(0, 0)] + cov2[(1, 1)]) / 4.0,
            anomalous: C64::new((cov2[(0, 0)] - cov2[(1, 1)]) / 4.0, cov2[(0, 1)] / 2.0),
        }
    }

    pub fn quadrature_mean(&self) -> [f64; 2] {
        [self.mean.re * 2f64.sqrt(), self.mean.im * 2f64.sqrt()]
    }

    /// Quadrature covariance in the doubled convention (vacuum = identity).
    pub fn quadrature_cov(&self) -> Matrix2<f64> {
        let qq = self.normal + self.anomalous.re;
        let pp = self.normal - self.anomalous.re;
        let qp = self.anomalous.im;
        Matrix2::new(2.0 * qq, 2.0 * qp, 2.0 * qp, 2.0 * pp)
    }
}

/// Moments of all seven modes at time `T` from direct integration of the
/// moment equations.
#[derive(Clone, Debug)]
pub struct OracleMoments {
    pub mean: Vec<C64>,
    /// `C_ij = <{δv_i, δv_j†}>/2`.
    pub normal: DMatrix<C64>,
    /// `A_ij = <δv_i δv_j>`.
    pub anomalous: DMatrix<C64>,
}

impl OracleMoments {
    pub fn mode(&self, m: Mode) -> ModeMoments {
        let i = m.index();
        ModeMoments { mean: self.mean[i], normal: self.normal[(i, i)].re, anomalous: self.anomalous[(i, i)] }
    }
}

/// Integrates
///
/// ```text
/// dμ/dt = -i M μ
/// dC/dt = -i M C + i C M† + Q,    Q = diag(κ (N + 1/2))
/// dA/dt = -i M A - i A Mᵀ
/// ```
///
/// with classical RK4, starting from vacuum in every mode except microwave
/// cavity 1, which starts in `input`. Independent of the propagator path; it
/// exists to cross-check it.
pub fn moment_ode_oracle(
    sched: &CouplingSchedule,
    params: &NetworkParams,
    steps: usize,
    input: ModeMoments,
) -> Result<OracleMoments> {
    if steps == 0 {
        return Err(Error::Domain("at least one time step is required".into()));
    }
    params.validate()?;
    let n = MODE_COUNT;
    let q_diag: Vec<C64> = params
        .decay_rates()
        .iter()
        .zip(params.bath_occupations())
        .map(|(k, occ)| C64::new(k * (occ + 0.5), 0.0))
        .collect();
    let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(q_diag));
    let mi = C64::new(0.0, -1.0);

    let inp = Mode::Microwave1.index();
    let mut mu = nalgebra::DVector::<C64>::zeros(n);
    mu[inp] = input.mean;
    let mut cn = DMatrix::<C64>::identity(n, n) * C64::new(0.5, 0.0);
    cn[(inp, inp)] = C64::new(input.normal, 0.0);
    let mut ca = DMatrix::<C64>::zeros(n, n);
    ca[(inp, inp)] = input.anomalous;

    let gen = |t: f64| -> Result<DMatrix<C64>> {
        Ok(network::build_dynamics_matrix(t.min(sched.duration()), sched, params)?.into_dmatrix())
    };
    type State = (nalgebra::DVector<C64>, DMatrix<C64>, DMatrix<C64>);
    let rhs = |m: &DMatrix<C64>, s: &State| -> State {
        let mi_m = m * mi;
        let m_dag = m.adjoint();
        let m_t = m.transpose();
        (
            &mi_m * &s.0,
            &mi_m * &s.1 + &s.1 * &m_dag * C64::new(0.0, 1.0) + &q,
            &mi_m * &s.2 + &s.2 * &m_t * mi,
        )
    };
    let axpy = |s: &State, k: &State, h: f64| -> State {
        let h = C64::new(h, 0.0);
        (&s.0 + &k.0 * h, &s.1 + &k.1 * h, &s.2 + &k.2 * h)
    };

    let h = sched.duration() / steps as f64;
    let mut state: State = (mu, cn, ca);
    for j in 0..steps {
        let t = j as f64 * h;
        let m0 = gen(t)?;
        let mh = gen(t + 0.5 * h)?;
        let m1 = gen(t + h)?;
        let k1 = rhs(&m0, &state);
        let k2 = rhs(&mh, &axpy(&state, &k1, 0.5 * h));
        let k3 = rhs(&mh, &axpy(&state, &k2, 0.5 * h));
        let k4 = rhs(&m1, &axpy(&state, &k3, h));
        let w = |a: &DMatrix<C64>, b: &DMatrix<C64>, c: &DMatrix<C64>, d: &DMatrix<C64>| {
            (a + b * C64::new(2.0, 0.0) + c * C64::new(2.0, 0.0) + d) * C64::new(h / 6.0, 0.0)
        };
        let dmu = (&k1.0 + &k2.0 * C64::new(2.0, 0.0) + &k3.0 * C64::new(2.0, 0.0) + &k4.0) * C64::new(h / 6.0, 0.0);
        state = (
            &state.0 + dmu,
            &state.1 + w(&k1.1, &k2.1, &k3.1, &k4.1),
            &state.2 + w(&k1.2, &k2.2, &k3.2, &k4.2),
        );
    }
    let (mu, normal, anomalous) = state;
    if !(normal.iter().chain(anomalous.iter()).chain(mu.iter()).all(|z| z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Numeric("moment integration diverged".into()));
    }
    Ok(OracleMoments { mean: mu.iter().copied().collect(), normal, anomalous })
}
