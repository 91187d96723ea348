//! Input states, their image under a [`TransferChannel`], and transfer
//! fidelities.
//!
//! Covariance matrices of [`GaussianState`] use the doubled convention in
//! which vacuum is the identity: `A = 2 (σ_qq, σ_qp; σ_pq, σ_pp)` with
//! `q = (a + a†)/√2` and `p = -i(a - a†)/√2`. Fidelity is the transition
//! probability `Tr[√ρ1 ρ2 √ρ1]`, which for pure states is `|<ψ1|ψ2>|²`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};

use crate::engine::{self, TransferChannel};
use crate::error::{Error, Result};
use crate::matops::C64;
use crate::network::{CouplingSchedule, NetworkParams};

/// Single-mode Gaussian state: quadrature means and doubled covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianState {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
}

impl GaussianState {
    /// Checked constructor: `cov` must be symmetric, positive definite and
    /// satisfy `det(cov) >= 1`.
    pub fn new(mean: Vector2<f64>, cov: Matrix2<f64>) -> Result<Self> {
        if !(mean.iter().chain(cov.iter()).all(|v| v.is_finite())) {
            return Err(Error::Domain("non-finite state moments".into()));
        }
        let scale = cov.abs().max().max(1.0);
        if (cov[(0, 1)] - cov[(1, 0)]).abs() > 1e-12 * scale {
            return Err(Error::Domain("covariance is not symmetric".into()));
        }
        if cov[(0, 0)] <= 0.0 || cov.determinant() <= 0.0 {
            return Err(Error::Domain("covariance is not positive definite".into()));
        }
        if cov.determinant() < 1.0 - 1e-10 {
            return Err(Error::Domain(format!(
                "covariance violates the uncertainty bound: det = {}",
                cov.determinant()
            )));
        }
        Ok(Self { mean, cov })
    }

    pub fn vacuum() -> Self {
        Self { mean: Vector2::zeros(), cov: Matrix2::identity() }
    }

    pub fn coherent(alpha: C64) -> Self {
        squeezed_coherent_state(alpha, 0.0)
    }
}

/// `D(α) S(r) |0>` with the unitary `S(r) = exp((r a² - r a†²)/2)`; for
/// `r > 0` the `q` quadrature is squeezed.
pub fn squeezed_coherent_state(alpha: C64, r: f64) -> GaussianState {
    let s = 2f64.sqrt();
    GaussianState {
        mean: Vector2::new(s * alpha.re, s * alpha.im),
        cov: Matrix2::new((-2.0 * r).exp(), 0.0, 0.0, (2.0 * r).exp()),
    }
}

/// Kind of state sent into microwave cavity 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InputSpec {
    Coherent { alpha: C64 },
    SqueezedCoherent { alpha: C64, r: f64 },
    /// Superpositions of |0> and |1>, scored by the average fidelity.
    Qubit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InputKind {
    Coherent,
    Squeezed,
    Qubit,
}

impl InputSpec {
    pub fn kind(&self) -> InputKind {
        match self {
            InputSpec::Coherent { .. } => InputKind::Coherent,
            InputSpec::SqueezedCoherent { .. } => InputKind::Squeezed,
            InputSpec::Qubit => InputKind::Qubit,
        }
    }

    /// Gaussian description, `None` for the qubit kind.
    pub fn gaussian(&self) -> Option<GaussianState> {
        match *self {
            InputSpec::Coherent { alpha } => Some(GaussianState::coherent(alpha)),
            InputSpec::SqueezedCoherent { alpha, r } => Some(squeezed_coherent_state(alpha, r)),
            InputSpec::Qubit => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            InputSpec::Coherent { alpha } => alpha.re.is_finite() && alpha.im.is_finite(),
            InputSpec::SqueezedCoherent { alpha, r } => alpha.re.is_finite() && alpha.im.is_finite() && r.is_finite(),
            InputSpec::Qubit => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("non-finite input parameters in {self}")))
        }
    }
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alpha = |a: &C64| {
            if a.im == 0.0 {
                format!("{}", a.re)
            } else {
                format!("{}{:+}i", a.re, a.im)
            }
        };
        match self {
            InputSpec::Coherent { alpha: a } => write!(f, "coherent:{}", alpha(a)),
            InputSpec::SqueezedCoherent { alpha: a, r } => write!(f, "squeezed:{},{}", alpha(a), r),
            InputSpec::Qubit => write!(f, "qubit"),
        }
    }
}

fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse complex amplitude '{s}'"));
    if let Ok(re) = s.parse::<f64>() {
        return Ok(C64::new(re, 0.0));
    }
    let body = s.strip_suffix('i').ok_or_else(bad)?;
    // split at the last sign that is not part of an exponent
    let split = body
        .char_indices()
        .skip(1)
        .filter(|&(i, ch)| (ch == '+' || ch == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E'))
        .map(|(i, _)| i)
        .last();
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            let im = body[i..].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, im))
        }
        None => Ok(C64::new(0.0, body.parse::<f64>().map_err(|_| bad())?)),
    }
}

impl FromStr for InputSpec {
    type Err = Error;

    /// `coherent:<alpha>`, `squeezed:<alpha>,<r>` or `qubit`, where `alpha`
    /// is a real number or `a+bi`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let spec = match kind {
            "coherent" => InputSpec::Coherent { alpha: parse_complex(args)? },
            "squeezed" => {
                let (a, r) = args
                    .split_once(',')
                    .ok_or_else(|| Error::Config(format!("squeezed input needs 'alpha,r', got '{args}'")))?;
                let r = r.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad squeeze parameter '{r}'")))?;
                InputSpec::SqueezedCoherent { alpha: parse_complex(a)?, r }
            }
            "qubit" if args.is_empty() => InputSpec::Qubit,
            _ => return Err(Error::Config(format!("unknown input '{s}'"))),
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }
}

/// `mean' = b mean`, `cov' = b cov bᵀ + 2 σ²_env I`.
pub fn apply_channel(state: &GaussianState, ch: &TransferChannel) -> GaussianState {
    GaussianState {
        mean: ch.b * state.mean,
        cov: ch.b * state.cov * ch.b.transpose() + Matrix2::identity() * (2.0 * ch.added_noise_var),
    }
}

/// Fidelity between two single-mode Gaussian states,
/// `exp(-βᵀ (A1 + A2)⁻¹ β) / sqrt(det((A1 + A2)/2))` with `β` the mean
/// difference. Exact when at least one of the states is pure.
pub fn gaussian_fidelity(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    let sum = s1.cov + s2.cov;
    let inv = sum
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular covariance sum".into()))?;
    let beta = s2.mean - s1.mean;
    let det = (sum / 2.0).determinant();
    if det.is_nan() || det <= 0.0 {
        return Err(Error::Numeric(format!("covariance sum has determinant {det}")));
    }
    let exponent = (beta.transpose() * inv * beta)[(0, 0)];
    Ok((-exponent).exp() / det.sqrt())
}

/// Average fidelity of a qubit (|0>, |1> superposition) sent through a
/// Gaussian channel with quadrature map `ch.b`.
///
/// `out_cov` is the output quadrature covariance `(σ_qq, σ_qp; σ_pq, σ_pp)`
/// for a vacuum input (plain convention: vacuum is `I/2`). The noise
/// ellipse is diagonalised into principal variances `σ1² >= σ2²` at angle
/// `θ`, and the map enters through `C` and `D̃`:
///
/// ```text
/// C  = (B11 - i B12 + i B21 + B22) / 2
/// D̃ = (B11 + i B12 + i B21 - B22) e^{-2iθ} / 2
/// ```
pub fn qubit_avg_fidelity(ch: &TransferChannel, out_cov: &Matrix2<f64>) -> f64 {
    let (sqq, spp) = (out_cov[(0, 0)], out_cov[(1, 1)]);
    let cross = out_cov[(0, 1)] + out_cov[(1, 0)];
    let mean_var = 0.5 * (sqq + spp);
    let split = (0.25 * (sqq - spp).powi(2) + 0.25 * cross * cross).sqrt();
    let theta = if split == 0.0 { 0.0 } else { 0.5 * cross.atan2(sqq - spp) };
    let s1 = mean_var + split;
    let s2 = mean_var - split;

    let b = &ch.b;
    let i = C64::new(0.0, 1.0);
    let c = 0.5 * (b[(0, 0)] - i * b[(0, 1)] + i * b[(1, 0)] + b[(1, 1)]);
    let d = 0.5 * (b[(0, 0)] + i * b[(0, 1)] + i * b[(1, 0)] - b[(1, 1)]) * C64::from_polar(1.0, -2.0 * theta);
    let plus = c + d.conj();
    let minus = c - d.conj();

    let (h1, h2) = (s1 + 0.5, s2 + 0.5);
    let (p2, m2) = (plus.norm_sqr(), minus.norm_sqr());
    let bracket = 3.0 + 3.0 * (s1 * s2 - 0.25) / (h1 * h2) + plus.re / h1 + minus.re / h2
        - p2 * (s1 - 1.0) / (h1 * h1)
        - m2 * (s2 - 1.0) / (h2 * h2)
        - (p2 * (s2 - 0.5) + m2 * (s1 - 0.5)) / (2.0 * h1 * h2);
    bracket / (6.0 * (h1 * h2).sqrt())
}

/// Fidelity of `input` after passing through an already characterised
/// channel.
pub fn fidelity_through(input: &InputSpec, ch: &TransferChannel) -> Result<f64> {
    input.validate()?;
    match input.gaussian() {
        Some(state) => gaussian_fidelity(&state, &apply_channel(&state, ch)),
        None => Ok(qubit_avg_fidelity(ch, &ch.vacuum_output_cov())),
    }
}

/// Runs a full transfer and scores `input` at microwave cavity 2.
pub fn transfer_fidelity(
    input: &InputSpec,
    sched: &CouplingSchedule,
    params: &NetworkParams,
    steps: usize,
) -> Result<f64> {
    input.validate()?;
    let ch = engine::characterize_channel(sched, params, steps)?;
    fidelity_through(input, &ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn squeezed_coherent_examples() {
        let v = squeezed_coherent_state(c(0.0), 0.0);
        assert_eq!(v, GaussianState::vacuum());
        let coh = squeezed_coherent_state(c(1.0), 0.0);
        assert_abs_diff_eq!(coh.mean[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(coh.mean[1], 0.0);
        assert_eq!(coh.cov, Matrix2::identity());
        let sq = squeezed_coherent_state(c(1.0), 0.4);
        assert_eq!(sq.cov, Matrix2::new((-0.8f64).exp(), 0.0, 0.0, 0.8f64.exp()));
        assert!(GaussianState::new(sq.mean, sq.cov).is_ok());
    }

    #[test]
    fn state_validation() {
        let m = Vector2::zeros();
        assert!(GaussianState::new(m, Matrix2::new(1.0, 0.3, 0.2, 1.0)).is_err());
        assert!(GaussianState::new(m, Matrix2::new(0.5, 0.0, 0.0, 0.5)).is_err());
        assert!(GaussianState::new(m, Matrix2::new(-1.0, 0.0, 0.0, -1.0)).is_err());
        assert!(GaussianState::new(m, Matrix2::new(2.0, 0.5, 0.5, 1.0)).is_ok());
    }

    #[test]
    fn channel_limits() {
        let s = squeezed_coherent_state(C64::new(0.3, -0.7), 0.25);
        let same = apply_channel(&s, &TransferChannel::identity());
        assert_eq!(same, s);

        let zero = TransferChannel::from_amplitude(c(0.0), 0.5);
        assert_eq!(apply_channel(&s, &zero), GaussianState::vacuum());

        let rot = TransferChannel::from_amplitude(C64::from_polar(1.0, 0.9), 0.0);
        let out = apply_channel(&GaussianState::vacuum(), &rot);
        assert!((out.cov - Matrix2::identity()).abs().max() < 1e-15);
        assert_eq!(out.mean, Vector2::zeros());
    }

    #[test]
    fn gaussian_fidelity_anchors() {
        let vac = GaussianState::vacuum();
        let coh = GaussianState::coherent(c(1.0));
        assert_eq!(gaussian_fidelity(&coh, &coh).unwrap(), 1.0);
        assert_abs_diff_eq!(gaussian_fidelity(&vac, &coh).unwrap(), (-1.0f64).exp(), epsilon = 1e-12);
        let sq = squeezed_coherent_state(c(0.0), 0.4);
        assert_abs_diff_eq!(gaussian_fidelity(&vac, &sq).unwrap(), 1.0 / 0.4f64.cosh(), epsilon = 1e-12);
    }

    #[test]
    fn qubit_fidelity_ideal_channel() {
        let ch = TransferChannel::identity();
        assert_eq!(qubit_avg_fidelity(&ch, &ch.vacuum_output_cov()), 1.0);
    }

    #[test]
    fn qubit_fidelity_zero_channel_is_one_half() {
        // vacuum output: <ψ|0><0|ψ> averaged over the Bloch sphere
        let ch = TransferChannel::from_amplitude(c(0.0), 0.5);
        assert_abs_diff_eq!(qubit_avg_fidelity(&ch, &ch.vacuum_output_cov()), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn qubit_fidelity_decreases_with_added_noise() {
        let mut last = 1.0;
        for k in 1..20 {
            let eps = 1e-3 * k as f64;
            let ch = TransferChannel::from_amplitude(c(1.0), eps);
            let f = qubit_avg_fidelity(&ch, &ch.vacuum_output_cov());
            assert!(f < last, "not decreasing at eps = {eps}");
            assert!(1.0 - f < 2.0 * eps);
            last = f;
        }
    }

    #[test]
    fn theta_choice_is_immaterial_for_isotropic_channels() {
        // D̃ vanishes for a b of the form produced by a beam-splitter chain
        let ch = TransferChannel::from_amplitude(C64::from_polar(0.8, 0.4), 0.3);
        let iso = ch.vacuum_output_cov();
        let f0 = qubit_avg_fidelity(&ch, &iso);
        let d = 0.5 * (ch.b[(0, 0)] - ch.b[(1, 1)]) + 0.5 * C64::new(0.0, 1.0) * (ch.b[(0, 1)] + ch.b[(1, 0)]);
        assert!(d.norm() < 1e-16);
        // nudging the covariance off isotropy along any axis changes θ freely
        for phi in [0.0f64, 0.7, 2.0] {
            let tiny = 1e-9;
            let cov = iso + Matrix2::new(tiny * phi.cos(), tiny * phi.sin(), tiny * phi.sin(), -tiny * phi.cos());
            assert_abs_diff_eq!(qubit_avg_fidelity(&ch, &cov), f0, epsilon = 1e-8);
        }
    }

    #[test]
    fn input_spec_parsing() {
        assert_eq!("coherent:1".parse::<InputSpec>().unwrap(), InputSpec::Coherent { alpha: c(1.0) });
        assert_eq!(
            "squeezed:1,0.4".parse::<InputSpec>().unwrap(),
            InputSpec::SqueezedCoherent { alpha: c(1.0), r: 0.4 }
        );
        assert_eq!(
            "coherent:0.5-2i".parse::<InputSpec>().unwrap(),
            InputSpec::Coherent { alpha: C64::new(0.5, -2.0) }
        );
        assert_eq!(
            "coherent:1e-1+2e-1i".parse::<InputSpec>().unwrap(),
            InputSpec::Coherent { alpha: C64::new(0.1, 0.2) }
        );
        assert_eq!("qubit".parse::<InputSpec>().unwrap(), InputSpec::Qubit);
        assert!("qubit:3".parse::<InputSpec>().is_err());
        assert!("squeezed:1".parse::<InputSpec>().is_err());
        assert!("cat:1".parse::<InputSpec>().is_err());
        assert!("coherent:nan".parse::<InputSpec>().is_err());
        for s in ["coherent:1", "squeezed:1,0.4", "qubit", "coherent:0.5-2i"] {
            let spec: InputSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<InputSpec>().unwrap(), spec);
        }
    }
}
