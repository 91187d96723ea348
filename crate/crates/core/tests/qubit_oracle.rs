//! Fock-space oracle for the average qubit fidelity.
//!
//! The Gaussian channel is built from a phase shift, pure loss, a
//! quantum-limited amplifier (together a thermal attenuator) and a squeezer,
//! all applied to truncated density matrices. The closed-form average
//! fidelity must agree with this direct evaluation.

use darkstate::engine::{self, quadrature_map, TransferChannel};
use darkstate::fidelity::{self, InputSpec};
use darkstate::matops::{self, ComplexMatrix, C64};
use darkstate::network::{linear_ramp_schedule, NetworkParams};
use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIM: usize = 48;

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn kraus_loss(eta: f64) -> Vec<DMatrix<C64>> {
    (0..DIM)
        .map(|k| {
            let mut a = DMatrix::zeros(DIM, DIM);
            for n in k..DIM {
                let amp = binom(n, k).sqrt() * eta.powf((n - k) as f64 / 2.0) * (1.0 - eta).powf(k as f64 / 2.0);
                a[(n - k, n)] = C64::new(amp, 0.0);
            }
            a
        })
        .collect()
}

fn kraus_amplifier(gain: f64) -> Vec<DMatrix<C64>> {
    (0..DIM)
        .map(|k| {
            let mut b = DMatrix::zeros(DIM, DIM);
            for n in 0..DIM - k {
                let amp = binom(n + k, k).sqrt() * gain.powf(-(n as f64 + 1.0) / 2.0) * (1.0 - 1.0 / gain).powf(k as f64 / 2.0);
                b[(n + k, n)] = C64::new(amp, 0.0);
            }
            b
        })
        .collect()
}

fn squeezer(r: f64) -> DMatrix<C64> {
    let mut a = DMatrix::<C64>::zeros(DIM, DIM);
    for n in 1..DIM {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a2 = &a * &a;
    let gen = (&a2 - a2.adjoint()) * C64::new(0.5 * r, 0.0);
    matops::expm(&ComplexMatrix::from_dmatrix(gen).unwrap()).unwrap().into_dmatrix()
}

fn apply_kraus(rho: &DMatrix<C64>, ops: &[DMatrix<C64>]) -> DMatrix<C64> {
    ops.iter().fold(DMatrix::zeros(DIM, DIM), |acc, k| acc + k * rho * k.adjoint())
}

/// Phase `exp(-i φ n)`, thermal attenuator `(η, N)`, then squeezer `S(r)`.
struct FockChannel {
    phase: DMatrix<C64>,
    loss: Vec<DMatrix<C64>>,
    amp: Vec<DMatrix<C64>>,
    squeeze: DMatrix<C64>,
    eta: f64,
    n: f64,
    phi: f64,
    r: f64,
    /// `<k| E(|i><j|) |l>` for `i, j, k, l` in `{0, 1}`.
    blocks: [[[[C64; 2]; 2]; 2]; 2],
}

impl FockChannel {
    fn new(eta: f64, n: f64, phi: f64, r: f64) -> Self {
        // A thermal attenuator is pure loss eta / G followed by an amplifier
        // of gain G = 1 + N (1 - eta).
        let gain = 1.0 + n * (1.0 - eta);
        let phase = DMatrix::from_diagonal(&DVector::from_fn(DIM, |k, _| C64::from_polar(1.0, -phi * k as f64)));
        let mut ch = Self {
            phase,
            loss: kraus_loss(eta / gain),
            amp: if gain > 1.0 { kraus_amplifier(gain) } else { vec![DMatrix::identity(DIM, DIM)] },
            squeeze: squeezer(r),
            eta,
            n,
            phi,
            r,
            blocks: [[[[C64::new(0.0, 0.0); 2]; 2]; 2]; 2],
        };
        for i in 0..2 {
            for j in 0..2 {
                let mut unit = DMatrix::zeros(DIM, DIM);
                unit[(i, j)] = C64::new(1.0, 0.0);
                let out = ch.apply(&unit);
                for k in 0..2 {
                    for l in 0..2 {
                        ch.blocks[i][j][k][l] = out[(k, l)];
                    }
                }
            }
        }
        ch
    }

    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let rho = &self.phase * rho * self.phase.adjoint();
        let rho = apply_kraus(&apply_kraus(&rho, &self.loss), &self.amp);
        &self.squeeze * rho * self.squeeze.adjoint()
    }

    /// `<ψ| E(|ψ><ψ|) |ψ>`, using linearity of the channel.
    fn fidelity(&self, a: C64, b: C64) -> f64 {
        let psi = [a, b];
        let mut f = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        f += psi[i] * psi[j].conj() * psi[k].conj() * psi[l] * self.blocks[i][j][k][l];
                    }
                }
            }
        }
        f.re
    }

    /// Average over the six cardinal Bloch states, which is exact for an
    /// average of a quadratic function of the state.
    fn average_fidelity(&self) -> f64 {
        let s = 0.5f64.sqrt();
        let states = [
            (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            (C64::new(s, 0.0), C64::new(s, 0.0)),
            (C64::new(s, 0.0), C64::new(-s, 0.0)),
            (C64::new(s, 0.0), C64::new(0.0, s)),
            (C64::new(s, 0.0), C64::new(0.0, -s)),
        ];
        states.iter().map(|&(a, b)| self.fidelity(a, b)).sum::<f64>() / 6.0
    }

    /// The same channel in quadrature form: map `b` and the output
    /// covariance for vacuum input (vacuum = I/2).
    fn gaussian(&self) -> (TransferChannel, Matrix2<f64>) {
        let sq = Matrix2::new((-self.r).exp(), 0.0, 0.0, self.r.exp());
        let c = C64::from_polar(self.eta.sqrt(), -self.phi);
        let b = sq * quadrature_map(c);
        let cov = sq * Matrix2::identity() * (0.5 + self.n * (1.0 - self.eta)) * sq.transpose();
        let ch = TransferChannel { b, added_noise_var: 0.0, transmitted_amp: c, sum_rule_residual: 0.0 };
        (ch, cov)
    }

    fn closed_form(&self) -> f64 {
        let (ch, cov) = self.gaussian();
        fidelity::qubit_avg_fidelity(&ch, &cov)
    }
}

#[test]
fn phase_insensitive_channels_match() {
    for &(eta, n, phi) in &[(1.0, 0.0, 0.0), (0.5, 0.0, 0.0), (0.8, 0.3, 0.0), (0.6, 1.0, 0.9), (0.2, 2.0, -2.5), (0.0, 0.0, 0.0)] {
        let ch = FockChannel::new(eta, n, phi, 0.0);
        let (oracle, formula) = (ch.average_fidelity(), ch.closed_form());
        assert!((oracle - formula).abs() < 1e-10, "eta={eta} N={n} phi={phi}: oracle {oracle} formula {formula}");
    }
}

#[test]
fn pure_loss_matches_amplitude_damping() {
    // Known average fidelity of amplitude damping: 1/2 + sqrt(eta)/3 + eta/6.
    for eta in [0.0, 0.25, 0.5, 0.9, 1.0] {
        let ch = FockChannel::new(eta, 0.0, 0.0, 0.0);
        let exact = 0.5 + eta.sqrt() / 3.0 + eta / 6.0;
        assert!((ch.closed_form() - exact).abs() < 1e-12);
        assert!((ch.average_fidelity() - exact).abs() < 1e-12);
    }
}

#[test]
fn anisotropic_channels_match() {
    for &(eta, n, phi, r) in &[(1.0, 0.0, 0.0, 0.3), (0.7, 0.2, 0.5, 0.3), (0.5, 1.0, 1.2, -0.4), (0.9, 0.0, 0.3, 0.2)] {
        let ch = FockChannel::new(eta, n, phi, r);
        let (oracle, formula) = (ch.average_fidelity(), ch.closed_form());
        assert!((oracle - formula).abs() < 1e-9, "eta={eta} N={n} phi={phi} r={r}: oracle {oracle} formula {formula}");
    }
}

#[test]
fn cardinal_average_agrees_with_monte_carlo() {
    let ch = FockChannel::new(0.7, 0.2, 0.5, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples = 20000;
    let mut total = 0.0;
    for _ in 0..samples {
        // Uniform on the Bloch sphere.
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let a = C64::new(((1.0 + z) / 2.0).sqrt(), 0.0);
        let b = C64::from_polar(((1.0 - z) / 2.0).sqrt(), phi);
        total += ch.fidelity(a, b);
    }
    let mc = total / samples as f64;
    assert!((mc - ch.average_fidelity()).abs() < 5e-3, "monte carlo {mc} vs {}", ch.average_fidelity());
}

#[test]
fn network_channel_matches_oracle() {
    // A lossy, noisy transfer: the engine channel is a thermal attenuator
    // with eta = |c|^2 and N from the added noise.
    let sched = linear_ramp_schedule(1.0, 50.0).unwrap();
    let params = NetworkParams { kappa_o: 0.01, kappa_mw: 0.01, kappa_f: 0.002, kappa_m: 0.002, g_f: 1.0, n_th: 10.0 };
    let ch = engine::characterize_channel(&sched, &params, 20000).unwrap();
    let eta = ch.transmitted_amp.norm_sqr();
    let n = ch.added_noise_var / (1.0 - eta) - 0.5;
    assert!(n >= 0.0);
    let oracle = FockChannel::new(eta, n, -ch.transmitted_amp.arg(), 0.0).average_fidelity();
    let formula = fidelity::fidelity_through(&InputSpec::Qubit, &ch).unwrap();
    assert!((oracle - formula).abs() < 1e-9, "oracle {oracle} formula {formula}");
}
