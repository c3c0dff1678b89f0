//! Radar parameter estimation and CDMA simulations.
//!
//! Noise is i.i.d. circular complex Gaussian per sample with variance
//! `σ² = 10^(-snr/10) / p`, so that a unit-norm signal has the stated SNR.
//! Trial `j` draws from a ChaCha8 stream seeded by the scenario seed with
//! stream number `j`, so every trial is reproducible in isolation.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::heisenberg::{apply_heisenberg, HeisenbergElement};
use crate::metrics::Correlator;
use crate::oscillator::OscillatorFamily;
use crate::signal::Signal;
use crate::system::SignalSystem;

pub const NOISE_MODEL: &str = "iid circular complex gaussian, snr = 10 log10(1 / (p sigma^2))";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelMode {
    /// No distortion.
    Sync,
    /// Random time shift.
    Async,
    /// Random frequency shift.
    Phase,
    /// Random time and frequency shift.
    Full,
}

impl ChannelMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelMode::Sync => "sync",
            ChannelMode::Async => "async",
            ChannelMode::Phase => "phase",
            ChannelMode::Full => "full",
        }
    }

    fn draw(&self, p: u64, rng: &mut ChaCha8Rng) -> (u64, u64) {
        let tau = if matches!(self, ChannelMode::Async | ChannelMode::Full) {
            rng.random_range(0..p)
        } else {
            0
        };
        let w = if matches!(self, ChannelMode::Phase | ChannelMode::Full) {
            rng.random_range(0..p)
        } else {
            0
        };
        (tau, w)
    }
}

impl fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sync" => Ok(ChannelMode::Sync),
            "async" => Ok(ChannelMode::Async),
            "phase" => Ok(ChannelMode::Phase),
            "full" => Ok(ChannelMode::Full),
            other => Err(Error::Format(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelScenario {
    pub mode: ChannelMode,
    /// `None` means noiseless.
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub trials: usize,
}

impl ChannelScenario {
    pub fn noiseless(mode: ChannelMode, seed: u64, trials: usize) -> Self {
        Self {
            mode,
            snr_db: None,
            seed,
            trials,
        }
    }

    pub fn rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }

    fn add_noise(&self, s: &mut Signal, rng: &mut ChaCha8Rng) {
        if let Some(snr) = self.snr_db {
            let p = s.len() as f64;
            let sigma = (10f64.powf(-snr / 10.0) / p).sqrt();
            let normal = Normal::new(0.0, sigma / std::f64::consts::SQRT_2).expect("finite sigma");
            for z in s.values_mut() {
                *z += Complex64::new(normal.sample(rng), normal.sample(rng));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub failures: u64,
    pub total: u64,
    pub trials: usize,
    /// Failures per trial.
    pub log: Vec<u64>,
}

impl SimulationResult {
    fn from_log(log: Vec<u64>, per_trial: u64) -> Self {
        Self {
            failures: log.iter().sum(),
            total: per_trial * log.len() as u64,
            trials: log.len(),
            log,
        }
    }

    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.failures as f64 / self.total as f64
        }
    }

    pub fn success_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.total - self.failures) as f64 / self.total as f64
        }
    }

    pub fn to_key_values(&self, rate_key: &str, success: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "trials={}", self.trials);
        let _ = writeln!(out, "failures={}", self.failures);
        let _ = writeln!(out, "total={}", self.total);
        let rate = if success { self.success_rate() } else { self.rate() };
        let _ = writeln!(out, "{rate_key}={rate:?}");
        out
    }
}

/// Anything that can hand out signals by index.
pub trait SignalSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn signal(&self, i: usize) -> Result<Signal>;
}

impl SignalSource for SignalSystem {
    fn len(&self) -> usize {
        self.signals.len()
    }

    fn signal(&self, i: usize) -> Result<Signal> {
        Ok(self.signals[i].signal.clone())
    }
}

impl SignalSource for OscillatorFamily {
    fn len(&self) -> usize {
        OscillatorFamily::len(self)
    }

    fn signal(&self, i: usize) -> Result<Signal> {
        Ok(OscillatorFamily::signal(self, i)?.signal)
    }
}

/// First argmax of `|grid|`, as `(τ, w)`.
fn grid_argmax(grid: &[Complex64], p: usize) -> (u64, u64) {
    let mut best = (0, -1.0);
    for (i, z) in grid.iter().enumerate() {
        let m = z.norm();
        if m > best.1 {
            best = (i, m);
        }
    }
    ((best.0 / p) as u64, (best.0 % p) as u64)
}

/// Each trial draws `(τ0, w0)` per the scenario mode, forms the echo
/// `M_w0 L_τ0 φ` plus noise and estimates the shift as the argmax of
/// `|⟨e, M_w L_τ φ⟩|`. A trial fails unless the estimate is exact.
pub fn radar_simulate(phi: &Signal, scenario: &ChannelScenario) -> Result<SimulationResult> {
    if !phi.is_unit() {
        return Err(Error::ZeroVector);
    }
    let p = phi.len();
    let f = PrimeField::new(p as u64)?;
    let log: Vec<u64> = (0..scenario.trials)
        .into_par_iter()
        .map_init(
            || Correlator::new(p),
            |c, trial| {
                let mut rng = scenario.rng(trial);
                let (tau0, w0) = scenario.mode.draw(p as u64, &mut rng);
                let mut echo = crate::heisenberg::time_frequency_shift(&f, tau0, w0, phi);
                scenario.add_noise(&mut echo, &mut rng);
                let estimate = grid_argmax(c.compute(echo.values(), phi.values()), p);
                u64::from(estimate != (tau0, w0))
            },
        )
        .collect();
    Ok(SimulationResult::from_log(log, 1))
}

/// Each trial picks `users` distinct signals, random bits `±1` and random
/// distortions `h_i` per the scenario mode, and transmits
/// `u = Σ b_i π(h_i) φ_i` plus noise. Receiver `i` evaluates
/// `⟨φ_i, π(h) u⟩` at `h = h_i^-1` when distortions are known, and at the
/// argmax of the cross-ambiguity otherwise, then decodes the sign of the real
/// part. Reports the bit error rate over all decoded bits.
pub fn cdma_simulate(
    source: &dyn SignalSource,
    p: u64,
    users: usize,
    known_distortions: bool,
    scenario: &ChannelScenario,
) -> Result<SimulationResult> {
    if users == 0 || users > source.len() {
        return Err(Error::TooManyUsers {
            requested: users,
            available: source.len(),
        });
    }
    let f = PrimeField::new(p)?;
    let n = p as usize;
    let log: Vec<u64> = (0..scenario.trials)
        .into_par_iter()
        .map_init(
            || Correlator::new(n),
            |c, trial| -> Result<u64> {
                let mut rng = scenario.rng(trial);
                let picks = sample(&mut rng, source.len(), users).into_vec();
                let mut u = Signal::zeros(n);
                let mut sent = Vec::with_capacity(users);
                for &idx in &picks {
                    let phi = source.signal(idx)?;
                    let bit: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let (tau, w) = scenario.mode.draw(p, &mut rng);
                    let h = HeisenbergElement::plane(&f, (tau, w));
                    let tx = apply_heisenberg(&f, &h, &phi);
                    u = &u + &tx.scale(Complex64::new(bit, 0.0));
                    sent.push((phi, bit, h));
                }
                scenario.add_noise(&mut u, &mut rng);
                let mut errors = 0;
                for (phi, bit, h) in &sent {
                    let probe = if known_distortions {
                        h.inverse(&f)
                    } else {
                        let (tau, w) = grid_argmax(c.compute(phi.values(), u.values()), n);
                        HeisenbergElement::plane(&f, (tau, w))
                    };
                    let decoded = phi.inner(&apply_heisenberg(&f, &probe, &u)).re;
                    let guess = if decoded >= 0.0 { 1.0 } else { -1.0 };
                    errors += u64::from(guess != *bit);
                }
                Ok(errors)
            },
        )
        .collect::<Result<_>>()?;
    Ok(SimulationResult::from_log(log, users as u64))
}
