//! Monte Carlo check of the error-propagation variances: sample detector
//! counts, invert the mean response to `T̂`, compare the empirical variance of
//! `T̂` with the closed form.
//!
//! Trials are split into fixed blocks of [`BLOCK`] draws; block `b` uses a
//! ChaCha8 stream `b` under the run seed, so results do not depend on how
//! many workers process the blocks.

use log::debug;
use rand::distr::weighted::WeightedIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{build_fock_state, detected_distribution, Ket, DEFAULT_N_MAX};
use crate::gaussian::{ChannelConfig, ComplexAmplitude, Moments, StateKind, StateSpec};
use crate::measurement::{
    detected_moments, optimal_gain, source_moments, transmission_var_from_moments, MeasurementPlan, MomentModel,
};

pub const BLOCK: usize = 4096;
pub const MIN_TRIALS: usize = 100;
/// Mean probe photons below which the Gaussian approximation is refused.
pub const BRIGHT_THRESHOLD: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampler {
    /// Exact photon-number statistics (Poisson, binomial, or the truncated
    /// Fock distribution).
    Exact,
    /// Bivariate normal with the exact first and second moments.
    GaussianApprox,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Self::Exact),
            "gaussian" | "gaussian-approx" | "gaussianapprox" => Ok(Self::GaussianApprox),
            other => Err(Error::InvalidConfig(format!("unknown sampler '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MCConfig {
    pub trials: usize,
    pub seed: u64,
    pub sampler: Sampler,
}

impl MCConfig {
    pub fn new(trials: usize, seed: u64, sampler: Sampler) -> Result<Self> {
        let cfg = Self { trials, seed, sampler };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::InvalidConfig(format!("trials must be at least {MIN_TRIALS}, got {}", self.trials)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MCResult {
    pub empirical_var_t: f64,
    pub closed_form_var_t: f64,
    /// `(empirical − closed) / SE`, SE of the sample variance.
    pub z_score: f64,
    pub std_error: f64,
    pub mean_t: f64,
    /// Probe photons entering the system.
    pub n_resource: f64,
    pub gain: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl MCResult {
    pub fn empirical_lambda(&self) -> f64 {
        self.empirical_var_t * self.n_resource
    }

    pub fn closed_form_lambda(&self) -> f64 {
        self.closed_form_var_t * self.n_resource
    }

    /// Standard error on [`MCResult::empirical_lambda`].
    pub fn lambda_std_error(&self) -> f64 {
        self.std_error * self.n_resource
    }
}

enum Outcome {
    Poisson(Poisson<f64>),
    Binomial(Binomial),
    Table(WeightedIndex<f64>, Vec<Ket>),
    Normal { mean: [f64; 2], chol: [[f64; 2]; 2] },
}

impl Outcome {
    fn draw(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        match self {
            Self::Poisson(d) => (d.sample(rng), 0.0),
            Self::Binomial(d) => (d.sample(rng) as f64, 0.0),
            Self::Table(d, kets) => {
                let (p, a) = kets[d.sample(rng)];
                (p as f64, a as f64)
            }
            Self::Normal { mean, chol } => {
                let z0: f64 = StandardNormal.sample(rng);
                let z1: f64 = StandardNormal.sample(rng);
                (mean[0] + chol[0][0] * z0, mean[1] + chol[1][0] * z0 + chol[1][1] * z1)
            }
        }
    }
}

fn exact_outcome(spec: &StateSpec<f64>, ch: &ChannelConfig<f64>) -> Result<Outcome> {
    let tau = ch.probe_transmission();
    match spec.kind {
        StateKind::Coherent => Poisson::new(tau * spec.alpha.photons())
            .map(Outcome::Poisson)
            .map_err(|e| Error::Domain(format!("Poisson sampler: {e}"))),
        StateKind::Fock => Binomial::new(spec.fock_n as u64, tau)
            .map(Outcome::Binomial)
            .map_err(|e| Error::Domain(format!("binomial sampler: {e}"))),
        _ => {
            let sizes: &[usize] = if spec.modes() == 2 { &[16, 24, 32, 40, 48] } else { &[30, DEFAULT_N_MAX, 90, 120] };
            let psi = sizes
                .iter()
                .find_map(|&n| build_fock_state(spec, n).ok())
                .ok_or_else(|| {
                    Error::RegimeMismatch("state too bright for exact Fock sampling; use the Gaussian sampler".into())
                })?;
            debug!("exact sampler: truncation {}", psi.n_max());
            let dist = detected_distribution(&psi, ch)?;
            let (kets, weights): (Vec<Ket>, Vec<f64>) = dist.into_iter().unzip();
            let table = WeightedIndex::new(&weights).map_err(|e| Error::Domain(format!("weighted sampler: {e}")))?;
            Ok(Outcome::Table(table, kets))
        }
    }
}

fn gaussian_outcome(m0: &Moments<f64>, ch: &ChannelConfig<f64>) -> Result<Outcome> {
    if m0.mean_p < BRIGHT_THRESHOLD {
        return Err(Error::RegimeMismatch(format!(
            "Gaussian sampler needs at least {BRIGHT_THRESHOLD} mean probe photons, state has {}",
            m0.mean_p
        )));
    }
    let m = detected_moments(m0, ch)?;
    let l00 = m.var_p.max(0.0).sqrt();
    let l10 = if l00 > 0.0 { m.cov_pa / l00 } else { 0.0 };
    let l11 = (m.var_a - l10 * l10).max(0.0).sqrt();
    Ok(Outcome::Normal { mean: [m.mean_p, m.mean_a], chol: [[l00, 0.0], [l10, l11]] })
}

/// Run `cfg.trials` single-shot measurements and compare the spread of the
/// transmission estimate with error propagation from the exact moments.
pub fn mc_estimate(
    spec: &StateSpec<f64>,
    ch: &ChannelConfig<f64>,
    plan: &MeasurementPlan<f64>,
    cfg: &MCConfig,
) -> Result<MCResult> {
    cfg.validate()?;
    ch.validate()?;
    plan.validate()?;
    let m0 = source_moments(spec, MomentModel::Exact)?;
    let gain = match *plan {
        MeasurementPlan::Intensity => None,
        _ if !spec.kind.is_two_mode() => {
            return Err(Error::UnsupportedState("intensity difference needs an auxiliary mode"));
        }
        MeasurementPlan::IntensityDiff { gain: Some(g) } => Some(g),
        MeasurementPlan::IntensityDiff { gain: None } => Some(optimal_gain(&m0, ch)?),
    };
    let g = gain.unwrap_or(0.0);
    let resolved = match gain {
        None => MeasurementPlan::Intensity,
        Some(g) => MeasurementPlan::IntensityDiff { gain: Some(g) },
    };
    let closed_form_var_t = transmission_var_from_moments(&m0, ch, &resolved)?;

    let outcome = match cfg.sampler {
        Sampler::Exact => exact_outcome(spec, ch)?,
        Sampler::GaussianApprox => gaussian_outcome(&m0, ch)?,
    };
    let slope = ch.external_probe() * m0.mean_p;
    let offset = g * ch.eta_a * m0.mean_a;

    let blocks = cfg.trials.div_ceil(BLOCK);
    let samples: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let len = BLOCK.min(cfg.trials - b * BLOCK);
            (0..len)
                .map(|_| {
                    let (np, na) = outcome.draw(&mut rng);
                    (np - g * na + offset) / slope
                })
                .collect()
        })
        .collect();
    let stats = SampleStats::from_blocks(&samples);
    let std_error = stats.variance_std_error();
    let z_score = if std_error > 0.0 {
        (stats.variance - closed_form_var_t) / std_error
    } else if stats.variance == closed_form_var_t {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(MCResult {
        empirical_var_t: stats.variance,
        closed_form_var_t,
        z_score,
        std_error,
        mean_t: stats.mean,
        n_resource: ch.t_p * m0.mean_p,
        gain,
        trials: cfg.trials,
        seed: cfg.seed,
    })
}

/// Mean, unbiased variance and central fourth moment, accumulated in a fixed
/// order.
#[derive(Clone, Copy, Debug)]
struct SampleStats {
    n: f64,
    mean: f64,
    variance: f64,
    m2: f64,
    m4: f64,
}

impl SampleStats {
    fn from_blocks(blocks: &[Vec<f64>]) -> Self {
        let n = blocks.iter().map(Vec::len).sum::<usize>() as f64;
        let mean = blocks.iter().flatten().sum::<f64>() / n;
        let (mut s2, mut s4) = (0.0, 0.0);
        for x in blocks.iter().flatten() {
            let d2 = (x - mean) * (x - mean);
            s2 += d2;
            s4 += d2 * d2;
        }
        Self { n, mean, variance: s2 / (n - 1.0), m2: s2 / n, m4: s4 / n }
    }

    /// `sqrt((m₄ − (n−3)/(n−1)·m₂²)/n)`.
    fn variance_std_error(&self) -> f64 {
        let n = self.n;
        ((self.m4 - (n - 3.0) / (n - 1.0) * self.m2 * self.m2) / n).max(0.0).sqrt()
    }
}

/// One configuration of the statistical battery.
#[derive(Clone, Copy, Debug)]
pub struct BatteryCase {
    pub label: &'static str,
    pub spec: StateSpec<f64>,
    pub channel: ChannelConfig<f64>,
    pub plan: MeasurementPlan<f64>,
    pub config: MCConfig,
}

/// Deterministic battery of `count` configurations cycling through the
/// samplers and measurement plans, seeded `base_seed + i`.
pub fn battery(count: usize, trials: usize, base_seed: u64) -> Result<Vec<BatteryCase>> {
    let amp = |m: f64, p: f64| ComplexAmplitude::new(m, p);
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let t = 0.1 + 0.8 * ((i * 37) % count) as f64 / count.max(1) as f64;
        let channel = if i % 2 == 0 {
            ChannelConfig::lossless(t)
        } else {
            ChannelConfig::new(t, 0.9, 0.95, 0.85)?
        };
        let seed = base_seed + i as u64;
        let (label, spec, plan, sampler) = match i % 5 {
            0 => ("coherent/exact", StateSpec::coherent(amp(3.0 + (i % 7) as f64, 0.2)?), MeasurementPlan::Intensity, Sampler::Exact),
            1 => ("fock/exact", StateSpec::fock(1 + (i % 20) as u32), MeasurementPlan::Intensity, Sampler::Exact),
            2 => ("bsmss/exact", StateSpec::bsmss(amp(1.0, 0.3)?, 0.3), MeasurementPlan::Intensity, Sampler::Exact),
            3 => (
                "btmss/exact",
                StateSpec::btmss(amp(1.0, 0.0)?, amp(0.5, 0.4)?, 0.4),
                MeasurementPlan::IntensityDiff { gain: None },
                Sampler::Exact,
            ),
            _ => (
                "btmss/gaussian",
                StateSpec::btmss(amp(100.0, 0.0)?, amp(30.0, 0.0)?, 1.0),
                MeasurementPlan::IntensityDiff { gain: None },
                Sampler::GaussianApprox,
            ),
        };
        cases.push(BatteryCase { label, spec, channel, plan, config: MCConfig::new(trials, seed, sampler)? });
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amp(m: f64, p: f64) -> ComplexAmplitude<f64> {
        ComplexAmplitude::new(m, p).unwrap()
    }

    #[test]
    fn config_rejects_few_trials() {
        assert!(MCConfig::new(99, 0, Sampler::Exact).is_err());
        assert!(MCConfig::new(100, 0, Sampler::Exact).is_ok());
    }

    #[test]
    fn gaussian_sampler_needs_bright_state() {
        let cfg = MCConfig::new(1000, 1, Sampler::GaussianApprox).unwrap();
        let spec = StateSpec::coherent(amp(10.0, 0.0));
        let r = mc_estimate(&spec, &ChannelConfig::lossless(0.5), &MeasurementPlan::Intensity, &cfg);
        assert!(matches!(r, Err(Error::RegimeMismatch(_))));
    }

    #[test]
    fn exact_sampler_refuses_bright_squeezed_state() {
        let cfg = MCConfig::new(1000, 1, Sampler::Exact).unwrap();
        let spec = StateSpec::bsmss(amp(100.0, 0.0), 1.0);
        let r = mc_estimate(&spec, &ChannelConfig::lossless(0.5), &MeasurementPlan::Intensity, &cfg);
        assert!(matches!(r, Err(Error::RegimeMismatch(_))));
    }

    #[test]
    fn difference_plan_needs_two_modes() {
        let cfg = MCConfig::new(1000, 1, Sampler::Exact).unwrap();
        let spec = StateSpec::coherent(amp(3.0, 0.0));
        let plan = MeasurementPlan::IntensityDiff { gain: None };
        assert!(mc_estimate(&spec, &ChannelConfig::lossless(0.5), &plan, &cfg).is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let spec = StateSpec::btmss(amp(1.0, 0.0), amp(0.5, 0.0), 0.4);
        let ch = ChannelConfig::new(0.6, 0.9, 0.95, 0.85).unwrap();
        let plan = MeasurementPlan::IntensityDiff { gain: None };
        let cfg = MCConfig::new(3 * BLOCK + 17, 99, Sampler::Exact).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_estimate(&spec, &ch, &plan, &cfg).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_ne!(one.empirical_var_t, mc_estimate(&spec, &ch, &plan, &MCConfig { seed: 100, ..cfg }).unwrap().empirical_var_t);
    }

    #[test]
    fn coherent_poisson_run() {
        let spec = StateSpec::coherent(amp(100.0, 0.0));
        let cfg = MCConfig::new(50_000, 7, Sampler::Exact).unwrap();
        let r = mc_estimate(&spec, &ChannelConfig::lossless(0.7), &MeasurementPlan::Intensity, &cfg).unwrap();
        assert!((r.closed_form_lambda() - 0.7).abs() < 1e-12);
        assert!(r.z_score.abs() < 4.0, "z = {}", r.z_score);
        assert!((r.mean_t - 0.7).abs() < 5.0 * (r.closed_form_var_t / 50_000.0).sqrt());
    }

    #[test]
    fn fock_binomial_run() {
        let spec = StateSpec::fock(20);
        let cfg = MCConfig::new(50_000, 3, Sampler::Exact).unwrap();
        let r = mc_estimate(&spec, &ChannelConfig::lossless(0.4), &MeasurementPlan::Intensity, &cfg).unwrap();
        assert!((r.closed_form_lambda() - 0.24).abs() < 1e-12);
        assert!(r.z_score.abs() < 4.0, "z = {}", r.z_score);
    }

    #[test]
    fn gaussian_sampler_agrees_with_exact_moments() {
        // small-scale cross-check of the two samplers on the same bright
        // coherent state
        let spec = StateSpec::coherent(amp(40.0, 0.0));
        let ch = ChannelConfig::lossless(0.6);
        let exact = mc_estimate(&spec, &ch, &MeasurementPlan::Intensity, &MCConfig::new(40_000, 5, Sampler::Exact).unwrap()).unwrap();
        let approx = mc_estimate(&spec, &ch, &MeasurementPlan::Intensity, &MCConfig::new(40_000, 5, Sampler::GaussianApprox).unwrap()).unwrap();
        let se = (exact.std_error.powi(2) + approx.std_error.powi(2)).sqrt();
        assert!((exact.empirical_var_t - approx.empirical_var_t).abs() < 4.0 * se);
    }

    #[test]
    fn battery_is_deterministic() {
        let a = battery(10, 500, 0).unwrap();
        let b = battery(10, 500, 0).unwrap();
        assert_eq!(a.len(), 10);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.config, y.config);
            assert_eq!(x.channel, y.channel);
        }
    }
}
