//! Cross-method validation battery behind `qcrb-lab validate`.

use std::time::Instant;

use rayon::prelude::*;

use qcrb_lab::fock::{channel_family, oracle_qfi};
use qcrb_lab::measurement::{transmission_var_diff, transmission_var_intensity};
use qcrb_lab::montecarlo::battery;
use qcrb_lab::qfi::{
    fock_qfi_lossy, lambda_lossy, lossy_symplectic_closed_form, qfi_btmss_full, qfi_gaussian, qfi_terms_from,
};
use qcrb_lab::scalar::c;
use qcrb_lab::{mc_estimate, ChannelConfig, ComplexAmplitude, ParamFamily, SqueezeSpec, StateSpec};

use crate::output::{Cell, Table};

pub const CRITERION_T: [f64; 19] =
    [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];
pub const CRITERION_S: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];
/// `|α|² = 10⁶`
pub const BRIGHT_ALPHA: f64 = 1000.0;

/// The two channels of the closed-form grid.
pub fn criterion_channels() -> [ChannelConfig; 2] {
    [ChannelConfig::lossless(0.5), ChannelConfig::new(0.5, 0.9, 0.98, 0.98).expect("valid channel")]
}

/// Options of a battery run.
#[derive(Clone, Copy, Debug)]
pub struct BatteryOptions {
    /// Added to one covariance entry of every state the Gaussian checks
    /// evaluate. A negative control: any nonzero value must fail the run.
    pub perturb_sigma: Option<f64>,
    pub mc_configs: usize,
    pub mc_trials: usize,
    pub seed: u64,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self { perturb_sigma: None, mc_configs: 100, mc_trials: 20_000, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    /// Worst relative error, or the failing fraction for statistical checks.
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Collects the worst relative error over many comparisons. Errors from the
/// computation itself count as infinite deviation.
#[derive(Debug, Default)]
pub struct Worst {
    pub max: f64,
    pub cases: usize,
    pub first_error: Option<String>,
}

impl Worst {
    pub fn new() -> Self {
        Self { max: 0.0, cases: 0, first_error: None }
    }

    pub fn add(&mut self, r: qcrb_lab::Result<(f64, f64)>) {
        self.cases += 1;
        match r {
            Ok((got, want)) => {
                let e = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
                self.max = if e.is_nan() { f64::INFINITY } else { self.max.max(e) };
            }
            Err(e) => {
                self.max = f64::INFINITY;
                self.first_error.get_or_insert_with(|| e.to_string());
            }
        }
    }

    fn merge(mut self, o: Worst) -> Self {
        self.max = self.max.max(o.max);
        self.cases += o.cases;
        if self.first_error.is_none() {
            self.first_error = o.first_error;
        }
        self
    }

    fn finish(self, name: &'static str, tolerance: f64, start: Instant) -> CheckResult {
        CheckResult {
            name,
            cases: self.cases,
            max_error: self.max,
            tolerance,
            passed: self.max <= tolerance,
            detail: self.first_error.unwrap_or_default(),
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

fn amp(m: f64) -> ComplexAmplitude {
    ComplexAmplitude::new(m, 0.0).expect("nonnegative amplitude")
}

fn bright_specs(s: f64) -> Vec<StateSpec> {
    let a = amp(BRIGHT_ALPHA);
    let mut v = vec![StateSpec::coherent(a)];
    if s > 0.0 {
        v.push(StateSpec::bsmss(a, s));
        v.push(StateSpec::btmss(a, ComplexAmplitude::zero(), s));
    }
    v
}

/// Every (state, channel) pair of the closed-form grid.
pub fn criterion_grid() -> Vec<(StateSpec, ChannelConfig)> {
    let mut out = Vec::new();
    for ch in criterion_channels() {
        for s in CRITERION_S {
            for spec in bright_specs(s) {
                for t in CRITERION_T {
                    out.push((spec, ch.with_t(t)));
                }
            }
        }
    }
    out
}

/// Closed-form Λ against the displacement part of the general Gaussian QFI.
/// Returns (closed, numeric bright, numeric full) per grid point.
pub fn closed_vs_gaussian(perturb: Option<f64>) -> Vec<qcrb_lab::Result<(f64, f64, f64)>> {
    criterion_grid()
        .par_iter()
        .map(|(spec, ch)| {
            let closed = lambda_lossy(spec, ch)?.lambda;
            let family = ParamFamily::new(*spec, *ch)?;
            let mut der = family.derivatives_at(ch.t)?;
            if let Some(d) = perturb {
                der.state.perturb_sigma(0, 0, c(d, 0.0));
            }
            let terms = qfi_terms_from(&family, ch.t, &der)?;
            Ok((closed, terms.bright_report().lambda, terms.full_report().lambda))
        })
        .collect()
}

pub fn check_closed_vs_gaussian(perturb: Option<f64>) -> CheckResult {
    let start = Instant::now();
    let mut w = Worst::new();
    for r in closed_vs_gaussian(perturb) {
        w.add(r.map(|(closed, bright, _)| (bright, closed)));
    }
    w.finish("closed_form_vs_gaussian_qfi", 1e-6, start)
}

pub fn check_btmss_full(perturb: Option<f64>) -> CheckResult {
    let start = Instant::now();
    let mut w = Worst::new();
    let cases = [(10.0, 0.0, 0.0, 1.0), (3.0, 1.0, std::f64::consts::PI, 1.0), (2.0, 4.0, 2.5, 0.4)];
    for (a, b, theta, s) in cases {
        for t in [0.1, 0.4, 0.7, 0.9] {
            w.add((|| {
                let sq = SqueezeSpec::new(s, theta)?;
                let spec = StateSpec::btmss(amp(a), amp(b), s).with_theta(theta);
                let family = ParamFamily::new(spec, ChannelConfig::lossless(t))?;
                let f = match perturb {
                    None => qfi_gaussian(&family, t)?.qfi,
                    Some(d) => {
                        let mut der = family.derivatives_at(t)?;
                        der.state.perturb_sigma(0, 0, c(d, 0.0));
                        qfi_terms_from(&family, t, &der)?.total()
                    }
                };
                Ok((f, qfi_btmss_full(amp(a), amp(b), sq, t)))
            })());
        }
    }
    w.finish("btmss_full_qfi", 1e-8, start)
}

pub fn check_fock_oracle() -> CheckResult {
    let start = Instant::now();
    let w = (1u32..=10)
        .into_par_iter()
        .map(|n| {
            let mut w = Worst::new();
            match channel_family(&StateSpec::fock(n), ChannelConfig::lossless(0.5), n as usize + 4) {
                Ok(fam) => {
                    for t in [0.2, 0.5, 0.8] {
                        w.add(oracle_qfi(&fam, t, 1e-4).map(|f| (f, n as f64 / (t - t * t))));
                    }
                }
                Err(e) => w.add(Err(e)),
            }
            w
        })
        .reduce(Worst::new, Worst::merge);
    w.finish("fock_oracle_lossless", 1e-5, start)
}

pub fn check_gaussian_vs_oracle() -> CheckResult {
    let start = Instant::now();
    let ch = ChannelConfig::new(0.5, 0.9, 0.95, 0.85).expect("valid channel");
    let cases = [
        (StateSpec::coherent(amp(1.5)), 40),
        (StateSpec::bsmss(amp(1.0), 0.35), 45),
        (StateSpec::btmss(amp(0.8), amp(0.4), 0.3), 18),
        (StateSpec::vtmss(0.6), 40),
    ];
    let w = cases
        .par_iter()
        .map(|(spec, n_max)| {
            let mut w = Worst::new();
            let fam = match (channel_family(spec, ch, *n_max), ParamFamily::new(*spec, ch)) {
                (Ok(f), Ok(g)) => (f, g),
                (Err(e), _) | (_, Err(e)) => {
                    w.add(Err(e));
                    return w;
                }
            };
            for t in [0.2, 0.5, 0.8] {
                w.add((|| Ok((oracle_qfi(&fam.0, t, 1e-4)?, qfi_gaussian(&fam.1, t)?.qfi)))());
            }
            w
        })
        .reduce(Worst::new, Worst::merge);
    w.finish("gaussian_qfi_vs_fock_oracle", 1e-5, start)
}

pub fn check_fock_sum() -> CheckResult {
    let start = Instant::now();
    let mut w = Worst::new();
    for n in 1u32..=200 {
        for t in [0.2, 0.5, 0.8] {
            for (tp, ep) in [(1.0, 1.0), (0.85, 0.9)] {
                w.add((|| {
                    let ch = ChannelConfig::new(t, tp, ep, 1.0)?;
                    Ok((fock_qfi_lossy(n, &ch)?.lambda, t / ep - t * t * tp))
                })());
            }
        }
    }
    w.finish("fock_sum_lossy", 1e-10, start)
}

/// Deterministic (s, channel) sample for the symplectic check.
pub fn symplectic_grid(points: usize, seed: u64) -> Vec<(f64, ChannelConfig)> {
    let mut x = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..points)
        .map(|_| {
            let s = 2.5 * next();
            let ch = ChannelConfig::new(next(), next(), next(), next()).expect("unit interval");
            (s, ch)
        })
        .collect()
}

/// Largest deviation, relative to the larger eigenvalue, between closed-form
/// and numeric symplectic spectra of a lossy vTMSS.
pub fn symplectic_errors(points: usize, seed: u64, perturb: Option<f64>) -> Vec<qcrb_lab::Result<f64>> {
    symplectic_grid(points, seed)
        .into_iter()
        .map(|(s, ch)| {
            let mut state = StateSpec::vtmss(s).gaussian_state()?.apply_channel(&ch)?;
            if let Some(d) = perturb {
                state.perturb_sigma(0, 0, c(d, 0.0));
            }
            let numeric = state.symplectic_eigenvalues()?;
            let (lo, hi) = lossy_symplectic_closed_form(s, &ch);
            Ok(((numeric[0] - lo).abs().max((numeric[1] - hi).abs())) / hi.max(1.0))
        })
        .collect()
}

pub fn check_symplectic(perturb: Option<f64>, seed: u64) -> CheckResult {
    let start = Instant::now();
    let mut w = Worst::new();
    for e in symplectic_errors(200, seed, perturb) {
        w.add(e.map(|e| (1.0 + e, 1.0)));
    }
    w.finish("lossy_symplectic_eigenvalues", 1e-10, start)
}

/// Measured Λ against the closed-form Λ over the closed-form grid.
pub fn saturation_errors() -> (Worst, Worst) {
    let mut intensity = Worst::new();
    let mut diff = Worst::new();
    for (spec, ch) in criterion_grid() {
        let single = [spec, StateSpec::fock(7)];
        if spec.kind.is_two_mode() {
            diff.add((|| Ok((transmission_var_diff(&spec, &ch)?.lambda(), lambda_lossy(&spec, &ch)?.lambda)))());
            // doubly seeded with cos Θ = −1
            let seeded = StateSpec::btmss(amp(BRIGHT_ALPHA), amp(0.3 * BRIGHT_ALPHA), spec.squeeze.s);
            diff.add((|| Ok((transmission_var_diff(&seeded, &ch)?.lambda(), lambda_lossy(&seeded, &ch)?.lambda)))());
        } else {
            for spec in single {
                intensity.add((|| {
                    Ok((transmission_var_intensity(&spec, &ch)?.lambda(), lambda_lossy(&spec, &ch)?.lambda))
                })());
            }
        }
    }
    (intensity, diff)
}

pub fn check_saturation() -> Vec<CheckResult> {
    let start = Instant::now();
    let (i, d) = saturation_errors();
    vec![i.finish("saturation_intensity", 1e-10, start), d.finish("saturation_intensity_diff", 1e-10, start)]
}

pub fn check_mc(opts: &BatteryOptions) -> CheckResult {
    let start = Instant::now();
    let run = || -> qcrb_lab::Result<(usize, usize)> {
        let cases = battery(opts.mc_configs, opts.mc_trials, opts.seed)?;
        let mut inside = 0;
        for case in &cases {
            let r = mc_estimate(&case.spec, &case.channel, &case.plan, &case.config)?;
            if r.z_score.abs() < 3.0 {
                inside += 1;
            }
        }
        Ok((inside, cases.len()))
    };
    let (fraction_out, detail, cases) = match run() {
        Ok((inside, n)) => (1.0 - inside as f64 / n as f64, format!("{inside}/{n} with |z| < 3"), n),
        Err(e) => (1.0, e.to_string(), 0),
    };
    CheckResult {
        name: "monte_carlo_z_scores",
        cases,
        max_error: fraction_out,
        tolerance: 0.01,
        passed: fraction_out <= 0.01 && cases > 0,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_battery(opts: &BatteryOptions) -> Vec<CheckResult> {
    let p = opts.perturb_sigma;
    let mut out = vec![
        check_closed_vs_gaussian(p),
        check_btmss_full(p),
        check_fock_oracle(),
        check_gaussian_vs_oracle(),
        check_fock_sum(),
        check_symplectic(p, opts.seed),
    ];
    out.extend(check_saturation());
    out.push(check_mc(opts));
    out
}

pub fn summary_table(results: &[CheckResult]) -> Table {
    let mut t = Table::new(&["check", "cases", "max_error", "tolerance", "passed", "seconds", "detail"]);
    for r in results {
        t.push(vec![
            r.name.into(),
            Cell::Int(r.cases as u64),
            r.max_error.into(),
            r.tolerance.into(),
            Cell::Bool(r.passed),
            r.seconds.into(),
            r.detail.clone().into(),
        ]);
    }
    t
}
