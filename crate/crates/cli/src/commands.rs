use anyhow::{bail, Result};
use rayon::prelude::*;

use qcrb_lab::measurement::{
    source_moments, transmission_var_diff, transmission_var_from_moments, transmission_var_intensity,
};
use qcrb_lab::qfi::{fock_qfi_lossy, lambda_lossy};
use qcrb_lab::{
    mc_estimate, ChannelConfig, ComplexAmplitude, EstimationReport, MCConfig, MeasurementPlan, MomentModel, Regime,
    StateKind, StateSpec, TransmissionVariance,
};

use crate::config::{Grid, GridVar, RunConfig};
use crate::output::{Cell, Table};

pub const CURVE_COLUMNS: [&str; 8] = ["curve_id", "state", "s", "T", "T_p", "eta_p", "eta_a", "lambda"];
pub const FIGURE_SQUEEZING: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];
pub const FIGURE3_TP: [f64; 3] = [1.0, 0.9, 0.8];
const DEFAULT_T_GRID: &str = "T=0.01:0.99:99";

/// Λ and the QFI for one parameter point. Fock states use the exact
/// binomial sum; everything else the closed forms (bright limit for seeded
/// squeezed states, general Gaussian QFI for vTMSS).
pub fn estimate(spec: &StateSpec, ch: &ChannelConfig) -> Result<EstimationReport> {
    Ok(match spec.kind {
        StateKind::Fock => fock_qfi_lossy(spec.fock_n, ch)?,
        _ => lambda_lossy(spec, ch)?,
    })
}

/// Error-propagation variance of the natural measurement for `spec`:
/// intensity for single-mode probes, optimized intensity difference for
/// two-mode probes.
pub fn measurement_for(spec: &StateSpec, ch: &ChannelConfig) -> Result<(MeasurementPlan, TransmissionVariance)> {
    if !spec.kind.is_two_mode() {
        return Ok((MeasurementPlan::Intensity, transmission_var_intensity(spec, ch)?));
    }
    let plan = MeasurementPlan::IntensityDiff { gain: None };
    if spec.alpha.magnitude() > 0.0 || spec.beta.magnitude() > 0.0 {
        return Ok((plan, transmission_var_diff(spec, ch)?));
    }
    // unseeded: only the spontaneous statistics exist
    let m0 = source_moments(spec, MomentModel::Exact)?;
    let var_t = transmission_var_from_moments(&m0, ch, &plan)?;
    let gain = qcrb_lab::measurement::optimal_gain(&m0, ch)?;
    Ok((plan, TransmissionVariance { var_t, n_resource: ch.t_p * m0.mean_p, saturating: false, gain: Some(gain) }))
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Exact => "exact",
        Regime::BrightLimit => "bright-limit",
    }
}

pub fn report(cfg: &RunConfig) -> Result<Table> {
    let (spec, label) = cfg.require_state()?;
    let ch = cfg.channel;
    let rep = estimate(&spec, &ch)?;
    let mut table = Table::new(&[
        "state",
        "s",
        "T",
        "T_p",
        "eta_p",
        "eta_a",
        "lambda",
        "qfi",
        "qcrb",
        "n_resource",
        "method",
        "regime",
        "measurement",
        "gain",
        "var_T",
        "measured_lambda",
        "saturates",
    ]);
    let (plan, meas) = measurement_for(&spec, &ch)?;
    let saturates = ((meas.lambda() - rep.lambda) / rep.lambda).abs() < 1e-9;
    table.push(vec![
        label.into(),
        spec.squeeze.s.into(),
        ch.t.into(),
        ch.t_p.into(),
        ch.eta_p.into(),
        ch.eta_a.into(),
        rep.lambda.into(),
        rep.qfi.into(),
        rep.qcrb.into(),
        rep.n_resource.into(),
        rep.method.name().into(),
        regime_name(rep.regime).into(),
        plan.name().into(),
        meas.gain.into(),
        meas.var_t.into(),
        meas.lambda().into(),
        Cell::Bool(saturates),
    ]);
    Ok(table)
}

/// One curve: fixed state and channel, Λ over a T grid.
#[derive(Clone, Debug)]
pub struct Curve {
    pub id: String,
    pub label: String,
    pub spec: StateSpec,
    pub channel: ChannelConfig,
}

/// Evaluate `curves` on `ts` in parallel; rows come out ordered by curve,
/// then T.
pub fn curve_table(curves: &[Curve], ts: &[f64]) -> Result<Table> {
    let points: Vec<(usize, f64)> = (0..curves.len()).flat_map(|c| ts.iter().map(move |&t| (c, t))).collect();
    let lambdas: Vec<f64> = points
        .par_iter()
        .map(|&(c, t)| estimate(&curves[c].spec, &curves[c].channel.with_t(t)).map(|r| r.lambda))
        .collect::<Result<_>>()?;
    let mut table = Table::new(&CURVE_COLUMNS);
    for (&(c, t), lambda) in points.iter().zip(lambdas) {
        let curve = &curves[c];
        let s = if matches!(curve.spec.kind, StateKind::Bsmss | StateKind::Btmss) { curve.spec.squeeze.s } else { 0.0 };
        table.push(vec![
            curve.id.clone().into(),
            curve.label.clone().into(),
            s.into(),
            t.into(),
            curve.channel.t_p.into(),
            curve.channel.eta_p.into(),
            curve.channel.eta_a.into(),
            lambda.into(),
        ]);
    }
    Ok(table)
}

fn t_values(cfg: &RunConfig, default: Option<&str>) -> Result<Vec<f64>> {
    match (cfg.grid(GridVar::T), default) {
        (Some(g), _) => Ok(g.values()),
        (None, Some(d)) => Ok(d.parse::<Grid>()?.values()),
        (None, None) => bail!("this command needs --grid T=start:stop:points"),
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<Table> {
    let (spec, label) = cfg.require_state()?;
    let ts = t_values(cfg, None)?;
    let axis = |var: GridVar, current: f64| cfg.grid(var).map_or(vec![current], Grid::values);
    let ch = cfg.channel;
    if cfg.grid(GridVar::S).is_some() && !matches!(spec.kind, StateKind::Bsmss | StateKind::Btmss) {
        bail!("an s grid needs a squeezed state");
    }
    let mut curves = Vec::new();
    for s in axis(GridVar::S, spec.squeeze.s) {
        for tp in axis(GridVar::Tp, ch.t_p) {
            for ep in axis(GridVar::EtaP, ch.eta_p) {
                for ea in axis(GridVar::EtaA, ch.eta_a) {
                    let mut spec = spec;
                    spec.squeeze.s = s;
                    curves.push(Curve {
                        id: format!("sweep_{:03}", curves.len()),
                        label: label.to_string(),
                        spec,
                        channel: ChannelConfig::new(ch.t, tp, ep, ea)?,
                    });
                }
            }
        }
    }
    curve_table(&curves, &ts)
}

fn bright_states(alpha: f64, s: f64) -> Result<[(&'static str, StateSpec); 4]> {
    let a = ComplexAmplitude::new(alpha, 0.0)?;
    Ok([
        ("coherent", StateSpec::coherent(a)),
        ("btmss", StateSpec::btmss(a, ComplexAmplitude::zero(), s)),
        ("bsmss", StateSpec::bsmss(a, s)),
        ("fock", StateSpec::fock(1)),
    ])
}

pub fn figure2_curves(alpha: f64) -> Result<Vec<Curve>> {
    let a = ComplexAmplitude::new(alpha, 0.0)?;
    let lossless = ChannelConfig::lossless(0.5);
    let mut curves = Vec::new();
    let mut push = |label: &str, tag: String, spec: StateSpec| {
        let id = format!("fig2_{:02}_{tag}", curves.len());
        curves.push(Curve { id, label: label.into(), spec, channel: lossless });
    };
    for s in FIGURE_SQUEEZING {
        push("btmss", format!("btmss_s{s}"), StateSpec::btmss(a, ComplexAmplitude::zero(), s));
    }
    for s in FIGURE_SQUEEZING {
        push("bsmss", format!("bsmss_s{s}"), StateSpec::bsmss(a, s));
    }
    for (label, spec) in bright_states(alpha, 2.0)? {
        push(label, format!("cmp_{label}"), spec);
    }
    Ok(curves)
}

pub fn figure3_curves(alpha: f64) -> Result<Vec<Curve>> {
    let mut curves = Vec::new();
    for tp in FIGURE3_TP {
        let ch = ChannelConfig::new(0.5, tp, 0.98, 0.98)?;
        for (label, spec) in bright_states(alpha, 2.0)? {
            if label == "coherent" {
                continue;
            }
            let id = format!("fig3_{:02}_{label}_Tp{tp}", curves.len());
            curves.push(Curve { id, label: label.into(), spec, channel: ch });
        }
    }
    Ok(curves)
}

pub fn figure2(cfg: &RunConfig) -> Result<Table> {
    curve_table(&figure2_curves(cfg.alpha)?, &t_values(cfg, Some(DEFAULT_T_GRID))?)
}

pub fn figure3(cfg: &RunConfig) -> Result<Table> {
    curve_table(&figure3_curves(cfg.alpha)?, &t_values(cfg, Some(DEFAULT_T_GRID))?)
}

pub fn monte_carlo(cfg: &RunConfig) -> Result<Table> {
    let (spec, label) = cfg.require_state()?;
    let plan = cfg.plan.unwrap_or(if spec.kind.is_two_mode() {
        MeasurementPlan::IntensityDiff { gain: None }
    } else {
        MeasurementPlan::Intensity
    });
    let mc = MCConfig::new(cfg.trials, cfg.seed, cfg.sampler)?;
    let r = mc_estimate(&spec, &cfg.channel, &plan, &mc)?;
    let ch = cfg.channel;
    let mut table = Table::new(&[
        "state",
        "s",
        "T",
        "T_p",
        "eta_p",
        "eta_a",
        "plan",
        "sampler",
        "gain",
        "trials",
        "seed",
        "mean_T",
        "empirical_var_T",
        "closed_form_var_T",
        "std_error",
        "z_score",
        "n_resource",
        "empirical_lambda",
        "closed_form_lambda",
    ]);
    let sampler = match mc.sampler {
        qcrb_lab::Sampler::Exact => "exact",
        qcrb_lab::Sampler::GaussianApprox => "gaussian",
    };
    table.push(vec![
        label.into(),
        spec.squeeze.s.into(),
        ch.t.into(),
        ch.t_p.into(),
        ch.eta_p.into(),
        ch.eta_a.into(),
        plan.name().into(),
        sampler.into(),
        r.gain.into(),
        Cell::Int(r.trials as u64),
        Cell::Int(r.seed),
        r.mean_t.into(),
        r.empirical_var_t.into(),
        r.closed_form_var_t.into(),
        r.std_error.into(),
        r.z_score.into(),
        r.n_resource.into(),
        r.empirical_lambda().into(),
        r.closed_form_lambda().into(),
    ]);
    Ok(table)
}
