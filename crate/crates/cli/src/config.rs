use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use qcrb_lab::{ChannelConfig, ComplexAmplitude, MeasurementPlan, Sampler, StateKind, StateSpec};

/// Default seed amplitude for bright states, `|α|² = 10⁶`.
pub const DEFAULT_ALPHA: f64 = 1000.0;

/// Flags shared by every subcommand. All optional so that a config file can
/// supply them; flags win over the file.
#[derive(Args, Debug, Clone, Default)]
pub struct Options {
    /// JSON file with any of the options below (flags override it)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Probe state: coherent, bsmss, btmss, vtmss or fock
    #[arg(long, global = true)]
    pub state: Option<String>,
    /// Seed amplitude |α| of the probe mode
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha_phase: Option<f64>,
    /// Seed amplitude |β| of the auxiliary mode
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta_phase: Option<f64>,
    /// Squeezing parameter s
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// Squeezing phase θ; by default the phase that maximizes the QFI
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long = "fock-n", global = true)]
    pub fock_n: Option<u32>,
    /// System transmission
    #[arg(long = "T", global = true)]
    pub t: Option<f64>,
    /// Probe transmission before the system
    #[arg(long = "Tp", global = true)]
    pub t_p: Option<f64>,
    /// Probe transmission after the system
    #[arg(long = "eta-p", global = true)]
    pub eta_p: Option<f64>,
    /// Auxiliary-mode transmission
    #[arg(long = "eta-a", global = true)]
    pub eta_a: Option<f64>,
    /// Swept variable as VAR=start:stop:points (VAR is T, s, Tp, eta-p or eta-a)
    #[arg(long, global = true)]
    pub grid: Vec<String>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sampler: exact or gaussian
    #[arg(long, global = true)]
    pub sampler: Option<String>,
    /// Measurement: intensity or diff
    #[arg(long, global = true)]
    pub plan: Option<String>,
    /// Electronic gain for the diff measurement; optimal if omitted
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gain: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv or json
    #[arg(long, global = true)]
    pub format: Option<String>,
}

/// Same fields as [`Options`], read from a JSON file.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileOptions {
    state: Option<String>,
    alpha: Option<f64>,
    alpha_phase: Option<f64>,
    beta: Option<f64>,
    beta_phase: Option<f64>,
    s: Option<f64>,
    theta: Option<f64>,
    fock_n: Option<u32>,
    #[serde(rename = "T")]
    t: Option<f64>,
    #[serde(rename = "Tp")]
    t_p: Option<f64>,
    eta_p: Option<f64>,
    eta_a: Option<f64>,
    #[serde(default)]
    grid: Vec<String>,
    trials: Option<usize>,
    seed: Option<u64>,
    sampler: Option<String>,
    plan: Option<String>,
    gain: Option<f64>,
    out: Option<PathBuf>,
    format: Option<String>,
}

impl Options {
    /// Fill unset flags from the config file, if one was given.
    pub fn merged(&self) -> Result<Options> {
        let Some(path) = &self.config else {
            return Ok(self.clone());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let f: FileOptions = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(Options {
            config: self.config.clone(),
            state: self.state.clone().or(f.state),
            alpha: self.alpha.or(f.alpha),
            alpha_phase: self.alpha_phase.or(f.alpha_phase),
            beta: self.beta.or(f.beta),
            beta_phase: self.beta_phase.or(f.beta_phase),
            s: self.s.or(f.s),
            theta: self.theta.or(f.theta),
            fock_n: self.fock_n.or(f.fock_n),
            t: self.t.or(f.t),
            t_p: self.t_p.or(f.t_p),
            eta_p: self.eta_p.or(f.eta_p),
            eta_a: self.eta_a.or(f.eta_a),
            grid: if self.grid.is_empty() { f.grid } else { self.grid.clone() },
            trials: self.trials.or(f.trials),
            seed: self.seed.or(f.seed),
            sampler: self.sampler.clone().or(f.sampler),
            plan: self.plan.clone().or(f.plan),
            gain: self.gain.or(f.gain),
            out: self.out.clone().or(f.out),
            format: self.format.clone().or(f.format),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => bail!("unknown format '{other}' (expected csv or json)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridVar {
    T,
    S,
    Tp,
    EtaP,
    EtaA,
}

impl GridVar {
    pub fn name(self) -> &'static str {
        match self {
            Self::T => "T",
            Self::S => "s",
            Self::Tp => "T_p",
            Self::EtaP => "eta_p",
            Self::EtaA => "eta_a",
        }
    }
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub var: GridVar,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start + step * i as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> Result<Self> {
        let (var, range) = text.split_once('=').ok_or_else(|| anyhow!("grid '{text}' is not VAR=start:stop:points"))?;
        let var = match var.trim() {
            "T" => GridVar::T,
            "s" => GridVar::S,
            "Tp" | "T_p" => GridVar::Tp,
            "eta-p" | "eta_p" => GridVar::EtaP,
            "eta-a" | "eta_a" => GridVar::EtaA,
            other => bail!("unknown grid variable '{other}'"),
        };
        let parts: Vec<&str> = range.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            bail!("grid '{text}' is not VAR=start:stop:points");
        };
        let grid = Grid {
            var,
            start: a.trim().parse().with_context(|| format!("grid start in '{text}'"))?,
            stop: b.trim().parse().with_context(|| format!("grid stop in '{text}'"))?,
            points: n.trim().parse().with_context(|| format!("grid points in '{text}'"))?,
        };
        grid.check()?;
        Ok(grid)
    }
}

impl Grid {
    fn check(&self) -> Result<()> {
        if self.points < 2 {
            bail!("grid for {} needs at least 2 points", self.var.name());
        }
        if !(self.start < self.stop) {
            bail!("grid for {} must be strictly increasing", self.var.name());
        }
        let (lo, hi, open) = match self.var {
            GridVar::T => (0.0, 1.0, true),
            GridVar::S => (0.0, f64::INFINITY, false),
            _ => (0.0, 1.0, false),
        };
        let inside = if open { self.start > lo && self.stop < hi } else { self.start >= lo && self.stop <= hi };
        if !inside {
            let range = if open { "(0, 1)" } else if hi.is_finite() { "[0, 1]" } else { "[0, ∞)" };
            bail!("grid for {} must lie in {range}", self.var.name());
        }
        Ok(())
    }
}

/// Options after defaults and validation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub state: Option<StateSpec>,
    pub state_label: Option<String>,
    pub channel: ChannelConfig,
    pub grids: Vec<Grid>,
    pub trials: usize,
    pub seed: u64,
    pub sampler: Sampler,
    pub plan: Option<MeasurementPlan>,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Raw options, kept for the figure commands that build their own states.
    pub alpha: f64,
}

impl RunConfig {
    pub fn resolve(opts: &Options) -> Result<Self> {
        let o = opts.merged()?;
        let channel = ChannelConfig::new(o.t.unwrap_or(0.5), o.t_p.unwrap_or(1.0), o.eta_p.unwrap_or(1.0), o.eta_a.unwrap_or(1.0))?;
        let grids = o.grid.iter().map(|g| g.parse()).collect::<Result<Vec<Grid>>>()?;
        for (i, g) in grids.iter().enumerate() {
            if grids[..i].iter().any(|h| h.var == g.var) {
                bail!("grid variable {} given twice", g.var.name());
            }
        }
        let (state, state_label) = match &o.state {
            Some(name) => {
                let (spec, label) = build_state(name, &o)?;
                (Some(spec), Some(label))
            }
            None => (None, None),
        };
        let format = match (&o.format, &o.out) {
            (Some(f), _) => f.parse()?,
            (None, Some(p)) if has_extension(p, "json") => Format::Json,
            _ => Format::Csv,
        };
        let plan = match o.plan.as_deref() {
            None => None,
            Some("intensity") => Some(MeasurementPlan::Intensity),
            Some("diff" | "intensity-diff") => Some(MeasurementPlan::IntensityDiff { gain: o.gain }),
            Some(other) => bail!("unknown plan '{other}' (expected intensity or diff)"),
        };
        if o.gain.is_some() && !matches!(plan, Some(MeasurementPlan::IntensityDiff { .. })) {
            bail!("--gain only applies to --plan diff");
        }
        let sampler = match &o.sampler {
            Some(s) => s.parse()?,
            None => Sampler::Exact,
        };
        Ok(Self {
            state,
            state_label,
            channel,
            grids,
            trials: o.trials.unwrap_or(100_000),
            seed: o.seed.unwrap_or(0),
            sampler,
            plan,
            out: o.out,
            format,
            alpha: o.alpha.unwrap_or(DEFAULT_ALPHA),
        })
    }

    pub fn require_state(&self) -> Result<(StateSpec, &str)> {
        match (&self.state, &self.state_label) {
            (Some(s), Some(l)) => Ok((*s, l.as_str())),
            _ => bail!("--state is required for this command"),
        }
    }

    pub fn grid(&self, var: GridVar) -> Option<&Grid> {
        self.grids.iter().find(|g| g.var == var)
    }
}

fn has_extension(p: &Path, ext: &str) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn build_state(name: &str, o: &Options) -> Result<(StateSpec, String)> {
    let label = name.to_ascii_lowercase();
    let kind: StateKind = label.parse()?;
    let vacuum_seeded = label == "vtmss";
    let default_alpha = if vacuum_seeded { 0.0 } else { DEFAULT_ALPHA };
    let alpha = ComplexAmplitude::new(o.alpha.unwrap_or(default_alpha), o.alpha_phase.unwrap_or(0.0))?;
    let beta = ComplexAmplitude::new(o.beta.unwrap_or(0.0), o.beta_phase.unwrap_or(0.0))?;
    if vacuum_seeded && (alpha.magnitude() != 0.0 || beta.magnitude() != 0.0) {
        bail!("vtmss has no seeds; use btmss with --alpha/--beta");
    }
    if kind != StateKind::Btmss && o.beta.is_some() {
        bail!("--beta only applies to two-mode states");
    }
    let s = o.s.unwrap_or(0.0);
    let spec = match kind {
        StateKind::Coherent => StateSpec::coherent(alpha),
        StateKind::Bsmss => StateSpec::bsmss(alpha, s),
        StateKind::Btmss => StateSpec::btmss(alpha, beta, s),
        StateKind::Fock => StateSpec::fock(o.fock_n.unwrap_or(1)),
    };
    if !(s >= 0.0 && s.is_finite()) {
        bail!("s must be a finite nonnegative number");
    }
    let spec = match o.theta {
        Some(th) if matches!(kind, StateKind::Bsmss | StateKind::Btmss) => spec.with_theta(th),
        Some(_) => bail!("--theta only applies to squeezed states"),
        None => spec,
    };
    let label = match kind {
        StateKind::Btmss if vacuum_seeded => "vtmss".to_string(),
        k => k.name().to_string(),
    };
    Ok((spec, label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "T=0.1:0.9:5".parse().unwrap();
        assert_eq!(g.var, GridVar::T);
        assert_eq!(g.values(), vec![0.1, 0.30000000000000004, 0.5, 0.7000000000000001, 0.9]);
        assert!("T=0:0.9:5".parse::<Grid>().is_err());
        assert!("T=0.5:0.4:5".parse::<Grid>().is_err());
        assert!("T=0.1:0.9:1".parse::<Grid>().is_err());
        assert!("s=0:3:4".parse::<Grid>().is_ok());
        assert!("x=0:1:3".parse::<Grid>().is_err());
        assert!("T=0.1:0.9".parse::<Grid>().is_err());
    }

    #[test]
    fn state_defaults() {
        let opts = Options { state: Some("vtmss".into()), s: Some(1.0), ..Default::default() };
        let cfg = RunConfig::resolve(&opts).unwrap();
        let (spec, label) = cfg.require_state().unwrap();
        assert_eq!(label, "vtmss");
        assert_eq!(spec.alpha.magnitude(), 0.0);
        assert_eq!(cfg.format, Format::Csv);

        let bad = Options { state: Some("vtmss".into()), alpha: Some(2.0), ..Default::default() };
        assert!(RunConfig::resolve(&bad).is_err());
        let bad = Options { t: Some(1.5), ..Default::default() };
        assert!(RunConfig::resolve(&bad).is_err());
    }

    #[test]
    fn file_values_are_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"state": "bsmss", "s": 1.5, "T": 0.3, "format": "json"}"#).unwrap();
        let opts = Options { config: Some(path.clone()), t: Some(0.8), ..Default::default() };
        let cfg = RunConfig::resolve(&opts).unwrap();
        assert_eq!(cfg.channel.t, 0.8);
        assert_eq!(cfg.require_state().unwrap().0.squeeze.s, 1.5);
        assert_eq!(cfg.format, Format::Json);
        std::fs::write(&path, r#"{"stat": "bsmss"}"#).unwrap();
        assert!(RunConfig::resolve(&opts).is_err());
    }
}
