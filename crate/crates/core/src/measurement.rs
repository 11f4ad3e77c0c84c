//! Photon-counting measurements: direct intensity and the gain-weighted
//! intensity difference `n_p − g·n_a`, with error propagation to `Δ²T`.

use crate::error::{Error, Result};
use crate::gaussian::{check_unit, ChannelConfig, Moments, StateKind, StateSpec};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasurementPlan<F: Scalar> {
    Intensity,
    /// `n_p − g·n_a`; `None` selects the optimal gain.
    IntensityDiff { gain: Option<F> },
}

impl<F: Scalar> MeasurementPlan<F> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::IntensityDiff { gain: Some(g) } if !g.is_finite() => {
                Err(Error::InvalidConfig(format!("gain must be finite, got {g}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Intensity => "intensity",
            Self::IntensityDiff { .. } => "intensity-diff",
        }
    }
}

/// Which photon statistics of a Gaussian source to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentModel {
    /// Full statistics, spontaneous photons included.
    Exact,
    /// Stimulated part only, linear in the seed photon number.
    Bright,
}

/// Source photon statistics for `spec`. Fock states are exact under both
/// models.
pub fn source_moments<F: Scalar>(spec: &StateSpec<F>, model: MomentModel) -> Result<Moments<F>> {
    if spec.kind == StateKind::Fock {
        let n = F::from_u32(spec.fock_n).unwrap();
        return Ok(Moments { mean_p: n, ..Default::default() });
    }
    let g = spec.gaussian_state()?;
    Ok(match model {
        MomentModel::Exact => g.photon_moments(),
        MomentModel::Bright => g.bright_photon_moments(),
    })
}

/// Mean and variance of a photon count after a loss `t`:
/// `t·m₀` and `t²·v₀ + t(1−t)·m₀`.
pub fn intensity_stats<F: Scalar>(moments0: &Moments<F>, t: F) -> Result<(F, F)> {
    check_unit("t", t)?;
    Ok(thin(moments0.mean_p, moments0.var_p, t))
}

fn thin<F: Scalar>(mean: F, var: F, t: F) -> (F, F) {
    (t * mean, t * t * var + t * (F::one() - t) * mean)
}

/// Statistics at the detectors: probe thinned by `T_p·T·η_p`, auxiliary by
/// `η_a`, covariance by both.
pub fn detected_moments<F: Scalar>(moments0: &Moments<F>, ch: &ChannelConfig<F>) -> Result<Moments<F>> {
    ch.validate()?;
    let tau = ch.probe_transmission();
    let (mean_p, var_p) = thin(moments0.mean_p, moments0.var_p, tau);
    let (mean_a, var_a) = thin(moments0.mean_a, moments0.var_a, ch.eta_a);
    Ok(Moments { mean_p, var_p, mean_a, var_a, cov_pa: tau * ch.eta_a * moments0.cov_pa })
}

/// `η_a·var_a + (1−η_a)·mean_a`; the detected auxiliary variance is `η_a`
/// times this.
fn aux_noise<F: Scalar>(m: &Moments<F>, eta_a: F) -> F {
    eta_a * m.var_a + (F::one() - eta_a) * m.mean_a
}

/// Gain minimizing the variance of `n_p − g·n_a`:
/// `T·T_p·η_p·cov_pa / (η_a·var_a + (1−η_a)·mean_a)`.
pub fn optimal_gain<F: Scalar>(moments0: &Moments<F>, ch: &ChannelConfig<F>) -> Result<F> {
    ch.validate()?;
    let noise = aux_noise(moments0, ch.eta_a);
    let scale = moments0.var_p.abs().max(moments0.mean_p.abs()).max(F::one());
    if !(noise > scale * F::epsilon()) || ch.eta_a.is_zero() {
        return Err(Error::Domain("optimal gain undefined: auxiliary carries no detected noise".into()));
    }
    Ok(ch.probe_transmission() * moments0.cov_pa / noise)
}

/// Detected variance of `n_p − g·n_a`.
pub fn diff_variance<F: Scalar>(moments0: &Moments<F>, ch: &ChannelConfig<F>, g: F) -> Result<F> {
    let m = detected_moments(moments0, ch)?;
    Ok(m.var_p + g * g * m.var_a - (g + g) * m.cov_pa)
}

/// Minimum of [`diff_variance`]: `V_p − (T T_p η_p)²·η_a·cov_pa² / (η_a var_a + (1−η_a) mean_a)`.
pub fn diff_variance_at_optimum<F: Scalar>(moments0: &Moments<F>, ch: &ChannelConfig<F>) -> Result<F> {
    let noise = aux_noise(moments0, ch.eta_a);
    optimal_gain(moments0, ch)?;
    let tau = ch.probe_transmission();
    let (_, v_p) = thin(moments0.mean_p, moments0.var_p, tau);
    Ok(v_p - tau * tau * ch.eta_a * moments0.cov_pa * moments0.cov_pa / noise)
}

/// Slope of the mean response, `∂⟨n_p − g n_a⟩/∂T = T_p·η_p·⟨n_p⟩₀`; the
/// auxiliary mean and the gain do not depend on `T`.
fn response_slope<F: Scalar>(moments0: &Moments<F>, ch: &ChannelConfig<F>) -> Result<F> {
    let slope = ch.external_probe() * moments0.mean_p;
    if !(slope > F::zero()) {
        return Err(Error::Domain("mean response does not depend on T".into()));
    }
    Ok(slope)
}

/// Error-propagation variance of `T` for one shot of `plan`.
pub fn transmission_var_from_moments<F: Scalar>(
    moments0: &Moments<F>,
    ch: &ChannelConfig<F>,
    plan: &MeasurementPlan<F>,
) -> Result<F> {
    plan.validate()?;
    let slope = response_slope(moments0, ch)?;
    let var = match *plan {
        MeasurementPlan::Intensity => detected_moments(moments0, ch)?.var_p,
        MeasurementPlan::IntensityDiff { gain: Some(g) } => diff_variance(moments0, ch, g)?,
        MeasurementPlan::IntensityDiff { gain: None } => diff_variance_at_optimum(moments0, ch)?,
    };
    Ok(var / (slope * slope))
}

/// Transmission variance of a measurement together with the probe photons
/// entering the system it is normalized against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransmissionVariance<F: Scalar> {
    pub var_t: F,
    pub n_resource: F,
    /// The measurement attains the closed-form bound for this state.
    pub saturating: bool,
    pub gain: Option<F>,
}

impl<F: Scalar> TransmissionVariance<F> {
    /// `Δ²T · ⟨n_p⟩_r`, comparable to Λ.
    pub fn lambda(&self) -> F {
        self.var_t * self.n_resource
    }
}

/// Direct intensity measurement of a single-mode probe, bright-limit
/// statistics. Gives `T/η_p − T²T_p(1 − Fano₀)` per resource photon.
pub fn transmission_var_intensity<F: Scalar>(spec: &StateSpec<F>, ch: &ChannelConfig<F>) -> Result<TransmissionVariance<F>> {
    if spec.kind.is_two_mode() {
        return Err(Error::UnsupportedState("intensity measurement is defined for single-mode probes"));
    }
    let m0 = source_moments(spec, MomentModel::Bright)?;
    let var_t = transmission_var_from_moments(&m0, ch, &MeasurementPlan::Intensity)?;
    let saturating = match spec.kind {
        StateKind::Bsmss => spec.derived_phase().is_some_and(|p| p.abs() < F::EPS_SYM),
        _ => true,
    };
    Ok(TransmissionVariance { var_t, n_resource: ch.t_p * m0.mean_p, saturating, gain: None })
}

/// Optimized intensity difference on a bTMSS, bright-limit statistics.
/// Saturates the bound when `β = 0` or `cos Θ = −1`; otherwise the result
/// is returned with `saturating = false`.
pub fn transmission_var_diff<F: Scalar>(spec: &StateSpec<F>, ch: &ChannelConfig<F>) -> Result<TransmissionVariance<F>> {
    if spec.kind != StateKind::Btmss {
        return Err(Error::UnsupportedState("intensity difference is defined for bTMSS probes"));
    }
    let m0 = source_moments(spec, MomentModel::Bright)?;
    let gain = optimal_gain(&m0, ch)?;
    let var_t = transmission_var_from_moments(&m0, ch, &MeasurementPlan::IntensityDiff { gain: Some(gain) })?;
    let cos_t = spec.derived_phase().unwrap_or_else(F::zero).cos();
    let saturating = spec.beta.magnitude().is_zero() || (cos_t + F::one()).abs() < F::EPS_SYM;
    Ok(TransmissionVariance { var_t, n_resource: ch.t_p * m0.mean_p, saturating, gain: Some(gain) })
}
