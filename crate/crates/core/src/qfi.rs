//! Quantum Fisher information for transmission estimation.
//!
//! Two independent routes are provided for Gaussian probes: the closed-form
//! estimation functions, and the general two-mode Gaussian QFI evaluated from
//! the covariance matrix, displacement vector and their `T`-derivatives.
//! Fock probes are handled by the binomial Fisher sum.
//!
//! The estimation function is `Λ = ⟨Δ²T⟩·⟨n_p⟩_r`, where the resource
//! `⟨n_p⟩_r = T_p·⟨n_p⟩₀` counts photons at the system input only.

use log::debug;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gaussian::{bright_tmss_photons, ChannelConfig, GaussianState, SqueezeSpec, StateKind, StateSpec};
use crate::linalg::CMatrix;
use crate::scalar::{re, Scalar, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    GaussianGeneral,
    FockSum,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::GaussianGeneral => "gaussian_general",
            Method::FockSum => "fock_sum",
        }
    }
}

/// Whether a value is exact for the given state or holds in the bright-seed
/// limit only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Exact,
    BrightLimit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimationReport<F: Scalar> {
    pub lambda: F,
    pub qfi: F,
    pub qcrb: F,
    pub n_resource: F,
    pub method: Method,
    pub regime: Regime,
}

impl<F: Scalar> EstimationReport<F> {
    pub fn from_lambda(lambda: F, n_resource: F, method: Method, regime: Regime) -> Self {
        let qcrb = lambda / n_resource;
        Self { lambda, qfi: qcrb.recip(), qcrb, n_resource, method, regime }
    }

    pub fn from_qfi(qfi: F, n_resource: F, method: Method, regime: Regime) -> Self {
        let qcrb = qfi.recip();
        Self { lambda: qcrb * n_resource, qfi, qcrb, n_resource, method, regime }
    }
}

fn open_unit<F: Scalar>(name: &'static str, t: F) -> Result<()> {
    if t > F::zero() && t < F::one() {
        Ok(())
    } else {
        Err(Error::InvalidTransmission { name, value: t.to_f64_lossy(), range: "(0, 1)" })
    }
}

/// Upper bound on the QFI of any probe with `n_resource` photons at the
/// system: `n / (T − T²)`.
pub fn fisher_max<F: Scalar>(n_resource: F, t: F) -> Result<F> {
    open_unit("T", t)?;
    if !(n_resource > F::zero()) {
        return Err(Error::Domain(format!("resource photon number must be positive, got {n_resource}")));
    }
    Ok(n_resource / (t - t * t))
}

/// Probe family whose only free parameter is the system transmission `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamFamily<F: Scalar> {
    pub spec: StateSpec<F>,
    pub channel: ChannelConfig<F>,
}

/// State after the channel together with its element-wise `T`-derivatives.
#[derive(Clone, Debug)]
pub struct StateDerivative<F: Scalar> {
    pub state: GaussianState<F>,
    pub dsigma: CMatrix<F>,
    pub dd: Vec<C<F>>,
}

impl<F: Scalar> ParamFamily<F> {
    pub fn new(spec: StateSpec<F>, channel: ChannelConfig<F>) -> Result<Self> {
        channel.validate()?;
        if spec.kind == StateKind::Fock {
            return Err(Error::UnsupportedState("fock"));
        }
        Ok(Self { spec, channel })
    }

    /// Source state as a two-mode state (single-mode probes get a vacuum
    /// auxiliary) with the auxiliary loss already applied.
    fn source_two_mode(&self) -> Result<GaussianState<F>> {
        let src = self.spec.gaussian_state()?;
        let two = if src.modes() == 1 {
            GaussianState::product(&src, &GaussianState::vacuum(1))?
        } else {
            src
        };
        two.apply_loss(1, self.channel.eta_a)
    }

    pub fn state_at(&self, t: F) -> Result<GaussianState<F>> {
        self.source_two_mode()?.apply_loss(0, self.channel.with_t(t).probe_transmission())
    }

    /// Analytic derivatives: probe-probe entries are affine in
    /// `τ = T_p T η_p`, probe-auxiliary entries and probe displacements
    /// scale with `√τ`, auxiliary entries do not depend on `T`.
    pub fn derivatives_at(&self, t: F) -> Result<StateDerivative<F>> {
        let src = self.source_two_mode()?;
        let ext = self.channel.external_probe();
        let tau = ext * t;
        let dtau = ext;
        let dsqrt = if tau > F::zero() { ext / (F::lit(2.0) * tau.sqrt()) } else { F::infinity() };
        let probe = |i: usize| i == 0 || i == 2;
        let s0 = src.sigma();
        let dsigma = CMatrix::from_fn(4, |i, j| match (probe(i), probe(j)) {
            (true, true) if i == j => (s0[(i, j)] - re(F::one())) * re(dtau),
            (true, true) => s0[(i, j)] * re(dtau),
            (true, false) | (false, true) => s0[(i, j)] * re(dsqrt),
            (false, false) => C::zero(),
        });
        let dd = src
            .displacement()
            .iter()
            .enumerate()
            .map(|(i, &z)| if probe(i) { z * re(dsqrt) } else { C::zero() })
            .collect();
        Ok(StateDerivative { state: src.apply_loss(0, tau)?, dsigma, dd })
    }

    /// Richardson-extrapolated central differences with step `h`.
    pub fn finite_difference_derivatives(&self, t: F, h: F) -> Result<StateDerivative<F>> {
        let at = |x: F| self.state_at(x);
        let (p1, m1, p2, m2) = (at(t + h)?, at(t - h)?, at(t + h + h)?, at(t - h - h)?);
        let eight = F::lit(8.0);
        let denom = F::lit(12.0) * h;
        let dsigma = CMatrix::from_fn(4, |i, j| {
            ((p1.sigma()[(i, j)] - m1.sigma()[(i, j)]) * re(eight) - (p2.sigma()[(i, j)] - m2.sigma()[(i, j)]))
                / re(denom)
        });
        let dd = (0..4)
            .map(|i| {
                ((p1.displacement()[i] - m1.displacement()[i]) * re(eight)
                    - (p2.displacement()[i] - m2.displacement()[i]))
                    / re(denom)
            })
            .collect();
        Ok(StateDerivative { state: at(t)?, dsigma, dd })
    }

    /// Resource photons `T_p·⟨n_p⟩₀` and their stimulated part `T_p·|d_p|²`.
    pub fn resources(&self) -> Result<(F, F)> {
        let src = self.spec.gaussian_state()?;
        let m = src.photon_moments();
        Ok((self.channel.t_p * m.mean_p, self.channel.t_p * src.probe_amplitude().norm_sqr()))
    }
}

/// The separate pieces of the Gaussian QFI at one value of `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct QfiTerms<F: Scalar> {
    pub t: F,
    /// Covariance (spontaneous) contribution, the first three terms.
    pub vacuum: F,
    /// Displacement contribution `2 ḋ† σ⁻¹ ḋ`.
    pub displacement: F,
    /// Symplectic eigenvalues of the state at `T`, ascending.
    pub symplectic: Vec<F>,
    /// Singular `λ̇²/(λ⁴ − 1)` contributions that were dropped, as
    /// `(|λ − 1|, λ̇²)`.
    pub dropped: Vec<(F, F)>,
    pub n_total: F,
    pub n_bright: F,
}

impl<F: Scalar> QfiTerms<F> {
    pub fn total(&self) -> F {
        self.vacuum + self.displacement
    }

    /// Full QFI against all probe photons.
    pub fn full_report(&self) -> EstimationReport<F> {
        EstimationReport::from_qfi(self.total(), self.n_total, Method::GaussianGeneral, Regime::Exact)
    }

    /// Displacement term against the stimulated photons, the quantity the
    /// bright-limit closed forms describe.
    pub fn bright_report(&self) -> EstimationReport<F> {
        EstimationReport::from_qfi(self.displacement, self.n_bright, Method::GaussianGeneral, Regime::BrightLimit)
    }
}

fn trace_sq<F: Scalar>(m: &CMatrix<F>) -> F {
    (m * m).trace().re
}

/// General Gaussian QFI split into its vacuum and displacement parts, using
/// the given derivatives.
pub fn qfi_terms_from<F: Scalar>(family: &ParamFamily<F>, t: F, der: &StateDerivative<F>) -> Result<QfiTerms<F>> {
    let (n_total, n_bright) = family.resources()?;
    let sigma = der.state.sigma();
    let sigma_inv = sigma.inverse()?;
    let displacement = {
        let v = sigma_inv.mul_vec(&der.dd);
        let q: C<F> = der.dd.iter().zip(&v).fold(C::zero(), |acc, (a, b)| acc + a.conj() * *b);
        F::lit(2.0) * q.re
    };

    let k = GaussianState::<F>::k_matrix(2);
    let big = &k * sigma;
    let dbig = &k * &der.dsigma;
    let symplectic = der.state.symplectic_eigenvalues()?;
    let mut dropped = Vec::new();

    let scale = sigma.max_abs().max(F::one());
    let vacuum = if dbig.max_abs() <= F::epsilon() * scale {
        F::zero()
    } else {
        let (l1, l2) = (symplectic[0], symplectic[1]);
        let near1 = |l: F| (l - F::one()).abs() < F::EPS_SING;
        if near1(l1) && near1(l2) {
            return Err(Error::DegenerateSpectrum { eps: F::EPS_SING.to_f64_lossy() });
        }
        let det = big.determinant().re;
        let big_inv = big.inverse()?;
        let term1 = det * trace_sq(&(&big_inv * &dbig));
        let id = CMatrix::identity(4);
        let one_plus = &id + &(&big * &big);
        let term2 = one_plus.determinant().re.sqrt() * trace_sq(&(&one_plus.inverse()? * &dbig));

        // λ₁², λ₂² are the roots of x² − p x + q with p = tr(Σ²)/2, q = det Σ.
        let (x1, x2) = (l1 * l1, l2 * l2);
        let dp = (&big * &dbig).trace().re;
        let dq = det * (&big_inv * &dbig).trace().re;
        let term3 = if (x2 - x1).abs() < F::EPS_SING {
            debug!("degenerate symplectic pair at T={t}: third QFI term set to zero");
            F::zero()
        } else {
            let dx1 = (dq - x1 * dp) / (x2 - x1);
            let dx2 = dp - dx1;
            let dl1 = dx1 / (l1 + l1);
            let dl2 = dx2 / (l2 + l2);
            let mut acc = F::zero();
            for (l, dl, sign) in [(l2, dl2, F::one()), (l1, dl1, -F::one())] {
                if near1(l) {
                    debug!("dropping singular term at T={t}: |λ-1|={}, λ̇²={}", (l - F::one()).abs(), dl * dl);
                    dropped.push(((l - F::one()).abs(), dl * dl));
                } else {
                    acc += sign * dl * dl / (l.powi(4) - F::one());
                }
            }
            F::lit(4.0) * (x1 - x2) * acc
        };
        (term1 + term2 + term3) / (F::lit(2.0) * (det - F::one()))
    };

    Ok(QfiTerms { t, vacuum, displacement, symplectic, dropped, n_total, n_bright })
}

/// General Gaussian QFI terms with analytic derivatives.
pub fn qfi_gaussian_terms<F: Scalar>(family: &ParamFamily<F>, t: F) -> Result<QfiTerms<F>> {
    open_unit("T", t)?;
    let der = family.derivatives_at(t)?;
    qfi_terms_from(family, t, &der)
}

/// Full Gaussian QFI report for `family` at system transmission `t`.
pub fn qfi_gaussian<F: Scalar>(family: &ParamFamily<F>, t: F) -> Result<EstimationReport<F>> {
    Ok(qfi_gaussian_terms(family, t)?.full_report())
}

/// Finite-difference step used to cross-check the analytic derivatives.
pub fn fd_step<F: Scalar>(t: F) -> F {
    F::lit(1e-6) * t.max(F::lit(1e-3))
}

/// Pure-state estimation functions (no external loss), bright limit for the
/// seeded squeezed states.
pub fn lambda_pure<F: Scalar>(spec: &StateSpec<F>, t: F) -> F {
    let t2 = t * t;
    let s = spec.squeeze.s;
    let two_s = s + s;
    match spec.kind {
        StateKind::Fock => t - t2,
        StateKind::Coherent => t,
        StateKind::Btmss if is_unseeded(spec) => t - t2,
        StateKind::Btmss => t - t2 * (F::one() - two_s.cosh().recip()),
        StateKind::Bsmss => t - t2 * (F::one() - (-two_s).exp()),
    }
}

fn is_unseeded<F: Scalar>(spec: &StateSpec<F>) -> bool {
    spec.alpha.magnitude().is_zero() && spec.beta.magnitude().is_zero()
}

/// Exact bTMSS QFI:
/// `sinh²s/(T − T²) + n_bright/(T − T² + T² sech 2s)`.
pub fn qfi_btmss_full<F: Scalar>(
    alpha: crate::gaussian::ComplexAmplitude<F>,
    beta: crate::gaussian::ComplexAmplitude<F>,
    squeeze: SqueezeSpec<F>,
    t: F,
) -> F {
    let spec = StateSpec { kind: StateKind::Btmss, alpha, beta, squeeze, fock_n: 0 };
    let s = squeeze.s;
    let base = t - t * t;
    let vac = s.sinh().powi(2);
    vac / base + bright_tmss_photons(&spec) / (base + t * t * (s + s).cosh().recip())
}

/// Auxiliary-loss factor `(2η_a − 1)(1 + 2 sinh²s) / (1 + 2 η_a sinh²s)`.
pub fn h_factor<F: Scalar>(s: F, eta_a: F) -> F {
    let two_sh2 = F::lit(2.0) * s.sinh().powi(2);
    (F::lit(2.0) * eta_a - F::one()) * (F::one() + two_sh2) / (F::one() + eta_a * two_sh2)
}

/// Estimation function with external losses. Seeded squeezed states use the
/// bright-limit closed forms; an unseeded bTMSS falls back to the general
/// Gaussian QFI.
pub fn lambda_lossy<F: Scalar>(spec: &StateSpec<F>, channel: &ChannelConfig<F>) -> Result<EstimationReport<F>> {
    channel.validate()?;
    let t = channel.t;
    open_unit("T", t)?;
    let s = spec.squeeze.s;
    let two_s = s + s;
    let t2 = t * t;
    let linear = t / channel.eta_p;
    let quad = t2 * channel.t_p;
    let n_r = channel.t_p * spec.source_probe_photons();
    let (lambda, regime) = match spec.kind {
        StateKind::Coherent => (linear, Regime::Exact),
        StateKind::Fock => (linear - quad, Regime::Exact),
        StateKind::Bsmss => (linear - quad * (F::one() - (-two_s).exp()), Regime::BrightLimit),
        StateKind::Btmss if is_unseeded(spec) => {
            return qfi_gaussian(&ParamFamily::new(*spec, *channel)?, t);
        }
        StateKind::Btmss => (
            linear - quad * h_factor(s, channel.eta_a) * (F::one() - two_s.cosh().recip()),
            Regime::BrightLimit,
        ),
    };
    Ok(EstimationReport::from_lambda(lambda, n_r, Method::ClosedForm, regime))
}

/// Closed-form positive symplectic eigenvalues of a TMSS after the full
/// channel, ascending.
pub fn lossy_symplectic_closed_form<F: Scalar>(s: F, channel: &ChannelConfig<F>) -> (F, F) {
    let tau = channel.probe_transmission();
    let ea = channel.eta_a;
    let sh2 = s.sinh().powi(2);
    let two = F::lit(2.0);
    let diff = tau - ea;
    let root = (F::one() - ea
        + tau * (two * ea - F::one())
        + (ea + tau * (F::one() - two * ea)) * (s + s).cosh()
        + diff * diff * sh2 * sh2)
        .max(F::zero())
        .sqrt();
    let a = (diff * sh2 + root).abs();
    let b = (diff * sh2 - root).abs();
    (a.min(b), a.max(b))
}

/// Lossy Fock-state QFI from the binomial photon distribution with
/// `p = T_p T η_p`.
pub fn fock_qfi_lossy<F: Scalar>(n: u32, channel: &ChannelConfig<F>) -> Result<EstimationReport<F>> {
    channel.validate()?;
    if n == 0 {
        return Err(Error::Domain("Fock QFI needs n ≥ 1".into()));
    }
    let p = channel.probe_transmission();
    open_unit("T_p·T·η_p", p)?;
    let nf = F::from_u32(n).unwrap();
    let (lp, lq) = (p.ln(), (F::one() - p).ln());
    let dp = channel.external_probe();
    let mut ln_binom = F::zero();
    let mut fisher = F::zero();
    for k in 0..=n {
        let kf = F::from_u32(k).unwrap();
        if k > 0 {
            ln_binom += (F::from_u32(n - k + 1).unwrap() / kf).ln();
        }
        let rho = (ln_binom + kf * lp + (nf - kf) * lq).exp();
        if rho > F::zero() {
            let drho = rho * (kf / p - (nf - kf) / (F::one() - p)) * dp;
            fisher += drho * drho / rho;
        }
    }
    Ok(EstimationReport::from_qfi(fisher, channel.t_p * nf, Method::FockSum, Regime::Exact))
}

/// Stimulated-photon count above which the bTMSS bright term dominates:
/// `[1 − T + T sech 2s]/(1 − T) · sinh²s`.
pub fn bright_limit_threshold<F: Scalar>(t: F, s: F) -> Result<F> {
    open_unit("T", t)?;
    Ok((F::one() - t + t * (s + s).cosh().recip()) / (F::one() - t) * s.sinh().powi(2))
}
