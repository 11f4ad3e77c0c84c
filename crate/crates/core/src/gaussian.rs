//! Gaussian probe states in complex `(a, a†)` form.
//!
//! A state on `n` modes (`n` is 1 or 2) is a displacement vector
//! `d = ⟨A⟩` and covariance matrix `σ_ij = ⟨{ΔA_i, ΔA_j†}⟩` with
//! `A = (a_1, …, a_n, a_1†, …, a_n†)`. The vacuum has `σ = I`. Mode 0 is the
//! probe, mode 1 (when present) the auxiliary.
//!
//! Bright squeezed states follow the seed-then-squeeze ordering
//! `S(s, θ) D(α) D(β) |0⟩`; the constructors write down the resulting
//! closed forms rather than composing operators.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cis, re, Scalar, C};

/// Seed amplitude `|α| e^{iφ}` with `φ ∈ (−π, π]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexAmplitude<F: Scalar> {
    magnitude: F,
    phase: F,
}

fn reduce_phase<F: Scalar>(phase: F) -> F {
    let two_pi = F::PI() + F::PI();
    let mut p = phase % two_pi;
    if p > F::PI() {
        p -= two_pi;
    } else if p <= -F::PI() {
        p += two_pi;
    }
    p
}

impl<F: Scalar> ComplexAmplitude<F> {
    pub fn new(magnitude: F, phase: F) -> Result<Self> {
        if !(magnitude >= F::zero()) || !phase.is_finite() || !magnitude.is_finite() {
            return Err(Error::Domain(format!(
                "amplitude magnitude must be finite and nonnegative, got {magnitude}"
            )));
        }
        Ok(Self { magnitude, phase: reduce_phase(phase) })
    }

    /// Real amplitude; negative values carry phase π.
    pub fn real(x: F) -> Self {
        if x < F::zero() {
            Self { magnitude: -x, phase: F::PI() }
        } else {
            Self { magnitude: x, phase: F::zero() }
        }
    }

    pub fn zero() -> Self {
        Self { magnitude: F::zero(), phase: F::zero() }
    }

    pub fn magnitude(&self) -> F {
        self.magnitude
    }

    pub fn phase(&self) -> F {
        self.phase
    }

    pub fn value(&self) -> C<F> {
        cis(self.phase) * re(self.magnitude)
    }

    pub fn photons(&self) -> F {
        self.magnitude * self.magnitude
    }
}

/// Squeezing amplitude `s ≥ 0` and phase `θ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeSpec<F: Scalar> {
    pub s: F,
    pub theta: F,
}

impl<F: Scalar> SqueezeSpec<F> {
    pub fn new(s: F, theta: F) -> Result<Self> {
        if !(s >= F::zero()) || !s.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!("squeezing s must be finite and ≥ 0, got {s}")));
        }
        Ok(Self { s, theta })
    }

    pub fn none() -> Self {
        Self { s: F::zero(), theta: F::zero() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateKind {
    Coherent,
    Bsmss,
    Btmss,
    Fock,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            StateKind::Coherent => "coherent",
            StateKind::Bsmss => "bsmss",
            StateKind::Btmss => "btmss",
            StateKind::Fock => "fock",
        }
    }

    pub fn is_two_mode(self) -> bool {
        matches!(self, StateKind::Btmss)
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "coherent" | "coh" => Ok(StateKind::Coherent),
            "bsmss" | "smss" => Ok(StateKind::Bsmss),
            "btmss" | "tmss" | "vtmss" => Ok(StateKind::Btmss),
            "fock" => Ok(StateKind::Fock),
            other => Err(Error::InvalidConfig(format!("unknown state kind `{other}`"))),
        }
    }
}

/// Declarative description of a probe state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSpec<F: Scalar> {
    pub kind: StateKind,
    pub alpha: ComplexAmplitude<F>,
    pub beta: ComplexAmplitude<F>,
    pub squeeze: SqueezeSpec<F>,
    pub fock_n: u32,
}

impl<F: Scalar> StateSpec<F> {
    pub fn coherent(alpha: ComplexAmplitude<F>) -> Self {
        Self {
            kind: StateKind::Coherent,
            alpha,
            beta: ComplexAmplitude::zero(),
            squeeze: SqueezeSpec::none(),
            fock_n: 0,
        }
    }

    /// Amplitude-squeezed bSMSS: the squeezing phase is aligned with the seed
    /// so that the derived phase is 0.
    pub fn bsmss(alpha: ComplexAmplitude<F>, s: F) -> Self {
        let theta = alpha.phase() + alpha.phase();
        Self {
            kind: StateKind::Bsmss,
            alpha,
            beta: ComplexAmplitude::zero(),
            squeeze: SqueezeSpec { s, theta },
            fock_n: 0,
        }
    }

    /// bTMSS with the derived phase set to π, the QFI-maximizing choice for
    /// doubly seeded states.
    pub fn btmss(alpha: ComplexAmplitude<F>, beta: ComplexAmplitude<F>, s: F) -> Self {
        let theta = reduce_phase(F::PI() + alpha.phase() + beta.phase());
        Self { kind: StateKind::Btmss, alpha, beta, squeeze: SqueezeSpec { s, theta }, fock_n: 0 }
    }

    pub fn vtmss(s: F) -> Self {
        Self::btmss(ComplexAmplitude::zero(), ComplexAmplitude::zero(), s)
    }

    pub fn fock(n: u32) -> Self {
        Self {
            kind: StateKind::Fock,
            alpha: ComplexAmplitude::zero(),
            beta: ComplexAmplitude::zero(),
            squeeze: SqueezeSpec::none(),
            fock_n: n,
        }
    }

    pub fn with_theta(mut self, theta: F) -> Self {
        self.squeeze.theta = theta;
        self
    }

    pub fn modes(&self) -> usize {
        if self.kind.is_two_mode() {
            2
        } else {
            1
        }
    }

    /// Phase combination the photon statistics depend on:
    /// `θ − 2 arg α` (bSMSS) or `θ − arg α − arg β` (bTMSS).
    pub fn derived_phase(&self) -> Option<F> {
        match self.kind {
            StateKind::Bsmss => {
                Some(reduce_phase(self.squeeze.theta - self.alpha.phase() - self.alpha.phase()))
            }
            StateKind::Btmss => {
                Some(reduce_phase(self.squeeze.theta - self.alpha.phase() - self.beta.phase()))
            }
            _ => None,
        }
    }

    /// Probe photons generated by the source, `⟨n_p⟩₀`.
    pub fn source_probe_photons(&self) -> F {
        let s = self.squeeze.s;
        let sh = s.sinh();
        match self.kind {
            StateKind::Fock => F::from_u32(self.fock_n).unwrap_or_else(F::zero),
            StateKind::Coherent => self.alpha.photons(),
            StateKind::Bsmss => {
                let cos_t = self.derived_phase().unwrap_or_else(F::zero).cos();
                let two_s = s + s;
                self.alpha.photons() * (two_s.cosh() - cos_t * two_s.sinh()) + sh * sh
            }
            StateKind::Btmss => bright_tmss_photons(self) + sh * sh,
        }
    }

    /// Gaussian state produced by the source (no losses).
    pub fn gaussian_state(&self) -> Result<GaussianState<F>> {
        match self.kind {
            StateKind::Coherent => Ok(GaussianState::coherent(self.alpha)),
            StateKind::Bsmss => Ok(GaussianState::bsmss(self.alpha, self.squeeze)),
            StateKind::Btmss => Ok(GaussianState::btmss(self.alpha, self.beta, self.squeeze)),
            StateKind::Fock => Err(Error::UnsupportedState("fock")),
        }
    }
}

/// Stimulated probe photons of a bTMSS,
/// `|α|² cosh²s + |β|² sinh²s − |α||β| cos Θ sinh 2s`.
pub fn bright_tmss_photons<F: Scalar>(spec: &StateSpec<F>) -> F {
    let s = spec.squeeze.s;
    let (sh, ch) = (s.sinh(), s.cosh());
    let cos_t = spec.derived_phase().unwrap_or_else(F::zero).cos();
    let (a, b) = (spec.alpha.magnitude(), spec.beta.magnitude());
    a * a * ch * ch + b * b * sh * sh - a * b * cos_t * (s + s).sinh()
}

/// The four beamsplitter transmissions of the setup: pre-system probe
/// `t_p`, system `t`, post-system probe `eta_p`, auxiliary `eta_a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelConfig<F: Scalar> {
    pub t: F,
    pub t_p: F,
    pub eta_p: F,
    pub eta_a: F,
}

pub(crate) fn check_unit<F: Scalar>(name: &'static str, x: F) -> Result<()> {
    if x >= F::zero() && x <= F::one() {
        Ok(())
    } else {
        Err(Error::InvalidTransmission { name, value: x.to_f64_lossy(), range: "[0, 1]" })
    }
}

impl<F: Scalar> ChannelConfig<F> {
    pub fn new(t: F, t_p: F, eta_p: F, eta_a: F) -> Result<Self> {
        let ch = Self { t, t_p, eta_p, eta_a };
        ch.validate()?;
        Ok(ch)
    }

    pub fn lossless(t: F) -> Self {
        Self { t, t_p: F::one(), eta_p: F::one(), eta_a: F::one() }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("T", self.t)?;
        check_unit("T_p", self.t_p)?;
        check_unit("eta_p", self.eta_p)?;
        check_unit("eta_a", self.eta_a)
    }

    pub fn with_t(mut self, t: F) -> Self {
        self.t = t;
        self
    }

    /// Total probe transmission `T_p·T·η_p`.
    pub fn probe_transmission(&self) -> F {
        self.t_p * self.t * self.eta_p
    }

    /// `T_p·η_p`, the derivative of the total probe transmission in `T`.
    pub fn external_probe(&self) -> F {
        self.t_p * self.eta_p
    }
}

/// Photon-number statistics of the probe (`_p`) and auxiliary (`_a`) modes.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Moments<F: Scalar> {
    pub mean_p: F,
    pub var_p: F,
    pub mean_a: F,
    pub var_a: F,
    pub cov_pa: F,
}

impl<F: Scalar> Moments<F> {
    pub fn fano_p(&self) -> F {
        self.var_p / self.mean_p
    }

    pub fn max_abs_diff(&self, o: &Self) -> F {
        [
            self.mean_p - o.mean_p,
            self.var_p - o.var_p,
            self.mean_a - o.mean_a,
            self.var_a - o.var_a,
            self.cov_pa - o.cov_pa,
        ]
        .iter()
        .fold(F::zero(), |m, x| m.max(x.abs()))
    }
}

/// One- or two-mode Gaussian state.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState<F: Scalar> {
    modes: usize,
    d: Vec<C<F>>,
    sigma: CMatrix<F>,
}

impl<F: Scalar> GaussianState<F> {
    /// Builds a state from raw parts, checking shape, Hermiticity and the
    /// conjugate block structure.
    pub fn from_parts(d: Vec<C<F>>, sigma: CMatrix<F>) -> Result<Self> {
        let dim = sigma.dim();
        if !(dim == 2 || dim == 4) || d.len() != dim {
            return Err(Error::Domain(format!(
                "expected 1 or 2 modes, got displacement of length {} and {dim}×{dim} covariance",
                d.len()
            )));
        }
        let state = Self { modes: dim / 2, d, sigma };
        let scale = state.sigma.max_abs().max(F::one());
        let dev = state.sigma.hermitian_deviation().max(state.block_deviation());
        if dev > F::EPS_SYM * scale {
            return Err(Error::NonHermitian(dev.to_f64_lossy()));
        }
        Ok(state)
    }

    pub fn vacuum(modes: usize) -> Self {
        assert!(modes == 1 || modes == 2);
        Self { modes, d: vec![C::zero(); 2 * modes], sigma: CMatrix::identity(2 * modes) }
    }

    pub fn coherent(alpha: ComplexAmplitude<F>) -> Self {
        let a = alpha.value();
        Self { modes: 1, d: vec![a, a.conj()], sigma: CMatrix::identity(2) }
    }

    pub fn bsmss(alpha: ComplexAmplitude<F>, sq: SqueezeSpec<F>) -> Self {
        let (sh, ch) = (sq.s.sinh(), sq.s.cosh());
        let two_s = sq.s + sq.s;
        let e = cis(sq.theta);
        let a = alpha.value();
        let dp = a * re(ch) - a.conj() * e * re(sh);
        let off = -e * re(two_s.sinh());
        let mut sigma = CMatrix::identity(2).scale_re(two_s.cosh());
        sigma[(0, 1)] = off;
        sigma[(1, 0)] = off.conj();
        Self { modes: 1, d: vec![dp, dp.conj()], sigma }
    }

    pub fn btmss(alpha: ComplexAmplitude<F>, beta: ComplexAmplitude<F>, sq: SqueezeSpec<F>) -> Self {
        let (sh, ch) = (sq.s.sinh(), sq.s.cosh());
        let two_s = sq.s + sq.s;
        let e = cis(sq.theta);
        let (a, b) = (alpha.value(), beta.value());
        let dp = a * re(ch) - b.conj() * e * re(sh);
        let da = b * re(ch) - a.conj() * e * re(sh);
        let off = -e * re(two_s.sinh());
        let mut sigma = CMatrix::identity(4).scale_re(two_s.cosh());
        sigma[(0, 3)] = off;
        sigma[(1, 2)] = off;
        sigma[(2, 1)] = off.conj();
        sigma[(3, 0)] = off.conj();
        Self { modes: 2, d: vec![dp, da, dp.conj(), da.conj()], sigma }
    }

    /// Uncorrelated two-mode state from two single-mode states.
    pub fn product(probe: &Self, aux: &Self) -> Result<Self> {
        if probe.modes != 1 || aux.modes != 1 {
            return Err(Error::Domain("product expects two single-mode states".into()));
        }
        let mut sigma = CMatrix::zeros(4);
        let map = [0usize, 2];
        for i in 0..2 {
            for j in 0..2 {
                sigma[(map[i], map[j])] = probe.sigma[(i, j)];
                sigma[(map[i] + 1, map[j] + 1)] = aux.sigma[(i, j)];
            }
        }
        let d = vec![probe.d[0], aux.d[0], probe.d[1], aux.d[1]];
        Ok(Self { modes: 2, d, sigma })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn displacement(&self) -> &[C<F>] {
        &self.d
    }

    pub fn sigma(&self) -> &CMatrix<F> {
        &self.sigma
    }

    /// Test hook: perturb one covariance entry without any checks.
    #[doc(hidden)]
    pub fn perturb_sigma(&mut self, i: usize, j: usize, delta: C<F>) {
        self.sigma[(i, j)] += delta;
    }

    /// `k = diag(1, …, 1, −1, …, −1)`
    pub fn k_matrix(modes: usize) -> CMatrix<F> {
        let diag: Vec<F> =
            (0..2 * modes).map(|i| if i < modes { F::one() } else { -F::one() }).collect();
        CMatrix::from_diag(&diag)
    }

    /// `Σ = k·σ`
    pub fn symplectic_form(&self) -> CMatrix<F> {
        &Self::k_matrix(self.modes) * &self.sigma
    }

    /// `|det Σ|`; 1 for pure states.
    pub fn purity_determinant(&self) -> F {
        self.symplectic_form().determinant().norm()
    }

    /// Largest deviation from the complex-form block symmetry
    /// (lower blocks are the elementwise conjugates of the upper ones).
    pub fn block_deviation(&self) -> F {
        let n = self.modes;
        let mut dev = F::zero();
        for i in 0..n {
            for j in 0..n {
                dev = dev.max((self.sigma[(i + n, j)] - self.sigma[(i, j + n)].conj()).norm());
                dev = dev.max((self.sigma[(i + n, j + n)] - self.sigma[(i, j)].conj()).norm());
            }
            dev = dev.max((self.d[i + n] - self.d[i].conj()).norm());
        }
        dev
    }

    /// Hermiticity, block symmetry and the uncertainty principle.
    pub fn validate(&self) -> Result<()> {
        let scale = self.sigma.max_abs().max(F::one());
        let dev = self.sigma.hermitian_deviation().max(self.block_deviation());
        if dev > F::EPS_SYM * scale {
            return Err(Error::NonHermitian(dev.to_f64_lossy()));
        }
        let lam = self.symplectic_eigenvalues()?;
        if let Some(&min) = lam.first() {
            if min < F::one() - F::EPS_SYM {
                return Err(Error::Domain(format!(
                    "uncertainty principle violated: smallest symplectic eigenvalue {min}"
                )));
            }
        }
        Ok(())
    }

    /// Beamsplitter with vacuum on `mode`, intensity transmission `t`.
    pub fn apply_loss(&self, mode: usize, t: F) -> Result<Self> {
        check_unit("t", t)?;
        if mode >= self.modes {
            return Err(Error::InvalidMode { index: mode, modes: self.modes });
        }
        let n = self.modes;
        let in_mode = |i: usize| i == mode || i == mode + n;
        let rt = t.sqrt();
        let mut out = self.clone();
        for i in 0..2 * n {
            if in_mode(i) {
                out.d[i] = self.d[i] * re(rt);
            }
            for j in 0..2 * n {
                let v = self.sigma[(i, j)];
                out.sigma[(i, j)] = match (in_mode(i), in_mode(j)) {
                    (true, true) if i == j => v * re(t) + re(F::one() - t),
                    (true, true) => v * re(t),
                    (true, false) | (false, true) => v * re(rt),
                    (false, false) => v,
                };
            }
        }
        Ok(out)
    }

    /// Probe through `T_p`, `T`, `η_p`; auxiliary (if any) through `η_a`.
    pub fn apply_channel(&self, ch: &ChannelConfig<F>) -> Result<Self> {
        ch.validate()?;
        let mut s = self.apply_loss(0, ch.t_p)?.apply_loss(0, ch.t)?.apply_loss(0, ch.eta_p)?;
        if self.modes == 2 {
            s = s.apply_loss(1, ch.eta_a)?;
        }
        Ok(s)
    }

    /// Positive symplectic spectrum of `k·σ`, ascending.
    ///
    /// Computed as the spectrum of the Hermitian matrix `σ^{1/2} k σ^{1/2}`,
    /// which is similar to `k·σ`.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<F>> {
        let (vals, vecs) = self.sigma.hermitian_eigen()?;
        if vals[0] <= F::zero() {
            return Err(Error::Domain(format!("covariance not positive definite (eigenvalue {})", vals[0])));
        }
        let root: Vec<F> = vals.iter().map(|v| v.sqrt()).collect();
        let sqrt_sigma = &(&vecs * &CMatrix::from_diag(&root)) * &vecs.adjoint();
        let h = &(&sqrt_sigma * &Self::k_matrix(self.modes)) * &sqrt_sigma;
        let (hv, _) = h.hermitian_eigen()?;
        Ok(hv[self.modes..].to_vec())
    }

    /// Photon-number means, variances and cross covariance by Wick
    /// expansion of the Gaussian fourth moments.
    pub fn photon_moments(&self) -> Moments<F> {
        self.moments_with(true)
    }

    /// The part of [`GaussianState::photon_moments`] linear in the
    /// displacement: the stimulated-photon statistics that dominate for
    /// bright seeds. Thinning by loss maps this part onto itself.
    pub fn bright_photon_moments(&self) -> Moments<F> {
        self.moments_with(false)
    }

    fn moments_with(&self, vacuum: bool) -> Moments<F> {
        let n = self.modes;
        let half = F::lit(0.5);
        let two = F::lit(2.0);
        // N_ij = ⟨Δa_i† Δa_j⟩, M_ij = ⟨Δa_i Δa_j⟩
        let nn = |i: usize, j: usize| {
            let delta = if i == j { F::one() } else { F::zero() };
            (self.sigma[(j, i)] - re(delta)) * re(half)
        };
        let mm = |i: usize, j: usize| self.sigma[(i, j + n)] * re(half);
        let mean_d = |i: usize| self.d[i].norm_sqr();
        let mean = |i: usize| if vacuum { mean_d(i) + nn(i, i).re } else { mean_d(i) };
        let cov = |i: usize, j: usize| {
            let (di, dj) = (self.d[i], self.d[j]);
            let (nij, mij) = (nn(i, j), mm(i, j));
            let diag = if i == j { mean(i) } else { F::zero() };
            let linear = two * (di.conj() * dj.conj() * mij).re + two * (di * dj.conj() * nij).re;
            if vacuum {
                diag + linear + mij.norm_sqr() + nij.norm_sqr()
            } else {
                diag + linear
            }
        };
        if n == 1 {
            Moments { mean_p: mean(0), var_p: cov(0, 0), ..Default::default() }
        } else {
            Moments {
                mean_p: mean(0),
                var_p: cov(0, 0),
                mean_a: mean(1),
                var_a: cov(1, 1),
                cov_pa: cov(0, 1),
            }
        }
    }

    /// Probe displacement `⟨a_p⟩`.
    pub fn probe_amplitude(&self) -> C<F> {
        self.d[0]
    }

    pub fn is_zero_displacement(&self) -> bool {
        self.d.iter().all(|z| z.is_zero())
    }
}
