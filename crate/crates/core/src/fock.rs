//! Truncated photon-number representation of the probe states. Used as an
//! independent oracle for the Gaussian machinery and as an exact sampler.

use std::collections::HashMap;

use log::debug;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gaussian::{check_unit, ChannelConfig, Moments, StateKind, StateSpec};
use crate::linalg::{block_components, submatrix, CMatrix};
use crate::scalar::{re, Scalar, C};

pub const DEFAULT_N_MAX: usize = 60;
/// Largest probability mass allowed in the two highest retained levels.
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// Largest density-matrix dimension we are willing to allocate.
pub const MAX_DENSITY_DIM: usize = 2500;

/// Photon numbers `(n_p, n_a)`; `n_a` is 0 for single-mode states.
pub type Ket = (u32, u32);

/// Pure state on the lattice `0..=n_max` per mode, row-major in `(n_p, n_a)`.
#[derive(Clone, Debug)]
pub struct FockVector<F: Scalar> {
    modes: usize,
    n_max: usize,
    coeffs: Vec<C<F>>,
}

impl<F: Scalar> FockVector<F> {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn width(&self) -> usize {
        if self.modes == 2 {
            self.n_max + 1
        } else {
            1
        }
    }

    pub fn amplitude(&self, ket: Ket) -> C<F> {
        let (p, a) = (ket.0 as usize, ket.1 as usize);
        if p > self.n_max || a >= self.width() {
            return C::new(F::zero(), F::zero());
        }
        self.coeffs[p * self.width() + a]
    }

    /// Probability mass on kets where some mode exceeds `n_max − 2`.
    pub fn tail_mass(&self) -> F {
        let cut = self.n_max.saturating_sub(2);
        let w = self.width();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| i / w > cut || (self.modes == 2 && i % w > cut))
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    /// Projector onto the state, keeping only kets with nonzero amplitude.
    pub fn to_density(&self) -> Result<FockDensity<F>> {
        let w = self.width();
        let support: Vec<(Ket, C<F>)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, z)| !z.is_zero())
            .map(|(i, z)| (((i / w) as u32, (i % w) as u32), *z))
            .collect();
        check_dim(support.len())?;
        let matrix = CMatrix::from_fn(support.len(), |i, j| support[i].1 * support[j].1.conj());
        Ok(FockDensity { modes: self.modes, n_max: self.n_max, basis: support.into_iter().map(|(k, _)| k).collect(), matrix })
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n > MAX_DENSITY_DIM {
        return Err(Error::InvalidConfig(format!(
            "Fock density of dimension {n} exceeds {MAX_DENSITY_DIM}; lower n_max"
        )));
    }
    Ok(())
}

/// Density matrix over an explicit list of kets.
#[derive(Clone, Debug)]
pub struct FockDensity<F: Scalar> {
    modes: usize,
    n_max: usize,
    basis: Vec<Ket>,
    matrix: CMatrix<F>,
}

impl<F: Scalar> FockDensity<F> {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn basis(&self) -> &[Ket] {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix<F> {
        &self.matrix
    }

    pub fn trace(&self) -> F {
        self.matrix.trace().re
    }

    /// `⟨ψ|ρ|ψ⟩` for a pure state on the same lattice.
    pub fn fidelity_with(&self, psi: &FockVector<F>) -> F {
        let amps: Vec<C<F>> = self.basis.iter().map(|&k| psi.amplitude(k)).collect();
        let v = self.matrix.mul_vec(&amps);
        amps.iter().zip(&v).fold(C::new(F::zero(), F::zero()), |acc, (a, b)| acc + a.conj() * *b).re
    }

    /// Beamsplitter loss with transmission `t` on `mode`, by Kraus operators
    /// `K_l|n⟩ = sqrt(C(n,l) (1−t)^l t^(n−l)) |n−l⟩`.
    pub fn apply_loss(&self, mode: usize, t: F) -> Result<Self> {
        if mode >= self.modes {
            return Err(Error::InvalidMode { index: mode, modes: self.modes });
        }
        check_unit("t", t)?;
        let count = |k: Ket| if mode == 0 { k.0 } else { k.1 };
        let lower = |k: Ket, l: u32| if mode == 0 { (k.0 - l, k.1) } else { (k.0, k.1 - l) };

        let mut out: Vec<Ket> = self
            .basis
            .iter()
            .flat_map(|&k| (0..=count(k)).map(move |l| lower(k, l)))
            .collect();
        out.sort_unstable();
        out.dedup();
        check_dim(out.len())?;
        let index: HashMap<Ket, usize> = out.iter().enumerate().map(|(i, &k)| (k, i)).collect();

        // (target index, Kraus amplitude) per input ket and loss count
        let branches: Vec<Vec<(usize, F)>> = self
            .basis
            .iter()
            .map(|&k| {
                let n = count(k);
                (0..=n).map(|l| (index[&lower(k, l)], kraus_amplitude(n, l, t))).collect()
            })
            .collect();

        let dim = self.basis.len();
        let mut m = CMatrix::zeros(out.len());
        for i in 0..dim {
            for j in 0..dim {
                let rho = self.matrix[(i, j)];
                if rho.is_zero() {
                    continue;
                }
                for (bi, bj) in branches[i].iter().zip(&branches[j]) {
                    m[(bi.0, bj.0)] += rho * re(bi.1 * bj.1);
                }
            }
        }
        Ok(Self { modes: self.modes, n_max: self.n_max, basis: out, matrix: m })
    }

    /// Probe loss `T_p·T·η_p` (losses compose multiplicatively) and
    /// auxiliary loss `η_a`.
    pub fn apply_channel(&self, ch: &ChannelConfig<F>) -> Result<Self> {
        ch.validate()?;
        let probe = self.apply_loss(0, ch.probe_transmission())?;
        if self.modes == 2 {
            probe.apply_loss(1, ch.eta_a)
        } else {
            Ok(probe)
        }
    }

    /// Joint photon-number distribution.
    pub fn photon_distribution(&self) -> Vec<(Ket, F)> {
        self.basis.iter().enumerate().map(|(i, &k)| (k, self.matrix[(i, i)].re)).collect()
    }

    pub fn moments(&self) -> Moments<F> {
        oracle_moments(self)
    }
}

fn kraus_amplitude<F: Scalar>(n: u32, l: u32, t: F) -> F {
    let mut binom = F::one();
    for i in 0..l {
        binom = binom * F::from_u32(n - i).unwrap() / F::from_u32(i + 1).unwrap();
    }
    (binom * t.powi((n - l) as i32) * (F::one() - t).powi(l as i32)).sqrt()
}

/// Photon-number distribution at the detectors: the source distribution of
/// `psi` thinned binomially by `T_p·T·η_p` (probe) and `η_a` (auxiliary).
/// Agrees with the diagonal of the channel-evolved density matrix.
pub fn detected_distribution<F: Scalar>(psi: &FockVector<F>, ch: &ChannelConfig<F>) -> Result<Vec<(Ket, F)>> {
    ch.validate()?;
    let n = psi.n_max + 1;
    let w = psi.width();
    let thinning = |t: F| -> Vec<F> {
        // row-major [n][k]: P(k kept | n)
        let mut b = vec![F::zero(); n * n];
        for m in 0..n {
            for k in 0..=m {
                b[m * n + k] = kraus_amplitude(m as u32, (m - k) as u32, t).powi(2);
            }
        }
        b
    };
    let bp = thinning(ch.probe_transmission());
    let mut probe = vec![F::zero(); n * w];
    for m in 0..n {
        for a in 0..w {
            let p = psi.coeffs[m * w + a].norm_sqr();
            if p > F::zero() {
                for k in 0..=m {
                    probe[k * w + a] += p * bp[m * n + k];
                }
            }
        }
    }
    let joint = if psi.modes == 2 {
        let ba = thinning(ch.eta_a);
        let mut out = vec![F::zero(); n * w];
        for k in 0..n {
            for a in 0..w {
                let p = probe[k * w + a];
                if p > F::zero() {
                    for j in 0..=a {
                        out[k * w + j] += p * ba[a * n + j];
                    }
                }
            }
        }
        out
    } else {
        probe
    };
    Ok(joint
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > F::zero())
        .map(|(i, p)| (((i / w) as u32, (i % w) as u32), p))
        .collect())
}

/// Photon-number moments read off the diagonal of `rho`.
pub fn oracle_moments<F: Scalar>(rho: &FockDensity<F>) -> Moments<F> {
    let dist = rho.photon_distribution();
    let e = |f: &dyn Fn(F, F) -> F| dist.iter().map(|&((p, a), w)| w * f(F::from_u32(p).unwrap(), F::from_u32(a).unwrap())).sum::<F>();
    let mean_p = e(&|p, _| p);
    let mean_a = e(&|_, a| a);
    let var_p = e(&|p, _| (p - mean_p) * (p - mean_p));
    let var_a = e(&|_, a| (a - mean_a) * (a - mean_a));
    let cov_pa = e(&|p, a| (p - mean_p) * (a - mean_a));
    Moments { mean_p, var_p, mean_a, var_a, cov_pa }
}

/// Source state in the photon-number basis, from the recursions implied by
/// the annihilation conditions of `S(ξ)D(α)|0⟩`. Fails when more than
/// [`TAIL_TOLERANCE`] of the mass sits in the top two levels.
pub fn build_fock_state<F: Scalar>(spec: &StateSpec<F>, n_max: usize) -> Result<FockVector<F>> {
    if n_max < 2 {
        return Err(Error::InvalidConfig("n_max must be at least 2".into()));
    }
    let zero = C::new(F::zero(), F::zero());
    let sq = spec.squeeze;
    let (ch, sh) = (sq.s.cosh(), sq.s.sinh());
    let e = C::from_polar(sh, sq.theta);
    let sqrt = |k: usize| F::from_usize(k).unwrap().sqrt();
    let n = n_max + 1;

    let mut coeffs = match spec.kind {
        StateKind::Fock => {
            let k = spec.fock_n as usize;
            if k > n_max.saturating_sub(2) {
                return Err(Error::TruncationTooSmall { n_max, tail: 1.0 });
            }
            let mut v = vec![zero; n];
            v[k] = C::new(F::one(), F::zero());
            v
        }
        StateKind::Coherent | StateKind::Bsmss => {
            let alpha = spec.alpha.value();
            let mut v = vec![zero; n];
            v[0] = C::new(F::one(), F::zero());
            for m in 0..n_max {
                let prev = if m > 0 { e * re(sqrt(m)) * v[m - 1] } else { zero };
                v[m + 1] = (alpha * v[m] - prev) / re(ch * sqrt(m + 1));
            }
            v
        }
        StateKind::Btmss => {
            let (alpha, beta) = (spec.alpha.value(), spec.beta.value());
            let mut v = vec![zero; n * n];
            v[0] = C::new(F::one(), F::zero());
            for b in 0..n_max {
                v[b + 1] = beta * v[b] / re(ch * sqrt(b + 1));
            }
            for m in 0..n_max {
                for b in 0..n {
                    let prev = if b > 0 { e * re(sqrt(b)) * v[m * n + b - 1] } else { zero };
                    v[(m + 1) * n + b] = (alpha * v[m * n + b] - prev) / re(ch * sqrt(m + 1));
                }
            }
            v
        }
    };
    let norm = coeffs.iter().map(|z| z.norm_sqr()).sum::<F>().sqrt();
    if !(norm.is_finite() && norm > F::zero()) {
        return Err(Error::TruncationTooSmall { n_max, tail: f64::NAN });
    }
    for z in &mut coeffs {
        *z /= re(norm);
    }
    let state = FockVector { modes: spec.modes(), n_max, coeffs };
    let tail = state.tail_mass();
    if tail.to_f64_lossy() >= TAIL_TOLERANCE {
        return Err(Error::TruncationTooSmall { n_max, tail: tail.to_f64_lossy() });
    }
    Ok(state)
}

/// `T ↦ ρ(T)`: the source state sent through `base` with system
/// transmission `T`.
pub fn channel_family<F: Scalar>(
    spec: &StateSpec<F>,
    base: ChannelConfig<F>,
    n_max: usize,
) -> Result<impl Fn(F) -> Result<FockDensity<F>>> {
    let source = build_fock_state(spec, n_max)?.to_density()?;
    Ok(move |t: F| source.apply_channel(&base.with_t(t)))
}

/// QFI with respect to `T` from the eigendecomposition of `ρ(T)` and a
/// central-difference `∂ρ/∂T`. The estimate is repeated with `dt/2`; if the
/// two disagree by more than 1e-5 (relative) the step is rejected.
pub fn oracle_qfi<F: Scalar, R>(family: R, t: F, dt: F) -> Result<F>
where
    R: Fn(F) -> Result<FockDensity<F>>,
{
    if !(dt > F::zero()) || t - dt <= F::zero() || t + dt >= F::one() {
        return Err(Error::Domain(format!("finite-difference stencil T±dT leaves (0,1) at T={t}, dT={dt}")));
    }
    let rho = family(t)?;
    let dim = rho.basis.len();
    let derivative = |h: F| -> Result<CMatrix<F>> {
        let (up, down) = (family(t + h)?, family(t - h)?);
        if up.basis != rho.basis || down.basis != rho.basis {
            return Err(Error::InvalidConfig("density support changed with T".into()));
        }
        Ok((&up.matrix - &down.matrix).scale_re(F::one() / (h + h)))
    };
    let d_coarse = derivative(dt)?;
    let d_fine = derivative(dt * F::lit(0.5))?;

    let blocks = block_components(&[&rho.matrix, &d_coarse], F::zero());
    debug!("oracle QFI: dim {dim}, {} blocks", blocks.len());
    let (mut coarse, mut fine) = (F::zero(), F::zero());
    for idx in &blocks {
        let block = submatrix(&rho.matrix, idx);
        let (vals, vecs) = if idx.len() > 12 { block.hermitian_eigen_tridiagonal()? } else { block.hermitian_eigen()? };
        for (acc, d) in [(&mut coarse, &d_coarse), (&mut fine, &d_fine)] {
            let rot = &(&vecs.adjoint() * &submatrix(d, idx)) * &vecs;
            *acc += pair_sum(&vals, &rot);
        }
    }
    let scale = fine.abs().max(F::min_positive_value());
    if (coarse - fine).abs() / scale > F::lit(1e-5) {
        return Err(Error::StepTooLarge { coarse: coarse.to_f64_lossy(), fine: fine.to_f64_lossy() });
    }
    Ok(fine)
}

/// `2 Σ_ij |D_ij|² / (p_i + p_j)` over pairs with `p_i + p_j` above 1e-12.
fn pair_sum<F: Scalar>(p: &[F], d: &CMatrix<F>) -> F {
    let cut = F::lit(1e-12);
    let mut acc = F::zero();
    for i in 0..p.len() {
        for j in 0..p.len() {
            let w = p[i] + p[j];
            if w > cut {
                acc += d[(i, j)].norm_sqr() / w;
            }
        }
    }
    acc + acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::ComplexAmplitude;
    use crate::qfi::{fisher_max, qfi_gaussian, ParamFamily};

    fn amp(m: f64, p: f64) -> ComplexAmplitude<f64> {
        ComplexAmplitude::new(m, p).unwrap()
    }

    fn dist_of(rho: &FockDensity<f64>) -> HashMap<Ket, f64> {
        rho.photon_distribution().into_iter().collect()
    }

    #[test]
    fn fock_state_is_a_single_ket() {
        let psi = build_fock_state(&StateSpec::<f64>::fock(3), 10).unwrap();
        let rho = psi.to_density().unwrap();
        assert_eq!(rho.basis(), &[(3, 0)]);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!(build_fock_state(&StateSpec::<f64>::fock(9), 10).is_err());
    }

    #[test]
    fn coherent_weights_are_poisson() {
        let a = amp(1.7, 0.4);
        let psi = build_fock_state(&StateSpec::coherent(a), 40).unwrap();
        let mu = a.photons();
        let mut w = (-mu).exp();
        for k in 0..30u32 {
            if k > 0 {
                w *= mu / k as f64;
            }
            assert!((psi.amplitude((k, 0)).norm_sqr() - w).abs() < 1e-14);
        }
    }

    #[test]
    fn tail_check_rejects_short_truncation() {
        let spec = StateSpec::coherent(amp(3.0, 0.0));
        assert!(matches!(build_fock_state(&spec, 12), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn moments_match_gaussian_moments() {
        let cases = [
            StateSpec::coherent(amp(1.2, 0.3)),
            StateSpec::bsmss(amp(1.0, 0.7), 0.4),
            StateSpec::bsmss(amp(0.8, 0.0), 0.3).with_theta(1.1),
            StateSpec::vtmss(0.5),
            StateSpec::btmss(amp(0.9, 0.2), amp(0.5, -0.4), 0.35),
            StateSpec::btmss(amp(0.7, 0.0), amp(0.6, 0.0), 0.3).with_theta(0.5),
        ];
        let ch = ChannelConfig::new(0.6, 0.9, 0.95, 0.8).unwrap();
        for spec in cases {
            let n_max = if spec.modes() == 2 { 24 } else { 50 };
            let rho = build_fock_state(&spec, n_max).unwrap().to_density().unwrap();
            let g = spec.gaussian_state().unwrap();
            let diff = rho.moments().max_abs_diff(&g.photon_moments());
            assert!(diff < 1e-8, "{spec:?}: source {diff}");
            let lossy = rho.apply_channel(&ch).unwrap();
            let g_lossy = if spec.modes() == 2 {
                g.apply_channel(&ch).unwrap()
            } else {
                g.apply_loss(0, ch.probe_transmission()).unwrap()
            };
            let diff = lossy.moments().max_abs_diff(&g_lossy.photon_moments());
            assert!(diff < 1e-8, "{spec:?}: lossy {diff}");
            assert!((lossy.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fock_loss_is_binomial_thinning() {
        let rho = build_fock_state(&StateSpec::fock(5), 10).unwrap().to_density().unwrap();
        let lossy = rho.apply_loss(0, 0.3).unwrap();
        let d = dist_of(&lossy);
        let mut binom = 1.0;
        for k in 0..=5u32 {
            if k > 0 {
                binom *= (6 - k) as f64 / k as f64;
            }
            let want = binom * 0.3f64.powi(k as i32) * 0.7f64.powi(5 - k as i32);
            assert!((d[&(k, 0)] - want).abs() < 1e-14);
        }
        // off-diagonal coherences vanish for a Fock input
        assert!(lossy.matrix().max_abs_diff(&CMatrix::from_diag(&lossy.photon_distribution().iter().map(|x| x.1).collect::<Vec<_>>())) < 1e-15);
    }

    #[test]
    fn coherent_stays_pure_under_loss() {
        let a = amp(1.5, -0.9);
        let t: f64 = 0.42;
        let rho = build_fock_state(&StateSpec::coherent(a), 40).unwrap().to_density().unwrap();
        let lossy = rho.apply_loss(0, t).unwrap();
        let target = build_fock_state(&StateSpec::coherent(amp(1.5 * t.sqrt(), -0.9)), 40).unwrap();
        assert!((lossy.fidelity_with(&target) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn loss_composes() {
        let rho = build_fock_state(&StateSpec::bsmss(amp(0.8, 0.2), 0.3), 40).unwrap().to_density().unwrap();
        let two = rho.apply_loss(0, 0.7).unwrap().apply_loss(0, 0.6).unwrap();
        let one = rho.apply_loss(0, 0.42).unwrap();
        assert_eq!(two.basis(), one.basis());
        assert!(two.matrix().max_abs_diff(one.matrix()) < 1e-12);
    }

    #[test]
    fn vacuum_tmss_pairs() {
        let s: f64 = 0.5;
        let rho = build_fock_state(&StateSpec::vtmss(s), 40).unwrap().to_density().unwrap();
        // support is the pair diagonal only
        assert!(rho.basis().iter().all(|&(p, a)| p == a));
        let m = rho.moments();
        assert!((m.var_p + m.var_a - 2.0 * m.cov_pa).abs() < 1e-12);

        // after probe loss the photon-number difference counts lost photons
        let t: f64 = 0.65;
        let lossy = rho.apply_loss(0, t).unwrap();
        let lam = s.tanh().powi(2);
        let mut want = vec![0.0; 41];
        for k in 0..=40u32 {
            let pk = (1.0 - lam) * lam.powi(k as i32);
            let mut binom = 1.0;
            for l in 0..=k {
                if l > 0 {
                    binom *= (k - l + 1) as f64 / l as f64;
                }
                want[l as usize] += pk * binom * (1.0 - t).powi(l as i32) * t.powi((k - l) as i32);
            }
        }
        let mut got = vec![0.0; 41];
        for ((p, a), w) in lossy.photon_distribution() {
            got[(a - p) as usize] += w;
        }
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn detected_distribution_matches_density_diagonal() {
        let ch = ChannelConfig::new(0.55, 0.9, 0.93, 0.7).unwrap();
        for (spec, n_max) in [
            (StateSpec::bsmss(amp(1.1, 0.4), 0.5), 50),
            (StateSpec::btmss(amp(0.9, 0.0), amp(0.6, 0.3), 0.4), 26),
        ] {
            let psi = build_fock_state(&spec, n_max).unwrap();
            let from_rho = dist_of(&psi.to_density().unwrap().apply_channel(&ch).unwrap());
            let direct = detected_distribution(&psi, &ch).unwrap();
            let total: f64 = direct.iter().map(|x| x.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for (k, p) in direct {
                assert!((from_rho.get(&k).copied().unwrap_or(0.0) - p).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn oracle_qfi_fock_lossless() {
        for n in [1u32, 3, 6] {
            let fam = channel_family(&StateSpec::fock(n), ChannelConfig::lossless(0.5), 12).unwrap();
            for t in [0.2, 0.5, 0.8] {
                let f = oracle_qfi(&fam, t, 1e-4).unwrap();
                let want = fisher_max(n as f64, t).unwrap();
                assert!((f - want).abs() / want < 1e-6, "n={n} t={t}: {f} vs {want}");
            }
        }
    }

    #[test]
    fn oracle_qfi_coherent() {
        let spec = StateSpec::coherent(amp(2.0, 0.0));
        let fam = channel_family(&spec, ChannelConfig::lossless(0.5), 50).unwrap();
        for t in [0.2, 0.5, 0.8] {
            let f = oracle_qfi(&fam, t, 1e-4).unwrap();
            assert!((f - 4.0 / t).abs() / (4.0 / t) < 1e-6);
        }
    }

    #[test]
    fn oracle_qfi_vacuum_tmss_saturates() {
        let s: f64 = 0.6;
        let fam = channel_family(&StateSpec::vtmss(s), ChannelConfig::lossless(0.5), 40).unwrap();
        for t in [0.2, 0.5, 0.8] {
            let f = oracle_qfi(&fam, t, 1e-4).unwrap();
            let want = fisher_max(s.sinh().powi(2), t).unwrap();
            assert!((f - want).abs() / want < 1e-5, "t={t}: {f} vs {want}");
        }
    }

    #[test]
    fn oracle_qfi_matches_gaussian_qfi() {
        let ch = ChannelConfig::new(0.5, 0.9, 0.95, 0.85).unwrap();
        let cases = [
            (StateSpec::bsmss(amp(1.0, 0.3), 0.35), 45),
            (StateSpec::btmss(amp(0.8, 0.1), amp(0.4, 0.0), 0.3), 18),
        ];
        for (spec, n_max) in cases {
            let fam = channel_family(&spec, ch, n_max).unwrap();
            let gfam = ParamFamily::new(spec, ch).unwrap();
            for t in [0.2, 0.5, 0.8] {
                let f = oracle_qfi(&fam, t, 1e-4).unwrap();
                let g = qfi_gaussian(&gfam, t).unwrap().qfi;
                assert!((f - g).abs() / g < 1e-5, "{:?} t={t}: {f} vs {g}", spec.kind);
            }
        }
    }

    #[test]
    fn oracle_rejects_stencil_outside_unit_interval() {
        let fam = channel_family(&StateSpec::fock(1), ChannelConfig::lossless(0.5), 6).unwrap();
        assert!(oracle_qfi(&fam, 0.99995, 1e-4).is_err());
    }
}
