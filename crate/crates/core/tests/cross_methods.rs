//! Independent routes to the same numbers: closed forms, the general
//! Gaussian QFI, the Fock-space oracle and sampling.

use qcrb_lab::fock::{channel_family, oracle_qfi};
use qcrb_lab::montecarlo::battery;
use qcrb_lab::qfi::{
    fock_qfi_lossy, lambda_lossy, lossy_symplectic_closed_form, qfi_btmss_full, qfi_gaussian, qfi_gaussian_terms,
    ParamFamily,
};
use qcrb_lab::{mc_estimate, ChannelConfig, ComplexAmplitude, SqueezeSpec, StateSpec};

fn amp(m: f64, p: f64) -> ComplexAmplitude {
    ComplexAmplitude::new(m, p).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn bright_closed_forms_match_displacement_qfi() {
    let a = amp(1e3, 0.0);
    for ch in [ChannelConfig::lossless(0.5), ChannelConfig::new(0.5, 0.9, 0.98, 0.98).unwrap()] {
        for s in [0.5, 1.0, 2.0] {
            for spec in [StateSpec::bsmss(a, s), StateSpec::btmss(a, amp(0.0, 0.0), s)] {
                for i in 1..20 {
                    let ch = ch.with_t(0.05 * i as f64);
                    let closed = lambda_lossy(&spec, &ch).unwrap().lambda;
                    let terms = qfi_gaussian_terms(&ParamFamily::new(spec, ch).unwrap(), ch.t).unwrap();
                    let numeric = terms.bright_report().lambda;
                    assert!(rel(closed, numeric) < 1e-6, "{:?} s={s} T={}", spec.kind, ch.t);
                }
            }
        }
    }
}

#[test]
fn full_btmss_qfi_matches_gaussian_route() {
    let cases = [(10.0, 0.0, 0.0, 1.0, 0.4), (3.0, 1.0, std::f64::consts::PI, 1.0, 0.7), (2.0, 5.0, 2.0, 0.3, 0.15)];
    for (a, b, theta, s, t) in cases {
        let sq = SqueezeSpec::new(s, theta).unwrap();
        let spec = StateSpec { squeeze: sq, ..StateSpec::btmss(amp(a, 0.0), amp(b, 0.0), s) };
        let f = qfi_gaussian(&ParamFamily::new(spec, ChannelConfig::lossless(t)).unwrap(), t).unwrap().qfi;
        let closed = qfi_btmss_full(amp(a, 0.0), amp(b, 0.0), sq, t);
        assert!(rel(f, closed) < 1e-8, "{a} {b} {theta} {s} {t}: {f} vs {closed}");
    }
}

#[test]
fn lossy_symplectic_spectrum() {
    let mut x = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..200 {
        let s = 2.5 * next();
        let ch = ChannelConfig::new(next(), next(), next(), next()).unwrap();
        let state = StateSpec::vtmss(s).gaussian_state().unwrap().apply_channel(&ch).unwrap();
        let numeric = state.symplectic_eigenvalues().unwrap();
        let (lo, hi) = lossy_symplectic_closed_form(s, &ch);
        assert!((numeric[0] - lo).abs() < 1e-10 * hi.max(1.0));
        assert!((numeric[1] - hi).abs() < 1e-10 * hi.max(1.0));
    }
}

#[test]
fn fock_routes_agree() {
    for n in [1u32, 4, 10] {
        let fam = channel_family(&StateSpec::fock(n), ChannelConfig::lossless(0.5), (n + 4) as usize).unwrap();
        for t in [0.2, 0.5, 0.8] {
            let oracle = oracle_qfi(&fam, t, 1e-4).unwrap();
            assert!(rel(oracle, n as f64 / (t - t * t)) < 1e-5);
        }
    }
    for n in [1u32, 50, 200] {
        for t in [0.2, 0.5, 0.8] {
            let ch = ChannelConfig::new(t, 0.85, 0.9, 1.0).unwrap();
            let sum = fock_qfi_lossy(n, &ch).unwrap().lambda;
            assert!(rel(sum, t / 0.9 - t * t * 0.85) < 1e-10);
        }
    }
}

#[test]
fn monte_carlo_battery() {
    let cases = battery(100, 20_000, 1000).unwrap();
    let mut outside = Vec::new();
    let mut zs = Vec::new();
    for case in &cases {
        let r = mc_estimate(&case.spec, &case.channel, &case.plan, &case.config).unwrap();
        zs.push(r.z_score);
        if r.z_score.abs() >= 3.0 {
            outside.push((case.label, case.config.seed, r.z_score));
        }
    }
    assert!(outside.len() <= 1, "{outside:?}");
    // the z-scores should look standard normal, not degenerate
    let mean = zs.iter().sum::<f64>() / zs.len() as f64;
    let sd = (zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (zs.len() - 1) as f64).sqrt();
    eprintln!("battery z: mean {mean:.3}, sd {sd:.3}");
    assert!(mean.abs() < 0.4 && (0.7..1.3).contains(&sd), "mean {mean}, sd {sd}");
}
