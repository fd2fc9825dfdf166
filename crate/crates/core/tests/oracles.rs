//! Library results checked against independent brute-force evaluations.

use aerobeam::antenna::{array_factor, array_gain_db, half_power_beamwidth_deg};
use aerobeam::channel::{noise_power_dbm, pathloss_db, RadioConfig};
use aerobeam::{ArraySpec, DirectionAngles, Plane, SteeringAngles};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-element phasor sum over the M x N grid, elements at
/// `(y, z) = (n dy, m dz)` wavelengths, each phased towards `steer`.
fn brute_force_af(spec: &ArraySpec, dir: DirectionAngles, steer: SteeringAngles) -> f64 {
    let (t, p) = (dir.theta.to_radians(), dir.phi.to_radians());
    let (t0, p0) = (steer.theta0_deg.to_radians(), steer.phi0_deg.to_radians());
    let (mut re, mut im) = (0.0, 0.0);
    for m in 0..spec.m_vertical {
        for n in 0..spec.n_horizontal {
            let z = m as f64 * spec.dz_wavelengths;
            let y = n as f64 * spec.dy_wavelengths;
            let phase =
                2.0 * std::f64::consts::PI * (z * (t.cos() - t0.cos()) + y * (t.sin() * p.sin() - t0.sin() * p0.sin()));
            let a = spec.amplitudes_z[m] * spec.amplitudes_y[n];
            re += a * phase.cos();
            im += a * phase.sin();
        }
    }
    re.hypot(im)
}

/// Element gain for the default pattern, written out from its definition.
fn element_db(theta: f64, phi: f64) -> f64 {
    let v = (12.0 * ((theta - 90.0) / 65.0).powi(2)).min(30.0);
    let h = (12.0 * (phi / 65.0).powi(2)).min(30.0);
    8.0 - (v + h).min(30.0)
}

/// Azimuth-cut gain of a uniform half-wavelength M x N array at broadside.
fn azimuth_gain_db(m: usize, n: usize, phi: f64) -> f64 {
    let psi = std::f64::consts::PI * phi.to_radians().sin();
    let d = if psi.abs() < 1e-12 {
        n as f64
    } else {
        ((n as f64 * psi / 2.0).sin() / (psi / 2.0).sin()).abs()
    };
    element_db(90.0, phi) + 20.0 * (m as f64 * d).log10() - 10.0 * ((m * n) as f64).log10()
}

/// Beamwidth by bisection on the -3 dB crossing inside the first null.
fn bisection_hpbw(m: usize, n: usize) -> f64 {
    let target = azimuth_gain_db(m, n, 0.0) - 3.0;
    let (mut lo, mut hi) = (0.0, (2.0 / n as f64).min(1.0).asin().to_degrees() * 0.999);
    if n == 1 {
        hi = 90.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if azimuth_gain_db(m, n, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * lo
}

fn random_spec(rng: &mut ChaCha8Rng, tapered: bool) -> ArraySpec {
    let m = rng.gen_range(1..=16);
    let n = rng.gen_range(1..=16);
    let mut spec = ArraySpec::uniform(m, n).with_spacing(rng.gen_range(0.25..1.0), rng.gen_range(0.25..1.0));
    if tapered {
        spec.amplitudes_z = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
        spec.amplitudes_y = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    }
    spec
}

#[test]
fn array_factor_matches_phasor_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for i in 0..2000 {
        let spec = random_spec(&mut rng, i % 2 == 1);
        let dir = DirectionAngles::new(rng.gen_range(0.0..180.0), rng.gen_range(-180.0..180.0));
        let steer = SteeringAngles::new(rng.gen_range(45.0..135.0), rng.gen_range(-60.0..60.0));
        let got = array_factor(&spec, dir, steer);
        let want = brute_force_af(&spec, dir, steer);
        let rel = (got - want).abs() / want;
        worst = worst.max(rel);
        assert!(
            rel <= 1e-9,
            "draw {i}: {got} vs {want} (rel {rel:e}) for {spec:?} {dir:?} {steer:?}"
        );
    }
    assert!(worst <= 1e-9);
}

#[test]
fn steered_peak_equals_element_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let spec = random_spec(&mut rng, false);
        let steer = SteeringAngles::new(rng.gen_range(45.0..=135.0), rng.gen_range(-60.0..=60.0));
        let af = array_factor(&spec, steer.direction(), steer);
        let mn = spec.element_count() as f64;
        assert!((af - mn).abs() <= 1e-9 * mn, "{af} vs {mn}");
    }
}

#[test]
fn golden_boresight_gains() {
    let boresight = SteeringAngles::BORESIGHT;
    let g8 = array_gain_db(&ArraySpec::uniform(8, 8), boresight.direction(), boresight);
    let g16 = array_gain_db(&ArraySpec::uniform(16, 16), boresight.direction(), boresight);
    assert!((g8 - 26.1).abs() <= 0.1, "{g8}");
    assert!((g16 - 32.1).abs() <= 0.1, "{g16}");
    assert!((g8 - (8.0 + 10.0 * 64f64.log10())).abs() < 1e-9);
}

#[test]
fn beamwidth_matches_bisection_oracle() {
    for (m, n) in [(1, 1), (4, 4), (8, 8), (16, 16), (1, 64)] {
        let lib =
            half_power_beamwidth_deg(&ArraySpec::uniform(m, n), SteeringAngles::BORESIGHT, Plane::Azimuth).unwrap();
        let oracle = bisection_hpbw(m, n);
        assert!((lib - oracle).abs() < 2e-3, "{m}x{n}: {lib} vs {oracle}");
    }
}

#[test]
fn frozen_8x8_beamwidth() {
    // value produced by the bisection oracle above
    let oracle = bisection_hpbw(8, 8);
    assert!((oracle - GOLDEN_8X8_HPBW_DEG).abs() < 1e-6, "{oracle}");
    let lib = half_power_beamwidth_deg(&ArraySpec::uniform(8, 8), SteeringAngles::BORESIGHT, Plane::Azimuth).unwrap();
    assert!((lib - GOLDEN_8X8_HPBW_DEG).abs() < 2e-3);
}

const GOLDEN_8X8_HPBW_DEG: f64 = 12.557_997_821_857_97;

#[test]
fn beamwidth_shrinks_with_aperture() {
    let w = |k| half_power_beamwidth_deg(&ArraySpec::uniform(k, k), SteeringAngles::BORESIGHT, Plane::Azimuth).unwrap();
    let (w4, w8, w16) = (w(4), w(8), w(16));
    assert!(w16 < w8 && w8 < w4, "{w4} {w8} {w16}");
}

#[test]
fn link_budget_spot_values() {
    let cfg = RadioConfig::default();
    let noise = -174.0 + 10.0 * 400e6f64.log10() + 9.0;
    assert!((noise_power_dbm(&cfg) - noise).abs() < 1e-12);
    assert!((noise_power_dbm(&cfg) + 78.98).abs() <= 0.01);
    let fspl = 20.0 * 1000f64.log10() + 20.0 * 26e9f64.log10() - 147.55;
    assert!((pathloss_db(&cfg, 1000.0, true) - fspl).abs() < 1e-12);
    assert!((pathloss_db(&cfg, 1000.0, true) - 120.75).abs() <= 0.05);
    assert!((pathloss_db(&cfg, 1000.0, false) - fspl - 20.0).abs() < 1e-12);
}
