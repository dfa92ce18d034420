use collapse_bounds::collapse::{csl_force_psd, dp_force_psd};
use collapse_bounds::constraints::{csl_lambda_bound, log_grid};
use collapse_bounds::io::formats::{parse_spectrum, spectrum_csv, Metadata};
use collapse_bounds::io::units::{parse_quantity, Dimension};
use collapse_bounds::types::{
    convert_spectrum, ConversionContext, CslParams, Damping, DpParams, NoiseSpectrum,
    Oscillator, PhysicalConstants, PsdKind, TestMass, WhiteLevel,
};
use proptest::prelude::*;

const C: PhysicalConstants = PhysicalConstants::CODATA_2018;

fn context(mass: f64, arm: f64, f0: f64, q: f64) -> ConversionContext {
    let osc = Oscillator::new(2.0 * mass, 2.0 * std::f64::consts::PI * f0, q, Damping::Structural).unwrap();
    ConversionContext::default()
        .with_mass(mass)
        .with_lever_arm(arm)
        .with_oscillator(osc)
}

fn spectrum(levels: &[f64], kind: PsdKind) -> NoiseSpectrum {
    let grid = log_grid(1e-4, 1.0, levels.len()).unwrap();
    NoiseSpectrum::new(grid, levels.to_vec(), kind).unwrap()
}

fn kinds() -> impl Strategy<Value = PsdKind> {
    prop::sample::select(PsdKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn conversions_round_trip(
        levels in prop::collection::vec(1e-40f64..1e-20, 2..40),
        from in kinds(),
        to in kinds(),
        mass in 0.1f64..10.0,
        arm in 0.01f64..1.0,
        f0 in 1e-4f64..1e-2,
        q in 2.0f64..1e6,
    ) {
        let ctx = context(mass, arm, f0, q);
        let s = spectrum(&levels, from);
        let there = convert_spectrum(&s, to, &ctx).unwrap();
        prop_assert_eq!(there.kind(), to);
        let back = convert_spectrum(&there, from, &ctx).unwrap();
        for (a, b) in back.values().iter().zip(s.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs(), "{} vs {}", a, b);
        }
    }

    #[test]
    fn conversions_are_linear(
        levels in prop::collection::vec(1e-40f64..1e-20, 2..20),
        k in 1e-3f64..1e3,
        to in kinds(),
    ) {
        let ctx = context(1.0, 0.1, 1e-3, 1e6);
        let s = spectrum(&levels, PsdKind::Force);
        let a = convert_spectrum(&s.scaled(k).unwrap(), to, &ctx).unwrap();
        let b = convert_spectrum(&s, to, &ctx).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - k * y).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn csl_level_scales_with_density_squared(
        rho in 500.0f64..30000.0,
        k in 0.1f64..10.0,
        r in 1e-9f64..1e-4,
        lambda in 1e-20f64..1e-6,
    ) {
        let tm = TestMass::new(1.0, rho, 0.05, 4e-10).unwrap();
        let p = CslParams::new(lambda, r).unwrap();
        let d1 = csl_force_psd(&p, &tm, &C).unwrap().d;
        let d2 = csl_force_psd(&p, &TestMass { density: k * rho, ..tm }, &C).unwrap().d;
        prop_assert!((d2 - k * k * d1).abs() <= 1e-12 * d2);
    }

    #[test]
    fn bound_inverts_forward_model(
        lambda in 1e-20f64..1e-6,
        r in 1e-9f64..4e-3,
        mass in 0.1f64..10.0,
        rho in 1000.0f64..25000.0,
    ) {
        let tm = TestMass::solid_cube(mass, rho, 4e-10).unwrap();
        prop_assume!(r <= tm.r_valid_max());
        let d = csl_force_psd(&CslParams::new(lambda, r).unwrap(), &tm, &C).unwrap().d;
        let sa = WhiteLevel::force(d).unwrap()
            .convert(PsdKind::Accel, &ConversionContext::default().with_mass(mass))
            .unwrap();
        let back = csl_lambda_bound(&sa, &tm, r, &C).unwrap();
        prop_assert!((back - lambda).abs() <= 1e-12 * lambda);
    }

    #[test]
    fn dp_level_is_monotone_in_sigma(s1 in 1e-16f64..1e-10, s2 in 1e-16f64..1e-10) {
        prop_assume!(s1 < s2);
        let tm = TestMass::lpf();
        let d1 = dp_force_psd(&DpParams::new(s1).unwrap(), &tm, &C).d;
        let d2 = dp_force_psd(&DpParams::new(s2).unwrap(), &tm, &C).d;
        prop_assert!(d2 < d1);
    }

    #[test]
    fn spectrum_csv_is_bit_exact(
        levels in prop::collection::vec(prop::num::f64::POSITIVE | prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 2..30),
    ) {
        let s = spectrum(&levels, PsdKind::Displacement);
        let text = spectrum_csv(&s, &Metadata::default());
        let back = parse_spectrum(&text, "mem").unwrap();
        for (a, b) in back.values().iter().zip(s.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back.freqs(), s.freqs());
    }

    #[test]
    fn millimetres_normalize(v in 1e-3f64..1e6) {
        let parsed = parse_quantity(&format!("{v} mm"), Dimension::Length).unwrap();
        prop_assert!((parsed - v * 1e-3).abs() <= 1e-15 * parsed);
    }
}
