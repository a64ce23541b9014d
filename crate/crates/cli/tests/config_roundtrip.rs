use fockwit::states::StateSpec;
use fockwit::C64;
use fockwit_cli::config::{AmpMethod, Device, Format, OutputConfig, Overrides, RunConfig, ScanAxis, WitnessSpec};
use proptest::prelude::*;

fn real() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

fn complex() -> impl Strategy<Value = C64> {
    (real(), real()).prop_map(|(re, im)| C64::new(re, im))
}

fn state() -> impl Strategy<Value = StateSpec> {
    prop_oneof![
        (1usize..3).prop_map(|modes| StateSpec::Vacuum { modes }),
        complex().prop_map(|alpha| StateSpec::Coherent { alpha }),
        (0usize..6).prop_map(|n| StateSpec::Number { n }),
        prop::collection::vec((0usize..5, real(), real()), 1..4).prop_map(|terms| StateSpec::Superposition { terms }),
        (complex(), complex()).prop_map(|(alpha, beta)| StateSpec::CatPair { alpha, beta }),
        (complex(), complex()).prop_map(|(alpha, beta)| StateSpec::PhotonAddedPair { alpha, beta }),
        (1usize..6, 0usize..3).prop_map(|(k1, k2)| StateSpec::NumberPair { k1, k2 }),
        Just(StateSpec::SinglePhotonBell),
        (0.0..2.0f64, real()).prop_map(|(r, theta)| StateSpec::SqueezedVacuum { r, theta }),
        (0.0..2.0f64).prop_map(|mean| StateSpec::Thermal { mean }),
    ]
}

fn device() -> impl Strategy<Value = Device> {
    prop_oneof![
        (real(), real(), real()).prop_map(|(theta, phi_t, phi_r)| Device::BeamSplitter { modes: [0, 1], theta, phi_t, phi_r }),
        (real(), real()).prop_map(|(r, theta)| Device::Squeezer { modes: [1, 0], r, theta }),
        real().prop_map(|phi| Device::PhaseShift { mode: 0, phi }),
        complex().prop_map(|alpha| Device::Displacement { mode: 1, alpha }),
    ]
}

fn amplifier() -> impl Strategy<Value = Device> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..5.0f64, any::<bool>(), prop::option::of(4usize..30), prop::option::of(0.001..0.1f64))
        .prop_map(|(gain_a, loss_a, gain_b, loss_b, t, lindblad, cutoff, dt)| Device::Amplifier {
            gain_a,
            loss_a,
            gain_b,
            loss_b,
            t,
            method: if lindblad { AmpMethod::Lindblad } else { AmpMethod::Moments },
            cutoff,
            dt,
        })
}

fn witness() -> impl Strategy<Value = WitnessSpec> {
    prop_oneof![
        (1usize..4, 1usize..4).prop_map(|(m, n)| WitnessSpec::HzProduct { m, n, modes: [0, 1] }),
        (1usize..4, 1usize..4).prop_map(|(m, n)| WitnessSpec::HzSum { m, n, modes: [1, 0] }),
        Just(WitnessSpec::HzCentral { modes: [0, 1] }),
        prop::option::of(0.1..4.0f64).prop_map(|xi| WitnessSpec::DuanSimon { xi, modes: [0, 1] }),
    ]
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        prop_oneof![
            (state(), state()).prop_filter_map("two modes", |(a, b)| (a.modes() + b.modes() == 2).then(|| vec![a, b])),
            state().prop_filter_map("two modes", |a| (a.modes() == 2).then(|| vec![a])),
        ],
        prop::collection::vec(device(), 0..3),
        prop::option::of(amplifier()),
        prop::collection::vec(witness(), 0..4),
        any::<bool>(),
        prop::collection::vec(0.0..5.0f64, 0..3),
        prop::option::of(1e-12..1e-6f64),
        prop::option::of(prop_oneof![Just(Format::Csv), Just(Format::Json)]),
    )
        .prop_map(|(states, mut pipeline, amp, witnesses, scan, times, tolerance, format)| {
            pipeline.extend(amp);
            let scan = if scan && !pipeline.is_empty() {
                vec![ScanAxis { param: "pipeline.0".to_string() + param_of(&pipeline[0]), start: 0.0, stop: 1.0, steps: 3 }]
            } else {
                Vec::new()
            };
            RunConfig {
                states,
                pipeline,
                witnesses,
                scan,
                times,
                truncation: Overrides { cutoffs: if tolerance.is_some() { vec![12] } else { vec![] }, tolerance },
                output: OutputConfig { format, path: None },
            }
        })
}

fn param_of(d: &Device) -> &'static str {
    match d {
        Device::BeamSplitter { .. } => ".theta",
        Device::Squeezer { .. } => ".r",
        Device::PhaseShift { .. } => ".phi",
        Device::Displacement { .. } => ".alpha",
        Device::Amplifier { .. } => ".t",
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn serialize_then_parse_is_identity(cfg in config()) {
        prop_assert!(cfg.validate().is_ok(), "{:?}", cfg.validate());
        let text = cfg.to_toml();
        let back = RunConfig::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml(), text);
    }
}
