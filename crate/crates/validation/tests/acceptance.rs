//! One pass/fail line per acceptance criterion, with runtimes.
//!
//! Lines go straight to the stderr handle so they show up in `cargo test`
//! output without `--nocapture`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::time::{Duration, Instant};

use fockwit_validation::{c, random_complex, random_fock_superposition, rng, two_mode_suite};
use fockwit::closed_form::*;
use fockwit::devices::*;
use fockwit::states::*;
use fockwit::witnesses::*;
use fockwit::{expect, Ensemble, Monomial, MomentSource, PureState, Truncation, C64};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> fockwit::Result<Outcome>) -> bool {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(o) => (o.pass && elapsed < budget, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let line = format!(
        "[acceptance] criterion {id:>2} {:<34} {}  ({detail}; {:.2} s of {} s)\n",
        name,
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    std::io::stderr().lock().write_all(line.as_bytes()).expect("stderr");
    pass
}

fn all_reports<S: MomentSource + ?Sized>(s: &S) -> fockwit::Result<Vec<WitnessReport>> {
    let mut out = Vec::new();
    for (m, n) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        out.push(hz_product(s, m, n)?);
        out.push(hz_sum(s, m, n)?);
    }
    out.push(hz_central(s)?);
    out.push(duan_simon(s, Xi::Auto)?);
    Ok(out)
}

fn product_witness<S: MomentSource + ?Sized>(s: &S) -> fockwit::Result<f64> {
    Ok(MomentSet::of(s, (0, 1))?.product_witness())
}

fn coherent_saturation() -> fockwit::Result<Outcome> {
    let mut worst = 0.0f64;
    for k in 1..=10 {
        let alpha = C64::from_polar(0.2 * k as f64, 0.7 * k as f64);
        let beta = C64::from_polar(2.1 - 0.19 * k as f64, -1.3 * k as f64);
        worst = worst.max(product_witness(&coherent(alpha).tensor(&coherent(beta)))?.abs());
    }
    Ok(outcome(worst < 1e-10, format!("max |witness| {worst:.2e}")))
}

fn photon_added_detection() -> fockwit::Result<Outcome> {
    let mut rng = rng(2);
    let (mut dev_printed, mut dev_corrected, mut all_detected, mut points) = (0.0f64, 0.0f64, true, 0);
    while points < 20 {
        let (a, b) = (random_complex(&mut rng, 1.5), random_complex(&mut rng, 1.5));
        if (a.conj() * b).re <= 0.0 {
            continue;
        }
        points += 1;
        let report = hz_product(&photon_added_pair(a, b)?, 1, 1)?;
        all_detected &= report.detected();
        dev_printed = dev_printed.max((report.margin + photon_added_witness(a, b)).abs());
        dev_corrected = dev_corrected.max((report.margin + photon_added_witness_corrected(a, b)).abs());
    }
    let one = c(1.0, 0.0);
    let at_one = hz_product(&photon_added_pair(one, one)?, 1, 1)?.margin;
    let pass = dev_printed < 1e-9 && all_detected && (at_one - 13.0 / 6.0).abs() < 1e-9;
    Ok(outcome(
        pass,
        format!(
            "all detected: {all_detected}; max |margin + printed| {dev_printed:.3e}; margin at (1,1) {at_one:.12} vs 13/6; \
             squared-denominator form deviates {dev_corrected:.1e}"
        ),
    ))
}

fn cat_adjudication() -> fockwit::Result<Outcome> {
    let mut rng = rng(3);
    let (mut dev_general, mut dev_real) = (0.0f64, 0.0f64);
    for k in 0..20 {
        let (a, b) = if k % 2 == 0 {
            (random_complex(&mut rng, 1.6), random_complex(&mut rng, 1.6))
        } else {
            // common domain of both printed forms: alpha beta* real and positive
            let phase = rng.random_range(0.0..2.0 * PI);
            (C64::from_polar(rng.random_range(0.1..1.6), phase), C64::from_polar(rng.random_range(0.1..1.6), phase))
        };
        // closed forms give <N_a N_b> - |<a b^dagger>|^2
        let w = -product_witness(&cat_pair(a, b)?)?;
        let forms = cat_witness(a, b);
        dev_general = dev_general.max((w - forms.general).abs());
        if let Some(v) = forms.real_positive {
            dev_real = dev_real.max((w - v).abs());
        }
    }
    let general_ok = dev_general < 1e-9;
    let real_ok = dev_real < 1e-9;
    let canonical = match (general_ok, real_ok) {
        (true, false) => "general form",
        (false, true) => "real-positive form",
        (true, true) => "both",
        (false, false) => "neither",
    };
    Ok(outcome(
        general_ok != real_ok,
        format!("canonical: {canonical}; general dev {dev_general:.1e}, real-positive dev {dev_real:.1e}"),
    ))
}

fn number_pair_boundary() -> fockwit::Result<Outcome> {
    let mut mismatches = Vec::new();
    for k1 in 1..=10usize {
        for k2 in 0..k1 {
            let m = k1 - k2;
            let r = hz_product(&number_pair_with_cutoff(k1, k2, 12)?, m, m)?;
            let v = number_pair_values(k1, k2)?;
            let values_ok = (r.lhs - v.lhs).abs() <= 1e-9 * v.lhs.max(1.0) && (r.rhs - v.rhs).abs() <= 1e-9 * v.rhs.max(1.0);
            if r.detected() != v.detected || !values_ok {
                mismatches.push((k1, k2));
            }
        }
    }
    let r30 = hz_product(&number_pair(3, 0)?, 3, 3)?;
    let r42 = hz_product(&number_pair(4, 2)?, 2, 2)?;
    let pass = mismatches.is_empty()
        && (r30.lhs - 9.0).abs() < 1e-9
        && r30.rhs.abs() < 1e-12
        && r30.detected()
        && r42.detected();
    Ok(outcome(
        pass,
        format!("55 pairs, mismatches {mismatches:?}; (3,0) lhs {:.6} rhs {:.1e}; (4,2) detected {}", r30.lhs, r30.rhs, r42.detected()),
    ))
}

fn splitter_oracle() -> fockwit::Result<Outcome> {
    let inputs: Vec<(&str, PureState)> = vec![
        ("|1>", number(1)),
        ("|2>", number(2)),
        ("|3>", number(3)),
        ("coherent", coherent(c(0.9, -0.4))),
        ("squeezed", squeezed_vacuum(0.6, 0.3)?),
        ("|0>+|3>", fock_superposition(&[(0, c(1.0, 0.0)), (3, c(1.0, 0.0))])?),
    ];
    let mut worst = 0.0f64;
    let mut disagreements = Vec::new();
    for params in [BeamSplitterParams::balanced(), BeamSplitterParams::from_angles(0.4, 0.9, -0.3)] {
        for (name, psi) in &inputs {
            let out = beam_splitter(&psi.tensor(&number(0)), (0, 1), &params)?;
            let mm = ModeMoments::of(psi, 0)?;
            let map = beam_splitter_moment_map(&mm, InputClass::VacuumB, &params).exact;
            worst = worst.max(MomentSet::of(&out, (0, 1))?.max_abs_diff(&map));
            let predicted = input_predicates(psi)?.sub_poissonian.holds;
            if predicted != hz_product(&out, 1, 1)?.detected() {
                disagreements.push(*name);
            }
        }
    }
    Ok(outcome(
        worst < 1e-10 && disagreements.is_empty(),
        format!("max moment deviation {worst:.1e}; sub-Poissonian mispredictions {disagreements:?}"),
    ))
}

fn fourth_moment_detection() -> fockwit::Result<Outcome> {
    let psi = fock_superposition(&[(0, c(1.0, 0.0)), (3, c(1.0, 0.0))])?;
    let out = beam_splitter(&psi.tensor(&number(0)), (0, 1), &BeamSplitterParams::balanced())?;
    let first = hz_product(&out, 1, 1)?;
    let second = hz_product(&out, 2, 2)?;
    Ok(outcome(
        !first.detected() && second.detected(),
        format!("m=n=1 margin {:.3e} ({}); m=n=2 margin {:.6} ({})", first.margin, first.verdict.as_str(), second.margin, second.verdict.as_str()),
    ))
}

fn large_beta_squeezing() -> fockwit::Result<Outcome> {
    let psi = squeezed_vacuum(0.5, 0.0)?;
    let mm = ModeMoments::of(&psi, 0)?;
    let params = BeamSplitterParams::balanced();
    // balanced splitter with real t, r: phi = -2 theta_beta
    let beta = C64::from_polar(8.0, -optimal_leading_phase(&mm) / 2.0);
    let out = beam_splitter(&psi.tensor(&coherent(beta)), (0, 1), &params)?;
    let w = product_witness(&out)?;
    let lead = bs_coherent_leading(beta, params.t(), params.r(), &mm);
    let rel = (w - lead).abs() / lead.abs();
    Ok(outcome(
        w > 0.0 && rel < 0.05,
        format!("r = 0.5, |beta| = 8; Fock {w:.6}, leading {lead:.6}, relative {rel:.2e}; cutoffs {:?}", out.truncation().cutoffs()),
    ))
}

fn squeeze_ensemble(e: &Ensemble, p: &SqueezerParams) -> fockwit::Result<Ensemble> {
    e.try_map(|m| Ok(two_mode_squeezer(&m.tensor(&number(0)), (0, 1), p)?.state))
}

fn parametric_always_entangled() -> fockwit::Result<Outcome> {
    let inputs: Vec<(&str, Ensemble)> = vec![
        ("vacuum", Ensemble::pure(number(0))),
        ("coherent 1", Ensemble::pure(coherent(c(1.0, 0.0)))),
        ("number 2", Ensemble::pure(number(2))),
        ("thermal 0.5", thermal(0.5)?),
    ];
    let mut failures = Vec::new();
    let mut smallest = f64::INFINITY;
    for r in [0.2, 1.0, 2.0] {
        for (name, input) in &inputs {
            let real = squeeze_ensemble(input, &SqueezerParams::from_gain(r, 0.0))?;
            let sum = hz_sum(&real, 1, 1)?;
            smallest = smallest.min(sum.margin);
            if !sum.detected() {
                failures.push(format!("hz_sum {name} r {r}"));
            }
            if !duan_simon(&real, Xi::Auto)?.detected() {
                failures.push(format!("duan real {name} r {r}"));
            }
            let imag = squeeze_ensemble(input, &SqueezerParams::from_gain(r, FRAC_PI_2))?;
            if duan_simon(&imag, Xi::Auto)?.detected() {
                failures.push(format!("duan imaginary {name} r {r}"));
            }
            if !hz_sum(&imag, 1, 1)?.detected() {
                failures.push(format!("hz_sum imaginary {name} r {r}"));
            }
        }
    }
    Ok(outcome(failures.is_empty(), format!("smallest hz_sum margin {smallest:.3e}; failures {failures:?}")))
}

fn amplifier_oracle() -> fockwit::Result<Outcome> {
    let mut notes = Vec::new();
    let mut pass = true;
    let p = AmplifierParams::new(0.2, 0.1, 0.3, 0.1, 1.0)?;
    let bell = single_photon_bell();
    let closed = linear_amp_moments(&MomentSet::of(&bell, (0, 1))?, &p)?;
    let dt = default_step(&p);
    let embed = |cutoff: usize| bell.embed(&Truncation::uniform(2, cutoff).unwrap()).unwrap().to_density();
    // smallest cutoff from 15 up that the top-population guard accepts
    let mut accepted = None;
    for cutoff in 15..=20 {
        match lindblad_evolve(&embed(cutoff), &p, dt) {
            Ok(rho) => {
                accepted = Some((cutoff, rho));
                break;
            }
            Err(fockwit::Error::TruncationOverflow { .. }) => notes.push(format!("cutoff {cutoff} overflows")),
            Err(e) => return Err(e),
        }
    }
    let Some((cutoff, rho)) = accepted else {
        return Ok(outcome(false, notes.join("; ")));
    };
    let dev = MomentSet::of(&rho, (0, 1))?.max_abs_diff(&closed);
    pass &= dev < 1e-6;
    notes.push(format!("cutoff {cutoff} dev {dev:.1e}"));

    let loss = AmplifierParams::new(0.0, 0.3, 0.0, 0.5, 1.0)?;
    let w0 = product_witness(&bell)?;
    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        let l = loss.at_time(t);
        let rho = lindblad_evolve(&embed(4), &l, default_step(&l))?;
        worst = worst.max((product_witness(&rho)? - (-0.8 * t).exp() * w0).abs());
    }
    pass &= worst < 1e-8;
    notes.push(format!("loss scaling dev {worst:.1e}"));

    let high = AmplifierParams::new(0.4, 0.1, 0.3, 0.2, 5.0)?;
    let mut max_bracket = f64::NEG_INFINITY;
    for (_, s) in two_mode_suite() {
        max_bracket = max_bracket.max(amp_high_gain(&MomentSet::of(&s, (0, 1))?, &high)?.0);
    }
    pass &= max_bracket <= 0.0;
    notes.push(format!("max high-gain bracket {max_bracket:.3e}"));

    let sym = AmplifierParams::new(0.2, 0.1, 0.2, 0.1, 0.0)?;
    let t_star = separable_after(&sym).expect("both modes cross");
    pass &= (t_star - 2f64.ln() / 0.1).abs() < 1e-12;
    let mut fired = Vec::new();
    for t in [t_star * 1.0001, 1.5 * t_star, 3.0 * t_star] {
        let amplified = AmplifiedMoments::new(&bell, &sym.at_time(t))?;
        for r in all_reports(&amplified)? {
            if r.detected() {
                fired.push(format!("{} at t {t:.3}", r.condition.as_str()));
            }
        }
    }
    pass &= fired.is_empty();
    notes.push(format!("t* {t_star:.6}, detections after t*: {fired:?}"));
    Ok(outcome(pass, notes.join("; ")))
}

fn tripartite() -> fockwit::Result<Outcome> {
    let w = tripartite_genuine(&w_single_photon())?;
    let exact = (w.ab.margin - 1.0 / 9.0).abs() < 1e-12 && (w.bc.margin - 1.0 / 9.0).abs() < 1e-12 && w.genuine;
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut all_positive = true;
    for k in 0..30 {
        let a = 0.1 + 2.9 * k as f64 / 29.0;
        let r = tripartite_genuine(&w_coherent(c(a, 0.0)))?;
        all_positive &= r.genuine && r.ab.margin > 0.0 && r.bc.margin > 0.0;
        if r.ab.margin > best.0 {
            best = (r.ab.margin, a);
        }
    }
    let near_one = (0.75..=1.5).contains(&best.1);
    Ok(outcome(
        exact && all_positive && near_one,
        format!(
            "W margins {:.15}, {:.15}; coherent W positive on [0.1, 3]: {all_positive}; argmax |alpha| {:.3}",
            w.ab.margin, w.bc.margin, best.1
        ),
    ))
}

fn measurement_scheme() -> fockwit::Result<Outcome> {
    let mut worst = 0.0f64;
    for (_, s) in two_mode_suite() {
        let direct = expect(&s, &Monomial::new(vec![(0, 1), (1, 0)]))?;
        worst = worst.max((measure_ab_dagger(&s)? - direct).norm());
    }
    Ok(outcome(worst < 1e-10, format!("{} states, max deviation {worst:.1e}", two_mode_suite().len())))
}

fn random_single_mode(rng: &mut rand_chacha::ChaCha8Rng) -> fockwit::Result<PureState> {
    Ok(match rng.random_range(0..5) {
        0 => coherent(random_complex(rng, 1.5)),
        1 => number(rng.random_range(0..5)),
        2 => squeezed_vacuum(rng.random_range(0.0..0.8), rng.random_range(0.0..2.0 * PI))?,
        3 => random_fock_superposition(rng, 4),
        _ => displacement(&random_fock_superposition(rng, 3), 0, random_complex(rng, 1.0))?,
    })
}

fn separability_soundness() -> fockwit::Result<Outcome> {
    let mut rng = rng(12);
    let mut worst = f64::NEG_INFINITY;
    let mut detections = 0;
    for k in 0..200 {
        let members = if k % 2 == 0 { 1 } else { rng.random_range(2..4) };
        let mut parts = Vec::new();
        for _ in 0..members {
            let w: f64 = rng.random_range(0.1..1.0);
            parts.push((w, random_single_mode(&mut rng)?.tensor(&random_single_mode(&mut rng)?)));
        }
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let e = Ensemble::new(parts.into_iter().map(|(w, s)| (w / total, s)).collect())?;
        for r in all_reports(&e)? {
            worst = worst.max(r.margin);
            if r.margin > MARGIN_TOLERANCE {
                detections += 1;
            }
        }
    }
    Ok(outcome(detections == 0, format!("200 states, largest margin {worst:.2e}, detections {detections}")))
}

#[test]
fn acceptance_criteria() {
    let s = Duration::from_secs;
    let results = [
        run(1, "coherent saturation", s(1), coherent_saturation),
        run(2, "photon-added detection", s(5), photon_added_detection),
        run(3, "cat-state adjudication", s(5), cat_adjudication),
        run(4, "number-pair boundary", s(30), number_pair_boundary),
        run(5, "beam-splitter oracle equivalence", s(10), splitter_oracle),
        run(6, "fourth-moment detection", s(2), fourth_moment_detection),
        run(7, "large-beta squeezing criterion", s(60), large_beta_squeezing),
        run(8, "parametric always-entangled", s(30), parametric_always_entangled),
        run(9, "amplifier moment oracle", s(120), amplifier_oracle),
        run(10, "tripartite", s(20), tripartite),
        run(11, "measurement scheme", s(5), measurement_scheme),
        run(12, "separability soundness", s(60), separability_soundness),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
