//! Executes run configurations: state preparation, device pipeline, witnesses.

use fockwit::devices::{
    beam_splitter, default_step, displacement, lindblad_evolve, phase_shift, two_mode_squeezer,
    AmplifiedMoments, AmplifierParams, BeamSplitterParams, MomentSet, SqueezerParams,
};
use fockwit::fock::OVERFLOW_TOLERANCE;
use fockwit::states::build_product;
use fockwit::witnesses::{
    duan_simon_pair, hz_central_pair, hz_product_pair, hz_sum_pair, tripartite_genuine_relabeled,
    WitnessReport, Xi,
};
use fockwit::{DensityOperator, Ensemble, Error, MomentSource, PureState, Result, Truncation};
use rayon::prelude::*;

use crate::config::{AmpMethod, Device, RunConfig, WitnessSpec};
use crate::table::{report_cells, Cell, Table, REPORT_COLUMNS};

/// State after the pipeline.
pub enum Stage {
    Pure(Ensemble),
    Mixed(DensityOperator),
    Amplified(Ensemble, AmplifierParams),
}

impl Stage {
    pub fn with_source<T>(&self, f: impl FnOnce(&dyn MomentSource) -> Result<T>) -> Result<T> {
        match self {
            Stage::Pure(e) => f(e),
            Stage::Mixed(rho) => f(rho),
            Stage::Amplified(e, p) => f(&AmplifiedMoments::new(e, p)?),
        }
    }
}

/// Re-truncates a state mode by mode; dropping more than the overflow tolerance is an error.
pub fn retruncate(state: &PureState, cutoffs: &[usize]) -> Result<PureState> {
    let mut ket = state.as_ket().clone();
    for mode in 0..state.modes() {
        let target = cutoffs.get(mode).or(cutoffs.first()).copied().unwrap_or(ket.truncation().cutoff(mode));
        let trunc = ket.truncation().with_cutoff(mode, target);
        ket = if target >= ket.truncation().cutoff(mode) {
            ket.embed(&trunc)?
        } else {
            let (kept, dropped) = ket.project(&trunc)?;
            if dropped > OVERFLOW_TOLERANCE {
                return Err(Error::TruncationOverflow { mode, weight: dropped });
            }
            kept
        };
    }
    ket.normalize()
}

fn apply(e: &Ensemble, device: &Device) -> Result<Ensemble> {
    match *device {
        Device::BeamSplitter { modes, theta, phi_t, phi_r } => {
            let p = BeamSplitterParams::from_angles(theta, phi_t, phi_r);
            e.try_map(|s| beam_splitter(s, (modes[0], modes[1]), &p))
        }
        Device::Squeezer { modes, r, theta } => {
            let p = SqueezerParams::from_gain(r, theta);
            e.try_map(|s| Ok(two_mode_squeezer(s, (modes[0], modes[1]), &p)?.state))
        }
        Device::PhaseShift { mode, phi } => e.try_map(|s| phase_shift(s, mode, phi)),
        Device::Displacement { mode, alpha } => e.try_map(|s| displacement(s, mode, alpha)),
        Device::Amplifier { .. } => unreachable!("the amplifier is handled as the final stage"),
    }
}

/// Builds the configured state and runs the pipeline.
pub fn prepare(cfg: &RunConfig) -> Result<Stage> {
    let mut e = build_product(&cfg.states)?;
    if !cfg.truncation.cutoffs.is_empty() {
        e = e.try_map(|s| retruncate(s, &cfg.truncation.cutoffs))?;
    }
    for device in &cfg.pipeline {
        if let Device::Amplifier { gain_a, loss_a, gain_b, loss_b, t, method, cutoff, dt } = *device {
            let params = AmplifierParams::new(gain_a, loss_a, gain_b, loss_b, t)?;
            return Ok(match method {
                AmpMethod::Moments => Stage::Amplified(e, params),
                AmpMethod::Lindblad => {
                    let mut rho = e.to_density()?;
                    if let Some(c) = cutoff {
                        rho = rho.embed(&Truncation::uniform(2, c)?)?;
                    }
                    let dt = dt.unwrap_or_else(|| default_step(&params));
                    Stage::Mixed(lindblad_evolve(&rho, &params, dt)?)
                }
            });
        }
        e = apply(&e, device)?;
    }
    Ok(Stage::Pure(e))
}

pub fn evaluate(source: &dyn MomentSource, spec: &WitnessSpec) -> Result<Vec<WitnessReport>> {
    let pair = |m: [usize; 2]| (m[0], m[1]);
    Ok(match *spec {
        WitnessSpec::HzProduct { m, n, modes } => vec![hz_product_pair(source, pair(modes), m, n)?],
        WitnessSpec::HzSum { m, n, modes } => vec![hz_sum_pair(source, pair(modes), m, n)?],
        WitnessSpec::HzCentral { modes } => vec![hz_central_pair(source, pair(modes))?],
        WitnessSpec::DuanSimon { xi, modes } => {
            vec![duan_simon_pair(source, pair(modes), xi.map_or(Xi::Auto, Xi::Value))?]
        }
        WitnessSpec::Tripartite { order } => {
            let r = tripartite_genuine_relabeled(source, order)?;
            vec![r.ab, r.bc]
        }
    })
}

/// All requested witnesses on the prepared state, with the tolerance override applied.
pub fn witness_reports(cfg: &RunConfig) -> Result<Vec<WitnessReport>> {
    let stage = prepare(cfg)?;
    let mut out = Vec::new();
    for spec in &cfg.witnesses {
        out.extend(stage.with_source(|s| evaluate(s, spec))?);
    }
    if let Some(tol) = cfg.truncation.tolerance {
        out = out.into_iter().map(|r| r.with_tolerance(tol)).collect();
    }
    Ok(out)
}

pub fn witness_table(cfg: &RunConfig) -> anyhow::Result<Table> {
    Ok(Table::reports(&witness_reports(cfg)?))
}

/// Grid points in lexicographic order of the axis values.
pub fn grid(cfg: &RunConfig) -> Vec<Vec<f64>> {
    cfg.scan.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.values().into_iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Witness rows for every grid point, evaluated concurrently and assembled in grid order.
pub fn scan_table(cfg: &RunConfig) -> anyhow::Result<Table> {
    if cfg.scan.is_empty() {
        return Err(crate::config::ConfigError("scan needs one or two `[[scan]]` axes".into()).into());
    }
    let points = grid(cfg);
    let results: Vec<anyhow::Result<(Vec<f64>, Vec<WitnessReport>)>> = points
        .into_par_iter()
        .map(|point| {
            let mut at = cfg.clone();
            for (axis, &v) in cfg.scan.iter().zip(&point) {
                at = at.with_param(&axis.param, v)?;
            }
            Ok((point, witness_reports(&at)?))
        })
        .collect();
    let mut table = Table::new(cfg.scan.iter().map(|a| a.param.clone()).chain(REPORT_COLUMNS.map(String::from)));
    for r in results {
        let (point, reports) = r?;
        for rep in reports {
            let mut row: Vec<Cell> = point.iter().map(|&v| v.into()).collect();
            row.extend(report_cells(&rep));
            table.push(row);
        }
    }
    Ok(table)
}

/// Two-mode moments and the product witness at each sample time of the final amplifier.
pub fn evolve_table(cfg: &RunConfig) -> anyhow::Result<Table> {
    let Some(Device::Amplifier { t, .. }) = cfg.pipeline.last() else {
        return Err(crate::config::ConfigError("evolve needs an amplifier as the last pipeline step".into()).into());
    };
    let times = if cfg.times.is_empty() { vec![*t] } else { cfg.times.clone() };
    let last = cfg.pipeline.len() - 1;
    let rows: Vec<anyhow::Result<Vec<Cell>>> = times
        .into_par_iter()
        .map(|time| {
            let at = cfg.with_param(&format!("pipeline.{last}.t"), time)?;
            let m = prepare(&at)?.with_source(|s| MomentSet::of(s, (0, 1)))?;
            Ok(vec![
                time.into(),
                m.ab_dag.re.into(),
                m.ab_dag.im.into(),
                m.na_nb.into(),
                m.na.into(),
                m.nb.into(),
                m.product_witness().into(),
            ])
        })
        .collect();
    let mut table = Table::new(["t", "ab_dag_re", "ab_dag_im", "na_nb", "na", "nb", "product_witness"]);
    for r in rows {
        table.push(r?);
    }
    Ok(table)
}
