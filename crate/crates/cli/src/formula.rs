//! `formula <id> --params key=value,...`: closed forms addressable by id.
//!
//! Complex inputs take `name=re` plus optional `name_im=im`. Formulas that need
//! input moments read a state from `input.*` keys, e.g. `input.family=squeezed_vacuum,input.r=1`.

use std::collections::BTreeMap;

use fockwit::closed_form::{self, FormulaResult};
use fockwit::devices::{
    classicality_threshold, separable_after, AmplifierParams, BeamSplitterParams, ModeMoments, MomentSet,
    SqueezerParams,
};
use fockwit::states::StateSpec;
use fockwit::{Ensemble, C64};

use crate::config::ConfigError;

pub const IDS: [&str; 13] = [
    "photon_added",
    "cat",
    "number_pair",
    "coherent_overlap",
    "bs_vacuum",
    "bs_leading",
    "duan_bs_chain",
    "eta",
    "duan_parametric",
    "squeezer_m2",
    "w_coherent",
    "amp_forms",
    "threshold",
];

pub struct Params {
    raw: BTreeMap<String, String>,
}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

impl Params {
    pub fn parse(items: &[String]) -> anyhow::Result<Self> {
        let mut raw = BTreeMap::new();
        for item in items {
            let (k, v) = item.split_once('=').ok_or_else(|| bad(format!("parameter `{item}` is not key=value")))?;
            if raw.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(bad(format!("parameter `{k}` given twice")));
            }
        }
        Ok(Self { raw })
    }

    fn real_or(&self, key: &str, default: Option<f64>) -> anyhow::Result<f64> {
        match self.raw.get(key) {
            Some(v) => v.parse().map_err(|_| bad(format!("`{key}` must be a number, got `{v}`"))),
            None => default.ok_or_else(|| bad(format!("missing parameter `{key}`"))),
        }
    }

    fn real(&self, key: &str) -> anyhow::Result<f64> {
        self.real_or(key, None)
    }

    fn complex(&self, key: &str) -> anyhow::Result<C64> {
        Ok(C64::new(self.real(key)?, self.real_or(&format!("{key}_im"), Some(0.0))?))
    }

    fn count(&self, key: &str) -> anyhow::Result<usize> {
        let v = self.raw.get(key).ok_or_else(|| bad(format!("missing parameter `{key}`")))?;
        v.parse().map_err(|_| bad(format!("`{key}` must be a non-negative integer, got `{v}`")))
    }

    /// Numeric parameters, echoed into the result.
    fn inputs(&self) -> Vec<(String, f64)> {
        self.raw.iter().filter_map(|(k, v)| v.parse().ok().map(|x| (k.clone(), x))).collect()
    }

    /// The state described by the `input.*` keys.
    fn input_state(&self) -> anyhow::Result<Ensemble> {
        let mut table = toml::Table::new();
        for (k, v) in &self.raw {
            let Some(field) = k.strip_prefix("input.") else { continue };
            let value = if let Ok(i) = v.parse::<i64>() {
                toml::Value::Integer(i)
            } else if let Ok(x) = v.parse::<f64>() {
                toml::Value::Float(x)
            } else {
                toml::Value::String(v.clone())
            };
            table.insert(field.to_string(), value);
        }
        if table.is_empty() {
            return Err(bad("this formula needs an input state (`input.family=...`)"));
        }
        // merge `x` and `x_im` into a complex pair
        let imag: Vec<String> = table.keys().filter(|k| k.ends_with("_im")).cloned().collect();
        for k in imag {
            let im = table.remove(&k).and_then(|v| v.as_float().or(v.as_integer().map(|i| i as f64)));
            let base = k.trim_end_matches("_im").to_string();
            let re = table.get(&base).and_then(|v| v.as_float().or(v.as_integer().map(|i| i as f64))).unwrap_or(0.0);
            table.insert(base, toml::Value::Array(vec![re.into(), im.unwrap_or(0.0).into()]));
        }
        // state fields that are real numbers may have been read as integers
        for key in ["alpha", "beta", "r", "theta", "mean"] {
            if let Some(toml::Value::Integer(i)) = table.get(key) {
                let x = *i as f64;
                table.insert(key.to_string(), toml::Value::Float(x));
            }
        }
        let spec: StateSpec = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| bad(e.to_string()))?;
        Ok(spec.build()?)
    }

    fn splitter(&self) -> anyhow::Result<BeamSplitterParams> {
        Ok(BeamSplitterParams::from_angles(
            self.real_or("theta", Some(std::f64::consts::FRAC_PI_4))?,
            self.real_or("phi_t", Some(0.0))?,
            self.real_or("phi_r", Some(0.0))?,
        ))
    }

    fn squeezer(&self) -> anyhow::Result<SqueezerParams> {
        Ok(SqueezerParams::from_gain(self.real("r")?, self.real_or("theta", Some(0.0))?))
    }

    fn amplifier(&self) -> anyhow::Result<AmplifierParams> {
        Ok(AmplifierParams::new(
            self.real("gain_a")?,
            self.real("loss_a")?,
            self.real("gain_b")?,
            self.real("loss_b")?,
            self.real_or("t", Some(0.0))?,
        )?)
    }
}

fn values<const N: usize>(pairs: [(&str, f64); N]) -> Vec<(String, f64)> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn flags<const N: usize>(pairs: [(&str, bool); N]) -> Vec<(String, bool)> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn evaluate(id: &str, p: &Params) -> anyhow::Result<FormulaResult> {
    let (vals, fl) = match id {
        "photon_added" => {
            let (a, b) = (p.complex("alpha")?, p.complex("beta")?);
            (
                values([
                    ("printed", closed_form::photon_added_witness(a, b)),
                    ("squared_denominator", closed_form::photon_added_witness_corrected(a, b)),
                ]),
                vec![],
            )
        }
        "cat" => {
            let w = closed_form::cat_witness(p.complex("alpha")?, p.complex("beta")?);
            let mut v = values([("general", w.general)]);
            if let (Some(rp), Some(d)) = (w.real_positive, w.discrepancy()) {
                v.extend(values([("real_positive", rp), ("discrepancy", d)]));
            }
            (v, flags([("real_positive_domain", w.real_positive.is_some())]))
        }
        "number_pair" => {
            let v = closed_form::number_pair_values(p.count("k1")?, p.count("k2")?)?;
            (values([("lhs", v.lhs), ("rhs", v.rhs)]), flags([("overlapping", v.overlapping), ("detected", v.detected)]))
        }
        "coherent_overlap" => {
            (values([("value", closed_form::coherent_overlap_sq(p.complex("alpha")?, p.complex("beta")?))]), vec![])
        }
        "bs_vacuum" => {
            let mm = ModeMoments::of(&p.input_state()?, 0)?;
            let bs = p.splitter()?;
            let m = closed_form::bs_output_moments_vacuum(&mm, bs.t(), bs.r());
            let m2 = closed_form::bs_m2_moments(&mm, bs.t(), bs.r());
            (
                values([
                    ("ab_dag_re", m.ab_dag.re),
                    ("ab_dag_im", m.ab_dag.im),
                    ("na_nb", m.na_nb),
                    ("na", m.na),
                    ("nb", m.nb),
                    ("m2_lhs", m2.lhs),
                    ("m2_rhs", m2.rhs),
                    ("reduced_lhs", m2.reduced_lhs),
                    ("reduced_rhs", m2.reduced_rhs),
                ]),
                flags([("sub_poissonian", closed_form::sub_poissonian(&mm)), ("m2_detected", m2.detected())]),
            )
        }
        "bs_leading" => {
            let mm = ModeMoments::of(&p.input_state()?, 0)?;
            let bs = p.splitter()?;
            let beta = p.complex("beta")?;
            (
                values([
                    ("leading", closed_form::bs_coherent_leading(beta, bs.t(), bs.r(), &mm)),
                    ("optimal_phase", closed_form::optimal_leading_phase(&mm)),
                    (
                        "leading_at_optimal_phase",
                        closed_form::bs_coherent_leading_balanced(beta.norm(), closed_form::optimal_leading_phase(&mm), &mm),
                    ),
                ]),
                flags([("squeezed", closed_form::squeezing_predicate(&mm))]),
            )
        }
        "duan_bs_chain" => {
            let mm = ModeMoments::of(&p.input_state()?, 0)?;
            let bs = p.splitter()?;
            let chain = closed_form::duan_bs_chain(&mm, bs.t(), bs.r(), p.real_or("xi", Some(1.0))?)?;
            (
                values([("expression", chain.expression), ("minimized", chain.minimized)]),
                flags([("detected", chain.detected()), ("squeezed", chain.squeezed)]),
            )
        }
        "eta" => (values([("eta", closed_form::eta(&ModeMoments::of(&p.input_state()?, 0)?))]), vec![]),
        "duan_parametric" => {
            let (lhs, rhs) = closed_form::duan_parametric_sides(p.real("eta")?, &p.squeezer()?)?;
            (values([("lhs", lhs), ("rhs", rhs)]), flags([("holds", lhs < rhs)]))
        }
        "squeezer_m2" => {
            (values([("value", closed_form::squeezer_m2_condition(p.real("n")?, &p.squeezer()?))]), vec![])
        }
        "w_coherent" => (values([("margin", closed_form::w_coherent_margin(p.complex("alpha")?))]), vec![]),
        "amp_forms" => {
            let m0 = MomentSet::of(&p.input_state()?, (0, 1))?;
            let forms = closed_form::amp_witness_forms(&m0, &p.amplifier()?)?;
            let mut v = Vec::new();
            if let Some(x) = forms.loss_scaled {
                v.extend(values([("loss_scaled", x)]));
            }
            if let Some((bracket, scaled)) = forms.high_gain {
                v.extend(values([("high_gain_bracket", bracket), ("high_gain", scaled)]));
            }
            (v, flags([("loss_only", forms.loss_scaled.is_some()), ("high_gain", forms.high_gain.is_some())]))
        }
        "threshold" => {
            let params = p.amplifier()?;
            let (ta, tb) = classicality_threshold(&params);
            let mut v = Vec::new();
            for (name, t) in [("t_a", ta.time()), ("t_b", tb.time()), ("separable_after", separable_after(&params))] {
                if let Some(t) = t {
                    v.push((name.to_string(), t));
                }
            }
            (v, flags([("crosses_a", ta.time().is_some()), ("crosses_b", tb.time().is_some())]))
        }
        other => return Err(bad(format!("unknown formula `{other}`; known ids: {}", IDS.join(", ")))),
    };
    Ok(FormulaResult { id: id.to_string(), inputs: p.inputs(), values: vals, flags: fl })
}
