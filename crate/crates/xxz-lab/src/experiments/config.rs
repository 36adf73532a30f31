//! Experiment configuration: a single JSON document in which unknown
//! keys are errors.

use crate::error::{Error, Result};
use crate::lattice::SiteInterval;
use crate::qoperators::{embed_local_observable, BlockOperator, LocalObservable, ModelParams};
use crate::spectral::HalfInt;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Cap on chain length unless overridden in the config.
pub const DEFAULT_LENGTH_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum ObservableSpec {
    SigmaX { site: i32 },
    Occupancy { site: i32 },
}

impl ObservableSpec {
    pub fn site(&self) -> i32 {
        match self {
            ObservableSpec::SigmaX { site } | ObservableSpec::Occupancy { site } => *site,
        }
    }

    pub fn local(&self) -> LocalObservable {
        match self {
            ObservableSpec::SigmaX { site } => LocalObservable::sigma_x(*site),
            ObservableSpec::Occupancy { site } => LocalObservable::occupancy(*site),
        }
    }

    pub fn embed(&self, ambient: &SiteInterval) -> Result<BlockOperator<f64>> {
        embed_local_observable(&self.local(), ambient)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Uniform01,
    Beta { a: f64, b: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        if let Distribution::Beta { a, b } = self {
            // a, b >= 1 keeps the density bounded with 0 and 1 in the
            // support closure
            if !(*a >= 1.0 && *b >= 1.0) {
                return Err(Error::Config(format!(
                    "beta parameters must be >= 1, got a={a} b={b}"
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            Distribution::Uniform01 => "uniform01".into(),
            Distribution::Beta { a, b } => format!("beta({a},{b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    pub distribution: Distribution,
    pub master_seed: u64,
    pub count: usize,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if self.count == 0 {
            return Err(Error::Config("realization count must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub length: usize,
    pub delta: f64,
    pub lambda: f64,
    /// Window index q, stored as twice its value (q steps in halves).
    #[serde(default)]
    pub q_twice: Option<i32>,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    #[serde(default)]
    pub ell_grid: Vec<usize>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub r_grid: Vec<usize>,
    #[serde(default)]
    pub s_grid: Vec<f64>,
    /// Cut interval [lo, hi] in chain coordinates.
    #[serde(default)]
    pub cut: Option<(i32, i32)>,
    /// Site probed by the light-cone and resolvent diagnostics.
    #[serde(default)]
    pub probe_site: Option<i32>,
    #[serde(default)]
    pub xi_grid: Vec<f64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub r_max: Option<usize>,
    /// Resolvent energy.
    #[serde(default)]
    pub z: Option<f64>,
    /// Separation grid for the occupancy diagnostic.
    #[serde(default)]
    pub separations: Vec<usize>,
    #[serde(default)]
    pub num_sets: Option<usize>,
    /// Quadrature nodes for the interpolation-identity check.
    #[serde(default)]
    pub nodes: Option<usize>,
    /// Whether the locality run also evaluates the partial-trace
    /// approximant (costlier than the restricted one).
    #[serde(default)]
    pub include_ptrace: Option<bool>,
    #[serde(default)]
    pub disorder: Option<DisorderSpec>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub length_cap: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let cap = self.length_cap.unwrap_or(DEFAULT_LENGTH_CAP);
        if self.length == 0 || self.length > cap {
            return Err(Error::Config(format!(
                "length {} outside 1..={cap}",
                self.length
            )));
        }
        ModelParams::new(self.delta, self.lambda).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(q) = self.q_twice {
            if q < 0 {
                return Err(Error::Config(format!("q must be >= 0, got {}/2", q)));
            }
        }
        let ambient = self.ambient();
        if let Some(obs) = &self.observable {
            if !ambient.contains(obs.site()) {
                return Err(Error::Config(format!(
                    "observable site {} outside {ambient}",
                    obs.site()
                )));
            }
        }
        if let Some((lo, hi)) = self.cut {
            let cut = SiteInterval::new(lo, hi);
            if !ambient.contains_interval(&cut) {
                return Err(Error::Config(format!("cut {cut} outside {ambient}")));
            }
        }
        if let Some(site) = self.probe_site {
            if !ambient.contains(site) {
                return Err(Error::Config(format!(
                    "probe site {site} outside {ambient}"
                )));
            }
        }
        if self.ell_grid.contains(&0) {
            return Err(Error::Config("enlargements must be >= 1".into()));
        }
        if let Some(d) = &self.disorder {
            d.validate()?;
        }
        Ok(())
    }

    pub fn ambient(&self) -> SiteInterval {
        SiteInterval::of_len(self.length)
    }

    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.delta, self.lambda).expect("validated")
    }

    pub fn q(&self) -> HalfInt {
        HalfInt::from_twice(self.q_twice.unwrap_or(1))
    }

    /// Default observable: spin flip at the chain center.
    pub fn observable_or_default(&self) -> ObservableSpec {
        self.observable.clone().unwrap_or(ObservableSpec::SigmaX {
            site: self.ambient().lo() + (self.length as i32 - 1) / 2,
        })
    }

    pub fn disorder_required(&self) -> Result<&DisorderSpec> {
        self.disorder
            .as_ref()
            .ok_or_else(|| Error::Config("this experiment needs a disorder block".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_json() -> serde_json::Value {
        serde_json::json!({
            "length": 8,
            "delta": 2.0,
            "lambda": 1.0,
            "disorder": {
                "distribution": {"kind": "uniform01"},
                "master_seed": 42,
                "count": 3
            }
        })
    }

    #[test]
    fn roundtrip_and_defaults() {
        let cfg: ExperimentConfig = serde_json::from_value(base_json()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.q().twice(), 1);
        assert_eq!(
            cfg.observable_or_default(),
            ObservableSpec::SigmaX { site: 3 }
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = base_json();
        v["lenght"] = serde_json::json!(8);
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
        let mut v = base_json();
        v["disorder"]["seed"] = serde_json::json!(1);
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
    }

    #[test]
    fn geometry_and_parameter_checks() {
        let mut v = base_json();
        v["length"] = serde_json::json!(40);
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());

        let mut v = base_json();
        v["cut"] = serde_json::json!([2, 9]);
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());

        let mut v = base_json();
        v["delta"] = serde_json::json!(0.5);
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());

        let mut v = base_json();
        v["disorder"]["distribution"] = serde_json::json!({"kind": "beta", "a": 0.5, "b": 2.0});
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());
    }
}
