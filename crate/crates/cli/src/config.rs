//! Scenario files: a [`RunSpec`] plus output names, audit toggles and
//! optional sweep axes, stored as JSON.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use consensus_dyn::algorithms::{AlgorithmKind, UpdateOptions};
use consensus_dyn::graphs::PatternSpec;
use consensus_dyn::simulator::{InitialConfig, RunSpec};
use serde::{Deserialize, Serialize};

fn default_initial() -> InitialConfig {
    InitialConfig::UniformBox { seed: None }
}

fn default_max_rounds() -> u64 {
    consensus_dyn::simulator::DEFAULT_MAX_ROUNDS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub d: usize,
    pub algorithm: AlgorithmKind,
    #[serde(default)]
    pub options: UpdateOptions,
    pub pattern: PatternSpec,
    #[serde(default = "default_initial")]
    pub initial: InitialConfig,
    pub epsilon: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub audits: Audits,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxes>,
}

/// File names, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub trace: String,
    pub deltas: String,
    pub margins: String,
    pub summary: String,
    pub sweep: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            trace: "trace.csv".into(),
            deltas: "delta.csv".into(),
            margins: "margins.csv".into(),
            summary: "summary.json".into(),
            sweep: "sweep.csv".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Audits {
    /// Per-component safeness against the algorithm's constant.
    pub safeness: bool,
    /// Stochastic matrices reconstructed from the trace.
    pub matrices: bool,
    /// The four standing assumptions on the reconstructed matrices.
    pub moreau: bool,
    /// Window for the recurring-edge check; defaults to the pattern's
    /// connectivity period, or the algorithm period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moreau_window: Option<usize>,
}

impl Default for Audits {
    fn default() -> Self {
        Audits {
            safeness: true,
            matrices: false,
            moreau: false,
            moreau_window: None,
        }
    }
}

/// Axes of a sweep. A missing axis keeps the base value; a present one
/// must be nonempty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Vec<AlgorithmKind>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<Vec<u64>>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn to_run_spec(&self) -> RunSpec {
        RunSpec {
            n: self.n,
            d: self.d,
            algorithm: self.algorithm,
            options: self.options,
            pattern: self.pattern.clone(),
            initial: self.initial.clone(),
            epsilon: self.epsilon,
            max_rounds: self.max_rounds,
            seed: self.seed,
        }
    }

    /// Validated run spec, including the pattern.
    pub fn checked_run_spec(&self) -> Result<RunSpec> {
        let spec = self.to_run_spec();
        spec.validate()?;
        spec.build_pattern()?;
        Ok(spec)
    }

    /// Cartesian product of the sweep axes, ordered lexicographically by
    /// `(n, d, algorithm, seed)` in the order the values are listed.
    pub fn sweep_specs(&self) -> Result<Vec<RunSpec>> {
        let Some(axes) = &self.sweep else {
            bail!("config has no sweep section");
        };
        fn axis<T: Clone>(name: &str, values: &Option<Vec<T>>, base: T) -> Result<Vec<T>> {
            match values {
                None => Ok(vec![base]),
                Some(v) if v.is_empty() => bail!("sweep axis '{name}' is empty"),
                Some(v) => Ok(v.clone()),
            }
        }
        if axes.n.is_none() && axes.d.is_none() && axes.algorithm.is_none() && axes.seed.is_none() {
            bail!("sweep section names no axis");
        }
        let ns = axis("n", &axes.n, self.n)?;
        let ds = axis("d", &axes.d, self.d)?;
        let algs = axis("algorithm", &axes.algorithm, self.algorithm)?;
        let seeds = axis("seed", &axes.seed, self.seed)?;
        let mut specs = Vec::with_capacity(ns.len() * ds.len() * algs.len() * seeds.len());
        for &n in &ns {
            for &d in &ds {
                for &algorithm in &algs {
                    for &seed in &seeds {
                        let spec = RunSpec {
                            n,
                            d,
                            algorithm,
                            seed,
                            ..self.to_run_spec()
                        };
                        spec.validate()
                            .and_then(|_| spec.build_pattern().map(|_| ()))
                            .with_context(|| format!("sweep scenario n={n} d={d} algorithm={algorithm} seed={seed}"))?;
                        specs.push(spec);
                    }
                }
            }
        }
        Ok(specs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "n": 3, "d": 1, "algorithm": "midpoint",
        "pattern": {"kind": "complete"}, "epsilon": 1e-3
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.outputs, Outputs::default());
        assert!(c.audits.safeness && !c.audits.moreau);
        assert_eq!(c.initial, InitialConfig::UniformBox { seed: None });
        assert!(c.sweep.is_none());
        c.checked_run_spec().unwrap();
    }

    #[test]
    fn round_trip_is_identity() {
        let full = r#"{
            "n": 4, "d": 2, "algorithm": "centroid+amortized:3",
            "options": {"frame_reduction": false},
            "pattern": {"kind": "random-rooted", "seed": 5},
            "initial": {"kind": "dyadic-box", "bits": 20},
            "epsilon": 1e-4, "max_rounds": 77, "seed": 12,
            "outputs": {"trace": "x.csv"},
            "audits": {"matrices": true, "moreau": true, "moreau_window": 4},
            "sweep": {"n": [4, 6], "seed": [1, 2, 3]}
        }"#;
        for text in [MINIMAL, full] {
            let a = ScenarioConfig::parse(text).unwrap();
            let b = ScenarioConfig::parse(&a.to_json()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.to_json(), b.to_json());
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for bad in [
            MINIMAL.replace("\"n\": 3", "\"n\": 3, \"agents\": 3"),
            MINIMAL.replace("\"kind\": \"complete\"", "\"kind\": \"complete\", \"p\": 1"),
            MINIMAL.replace("\"epsilon\": 1e-3", "\"epsilon\": 1e-3, \"audits\": {\"safety\": true}"),
        ] {
            assert!(ScenarioConfig::parse(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_order_is_lexicographic() {
        let mut c = ScenarioConfig::parse(MINIMAL).unwrap();
        c.algorithm = "extreme-point".parse().unwrap();
        c.sweep = Some(SweepAxes {
            n: Some(vec![5, 3]),
            d: Some(vec![1, 2]),
            seed: Some(vec![9, 8]),
            ..SweepAxes::default()
        });
        let got: Vec<(usize, usize, u64)> = c.sweep_specs().unwrap().iter().map(|s| (s.n, s.d, s.seed)).collect();
        assert_eq!(
            got,
            [(5, 1, 9), (5, 1, 8), (5, 2, 9), (5, 2, 8), (3, 1, 9), (3, 1, 8), (3, 2, 9), (3, 2, 8)]
        );
    }

    #[test]
    fn bad_sweeps_are_rejected() {
        let mut c = ScenarioConfig::parse(MINIMAL).unwrap();
        assert!(c.sweep_specs().is_err());
        c.sweep = Some(SweepAxes::default());
        assert!(c.sweep_specs().is_err());
        c.sweep = Some(SweepAxes { n: Some(vec![]), ..SweepAxes::default() });
        assert!(c.sweep_specs().is_err());
        // midpoint is one-dimensional
        c.sweep = Some(SweepAxes { d: Some(vec![1, 2]), ..SweepAxes::default() });
        assert!(c.sweep_specs().is_err());
    }
}
