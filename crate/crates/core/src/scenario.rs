//! Scenario files: the JSON document that names a hierarchy, an optional
//! generator fleet, and simulation settings. All indices in files are
//! 1-based; unknown fields are rejected at parse time.

use crate::dde_sim::SimOptions;
use crate::hierarchy::{
    validate, GroupEdge, GroupSpec, HierarchySpec, LayerSpec, ValidationReport, Violation,
};
use crate::powershare::GeneratorFleet;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Physical weights a_i; may be omitted when `generators` supplies
    /// the maximum powers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical_weights: Option<Vec<f64>>,
    pub layers: Vec<LayerFile>,
    pub hop_delays: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<GeneratorFile>>,
    /// Total demand in MW; defaults to the initial supply.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<f64>,
    /// Initial state when no fleet is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    pub groups: Vec<GroupFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collecting: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub size: usize,
    /// Unordered 1-based index pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<[usize; 2]>,
    /// Parallel to `edges`; all ones when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub p_max: f64,
    pub p_init: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub align_activation: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

/// A scenario after semantic checks: the hierarchy spec, the optional
/// fleet, the initial state and the simulation options, plus a record of
/// which simulation settings fell back to defaults.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: HierarchySpec,
    pub fleet: Option<GeneratorFleet>,
    pub initial_state: Option<Vec<f64>>,
    pub sim: SimOptions,
    pub defaults_applied: Vec<&'static str>,
    pub output: OutputFile,
}

impl ScenarioFile {
    /// Semantic build: converts 1-based indices, resolves the fleet and
    /// weights, and runs full validation. Every problem is reported as a
    /// violation; none aborts the collection.
    pub fn build(&self) -> Result<Scenario, ValidationReport> {
        let mut violations = Vec::new();

        let mut layers = Vec::with_capacity(self.layers.len());
        for (li, lf) in self.layers.iter().enumerate() {
            let mut groups = Vec::with_capacity(lf.groups.len());
            for (gi, gf) in lf.groups.iter().enumerate() {
                let mut edges = Vec::with_capacity(gf.edges.len());
                if let Some(w) = &gf.edge_weights {
                    if w.len() != gf.edges.len() {
                        violations.push(Violation {
                            layer: Some(li + 1),
                            group: Some(gi + 1),
                            field: "edge_weights",
                            message: format!("{} weights for {} edges", w.len(), gf.edges.len()),
                        });
                    }
                }
                for (ei, &[q, r]) in gf.edges.iter().enumerate() {
                    if q == 0 || r == 0 {
                        violations.push(Violation {
                            layer: Some(li + 1),
                            group: Some(gi + 1),
                            field: "edges",
                            message: format!("edge ({q}, {r}) uses 1-based indices"),
                        });
                        continue;
                    }
                    let weight = gf
                        .edge_weights
                        .as_ref()
                        .and_then(|w| w.get(ei).copied())
                        .unwrap_or(1.0);
                    edges.push(GroupEdge {
                        a: q - 1,
                        b: r - 1,
                        weight,
                    });
                }
                groups.push(GroupSpec {
                    size: gf.size,
                    edges,
                });
            }
            layers.push(LayerSpec {
                groups,
                collecting: lf.collecting.clone(),
            });
        }

        // physical weights: explicit, from the fleet, or both (must agree)
        let fleet = self.generators.as_ref().map(|gens| {
            let max_power: Vec<f64> = gens.iter().map(|g| g.p_max).collect();
            let initial_power: Vec<f64> = gens.iter().map(|g| g.p_init).collect();
            let demand = self.demand.unwrap_or_else(|| initial_power.iter().sum());
            GeneratorFleet::new(max_power, initial_power, demand)
        });
        let physical_weights = match (&self.physical_weights, &fleet) {
            (Some(w), Some(f)) => {
                let agree = w.len() == f.max_power.len()
                    && w.iter()
                        .zip(&f.max_power)
                        .all(|(a, b)| (a - b).abs() <= 1e-12);
                if !agree {
                    violations.push(Violation {
                        layer: None,
                        group: None,
                        field: "physical_weights",
                        message: "physical_weights disagree with generator p_max".into(),
                    });
                }
                w.clone()
            }
            (Some(w), None) => w.clone(),
            (None, Some(f)) => f.max_power.clone(),
            (None, None) => {
                violations.push(Violation {
                    layer: None,
                    group: None,
                    field: "physical_weights",
                    message: "neither physical_weights nor generators given".into(),
                });
                Vec::new()
            }
        };

        let spec = HierarchySpec {
            layers,
            physical_weights,
            hop_delays: self.hop_delays.clone(),
        };
        violations.extend(validate(&spec).violations);

        if let Some(f) = &fleet {
            if let Err(e) = f.check() {
                violations.push(Violation {
                    layer: None,
                    group: None,
                    field: "generators",
                    message: e.to_string(),
                });
            }
        }

        let initial_state = match (&fleet, &self.initial_state) {
            (Some(f), None) => Some(
                f.initial_power
                    .iter()
                    .zip(&f.max_power)
                    .map(|(p, pm)| p / pm)
                    .collect(),
            ),
            (_, Some(x0)) => {
                if x0.len() != spec.physical_size() {
                    violations.push(Violation {
                        layer: None,
                        group: None,
                        field: "initial_state",
                        message: format!(
                            "{} entries for {} physical nodes",
                            x0.len(),
                            spec.physical_size()
                        ),
                    });
                }
                Some(x0.clone())
            }
            (None, None) => None,
        };

        if !violations.is_empty() {
            return Err(ValidationReport { violations });
        }

        let defaults = SimOptions::default();
        let sf = self.sim.clone().unwrap_or_default();
        let mut defaults_applied = Vec::new();
        if sf.step.is_none() {
            defaults_applied.push("step");
        }
        if sf.t_end.is_none() {
            defaults_applied.push("t_end");
        }
        if sf.stride.is_none() {
            defaults_applied.push("stride");
        }
        if sf.convergence_tol.is_none() {
            defaults_applied.push("convergence_tol");
        }
        if sf.window_fraction.is_none() {
            defaults_applied.push("window_fraction");
        }
        let sim = SimOptions {
            step: sf.step,
            t_end: sf.t_end.unwrap_or(defaults.t_end),
            stride: sf.stride.unwrap_or(defaults.stride),
            convergence_tol: sf.convergence_tol.unwrap_or(defaults.convergence_tol),
            window_fraction: sf.window_fraction.unwrap_or(defaults.window_fraction),
            align_activation: sf.align_activation.unwrap_or(defaults.align_activation),
            period_estimate: None,
        };

        Ok(Scenario {
            spec,
            fleet,
            initial_state,
            sim,
            defaults_applied,
            output: self.output.clone().unwrap_or_default(),
        })
    }
}

impl Scenario {
    /// Re-emits the scenario as a file document (1-based indices).
    pub fn to_file(&self) -> ScenarioFile {
        let layers = self
            .spec
            .layers
            .iter()
            .map(|l| LayerFile {
                groups: l
                    .groups
                    .iter()
                    .map(|g| GroupFile {
                        size: g.size,
                        edges: g.edges.iter().map(|e| [e.a + 1, e.b + 1]).collect(),
                        edge_weights: if g.edges.iter().all(|e| e.weight == 1.0) {
                            None
                        } else {
                            Some(g.edges.iter().map(|e| e.weight).collect())
                        },
                    })
                    .collect(),
                collecting: l.collecting.clone(),
            })
            .collect();
        ScenarioFile {
            physical_weights: if self.fleet.is_some() {
                None
            } else {
                Some(self.spec.physical_weights.clone())
            },
            layers,
            hop_delays: self.spec.hop_delays.clone(),
            generators: self.fleet.as_ref().map(|f| {
                f.max_power
                    .iter()
                    .zip(&f.initial_power)
                    .map(|(&p_max, &p_init)| GeneratorFile { p_max, p_init })
                    .collect()
            }),
            demand: self.fleet.as_ref().map(|f| f.demand),
            initial_state: if self.fleet.is_some() {
                None
            } else {
                self.initial_state.clone()
            },
            sim: Some(SimFile {
                step: self.sim.step,
                t_end: Some(self.sim.t_end),
                stride: Some(self.sim.stride),
                convergence_tol: Some(self.sim.convergence_tol),
                window_fraction: Some(self.sim.window_fraction),
                align_activation: Some(self.sim.align_activation),
            }),
            output: Some(self.output.clone()),
        }
    }
}
