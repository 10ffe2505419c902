//! Power-sharing application: generators are the physical nodes, their
//! maximum outputs are the physical weights, and the consensus variable
//! is the output ratio p_i / p_max_i. Conservation of 1'K x is then
//! exactly conservation of total generated power.

use crate::dde_sim::{Classification, Trajectory};
use crate::hierarchy::{GroupSpec, HierarchySpec, LayerSpec};
use serde::Serialize;
use thiserror::Error;

/// Supply-demand balance tolerance on the initial condition, in MW.
pub const BALANCE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FleetError {
    #[error("generator {index}: max power {p_max} must be positive")]
    NonpositiveMax { index: usize, p_max: f64 },
    #[error("generator {index}: initial power {p_init} outside [0, {p_max}]")]
    InitialOutOfRange {
        index: usize,
        p_init: f64,
        p_max: f64,
    },
    #[error("initial supply {supply} MW misses demand {demand} MW by {deficit} MW")]
    Imbalanced {
        supply: f64,
        demand: f64,
        deficit: f64,
    },
    #[error("fleet has {got} generators but the topology has {want} physical nodes")]
    SizeMismatch { got: usize, want: usize },
}

/// A fleet of generators with an aggregate demand to share.
#[derive(Clone, Debug)]
pub struct GeneratorFleet {
    pub max_power: Vec<f64>,
    pub initial_power: Vec<f64>,
    pub demand: f64,
}

impl GeneratorFleet {
    pub fn new(max_power: Vec<f64>, initial_power: Vec<f64>, demand: f64) -> Self {
        GeneratorFleet {
            max_power,
            initial_power,
            demand,
        }
    }

    pub fn check(&self) -> Result<(), FleetError> {
        for (i, (&p, &pm)) in self.initial_power.iter().zip(&self.max_power).enumerate() {
            if !pm.is_finite() || pm <= 0.0 {
                return Err(FleetError::NonpositiveMax {
                    index: i,
                    p_max: pm,
                });
            }
            if !(0.0..=pm).contains(&p) {
                return Err(FleetError::InitialOutOfRange {
                    index: i,
                    p_init: p,
                    p_max: pm,
                });
            }
        }
        let supply: f64 = self.initial_power.iter().sum();
        if (supply - self.demand).abs() > BALANCE_TOL {
            return Err(FleetError::Imbalanced {
                supply,
                demand: self.demand,
                deficit: self.demand - supply,
            });
        }
        Ok(())
    }
}

/// Binds a fleet to a hierarchy topology: the physical weights become the
/// maximum powers and the initial state is the vector of output ratios.
pub fn build_scenario(
    fleet: &GeneratorFleet,
    layers: Vec<LayerSpec>,
    hop_delays: Vec<f64>,
) -> Result<(HierarchySpec, Vec<f64>), FleetError> {
    fleet.check()?;
    let n: usize = layers.first().map_or(0, |l| l.node_count());
    if fleet.max_power.len() != n {
        return Err(FleetError::SizeMismatch {
            got: fleet.max_power.len(),
            want: n,
        });
    }
    let x0 = fleet
        .initial_power
        .iter()
        .zip(&fleet.max_power)
        .map(|(p, pm)| p / pm)
        .collect();
    Ok((
        HierarchySpec {
            layers,
            physical_weights: fleet.max_power.clone(),
            hop_delays,
        },
        x0,
    ))
}

/// Power-sharing outcome of a classified trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct PowerReport {
    pub classification: Classification,
    /// Final output ratios x(t_end).
    #[serde(rename = "final_ratio")]
    pub final_ratios: Vec<f64>,
    /// Final powers K x(t_end) in MW.
    pub final_powers: Vec<f64>,
    /// max_t |total power - demand| in MW.
    pub balance_max_dev: f64,
}

/// Maps a trajectory back to powers and checks the balance over time.
pub fn power_report(traj: &Trajectory, fleet: &GeneratorFleet) -> PowerReport {
    let final_ratios = traj.final_state().to_vec();
    let final_powers: Vec<f64> = final_ratios
        .iter()
        .zip(&fleet.max_power)
        .map(|(x, pm)| x * pm)
        .collect();
    let balance_max_dev = traj
        .states
        .iter()
        .map(|x| {
            let total: f64 = x.iter().zip(&fleet.max_power).map(|(xi, pm)| xi * pm).sum();
            (total - fleet.demand).abs()
        })
        .fold(0.0_f64, f64::max);
    PowerReport {
        classification: traj.classification,
        final_ratios,
        final_powers,
        balance_max_dev,
    }
}

/// The canonical three-layer, six-generator scenario.
///
/// Physical groups {1,2,3} (path), {4}, {5,6}; second layer {1,2} + {3};
/// one top group of two. With the reference generator capacities the
/// aggregated weights come out (3, 1, 2) and (4, 2), which pins the layer
/// eigenvalue maxima at 4/3 and 0.75.
pub fn fig1_spec(hop_delays: &[f64]) -> HierarchySpec {
    HierarchySpec {
        layers: fig1_layers(),
        physical_weights: fig1_fleet().max_power,
        hop_delays: hop_delays.to_vec(),
    }
}

pub fn fig1_layers() -> Vec<LayerSpec> {
    vec![
        LayerSpec::new(vec![
            GroupSpec::new(3, &[(0, 1), (1, 2)]),
            GroupSpec::new(1, &[]),
            GroupSpec::new(2, &[(0, 1)]),
        ]),
        LayerSpec::new(vec![GroupSpec::new(2, &[(0, 1)]), GroupSpec::new(1, &[])]),
        LayerSpec::new(vec![GroupSpec::new(2, &[(0, 1)])]),
    ]
}

pub fn fig1_fleet() -> GeneratorFleet {
    GeneratorFleet::new(
        vec![0.8, 0.7, 1.5, 1.0, 0.8, 1.2],
        vec![0.24, 0.56, 0.9, 0.9, 0.56, 0.24],
        3.4,
    )
}

/// Initial output ratios of the fig1 fleet.
pub fn fig1_x0() -> Vec<f64> {
    vec![0.3, 0.8, 0.6, 0.9, 0.7, 0.2]
}
