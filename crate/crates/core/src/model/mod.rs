//! Domain types of the nurse transfer problem: the hospital network, cost
//! parameters, daily flow matrices and the secondment state machine.

mod cost;
mod flows;
mod network;
mod state;

pub use cost::{
    deployment_cost, planned_cost, secondment_length, CostParams, DeploymentCost, HorizonConfig,
};
pub(crate) use cost::{emergency_unit_cost, mu, planned_unit_cost};
pub use flows::{ArcFlows, DeploymentAction, PlannedPlan};
pub use network::{Arc, NetworkConfig, SecondmentScenario};
pub use state::{
    imbalance, imbalance_from_history, validate_capacity, validate_capacity_from, CapacityViolation,
    SecondmentState,
};
