//! Patient-flow simulator: autoregressive arrivals, unit transitions, nurse
//! demand, adaptive capacity and rolling-estimate training forecasts.

mod arrivals;
mod capacity;
mod census;
mod forecast;
mod io;
mod testing;
mod training;

pub use arrivals::{generate_arrival_rates, surge_factor, ArrivalModelParams, ArrivalSeries, SurgeShape};
pub use capacity::{generate_capacity, CapacityParams, CapacitySchedule};
pub use census::{
    census_step, multinomial, nurse_demand, simulate_census, steady_state_census, CensusState, CensusTrajectory, DayFlows,
    NurseRatios, TransitionMatrix, TransitionModel, ADJUSTED_TRANSITIONS, ARRIVAL_SPLIT, DISCHARGE, ESTIMATED_TRANSITIONS,
    UNITS, UNIT_NAMES,
};
pub use io::{read_capacity_csv, read_demand_csv, read_trace_csv, write_capacity_csv, write_demand_csv, write_trace_csv, LongRecord};
pub use testing::{generate_testing_path, settled_day_levels, SimulatorConfig, TestingPath, AR_COEFFICIENTS, DAY_OF_WEEK_PROFILE, SITE_LEVELS};
pub use training::{estimate_rolling_params, generate_training_paths, FlowEstimates, PatientTrace};
pub use forecast::RollingForecaster;
