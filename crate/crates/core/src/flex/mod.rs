//! Flexible EV charging: window constraints, emissions-signal scheduling and
//! evaluation of fixed charging schedules.

mod schedule;
mod window;

pub use schedule::{
    apply_fixed_schedule, cost_min_schedule, evaluate_fixed_schedule, evaluate_fixed_schedule_detailed,
    schedule_min_srme, with_flex_mode, write_schedule_csv, write_trace_csv, ChargingSchedule, IterationRecord,
    IterationTrace, LoadSchedule, ScheduleSource, ENERGY_TOLERANCE,
};
pub use window::{build_flex_constraints, FlexConstraintSet, FlexMode};

use crate::grid::GridError;
use crate::metrics::MetricsError;
use crate::planner::PlanError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlexError {
    #[error("charging window of load {load} cannot be met at hour {hour} under its rate cap")]
    InfeasibleWindow { load: String, hour: usize },
    #[error("schedule for load {load} delivers {actual} MWh but {expected} MWh are requested")]
    ScheduleMismatch { load: String, expected: f64, actual: f64 },
    #[error(transparent)]
    Plan(Box<PlanError>),
    #[error(transparent)]
    Metrics(Box<MetricsError>),
}

impl From<PlanError> for FlexError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Flex(inner) => inner,
            other => FlexError::Plan(Box::new(other)),
        }
    }
}

impl From<MetricsError> for FlexError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Plan(p) => p.into(),
            other => FlexError::Metrics(Box::new(other)),
        }
    }
}

impl From<GridError> for FlexError {
    fn from(e: GridError) -> Self {
        FlexError::Plan(Box::new(PlanError::Grid(e)))
    }
}
