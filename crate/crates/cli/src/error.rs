use gridmarg::flex::FlexError;
use gridmarg::grid::GridError;
use gridmarg::metrics::MetricsError;
use gridmarg::planner::PlanError;
use gridmarg::sweep::SweepError;
use std::fmt;
use std::process::ExitCode;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Input = 1,
    Infeasible = 2,
    Unbounded = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { exit: Exit::Input, message: message.into() }
    }

    pub fn code(&self) -> ExitCode {
        ExitCode::from(self.exit as u8)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn plan_exit(e: &PlanError) -> Exit {
    match e {
        PlanError::Infeasible { .. } => Exit::Infeasible,
        PlanError::Unbounded { .. } => Exit::Unbounded,
        PlanError::Flex(f) => flex_exit(f),
        _ => Exit::Input,
    }
}

fn metrics_exit(e: &MetricsError) -> Exit {
    match e {
        MetricsError::CostCapInfeasible | MetricsError::InfeasiblePerturbation { .. } => Exit::Infeasible,
        MetricsError::Plan(p) => plan_exit(p),
        _ => Exit::Input,
    }
}

fn flex_exit(e: &FlexError) -> Exit {
    match e {
        FlexError::InfeasibleWindow { .. } => Exit::Infeasible,
        FlexError::ScheduleMismatch { .. } => Exit::Input,
        FlexError::Plan(p) => plan_exit(p),
        FlexError::Metrics(m) => metrics_exit(m),
    }
}

macro_rules! from_error {
    ($ty:ty, $exit:expr) => {
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                #[allow(clippy::redundant_closure_call)]
                let exit = ($exit)(&e);
                CliError { exit, message: e.to_string() }
            }
        }
    };
}

from_error!(GridError, |_: &GridError| Exit::Input);
from_error!(SweepError, |_: &SweepError| Exit::Input);
from_error!(std::io::Error, |_: &std::io::Error| Exit::Input);
from_error!(csv::Error, |_: &csv::Error| Exit::Input);
from_error!(PlanError, plan_exit);
from_error!(MetricsError, metrics_exit);
from_error!(FlexError, flex_exit);
from_error!(serde_json::Error, |_: &serde_json::Error| Exit::Input);
