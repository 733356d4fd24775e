pub mod flex;
pub mod grid;
pub mod io;
pub mod lp;
pub mod metrics;
pub mod planner;
pub mod sweep;
