#![allow(dead_code)]

pub mod grids;
pub mod random_lp;
pub mod vertex;
