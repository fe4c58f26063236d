// NaN-rejecting checks are written as negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod envlab;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod network;
pub mod optim;
pub mod td;
pub mod rng;
pub mod spectral;

pub use error::{LabError, Result};
