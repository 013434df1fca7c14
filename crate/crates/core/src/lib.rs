//! Numerical certification of dominated (Anosov over a subflow) representations
//! of free groups into GL(d, R).

pub mod config;
pub mod domination;
pub mod error;
pub mod flow;
pub mod limit;
pub mod linalg;
pub mod reference;
pub mod report;
pub mod runner;
pub mod stats;
pub mod subset;
pub mod word;

pub use error::{Error, Result};
