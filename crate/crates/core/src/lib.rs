//! Exact solvers, reductions and witness audits for circular string
//! consensus, shift-based multiple sequence comparison and DTW means.

pub mod bundle;
pub mod ccs;
pub mod costfn;
pub mod cyclic;
pub mod dtw;
pub mod error;
pub mod io;
pub mod mscs;
pub mod rational;
pub mod reductions;
pub mod rmcc;
pub mod verify;

pub use error::{Error, Guard, Result};
pub use rational::Rational;
