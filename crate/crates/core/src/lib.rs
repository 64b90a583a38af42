//! Tree-structured Bayesian networks learned from wafer bin maps, their
//! amplitude encoding on a statevector simulator, and amplitude-estimation
//! based inference and classification checked against exact classical
//! inference.

pub mod bayesnet;
pub mod chowliu;
pub mod classifier;
pub mod error;
pub mod qae;
pub mod qbi;
pub mod qsim;
pub mod speedup;
pub mod synth;
pub mod wbm;

pub use bayesnet::{Assignment, BayesianNetwork, Cpt, NodeId, Posterior, TopologicalOrder};
pub use error::{Error, Result};
pub use wbm::{DefectLabel, FlatSample};
