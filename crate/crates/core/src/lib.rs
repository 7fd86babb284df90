//! Active sub-Nyquist spectrum sensing.
//!
//! Plans which sub-bands to measure, alone or mixed into group tests, over a
//! finite horizon; evaluates closed-form expected utilities; simulates the
//! energy-detector observations; decides; and compares against static
//! compressive baselines.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod detection;
pub mod di;
pub mod error;
pub mod gt;
pub mod model;
pub mod oracle;
pub mod par;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    GroundTruth, Mode, Resource, ResourceEnsemble, SensingPlan, TestCycle, TrialRecord,
};
