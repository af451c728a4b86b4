//! Verification of multi-qudit states with hybrid local dimensions.
//!
//! The pipeline is: build a state and its preparing unitary ([`states`]),
//! derive the generalized stabilizer group ([`stabilizer`]), pick a test
//! partition and optimize its weights ([`strategy`]), then check the
//! resulting pass statistics by sampling ([`simulate`]).

pub mod coloring;
pub mod error;
pub mod gates;
pub mod io;
pub mod lp;
pub mod qarith;
pub mod report;
pub mod qlinalg;
pub mod simulate;
pub mod stabilizer;
pub mod states;
pub mod strategy;

pub use error::{Error, Result};
pub use qarith::{ExponentTuple, HybridDims};
pub use qlinalg::{ComplexMatrix, StateVector, C64};
pub use states::{build, BuiltState, GraphEdge, GraphKind, GraphSpec, StateSpec};
pub use strategy::{Rational, TestPartition, VerificationOperator};
