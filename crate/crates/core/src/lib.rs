//! Capacity bounds, secure-storage codes and CSS validation for heterogeneous
//! quantum storage graphs.

pub mod codes;
pub mod composer;
pub mod galois;
pub mod graph;
pub mod matrix;
pub mod quantum;
pub mod rational;

pub use codes::{CodeError, SecureCode, VerificationReport};
pub use composer::{AchievabilityPlan, PlanError};
pub use galois::{FieldElement, FieldSpec, Gf};
pub use graph::{BoundCertificate, GraphError, StorageGraph};
pub use matrix::{MatrixFq, SubspaceDecomposition};
pub use quantum::{CosetState, RecoveryCertificate};
pub use rational::Rational;
