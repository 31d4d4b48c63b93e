//! Automatic discovery of adversarial (SQL query, witness plan) pairs.
//!
//! The engine searches for pairs where a witness plan dramatically
//! outperforms the plan chosen by the built-in cost-based optimizer. The
//! search runs as Bayesian optimization over a continuous latent space
//! `R^320` whose coordinates quantize to total token codecs for queries
//! (256 tokens) and plans (64 tokens), so every point in the space decodes
//! to an executable pair. Discovered pairs export as a portable benchmark
//! suite with headroom reports.
//!
//! Module map:
//! - [`catalog`]: schema, data ingestion, statistics, synthetic data generator
//! - [`relational`]: conjunctive-query AST, plan executor, counting oracle
//! - [`optimizer`]: cardinality estimation and dynamic-programming join ordering
//! - [`plan_codec`] / [`query_codec`]: total integer-string codecs, SQL grammar
//! - [`latent`]: the `R^320` bridge between vectors and token strings
//! - [`gp`]: Gaussian-process surrogate with expected improvement
//! - [`bo`]: the outer optimization loop, archive, and checkpoints
//! - [`suite`]: benchmark selection, export, and headroom reporting

pub mod bo;
pub mod catalog;
pub mod gp;
pub mod latent;
pub mod optimizer;
pub mod plan_codec;
pub mod query_codec;
pub mod relational;
mod rng;
pub mod suite;

pub use catalog::{Catalog, ColumnRef, ColumnType, JoinEdge, Statistics, TableId, Value};
pub use latent::LatentVector;
pub use plan_codec::PlanTokenString;
pub use query_codec::QueryTokenString;
pub use relational::{CmpOp, ConjunctiveQuery, ExecutionResult, JoinOp, PhysicalPlan, Predicate};
