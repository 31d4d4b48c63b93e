//! Conjunctive-query AST, physical plans, and execution.
//!
//! Queries are ungrouped `COUNT(*)` over equijoins and AND-ed comparison
//! predicates. Execution returns the count plus a deterministic work-unit
//! cost, the reproducible latency proxy used everywhere instead of wall
//! clock.

mod exec;
mod oracle;
mod plan;
mod query;

pub use exec::{execute_plan, ExecError, ExecMode, ExecutionResult, DEFAULT_WORK_CAP};
pub use oracle::{naive_count_oracle, OracleError, DEFAULT_CROSS_PRODUCT_BOUND};
pub use plan::{JoinOp, PhysicalPlan, PlanError};
pub use query::{validate_query, CmpOp, ConjunctiveQuery, Predicate, Violation};
