//! Physical plans: binary join trees over predicate-pushed scans.
//!
//! Plans keep a canonical child orientation — the subtree containing the
//! smaller minimum table index is always the left child — so a given join
//! structure has exactly one tree representation. The derived `Ord` is the
//! canonical plan serialization order used for deterministic tie-breaking.

use super::query::{ConjunctiveQuery, Predicate};
use crate::catalog::{Catalog, JoinEdge, TableId, Value};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Join operator vocabulary. Hash joins differ by build side; the nested
/// loop treats its left child as the outer input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum JoinOp {
    HashBuildLeft,
    HashBuildRight,
    NestedLoop,
}

impl JoinOp {
    /// Codec order: token operator index 0, 1, 2.
    pub const ALL: [JoinOp; 3] = [JoinOp::HashBuildLeft, JoinOp::HashBuildRight, JoinOp::NestedLoop];

    pub fn name(self) -> &'static str {
        match self {
            JoinOp::HashBuildLeft => "hash_join_build_left",
            JoinOp::HashBuildRight => "hash_join_build_right",
            JoinOp::NestedLoop => "nested_loop_join",
        }
    }
}

/// A physical plan: leaves scan base tables with all applicable predicates
/// pushed down, internal nodes join two subtrees on the equijoin edges
/// connecting them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhysicalPlan {
    Scan {
        table: TableId,
        predicates: Vec<Predicate>,
    },
    Join {
        op: JoinOp,
        edges: Vec<JoinEdge>,
        left: Box<PhysicalPlan>,
        right: Box<PhysicalPlan>,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("plan leaves do not match the query's tables")]
    LeafMismatch,
    #[error("table appears more than once in the plan")]
    DuplicateTable,
    #[error("join node carries no connecting edge (cross product)")]
    CrossProduct,
    #[error("join node edges differ from the query edges crossing the cut")]
    EdgeMismatch,
    #[error("scan predicates differ from the query's predicates for that table")]
    PredicateMismatch,
    #[error("children are not in canonical orientation")]
    NotCanonical,
}

impl PhysicalPlan {
    pub fn scan(table: TableId, predicates: Vec<Predicate>) -> PhysicalPlan {
        let mut predicates = predicates;
        predicates.sort();
        predicates.dedup();
        PhysicalPlan::Scan { table, predicates }
    }

    /// Joins two subtrees, orienting children canonically and sorting edges.
    pub fn join(op: JoinOp, a: PhysicalPlan, b: PhysicalPlan, mut edges: Vec<JoinEdge>) -> PhysicalPlan {
        edges.sort();
        edges.dedup();
        let (left, right) =
            if a.min_table() <= b.min_table() { (a, b) } else { (b, a) };
        PhysicalPlan::Join { op, edges, left: Box::new(left), right: Box::new(right) }
    }

    pub fn min_table(&self) -> TableId {
        match self {
            PhysicalPlan::Scan { table, .. } => *table,
            PhysicalPlan::Join { left, right, .. } => left.min_table().min(right.min_table()),
        }
    }

    pub fn tables(&self) -> BTreeSet<TableId> {
        let mut out = BTreeSet::new();
        self.collect_tables(&mut out);
        out
    }

    fn collect_tables(&self, out: &mut BTreeSet<TableId>) {
        match self {
            PhysicalPlan::Scan { table, .. } => {
                out.insert(*table);
            }
            PhysicalPlan::Join { left, right, .. } => {
                left.collect_tables(out);
                right.collect_tables(out);
            }
        }
    }

    pub fn join_count(&self) -> usize {
        match self {
            PhysicalPlan::Scan { .. } => 0,
            PhysicalPlan::Join { left, right, .. } => 1 + left.join_count() + right.join_count(),
        }
    }

    /// Checks that this plan executes exactly `q`: leaves are `q`'s tables
    /// once each with `q`'s predicates pushed down, and every join node
    /// carries exactly the query edges crossing its cut.
    pub fn validate_for(&self, q: &ConjunctiveQuery) -> Result<(), PlanError> {
        let mut seen = BTreeSet::new();
        self.validate_node(q, &mut seen)?;
        if seen.len() != q.tables().len() || !q.tables().iter().all(|t| seen.contains(t)) {
            return Err(PlanError::LeafMismatch);
        }
        Ok(())
    }

    fn validate_node(&self, q: &ConjunctiveQuery, seen: &mut BTreeSet<TableId>) -> Result<(), PlanError> {
        match self {
            PhysicalPlan::Scan { table, predicates } => {
                if !seen.insert(*table) {
                    return Err(PlanError::DuplicateTable);
                }
                if *predicates != q.predicates_of(*table) {
                    return Err(PlanError::PredicateMismatch);
                }
                Ok(())
            }
            PhysicalPlan::Join { edges, left, right, .. } => {
                left.validate_node(q, seen)?;
                right.validate_node(q, seen)?;
                if left.min_table() > right.min_table() {
                    return Err(PlanError::NotCanonical);
                }
                let lt = left.tables();
                let rt = right.tables();
                let mut crossing: Vec<JoinEdge> = q
                    .joins()
                    .iter()
                    .filter(|e| {
                        (lt.contains(&e.left.table) && rt.contains(&e.right.table))
                            || (rt.contains(&e.left.table) && lt.contains(&e.right.table))
                    })
                    .copied()
                    .collect();
                crossing.sort();
                if crossing.is_empty() {
                    return Err(PlanError::CrossProduct);
                }
                if *edges != crossing {
                    return Err(PlanError::EdgeMismatch);
                }
                Ok(())
            }
        }
    }

    /// Stable s-expression rendering, the documented plan-text format.
    pub fn render(&self, catalog: &Catalog) -> String {
        let mut out = String::new();
        self.render_into(catalog, &mut out);
        out
    }

    fn render_into(&self, catalog: &Catalog, out: &mut String) {
        match self {
            PhysicalPlan::Scan { table, predicates } => {
                out.push_str("(scan ");
                out.push_str(catalog.table_name(*table));
                for p in predicates {
                    out.push_str(" (");
                    out.push_str(&catalog.column_name(p.column));
                    out.push(' ');
                    out.push_str(p.op.symbol());
                    out.push(' ');
                    out.push_str(&render_literal(&p.literal));
                    out.push(')');
                }
                out.push(')');
            }
            PhysicalPlan::Join { op, edges, left, right } => {
                out.push('(');
                out.push_str(op.name());
                for e in edges {
                    out.push_str(" (on ");
                    out.push_str(&catalog.column_name(e.left));
                    out.push_str(" = ");
                    out.push_str(&catalog.column_name(e.right));
                    out.push(')');
                }
                out.push(' ');
                left.render_into(catalog, out);
                out.push(' ');
                right.render_into(catalog, out);
                out.push(')');
            }
        }
    }
}

pub(crate) fn render_literal(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Str(s) => format!("'{}'", s.replace('\'', "''")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::tests_support::chain_catalog;
    use crate::catalog::{ColumnId, ColumnRef};
    use crate::relational::query::CmpOp;

    fn chain_query(cat: &Catalog, n: usize) -> ConjunctiveQuery {
        ConjunctiveQuery::new(
            (0..n).map(TableId),
            cat.join_graph().iter().copied().take(n - 1),
            [],
        )
    }

    #[test]
    fn canonical_orientation_puts_smaller_min_left() {
        let cat = chain_catalog(3);
        let q = chain_query(&cat, 3);
        let bc = PhysicalPlan::join(
            JoinOp::HashBuildLeft,
            PhysicalPlan::scan(TableId(2), vec![]),
            PhysicalPlan::scan(TableId(1), vec![]),
            vec![cat.join_graph()[1]],
        );
        match &bc {
            PhysicalPlan::Join { left, .. } => assert_eq!(left.min_table(), TableId(1)),
            _ => unreachable!(),
        }
        let full = PhysicalPlan::join(
            JoinOp::NestedLoop,
            bc,
            PhysicalPlan::scan(TableId(0), vec![]),
            vec![cat.join_graph()[0]],
        );
        assert!(full.validate_for(&q).is_ok());
        match &full {
            PhysicalPlan::Join { left, .. } => assert_eq!(left.min_table(), TableId(0)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn cross_product_is_rejected() {
        let cat = chain_catalog(3);
        let q = chain_query(&cat, 3);
        // Join t0 with t2 first: no query edge crosses that cut.
        let bad = PhysicalPlan::join(
            JoinOp::HashBuildLeft,
            PhysicalPlan::scan(TableId(0), vec![]),
            PhysicalPlan::scan(TableId(2), vec![]),
            vec![],
        );
        let bad = PhysicalPlan::join(
            JoinOp::HashBuildLeft,
            bad,
            PhysicalPlan::scan(TableId(1), vec![]),
            cat.join_graph().to_vec(),
        );
        assert_eq!(bad.validate_for(&q), Err(PlanError::CrossProduct));
    }

    #[test]
    fn render_is_stable() {
        let cat = chain_catalog(2);
        let q = ConjunctiveQuery::new(
            [TableId(0), TableId(1)],
            [cat.join_graph()[0]],
            [Predicate {
                column: ColumnRef { table: TableId(0), column: ColumnId(1) },
                op: CmpOp::Ge,
                literal: Value::Int(1),
            }],
        );
        let plan = PhysicalPlan::join(
            JoinOp::HashBuildRight,
            PhysicalPlan::scan(TableId(0), q.predicates_of(TableId(0))),
            PhysicalPlan::scan(TableId(1), vec![]),
            vec![cat.join_graph()[0]],
        );
        assert!(plan.validate_for(&q).is_ok());
        assert_eq!(
            plan.render(&cat),
            "(hash_join_build_right (on t0.id = t1.id) (scan t0 (t0.val >= 1)) (scan t1))"
        );
    }
}
