//! The baseline cost-based optimizer: estimated cardinalities plus exact
//! dynamic programming over connected subgraphs (bushy trees admitted).
//!
//! The estimator deliberately assumes predicate independence and uses the
//! classical `|L| x |R| / max(ndv_l, ndv_r)` join selectivity. Those are
//! the canonical estimation errors that correlated data exploits; the
//! search's job is to find where they hurt.
//!
//! Cardinality estimates are a function of the *table set*, not the tree
//! shape: products are accumulated in canonical (sorted) order. That makes
//! DP cost composition bit-identical to [`cost_plan`] on the chosen plan,
//! so DP optimality can be asserted with exact equality against exhaustive
//! enumeration.

use crate::catalog::{ColumnStats, JoinEdge, Statistics, TableId, Value};
use crate::relational::{CmpOp, ConjunctiveQuery, JoinOp, PhysicalPlan, Predicate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// An estimated row count; finite and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardinalityEstimate {
    pub rows: f64,
}

/// A plan with the estimator's view of its cost and output size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostedPlan {
    pub plan: PhysicalPlan,
    pub estimated_cost: f64,
    pub estimated_rows: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OptimizerError {
    #[error("query is invalid: {0}")]
    InvalidQuery(String),
    #[error("statistics missing for the catalog")]
    MissingStats,
}

/// Selectivity of one predicate from the column's histogram. Equality uses
/// the classical `1/ndv` inside the histogram range and 0 outside; ranges
/// use interpolated bucket mass.
fn selectivity(op: CmpOp, literal: &Value, cs: &ColumnStats) -> f64 {
    if cs.row_count == 0 {
        return 0.0;
    }
    let eq = if cs.histogram.contains(literal) { 1.0 / cs.distinct_count.max(1) as f64 } else { 0.0 };
    let below = cs.histogram.fraction_below(literal);
    let sel = match op {
        CmpOp::Eq => eq,
        CmpOp::Ne => 1.0 - eq,
        CmpOp::Lt => below,
        CmpOp::Ge => 1.0 - below,
        CmpOp::Le => below + eq,
        CmpOp::Gt => 1.0 - (below + eq),
    };
    sel.clamp(0.0, 1.0)
}

/// Estimated rows of one base table after its predicates, floored at one
/// row unless the table is truly empty. Predicates multiply independently.
pub fn estimate_base(table: TableId, predicates: &[Predicate], stats: &Statistics) -> f64 {
    let ts = stats.table(table);
    if ts.row_count == 0 {
        return 0.0;
    }
    let mut rows = ts.row_count as f64;
    for p in predicates {
        rows *= selectivity(p.op, &p.literal, stats.column(p.column));
    }
    rows.max(1.0)
}

/// Estimated rows of a connected table set: base estimates times one
/// `1/max(ndv)` factor per join edge, accumulated in canonical order so the
/// value is independent of any plan shape.
pub fn estimate_set(
    tables: &[TableId],
    edges: &[JoinEdge],
    predicates: &[Predicate],
    stats: &Statistics,
) -> f64 {
    let mut rows = 1.0f64;
    for &t in tables {
        let preds: Vec<Predicate> =
            predicates.iter().filter(|p| p.column.table == t).cloned().collect();
        let base = estimate_base(t, &preds, stats);
        if base == 0.0 {
            return 0.0;
        }
        rows *= base;
    }
    for e in edges {
        let dl = stats.column(e.left).distinct_count.max(1);
        let dr = stats.column(e.right).distinct_count.max(1);
        rows /= dl.max(dr) as f64;
    }
    rows.max(1.0)
}

/// Public estimator surface: a table set with predicates (a join subtree's
/// signature) to an estimated cardinality.
pub fn estimate_cardinality(
    tables: &[TableId],
    edges: &[JoinEdge],
    predicates: &[Predicate],
    stats: &Statistics,
) -> CardinalityEstimate {
    CardinalityEstimate { rows: estimate_set(tables, edges, predicates, stats) }
}

/// Work-unit formula applied to estimated inputs and output.
pub(crate) fn join_work(op: JoinOp, left: f64, right: f64, output: f64) -> f64 {
    match op {
        JoinOp::HashBuildLeft | JoinOp::HashBuildRight => left + right + output,
        JoinOp::NestedLoop => left * right + output,
    }
}

/// Costs an existing plan under the estimator: the execution work-unit
/// formulas applied to estimated (not actual) cardinalities.
pub fn cost_plan(plan: &PhysicalPlan, stats: &Statistics) -> CostedPlan {
    let (estimated_cost, estimated_rows, ..) = cost_node(plan, stats);
    CostedPlan { plan: plan.clone(), estimated_cost, estimated_rows }
}

fn cost_node(plan: &PhysicalPlan, stats: &Statistics) -> (f64, f64, Vec<TableId>, Vec<JoinEdge>, Vec<Predicate>) {
    match plan {
        PhysicalPlan::Scan { table, predicates } => {
            let cost = stats.table(*table).row_count as f64;
            let est = estimate_base(*table, predicates, stats);
            (cost, est, vec![*table], vec![], predicates.clone())
        }
        PhysicalPlan::Join { op, edges, left, right } => {
            let (cl, el, tl, gl, pl) = cost_node(left, stats);
            let (cr, er, tr, gr, pr) = cost_node(right, stats);
            let mut tables = tl;
            tables.extend(tr);
            tables.sort();
            let mut all_edges = gl;
            all_edges.extend(gr);
            all_edges.extend(edges.iter().copied());
            all_edges.sort();
            all_edges.dedup();
            let mut preds = pl;
            preds.extend(pr);
            preds.sort();
            let eout = estimate_set(&tables, &all_edges, &preds, stats);
            let cost = cl + cr + join_work(*op, el, er, eout);
            (cost, eout, tables, all_edges, preds)
        }
    }
}

/// Produces the default plan for a query: exact dynamic programming over
/// connected subsets, choosing the cheapest operator at each join, with
/// exact-cost ties broken by the canonical plan order.
pub fn optimize(q: &ConjunctiveQuery, stats: &Statistics) -> Result<CostedPlan, OptimizerError> {
    let n = q.tables().len();
    if n == 0 {
        return Err(OptimizerError::InvalidQuery("no tables".into()));
    }
    if !q.is_connected() {
        return Err(OptimizerError::InvalidQuery("disconnected join graph".into()));
    }
    if n > 20 {
        return Err(OptimizerError::InvalidQuery("too many tables for exact DP".into()));
    }
    let tables = q.tables();
    let bit_of: BTreeMap<TableId, usize> =
        tables.iter().enumerate().map(|(i, &t)| (t, i)).collect();

    struct Entry {
        plan: PhysicalPlan,
        cost: f64,
        est: f64,
    }
    let full: u64 = (1u64 << n) - 1;
    let mut best: Vec<Option<Entry>> = (0..=full).map(|_| None).collect();

    for (i, &t) in tables.iter().enumerate() {
        let preds = q.predicates_of(t);
        let plan = PhysicalPlan::scan(t, preds);
        let cost = stats.table(t).row_count as f64;
        let est = estimate_set(&[t], &[], q.predicates(), stats);
        best[1usize << i] = Some(Entry { plan, cost, est });
    }

    for s in 1..=full {
        if s.count_ones() < 2 || best[s as usize].is_some() {
            continue;
        }
        let member_tables: Vec<TableId> =
            tables.iter().enumerate().filter(|(i, _)| s >> i & 1 == 1).map(|(_, &t)| t).collect();
        let within: Vec<JoinEdge> = q
            .joins()
            .iter()
            .filter(|e| {
                bit_of.get(&e.left.table).is_some_and(|&b| s >> b & 1 == 1)
                    && bit_of.get(&e.right.table).is_some_and(|&b| s >> b & 1 == 1)
            })
            .copied()
            .collect();
        let est_s = estimate_set(&member_tables, &within, q.predicates(), stats);

        let low = s & s.wrapping_neg();
        let mut candidate: Option<Entry> = None;
        // Proper submasks containing the lowest bit, paired with their
        // complement; each unordered split is visited exactly once.
        let mut l = (s - 1) & s;
        while l > 0 {
            if l & low != 0 {
                let r = s ^ l;
                if let (Some(le), Some(re)) = (&best[l as usize], &best[r as usize]) {
                    let crossing: Vec<JoinEdge> = q
                        .joins()
                        .iter()
                        .filter(|e| {
                            let lb = bit_of[&e.left.table];
                            let rb = bit_of[&e.right.table];
                            (l >> lb & 1 == 1 && r >> rb & 1 == 1)
                                || (r >> lb & 1 == 1 && l >> rb & 1 == 1)
                        })
                        .copied()
                        .collect();
                    if !crossing.is_empty() {
                        for op in JoinOp::ALL {
                            let cost = le.cost + re.cost + join_work(op, le.est, re.est, est_s);
                            let better = match &candidate {
                                None => true,
                                Some(c) if cost < c.cost => true,
                                Some(c) if cost == c.cost => {
                                    let plan = PhysicalPlan::join(
                                        op,
                                        le.plan.clone(),
                                        re.plan.clone(),
                                        crossing.clone(),
                                    );
                                    plan < c.plan
                                }
                                _ => false,
                            };
                            if better {
                                let plan = PhysicalPlan::join(
                                    op,
                                    le.plan.clone(),
                                    re.plan.clone(),
                                    crossing.clone(),
                                );
                                candidate = Some(Entry { plan, cost, est: est_s });
                            }
                        }
                    }
                }
            }
            l = (l - 1) & s;
        }
        best[s as usize] = candidate;
    }

    let entry = best[full as usize]
        .take()
        .ok_or_else(|| OptimizerError::InvalidQuery("no connected plan".into()))?;
    Ok(CostedPlan { plan: entry.plan, estimated_cost: entry.cost, estimated_rows: entry.est })
}
