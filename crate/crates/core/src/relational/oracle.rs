//! Independent counting oracle: direct enumeration of the cross product.
//!
//! No hashing, no join algorithms — tables are bound one at a time in a
//! connectivity-respecting order and every predicate is checked as soon as
//! its tables are bound (pruning a partial tuple early never changes the
//! enumerated set). Intended for small instances; refuses inputs whose raw
//! cross product exceeds the bound.

use super::query::ConjunctiveQuery;
use crate::catalog::{Catalog, ColumnData, JoinEdge, TableId};
use thiserror::Error;

/// Default refusal bound on the raw cross-product size.
pub const DEFAULT_CROSS_PRODUCT_BOUND: u128 = 1_000_000_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("cross product of {size} rows exceeds the oracle bound {bound}")]
    CrossProductExceeded { size: u128, bound: u128 },
}

/// Counts the query result by brute-force enumeration.
pub fn naive_count_oracle(
    q: &ConjunctiveQuery,
    catalog: &Catalog,
    bound: u128,
) -> Result<u64, OracleError> {
    let mut size: u128 = 1;
    for &t in q.tables() {
        size = size.saturating_mul(catalog.row_count(t) as u128);
    }
    if size > bound {
        return Err(OracleError::CrossProductExceeded { size, bound });
    }
    if q.tables().iter().any(|&t| catalog.row_count(t) == 0) {
        return Ok(0);
    }

    // Bind tables in a breadth-first order over the query's join graph so
    // join predicates apply as early as possible.
    let order = bind_order(q);
    let mut bound_rows: Vec<usize> = Vec::with_capacity(order.len());
    let mut count = 0u64;
    enumerate(q, catalog, &order, &mut bound_rows, &mut count);
    Ok(count)
}

fn bind_order(q: &ConjunctiveQuery) -> Vec<TableId> {
    let mut order = vec![q.tables()[0]];
    while order.len() < q.tables().len() {
        let next = q
            .tables()
            .iter()
            .find(|t| {
                !order.contains(t)
                    && q.joins().iter().any(|e| {
                        (e.left.table == **t && order.contains(&e.right.table))
                            || (e.right.table == **t && order.contains(&e.left.table))
                    })
            })
            .or_else(|| q.tables().iter().find(|t| !order.contains(t)));
        match next {
            Some(&t) => order.push(t),
            None => break,
        }
    }
    order
}

fn enumerate(
    q: &ConjunctiveQuery,
    catalog: &Catalog,
    order: &[TableId],
    bound_rows: &mut Vec<usize>,
    count: &mut u64,
) {
    let depth = bound_rows.len();
    if depth == order.len() {
        *count += 1;
        return;
    }
    let table = order[depth];
    let n = catalog.row_count(table) as usize;
    'rows: for row in 0..n {
        for p in q.predicates() {
            if p.column.table == table {
                let v = catalog.column_data(p.column).value(row);
                if !p.op.eval(&v, &p.literal) {
                    continue 'rows;
                }
            }
        }
        for e in q.joins() {
            if let Some(pos) = edge_check(e, table, order, depth) {
                let (other_table, this_cr, other_cr) = pos;
                let other_row = bound_rows[order.iter().position(|t| *t == other_table).unwrap()];
                if !values_equal(catalog.column_data(this_cr), row, catalog.column_data(other_cr), other_row)
                {
                    continue 'rows;
                }
            }
        }
        bound_rows.push(row);
        enumerate(q, catalog, order, bound_rows, count);
        bound_rows.pop();
    }
}

/// If `e` connects `table` to an already-bound table, returns
/// (other table, this endpoint, other endpoint).
fn edge_check(
    e: &JoinEdge,
    table: TableId,
    order: &[TableId],
    depth: usize,
) -> Option<(TableId, crate::catalog::ColumnRef, crate::catalog::ColumnRef)> {
    let (this_cr, other_cr) = if e.left.table == table {
        (e.left, e.right)
    } else if e.right.table == table {
        (e.right, e.left)
    } else {
        return None;
    };
    let other_table = other_cr.table;
    if order[..depth].contains(&other_table) {
        Some((other_table, this_cr, other_cr))
    } else {
        None
    }
}

fn values_equal(a: &ColumnData, arow: usize, b: &ColumnData, brow: usize) -> bool {
    match (a, b) {
        (ColumnData::Int(x), ColumnData::Int(y)) => x[arow] == y[brow],
        (ColumnData::Float(x), ColumnData::Float(y)) => x[arow] == y[brow],
        (ColumnData::Str(x), ColumnData::Str(y)) => x[arow] == y[brow],
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::tests_support::single_table_catalog;
    use crate::catalog::{Catalog, ColumnDef, ColumnId, ColumnRef, ColumnType, Table, TableDef};
    use crate::catalog::{ColumnData, Value};
    use crate::relational::query::{CmpOp, Predicate};

    fn ab_catalog(a: Vec<i64>, b: Vec<i64>) -> Catalog {
        let mk = |name: &str, col: &str, vals: Vec<i64>| Table {
            def: TableDef {
                name: name.into(),
                columns: vec![ColumnDef { name: col.into(), ty: ColumnType::Integer }],
                filterable: vec![ColumnId(0)],
            },
            data: vec![ColumnData::Int(vals)],
        };
        let edge = JoinEdge {
            left: ColumnRef { table: TableId(0), column: ColumnId(0) },
            right: ColumnRef { table: TableId(1), column: ColumnId(0) },
        };
        Catalog::from_parts(vec![mk("a", "x", a), mk("b", "y", b)], vec![edge]).unwrap()
    }

    #[test]
    fn counts_matching_pairs() {
        // A={1,2}, B={2,3}: of the 4 pairs only (2,2) matches.
        let cat = ab_catalog(vec![1, 2], vec![2, 3]);
        let q = ConjunctiveQuery::new(
            [TableId(0), TableId(1)],
            [cat.join_graph()[0]],
            [],
        );
        assert_eq!(naive_count_oracle(&q, &cat, DEFAULT_CROSS_PRODUCT_BOUND), Ok(1));
    }

    #[test]
    fn empty_table_gives_zero() {
        let cat = ab_catalog(vec![], vec![1, 2, 3]);
        let q = ConjunctiveQuery::new([TableId(0), TableId(1)], [cat.join_graph()[0]], []);
        assert_eq!(naive_count_oracle(&q, &cat, DEFAULT_CROSS_PRODUCT_BOUND), Ok(0));
    }

    #[test]
    fn single_table_predicate() {
        // {1,2,3,4} with v < 3: rows 1 and 2 pass.
        let cat = single_table_catalog(vec![1, 2, 3, 4]);
        let q = ConjunctiveQuery::new(
            [TableId(0)],
            [],
            [Predicate {
                column: ColumnRef { table: TableId(0), column: ColumnId(0) },
                op: CmpOp::Lt,
                literal: Value::Int(3),
            }],
        );
        assert_eq!(naive_count_oracle(&q, &cat, DEFAULT_CROSS_PRODUCT_BOUND), Ok(2));
    }

    #[test]
    fn refuses_oversized_cross_product() {
        let cat = ab_catalog((0..100).collect(), (0..100).collect());
        let q = ConjunctiveQuery::new([TableId(0), TableId(1)], [cat.join_graph()[0]], []);
        let err = naive_count_oracle(&q, &cat, 99).unwrap_err();
        assert_eq!(err, OracleError::CrossProductExceeded { size: 10_000, bound: 99 });
    }
}
