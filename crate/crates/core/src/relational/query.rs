//! The conjunctive-query AST and its validity rules.

use crate::catalog::{Catalog, ColumnRef, JoinEdge, TableId, Value};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Comparison operators of the subset, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Ne,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge, CmpOp::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Ne => "<>",
        }
    }

    pub fn eval(self, lhs: &Value, rhs: &Value) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One filter predicate `column op literal`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Predicate {
    pub column: ColumnRef,
    pub op: CmpOp,
    pub literal: Value,
}

/// A conjunctive query in canonical form: tables, joins, and predicates are
/// sorted and deduplicated at construction. The implicit projection is
/// always `COUNT(*)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConjunctiveQuery {
    tables: Vec<TableId>,
    joins: Vec<JoinEdge>,
    predicates: Vec<Predicate>,
}

impl ConjunctiveQuery {
    pub fn new(
        tables: impl IntoIterator<Item = TableId>,
        joins: impl IntoIterator<Item = JoinEdge>,
        predicates: impl IntoIterator<Item = Predicate>,
    ) -> ConjunctiveQuery {
        let mut tables: Vec<TableId> = tables.into_iter().collect();
        tables.sort();
        tables.dedup();
        let mut joins: Vec<JoinEdge> = joins.into_iter().collect();
        joins.sort();
        joins.dedup();
        let mut predicates: Vec<Predicate> = predicates.into_iter().collect();
        predicates.sort();
        predicates.dedup();
        ConjunctiveQuery { tables, joins, predicates }
    }

    pub fn single_table(table: TableId) -> ConjunctiveQuery {
        ConjunctiveQuery::new([table], [], [])
    }

    pub fn tables(&self) -> &[TableId] {
        &self.tables
    }

    pub fn joins(&self) -> &[JoinEdge] {
        &self.joins
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn predicates_of(&self, table: TableId) -> Vec<Predicate> {
        self.predicates.iter().filter(|p| p.column.table == table).cloned().collect()
    }

    pub fn table_set(&self) -> BTreeSet<TableId> {
        self.tables.iter().copied().collect()
    }

    /// Connectivity of (tables, joins), the defining structural invariant.
    pub fn is_connected(&self) -> bool {
        connected(&self.tables, &self.joins)
    }
}

pub(crate) fn connected(tables: &[TableId], joins: &[JoinEdge]) -> bool {
    let Some(&start) = tables.first() else { return false };
    let mut seen = BTreeSet::from([start]);
    let mut frontier = vec![start];
    while let Some(t) = frontier.pop() {
        for e in joins {
            if let Some(other) = e.other(t) {
                if tables.contains(&other.table) && seen.insert(other.table) {
                    frontier.push(other.table);
                }
            }
        }
    }
    seen.len() == tables.len()
}

/// A reason a query is invalid against a catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoTables,
    UnknownTable(TableId),
    Disconnected,
    JoinNotInGraph(JoinEdge),
    JoinOutsideTables(JoinEdge),
    PredicateTableNotSelected(ColumnRef),
    UnknownPredicateColumn(ColumnRef),
    NotFilterable(ColumnRef),
    LiteralTypeMismatch(ColumnRef),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoTables => write!(f, "query selects no tables"),
            Violation::UnknownTable(t) => write!(f, "table index {} does not exist", t.0),
            Violation::Disconnected => write!(f, "join graph of the query is disconnected"),
            Violation::JoinNotInGraph(e) => {
                write!(f, "join {:?} is not an edge of the catalog join graph", e)
            }
            Violation::JoinOutsideTables(e) => {
                write!(f, "join {:?} references a table the query does not select", e)
            }
            Violation::PredicateTableNotSelected(c) => {
                write!(f, "predicate on table {} which the query does not select", c.table.0)
            }
            Violation::UnknownPredicateColumn(c) => {
                write!(f, "predicate column ({}, {}) does not exist", c.table.0, c.column.0)
            }
            Violation::NotFilterable(c) => {
                write!(f, "column ({}, {}) is not filterable", c.table.0, c.column.0)
            }
            Violation::LiteralTypeMismatch(c) => {
                write!(f, "literal type does not match column ({}, {})", c.table.0, c.column.0)
            }
        }
    }
}

/// Checks every query invariant against the catalog; an empty list means
/// the query is valid.
pub fn validate_query(q: &ConjunctiveQuery, catalog: &Catalog) -> Vec<Violation> {
    let mut out = Vec::new();
    if q.tables().is_empty() {
        out.push(Violation::NoTables);
        return out;
    }
    for &t in q.tables() {
        if t.0 >= catalog.table_count() {
            out.push(Violation::UnknownTable(t));
            return out;
        }
    }
    for e in q.joins() {
        if !catalog.join_graph().contains(e) {
            out.push(Violation::JoinNotInGraph(*e));
        }
        if !q.tables().contains(&e.left.table) || !q.tables().contains(&e.right.table) {
            out.push(Violation::JoinOutsideTables(*e));
        }
    }
    if !q.is_connected() {
        out.push(Violation::Disconnected);
    }
    for p in q.predicates() {
        let c = p.column;
        if !q.tables().contains(&c.table) {
            out.push(Violation::PredicateTableNotSelected(c));
            continue;
        }
        let def = &catalog.table(c.table).def;
        if c.column.0 >= def.columns.len() {
            out.push(Violation::UnknownPredicateColumn(c));
            continue;
        }
        if !def.filterable.contains(&c.column) {
            out.push(Violation::NotFilterable(c));
        }
        if def.columns[c.column.0].ty != p.literal.column_type() {
            out.push(Violation::LiteralTypeMismatch(c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::tests_support::chain_catalog;
    use crate::catalog::ColumnId;

    #[test]
    fn single_table_query_is_valid() {
        let cat = chain_catalog(3);
        let q = ConjunctiveQuery::single_table(TableId(0));
        assert!(validate_query(&q, &cat).is_empty());
    }

    #[test]
    fn disconnected_tables_are_flagged() {
        // chain t0-t1-t2: {t0, t2} without the middle table is disconnected.
        let cat = chain_catalog(3);
        let q = ConjunctiveQuery::new([TableId(0), TableId(2)], [], []);
        assert!(validate_query(&q, &cat).contains(&Violation::Disconnected));
    }

    #[test]
    fn non_filterable_predicate_names_the_column() {
        let cat = chain_catalog(2);
        // Column 0 ("id") is intentionally not filterable in the fixture.
        let col = ColumnRef { table: TableId(0), column: ColumnId(0) };
        let q = ConjunctiveQuery::new(
            [TableId(0)],
            [],
            [Predicate { column: col, op: CmpOp::Eq, literal: Value::Int(1) }],
        );
        assert!(validate_query(&q, &cat).contains(&Violation::NotFilterable(col)));
    }

    #[test]
    fn canonical_form_sorts_and_dedups() {
        let cat = chain_catalog(3);
        let e01 = cat.join_graph()[0];
        let q = ConjunctiveQuery::new([TableId(1), TableId(0), TableId(1)], [e01, e01], []);
        assert_eq!(q.tables(), &[TableId(0), TableId(1)]);
        assert_eq!(q.joins(), &[e01]);
    }
}
