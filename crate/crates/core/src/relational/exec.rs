//! Plan execution with deterministic work-unit accounting.
//!
//! Work units count tuples touched: a scan charges the full table row
//! count, a hash join charges build + probe + output rows, a nested-loop
//! join charges outer x inner + output rows. All counts are *logical*
//! cardinalities; internally, intermediate relations are kept as distinct
//! key tuples with multiplicities, so identical logical results cost the
//! same work units regardless of data layout and memory stays proportional
//! to the number of distinct tuples rather than to the logical row count.
//!
//! Execution aborts as soon as accumulated work exceeds the configured cap,
//! mirroring wall-clock timeouts in real runs.

use super::plan::{JoinOp, PhysicalPlan};
use super::query::Predicate;
use crate::catalog::{Catalog, ColumnData, ColumnRef, TableId, Value};
use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Default work-unit cap for plan execution.
pub const DEFAULT_WORK_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    WorkUnits,
    WallClock,
}

/// Result of executing a plan: the `COUNT(*)` value, deterministic work
/// units, and optionally the elapsed wall clock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionResult {
    pub count: u64,
    pub work_units: u64,
    pub wall_clock: Option<Duration>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExecError {
    /// The plan exceeded the work-unit cap; the engine's analogue of a
    /// query timeout.
    #[error("work-unit cap of {cap} exceeded")]
    WorkCapExceeded { cap: u64 },
}

/// Borrowed scalar used for join keys and group tuples. Floats are keyed by
/// bit pattern; `-0.0` was normalized away at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key<'a> {
    Int(i64),
    F64(u64),
    Str(&'a str),
}

fn key_at<'a>(col: &'a ColumnData, row: usize) -> Key<'a> {
    match col {
        ColumnData::Int(v) => Key::Int(v[row]),
        ColumnData::Float(v) => Key::F64(v[row].to_bits()),
        ColumnData::Str(v) => Key::Str(&v[row]),
    }
}

type Tuple<'a> = Vec<Key<'a>>;

/// An intermediate relation: distinct projected tuples with multiplicities.
struct Relation<'a> {
    schema: Vec<ColumnRef>,
    groups: HashMap<Tuple<'a>, u64>,
    rows: u128,
}

struct Executor<'a> {
    catalog: &'a Catalog,
    work: u128,
    cap: u128,
}

impl<'a> Executor<'a> {
    fn charge(&mut self, amount: u128) -> Result<(), ExecError> {
        self.work += amount;
        if self.work > self.cap {
            Err(ExecError::WorkCapExceeded { cap: self.cap as u64 })
        } else {
            Ok(())
        }
    }

    fn eval(&mut self, plan: &PhysicalPlan, needed: &BTreeSet<ColumnRef>) -> Result<Relation<'a>, ExecError> {
        match plan {
            PhysicalPlan::Scan { table, predicates } => self.scan(*table, predicates, needed),
            PhysicalPlan::Join { op, edges, left, right } => {
                let lt = left.tables();
                let rt = right.tables();
                let mut left_needed: BTreeSet<ColumnRef> =
                    needed.iter().filter(|c| lt.contains(&c.table)).copied().collect();
                let mut right_needed: BTreeSet<ColumnRef> =
                    needed.iter().filter(|c| rt.contains(&c.table)).copied().collect();
                for e in edges {
                    for cr in [e.left, e.right] {
                        if lt.contains(&cr.table) {
                            left_needed.insert(cr);
                        } else {
                            right_needed.insert(cr);
                        }
                    }
                }
                let l = self.eval(left, &left_needed)?;
                let r = self.eval(right, &right_needed)?;
                match op {
                    JoinOp::HashBuildLeft => self.hash_join(l, r, true, edges, needed),
                    JoinOp::HashBuildRight => self.hash_join(l, r, false, edges, needed),
                    JoinOp::NestedLoop => self.nested_loop(l, r, edges, needed),
                }
            }
        }
    }

    fn scan(
        &mut self,
        table: TableId,
        predicates: &[Predicate],
        needed: &BTreeSet<ColumnRef>,
    ) -> Result<Relation<'a>, ExecError> {
        let t = self.catalog.table(table);
        let n = t.row_count() as usize;
        self.charge(n as u128)?;

        let testers: Vec<PredTester<'a>> =
            predicates.iter().map(|p| PredTester::new(&t.data[p.column.column.0], p)).collect();
        let schema: Vec<ColumnRef> = needed.iter().copied().collect();
        let cols: Vec<&'a ColumnData> = schema.iter().map(|c| &t.data[c.column.0]).collect();

        let mut groups: HashMap<Tuple<'a>, u64> = HashMap::new();
        let mut rows = 0u128;
        for row in 0..n {
            if testers.iter().all(|p| p.test(row)) {
                let tuple: Tuple<'a> = cols.iter().map(|c| key_at(c, row)).collect();
                *groups.entry(tuple).or_insert(0) += 1;
                rows += 1;
            }
        }
        Ok(Relation { schema, groups, rows })
    }

    fn hash_join(
        &mut self,
        l: Relation<'a>,
        r: Relation<'a>,
        build_left: bool,
        edges: &[crate::catalog::JoinEdge],
        needed: &BTreeSet<ColumnRef>,
    ) -> Result<Relation<'a>, ExecError> {
        self.charge(l.rows + r.rows)?;
        let (build, probe) = if build_left { (l, r) } else { (r, l) };

        let build_key = key_positions(&build, edges);
        let probe_key = key_positions(&probe, edges);
        let out = OutputShape::new(needed, &build, &probe);

        let mut table: HashMap<Tuple<'a>, Vec<(Tuple<'a>, u64)>> = HashMap::new();
        for (tuple, mult) in build.groups {
            let key: Tuple<'a> = build_key.iter().map(|&i| tuple[i]).collect();
            table.entry(key).or_default().push((tuple, mult));
        }

        let mut groups: HashMap<Tuple<'a>, u64> = HashMap::new();
        let mut rows = 0u128;
        for (ptuple, pmult) in &probe.groups {
            let key: Tuple<'a> = probe_key.iter().map(|&i| ptuple[i]).collect();
            if let Some(matches) = table.get(&key) {
                for (btuple, bmult) in matches {
                    let prod = *bmult as u128 * *pmult as u128;
                    self.charge(prod)?;
                    rows += prod;
                    let tuple = out.merge(btuple, ptuple);
                    *groups.entry(tuple).or_insert(0) += (prod) as u64;
                }
            }
        }
        Ok(Relation { schema: out.schema, groups, rows })
    }

    fn nested_loop(
        &mut self,
        l: Relation<'a>,
        r: Relation<'a>,
        edges: &[crate::catalog::JoinEdge],
        needed: &BTreeSet<ColumnRef>,
    ) -> Result<Relation<'a>, ExecError> {
        // Outer x inner pairs are charged up front, before any iteration.
        self.charge(l.rows * r.rows)?;
        let lkey = key_positions(&l, edges);
        let rkey = key_positions(&r, edges);
        let out = OutputShape::new(needed, &l, &r);

        let mut groups: HashMap<Tuple<'a>, u64> = HashMap::new();
        let mut rows = 0u128;
        for (ltuple, lmult) in &l.groups {
            for (rtuple, rmult) in &r.groups {
                if lkey.iter().zip(&rkey).all(|(&li, &ri)| ltuple[li] == rtuple[ri]) {
                    let prod = *lmult as u128 * *rmult as u128;
                    self.charge(prod)?;
                    rows += prod;
                    let tuple = out.merge(ltuple, rtuple);
                    *groups.entry(tuple).or_insert(0) += prod as u64;
                }
            }
        }
        Ok(Relation { schema: out.schema, groups, rows })
    }
}

/// For each edge, the position of its endpoint inside `rel.schema`.
fn key_positions(rel: &Relation<'_>, edges: &[crate::catalog::JoinEdge]) -> Vec<usize> {
    edges
        .iter()
        .map(|e| {
            let cr = if rel.schema.contains(&e.left) { e.left } else { e.right };
            rel.schema.iter().position(|c| *c == cr).expect("edge endpoint in child schema")
        })
        .collect()
}

/// Precomputed projection of (first, second) input tuples onto the output
/// schema.
struct OutputShape {
    schema: Vec<ColumnRef>,
    take: Vec<(bool, usize)>, // (from_first, index)
}

impl OutputShape {
    fn new(needed: &BTreeSet<ColumnRef>, first: &Relation<'_>, second: &Relation<'_>) -> OutputShape {
        let schema: Vec<ColumnRef> = needed.iter().copied().collect();
        let take = schema
            .iter()
            .map(|c| {
                if let Some(i) = first.schema.iter().position(|x| x == c) {
                    (true, i)
                } else {
                    let i = second.schema.iter().position(|x| x == c).expect("needed column available");
                    (false, i)
                }
            })
            .collect();
        OutputShape { schema, take }
    }

    fn merge<'a>(&self, first: &Tuple<'a>, second: &Tuple<'a>) -> Tuple<'a> {
        self.take.iter().map(|&(f, i)| if f { first[i] } else { second[i] }).collect()
    }
}

/// Typed predicate tester bound to a column, avoiding per-row allocation.
enum PredTester<'a> {
    Int(&'a [i64], super::query::CmpOp, i64),
    Float(&'a [f64], super::query::CmpOp, f64),
    Str(&'a [String], super::query::CmpOp, String),
}

impl<'a> PredTester<'a> {
    fn new(col: &'a ColumnData, p: &Predicate) -> PredTester<'a> {
        match (col, &p.literal) {
            (ColumnData::Int(v), Value::Int(lit)) => PredTester::Int(v, p.op, *lit),
            (ColumnData::Float(v), Value::Float(lit)) => PredTester::Float(v, p.op, *lit),
            (ColumnData::Str(v), Value::Str(lit)) => PredTester::Str(v, p.op, lit.clone()),
            // Type-mismatched predicates never pass validation; evaluating
            // them compares by type rank, matching Value's total order.
            _ => PredTester::Str(&[], p.op, String::new()),
        }
    }

    fn test(&self, row: usize) -> bool {
        use super::query::CmpOp;
        fn cmp<T: PartialOrd>(op: CmpOp, a: T, b: T) -> bool {
            match op {
                CmpOp::Eq => a == b,
                CmpOp::Lt => a < b,
                CmpOp::Gt => a > b,
                CmpOp::Le => a <= b,
                CmpOp::Ge => a >= b,
                CmpOp::Ne => a != b,
            }
        }
        match self {
            PredTester::Int(v, op, lit) => cmp(*op, v[row], *lit),
            PredTester::Float(v, op, lit) => cmp(*op, v[row], *lit),
            PredTester::Str(v, op, lit) => cmp(*op, v[row].as_str(), lit.as_str()),
        }
    }
}

/// Executes a plan over the catalog. `cap` bounds total work units; hitting
/// it aborts with [`ExecError::WorkCapExceeded`].
pub fn execute_plan(
    plan: &PhysicalPlan,
    catalog: &Catalog,
    mode: ExecMode,
    cap: u64,
) -> Result<ExecutionResult, ExecError> {
    let started = Instant::now();
    let mut exec = Executor { catalog, work: 0, cap: cap as u128 };
    let root = exec.eval(plan, &BTreeSet::new())?;
    let wall_clock = match mode {
        ExecMode::WorkUnits => None,
        ExecMode::WallClock => Some(started.elapsed()),
    };
    Ok(ExecutionResult { count: root.rows as u64, work_units: exec.work as u64, wall_clock })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::tests_support::chain_catalog;
    use crate::catalog::{Catalog, ColumnDef, ColumnId, ColumnType, JoinEdge, Table, TableDef};
    use crate::relational::query::{CmpOp, ConjunctiveQuery};

    /// a(x) with 10 rows 0..9 and b(y) with 20 rows where exactly 5 match.
    fn two_table_fixture() -> Catalog {
        let a = Table {
            def: TableDef {
                name: "a".into(),
                columns: vec![ColumnDef { name: "x".into(), ty: ColumnType::Integer }],
                filterable: vec![ColumnId(0)],
            },
            data: vec![ColumnData::Int((0..10).collect())],
        };
        let mut by = vec![0, 1, 2, 3, 4];
        by.extend(50..65);
        let b = Table {
            def: TableDef {
                name: "b".into(),
                columns: vec![ColumnDef { name: "y".into(), ty: ColumnType::Integer }],
                filterable: vec![ColumnId(0)],
            },
            data: vec![ColumnData::Int(by)],
        };
        let edge = JoinEdge {
            left: ColumnRef { table: TableId(0), column: ColumnId(0) },
            right: ColumnRef { table: TableId(1), column: ColumnId(0) },
        };
        Catalog::from_parts(vec![a, b], vec![edge]).unwrap()
    }

    #[test]
    fn empty_scan_costs_nothing() {
        let cat = crate::catalog::tests_support::single_table_catalog(vec![]);
        let plan = PhysicalPlan::scan(TableId(0), vec![]);
        let r = execute_plan(&plan, &cat, ExecMode::WorkUnits, DEFAULT_WORK_CAP).unwrap();
        assert_eq!((r.count, r.work_units), (0, 0));
    }

    #[test]
    fn hash_join_work_matches_formula() {
        // scans 10 + 20, join 10 + 20 + 5 = 35, total 65 — applied by hand.
        let cat = two_table_fixture();
        let plan = PhysicalPlan::join(
            JoinOp::HashBuildLeft,
            PhysicalPlan::scan(TableId(0), vec![]),
            PhysicalPlan::scan(TableId(1), vec![]),
            vec![cat.join_graph()[0]],
        );
        let r = execute_plan(&plan, &cat, ExecMode::WorkUnits, DEFAULT_WORK_CAP).unwrap();
        assert_eq!(r.count, 5);
        assert_eq!(r.work_units, 65);
    }

    #[test]
    fn nested_loop_work_matches_formula() {
        // 10 + 20 scans, 10*20 + 5 join = 235 total.
        let cat = two_table_fixture();
        let plan = PhysicalPlan::join(
            JoinOp::NestedLoop,
            PhysicalPlan::scan(TableId(0), vec![]),
            PhysicalPlan::scan(TableId(1), vec![]),
            vec![cat.join_graph()[0]],
        );
        let r = execute_plan(&plan, &cat, ExecMode::WorkUnits, DEFAULT_WORK_CAP).unwrap();
        assert_eq!(r.count, 5);
        assert_eq!(r.work_units, 10 + 20 + 10 * 20 + 5);
    }

    #[test]
    fn build_side_does_not_change_count() {
        let cat = two_table_fixture();
        for op in JoinOp::ALL {
            let plan = PhysicalPlan::join(
                op,
                PhysicalPlan::scan(TableId(0), vec![]),
                PhysicalPlan::scan(TableId(1), vec![]),
                vec![cat.join_graph()[0]],
            );
            let r = execute_plan(&plan, &cat, ExecMode::WorkUnits, DEFAULT_WORK_CAP).unwrap();
            assert_eq!(r.count, 5, "{op:?}");
        }
    }

    #[test]
    fn plans_of_same_query_agree_on_count() {
        let cat = chain_catalog(3);
        let q = ConjunctiveQuery::new(
            [TableId(0), TableId(1), TableId(2)],
            cat.join_graph().iter().copied(),
            [],
        );
        let e01 = cat.join_graph()[0];
        let e12 = cat.join_graph()[1];
        let left_deep = PhysicalPlan::join(
            JoinOp::HashBuildLeft,
            PhysicalPlan::join(
                JoinOp::HashBuildLeft,
                PhysicalPlan::scan(TableId(0), vec![]),
                PhysicalPlan::scan(TableId(1), vec![]),
                vec![e01],
            ),
            PhysicalPlan::scan(TableId(2), vec![]),
            vec![e12],
        );
        let right_deep = PhysicalPlan::join(
            JoinOp::NestedLoop,
            PhysicalPlan::scan(TableId(0), vec![]),
            PhysicalPlan::join(
                JoinOp::HashBuildRight,
                PhysicalPlan::scan(TableId(1), vec![]),
                PhysicalPlan::scan(TableId(2), vec![]),
                vec![e12],
            ),
            vec![e01],
        );
        assert!(left_deep.validate_for(&q).is_ok());
        assert!(right_deep.validate_for(&q).is_ok());
        let a = execute_plan(&left_deep, &cat, ExecMode::WorkUnits, DEFAULT_WORK_CAP).unwrap();
        let b = execute_plan(&right_deep, &cat, ExecMode::WorkUnits, DEFAULT_WORK_CAP).unwrap();
        assert_eq!(a.count, b.count);
    }

    #[test]
    fn always_true_predicate_keeps_count() {
        let cat = two_table_fixture();
        let base = PhysicalPlan::join(
            JoinOp::HashBuildLeft,
            PhysicalPlan::scan(TableId(0), vec![]),
            PhysicalPlan::scan(TableId(1), vec![]),
            vec![cat.join_graph()[0]],
        );
        let with_pred = PhysicalPlan::join(
            JoinOp::HashBuildLeft,
            PhysicalPlan::scan(
                TableId(0),
                vec![Predicate {
                    column: ColumnRef { table: TableId(0), column: ColumnId(0) },
                    op: CmpOp::Ge,
                    literal: Value::Int(0),
                }],
            ),
            PhysicalPlan::scan(TableId(1), vec![]),
            vec![cat.join_graph()[0]],
        );
        let a = execute_plan(&base, &cat, ExecMode::WorkUnits, DEFAULT_WORK_CAP).unwrap();
        let b = execute_plan(&with_pred, &cat, ExecMode::WorkUnits, DEFAULT_WORK_CAP).unwrap();
        assert_eq!(a.count, b.count);
    }

    #[test]
    fn cap_aborts_execution() {
        let cat = two_table_fixture();
        let plan = PhysicalPlan::join(
            JoinOp::NestedLoop,
            PhysicalPlan::scan(TableId(0), vec![]),
            PhysicalPlan::scan(TableId(1), vec![]),
            vec![cat.join_graph()[0]],
        );
        let err = execute_plan(&plan, &cat, ExecMode::WorkUnits, 100).unwrap_err();
        assert_eq!(err, ExecError::WorkCapExceeded { cap: 100 });
    }

    #[test]
    fn wall_clock_mode_records_duration() {
        let cat = two_table_fixture();
        let plan = PhysicalPlan::scan(TableId(0), vec![]);
        let r = execute_plan(&plan, &cat, ExecMode::WallClock, DEFAULT_WORK_CAP).unwrap();
        assert!(r.wall_clock.is_some());
    }

    #[test]
    fn removing_rows_never_increases_work() {
        let cat_full = two_table_fixture();
        let mut small = cat_full.clone();
        // Rebuild with table a truncated to 3 rows.
        let a = Table {
            def: small.table(TableId(0)).def.clone(),
            data: vec![ColumnData::Int((0..3).collect())],
        };
        let b = small.table(TableId(1)).clone();
        small = Catalog::from_parts(vec![a, b], cat_full.join_graph().to_vec()).unwrap();
        for op in JoinOp::ALL {
            let plan = PhysicalPlan::join(
                op,
                PhysicalPlan::scan(TableId(0), vec![]),
                PhysicalPlan::scan(TableId(1), vec![]),
                vec![cat_full.join_graph()[0]],
            );
            let full = execute_plan(&plan, &cat_full, ExecMode::WorkUnits, DEFAULT_WORK_CAP).unwrap();
            let less = execute_plan(&plan, &small, ExecMode::WorkUnits, DEFAULT_WORK_CAP).unwrap();
            assert!(less.work_units <= full.work_units, "{op:?}");
        }
    }
}
