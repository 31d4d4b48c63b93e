//! Schema, data, and statistics: the universe queries are drawn from.
//!
//! A [`Catalog`] owns table definitions, the foreign-key join graph, fully
//! resident columnar data, and (optionally) per-column statistics. Catalogs
//! are immutable after construction and safe to share across threads.
//!
//! Table and edge order is canonical: tables sort lexicographically by name
//! and edges sort by their column references, so indices assigned to a given
//! config are identical across runs and platforms.

mod config;
mod generate;
mod ingest;
mod stats;

pub use config::{catalog_from_config, load_catalog, parse_schema_config, EdgeConfig, SchemaConfig, TableConfig};
pub use generate::{generate_synthetic, DeriveOp, DerivedColumn, Distribution, GeneratorSpec, TableGenSpec};
pub use ingest::ingest_csv;
pub use stats::{build_stats, ColumnStats, Histogram, Statistics, TableStats};

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Index of a table in the catalog's canonical table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TableId(pub usize);

/// Index of a column within its table's declared column list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColumnId(pub usize);

/// A fully resolved (table, column) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColumnRef {
    pub table: TableId,
    pub column: ColumnId,
}

/// Column types of the SQL subset. No NULLs, no dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Integer,
    Float,
    String,
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnType::Integer => write!(f, "integer"),
            ColumnType::Float => write!(f, "float"),
            ColumnType::String => write!(f, "string"),
        }
    }
}

/// An owned literal value. Floats are always finite and `-0.0` is
/// normalized to `0.0` at construction, which makes the derived ordering
/// total and consistent with hashing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
}

impl Value {
    /// Builds a float value, normalizing `-0.0`. Panics on NaN; ingestion
    /// and generation reject NaN before values are constructed.
    pub fn float(x: f64) -> Value {
        assert!(!x.is_nan(), "NaN values are not representable");
        Value::Float(if x == 0.0 { 0.0 } else { x })
    }

    pub fn column_type(&self) -> ColumnType {
        match self {
            Value::Int(_) => ColumnType::Integer,
            Value::Float(_) => ColumnType::Float,
            Value::Str(_) => ColumnType::String,
        }
    }

    fn type_rank(&self) -> u8 {
        match self {
            Value::Int(_) => 0,
            Value::Float(_) => 1,
            Value::Str(_) => 2,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            _ => self.type_rank().cmp(&other.type_rank()),
        }
    }
}

impl std::hash::Hash for Value {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Value::Int(a) => {
                0u8.hash(state);
                a.hash(state);
            }
            Value::Float(a) => {
                1u8.hash(state);
                a.to_bits().hash(state);
            }
            Value::Str(a) => {
                2u8.hash(state);
                a.hash(state);
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(a) => write!(f, "{a}"),
            Value::Float(a) => write!(f, "{a}"),
            Value::Str(a) => write!(f, "{a}"),
        }
    }
}

/// One column's definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    pub ty: ColumnType,
}

/// A table definition: named, typed columns plus the subset eligible for
/// filter predicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDef {
    pub name: String,
    pub columns: Vec<ColumnDef>,
    pub filterable: Vec<ColumnId>,
}

impl TableDef {
    pub fn column_id(&self, name: &str) -> Option<ColumnId> {
        self.columns.iter().position(|c| c.name == name).map(ColumnId)
    }

    pub fn column(&self, id: ColumnId) -> &ColumnDef {
        &self.columns[id.0]
    }
}

/// An undirected equijoin edge of the schema, stored with
/// `left.table < right.table`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JoinEdge {
    pub left: ColumnRef,
    pub right: ColumnRef,
}

impl JoinEdge {
    /// Canonicalizes endpoint order. Returns `None` for self-edges.
    pub fn new(a: ColumnRef, b: ColumnRef) -> Option<JoinEdge> {
        match a.table.cmp(&b.table) {
            Ordering::Less => Some(JoinEdge { left: a, right: b }),
            Ordering::Greater => Some(JoinEdge { left: b, right: a }),
            Ordering::Equal => None,
        }
    }

    pub fn touches(&self, t: TableId) -> bool {
        self.left.table == t || self.right.table == t
    }

    /// The endpoint on table `t`, if any.
    pub fn endpoint(&self, t: TableId) -> Option<ColumnRef> {
        if self.left.table == t {
            Some(self.left)
        } else if self.right.table == t {
            Some(self.right)
        } else {
            None
        }
    }

    /// The endpoint not on table `t`.
    pub fn other(&self, t: TableId) -> Option<ColumnRef> {
        if self.left.table == t {
            Some(self.right)
        } else if self.right.table == t {
            Some(self.left)
        } else {
            None
        }
    }
}

/// Columnar data for one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnData {
    Int(Vec<i64>),
    Float(Vec<f64>),
    Str(Vec<String>),
}

impl ColumnData {
    pub fn empty(ty: ColumnType) -> ColumnData {
        match ty {
            ColumnType::Integer => ColumnData::Int(Vec::new()),
            ColumnType::Float => ColumnData::Float(Vec::new()),
            ColumnType::String => ColumnData::Str(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Int(v) => v.len(),
            ColumnData::Float(v) => v.len(),
            ColumnData::Str(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, row: usize) -> Value {
        match self {
            ColumnData::Int(v) => Value::Int(v[row]),
            ColumnData::Float(v) => Value::float(v[row]),
            ColumnData::Str(v) => Value::Str(v[row].clone()),
        }
    }
}

/// A table definition together with its resident columnar data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table {
    pub def: TableDef,
    pub data: Vec<ColumnData>,
}

impl Table {
    pub fn row_count(&self) -> u64 {
        self.data.first().map_or(0, |c| c.len() as u64)
    }
}

/// The immutable universe: schema, join graph, data, statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Catalog {
    tables: Vec<Table>,
    join_graph: Vec<JoinEdge>,
    stats: Option<Statistics>,
}

impl Catalog {
    /// Assembles a catalog from parts, sorting into canonical order and
    /// checking every invariant. `tables` carry their data; edges refer to
    /// tables by name via `ColumnRef` indices into the *given* order and are
    /// remapped after sorting.
    pub(crate) fn from_parts(mut tables: Vec<Table>, edges: Vec<JoinEdge>) -> Result<Catalog, CatalogError> {
        // Canonical table order, remembering where each table moved.
        let mut order: Vec<usize> = (0..tables.len()).collect();
        order.sort_by(|&a, &b| tables[a].def.name.cmp(&tables[b].def.name));
        let mut remap = vec![0usize; tables.len()];
        for (new_idx, &old_idx) in order.iter().enumerate() {
            remap[old_idx] = new_idx;
        }
        let mut sorted: Vec<Option<Table>> = tables.drain(..).map(Some).collect();
        let tables: Vec<Table> = order.iter().map(|&i| sorted[i].take().unwrap()).collect();

        let mut join_graph = Vec::with_capacity(edges.len());
        for e in edges {
            let a = ColumnRef { table: TableId(remap[e.left.table.0]), column: e.left.column };
            let b = ColumnRef { table: TableId(remap[e.right.table.0]), column: e.right.column };
            let edge = JoinEdge::new(a, b).ok_or(CatalogError::SelfEdge {
                table: tables[a.table.0].def.name.clone(),
            })?;
            join_graph.push(edge);
        }
        join_graph.sort();
        join_graph.dedup();

        let catalog = Catalog { tables, join_graph, stats: None };
        catalog.check_invariants()?;
        Ok(catalog)
    }

    fn check_invariants(&self) -> Result<(), CatalogError> {
        let mut names = BTreeSet::new();
        for t in &self.tables {
            if !names.insert(t.def.name.clone()) {
                return Err(CatalogError::DuplicateTable { table: t.def.name.clone() });
            }
            if t.def.columns.is_empty() {
                return Err(CatalogError::NoColumns { table: t.def.name.clone() });
            }
            let mut cols = BTreeSet::new();
            for c in &t.def.columns {
                if !cols.insert(c.name.clone()) {
                    return Err(CatalogError::DuplicateColumn {
                        table: t.def.name.clone(),
                        column: c.name.clone(),
                    });
                }
            }
            for &f in &t.def.filterable {
                if f.0 >= t.def.columns.len() {
                    return Err(CatalogError::BadFilterable { table: t.def.name.clone() });
                }
            }
            for (c, d) in t.def.columns.iter().zip(&t.data) {
                let ok = matches!(
                    (c.ty, d),
                    (ColumnType::Integer, ColumnData::Int(_))
                        | (ColumnType::Float, ColumnData::Float(_))
                        | (ColumnType::String, ColumnData::Str(_))
                );
                if !ok {
                    return Err(CatalogError::DataTypeMismatch {
                        table: t.def.name.clone(),
                        column: c.name.clone(),
                    });
                }
            }
            if t.data.len() != t.def.columns.len()
                || t.data.windows(2).any(|w| w[0].len() != w[1].len())
            {
                return Err(CatalogError::RaggedColumns { table: t.def.name.clone() });
            }
        }
        for e in &self.join_graph {
            for cr in [e.left, e.right] {
                if cr.table.0 >= self.tables.len()
                    || cr.column.0 >= self.tables[cr.table.0].def.columns.len()
                {
                    return Err(CatalogError::DanglingEdge);
                }
            }
            let lt = self.column_type(e.left);
            let rt = self.column_type(e.right);
            if lt != rt {
                return Err(CatalogError::EdgeTypeMismatch {
                    left: self.column_name(e.left),
                    left_ty: lt,
                    right: self.column_name(e.right),
                    right_ty: rt,
                });
            }
        }
        Ok(())
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    pub fn table(&self, id: TableId) -> &Table {
        &self.tables[id.0]
    }

    pub fn table_id(&self, name: &str) -> Option<TableId> {
        self.tables.iter().position(|t| t.def.name == name).map(TableId)
    }

    pub fn join_graph(&self) -> &[JoinEdge] {
        &self.join_graph
    }

    pub fn stats(&self) -> Option<&Statistics> {
        self.stats.as_ref()
    }

    pub fn set_stats(&mut self, stats: Statistics) {
        self.stats = Some(stats);
    }

    pub fn row_count(&self, id: TableId) -> u64 {
        self.tables[id.0].row_count()
    }

    pub fn column_type(&self, cr: ColumnRef) -> ColumnType {
        self.tables[cr.table.0].def.columns[cr.column.0].ty
    }

    pub fn column_data(&self, cr: ColumnRef) -> &ColumnData {
        &self.tables[cr.table.0].data[cr.column.0]
    }

    /// "table.column" for messages and SQL text.
    pub fn column_name(&self, cr: ColumnRef) -> String {
        let t = &self.tables[cr.table.0];
        format!("{}.{}", t.def.name, t.def.columns[cr.column.0].name)
    }

    pub fn table_name(&self, id: TableId) -> &str {
        &self.tables[id.0].def.name
    }

    /// Resolves "table.column" into a reference.
    pub fn resolve(&self, qualified: &str) -> Result<ColumnRef, CatalogError> {
        let (t, c) = qualified
            .split_once('.')
            .ok_or_else(|| CatalogError::BadColumnRef { text: qualified.to_string() })?;
        let table = self
            .table_id(t)
            .ok_or_else(|| CatalogError::UnknownTable { table: t.to_string() })?;
        let column = self.tables[table.0]
            .def
            .column_id(c)
            .ok_or_else(|| CatalogError::UnknownColumn { table: t.to_string(), column: c.to_string() })?;
        Ok(ColumnRef { table, column })
    }

    /// All catalog edges with both endpoints inside `tables`.
    pub fn edges_within(&self, tables: &BTreeSet<TableId>) -> Vec<JoinEdge> {
        self.join_graph
            .iter()
            .filter(|e| tables.contains(&e.left.table) && tables.contains(&e.right.table))
            .copied()
            .collect()
    }

    /// Stable identity digest over schema and row counts; used in export
    /// manifests so suites can be matched back to the catalog they came from.
    pub fn identity_digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for t in &self.tables {
            hasher.update(t.def.name.as_bytes());
            hasher.update([0]);
            for c in &t.def.columns {
                hasher.update(c.name.as_bytes());
                hasher.update([b':']);
                hasher.update(c.ty.to_string().as_bytes());
                hasher.update([0]);
            }
            hasher.update(t.row_count().to_le_bytes());
        }
        for e in &self.join_graph {
            hasher.update(self.column_name(e.left).as_bytes());
            hasher.update([b'=']);
            hasher.update(self.column_name(e.right).as_bytes());
            hasher.update([0]);
        }
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Errors from catalog construction, ingestion, and generation.
#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("schema config: {0}")]
    Config(String),
    #[error("unknown column type `{name}`")]
    UnknownType { name: String },
    #[error("duplicate table `{table}`")]
    DuplicateTable { table: String },
    #[error("duplicate column `{column}` in table `{table}`")]
    DuplicateColumn { table: String, column: String },
    #[error("table `{table}` declares no columns")]
    NoColumns { table: String },
    #[error("filterable column out of range in table `{table}`")]
    BadFilterable { table: String },
    #[error("unknown table `{table}`")]
    UnknownTable { table: String },
    #[error("unknown column `{table}.{column}`")]
    UnknownColumn { table: String, column: String },
    #[error("expected `table.column`, got `{text}`")]
    BadColumnRef { text: String },
    #[error("join edge endpoints on the same table `{table}`")]
    SelfEdge { table: String },
    #[error("join edge type mismatch: {left} is {left_ty}, {right} is {right_ty}")]
    EdgeTypeMismatch { left: String, left_ty: ColumnType, right: String, right_ty: ColumnType },
    #[error("join edge references a missing table or column")]
    DanglingEdge,
    #[error("column data type does not match declaration for `{table}.{column}`")]
    DataTypeMismatch { table: String, column: String },
    #[error("columns of table `{table}` have differing lengths")]
    RaggedColumns { table: String },
    #[error("{file}: missing or mismatched header")]
    CsvHeader { file: String },
    #[error("{file}: row {row}: expected {expected} fields, found {found}")]
    CsvArity { file: String, row: u64, expected: usize, found: usize },
    #[error("{file}: row {row}, column `{column}`: cannot parse `{cell}` as {ty}")]
    CsvCell { file: String, row: u64, column: String, cell: String, ty: ColumnType },
    #[error("{file}: {source}")]
    CsvIo { file: String, source: std::io::Error },
    #[error("statistics: bucket count must be positive")]
    ZeroBuckets,
    #[error("generator: zipf exponent must be > 0 (got {s})")]
    ZipfExponent { s: f64 },
    #[error("generator: table `{table}` has no row count")]
    MissingRows { table: String },
    #[error("generator: no distribution for column `{table}.{column}`")]
    MissingDistribution { table: String, column: String },
    #[error("generator: derived column directive references `{table}.{column}` which {problem}")]
    BadDerived { table: String, column: String, problem: String },
}
