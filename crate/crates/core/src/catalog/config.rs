//! Schema config parsing and catalog loading.
//!
//! The schema config is TOML. Field names are stable:
//!
//! ```toml
//! [[tables]]
//! name = "users"
//! columns = [["id", "integer"], ["region", "integer"]]
//! filterable = ["region"]
//!
//! [[edges]]
//! left = "orders.user_id"
//! right = "users.id"
//!
//! [generator]          # optional; see the generator module
//! fk_skew = 1.1
//! [generator.tables.users]
//! rows = 1000
//! [generator.tables.users.columns]
//! id = "sequential"
//! region = { uniform = { k = 50 } }
//! ```

use super::generate::GeneratorSpec;
use super::ingest::ingest_csv;
use super::{
    Catalog, CatalogError, ColumnData, ColumnDef, ColumnId, ColumnRef, ColumnType, JoinEdge, Table,
    TableDef, TableId,
};
use serde::Deserialize;
use std::path::Path;

/// Parsed schema config: table declarations, join edges, optional generator.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaConfig {
    pub tables: Vec<TableConfig>,
    #[serde(default)]
    pub edges: Vec<EdgeConfig>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub name: String,
    /// `[name, type]` pairs; type is one of `integer`, `float`, `string`.
    pub columns: Vec<(String, String)>,
    #[serde(default)]
    pub filterable: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub left: String,
    pub right: String,
}

/// Parses the TOML text of a schema config.
pub fn parse_schema_config(text: &str) -> Result<SchemaConfig, CatalogError> {
    toml::from_str(text).map_err(|e| CatalogError::Config(e.to_string()))
}

fn column_type(name: &str) -> Result<ColumnType, CatalogError> {
    match name {
        "integer" => Ok(ColumnType::Integer),
        "float" => Ok(ColumnType::Float),
        "string" => Ok(ColumnType::String),
        other => Err(CatalogError::UnknownType { name: other.to_string() }),
    }
}

impl SchemaConfig {
    /// Builds the schema skeleton (tables with empty data) plus the edge list
    /// expressed against the *declared* table order.
    pub(crate) fn build_schema(&self) -> Result<(Vec<Table>, Vec<JoinEdge>), CatalogError> {
        let mut tables = Vec::with_capacity(self.tables.len());
        for t in &self.tables {
            let mut columns = Vec::with_capacity(t.columns.len());
            for (name, ty) in &t.columns {
                columns.push(ColumnDef { name: name.clone(), ty: column_type(ty)? });
            }
            let def = TableDef { name: t.name.clone(), columns, filterable: Vec::new() };
            let mut filterable = Vec::with_capacity(t.filterable.len());
            for f in &t.filterable {
                let id = def.column_id(f).ok_or_else(|| CatalogError::UnknownColumn {
                    table: t.name.clone(),
                    column: f.clone(),
                })?;
                filterable.push(id);
            }
            filterable.sort();
            filterable.dedup();
            let data = def.columns.iter().map(|c| ColumnData::empty(c.ty)).collect();
            tables.push(Table { def: TableDef { filterable, ..def }, data });
        }

        let resolve = |qualified: &str| -> Result<ColumnRef, CatalogError> {
            let (tn, cn) = qualified
                .split_once('.')
                .ok_or_else(|| CatalogError::BadColumnRef { text: qualified.to_string() })?;
            let ti = tables
                .iter()
                .position(|t| t.def.name == tn)
                .ok_or_else(|| CatalogError::UnknownTable { table: tn.to_string() })?;
            let ci = tables[ti].def.column_id(cn).ok_or_else(|| CatalogError::UnknownColumn {
                table: tn.to_string(),
                column: cn.to_string(),
            })?;
            Ok(ColumnRef { table: TableId(ti), column: ci })
        };

        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let a = resolve(&e.left)?;
            let b = resolve(&e.right)?;
            if a.table == b.table {
                return Err(CatalogError::SelfEdge { table: tables[a.table.0].def.name.clone() });
            }
            edges.push(JoinEdge { left: a, right: b });
        }
        Ok((tables, edges))
    }
}

/// Loads a catalog: parses the config, then ingests `<data_dir>/<table>.csv`
/// for every declared table. All data ends up resident in memory.
pub fn load_catalog(config_text: &str, data_dir: &Path) -> Result<Catalog, CatalogError> {
    let config = parse_schema_config(config_text)?;
    let (mut tables, edges) = config.build_schema()?;
    for t in &mut tables {
        let file = data_dir.join(format!("{}.csv", t.def.name));
        t.data = ingest_csv(&t.def, &file)?;
    }
    Catalog::from_parts(tables, edges)
}

/// Convenience for tests and programmatic fixtures: a catalog straight from
/// config text plus per-table column data keyed by table name.
pub fn catalog_from_config(
    config_text: &str,
    mut data: impl FnMut(&str) -> Option<Vec<ColumnData>>,
) -> Result<Catalog, CatalogError> {
    let config = parse_schema_config(config_text)?;
    let (mut tables, edges) = config.build_schema()?;
    for t in &mut tables {
        if let Some(cols) = data(&t.def.name) {
            t.data = cols;
        }
    }
    Catalog::from_parts(tables, edges)
}
