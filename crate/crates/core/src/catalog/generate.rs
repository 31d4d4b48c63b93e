//! Seeded synthetic data generation.
//!
//! The generator is a pure function of its spec: per-column ChaCha streams
//! are derived from the seed and the table/column names, so output is
//! byte-identical across runs and platforms and independent of declaration
//! order.
//!
//! Two knobs exist specifically to defeat independence-assumption
//! cardinality estimation:
//! - derived columns are exact functional dependencies of a source column,
//!   so conjunctive predicates on (source, target) are redundant while the
//!   estimator multiplies their selectivities;
//! - foreign-key columns (columns joined to a `sequential` column) draw
//!   their referents with a zipf skew of exponent `fk_skew`, concentrating
//!   join fan-out on low ids.

use super::config::SchemaConfig;
use super::{Catalog, CatalogError, ColumnData, ColumnType};
use crate::rng::{f64_unit, substream_seed, u64_below};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Per-column value distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// 0, 1, 2, ... in row order; acts as a primary key.
    Sequential,
    /// Uniform over `[0, k)`.
    Uniform { k: u64 },
    /// Zipf with exponent `s` over `k` ranked values; rank 0 most frequent.
    Zipf { s: f64, k: u64 },
}

/// Exact functional dependency applied after base generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeriveOp {
    Mod,
    Div,
    Mul,
    Add,
}

/// `target = op(source, operand)`, both integer columns of one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedColumn {
    pub target: String,
    pub source: String,
    pub op: DeriveOp,
    pub operand: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableGenSpec {
    pub rows: u64,
    #[serde(default)]
    pub columns: BTreeMap<String, Distribution>,
    #[serde(default)]
    pub derived: Vec<DerivedColumn>,
}

/// The full generator spec; lives in the `[generator]` section of a schema
/// config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    #[serde(default)]
    pub seed: u64,
    /// Zipf exponent for foreign-key referent choice; 0 means uniform.
    #[serde(default)]
    pub fk_skew: f64,
    pub tables: BTreeMap<String, TableGenSpec>,
}

impl GeneratorSpec {
    fn validate(&self) -> Result<(), CatalogError> {
        if self.fk_skew < 0.0 || !self.fk_skew.is_finite() {
            return Err(CatalogError::ZipfExponent { s: self.fk_skew });
        }
        for t in self.tables.values() {
            for d in t.columns.values() {
                if let Distribution::Zipf { s, .. } = d {
                    if !(*s > 0.0) || !s.is_finite() {
                        return Err(CatalogError::ZipfExponent { s: *s });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Generates a catalog from a schema config carrying a `[generator]`
/// section. Deterministic for a fixed spec.
pub fn generate_synthetic(config: &SchemaConfig) -> Result<Catalog, CatalogError> {
    let spec = config
        .generator
        .as_ref()
        .ok_or_else(|| CatalogError::Config("config has no [generator] section".into()))?;
    spec.validate()?;
    let (mut tables, edges) = config.build_schema()?;

    // Row counts per declared table index.
    let mut rows = Vec::with_capacity(tables.len());
    for t in &tables {
        let g = spec
            .tables
            .get(&t.def.name)
            .ok_or_else(|| CatalogError::MissingRows { table: t.def.name.clone() })?;
        rows.push(g.rows);
    }

    // A column is a foreign key when some edge connects it to a column
    // declared `sequential`; it then draws referents over the parent's rows.
    let is_sequential = |table: &str, column: &str| -> bool {
        spec.tables
            .get(table)
            .and_then(|t| t.columns.get(column))
            .map(|d| *d == Distribution::Sequential)
            .unwrap_or(false)
    };
    let mut fk_parent_rows: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for e in &edges {
        for (this, other) in [(e.left, e.right), (e.right, e.left)] {
            let this_name = tables[this.table.0].def.name.clone();
            let this_col = tables[this.table.0].def.columns[this.column.0].name.clone();
            let other_name = tables[other.table.0].def.name.clone();
            let other_col = tables[other.table.0].def.columns[other.column.0].name.clone();
            if is_sequential(&other_name, &other_col) && !is_sequential(&this_name, &this_col) {
                fk_parent_rows
                    .entry((this.table.0, this.column.0))
                    .or_insert(rows[other.table.0]);
            }
        }
    }

    for (ti, table) in tables.iter_mut().enumerate() {
        let g = &spec.tables[&table.def.name];
        let n = rows[ti] as usize;
        let derived_targets: Vec<&str> = g.derived.iter().map(|d| d.target.as_str()).collect();

        for (ci, col) in table.def.columns.iter().enumerate() {
            if derived_targets.contains(&col.name.as_str()) {
                continue; // filled below
            }
            let seed = substream_seed(spec.seed, &[&table.def.name, &col.name]);
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let draws: Vec<u64> = if let Some(&parent) = fk_parent_rows.get(&(ti, ci)) {
                draw_fk(&mut rng, n, parent, spec.fk_skew)
            } else {
                match g.columns.get(&col.name) {
                    Some(Distribution::Sequential) => (0..n as u64).collect(),
                    Some(Distribution::Uniform { k }) => {
                        (0..n).map(|_| if *k == 0 { 0 } else { u64_below(&mut rng, *k) }).collect()
                    }
                    Some(Distribution::Zipf { s, k }) => {
                        let sampler = ZipfSampler::new(*s, *k);
                        (0..n).map(|_| sampler.draw(&mut rng)).collect()
                    }
                    None => {
                        return Err(CatalogError::MissingDistribution {
                            table: table.def.name.clone(),
                            column: col.name.clone(),
                        })
                    }
                }
            };
            table.data[ci] = typed_column(col.ty, &draws);
        }

        for d in &g.derived {
            let (src_id, tgt_id) = resolve_derived(table, d)?;
            let src = match &table.data[src_id] {
                ColumnData::Int(v) => v.clone(),
                _ => unreachable!("validated integer"),
            };
            let out: Vec<i64> = src.iter().map(|&x| apply_derive(d.op, x, d.operand)).collect();
            table.data[tgt_id] = ColumnData::Int(out);
        }
    }

    Catalog::from_parts(tables, edges)
}

fn resolve_derived(table: &super::Table, d: &DerivedColumn) -> Result<(usize, usize), CatalogError> {
    let bad = |column: &str, problem: &str| CatalogError::BadDerived {
        table: table.def.name.clone(),
        column: column.to_string(),
        problem: problem.to_string(),
    };
    let src = table.def.column_id(&d.source).ok_or_else(|| bad(&d.source, "does not exist"))?;
    let tgt = table.def.column_id(&d.target).ok_or_else(|| bad(&d.target, "does not exist"))?;
    if table.def.columns[src.0].ty != ColumnType::Integer {
        return Err(bad(&d.source, "is not an integer column"));
    }
    if table.def.columns[tgt.0].ty != ColumnType::Integer {
        return Err(bad(&d.target, "is not an integer column"));
    }
    if matches!(d.op, DeriveOp::Mod | DeriveOp::Div) && d.operand == 0 {
        return Err(bad(&d.target, "divides by zero"));
    }
    Ok((src.0, tgt.0))
}

fn apply_derive(op: DeriveOp, x: i64, operand: i64) -> i64 {
    match op {
        DeriveOp::Mod => x.rem_euclid(operand),
        DeriveOp::Div => x.wrapping_div(operand),
        DeriveOp::Mul => x.wrapping_mul(operand),
        DeriveOp::Add => x.wrapping_add(operand),
    }
}

fn draw_fk(rng: &mut ChaCha12Rng, n: usize, parent_rows: u64, skew: f64) -> Vec<u64> {
    if parent_rows == 0 {
        return vec![0; n];
    }
    if skew > 0.0 {
        let sampler = ZipfSampler::new(skew, parent_rows);
        (0..n).map(|_| sampler.draw(rng)).collect()
    } else {
        (0..n).map(|_| u64_below(rng, parent_rows)).collect()
    }
}

fn typed_column(ty: ColumnType, draws: &[u64]) -> ColumnData {
    match ty {
        ColumnType::Integer => ColumnData::Int(draws.iter().map(|&v| v as i64).collect()),
        ColumnType::Float => ColumnData::Float(draws.iter().map(|&v| v as f64).collect()),
        // Zero-padded so byte order matches numeric order.
        ColumnType::String => ColumnData::Str(draws.iter().map(|&v| format!("v{v:08}")).collect()),
    }
}

/// Inverse-CDF zipf sampling over ranks `0..k`, rank 0 most frequent.
struct ZipfSampler {
    cumulative: Vec<f64>,
}

impl ZipfSampler {
    fn new(s: f64, k: u64) -> ZipfSampler {
        let k = k.max(1) as usize;
        let mut cumulative = Vec::with_capacity(k);
        let mut acc = 0.0;
        for r in 0..k {
            acc += 1.0 / ((r + 1) as f64).powf(s);
            cumulative.push(acc);
        }
        ZipfSampler { cumulative }
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> u64 {
        let total = *self.cumulative.last().unwrap();
        let u = f64_unit(rng) * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1) as u64
    }
}
