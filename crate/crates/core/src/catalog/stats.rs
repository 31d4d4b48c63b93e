//! Per-column statistics: row counts, distinct counts, equi-depth histograms.
//!
//! Equi-depth (rather than equi-width) buckets keep the histogram useful
//! under skew. The default bucket count is 32.

use super::{Catalog, CatalogError, ColumnData, Value};
use serde::{Deserialize, Serialize};

pub const DEFAULT_BUCKETS: usize = 32;

/// Equi-depth histogram: `bounds.len() == counts.len() + 1` for nonempty
/// columns; both empty for empty columns. Bucket `i` spans
/// `[bounds[i], bounds[i+1]]` with the convention that lookups credit the
/// first bucket whose upper bound is >= the probe value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bounds: Vec<Value>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn min(&self) -> Option<&Value> {
        self.bounds.first()
    }

    pub fn max(&self) -> Option<&Value> {
        self.bounds.last()
    }

    /// Fraction of rows with value strictly below `v`, with linear
    /// interpolation inside the straddling bucket (0.5 for strings, where
    /// interpolation has no meaning).
    pub fn fraction_below(&self, v: &Value) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let total = self.total() as f64;
        if *v <= self.bounds[0] {
            return 0.0;
        }
        if *v > *self.bounds.last().unwrap() {
            return 1.0;
        }
        let mut below = 0u64;
        for (i, count) in self.counts.iter().enumerate() {
            let lo = &self.bounds[i];
            let hi = &self.bounds[i + 1];
            if *v > *hi {
                below += count;
                continue;
            }
            // v falls in (lo, hi]: interpolate within this bucket.
            let frac = interp(lo, hi, v);
            return (below as f64 + frac * *count as f64) / total;
        }
        1.0
    }

    /// True when `v` lies within the histogram's closed value range.
    pub fn contains(&self, v: &Value) -> bool {
        !self.is_empty() && *v >= self.bounds[0] && *v <= *self.bounds.last().unwrap()
    }
}

fn interp(lo: &Value, hi: &Value, v: &Value) -> f64 {
    let num = |x: &Value| -> Option<f64> {
        match x {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            Value::Str(_) => None,
        }
    };
    match (num(lo), num(hi), num(v)) {
        (Some(l), Some(h), Some(x)) if h > l => ((x - l) / (h - l)).clamp(0.0, 1.0),
        _ => 0.5,
    }
}

/// Statistics for one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub row_count: u64,
    pub distinct_count: u64,
    pub histogram: Histogram,
}

/// Statistics for one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableStats {
    pub row_count: u64,
    pub columns: Vec<ColumnStats>,
}

/// Statistics for every (table, column) in catalog order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    pub buckets: usize,
    pub tables: Vec<TableStats>,
}

impl Statistics {
    pub fn table(&self, t: super::TableId) -> &TableStats {
        &self.tables[t.0]
    }

    pub fn column(&self, cr: super::ColumnRef) -> &ColumnStats {
        &self.tables[cr.table.0].columns[cr.column.0]
    }
}

/// Builds statistics over every column of the catalog. Deterministic for a
/// fixed catalog; bucket counts always sum to the table's row count.
pub fn build_stats(catalog: &Catalog, buckets: usize) -> Result<Statistics, CatalogError> {
    if buckets == 0 {
        return Err(CatalogError::ZeroBuckets);
    }
    let mut tables = Vec::with_capacity(catalog.table_count());
    for t in catalog.tables() {
        let row_count = t.row_count();
        let columns = t.data.iter().map(|col| column_stats(col, buckets)).collect();
        tables.push(TableStats { row_count, columns });
    }
    Ok(Statistics { buckets, tables })
}

fn column_stats(col: &ColumnData, buckets: usize) -> ColumnStats {
    let n = col.len();
    if n == 0 {
        return ColumnStats {
            row_count: 0,
            distinct_count: 0,
            histogram: Histogram { bounds: vec![], counts: vec![] },
        };
    }
    let mut sorted: Vec<Value> = (0..n).map(|i| col.value(i)).collect();
    sorted.sort();
    let mut distinct = 1u64;
    for w in sorted.windows(2) {
        if w[0] != w[1] {
            distinct += 1;
        }
    }
    let b = buckets.min(n);
    let mut bounds = Vec::with_capacity(b + 1);
    let mut counts = Vec::with_capacity(b);
    bounds.push(sorted[0].clone());
    let mut prev = 0usize;
    for i in 1..=b {
        let cut = i * n / b;
        counts.push((cut - prev) as u64);
        bounds.push(sorted[cut - 1].clone());
        prev = cut;
    }
    // Upper bound of the last bucket is the column max by construction.
    ColumnStats { row_count: n as u64, distinct_count: distinct, histogram: Histogram { bounds, counts } }
}
