//! Total codec between integer token strings and physical plans.
//!
//! Decoding consumes 64 tokens (vocabulary 64) left to right. The state is
//! a forest, initially one leaf per query table; each step lists the
//! candidate tree pairs connected by at least one query edge in canonical
//! order, then the token selects `pair = v mod |C|` and
//! `operator = (v div |C|) mod 3`. Every token value is meaningful, so
//! *every* string decodes to a valid plan; several strings may decode to
//! the same plan, and [`encode_plan`] returns the canonical minimal-token
//! one.

use crate::catalog::JoinEdge;
use crate::relational::{ConjunctiveQuery, JoinOp, PhysicalPlan, PlanError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Number of token slots in a plan string; one per `z_p` dimension.
pub const PLAN_TOKENS: usize = 64;
/// Exclusive upper bound of a token value.
pub const PLAN_VOCAB: u8 = 64;

/// A fixed-length string of 64 integers in `[0, 63]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanTokenString(Vec<u8>);

impl PlanTokenString {
    pub fn new(tokens: Vec<u8>) -> Result<PlanTokenString, CodecError> {
        if tokens.len() != PLAN_TOKENS {
            return Err(CodecError::BadLength { expected: PLAN_TOKENS, got: tokens.len() });
        }
        if let Some(pos) = tokens.iter().position(|&t| t >= PLAN_VOCAB) {
            return Err(CodecError::TokenOutOfRange { pos, value: tokens[pos] });
        }
        Ok(PlanTokenString(tokens))
    }

    pub fn zeros() -> PlanTokenString {
        PlanTokenString(vec![0; PLAN_TOKENS])
    }

    /// Builds from a prefix, zero-padding the rest.
    pub fn from_prefix(prefix: &[u8]) -> Result<PlanTokenString, CodecError> {
        let mut tokens = prefix.to_vec();
        if tokens.len() > PLAN_TOKENS {
            return Err(CodecError::BadLength { expected: PLAN_TOKENS, got: tokens.len() });
        }
        tokens.resize(PLAN_TOKENS, 0);
        PlanTokenString::new(tokens)
    }

    pub fn tokens(&self) -> &[u8] {
        &self.0
    }

    /// Space-separated decimal serialization.
    pub fn to_text(&self) -> String {
        self.0.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn from_text(text: &str) -> Result<PlanTokenString, CodecError> {
        let tokens: Result<Vec<u8>, _> = text.split_whitespace().map(|w| w.parse::<u8>()).collect();
        let tokens = tokens.map_err(|_| CodecError::BadText)?;
        PlanTokenString::new(tokens)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("token string has length {got}, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("token {value} at position {pos} is out of range")]
    TokenOutOfRange { pos: usize, value: u8 },
    #[error("token text is not a space-separated list of integers")]
    BadText,
    #[error("plan does not belong to the query: {0}")]
    NotAPlan(PlanError),
    #[error("plan step needs token {needed}, beyond the vocabulary")]
    TokenCapacity { needed: u64 },
    #[error("query has {tables} tables, beyond the {max} the codec supports")]
    TooManyTables { tables: usize, max: usize },
    #[error("{count} plans exceed the enumeration limit {limit}")]
    TooManyPlans { count: u128, limit: u128 },
}

/// The candidate list at one decode step: unordered forest-tree pairs
/// connected by at least one query edge, sorted by the pair of minimum
/// table indices.
fn candidate_pairs(forest: &[PhysicalPlan], q: &ConjunctiveQuery) -> Vec<(usize, usize, Vec<JoinEdge>)> {
    let tables: Vec<BTreeSet<_>> = forest.iter().map(|t| t.tables()).collect();
    let mut out = Vec::new();
    for i in 0..forest.len() {
        for j in i + 1..forest.len() {
            let crossing: Vec<JoinEdge> = q
                .joins()
                .iter()
                .filter(|e| {
                    (tables[i].contains(&e.left.table) && tables[j].contains(&e.right.table))
                        || (tables[j].contains(&e.left.table) && tables[i].contains(&e.right.table))
                })
                .copied()
                .collect();
            if !crossing.is_empty() {
                out.push((i, j, crossing));
            }
        }
    }
    out.sort_by_key(|&(i, j, _)| {
        let a = forest[i].min_table();
        let b = forest[j].min_table();
        (a.min(b), a.max(b))
    });
    out
}

/// Decodes a token string into a valid plan for `q`. Total: every string
/// maps to a plan; unused trailing tokens are ignored and single-table
/// queries ignore all tokens.
pub fn decode_plan(t: &PlanTokenString, q: &ConjunctiveQuery) -> Result<PhysicalPlan, CodecError> {
    let n = q.tables().len();
    if n == 0 || n > PLAN_TOKENS + 1 {
        return Err(CodecError::TooManyTables { tables: n, max: PLAN_TOKENS + 1 });
    }
    let mut forest: Vec<PhysicalPlan> =
        q.tables().iter().map(|&t| PhysicalPlan::scan(t, q.predicates_of(t))).collect();
    for step in 0..n - 1 {
        let candidates = candidate_pairs(&forest, q);
        debug_assert!(!candidates.is_empty(), "connected query always has a candidate");
        let v = t.tokens()[step] as usize;
        let (i, j, edges) = candidates[v % candidates.len()].clone();
        let op = JoinOp::ALL[(v / candidates.len()) % 3];
        let b = forest.remove(j);
        let a = forest.remove(i);
        forest.push(PhysicalPlan::join(op, a, b, edges));
    }
    Ok(forest.pop().expect("forest reduces to a single tree"))
}

/// Encodes a plan as the canonical minimal-token string: replays the decode
/// state machine along `p`'s join sequence (bottom-up, ties by canonical
/// pair order), emitting the smallest token selecting each (pair, operator).
pub fn encode_plan(p: &PhysicalPlan, q: &ConjunctiveQuery) -> Result<PlanTokenString, CodecError> {
    p.validate_for(q).map_err(CodecError::NotAPlan)?;
    let n = q.tables().len();
    let mut forest: Vec<PhysicalPlan> =
        q.tables().iter().map(|&t| PhysicalPlan::scan(t, q.predicates_of(t))).collect();
    let mut nodes: Vec<&PhysicalPlan> = Vec::new();
    collect_joins(p, &mut nodes);
    let mut tokens = Vec::with_capacity(n - 1);

    for _ in 0..n.saturating_sub(1) {
        let candidates = candidate_pairs(&forest, q);
        let mut chosen: Option<(usize, JoinOp)> = None;
        'outer: for (idx, (i, j, _)) in candidates.iter().enumerate() {
            for node in &nodes {
                if let PhysicalPlan::Join { op, left, right, .. } = node {
                    let matches = (forest[*i] == **left && forest[*j] == **right)
                        || (forest[*j] == **left && forest[*i] == **right);
                    if matches {
                        chosen = Some((idx, *op));
                        break 'outer;
                    }
                }
            }
        }
        let (idx, op) = chosen.expect("valid plan always has a ready join");
        let op_idx = JoinOp::ALL.iter().position(|o| *o == op).unwrap() as u64;
        let token = op_idx * candidates.len() as u64 + idx as u64;
        if token >= PLAN_VOCAB as u64 {
            return Err(CodecError::TokenCapacity { needed: token });
        }
        tokens.push(token as u8);
        let (i, j, edges) = candidates[idx].clone();
        let b = forest.remove(j);
        let a = forest.remove(i);
        forest.push(PhysicalPlan::join(op, a, b, edges));
    }
    debug_assert_eq!(&forest[0], p);
    PlanTokenString::from_prefix(&tokens)
}

fn collect_joins<'a>(p: &'a PhysicalPlan, out: &mut Vec<&'a PhysicalPlan>) {
    if let PhysicalPlan::Join { left, right, .. } = p {
        out.push(p);
        collect_joins(left, out);
        collect_joins(right, out);
    }
}

/// Exhaustively enumerates every valid plan (all tree shapes times all
/// operator assignments), duplicate-free. Errors out before building
/// anything if the count exceeds `limit`.
pub fn enumerate_plans(q: &ConjunctiveQuery, limit: u128) -> Result<Vec<PhysicalPlan>, CodecError> {
    let n = q.tables().len();
    if n > 20 {
        return Err(CodecError::TooManyTables { tables: n, max: 20 });
    }
    let tables = q.tables();
    let full: u64 = (1u64 << n) - 1;

    // Count first so the limit guard costs nothing.
    let mut counts: Vec<u128> = vec![0; (full + 1) as usize];
    for i in 0..n {
        counts[1usize << i] = 1;
    }
    for s in 1..=full {
        if s.count_ones() < 2 {
            continue;
        }
        let mut total = 0u128;
        for_each_split(s, tables, q, |l, r, _| {
            total = total.saturating_add(counts[l as usize].saturating_mul(counts[r as usize]).saturating_mul(3));
        });
        counts[s as usize] = total;
    }
    if counts[full as usize] > limit {
        return Err(CodecError::TooManyPlans { count: counts[full as usize], limit });
    }

    let mut memo: Vec<Option<Vec<PhysicalPlan>>> = vec![None; (full + 1) as usize];
    for (i, &t) in tables.iter().enumerate() {
        memo[1usize << i] = Some(vec![PhysicalPlan::scan(t, q.predicates_of(t))]);
    }
    for s in 1..=full {
        if s.count_ones() < 2 {
            continue;
        }
        let mut plans = Vec::new();
        for_each_split(s, tables, q, |l, r, crossing| {
            let (lp, rp) = (memo[l as usize].as_ref(), memo[r as usize].as_ref());
            if let (Some(lp), Some(rp)) = (lp, rp) {
                for a in lp {
                    for b in rp {
                        for op in JoinOp::ALL {
                            plans.push(PhysicalPlan::join(op, a.clone(), b.clone(), crossing.to_vec()));
                        }
                    }
                }
            }
        });
        memo[s as usize] = Some(plans);
    }
    Ok(memo[full as usize].take().unwrap_or_default())
}

/// Visits each unordered split of `s` into connected-by-an-edge halves,
/// with the half containing the lowest bit first.
fn for_each_split(
    s: u64,
    tables: &[crate::catalog::TableId],
    q: &ConjunctiveQuery,
    mut visit: impl FnMut(u64, u64, &[JoinEdge]),
) {
    let bit_of = |t: crate::catalog::TableId| tables.iter().position(|&x| x == t).unwrap();
    let low = s & s.wrapping_neg();
    let mut l = (s - 1) & s;
    while l > 0 {
        if l & low != 0 {
            let r = s ^ l;
            let crossing: Vec<JoinEdge> = q
                .joins()
                .iter()
                .filter(|e| {
                    let lb = bit_of(e.left.table);
                    let rb = bit_of(e.right.table);
                    (l >> lb & 1 == 1 && r >> rb & 1 == 1) || (r >> lb & 1 == 1 && l >> rb & 1 == 1)
                })
                .copied()
                .collect();
            if !crossing.is_empty() {
                visit(l, r, &crossing);
            }
        }
        l = (l - 1) & s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::tests_support::chain_catalog;
    use crate::catalog::{Catalog, TableId};

    fn chain_query(cat: &Catalog, n: usize) -> ConjunctiveQuery {
        ConjunctiveQuery::new((0..n).map(TableId), cat.join_graph().iter().copied().take(n - 1), [])
    }

    #[test]
    fn zero_tokens_build_left_deep_hash_plan() {
        // Step 1 candidates ((t0,t1),(t1,t2)); v=0 picks (t0,t1) with op 0,
        // step 2 has a single candidate and op 0 again.
        let cat = chain_catalog(3);
        let q = chain_query(&cat, 3);
        let plan = decode_plan(&PlanTokenString::zeros(), &q).unwrap();
        let expected = PhysicalPlan::join(
            JoinOp::HashBuildLeft,
            PhysicalPlan::join(
                JoinOp::HashBuildLeft,
                PhysicalPlan::scan(TableId(0), vec![]),
                PhysicalPlan::scan(TableId(1), vec![]),
                vec![cat.join_graph()[0]],
            ),
            PhysicalPlan::scan(TableId(2), vec![]),
            vec![cat.join_graph()[1]],
        );
        assert_eq!(plan, expected);
    }

    #[test]
    fn tokens_one_two_build_right_deep_mixed_plan() {
        // v=1: pair 1 mod 2 = (t1,t2), op (1 div 2) mod 3 = 0;
        // v=2: single pair, op (2 div 1) mod 3 = 2 (nested loop).
        let cat = chain_catalog(3);
        let q = chain_query(&cat, 3);
        let t = PlanTokenString::from_prefix(&[1, 2]).unwrap();
        let plan = decode_plan(&t, &q).unwrap();
        let expected = PhysicalPlan::join(
            JoinOp::NestedLoop,
            PhysicalPlan::scan(TableId(0), vec![]),
            PhysicalPlan::join(
                JoinOp::HashBuildLeft,
                PhysicalPlan::scan(TableId(1), vec![]),
                PhysicalPlan::scan(TableId(2), vec![]),
                vec![cat.join_graph()[1]],
            ),
            vec![cat.join_graph()[0]],
        );
        assert_eq!(plan, expected);
    }

    #[test]
    fn single_table_ignores_all_tokens() {
        let cat = chain_catalog(1);
        let q = ConjunctiveQuery::single_table(TableId(0));
        let t = PlanTokenString::from_prefix(&[63, 17, 5]).unwrap();
        let plan = decode_plan(&t, &q).unwrap();
        assert!(matches!(plan, PhysicalPlan::Scan { .. }));
    }

    #[test]
    fn aliased_strings_decode_to_same_plan_and_encode_canonically() {
        // 6 mod 2 = 0, (6 div 2) mod 3 = 0; 3 mod 1 = 0, 3 mod 3 = 0: the
        // [6,3] string aliases [0,0].
        let cat = chain_catalog(3);
        let q = chain_query(&cat, 3);
        let a = decode_plan(&PlanTokenString::zeros(), &q).unwrap();
        let b = decode_plan(&PlanTokenString::from_prefix(&[6, 3]).unwrap(), &q).unwrap();
        assert_eq!(a, b);
        let encoded = encode_plan(&b, &q).unwrap();
        assert_eq!(encoded, PlanTokenString::zeros());
    }

    #[test]
    fn encode_decode_round_trip_is_identity() {
        let cat = chain_catalog(4);
        let q = chain_query(&cat, 4);
        for seed in 0..200u8 {
            let t = PlanTokenString::from_prefix(&[seed % 64, seed.wrapping_mul(7) % 64, seed.wrapping_mul(13) % 64])
                .unwrap();
            let plan = decode_plan(&t, &q).unwrap();
            let enc = encode_plan(&plan, &q).unwrap();
            let again = decode_plan(&enc, &q).unwrap();
            assert_eq!(plan, again);
            // Canonical idempotence: encode(decode(enc)) is a fixed point.
            assert_eq!(encode_plan(&again, &q).unwrap(), enc);
        }
    }

    #[test]
    fn two_table_query_has_three_plans() {
        let cat = chain_catalog(2);
        let q = chain_query(&cat, 2);
        let plans = enumerate_plans(&q, 1_000).unwrap();
        assert_eq!(plans.len(), 3);
    }

    #[test]
    fn three_table_chain_has_eighteen_plans() {
        let cat = chain_catalog(3);
        let q = chain_query(&cat, 3);
        let plans = enumerate_plans(&q, 1_000).unwrap();
        assert_eq!(plans.len(), 18);
        // Duplicate-free.
        let set: std::collections::BTreeSet<_> = plans.iter().collect();
        assert_eq!(set.len(), 18);
    }

    #[test]
    fn single_table_has_one_plan() {
        let cat = chain_catalog(1);
        let q = ConjunctiveQuery::single_table(TableId(0));
        assert_eq!(enumerate_plans(&q, 10).unwrap().len(), 1);
    }

    #[test]
    fn limit_guard_fires() {
        let cat = chain_catalog(3);
        let q = chain_query(&cat, 3);
        assert!(matches!(
            enumerate_plans(&q, 17).unwrap_err(),
            CodecError::TooManyPlans { count: 18, limit: 17 }
        ));
    }

    #[test]
    fn every_enumerated_plan_round_trips() {
        let cat = chain_catalog(4);
        let q = chain_query(&cat, 4);
        let plans = enumerate_plans(&q, 10_000).unwrap();
        for p in &plans {
            let t = encode_plan(p, &q).unwrap();
            assert_eq!(&decode_plan(&t, &q).unwrap(), p);
        }
    }
}
