//! Exact local, Svetlichny and G-group bounds by exhaustive enumeration.
//!
//! The expressions only see the outcome sum modulo `k`, so a group of parties
//! is fully described by a table from its joint settings to a residue. For a
//! fixed partition every group but one (the largest) is enumerated; the
//! remaining group is optimized pointwise, which is exact because its table
//! entries enter the value independently.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::report::{BoundKind, BoundReport, BoundValue, Method};
use crate::scenario::{pow_sat, BellExpression, Scenario};
use crate::tensor::ExpandedTensor;

/// Default cap on the estimated number of coefficient evaluations.
pub const DEFAULT_ENUMERATION_GUARD: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundOptions {
    pub guard: u128,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { guard: DEFAULT_ENUMERATION_GUARD }
    }
}

/// One response table per party: `responses[i][s_i]` is party `i+1`'s outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeterministicStrategy {
    responses: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn new(responses: Vec<Vec<usize>>) -> Self {
        Self { responses }
    }

    pub fn responses(&self) -> &[Vec<usize>] {
        &self.responses
    }

    pub fn behavior(&self, scenario: Scenario) -> Result<Behavior> {
        Behavior::deterministic(scenario, &self.responses)
    }
}

/// Parties (1-based, increasing within a group) split into groups, each
/// with a table from its joint settings to an outcome-sum residue.
///
/// `tables[j]` is indexed by the group's joint settings in lexicographic
/// order of its members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupedStrategy {
    groups: Vec<Vec<usize>>,
    tables: Vec<Vec<usize>>,
}

impl GroupedStrategy {
    pub fn new(groups: Vec<Vec<usize>>, tables: Vec<Vec<usize>>) -> Self {
        Self { groups, tables }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn tables(&self) -> &[Vec<usize>] {
        &self.tables
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Strategy {
    Deterministic(DeterministicStrategy),
    Grouped(GroupedStrategy),
}

impl Strategy {
    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        let (n, m, k) = (scenario.parties(), scenario.settings(), scenario.outcomes());
        let mismatch = |what: String| Err(Error::DimensionMismatch(format!("strategy for {scenario}: {what}")));
        match self {
            Strategy::Deterministic(d) => {
                if d.responses.len() != n {
                    return mismatch(format!("{} response tables", d.responses.len()));
                }
                if d.responses.iter().any(|t| t.len() != m || t.iter().any(|&r| r >= k)) {
                    return mismatch("response table out of shape".into());
                }
            }
            Strategy::Grouped(g) => {
                if g.groups.len() != g.tables.len() {
                    return mismatch("group and table counts differ".into());
                }
                let mut seen = vec![false; n];
                for group in &g.groups {
                    if group.is_empty() || group.windows(2).any(|w| w[0] >= w[1]) {
                        return mismatch(format!("group {group:?} is empty or unsorted"));
                    }
                    for &p in group {
                        if p == 0 || p > n || std::mem::replace(&mut seen[p - 1], true) {
                            return mismatch(format!("party {p} is invalid or repeated"));
                        }
                    }
                }
                if seen.iter().any(|&s| !s) {
                    return mismatch("groups do not cover every party".into());
                }
                for (group, table) in g.groups.iter().zip(&g.tables) {
                    if table.len() as u128 != pow_sat(m, group.len()) || table.iter().any(|&r| r >= k) {
                        return mismatch(format!("table for group {group:?} out of shape"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Outcome-sum residue produced for settings `s` (dimensions assumed checked).
    fn residue(&self, m: usize, k: usize, s: &[usize]) -> usize {
        let sum: usize = match self {
            Strategy::Deterministic(d) => s.iter().zip(&d.responses).map(|(&si, t)| t[si]).sum(),
            Strategy::Grouped(g) => g
                .groups
                .iter()
                .zip(&g.tables)
                .map(|(group, table)| table[group.iter().fold(0, |acc, &p| acc * m + s[p - 1])])
                .sum(),
        };
        sum % k
    }

    /// Reduced behavior with `P([sum r]_k = residue(s) | s) = 1`.
    pub fn reduced_behavior(&self, scenario: Scenario) -> Result<Behavior> {
        self.check(&scenario)?;
        let (m, k) = (scenario.settings(), scenario.outcomes());
        let mut reduced = Vec::new();
        for s in scenario.settings_vectors() {
            let mut row = vec![0.0; k];
            row[self.residue(m, k, &s)] = 1.0;
            reduced.extend(row);
        }
        Behavior::from_reduced(scenario, reduced)
    }
}

/// `sum_s coefficient(s, r(s))` where `r(s)` is the strategy's residue.
pub fn evaluate_on_strategy(expr: &BellExpression, strategy: &Strategy) -> Result<f64> {
    let scenario = expr.scenario();
    strategy.check(&scenario)?;
    let (m, k) = (scenario.settings(), scenario.outcomes());
    let terms = scenario
        .settings_vectors()
        .map(|s| expr.coefficient_by_sum(s.iter().sum(), strategy.residue(m, k, &s)));
    Ok(if expr.function().is_integral() {
        terms.map(|c| c as i64).sum::<i64>() as f64
    } else {
        terms.sum()
    })
}

/// Same as [`evaluate_on_strategy`] for an arbitrary residue-keyed tensor.
pub fn evaluate_tensor_on_strategy(tensor: &ExpandedTensor, strategy: &Strategy) -> Result<f64> {
    let scenario = tensor.scenario();
    strategy.check(&scenario)?;
    let (m, k) = (scenario.settings(), scenario.outcomes());
    Ok(scenario
        .settings_vectors()
        .enumerate()
        .map(|(idx, s)| tensor.values()[idx * k + strategy.residue(m, k, &s)])
        .sum())
}

/// All partitions of `0..n` into exactly `groups` blocks, in restricted-growth order.
pub fn partitions(n: usize, groups: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, g: usize, labels: &mut Vec<usize>, used: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if n - i < g - used {
            return;
        }
        if i == n {
            let mut blocks = vec![Vec::new(); g];
            for (p, &l) in labels.iter().enumerate() {
                blocks[l].push(p);
            }
            out.push(blocks);
            return;
        }
        for l in 0..=used.min(g - 1) {
            labels.push(l);
            rec(i + 1, n, g, labels, used.max(l + 1), out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    if groups >= 1 && groups <= n {
        rec(0, n, groups, &mut Vec::with_capacity(n), 0, &mut out);
    }
    out
}

/// Last of the largest blocks, so the enumeration order stays lexicographic in party order.
fn free_block(blocks: &[Vec<usize>]) -> usize {
    let mut best = 0;
    for (i, b) in blocks.iter().enumerate() {
        if b.len() >= blocks[best].len() {
            best = i;
        }
    }
    best
}

fn partition_cost(scenario: &Scenario, blocks: &[Vec<usize>]) -> u128 {
    let (m, k) = (scenario.settings(), scenario.outcomes());
    let free = free_block(blocks);
    let digits = blocks
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != free)
        .fold(0u128, |acc, (_, b)| acc.saturating_add(pow_sat(m, b.len())));
    let outer = if digits > u32::MAX as u128 {
        u128::MAX
    } else {
        (k as u128).checked_pow(digits as u32).unwrap_or(u128::MAX)
    };
    outer
        .saturating_mul(scenario.num_settings_vectors_sat())
        .saturating_mul(k as u128)
}

/// Estimated coefficient evaluations needed for the `groups`-group bound.
pub fn enumeration_cost(scenario: &Scenario, groups: usize) -> u128 {
    partitions(scenario.parties(), groups)
        .iter()
        .fold(0u128, |acc, p| acc.saturating_add(partition_cost(scenario, p)))
}

trait Score: Copy + Send + Sync + PartialOrd + std::ops::Add<Output = Self> + Default {}
impl Score for i64 {}
impl Score for f64 {}

/// Precomputed index arithmetic for one partition.
struct PartitionPlan {
    k: usize,
    free_offsets: Vec<usize>,
    /// Global settings offset of every outer joint tuple.
    outer_offsets: Vec<usize>,
    /// For every outer tuple, the digit position it reads in each outer table.
    outer_digits: Vec<usize>,
    outer_blocks: usize,
    /// Table sizes of the outer blocks, in enumeration order.
    table_sizes: Vec<usize>,
    total_digits: usize,
}

impl PartitionPlan {
    fn new(scenario: &Scenario, blocks: &[Vec<usize>], free: usize) -> Self {
        let (n, m, k) = (scenario.parties(), scenario.settings(), scenario.outcomes());
        let place = |p: usize| m.pow((n - 1 - p) as u32);
        // joint tuple index t enumerates the block's settings, first member most significant
        let offsets = |block: &[usize]| -> Vec<usize> {
            (0..m.pow(block.len() as u32))
                .map(|mut t| {
                    let mut off = 0;
                    for &p in block.iter().rev() {
                        off += (t % m) * place(p);
                        t /= m;
                    }
                    off
                })
                .collect()
        };
        let outer: Vec<&Vec<usize>> = blocks.iter().enumerate().filter(|&(i, _)| i != free).map(|(_, b)| b).collect();
        let table_sizes: Vec<usize> = outer.iter().map(|b| m.pow(b.len() as u32)).collect();
        let mut starts = Vec::with_capacity(outer.len());
        let mut acc = 0;
        for size in &table_sizes {
            starts.push(acc);
            acc += size;
        }
        let block_offsets: Vec<Vec<usize>> = outer.iter().map(|b| offsets(b)).collect();

        let mut outer_offsets = vec![0usize];
        let mut outer_digits: Vec<Vec<usize>> = vec![Vec::new()];
        for (bi, offs) in block_offsets.iter().enumerate() {
            let mut next_off = Vec::with_capacity(outer_offsets.len() * offs.len());
            let mut next_dig = Vec::with_capacity(next_off.capacity());
            for (base, digits) in outer_offsets.iter().zip(&outer_digits) {
                for (t, off) in offs.iter().enumerate() {
                    next_off.push(base + off);
                    let mut d = digits.clone();
                    d.push(starts[bi] + t);
                    next_dig.push(d);
                }
            }
            outer_offsets = next_off;
            outer_digits = next_dig;
        }
        Self {
            k,
            free_offsets: offsets(&blocks[free]),
            outer_offsets,
            outer_digits: outer_digits.into_iter().flatten().collect(),
            outer_blocks: outer.len(),
            table_sizes,
            total_digits: acc,
        }
    }

    fn decode(&self, mut index: u128, digits: &mut [usize]) {
        for d in digits.iter_mut().rev() {
            *d = (index % self.k as u128) as usize;
            index /= self.k as u128;
        }
    }

    /// Value of the best completion of the outer tables in `digits`;
    /// fills `choice` with the free group's residue per free tuple.
    fn evaluate<T: Score>(&self, values: &[T], digits: &[usize], rho: &mut Vec<usize>, choice: &mut [usize]) -> T {
        let k = self.k;
        let width = self.outer_blocks;
        rho.clear();
        rho.extend((0..self.outer_offsets.len()).map(|w| {
            self.outer_digits[w * width..(w + 1) * width]
                .iter()
                .map(|&p| digits[p])
                .sum::<usize>()
                % k
        }));
        let mut total = T::default();
        for (u, &free_off) in self.free_offsets.iter().enumerate() {
            let mut best = T::default();
            let mut best_r = 0;
            for r in 0..k {
                let mut acc = T::default();
                for (&off, &rw) in self.outer_offsets.iter().zip(rho.iter()) {
                    acc = acc + values[(off + free_off) * k + (rw + r) % k];
                }
                if r == 0 || acc < best {
                    best = acc;
                    best_r = r;
                }
            }
            choice[u] = best_r;
            total = total + best;
        }
        total
    }
}

fn better<T: Score>(a: (T, u128), b: (T, u128)) -> (T, u128) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Minimum over one partition: value, enumeration index and the tables.
fn search_partition<T: Score>(scenario: &Scenario, values: &[T], blocks: &[Vec<usize>]) -> (T, u128, Vec<Vec<usize>>) {
    let free = free_block(blocks);
    let plan = PartitionPlan::new(scenario, blocks, free);
    let k = scenario.outcomes() as u128;
    let total = k.pow(plan.total_digits as u32);
    let free_len = plan.free_offsets.len();

    let scratch = || (vec![0usize; plan.total_digits], Vec::new(), vec![0usize; free_len]);
    let (best_value, best_index) = (0..total as u64)
        .into_par_iter()
        .map_init(scratch, |(digits, rho, choice), idx| {
            plan.decode(idx as u128, digits);
            (plan.evaluate(values, digits, rho, choice), idx as u128)
        })
        .reduce_with(better)
        .expect("at least one strategy");

    let (mut digits, mut rho, mut choice) = scratch();
    plan.decode(best_index, &mut digits);
    plan.evaluate(values, &digits, &mut rho, &mut choice);

    let mut tables = Vec::with_capacity(blocks.len());
    let mut start = 0;
    let mut outer = plan.table_sizes.iter();
    for i in 0..blocks.len() {
        if i == free {
            tables.push(choice.clone());
        } else {
            let size = *outer.next().expect("outer table");
            tables.push(digits[start..start + size].to_vec());
            start += size;
        }
    }
    (best_value, best_index, tables)
}

/// Minimum over all partitions into `groups` blocks; first minimizer wins ties.
fn search<T: Score>(scenario: &Scenario, values: &[T], groups: usize) -> (T, Strategy) {
    let mut best: Option<(T, Vec<Vec<usize>>, Vec<Vec<usize>>)> = None;
    for blocks in partitions(scenario.parties(), groups) {
        let (v, _, tables) = search_partition(scenario, values, &blocks);
        if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
            best = Some((v, blocks, tables));
        }
    }
    let (value, blocks, tables) = best.expect("at least one partition");
    let strategy = if groups == scenario.parties() {
        let mut responses = vec![Vec::new(); groups];
        for (block, table) in blocks.iter().zip(tables) {
            responses[block[0]] = table;
        }
        Strategy::Deterministic(DeterministicStrategy::new(responses))
    } else {
        let groups = blocks.iter().map(|b| b.iter().map(|p| p + 1).collect()).collect();
        Strategy::Grouped(GroupedStrategy::new(groups, tables))
    };
    (value, strategy)
}

fn check_cost(scenario: &Scenario, groups: usize, opts: &BoundOptions) -> Result<()> {
    let cost = enumeration_cost(scenario, groups);
    if cost > opts.guard {
        return Err(Error::EnumerationGuardExceeded { cost, guard: opts.guard });
    }
    Ok(())
}

/// Exact minimum over grouped strategies for a residue-keyed tensor.
pub fn tensor_group_bound(tensor: &ExpandedTensor, groups: usize, opts: &BoundOptions) -> Result<(BoundValue, Strategy)> {
    let scenario = tensor.scenario();
    if groups < 1 || groups > scenario.parties() {
        return Err(Error::InvalidGroupCount { groups, n: scenario.parties() });
    }
    check_cost(&scenario, groups, opts)?;
    Ok(match tensor.as_integers() {
        Some(ints) => {
            let (v, s) = search(&scenario, &ints, groups);
            (BoundValue::Integer(v), s)
        }
        None => {
            let (_, s) = search(&scenario, tensor.values(), groups);
            (BoundValue::Real(evaluate_tensor_on_strategy(tensor, &s)?), s)
        }
    })
}

fn expression_group_bound(
    expr: &BellExpression,
    groups: usize,
    kind: BoundKind,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let scenario = expr.scenario();
    check_cost(&scenario, groups, opts)?;
    let tensor = expr.expand_with_guard(opts.guard.max(crate::scenario::DEFAULT_EXPAND_GUARD))?;
    let (value, witness) = tensor_group_bound(&tensor, groups, opts)?;
    let value = match value {
        BoundValue::Integer(v) => BoundValue::Integer(v),
        BoundValue::Real(_) => BoundValue::Real(evaluate_on_strategy(expr, &witness)?),
    };
    Ok(BoundReport::new(kind, value, Method::CombinatorialExact).with_witness(witness))
}

pub fn local_bound(expr: &BellExpression) -> Result<BoundReport> {
    local_bound_with(expr, &BoundOptions::default())
}

/// Minimum over deterministic local strategies.
pub fn local_bound_with(expr: &BellExpression, opts: &BoundOptions) -> Result<BoundReport> {
    expression_group_bound(expr, expr.scenario().parties(), BoundKind::Local, opts)
}

pub fn svetlichny_bound(expr: &BellExpression) -> Result<BoundReport> {
    svetlichny_bound_with(expr, &BoundOptions::default())
}

/// Minimum over all bipartitions with unrestricted collaboration inside each group.
pub fn svetlichny_bound_with(expr: &BellExpression, opts: &BoundOptions) -> Result<BoundReport> {
    let n = expr.scenario().parties();
    if n < 3 {
        return Err(Error::TooFewParties { n, min: 3 });
    }
    expression_group_bound(expr, 2, BoundKind::Svetlichny, opts)
}

pub fn g_group_bound(expr: &BellExpression, groups: usize) -> Result<BoundReport> {
    g_group_bound_with(expr, groups, &BoundOptions::default())
}

pub fn g_group_bound_with(expr: &BellExpression, groups: usize, opts: &BoundOptions) -> Result<BoundReport> {
    let n = expr.scenario().parties();
    if groups < 2 || groups > n {
        return Err(Error::InvalidGroupCount { groups, n });
    }
    expression_group_bound(expr, groups, BoundKind::GGroup(groups), opts)
}
