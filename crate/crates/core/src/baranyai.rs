//! Partitions of all k-subsets of `[n]` into perfect matchings when `k | n`.
//!
//! The construction adds vertices one at a time. After vertex `l` every
//! round is a multiset of `n/k` disjoint subsets of `[l]` covering `[l]`,
//! and each subset `S` occurs `C(n-l, k-|S|)` times over all rounds. Vertex
//! `l+1` joins exactly one part per round; which part is decided by an
//! integral max flow, whose existence follows from the obvious fractional
//! flow.

use std::collections::{HashMap, HashSet};

use log::{debug, info, warn};
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_ksets, ground_mask, KSet, MAX_GROUND};
use crate::error::{precondition, Error, Result};
use crate::exact::{binom, binom_u64, Rational};
use crate::ksum::Instance;

/// Default cap on `C(n, k)`.
pub const DEFAULT_PARTITION_BUDGET: u64 = 100_000;

/// Node cap for the backtracking fallback.
const FALLBACK_NODES: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSchedule {
    pub n: u32,
    pub k: u32,
    pub rounds: Vec<Vec<KSet>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionPath {
    Flow,
    Backtracking,
}

fn check_args(n: u32, k: u32, budget: u64) -> Result<()> {
    if k == 0 || n == 0 || n % k != 0 {
        return Err(precondition(format!("k = {k} must divide n = {n}")));
    }
    if n > MAX_GROUND {
        return Err(precondition("n above 128"));
    }
    if binom(n as i64, k as i64).to_u64().map_or(true, |c| c > budget) {
        return Err(Error::BudgetExceeded {
            what: "partition size C(n,k)",
            limit: budget,
        });
    }
    Ok(())
}

/// Builds a canonical schedule, by flow rounding when it succeeds and by
/// bounded backtracking otherwise.
pub fn baranyai_partition(n: u32, k: u32, budget: u64) -> Result<PartitionSchedule> {
    baranyai_partition_with_path(n, k, budget).map(|(s, _)| s)
}

pub fn baranyai_partition_with_path(n: u32, k: u32, budget: u64) -> Result<(PartitionSchedule, ConstructionPath)> {
    check_args(n, k, budget)?;
    let (rounds, path) = match flow_rounds(n, k) {
        Some(rounds) => (rounds, ConstructionPath::Flow),
        None => {
            warn!("flow rounding stalled for n={n} k={k}; falling back to backtracking");
            (backtrack_rounds(n, k, FALLBACK_NODES)?, ConstructionPath::Backtracking)
        }
    };
    info!("partition n={n} k={k} built by {path:?}");
    Ok((canonical(n, k, rounds), path))
}

fn canonical(n: u32, k: u32, rounds: Vec<Vec<KSet>>) -> PartitionSchedule {
    let mut rounds: Vec<Vec<Vec<u32>>> = rounds
        .into_iter()
        .map(|r| {
            let mut sets: Vec<Vec<u32>> = r.into_iter().map(KSet::indices).collect();
            sets.sort();
            sets
        })
        .collect();
    rounds.sort();
    PartitionSchedule {
        n,
        k,
        rounds: rounds
            .into_iter()
            .map(|r| {
                r.iter()
                    .map(|s| KSet::from_indices(s).expect("valid indices"))
                    .collect()
            })
            .collect(),
    }
}

fn flow_rounds(n: u32, k: u32) -> Option<Vec<Vec<KSet>>> {
    let m = binom_u64(n as i64 - 1, k as i64 - 1) as usize;
    let parts = (n / k) as usize;
    let mut rounds = vec![vec![KSet::EMPTY; parts]; m];
    for l in 0..n {
        let remaining = (n - l) as i64;
        // distinct parts and their per-round multiplicities
        let mut ids: HashMap<KSet, usize> = HashMap::new();
        let mut distinct: Vec<KSet> = Vec::new();
        for r in &rounds {
            for s in r {
                ids.entry(*s).or_insert_with(|| {
                    distinct.push(*s);
                    distinct.len() - 1
                });
            }
        }
        let source = 0;
        let sink = 1;
        let round_node = |j: usize| 2 + j;
        let set_node = |i: usize| 2 + m + i;
        let mut g = Dinic::new(2 + m + distinct.len());
        for (j, r) in rounds.iter().enumerate() {
            g.add_edge(source, round_node(j), 1);
            let mut mult: HashMap<usize, i64> = HashMap::new();
            for s in r {
                *mult.entry(ids[s]).or_default() += 1;
            }
            let mut mult: Vec<_> = mult.into_iter().collect();
            mult.sort();
            for (i, c) in mult {
                if distinct[i].len() < k {
                    g.add_edge(round_node(j), set_node(i), c);
                }
            }
        }
        for (i, s) in distinct.iter().enumerate() {
            let cap = binom_u64(remaining - 1, k as i64 - s.len() as i64 - 1) as i64;
            if cap > 0 {
                g.add_edge(set_node(i), sink, cap);
            }
        }
        let value = g.max_flow(source, sink);
        debug!("vertex {}: flow {value} of {m}", l + 1);
        if value != m as i64 {
            return None;
        }
        let chosen = g.saturated_targets(m, |j| round_node(j), |v| v - 2 - m);
        for (j, i) in chosen.into_iter().enumerate() {
            let s = distinct[i?];
            let slot = rounds[j].iter().position(|t| *t == s)?;
            rounds[j][slot] = s.with(l + 1);
        }
    }
    Some(rounds)
}

struct Dinic {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; nodes],
            iter: vec![0; nodes],
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: i64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, f: i64) -> i64 {
        if u == t {
            return f;
        }
        while self.iter[u] < self.adj[u].len() {
            let e = self.adj[u][self.iter[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, f.min(self.cap[e]));
                if d > 0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
        flow
    }

    /// For each of `count` left nodes, the target whose edge carries flow.
    fn saturated_targets(
        &self,
        count: usize,
        node: impl Fn(usize) -> usize,
        target: impl Fn(usize) -> usize,
    ) -> Vec<Option<usize>> {
        (0..count)
            .map(|j| {
                self.adj[node(j)]
                    .iter()
                    .find(|&&e| e % 2 == 0 && self.cap[e ^ 1] > 0)
                    .map(|&e| target(self.to[e]))
            })
            .collect()
    }
}

/// Fills rounds one after another; each round covers its lowest uncovered
/// vertex with an unused k-set, backtracking on dead ends.
pub(crate) fn backtrack_rounds(n: u32, k: u32, node_budget: u64) -> Result<Vec<Vec<KSet>>> {
    let all: Vec<KSet> = enumerate_ksets(n, k).collect();
    let rounds = binom_u64(n as i64 - 1, k as i64 - 1) as usize;
    let per_round = (n / k) as usize;
    let mut used: HashSet<KSet> = HashSet::new();
    let mut chosen: Vec<KSet> = Vec::new();
    let mut nodes = 0u64;

    fn go(
        all: &[KSet],
        full: u128,
        per_round: usize,
        total: usize,
        used: &mut HashSet<KSet>,
        chosen: &mut Vec<KSet>,
        nodes: &mut u64,
        budget: u64,
    ) -> Result<bool> {
        if chosen.len() == total {
            return Ok(true);
        }
        *nodes += 1;
        if *nodes > budget {
            return Err(Error::BudgetExceeded {
                what: "partition backtracking",
                limit: budget,
            });
        }
        let start = chosen.len() - chosen.len() % per_round;
        let covered = chosen[start..].iter().fold(0u128, |acc, s| acc | s.mask());
        let free = full & !covered;
        let lowest = free.trailing_zeros() + 1;
        for &s in all {
            if s.contains(lowest) && s.mask() & covered == 0 && !used.contains(&s) {
                used.insert(s);
                chosen.push(s);
                if go(all, full, per_round, total, used, chosen, nodes, budget)? {
                    return Ok(true);
                }
                chosen.pop();
                used.remove(&s);
            }
        }
        Ok(false)
    }

    let found = go(
        &all,
        ground_mask(n),
        per_round,
        rounds * per_round,
        &mut used,
        &mut chosen,
        &mut nodes,
        node_budget,
    )?;
    if !found {
        return Err(precondition("no partition exists"));
    }
    Ok(chosen.chunks(per_round).map(|c| c.to_vec()).collect())
}

/// Independent checker: every round is a perfect matching of `[n]` and
/// every k-subset appears in exactly one round.
pub fn validate_schedule(s: &PartitionSchedule) -> bool {
    if s.k == 0 || s.n == 0 || s.n % s.k != 0 || s.n > MAX_GROUND {
        return false;
    }
    let full = ground_mask(s.n);
    let per_round = (s.n / s.k) as usize;
    let rounds_ok = s.rounds.len() as u64 == binom_u64(s.n as i64 - 1, s.k as i64 - 1)
        && s.rounds.par_iter().all(|r| {
            r.len() == per_round
                && r.iter().all(|t| t.len() == s.k)
                && r.iter().fold(Some(0u128), |acc, t| {
                    acc.filter(|a| a & t.mask() == 0).map(|a| a | t.mask())
                }) == Some(full)
        });
    if !rounds_ok {
        return false;
    }
    let mut seen = HashSet::new();
    s.rounds.iter().flatten().all(|t| seen.insert(*t)) && seen.len() as u64 == binom_u64(s.n as i64, s.k as i64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisibleCount {
    pub count: u64,
    pub per_round: Vec<u64>,
    pub required: u64,
    pub holds: bool,
}

/// Counts nonnegative k-sums round by round along a schedule. Each round
/// partitions `[n]`, so some member has a nonnegative sum.
pub fn divisible_case_count(inst: &Instance, k: u32, budget: u64) -> Result<DivisibleCount> {
    let schedule = baranyai_partition(inst.n() as u32, k, budget)?;
    divisible_case_count_with(inst, &schedule)
}

pub fn divisible_case_count_with(inst: &Instance, schedule: &PartitionSchedule) -> Result<DivisibleCount> {
    if schedule.n as usize != inst.n() {
        return Err(precondition("schedule and instance sizes differ"));
    }
    if inst.total().is_negative() {
        return Err(precondition("instance total is negative"));
    }
    let per_round: Vec<u64> = schedule
        .rounds
        .iter()
        .map(|r| {
            r.iter()
                .filter(|t| !t.iter().map(|i| inst.get(i as usize)).sum::<Rational>().is_negative())
                .count() as u64
        })
        .collect();
    let count = per_round.iter().sum();
    let required = binom_u64(schedule.n as i64 - 1, schedule.k as i64 - 1);
    Ok(DivisibleCount {
        holds: count >= required && per_round.iter().all(|&c| c >= 1),
        count,
        per_round,
        required,
    })
}
