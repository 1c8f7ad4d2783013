//! FIFO route partitions.
//!
//! Each stop-sequence group is solved on its own. The optimal solver finds
//! a minimum chain partition of the group's precedence order through a
//! maximum matching between a left and a right copy of the members: every
//! matched pair `(i, j)` makes `j` the route successor of `i`, so the route
//! count is `members - matching`. The unmatched-side König cover yields a
//! maximum antichain of the same size, which certifies optimality.

pub mod brute;
pub mod matching;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::order::{build_precedence, group_by_stop_sequence, PrecedenceRelation, TripGroup};
use crate::timetable::{Route, StopSequence, Timetable, TripId};

pub use brute::{brute_force_min, max_antichain_bruteforce, BRUTE_ANTICHAIN_LIMIT, BRUTE_PARTITION_LIMIT};
use matching::hopcroft_karp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Optimal,
    Greedy,
    Trivial,
    Brute,
    /// Read from a file that does not record its algorithm.
    #[value(skip)]
    External,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Optimal => "optimal",
            Algorithm::Greedy => "greedy",
            Algorithm::Trivial => "trivial",
            Algorithm::Brute => "brute",
            Algorithm::External => "external",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutePartition {
    pub routes: Vec<Route>,
    pub algorithm: Algorithm,
    pub per_group_counts: BTreeMap<StopSequence, usize>,
    /// Trips with a single event; any grouping of them is trivially valid
    /// as long as their times are ordered.
    pub single_event_trips: usize,
}

impl RoutePartition {
    pub fn total_routes(&self) -> usize {
        self.routes.len()
    }

    pub fn total_trips(&self) -> usize {
        self.routes.iter().map(|r| r.trips.len()).sum()
    }
}

/// A pairwise-incomparable set of trips per group.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AntichainCertificate {
    pub per_group: BTreeMap<StopSequence, Vec<TripId>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("group {sequence} has {size} trips, above the brute-force limit of {limit}")]
    AboveLimit {
        sequence: StopSequence,
        size: usize,
        limit: usize,
    },
    #[error("`external` names imported partitions, not a solver")]
    NotASolver,
}

/// Output of one group: chains of canonical member positions.
struct GroupChains<'g> {
    group: &'g TripGroup,
    chains: Vec<Vec<usize>>,
}

/// Route ids are `R` plus a zero-padded ordinal, counted over all groups in
/// stop-sequence order.
fn route_id(ordinal: usize, total: usize) -> String {
    let width = total.to_string().len().max(4);
    format!("R{ordinal:0width$}")
}

fn assemble(timetable: &Timetable, algorithm: Algorithm, groups: Vec<GroupChains<'_>>) -> RoutePartition {
    let total: usize = groups.iter().map(|g| g.chains.len()).sum();
    let mut routes = Vec::with_capacity(total);
    let mut per_group_counts = BTreeMap::new();
    for GroupChains { group, chains } in groups {
        per_group_counts.insert(group.sequence().clone(), chains.len());
        for chain in chains {
            routes.push(Route {
                id: route_id(routes.len() + 1, total),
                sequence: group.sequence().clone(),
                trips: chain.into_iter().map(|i| group.members()[i].clone()).collect(),
            });
        }
    }
    RoutePartition {
        routes,
        algorithm,
        per_group_counts,
        single_event_trips: timetable.trips().iter().filter(|t| t.len() == 1).count(),
    }
}

/// Minimum chain partition of one group in canonical member positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupOptimum {
    pub chains: Vec<Vec<usize>>,
    /// Pairwise incomparable members, as many as there are chains.
    pub antichain: Vec<usize>,
    pub matching_size: usize,
}

pub fn optimal_group(rel: &PrecedenceRelation) -> GroupOptimum {
    let n = rel.len();
    let m = hopcroft_karp(rel);
    let chains: Vec<Vec<usize>> = (0..n)
        .filter(|&j| m.right_to_left[j].is_none())
        .map(|head| {
            let mut chain = vec![head];
            let mut cur = head;
            while let Some(next) = m.left_to_right[cur] {
                chain.push(next);
                cur = next;
            }
            chain
        })
        .collect();
    let antichain: Vec<usize> = (0..n)
        .filter(|&x| m.left_reached[x] && !m.right_reached[x])
        .collect();
    debug_assert_eq!(chains.len(), n - m.size);
    debug_assert_eq!(antichain.len(), chains.len());
    GroupOptimum {
        chains,
        antichain,
        matching_size: m.size,
    }
}

fn greedy_chains(rel: &PrecedenceRelation) -> Vec<Vec<usize>> {
    let mut chains: Vec<Vec<usize>> = Vec::new();
    for j in 0..rel.len() {
        // Best fit: the feasible route whose last trip is latest.
        let best = chains
            .iter()
            .enumerate()
            .filter_map(|(r, c)| {
                let last = *c.last().expect("routes are never empty");
                rel.dominates(last, j).then_some((last, r))
            })
            .max();
        match best {
            Some((_, r)) => chains[r].push(j),
            None => chains.push(vec![j]),
        }
    }
    chains
}

/// Minimum FIFO partition together with its antichain certificate.
pub fn solve_optimal(timetable: &Timetable) -> (RoutePartition, AntichainCertificate) {
    let index = group_by_stop_sequence(timetable);
    let groups: Vec<&TripGroup> = index.groups().collect();
    let solved: Vec<_> = groups
        .par_iter()
        .map(|&group| {
            let rel = build_precedence(group, timetable);
            let GroupOptimum {
                chains, antichain, ..
            } = optimal_group(&rel);
            (GroupChains { group, chains }, antichain)
        })
        .collect();
    let mut certificate = AntichainCertificate::default();
    let mut chains = Vec::with_capacity(solved.len());
    for (gc, antichain) in solved {
        certificate.per_group.insert(
            gc.group.sequence().clone(),
            antichain
                .into_iter()
                .map(|i| gc.group.members()[i].clone())
                .collect(),
        );
        chains.push(gc);
    }
    (assemble(timetable, Algorithm::Optimal, chains), certificate)
}

/// Greedy best-fit partition: members are taken in canonical order and each
/// joins the feasible route whose last trip is latest.
pub fn solve_greedy(timetable: &Timetable) -> RoutePartition {
    let index = group_by_stop_sequence(timetable);
    let groups: Vec<&TripGroup> = index.groups().collect();
    let chains = groups
        .par_iter()
        .map(|&group| GroupChains {
            group,
            chains: greedy_chains(&build_precedence(group, timetable)),
        })
        .collect();
    assemble(timetable, Algorithm::Greedy, chains)
}

/// One route per trip.
pub fn solve_trivial(timetable: &Timetable) -> RoutePartition {
    let index = group_by_stop_sequence(timetable);
    let chains = index
        .groups()
        .map(|group| GroupChains {
            group,
            chains: (0..group.len()).map(|i| vec![i]).collect(),
        })
        .collect();
    assemble(timetable, Algorithm::Trivial, chains)
}

/// Exhaustive minimum partition of every group. Fails on the first group
/// above `limit`.
pub fn solve_brute(timetable: &Timetable, limit: usize) -> Result<RoutePartition, SolveError> {
    let index = group_by_stop_sequence(timetable);
    if let Some(g) = index.groups().find(|g| g.len() > limit) {
        return Err(SolveError::AboveLimit {
            sequence: g.sequence().clone(),
            size: g.len(),
            limit,
        });
    }
    let groups: Vec<&TripGroup> = index.groups().collect();
    let chains = groups
        .par_iter()
        .map(|&group| {
            brute::min_partition_blocks(group, timetable, limit).map(|chains| GroupChains { group, chains })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(timetable, Algorithm::Brute, chains))
}

/// Result of [`solve`]; only the optimal solver carries a certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub partition: RoutePartition,
    pub certificate: Option<AntichainCertificate>,
}

pub fn solve(
    timetable: &Timetable,
    algorithm: Algorithm,
    brute_limit: usize,
) -> Result<Solution, SolveError> {
    let (partition, certificate) = match algorithm {
        Algorithm::Optimal => {
            let (p, c) = solve_optimal(timetable);
            (p, Some(c))
        }
        Algorithm::Greedy => (solve_greedy(timetable), None),
        Algorithm::Trivial => (solve_trivial(timetable), None),
        Algorithm::Brute => (solve_brute(timetable, brute_limit)?, None),
        Algorithm::External => return Err(SolveError::NotASolver),
    };
    Ok(Solution {
        partition,
        certificate,
    })
}
