//! Independent checks of route partitions and antichain certificates, and
//! solver comparison statistics.
//!
//! Everything here works from `compare_trips` and the canonical tie-break
//! only; none of it reads solver internals.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::order::{canonical_cmp, group_by_stop_sequence};
use crate::solve::{solve_greedy, solve_optimal, solve_trivial, AntichainCertificate, RoutePartition};
use crate::timetable::{compare_trips, Comparison, StopSequence, Timetable, Trip, TripId};

/// Cap on sampled non-adjacent pairs per route.
pub const SAMPLE_CAP: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    /// A trip is missing from the partition or listed more than once.
    Coverage,
    /// Trips of one route follow different stop sequences.
    Eq1,
    /// Two trips of one route overtake each other.
    Eq2,
    /// Two comparable trips are listed in the wrong order.
    Order,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Coverage => "coverage",
            Condition::Eq1 => "eq1",
            Condition::Eq2 => "eq2",
            Condition::Order => "order",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub route: Option<String>,
    pub trips: Vec<TripId>,
    pub condition: Condition,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.condition)?;
        if let Some(r) = &self.route {
            write!(f, " route={r}")?;
        }
        let trips: Vec<&str> = self.trips.iter().map(TripId::as_str).collect();
        write!(f, " trips={}", trips.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub groups_checked: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("route {route} names unknown trip {trip}")]
    UnknownTrip { route: String, trip: TripId },
}

fn pair_violation(a: &Trip, b: &Trip) -> Option<Condition> {
    match compare_trips(a, b) {
        Comparison::Less => None,
        Comparison::Equal if canonical_cmp(a, b).is_lt() => None,
        Comparison::Equal | Comparison::Greater => Some(Condition::Order),
        Comparison::Incomparable => Some(Condition::Eq2),
        Comparison::DifferentShape => Some(Condition::Eq1),
    }
}

/// Checks that `partition` covers `timetable` exactly once and that every
/// route is a chain in listed order. Adjacent pairs are all checked; up to
/// `min(len², 100)` random non-adjacent pairs per route are checked on top.
pub fn verify_partition(
    partition: &RoutePartition,
    timetable: &Timetable,
) -> Result<VerificationReport, VerifyError> {
    let mut violations = Vec::new();
    let mut seen: HashMap<&TripId, usize> = HashMap::new();
    let mut sequences: HashSet<StopSequence> = HashSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);

    for route in &partition.routes {
        let mut trips = Vec::with_capacity(route.trips.len());
        for id in &route.trips {
            let trip = timetable
                .trip(id.as_str())
                .ok_or_else(|| VerifyError::UnknownTrip {
                    route: route.id.clone(),
                    trip: id.clone(),
                })?;
            *seen.entry(id).or_default() += 1;
            trips.push(trip);
        }
        let Some(first) = trips.first() else {
            continue;
        };
        sequences.insert(first.stop_sequence());
        let mut report = |cond: Condition, a: &Trip, b: &Trip| {
            violations.push(Violation {
                route: Some(route.id.clone()),
                trips: vec![a.id().clone(), b.id().clone()],
                condition: cond,
            })
        };
        for t in &trips[1..] {
            if !t.same_shape(first) {
                report(Condition::Eq1, first, t);
            }
        }
        for w in trips.windows(2) {
            if let Some(c) = pair_violation(w[0], w[1]).filter(|c| *c != Condition::Eq1) {
                report(c, w[0], w[1]);
            }
        }
        let n = trips.len();
        if n >= 3 {
            let samples = (n * n).min(SAMPLE_CAP);
            let mut checked = HashSet::new();
            for _ in 0..samples {
                let i = rng.random_range(0..n - 2);
                let j = rng.random_range(i + 2..n);
                if checked.insert((i, j)) {
                    if let Some(c) = pair_violation(trips[i], trips[j]).filter(|c| *c != Condition::Eq1) {
                        report(c, trips[i], trips[j]);
                    }
                }
            }
        }
    }

    for trip in timetable.trips() {
        match seen.get(trip.id()) {
            Some(1) => {}
            _ => violations.push(Violation {
                route: None,
                trips: vec![trip.id().clone()],
                condition: Condition::Coverage,
            }),
        }
    }

    Ok(VerificationReport {
        valid: violations.is_empty(),
        violations,
        groups_checked: sequences.len(),
    })
}

/// True iff every group of `partition` has a certificate set of exactly its
/// route count whose members pairwise overtake.
pub fn verify_certificate(
    cert: &AntichainCertificate,
    partition: &RoutePartition,
    timetable: &Timetable,
) -> bool {
    let mut routes_per_group: BTreeMap<StopSequence, usize> = BTreeMap::new();
    for route in &partition.routes {
        let Some(first) = route.trips.first().and_then(|id| timetable.trip(id.as_str())) else {
            return false;
        };
        *routes_per_group.entry(first.stop_sequence()).or_default() += 1;
    }
    if routes_per_group.len() != cert.per_group.len() {
        return false;
    }
    routes_per_group.iter().all(|(sequence, &count)| {
        let Some(ids) = cert.per_group.get(sequence) else {
            return false;
        };
        if ids.len() != count {
            return false;
        }
        let Some(trips) = ids
            .iter()
            .map(|id| {
                timetable
                    .trip(id.as_str())
                    .filter(|t| t.stop_sequence() == *sequence)
            })
            .collect::<Option<Vec<_>>>()
        else {
            return false;
        };
        (0..trips.len()).all(|i| {
            (i + 1..trips.len()).all(|j| compare_trips(trips[i], trips[j]) == Comparison::Incomparable)
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupStats {
    pub stop_sequence: StopSequence,
    pub trips: usize,
    pub optimal: usize,
    pub greedy: usize,
    pub trivial: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub trips: usize,
    pub optimal: usize,
    pub greedy: usize,
    pub trivial: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonStats {
    pub groups: Vec<GroupStats>,
    pub totals: Totals,
    pub groups_where_greedy_suboptimal: usize,
}

/// Runs the optimal, greedy, and trivial solvers on the same input and
/// tabulates route counts per group.
pub fn compare_solvers(timetable: &Timetable) -> ComparisonStats {
    let (optimal, _) = solve_optimal(timetable);
    let greedy = solve_greedy(timetable);
    let trivial = solve_trivial(timetable);
    let index = group_by_stop_sequence(timetable);
    let count = |p: &RoutePartition, s: &StopSequence| p.per_group_counts.get(s).copied().unwrap_or(0);

    let groups: Vec<GroupStats> = index
        .groups()
        .map(|g| GroupStats {
            stop_sequence: g.sequence().clone(),
            trips: g.len(),
            optimal: count(&optimal, g.sequence()),
            greedy: count(&greedy, g.sequence()),
            trivial: count(&trivial, g.sequence()),
        })
        .collect();
    let totals = groups.iter().fold(Totals::default(), |t, g| Totals {
        trips: t.trips + g.trips,
        optimal: t.optimal + g.optimal,
        greedy: t.greedy + g.greedy,
        trivial: t.trivial + g.trivial,
    });
    ComparisonStats {
        groups_where_greedy_suboptimal: groups.iter().filter(|g| g.greedy > g.optimal).count(),
        groups,
        totals,
    }
}
