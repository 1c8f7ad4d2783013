//! Grouping of trips by stop sequence and the strict precedence order on
//! each group.
//!
//! Members of a group are kept in canonical order: first-stop departure,
//! then the full `(arrival, departure)` tuple of every event, then trip id.
//! Canonical order is a linear extension of the earlier-than relation, and
//! it breaks ties between identically timed trips. The precedence relation
//! `dominates(i, j)` therefore holds exactly when `i < j` canonically and
//! trip `i` is strictly earlier than or equal to trip `j`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use crate::timetable::{compare_times, Comparison, StopSequence, Timetable, Trip, TripId};

/// Groups larger than this use on-demand comparisons instead of a
/// materialized relation.
pub const DENSE_LIMIT: usize = 4096;

/// Canonical order between two trips, meant for trips of one group.
pub fn canonical_cmp(a: &Trip, b: &Trip) -> Ordering {
    fn flat(t: &Trip) -> impl Iterator<Item = crate::timetable::TimePoint> + '_ {
        t.events().iter().flat_map(|e| [e.arrival, e.departure])
    }
    a.events()[0]
        .departure
        .cmp(&b.events()[0].departure)
        .then_with(|| flat(a).cmp(flat(b)))
        .then_with(|| a.id().cmp(b.id()))
}

/// Tie-broken precedence between two trips of one group, computed directly
/// from [`compare_trips`](crate::timetable::compare_trips).
pub fn precedes(a: &Trip, b: &Trip) -> bool {
    match crate::timetable::compare_trips(a, b) {
        Comparison::Less => true,
        Comparison::Equal => canonical_cmp(a, b) == Ordering::Less,
        _ => false,
    }
}

/// All trips sharing one stop sequence, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripGroup {
    sequence: StopSequence,
    members: Vec<TripId>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("trip {0} is not in the timetable")]
    UnknownTrip(TripId),
    #[error("trip {0} does not follow the group's stop sequence")]
    WrongShape(TripId),
    #[error("trip {0} listed twice")]
    Duplicate(TripId),
    #[error("a group needs at least one member")]
    Empty,
}

impl TripGroup {
    /// Builds a group from arbitrary member ids, putting them in canonical
    /// order.
    pub fn from_members(
        timetable: &Timetable,
        members: impl IntoIterator<Item = TripId>,
    ) -> Result<Self, GroupError> {
        let mut trips = Vec::new();
        for id in members {
            let trip = timetable
                .trip(id.as_str())
                .ok_or_else(|| GroupError::UnknownTrip(id.clone()))?;
            trips.push(trip);
        }
        let first = *trips.first().ok_or(GroupError::Empty)?;
        if let Some(t) = trips.iter().find(|t| !t.same_shape(first)) {
            return Err(GroupError::WrongShape(t.id().clone()));
        }
        trips.sort_by(|a, b| canonical_cmp(a, b));
        if let Some(w) = trips.windows(2).find(|w| w[0].id() == w[1].id()) {
            return Err(GroupError::Duplicate(w[0].id().clone()));
        }
        Ok(Self {
            sequence: first.stop_sequence(),
            members: trips.iter().map(|t| t.id().clone()).collect(),
        })
    }

    pub fn sequence(&self) -> &StopSequence {
        &self.sequence
    }

    pub fn members(&self) -> &[TripId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member trips in canonical order.
    ///
    /// Panics if a member is missing from `timetable`.
    pub fn trips<'t>(&self, timetable: &'t Timetable) -> Vec<&'t Trip> {
        self.members
            .iter()
            .map(|id| {
                timetable
                    .trip(id.as_str())
                    .unwrap_or_else(|| panic!("trip {id} not in timetable"))
            })
            .collect()
    }
}

/// Every trip of a timetable, grouped by exact stop sequence. Iteration
/// follows the ordering of [`StopSequence`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupIndex {
    groups: BTreeMap<StopSequence, TripGroup>,
}

impl GroupIndex {
    pub fn get(&self, sequence: &StopSequence) -> Option<&TripGroup> {
        self.groups.get(sequence)
    }

    pub fn groups(&self) -> impl ExactSizeIterator<Item = &TripGroup> {
        self.groups.values()
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

pub fn group_by_stop_sequence(timetable: &Timetable) -> GroupIndex {
    let mut buckets: HashMap<StopSequence, Vec<&Trip>> = HashMap::new();
    for trip in timetable.trips() {
        buckets.entry(trip.stop_sequence()).or_default().push(trip);
    }
    let groups = buckets
        .into_iter()
        .map(|(sequence, mut trips)| {
            trips.sort_by(|a, b| canonical_cmp(a, b));
            let members = trips.iter().map(|t| t.id().clone()).collect();
            (sequence.clone(), TripGroup { sequence, members })
        })
        .collect();
    GroupIndex { groups }
}

enum Storage {
    /// Row-major `n * n` bit matrix.
    Dense {
        words_per_row: usize,
        bits: Vec<u64>,
    },
    OnDemand,
}

/// Strict partial order over the members of one group, indexed by
/// canonical position.
pub struct PrecedenceRelation {
    group: TripGroup,
    events_per_trip: usize,
    /// `n * events_per_trip * 2` times: arrival, departure per event.
    times: Vec<u32>,
    storage: Storage,
}

impl std::fmt::Debug for PrecedenceRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrecedenceRelation")
            .field("sequence", &self.group.sequence)
            .field("members", &self.group.members.len())
            .field("dense", &self.is_dense())
            .finish()
    }
}

pub fn build_precedence(group: &TripGroup, timetable: &Timetable) -> PrecedenceRelation {
    build_precedence_with_limit(group, timetable, DENSE_LIMIT)
}

/// As [`build_precedence`], materializing the relation only when the group
/// has at most `dense_limit` members.
pub fn build_precedence_with_limit(
    group: &TripGroup,
    timetable: &Timetable,
    dense_limit: usize,
) -> PrecedenceRelation {
    let trips = group.trips(timetable);
    let events_per_trip = group.sequence.len();
    let mut times = Vec::with_capacity(trips.len() * events_per_trip * 2);
    for trip in &trips {
        times.extend(
            trip.events()
                .iter()
                .flat_map(|e| [e.arrival.seconds(), e.departure.seconds()]),
        );
    }
    let mut rel = PrecedenceRelation {
        group: group.clone(),
        events_per_trip,
        times,
        storage: Storage::OnDemand,
    };
    let n = trips.len();
    if n <= dense_limit && n > 1 {
        let words_per_row = n.div_ceil(64);
        let mut bits = vec![0u64; n * words_per_row];
        for i in 0..n {
            for j in i + 1..n {
                if rel.compare_members(i, j) {
                    bits[i * words_per_row + j / 64] |= 1 << (j % 64);
                }
            }
        }
        rel.storage = Storage::Dense { words_per_row, bits };
    }
    rel
}

impl PrecedenceRelation {
    pub fn group(&self) -> &TripGroup {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.group.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group.is_empty()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense { .. })
    }

    fn row(&self, i: usize) -> &[u32] {
        let w = self.events_per_trip * 2;
        &self.times[i * w..(i + 1) * w]
    }

    /// `i < j` and member `i` is earlier than or equal to member `j`.
    fn compare_members(&self, i: usize, j: usize) -> bool {
        if i >= j {
            return false;
        }
        // Equal rows count as well: canonical position breaks the tie, and
        // `i < j` already encodes it.
        self.row(i).iter().zip(self.row(j)).all(|(p, q)| p <= q)
    }

    /// Whether member `i` precedes member `j` (canonical positions).
    pub fn dominates(&self, i: usize, j: usize) -> bool {
        match &self.storage {
            Storage::Dense { words_per_row, bits } => bits[i * words_per_row + j / 64] >> (j % 64) & 1 == 1,
            Storage::OnDemand => self.compare_members(i, j),
        }
    }

    /// The first successor `j >= from` of member `i`.
    pub fn next_successor(&self, i: usize, from: usize) -> Option<usize> {
        let n = self.len();
        let start = from.max(i + 1);
        if start >= n {
            return None;
        }
        match &self.storage {
            Storage::Dense { words_per_row, bits } => {
                let row = &bits[i * words_per_row..(i + 1) * words_per_row];
                let mut w = start / 64;
                let mut word = row[w] & (!0u64 << (start % 64));
                loop {
                    if word != 0 {
                        let j = w * 64 + word.trailing_zeros() as usize;
                        return (j < n).then_some(j);
                    }
                    w += 1;
                    if w >= row.len() {
                        return None;
                    }
                    word = row[w];
                }
            }
            Storage::OnDemand => (start..n).find(|&j| self.compare_members(i, j)),
        }
    }

    /// Comparison between members `i` and `j` from the stored times.
    pub fn comparison(&self, i: usize, j: usize) -> Comparison {
        compare_times(self.row(i), self.row(j))
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let mut from = 0;
        std::iter::from_fn(move || {
            let j = self.next_successor(i, from)?;
            from = j + 1;
            Some(j)
        })
    }
}
