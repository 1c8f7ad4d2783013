//! Domain model: stations, stop events, trips, and the pairwise
//! "earlier-than" comparison between trips.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Seconds since the start of the service day. Values above 86400 are legal
/// (after-midnight service).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimePoint(pub u32);

impl TimePoint {
    pub fn seconds(self) -> u32 {
        self.0
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0;
        write!(f, "{}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60)
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            /// Returns `None` for the empty string.
            pub fn new(id: impl AsRef<str>) -> Option<Self> {
                let id = id.as_ref();
                (!id.is_empty()).then(|| Self(Arc::from(id)))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Debug::fmt(&*self.0, f)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifier of a station. Never empty.
    StopId
);
string_id!(
    /// Identifier of a trip. Never empty.
    TripId
);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StopEvent {
    pub stop: StopId,
    pub arrival: TimePoint,
    pub departure: TimePoint,
}

impl StopEvent {
    pub fn new(stop: StopId, arrival: u32, departure: u32) -> Self {
        Self {
            stop,
            arrival: TimePoint(arrival),
            departure: TimePoint(departure),
        }
    }
}

/// One vehicle run. Construction only requires a non-empty event list; the
/// chronological invariant is checked by [`validate_trip`] and enforced when
/// trips are assembled into a [`Timetable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trip {
    id: TripId,
    events: Vec<StopEvent>,
}

impl Trip {
    pub fn new(id: TripId, events: Vec<StopEvent>) -> Result<Self, TimetableError> {
        if events.is_empty() {
            return Err(TimetableError::EmptyTrip(id));
        }
        Ok(Self { id, events })
    }

    pub fn id(&self) -> &TripId {
        &self.id
    }

    pub fn events(&self) -> &[StopEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn stop_sequence(&self) -> StopSequence {
        stop_sequence_of(self)
    }

    /// Same stop sequence as `other`, without allocating.
    pub fn same_shape(&self, other: &Trip) -> bool {
        self.events.len() == other.events.len()
            && self
                .events
                .iter()
                .zip(&other.events)
                .all(|(a, b)| a.stop == b.stop)
    }
}

/// Ordered stops a trip visits. Equality is positional; loops are kept.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StopSequence(pub Vec<StopId>);

impl StopSequence {
    pub fn stops(&self) -> &[StopId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for StopSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, stop) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(stop.as_str())?;
        }
        f.write_str(">")
    }
}

/// Outcome of comparing two trips under the earlier-than relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparison {
    /// `a` is strictly earlier than `b`.
    Less,
    /// `b` is strictly earlier than `a`.
    Greater,
    /// Identical times at every stop.
    Equal,
    /// The trips overtake each other.
    Incomparable,
    /// The stop sequences differ.
    DifferentShape,
}

impl Comparison {
    pub fn reverse(self) -> Self {
        match self {
            Comparison::Less => Comparison::Greater,
            Comparison::Greater => Comparison::Less,
            other => other,
        }
    }

    /// The two trips may share a route.
    pub fn is_comparable(self) -> bool {
        matches!(self, Comparison::Less | Comparison::Greater | Comparison::Equal)
    }
}

/// A chain of trips sharing one stop sequence, listed earliest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Route {
    pub id: String,
    pub sequence: StopSequence,
    pub trips: Vec<TripId>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TimetableError {
    #[error("trip {0} has no events")]
    EmptyTrip(TripId),
    #[error("duplicate trip id {0}")]
    DuplicateTrip(TripId),
    #[error("trip {trip} is not chronological: {violation}")]
    InvalidTrip { trip: TripId, violation: String },
    #[error("trip {trip} references stop {stop} which is not a listed station")]
    UnknownStation { trip: TripId, stop: StopId },
}

/// A set of valid trips with unique identifiers plus the stations they use.
#[derive(Clone, Debug, Default)]
pub struct Timetable {
    trips: Vec<Trip>,
    stations: Vec<StopId>,
    by_id: HashMap<TripId, usize>,
}

impl PartialEq for Timetable {
    fn eq(&self, other: &Self) -> bool {
        self.trips == other.trips && self.stations == other.stations
    }
}

impl Eq for Timetable {}

impl Timetable {
    /// Builds a timetable whose station list is exactly the stops referenced
    /// by `trips`.
    pub fn new(trips: Vec<Trip>) -> Result<Self, TimetableError> {
        Self::with_stations(std::iter::empty(), trips)
    }

    /// Builds a timetable with extra stations beyond those the trips
    /// reference. Stations are kept sorted and deduplicated.
    pub fn with_stations(
        stations: impl IntoIterator<Item = StopId>,
        trips: Vec<Trip>,
    ) -> Result<Self, TimetableError> {
        let mut all: BTreeSet<StopId> = stations.into_iter().collect();
        let mut by_id = HashMap::with_capacity(trips.len());
        for (idx, trip) in trips.iter().enumerate() {
            if let Some(v) = validate_trip(trip).into_iter().next() {
                return Err(TimetableError::InvalidTrip {
                    trip: trip.id.clone(),
                    violation: v.to_string(),
                });
            }
            if by_id.insert(trip.id.clone(), idx).is_some() {
                return Err(TimetableError::DuplicateTrip(trip.id.clone()));
            }
            for event in &trip.events {
                if !all.contains(&event.stop) {
                    all.insert(event.stop.clone());
                }
            }
        }
        Ok(Self {
            trips,
            stations: all.into_iter().collect(),
            by_id,
        })
    }

    /// Like [`Timetable::with_stations`] but rejects trips that reference a
    /// stop missing from `stations`.
    pub fn with_exact_stations(stations: Vec<StopId>, trips: Vec<Trip>) -> Result<Self, TimetableError> {
        let known: BTreeSet<&StopId> = stations.iter().collect();
        for trip in &trips {
            if let Some(e) = trip.events.iter().find(|e| !known.contains(&e.stop)) {
                return Err(TimetableError::UnknownStation {
                    trip: trip.id.clone(),
                    stop: e.stop.clone(),
                });
            }
        }
        Self::with_stations(stations, trips)
    }

    pub fn trips(&self) -> &[Trip] {
        &self.trips
    }

    pub fn stations(&self) -> &[StopId] {
        &self.stations
    }

    pub fn len(&self) -> usize {
        self.trips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trips.is_empty()
    }

    pub fn trip(&self, id: &str) -> Option<&Trip> {
        self.by_id.get(id).map(|&i| &self.trips[i])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }
}

/// Which link of the chronological chain a trip breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `events[index].arrival > events[index].departure`
    ArrivalAfterDeparture,
    /// `events[index - 1].departure > events[index].arrival`
    DepartureAfterNextArrival,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripViolation {
    pub index: usize,
    pub kind: ViolationKind,
    /// The larger side of the broken inequality.
    pub left: TimePoint,
    pub right: TimePoint,
}

impl fmt::Display for TripViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::ArrivalAfterDeparture => write!(
                f,
                "event {}: arrival {} > departure {}",
                self.index, self.left.0, self.right.0
            ),
            ViolationKind::DepartureAfterNextArrival => write!(
                f,
                "event {}: departure({})={} > arrival({})={}",
                self.index,
                self.index - 1,
                self.left.0,
                self.index,
                self.right.0
            ),
        }
    }
}

/// Lists every broken link of `arr[i] <= dep[i] <= arr[i+1]`. Empty means
/// the trip is valid.
pub fn validate_trip(trip: &Trip) -> Vec<TripViolation> {
    let mut out = Vec::new();
    for (i, e) in trip.events.iter().enumerate() {
        if i > 0 {
            let prev = &trip.events[i - 1];
            if prev.departure > e.arrival {
                out.push(TripViolation {
                    index: i,
                    kind: ViolationKind::DepartureAfterNextArrival,
                    left: prev.departure,
                    right: e.arrival,
                });
            }
        }
        if e.arrival > e.departure {
            out.push(TripViolation {
                index: i,
                kind: ViolationKind::ArrivalAfterDeparture,
                left: e.arrival,
                right: e.departure,
            });
        }
    }
    out
}

pub fn stop_sequence_of(trip: &Trip) -> StopSequence {
    StopSequence(trip.events.iter().map(|e| e.stop.clone()).collect())
}

/// Compares two trips event by event.
///
/// `Less` means every arrival and departure of `a` is no later than the
/// matching one of `b`, with at least one strictly earlier.
pub fn compare_trips(a: &Trip, b: &Trip) -> Comparison {
    if !a.same_shape(b) {
        return Comparison::DifferentShape;
    }
    let flat = |t: &Trip| -> Vec<u32> {
        t.events
            .iter()
            .flat_map(|e| [e.arrival.0, e.departure.0])
            .collect()
    };
    compare_times(&flat(a), &flat(b))
}

/// Pointwise comparison of two equally long time vectors.
pub(crate) fn compare_times(a: &[u32], b: &[u32]) -> Comparison {
    debug_assert_eq!(a.len(), b.len());
    let mut a_earlier = false;
    let mut b_earlier = false;
    for (p, q) in a.iter().zip(b) {
        if p < q {
            a_earlier = true;
        } else if q < p {
            b_earlier = true;
        }
        if a_earlier && b_earlier {
            return Comparison::Incomparable;
        }
    }
    match (a_earlier, b_earlier) {
        (false, false) => Comparison::Equal,
        (true, false) => Comparison::Less,
        (false, true) => Comparison::Greater,
        (true, true) => Comparison::Incomparable,
    }
}
