//! On-disk formats: the canonical timetable document and route assignment
//! files (JSON or two-column CSV).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solve::{Algorithm, AntichainCertificate, RoutePartition, Solution};
use crate::timetable::{Route, StopEvent, StopId, StopSequence, Timetable, TimetableError, Trip, TripId};

pub const TIMETABLE_VERSION: &str = "fifo-routes/1";
pub const ASSIGNMENT_VERSION: &str = "fifo-routes-assignment/1";
pub const CSV_HEADER: &str = "trip_id,route_id";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported document version {found:?}, expected {expected:?}")]
    Version { found: String, expected: &'static str },
    #[error("invalid CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("CSV assignment must start with the header {CSV_HEADER:?}")]
    CsvHeader,
    #[error("empty identifier in {0}")]
    EmptyId(&'static str),
    #[error(transparent)]
    Timetable(#[from] TimetableError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimetableDoc {
    version: String,
    stations: Vec<String>,
    trips: Vec<TripDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TripDoc {
    id: String,
    events: Vec<EventDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    stop: String,
    arrival_seconds: u32,
    departure_seconds: u32,
}

pub fn timetable_to_json(timetable: &Timetable) -> String {
    let doc = TimetableDoc {
        version: TIMETABLE_VERSION.to_owned(),
        stations: timetable
            .stations()
            .iter()
            .map(|s| s.as_str().to_owned())
            .collect(),
        trips: timetable
            .trips()
            .iter()
            .map(|t| TripDoc {
                id: t.id().as_str().to_owned(),
                events: t
                    .events()
                    .iter()
                    .map(|e| EventDoc {
                        stop: e.stop.as_str().to_owned(),
                        arrival_seconds: e.arrival.seconds(),
                        departure_seconds: e.departure.seconds(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    out.push('\n');
    out
}

pub fn timetable_from_json(text: &str) -> Result<Timetable, FormatError> {
    let doc: TimetableDoc = serde_json::from_str(text)?;
    if doc.version != TIMETABLE_VERSION {
        return Err(FormatError::Version {
            found: doc.version,
            expected: TIMETABLE_VERSION,
        });
    }
    // Interned so trips share stop ids with the station list.
    let mut stations: BTreeMap<String, StopId> = BTreeMap::new();
    for s in doc.stations {
        let id = StopId::new(&s).ok_or(FormatError::EmptyId("stations"))?;
        stations.insert(s, id);
    }
    let mut trips = Vec::with_capacity(doc.trips.len());
    for t in doc.trips {
        let id = TripId::new(&t.id).ok_or(FormatError::EmptyId("trip id"))?;
        let events = t
            .events
            .into_iter()
            .map(|e| {
                let stop = match stations.get(&e.stop) {
                    Some(s) => s.clone(),
                    None => StopId::new(&e.stop).ok_or(FormatError::EmptyId("event stop"))?,
                };
                Ok(StopEvent::new(stop, e.arrival_seconds, e.departure_seconds))
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        trips.push(Trip::new(id, events)?);
    }
    Ok(Timetable::with_exact_stations(
        stations.into_values().collect(),
        trips,
    )?)
}

fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write(path: &Path, contents: &str) -> Result<(), FormatError> {
    std::fs::write(path, contents).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load_timetable(path: &Path) -> Result<Timetable, FormatError> {
    timetable_from_json(&read(path)?)
}

pub fn save_timetable(path: &Path, timetable: &Timetable) -> Result<(), FormatError> {
    write(path, &timetable_to_json(timetable))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentDoc {
    version: String,
    routes: Vec<RouteDoc>,
    summary: SummaryDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificate: Option<Vec<AntichainDoc>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteDoc {
    route_id: String,
    stop_sequence: StopSequence,
    trip_ids: Vec<TripId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SummaryDoc {
    algorithm: Algorithm,
    total_routes: usize,
    total_trips: usize,
    per_group_counts: Vec<GroupCountDoc>,
    #[serde(default)]
    single_event_trips: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupCountDoc {
    stop_sequence: StopSequence,
    routes: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AntichainDoc {
    stop_sequence: StopSequence,
    trip_ids: Vec<TripId>,
}

/// JSON assignment document; embeds the certificate when there is one.
pub fn assignment_to_json(solution: &Solution) -> String {
    let p = &solution.partition;
    let doc = AssignmentDoc {
        version: ASSIGNMENT_VERSION.to_owned(),
        routes: p
            .routes
            .iter()
            .map(|r| RouteDoc {
                route_id: r.id.clone(),
                stop_sequence: r.sequence.clone(),
                trip_ids: r.trips.clone(),
            })
            .collect(),
        summary: SummaryDoc {
            algorithm: p.algorithm,
            total_routes: p.total_routes(),
            total_trips: p.total_trips(),
            per_group_counts: p
                .per_group_counts
                .iter()
                .map(|(s, &n)| GroupCountDoc {
                    stop_sequence: s.clone(),
                    routes: n,
                })
                .collect(),
            single_event_trips: p.single_event_trips,
        },
        certificate: solution.certificate.as_ref().map(|c| {
            c.per_group
                .iter()
                .map(|(s, ids)| AntichainDoc {
                    stop_sequence: s.clone(),
                    trip_ids: ids.clone(),
                })
                .collect()
        }),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    out.push('\n');
    out
}

/// `trip_id,route_id` rows in route order.
pub fn assignment_to_csv(partition: &RoutePartition) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["trip_id", "route_id"]).expect("in-memory write");
    for route in &partition.routes {
        for trip in &route.trips {
            w.write_record([trip.as_str(), route.id.as_str()])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("inputs are UTF-8")
}

/// Parses either assignment format, detected from the first non-blank
/// character. CSV input carries no algorithm, group counts, or stop
/// sequences; those fields come back as [`Algorithm::External`] and empty.
pub fn parse_assignment(text: &str) -> Result<Solution, FormatError> {
    if text.trim_start().starts_with('{') {
        parse_assignment_json(text)
    } else {
        parse_assignment_csv(text)
    }
}

fn parse_assignment_json(text: &str) -> Result<Solution, FormatError> {
    let doc: AssignmentDoc = serde_json::from_str(text)?;
    if doc.version != ASSIGNMENT_VERSION {
        return Err(FormatError::Version {
            found: doc.version,
            expected: ASSIGNMENT_VERSION,
        });
    }
    let partition = RoutePartition {
        routes: doc
            .routes
            .into_iter()
            .map(|r| Route {
                id: r.route_id,
                sequence: r.stop_sequence,
                trips: r.trip_ids,
            })
            .collect(),
        algorithm: doc.summary.algorithm,
        per_group_counts: doc
            .summary
            .per_group_counts
            .into_iter()
            .map(|g| (g.stop_sequence, g.routes))
            .collect(),
        single_event_trips: doc.summary.single_event_trips,
    };
    let certificate = doc.certificate.map(|groups| AntichainCertificate {
        per_group: groups
            .into_iter()
            .map(|g| (g.stop_sequence, g.trip_ids))
            .collect(),
    });
    Ok(Solution {
        partition,
        certificate,
    })
}

fn parse_assignment_csv(text: &str) -> Result<Solution, FormatError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader.headers()?;
    let header: Vec<&str> = headers.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if header != ["trip_id", "route_id"] {
        return Err(FormatError::CsvHeader);
    }
    let mut routes: Vec<Route> = Vec::new();
    let mut by_id: BTreeMap<String, usize> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let trip = TripId::new(&record[0]).ok_or(FormatError::EmptyId("trip_id"))?;
        let route_id = &record[1];
        if route_id.is_empty() {
            return Err(FormatError::EmptyId("route_id"));
        }
        let idx = *by_id.entry(route_id.to_owned()).or_insert_with(|| {
            routes.push(Route {
                id: route_id.to_owned(),
                sequence: StopSequence(Vec::new()),
                trips: Vec::new(),
            });
            routes.len() - 1
        });
        routes[idx].trips.push(trip);
    }
    Ok(Solution {
        partition: RoutePartition {
            routes,
            algorithm: Algorithm::External,
            per_group_counts: BTreeMap::new(),
            single_event_trips: 0,
        },
        certificate: None,
    })
}

pub fn load_assignment(path: &Path) -> Result<Solution, FormatError> {
    parse_assignment(&read(path)?)
}
