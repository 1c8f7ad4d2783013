//! GTFS directory loader.
//!
//! Only `stop_times.txt` is required. `stops.txt` adds stations, `trips.txt`
//! is used to count trips without stop times, and `frequencies.txt` is
//! noted but not expanded.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::path::{Path, PathBuf};

use csv::{ByteRecord, ReaderBuilder};
use serde::Serialize;
use thiserror::Error;

use crate::timetable::{validate_trip, StopEvent, StopId, Timetable, TimetableError, Trip, TripId};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{0} is not a readable directory")]
    NotADirectory(PathBuf),
    #[error("{0} is missing")]
    MissingStopTimes(PathBuf),
    #[error("{path}: header lacks required column(s) {missing:?}")]
    MalformedHeader {
        path: PathBuf,
        missing: Vec<&'static str>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Timetable(#[from] TimetableError),
}

/// Counters describing one ingest run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub trips_loaded: usize,
    pub trips_dropped: usize,
    pub drop_reasons: BTreeMap<String, usize>,
    pub stations_seen: usize,
    /// Rows that could not be tied to a trip id.
    pub unattributed_rows: usize,
    /// `frequencies.txt` exists; its entries were not expanded.
    pub frequencies_ignored: bool,
    /// Trip ids in `trips.txt` that have no stop times.
    pub trips_without_stop_times: usize,
}

pub mod reason {
    pub const MISSING_TIME: &str = "missing_time";
    pub const MALFORMED_TIME: &str = "malformed_time";
    pub const MISSING_STOP_ID: &str = "missing_stop_id";
    pub const MALFORMED_STOP_SEQUENCE: &str = "malformed_stop_sequence";
    pub const DUPLICATE_STOP_SEQUENCE: &str = "duplicate_stop_sequence";
    pub const MALFORMED_ROW: &str = "malformed_row";
    pub const NOT_CHRONOLOGICAL: &str = "not_chronological";
}

const REQUIRED: [&str; 5] = [
    "trip_id",
    "arrival_time",
    "departure_time",
    "stop_id",
    "stop_sequence",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("time is not H:MM:SS")]
pub struct MalformedTime;

/// Parses `H:MM:SS` with any number of hour digits. `Ok(None)` for a blank
/// field.
pub fn parse_time(field: &[u8]) -> Result<Option<u32>, MalformedTime> {
    let field = field.trim_ascii();
    if field.is_empty() {
        return Ok(None);
    }
    let mut parts = field.split(|&b| b == b':');
    let (Some(h), Some(m), Some(s), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(MalformedTime);
    };
    let digits = |p: &[u8]| -> Result<u32, MalformedTime> {
        if p.is_empty() || !p.iter().all(u8::is_ascii_digit) {
            return Err(MalformedTime);
        }
        p.iter()
            .try_fold(0u32, |acc, &d| {
                acc.checked_mul(10)?.checked_add(u32::from(d - b'0'))
            })
            .ok_or(MalformedTime)
    };
    if m.len() != 2 || s.len() != 2 {
        return Err(MalformedTime);
    }
    let (h, m, s) = (digits(h)?, digits(m)?, digits(s)?);
    if m > 59 || s > 59 {
        return Err(MalformedTime);
    }
    h.checked_mul(3600)
        .and_then(|x| x.checked_add(m * 60 + s))
        .map(Some)
        .ok_or(MalformedTime)
}

struct Columns {
    trip_id: usize,
    arrival: usize,
    departure: usize,
    stop_id: usize,
    stop_sequence: usize,
}

fn header_index(headers: &ByteRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| {
        let h = h.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(h);
        h.trim_ascii() == name.as_bytes()
    })
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(ReaderBuilder::new().flexible(true).from_reader(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IngestError + '_ {
    move |source| IngestError::Csv {
        path: path.to_owned(),
        source,
    }
}

/// Reads one column of an optional file. `None` if the file or the column
/// is absent.
fn read_column(path: &Path, name: &str) -> Result<Option<Vec<String>>, IngestError> {
    if !path.is_file() {
        return Ok(None);
    }
    let mut reader = open_csv(path)?;
    let headers = reader.byte_headers().map_err(csv_err(path))?.clone();
    let Some(col) = header_index(&headers, name) else {
        return Ok(None);
    };
    let mut out = Vec::new();
    let mut record = ByteRecord::new();
    while reader.read_byte_record(&mut record).map_err(csv_err(path))? {
        if let Some(v) = record
            .get(col)
            .and_then(|v| std::str::from_utf8(v.trim_ascii()).ok())
        {
            if !v.is_empty() {
                out.push(v.to_owned());
            }
        }
    }
    Ok(Some(out))
}

#[derive(Default)]
struct PendingTrip {
    rows: Vec<(u32, StopId, u32, u32)>,
    error: Option<&'static str>,
}

/// Loads a GTFS feed directory into a timetable. Trips with unusable rows
/// are dropped and counted; only missing or unreadable `stop_times.txt` and
/// a header without the required columns are fatal.
pub fn load_gtfs(dir: &Path) -> Result<(Timetable, IngestReport), IngestError> {
    if !dir.is_dir() {
        return Err(IngestError::NotADirectory(dir.to_owned()));
    }
    let path = dir.join("stop_times.txt");
    if !path.is_file() {
        return Err(IngestError::MissingStopTimes(path));
    }
    let mut reader = open_csv(&path)?;
    let headers = reader.byte_headers().map_err(csv_err(&path))?.clone();
    let missing: Vec<&'static str> = REQUIRED
        .into_iter()
        .filter(|name| header_index(&headers, name).is_none())
        .collect();
    if !missing.is_empty() {
        return Err(IngestError::MalformedHeader { path, missing });
    }
    let col = |name| header_index(&headers, name).expect("checked above");
    let cols = Columns {
        trip_id: col("trip_id"),
        arrival: col("arrival_time"),
        departure: col("departure_time"),
        stop_id: col("stop_id"),
        stop_sequence: col("stop_sequence"),
    };

    let mut report = IngestReport::default();
    let mut order: Vec<TripId> = Vec::new();
    let mut pending: HashMap<TripId, PendingTrip> = HashMap::new();
    let mut stops: HashMap<Box<[u8]>, StopId> = HashMap::new();
    let mut record = ByteRecord::new();

    loop {
        match reader.read_byte_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => return Err(csv_err(&path)(e)),
            Err(_) => {
                report.unattributed_rows += 1;
                continue;
            }
        }
        let Some(trip_id) = record
            .get(cols.trip_id)
            .and_then(|v| std::str::from_utf8(v.trim_ascii()).ok())
            .and_then(TripId::new)
        else {
            report.unattributed_rows += 1;
            continue;
        };
        let entry = pending.entry(trip_id).or_insert_with_key(|id| {
            order.push(id.clone());
            PendingTrip::default()
        });
        if entry.error.is_some() {
            continue;
        }
        match parse_row(&record, &cols, &mut stops) {
            Ok(row) => entry.rows.push(row),
            Err(reason) => entry.error = Some(reason),
        }
    }

    let encountered: HashSet<TripId> = order.iter().cloned().collect();
    let mut trips = Vec::with_capacity(order.len());
    for id in order {
        let PendingTrip { mut rows, error } = pending.remove(&id).expect("every ordered id is pending");
        let outcome = error.map_or_else(|| assemble_trip(id, &mut rows), Err);
        match outcome {
            Ok(trip) => trips.push(trip),
            Err(reason) => {
                report.trips_dropped += 1;
                *report.drop_reasons.entry(reason.to_owned()).or_default() += 1;
            }
        }
    }
    report.trips_loaded = trips.len();

    let extra_stations = read_column(&dir.join("stops.txt"), "stop_id")?
        .unwrap_or_default()
        .into_iter()
        .filter_map(StopId::new);
    if let Some(listed) = read_column(&dir.join("trips.txt"), "trip_id")? {
        report.trips_without_stop_times = listed
            .iter()
            .filter(|id| !encountered.contains(id.as_str()))
            .count();
    }
    report.frequencies_ignored = dir.join("frequencies.txt").is_file();

    let timetable = Timetable::with_stations(extra_stations, trips)?;
    report.stations_seen = timetable.stations().len();
    Ok((timetable, report))
}

fn parse_row(
    record: &ByteRecord,
    cols: &Columns,
    stops: &mut HashMap<Box<[u8]>, StopId>,
) -> Result<(u32, StopId, u32, u32), &'static str> {
    let field = |i: usize| record.get(i).ok_or(reason::MALFORMED_ROW);
    let seq = std::str::from_utf8(field(cols.stop_sequence)?.trim_ascii())
        .ok()
        .and_then(|s| s.parse::<u32>().ok())
        .ok_or(reason::MALFORMED_STOP_SEQUENCE)?;
    let time = |i| match parse_time(field(i)?) {
        Ok(Some(t)) => Ok(t),
        Ok(None) => Err(reason::MISSING_TIME),
        Err(MalformedTime) => Err(reason::MALFORMED_TIME),
    };
    let arrival = time(cols.arrival)?;
    let departure = time(cols.departure)?;
    let raw_stop = field(cols.stop_id)?.trim_ascii();
    let stop = match stops.get(raw_stop) {
        Some(s) => s.clone(),
        None => {
            let s = std::str::from_utf8(raw_stop)
                .ok()
                .and_then(StopId::new)
                .ok_or(reason::MISSING_STOP_ID)?;
            stops.insert(raw_stop.into(), s.clone());
            s
        }
    };
    Ok((seq, stop, arrival, departure))
}

fn assemble_trip(id: TripId, rows: &mut [(u32, StopId, u32, u32)]) -> Result<Trip, &'static str> {
    rows.sort_by_key(|r| r.0);
    if rows.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(reason::DUPLICATE_STOP_SEQUENCE);
    }
    let events = rows
        .iter()
        .map(|(_, stop, a, d)| StopEvent::new(stop.clone(), *a, *d))
        .collect();
    let trip = Trip::new(id, events).map_err(|_| reason::MALFORMED_ROW)?;
    if !validate_trip(&trip).is_empty() {
        return Err(reason::NOT_CHRONOLOGICAL);
    }
    Ok(trip)
}
