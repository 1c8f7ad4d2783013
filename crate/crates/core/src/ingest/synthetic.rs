//! Seeded synthetic timetables.
//!
//! Every stop sequence gets a random base schedule (start time, segment run
//! times, dwell times). Trip `t` of a sequence runs the base schedule shifted
//! by `t * headway`, plus independent per-event jitter, made chronological by
//! a running maximum. When `jitter <= headway` consecutive trips never
//! overtake on their own. Overtaking is then injected pair by pair: with
//! probability `overtake_probability`, trip `2m + 1` is replaced by a copy of
//! trip `2m` that leaves its first stop later and reaches its last stop
//! earlier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timetable::{StopEvent, StopId, Timetable, Trip, TripId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub num_sequences: usize,
    pub trips_per_sequence: usize,
    pub stops_per_sequence: usize,
    pub headway_seconds: u32,
    pub jitter_seconds: u32,
    pub overtake_probability: f64,
    pub rng_seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            num_sequences: 10,
            trips_per_sequence: 20,
            stops_per_sequence: 8,
            headway_seconds: 600,
            jitter_seconds: 0,
            overtake_probability: 0.0,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("overtake probability {0} is outside [0, 1]")]
    Probability(f64),
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        for (name, v) in [
            ("num_sequences", self.num_sequences),
            ("trips_per_sequence", self.trips_per_sequence),
            ("stops_per_sequence", self.stops_per_sequence),
        ] {
            if v == 0 {
                return Err(GeneratorError::ZeroCount(name));
            }
        }
        if !(0.0..=1.0).contains(&self.overtake_probability) {
            return Err(GeneratorError::Probability(self.overtake_probability));
        }
        Ok(())
    }
}

/// Earliest first-stop arrival of any base schedule (05:00).
const DAY_START: u32 = 5 * 3600;

/// Builds a timetable from `spec`. Identical specs give identical
/// timetables.
///
/// Panics if `spec` fails [`GeneratorSpec::validate`].
pub fn generate_synthetic(spec: &GeneratorSpec) -> Timetable {
    if let Err(e) = spec.validate() {
        panic!("invalid generator spec: {e}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let k = spec.stops_per_sequence;
    let mut trips = Vec::with_capacity(spec.num_sequences * spec.trips_per_sequence);
    for s in 0..spec.num_sequences {
        let stops: Vec<StopId> = (0..k)
            .map(|i| StopId::new(format!("S{s}-{i}")).expect("non-empty"))
            .collect();

        // base[2i] arrival, base[2i + 1] departure
        let mut base = Vec::with_capacity(2 * k);
        let mut now = DAY_START + rng.random_range(0..3600);
        for i in 0..k {
            if i > 0 {
                now += rng.random_range(60..=600);
            }
            base.push(now);
            now += rng.random_range(0..=60);
            base.push(now);
        }

        let mut group: Vec<Vec<u32>> = Vec::with_capacity(spec.trips_per_sequence);
        for t in 0..spec.trips_per_sequence {
            let offset = t as u32 * spec.headway_seconds;
            let mut floor = 0;
            let times = base
                .iter()
                .map(|&b| {
                    let x = (b + offset + rng.random_range(0..=spec.jitter_seconds)).max(floor);
                    floor = x;
                    x
                })
                .collect();
            group.push(times);
        }

        for m in (0..spec.trips_per_sequence / 2).map(|m| 2 * m) {
            if rng.random_bool(spec.overtake_probability) {
                group[m + 1] = overtaker(&group[m], spec, &mut rng);
            }
        }

        for (t, times) in group.into_iter().enumerate() {
            let events = times
                .chunks_exact(2)
                .zip(&stops)
                .map(|(c, stop)| StopEvent::new(stop.clone(), c[0], c[1]))
                .collect();
            let id = TripId::new(format!("T{s}-{t}")).expect("non-empty");
            trips.push(Trip::new(id, events).expect("k >= 1"));
        }
    }
    Timetable::new(trips).expect("generated trips are valid and uniquely named")
}

/// A chronological variant of `src` that is strictly later somewhere and
/// strictly earlier somewhere else.
fn overtaker(src: &[u32], spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let n = src.len();
    let reach = spec.jitter_seconds.max(spec.headway_seconds / 4).max(1);
    let mut out = src.to_vec();
    if n >= 4 {
        // Later departure from the first stop, earlier arrival at the last.
        let first_gap = src[2] - src[1];
        let last_gap = src[n - 2] - src[n - 3];
        let (room_first, room_last) = if n == 4 {
            (first_gap / 2, first_gap / 2)
        } else {
            (first_gap, last_gap)
        };
        if room_first >= 1 && room_last >= 1 {
            let d1 = rng.random_range(1..=reach.min(room_first));
            let d2 = rng.random_range(1..=reach.min(room_last));
            out[0] += d1;
            out[1] += d1;
            out[n - 2] -= d2;
            out[n - 1] -= d2;
            return out;
        }
    }
    // No slack between stops: arrive earlier at the first stop and leave the
    // last stop later.
    out[0] -= rng.random_range(1..=reach.min(DAY_START));
    out[n - 1] += rng.random_range(1..=reach);
    out
}
