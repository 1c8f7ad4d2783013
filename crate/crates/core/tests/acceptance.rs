//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fifo_routes::format::{assignment_to_csv, assignment_to_json, load_timetable, save_timetable};
use fifo_routes::ingest::{generate_synthetic, load_gtfs, GeneratorSpec};
use fifo_routes::order::{build_precedence, group_by_stop_sequence, TripGroup};
use fifo_routes::solve::{
    brute_force_min, max_antichain_bruteforce, optimal_group, solve, solve_greedy, solve_optimal, Algorithm,
    BRUTE_ANTICHAIN_LIMIT, BRUTE_PARTITION_LIMIT,
};
use fifo_routes::timetable::{compare_trips, Comparison, StopEvent, StopId, Timetable, Trip, TripId};
use fifo_routes::verify::{compare_solvers, verify_certificate, verify_partition};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("dilworth certificate", dilworth_certificate),
        ("transitivity", transitivity),
        ("fifo validity", fifo_validity),
        ("greedy agreement", greedy_agreement),
        ("sandwich and determinism", sandwich_and_determinism),
        ("scale", scale),
        ("gtfs round trip", gtfs_round_trip),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.2}s)", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} ({secs:.2}s)", n + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Instance pools

const PROBABILITIES: [f64; 4] = [0.0, 0.3, 0.7, 1.0];

fn build_trip(id: String, stops: &[StopId], times: &[u32]) -> Trip {
    let events = times
        .chunks_exact(2)
        .zip(stops)
        .map(|(c, s)| StopEvent::new(s.clone(), c[0], c[1]))
        .collect();
    Trip::new(TripId::new(id).unwrap(), events).unwrap()
}

fn flat_times(trip: &Trip) -> Vec<u32> {
    trip.events()
        .iter()
        .flat_map(|e| [e.arrival.0, e.departure.0])
        .collect()
}

/// With probability 0.2 each trip after the first takes the exact times of
/// an earlier one, producing `Equal` pairs.
fn inject_ties(tt: &Timetable, rng: &mut ChaCha8Rng) -> Timetable {
    let trips = tt.trips();
    let mut times: Vec<Vec<u32>> = trips.iter().map(flat_times).collect();
    for t in 1..times.len() {
        if trips[t].same_shape(&trips[0]) && rng.random_bool(0.2) {
            let src = rng.random_range(0..t);
            times[t] = times[src].clone();
        }
    }
    let out = trips
        .iter()
        .zip(&times)
        .map(|(trip, ts)| build_trip(trip.id().to_string(), trip.stop_sequence().stops(), ts))
        .collect();
    Timetable::new(out).unwrap()
}

/// Chronological trips over a tiny time domain, so that ties, chains, and
/// overtaking all occur often.
fn dense_random_group(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Timetable {
    let stops: Vec<StopId> = (0..k).map(|i| StopId::new(format!("D{i}")).unwrap()).collect();
    let trips = (0..n)
        .map(|t| {
            let mut now = rng.random_range(0..4);
            let times: Vec<u32> = (0..2 * k)
                .map(|_| {
                    now += rng.random_range(0..3);
                    now
                })
                .collect();
            build_trip(format!("t{t}"), &stops, &times)
        })
        .collect();
    let tt = Timetable::new(trips).unwrap();
    inject_ties(&tt, rng)
}

fn generated_group(n: usize, p: f64, seed: u64, rng: &mut ChaCha8Rng) -> Timetable {
    let spec = GeneratorSpec {
        num_sequences: 1,
        trips_per_sequence: n,
        stops_per_sequence: rng.random_range(1..=6),
        headway_seconds: 600,
        jitter_seconds: [0, 300, 900, 2400][rng.random_range(0..4)],
        overtake_probability: p,
        rng_seed: seed,
    };
    inject_ties(&generate_synthetic(&spec), rng)
}

/// Single-group timetables of 1 to 8 trips: 1200 from the generator across
/// the four overtaking probabilities, 800 dense random ones.
fn small_groups() -> &'static [Timetable] {
    static POOL: OnceLock<Vec<Timetable>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pool = Vec::with_capacity(2000);
        for i in 0..1200 {
            let p = PROBABILITIES[(i / 8) % 4];
            pool.push(generated_group(1 + i % 8, p, i as u64, &mut rng));
        }
        for i in 0..800 {
            let k = rng.random_range(1..=4);
            pool.push(dense_random_group(1 + i % 8, k, &mut rng));
        }
        pool
    })
}

/// Single-group timetables of 9 to 20 trips.
fn large_groups() -> &'static [Timetable] {
    static POOL: OnceLock<Vec<Timetable>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        (0..240)
            .map(|i| {
                let n = 9 + i % 12;
                if i % 2 == 0 {
                    generated_group(n, PROBABILITIES[(i / 2) % 4], 10_000 + i as u64, &mut rng)
                } else {
                    let k = rng.random_range(1..=4);
                    dense_random_group(n, k, &mut rng)
                }
            })
            .collect()
    })
}

/// Multi-sequence feeds with every group small enough for brute force.
fn feeds() -> &'static [Timetable] {
    static POOL: OnceLock<Vec<Timetable>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut pool = Vec::new();
        for seed in 0..40u64 {
            pool.push(generate_synthetic(&GeneratorSpec {
                num_sequences: 1 + (seed as usize % 6),
                trips_per_sequence: 1 + (seed as usize % BRUTE_PARTITION_LIMIT),
                stops_per_sequence: 1 + (seed as usize % 7),
                headway_seconds: 600,
                jitter_seconds: [0, 600, 1800][seed as usize % 3],
                overtake_probability: PROBABILITIES[seed as usize % 4],
                rng_seed: seed,
            }));
        }
        pool
    })
}

fn only_group(tt: &Timetable) -> TripGroup {
    let index = group_by_stop_sequence(tt);
    assert_eq!(index.len(), 1);
    index.get(&tt.trips()[0].stop_sequence()).unwrap().clone()
}

fn pairwise_incomparable(tt: &Timetable, ids: &[TripId]) -> bool {
    ids.iter().enumerate().all(|(i, a)| {
        ids[i + 1..].iter().all(|b| {
            compare_trips(tt.trip(a.as_str()).unwrap(), tt.trip(b.as_str()).unwrap())
                == Comparison::Incomparable
        })
    })
}

// ---------------------------------------------------------------------------
// Criteria

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let pool = small_groups();
    let mut by_size = [0usize; 9];
    for (i, tt) in pool.iter().enumerate() {
        let group = only_group(tt);
        let brute = brute_force_min(&group, tt, BRUTE_PARTITION_LIMIT).map_err(|e| e.to_string())?;
        let (optimal, _) = solve_optimal(tt);
        let got = optimal.per_group_counts[group.sequence()];
        let want = brute.per_group_counts[group.sequence()];
        ensure(got == want, || {
            format!("instance {i}: optimal {got} != brute {want}")
        })?;
        by_size[group.len()] += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} groups agree, sizes 1-8 counts {:?}",
        pool.len(),
        &by_size[1..]
    ))
}

fn dilworth_certificate() -> Outcome {
    let mut checked = 0;
    let mut largest = 0;
    for (i, tt) in small_groups().iter().chain(large_groups()).enumerate() {
        let group = only_group(tt);
        let rel = build_precedence(&group, tt);
        let opt = optimal_group(&rel);
        let routes = opt.chains.len();
        ensure(routes == group.len() - opt.matching_size, || {
            format!("instance {i}: {routes} chains but matching {}", opt.matching_size)
        })?;
        let konig: Vec<TripId> = opt
            .antichain
            .iter()
            .map(|&x| group.members()[x].clone())
            .collect();
        ensure(konig.len() == routes && pairwise_incomparable(tt, &konig), || {
            format!("instance {i}: certificate {konig:?} for {routes} routes")
        })?;
        let brute = max_antichain_bruteforce(&group, tt, BRUTE_ANTICHAIN_LIMIT).map_err(|e| e.to_string())?;
        ensure(brute.len() == routes && pairwise_incomparable(tt, &brute), || {
            format!("instance {i}: brute antichain {} != {routes} routes", brute.len())
        })?;
        let (partition, cert) = solve_optimal(tt);
        ensure(verify_certificate(&cert, &partition, tt), || {
            format!("instance {i}: certificate rejected")
        })?;
        checked += 1;
        largest = largest.max(group.len());
    }
    Ok(format!(
        "{checked} groups up to size {largest}, chains = antichain exactly"
    ))
}

fn transitivity() -> Outcome {
    const TRIPLES: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut chains = 0;
    let mut ties = 0;
    for t in 0..TRIPLES {
        let k = rng.random_range(1..=3);
        let tt = dense_random_group(3, k, &mut rng);
        let group = only_group(&tt);
        let rel = build_precedence(&group, &tt);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    if rel.dominates(a, b) && rel.dominates(b, c) {
                        ensure(rel.dominates(a, c), || {
                            format!("triple {t}: {a}->{b}->{c} not closed")
                        })?;
                        if a != c {
                            chains += 1;
                        }
                    }
                }
                if a != b {
                    let cmp = rel.comparison(a, b);
                    ties += usize::from(cmp == Comparison::Equal && a < b);
                    let edges = usize::from(rel.dominates(a, b)) + usize::from(rel.dominates(b, a));
                    ensure(edges == usize::from(cmp.is_comparable()), || {
                        format!("triple {t}: pair ({a},{b}) is {cmp:?} with {edges} edges")
                    })?;
                }
            }
            ensure(!rel.dominates(a, a), || format!("triple {t}: reflexive at {a}"))?;
        }
    }
    Ok(format!(
        "{TRIPLES} triples, {chains} length-2 paths closed, {ties} tied pairs, 0 violations"
    ))
}

fn fifo_validity() -> Outcome {
    let mut runs = 0;
    let instances = small_groups().iter().chain(large_groups()).chain(feeds());
    for (i, tt) in instances.enumerate() {
        let brute_ok = group_by_stop_sequence(tt)
            .groups()
            .all(|g| g.len() <= BRUTE_PARTITION_LIMIT);
        for alg in [
            Algorithm::Optimal,
            Algorithm::Greedy,
            Algorithm::Trivial,
            Algorithm::Brute,
        ] {
            if alg == Algorithm::Brute && !brute_ok {
                continue;
            }
            let sol = solve(tt, alg, BRUTE_PARTITION_LIMIT).map_err(|e| e.to_string())?;
            let report = verify_partition(&sol.partition, tt).map_err(|e| e.to_string())?;
            ensure(report.valid, || {
                format!("instance {i} {alg}: {:?}", report.violations)
            })?;
            runs += 1;
        }
    }
    Ok(format!("{runs} solver outputs verified, 0 violations"))
}

fn greedy_agreement() -> Outcome {
    // Reality-like regime: no injected overtaking and jitter within one
    // headway.
    let mut feeds_checked = 0;
    let mut trips = 0;
    for seed in 0..60u64 {
        for jitter in [0, 300, 600] {
            let tt = generate_synthetic(&GeneratorSpec {
                num_sequences: 20,
                trips_per_sequence: 30,
                stops_per_sequence: 2 + (seed as usize % 8),
                headway_seconds: 600,
                jitter_seconds: jitter,
                overtake_probability: 0.0,
                rng_seed: seed,
            });
            let stats = compare_solvers(&tt);
            ensure(stats.totals.greedy == stats.totals.optimal, || {
                format!(
                    "seed {seed} jitter {jitter}: greedy {} != optimal {}",
                    stats.totals.greedy, stats.totals.optimal
                )
            })?;
            feeds_checked += 1;
            trips += tt.len();
        }
    }

    for p in [0.5, 0.7, 1.0] {
        for jitter in [600, 1200, 2400] {
            for seed in 0..500u64 {
                let tt = generate_synthetic(&GeneratorSpec {
                    num_sequences: 1,
                    trips_per_sequence: 12,
                    stops_per_sequence: 4,
                    headway_seconds: 600,
                    jitter_seconds: jitter,
                    overtake_probability: p,
                    rng_seed: seed,
                });
                let stats = compare_solvers(&tt);
                if stats.totals.greedy > stats.totals.optimal {
                    return Ok(format!(
                        "{feeds_checked} feeds ({trips} trips) at p=0 agree; \
                         search found greedy {} > optimal {} at p={p} jitter={jitter} seed={seed}",
                        stats.totals.greedy, stats.totals.optimal
                    ));
                }
            }
        }
    }
    Err("seed search found no instance with greedy > optimal".into())
}

fn all_outputs(tt: &Timetable, brute: bool) -> Vec<String> {
    let mut out = Vec::new();
    for alg in [
        Algorithm::Optimal,
        Algorithm::Greedy,
        Algorithm::Trivial,
        Algorithm::Brute,
    ] {
        if alg == Algorithm::Brute && !brute {
            continue;
        }
        let sol = solve(tt, alg, BRUTE_PARTITION_LIMIT).unwrap();
        out.push(assignment_to_json(&sol));
        out.push(assignment_to_csv(&sol.partition));
    }
    out
}

fn sandwich_and_determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut compared = 0;
    let instances = small_groups().iter().chain(large_groups()).chain(feeds());
    for (i, tt) in instances.enumerate() {
        let s = compare_solvers(tt);
        for g in &s.groups {
            ensure(g.optimal <= g.greedy && g.greedy <= g.trivial, || {
                format!(
                    "instance {i} group {}: {} / {} / {}",
                    g.stop_sequence, g.optimal, g.greedy, g.trivial
                )
            })?;
        }
        ensure(
            s.totals.optimal <= s.totals.greedy && s.totals.greedy <= s.totals.trivial,
            || format!("instance {i}: totals out of order"),
        )?;

        if i % 5 != 0 {
            continue;
        }
        let brute = group_by_stop_sequence(tt)
            .groups()
            .all(|g| g.len() <= BRUTE_PARTITION_LIMIT);
        let first = all_outputs(tt, brute);
        ensure(first == all_outputs(tt, brute), || {
            format!("instance {i}: repeated run differs")
        })?;
        ensure(first == single.install(|| all_outputs(tt, brute)), || {
            format!("instance {i}: single-threaded run differs")
        })?;
        let mut trips = tt.trips().to_vec();
        trips.shuffle(&mut rng);
        let permuted = Timetable::new(trips).unwrap();
        ensure(first == all_outputs(&permuted, brute), || {
            format!("instance {i}: permuted input differs")
        })?;
        compared += 1;
    }
    Ok(format!(
        "sandwich holds on every instance; {compared} instances byte-identical across reruns, thread counts, permutations"
    ))
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn scale() -> Outcome {
    const GIB: u64 = 1 << 30;
    let tt = generate_synthetic(&GeneratorSpec {
        num_sequences: 500,
        trips_per_sequence: 200,
        stops_per_sequence: 10,
        headway_seconds: 600,
        jitter_seconds: 900,
        overtake_probability: 0.3,
        rng_seed: 7,
    });
    ensure(tt.len() == 100_000, || format!("generated {} trips", tt.len()))?;

    let start = Instant::now();
    let (optimal, cert) = solve_optimal(&tt);
    let optimal_time = start.elapsed();
    let start = Instant::now();
    let greedy = solve_greedy(&tt);
    let greedy_time = start.elapsed();
    let peak = peak_rss_bytes().ok_or("VmHWM unavailable")?;

    let certified: usize = cert.per_group.values().map(Vec::len).sum();
    ensure(certified == optimal.total_routes(), || {
        "certificate size mismatch".into()
    })?;
    ensure(optimal.total_routes() <= greedy.total_routes(), || {
        "optimal above greedy".into()
    })?;
    let detail = format!(
        "100000 trips: optimal {} routes in {:.2}s, greedy {} routes in {:.2}s, peak RSS {} MiB",
        optimal.total_routes(),
        optimal_time.as_secs_f64(),
        greedy.total_routes(),
        greedy_time.as_secs_f64(),
        peak >> 20
    );
    ensure(
        optimal_time < Duration::from_secs(30) && greedy_time < Duration::from_secs(5) && peak < 2 * GIB,
        || detail.clone(),
    )?;
    Ok(detail)
}

const MINI_STOPS: &str = "\
stop_id,stop_name
A,Alpha
B,Bravo
C,Charlie
D,Delta
E,Echo
";

const MINI_TRIPS: &str = "\
route_id,service_id,trip_id
r1,wk,t1
r1,wk,t2
r1,wk,t3
r2,wk,t4
r2,wk,t5
";

// t1 and t3 overtake each other; t2 follows both; t5 overruns midnight.
const MINI_STOP_TIMES: &str = "\
trip_id,arrival_time,departure_time,stop_id,stop_sequence
t1,08:00:00,08:01:00,A,1
t1,08:10:00,08:11:00,B,2
t1,08:30:00,08:30:00,C,3
t2,08:20:00,08:21:00,A,1
t2,08:30:00,08:31:00,B,2
t2,08:50:00,08:50:00,C,3
t3,08:05:00,08:05:00,A,1
t3,08:09:00,08:10:00,B,2
t3,08:25:00,08:25:00,C,3
t4,23:50:00,23:50:00,A,1
t4,23:58:00,23:58:00,D,2
t5,24:05:00,24:05:00,A,1
t5,24:15:00,24:16:00,D,2
";

fn hms(h: u32, m: u32) -> u32 {
    h * 3600 + m * 60
}

fn mini_model() -> Timetable {
    let stop = |s: &str| StopId::new(s).unwrap();
    let trip = |id: &str, ev: &[(&str, u32, u32)]| {
        Trip::new(
            TripId::new(id).unwrap(),
            ev.iter()
                .map(|&(s, a, d)| StopEvent::new(stop(s), a, d))
                .collect(),
        )
        .unwrap()
    };
    let trips = vec![
        trip(
            "t1",
            &[
                ("A", hms(8, 0), hms(8, 1)),
                ("B", hms(8, 10), hms(8, 11)),
                ("C", hms(8, 30), hms(8, 30)),
            ],
        ),
        trip(
            "t2",
            &[
                ("A", hms(8, 20), hms(8, 21)),
                ("B", hms(8, 30), hms(8, 31)),
                ("C", hms(8, 50), hms(8, 50)),
            ],
        ),
        trip(
            "t3",
            &[
                ("A", hms(8, 5), hms(8, 5)),
                ("B", hms(8, 9), hms(8, 10)),
                ("C", hms(8, 25), hms(8, 25)),
            ],
        ),
        trip(
            "t4",
            &[("A", hms(23, 50), hms(23, 50)), ("D", hms(23, 58), hms(23, 58))],
        ),
        trip(
            "t5",
            &[("A", hms(24, 5), hms(24, 5)), ("D", hms(24, 15), hms(24, 16))],
        ),
    ];
    Timetable::with_stations(["A", "B", "C", "D", "E"].map(stop), trips).unwrap()
}

fn gtfs_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (name, body) in [
        ("stops.txt", MINI_STOPS),
        ("trips.txt", MINI_TRIPS),
        ("stop_times.txt", MINI_STOP_TIMES),
    ] {
        std::fs::write(dir.path().join(name), body).map_err(|e| e.to_string())?;
    }
    let (ingested, report) = load_gtfs(dir.path()).map_err(|e| e.to_string())?;
    ensure(report.trips_loaded == 5 && report.trips_dropped == 0, || {
        format!(
            "loaded {} dropped {} {:?}",
            report.trips_loaded, report.trips_dropped, report.drop_reasons
        )
    })?;
    let model = mini_model();
    ensure(ingested == model, || {
        "ingested timetable differs from hand-built model".into()
    })?;

    let path = dir.path().join("timetable.json");
    save_timetable(&path, &ingested).map_err(|e| e.to_string())?;
    let reloaded = load_timetable(&path).map_err(|e| e.to_string())?;
    ensure(reloaded == model, || "reloaded timetable differs".into())?;

    let mut counts = BTreeMap::new();
    for alg in [
        Algorithm::Optimal,
        Algorithm::Greedy,
        Algorithm::Trivial,
        Algorithm::Brute,
    ] {
        let direct = solve(&model, alg, BRUTE_PARTITION_LIMIT).map_err(|e| e.to_string())?;
        let via_file = solve(&reloaded, alg, BRUTE_PARTITION_LIMIT).map_err(|e| e.to_string())?;
        ensure(
            direct == via_file && assignment_to_json(&direct) == assignment_to_json(&via_file),
            || format!("{alg}: solutions differ"),
        )?;
        counts.insert(alg.as_str(), direct.partition.total_routes());
    }
    ensure(counts["optimal"] == 3, || {
        format!("expected 3 optimal routes, got {counts:?}")
    })?;
    Ok(format!(
        "5 trips, 0 drops, solutions identical; routes {counts:?}"
    ))
}
