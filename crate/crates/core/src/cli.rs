//! `fifo-routes` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or data error,
//! 3 solver refusal, 64 usage error. Results go only to `--out` files;
//! stdout carries summaries and stderr diagnostics. Output is never
//! colored, so `NO_COLOR` needs no handling.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::format;
use crate::ingest::{generate_synthetic, load_gtfs, GeneratorSpec};
use crate::solve::{self, Algorithm, SolveError, BRUTE_PARTITION_LIMIT};
use crate::verify::{compare_solvers, verify_certificate, verify_partition, ComparisonStats};

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const DATA_ERROR: i32 = 2;
    pub const SOLVER_REFUSED: i32 = 3;
    pub const USAGE: i32 = 64;
}

#[derive(Debug, Parser)]
#[command(
    name = "fifo-routes",
    version,
    about = "Group transit trips into minimal FIFO routes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read a GTFS directory and write a canonical timetable file.
    Ingest {
        gtfs_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Group the trips of a canonical timetable file into routes.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::Optimal)]
        algorithm: Algorithm,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: Threads,
        #[arg(long, default_value_t = BRUTE_PARTITION_LIMIT)]
        brute_limit: usize,
    },
    /// Check a route assignment (and its certificate, if any) against a
    /// timetable.
    Verify { timetable: PathBuf, assignment: PathBuf },
    /// Compare optimal, greedy, and trivial route counts.
    Compare {
        input: PathBuf,
        #[command(flatten)]
        threads: Threads,
    },
    /// Write a seeded synthetic timetable.
    Generate {
        #[arg(long, default_value_t = 10)]
        sequences: usize,
        #[arg(long, default_value_t = 20)]
        trips: usize,
        #[arg(long, default_value_t = 8)]
        stops: usize,
        #[arg(long, default_value_t = 600)]
        headway: u32,
        #[arg(long, default_value_t = 0)]
        jitter: u32,
        #[arg(long = "overtake-prob", default_value_t = 0.0)]
        overtake_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Threads {
    /// Worker cap; defaults to the available parallelism.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
}

impl Threads {
    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match self.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(usize::from(n))
                .build()
                .expect("thread pool")
                .install(f),
            None => f(),
        }
    }
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    return exit::SUCCESS;
                }
                _ => exit::USAGE,
            };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    let mut out = Io { stdout, stderr };
    match cli.command {
        Command::Ingest { gtfs_dir, out: path } => out.ingest(gtfs_dir, path),
        Command::Solve {
            input,
            algorithm,
            format,
            out: path,
            threads,
            brute_limit,
        } => out.solve(input, algorithm, format, path, threads, brute_limit),
        Command::Verify {
            timetable,
            assignment,
        } => out.verify(timetable, assignment),
        Command::Compare { input, threads } => out.compare(input, threads),
        Command::Generate {
            sequences,
            trips,
            stops,
            headway,
            jitter,
            overtake_prob,
            seed,
            out: path,
        } => out.generate(
            GeneratorSpec {
                num_sequences: sequences,
                trips_per_sequence: trips,
                stops_per_sequence: stops,
                headway_seconds: headway,
                jitter_seconds: jitter,
                overtake_probability: overtake_prob,
                rng_seed: seed,
            },
            path,
        ),
    }
}

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

macro_rules! or_exit {
    ($self:ident, $e:expr, $code:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => {
                let _ = writeln!($self.stderr, "error: {err}");
                return $code;
            }
        }
    };
}

impl Io<'_> {
    fn ingest(&mut self, dir: PathBuf, path: PathBuf) -> i32 {
        let (timetable, report) = or_exit!(self, load_gtfs(&dir), exit::DATA_ERROR);
        or_exit!(self, format::save_timetable(&path, &timetable), exit::DATA_ERROR);
        let _ = writeln!(
            self.stdout,
            "{}",
            serde_json::to_string_pretty(&report).expect("plain data serializes")
        );
        exit::SUCCESS
    }

    fn solve(
        &mut self,
        input: PathBuf,
        algorithm: Algorithm,
        fmt: OutputFormat,
        path: PathBuf,
        threads: Threads,
        brute_limit: usize,
    ) -> i32 {
        let timetable = or_exit!(self, format::load_timetable(&input), exit::DATA_ERROR);
        let solution = match threads.install(|| solve::solve(&timetable, algorithm, brute_limit)) {
            Ok(s) => s,
            Err(e @ SolveError::AboveLimit { .. }) => {
                let _ = writeln!(self.stderr, "error: {e}");
                return exit::SOLVER_REFUSED;
            }
            Err(e @ SolveError::NotASolver) => {
                let _ = writeln!(self.stderr, "error: {e}");
                return exit::USAGE;
            }
        };
        let text = match fmt {
            OutputFormat::Json => format::assignment_to_json(&solution),
            OutputFormat::Csv => format::assignment_to_csv(&solution.partition),
        };
        or_exit!(self, format::write(&path, &text), exit::DATA_ERROR);
        let p = &solution.partition;
        let _ = writeln!(
            self.stdout,
            "algorithm {}\ntotal_trips {}\ntotal_routes {}\ngroups {}",
            p.algorithm,
            p.total_trips(),
            p.total_routes(),
            p.per_group_counts.len()
        );
        if p.single_event_trips > 0 {
            let _ = writeln!(self.stdout, "single_event_trips {}", p.single_event_trips);
        }
        exit::SUCCESS
    }

    fn verify(&mut self, timetable: PathBuf, assignment: PathBuf) -> i32 {
        let timetable = or_exit!(self, format::load_timetable(&timetable), exit::DATA_ERROR);
        let solution = or_exit!(self, format::load_assignment(&assignment), exit::DATA_ERROR);
        let report = or_exit!(
            self,
            verify_partition(&solution.partition, &timetable),
            exit::DATA_ERROR
        );
        let mut ok = report.valid;
        for v in &report.violations {
            let _ = writeln!(self.stdout, "{v}");
        }
        if let Some(cert) = &solution.certificate {
            if verify_certificate(cert, &solution.partition, &timetable) {
                let _ = writeln!(self.stdout, "certificate ok");
            } else {
                let _ = writeln!(self.stdout, "certificate invalid");
                ok = false;
            }
        }
        if !ok {
            return exit::VERIFY_FAILED;
        }
        let _ = writeln!(
            self.stdout,
            "valid: {} routes over {} groups",
            solution.partition.total_routes(),
            report.groups_checked
        );
        exit::SUCCESS
    }

    fn compare(&mut self, input: PathBuf, threads: Threads) -> i32 {
        let timetable = or_exit!(self, format::load_timetable(&input), exit::DATA_ERROR);
        let stats = threads.install(|| compare_solvers(&timetable));
        let _ = self.stdout.write_all(render_table(&stats).as_bytes());
        let _ = writeln!(
            self.stdout,
            "\n{}",
            serde_json::to_string_pretty(&stats).expect("plain data serializes")
        );
        exit::SUCCESS
    }

    fn generate(&mut self, spec: GeneratorSpec, path: PathBuf) -> i32 {
        or_exit!(self, spec.validate(), exit::USAGE);
        let timetable = generate_synthetic(&spec);
        or_exit!(self, format::save_timetable(&path, &timetable), exit::DATA_ERROR);
        let _ = writeln!(
            self.stdout,
            "wrote {} trips over {} stop sequences to {}",
            timetable.len(),
            spec.num_sequences,
            path.display()
        );
        exit::SUCCESS
    }
}

fn render_table(stats: &ComparisonStats) -> String {
    let label = |s: &crate::timetable::StopSequence| match s.0.as_slice() {
        [] => "<>".to_owned(),
        [only] => format!("{only} (1)"),
        [first, .., last] => format!("{first}..{last} ({})", s.0.len()),
    };
    let mut rows: Vec<[String; 5]> = vec![[
        "group".into(),
        "trips".into(),
        "optimal".into(),
        "greedy".into(),
        "trivial".into(),
    ]];
    for g in &stats.groups {
        let mark = if g.greedy > g.optimal { " *" } else { "" };
        rows.push([
            format!("{}{mark}", label(&g.stop_sequence)),
            g.trips.to_string(),
            g.optimal.to_string(),
            g.greedy.to_string(),
            g.trivial.to_string(),
        ]);
    }
    let t = &stats.totals;
    rows.push([
        "total".into(),
        t.trips.to_string(),
        t.optimal.to_string(),
        t.greedy.to_string(),
        t.trivial.to_string(),
    ]);
    let widths: Vec<usize> = (0..5)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == 0 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect::<Vec<_>>()
            .join("  ");
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str(&format!(
        "groups where greedy > optimal: {}\n",
        stats.groups_where_greedy_suboptimal
    ));
    out
}
