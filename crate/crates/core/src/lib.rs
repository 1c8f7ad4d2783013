//! Groups public-transit trips into a minimum number of FIFO routes: sets of
//! trips with one stop sequence in which no trip overtakes another.

pub mod cli;
pub mod format;
pub mod ingest;
pub mod order;
pub mod solve;
pub mod timetable;
pub mod verify;
