//! Exhaustive oracles for small groups. Both work from `compare_trips`
//! directly and never touch the precedence relation or the matching.

use crate::order::TripGroup;
use crate::timetable::{compare_trips, Timetable, TripId};

use super::{assemble, Algorithm, GroupChains, RoutePartition, SolveError};

pub const BRUTE_PARTITION_LIMIT: usize = 10;
pub const BRUTE_ANTICHAIN_LIMIT: usize = 20;

fn check_limit(group: &TripGroup, limit: usize) -> Result<(), SolveError> {
    if group.len() > limit {
        return Err(SolveError::AboveLimit {
            sequence: group.sequence().clone(),
            size: group.len(),
            limit,
        });
    }
    Ok(())
}

/// `comparable[i]` has bit `j` set when members `i` and `j` can share a
/// route.
fn comparable_masks(group: &TripGroup, timetable: &Timetable) -> Vec<u32> {
    let trips = group.trips(timetable);
    let n = trips.len();
    let mut masks = vec![0u32; n];
    for i in 0..n {
        for j in i + 1..n {
            if compare_trips(trips[i], trips[j]).is_comparable() {
                masks[i] |= 1 << j;
                masks[j] |= 1 << i;
            }
        }
    }
    masks
}

/// Fewest-block partition into chains, as blocks of canonical positions.
/// Among minimum partitions the lexicographically smallest restricted
/// growth string wins.
pub(crate) fn min_partition_blocks(
    group: &TripGroup,
    timetable: &Timetable,
    limit: usize,
) -> Result<Vec<Vec<usize>>, SolveError> {
    check_limit(group, limit)?;
    let comparable = comparable_masks(group, timetable);
    let n = group.len();

    struct Search<'a> {
        comparable: &'a [u32],
        rgs: Vec<usize>,
        blocks: Vec<u32>,
        best: Option<(usize, Vec<usize>)>,
    }

    impl Search<'_> {
        // Walks restricted growth strings in lexicographic order. A block
        // only accepts an element comparable with all its current members.
        fn walk(&mut self, i: usize) {
            let used = self.blocks.len();
            if let Some((best, _)) = &self.best {
                if used >= *best {
                    return;
                }
            }
            if i == self.rgs.len() {
                self.best = Some((used, self.rgs.clone()));
                return;
            }
            for b in 0..=used {
                if b == used {
                    self.blocks.push(1 << i);
                } else if self.blocks[b] & !self.comparable[i] == 0 {
                    self.blocks[b] |= 1 << i;
                } else {
                    continue;
                }
                self.rgs[i] = b;
                self.walk(i + 1);
                if b == used {
                    self.blocks.pop();
                } else {
                    self.blocks[b] &= !(1 << i);
                }
            }
        }
    }

    let mut search = Search {
        comparable: &comparable,
        rgs: vec![0; n],
        blocks: Vec::new(),
        best: None,
    };
    search.walk(0);
    let Some((count, rgs)) = search.best else {
        return Ok(Vec::new());
    };
    let mut blocks = vec![Vec::new(); count];
    // Positions are visited in canonical order, so each block is already
    // sorted earliest first.
    for (i, b) in rgs.into_iter().enumerate() {
        blocks[b].push(i);
    }
    Ok(blocks)
}

/// Exhaustive minimum FIFO partition of a single group.
pub fn brute_force_min(
    group: &TripGroup,
    timetable: &Timetable,
    limit: usize,
) -> Result<RoutePartition, SolveError> {
    let chains = min_partition_blocks(group, timetable, limit)?;
    let mut partition = assemble(timetable, Algorithm::Brute, vec![GroupChains { group, chains }]);
    partition.single_event_trips = if group.sequence().len() == 1 {
        group.len()
    } else {
        0
    };
    Ok(partition)
}

/// Largest set of pairwise overtaking trips in `group`, by subset search.
pub fn max_antichain_bruteforce(
    group: &TripGroup,
    timetable: &Timetable,
    limit: usize,
) -> Result<Vec<TripId>, SolveError> {
    check_limit(group, limit)?;
    let comparable = comparable_masks(group, timetable);
    let n = group.len();

    fn grow(comparable: &[u32], i: usize, chosen: u32, best: &mut u32) {
        let n = comparable.len();
        if chosen.count_ones() + (n - i) as u32 <= best.count_ones() {
            return;
        }
        if i == n {
            *best = chosen;
            return;
        }
        if comparable[i] & chosen == 0 {
            grow(comparable, i + 1, chosen | 1 << i, best);
        }
        grow(comparable, i + 1, chosen, best);
    }

    let mut best = 0u32;
    if n > 0 {
        grow(&comparable, 0, 0, &mut best);
    }
    Ok((0..n)
        .filter(|&i| best >> i & 1 == 1)
        .map(|i| group.members()[i].clone())
        .collect())
}
