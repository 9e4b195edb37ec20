//! Sequential rotor walk: ants leave the origin one at a time and settle on
//! the first unoccupied site they reach. Also home to [`fire_site`], the
//! batched departure kernel the sweep scheme relies on.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lattice::{Coord, Direction, Grid, RotorProgram, RotorState};

/// Guard against a non-terminating walk. Never reached in practice.
pub const STEP_CAP: u64 = 10_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WalkCell {
    pub rotor: RotorState,
    /// Every visit counts, including the one that settles the resident ant.
    pub passages: u64,
    /// 1-based index of the ant that settled here.
    pub first_visit: Option<u64>,
}

impl WalkCell {
    pub fn occupied(&self) -> bool {
        self.first_visit.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkField {
    cells: Grid<WalkCell>,
    ants: u64,
    steps: u64,
}

impl Default for WalkField {
    fn default() -> Self {
        Self::new()
    }
}

impl WalkField {
    pub fn new() -> Self {
        WalkField {
            cells: Grid::new(WalkCell::default()),
            ants: 0,
            steps: 0,
        }
    }

    pub fn cells(&self) -> &Grid<WalkCell> {
        &self.cells
    }

    pub fn cell(&self, c: Coord) -> &WalkCell {
        self.cells.get(c)
    }

    /// Number of ants settled so far.
    pub fn ants(&self) -> u64 {
        self.ants
    }

    /// Total moves made by all ants.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn occupied_set(&self) -> BTreeSet<Coord> {
        self.cells
            .iter()
            .filter(|(_, cell)| cell.occupied())
            .map(|(c, _)| c)
            .collect()
    }

    /// Occupied sites of the first `t` ants, i.e. the configuration
    /// `run_walk(t)` would produce.
    pub fn occupied_prefix(&self, t: u64) -> BTreeSet<Coord> {
        self.cells
            .iter()
            .filter(|(_, cell)| cell.first_visit.is_some_and(|k| k <= t))
            .map(|(c, _)| c)
            .collect()
    }

    pub fn passages(&self) -> Grid<u64> {
        self.cells.map(|c| c.passages)
    }

    pub fn first_visits(&self) -> Grid<u64> {
        self.cells.map(|c| c.first_visit.unwrap_or(0))
    }

    /// Launch one ant from the origin and walk it to its settlement site.
    pub fn settle_one_ant(&mut self, program: &RotorProgram) -> Result<Coord> {
        self.settle_with_cap(program, STEP_CAP)
    }

    pub(crate) fn settle_with_cap(&mut self, program: &RotorProgram, cap: u64) -> Result<Coord> {
        let mut here = Coord::ORIGIN;
        let mut taken = 0u64;
        loop {
            let cell = self.cells.get_mut(here);
            cell.passages += 1;
            if !cell.occupied() {
                self.ants += 1;
                cell.first_visit = Some(self.ants);
                self.steps += taken;
                return Ok(here);
            }
            if taken >= cap {
                return Err(Error::StepCapExceeded { cap });
            }
            let (rotor, dir) = program.advance(cell.rotor);
            cell.rotor = rotor;
            here = here.step(dir);
            taken += 1;
        }
    }
}

pub fn settle_one_ant(field: &mut WalkField, program: &RotorProgram) -> Result<Coord> {
    field.settle_one_ant(program)
}

/// Settle `t` ants in sequence.
pub fn run_walk(t: u64, program: &RotorProgram) -> Result<WalkField> {
    if t == 0 {
        return Err(Error::invalid("ant count must be at least 1"));
    }
    let mut field = WalkField::new();
    for _ in 0..t {
        field.settle_one_ant(program)?;
    }
    Ok(field)
}

/// Departures per direction, indexed by [`Direction::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DirectionCounts(pub [u64; 8]);

impl DirectionCounts {
    pub fn get(&self, d: Direction) -> u64 {
        self.0[d.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (Direction, u64)> + '_ {
        Direction::ALL
            .into_iter()
            .map(|d| (d, self.get(d)))
            .filter(|&(_, n)| n > 0)
    }
}

/// Fire a site holding `count` ants: one stays, the other `count - 1` leave
/// one after another, each turning the rotor before moving. Equivalent to
/// `count - 1` calls of [`RotorProgram::advance`].
///
/// A count below 2 is a caller bug; it fires nothing.
pub fn fire_site(
    count: u64,
    rotor: RotorState,
    program: &RotorProgram,
) -> (DirectionCounts, RotorState) {
    debug_assert!(count >= 2, "fire_site called with {count} ants");
    let departures = count.saturating_sub(1);
    let len = program.len() as u64;
    let laps = departures / len;
    let extra = departures % len;
    let start = rotor.index() as u64;
    let mut counts = DirectionCounts::default();
    for (slot, dir) in program.steps().iter().enumerate() {
        // how far slot lies after the current index, in 1..=len
        let ahead = (slot as u64 + len - start - 1) % len + 1;
        let n = laps + u64::from(ahead <= extra);
        counts.0[dir.index()] += n;
    }
    let index = (start + departures) % len;
    (counts, RotorState(index as u32))
}
