//! Coordinates, the compass direction alphabet, rotor programs and the
//! origin-centered growing grid shared by every model.
//!
//! Rows grow towards the South and columns towards the East, so `N` is
//! `(-1, 0)` and `SE` is `(+1, +1)`. The two-direction model lives on rows
//! `n >= 0` with its symmetry axis on column 0.

mod grid;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use grid::{Bounds, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coord {
    pub row: i64,
    pub col: i64,
}

impl Coord {
    pub const ORIGIN: Coord = Coord { row: 0, col: 0 };

    pub const fn new(row: i64, col: i64) -> Self {
        Coord { row, col }
    }

    pub fn step(self, dir: Direction) -> Coord {
        let (dr, dc) = dir.offset();
        Coord::new(self.row + dr, self.col + dc)
    }

    /// Squared Euclidean norm.
    pub fn norm2(self) -> i64 {
        self.row * self.row + self.col * self.col
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    N,
    S,
    E,
    W,
    NE,
    NW,
    SE,
    SW,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::N,
        Direction::S,
        Direction::E,
        Direction::W,
        Direction::NE,
        Direction::NW,
        Direction::SE,
        Direction::SW,
    ];

    /// `(drow, dcol)` with rows increasing southwards.
    pub const fn offset(self) -> (i64, i64) {
        match self {
            Direction::N => (-1, 0),
            Direction::S => (1, 0),
            Direction::E => (0, 1),
            Direction::W => (0, -1),
            Direction::NE => (-1, 1),
            Direction::NW => (-1, -1),
            Direction::SE => (1, 1),
            Direction::SW => (1, -1),
        }
    }

    /// Position in [`Direction::ALL`]; used to index per-direction tallies.
    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            Direction::N => "N",
            Direction::S => "S",
            Direction::E => "E",
            Direction::W => "W",
            Direction::NE => "NE",
            Direction::NW => "NW",
            Direction::SE => "SE",
            Direction::SW => "SW",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let token = s.trim();
        Direction::ALL
            .into_iter()
            .find(|d| d.symbol().eq_ignore_ascii_case(token))
            .ok_or_else(|| Error::UnknownDirection(token.to_string()))
    }
}

/// Index into a [`RotorProgram`]; a fresh rotor points at `steps[0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RotorState(pub u32);

impl RotorState {
    pub const FRESH: RotorState = RotorState(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The cyclic direction sequence a site's rotor walks through. Repeats are
/// allowed and bias the walk towards the repeated directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotorProgram {
    name: String,
    steps: Vec<Direction>,
}

impl RotorProgram {
    pub fn new(name: impl Into<String>, steps: Vec<Direction>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::EmptyProgram);
        }
        if steps.len() > u32::MAX as usize {
            return Err(Error::invalid("rotor program too long"));
        }
        Ok(RotorProgram {
            name: name.into(),
            steps,
        })
    }

    /// J. Propp's four-direction router: N, W, S, E.
    pub fn rr4() -> Self {
        use Direction::*;
        Self::builtin("RR4", vec![N, W, S, E])
    }

    /// Four directions over eight steps, privileging East-West.
    pub fn rr48ew() -> Self {
        use Direction::*;
        Self::builtin("RR48EW", vec![N, W, W, W, S, E, E, E])
    }

    /// All eight neighbours over eleven steps, privileging N, W and E.
    pub fn rr811nwe() -> Self {
        use Direction::*;
        Self::builtin("RR811NWE", vec![N, N, NW, W, W, SW, S, SE, E, E, NE])
    }

    fn builtin(name: &str, steps: Vec<Direction>) -> Self {
        RotorProgram {
            name: name.to_string(),
            steps,
        }
    }

    pub fn builtins() -> [RotorProgram; 3] {
        [Self::rr4(), Self::rr48ew(), Self::rr811nwe()]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn steps(&self) -> &[Direction] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Canonical comma-separated text, e.g. `N,W,S,E`.
    pub fn text(&self) -> String {
        self.steps
            .iter()
            .map(|d| d.symbol())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Turn the rotor one notch, then report where it now points.
    pub fn advance(&self, state: RotorState) -> (RotorState, Direction) {
        let next = (state.index() + 1) % self.steps.len();
        (RotorState(next as u32), self.steps[next])
    }

    pub fn direction(&self, state: RotorState) -> Direction {
        self.steps[state.index()]
    }
}

impl FromStr for RotorProgram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_program(s)
    }
}

pub fn offset(d: Direction) -> (i64, i64) {
    d.offset()
}

pub fn advance_rotor(program: &RotorProgram, state: RotorState) -> (RotorState, Direction) {
    program.advance(state)
}

/// Parses `"N,W,S,E"` style text (case-insensitive, whitespace tolerated).
/// A built-in name such as `RR48EW` is accepted as well. Programs whose
/// steps match a built-in take the built-in's name.
pub fn parse_program(text: &str) -> Result<RotorProgram> {
    let trimmed = text.trim();
    if let Some(p) = RotorProgram::builtins()
        .into_iter()
        .find(|p| p.name().eq_ignore_ascii_case(trimmed))
    {
        return Ok(p);
    }
    if trimmed.is_empty() {
        return Err(Error::EmptyProgram);
    }
    let steps = trimmed
        .split(',')
        .map(|tok| {
            if tok.trim().is_empty() {
                Err(Error::UnknownDirection(tok.to_string()))
            } else {
                tok.parse::<Direction>()
            }
        })
        .collect::<Result<Vec<_>>>()?;
    match RotorProgram::builtins()
        .into_iter()
        .find(|p| p.steps == steps)
    {
        Some(p) => Ok(p),
        None => {
            let name = steps
                .iter()
                .map(|d| d.symbol())
                .collect::<Vec<_>>()
                .join(",");
            RotorProgram::new(name, steps)
        }
    }
}
