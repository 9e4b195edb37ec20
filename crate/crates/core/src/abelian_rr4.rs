//! Batched line-sweep generation of the four-direction router.
//!
//! All `t` ants start at the origin. One sweep visits the origin column, then
//! the column pairs `-d`, `+d` for `d = 1, 2, ...` moving outwards; inside a
//! column sites are taken north to south. Every site holding two or more ants
//! at the moment it is visited fires once: one ant stays and the others leave
//! along the rotor. Deposits onto sites that come later in the same sweep are
//! seen by them; deposits behind the sweep wait for the next one.
//!
//! Because the model is abelian, the configuration reached once no site holds
//! more than one ant is exactly the one the sequential walk produces.
//!
//! [`SymmetricState`] runs the same sweep with fractional mass: a site with
//! `v >= 1` keeps one ant and sends `(v - 1) / 4` to each cardinal neighbour.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lattice::{Bounds, Coord, Direction, Grid, RotorProgram, RotorState};
use crate::numeric::Mass;
use crate::rotor_walk::fire_site;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepCell {
    pub present: u64,
    /// Ants that ever arrived here (the origin starts at `t`).
    pub passages: u64,
    pub rotor: RotorState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepState {
    cells: Grid<SweepCell>,
    /// Bounding box of every site that has received an ant.
    extent: Bounds,
    iteration: u64,
    ants: u64,
    /// Sites currently holding two or more ants.
    unstable: usize,
}

/// One outward pass: the origin column, then `-d` before `+d` for growing
/// `d`, each column north to south. The extent is re-read as the pass runs,
/// so rows and columns reached during the pass are still visited.
fn outward_pass<S>(
    state: &mut S,
    extent: impl Fn(&S) -> Bounds,
    mut visit: impl FnMut(&mut S, Coord),
) {
    let mut column = |state: &mut S, col: i64| {
        let mut row = extent(state).row_min;
        while row <= extent(state).row_max {
            visit(state, Coord::new(row, col));
            row += 1;
        }
    };
    column(state, 0);
    let mut d = 1;
    loop {
        let e = extent(state);
        if d > (-e.col_min).max(e.col_max) {
            break;
        }
        column(state, -d);
        column(state, d);
        d += 1;
    }
}

impl SweepState {
    pub fn new(t: u64) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("ant count must be at least 1"));
        }
        let mut cells = Grid::new(SweepCell::default());
        cells.set(
            Coord::ORIGIN,
            SweepCell {
                present: t,
                passages: t,
                rotor: RotorState::FRESH,
            },
        );
        Ok(SweepState {
            cells,
            extent: Bounds::ORIGIN,
            iteration: 0,
            ants: t,
            unstable: usize::from(t >= 2),
        })
    }

    pub fn ants(&self) -> u64 {
        self.ants
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn extent(&self) -> Bounds {
        self.extent
    }

    pub fn cells(&self) -> &Grid<SweepCell> {
        &self.cells
    }

    pub fn cell(&self, c: Coord) -> &SweepCell {
        self.cells.get(c)
    }

    pub fn is_settled(&self) -> bool {
        self.unstable == 0
    }

    pub fn total_present(&self) -> u64 {
        self.cells.values().iter().map(|c| c.present).sum()
    }

    pub fn max_present(&self) -> u64 {
        self.cells
            .values()
            .iter()
            .map(|c| c.present)
            .max()
            .unwrap_or(0)
    }

    pub fn occupied_set(&self) -> BTreeSet<Coord> {
        self.cells
            .iter()
            .filter(|(_, c)| c.present >= 1)
            .map(|(c, _)| c)
            .collect()
    }

    pub fn present(&self) -> Grid<u64> {
        self.cells.cropped(self.extent).map(|c| c.present)
    }

    pub fn passages(&self) -> Grid<u64> {
        self.cells.cropped(self.extent).map(|c| c.passages)
    }

    /// Rotor index of every visited site, `None` elsewhere.
    pub fn rotors(&self) -> Grid<Option<u32>> {
        self.cells
            .cropped(self.extent)
            .map(|c| (c.passages > 0).then_some(c.rotor.0))
    }

    fn fire(&mut self, at: Coord, program: &RotorProgram) {
        let cell = *self.cells.get(at);
        if cell.present < 2 {
            return;
        }
        let (counts, rotor) = fire_site(cell.present, cell.rotor, program);
        {
            let c = self.cells.get_mut(at);
            c.present = 1;
            c.rotor = rotor;
        }
        self.unstable -= 1;
        for (dir, n) in counts.nonzero() {
            let to = at.step(dir);
            let target = self.cells.get_mut(to);
            let before = target.present;
            target.present += n;
            target.passages += n;
            if before < 2 && target.present >= 2 {
                self.unstable += 1;
            }
            self.extent = self.extent.including(to);
        }
    }

    /// One outward pass over the whole field.
    pub fn sweep(&mut self, program: &RotorProgram) {
        outward_pass(self, |s| s.extent, |s, at| s.fire(at, program));
        self.iteration += 1;
    }
}

pub fn sweep(state: &mut SweepState, program: &RotorProgram) {
    state.sweep(program);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SettleStatus {
    Settled,
    /// The sweep budget ran out with sites still holding two or more ants.
    Partial,
}

#[derive(Debug, Clone)]
pub struct Settlement {
    pub state: SweepState,
    pub sweeps_used: u64,
    pub status: SettleStatus,
}

impl Settlement {
    pub fn is_settled(&self) -> bool {
        self.status == SettleStatus::Settled
    }
}

/// Sweep until every site holds at most one ant, or `max_sweeps` sweeps have
/// been made.
pub fn run_until_settled(t: u64, program: &RotorProgram, max_sweeps: u64) -> Result<Settlement> {
    if max_sweeps == 0 {
        return Err(Error::invalid("sweep budget must be at least 1"));
    }
    let mut state = SweepState::new(t)?;
    let mut sweeps_used = 0;
    while !state.is_settled() && sweeps_used < max_sweeps {
        state.sweep(program);
        sweeps_used += 1;
    }
    let status = if state.is_settled() {
        SettleStatus::Settled
    } else {
        SettleStatus::Partial
    };
    Ok(Settlement {
        state,
        sweeps_used,
        status,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymCell<M> {
    pub present: M,
    pub passages: M,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricState<M: Mass> {
    cells: Grid<SymCell<M>>,
    extent: Bounds,
    iteration: u64,
    ants: u64,
}

const CARDINALS: [Direction; 4] = [Direction::N, Direction::W, Direction::S, Direction::E];

impl<M: Mass> SymmetricState<M> {
    pub fn new(t: u64) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("ant count must be at least 1"));
        }
        let zero = SymCell {
            present: M::zero(),
            passages: M::zero(),
        };
        let mut cells = Grid::new(zero);
        cells.set(
            Coord::ORIGIN,
            SymCell {
                present: M::from_count(t),
                passages: M::from_count(t),
            },
        );
        Ok(SymmetricState {
            cells,
            extent: Bounds::ORIGIN,
            iteration: 0,
            ants: t,
        })
    }

    pub fn ants(&self) -> u64 {
        self.ants
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn extent(&self) -> Bounds {
        self.extent
    }

    pub fn cell(&self, c: Coord) -> &SymCell<M> {
        self.cells.get(c)
    }

    pub fn cells(&self) -> &Grid<SymCell<M>> {
        &self.cells
    }

    pub fn total_present(&self) -> M {
        let mut total = M::zero();
        for c in self.cells.values() {
            total.accumulate(&c.present);
        }
        total
    }

    pub fn max_present(&self) -> f64 {
        self.cells
            .values()
            .iter()
            .map(|c| c.present.to_f64())
            .fold(0.0, f64::max)
    }

    pub fn present(&self) -> Grid<f64> {
        self.cells.cropped(self.extent).map(|c| c.present.to_f64())
    }

    pub fn passages(&self) -> Grid<f64> {
        self.cells.cropped(self.extent).map(|c| c.passages.to_f64())
    }

    fn distribute(&mut self, at: Coord) {
        let share = {
            let cell = self.cells.get(at);
            if !cell.present.at_least_one() {
                return;
            }
            cell.present.surplus_share(2)
        };
        if share.is_zero() {
            return;
        }
        self.cells.get_mut(at).present = M::from_count(1);
        for dir in CARDINALS {
            let to = at.step(dir);
            let target = self.cells.get_mut(to);
            target.present.accumulate(&share);
            target.passages.accumulate(&share);
            self.extent = self.extent.including(to);
        }
    }

    /// One outward pass, in the same site order as [`SweepState::sweep`].
    pub fn sweep(&mut self) {
        outward_pass(self, |s| s.extent, |s, at| s.distribute(at));
        self.iteration += 1;
    }
}

pub fn symmetric_sweep<M: Mass>(state: &mut SymmetricState<M>) {
    state.sweep();
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rr4Diff {
    pub present: Grid<f64>,
    pub present_sup: f64,
    pub passages: Grid<f64>,
    pub passage_sup: f64,
}

/// Pointwise `|integer - fractional|` for present ants and passages. Both
/// states must be at the same iteration.
pub fn rr4_model_diff<M: Mass>(a: &SweepState, b: &SymmetricState<M>) -> Result<Rr4Diff> {
    if a.iteration() != b.iteration() {
        return Err(Error::invalid(format!(
            "iteration mismatch: {} vs {}",
            a.iteration(),
            b.iteration()
        )));
    }
    let ea = a.extent();
    let eb = b.extent();
    let bounds = Bounds::new(
        ea.row_min.min(eb.row_min),
        ea.row_max.max(eb.row_max),
        ea.col_min.min(eb.col_min),
        ea.col_max.max(eb.col_max),
    );
    let mut present = Grid::with_bounds(bounds, 0.0);
    let mut passages = Grid::with_bounds(bounds, 0.0);
    let mut present_sup = 0.0f64;
    let mut passage_sup = 0.0f64;
    for c in bounds.coords() {
        let ia = a.cell(c);
        let ib = b.cell(c);
        let dp = (ia.present as f64 - ib.present.to_f64()).abs();
        let dq = (ia.passages as f64 - ib.passages.to_f64()).abs();
        present_sup = present_sup.max(dp);
        passage_sup = passage_sup.max(dq);
        present.set(c, dp);
        passages.set(c, dq);
    }
    Ok(Rr4Diff {
        present,
        present_sup,
        passages,
        passage_sup,
    })
}

/// The seven non-trivial symmetries of the square applied to `c`.
pub fn dihedral_images(c: Coord) -> [Coord; 7] {
    let (r, k) = (c.row, c.col);
    [
        Coord::new(r, -k),
        Coord::new(-r, k),
        Coord::new(-r, -k),
        Coord::new(k, r),
        Coord::new(-k, r),
        Coord::new(k, -r),
        Coord::new(-k, -r),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetryProbe {
    /// Largest present-count difference between a site and one of its images.
    pub deviation: u64,
    pub site: Coord,
    pub image: Coord,
    /// Largest deviation for each symmetry, in [`dihedral_images`] order.
    pub per_image: [u64; 7],
}

/// Compare each site's present count with its images under the dihedral
/// group of the square. Ties keep the first site in row-major order.
pub fn quasi_symmetry_probe(state: &SweepState) -> SymmetryProbe {
    let mut best = SymmetryProbe {
        deviation: 0,
        site: Coord::ORIGIN,
        image: Coord::ORIGIN,
        per_image: [0; 7],
    };
    let e = state.extent();
    let reach = [e.row_min, e.row_max, e.col_min, e.col_max]
        .iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or(0);
    // square hull, closed under every symmetry
    let hull = Bounds::new(-reach, reach, -reach, reach);
    for c in hull.coords() {
        let here = state.cell(c).present;
        for (k, img) in dihedral_images(c).into_iter().enumerate() {
            let d = here.abs_diff(state.cell(img).present);
            best.per_image[k] = best.per_image[k].max(d);
            if d > best.deviation {
                best.deviation = d;
                best.site = c;
                best.image = img;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Dyadic;
    use crate::rotor_walk::run_walk;

    #[test]
    fn single_ant_is_already_settled() {
        let mut s = SweepState::new(1).unwrap();
        assert!(s.is_settled());
        let before = s.clone();
        s.sweep(&RotorProgram::rr4());
        assert_eq!(s.cells(), before.cells());
        let out = run_until_settled(1, &RotorProgram::rr4(), 10).unwrap();
        assert!(out.is_settled());
        assert_eq!(out.sweeps_used, 0);
    }

    #[test]
    fn five_ants_one_sweep() {
        let mut s = SweepState::new(5).unwrap();
        s.sweep(&RotorProgram::rr4());
        assert_eq!(s.cell(Coord::ORIGIN).present, 1);
        for d in CARDINALS {
            assert_eq!(s.cell(Coord::ORIGIN.step(d)).present, 1);
        }
        assert!(s.is_settled());
        assert_eq!(s.iteration(), 1);
        assert_eq!(s.total_present(), 5);
        let walk = run_walk(5, &RotorProgram::rr4()).unwrap();
        assert_eq!(s.occupied_set(), walk.occupied_set());
    }

    #[test]
    fn settles_like_the_walk() {
        let rr4 = RotorProgram::rr4();
        let walk = run_walk(300, &rr4).unwrap();
        for t in 1..=300 {
            let out = run_until_settled(t, &rr4, 1_000_000).unwrap();
            assert!(out.is_settled());
            assert_eq!(out.state.occupied_set(), walk.occupied_prefix(t), "t={t}");
        }
    }

    #[test]
    fn settled_odometer_and_rotors_match_walk() {
        for program in RotorProgram::builtins() {
            let t = 150;
            let walk = run_walk(t, &program).unwrap();
            let out = run_until_settled(t, &program, 1_000_000).unwrap();
            for (c, cell) in walk.cells().iter() {
                let s = out.state.cell(c);
                assert_eq!(s.passages, cell.passages, "{} {c}", program.name());
                assert_eq!(s.rotor, cell.rotor, "{} {c}", program.name());
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_partial() {
        let out = run_until_settled(1000, &RotorProgram::rr4(), 1).unwrap();
        assert_eq!(out.status, SettleStatus::Partial);
        assert_eq!(out.sweeps_used, 1);
        assert_eq!(out.state.total_present(), 1000);
        assert!(run_until_settled(10, &RotorProgram::rr4(), 0).is_err());
    }

    #[test]
    fn conservation_every_sweep() {
        let rr4 = RotorProgram::rr4();
        let mut s = SweepState::new(777).unwrap();
        for _ in 0..40 {
            s.sweep(&rr4);
            assert_eq!(s.total_present(), 777);
            for (_, c) in s.cells().iter() {
                assert!(c.present == 0 || c.passages >= c.present);
            }
        }
    }

    #[test]
    fn symmetric_rule() {
        let mut s = SymmetricState::<f64>::new(5).unwrap();
        s.sweep();
        assert_eq!(s.cell(Coord::ORIGIN).present, 1.0);
        for d in CARDINALS {
            assert_eq!(s.cell(Coord::ORIGIN.step(d)).present, 1.0);
            assert_eq!(s.cell(Coord::ORIGIN.step(d)).passages, 1.0);
        }
        let mut one = SymmetricState::<f64>::new(1).unwrap();
        one.sweep();
        assert_eq!(one.cell(Coord::ORIGIN).present, 1.0);
        assert_eq!(one.extent(), Bounds::ORIGIN);
    }

    #[test]
    fn symmetric_exact_mass_and_mirror() {
        let mut s = SymmetricState::<Dyadic>::new(300).unwrap();
        let mut f = SymmetricState::<f64>::new(300).unwrap();
        for _ in 0..12 {
            s.sweep();
            f.sweep();
            assert_eq!(s.total_present(), Dyadic::from_u64(300));
        }
        for c in s.extent().coords() {
            let v = s.cell(c).present.to_f64();
            assert!((v - f.cell(c).present).abs() <= 1e-9 * v.max(1.0));
        }
    }

    #[test]
    fn diff_and_probe() {
        let rr4 = RotorProgram::rr4();
        let mut a = SweepState::new(5).unwrap();
        let mut b = SymmetricState::<f64>::new(5).unwrap();
        assert!(rr4_model_diff(&a, &b).unwrap().present_sup == 0.0);
        a.sweep(&rr4);
        assert!(rr4_model_diff(&a, &b).is_err());
        b.sweep();
        let d = rr4_model_diff(&a, &b).unwrap();
        assert_eq!(d.present_sup, 0.0);
        assert_eq!(d.passage_sup, 0.0);
        b.sweep();
        a.sweep(&rr4);
        assert!(rr4_model_diff(&a, &b).unwrap().present_sup.is_finite());

        assert_eq!(
            quasi_symmetry_probe(&SweepState::new(1).unwrap()).deviation,
            0
        );
        assert_eq!(quasi_symmetry_probe(&a).deviation, 0);
        let mut c = SweepState::new(2).unwrap();
        c.sweep(&rr4);
        let p = quasi_symmetry_probe(&c);
        assert_eq!(p.deviation, 1);
        // the single ant went West: East mirror and rotations all see it
        assert_eq!(p.per_image, [1, 0, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn dihedral_images_form_orbit() {
        let c = Coord::new(2, 5);
        let imgs = dihedral_images(c);
        assert!(imgs.iter().all(|i| i.norm2() == c.norm2()));
        let set: BTreeSet<_> = imgs.iter().copied().chain([c]).collect();
        assert_eq!(set.len(), 8);
    }
}
