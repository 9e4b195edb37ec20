use super::Coord;

/// Inclusive row/column ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub row_min: i64,
    pub row_max: i64,
    pub col_min: i64,
    pub col_max: i64,
}

impl Bounds {
    pub const ORIGIN: Bounds = Bounds {
        row_min: 0,
        row_max: 0,
        col_min: 0,
        col_max: 0,
    };

    pub fn new(row_min: i64, row_max: i64, col_min: i64, col_max: i64) -> Self {
        assert!(row_min <= row_max && col_min <= col_max, "inverted bounds");
        Bounds {
            row_min,
            row_max,
            col_min,
            col_max,
        }
    }

    pub fn height(&self) -> usize {
        (self.row_max - self.row_min + 1) as usize
    }

    pub fn width(&self) -> usize {
        (self.col_max - self.col_min + 1) as usize
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.row >= self.row_min
            && c.row <= self.row_max
            && c.col >= self.col_min
            && c.col <= self.col_max
    }

    /// Smallest bounds containing both `self` and `c`.
    pub fn including(self, c: Coord) -> Bounds {
        Bounds {
            row_min: self.row_min.min(c.row),
            row_max: self.row_max.max(c.row),
            col_min: self.col_min.min(c.col),
            col_max: self.col_max.max(c.col),
        }
    }

    /// Row-major (north-to-south, west-to-east) coordinate iterator.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        let b = *self;
        (b.row_min..=b.row_max)
            .flat_map(move |r| (b.col_min..=b.col_max).map(move |c| Coord::new(r, c)))
    }
}

/// Dense 2D storage addressed by origin-relative coordinates.
///
/// Reads outside the bounds return the default value. Writes outside the
/// bounds grow the grid: each exceeded dimension at least doubles and the new
/// range is symmetric about the origin, so coordinates never move.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<V> {
    bounds: Bounds,
    cells: Vec<V>,
    default: V,
}

impl<V: Clone> Grid<V> {
    /// A 1x1 grid holding only the origin.
    pub fn new(default: V) -> Self {
        Self::with_bounds(Bounds::ORIGIN, default)
    }

    /// # Panics
    /// If `bounds` does not contain the origin.
    pub fn with_bounds(bounds: Bounds, default: V) -> Self {
        assert!(
            bounds.contains(Coord::ORIGIN),
            "grid bounds must contain the origin"
        );
        let cells = vec![default.clone(); bounds.width() * bounds.height()];
        Grid {
            bounds,
            cells,
            default,
        }
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn default_value(&self) -> &V {
        &self.default
    }

    #[inline]
    fn index(&self, c: Coord) -> Option<usize> {
        if self.bounds.contains(c) {
            let r = (c.row - self.bounds.row_min) as usize;
            let k = (c.col - self.bounds.col_min) as usize;
            Some(r * self.bounds.width() + k)
        } else {
            None
        }
    }

    #[inline]
    pub fn get(&self, c: Coord) -> &V {
        match self.index(c) {
            Some(i) => &self.cells[i],
            None => &self.default,
        }
    }

    /// Mutable access, growing the grid when `c` is out of bounds.
    #[inline]
    pub fn get_mut(&mut self, c: Coord) -> &mut V {
        if !self.bounds.contains(c) {
            self.grow_to(c);
        }
        let i = self.index(c).expect("grown grid contains coordinate");
        &mut self.cells[i]
    }

    pub fn set(&mut self, c: Coord, v: V) {
        *self.get_mut(c) = v;
    }

    fn grow_to(&mut self, c: Coord) {
        fn grow_axis(lo: i64, hi: i64, want: i64) -> (i64, i64) {
            if want >= lo && want <= hi {
                return (lo, hi);
            }
            let span = hi - lo + 1;
            let radius = span.max(want.abs()).max(lo.abs()).max(hi.abs());
            (-radius, radius)
        }
        let b = self.bounds;
        let (row_min, row_max) = grow_axis(b.row_min, b.row_max, c.row);
        let (col_min, col_max) = grow_axis(b.col_min, b.col_max, c.col);
        let mut grown = Grid::with_bounds(
            Bounds::new(row_min, row_max, col_min, col_max),
            self.default.clone(),
        );
        for r in b.row_min..=b.row_max {
            let src = ((r - b.row_min) as usize) * b.width();
            let dst = grown
                .index(Coord::new(r, b.col_min))
                .expect("old bounds inside new");
            grown.cells[dst..dst + b.width()].clone_from_slice(&self.cells[src..src + b.width()]);
        }
        *self = grown;
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coord, &V)> + '_ {
        self.bounds.coords().zip(self.cells.iter())
    }

    pub fn values(&self) -> &[V] {
        &self.cells
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&V) -> U) -> Grid<U> {
        Grid {
            bounds: self.bounds,
            cells: self.cells.iter().map(&f).collect(),
            default: f(&self.default),
        }
    }

    /// Tightest bounds (always including the origin) around cells for which
    /// `keep` holds.
    pub fn support_bounds(&self, keep: impl Fn(&V) -> bool) -> Bounds {
        self.iter()
            .filter(|(_, v)| keep(v))
            .fold(Bounds::ORIGIN, |b, (c, _)| b.including(c))
    }

    /// Copy of the grid restricted (or extended) to `bounds`.
    pub fn cropped(&self, bounds: Bounds) -> Grid<V> {
        let mut out = Grid::with_bounds(bounds, self.default.clone());
        for (i, c) in bounds.coords().enumerate() {
            out.cells[i] = self.get(c).clone();
        }
        out
    }
}
