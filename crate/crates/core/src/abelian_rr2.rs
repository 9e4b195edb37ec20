//! The two-direction router (South-west / South-east) and its fractional
//! relatives.
//!
//! Ants enter at the origin `(0, 0)` and only ever move to the next row, so
//! row `n` only reaches columns `-n, -n+2, ..., n`. Fields are stored
//! parity-packed: position `p` of row `n` holds column `c = -n + 2p`.
//!
//! Three ways of filling the rows are provided:
//! * [`rr2_scheme`], the integer abelian scheme (one ant stays, the rest split
//!   with the odd ant going South-east),
//! * [`binomial_field`], the closed-form binomial model with sub-1 values
//!   truncated,
//! * [`symmetric_rr2`], the fractional split that keeps one ant per site.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::lattice::{Bounds, Coord, Grid};
use crate::numeric::{Dyadic, Mass};

/// One row of a parity-packed field: the entries at positions
/// `start..start + values.len()`. Everything outside is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Rr2Row<V> {
    start: usize,
    values: Vec<V>,
}

impl<V> Rr2Row<V> {
    pub fn start(&self) -> usize {
        self.start
    }

    /// One past the last stored position.
    pub fn end(&self) -> usize {
        self.start + self.values.len()
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, p: usize) -> Option<&V> {
        p.checked_sub(self.start).and_then(|i| self.values.get(i))
    }
}

impl<V: Default + PartialEq> Rr2Row<V> {
    /// Drops zero entries from both ends.
    fn trimmed(start: usize, mut values: Vec<V>) -> Self {
        let zero = V::default();
        let Some(first) = values.iter().position(|v| *v != zero) else {
            return Rr2Row {
                start: 0,
                values: Vec::new(),
            };
        };
        let last = values
            .iter()
            .rposition(|v| *v != zero)
            .expect("non-zero entry");
        values.truncate(last + 1);
        values.drain(..first);
        Rr2Row {
            start: start + first,
            values,
        }
    }
}

/// Parity-packed triangular field. Row `n` spans positions `0..=n`; only
/// the nonzero span of each row is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Rr2Field<V> {
    rows: Vec<Rr2Row<V>>,
}

pub type CountField = Rr2Field<u64>;
pub type RealField = Rr2Field<f64>;
pub type ExactField = Rr2Field<Dyadic>;

/// Column of position `p` in row `n`.
pub fn column(n: usize, p: usize) -> i64 {
    2 * p as i64 - n as i64
}

/// Position index of column `c` in row `n`, if reachable.
pub fn position(n: usize, c: i64) -> Option<usize> {
    let n = n as i64;
    if c.abs() > n || (c + n) % 2 != 0 {
        None
    } else {
        Some(((c + n) / 2) as usize)
    }
}

impl<V: Clone + Default + PartialEq> Rr2Field<V> {
    /// Builds a field from full rows; row `n` must have `n + 1` entries.
    pub fn from_rows(rows: Vec<Vec<V>>) -> Result<Self> {
        for (n, row) in rows.iter().enumerate() {
            if row.len() != n + 1 {
                return Err(Error::invalid(format!(
                    "row {n} has {} entries, expected {}",
                    row.len(),
                    n + 1
                )));
            }
        }
        Ok(Rr2Field {
            rows: rows.into_iter().map(|r| Rr2Row::trimmed(0, r)).collect(),
        })
    }

    pub fn rows(&self) -> &[Rr2Row<V>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, n: usize) -> Option<&Rr2Row<V>> {
        self.rows.get(n)
    }

    /// Row `n` with all `n + 1` positions filled in.
    pub fn dense_row(&self, n: usize) -> Option<Vec<V>> {
        let row = self.rows.get(n)?;
        Some(
            (0..=n)
                .map(|p| row.get(p).cloned().unwrap_or_default())
                .collect(),
        )
    }

    pub fn dense_rows(&self) -> Vec<Vec<V>> {
        (0..self.rows.len())
            .filter_map(|n| self.dense_row(n))
            .collect()
    }

    /// Stored value at row `n`, column `c`; `None` for unreachable sites and
    /// sites outside the stored span.
    pub fn get(&self, n: usize, c: i64) -> Option<&V> {
        let p = position(n, c)?;
        self.rows.get(n)?.get(p)
    }

    /// Value at row `n`, column `c`, zero where nothing is stored.
    pub fn value(&self, n: usize, c: i64) -> V {
        self.get(n, c).cloned().unwrap_or_default()
    }

    /// Stored entries in row order.
    pub fn iter(&self) -> impl Iterator<Item = (Coord, &V)> + '_ {
        self.rows.iter().enumerate().flat_map(|(n, row)| {
            row.values
                .iter()
                .enumerate()
                .map(move |(i, v)| (Coord::new(n as i64, column(n, row.start + i)), v))
        })
    }

    pub fn map<U>(&self, f: impl Fn(&V) -> U) -> Rr2Field<U> {
        Rr2Field {
            rows: self
                .rows
                .iter()
                .map(|r| Rr2Row {
                    start: r.start,
                    values: r.values.iter().map(&f).collect(),
                })
                .collect(),
        }
    }

    /// Largest `|c|` over stored entries.
    pub fn column_reach(&self) -> i64 {
        self.iter().map(|(c, _)| c.col.abs()).max().unwrap_or(0)
    }

    /// Every row reads the same left to right and right to left.
    pub fn is_mirror_symmetric(&self) -> bool {
        self.rows.iter().enumerate().all(|(n, row)| {
            row.values
                .iter()
                .enumerate()
                .all(|(i, v)| *v == self.value(n, -column(n, row.start + i)))
        })
    }

    /// Dense grid over rows `0..=N` (`N` the last row) and columns
    /// `-R..=R`, `R` the widest stored column. Other sites hold zero.
    pub fn to_grid(&self) -> Grid<V> {
        let last = self.rows.len().saturating_sub(1) as i64;
        let reach = self.column_reach();
        let mut grid = Grid::with_bounds(Bounds::new(0, last, -reach, reach), V::default());
        for (c, v) in self.iter() {
            grid.set(c, v.clone());
        }
        grid
    }
}

impl CountField {
    /// Sites holding at least one ant.
    pub fn occupied_count(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| &r.values)
            .filter(|&&v| v >= 1)
            .count()
    }
}

#[inline]
fn ceil_half(x: i64) -> i64 {
    // rounds toward +infinity
    if x >= 0 {
        (x + 1) / 2
    } else {
        x / 2
    }
}

#[inline]
fn trunc_half(x: i64) -> i64 {
    // rounds toward zero
    x / 2
}

/// Integer abelian scheme: a site reached by `m` ants keeps one and sends
/// `ceil((m-1)/2)` South-east and `floor((m-1)/2)` South-west. Stored values
/// are passage counts. Stops before the first all-zero row.
pub fn rr2_scheme(t: u64) -> Result<CountField> {
    if t == 0 {
        return Err(Error::invalid("ant count must be at least 1"));
    }
    if t > i64::MAX as u64 {
        return Err(Error::invalid("ant count too large"));
    }
    let mut rows = vec![Rr2Row {
        start: 0,
        values: vec![t],
    }];
    loop {
        let prev = rows.last().expect("non-empty");
        let parent = |p: Option<usize>| p.and_then(|p| prev.get(p)).map_or(0, |&v| v as i64);
        let next: Vec<u64> = (prev.start()..=prev.end())
            .map(|p| {
                // parents: North-west at position p-1 and North-east at position p
                let from_nw = ceil_half(parent(p.checked_sub(1)) - 1);
                let from_ne = trunc_half(parent(Some(p)) - 1);
                (from_nw + from_ne) as u64
            })
            .collect();
        let next = Rr2Row::trimmed(prev.start(), next);
        if next.is_empty() {
            break;
        }
        rows.push(next);
    }
    Ok(Rr2Field { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairViolation {
    pub row: usize,
    /// Positive column of the pair; the mirror is `-col`.
    pub col: i64,
    pub left: u64,
    pub right: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Theorem1Report {
    pub pairs_checked: usize,
    /// Largest `|right - left|` over checked pairs.
    pub max_pair_delta: u64,
    pub violations: Vec<PairViolation>,
}

impl Theorem1Report {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Mirror pairs `(-c, +c)` with both sites occupied must differ by exactly
/// one (right minus left) for even `t`, and by 0 or 1 for odd `t`.
pub fn check_theorem1(field: &CountField, t: u64) -> Theorem1Report {
    let mut report = Theorem1Report::default();
    for (n, row) in field.rows().iter().enumerate() {
        for p in (n / 2 + 1).max(row.start())..row.end() {
            let col = column(n, p);
            if col <= 0 {
                continue;
            }
            let right = row.get(p).copied().unwrap_or(0);
            let left = row.get(n - p).copied().unwrap_or(0);
            if left < 1 || right < 1 {
                continue;
            }
            report.pairs_checked += 1;
            let delta = right as i64 - left as i64;
            report.max_pair_delta = report.max_pair_delta.max(delta.unsigned_abs());
            let ok = if t.is_multiple_of(2) {
                delta == 1
            } else {
                delta == 0 || delta == 1
            };
            if !ok {
                report.violations.push(PairViolation {
                    row: n,
                    col,
                    left,
                    right,
                });
            }
        }
    }
    report
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    u64::try_from(acc).ok()
}

/// Limit proportion of ants crossing position `p` of row `n`:
/// `C(n, p) / 2^n`.
pub fn asymptotic_prob(n: u32, p: u32) -> Result<f64> {
    if p > n {
        return Err(Error::invalid(format!("position {p} outside row {n}")));
    }
    if n > 60 {
        return Err(Error::invalid(format!(
            "row {n} too deep for exact binomials (max 60)"
        )));
    }
    let c = binomial(u64::from(n), u64::from(p)).expect("C(60, k) fits in u64");
    Ok(c as f64 / 2f64.powi(n as i32))
}

/// Closed-form binomial model `C(n,p) t / 2^n` over rows `0..=max_row`, with
/// values below one replaced by zero. Trailing empty rows are dropped.
///
/// The coefficients are computed as Pascal-triangle probabilities in `f64`,
/// which is exact while they fit in 53 bits.
pub fn binomial_field(t: u64, max_row: usize) -> Result<RealField> {
    if t == 0 {
        return Err(Error::invalid("ant count must be at least 1"));
    }
    let scale = t as f64;
    let mut prob = vec![1.0f64];
    let mut rows = Vec::new();
    for n in 0..=max_row {
        if n > 0 {
            let mut next = vec![0.0; n + 1];
            for (p, slot) in next.iter_mut().enumerate() {
                let a = if p >= 1 { prob[p - 1] } else { 0.0 };
                let b = prob.get(p).copied().unwrap_or(0.0);
                *slot = a / 2.0 + b / 2.0;
            }
            prob = next;
        }
        let values = prob
            .iter()
            .map(|&q| truncate_below_one(q * scale))
            .collect();
        rows.push(Rr2Row::trimmed(0, values));
    }
    while rows.last().is_some_and(Rr2Row::is_empty) {
        rows.pop();
    }
    Ok(Rr2Field { rows })
}

fn truncate_below_one(v: f64) -> f64 {
    if v >= 1.0 {
        v
    } else {
        0.0
    }
}

/// Untruncated closed-form values `C(n,p) t / 2^n` in exact dyadic
/// arithmetic, rows `0..=max_row`.
pub fn binomial_field_exact(t: u64, max_row: usize) -> ExactField {
    let rows = (0..=max_row)
        .map(|n| {
            let mut coeff = BigUint::one();
            let values = (0..=n)
                .map(|p| {
                    if p > 0 {
                        coeff = &coeff * BigUint::from(n - p + 1) / BigUint::from(p);
                    }
                    Dyadic::new(&coeff * BigUint::from(t), n as u64)
                })
                .collect();
            Rr2Row::trimmed(0, values)
        })
        .collect();
    Rr2Field { rows }
}

/// Fractional split that keeps one ant per site: a parent with value
/// `v >= 1` sends `(v - 1) / 2` to each child; a parent below one is
/// inert and keeps its mass. Rows continue until a row has no value `>= 1`;
/// that last row is kept, since it holds the residual mass.
pub fn symmetric_rr2<M: Mass>(t: u64) -> Result<Rr2Field<M>> {
    if t == 0 {
        return Err(Error::invalid("ant count must be at least 1"));
    }
    let mut rows = vec![Rr2Row {
        start: 0,
        values: vec![M::from_count(t)],
    }];
    loop {
        let prev = rows.last().expect("non-empty");
        if !prev.values().iter().any(M::at_least_one) {
            break;
        }
        let share: Vec<M> = prev
            .values()
            .iter()
            .map(|v| {
                if v.at_least_one() {
                    v.surplus_share(1)
                } else {
                    M::zero()
                }
            })
            .collect();
        let share_at = |p: usize| p.checked_sub(prev.start()).and_then(|i| share.get(i));
        let next = (prev.start()..=prev.end())
            .map(|p| {
                let mut v = M::zero();
                if let Some(s) = p.checked_sub(1).and_then(share_at) {
                    v.accumulate(s);
                }
                if let Some(s) = share_at(p) {
                    v.accumulate(s);
                }
                v
            })
            .collect();
        let next = Rr2Row::trimmed(prev.start(), next);
        if next.is_empty() {
            break;
        }
        rows.push(next);
    }
    Ok(Rr2Field { rows })
}

/// Mass left on the sites once the split has finished: one per site at or
/// above one, the whole value below one. Equals `t` by construction.
pub fn retained_mass<M: Mass>(field: &Rr2Field<M>) -> M {
    let one = M::from_count(1);
    let mut total = M::zero();
    for v in field.rows().iter().flat_map(|r| r.values()) {
        if v.at_least_one() {
            total.accumulate(&one);
        } else {
            total.accumulate(v);
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rr2Diff {
    pub field: RealField,
    pub sup: f64,
}

/// Pointwise `|a - b|` over the union of both supports.
pub fn rr2_diff(a: &CountField, b: &RealField) -> Rr2Diff {
    let rows = a.row_count().max(b.row_count());
    let mut sup = 0.0f64;
    let diff_rows = (0..rows)
        .map(|n| {
            let spans = [
                a.row(n).map(|r| (r.start(), r.end())),
                b.row(n).map(|r| (r.start(), r.end())),
            ];
            let lo = spans.iter().flatten().map(|s| s.0).min().unwrap_or(0);
            let hi = spans.iter().flatten().map(|s| s.1).max().unwrap_or(0);
            let values = (lo..hi)
                .map(|p| {
                    let c = column(n, p);
                    let d = (a.value(n, c) as f64 - b.value(n, c)).abs();
                    sup = sup.max(d);
                    d
                })
                .collect();
            Rr2Row::trimmed(lo, values)
        })
        .collect();
    Rr2Diff {
        field: Rr2Field { rows: diff_rows },
        sup,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_small_cases() {
        let f = rr2_scheme(3).unwrap();
        assert_eq!(f.dense_row(1).unwrap(), [1, 1]);
        let f = rr2_scheme(4).unwrap();
        assert_eq!(f.dense_rows(), [vec![4], vec![1, 2], vec![0, 0, 1]]);
        assert_eq!(f.row(2).unwrap().start(), 2);
        assert_eq!((f.value(1, -1), f.value(1, 1)), (1, 2));
        let f = rr2_scheme(64).unwrap();
        assert_eq!(f.dense_row(1).unwrap(), [31, 32]);
        assert_eq!((f.value(2, -2), f.value(2, 0), f.value(2, 2)), (15, 30, 16));
        assert_eq!(f.value(2, 1), 0);
        assert_eq!(f.value(1, 5), 0);
    }

    #[test]
    fn scheme_single_ant() {
        let f = rr2_scheme(1).unwrap();
        assert_eq!(f.row_count(), 1);
        assert_eq!(f.occupied_count(), 1);
        assert!(rr2_scheme(0).is_err());
    }

    /// Independent route: push ants row by row the way the model describes,
    /// without the rounding formula.
    fn scheme_by_splitting(t: u64) -> Vec<Vec<u64>> {
        let mut rows = vec![vec![t]];
        loop {
            let prev = rows.last().unwrap();
            let mut next = vec![0u64; prev.len() + 1];
            for (p, &m) in prev.iter().enumerate() {
                if m >= 2 {
                    let leaving = m - 1;
                    next[p] += leaving / 2; // South-west
                    next[p + 1] += leaving - leaving / 2; // South-east gets the odd ant
                }
            }
            if next.iter().all(|&v| v == 0) {
                return rows;
            }
            rows.push(next);
        }
    }

    #[test]
    fn scheme_matches_direct_splitting() {
        for t in 1..=600 {
            assert_eq!(
                rr2_scheme(t).unwrap().dense_rows(),
                scheme_by_splitting(t),
                "t={t}"
            );
        }
    }

    #[test]
    fn theorem1_examples() {
        let r = check_theorem1(&rr2_scheme(4).unwrap(), 4);
        assert!(r.holds());
        assert_eq!(r.max_pair_delta, 1);
        let r = check_theorem1(&rr2_scheme(64).unwrap(), 64);
        assert!(r.holds());
        let r = check_theorem1(&rr2_scheme(2).unwrap(), 2);
        assert!(r.holds());
        assert_eq!(r.pairs_checked, 0);
    }

    #[test]
    fn theorem1_detects_violation() {
        let field = CountField::from_rows(vec![vec![6], vec![3, 2]]).unwrap();
        let r = check_theorem1(&field, 6);
        assert_eq!(
            r.violations,
            vec![PairViolation {
                row: 1,
                col: 1,
                left: 3,
                right: 2
            }]
        );
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), Some(6));
        assert_eq!(binomial(60, 30), Some(118264581564861424));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(asymptotic_prob(0, 0).unwrap(), 1.0);
        assert_eq!(asymptotic_prob(2, 1).unwrap(), 0.5);
        assert_eq!(asymptotic_prob(4, 2).unwrap(), 0.375);
        assert!(asymptotic_prob(2, 3).is_err());
        assert!(asymptotic_prob(61, 3).is_err());
    }

    #[test]
    fn binomial_field_examples() {
        let f = binomial_field(1, 10).unwrap();
        assert_eq!(f.dense_rows(), [vec![1.0]]);
        let f = binomial_field(8, 10).unwrap();
        assert_eq!(f.dense_row(2).unwrap(), [2.0, 4.0, 2.0]);
        assert_eq!(f.dense_row(4).unwrap(), [0.0, 2.0, 3.0, 2.0, 0.0]);
        assert_eq!(f.value(3, 3), 1.0);
        assert_eq!(f.value(3, -3), 1.0);
        assert_eq!(f.value(4, 4), 0.0);
        assert_eq!(f.value(4, 0), 3.0);
    }

    #[test]
    fn symmetric_examples() {
        let f = symmetric_rr2::<f64>(4).unwrap();
        assert_eq!(
            f.dense_rows(),
            [vec![4.0], vec![1.5, 1.5], vec![0.25, 0.5, 0.25]]
        );
        let e = symmetric_rr2::<Dyadic>(4).unwrap();
        assert_eq!(e.map(|d| d.to_f64()), f);
        assert_eq!(retained_mass(&e), Dyadic::from_u64(4));
        for t in [1, 2, 7, 100] {
            let f = symmetric_rr2::<f64>(t).unwrap();
            assert_eq!(f.value(1, -1), f.value(1, 1));
            assert!(f.is_mirror_symmetric());
        }
    }

    #[test]
    fn diff_examples() {
        let a = rr2_scheme(4).unwrap();
        let b = symmetric_rr2::<f64>(4).unwrap();
        let d = rr2_diff(&a, &b);
        assert_eq!(d.field.value(1, 1), 0.5);
        assert_eq!(d.field.value(1, -1), 0.5);
        assert_eq!(d.field.value(2, 0), 0.5);
        let same = rr2_diff(&a, &a.map(|&v| v as f64));
        assert_eq!(same.sup, 0.0);
    }

    #[test]
    fn grid_conversion() {
        let g = rr2_scheme(4).unwrap().to_grid();
        assert_eq!(g.bounds(), Bounds::new(0, 2, -2, 2));
        assert_eq!(*g.get(Coord::new(1, 1)), 2);
        assert_eq!(*g.get(Coord::new(2, 2)), 1);
        assert_eq!(*g.get(Coord::new(1, 0)), 0);
    }

    #[test]
    fn exact_binomial_small() {
        let f = binomial_field_exact(8, 3);
        let vals: Vec<f64> = f
            .row(3)
            .unwrap()
            .values()
            .iter()
            .map(|d| d.to_f64())
            .collect();
        assert_eq!(vals, vec![1.0, 3.0, 3.0, 1.0]);
    }
}
