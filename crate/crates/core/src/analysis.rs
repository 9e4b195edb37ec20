//! Shape and convergence measurements over simulated fields.
//!
//! Everything here is read-only over its inputs. The conjecture reports are
//! descriptive series; they carry summary flags but never assert a bound.

use std::collections::HashSet;

use crate::abelian_rr2::{asymptotic_prob, column, rr2_diff, rr2_scheme, symmetric_rr2};
use crate::abelian_rr4::{quasi_symmetry_probe, SweepState};
use crate::error::{Error, Result};
use crate::lattice::{Coord, RotorProgram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeMetrics {
    /// Largest lattice distance `r` such that every site with norm `<= r` is
    /// occupied.
    pub inradius: f64,
    /// Largest norm of an occupied site.
    pub outradius: f64,
    /// `inradius / outradius`; 1 for a single site.
    pub ratio: f64,
    pub site_count: usize,
}

/// Exact in- and out-radius of an occupied set. Norm comparisons are done
/// on squared integer norms.
pub fn shape_metrics<I>(occupied: I) -> Result<ShapeMetrics>
where
    I: IntoIterator<Item = Coord>,
{
    let sites: HashSet<Coord> = occupied.into_iter().collect();
    if sites.is_empty() {
        return Err(Error::invalid(
            "shape metrics need at least one occupied site",
        ));
    }
    let out2 = sites.iter().map(|c| c.norm2()).max().expect("non-empty");
    // Every site beyond the outradius is empty, so the nearest hole lies
    // within norm^2 <= (R + 1)^2.
    let reach = (out2 as f64).sqrt().ceil() as i64 + 1;
    let mut hole2 = i64::MAX;
    for r in -reach..=reach {
        for c in -reach..=reach {
            let site = Coord::new(r, c);
            if site.norm2() < hole2 && !sites.contains(&site) {
                hole2 = site.norm2();
            }
        }
    }
    // largest realized squared norm strictly inside the nearest hole
    let mut in2 = 0;
    let span = (hole2 as f64).sqrt().ceil() as i64;
    for r in -span..=span {
        for c in -span..=span {
            let n2 = r * r + c * c;
            if n2 < hole2 {
                in2 = in2.max(n2);
            }
        }
    }
    let inradius = (in2 as f64).sqrt();
    let outradius = (out2 as f64).sqrt();
    let ratio = if outradius == 0.0 {
        1.0
    } else {
        inradius / outradius
    };
    Ok(ShapeMetrics {
        inradius,
        outradius,
        ratio,
        site_count: sites.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub t: u64,
    pub sup: f64,
    /// Running maximum of `sup` up to this row.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Between consecutive rows the envelope grew by no more than
    /// `log2(t_next) - log2(t_prev)`, i.e. less than one unit per doubling.
    pub slower_than_log2: bool,
}

/// Largest `|abelian - symmetric|` over the two-direction field for each `t`.
pub fn conjecture1_scaling(ts: &[u64]) -> Result<ScalingReport> {
    if ts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("ant counts must be strictly increasing"));
    }
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(ts.len());
    for &t in ts {
        let sup = rr2_diff(&rr2_scheme(t)?, &symmetric_rr2::<f64>(t)?).sup;
        let envelope = rows.last().map_or(sup, |r| r.envelope.max(sup));
        rows.push(ScalingRow { t, sup, envelope });
    }
    let slower_than_log2 = rows.windows(2).all(|w| {
        let growth = w[1].envelope - w[0].envelope;
        growth <= (w[1].t as f64).log2() - (w[0].t as f64).log2()
    });
    Ok(ScalingReport {
        rows,
        slower_than_log2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TracePoint {
    pub sweep: u64,
    pub deviation: u64,
    pub present_total: u64,
}

/// Maximum dihedral-orbit deviation of present counts after each sweep.
/// Stops early once the state has settled.
pub fn conjecture2_trace(t: u64, sweeps: u64, program: &RotorProgram) -> Result<Vec<TracePoint>> {
    let mut state = SweepState::new(t)?;
    let mut out = Vec::with_capacity(sweeps as usize);
    for _ in 0..sweeps {
        state.sweep(program);
        out.push(TracePoint {
            sweep: state.iteration(),
            deviation: quasi_symmetry_probe(&state).deviation,
            present_total: state.total_present(),
        });
        if state.is_settled() {
            break;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub t: u64,
    pub proportion: f64,
    pub error: f64,
}

/// `|Nbf(n, c, t) / t - C(n, p) / 2^n|` for each `t`, with `c = -n + 2p`.
pub fn theorem2_convergence(n: u32, p: u32, ts: &[u64]) -> Result<Vec<ConvergencePoint>> {
    if n > 16 {
        return Err(Error::invalid(format!(
            "row {n} beyond the supported depth of 16"
        )));
    }
    let limit = asymptotic_prob(n, p)?;
    let c = column(n as usize, p as usize);
    ts.iter()
        .map(|&t| {
            let field = rr2_scheme(t)?;
            let proportion = field.value(n as usize, c) as f64 / t as f64;
            Ok(ConvergencePoint {
                t,
                proportion,
                error: (proportion - limit).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor_walk::run_walk;

    fn coords(v: &[(i64, i64)]) -> Vec<Coord> {
        v.iter().map(|&(r, c)| Coord::new(r, c)).collect()
    }

    #[test]
    fn single_site() {
        let m = shape_metrics([Coord::ORIGIN]).unwrap();
        assert_eq!((m.inradius, m.outradius, m.site_count), (0.0, 0.0, 1));
    }

    #[test]
    fn plus_shape() {
        let m = shape_metrics(coords(&[(0, 0), (0, -1), (1, 0), (0, 1), (-1, 0)])).unwrap();
        assert_eq!((m.inradius, m.outradius, m.ratio), (1.0, 1.0, 1.0));
    }

    #[test]
    fn missing_site_caps_inradius() {
        // full 5x5 block minus (0, 2): nearest hole at norm 2
        let sites: Vec<Coord> = (-2..=2)
            .flat_map(|r| (-2..=2).map(move |c| Coord::new(r, c)))
            .filter(|&c| c != Coord::new(0, 2))
            .collect();
        let m = shape_metrics(sites).unwrap();
        assert_eq!(m.inradius, 2f64.sqrt());
        assert_eq!(m.outradius, 8f64.sqrt());
    }

    #[test]
    fn empty_set_rejected() {
        assert!(shape_metrics(Vec::new()).is_err());
    }

    #[test]
    fn permutation_invariant() {
        let field = run_walk(200, &RotorProgram::rr4()).unwrap();
        let mut sites: Vec<Coord> = field.occupied_set().into_iter().collect();
        let a = shape_metrics(sites.clone()).unwrap();
        sites.reverse();
        sites.rotate_left(37);
        assert_eq!(shape_metrics(sites).unwrap(), a);
    }

    #[test]
    fn scaling_small() {
        let r = conjecture1_scaling(&[4]).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].sup, 0.75);
        assert!(conjecture1_scaling(&[]).unwrap().rows.is_empty());
        assert!(conjecture1_scaling(&[8, 4]).is_err());
    }

    #[test]
    fn trace_small() {
        let rr4 = RotorProgram::rr4();
        let tr = conjecture2_trace(1, 5, &rr4).unwrap();
        assert!(tr.iter().all(|p| p.deviation == 0));
        let tr = conjecture2_trace(5, 100, &rr4).unwrap();
        assert_eq!(tr.last().unwrap().deviation, 0);
    }

    #[test]
    fn convergence_examples() {
        let e = theorem2_convergence(0, 0, &[1, 7, 1000]).unwrap();
        assert!(e.iter().all(|p| p.error == 0.0));
        assert_eq!(theorem2_convergence(2, 1, &[64]).unwrap()[0].error, 0.03125);
        assert_eq!(theorem2_convergence(2, 2, &[64]).unwrap()[0].error, 0.0);
        assert!(theorem2_convergence(17, 0, &[64]).is_err());
        assert!(theorem2_convergence(3, 4, &[64]).is_err());
    }
}
