//! Wasserstein projection onto `{ρ ≤ 1}` as a capacitated min-cost flow.
//!
//! Sources are the cells carrying mass, every cell is a target with an arc of
//! capacity 1 (density units) to a common sink. The flow on that arc is the
//! projected density. Only a window around the over-full cells is solved; the
//! rest of the density stays in place. The windowed optimum is accepted only
//! after a dual certificate shows it is optimal for the whole grid:
//! with every outside cell priced at zero, a window source `i` with dual value
//! `f_i` must satisfy `f_i ≤ c(i, k)` for each outside cell `k`. Failing pairs
//! enlarge the window and the solve is repeated.
//!
//! The quadratic cost ties whenever an over-full cell lies at the same lattice
//! distance from free capacity on two sides. The projection is the mean of the
//! solves under both tie orientations, so such excess splits evenly.

use alloc::vec;
use alloc::vec::Vec;

use super::simplex::NetworkSimplex;
use super::{max_exact_cost, oriented_cost, require_exact_grid, Tie, COST_SCALE};
use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::grid::Grid;
use crate::math;

/// Squared lattice radius of the arcs created up front; farther pairs enter by
/// pricing.
const BAND2_1D: u64 = 9;
const BAND2_2D: u64 = 5;

#[derive(Debug, Clone)]
pub struct ProjectionReport {
    pub density: DensityField,
    /// `W₂²` between the input and the projection.
    pub cost: f64,
    /// Cells in the final window (0 when the input was already feasible).
    pub window: usize,
    /// Window enlargements needed before the certificate held.
    pub rounds: usize,
    pub pivots: usize,
}

/// `argmin { W₂²(ρ, η) : η ≤ 1 }`, keeping the mass of `ρ`.
///
/// Sub-probability inputs are accepted; the mass must not exceed `|Ω|`.
/// A density with `max ρ ≤ 1` is returned unchanged.
pub fn wasserstein_project(rho: &DensityField) -> Result<DensityField> {
    Ok(wasserstein_project_with_report(rho)?.density)
}

pub fn wasserstein_project_with_report(rho: &DensityField) -> Result<ProjectionReport> {
    let grid = *rho.grid();
    let values = rho.values();
    let over: Vec<usize> = (0..grid.len()).filter(|&i| values[i] > 1.0).collect();
    if over.is_empty() {
        return Ok(ProjectionReport {
            density: rho.clone(),
            cost: 0.0,
            window: 0,
            rounds: 0,
            pivots: 0,
        });
    }
    require_exact_grid(&grid)?;
    let total: f64 = values.iter().sum();
    if total > grid.len() as f64 * (1.0 + 1e-12) {
        return Err(Error::Infeasible(alloc::format!(
            "mass {} exceeds the domain volume {}",
            rho.mass(),
            grid.volume()
        )));
    }

    let a = project_oriented(&grid, values, &over, Tie::Forward)?;
    let b = project_oriented(&grid, values, &over, Tie::Reversed)?;
    let density: Vec<f64> = a.density.iter().zip(&b.density).map(|(x, y)| 0.5 * (x + y)).collect();
    Ok(ProjectionReport {
        density: DensityField::from_solver(grid, density),
        cost: 0.5 * (a.cost + b.cost),
        window: a.window.max(b.window),
        rounds: a.rounds.max(b.rounds),
        pivots: a.pivots + b.pivots,
    })
}

struct Oriented {
    density: Vec<f64>,
    cost: f64,
    window: usize,
    rounds: usize,
    pivots: usize,
}

fn project_oriented(grid: &Grid, values: &[f64], over: &[usize], tie: Tie) -> Result<Oriented> {
    let grid = *grid;
    let mut in_window = vec![false; grid.len()];
    for &i in over {
        in_window[i] = true;
    }
    flood(&grid, values, &mut in_window);
    let excess: f64 = over.iter().map(|&i| values[i] - 1.0).sum();
    let reach = if grid.dim() == 1 { excess } else { math::sqrt(excess) };
    let mut radius = math::ceil(reach) as usize + 2;
    dilate(&grid, &mut in_window, radius);

    let mut rounds = 0;
    let mut pivots = 0;
    loop {
        match solve_window(&grid, values, &in_window, tie)? {
            WindowOutcome::Optimal {
                density,
                cost,
                pivots: p,
            } => {
                pivots += p;
                let window = in_window.iter().filter(|w| **w).count();
                return Ok(Oriented {
                    density,
                    cost,
                    window,
                    rounds,
                    pivots,
                });
            }
            WindowOutcome::Grow { cells, pivots: p } => {
                pivots += p;
                for k in cells {
                    in_window[k] = true;
                }
                radius = (2 * radius).max(2);
                dilate(&grid, &mut in_window, radius);
                rounds += 1;
            }
        }
    }
}

enum WindowOutcome {
    Optimal {
        density: Vec<f64>,
        cost: f64,
        pivots: usize,
    },
    Grow {
        cells: Vec<usize>,
        pivots: usize,
    },
}

fn solve_window(grid: &Grid, values: &[f64], in_window: &[bool], tie: Tie) -> Result<WindowOutcome> {
    let cost_of = |i: usize, j: usize| oriented_cost(grid, i, j, tie);
    let window: Vec<usize> = (0..grid.len()).filter(|&i| in_window[i]).collect();
    let sources: Vec<usize> = window.iter().copied().filter(|&i| values[i] > 0.0).collect();
    let whole = window.len() == grid.len();
    let (ns, nw) = (sources.len(), window.len());
    let sink = ns + nw;
    let total: f64 = sources.iter().map(|&i| values[i]).sum();
    if total > nw as f64 * (1.0 + 1e-12) && !whole {
        return Ok(WindowOutcome::Grow {
            cells: Vec::new(),
            pivots: 0,
        });
    }

    let mut supply = Vec::with_capacity(ns + nw + 1);
    supply.extend(sources.iter().map(|&i| values[i]));
    supply.extend(core::iter::repeat_n(0.0, nw));
    supply.push(-total);
    let mut net = NetworkSimplex::new(supply, max_exact_cost(grid))?;
    let mut slot = vec![usize::MAX; grid.len()];
    for (v, &j) in window.iter().enumerate() {
        slot[j] = v;
    }
    let first_sink_arc = net.first_real_arc();
    for v in 0..nw {
        net.add_arc(ns + v, sink, 1.0, 0);
    }
    let band2 = if grid.dim() == 1 { BAND2_1D } else { BAND2_2D };
    let band = math::sqrt(band2 as f64) as isize;
    let mut pred = vec![None; ns + nw + 1];
    for (u, &i) in sources.iter().enumerate() {
        let (ix, iy) = grid.coords(i);
        let ylo = if grid.dim() == 2 { -band } else { 0 };
        let yhi = if grid.dim() == 2 { band } else { 0 };
        for dy in ylo..=yhi {
            for dx in -band..=band {
                if (dx * dx + dy * dy) as u64 > band2 {
                    continue;
                }
                let (jx, jy) = (ix as isize + dx, iy as isize + dy);
                if jx < 0 || jy < 0 || jx >= grid.nx() as isize || jy >= grid.ny() as isize {
                    continue;
                }
                let j = grid.index(jx as usize, jy as usize);
                if in_window[j] {
                    let a = net.add_arc(u, ns + slot[j], f64::INFINITY, cost_of(i, j));
                    if j == i {
                        pred[u] = Some(a);
                    }
                }
            }
        }
    }
    // Every cell keeps its own mass; over-full cells park the excess on their
    // artificial arc.
    let mut upper = Vec::new();
    for (v, &j) in window.iter().enumerate() {
        if values[j] < 1.0 {
            pred[ns + v] = Some(first_sink_arc + v);
        } else {
            upper.push(first_sink_arc + v);
        }
    }
    net.start_from(&pred, &upper);

    // Price the remaining window pairs until none has negative reduced cost.
    // A target whose sink arc is not at its lower bound has `π_v ≤ π_sink`, so
    // pair `(u, v)` can only price out when `c(i, j) < π_sink − π_u`; those
    // pairs lie in a lattice ball around `i`. The remaining targets are few
    // and are priced against every source.
    loop {
        net.solve()?;
        let pi_sink = net.potential(sink);
        let loose: Vec<usize> = (0..nw).filter(|&v| net.potential(ns + v) > pi_sink).collect();
        let mut added = false;
        for (u, &i) in sources.iter().enumerate() {
            let f = pi_sink - net.potential(u);
            let mut candidates = Vec::new();
            if f > 0 {
                for_each_within(grid, i, (f / COST_SCALE) as u64, |j| {
                    if in_window[j] && net.potential(ns + slot[j]) <= pi_sink {
                        candidates.push(slot[j]);
                    }
                });
            }
            candidates.extend_from_slice(&loose);
            for v in candidates {
                let c = cost_of(i, window[v]);
                if net.reduced_cost(u, ns + v, c) < 0 {
                    net.add_arc(u, ns + v, f64::INFINITY, c);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    if !net.is_feasible() {
        if whole {
            net.require_feasible()?;
        }
        return Ok(WindowOutcome::Grow {
            cells: Vec::new(),
            pivots: net.pivots,
        });
    }

    // Certificate against cells outside the window.
    let mut violators = Vec::new();
    if !whole {
        let pi_sink = net.potential(sink);
        let mut flagged = vec![false; grid.len()];
        for (u, &i) in sources.iter().enumerate() {
            let f = pi_sink - net.potential(u);
            if f <= 0 {
                continue;
            }
            for_each_within(grid, i, (f / COST_SCALE) as u64, |k| {
                if !in_window[k] && !flagged[k] && f > cost_of(i, k) {
                    flagged[k] = true;
                    violators.push(k);
                }
            });
        }
    }
    if !violators.is_empty() {
        return Ok(WindowOutcome::Grow {
            cells: violators,
            pivots: net.pivots,
        });
    }

    let mut density = values.to_vec();
    for (v, &j) in window.iter().enumerate() {
        density[j] = net.flow(first_sink_arc + v).min(1.0);
    }
    let h2 = grid.spacing(0) * grid.spacing(0);
    let cv = grid.cell_volume();
    let mut cost = 0.0;
    for k in first_sink_arc + nw..first_sink_arc + net.arc_count() {
        let f = net.flow(k);
        if f > 0.0 {
            let (u, v) = net.endpoints(k);
            cost += f * cv * h2 * grid.lattice_distance2(sources[u], window[v - ns]) as f64;
        }
    }
    Ok(WindowOutcome::Optimal {
        density,
        cost,
        pivots: net.pivots,
    })
}

/// Calls `visit` for every cell at squared lattice distance at most `r2` from `i`.
fn for_each_within(grid: &Grid, i: usize, r2: u64, mut visit: impl FnMut(usize)) {
    let r = math::sqrt(r2 as f64) as isize + 1;
    let (ix, iy) = grid.coords(i);
    let (ix, iy) = (ix as isize, iy as isize);
    let ry = if grid.dim() == 2 { r } else { 0 };
    for y in (iy - ry).max(0)..=(iy + ry).min(grid.ny() as isize - 1) {
        let dy = y - iy;
        for x in (ix - r).max(0)..=(ix + r).min(grid.nx() as isize - 1) {
            let dx = x - ix;
            if (dx * dx + dy * dy) as u64 <= r2 {
                visit(grid.index(x as usize, y as usize));
            }
        }
    }
}

/// Adds cells that are nearly full and touch the window, repeatedly: mass
/// pushed out of an over-full cell travels through such cells.
fn flood(grid: &Grid, values: &[f64], in_window: &mut [bool]) {
    let mut stack: Vec<usize> = (0..grid.len()).filter(|&i| in_window[i]).collect();
    while let Some(c) = stack.pop() {
        for n in neighbours(grid, c).into_iter().flatten() {
            if !in_window[n] && values[n] >= 1.0 - 1e-3 {
                in_window[n] = true;
                stack.push(n);
            }
        }
    }
}

fn neighbours(grid: &Grid, c: usize) -> [Option<usize>; 4] {
    let (ix, iy) = grid.coords(c);
    let mut out = [None; 4];
    if ix > 0 {
        out[0] = Some(grid.index(ix - 1, iy));
    }
    if ix + 1 < grid.nx() {
        out[1] = Some(grid.index(ix + 1, iy));
    }
    if grid.dim() == 2 {
        if iy > 0 {
            out[2] = Some(grid.index(ix, iy - 1));
        }
        if iy + 1 < grid.ny() {
            out[3] = Some(grid.index(ix, iy + 1));
        }
    }
    out
}

/// Chebyshev dilation by `radius` cells.
fn dilate(grid: &Grid, mask: &mut [bool], radius: usize) {
    for axis in 0..grid.dim() {
        let n = grid.cells(axis);
        let lines = grid.len() / n;
        let mut line = vec![false; n];
        for l in 0..lines {
            let at = |k: usize| {
                if axis == 0 {
                    grid.index(k, l)
                } else {
                    grid.index(l, k)
                }
            };
            // Distance to the nearest marked cell, swept both ways.
            let mut last: Option<usize> = None;
            for k in 0..n {
                if mask[at(k)] {
                    last = Some(k);
                }
                line[k] = last.is_some_and(|p| k - p <= radius);
            }
            last = None;
            for k in (0..n).rev() {
                if mask[at(k)] {
                    last = Some(k);
                }
                if last.is_some_and(|p| p - k <= radius) {
                    line[k] = true;
                }
            }
            for k in 0..n {
                mask[at(k)] = line[k];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_input_is_untouched() {
        let g = Grid::line(2.0, 32).unwrap();
        let rho = DensityField::uniform(g);
        let r = wasserstein_project_with_report(&rho).unwrap();
        assert_eq!(r.density, rho);
        assert_eq!(r.window, 0);
    }

    #[test]
    fn one_sided_spill_fills_unit_interval() {
        // 2 on [0, 0.5] → 1 on [0, 1].
        let g = Grid::line(2.0, 64).unwrap();
        let v: Vec<f64> = (0..64).map(|i| if i < 16 { 2.0 } else { 0.0 }).collect();
        let rho = DensityField::from_values(g, v).unwrap();
        let p = wasserstein_project(&rho).unwrap();
        for (i, &x) in p.values().iter().enumerate() {
            let expected = if i < 32 { 1.0 } else { 0.0 };
            assert!((x - expected).abs() < 1e-12, "cell {i}: {x}");
        }
    }

    #[test]
    fn dilation_is_chebyshev() {
        let g = Grid::rect([2.0, 2.0], [7, 7]).unwrap();
        let mut m = vec![false; 49];
        m[g.index(3, 3)] = true;
        dilate(&g, &mut m, 1);
        assert_eq!(m.iter().filter(|x| **x).count(), 9);
        assert!(m[g.index(2, 2)] && m[g.index(4, 4)] && !m[g.index(5, 3)]);
    }

    #[test]
    fn overfull_mass_is_rejected() {
        let g = Grid::line(2.0, 8).unwrap();
        let rho = DensityField::from_values(g, vec![1.5; 8]).unwrap();
        assert!(matches!(wasserstein_project(&rho), Err(Error::Infeasible(_))));
    }
}
