//! Transportation simplex (u-v method) over a generic ordered field.
//!
//! The basis is a spanning tree of the bipartite supply/demand graph with
//! `m + n - 1` cells, started from the northwest corner rule. Pricing is
//! Dantzig's most negative reduced cost; after a run of degenerate pivots the
//! solver switches to Bland's rule, which cannot cycle.

use std::collections::VecDeque;

use num_traits::{Num, Signed};

use crate::error::{Error, Result};

pub(crate) trait Field: Num + Signed + Clone + PartialOrd {}

impl<T: Num + Signed + Clone + PartialOrd> Field for T {}

const DEGENERATE_RUN: usize = 64;

/// Optimal basic flows `(i, j, x_ij)` for supplies `a` and demands `b` with
/// equal totals. `eps` is the reduced-cost optimality tolerance.
pub(crate) fn solve<T: Field>(
    cost: &[Vec<T>],
    a: &[T],
    b: &[T],
    eps: &T,
) -> Result<Vec<(usize, usize, T)>> {
    let m = a.len();
    let n = b.len();
    debug_assert!(m > 0 && n > 0);

    // northwest corner start
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut flow: Vec<T> = Vec::with_capacity(m + n - 1);
    let (mut ra, mut rb) = (a[0].clone(), b[0].clone());
    let (mut i, mut j) = (0, 0);
    loop {
        let x = if ra < rb { ra.clone() } else { rb.clone() };
        ra = ra - x.clone();
        rb = rb - x.clone();
        cells.push((i, j));
        flow.push(x);
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && ra <= rb) {
            i += 1;
            ra = ra + a[i].clone();
        } else {
            j += 1;
            rb = rb + b[j].clone();
        }
    }

    let mut is_basic = vec![vec![false; n]; m];
    for &(i, j) in &cells {
        is_basic[i][j] = true;
    }

    let nodes = m + n;
    let max_iter = 50 * nodes * nodes + 1000;
    let mut degenerate = 0usize;
    let mut bland = false;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    let mut pot: Vec<T> = vec![T::zero(); nodes];
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); nodes];
    let mut depth: Vec<usize> = vec![0; nodes];

    for _ in 0..max_iter {
        for l in adj.iter_mut() {
            l.clear();
        }
        for (k, &(i, j)) in cells.iter().enumerate() {
            adj[i].push((m + j, k));
            adj[m + j].push((i, k));
        }
        // potentials: u_i + v_j = c_ij on basic cells
        let mut seen = vec![false; nodes];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        pot[0] = T::zero();
        parent[0] = (usize::MAX, usize::MAX);
        depth[0] = 0;
        while let Some(v) = queue.pop_front() {
            for &(w, k) in &adj[v] {
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                let (ci, cj) = cells[k];
                pot[w] = cost[ci][cj].clone() - pot[v].clone();
                parent[w] = (v, k);
                depth[w] = depth[v] + 1;
                queue.push_back(w);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Convergence("transport basis is not a spanning tree".into()));
        }

        let neg_eps = -eps.clone();
        let mut entering: Option<(usize, usize)> = None;
        let mut best = T::zero();
        'price: for i in 0..m {
            for j in 0..n {
                if is_basic[i][j] {
                    continue;
                }
                let r = cost[i][j].clone() - pot[i].clone() - pot[m + j].clone();
                if r < neg_eps {
                    if bland {
                        entering = Some((i, j));
                        break 'price;
                    }
                    if entering.is_none() || r < best {
                        best = r;
                        entering = Some((i, j));
                    }
                }
            }
        }
        let Some((ei, ej)) = entering else {
            return Ok(cells
                .into_iter()
                .zip(flow)
                .map(|((i, j), x)| (i, j, x))
                .collect());
        };

        // tree path from column node back to row node closes the cycle
        let (mut x, mut y) = (m + ej, ei);
        let mut from_col: Vec<usize> = Vec::new();
        let mut from_row: Vec<usize> = Vec::new();
        while depth[x] > depth[y] {
            from_col.push(parent[x].1);
            x = parent[x].0;
        }
        while depth[y] > depth[x] {
            from_row.push(parent[y].1);
            y = parent[y].0;
        }
        while x != y {
            from_col.push(parent[x].1);
            x = parent[x].0;
            from_row.push(parent[y].1);
            y = parent[y].0;
        }
        let cycle: Vec<usize> = from_col.into_iter().chain(from_row.into_iter().rev()).collect();

        // cells at even positions along the path lose flow, the others gain
        let mut leave = usize::MAX;
        let mut theta = T::zero();
        for (pos, &k) in cycle.iter().enumerate() {
            if pos % 2 != 0 {
                continue;
            }
            let better = leave == usize::MAX
                || flow[k] < theta
                || (flow[k] == theta && bland && key(cells[k], n) < key(cells[leave], n));
            if better {
                leave = k;
                theta = flow[k].clone();
            }
        }
        for (pos, &k) in cycle.iter().enumerate() {
            if pos % 2 == 0 {
                flow[k] = flow[k].clone() - theta.clone();
            } else {
                flow[k] = flow[k].clone() + theta.clone();
            }
        }
        if theta.is_zero() {
            degenerate += 1;
            if degenerate >= DEGENERATE_RUN {
                bland = true;
            }
        } else {
            degenerate = 0;
        }
        let (li, lj) = cells[leave];
        is_basic[li][lj] = false;
        is_basic[ei][ej] = true;
        cells[leave] = (ei, ej);
        flow[leave] = theta;
    }
    Err(Error::Convergence(format!(
        "transport simplex did not terminate within {max_iter} pivots"
    )))
}

fn key((i, j): (usize, usize), n: usize) -> usize {
    i * n + j
}
