//! Balanced transportation problems solved as min-cost flow by successive
//! shortest paths (Bellman-Ford on the residual network, exact rationals).

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportOutcome {
    pub cost: Rational,
    /// `flow[i][j]` shipped from supply `i` to demand `j`.
    pub flow: Vec<Vec<Rational>>,
}

struct Arc {
    to: usize,
    cap: Option<Rational>,
    cost: Rational,
    flow: Rational,
}

impl Arc {
    fn residual(&self) -> Option<Rational> {
        self.cap.as_ref().map(|c| c - &self.flow)
    }
}

/// Minimises `sum cost[i][j] * flow[i][j]` over plans with row sums `supply`
/// and column sums `demand`.
pub fn min_cost_transport(
    supply: &[Rational],
    demand: &[Rational],
    cost: &[Vec<Rational>],
) -> Result<TransportOutcome> {
    let p = supply.len();
    let q = demand.len();
    let total: Rational = supply.iter().sum();
    let total_demand: Rational = demand.iter().sum();
    if total != total_demand || supply.iter().chain(demand).any(Signed::is_negative) {
        return Err(Error::InfeasibleMarginals);
    }

    // nodes: 0 source, 1..=p rows, p+1..=p+q columns, p+q+1 sink
    let n = p + q + 2;
    let sink = n - 1;
    let mut arcs: Vec<Arc> = Vec::new();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut add = |arcs: &mut Vec<Arc>, from: usize, to: usize, cap: Option<Rational>, c: Rational| {
        out[from].push(arcs.len());
        arcs.push(Arc {
            to,
            cap: cap.clone(),
            cost: c.clone(),
            flow: Rational::zero(),
        });
        out[to].push(arcs.len());
        // reverse arc: capacity tracks the forward flow
        arcs.push(Arc {
            to: from,
            cap: Some(Rational::zero()),
            cost: -c,
            flow: Rational::zero(),
        });
    };
    for (i, s) in supply.iter().enumerate() {
        add(&mut arcs, 0, 1 + i, Some(s.clone()), Rational::zero());
    }
    let mut grid = vec![vec![0usize; q]; p];
    for i in 0..p {
        for j in 0..q {
            grid[i][j] = arcs.len();
            add(&mut arcs, 1 + i, 1 + p + j, None, cost[i][j].clone());
        }
    }
    for (j, d) in demand.iter().enumerate() {
        add(&mut arcs, 1 + p + j, sink, Some(d.clone()), Rational::zero());
    }

    let mut shipped = Rational::zero();
    while shipped < total {
        // Bellman-Ford from the source on arcs with positive residual
        let mut dist: Vec<Option<Rational>> = vec![None; n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        dist[0] = Some(Rational::zero());
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                let Some(du) = dist[u].clone() else { continue };
                for &k in &out[u] {
                    let arc = &arcs[k];
                    let open = match (arc.residual(), k % 2) {
                        (Some(r), 0) => r.is_positive(),
                        (None, _) => true,
                        (Some(_), _) => arcs[k ^ 1].flow.is_positive(),
                    };
                    if !open {
                        continue;
                    }
                    let nd = &du + &arc.cost;
                    if dist[arc.to].as_ref().is_none_or(|cur| nd < *cur) {
                        dist[arc.to] = Some(nd);
                        via[arc.to] = Some(k);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink].is_none() {
            return Err(Error::InfeasibleMarginals);
        }
        let mut path = Vec::new();
        let mut v = sink;
        while v != 0 {
            let k = via[v].expect("reached vertices have a predecessor");
            path.push(k);
            v = arcs[k ^ 1].to;
        }
        let mut push = &total - &shipped;
        for &k in &path {
            let room = if k % 2 == 0 {
                arcs[k].residual()
            } else {
                Some(arcs[k ^ 1].flow.clone())
            };
            if let Some(r) = room {
                if r < push {
                    push = r;
                }
            }
        }
        for &k in &path {
            if k % 2 == 0 {
                arcs[k].flow += &push;
            } else {
                arcs[k ^ 1].flow -= &push;
            }
        }
        shipped += push;
    }

    let flow: Vec<Vec<Rational>> = grid
        .iter()
        .map(|row| row.iter().map(|&k| arcs[k].flow.clone()).collect())
        .collect();
    let cost_total = flow
        .iter()
        .zip(cost)
        .flat_map(|(fr, cr)| fr.iter().zip(cr).map(|(f, c)| f * c))
        .sum();
    Ok(TransportOutcome {
        cost: cost_total,
        flow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn two_by_two() {
        let supply = vec![int(1), int(2)];
        let demand = vec![int(2), int(1)];
        let cost = vec![vec![int(1), int(3)], vec![int(2), int(1)]];
        let out = min_cost_transport(&supply, &demand, &cost).unwrap();
        // row 0 → col 0 (1), row 1 → col 0 (1) and col 1 (1): 1 + 2 + 1
        assert_eq!(out.cost, int(4));
        assert_eq!(out.flow[1][1], int(1));
    }

    #[test]
    fn negative_costs_and_fractions() {
        let supply = vec![ratio(1, 3), ratio(2, 3)];
        let demand = vec![ratio(1, 2), ratio(1, 2)];
        let cost = vec![vec![int(-1), int(0)], vec![int(0), int(-2)]];
        let out = min_cost_transport(&supply, &demand, &cost).unwrap();
        assert_eq!(out.cost, ratio(-4, 3));
    }

    #[test]
    fn unbalanced_is_rejected() {
        let err = min_cost_transport(&[int(1)], &[int(2)], &[vec![int(0)]]).unwrap_err();
        assert_eq!(err, Error::InfeasibleMarginals);
    }
}
