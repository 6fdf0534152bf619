//! Exact Wasserstein-1 between weighted point clouds.
//!
//! Weights are rescaled to integers on the common denominator grid and the
//! transportation problem is solved by successive shortest paths with
//! Dijkstra on reduced costs (dense, early exit at the first deficit sink).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use num_integer::Integer;
use serde::Serialize;

use super::cloud::WeightedPointCloud;
use crate::error::{Error, Result};

/// Largest common weight denominator accepted by the solver.
pub const MAX_SCALE: u64 = 1 << 53;

/// One entry of a transport plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flow {
    pub source: usize,
    pub sink: usize,
    pub mass: f64,
    /// Ground cost `‖x_source − y_sink‖₂`.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransportPlan {
    pub flows: Vec<Flow>,
    pub total_cost: f64,
}

impl TransportPlan {
    /// Row sums indexed by source.
    pub fn source_marginals(&self, sources: usize) -> Vec<f64> {
        let mut out = vec![0.0; sources];
        for f in &self.flows {
            out[f.source] += f.mass;
        }
        out
    }

    /// Column sums indexed by sink.
    pub fn sink_marginals(&self, sinks: usize) -> Vec<f64> {
        let mut out = vec![0.0; sinks];
        for f in &self.flows {
            out[f.sink] += f.mass;
        }
        out
    }

    /// Writes `source_idx,sink_idx,mass,cost` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["source_idx", "sink_idx", "mass", "cost"])
            .map_err(io)?;
        for f in &self.flows {
            w.write_record([
                f.source.to_string(),
                f.sink.to_string(),
                format!("{:.16e}", f.mass),
                format!("{:.16e}", f.cost),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Exact `W₁(X, Y)` under the Euclidean ground cost, with an optimal plan
/// expressed in the original point indices.
pub fn wasserstein1(
    x: &WeightedPointCloud,
    y: &WeightedPointCloud,
) -> Result<(f64, TransportPlan)> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }

    let mut scale: u64 = 1;
    for w in x.weights().iter().chain(y.weights()) {
        scale = scale.lcm(w.denom());
        if scale > MAX_SCALE {
            return Err(Error::InvalidArgument(format!(
                "common weight denominator exceeds {MAX_SCALE}; clouds are too large for exact scaling"
            )));
        }
    }
    let scaled = |c: &WeightedPointCloud| -> Vec<i64> {
        c.weights()
            .iter()
            .map(|w| (*w.numer() * (scale / *w.denom())) as i64)
            .collect()
    };
    let (units_x, units_y) = (scaled(x), scaled(y));

    let groups_x = x.coincident_groups();
    let groups_y = y.coincident_groups();
    let supply: Vec<i64> = groups_x
        .iter()
        .map(|g| g.iter().map(|&i| units_x[i]).sum())
        .collect();
    let demand: Vec<i64> = groups_y
        .iter()
        .map(|g| g.iter().map(|&j| units_y[j]).sum())
        .collect();
    let (n, m) = (groups_x.len(), groups_y.len());
    let mut cost = vec![0.0; n * m];
    for (g, gx) in groups_x.iter().enumerate() {
        for (h, gy) in groups_y.iter().enumerate() {
            cost[g * m + h] = euclidean(&x.points()[gx[0]], &y.points()[gy[0]]);
        }
    }

    let flow = solve_transportation(&supply, &demand, &cost);

    let mut total_units = 0.0;
    for (f, c) in flow.iter().zip(&cost) {
        if *f > 0 {
            total_units += *f as f64 * c;
        }
    }
    let value = total_units / scale as f64;

    // Split group-to-group flows back onto member points: first over source
    // members, then over sink members, each by a north-west-corner sweep so
    // the integer marginals stay exact.
    let mut into_sink_group: Vec<Vec<(usize, i64)>> = vec![Vec::new(); m];
    for (g, members) in groups_x.iter().enumerate() {
        let outgoing: Vec<(usize, i64)> = (0..m)
            .filter(|&h| flow[g * m + h] > 0)
            .map(|h| (h, flow[g * m + h]))
            .collect();
        let member_units: Vec<(usize, i64)> = members.iter().map(|&i| (i, units_x[i])).collect();
        for (i, h, amount) in northwest_corner(&member_units, &outgoing) {
            into_sink_group[h].push((i, amount));
        }
    }
    let mut flows = Vec::new();
    for (h, members) in groups_y.iter().enumerate() {
        let member_units: Vec<(usize, i64)> = members.iter().map(|&j| (j, units_y[j])).collect();
        for (i, j, amount) in northwest_corner(&into_sink_group[h], &member_units) {
            flows.push(Flow {
                source: i,
                sink: j,
                mass: amount as f64 / scale as f64,
                cost: euclidean(&x.points()[i], &y.points()[j]),
            });
        }
    }
    flows.sort_by(|a, b| (a.source, a.sink).cmp(&(b.source, b.sink)));

    Ok((
        value,
        TransportPlan {
            flows,
            total_cost: value,
        },
    ))
}

/// Couples two lists of `(label, amount)` with equal totals greedily in order.
fn northwest_corner(rows: &[(usize, i64)], cols: &[(usize, i64)]) -> Vec<(usize, usize, i64)> {
    let mut out = Vec::new();
    let (mut r, mut c) = (0, 0);
    let mut left_r = rows.first().map_or(0, |x| x.1);
    let mut left_c = cols.first().map_or(0, |x| x.1);
    while r < rows.len() && c < cols.len() {
        let amount = left_r.min(left_c);
        if amount > 0 {
            out.push((rows[r].0, cols[c].0, amount));
        }
        left_r -= amount;
        left_c -= amount;
        if left_r == 0 {
            r += 1;
            left_r = rows.get(r).map_or(0, |x| x.1);
        }
        if left_c == 0 {
            c += 1;
            left_c = cols.get(c).map_or(0, |x| x.1);
        }
    }
    out
}

/// Min-heap entry ordered by distance, then node index.
#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-cost transportation with integer supplies/demands (equal totals) and
/// a dense `n × m` cost matrix. Returns the row-major flow matrix.
pub(crate) fn solve_transportation(supply: &[i64], demand: &[i64], cost: &[f64]) -> Vec<i64> {
    let (n, m) = (supply.len(), demand.len());
    debug_assert_eq!(supply.iter().sum::<i64>(), demand.iter().sum::<i64>());
    let v = n + m;
    let mut flow = vec![0i64; n * m];
    let mut left_s = supply.to_vec();
    let mut left_t = demand.to_vec();
    // Node k < n is source k; node n + j is sink j.
    let mut pot = vec![0.0f64; v];
    let mut dist = vec![f64::INFINITY; v];
    let mut done = vec![false; v];
    let mut prev = vec![usize::MAX; v];
    let mut heap = BinaryHeap::with_capacity(v);

    // Warm start: each sink's potential is its column minimum and tight
    // edges are filled greedily. Reduced costs stay nonnegative.
    for j in 0..m {
        let best = (0..n)
            .map(|i| cost[i * m + j])
            .fold(f64::INFINITY, f64::min);
        pot[n + j] = best;
        for i in 0..n {
            if left_t[j] == 0 {
                break;
            }
            if cost[i * m + j] == best && left_s[i] > 0 {
                let a = left_s[i].min(left_t[j]);
                flow[i * m + j] += a;
                left_s[i] -= a;
                left_t[j] -= a;
            }
        }
    }

    while left_s.iter().any(|&s| s > 0) {
        dist.fill(f64::INFINITY);
        done.fill(false);
        prev.fill(usize::MAX);
        heap.clear();
        for i in 0..n {
            if left_s[i] > 0 {
                dist[i] = 0.0;
                heap.push(Entry(0.0, i));
            }
        }
        let target = loop {
            let Entry(best, u) = heap.pop().expect("transportation network disconnected");
            if done[u] || best > dist[u] {
                continue;
            }
            done[u] = true;
            if u < n {
                let row = &cost[u * m..(u + 1) * m];
                for j in 0..m {
                    let t = n + j;
                    if done[t] {
                        continue;
                    }
                    let reduced = (row[j] + pot[u] - pot[t]).max(0.0);
                    let nd = best + reduced;
                    if nd < dist[t] {
                        dist[t] = nd;
                        prev[t] = u;
                        heap.push(Entry(nd, t));
                    }
                }
            } else {
                let j = u - n;
                if left_t[j] > 0 {
                    break j;
                }
                for i in 0..n {
                    if done[i] || flow[i * m + j] == 0 {
                        continue;
                    }
                    let reduced = (-cost[i * m + j] + pot[u] - pot[i]).max(0.0);
                    let nd = best + reduced;
                    if nd < dist[i] {
                        dist[i] = nd;
                        prev[i] = u;
                        heap.push(Entry(nd, i));
                    }
                }
            }
        };
        let reach = dist[n + target];
        for k in 0..v {
            pot[k] += dist[k].min(reach);
        }

        // Walk back to the originating source, collecting the bottleneck.
        let mut bottleneck = left_t[target];
        let mut node = n + target;
        loop {
            let p = prev[node];
            if p == usize::MAX {
                bottleneck = bottleneck.min(left_s[node]);
                break;
            }
            if node < n {
                // sink p -> source node runs along a backward edge
                bottleneck = bottleneck.min(flow[node * m + (p - n)]);
            }
            node = p;
        }
        let start = node;
        left_s[start] -= bottleneck;
        left_t[target] -= bottleneck;
        let mut node = n + target;
        while prev[node] != usize::MAX {
            let p = prev[node];
            if node >= n {
                flow[p * m + (node - n)] += bottleneck;
            } else {
                flow[node * m + (p - n)] -= bottleneck;
            }
            node = p;
        }
    }
    flow
}
