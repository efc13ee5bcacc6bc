//! PC-stable structure learning with Fisher-z partial-correlation tests.

use std::collections::HashMap;

use itertools::Itertools;
use nalgebra::DMatrix;

use super::linalg::{mean, normal_two_sided_p};
use super::EngineError;
use crate::result::Graph;

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Correlation matrix of equally long columns.
pub fn correlation(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let p = cols.len();
    let centered: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let m = mean(c);
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let sd: Vec<f64> = centered.iter().map(|c| dot(c, c).sqrt()).collect();
    DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else if sd[i] == 0.0 || sd[j] == 0.0 {
            0.0
        } else {
            dot(&centered[i], &centered[j]) / (sd[i] * sd[j])
        }
    })
}

/// Partial correlation of `i` and `j` given `s`; `None` when the
/// conditioning block is singular.
pub fn partial_correlation(corr: &DMatrix<f64>, i: usize, j: usize, s: &[usize]) -> Option<f64> {
    let idx: Vec<usize> = [i, j].into_iter().chain(s.iter().copied()).collect();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| corr[(idx[a], idx[b])]);
    let prec = sub.try_inverse()?;
    let denom = (prec[(0, 0)] * prec[(1, 1)]).sqrt();
    if !(denom.is_finite() && denom > 0.0) {
        return None;
    }
    Some((-prec[(0, 1)] / denom).clamp(-1.0 + 1e-12, 1.0 - 1e-12))
}

/// Fisher-z statistic for a partial correlation from `n` rows with `k`
/// conditioning variables.
pub fn fisher_z(r: f64, n: usize, k: usize) -> f64 {
    r.atanh() * ((n as f64) - (k as f64) - 3.0).sqrt()
}

/// Learns a CPDAG over `cols`. Directed edges are single 1s, undirected
/// edges symmetric 1s. Edge strength is the smallest |z| seen while the
/// edge survived its tests.
pub fn learn_graph(cols: &[Vec<f64>], names: &[String], alpha: f64) -> Result<Graph, EngineError> {
    let p = cols.len();
    let n = cols.first().map_or(0, Vec::len);
    if p < 2 || n <= p + 3 {
        return Err(EngineError::InsufficientSamples { rows: n, nodes: p });
    }
    let corr = correlation(cols);
    let mut adj = vec![vec![true; p]; p];
    (0..p).for_each(|i| adj[i][i] = false);
    let mut strength = vec![vec![f64::INFINITY; p]; p];
    let mut sepset: HashMap<(usize, usize), Vec<usize>> = HashMap::new();

    for level in 0..=p.saturating_sub(2) {
        // Neighbourhoods are frozen per level (the "stable" variant).
        let frozen = adj.clone();
        let mut any = false;
        for i in 0..p {
            for j in 0..p {
                if i == j || !adj[i][j] {
                    continue;
                }
                let others: Vec<usize> = (0..p).filter(|&k| k != j && frozen[i][k]).collect();
                if others.len() < level {
                    continue;
                }
                any = true;
                for s in others.iter().copied().combinations(level) {
                    let z = match partial_correlation(&corr, i, j, &s) {
                        Some(r) => fisher_z(r, n, s.len()),
                        None => f64::INFINITY,
                    };
                    let (a, b) = (i.min(j), i.max(j));
                    strength[a][b] = strength[a][b].min(z.abs());
                    strength[b][a] = strength[a][b];
                    if normal_two_sided_p(z) > alpha {
                        adj[i][j] = false;
                        adj[j][i] = false;
                        sepset.insert((a, b), s);
                        break;
                    }
                }
            }
        }
        if !any {
            break;
        }
    }

    let mut g = vec![vec![0u8; p]; p];
    for i in 0..p {
        for j in 0..p {
            g[i][j] = u8::from(adj[i][j]);
        }
    }
    orient_v_structures(&mut g, &sepset);
    apply_meek(&mut g);

    let strength = (0..p).map(|i| (0..p).map(|j| if adj[i][j] { strength[i][j] } else { 0.0 }).collect()).collect();
    Ok(Graph { nodes: names.to_vec(), adjacency: g, strength: Some(strength) })
}

fn adjacent(g: &[Vec<u8>], a: usize, b: usize) -> bool {
    g[a][b] == 1 || g[b][a] == 1
}

fn undirected(g: &[Vec<u8>], a: usize, b: usize) -> bool {
    g[a][b] == 1 && g[b][a] == 1
}

fn directed(g: &[Vec<u8>], a: usize, b: usize) -> bool {
    g[a][b] == 1 && g[b][a] == 0
}

/// Whether a directed path leads from `from` to `to`.
fn reaches(g: &[Vec<u8>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; g.len()];
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        for w in 0..g.len() {
            if !seen[w] && directed(g, v, w) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    false
}

/// Orients `a → b` when the edge is still undirected and the new arrow
/// closes no directed cycle.
fn orient(g: &mut [Vec<u8>], a: usize, b: usize) -> bool {
    if undirected(g, a, b) && !reaches(g, b, a) {
        g[b][a] = 0;
        true
    } else {
        false
    }
}

fn orient_v_structures(g: &mut [Vec<u8>], sepset: &HashMap<(usize, usize), Vec<usize>>) {
    let p = g.len();
    let mut colliders = Vec::new();
    for a in 0..p {
        for c in a + 1..p {
            if adjacent(g, a, c) {
                continue;
            }
            for b in 0..p {
                if b == a || b == c || !adjacent(g, a, b) || !adjacent(g, c, b) {
                    continue;
                }
                let sep = sepset.get(&(a, c)).map_or(&[][..], Vec::as_slice);
                if !sep.contains(&b) {
                    colliders.push((a, b, c));
                }
            }
        }
    }
    for (a, b, c) in colliders {
        orient(g, a, b);
        orient(g, c, b);
    }
}

fn apply_meek(g: &mut [Vec<u8>]) {
    let p = g.len();
    loop {
        let mut changed = false;
        for a in 0..p {
            for b in 0..p {
                if a == b || !undirected(g, a, b) {
                    continue;
                }
                // R1: c → a - b with c, b non-adjacent.
                let r1 = (0..p).any(|c| c != b && directed(g, c, a) && !adjacent(g, c, b));
                // R2: a → c → b with a - b.
                let r2 = (0..p).any(|c| directed(g, a, c) && directed(g, c, b));
                // R3: a - c → b, a - d → b, c and d non-adjacent.
                let r3 = (0..p).tuple_combinations().any(|(c, d)| {
                    c != a
                        && d != a
                        && c != b
                        && d != b
                        && !adjacent(g, c, d)
                        && undirected(g, a, c)
                        && undirected(g, a, d)
                        && directed(g, c, b)
                        && directed(g, d, b)
                });
                if (r1 || r2 || r3) && orient(g, a, b) {
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}
