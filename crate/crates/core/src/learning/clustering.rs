use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Demonstration;
use crate::error::{Error, Result};
use crate::game::GameModel;

pub const KMEANS_RESTARTS: u64 = 20;
const MAX_ITERS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
}

/// Per-state-class human action histograms, each normalized to
/// frequencies, concatenated and scaled to unit L2 norm.
pub fn demo_features(model: &GameModel, demo: &Demonstration) -> Result<Vec<f64>> {
    let nh = model.n_human();
    let mut f = vec![0.0; model.n_state_classes() * nh];
    for (x, _, a_h) in demo.indexed(model)? {
        f[model.state_class(x) * nh + a_h] += 1.0;
    }
    for row in f.chunks_mut(nh) {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        }
    }
    let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        f.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(f)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centroids.iter().enumerate() {
        let d = dist2(p, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    while centroids.len() < k {
        let d: Vec<f64> = points.iter().map(|p| nearest(p, &centroids).1).collect();
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            d.iter()
                .position(|w| {
                    acc += w;
                    u < acc
                })
                .unwrap_or(points.len() - 1)
        } else {
            rng.gen_range(0..points.len())
        };
        centroids.push(points[pick].clone());
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> Clustering {
    let dim = points[0].len();
    let mut assignments = vec![usize::MAX; points.len()];
    for _ in 0..MAX_ITERS {
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        if next == assignments {
            break;
        }
        assignments = next;
        for (c, m) in centroids.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> =
                points.iter().zip(&assignments).filter(|(_, a)| **a == c).map(|(p, _)| p).collect();
            // an emptied cluster keeps its previous centre
            if !members.is_empty() {
                *m = (0..dim).map(|i| members.iter().map(|p| p[i]).sum::<f64>() / members.len() as f64).collect();
            }
        }
    }
    let inertia = points.iter().zip(&assignments).map(|(p, a)| dist2(p, &centroids[*a])).sum();
    Clustering { assignments, centroids, inertia }
}

/// k-means++ with [`KMEANS_RESTARTS`] seeded restarts; the restart with the
/// lowest inertia wins (earliest on ties).
pub fn cluster_types(model: &GameModel, demos: &[Demonstration], k: usize, seed: u64) -> Result<Clustering> {
    if k == 0 {
        return Err(Error::params("k", "need at least one cluster"));
    }
    if demos.len() < k {
        return Err(Error::TooFewDemos { needed: k, got: demos.len() });
    }
    let points: Vec<Vec<f64>> = demos.iter().map(|d| demo_features(model, d)).collect::<Result<_>>()?;
    let runs: Vec<Clustering> = (0..KMEANS_RESTARTS)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            lloyd(&points, plus_plus_init(&points, k, &mut rng))
        })
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.inertia < runs[best].inertia - 1e-12 {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).expect("at least one restart"))
}

/// Fraction of items whose cluster maps to their true label under the best
/// one-to-one relabelling.
pub fn assignment_accuracy(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    if pred.is_empty() {
        return 1.0;
    }
    let labels = truth.iter().copied().max().map_or(0, |m| m + 1).max(k);
    let mut table = vec![vec![0usize; labels]; k];
    for (p, t) in pred.iter().zip(truth) {
        table[*p][*t] += 1;
    }
    fn search(c: usize, table: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
        if c == table.len() {
            return 0;
        }
        let mut best = 0;
        for l in 0..used.len() {
            if !used[l] {
                used[l] = true;
                best = best.max(table[c][l] + search(c + 1, table, used));
                used[l] = false;
            }
        }
        best
    }
    search(0, &table, &mut vec![false; labels]) as f64 / pred.len() as f64
}
