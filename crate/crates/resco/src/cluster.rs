//! Seeded K-Means over feature points, with elbow-based choice of K.
//!
//! Determinism contract: identical (points, k, seed) give a bit-identical
//! result, and permuting the input points permutes the assignment without
//! changing cluster ids. Both hold because every order-sensitive step
//! (seeding, weighted selection, accumulation) walks the points in a
//! canonical order sorted by value, and randomness comes from one seeded
//! stream.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::ReScoPoint;

/// Upper bound on the K sweep regardless of document length.
pub const DEFAULT_K_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmeansParams {
    pub max_iters: usize,
    pub tol: f64,
    pub restarts: usize,
}

impl Default for KmeansParams {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-6,
            restarts: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub k: usize,
    /// Cluster id per input point, in input order.
    pub assignment: Vec<usize>,
    /// Mean of each cluster's members.
    pub centroids: Vec<[f64; 3]>,
    /// Total within-cluster sum of squared euclidean distances.
    pub inertia: f64,
    /// The seed this run actually used (restart-derived under best-of).
    pub seed: u64,
    pub iterations: usize,
    /// Inertia after each update step; non-increasing.
    pub trace: Vec<f64>,
}

/// Chosen K plus the swept (k, inertia) curve for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ElbowChoice {
    pub k: usize,
    pub curve: Vec<(usize, f64)>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for one (k, restart) cell, decorrelated from the base seed.
pub fn derive_seed(base: u64, k: usize, restart: usize) -> u64 {
    let mut s = splitmix64(base);
    s = splitmix64(s ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(s ^ (restart as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn cmp_point(a: &[f64; 3], b: &[f64; 3]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

pub fn distinct_count(points: &[ReScoPoint]) -> usize {
    let mut vals: Vec<[f64; 3]> = points.iter().map(|p| p.as_array()).collect();
    vals.sort_by(cmp_point);
    vals.dedup_by(|a, b| a == b);
    vals.len()
}

/// One Lloyd run from a k-means++ start drawn from `seed`.
pub fn kmeans(
    points: &[ReScoPoint],
    k: usize,
    seed: u64,
    params: &KmeansParams,
) -> Result<ClusteringResult> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let pts: Vec<[f64; 3]> = points.iter().map(|p| p.as_array()).collect();
    let distinct = distinct_count(points);
    if k == 0 || k > distinct {
        return Err(Error::KExceedsDistinct { k, distinct });
    }
    let n = pts.len();

    // Canonical processing order: by value, then by input index among
    // duplicates. All sums below walk this order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_point(&pts[a], &pts[b]).then(a.cmp(&b)));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centers(&pts, &order, k, &mut rng);

    let mut assign = vec![0usize; n];
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        for i in 0..n {
            assign[i] = nearest(pts[i], &centroids);
        }
        let new_centroids = update_with_repair(&pts, &order, &mut assign, k);
        trace.push(total_inertia(&pts, &order, &assign, &new_centroids));
        let movement = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(a, b)| dist2(*a, *b).sqrt())
            .fold(0.0, f64::max);
        centroids = new_centroids;
        if movement < params.tol || iterations >= params.max_iters {
            break;
        }
    }

    Ok(ClusteringResult {
        k,
        assignment: assign,
        centroids,
        inertia: *trace.last().unwrap(),
        seed,
        iterations,
        trace,
    })
}

/// Best of `params.restarts` seeded runs; ties keep the earliest restart.
pub fn kmeans_best_of(
    points: &[ReScoPoint],
    k: usize,
    base_seed: u64,
    params: &KmeansParams,
) -> Result<ClusteringResult> {
    let mut best: Option<ClusteringResult> = None;
    for restart in 0..params.restarts.max(1) {
        let run = kmeans(points, k, derive_seed(base_seed, k, restart), params)?;
        if best.as_ref().map_or(true, |b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

/// Sweeps K over [k_min, k_max] (clamped to the distinct-point count) and
/// returns the knee of the inertia curve. Fewer than 3 distinct points make
/// the sweep meaningless; the result is then k_min clamped to the distinct
/// count and the curve is empty.
pub fn choose_k_elbow(
    points: &[ReScoPoint],
    k_min: usize,
    k_max: usize,
    base_seed: u64,
    params: &KmeansParams,
) -> Result<ElbowChoice> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let distinct = distinct_count(points);
    if distinct < 3 {
        return Ok(ElbowChoice {
            k: k_min.min(distinct),
            curve: Vec::new(),
        });
    }
    let lo = k_min.max(1);
    let hi = k_max.min(distinct);
    if hi < lo {
        return Ok(ElbowChoice {
            k: hi.max(1),
            curve: Vec::new(),
        });
    }
    let mut curve = Vec::with_capacity(hi - lo + 1);
    for k in lo..=hi {
        let run = kmeans_best_of(points, k, base_seed, params)?;
        curve.push((k, run.inertia));
    }
    let k = curve[knee_index(&curve)].0;
    Ok(ElbowChoice { k, curve })
}

/// Index of the curve point with the largest perpendicular distance to the
/// chord joining the endpoints; ties go to the smallest k. An affine curve
/// has distance 0 everywhere, so the first point wins.
pub fn knee_index(curve: &[(usize, f64)]) -> usize {
    if curve.len() <= 2 {
        return 0;
    }
    let (x1, y1) = (curve[0].0 as f64, curve[0].1);
    let (x2, y2) = (curve[curve.len() - 1].0 as f64, curve[curve.len() - 1].1);
    let mut best = 0;
    let mut best_d = f64::NEG_INFINITY;
    for (i, &(k, y)) in curve.iter().enumerate() {
        let x = k as f64;
        // |cross| / |chord|; the chord length is constant so the numerator
        // alone orders the candidates.
        let d = ((y2 - y1) * x - (x2 - x1) * y + x2 * y1 - y2 * x1).abs();
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

pub fn curve_csv(curve: &[(usize, f64)]) -> String {
    let mut out = String::from("k,inertia\n");
    for (k, inertia) in curve {
        out.push_str(&format!("{k},{inertia}\n"));
    }
    out
}

fn seed_centers(
    pts: &[[f64; 3]],
    order: &[usize],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; 3]> {
    let n = pts.len();
    let mut centers = Vec::with_capacity(k);
    centers.push(pts[order[rng.gen_range(0..n)]]);
    while centers.len() < k {
        let weights: Vec<f64> = order
            .iter()
            .map(|&i| {
                centers
                    .iter()
                    .map(|c| dist2(pts[i], *c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        // k never exceeds the distinct count, so some point is off-center.
        debug_assert!(total > 0.0);
        let target = rng.gen_range(0.0..total);
        let mut cum = 0.0;
        let mut chosen = None;
        let mut last_positive = 0;
        for (pos, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                last_positive = pos;
                cum += w;
                if cum > target {
                    chosen = Some(pos);
                    break;
                }
            }
        }
        let pos = chosen.unwrap_or(last_positive);
        centers.push(pts[order[pos]]);
    }
    centers
}

fn nearest(p: [f64; 3], centroids: &[[f64; 3]]) -> usize {
    let mut best = 0;
    let mut best_d = dist2(p, centroids[0]);
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        let d = dist2(p, *centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Means per cluster; while any cluster is empty, the point farthest from
/// its own centroid (taken from clusters that can spare one) moves there.
/// Removing a farthest point and re-meaning both sides never raises the
/// total, so the recorded trace stays monotone.
fn update_with_repair(
    pts: &[[f64; 3]],
    order: &[usize],
    assign: &mut [usize],
    k: usize,
) -> Vec<[f64; 3]> {
    loop {
        let mut sums = vec![[0.0f64; 3]; k];
        let mut counts = vec![0usize; k];
        for &i in order {
            let c = assign[i];
            for d in 0..3 {
                sums[c][d] += pts[i][d];
            }
            counts[c] += 1;
        }
        let centroids: Vec<[f64; 3]> = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| {
                if c == 0 {
                    [0.0; 3]
                } else {
                    [s[0] / c as f64, s[1] / c as f64, s[2] / c as f64]
                }
            })
            .collect();
        let empty = match counts.iter().position(|&c| c == 0) {
            Some(e) => e,
            None => return centroids,
        };
        let mut farthest = None;
        let mut far_d = f64::NEG_INFINITY;
        for &i in order {
            if counts[assign[i]] < 2 {
                continue;
            }
            let d = dist2(pts[i], centroids[assign[i]]);
            if d > far_d {
                far_d = d;
                farthest = Some(i);
            }
        }
        let far = farthest.expect("some cluster has two members when another is empty");
        assign[far] = empty;
    }
}

fn total_inertia(
    pts: &[[f64; 3]],
    order: &[usize],
    assign: &[usize],
    centroids: &[[f64; 3]],
) -> f64 {
    let mut total = 0.0;
    for &i in order {
        total += dist2(pts[i], centroids[assign[i]]);
    }
    total
}
