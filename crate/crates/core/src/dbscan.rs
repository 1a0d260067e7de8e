//! DBSCAN over rows of a [`DataMatrix`].
//!
//! Conventions: neighborhoods are closed Euclidean balls (`dist <= eps`) and
//! include the point itself, so a core point needs `min_pts` total points in
//! its ball. Clusters are numbered in scan order of their first core point,
//! which makes labels deterministic.

use crate::data::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Cluster(usize),
    Noise,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Cluster every row of `points`. Returns one label per row.
pub fn dbscan(points: &DataMatrix, eps: f64, min_pts: usize) -> Vec<Label> {
    let n = points.n_rows();
    let mut labels = vec![Label::Noise; n];
    let mut visited = vec![false; n];
    let mut next_cluster = 0usize;

    let neighbors = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| euclidean(points.row(i), points.row(j)) <= eps)
            .collect()
    };

    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let seeds = neighbors(i);
        if seeds.len() < min_pts {
            continue; // stays noise unless a later cluster reaches it
        }
        let cluster = next_cluster;
        next_cluster += 1;
        labels[i] = Label::Cluster(cluster);
        let mut queue = seeds;
        let mut k = 0;
        while k < queue.len() {
            let j = queue[k];
            k += 1;
            if labels[j] == Label::Noise {
                labels[j] = Label::Cluster(cluster);
            }
            if !visited[j] {
                visited[j] = true;
                let jn = neighbors(j);
                if jn.len() >= min_pts {
                    queue.extend(jn);
                }
            }
        }
    }
    labels
}

/// Median distance to the `k`-th nearest neighbor over at most `cap` rows
/// (the first `cap` in order, to stay deterministic). The default grouping
/// radius is derived from this.
pub fn median_knn_distance(points: &DataMatrix, k: usize, cap: usize) -> f64 {
    let n = points.n_rows().min(cap);
    if n < 2 {
        return 0.0;
    }
    let k = k.min(n - 1);
    let mut kth: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| euclidean(points.row(i), points.row(j)))
                .collect();
            d.sort_by(f64::total_cmp);
            d[k - 1]
        })
        .collect();
    kth.sort_by(f64::total_cmp);
    let mid = kth.len() / 2;
    if kth.len() % 2 == 1 {
        kth[mid]
    } else {
        0.5 * (kth[mid - 1] + kth[mid])
    }
}
