//! Acceptance suite: one test per criterion, each printing a single
//! `criterion NN (<name>): PASS|FAIL — details` line before asserting.
//!
//! Run with `cargo test -p gen2out-cli --test acceptance -- --nocapture`
//! to see every line. Two clauses are known-red and documented as such:
//! the uniform-square depth slope (criterion 1) and the balanced-fixture
//! mean score bound (criterion 5); their tests state the measured values.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use gen2out::axioms::{run_axiom_test, AxiomId, AxiomTestConfig};
use gen2out::data::{
    gen_gaussian_blobs, gen_uniform_line, gen_uniform_square, DataMatrix,
};
use gen2out::dbscan::{self, Label};
use gen2out::depth::{
    fit_depth_model, fixed_cut_expected_depth, DepthFitConfig, DepthModel, EULER_GAMMA,
};
use gen2out::detector::{Detector, DetectorConfig};
use gen2out::eval::{average_precision, loglog_fit, roc_auc, scaling_benchmark};
use gen2out::tree::AtomicTree;
use gen2out::xray::{detect, detect_with_xray, DetectConfig, GeneralizedAnomalyReport};
use gen2out::Seed;

fn verdict(criterion: &str, pass: bool, details: &str) {
    println!(
        "criterion {criterion}: {} — {details}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {details}");
}

// ---------------------------------------------------------------------------
// 1. Depth-growth slopes on 100k-point uniform shapes
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_pdp_slopes() {
    let t0 = Instant::now();
    let line = gen_uniform_line(100_000, Seed::new(101));
    let line_fit = fit_depth_model(&line, &DepthFitConfig::default(), Seed::new(11)).unwrap();
    let line_secs = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let square = gen_uniform_square(100_000, Seed::new(102));
    let square_fit =
        fit_depth_model(&square, &DepthFitConfig::default(), Seed::new(12)).unwrap();
    let square_secs = t0.elapsed().as_secs_f64();

    let line_ok = (line_fit.w1 - 1.38).abs() <= 0.15 && line_secs < 60.0;
    let square_ok = (square_fit.w1 - 1.66).abs() <= 0.15 && square_secs < 60.0;
    verdict(
        "01 (depth-growth slopes)",
        line_ok && square_ok,
        &format!(
            "line w1 = {:.4} vs 1.38±0.15 in {:.2}s [{}]; square w1 = {:.4} vs 1.66±0.15 in {:.2}s [{}] \
             (product-uniform data provably follows the dimension-free 2·ln2 ≈ 1.386 law under \
             uniform (min,max) splits; the square clause cannot reach 1.66)",
            line_fit.w1,
            line_secs,
            if line_ok { "ok" } else { "out" },
            square_fit.w1,
            square_secs,
            if square_ok { "ok" } else { "out" },
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. Fixed-cut recurrence vs Monte-Carlo simulation
// ---------------------------------------------------------------------------

/// Independent oracle: simulate fixed-cut trees directly. Each point goes
/// left with probability `b` at every split; a point's depth is its edge
/// count plus one at isolation, mirroring H(1) = 1.
fn simulate_fixed_cut_mean_depth(n: usize, b: f64, trials: usize, rng: &mut impl Rng) -> f64 {
    fn total_depth(n: usize, b: f64, rng: &mut impl Rng) -> f64 {
        match n {
            0 => 0.0,
            1 => 1.0,
            _ => {
                let left = (0..n).filter(|_| rng.random::<f64>() < b).count();
                n as f64 + total_depth(left, b, rng) + total_depth(n - left, b, rng)
            }
        }
    }
    let mut total = 0.0;
    for _ in 0..trials {
        total += total_depth(n, b, rng) / n as f64;
    }
    total / trials as f64
}

#[test]
fn criterion_02_recurrence_oracle() {
    let h2 = fixed_cut_expected_depth(2, 0.5).unwrap();
    let exact_ok = (h2 - 3.0).abs() < 1e-12;

    let mut sym_worst = 0.0f64;
    for n in 1..=64usize {
        for b in [0.2, 0.3, 0.45] {
            let lhs = fixed_cut_expected_depth(n, b).unwrap();
            let rhs = fixed_cut_expected_depth(n, 1.0 - b).unwrap();
            sym_worst = sym_worst.max((lhs - rhs).abs());
        }
    }
    let sym_ok = sym_worst < 1e-9;

    let mut rng = Seed::new(202).rng();
    let mut mc_worst = 0.0f64;
    for n in [2usize, 4, 8, 16, 32, 64] {
        for b in [0.5, 0.7, 0.8] {
            let simulated = simulate_fixed_cut_mean_depth(n, b, 100_000, &mut rng);
            let analytic = fixed_cut_expected_depth(n, b).unwrap();
            mc_worst = mc_worst.max((simulated - analytic).abs() / analytic);
        }
    }
    let mc_ok = mc_worst < 0.02;

    verdict(
        "02 (fixed-cut recurrence)",
        exact_ok && sym_ok && mc_ok,
        &format!(
            "H(2,0.5) = {h2} (exact); bias symmetry worst |Δ| = {sym_worst:.2e} < 1e-9; \
             Monte-Carlo (1e5 trials) worst relative error {:.3}% < 2%",
            mc_worst * 100.0
        ),
    );
}

// ---------------------------------------------------------------------------
// 3. Axiom battery
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_axiom_battery() {
    let config = AxiomTestConfig::default();
    let mut all_pass = true;
    let mut details = Vec::new();
    for (k, axiom) in AxiomId::ALL.into_iter().enumerate() {
        let r = run_axiom_test(axiom, &config, 30, Seed::new(303).derive(&[k as u64])).unwrap();
        let pass = r.statistic > 0.0 && r.p_value < 0.01;
        all_pass &= pass;
        details.push(format!(
            "{} t={:.2} p={:.1e}{}",
            axiom.name(),
            r.statistic,
            r.p_value,
            if pass { "" } else { " [FAIL]" }
        ));
    }
    verdict("03 (axiom battery, 30 trials)", all_pass, &details.join("; "));
}

// ---------------------------------------------------------------------------
// 4. Group-size ranking on the synthetic group fixture
// ---------------------------------------------------------------------------

fn scaled_square(n: usize, half: f64, seed: Seed) -> DataMatrix {
    let unit = gen_uniform_square(n, seed);
    let values: Vec<f64> = unit.values().iter().map(|v| (v * 2.0 - 1.0) * half).collect();
    DataMatrix::from_vec(n, 2, values).unwrap()
}

fn group_fixture(seed: u64) -> DataMatrix {
    let background = scaled_square(62_000, 5.0, Seed::new(1000 + seed));
    let groups = gen_gaussian_blobs(
        &[vec![25.0, 25.0], vec![-25.0, 25.0]],
        &[0.08, 0.08],
        &[1000, 2000],
        Seed::new(2000 + seed),
    )
    .unwrap();
    let strays: Vec<Vec<f64>> = (0..10)
        .map(|k| {
            let theta = std::f64::consts::TAU * (k as f64 + 0.5) / 10.0;
            vec![45.0 * theta.cos(), 45.0 * theta.sin()]
        })
        .collect();
    let strays = DataMatrix::from_rows(&strays).unwrap();
    DataMatrix::vstack(&[&background, &groups, &strays]).unwrap()
}

/// The reported score of a planted group: among majority-pure reported
/// groups, the one covering most of the planted range.
fn planted_group_score(
    report: &GeneralizedAnomalyReport,
    range: std::ops::Range<usize>,
) -> Option<f64> {
    report
        .groups
        .iter()
        .filter(|g| {
            let overlap = g.members.iter().filter(|m| range.contains(m)).count();
            overlap * 2 > g.members.len()
        })
        .max_by_key(|g| g.members.iter().filter(|m| range.contains(m)).count())
        .map(|g| g.iso_score)
}

#[test]
fn criterion_04_group_size_ranking() {
    let mut config = DetectConfig::default();
    config.detector.num_trees = 300;
    config.detector.depth_fit.trees_per_size = 50;

    let mut wins = 0;
    let mut detections = 0;
    let mut worst_secs = 0.0f64;
    for seed in 0..10u64 {
        let x = group_fixture(seed);
        let t0 = Instant::now();
        let report = detect(&x, &config, Seed::new(seed)).unwrap();
        worst_secs = worst_secs.max(t0.elapsed().as_secs_f64());
        let ga1 = planted_group_score(&report, 62_000..63_000);
        let ga2 = planted_group_score(&report, 63_000..65_000);
        if let (Some(a), Some(b)) = (ga1, ga2) {
            detections += 1;
            if a > b {
                wins += 1;
            }
        }
    }
    let pass = detections == 10 && wins >= 9 && worst_secs < 120.0;
    verdict(
        "04 (group-size ranking)",
        pass,
        &format!(
            "both groups detected in {detections}/10 seeds; 1000-group outranked 2000-group in \
             {wins}/10 (need ≥9); slowest run {worst_secs:.1}s < 120s"
        ),
    );
}

// ---------------------------------------------------------------------------
// 5. No false alarms on a balanced 10-blob dataset
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_no_false_alarms() {
    let mut total_groups = 0usize;
    let mut mean_scores = Vec::new();
    for seed in 0..10u64 {
        let mut rng = Seed::new(7000 + seed).rng();
        let centers: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..64).map(|_| 16.0 * rng.random::<f64>()).collect())
            .collect();
        let x =
            gen_gaussian_blobs(&centers, &[1.0; 10], &[520; 10], Seed::new(8000 + seed)).unwrap();
        let (report, xray, _) =
            detect_with_xray(&x, &DetectConfig::default(), Seed::new(seed)).unwrap();
        total_groups += report.groups.len();
        let n = xray.n_points();
        mean_scores.push((0..n).map(|i| xray.score(i, 0)).sum::<f64>() / n as f64);
    }
    let mean_of_means: f64 = mean_scores.iter().sum::<f64>() / mean_scores.len() as f64;
    let zero_groups = total_groups == 0;
    let mean_ok = mean_of_means < 0.5;
    verdict(
        "05 (no false alarms)",
        zero_groups && mean_ok,
        &format!(
            "reported groups over 10 seeds: {total_groups} (need 0); mean qr=1 score {mean_of_means:.4} \
             (need < 0.5; the pipeline equilibrates at E[h] ≈ H(n) so scores center slightly above \
             2^-1 on every honest balanced fixture — see the scores' construction)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. Point-detection quality vs a classic isolation-forest baseline
// ---------------------------------------------------------------------------

/// Seeded stand-ins with the published shapes and outlier rates of five
/// small benchmark datasets: (name, rows, dims, outlier fraction).
const BENCH_SHAPES: [(&str, usize, usize, f64); 5] = [
    ("wine", 129, 13, 0.078),
    ("lympho", 148, 18, 0.041),
    ("glass", 214, 9, 0.042),
    ("vertebral", 240, 6, 0.125),
    ("wbc", 378, 30, 0.056),
];

fn benchmark_stand_in(n: usize, dim: usize, rate: f64, seed: Seed) -> (DataMatrix, Vec<u8>) {
    let n_out = ((n as f64 * rate).round() as usize).max(1);
    let n_in = n - n_out;
    let centers = vec![vec![0.0; dim], {
        let mut c = vec![0.0; dim];
        c[0] = 4.0;
        c
    }];
    let inliers = gen_gaussian_blobs(
        &centers,
        &[1.0, 1.4],
        &[n_in - n_in / 3, n_in / 3],
        seed.derive(&[1]),
    )
    .unwrap();
    // Outliers are inflated-tail draws around the blob centers, so they
    // overlap the inlier support and the ranking task stays non-trivial.
    let mut rng = seed.derive(&[2]).rng();
    fn normal(rng: &mut impl Rng) -> f64 {
        let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
    let rows: Vec<Vec<f64>> = (0..n_out)
        .map(|k| {
            let center = &centers[k % 2];
            let inflation = 1.4 + 1.2 * rng.random::<f64>();
            (0..dim).map(|j| center[j] + inflation * normal(&mut rng)).collect()
        })
        .collect();
    let outliers = DataMatrix::from_rows(&rows).unwrap();
    let x = DataMatrix::vstack(&[&inliers, &outliers]).unwrap();
    let mut labels = vec![0u8; n_in];
    labels.extend(std::iter::repeat_n(1, n_out));
    (x, labels)
}

/// Classic isolation forest, built from the same tree primitive: 100 trees
/// on 256-point subsamples, depth limit ceil(log2 psi), scores normalized
/// by the closed-form average path length at psi.
fn classic_iforest_scores(x: &DataMatrix, seed: Seed) -> Vec<f64> {
    let n = x.n_rows();
    let psi = n.min(256);
    let depth_limit = (psi as f64).log2().ceil() as usize;
    let trees: Vec<AtomicTree> = (0..100u64)
        .map(|t| {
            let mut rng = seed.derive(&[t]).rng();
            let idx: Vec<u32> = rand::seq::index::sample(&mut rng, n, psi)
                .into_iter()
                .map(|v| v as u32)
                .collect();
            AtomicTree::construct_on(x, idx, depth_limit, &mut rng)
        })
        .collect();
    let c = |m: usize| -> f64 {
        if m <= 1 {
            0.0
        } else {
            let m = m as f64;
            2.0 * ((m - 1.0).ln() + EULER_GAMMA) - 2.0 * (m - 1.0) / m
        }
    };
    let cn = c(psi);
    (0..n)
        .map(|i| {
            let avg: f64 = trees
                .iter()
                .map(|t| {
                    let p = t.path_length(x.row(i));
                    p.h0 as f64 + c(p.leaf_size)
                })
                .sum::<f64>()
                / trees.len() as f64;
            (-avg / cn).exp2()
        })
        .collect()
}

#[test]
fn criterion_06_point_quality() {
    let mut details = Vec::new();
    let mut all_close = true;
    for (k, (name, n, dim, rate)) in BENCH_SHAPES.into_iter().enumerate() {
        let (x, labels) = benchmark_stand_in(n, dim, rate, Seed::new(600).derive(&[k as u64]));
        let det = Detector::fit(&x, &DetectorConfig::default(), Seed::new(60 + k as u64)).unwrap();
        let auc = roc_auc(&det.score(&x).unwrap(), &labels).unwrap();
        let auc_if = roc_auc(
            &classic_iforest_scores(&x, Seed::new(70 + k as u64)),
            &labels,
        )
        .unwrap();
        let close = (auc - auc_if).abs() <= 0.05;
        all_close &= close;
        details.push(format!(
            "{name} AUC {auc:.3} vs iF {auc_if:.3}{}",
            if close { "" } else { " [FAIL]" }
        ));
    }

    // Metric implementations against O(n^2) oracles on 50-point fixtures.
    let mut rng = Seed::new(606).rng();
    let mut metric_worst = 0.0f64;
    for _ in 0..20 {
        let scores: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let labels: Vec<u8> = (0..50).map(|_| u8::from(rng.random::<f64>() < 0.25)).collect();
        if !labels.contains(&1) || !labels.contains(&0) {
            continue;
        }
        let ap = average_precision(&scores, &labels).unwrap();
        let auc = roc_auc(&scores, &labels).unwrap();
        metric_worst = metric_worst
            .max((ap - ap_bruteforce(&scores, &labels)).abs())
            .max((auc - auc_bruteforce(&scores, &labels)).abs());
    }
    let metrics_ok = metric_worst < 1e-12;

    verdict(
        "06 (point quality vs iF baseline)",
        all_close && metrics_ok,
        &format!(
            "{}; metric-vs-oracle worst |Δ| = {metric_worst:.1e} < 1e-12",
            details.join("; ")
        ),
    );
}

fn ap_bruteforce(scores: &[f64], labels: &[u8]) -> f64 {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    let mut total = 0.0;
    let mut n_pos = 0;
    for (k, &i) in order.iter().enumerate() {
        if labels[i] == 1 {
            n_pos += 1;
            let hits = order[..=k].iter().filter(|&&j| labels[j] == 1).count();
            total += hits as f64 / (k + 1) as f64;
        }
    }
    total / n_pos as f64
}

fn auc_bruteforce(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

// ---------------------------------------------------------------------------
// 7. Scalability: log-log slope and desk-scale extrapolation
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_scalability() {
    let config = DetectorConfig::default();
    let sizes: Vec<usize> = (12..=18).map(|e| 1usize << e).collect();
    // Warm up allocator and thread pool before timing.
    {
        let x = gen_uniform_square(4096, Seed::new(700));
        let det = Detector::fit(&x, &config, Seed::new(7)).unwrap();
        std::hint::black_box(det.score(&x).unwrap());
    }
    let result = scaling_benchmark(
        &sizes,
        3,
        |n| gen_uniform_square(n, Seed::new(701)),
        |x| {
            let det = Detector::fit(x, &config, Seed::new(7)).unwrap();
            std::hint::black_box(det.score(x).unwrap().len());
        },
    )
    .unwrap();
    let slope_ok = (0.8..=1.2).contains(&result.fitted_loglog_slope);

    // Doubling n never more than quadruples the time.
    let envelope_ok = result
        .wall_times
        .windows(2)
        .all(|w| w[1] <= 4.0 * w[0].max(1e-4));

    // Full-pipeline extrapolation to one million points from two measured
    // detect() runs.
    let detect_sizes = [1usize << 15, 1 << 16];
    let detect_times: Vec<f64> = detect_sizes
        .iter()
        .map(|&n| {
            let x = gen_uniform_square(n, Seed::new(702));
            let t0 = Instant::now();
            std::hint::black_box(detect(&x, &DetectConfig::default(), Seed::new(7)).unwrap());
            t0.elapsed().as_secs_f64()
        })
        .collect();
    let (slope, intercept) = loglog_fit(&detect_sizes, &detect_times);
    let predicted_1m = (intercept + slope * (1_000_000f64).ln()).exp();
    let extrapolation_ok = (24.0..=600.0).contains(&predicted_1m);

    verdict(
        "07 (scalability)",
        slope_ok && envelope_ok && extrapolation_ok,
        &format!(
            "fit+score log-log slope {:.3} in [0.8, 1.2]; doubling envelope {}; full detect at \
             2^15/2^16 took {:.1}s/{:.1}s → extrapolated {predicted_1m:.0}s for 1M points \
             (consistent with ~120s within 5x: [24, 600])",
            result.fitted_loglog_slope,
            if envelope_ok { "held" } else { "violated" },
            detect_times[0],
            detect_times[1],
        ),
    );
}

// ---------------------------------------------------------------------------
// 8. DBSCAN equivalence against an O(n^2) density-reachability oracle
// ---------------------------------------------------------------------------

/// Independent formulation: cores by pairwise counting, clusters as
/// connected components of the core-adjacency graph ordered by their first
/// core in scan order, borders assigned to the earliest such component.
fn dbscan_oracle(points: &DataMatrix, eps: f64, min_pts: usize) -> Vec<Label> {
    let n = points.n_rows();
    let ball = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| dbscan::euclidean(points.row(i), points.row(j)) <= eps)
            .collect()
    };
    let core: Vec<bool> = (0..n).map(|i| ball(i).len() >= min_pts).collect();

    // Components over core points.
    let mut component = vec![usize::MAX; n];
    let mut n_components = 0;
    for i in 0..n {
        if !core[i] || component[i] != usize::MAX {
            continue;
        }
        let id = n_components;
        n_components += 1;
        let mut queue = vec![i];
        component[i] = id;
        while let Some(p) = queue.pop() {
            for q in ball(p) {
                if core[q] && component[q] == usize::MAX {
                    component[q] = id;
                    queue.push(q);
                }
            }
        }
    }

    (0..n)
        .map(|i| {
            if core[i] {
                Label::Cluster(component[i])
            } else {
                ball(i)
                    .into_iter()
                    .filter(|&q| core[q])
                    .map(|q| component[q])
                    .min()
                    .map_or(Label::Noise, Label::Cluster)
            }
        })
        .collect()
}

#[test]
fn criterion_08_dbscan_oracle_equivalence() {
    let mut rng = Seed::new(808).rng();
    let mut checked = 0;
    for trial in 0..10u64 {
        let x = DataMatrix::vstack(&[
            &gen_gaussian_blobs(
                &[vec![0.0, 0.0], vec![5.0, 1.0], vec![-3.0, 4.0]],
                &[0.5, 0.8, 0.3],
                &[70, 60, 40],
                Seed::new(880 + trial),
            )
            .unwrap(),
            &scaled_square(30, 8.0, Seed::new(890 + trial)),
        ])
        .unwrap();
        let eps = 0.2 + 1.3 * rng.random::<f64>();
        let min_pts = 2 + (rng.random::<f64>() * 7.0) as usize;
        let got = dbscan::dbscan(&x, eps, min_pts);
        let want = dbscan_oracle(&x, eps, min_pts);
        assert_eq!(got, want, "trial {trial} eps {eps} min_pts {min_pts}");
        checked += 1;
    }
    verdict(
        "08 (DBSCAN oracle equivalence)",
        checked == 10,
        &format!("{checked}/10 random (eps, min_pts) settings matched exactly on 200-point fixtures"),
    );
}

// ---------------------------------------------------------------------------
// 9. Isolation-forest special case of the depth model
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_if_special_case() {
    let mut worst = 0.0f64;
    for e in 8..=20u32 {
        let n = 1usize << e;
        let estimated = DepthModel::isolation_forest(n).estimate(n);
        let reference = 2.0 * ((n as f64 - 1.0).ln() + 0.5772) - 2.0 * (n as f64 - 1.0) / n as f64;
        worst = worst.max((estimated - reference).abs() / reference);
    }
    verdict(
        "09 (iF special case)",
        worst < 0.02,
        &format!("worst relative gap to the reference path length over n = 2^8..2^20: {:.4}% < 2%", worst * 100.0),
    );
}

// ---------------------------------------------------------------------------
// 10. CLI determinism across reruns and thread counts
// ---------------------------------------------------------------------------

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gen2out")
}

fn run_ok(dir: &Path, args: &[&str]) {
    let output = Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn CLI");
    assert!(
        output.status.success(),
        "gen2out {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn hash_file(path: &Path) -> u64 {
    use std::hash::{Hash, Hasher};
    let bytes = std::fs::read(path).unwrap_or_else(|e| panic!("read {path:?}: {e}"));
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    bytes.hash(&mut hasher);
    hasher.finish()
}

#[test]
fn criterion_10_cli_determinism() {
    let root = std::env::temp_dir().join(format!("gen2out-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&root);
    std::fs::create_dir_all(&root).unwrap();

    // Inputs: a grouped dataset for detect, a channels CSV for tscloud, a
    // labeled CSV for eval.
    let spec = r#"{"kind":"blobs","centers":[[0,0],[9,9]],"stds":[1.0,0.05],"counts":[3000,60]}"#;
    std::fs::write(root.join("spec.json"), spec).unwrap();

    let mut rng = Seed::new(1010).rng();
    let mut channels = String::new();
    for _ in 0..512 {
        let row: Vec<String> = (0..48).map(|_| format!("{:.6}", rng.random::<f64>())).collect();
        channels.push_str(&row.join(","));
        channels.push('\n');
    }
    std::fs::write(root.join("channels.csv"), channels).unwrap();

    let mut labeled = String::from("a,b,label\n");
    for i in 0..300 {
        let out = u8::from(i >= 285);
        let (x, y) = if out == 1 {
            (10.0 + i as f64 * 0.01, -9.0)
        } else {
            ((i as f64 * 0.37).sin(), (i as f64 * 0.41).cos())
        };
        labeled.push_str(&format!("{x},{y},{out}\n"));
    }
    std::fs::write(root.join("labeled.csv"), labeled).unwrap();

    let pipelines: Vec<Vec<String>> = vec![
        vec!["synth", "--preset", "fern", "--n", "2000", "--seed", "9", "--out", "synth.csv"],
        vec!["synth", "--spec", "spec.json", "--seed", "9", "--out", "grouped.csv"],
        vec!["fit", "--input", "synth.csv", "--seed", "9", "--out", "model.json"],
        vec!["score", "--model", "model.json", "--input", "synth.csv", "--out", "scores.csv"],
        vec![
            "detect", "--input", "grouped.csv", "--seed", "9", "--min-level-size", "128",
            "--report", "report.json", "--xray", "xray.csv",
        ],
        vec![
            "tscloud", "--input", "channels.csv", "--window", "128", "--stride", "128",
            "--seed", "9", "--out", "windows.csv",
        ],
        vec![
            "eval", "labeled.csv", "--label-column", "label", "--seed", "9", "--out", "eval.csv",
        ],
        vec!["axioms", "--trials", "2", "--seed", "9", "--out", "axioms.json"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();

    let artifacts = [
        "synth.csv", "grouped.csv", "model.json", "scores.csv", "report.json", "xray.csv",
        "windows.csv", "eval.csv", "axioms.json",
    ];

    let mut runs: Vec<Vec<u64>> = Vec::new();
    for threads in ["1", "1", "2"] {
        for p in &pipelines {
            let mut args: Vec<&str> = vec!["--threads", threads];
            args.extend(p.iter().map(String::as_str));
            run_ok(&root, &args);
        }
        runs.push(artifacts.iter().map(|a| hash_file(&root.join(a))).collect());
    }

    let rerun_identical = runs[0] == runs[1];
    let threads_identical = runs[0] == runs[2];
    verdict(
        "10 (CLI determinism)",
        rerun_identical && threads_identical,
        &format!(
            "9 artifacts from 8 pipelines byte-identical across rerun: {rerun_identical}; \
             across --threads 1 vs 2: {threads_identical}"
        ),
    );
    let _ = std::fs::remove_dir_all(&root);
}
