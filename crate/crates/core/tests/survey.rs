use ornament_core::survey::io::{responses_from_str, responses_to_jsonl};
use ornament_core::survey::synthetic::{experiment1, experiment2, CMM_OL, QUERY};
use ornament_core::survey::{analyze, embedding_to_rgb, tsne, DistanceMatrix, Experiment, TsneOptions};

fn two_clusters() -> DistanceMatrix {
    let labels: Vec<String> = (0..16).map(|i| format!("o{i:02}")).collect();
    let values = (0..16)
        .map(|i| {
            (0..16)
                .map(|j| {
                    if i == j {
                        0.0
                    } else if (i < 8) == (j < 8) {
                        0.1 + 0.01 * ((i + j) % 5) as f64
                    } else {
                        1.0
                    }
                })
                .collect()
        })
        .collect();
    DistanceMatrix::new(labels, values).unwrap()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn tsne_separates_two_clusters() {
    let e = tsne(&two_clusters(), &TsneOptions { perplexity: 4.0, ..TsneOptions::default() }).unwrap();
    assert_eq!(e.points.len(), 16);
    for (i, p) in e.points.iter().enumerate() {
        let nearest = (0..16).filter(|&j| j != i).min_by(|&a, &b| dist(p, &e.points[a]).total_cmp(&dist(p, &e.points[b]))).unwrap();
        assert_eq!(nearest < 8, i < 8, "point {i} nearest {nearest}");
    }
    let max_within = (0..16)
        .flat_map(|i| (0..16).filter(move |&j| (i < 8) == (j < 8)).map(move |j| (i, j)))
        .map(|(i, j)| dist(&e.points[i], &e.points[j]))
        .fold(0.0, f64::max);
    let min_between = (0..8)
        .flat_map(|i| (8..16).map(move |j| (i, j)))
        .map(|(i, j)| dist(&e.points[i], &e.points[j]))
        .fold(f64::INFINITY, f64::min);
    assert!(min_between > max_within, "{min_between} <= {max_within}");
}

#[test]
fn tsne_kl_never_increases_after_exaggeration() {
    let e = tsne(&two_clusters(), &TsneOptions::default()).unwrap();
    assert_eq!(e.kl_history.len(), 1000);
    let tail = &e.kl_history[500..];
    for w in tail.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
    }
    assert_eq!(*tail.last().unwrap(), e.final_kl);
}

#[test]
fn tsne_is_reproducible_per_seed() {
    let d = two_clusters();
    let opts = TsneOptions { seed: 42, ..TsneOptions::default() };
    let a = tsne(&d, &opts).unwrap();
    let b = tsne(&d, &opts).unwrap();
    assert_eq!(a.points, b.points);
    assert_eq!(a.final_kl.to_bits(), b.final_kl.to_bits());
    let c = tsne(&d, &TsneOptions { seed: 43, ..opts }).unwrap();
    assert_ne!(a.points, c.points);
}

#[test]
fn three_dimensional_embedding_maps_to_rgb() {
    let e = tsne(&two_clusters(), &TsneOptions { dims: 3, ..TsneOptions::default() }).unwrap();
    let rgb = embedding_to_rgb(&e).unwrap();
    assert_eq!(rgb.colors.len(), 16);
    assert!(rgb.degenerate_axes.is_empty());
    for axis in 0..3 {
        assert_eq!(rgb.colors.iter().map(|c| c.1[axis]).min(), Some(0));
        assert_eq!(rgb.colors.iter().map(|c| c.1[axis]).max(), Some(255));
    }
    let flat = tsne(&two_clusters(), &TsneOptions::default()).unwrap();
    assert!(embedding_to_rgb(&flat).is_err());
}

#[test]
fn experiment1_matrices_are_valid_distances() {
    let e = experiment1(30, 13, 9);
    let r = analyze(&e.tasks, &e.responses, Experiment::One).unwrap();
    assert_eq!((r.participants, r.retained.len(), r.excluded.len()), (30, 17, 13));
    for m in r.participant_matrices.iter().chain(&r.per_task_matrices) {
        assert!(m.matrix.is_symmetric(1e-12) && m.matrix.has_zero_diagonal(), "{}", m.name);
        assert!(m.matrix.values.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn experiment2_reproduces_vote_shares() {
    let e = experiment2(3);
    let text = responses_to_jsonl(&e.responses);
    let back = responses_from_str(&text).unwrap();
    let r = analyze(&e.tasks, &back, Experiment::Two).unwrap();
    let s = r.similarity.unwrap();
    // 10, 14, 18 and 18 of 20 votes for the overlapped ornament
    assert!((s.get(CMM_OL, QUERY).unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(s.get(QUERY, CMM_OL), s.get(CMM_OL, QUERY));
    assert_eq!(s.get("p6m-1", CMM_OL).unwrap(), 1.0);
    assert!((s.get(CMM_OL, "p4g-cmm").unwrap() - 6.0 / 14.0).abs() < 1e-12);
    assert_eq!(s.get(CMM_OL, CMM_OL).unwrap(), 1.0);
}

#[test]
fn analysis_output_is_deterministic() {
    let e = experiment1(30, 13, 4);
    let a = analyze(&e.tasks, &e.responses, Experiment::One).unwrap().files();
    let b = analyze(&e.tasks, &e.responses, Experiment::One).unwrap().files();
    assert_eq!(a, b);
}
