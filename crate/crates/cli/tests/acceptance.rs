//! Acceptance checks, one line of output per criterion.

mod common;

use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use ornament_cli::session::RESPONSES_FILE;
use ornament_core::detect::{color_permutation_check, isometry_mismatch, regenerate, DEFAULT_THETA};
use ornament_core::fixtures::{moroccan_composite, random_fixture, two_colored_p6};
use ornament_core::survey::synthetic::{experiment1, experiment2, experiment2_tasks, CMM_OL, QUERY};
use ornament_core::survey::{
    analyze, embedding_to_rgb, kendall_tau, normalized_kendall, tsne, DistanceMatrix, Experiment, Ranking, TsneOptions,
};
use ornament_core::{classify, GroupName, Isometry2};

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn round_trip_17_groups() -> Result<String, String> {
    let start = Instant::now();
    let mut wrong = Vec::new();
    for g in GroupName::ALL {
        let f = random_fixture(g, 512, 110.0, 1).map_err(|e| e.to_string())?;
        match classify(&f.pattern) {
            Ok(sig) if sig.group == g => {}
            Ok(sig) => wrong.push(format!("{g}->{}", sig.group)),
            Err(e) => wrong.push(format!("{g}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    ensure(wrong.is_empty(), || format!("misclassified: {}", wrong.join(", ")))?;
    ensure(elapsed < Duration::from_secs(120), || format!("17/17 correct but took {elapsed:.1?}"))?;
    Ok(format!("17/17 groups at 512x512 in {:.1}s", elapsed.as_secs_f64()))
}

fn composite_trap() -> Result<String, String> {
    let c = moroccan_composite(512, 120.0).map_err(|e| e.to_string())?;
    let score = |order: u32, p| isometry_mismatch(&c.pattern, &Isometry2::rotation(p, TAU / order as f64)).unwrap();
    let (s6, s3, s4) = (score(6, c.dodecagram_center), score(3, c.three_leaf_center), score(4, c.dodecagram_center));
    for (order, s) in [(6, s6), (3, s3), (4, s4)] {
        ensure(s > DEFAULT_THETA, || format!("order {order} scores {s:.4}, not above {DEFAULT_THETA}"))?;
    }
    let sig = classify(&c.pattern).map_err(|e| e.to_string())?;
    ensure(sig.two_fold_class_count == 3, || format!("{} two-fold classes", sig.two_fold_class_count))?;
    ensure(sig.group == GroupName::Cmm, || format!("labelled {}", sig.group))?;
    for order in [6, 4, 3] {
        let r = sig.rejected_orders.get(&order).copied().unwrap_or(0.0);
        ensure(r > DEFAULT_THETA, || format!("best order-{order} candidate scored {r:.4}"))?;
    }
    let (_, err) = regenerate(&c.pattern, &sig).map_err(|e| e.to_string())?;
    ensure(err < 0.05, || format!("regeneration mismatch {err:.4}"))?;
    Ok(format!(
        "rotations rejected (6: {s6:.3}, 3: {s3:.3}, 4: {s4:.3}), 3 two-fold classes, cmm, regeneration {err:.4}"
    ))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn kendall_oracle() -> Result<String, String> {
    const NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];
    let ranking = |order: &[usize]| {
        let names: Vec<&str> = order.iter().map(|&i| NAMES[i]).collect();
        Ranking::from_order("p", "t", &names)
    };
    let mut pairs_at_5 = 0;
    for n in 1..=5 {
        for p in permutations(n) {
            for q in permutations(n) {
                // discordant pairs counted from positions
                let pos = |o: &[usize], x: usize| o.iter().position(|&y| y == x).unwrap();
                let mut brute = 0;
                for x in 0..n {
                    for y in x + 1..n {
                        let a = pos(&p, x) as i64 - pos(&p, y) as i64;
                        let b = pos(&q, x) as i64 - pos(&q, y) as i64;
                        if a * b < 0 {
                            brute += 1;
                        }
                    }
                }
                let (r1, r2) = (ranking(&p), ranking(&q));
                let k = kendall_tau(&r1, &r2).map_err(|e| e.to_string())?;
                ensure(k == brute, || format!("{p:?} vs {q:?}: {k} != {brute}"))?;
                let norm = normalized_kendall(&r1, &r2).map_err(|e| e.to_string())?;
                ensure((0.0..=1.0).contains(&norm), || format!("normalized {norm} out of range"))?;
                let reversed = p.iter().rev().eq(q.iter());
                if n > 1 && reversed {
                    ensure(norm == 1.0, || format!("full reversal of {p:?} gives {norm}"))?;
                }
                if n == 5 {
                    pairs_at_5 += 1;
                }
            }
        }
    }
    ensure(pairs_at_5 == 14_400, || format!("{pairs_at_5} pairs at n=5"))?;
    Ok("brute-force agreement on all permutation pairs n<=5 (14400 at n=5); reversal gives exactly 1".into())
}

fn survey_numbers() -> Result<String, String> {
    let e2 = experiment2(0);
    let r = analyze(&e2.tasks, &e2.responses, Experiment::Two).map_err(|e| e.to_string())?;
    let sim = r.similarity.ok_or("no similarity matrix")?;
    let q = sim.get(CMM_OL, QUERY).ok_or("cmm-ol missing")?;
    ensure((q - 0.75).abs() <= 1e-12, || format!("cmm-ol vs query {q}"))?;
    let t2 = sim.get("p6m-1", CMM_OL).ok_or("task-2 pair missing")?;
    ensure(t2 == 1.0, || format!("task-2 pair {t2}"))?;
    let p4g = sim.get(CMM_OL, "p4g-cmm").ok_or("p4g-cmm pair missing")?;
    ensure((p4g - 6.0 / 14.0).abs() <= 1e-12, || format!("cmm-ol vs p4g-cmm {p4g}"))?;
    let e1 = experiment1(30, 13, 0);
    let r = analyze(&e1.tasks, &e1.responses, Experiment::One).map_err(|e| e.to_string())?;
    ensure(r.participant_matrices.len() == 10, || format!("{} participant matrices", r.participant_matrices.len()))?;
    ensure(r.participant_matrices.iter().all(|m| m.matrix.len() == 17), || "participant matrices not 17x17".into())?;
    ensure(r.per_task_matrices.len() == 20, || format!("{} per-task matrices", r.per_task_matrices.len()))?;
    for m in &r.per_task_matrices {
        ensure(m.matrix.len() == 30, || format!("{} is {}x{}", m.name, m.matrix.len(), m.matrix.len()))?;
        ensure(m.matrix.values.iter().flatten().all(|v| *v == 0.0 || *v == 1.0), || format!("{} not binary", m.name))?;
    }
    Ok(format!("similarity {q:.2}, task-2 pair {t2:.1}, ten 17x17 and twenty 30x30 binary matrices"))
}

fn color_symmetry() -> Result<String, String> {
    let f = two_colored_p6(512, 110.0, 3).map_err(|e| e.to_string())?;
    let r60 = Isometry2::rotation(f.anchor, PI / 3.0);
    let r120 = Isometry2::rotation(f.anchor, 2.0 * PI / 3.0);
    let p60 = color_permutation_check(&f.pattern, &r60).map_err(|e| e.to_string())?.ok_or("60 degrees: no permutation")?;
    let p120 = color_permutation_check(&f.pattern, &r120).map_err(|e| e.to_string())?.ok_or("120 degrees: no permutation")?;
    ensure(p60.mapping == vec![0, 2, 1], || format!("60 degrees gives {:?}", p60.mapping))?;
    ensure(p120.is_identity(), || format!("120 degrees gives {:?}", p120.mapping))?;
    let collapsed = f.pattern.collapse_colors(&[0, 1, 1]).map_err(|e| e.to_string())?;
    let sig = classify(&collapsed).map_err(|e| e.to_string())?;
    ensure(sig.group == GroupName::P6, || format!("collapsed pattern labelled {}", sig.group))?;
    Ok("60 degrees swaps the two colors, 120 degrees keeps them, collapsed colors give p6".into())
}

fn tsne_properties() -> Result<String, String> {
    let labels: Vec<String> = (0..16).map(|i| format!("o{i:02}")).collect();
    let values = (0..16)
        .map(|i| {
            (0..16)
                .map(|j| if i == j { 0.0 } else if (i < 8) == (j < 8) { 0.1 + 0.02 * ((i * j) % 3) as f64 } else { 1.0 })
                .collect()
        })
        .collect();
    let d = DistanceMatrix::new(labels, values).map_err(|e| e.to_string())?;
    let opts = TsneOptions { dims: 3, seed: 5, ..TsneOptions::default() };
    let e = tsne(&d, &opts).map_err(|e| e.to_string())?;
    let dist = |i: usize, j: usize| e.points[i].iter().zip(&e.points[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let (mut within, mut between) = (0.0f64, f64::INFINITY);
    for i in 0..16 {
        for j in i + 1..16 {
            if (i < 8) == (j < 8) {
                within = within.max(dist(i, j));
            } else {
                between = between.min(dist(i, j));
            }
        }
    }
    ensure(between > within, || format!("closest cross-cluster pair {between:.3} <= farthest within {within:.3}"))?;
    let tail = &e.kl_history[e.kl_history.len() - 500..];
    let worst = tail.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    ensure(worst <= 1e-6, || format!("KL rose by {worst:e}"))?;
    let again = tsne(&d, &opts).map_err(|e| e.to_string())?;
    let identical = e.points.iter().flatten().zip(again.points.iter().flatten()).all(|(a, b)| a.to_bits() == b.to_bits());
    ensure(identical, || "same seed gave different embeddings".into())?;
    let rgb = embedding_to_rgb(&e).map_err(|e| e.to_string())?;
    for axis in 0..3 {
        let lo = rgb.colors.iter().map(|c| c.1[axis]).min();
        let hi = rgb.colors.iter().map(|c| c.1[axis]).max();
        ensure(lo == Some(0) && hi == Some(255), || format!("axis {axis} spans {lo:?}..{hi:?}"))?;
    }
    Ok(format!("clusters separated ({between:.2} > {within:.2}), KL monotone over last 500 iterations, bit-identical reruns, RGB 0..255"))
}

fn end_to_end() -> Result<String, String> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let tasks = experiment2_tasks(true);
        let cfg = config(tasks.tasks.clone());
        let cfg_path = dir.path().join("session.json");
        std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).map_err(|e| e.to_string())?;
        let data = dir.path().join("data");
        let srv = start(&cfg, &data).await;
        let client = reqwest::Client::new();
        // each scripted client replays one synthetic participant's choices
        let script = experiment2(11).responses;
        for p in 1..=20 {
            let pid = format!("p{p:02}");
            let answered = run_participant(&client, &srv.base, |t| {
                let task_id = t["taskId"].as_str().unwrap();
                let opts = t["optionOrnamentIds"].as_array().unwrap();
                let most = script
                    .iter()
                    .find(|r| r.participant_id == pid && r.task_id == task_id)
                    .map(|r| r.most_similar.clone())
                    .unwrap_or_else(|| opts[p % opts.len()].as_str().unwrap().to_string());
                (most, None, 1_000 + 37 * p as u64)
            })
            .await;
            if answered != tasks.tasks.len() {
                return Err(format!("participant {pid} answered {answered} tasks"));
            }
        }
        let closed = post(&client, &format!("{}/api/session/close", srv.base), "").await;
        ensure(closed.status == 200, || format!("close returned {}", closed.status))?;
        let results = get(&client, &format!("{}/api/results", srv.base)).await;
        ensure(results.status == 200, || format!("results returned {}: {}", results.status, results.text))?;

        let out = dir.path().join("analysis");
        let o = Command::new(env!("CARGO_BIN_EXE_ornament"))
            .arg("analyze")
            .arg(data.join(RESPONSES_FILE))
            .arg(&cfg_path)
            .arg("--out-dir")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        let cli_summary = String::from_utf8_lossy(&o.stdout).into_owned();
        ensure(cli_summary == results.text, || "analyze output differs from /api/results".into())?;
        let mut compared = 0;
        for entry in std::fs::read_dir(&out).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.extension().is_some_and(|x| x == "csv") {
                let name = path.file_name().unwrap().to_string_lossy().into_owned();
                let served = get(&client, &format!("{}/api/results/{name}", srv.base)).await;
                let local = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
                ensure(served.text == local, || format!("{name} differs"))?;
                compared += 1;
            }
        }
        ensure(compared > 0, || "no CSV files compared".into())?;
        let v = results.json();
        let labels = v["similarity"]["labels"].as_array().ok_or("no similarity")?;
        let idx = |id: &str| labels.iter().position(|l| l == id).unwrap();
        let s = v["similarity"]["values"][idx(CMM_OL)][idx(QUERY)].as_f64().unwrap();
        ensure((s - 0.75).abs() < 1e-12, || format!("served similarity {s}"))?;
        srv.shutdown().await;
        Ok(format!(
            "20 scripted clients x {} tasks; /api/results and {compared} CSVs byte-identical to analyze",
            tasks.tasks.len()
        ))
    })
}

fn main() {
    let checks: [(u32, &str, Check); 7] = [
        (1, "17-group round trip", round_trip_17_groups),
        (2, "overlapped composite is cmm", composite_trap),
        (3, "Kendall oracle", kendall_oracle),
        (4, "quoted survey numbers", survey_numbers),
        (5, "color symmetry", color_symmetry),
        (6, "tSNE properties", tsne_properties),
        (7, "end-to-end session", end_to_end),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || n.to_string() == *f) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS - {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL - {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
