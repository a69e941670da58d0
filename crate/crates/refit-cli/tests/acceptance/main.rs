//! Acceptance suite. One test per criterion; each prints a `PASS` line
//! (run with `cargo test --test acceptance -- --show-output` to see them).

mod oracle;
mod phantom;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use refit::boundary_fit::{binarize, boundary_fit, ThresholdPolicy};
use refit::edgemap::build_edge_map;
use refit::io::{save_mask, save_response_map};
use refit::metrics::{blank_baseline, confusion_binary, dsc, miou};
use refit::raster::{BinaryMask, LabelMap, Raster};
use refit::superpixels::{
    merge_regions, quickshift, quickshift_forest, slic, MergeParams, QuickshiftParams, SlicParams,
};

fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize) -> BinaryMask {
    let bits = (0..w * h).map(|_| rng.gen_range(0..=1u8)).collect();
    BinaryMask::new(w, h, bits).unwrap()
}

#[test]
fn criterion_1_metric_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..1000usize {
        let w = rng.gen_range(1..=16);
        let h = rng.gen_range(1..=16);
        let mut a = random_mask(&mut rng, w, h);
        let mut b = random_mask(&mut rng, w, h);
        // sprinkle the degenerate conventions into the corpus
        if case % 50 == 0 {
            a = BinaryMask::zeros(w, h);
            b = BinaryMask::zeros(w, h);
        } else if case % 50 == 1 {
            b = a.clone();
        }

        let d = dsc(&a, &b).unwrap();
        let d_ref = oracle::dsc_naive(&a, &b);
        assert!((d - d_ref).abs() <= 1e-12, "case {case}: dsc {d} vs {d_ref}");

        let c = confusion_binary(&a, &b).unwrap();
        let c_ref = oracle::confusion_naive(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(c.get(i, j), c_ref[i][j], "case {case}: counts[{i}][{j}]");
            }
        }
        let m = miou(&c);
        let m_ref = oracle::miou_naive(&c_ref);
        assert!((m - m_ref).abs() <= 1e-12, "case {case}: miou {m} vs {m_ref}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!("criterion 1 (dsc/miou match naive oracle on 1000 pairs, {elapsed:?}): PASS");
}

fn random_partition(rng: &mut ChaCha8Rng, w: usize, h: usize) -> LabelMap {
    let label_count = rng.gen_range(1..=5u32);
    let labels = (0..w * h).map(|_| rng.gen_range(0..label_count)).collect();
    LabelMap::new(w, h, labels, label_count).unwrap()
}

fn floodfill_corpus(n: usize) -> Vec<(BinaryMask, LabelMap)> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    (0..n)
        .map(|_| {
            let w = rng.gen_range(1..=12);
            let h = rng.gen_range(1..=12);
            (random_mask(&mut rng, w, h), random_partition(&mut rng, w, h))
        })
        .collect()
}

#[test]
fn criterion_2_boundary_fit_oracle_equivalence() {
    let start = Instant::now();
    for (i, (cam, labels)) in floodfill_corpus(1000).iter().enumerate() {
        let edges = build_edge_map(labels, true);
        let out = boundary_fit(cam, &edges).unwrap();
        let reference = oracle::boundary_fit_naive(cam, labels);
        assert_eq!(out, reference, "corpus case {i}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!("criterion 2 (boundary_fit matches keep-iff-all-positive oracle on 1000 cases, {elapsed:?}): PASS");
}

#[test]
fn criterion_3_boundary_fit_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut violations = 0usize;
    for (cam, labels) in floodfill_corpus(1000) {
        let edges = build_edge_map(&labels, true);
        let out = boundary_fit(&cam, &edges).unwrap();

        // subset
        if out.bits().iter().zip(cam.bits()).any(|(o, c)| o > c) {
            violations += 1;
        }
        // cluster purity: every component is all-positive or all-negative
        let (comp, count) = oracle::components_naive(&labels);
        let mut value: Vec<Option<u8>> = vec![None; count];
        for (i, &b) in out.bits().iter().enumerate() {
            match value[comp[i] as usize] {
                None => value[comp[i] as usize] = Some(b),
                Some(v) => {
                    if v != b {
                        violations += 1;
                    }
                }
            }
        }
        // idempotence
        if boundary_fit(&out, &edges).unwrap() != out {
            violations += 1;
        }
        // monotonicity: widen the mask, the output may only grow
        let wider_bits: Vec<u8> = cam
            .bits()
            .iter()
            .map(|&b| b | rng.gen_range(0..=1u8))
            .collect();
        let wider = BinaryMask::new(cam.width(), cam.height(), wider_bits).unwrap();
        let out_wider = boundary_fit(&wider, &edges).unwrap();
        if out.bits().iter().zip(out_wider.bits()).any(|(a, b)| a > b) {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
    println!("criterion 3 (subset/purity/idempotence/monotonicity, 0 violations on 1000 cases): PASS");
}

#[test]
fn criterion_4_slic_structure() {
    // fixed derived case: constant 8x8, k=4 -> four 4x4 blocks
    let img = Raster::new(8, 8, 1, vec![0.5; 64]).unwrap();
    let map = slic(&img, &SlicParams::new(4, 10.0).unwrap()).unwrap();
    for y in 0..8 {
        for x in 0..8 {
            assert_eq!(map.get(x, y), (y / 4) as u32 * 2 + (x / 4) as u32);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for trial in 0..4 {
        let w = rng.gen_range(8..=64);
        let h = rng.gen_range(8..=64);
        let data = (0..w * h).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let img = Raster::new(w, h, 1, data).unwrap();
        for &k in &[1u32, 4, 16, 64] {
            let params = SlicParams::new(k, 5.0).unwrap();
            let map = slic(&img, &params).unwrap();
            // full coverage with a contiguous label range
            assert_eq!(map.labels().len(), w * h);
            assert!(map.label_count() >= 1 && map.label_count() <= k, "trial {trial} k {k}");
            assert!(map.labels().iter().all(|&l| l < map.label_count()));
            // exactly one 4-connected component per label
            let (_, comps) = oracle::components_naive(&map);
            assert_eq!(comps as u32, map.label_count(), "trial {trial} k {k}");
        }
    }
    println!("criterion 4 (SLIC coverage, cluster bound, connectivity; 8x8/k=4 blocks): PASS");
}

#[test]
fn criterion_5_quickshift_forest() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for trial in 0..4 {
        let (w, h) = (16usize, 16usize);
        let data = (0..w * h).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let img = Raster::new(w, h, 1, data).unwrap();
        let params = QuickshiftParams::new(
            rng.gen_range(0.8..1.5),
            rng.gen_range(1.5..4.0),
            rng.gen_range(0.3..=1.0),
        )
        .unwrap();

        let forest = quickshift_forest(&img, &params).unwrap();
        let reference = oracle::quickshift_naive(&img, &params);
        assert_eq!(forest.densities, reference.densities, "trial {trial}");

        let md2 = params.max_dist() * params.max_dist();
        for (i, &p) in forest.parents.iter().enumerate() {
            if p == i {
                continue;
            }
            let d2 = oracle::feature_distance2(&img, i, p, params.ratio());
            assert!(d2 <= md2, "trial {trial}: link {i}->{p} too long");
            let denser = reference.densities[p] > reference.densities[i]
                || (reference.densities[p] == reference.densities[i] && p < i);
            assert!(denser, "trial {trial}: link {i}->{p} not density-increasing");
        }
        assert_eq!(forest.parents, reference.parents, "trial {trial}");

        let labels = quickshift(&img, &params).unwrap();
        assert_eq!(labels.labels(), &reference.labels[..], "trial {trial}");
    }
    println!("criterion 5 (quickshift forest invariants and O(n^2) oracle match on 16x16): PASS");
}

struct PipelineFixture {
    slic: SlicParams,
    merge: MergeParams,
    policy: ThresholdPolicy,
}

impl PipelineFixture {
    fn new() -> Self {
        Self {
            slic: SlicParams::new(48, 0.5).unwrap(),
            merge: MergeParams::new(0.3).unwrap(),
            policy: ThresholdPolicy::default(),
        }
    }

    fn refine(&self, p: &phantom::Phantom) -> (BinaryMask, BinaryMask) {
        let labels = slic(&p.image, &self.slic).unwrap();
        let merged = merge_regions(&p.image, &labels, &self.merge).unwrap();
        let edges = build_edge_map(&merged, true);
        let cam_mask = binarize(&p.cam, 0, &self.policy).unwrap();
        let refined = boundary_fit(&cam_mask, &edges).unwrap();
        (cam_mask, refined)
    }
}

#[test]
fn criterion_6_phantom_end_to_end_improvement() {
    let start = Instant::now();
    let phantoms = phantom::generate(50, 2024);
    let pipeline = PipelineFixture::new();
    let mut wins = 0usize;
    let mut cam_total = 0.0;
    let mut refined_total = 0.0;
    for p in &phantoms {
        let (cam_mask, refined) = pipeline.refine(p);
        let d_cam = dsc(&cam_mask, &p.gt).unwrap();
        let d_refined = dsc(&refined, &p.gt).unwrap();
        cam_total += d_cam;
        refined_total += d_refined;
        if d_refined > d_cam {
            wins += 1;
        }
    }
    let n = phantoms.len();
    let elapsed = start.elapsed();
    assert!(
        wins * 10 >= n * 9,
        "refined beat thresholded response on only {wins}/{n} phantoms"
    );
    assert!(
        refined_total / n as f64 > cam_total / n as f64,
        "mean refined DSC {} did not beat mean response DSC {}",
        refined_total / n as f64,
        cam_total / n as f64
    );
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "criterion 6 (refined mean DSC {:.4} > response mean DSC {:.4}, wins {wins}/{n}, {elapsed:?}): PASS",
        refined_total / n as f64,
        cam_total / n as f64
    );
}

#[test]
fn criterion_7_blank_baseline_conventions() {
    // 60% empty ground truths, 40% with 4 foreground pixels out of 16
    let mut gts = Vec::new();
    for i in 0..100usize {
        if i % 5 < 3 {
            gts.push(BinaryMask::zeros(4, 4));
        } else {
            let bits = (0..16).map(|j| u8::from(j < 4)).collect();
            gts.push(BinaryMask::new(4, 4, bits).unwrap());
        }
    }
    let report = blank_baseline(&gts).unwrap();
    // analytic values: dsc = 0.6 * 1.0, miou = 0.6 * 1.0 + 0.4 * 0.375
    assert!((report.aggregate.avg_dsc - 0.6).abs() <= 1e-12);
    assert!((report.aggregate.avg_miou - 0.75).abs() <= 1e-12);
    println!("criterion 7 (blank baseline reproduces analytic avg_dsc 0.6 / avg_miou 0.75): PASS");
}

fn write_phantom_corpus(root: &Path, phantoms: &[phantom::Phantom]) {
    for sub in ["images", "cams", "gts"] {
        std::fs::create_dir_all(root.join(sub)).unwrap();
    }
    for (i, p) in phantoms.iter().enumerate() {
        let name = format!("{i:03}");
        let (w, h) = (p.image.width(), p.image.height());
        let pixels: Vec<u8> = p
            .image
            .data()
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        image::GrayImage::from_raw(w as u32, h as u32, pixels)
            .unwrap()
            .save(root.join("images").join(format!("{name}.png")))
            .unwrap();
        save_response_map(&p.cam, &root.join("cams").join(format!("{name}.rfm"))).unwrap();
        save_mask(&p.gt, &root.join("gts").join(format!("{name}.png"))).unwrap();
    }
}

fn run_refit(args: &[&str]) {
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_refit"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "refit {args:?} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn dir_snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            out.insert(
                path.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&path).unwrap(),
            );
        }
    }
    out
}

#[test]
fn criterion_8_worker_count_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let phantoms = phantom::generate(50, 2024);
    write_phantom_corpus(root, &phantoms);
    let images = root.join("images");
    let cams = root.join("cams");
    let gts = root.join("gts");

    let pipeline_flags = [
        "--k",
        "48",
        "--compactness",
        "0.5",
        "--merge-threshold",
        "0.3",
    ];
    for (workers, out) in [("1", "refined_w1"), ("8", "refined_w8")] {
        let out_dir = root.join(out);
        let mut args = vec![
            "refine",
            "--images",
            images.to_str().unwrap(),
            "--cams",
            cams.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--workers",
            workers,
        ];
        args.extend_from_slice(&pipeline_flags);
        run_refit(&args);
    }
    let w1 = dir_snapshot(&root.join("refined_w1"));
    let w8 = dir_snapshot(&root.join("refined_w8"));
    assert_eq!(w1.len(), 50);
    assert_eq!(w1, w8, "cmd_refine outputs differ across worker counts");

    let config_path = root.join("search.toml");
    std::fs::write(
        &config_path,
        "[search]\nk = [16, 48]\ncompactness = [0.5]\ncolor_threshold = [0.3]\nsample_size = 4\n",
    )
    .unwrap();
    for (workers, out) in [("1", "search_w1"), ("8", "search_w8")] {
        let out_dir = root.join(out);
        run_refit(&[
            "search",
            "--config",
            config_path.to_str().unwrap(),
            "--images",
            images.to_str().unwrap(),
            "--cams",
            cams.to_str().unwrap(),
            "--gts",
            gts.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--workers",
            workers,
            "--seed",
            "9",
        ]);
    }
    let s1 = dir_snapshot(&root.join("search_w1"));
    let s8 = dir_snapshot(&root.join("search_w8"));
    assert!(s1.contains_key("score_table.json") && s1.contains_key("best_params.json"));
    assert_eq!(s1, s8, "cmd_search outputs differ across worker counts");

    println!("criterion 8 (cmd_refine and cmd_search byte-identical for --workers 1 vs 8): PASS");
}

#[test]
fn criterion_9_busi_blank_baseline_if_available() {
    let Some(gt_dir) = std::env::var_os("REFIT_BUSI_GT_DIR") else {
        println!("criterion 9 (BUSI blank baseline): SKIP (set REFIT_BUSI_GT_DIR to run)");
        return;
    };
    let gt_dir = std::path::PathBuf::from(gt_dir);
    let dir = tempfile::tempdir().unwrap();
    let preds = dir.path().join("preds");
    std::fs::create_dir_all(&preds).unwrap();
    let mut count = 0usize;
    for entry in std::fs::read_dir(&gt_dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "png") {
            continue;
        }
        let gt = refit::io::load_mask(&path).expect("BUSI masks must be binary gray PNGs");
        let blank = BinaryMask::zeros(gt.width(), gt.height());
        save_mask(&blank, &preds.join(path.file_name().unwrap())).unwrap();
        count += 1;
    }
    assert!(count > 0, "no PNG masks found in {}", gt_dir.display());

    let out_dir = dir.path().join("report");
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_refit"))
        .args([
            "eval",
            preds.to_str().unwrap(),
            gt_dir.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    let tokens: Vec<&str> = stdout.split_whitespace().collect();
    let avg_dsc: f64 = tokens[1].parse().unwrap();
    let avg_miou: f64 = tokens[3].parse().unwrap();
    assert!(
        (avg_dsc - 64.1).abs() <= 1.0,
        "blank-mask avg DSC {avg_dsc} not within 1.0 of 64.1"
    );
    assert!(
        (avg_miou - 47.2).abs() <= 1.0,
        "blank-mask avg mIoU {avg_miou} not within 1.0 of 47.2"
    );
    println!("criterion 9 (BUSI blank baseline {avg_dsc}/{avg_miou} within ±1.0 of 64.1/47.2): PASS");
}
