use mzipuf_core::experiments::{
    emit_artifacts, read_raw_comparisons, run_large_pair, run_pair, run_small_pair, summarize, ExperimentConfig,
    ExperimentReport,
};
use mzipuf_core::fabrication::NoiseConfig;

fn quick_small() -> ExperimentConfig {
    ExperimentConfig {
        challenge_count: 200,
        repeat_count: 20,
        ..ExperimentConfig::small_pair()
    }
}

#[test]
fn noise_free_clone_is_indistinguishable() {
    let cfg = ExperimentConfig {
        identical_carving: true,
        noise: NoiseConfig::disabled(),
        ..quick_small()
    };
    let report = run_small_pair(&cfg).unwrap();
    let s = &report.summary;
    assert!(s.uniqueness.iter().all(|u| u.percent == 0.0));
    assert!(report
        .raw
        .inter
        .iter()
        .all(|r| r.l2 == 0.0 && r.lhd.iter().all(|&d| d == 0)));
    assert!(report.raw.intra.iter().all(|r| r.l2 == 0.0));
    assert_eq!(s.overlap, 10);
    assert_eq!(s.collisions.inter, 200);
}

#[test]
fn adversary_chip_is_distinct() {
    let cfg = ExperimentConfig {
        adversary_seed: Some(999),
        ..quick_small()
    };
    let report = run_pair(&cfg).unwrap();
    assert_eq!(report.summary.overlap, 0);
    assert!(report.summary.uniqueness[1].percent > 50.0);
}

#[test]
fn mirrored_rows_share_challenges() {
    let report = run_pair(&quick_small()).unwrap();
    assert_eq!(report.raw.inter.len(), 200);
    assert_eq!(report.raw.intra.len(), 2 * 19);
    assert_eq!(report.raw.random.len(), 2 * 200);
    for (i, r) in report.raw.inter.iter().enumerate() {
        assert_eq!(r.index, i);
        assert_eq!(r.digest_a, r.digest_b);
        assert_eq!(r.lhd.len(), 10);
        assert!(r.lhd.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn artifacts_are_reproducible() {
    let cfg = quick_small();
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let m1 = emit_artifacts(&run_pair(&cfg).unwrap(), &cfg, d1.path()).unwrap();
    let m2 = emit_artifacts(&run_pair(&cfg).unwrap(), &cfg, d2.path()).unwrap();
    assert_eq!(m1, m2);
    assert_eq!(m1.files.len(), 10);
    for entry in &m1.files {
        assert_eq!(
            std::fs::read(d1.path().join(&entry.file)).unwrap(),
            std::fs::read(d2.path().join(&entry.file)).unwrap()
        );
    }
    let manifest = std::fs::read_to_string(d1.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("inter_distances.csv"));
    let saved = ExperimentConfig::load(&d1.path().join("config.json")).unwrap();
    assert_eq!(saved, cfg);

    let other = ExperimentConfig {
        noise_seed: 8,
        ..cfg.clone()
    };
    let m3 = emit_artifacts(&run_pair(&other).unwrap(), &other, d2.path()).unwrap();
    assert_ne!(m1, m3);
}

#[test]
fn summary_reaggregates_from_raw_files() {
    let cfg = quick_small();
    let report = run_pair(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_artifacts(&report, &cfg, dir.path()).unwrap();
    let raw = read_raw_comparisons(dir.path()).unwrap();
    assert_eq!(raw, report.raw);

    let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let s = &report.summary;
    let again = summarize(
        &cfg,
        s.output_modes,
        s.overlap,
        &raw,
        s.uniqueness.clone(),
        s.collisions.intra_device,
    )
    .unwrap();
    assert_eq!(again.intra_lhd, s.intra_lhd);
    assert_eq!(again.inter_l2, s.inter_l2);
    assert_eq!(again.intra_l2, s.intra_l2);
    assert_eq!(again.l2_separation, s.l2_separation);
    assert_eq!(again.collisions, s.collisions);
    assert_eq!(
        parsed["inter_l2"]["mean"].as_f64().unwrap(),
        s.inter_l2.as_ref().unwrap().mean
    );

    // two devices: uniqueness is the mean LHD over the channel count
    for u in &s.uniqueness {
        let l = u.looseness as usize - 1;
        let mean = raw.inter.iter().map(|r| f64::from(r.lhd[l])).sum::<f64>() / raw.inter.len() as f64;
        assert!((mean / s.output_modes as f64 * 100.0 - u.percent).abs() < 1e-9);
    }
}

#[test]
fn empty_report_still_writes_valid_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::small_pair();
    emit_artifacts(&ExperimentReport::default(), &cfg, dir.path()).unwrap();
    let inter = std::fs::read_to_string(dir.path().join("inter_distances.csv")).unwrap();
    assert_eq!(inter.lines().count(), 1);
    assert!(inter.starts_with("index,digest_a,digest_b,l2,lhd_l1"));
    let hist = std::fs::read_to_string(dir.path().join("hist_l2_inter.csv")).unwrap();
    assert_eq!(hist, "bin_low,bin_high,count\n");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary["inter_l2"].is_null());
    let raw = read_raw_comparisons(dir.path()).unwrap();
    assert!(raw.inter.is_empty() && raw.intra.is_empty() && raw.random.is_empty());
}

#[test]
fn presets_are_checked() {
    assert!(run_large_pair(&quick_small()).is_err());
    let large = ExperimentConfig {
        challenge_count: 20,
        repeat_count: 5,
        ..ExperimentConfig::large_pair()
    };
    assert!(run_small_pair(&large).is_err());
    let report = run_large_pair(&large).unwrap();
    assert_eq!(report.summary.overlap, 45);
    assert_eq!(report.summary.output_modes, 22);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = |f: fn(&mut ExperimentConfig)| {
        let mut c = quick_small();
        f(&mut c);
        assert!(run_pair(&c).is_err());
    };
    bad(|c| c.challenge_count = 0);
    bad(|c| c.repeat_count = 1);
    bad(|c| c.chip_seeds.clear());
    bad(|c| c.looseness_max = 0);
    bad(|c| c.format_version = 9);
    bad(|c| {
        c.adversary_seed = Some(1);
        c.identical_carving = true;
    });
    assert!(ExperimentConfig::from_json("{\"challenge_count\": 0}").is_err());
    let partial = ExperimentConfig::from_json("{\"preset\": \"large-pair\", \"challenge_count\": 12}").unwrap();
    assert_eq!(partial.challenge_count, 12);
}
