//! Property tests for the simulator, sensing, fusion rules and metrics.

use coopsense_core::baselines::{fit_kon, kon_statistic, predict_kon, predict_svm, KonRule, KonStatistic, LinearSvmModel};
use coopsense_core::dataset::{generate_dataset, generate_split, LabeledSample};
use coopsense_core::dcs::{build_model, ArchConfig};
use coopsense_core::metrics::{evaluate, Detector};
use coopsense_core::rng::{stream, Lineage};
use coopsense_core::sensing::hard_decision;
use coopsense_core::sim::{init_topology, sample_pu_state, sample_shadow_field, step_mobility, BandRole};
use coopsense_core::{Dataset, Hypothesis, Metrics, ReportMode, ScenarioConfig, SensingMatrix};
use proptest::prelude::*;

fn small_cfg() -> ScenarioConfig {
    ScenarioConfig { n_su: 6, n_bands: 5, n_ed: 16, ..Default::default() }
}

fn hd_matrix(n_su: usize, n_bands: usize) -> impl Strategy<Value = SensingMatrix> {
    prop::collection::vec(any::<bool>(), n_su * n_bands).prop_map(move |bits| {
        SensingMatrix::new(ReportMode::Hd, n_su, n_bands, bits.into_iter().map(|b| b as u8 as f64).collect()).unwrap()
    })
}

fn hd_dataset() -> impl Strategy<Value = Dataset> {
    prop::collection::vec((hd_matrix(4, 3), any::<bool>()), 2..40).prop_map(|rows| {
        let samples: Vec<LabeledSample> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (matrix, h1))| LabeledSample { matrix, label: Hypothesis::from_active(h1), snapshot_index: i as u64 })
            .collect();
        Dataset { scenario: ScenarioConfig::default(), mode: ReportMode::Hd, n_su: 4, n_bands: 3, samples }
    })
}

fn kon_error(ds: &Dataset, rule: &KonRule) -> f64 {
    evaluate(rule, ds).unwrap().sensing_error.unwrap()
}

struct Fixed(Vec<Hypothesis>, std::cell::Cell<usize>);

impl Detector for Fixed {
    fn decide(&self, _: &SensingMatrix) -> coopsense_core::Result<Hypothesis> {
        let i = self.1.get();
        self.1.set(i + 1);
        Ok(self.0[i])
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mobility_stays_in_the_area(seed in any::<u64>(), steps in 1usize..60, speed in 0.0f64..80.0) {
        let cfg = ScenarioConfig { velocity_mps: speed, ..small_cfg() };
        let mut topo = init_topology(&cfg, &mut stream(seed, Lineage::Topology, 0));
        for i in 0..steps {
            topo = step_mobility(&topo, &cfg, &mut stream(seed, Lineage::Snapshot, i as u64));
            prop_assert!(topo.contained_in(cfg.area_side_m));
        }
    }

    #[test]
    fn band_sets_partition_the_plan(seed in any::<u64>(), n_bands in 1usize..24) {
        let cfg = ScenarioConfig { n_bands, n_bp_max: n_bands.min(3), ..small_cfg() };
        prop_assert!(cfg.validate().is_ok());
        let pu = sample_pu_state(&cfg, &mut stream(seed, Lineage::Snapshot, 0));
        let mut seen = vec![0u8; n_bands];
        for b in pu.occupied_bands.iter().chain(&pu.adjacent_bands).chain(&pu.vacant_bands) {
            seen[*b] += 1;
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for b in 0..n_bands {
            let expected = if pu.occupied_bands.contains(&b) { BandRole::Occupied }
                else if pu.adjacent_bands.contains(&b) { BandRole::Adjacent } else { BandRole::Vacant };
            prop_assert_eq!(pu.role(b), expected);
        }
        prop_assert_eq!(pu.active, !pu.occupied_bands.is_empty());
    }

    #[test]
    fn same_seed_same_world(seed in any::<u64>()) {
        let cfg = small_cfg();
        let a = init_topology(&cfg, &mut stream(seed, Lineage::Topology, 0));
        let b = init_topology(&cfg, &mut stream(seed, Lineage::Topology, 0));
        prop_assert_eq!(&a, &b);
        let sa = sample_shadow_field(&a.su_positions, &cfg, &mut stream(seed, Lineage::Snapshot, 3)).unwrap();
        let sb = sample_shadow_field(&b.su_positions, &cfg, &mut stream(seed, Lineage::Snapshot, 3)).unwrap();
        prop_assert_eq!(sa, sb);
    }

    #[test]
    fn hard_decision_is_monotone(
        vals in prop::collection::vec(-130.0f64..-60.0, 12),
        bump in 0.0f64..20.0,
        at in 0usize..12,
        gamma in -120.0f64..-80.0,
    ) {
        let watts: Vec<f64> = vals.iter().map(|&d| coopsense_core::math::dbm_to_watts(d)).collect();
        let sd = SensingMatrix::new(ReportMode::Sd, 3, 4, watts.clone()).unwrap();
        let mut raised = watts;
        raised[at] *= coopsense_core::math::db_to_linear(bump);
        let sd2 = SensingMatrix::new(ReportMode::Sd, 3, 4, raised).unwrap();
        let (h1, h2) = (hard_decision(&sd, gamma).unwrap(), hard_decision(&sd2, gamma).unwrap());
        prop_assert!(h1.values.iter().zip(&h2.values).all(|(a, b)| a <= b));
        prop_assert!(hard_decision(&sd, f64::NEG_INFINITY).unwrap().values.iter().all(|&v| v == 1.0));
        prop_assert!(hard_decision(&sd, f64::INFINITY).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn kon_is_monotone_in_votes(m in hd_matrix(5, 4), at in 0usize..20, k in 0usize..6, total in any::<bool>()) {
        let statistic = if total { KonStatistic::TotalOnes } else { KonStatistic::MaxBandVotes };
        let rule = KonRule { k, statistic };
        let mut more = m.clone();
        more.values[at] = 1.0;
        if predict_kon(&rule, &m).unwrap() == Hypothesis::H1 {
            prop_assert_eq!(predict_kon(&rule, &more).unwrap(), Hypothesis::H1);
        }
        prop_assert!(kon_statistic(&more, statistic).unwrap() >= kon_statistic(&m, statistic).unwrap());
    }

    #[test]
    fn fit_kon_matches_exhaustive_scan(ds in hd_dataset()) {
        prop_assume!(ds.has_both_labels());
        for statistic in [KonStatistic::MaxBandVotes, KonStatistic::TotalOnes] {
            let fitted = fit_kon(&ds, statistic).unwrap();
            let max_k = if statistic == KonStatistic::MaxBandVotes { ds.n_su } else { ds.n_su * ds.n_bands };
            let errs: Vec<f64> = (0..=max_k).map(|k| kon_error(&ds, &KonRule { k, statistic })).collect();
            let best = errs.iter().cloned().fold(f64::INFINITY, f64::min);
            let first_best = errs.iter().position(|&e| e == best).unwrap();
            prop_assert_eq!(fitted.k, first_best);
        }
    }

    #[test]
    fn svm_sign_is_scale_invariant(
        w in prop::collection::vec(-2.0f64..2.0, 6),
        b in -2.0f64..2.0,
        scale in 1e-3f64..1e3,
        m in hd_matrix(2, 3),
    ) {
        let a = LinearSvmModel { weights: w.clone(), bias: b, lambda: 1e-2, mode: ReportMode::Hd, standardizer: None };
        let s = LinearSvmModel { weights: w.iter().map(|v| v * scale).collect(), bias: b * scale, ..a.clone() };
        let margin: f64 = b + w.iter().zip(&m.values).map(|(x, y)| x * y).sum::<f64>();
        prop_assume!(margin.abs() > 1e-9);
        prop_assert_eq!(predict_svm(&a, &m).unwrap(), predict_svm(&s, &m).unwrap());
    }

    #[test]
    fn metrics_double_entry(ds in hd_dataset(), decisions in prop::collection::vec(any::<bool>(), 40)) {
        let ds_len = ds.len();
        let d: Vec<Hypothesis> = decisions[..ds_len].iter().map(|&b| Hypothesis::from_active(b)).collect();
        let m = evaluate(&Fixed(d.clone(), Default::default()), &ds).unwrap();
        let raw = Metrics::from_decisions(ds.labels().zip(d.iter().copied()));
        prop_assert_eq!(m, raw);
        let fa = ds.labels().zip(&d).filter(|(t, p)| *t == Hypothesis::H0 && **p == Hypothesis::H1).count();
        let md = ds.labels().zip(&d).filter(|(t, p)| *t == Hypothesis::H1 && **p == Hypothesis::H0).count();
        let (n0, n1) = (ds.count(Hypothesis::H0), ds.count(Hypothesis::H1));
        prop_assert_eq!(m.p_fa, (n0 > 0).then(|| fa as f64 / n0 as f64));
        prop_assert_eq!(m.p_md, (n1 > 0).then(|| md as f64 / n1 as f64));
        if let (Some(a), Some(b)) = (m.p_fa, m.p_md) {
            prop_assert_eq!(m.sensing_error, Some(a + b));
        } else {
            prop_assert_eq!(m.sensing_error, None);
        }
    }

    #[test]
    fn network_output_is_finite_and_argmax_consistent(
        vals in prop::collection::vec(-1e3f64..1e3, 6 * 5),
        seed in any::<u64>(),
    ) {
        let arch = ArchConfig { n_conv_blocks: 2, conv_depths: vec![3, 2], fc_widths: (4, 3) };
        let model = build_model(&arch, (6, 5), &mut stream(seed, Lineage::Init, 0)).unwrap();
        let x = coopsense_core::neural::Tensor::from_vec(6, 5, 1, vals).unwrap();
        let out = model.forward(&x).unwrap();
        let logits = model.logits(&x).unwrap();
        prop_assert!(out.probs.iter().all(|p| p.is_finite()) && logits.iter().all(|l| l.is_finite()));
        let by_logit = if logits[0] > logits[1] { Hypothesis::H0 } else { Hypothesis::H1 };
        if (logits[0] - logits[1]).abs() > 1e-12 {
            prop_assert_eq!(out.decision, by_logit);
        }
    }

    #[test]
    fn prediction_uses_the_stored_permutation(
        vals in prop::collection::vec(-100.0f64..-60.0, 5 * 4),
        seed in any::<u64>(),
        perm_seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let arch = ArchConfig { n_conv_blocks: 1, conv_depths: vec![2], fc_widths: (3, 3) };
        let mut model = build_model(&arch, (5, 4), &mut stream(seed, Lineage::Init, 0)).unwrap();
        model.mode = ReportMode::Hd;
        let mut perm: Vec<usize> = (0..5).collect();
        perm.shuffle(&mut stream(perm_seed, Lineage::Permutation, 1));
        model.su_permutation = perm.clone();
        let bits: Vec<f64> = vals.iter().map(|v| if *v > -80.0 { 1.0 } else { 0.0 }).collect();
        let m = SensingMatrix::new(ReportMode::Hd, 5, 4, bits.clone()).unwrap();
        let mut permuted = Vec::new();
        for &r in &perm {
            permuted.extend_from_slice(&bits[r * 4..(r + 1) * 4]);
        }
        let x = coopsense_core::neural::Tensor::from_vec(5, 4, 1, permuted).unwrap();
        prop_assert_eq!(model.prepare_input(&m).unwrap(), x.clone());
        prop_assert_eq!(model.predict(&m).unwrap(), model.forward(&x).unwrap().decision);
    }
}

#[test]
fn labels_are_balanced() {
    let cfg = ScenarioConfig { n_su: 4, n_bands: 4, n_ed: 4, ..Default::default() };
    let n = 2000;
    let ds = generate_dataset(&cfg, n, ReportMode::Sd, 5).unwrap();
    let frac = ds.count(Hypothesis::H1) as f64 / n as f64;
    assert!((frac - 0.5).abs() <= 3.0 * 0.5 / (n as f64).sqrt(), "{frac}");
}

#[test]
fn train_and_eval_never_share_a_snapshot() {
    let (tr, ev) = generate_split(&small_cfg(), 30, 20, ReportMode::Sd, 8).unwrap();
    let max_train = tr.samples.iter().map(|s| s.snapshot_index).max().unwrap();
    assert!(ev.samples.iter().all(|s| s.snapshot_index > max_train));
    assert_eq!(ev.samples[0].snapshot_index, 30);
    // The eval set is the tail of the longer trajectory.
    let whole = generate_dataset(&small_cfg(), 50, ReportMode::Sd, 8).unwrap();
    assert_eq!(whole.samples[30..], ev.samples[..]);
}
