use lfpp_core::experiments::{
    annulus_event_stats, continuity_bound, convergence_diagnostic, field_continuity_check, field_sup_bound_check,
    gmc_mass, index_trend, localized_gap, random_pairs, run_named, scale_covariance_test, small_segment_sup,
    weyl_shift_test, AnnulusEventOptions, ExperimentReport, Verdict,
};
use lfpp_core::gff::{sample_torus_gff, FieldSample, Params};
use lfpp_core::renorm::{EstimateCache, MCConfig};
use lfpp_core::{LatticeSpec, Point};

fn unit() -> (Point, Point) {
    (Point::new(0.0, 0.0), Point::new(1.0, 1.0))
}

fn col(rep: &ExperimentReport, name: &str) -> Vec<f64> {
    rep.column(name).unwrap()
}

#[test]
fn weyl_constant_shift_is_exact() {
    let spec = LatticeSpec::auto(128).unwrap();
    let h = sample_torus_gff(&spec, 4).unwrap();
    let pairs = random_pairs(1, 20, unit().0, unit().1, None);
    let p = Params::new(0.2).unwrap();

    let rep = weyl_shift_test(&h, 0.0625, |_| 0.0, (0.0, 0.0), &pairs, &p).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert!(col(&rep, "ratio").iter().all(|r| *r == 1.0));

    let rep = weyl_shift_test(&h, 0.0625, |_| 1.0, (1.0, 1.0), &pairs, &p).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    let target = 0.2f64.exp();
    assert!(col(&rep, "ratio").iter().all(|r| (r / target - 1.0).abs() < 1e-10));
}

#[test]
fn weyl_bounded_shift_is_sandwiched() {
    let spec = LatticeSpec::auto(128).unwrap();
    let h = sample_torus_gff(&spec, 4).unwrap();
    let pairs = random_pairs(2, 20, unit().0, unit().1, None);
    let xi = 0.2;
    let f = |p: Point| 0.1 * (6.0 * p.x).sin() * (5.0 * p.y).cos();
    let rep = weyl_shift_test(&h, 0.0625, f, (-0.1, 0.1), &pairs, &Params::new(xi).unwrap()).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    for r in col(&rep, "ratio") {
        assert!(r >= (-0.1 * xi).exp() * (1.0 - 1e-12) && r <= (0.1 * xi).exp() * (1.0 + 1e-12));
    }
}

#[test]
fn scale_covariance_identity_and_zero_coupling() {
    let spec = LatticeSpec::auto(128).unwrap();
    let mc = MCConfig::new(20, 3, spec);
    let pair = (Point::new(0.25, 0.25), Point::new(0.5, 0.5));
    let cache = EstimateCache::new();

    let rep = scale_covariance_test(1.0, 0.125, &Params::new(0.2).unwrap(), &mc, 2.5, pair, &cache).unwrap();
    assert_eq!(rep.verdict, Verdict::Informational);
    for (l, r) in col(&rep, "lhs").iter().zip(col(&rep, "rhs")) {
        assert_eq!(l.to_bits(), r.to_bits());
    }

    let rep = scale_covariance_test(2.0, 0.125, &Params::new(1e-9).unwrap(), &mc, 2.5, pair, &cache).unwrap();
    let (ml, mr) = (rep.metadata["median_lhs"].as_f64().unwrap(), rep.metadata["median_rhs"].as_f64().unwrap());
    assert!((ml - mr).abs() < 1e-6, "{ml} vs {mr}");
}

#[test]
fn localized_gap_vanishes_on_constants() {
    let spec = LatticeSpec::auto(128).unwrap();
    let h = FieldSample::constant(spec, 0.7);
    let rep = localized_gap(&h, &[0.125, 0.0625], unit(), &Params::new(0.2).unwrap(), 10, 1).unwrap();
    assert!(col(&rep, "sup_gap").iter().all(|g| *g < 1e-12));
    let h = FieldSample::constant(spec, 0.0);
    let rep = localized_gap(&h, &[0.125, 0.0625], unit(), &Params::new(0.2).unwrap(), 10, 1).unwrap();
    assert!(col(&rep, "sup_gap").iter().all(|g| *g == 0.0));
    assert_eq!(rep.verdict, Verdict::Pass);
}

#[test]
fn convergence_degenerates_to_lattice_euclidean() {
    let spec = LatticeSpec::auto(256).unwrap();
    let mc = MCConfig::new(20, 5, spec);
    let pairs = [
        (Point::new(0.25, 0.25), Point::new(0.75, 0.25)),
        (Point::new(0.25, 0.25), Point::new(0.5, 0.5)),
        (Point::new(0.5, 0.0), Point::new(0.5, 1.0)),
    ];
    let eps = [0.25, 0.125, 0.0625, 0.03125];
    let window = (Point::new(-0.25, -0.25), Point::new(1.25, 1.25));
    let rep = convergence_diagnostic(9, &pairs, &eps, window, &Params::new(1e-9).unwrap(), &mc, &EstimateCache::new())
        .unwrap();
    let values = col(&rep, "normalized_distance");
    for (i, v) in values.iter().enumerate() {
        let (z, w) = pairs[i % pairs.len()];
        assert!((v - z.dist(&w)).abs() < 1e-6, "{v} vs {}", z.dist(&w));
    }
    assert!(col(&rep, "abs_diff_from_previous").iter().skip(pairs.len()).all(|d| *d < 1e-6));
    assert!(convergence_diagnostic(
        9,
        &pairs,
        &eps[..3],
        window,
        &Params::new(0.2).unwrap(),
        &mc,
        &EstimateCache::new()
    )
    .is_err());
}

#[test]
fn annulus_events_are_deterministic_for_constant_fields() {
    let spec = LatticeSpec::auto(256).unwrap();
    let mc = MCConfig::new(3, 1, spec);
    let opts = |c: f64| AnnulusEventOptions {
        center: Point::new(0.5, 0.5),
        proxy_epsilon: 0.03125,
        normalization: None,
        constant_field: Some(c),
    };
    let p = Params::new(0.2).unwrap();
    let rep = annulus_event_stats(0.0625, &[0.5], 0.9, &p, &mc, &opts(0.4)).unwrap();
    assert_eq!(rep.verdict, Verdict::Informational);
    let r3 = col(&rep, "ratio3_eps");
    assert!(r3.iter().all(|r| r.to_bits() == r3[0].to_bits()));
    assert!(r3[0] > 1.0);
    let q = &rep.metadata["quantiles"][0]["ratio3_eps_q50_q90_q99"];
    assert_eq!(q[0], q[2]);

    let zero = annulus_event_stats(0.0625, &[0.5], 0.9, &p, &mc, &opts(0.0)).unwrap();
    let again = annulus_event_stats(0.0625, &[0.5], 0.9, &p, &mc, &opts(0.0)).unwrap();
    assert_eq!(
        zero.rows.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>(),
        again.rows.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
    // a constant field only rescales, so the proxy and the fine metric agree up to the constant
    assert!(col(&zero, "ratio1").iter().all(|r| (r - 1.0).abs() < 1e-12));
    assert!(annulus_event_stats(0.0625, &[0.5], 0.8, &p, &mc, &opts(0.0)).is_err());
}

#[test]
fn annulus_events_on_sampled_fields() {
    let spec = LatticeSpec::auto(256).unwrap();
    let mc = MCConfig::new(4, 2, spec);
    let opts = AnnulusEventOptions {
        center: Point::new(0.5, 0.5),
        proxy_epsilon: 0.03125,
        normalization: Some((1.1, 0.9)),
        constant_field: None,
    };
    let rep = annulus_event_stats(0.0625, &[0.5], 0.9, &Params::new(0.2).unwrap(), &mc, &opts).unwrap();
    assert_eq!(rep.rows.len(), 4);
    assert!(rep.rows.iter().flatten().all(|v| v.is_finite()));
    assert!(col(&rep, "ratio3_proxy").iter().all(|r| *r > 0.0));
}

#[test]
fn gmc_mass_controls() {
    let spec = LatticeSpec::auto(256).unwrap();
    let eps = [0.25, 0.125, 0.0625, 0.03125];
    let h = sample_torus_gff(&spec, 8).unwrap();
    let rep = gmc_mass(&h, 1e-9, &eps, unit()).unwrap();
    assert!(col(&rep, "mass").iter().all(|m| (m - 1.0).abs() < 1e-6));

    let c = 0.3;
    let h = FieldSample::constant(spec, c);
    let rep = gmc_mass(&h, 1.0, &eps, unit()).unwrap();
    for (e, m) in eps.iter().zip(col(&rep, "mass")) {
        let closed = e.powf(0.5) * c.exp();
        assert!((m / closed - 1.0).abs() < 1e-12, "{m} vs {closed}");
    }
    assert!(gmc_mass(&h, 1.0, &[0.25, 0.125, 0.07], unit()).is_err());
}

#[test]
fn continuity_bound_shape() {
    let b = |a: f64, n: u32| continuity_bound(a, n);
    assert!((b(1.0, 4) - 5f64.ln() * 0.25).abs() < 1e-15);
    // the bound is roughly quadratic in a for large n
    let r = b(2.0, 1000) / b(1.0, 1000);
    assert!((r - 4.0).abs() < 0.01, "{r}");
}

#[test]
fn continuity_constant_field_has_zero_constant() {
    let spec = LatticeSpec::auto(256).unwrap();
    let h = FieldSample::constant(spec, 0.0);
    let rep = field_continuity_check(&h, 1.0, &[4, 5, 6], unit()).unwrap();
    assert_eq!(rep.metadata["fitted_c"].as_f64().unwrap(), 0.0);
    let h = FieldSample::constant(spec, 1.3);
    let rep = field_continuity_check(&h, 1.0, &[4, 5, 6], unit()).unwrap();
    assert!(rep.metadata["fitted_c"].as_f64().unwrap() < 1e-10);
    assert_eq!(rep.verdict, Verdict::Pass);
}

#[test]
fn continuity_gaps_on_a_sampled_field() {
    let spec = LatticeSpec::centered(1024, 1.0 / 512.0).unwrap();
    let h = sample_torus_gff(&spec, 21).unwrap();
    let window = (Point::new(0.4, 0.4), Point::new(0.6, 0.6));
    let ladder: Vec<u32> = (4..=12).collect();
    let two = field_continuity_check(&h, 2.0, &ladder, window).unwrap();
    let one = field_continuity_check(&h, 1.0, &ladder, window).unwrap();
    assert_eq!(two.verdict, Verdict::Pass);
    let gap = |r: &ExperimentReport| -> Vec<f64> {
        col(r, "gap").iter().zip(col(r, "gap_localized")).map(|(a, b)| a.max(b)).collect()
    };
    assert!(index_trend(&gap(&two)).unwrap().significantly_decreasing(), "{:?}", gap(&two));
    let (g1, g2) = (gap(&one), gap(&two));
    let (b1, b2) = (col(&one, "bound"), col(&two, "bound"));
    for i in 0..ladder.len() {
        let measured = g2[i] / g1[i];
        let predicted = b2[i] / b1[i];
        assert!(measured / predicted < 3.0 && predicted / measured < 3.0, "n {}: {measured} vs {predicted}", ladder[i]);
    }
}

#[test]
fn sup_bound_closed_form_on_constants() {
    let spec = LatticeSpec::auto(128).unwrap();
    let c = -0.8;
    let eps = [0.25, 0.125, 0.0625];
    let rep = field_sup_bound_check(&FieldSample::constant(spec, c), &eps, 0.1, unit()).unwrap();
    for s in col(&rep, "sup").iter().chain(col(&rep, "sup_localized").iter()) {
        assert!((s - c.abs()).abs() < 1e-12);
    }
    let expect = c.abs() - 1.1 * 2.1 * 4f64.ln();
    assert!((rep.metadata["fitted_c"].as_f64().unwrap() - expect).abs() < 1e-12);
    assert_eq!(rep.verdict, Verdict::Pass);
}

#[test]
fn sup_bound_is_stable_and_localized_sup_tracks_the_gap() {
    let spec = LatticeSpec::auto(1024).unwrap();
    let eps = [0.125, 0.0625, 0.03125, 0.015625, 0.0078125];
    let window = (Point::new(0.3, 0.3), Point::new(0.7, 0.7));
    let mut fitted = Vec::new();
    for seed in [1, 2] {
        let h = sample_torus_gff(&spec, seed).unwrap();
        let rep = field_sup_bound_check(&h, &eps, 0.1, window).unwrap();
        fitted.push(rep.metadata["fitted_c"].as_f64().unwrap());
        if seed == 1 {
            let gaps = localized_gap(&h, &eps, window, &Params::new(0.2).unwrap(), 2, 1).unwrap();
            for ((a, b), g) in col(&rep, "sup").iter().zip(col(&rep, "sup_localized")).zip(col(&gaps, "sup_gap")) {
                assert!((a - b).abs() <= g + 1e-12);
            }
        }
    }
    let (a, b) = (fitted[0], fitted[1]);
    assert!((a - b).abs() <= 0.5 * a.abs().max(b.abs()), "{fitted:?}");
}

#[test]
fn small_segments_shrink_under_vanishing_coupling() {
    let spec = LatticeSpec::auto(512).unwrap();
    let h = sample_torus_gff(&spec, 6).unwrap();
    let p = Params::new(1e-9).unwrap();
    let eps = [0.125, 0.0625, 0.03125, 0.015625];
    let a_hat = EstimateCache::new().ladder(&eps, &p, &MCConfig::new(20, 1, spec)).unwrap();
    let rep = small_segment_sup(&h, &eps, 0.25, unit(), &p, &a_hat, 30, 3).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    let v = col(&rep, "max_normalized_distance");
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
    for (x, s) in v.iter().zip(col(&rep, "separation_bound")) {
        assert!(*x <= s * 1.09 + 2.0 * spec.spacing());
    }
}

#[test]
fn small_segments_obey_the_straight_path_bound() {
    let spec = LatticeSpec::auto(256).unwrap();
    let h = sample_torus_gff(&spec, 6).unwrap();
    let p = Params::new(0.2).unwrap();
    let eps = [0.125, 0.0625, 0.03125];
    let a_hat = EstimateCache::new().ladder(&eps, &p, &MCConfig::new(20, 1, spec)).unwrap();
    let zeta = 0.01;
    let rep = small_segment_sup(&h, &eps, zeta, unit(), &p, &a_hat, 30, 3).unwrap();
    let window = spec.rect_sites(unit().0, unit().1).unwrap();
    for (k, &e) in eps.iter().enumerate() {
        let m = lfpp_core::gff::mollify_localized_window(&h, e, window).unwrap();
        let max_w = (p.xi * window.sites().map(|s| m.at(s)).fold(f64::NEG_INFINITY, f64::max)).exp();
        let sep = col(&rep, "separation_bound")[k];
        let bound = max_w * (sep * 1.09 + 2.0 * spec.spacing()) / a_hat[k].median;
        assert!(col(&rep, "max_normalized_distance")[k] <= bound);
    }
}

#[test]
fn named_runs_reproduce_rows_bitwise() {
    let cfg = serde_json::json!({
        "mc": {"n": 256, "trials": 3, "seed": 4},
        "r_set": [0.5],
        "epsilon": 0.0625,
    });
    let a = run_named("annulus_events", cfg.clone()).unwrap();
    let b = run_named("annulus_events", cfg).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(serde_json::to_string(&a.rows).unwrap(), serde_json::to_string(&b.rows).unwrap());
    assert_eq!(a.params["config"]["alpha"], 0.9);
}
