use hoci_core::estimate::{mi_estimate, EstimatorConfig, Method};
use hoci_core::gaussian::{self, GaussianEnsembleSpec};
use hoci_core::numeric::{self, logspace};
use hoci_core::sci::{self, verify_sci};
use hoci_core::{BisectionConfig, ChannelMatrix, HociError, SampleColumn};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

const N: usize = 100_000;

fn logdet() -> EstimatorConfig {
    EstimatorConfig::with_method(Method::GaussianLogdet)
}

#[test]
fn logdet_information_falls_monotonically_with_noise() {
    let mut r = numeric::rng(3);
    let x: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut r)).collect();
    let e: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut r)).collect();
    let xc = SampleColumn::new(x.clone()).unwrap();
    let mut prev = f64::INFINITY;
    for v in logspace(1e-3, 1e3, 40) {
        let t: Vec<f64> = x.iter().zip(&e).map(|(a, z)| a + v.sqrt() * z).collect();
        let mi = mi_estimate(&SampleColumn::new(t).unwrap(), &xc, &logdet()).unwrap().bits;
        assert!(mi < prev, "v={v}: {mi} !< {prev}");
        prev = mi;
    }
}

/// Three channels sharing a non-Gaussian common source plus independent Gaussian noise.
fn shared_source(kind: &str, seed: u64) -> ChannelMatrix {
    let mut r = numeric::rng(seed);
    let source: Vec<f64> = match kind {
        "uniform" => (0..N).map(|_| r.random_range(-1.7..1.7)).collect(),
        _ => {
            let lap = |r: &mut numeric::Rng| {
                let u: f64 = r.random_range(-0.5..0.5);
                -u.signum() * (1.0 - 2.0 * u.abs()).ln()
            };
            (0..N)
                .map(|_| if r.random_bool(0.5) { lap(&mut r) - 2.0 } else { 0.5 * lap(&mut r) + 1.0 })
                .collect()
        }
    };
    let noise = Normal::new(0.0, 1.0).unwrap();
    let data = (0..3)
        .map(|_| source.iter().map(|s| s + noise.sample(&mut r)).collect())
        .collect();
    ChannelMatrix::unnamed(data, None).unwrap()
}

#[test]
fn non_gaussian_scis_satisfy_the_dominance_check() {
    let bis = BisectionConfig::default();
    for kind in ["uniform", "laplace_mixture"] {
        for seed in 0..10 {
            let m = shared_source(kind, seed);
            let (d, t) = sci::build_sci(m.channel(0), m.channel(1), &logdet(), &bis, seed + 100).unwrap();
            assert!(d.residual < bis.epsilon);
            assert!(d.iterations <= 30, "{kind}/{seed}: {} iterations", d.iterations);
            let v = verify_sci(&t, &m, 0, 1, &logdet(), Some(0.02)).unwrap();
            assert!(v.passed, "{kind}/{seed}: {:?}", v.margins);
        }
    }
}

#[test]
fn construction_is_reproducible_for_a_seed() {
    let spec = GaussianEnsembleSpec::new(1.0, 1.0, 0.3, 3).unwrap();
    let m = gaussian::sample_ensemble(&spec, 20_000, 8).unwrap();
    let bis = BisectionConfig::default();
    let a = sci::build_sci(m.channel(0), m.channel(1), &logdet(), &bis, 77).unwrap();
    let b = sci::build_sci(m.channel(0), m.channel(1), &logdet(), &bis, 77).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    let c = sci::build_sci(m.channel(0), m.channel(1), &logdet(), &bis, 78).unwrap();
    assert_ne!(a.1, c.1);
}

#[test]
fn tuned_variance_tracks_the_analytic_value() {
    let bis = BisectionConfig::default();
    for (sn, rho) in [(0.5, 0.0), (1.0, 0.3), (5.0, 0.6)] {
        let spec = GaussianEnsembleSpec::new(1.0, sn, rho, 3).unwrap();
        let want = sci::analytic_sci_variance(&spec).unwrap();
        let m = gaussian::sample_ensemble(&spec, N, 21).unwrap();
        let (d, _) = sci::build_sci(m.channel(0), m.channel(1), &logdet(), &bis, 5).unwrap();
        assert!((d.noise_variance / want - 1.0).abs() < 0.10, "({sn},{rho}): {} vs {want}", d.noise_variance);
        assert!(d.iterations <= 30);
        assert_eq!((d.partner_channel, d.base_channel, d.order), (0, 1, 2));
    }
}

#[test]
fn second_stage_matches_the_matched_variance() {
    let spec = GaussianEnsembleSpec::new(1.0, 1.0, 0.0, 3).unwrap();
    let want = sci::analytic_matched_variance_stage2(&spec).unwrap();
    let bis = BisectionConfig::default();
    let m = gaussian::sample_ensemble(&spec, N, 4).unwrap();
    let (d1, t1) = sci::build_sci(m.channel(0), m.channel(1), &logdet(), &bis, 1).unwrap();
    let (d2, _) = sci::build_sci_higher((&d1, &t1), m.channel(2), &logdet(), &bis, 2).unwrap();
    assert_eq!(d2.order, 3);
    assert!((d2.noise_variance / want - 1.0).abs() < 0.15, "{} vs {want}", d2.noise_variance);
}

#[test]
fn independent_pair_reports_no_common_information() {
    let mut r = numeric::rng(12);
    let a: Vec<f64> = (0..5_000).map(|_| StandardNormal.sample(&mut r)).collect();
    let b: Vec<f64> = (0..5_000).map(|_| StandardNormal.sample(&mut r)).collect();
    let (a, b) = (SampleColumn::new(a).unwrap(), SampleColumn::new(b).unwrap());
    let bis = BisectionConfig { epsilon: 0.01, ..Default::default() };
    match sci::build_sci(&a, &b, &logdet(), &bis, 0) {
        Err(HociError::NoCommonInformation(_)) => {}
        other => panic!("expected NoCommonInformation, got {other:?}"),
    }
}
