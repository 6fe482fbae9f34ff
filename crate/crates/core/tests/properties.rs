use proptest::prelude::*;
use sobi_eeg::bss::{sobi, sobi_with, Method, SobiOptions, DEFAULT_LAGS};
use sobi_eeg::features::{band_power, Band};
use sobi_eeg::linalg::Matrix;
use sobi_eeg::recording::Recording;
use sobi_eeg::synth::rng::XorShift64;
use sobi_eeg::synth::{generate_sources, mix_sources, random_mixing, SourceKind, SourceSpec};

fn mixture(seed: u64, channels: usize) -> Recording {
    let specs = vec![
        SourceSpec::rhythm(SourceKind::MuRhythm, 9.0, 1.0),
        SourceSpec::rhythm(SourceKind::BetaRhythm, 22.0, 0.7),
        SourceSpec::noise(0.8),
        SourceSpec::powerline(50.0, 0.5),
    ];
    let s = generate_sources(&specs, 12.0, 250.0, &[], seed).unwrap();
    let mut rng = XorShift64::new(seed ^ 0xF00D);
    let a = random_mixing(channels, 4, 50.0, &mut rng);
    mix_sources(&s, &a, 250.0).unwrap()
}

fn max_abs(m: &Matrix) -> f64 {
    m.as_slice().iter().fold(0.0, |a, b| a.max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unmixing_inverts_the_mixing_estimate(seed in 0u64..1000, channels in 4usize..8, schur in any::<bool>()) {
        let method = if schur { Method::Schur } else { Method::Jacobi };
        let res = sobi(&mixture(seed, channels), &DEFAULT_LAGS, method, 1e-10).unwrap();
        prop_assert_eq!(res.components(), 4);
        let prod = res.unmixing.matmul(&res.mixing_estimate);
        let dev = prod.as_slice().iter().enumerate()
            .map(|(k, v)| (v - if k / 4 == k % 4 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        prop_assert!(dev < 1e-8, "W·A deviates from I by {}", dev);
    }

    #[test]
    fn sources_are_white_and_reconstruct_the_data(seed in 0u64..1000, channels in 4usize..8) {
        let rec = mixture(seed, channels);
        let res = sobi(&rec, &DEFAULT_LAGS, Method::Schur, 1e-8).unwrap();
        let t = rec.samples() as f64;
        for i in 0..4 {
            for j in 0..4 {
                let c = res.sources.row(i).iter().zip(res.sources.row(j)).map(|(a, b)| a * b).sum::<f64>() / t;
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((c - want).abs() < 1e-8, "cov[{}][{}] = {}", i, j, c);
            }
        }
        let mut back = res.mixing_estimate.matmul(&res.sources);
        for (i, m) in res.means.iter().enumerate() {
            back.row_mut(i).iter_mut().for_each(|v| *v += m);
        }
        let scale = max_abs(rec.data());
        let err = back.as_slice().iter().zip(rec.data().as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8 * scale, "reconstruction error {}", err);
    }

    #[test]
    fn jacobi_and_schur_find_the_same_sources(seed in 0u64..1000) {
        let rec = mixture(seed, 6);
        let a = sobi(&rec, &DEFAULT_LAGS, Method::Jacobi, 1e-10).unwrap();
        let b = sobi(&rec, &DEFAULT_LAGS, Method::Schur, 1e-10).unwrap();
        let t = rec.samples() as f64;
        for i in 0..4 {
            let best = (0..4)
                .map(|j| (a.sources.row(i).iter().zip(b.sources.row(j)).map(|(x, y)| x * y).sum::<f64>() / t).abs())
                .fold(0.0, f64::max);
            prop_assert!(best > 0.99, "component {} best correlation {}", i, best);
        }
    }

    #[test]
    fn band_powers_partition_the_mean_square(seed in 0u64..10_000, n in 64usize..2000) {
        let mut rng = XorShift64::new(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
        let fs = 100.0;
        let mean_sq = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        // Split strictly between bins.
        let res = fs / n as f64;
        let split = ((17.3 / res).floor() + 0.5) * res;
        let low = band_power(&x, &Band::new("a", 0.0, split), fs).unwrap();
        let high = band_power(&x, &Band::new("b", split, fs / 2.0), fs).unwrap();
        prop_assert!(((low + high) - mean_sq).abs() <= 1e-9 * mean_sq);
    }
}

#[test]
fn explicit_weights_are_honored_and_validated() {
    let rec = mixture(3, 5);
    let mut opts = SobiOptions::new(Method::Schur);
    opts.weights = Some(vec![0.1; DEFAULT_LAGS.len()]);
    let uniform = sobi_with(&rec, &opts).unwrap();
    let default = sobi_with(&rec, &SobiOptions::new(Method::Schur)).unwrap();
    // Uniform weights are the default combination up to scale.
    let diff = uniform
        .unmixing
        .as_slice()
        .iter()
        .zip(default.unmixing.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-9, "{diff}");

    opts.weights = Some(vec![1.0; 3]);
    assert!(sobi_with(&rec, &opts).is_err());
}
