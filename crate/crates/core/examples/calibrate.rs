// Temporary calibration harness (removed before release).
use mpr_core::experiments::measure_and_accumulate;
use mpr_core::model::{make_ensemble, MatrixKind, NoiseConfig};
use mpr_core::seeding::derive_seed;
use mpr_core::spectral::{count_spikes, decoupled_null_edge, eig_hermitian, SpikeRule};

const OFFSETS: [f64; 5] = [3.0, 3.5, 4.0, 4.5, 5.0];

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(|s| s.as_str()).unwrap_or("signal");
    let d = 200usize;

    match mode {
        "signal" => {
            let n = 50 * d;
            let weights = [5.0 / 12.0, 4.0 / 12.0, 3.0 / 12.0];
            let mut census_ok = [0usize; 5];
            for seed in 0..10u64 {
                let e = make_ensemble::<f64>(d, &weights, derive_seed(seed, &[1]), true).unwrap();
                let wcm = measure_and_accumulate(
                    e.signals(),
                    e.weights(),
                    MatrixKind::ComplexGaussian,
                    n,
                    d,
                    derive_seed(seed, &[2]),
                    &NoiseConfig::none(),
                )
                .unwrap();
                let res = eig_hermitian(&wcm, None).unwrap();
                let ev = &res.eigenvalues;
                let edge = decoupled_null_edge(d, &wcm.spike_context()).unwrap();
                println!(
                    "seed {seed}: top4 = {:.4} {:.4} {:.4} {:.4} | bulk_med {:.4} | null_max {:.4} | dev: {:.4} {:.4} {:.4}",
                    ev[0], ev[1], ev[2], ev[3], ev[d / 2], edge,
                    (ev[0] - (1.0 + weights[0])).abs(),
                    (ev[1] - (1.0 + weights[1])).abs(),
                    (ev[2] - (1.0 + weights[2])).abs(),
                );
                for (mi, t) in OFFSETS.iter().enumerate() {
                    let k = count_spikes(
                        ev,
                        &SpikeRule::NullEdge { offset: *t },
                        Some(&wcm.spike_context()),
                    );
                    if k == 3 {
                        census_ok[mi] += 1;
                    }
                }
            }
            println!("NullEdge offset -> #seeds with K=3 out of 10:");
            for (t, ok) in OFFSETS.iter().zip(census_ok) {
                println!("  offset {t}: {ok}/10");
            }
        }
        "null" => {
            let n = 50 * d;
            let mut zero_ok = [0usize; 5];
            let trials = 100u64;
            for seed in 0..trials {
                let wcm = unit_wcm(d, n, seed);
                let res = eig_hermitian(&wcm, None).unwrap();
                for (mi, t) in OFFSETS.iter().enumerate() {
                    let k = count_spikes(
                        &res.eigenvalues,
                        &SpikeRule::NullEdge { offset: *t },
                        Some(&wcm.spike_context()),
                    );
                    if k == 0 {
                        zero_ok[mi] += 1;
                    }
                }
            }
            println!("null case (y=1), {trials} seeds:");
            for (t, ok) in OFFSETS.iter().zip(zero_ok) {
                println!("  NullEdge offset {t}: K=0 in {ok}/{trials}");
            }
        }
        "below" => {
            let n = d / 2;
            let weights = [5.0 / 12.0, 4.0 / 12.0, 3.0 / 12.0];
            let mut zero_ok = [0usize; 5];
            for seed in 0..20u64 {
                let e = make_ensemble::<f64>(d, &weights, derive_seed(seed, &[1]), true).unwrap();
                let wcm = measure_and_accumulate(
                    e.signals(),
                    e.weights(),
                    MatrixKind::ComplexGaussian,
                    n,
                    d,
                    derive_seed(seed, &[2]),
                    &NoiseConfig::none(),
                )
                .unwrap();
                let res = eig_hermitian(&wcm, None).unwrap();
                for (mi, t) in OFFSETS.iter().enumerate() {
                    let k = count_spikes(
                        &res.eigenvalues,
                        &SpikeRule::NullEdge { offset: *t },
                        Some(&wcm.spike_context()),
                    );
                    if k == 0 {
                        zero_ok[mi] += 1;
                    }
                }
            }
            println!("below transition (alpha=0.5), 20 seeds:");
            for (t, ok) in OFFSETS.iter().zip(zero_ok) {
                println!("  NullEdge offset {t}: K=0 in {ok}/20");
            }
        }
        "figure" => {
            // d=1000 flagship check (slow)
            let d = 1000usize;
            let n = 50 * d;
            let weights = [5.0 / 12.0, 4.0 / 12.0, 3.0 / 12.0];
            let e = make_ensemble::<f64>(d, &weights, 1, true).unwrap();
            let wcm = measure_and_accumulate(
                e.signals(),
                e.weights(),
                MatrixKind::ComplexGaussian,
                n,
                d,
                2,
                &NoiseConfig::none(),
            )
            .unwrap();
            let res = mpr_core::spectral::recover(&wcm, None).unwrap();
            let ev = &res.eigenvalues;
            println!(
                "d=1000 a=50: top4 {:.4} {:.4} {:.4} {:.4} | census {:?} | med {:.4}",
                ev[0], ev[1], ev[2], ev[3], res.spike_count, ev[d / 2]
            );
            let rep = mpr_core::metrics::match_and_score(&res.estimates, &e).unwrap();
            println!("rho {:?}", rep.rho);
        }
        other => eprintln!("unknown mode {other}"),
    }
}

fn unit_wcm(d: usize, n: usize, seed: u64) -> mpr_core::spectral::WeightedCovarianceMatrix<f64> {
    use mpr_core::model::make_sampling_matrix;
    use mpr_core::spectral::build_wcm;
    let a = make_sampling_matrix::<f64>(MatrixKind::ComplexGaussian, n, d, seed).unwrap();
    let values = vec![1.0; n];
    let m = mpr_core::model::MeasurementSet::new(values, false, NoiseConfig::none(), 0, 0).unwrap();
    build_wcm(&m, &a).unwrap()
}
