use logfield::ensemble::{read_ensemble, write_ensemble};
use logfield::partition::{estimate_exp_potential, EstimateReport, ExpEstimate, MassCutoff, Potential};
use logfield::rng::substream;
use logfield::wick::{potential_rn, wick_mass};
use logfield::{integrate, sample, Execution, GaussLaw, Lattice, LatticeSpec, Reality, SpectralField};
use proptest::prelude::*;

fn fields(d: usize, n: usize, count: u64, reality: Reality) -> Vec<SpectralField> {
    let lat = Lattice::new(LatticeSpec::new(d, n).unwrap());
    let law = GaussLaw::log_correlated(reality);
    (0..count).map(|i| sample(&law, &lat, &mut substream(9, i)).unwrap()).collect()
}

#[test]
fn ensemble_file_round_trip() {
    for (d, reality) in [(1, Reality::Real), (2, Reality::Real), (2, Reality::Complex)] {
        let original = fields(d, 6, 4, reality);
        let mut file = tempfile::tempfile().unwrap();
        write_ensemble(&mut file, &original).unwrap();
        use std::io::Seek;
        file.rewind().unwrap();
        let back = read_ensemble(&file).unwrap();
        assert_eq!(back.len(), original.len());
        for (a, b) in back.iter().zip(&original) {
            assert_eq!(a.coeffs(), b.coeffs());
            assert_eq!(a.lattice().spec(), b.lattice().spec());
        }
    }
}

#[test]
fn truncated_file_is_rejected() {
    let mut buf = Vec::new();
    write_ensemble(&mut buf, &fields(2, 4, 2, Reality::Real)).unwrap();
    buf.truncate(buf.len() - 5);
    assert!(read_ensemble(buf.as_slice()).is_err());
}

#[test]
fn estimate_is_execution_independent_and_serializes() {
    let cfg = ExpEstimate {
        law: GaussLaw::log_correlated(Reality::Real),
        dim: 2,
        cutoff_n: 8,
        potential: Potential::Quartic { coupling: 1.0, order: 4 },
        ceiling: Some(20.0),
        cutoff: Some(MassCutoff::absolute(1.0)),
        samples: 400,
        seed: 12,
    };
    let seq = estimate_exp_potential(&cfg, Execution::Sequential).unwrap();
    let par = estimate_exp_potential(&cfg, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    let json = serde_json::to_string(&seq).unwrap();
    let back: EstimateReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, seq);
    assert!(json.contains("\"N\":8"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wick_mass_matches_grid(seed in 0u64..1000, n in 2usize..10) {
        let lat = Lattice::new(LatticeSpec::new(2, n).unwrap());
        let u = sample(&GaussLaw::log_correlated(Reality::Real), &lat, &mut substream(seed, 0)).unwrap();
        let grid = integrate(&u.to_grid().unwrap().map(|v| v * v)) - lat.sigma();
        prop_assert!((wick_mass(&u) - grid).abs() < 1e-9 * grid.abs().max(1.0));
    }

    #[test]
    fn potential_is_linear_in_coupling(seed in 0u64..1000, c in -3.0f64..3.0) {
        let lat = Lattice::new(LatticeSpec::new(1, 8).unwrap());
        let u = sample(&GaussLaw::log_correlated(Reality::Real), &lat, &mut substream(seed, 1)).unwrap();
        let one = potential_rn(&u, 1.0, 4).unwrap();
        let scaled = potential_rn(&u, c, 4).unwrap();
        prop_assert!((scaled - c * one).abs() < 1e-9 * one.abs().max(1.0));
    }
}
