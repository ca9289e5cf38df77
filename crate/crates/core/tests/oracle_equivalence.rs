use xychain::ed;
use xychain::engine::{pauli_expectation, subset_table_fresh};
use xychain::entanglement::{entropy_spaced, PurityTable};
use xychain::{majorana_covariance, Axis, ModelParams, PauliString};

const TOL: f64 = 1e-8;

fn params(n: usize, g: f64, l: f64) -> ModelParams {
    ModelParams::new(n, g, l).unwrap()
}

#[test]
fn ground_energy_matches_sector_solution() {
    for (n, g, l) in [(8, 1.0, 0.5), (7, 0.5, 1.3), (6, 0.3, 0.9), (9, 1.0, 1.0)] {
        let p = params(n, g, l);
        let gs = ed::solve(&p).unwrap();
        let cov = majorana_covariance(&p).unwrap();
        assert!(
            (gs.energy - cov.ground_energy()).abs() < 1e-10,
            "{n} {g} {l}: {} vs {}",
            gs.energy,
            cov.ground_energy()
        );
    }
}

#[test]
fn every_four_site_string_matches() {
    for (n, g, l) in [
        (8, 1.0, 0.5),
        (8, 0.5, 1.0),
        (7, 0.5, 0.25),
        (9, 1.0, 2.0),
        (6, 1.0, 1.5),
    ] {
        let p = params(n, g, l);
        let gs = ed::solve(&p).unwrap();
        let cov = majorana_covariance(&p).unwrap();
        for sites in [
            vec![0, 2, 3, 6],
            vec![0, 1, 2, 3],
            vec![1, 3, 4, 5],
            vec![0, n - 1],
            vec![0, 3, 5],
        ] {
            if sites.iter().any(|&s| s >= n) {
                continue;
            }
            let table = subset_table_fresh(&sites, &cov).unwrap();
            for code in 0..table.values.len() {
                let s = table.string(code);
                let want = ed::expectation_ed(&gs.state, &s).unwrap();
                assert!(
                    (table.values[code] - want).abs() < TOL,
                    "{n} {g} {l} {s}: {} vs {want}",
                    table.values[code]
                );
                let direct = pauli_expectation(&s, &cov).unwrap();
                assert!((direct - want).abs() < TOL, "{s}: direct {direct} vs {want}");
            }
        }
    }
}

#[test]
fn z_magnetization_at_strong_field() {
    let p = params(8, 1.0, 2.0);
    let gs = ed::solve(&p).unwrap();
    let cov = majorana_covariance(&p).unwrap();
    let z = PauliString::single(0, Axis::Z);
    assert!((pauli_expectation(&z, &cov).unwrap() - ed::expectation_ed(&gs.state, &z).unwrap()).abs() < 1e-10);
}

#[test]
fn tangles_and_entropy_match() {
    for (n, g, l) in [(8, 1.0, 0.5), (8, 0.5, 1.0), (10, 1.0, 1.0), (6, 0.5, 2.0)] {
        let p = params(n, g, l);
        let gs = ed::solve(&p).unwrap();
        let table = PurityTable::compute(&p, 4, None).unwrap();
        for k in 1..=4 {
            let ours = table.tangle(k).value;
            let want = ed::tangle_ed(&gs.state, k).unwrap();
            assert!((ours - want).abs() < TOL, "T_{k} at {n} {g} {l}: {ours} vs {want}");
        }
        for spacing in 1..=n / 4 {
            let ours = entropy_spaced(spacing, &p).unwrap().value;
            let want = ed::entropy_spaced_ed(&gs.state, spacing).unwrap();
            assert!((ours - want).abs() < TOL);
        }
    }
}

#[test]
fn noise_observables_match() {
    use xychain::noise::{hcb_four_point, hcb_two_point, quasimomentum_from, zero_mode_noise_with};
    for (n, g, l) in [(8, 1.0, 0.5), (8, 0.5, 1.0), (7, 1.0, 1.5)] {
        let p = params(n, g, l);
        let gs = ed::solve(&p).unwrap();
        let cov = majorana_covariance(&p).unwrap();
        let nq = quasimomentum_from(&cov).unwrap();
        for (ours, want) in nq.iter().zip(ed::quasimomentum_ed(&gs.state)) {
            assert!((ours - want).abs() < TOL);
        }
        let z = zero_mode_noise_with(&cov).unwrap();
        assert!((z.delta00 - ed::noise_correlation_ed(&gs.state, 0, 0)).abs() < TOL);
        assert!((hcb_two_point(0, 3, &cov).unwrap() - ed::hcb_two_point_ed(&gs.state, 0, 3)).abs() < TOL);
    }
    let p = params(8, 0.5, 1.0);
    let gs = ed::solve(&p).unwrap();
    let cov = majorana_covariance(&p).unwrap();
    for a in 0..8 {
        for b in 0..8 {
            for c in 0..8 {
                for d in [0, 2, 5] {
                    let ours = hcb_four_point(a, b, c, d, &cov).unwrap();
                    let want = ed::hcb_four_point_ed(&gs.state, a, b, c, d);
                    assert!((ours - want).norm() < TOL, "({a},{b},{c},{d}) {ours} vs {want}");
                }
            }
        }
    }
}
