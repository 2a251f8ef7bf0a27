use num::BigRational;
use rg_spectra::coeff::{norm_r, norm_r_star, ti_norm0, CoefficientVector, LatticeTag};
use rg_spectra::kernel::KernelSpec;
use rg_spectra::lattice::{Geometry, SiteSet};
use rg_spectra::rg_linear::{Direction, LinearOperator};
use rg_spectra::scalar::{int, ratio, Complex64};
use rg_spectra::spectral::*;
use rg_spectra::Error;

fn set1(c: &[i64]) -> SiteSet {
    SiteSet::from_coords(c.iter().map(|&x| vec![x]))
}

fn maj31() -> KernelSpec {
    KernelSpec::majority(1, 3).unwrap()
}

fn dec31() -> KernelSpec {
    KernelSpec::decimation(1, 3).unwrap()
}

#[test]
fn decimation_chain_entries_and_exact_residual() {
    let geom = Geometry::new(1, 3).unwrap();
    let k = decimation_eigenvector(&ratio(1, 2), 8, &geom).unwrap();
    for n in 0..=8u32 {
        assert_eq!(k.vector().get(&set1(&[3i64.pow(n)])), ratio(1, 1 << n));
    }
    assert_eq!(k.vector().len(), 9);
    let checks = k.default_check_sets();
    assert!(checks.contains(&set1(&[2187])));
    assert_eq!(eigen_residual(&k, &ratio(1, 2), &checks).unwrap(), 0.0);
    assert_eq!(norm_r(k.vector(), 0.7).unwrap(), 1.0);
}

#[test]
fn decimation_zero_eigenvalue_is_a_single_delta() {
    let geom = Geometry::new(2, 2).unwrap();
    let k = decimation_eigenvector(&int(0), 5, &geom).unwrap();
    assert_eq!(k.vector().len(), 1);
    assert_eq!(k.vector().get(&SiteSet::from_coords([vec![1, 0]])), int(1));
    assert_eq!(eigen_residual(&k, &int(0), &k.default_check_sets()).unwrap(), 0.0);
}

#[test]
fn residual_rejects_sets_outside_the_truncation() {
    let geom = Geometry::new(1, 3).unwrap();
    let k = decimation_eigenvector(&ratio(1, 2), 2, &geom).unwrap();
    // 3·{9} = {27} leaves the ball of radius 9
    assert_eq!(
        eigen_residual(&k, &ratio(1, 2), &[set1(&[9])]),
        Err(Error::TruncationViolation(set1(&[9])))
    );
    let zero = Truncated::new(dec31(), 2, CoefficientVector::<BigRational>::new(1, LatticeTag::Original)).unwrap();
    assert_eq!(eigen_residual(&zero, &ratio(3, 7), &[set1(&[3])]).unwrap(), 0.0);
}

#[test]
fn majority_eigenvector_examples() {
    let spec = maj31();
    let full = majority_eigenvector(&ratio(3, 2), 3, &spec).unwrap();
    assert!(full.vector().iter().all(|(_, v)| *v == int(1)));
    assert_eq!(full.vector().len(), 81);
    assert_eq!(eigen_residual(&full, &ratio(3, 2), &full.default_check_sets()).unwrap(), 0.0);

    let zero = majority_eigenvector(&int(0), 4, &spec).unwrap();
    assert_eq!(zero.vector().get(&set1(&[1])), int(-2));
    assert_eq!(zero.vector().get(&set1(&[0])), int(1));
    assert_eq!(zero.vector().get(&set1(&[-1])), int(1));
    assert_eq!(zero.vector().len(), 3);
    let image = LinearOperator::forward(spec).unwrap().apply(zero.vector()).unwrap();
    assert_eq!(image.get(&set1(&[0])), int(0));

    for lambda in [ratio(1, 4), ratio(1, 2), ratio(3, 4), ratio(-3, 2)] {
        let k = majority_eigenvector(&lambda, 5, &spec).unwrap();
        assert_eq!(eigen_residual(&k, &lambda, &k.default_check_sets()).unwrap(), 0.0, "λ = {lambda}");
    }
}

#[test]
fn majority_eigenvector_in_two_dimensions() {
    let spec = KernelSpec::majority(2, 3).unwrap();
    let lambda = ratio(35, 64);
    let k = majority_eigenvector(&lambda, 2, &spec).unwrap();
    assert_eq!(k.vector().len(), 729);
    assert_eq!(eigen_residual(&k, &lambda, &k.default_check_sets()).unwrap(), 0.0);
}

#[test]
fn complex_eigenvalues_on_the_disk() {
    let spec = maj31();
    for lambda in default_grid(1.5) {
        let k = majority_eigenvector(&lambda, 4, &spec).unwrap();
        assert!(eigen_residual(&k, &lambda, &k.default_check_sets()).unwrap() <= 1e-12);
    }
    let geom = Geometry::new(1, 3).unwrap();
    for lambda in disk_grid(1.0, 8, 16) {
        let k = decimation_eigenvector(&lambda, 8, &geom).unwrap();
        assert!(eigen_residual(&k, &lambda, &k.default_check_sets()).unwrap() <= 1e-12);
    }
}

#[test]
fn grids_have_the_documented_sizes() {
    assert_eq!(disk_grid(1.0, 8, 16).len(), 128);
    assert_eq!(disk_grid(0.5, 4, 16).len(), 64);
    assert_eq!(default_grid(1.0).len(), 137);
    assert!(disk_grid(2.0, 8, 16).iter().all(|z| z.norm() <= 2.0 + 1e-15));
}

#[test]
fn ti_pair_family() {
    let geom = Geometry::new(1, 3).unwrap();
    let k = ti_pair_eigenvector(&ratio(1, 2), 3, &geom).unwrap();
    for (n, sep) in [1i64, 3, 9, 27].iter().enumerate() {
        assert_eq!(k.get(&set1(&[0, *sep])), ratio(1, 1 << n));
        assert_eq!(k.get(&set1(&[5, 5 + *sep])), ratio(1, 1 << n));
    }
    assert_eq!(ti_norm0(&k), 2.0 * (1.0 + 0.5 + 0.25 + 0.125));
    assert_eq!(ti_eigen_residual(&geom, &k, &ratio(1, 2), 3).unwrap(), 0.0);
    let image = ti_apply_l_decimation(&geom, &k).unwrap();
    assert_eq!(image.get(&set1(&[0, 3])), ratio(1, 4));
}

#[test]
fn norm_probes_respect_the_bounds() {
    for r in [0.0, 0.5] {
        let dec = operator_norm_probe(&dec31(), Direction::Forward, r, 100, 3).unwrap();
        assert!(dec.max_ratio <= 1.0 + 1e-12, "{dec:?}");
        let adj = operator_norm_probe(&dec31(), Direction::Adjoint, r, 100, 3).unwrap();
        assert!(adj.max_ratio <= 1.0 + 1e-12, "{adj:?}");
        let maj = operator_norm_probe(&maj31(), Direction::Forward, r, 100, 3).unwrap();
        assert!(maj.max_ratio <= 1.5 + 1e-12, "{maj:?}");
    }
    assert_eq!(
        operator_norm_probe(&dec31(), Direction::Forward, 0.0, 50, 9),
        operator_norm_probe(&dec31(), Direction::Forward, 0.0, 50, 9)
    );
    assert!(operator_norm_probe(&dec31(), Direction::Forward, 0.0, 0, 9).is_err());
}

#[test]
fn equality_witnesses_reach_the_bounds() {
    for r in [0.0, 0.5] {
        assert_eq!(norm_equality_witness(&dec31(), Direction::Forward, r).unwrap().1, 1.0);
        assert_eq!(norm_equality_witness(&dec31(), Direction::Adjoint, r).unwrap().1, 1.0);
        assert!((norm_equality_witness(&maj31(), Direction::Forward, r).unwrap().1 - 1.5).abs() < 1e-15);
    }
    assert_eq!(operator_norm_bound(&maj31(), Direction::Adjoint).unwrap(), None);
}

#[test]
fn witness_distance_examples() {
    let zero = CoefficientVector::<BigRational>::new(1, LatticeTag::Image);
    assert_eq!(residual_witness_distance(&dec31(), &ratio(1, 3), &zero, 0.0).unwrap(), 1.0);
    assert_eq!(residual_witness_distance(&maj31(), &ratio(1, 3), &zero, 0.5).unwrap(), 1.0);

    let s = CoefficientVector::delta(1, LatticeTag::Image, set1(&[1]), int(1)).unwrap();
    assert_eq!(residual_witness_distance(&dec31(), &int(1), &s, 0.0).unwrap(), 1.0);

    assert_eq!(
        residual_witness_distance(&maj31(), &ratio(3, 4), &zero, 0.0),
        Err(Error::OutOfDisk { modulus: 0.75, radius: 0.5 })
    );
    let original = zero.clone().with_tag(LatticeTag::Original);
    assert!(residual_witness_distance(&dec31(), &int(0), &original, 0.0).is_err());
}

#[test]
fn witness_sweeps_stay_above_the_bounds() {
    for (spec, bound) in [(dec31(), 0.5), (maj31(), 0.25)] {
        let grid = disk_grid(witness_disk_radius(&spec).unwrap(), 4, 16);
        let sweep = witness_sweep(&spec, &grid, 40, 11, 0.0).unwrap();
        assert!(sweep.min_distance >= bound - 1e-12, "{spec}: {sweep:?}");
        assert_eq!(sweep.evaluations, 40 * 64);
    }
    let cert = witness_certificate(&maj31(), Complex64::new(0.2, 0.0), 100, 7, 0.0).unwrap();
    assert!(cert.passed());
    assert_eq!(cert.seed, Some(7));
}

#[test]
fn divergence_families() {
    let geom = Geometry::new(1, 3).unwrap();
    let ti = divergence_probe(&DivergenceFamily::TiUnimodular { lambda: Complex64::new(1.0, 0.0) }, &dec31(), &[1, 2, 10])
        .unwrap();
    assert_eq!(ti, vec![4.0, 6.0, 22.0]);

    let family = DivergenceFamily::ScaledSet { lambda: 0.5, r: 0.1, base: set1(&[0, 1]) };
    let depths: Vec<usize> = (0..=7).collect();
    let norms = divergence_probe(&family, &dec31(), &depths).unwrap();
    assert!(norms.windows(2).all(|w| w[1] > w[0]));
    assert!(norms[7] > 1e6);
    let k = scaled_set_family(0.5, &set1(&[0, 1]), 2, &geom).unwrap();
    assert_eq!(k.get(&set1(&[0, 9])), 0.25);

    let bad = DivergenceFamily::ScaledSet { lambda: 0.5, r: 0.0, base: set1(&[0, 1]) };
    assert!(divergence_probe(&bad, &dec31(), &[1]).is_err());

    let chain = divergence_probe(&DivergenceFamily::MajorityAdjointNu { m: 1.0 }, &maj31(), &[0, 1, 5]).unwrap();
    assert_eq!(chain, vec![1.0, 2.0, 6.0]);
}

#[test]
fn majority_adjoint_chain_is_an_eigen_chain_on_singletons() {
    let geom = Geometry::new(1, 3).unwrap();
    let k = majority_adjoint_chain(1.0, 4, &geom).unwrap();
    let image = LinearOperator::adjoint(maj31()).unwrap().apply(&k).unwrap();
    for set in k.support() {
        assert_eq!(image.get(set), 0.5, "{set}");
    }
    assert_eq!(norm_r_star(&k, 0.0).unwrap(), 5.0);
}

#[test]
fn decimation_adjoint_is_nilpotent_on_windows() {
    let mut k = CoefficientVector::new(1, LatticeTag::Image);
    for (s, v) in [(&[1i64][..], 1.0), (&[-2, 5], 0.5), (&[0, 3, 4], -0.25), (&[7], 2.0)] {
        k.insert(set1(s), v).unwrap();
    }
    let report = adjoint_nilpotence(&dec31(), &k, 20, 4).unwrap();
    assert_eq!(report.kill_iteration, 3);
    assert!(report.holds(), "{report:?}");
    assert_eq!(report.survivors[2], 0);
}

#[test]
fn stirling_rows() {
    let rows = stirling_table(&[3, 5, 7, 9, 25]).unwrap();
    assert_eq!(rows[0].nu_text(), "1/2");
    assert_eq!(rows[3].nu_text(), "35/128");
    assert!((rows[0].asymptote - 1.38198).abs() < 1e-5);
    assert!((rows[0].ratio - 1.08540).abs() < 5e-5);
    assert!((rows[3].s_nu - 315.0 / 128.0).abs() < 1e-15);
    assert!((rows[3].ratio - 1.02811).abs() < 5e-5);
    // 25·C(24,12)/2^24
    assert!((rows[4].s_nu - 25.0 * 2_704_156.0 / 16_777_216.0).abs() < 1e-15);
    assert!((rows[4].s_nu - 4.029506).abs() < 1e-6);
    assert!((rows[4].ratio - 1.01007).abs() < 5e-5);
    assert!(stirling_ratios_decrease(&rows));
    assert_eq!(stirling_report(&[3, 5], 1).unwrap()[1].s, 5);
    assert!(stirling_report(&[4], 1).is_err());
}

#[test]
fn certificates_serialize_with_verdicts() {
    let spec = dec31();
    let cert = eigenvector_certificate(&spec, &LambdaValue::parse("0.5", 0.0).unwrap(), 8).unwrap();
    assert!(cert.passed());
    assert_eq!(cert.measured, 0.0);
    let json = serde_json::to_value(&cert).unwrap();
    assert_eq!(json["kind"], "eigenvector");
    assert_eq!(json["verdict"], "pass");
    assert_eq!(json["transform"]["kind"], "decimation");
    assert_eq!(json["payload"]["terms"].as_array().unwrap().len(), 9);

    assert!(eigenvector_certificate(&spec, &LambdaValue::parse("2", 0.0).unwrap(), 3).is_err());
    let complex = eigenvector_certificate(&maj31(), &LambdaValue::parse("0.3", 0.4).unwrap(), 4).unwrap();
    assert!(complex.passed());

    let failing = Certificate::new(CertificateKind::ResidualWitness, spec, Complex64::new(0.0, 0.0), "c", 0.1, 0.5);
    assert_eq!(failing.verdict, Verdict::Fail);
    let nan = Certificate::new(CertificateKind::NormBound, spec, Complex64::new(0.0, 0.0), "c", f64::NAN, 1.0);
    assert!(!nan.passed());
}
