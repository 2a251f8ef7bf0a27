use rg_spectra::coeff::*;
use num::BigRational;
use rg_spectra::lattice::SiteSet;
use rg_spectra::scalar::Complex64;
use rg_spectra::Error;
use rg_spectra::scalar::{int, ratio};

fn set(c: &[i64]) -> SiteSet {
    SiteSet::from_coords(c.iter().map(|&x| vec![x]))
}

fn vec1(entries: &[(&[i64], f64)]) -> CoefficientVector<f64> {
    let mut k = CoefficientVector::new(1, LatticeTag::Original);
    for (s, v) in entries {
        k.insert(set(s), *v).unwrap();
    }
    k
}

#[test]
fn zeros_are_not_stored() {
    let mut k = vec1(&[(&[0], 1.0)]);
    k.accumulate(set(&[0]), -1.0).unwrap();
    assert!(k.is_zero());
    k.insert(set(&[1]), 0.0).unwrap();
    assert!(k.is_zero());
    assert!(k.insert(SiteSet::empty(), 1.0).is_err());
}

#[test]
fn norm_r_examples() {
    for r in [0.0, 0.7, 2.0] {
        assert_eq!(norm_r(&vec1(&[(&[4], -2.5)]), r).unwrap(), 2.5);
    }
    assert_eq!(norm_r(&vec1(&[(&[0, 1], 2.0)]), 0.0).unwrap(), 2.0);
    let v = norm_r(&vec1(&[(&[0, 2], 1.0)]), 1.0).unwrap();
    assert!((v - 7.389_056_098_930_65).abs() < 1e-12);
    assert_eq!(norm_r(&CoefficientVector::<f64>::new(1, LatticeTag::Original), 1.0).unwrap(), 0.0);
    assert!(norm_r(&vec1(&[(&[0], 1.0)]), -0.1).is_err());
}

#[test]
fn norm_r_star_examples() {
    assert_eq!(norm_r_star(&vec1(&[(&[3], 1.0)]), 0.4).unwrap(), 1.0);
    let v = norm_r_star(&vec1(&[(&[0, 2], 1.0)]), 1.0).unwrap();
    assert!((v - (-2.0f64).exp()).abs() < 1e-15);
    let mut k = CoefficientVector::new(2, LatticeTag::Original);
    for n in 0..=5 {
        k.insert(SiteSet::from_coords([[3i64.pow(n), 0]]), 1.0).unwrap();
    }
    assert_eq!(norm_r_star(&k, 0.3).unwrap(), 6.0);
}

#[test]
fn pairing_examples() {
    let a = vec1(&[(&[0], 1.0)]);
    let b = vec1(&[(&[1], 1.0)]);
    assert_eq!(pairing(&a, &b).unwrap(), 0.0);
    let c = vec1(&[(&[0, 1], 3.0)]);
    assert_eq!(pairing(&c, &c).unwrap(), 9.0);
    let img = b.clone().with_tag(LatticeTag::Image);
    assert!(matches!(pairing(&a, &img), Err(Error::LatticeTagMismatch { .. })));
}

#[test]
fn evenness() {
    assert!(is_even(&vec1(&[(&[0, 1], 1.0)])));
    assert!(!is_even(&vec1(&[(&[0], 1.0)])));
    assert!(is_even(&CoefficientVector::<f64>::new(1, LatticeTag::Original)));
}

#[test]
fn orbit_representatives() {
    assert_eq!(orbit_rep(&set(&[5, 6])).unwrap(), set(&[0, 1]));
    let o = SiteSet::from_coords([[0, 0]]);
    assert_eq!(orbit_rep(&o).unwrap(), o);
    let x = SiteSet::from_coords([[3, -2], [1, 7], [4, 4]]);
    let rep = orbit_rep(&x).unwrap();
    assert_eq!(orbit_rep(&rep).unwrap(), rep);
    assert!(orbit_rep(&SiteSet::empty()).is_err());
}

#[test]
fn ti_norms() {
    let mut k = TIVector::<BigRational>::new(1, true);
    k.insert(&set(&[4, 5]), int(1)).unwrap();
    assert_eq!(ti_norm0(&k), 2.0);
    assert!(k.insert(&set(&[0]), int(1)).is_err());
    assert_eq!(k.get(&set(&[-7, -6])), int(1));

    let mut nn = TIVector::<BigRational>::new(3, true);
    for axis in 0..3 {
        let mut e = vec![0; 3];
        e[axis] = 1;
        nn.insert(&SiteSet::from_coords([vec![0, 0, 0], e]), int(1)).unwrap();
    }
    assert_eq!(ti_norm0(&nn), 6.0);

    let mut geo = TIVector::<BigRational>::new(1, true);
    let mut value = int(1);
    let mut expected = 0.0;
    for n in 0..6u32 {
        geo.insert(&set(&[0, 3i64.pow(n)]), value.clone()).unwrap();
        expected += 2.0 * 0.5f64.powi(n as i32);
        value *= ratio(1, 2);
    }
    assert_eq!(ti_norm0(&geo), expected);
}

#[test]
fn interaction_file_round_trip() {
    let text = r#"{"dimension":1,"lattice":"original","terms":[
        {"sites":[[2],[0]],"value":0.5},
        {"sites":[[1]],"value":[1.0,-2.0]},
        {"sites":[[3]],"value":"3/8"}]}"#;
    let file: InteractionFile = serde_json::from_str(text).unwrap();
    let k = file.to_complex_vector().unwrap();
    assert_eq!(k.get(&set(&[0, 2])), Complex64::new(0.5, 0.0));
    assert_eq!(k.get(&set(&[1])), Complex64::new(1.0, -2.0));
    assert!(file.to_real_vector().is_err());
    let out = InteractionFile::from_vector(&k);
    assert_eq!(out.terms[0].sites, set(&[0, 2]).sites().to_vec());
    assert_eq!(out.to_complex_vector().unwrap(), k);
}

#[test]
fn interaction_file_rejects_duplicates() {
    let text = r#"{"dimension":1,"lattice":"image","terms":[
        {"sites":[[0],[1]],"value":1},{"sites":[[1],[0]],"value":2}]}"#;
    let file: InteractionFile = serde_json::from_str(text).unwrap();
    assert_eq!(file.to_real_vector(), Err(Error::DuplicateSet(set(&[0, 1]))));
}
