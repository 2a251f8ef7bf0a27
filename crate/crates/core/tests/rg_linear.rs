use rg_spectra::rg_linear::*;
use std::sync::Arc;
use num::{BigRational, Zero};
use rg_spectra::coeff::{CoefficientVector, LatticeTag};
use rg_spectra::kernel::KernelSpec;
use rg_spectra::lattice::{Site, SiteSet};
use rg_spectra::scalar::int;
use rg_spectra::Error;
use rg_spectra::coeff::pairing;
use rg_spectra::scalar::ratio;

fn line(c: &[i64]) -> SiteSet {
    SiteSet::from_coords(c.iter().map(|&x| vec![x]))
}

fn site(x: i64) -> Site {
    Site::new(vec![x])
}

fn exact(tag: LatticeTag, entries: &[(&[i64], BigRational)]) -> CoefficientVector<BigRational> {
    let mut k = CoefficientVector::new(1, tag);
    for (s, v) in entries {
        k.insert(line(s), v.clone()).unwrap();
    }
    k
}

#[test]
fn chi_examples() {
    let spec = KernelSpec::majority(1, 3).unwrap();
    assert_eq!(chi(&spec, &line(&[0]), &site(0)).unwrap(), ratio(1, 2));
    assert_eq!(chi(&spec, &line(&[-1, 1]), &site(0)).unwrap(), ratio(0, 1));
    assert_eq!(chi(&spec, &line(&[-1, 0, 1]), &site(0)).unwrap(), ratio(-1, 2));
    assert_eq!(chi(&spec, &line(&[3]), &site(1)).unwrap(), ratio(1, 2));
    assert!(matches!(chi(&spec, &line(&[2]), &site(0)), Err(Error::NotInBlock { .. })));
    assert!(chi(&KernelSpec::decimation(1, 3).unwrap(), &line(&[0]), &site(0)).is_err());
}

#[test]
fn chi_table_is_cached() {
    let spec = KernelSpec::majority(1, 5).unwrap();
    let a = ChiTable::shared(&spec).unwrap();
    let b = ChiTable::shared(&spec).unwrap();
    assert!(Arc::ptr_eq(&a, &b));
    assert_eq!(a.odd_patterns().unwrap().len(), 16);
}

#[test]
fn decimation_forward_examples() {
    let spec = KernelSpec::decimation(1, 3).unwrap();
    let k = exact(LatticeTag::Original, &[(&[3], int(5))]);
    assert_eq!(apply_l_decimation(&spec, &k).unwrap(), exact(LatticeTag::Image, &[(&[1], int(5))]));
    let k = exact(LatticeTag::Original, &[(&[2], int(5))]);
    assert!(apply_l_decimation(&spec, &k).unwrap().is_zero());
    let k = exact(LatticeTag::Original, &[(&[0, 3], int(7))]);
    assert_eq!(apply_l_decimation(&spec, &k).unwrap(), exact(LatticeTag::Image, &[(&[0, 1], int(7))]));
    let wrong = exact(LatticeTag::Image, &[(&[3], int(1))]);
    assert!(apply_l_decimation(&spec, &wrong).is_err());
}

#[test]
fn decimation_adjoint_examples() {
    let spec = KernelSpec::decimation(1, 3).unwrap();
    let m = ratio(2, 3);
    let k = exact(LatticeTag::Image, &[(&[1], m.clone())]);
    let out = apply_lstar_decimation(&spec, &k).unwrap();
    assert_eq!(out.get(&line(&[3])), m);
    assert!(out.get(&line(&[2])).is_zero());
    let origin = exact(LatticeTag::Image, &[(&[0], m)]);
    assert!(apply_lstar_decimation(&spec, &origin).unwrap().is_zero());
}

#[test]
fn decimation_adjoint_pairing_off_the_origin() {
    let spec = KernelSpec::decimation(1, 3).unwrap();
    let k1 = exact(LatticeTag::Image, &[(&[1], int(2)), (&[0, 1], int(-3)), (&[2], int(1))]);
    let k2 = exact(LatticeTag::Original, &[(&[3], int(4)), (&[0, 3], int(5)), (&[7], int(9))]);
    let lhs = pairing(&k1, &apply_l_decimation(&spec, &k2).unwrap()).unwrap();
    let rhs = pairing(&k2, &apply_lstar_decimation(&spec, &k1).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
    assert_eq!(lhs, int(8 - 15));
}

#[test]
fn origin_convention_costs_exactly_the_origin_term() {
    let spec = KernelSpec::decimation(1, 3).unwrap();
    let k1 = exact(LatticeTag::Image, &[(&[0], int(2)), (&[1], int(1))]);
    let k2 = exact(LatticeTag::Original, &[(&[0], int(3)), (&[3], int(5))]);
    let lhs = pairing(&k1, &apply_l_decimation(&spec, &k2).unwrap()).unwrap();
    let rhs = pairing(&k2, &apply_lstar_decimation(&spec, &k1).unwrap()).unwrap();
    assert_eq!(lhs - rhs, int(6));
}

#[test]
fn majority_forward_examples() {
    let spec = KernelSpec::majority(1, 3).unwrap();
    let table = ChiTable::shared(&spec).unwrap();
    let k = exact(LatticeTag::Original, &[(&[0], int(1))]);
    assert_eq!(apply_l_majority(&table, &k).unwrap(), exact(LatticeTag::Image, &[(&[0], ratio(1, 2))]));
    let field = exact(LatticeTag::Original, &[(&[-1], int(1)), (&[0], int(1)), (&[1], int(1))]);
    assert_eq!(apply_l_majority(&table, &field).unwrap(), exact(LatticeTag::Image, &[(&[0], ratio(3, 2))]));
    let even = exact(LatticeTag::Original, &[(&[-1, 1], int(1))]);
    assert!(apply_l_majority(&table, &even).unwrap().is_zero());
}

#[test]
fn majority_adjoint_examples() {
    let spec = KernelSpec::majority(1, 3).unwrap();
    let table = ChiTable::shared(&spec).unwrap();
    let k = exact(LatticeTag::Image, &[(&[0], int(1))]);
    let out = apply_lstar_majority(&table, &k, &line(&[-1, 0, 1])).unwrap();
    assert_eq!(out.get(&line(&[1])), ratio(1, 2));
    assert_eq!(out.get(&line(&[-1, 0, 1])), ratio(-1, 2));
    assert!(out.get(&line(&[0, 1])).is_zero());
    assert_eq!(out.len(), 4);

    let pair = exact(LatticeTag::Image, &[(&[0, 1], int(1))]);
    let window = line(&[-1, 0, 1, 2, 3, 4]);
    let out = apply_lstar_majority(&table, &pair, &window).unwrap();
    assert_eq!(out.get(&line(&[0, 3])), ratio(1, 4));
    assert_eq!(out.len(), 16);
    assert!(matches!(
        apply_lstar_majority(&table, &pair, &line(&[-1, 0, 1])),
        Err(Error::WindowTooSmall(_))
    ));
}

#[test]
fn closed_form_jacobian_examples() {
    let dec = KernelSpec::decimation(1, 3).unwrap();
    assert_eq!(jacobian_closed_form(&dec, &line(&[1, 2]), &line(&[3, 6])).unwrap(), int(1));
    assert_eq!(jacobian_closed_form(&dec, &line(&[1, 2]), &line(&[3, 5])).unwrap(), int(0));
    let maj = KernelSpec::majority(1, 3).unwrap();
    assert_eq!(jacobian_closed_form(&maj, &line(&[0]), &line(&[-1, 0, 1])).unwrap(), ratio(-1, 2));
    assert_eq!(jacobian_closed_form(&maj, &line(&[0, 1]), &line(&[0])).unwrap(), int(0));
    assert_eq!(jacobian_closed_form(&maj, &line(&[0, 1]), &line(&[0, 4])).unwrap(), ratio(1, 4));
}

#[test]
fn operator_dispatch_flips_tags() {
    let maj = LinearOperator::adjoint(KernelSpec::majority(1, 3).unwrap()).unwrap();
    let k = exact(LatticeTag::Image, &[(&[2], int(1))]);
    let out = maj.apply(&k).unwrap();
    assert_eq!(out.tag(), LatticeTag::Original);
    assert_eq!(out.get(&line(&[6])), ratio(1, 2));
    let dec = LinearOperator::forward(KernelSpec::decimation(1, 2).unwrap()).unwrap();
    let k = exact(LatticeTag::Original, &[(&[4], int(1))]);
    assert_eq!(dec.apply(&k).unwrap().get(&line(&[2])), int(1));
}
