use num::BigRational;
use proptest::prelude::*;
use rg_spectra::coeff::{norm_r, norm_r_star, pairing, CoefficientVector, LatticeTag};
use rg_spectra::kernel::KernelSpec;
use rg_spectra::lattice::{block, block_index, Geometry, Site, SiteSet};
use rg_spectra::rg_linear::adjoint_pairing_defect;
use rg_spectra::sampling::{random_adjoint_pair, random_vector, rng_for, SupportWindow};
use rg_spectra::scalar::Scalar;

fn vector(seed: u64, tag: LatticeTag) -> CoefficientVector<f64> {
    random_vector(&mut rng_for(seed, 0), &SupportWindow::new(1, 4).max_terms(8), tag)
}

proptest! {
    #[test]
    fn blocks_tile_the_lattice(b in 2i64..8, x in -200i64..200, y in -200i64..200) {
        let geom = Geometry::new(2, b).unwrap();
        let site = Site::new(vec![x, y]);
        let index = block_index(&site, &geom);
        let owner = block(&index, &geom).unwrap();
        prop_assert!(owner.contains(&site));
        prop_assert_eq!(owner.len(), (b * b) as usize);
        // every member maps back to the same image site
        for member in owner.iter() {
            prop_assert_eq!(block_index(member, &geom), index.clone());
        }
    }

    #[test]
    fn norms_are_homogeneous_and_subadditive(seed in any::<u64>(), c in -4.0f64..4.0, r in 0.0f64..1.0) {
        let k = vector(seed, LatticeTag::Original);
        let j = vector(seed.wrapping_add(1), LatticeTag::Original);
        let sum = k.checked_add(&j).unwrap();
        let scaled = k.scaled(&c);
        for norm in [norm_r::<f64>, norm_r_star::<f64>] {
            let nk = norm(&k, r).unwrap();
            prop_assert!((norm(&scaled, r).unwrap() - c.abs() * nk).abs() <= 1e-9 * (1.0 + nk));
            prop_assert!(norm(&sum, r).unwrap() <= nk + norm(&j, r).unwrap() + 1e-9);
        }
    }

    #[test]
    fn norms_grow_with_r(seed in any::<u64>(), r in 0.0f64..1.0, dr in 0.0f64..1.0) {
        let k = vector(seed, LatticeTag::Original);
        prop_assert!(norm_r(&k, r).unwrap() <= norm_r(&k, r + dr).unwrap() + 1e-12);
        prop_assert!(norm_r_star(&k, r + dr).unwrap() <= norm_r_star(&k, r).unwrap() + 1e-12);
    }

    #[test]
    fn pairing_obeys_the_duality_bound(seed in any::<u64>(), r in 0.0f64..1.0) {
        let k1 = vector(seed, LatticeTag::Original);
        let k2 = vector(seed.wrapping_add(7), LatticeTag::Original);
        let p = pairing(&k1, &k2).unwrap().abs();
        prop_assert!(p <= norm_r(&k1, r).unwrap() * norm_r_star(&k2, r).unwrap() + 1e-9);
    }

    #[test]
    fn adjoint_identity_is_exact(seed in any::<u64>(), majority in any::<bool>(), d in 1usize..3) {
        let spec = if majority { KernelSpec::majority(d, 3) } else { KernelSpec::decimation(d, 3) }.unwrap();
        let (k1, k2) = random_adjoint_pair::<BigRational>(&spec, &mut rng_for(seed, 0)).unwrap();
        prop_assert!(adjoint_pairing_defect(&spec, &k1, &k2).unwrap().modulus() == 0.0);
    }

    #[test]
    fn translation_preserves_set_shape(x in -50i64..50, shift in -50i64..50) {
        let set = SiteSet::from_coords([[x], [x + 2]]);
        let moved = set.translated(&Site::new(vec![shift]));
        prop_assert_eq!(moved.len(), 2);
        prop_assert_eq!(moved.sites()[1].coords()[0] - moved.sites()[0].coords()[0], 2);
    }
}
