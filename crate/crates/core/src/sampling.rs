//! Seeded random interaction vectors.
//!
//! Every sample is drawn from its own ChaCha stream `(seed, index)`, so
//! samples can be generated in any order or in parallel and still agree.

use num::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coeff::{CoefficientVector, LatticeTag};
use crate::error::Result;
use crate::kernel::{KernelSpec, TransformKind};
use crate::rg_linear::LinearOperator;
use crate::lattice::{Site, SiteSet};
use crate::scalar::{ratio, Scalar};

/// Denominator of the random rational values `i/1024`.
pub const VALUE_DENOMINATOR: i64 = 1024;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Where random support sets live.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportWindow {
    pub dimension: usize,
    /// Coordinates are drawn from `[-radius, radius]` before scaling by `step`.
    pub radius: i64,
    pub step: i64,
    pub max_set_size: usize,
    pub max_terms: usize,
    pub avoid_origin_singleton: bool,
}

impl SupportWindow {
    pub fn new(dimension: usize, radius: i64) -> Self {
        Self { dimension, radius, step: 1, max_set_size: 4, max_terms: 6, avoid_origin_singleton: false }
    }

    pub fn with_radius(mut self, radius: i64) -> Self {
        self.radius = radius;
        self
    }

    pub fn step(mut self, step: i64) -> Self {
        self.step = step;
        self
    }

    pub fn max_set_size(mut self, size: usize) -> Self {
        self.max_set_size = size.max(1);
        self
    }

    pub fn max_terms(mut self, terms: usize) -> Self {
        self.max_terms = terms.max(1);
        self
    }

    pub fn avoid_origin_singleton(mut self, avoid: bool) -> Self {
        self.avoid_origin_singleton = avoid;
        self
    }

    fn site(&self, rng: &mut ChaCha8Rng) -> Site {
        Site::new((0..self.dimension).map(|_| self.step * rng.gen_range(-self.radius..=self.radius)).collect())
    }

    /// Size `k` with probability proportional to `2^-k`, truncated at `max_set_size`.
    fn set_size(&self, rng: &mut ChaCha8Rng) -> usize {
        let mut k = 1;
        while k < self.max_set_size && rng.gen_bool(0.5) {
            k += 1;
        }
        k
    }

    pub fn random_set(&self, rng: &mut ChaCha8Rng) -> SiteSet {
        loop {
            let size = self.set_size(rng);
            let sites: Vec<Site> = (0..size).map(|_| self.site(rng)).collect();
            let set = SiteSet::try_from(sites).expect("sites share the window dimension");
            if self.avoid_origin_singleton && set.len() == 1 && set.sites()[0].is_origin() {
                continue;
            }
            return set;
        }
    }
}

/// A nonzero rational `i/1024` with `i` uniform in `[-1024, 1024] \ {0}`.
pub fn random_value(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let i = rng.gen_range(-VALUE_DENOMINATOR..=VALUE_DENOMINATOR);
        if i != 0 {
            return ratio(i, VALUE_DENOMINATOR);
        }
    }
}

/// A nonzero vector with between 1 and `max_terms` distinct support sets.
pub fn random_vector<S: Scalar>(
    rng: &mut ChaCha8Rng,
    window: &SupportWindow,
    tag: LatticeTag,
) -> CoefficientVector<S> {
    let terms = rng.gen_range(1..=window.max_terms);
    let mut k = CoefficientVector::new(window.dimension, tag);
    for _ in 0..terms {
        let set = window.random_set(rng);
        let value = random_value(rng);
        k.insert(set, S::from_rational(&value)).expect("window sets are nonempty");
    }
    k
}

/// An image `K1` and an original `K2` whose supports are correlated through
/// the operator, so the adjoint pairing is usually nonzero.
///
/// `K1` never contains the origin singleton (see the decimation convention).
pub fn random_adjoint_pair<S: Scalar>(
    spec: &KernelSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(CoefficientVector<S>, CoefficientVector<S>)> {
    let d = spec.geom().dimension();
    let b = spec.geom().blocking_factor();
    let image_window = match spec.kind() {
        TransformKind::Decimation => SupportWindow::new(d, 2).max_set_size(3),
        TransformKind::Majority => SupportWindow::new(d, 1).max_set_size(if spec.s() > 3 { 1 } else { 2 }),
    }
    .avoid_origin_singleton(true);
    let original_window = SupportWindow::new(d, if d == 1 { 3 } else { 2 });
    let mut k1: CoefficientVector<S> = random_vector(rng, &image_window, LatticeTag::Image);
    let mut k2: CoefficientVector<S> = random_vector(rng, &original_window, LatticeTag::Original);
    match spec.kind() {
        TransformKind::Decimation => {
            let scaled: Vec<_> = k1.support().map(|z| crate::lattice::scale_set(z, spec.geom())).collect::<Result<_>>()?;
            for w in scaled {
                if rng.gen_bool(0.5) {
                    k2.insert(w, S::from_rational(&random_value(rng)))?;
                }
            }
            // a stray b-divisible set exercises the forward map alone
            let extra = SupportWindow::new(d, 2).step(b).max_set_size(2).random_set(rng);
            k2.insert(extra, S::from_rational(&random_value(rng)))?;
        }
        TransformKind::Majority => {
            let image = LinearOperator::forward(*spec)?.apply(&k2)?;
            let covers: Vec<_> = image.support().cloned().collect();
            for z in covers {
                let origin_singleton = z.len() == 1 && z.sites()[0].is_origin();
                if z.len() <= image_window.max_set_size && !origin_singleton && rng.gen_bool(0.5) {
                    k1.insert(z, S::from_rational(&random_value(rng)))?;
                }
            }
        }
    }
    Ok((k1, k2))
}
