//! Exhaustive spin enumeration on finite site lists.
//!
//! Configuration `k` assigns `σ_i = -1` when bit `i` of `k` is set and
//! `σ_i = +1` otherwise, with `i` indexing the canonical site order. Every
//! exact sum in the crate is a normalized sum over this enumeration.

use num::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Site, SiteSet};
use crate::scalar::{ratio, Scalar};

pub const DEFAULT_ENUMERATION_CAP: usize = 25;

/// Configurations per work unit; fixed so that float reductions do not depend on thread count.
const CHUNK: u64 = 1 << 12;

/// Upper bound on the number of sites that may be enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationCap(pub usize);

impl Default for EnumerationCap {
    fn default() -> Self {
        EnumerationCap(DEFAULT_ENUMERATION_CAP)
    }
}

impl EnumerationCap {
    pub fn check(&self, sites: usize) -> Result<()> {
        if sites > self.0 || sites > 62 {
            return Err(Error::EnumerationTooLarge { sites, cap: self.0.min(62) });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinConfig<'a> {
    sites: &'a SiteSet,
    bits: u64,
}

impl<'a> SpinConfig<'a> {
    pub fn from_bits(sites: &'a SiteSet, bits: u64) -> Self {
        SpinConfig { sites, bits }
    }

    /// Builds a configuration from explicit `±1` values aligned with `sites`.
    pub fn from_values(sites: &'a SiteSet, values: &[i8]) -> Result<Self> {
        if values.len() != sites.len() {
            return Err(Error::InvalidParameter(format!(
                "{} spin values for {} sites",
                values.len(),
                sites.len()
            )));
        }
        let mut bits = 0u64;
        for (i, &v) in values.iter().enumerate() {
            match v {
                1 => {}
                -1 => bits |= 1 << i,
                other => return Err(Error::InvalidParameter(format!("spin value {other}"))),
            }
        }
        Ok(SpinConfig { sites, bits })
    }

    pub fn sites(&self) -> &'a SiteSet {
        self.sites
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn value_at(&self, index: usize) -> i8 {
        spin_of(self.bits, index)
    }

    pub fn get(&self, site: &Site) -> Result<i8> {
        self.sites
            .position(site)
            .map(|i| self.value_at(i))
            .ok_or_else(|| Error::MissingSite(site.clone()))
    }

    pub fn values(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.sites.len()).map(|i| self.value_at(i))
    }

    /// The globally flipped configuration `-σ`.
    pub fn flipped(&self) -> Self {
        let n = self.sites.len();
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        SpinConfig { sites: self.sites, bits: !self.bits & all }
    }
}

#[inline]
pub fn spin_of(bits: u64, index: usize) -> i8 {
    1 - 2 * ((bits >> index) & 1) as i8
}

/// `σ_X` for the sites selected by `mask`.
#[inline]
pub fn parity_sign(bits: u64, mask: u64) -> i64 {
    1 - 2 * ((bits & mask).count_ones() & 1) as i64
}

/// Streams all `2^n` configurations in counter order.
pub fn enumerate_configs(
    sites: &SiteSet,
    cap: EnumerationCap,
) -> Result<impl Iterator<Item = SpinConfig<'_>> + '_> {
    cap.check(sites.len())?;
    Ok((0..1u64 << sites.len()).map(move |bits| SpinConfig { sites, bits }))
}

/// `σ_X = ∏_{x∈X} σ_x`, with `σ_∅ = 1`.
pub fn spin_product(config: &SpinConfig<'_>, set: &SiteSet) -> Result<i8> {
    let mask = config
        .sites
        .mask_of(set)
        .ok_or_else(|| {
            let missing = set.iter().find(|s| !config.sites.contains(s)).cloned();
            Error::MissingSite(missing.expect("mask_of fails only on a missing site"))
        })?;
    Ok(parity_sign(config.bits, mask) as i8)
}

/// Normalized sum `2^{-n} Σ_σ f(σ)`.
///
/// The counter range is split into fixed-size chunks that may run on any
/// number of workers; chunk sums are folded in counter order, so float
/// results are identical for every thread count.
pub fn average_over<S, F>(sites: &SiteSet, cap: EnumerationCap, f: F) -> Result<S>
where
    S: Scalar,
    F: Fn(&SpinConfig<'_>) -> Result<S> + Sync,
{
    let total = sum_over_bits(sites.len(), cap, |bits| f(&SpinConfig { sites, bits }))?;
    let norm = BigRational::new(1.into(), num::BigInt::from(1) << sites.len());
    Ok(total * S::from_rational(&norm))
}

/// Unnormalized `Σ_k f(k)` over `0..2^n` with the deterministic chunked reduction.
pub(crate) fn sum_over_bits<S, F>(n: usize, cap: EnumerationCap, f: F) -> Result<S>
where
    S: Scalar,
    F: Fn(u64) -> Result<S> + Sync,
{
    cap.check(n)?;
    let count = 1u64 << n;
    let chunks = count.div_ceil(CHUNK);
    let partials: Vec<Result<S>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(count);
            (start..end).try_fold(S::zero(), |acc, bits| Ok(acc + f(bits)?))
        })
        .collect();
    partials.into_iter().try_fold(S::zero(), |acc, p| Ok(acc + p?))
}

/// Integer-valued variant of [`sum_over_bits`] for exact counting.
pub(crate) fn count_over_bits<F>(n: usize, cap: EnumerationCap, f: F) -> Result<i64>
where
    F: Fn(u64) -> i64 + Sync,
{
    cap.check(n)?;
    let count = 1u64 << n;
    let chunks = count.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(count);
            (start..end).map(&f).sum::<i64>()
        })
        .sum())
}

/// `count / 2^n` as an exact rational.
pub(crate) fn normalized(count: i64, n: usize) -> BigRational {
    if n < 62 {
        ratio(count, 1i64 << n)
    } else {
        BigRational::new(count.into(), num::BigInt::from(1) << n)
    }
}
