//! The exact renormalization map on a finite volume.
//!
//! For an image window `Λ'` the original volume is `Λ = region(Λ')`. The
//! frozen partition function
//! `W(σ') = avg_σ ∏_y T_y(σ, σ'_y) e^{Σ_X J(X) σ_X}`
//! is evaluated by enumerating `σ`, and the renormalized couplings are its
//! Fourier coefficients `J'(Z) = avg_{σ'} σ'_Z log W(σ')`.

use num::BigRational;
use rayon::prelude::*;

use crate::coeff::{CoefficientVector, LatticeTag};
use crate::error::{Error, Result};
use crate::kernel::{BlockMask, KernelSpec, TransformKind};
use crate::lattice::{region, SiteSet};
use crate::spin::{normalized, parity_sign, EnumerationCap, SpinConfig};

const CHUNK: u64 = 1 << 12;

pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteVolume {
    image_sites: SiteSet,
    original_sites: SiteSet,
}

impl FiniteVolume {
    pub fn new(image_sites: SiteSet, spec: &KernelSpec, cap: EnumerationCap) -> Result<Self> {
        if let Some(d) = image_sites.dimension() {
            if d != spec.geom().dimension() {
                return Err(Error::DimensionMismatch { expected: spec.geom().dimension(), found: d });
            }
        }
        let original_sites = region(&image_sites, spec.geom())?;
        cap.check(original_sites.len())?;
        Ok(Self { image_sites, original_sites })
    }

    pub fn image_sites(&self) -> &SiteSet {
        &self.image_sites
    }

    pub fn original_sites(&self) -> &SiteSet {
        &self.original_sites
    }
}

/// The volume with its block layout resolved to bit masks.
struct Layout {
    kind: TransformKind,
    blocks: Vec<BlockMask>,
    n_original: usize,
}

impl Layout {
    fn new(spec: &KernelSpec, vol: &FiniteVolume) -> Result<Self> {
        let blocks = vol
            .image_sites
            .iter()
            .map(|y| BlockMask::locate(spec, y, &vol.original_sites))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind: spec.kind(), blocks, n_original: vol.original_sites.len() })
    }

    /// Image configuration bits of `φ(σ)`.
    #[inline]
    fn block_pattern(&self, bits: u64) -> usize {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.phi(self.kind, bits) < 0)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }
}

/// Couplings compiled to `(mask, J(X))` pairs over the volume's site order.
fn compile_couplings(j: &CoefficientVector<f64>, sites: &SiteSet) -> Result<Vec<(u64, f64)>> {
    j.iter()
        .map(|(set, &v)| {
            sites
                .mask_of(set)
                .map(|m| (m, v))
                .ok_or_else(|| Error::SupportOutOfVolume(set.clone()))
        })
        .collect()
}

#[inline]
fn exponent(couplings: &[(u64, f64)], bits: u64) -> f64 {
    couplings.iter().map(|&(m, v)| v * parity_sign(bits, m) as f64).sum()
}

/// `-H(σ) = Σ_X J(X) σ_X`.
pub fn boltzmann_exponent(j: &CoefficientVector<f64>, config: &SpinConfig<'_>) -> Result<f64> {
    let couplings = compile_couplings(j, config.sites())?;
    Ok(exponent(&couplings, config.bits()))
}

/// `W(σ')` for every image configuration, indexed by image bits.
pub fn frozen_partition_all(
    j: &CoefficientVector<f64>,
    spec: &KernelSpec,
    vol: &FiniteVolume,
) -> Result<Vec<f64>> {
    let layout = Layout::new(spec, vol)?;
    let couplings = compile_couplings(j, &vol.original_sites)?;
    let n_image = vol.image_sites.len();
    let count = 1u64 << layout.n_original;
    let chunks = count.div_ceil(CHUNK);
    let partials: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; 1 << n_image];
            let start = c * CHUNK;
            for bits in start..(start + CHUNK).min(count) {
                acc[layout.block_pattern(bits)] += exponent(&couplings, bits).exp();
            }
            acc
        })
        .collect();
    let mut totals = vec![0.0; 1 << n_image];
    for part in partials {
        for (t, p) in totals.iter_mut().zip(part) {
            *t += p;
        }
    }
    // ∏_y T_y contributes 2^{|Λ'|} on matching configurations
    let scale = ((n_image as i32) - (layout.n_original as i32)) as f64;
    Ok(totals.into_iter().map(|t| t * scale.exp2()).collect())
}

/// `W(σ')` for one image configuration.
pub fn frozen_partition(
    j: &CoefficientVector<f64>,
    spec: &KernelSpec,
    vol: &FiniteVolume,
    sprime: &SpinConfig<'_>,
) -> Result<f64> {
    if sprime.sites() != &vol.image_sites {
        return Err(Error::InvalidParameter("block configuration must cover the image window".into()));
    }
    let all = frozen_partition_all(j, spec, vol)?;
    Ok(all[sprime.bits() as usize])
}

/// Renormalized couplings together with the free-energy constant `J'(∅)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgOutput {
    pub couplings: CoefficientVector<f64>,
    pub free_energy: f64,
}

pub fn rg_map_full(j: &CoefficientVector<f64>, spec: &KernelSpec, vol: &FiniteVolume) -> Result<RgOutput> {
    let w = frozen_partition_all(j, spec, vol)?;
    let logs = w
        .iter()
        .map(|&v| if v > 0.0 && v.is_finite() { Ok(v.ln()) } else { Err(Error::DegenerateKernel(v)) })
        .collect::<Result<Vec<f64>>>()?;
    let n = vol.image_sites.len();
    let norm = (-(n as i32) as f64).exp2();
    let coefficient = |mask: u64| -> f64 {
        logs.iter()
            .enumerate()
            .map(|(bits, l)| parity_sign(bits as u64, mask) as f64 * l)
            .sum::<f64>()
            * norm
    };
    let mut couplings = CoefficientVector::new(spec.geom().dimension(), LatticeTag::Image);
    for mask in 1..(1u64 << n) {
        couplings.insert(vol.image_sites.subset_from_mask(mask), coefficient(mask))?;
    }
    Ok(RgOutput { couplings, free_energy: coefficient(0) })
}

/// `J'(Z)` for every nonempty `Z ⊆ Λ'`.
pub fn rg_map(j: &CoefficientVector<f64>, spec: &KernelSpec, vol: &FiniteVolume) -> Result<CoefficientVector<f64>> {
    Ok(rg_map_full(j, spec, vol)?.couplings)
}

fn check_jacobian_sets(vol: &FiniteVolume, z: &SiteSet, w: &SiteSet) -> Result<(u64, u64)> {
    if z.is_empty() {
        return Err(Error::EmptySet("jacobian image set"));
    }
    if w.is_empty() {
        return Err(Error::EmptySet("jacobian original set"));
    }
    let zm = vol.image_sites.mask_of(z).ok_or_else(|| Error::SupportOutOfVolume(z.clone()))?;
    let wm = vol.original_sites.mask_of(w).ok_or_else(|| Error::SupportOutOfVolume(w.clone()))?;
    Ok((zm, wm))
}

/// `∂J'(Z)/∂J(W)` at `J = 0` as the exact double sum
/// `avg_σ avg_{σ'} ∏_y T_y(σ, σ'_y) σ_W σ'_Z`.
pub fn jacobian_bruteforce(
    spec: &KernelSpec,
    vol: &FiniteVolume,
    z: &SiteSet,
    w: &SiteSet,
) -> Result<BigRational> {
    let (zm, wm) = check_jacobian_sets(vol, z, w)?;
    let layout = Layout::new(spec, vol)?;
    let n_image = vol.image_sites.len();
    let mut total: i64 = 0;
    for bits in 0..1u64 << layout.n_original {
        let sigma_w = parity_sign(bits, wm);
        for sp in 0..1u64 << n_image {
            let mut kernel = 1i64;
            for (i, blk) in layout.blocks.iter().enumerate() {
                let block_spin = 1 - 2 * ((sp >> i) & 1) as i8;
                kernel *= if blk.phi(layout.kind, bits) == block_spin { 2 } else { 0 };
            }
            total += kernel * sigma_w * parity_sign(sp, zm);
        }
    }
    Ok(normalized(total, layout.n_original + n_image))
}

/// Centered difference `(J'_{+h}(Z) - J'_{-h}(Z)) / 2h` with `J_{±h} = ±h·δ_W`.
pub fn jacobian_fd(
    spec: &KernelSpec,
    vol: &FiniteVolume,
    z: &SiteSet,
    w: &SiteSet,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {h}")));
    }
    check_jacobian_sets(vol, z, w)?;
    let dim = spec.geom().dimension();
    let plus = CoefficientVector::delta(dim, LatticeTag::Original, w.clone(), h)?;
    let minus = CoefficientVector::delta(dim, LatticeTag::Original, w.clone(), -h)?;
    let up = rg_map(&plus, spec, vol)?.get(z);
    let down = rg_map(&minus, spec, vol)?.get(z);
    Ok((up - down) / (2.0 * h))
}
