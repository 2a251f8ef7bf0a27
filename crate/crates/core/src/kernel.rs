//! Deterministic block-spin kernels `T_y(σ, σ'_y) = 2δ(φ_y(σ), σ'_y)`.

use std::fmt;

use num::{BigInt, BigRational, BigUint};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{block, Geometry, Site, SiteSet};
use crate::spin::{
    count_over_bits, enumerate_configs, normalized, parity_sign, spin_of, EnumerationCap, SpinConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Decimation,
    Majority,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::Decimation => "decimation",
            TransformKind::Majority => "majority",
        })
    }
}

impl std::str::FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decimation" => Ok(TransformKind::Decimation),
            "majority" => Ok(TransformKind::Majority),
            other => Err(Error::InvalidSpec(format!("unknown transform `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct KernelSpec {
    kind: TransformKind,
    geom: Geometry,
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    kind: TransformKind,
    b: i64,
    d: usize,
}

impl TryFrom<SpecRepr> for KernelSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        KernelSpec::new(r.kind, Geometry::new(r.d, r.b)?)
    }
}

impl From<KernelSpec> for SpecRepr {
    fn from(k: KernelSpec) -> Self {
        SpecRepr { kind: k.kind, b: k.geom.blocking_factor(), d: k.geom.dimension() }
    }
}

impl KernelSpec {
    pub fn new(kind: TransformKind, geom: Geometry) -> Result<Self> {
        if kind == TransformKind::Majority && !geom.is_odd() {
            return Err(Error::InvalidSpec(format!(
                "majority rule needs an odd blocking factor, got {}",
                geom.blocking_factor()
            )));
        }
        Ok(Self { kind, geom })
    }

    pub fn decimation(dimension: usize, b: i64) -> Result<Self> {
        Self::new(TransformKind::Decimation, Geometry::new(dimension, b)?)
    }

    pub fn majority(dimension: usize, b: i64) -> Result<Self> {
        Self::new(TransformKind::Majority, Geometry::new(dimension, b)?)
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn geom(&self) -> &Geometry {
        &self.geom
    }

    /// `s = b^d`.
    pub fn s(&self) -> usize {
        self.geom.block_size()
    }

    pub fn nu(&self) -> Result<BigRational> {
        nu(self)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} b={} d={}", self.kind, self.geom.blocking_factor(), self.geom.dimension())
    }
}

/// Bit layout of one block inside an enumerated site list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct BlockMask {
    /// Bits of the block's sites.
    pub mask: u64,
    /// Bit index of the decimation site `b·y`.
    pub center: usize,
}

impl BlockMask {
    pub fn locate(spec: &KernelSpec, y: &Site, sites: &SiteSet) -> Result<Self> {
        let blk = block(y, spec.geom())?;
        let mask = sites.mask_of(&blk).ok_or_else(|| {
            Error::MissingSite(blk.iter().find(|s| !sites.contains(s)).cloned().expect("missing"))
        })?;
        let center = sites
            .position(&y.scaled(spec.geom().blocking_factor()))
            .expect("b·y lies in its own block");
        Ok(BlockMask { mask, center })
    }

    #[inline]
    pub fn phi(&self, kind: TransformKind, bits: u64) -> i8 {
        match kind {
            TransformKind::Decimation => spin_of(bits, self.center),
            TransformKind::Majority => {
                let down = (bits & self.mask).count_ones() as i64;
                let up = self.mask.count_ones() as i64 - down;
                if up > down {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

/// `φ_y(σ)`: the block spin assigned to image site `y`.
pub fn phi(spec: &KernelSpec, y: &Site, config: &SpinConfig<'_>) -> Result<i8> {
    let layout = BlockMask::locate(spec, y, config.sites())?;
    Ok(layout.phi(spec.kind, config.bits()))
}

/// `T_y(σ, σ')`, either 0 or 2.
pub fn t_value(spec: &KernelSpec, y: &Site, config: &SpinConfig<'_>, sprime: i8) -> Result<u8> {
    if sprime != 1 && sprime != -1 {
        return Err(Error::InvalidParameter(format!("block spin {sprime}")));
    }
    Ok(if phi(spec, y, config)? == sprime { 2 } else { 0 })
}

/// `ν = C(s-1, (s-1)/2) / 2^{s-1}` in exact integer arithmetic.
pub fn nu(spec: &KernelSpec) -> Result<BigRational> {
    if spec.kind != TransformKind::Majority {
        return Err(Error::InvalidSpec("ν is defined for majority rule only".into()));
    }
    Ok(nu_for_block_size(spec.s()))
}

/// `ν` as a function of the (odd) block size alone.
pub fn nu_for_block_size(s: usize) -> BigRational {
    assert!(s % 2 == 1, "block size must be odd");
    let c: BigUint = num::integer::binomial(BigUint::from(s - 1), BigUint::from((s - 1) / 2));
    BigRational::new(BigInt::from(c), BigInt::from(1) << (s - 1))
}

/// `ν` by enumerating all `2^s` block configurations: the average of `σ_x φ(σ)` at one site.
pub fn nu_brute_force(spec: &KernelSpec, cap: EnumerationCap) -> Result<BigRational> {
    if spec.kind != TransformKind::Majority {
        return Err(Error::InvalidSpec("ν is defined for majority rule only".into()));
    }
    let origin = spec.geom().origin();
    let sites = block(&origin, spec.geom())?;
    let layout = BlockMask::locate(spec, &origin, &sites)?;
    let site_bit = 1u64 << sites.position(&origin).expect("origin in its block");
    let count = count_over_bits(sites.len(), cap, |bits| {
        parity_sign(bits, site_bit) * layout.phi(spec.kind, bits) as i64
    })?;
    Ok(normalized(count, sites.len()))
}

/// Outcome of the exhaustive kernel-law check on the origin block.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelLaws {
    pub configurations: usize,
    /// Configurations violating `T(σ, σ') = T(-σ, -σ')`.
    pub symmetry_violations: usize,
    /// Configurations with `Σ_{σ'} T(σ, σ') ≠ 1` (normalized sum).
    pub normalization_violations: usize,
    /// Normalized sums over `σ` of `T(σ, +1)` and `T(σ, -1)`.
    pub balance: (BigRational, BigRational),
}

impl KernelLaws {
    pub fn holds(&self) -> bool {
        let one = BigRational::from_integer(1.into());
        self.symmetry_violations == 0
            && self.normalization_violations == 0
            && self.balance.0 == one
            && self.balance.1 == one
    }
}

/// Checks symmetry, normalization and balance over every configuration of the origin block.
pub fn check_kernel_laws(spec: &KernelSpec, cap: EnumerationCap) -> Result<KernelLaws> {
    let y = spec.geom().origin();
    let sites = block(&y, spec.geom())?;
    let mut symmetry_violations = 0;
    let mut normalization_violations = 0;
    let (mut plus, mut minus) = (0i64, 0i64);
    let mut configurations = 0;
    for config in enumerate_configs(&sites, cap)? {
        configurations += 1;
        let flipped = config.flipped();
        for sp in [1i8, -1] {
            if t_value(spec, &y, &config, sp)? != t_value(spec, &y, &flipped, -sp)? {
                symmetry_violations += 1;
            }
        }
        let up = t_value(spec, &y, &config, 1)? as i64;
        let down = t_value(spec, &y, &config, -1)? as i64;
        // (up + down) / 2 must equal 1
        if up + down != 2 {
            normalization_violations += 1;
        }
        plus += up;
        minus += down;
    }
    Ok(KernelLaws {
        configurations,
        symmetry_violations,
        normalization_violations,
        balance: (normalized(plus, sites.len()), normalized(minus, sites.len())),
    })
}
