//! Linearizations at infinite temperature and their adjoints.
//!
//! Decimation: `(LK)(Z) = K(bZ)` and `(L*K)(bY) = K(Y)`, with the origin
//! singleton mapped to zero.
//!
//! Majority rule: `(LK)(Z) = Σ_{W ⊆ Z^o} ∏_{z∈Z} χ(W ∩ z^o) K(W)` and
//! `(L*K)(∪_n W_n) = ∏_n χ(W_n) K({n : W_n ≠ ∅})`, where
//! `χ(A) = avg_σ avg_{σ'} T(σ, σ') σ_A σ'` is a per-block correlation.
//! Every application is driven by the input support, so results on finite
//! vectors are exact restrictions of the infinite-lattice operators.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num::{BigRational, Zero};
use rayon::prelude::*;

use crate::coeff::{pairing, CoefficientVector, LatticeTag};
use crate::error::{Error, Result};
use crate::kernel::{BlockMask, KernelSpec, TransformKind};
use crate::lattice::{block, block_cover, decompose_by_blocks, region, scale_set, Site, SiteSet};
use crate::scalar::{int, Scalar};
use crate::spin::{count_over_bits, normalized, parity_sign, EnumerationCap};

/// Largest number of original sets a single adjoint application may emit.
pub const MAX_ADJOINT_FANOUT: u128 = 1 << 22;

/// Block size up to which the adjoint of majority rule is supported (full odd χ table).
pub const MAX_TABLE_BLOCK: usize = 13;

/// Memoized `χ` values for one majority geometry, keyed by pattern bits over the origin block.
#[derive(Debug)]
pub struct ChiTable {
    spec: KernelSpec,
    origin_block: SiteSet,
    layout: BlockMask,
    cap: EnumerationCap,
    values: RwLock<HashMap<u64, BigRational>>,
    odd_patterns: OnceLock<Vec<(u64, BigRational)>>,
}

impl ChiTable {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        if spec.kind() != TransformKind::Majority {
            return Err(Error::InvalidSpec("χ is defined for majority rule only".into()));
        }
        let origin = spec.geom().origin();
        let origin_block = block(&origin, spec.geom())?;
        let layout = BlockMask::locate(spec, &origin, &origin_block)?;
        Ok(Self {
            spec: *spec,
            origin_block,
            layout,
            cap: EnumerationCap::default(),
            values: RwLock::new(HashMap::new()),
            odd_patterns: OnceLock::new(),
        })
    }

    /// Process-wide table for `spec`, created on first use.
    pub fn shared(spec: &KernelSpec) -> Result<Arc<ChiTable>> {
        static TABLES: OnceLock<RwLock<HashMap<KernelSpec, Arc<ChiTable>>>> = OnceLock::new();
        let tables = TABLES.get_or_init(Default::default);
        if let Some(t) = tables.read().expect("chi cache poisoned").get(spec) {
            return Ok(t.clone());
        }
        let table = Arc::new(ChiTable::new(spec)?);
        let mut guard = tables.write().expect("chi cache poisoned");
        Ok(guard.entry(*spec).or_insert(table).clone())
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn origin_block(&self) -> &SiteSet {
        &self.origin_block
    }

    /// Brute-force `χ` of the pattern `mask` over all `2^s` block configurations.
    pub fn brute_force(&self, mask: u64) -> Result<BigRational> {
        let n = self.origin_block.len();
        let count = count_over_bits(n, self.cap, |bits| {
            // the σ' sum keeps only σ' = φ(σ), where T = 2 cancels the 1/2 normalization
            parity_sign(bits, mask) * self.layout.phi(TransformKind::Majority, bits) as i64
        })?;
        Ok(normalized(count, n))
    }

    pub fn by_mask(&self, mask: u64) -> Result<BigRational> {
        if let Some(v) = self.values.read().expect("chi cache poisoned").get(&mask) {
            return Ok(v.clone());
        }
        let v = self.brute_force(mask)?;
        self.values.write().expect("chi cache poisoned").insert(mask, v.clone());
        Ok(v)
    }

    /// `χ(A)` for a pattern inside the origin block.
    pub fn at_origin(&self, pattern: &SiteSet) -> Result<BigRational> {
        if pattern.is_empty() {
            // Σ_σ σ' T(σ, σ') vanishes by balance
            return Ok(BigRational::zero());
        }
        let mask = self.origin_block.mask_of(pattern).ok_or_else(|| Error::NotInBlock {
            pattern: pattern.clone(),
            block: self.spec.geom().origin(),
        })?;
        self.by_mask(mask)
    }

    /// `χ(A)` for `A ⊆ z^o`, evaluated on the pattern shifted to the origin block.
    pub fn at(&self, pattern: &SiteSet, z: &Site) -> Result<BigRational> {
        let shift = z.scaled(-self.spec.geom().blocking_factor());
        self.at_origin(&pattern.translated(&shift)).map_err(|e| match e {
            Error::NotInBlock { .. } => Error::NotInBlock { pattern: pattern.clone(), block: z.clone() },
            other => other,
        })
    }

    /// All odd-size patterns with their `χ` values, computed once.
    pub fn odd_patterns(&self) -> Result<&[(u64, BigRational)]> {
        if let Some(t) = self.odd_patterns.get() {
            return Ok(t);
        }
        let s = self.origin_block.len();
        if s > MAX_TABLE_BLOCK {
            return Err(Error::InvalidSpec(format!(
                "full χ table limited to block size {MAX_TABLE_BLOCK}, got {s}"
            )));
        }
        let masks: Vec<u64> = (1u64..1 << s).filter(|m| m.count_ones() % 2 == 1).collect();
        let table = masks
            .par_iter()
            .map(|&m| self.brute_force(m).map(|v| (m, v)))
            .collect::<Result<Vec<_>>>()?;
        {
            let mut cache = self.values.write().expect("chi cache poisoned");
            for (m, v) in &table {
                cache.insert(*m, v.clone());
            }
        }
        Ok(self.odd_patterns.get_or_init(|| table))
    }
}

/// `χ(A)` for `A ⊆ z^o` under majority rule.
pub fn chi(spec: &KernelSpec, pattern: &SiteSet, z: &Site) -> Result<BigRational> {
    if pattern.is_empty() {
        return Err(Error::EmptySet("chi"));
    }
    ChiTable::shared(spec)?.at(pattern, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `L`: original → image.
    Forward,
    /// `L*`: image → original.
    Adjoint,
}

fn expect_tag<S: Scalar>(k: &CoefficientVector<S>, tag: LatticeTag) -> Result<()> {
    if k.tag() != tag {
        return Err(Error::LatticeTagMismatch { left: k.tag().name(), right: tag.name() });
    }
    Ok(())
}

/// `(LK)(Z) = K(bZ)`.
pub fn apply_l_decimation<S: Scalar>(
    spec: &KernelSpec,
    k: &CoefficientVector<S>,
) -> Result<CoefficientVector<S>> {
    expect_tag(k, LatticeTag::Original)?;
    let b = spec.geom().blocking_factor();
    let mut out = CoefficientVector::new(k.dimension(), LatticeTag::Image);
    for (set, v) in k.iter() {
        let shrunk: Option<Vec<Site>> = set.iter().map(|x| x.divided(b)).collect();
        if let Some(sites) = shrunk {
            // division by b preserves lexicographic order
            out.insert(SiteSet::try_from(sites)?, v.clone())?;
        }
    }
    Ok(out)
}

/// `(L*K)(bY) = K(Y)`, zero elsewhere and at the origin singleton.
pub fn apply_lstar_decimation<S: Scalar>(
    spec: &KernelSpec,
    k: &CoefficientVector<S>,
) -> Result<CoefficientVector<S>> {
    expect_tag(k, LatticeTag::Image)?;
    let mut out = CoefficientVector::new(k.dimension(), LatticeTag::Original);
    for (set, v) in k.iter() {
        if set.len() == 1 && set.sites()[0].is_origin() {
            continue;
        }
        out.insert(scale_set(set, spec.geom())?, v.clone())?;
    }
    Ok(out)
}

/// Majority-rule `L`: each `W` feeds exactly the entry `Z(W) = {n : W ∩ n^o ≠ ∅}`.
pub fn apply_l_majority<S: Scalar>(
    table: &ChiTable,
    k: &CoefficientVector<S>,
) -> Result<CoefficientVector<S>> {
    expect_tag(k, LatticeTag::Original)?;
    let geom = table.spec().geom();
    let mut out = CoefficientVector::new(k.dimension(), LatticeTag::Image);
    for (set, v) in k.iter() {
        let parts = decompose_by_blocks(set, geom)?;
        let mut coefficient = int(1);
        for (n, part) in &parts {
            coefficient *= table.at(part, n)?;
            if coefficient.is_zero() {
                break;
            }
        }
        if coefficient.is_zero() {
            continue;
        }
        let image_set = SiteSet::try_from(parts.into_keys().collect::<Vec<_>>())?;
        out.accumulate(image_set, S::from_rational(&coefficient) * v.clone())?;
    }
    Ok(out)
}

/// Majority-rule `L*`, emitted constructively for sets inside `window`.
///
/// Every `Y` in the support fans out to all `∪_{n∈Y} W_n` with `W_n ⊆ n^o`
/// of odd size (even parts have `χ = 0`). The window must contain
/// `region(Y)` for every support set.
pub fn apply_lstar_majority<S: Scalar>(
    table: &ChiTable,
    k: &CoefficientVector<S>,
    window: &SiteSet,
) -> Result<CoefficientVector<S>> {
    expect_tag(k, LatticeTag::Image)?;
    let geom = table.spec().geom();
    let b = geom.blocking_factor();
    let patterns = table.odd_patterns()?;
    let nonzero: Vec<(SiteSet, S)> = patterns
        .iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(m, v)| (table.origin_block().subset_from_mask(*m), S::from_rational(v)))
        .collect();
    let mut out = CoefficientVector::new(k.dimension(), LatticeTag::Original);
    for (image_set, v) in k.iter() {
        let reg = region(image_set, geom)?;
        if !reg.is_subset(window) {
            return Err(Error::WindowTooSmall(reg));
        }
        let fanout = (nonzero.len() as u128).checked_pow(image_set.len() as u32).unwrap_or(u128::MAX);
        if fanout > MAX_ADJOINT_FANOUT {
            return Err(Error::FanoutTooLarge(fanout));
        }
        let shifts: Vec<Site> = image_set.iter().map(|n| n.scaled(b)).collect();
        let mut partial: Vec<(Vec<Site>, S)> = vec![(Vec::new(), v.clone())];
        for shift in &shifts {
            let mut next = Vec::with_capacity(partial.len() * nonzero.len());
            for (sites, value) in &partial {
                for (pattern, c) in &nonzero {
                    let mut grown = sites.clone();
                    grown.extend(pattern.translated(shift).iter().cloned());
                    next.push((grown, value.clone() * c.clone()));
                }
            }
            partial = next;
        }
        for (sites, value) in partial {
            out.accumulate(SiteSet::try_from(sites)?, value)?;
        }
    }
    Ok(out)
}

/// `∂J'(Z)/∂J(W)` at infinite temperature from the closed forms.
pub fn jacobian_closed_form(spec: &KernelSpec, z: &SiteSet, w: &SiteSet) -> Result<BigRational> {
    if z.is_empty() || w.is_empty() {
        return Err(Error::EmptySet("jacobian_closed_form"));
    }
    match spec.kind() {
        TransformKind::Decimation => {
            Ok(if &scale_set(z, spec.geom())? == w { int(1) } else { int(0) })
        }
        TransformKind::Majority => {
            if &block_cover(w, spec.geom()) != z {
                return Ok(int(0));
            }
            let table = ChiTable::shared(spec)?;
            let mut product = int(1);
            for (n, part) in decompose_by_blocks(w, spec.geom())? {
                product *= table.at(&part, &n)?;
            }
            Ok(product)
        }
    }
}

/// `L` or `L*` for one kernel.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    spec: KernelSpec,
    direction: Direction,
    chi: Option<Arc<ChiTable>>,
}

impl LinearOperator {
    pub fn new(spec: KernelSpec, direction: Direction) -> Result<Self> {
        let chi = match spec.kind() {
            TransformKind::Majority => Some(ChiTable::shared(&spec)?),
            TransformKind::Decimation => None,
        };
        Ok(Self { spec, direction, chi })
    }

    pub fn forward(spec: KernelSpec) -> Result<Self> {
        Self::new(spec, Direction::Forward)
    }

    pub fn adjoint(spec: KernelSpec) -> Result<Self> {
        Self::new(spec, Direction::Adjoint)
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn input_tag(&self) -> LatticeTag {
        match self.direction {
            Direction::Forward => LatticeTag::Original,
            Direction::Adjoint => LatticeTag::Image,
        }
    }

    /// Applies the operator; the majority adjoint uses the smallest exact window.
    pub fn apply<S: Scalar>(&self, k: &CoefficientVector<S>) -> Result<CoefficientVector<S>> {
        match (self.spec.kind(), self.direction) {
            (TransformKind::Decimation, Direction::Forward) => apply_l_decimation(&self.spec, k),
            (TransformKind::Decimation, Direction::Adjoint) => apply_lstar_decimation(&self.spec, k),
            (TransformKind::Majority, Direction::Forward) => {
                apply_l_majority(self.chi.as_ref().expect("majority table"), k)
            }
            (TransformKind::Majority, Direction::Adjoint) => {
                let window = natural_window(&self.spec, k)?;
                apply_lstar_majority(self.chi.as_ref().expect("majority table"), k, &window)
            }
        }
    }
}

/// Union of `region(Y)` over the support: the smallest window for an exact majority adjoint.
pub fn natural_window<S: Scalar>(spec: &KernelSpec, k: &CoefficientVector<S>) -> Result<SiteSet> {
    let image = k.support_sites();
    if image.is_empty() {
        return Ok(SiteSet::empty());
    }
    region(&image, spec.geom())
}

/// `⟨K1, LK2⟩ - ⟨K2, L*K1⟩` for image `K1` and original `K2`.
///
/// Zero for majority rule. For decimation it equals `K1({0})·K2({0})`,
/// the term removed by the origin convention of `L*`.
pub fn adjoint_pairing_defect<S: Scalar>(
    spec: &KernelSpec,
    k1: &CoefficientVector<S>,
    k2: &CoefficientVector<S>,
) -> Result<S> {
    let forward = LinearOperator::forward(*spec)?.apply(k2)?;
    let adjoint = LinearOperator::adjoint(*spec)?.apply(k1)?;
    Ok(pairing(k1, &forward)? - pairing(k2, &adjoint)?)
}

/// Jacobian matrix `∂J'(Z)/∂J(W)` from the closed forms, keyed by `(Z, W)`.
pub fn jacobian_matrix(
    spec: &KernelSpec,
    image_sets: &[SiteSet],
    original_sets: &[SiteSet],
) -> Result<BTreeMap<(SiteSet, SiteSet), BigRational>> {
    let mut out = BTreeMap::new();
    for z in image_sets {
        for w in original_sets {
            out.insert((z.clone(), w.clone()), jacobian_closed_form(spec, z, w)?);
        }
    }
    Ok(out)
}
