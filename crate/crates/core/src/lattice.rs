//! Lattice geometry for the original lattice and the block (image) lattice.
//!
//! Both lattices are ℤ^d. A site `y` of the image lattice owns the cubical
//! block `y^o` of `b^d` original sites; blocks tile the original lattice.
//! Distances are Chebyshev (coordinate-max), so extents stay integral and
//! scale exactly under `x ↦ b·x`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Geometry {
    dimension: usize,
    blocking_factor: i64,
}

impl Geometry {
    pub fn new(dimension: usize, blocking_factor: i64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if blocking_factor < 2 {
            return Err(Error::InvalidParameter(format!(
                "blocking factor must be at least 2, got {blocking_factor}"
            )));
        }
        Ok(Self { dimension, blocking_factor })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn blocking_factor(&self) -> i64 {
        self.blocking_factor
    }

    pub fn is_odd(&self) -> bool {
        self.blocking_factor % 2 == 1
    }

    /// Number of original sites per block, `b^d`.
    pub fn block_size(&self) -> usize {
        (self.blocking_factor as usize).pow(self.dimension as u32)
    }

    /// Offset of the lowest block coordinate below `b·y_i`.
    ///
    /// `(b-1)/2` for odd `b` and `(b-2)/2` for even `b`; both are `⌊(b-1)/2⌋`.
    fn low_offset(&self) -> i64 {
        (self.blocking_factor - 1) / 2
    }

    pub fn origin(&self) -> Site {
        Site::origin(self.dimension)
    }

    /// The site `(k, 0, …, 0)`.
    pub fn axis_site(&self, k: i64) -> Site {
        let mut coords = vec![0; self.dimension];
        coords[0] = k;
        Site::new(coords)
    }

    fn check(&self, site: &Site) -> Result<()> {
        if site.dimension() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: site.dimension() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site(Vec<i64>);

impl Site {
    pub fn new(coords: Vec<i64>) -> Self {
        Site(coords)
    }

    pub fn origin(dimension: usize) -> Self {
        Site(vec![0; dimension])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scaled(&self, factor: i64) -> Site {
        Site(self.0.iter().map(|c| c * factor).collect())
    }

    /// Exact division of every coordinate, `None` when some coordinate is not divisible.
    pub fn divided(&self, factor: i64) -> Option<Site> {
        self.0
            .iter()
            .map(|&c| (c % factor == 0).then_some(c / factor))
            .collect::<Option<Vec<_>>>()
            .map(Site)
    }

    pub fn offset(&self, shift: &Site) -> Site {
        Site(self.0.iter().zip(&shift.0).map(|(a, b)| a + b).collect())
    }

    pub fn minus(&self, shift: &Site) -> Site {
        Site(self.0.iter().zip(&shift.0).map(|(a, b)| a - b).collect())
    }

    /// Chebyshev distance.
    pub fn dist(&self, other: &Site) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).max().unwrap_or(0)
    }

    /// Largest coordinate magnitude (distance to the origin).
    pub fn radius(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A finite set of sites in canonical (sorted, deduplicated) order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Site>", into = "Vec<Site>")]
pub struct SiteSet(Vec<Site>);

impl TryFrom<Vec<Site>> for SiteSet {
    type Error = Error;

    fn try_from(sites: Vec<Site>) -> Result<Self> {
        canonical_set(sites)
    }
}

impl From<SiteSet> for Vec<Site> {
    fn from(set: SiteSet) -> Self {
        set.0
    }
}

impl SiteSet {
    pub fn empty() -> Self {
        SiteSet(Vec::new())
    }

    pub fn singleton(site: Site) -> Self {
        SiteSet(vec![site])
    }

    /// Convenience constructor for tests and examples: panics on mixed dimensions.
    pub fn from_coords<I, C>(coords: I) -> Self
    where
        I: IntoIterator<Item = C>,
        C: Into<Vec<i64>>,
    {
        canonical_set(coords.into_iter().map(|c| Site::new(c.into())).collect())
            .expect("consistent dimensions")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Site> {
        self.0.iter()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.0.first().map(Site::dimension)
    }

    pub fn contains(&self, site: &Site) -> bool {
        self.0.binary_search(site).is_ok()
    }

    pub fn position(&self, site: &Site) -> Option<usize> {
        self.0.binary_search(site).ok()
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.0.iter().all(|s| other.contains(s))
    }

    pub fn is_disjoint(&self, other: &SiteSet) -> bool {
        self.0.iter().all(|s| !other.contains(s))
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        let mut sites: Vec<Site> = self.0.iter().chain(other.0.iter()).cloned().collect();
        sites.sort();
        sites.dedup();
        SiteSet(sites)
    }

    pub fn intersection(&self, other: &SiteSet) -> SiteSet {
        SiteSet(self.0.iter().filter(|s| other.contains(s)).cloned().collect())
    }

    pub fn translated(&self, shift: &Site) -> SiteSet {
        // translation preserves lexicographic order
        SiteSet(self.0.iter().map(|s| s.offset(shift)).collect())
    }

    /// Largest coordinate magnitude over the set; 0 when empty.
    pub fn radius(&self) -> i64 {
        self.0.iter().map(Site::radius).max().unwrap_or(0)
    }

    /// All nonempty subsets, ordered by the bitmask over the canonical site order.
    pub fn nonempty_subsets(&self) -> Vec<SiteSet> {
        let n = self.0.len();
        assert!(n < 31, "subset enumeration limited to 30 sites");
        (1u32..(1 << n)).map(|mask| self.subset_from_mask(mask as u64)).collect()
    }

    /// The subset selected by `mask` (bit `i` ↦ `i`-th site in canonical order).
    pub fn subset_from_mask(&self, mask: u64) -> SiteSet {
        SiteSet(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, s)| s.clone())
                .collect(),
        )
    }

    /// Bitmask of `subset` relative to this set's canonical order.
    pub fn mask_of(&self, subset: &SiteSet) -> Option<u64> {
        let mut mask = 0u64;
        for site in subset.iter() {
            mask |= 1 << self.position(site)?;
        }
        Some(mask)
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

impl<'a> IntoIterator for &'a SiteSet {
    type Item = &'a Site;
    type IntoIter = std::slice::Iter<'a, Site>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub fn canonical_set(mut sites: Vec<Site>) -> Result<SiteSet> {
    if let Some(first) = sites.first() {
        let expected = first.dimension();
        if let Some(bad) = sites.iter().find(|s| s.dimension() != expected) {
            return Err(Error::DimensionMismatch { expected, found: bad.dimension() });
        }
    }
    sites.sort();
    sites.dedup();
    Ok(SiteSet(sites))
}

/// Lexicographically ordered product of closed coordinate ranges.
fn cube(lows: &[i64], side: i64) -> Vec<Site> {
    let mut out = vec![Vec::with_capacity(lows.len())];
    for &lo in lows {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (lo..lo + side).map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(Site).collect()
}

/// The block `y^o` of `b^d` original sites owned by image site `y`.
pub fn block(y: &Site, geom: &Geometry) -> Result<SiteSet> {
    geom.check(y)?;
    let b = geom.blocking_factor;
    let lows: Vec<i64> = y.0.iter().map(|&c| b * c - geom.low_offset()).collect();
    Ok(SiteSet(cube(&lows, b)))
}

/// `Y^o`, the disjoint union of the blocks of `Y`.
pub fn region(image: &SiteSet, geom: &Geometry) -> Result<SiteSet> {
    if image.is_empty() {
        return Err(Error::EmptySet("region"));
    }
    let mut sites = Vec::with_capacity(image.len() * geom.block_size());
    for y in image {
        sites.extend(block(y, geom)?.0);
    }
    sites.sort();
    Ok(SiteSet(sites))
}

/// The unique image site whose block contains `x`.
pub fn block_index(x: &Site, geom: &Geometry) -> Site {
    let b = geom.blocking_factor;
    let off = geom.low_offset();
    Site(x.0.iter().map(|&c| (c + off).div_euclid(b)).collect())
}

/// `bZ`: every coordinate multiplied by the blocking factor.
pub fn scale_set(set: &SiteSet, geom: &Geometry) -> Result<SiteSet> {
    if set.is_empty() {
        return Err(Error::EmptySet("scale_set"));
    }
    Ok(SiteSet(set.0.iter().map(|s| s.scaled(geom.blocking_factor)).collect()))
}

/// Splits `Z` into its nonempty intersections `W_n = Z ∩ n^o`, keyed by block index `n`.
pub fn decompose_by_blocks(set: &SiteSet, geom: &Geometry) -> Result<BTreeMap<Site, SiteSet>> {
    if set.is_empty() {
        return Err(Error::EmptySet("decompose_by_blocks"));
    }
    let mut parts: BTreeMap<Site, Vec<Site>> = BTreeMap::new();
    for x in set {
        parts.entry(block_index(x, geom)).or_default().push(x.clone());
    }
    // subsequences of a sorted set are sorted
    Ok(parts.into_iter().map(|(n, w)| (n, SiteSet(w))).collect())
}

/// The set of block indices `{n : Z ∩ n^o ≠ ∅}`.
pub fn block_cover(set: &SiteSet, geom: &Geometry) -> SiteSet {
    let mut idx: Vec<Site> = set.iter().map(|x| block_index(x, geom)).collect();
    idx.sort();
    idx.dedup();
    SiteSet(idx)
}

/// `l(x, X)`: the farthest Chebyshev distance from `x` to a point of `X`, 0 for `X = ∅`.
pub fn extent(x: &Site, set: &SiteSet) -> i64 {
    set.iter().map(|y| x.dist(y)).max().unwrap_or(0)
}

/// All sites with every coordinate in `[-radius, radius]`, in canonical order.
pub fn ball(dimension: usize, radius: i64) -> SiteSet {
    SiteSet(cube(&vec![-radius; dimension], 2 * radius + 1))
}
