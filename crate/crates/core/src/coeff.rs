//! Finitely supported interaction vectors and the paired weighted norms.
//!
//! `‖K‖_r = sup_x Σ_{X∋x} |K(X)| e^{r·l(x,X)}` and
//! `‖K‖*_r = Σ_x sup_{X∋x} |K(X)| e^{-r·l(x,X)} / |X|`.
//! Both range over sites of the support only, so for finite support they
//! are evaluated exactly.

use std::collections::BTreeMap;
use std::fmt;

use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{extent, Site, SiteSet};
use crate::scalar::{parse_rational, rational_to_f64, Complex64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeTag {
    Original,
    Image,
}

impl LatticeTag {
    pub fn name(&self) -> &'static str {
        match self {
            LatticeTag::Original => "original",
            LatticeTag::Image => "image",
        }
    }

    pub fn flipped(&self) -> Self {
        match self {
            LatticeTag::Original => LatticeTag::Image,
            LatticeTag::Image => LatticeTag::Original,
        }
    }
}

impl fmt::Display for LatticeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A finite-support map from nonempty site sets to scalars. Zero entries are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<S> {
    dimension: usize,
    tag: LatticeTag,
    entries: BTreeMap<SiteSet, S>,
}

impl<S: Scalar> CoefficientVector<S> {
    pub fn new(dimension: usize, tag: LatticeTag) -> Self {
        Self { dimension, tag, entries: BTreeMap::new() }
    }

    /// The vector with a single entry `value` at `set`.
    pub fn delta(dimension: usize, tag: LatticeTag, set: SiteSet, value: S) -> Result<Self> {
        let mut k = Self::new(dimension, tag);
        k.insert(set, value)?;
        Ok(k)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn tag(&self) -> LatticeTag {
        self.tag
    }

    pub fn with_tag(mut self, tag: LatticeTag) -> Self {
        self.tag = tag;
        self
    }

    fn check_key(&self, set: &SiteSet) -> Result<()> {
        match set.dimension() {
            None => Err(Error::EmptySet("interaction entry")),
            Some(d) if d != self.dimension => {
                Err(Error::DimensionMismatch { expected: self.dimension, found: d })
            }
            Some(_) => Ok(()),
        }
    }

    /// Sets `K(set) = value`, removing the entry when `value` is zero.
    pub fn insert(&mut self, set: SiteSet, value: S) -> Result<()> {
        self.check_key(&set)?;
        if value.is_zero() {
            self.entries.remove(&set);
        } else {
            self.entries.insert(set, value);
        }
        Ok(())
    }

    /// `K(set) += value`.
    pub fn accumulate(&mut self, set: SiteSet, value: S) -> Result<()> {
        self.check_key(&set)?;
        let current = self.entries.remove(&set).unwrap_or_else(S::zero);
        let next = current + value;
        if !next.is_zero() {
            self.entries.insert(set, next);
        }
        Ok(())
    }

    pub fn get(&self, set: &SiteSet) -> S {
        self.entries.get(set).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SiteSet, &S)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &SiteSet> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Union of all support sets.
    pub fn support_sites(&self) -> SiteSet {
        self.entries.keys().fold(SiteSet::empty(), |acc, s| acc.union(s))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> CoefficientVector<T> {
        let mut out = CoefficientVector::new(self.dimension, self.tag);
        for (set, v) in &self.entries {
            out.insert(set.clone(), f(v)).expect("keys already validated");
        }
        out
    }

    pub fn scaled(&self, factor: &S) -> Self {
        self.map(|v| factor.clone() * v.clone())
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        check_tags(self.tag, other.tag)?;
        let mut out = self.clone();
        for (set, v) in &other.entries {
            out.accumulate(set.clone(), -v.clone())?;
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_tags(self.tag, other.tag)?;
        let mut out = self.clone();
        for (set, v) in &other.entries {
            out.accumulate(set.clone(), v.clone())?;
        }
        Ok(out)
    }
}

fn check_tags(left: LatticeTag, right: LatticeTag) -> Result<()> {
    if left != right {
        return Err(Error::LatticeTagMismatch { left: left.name(), right: right.name() });
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("norm weight r must be a finite r ≥ 0, got {r}")));
    }
    Ok(())
}

/// `‖K‖_r`.
pub fn norm_r<S: Scalar>(k: &CoefficientVector<S>, r: f64) -> Result<f64> {
    check_r(r)?;
    let mut per_site: BTreeMap<&Site, f64> = BTreeMap::new();
    for (set, v) in k.iter() {
        let m = v.modulus();
        for x in set {
            *per_site.entry(x).or_insert(0.0) += m * (r * extent(x, set) as f64).exp();
        }
    }
    Ok(per_site.into_values().fold(0.0, f64::max))
}

/// `‖K‖*_r`.
pub fn norm_r_star<S: Scalar>(k: &CoefficientVector<S>, r: f64) -> Result<f64> {
    check_r(r)?;
    let mut per_site: BTreeMap<&Site, f64> = BTreeMap::new();
    for (set, v) in k.iter() {
        let m = v.modulus() / set.len() as f64;
        for x in set {
            let w = m * (-r * extent(x, set) as f64).exp();
            let e = per_site.entry(x).or_insert(0.0);
            *e = e.max(w);
        }
    }
    Ok(per_site.into_values().sum())
}

/// `Σ_X K1(X)·K2(X)`.
pub fn pairing<S: Scalar>(k1: &CoefficientVector<S>, k2: &CoefficientVector<S>) -> Result<S> {
    check_tags(k1.tag, k2.tag)?;
    let (small, large) = if k1.len() <= k2.len() { (k1, k2) } else { (k2, k1) };
    Ok(small
        .iter()
        .filter_map(|(set, v)| large.entries.get(set).map(|w| v.clone() * w.clone()))
        .fold(S::zero(), |acc, t| acc + t))
}

/// True when every support set has even cardinality.
pub fn is_even<S: Scalar>(k: &CoefficientVector<S>) -> bool {
    k.support().all(|set| set.len() % 2 == 0)
}

/// Translate `X` so that its lexicographically smallest site is the origin.
pub fn orbit_rep(set: &SiteSet) -> Result<SiteSet> {
    let first = set.sites().first().ok_or(Error::EmptySet("orbit_rep"))?;
    let shift = Site::origin(first.dimension()).minus(first);
    Ok(set.translated(&shift))
}

/// A translation-invariant vector, stored by orbit representative.
#[derive(Debug, Clone, PartialEq)]
pub struct TIVector<S> {
    dimension: usize,
    even_only: bool,
    entries: BTreeMap<SiteSet, S>,
}

impl<S: Scalar> TIVector<S> {
    pub fn new(dimension: usize, even_only: bool) -> Self {
        Self { dimension, even_only, entries: BTreeMap::new() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn even_only(&self) -> bool {
        self.even_only
    }

    /// Sets the value on the orbit of `set` (any member of the orbit may be passed).
    pub fn insert(&mut self, set: &SiteSet, value: S) -> Result<()> {
        match set.dimension() {
            None => return Err(Error::EmptySet("orbit entry")),
            Some(d) if d != self.dimension => {
                return Err(Error::DimensionMismatch { expected: self.dimension, found: d })
            }
            Some(_) => {}
        }
        if self.even_only && set.len() % 2 == 1 {
            return Err(Error::InvalidParameter(format!(
                "odd set {set} in an even-only translation-invariant vector"
            )));
        }
        let rep = orbit_rep(set)?;
        if value.is_zero() {
            self.entries.remove(&rep);
        } else {
            self.entries.insert(rep, value);
        }
        Ok(())
    }

    /// Value at any set (looked up through its orbit representative).
    pub fn get(&self, set: &SiteSet) -> S {
        orbit_rep(set)
            .ok()
            .and_then(|rep| self.entries.get(&rep).cloned())
            .unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SiteSet, &S)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `‖K‖_0` of a translation-invariant vector: `Σ_O |X_O|·|K(O)|`.
///
/// A shape with `|X|` sites has exactly `|X|` translates containing a fixed site.
pub fn ti_norm0<S: Scalar>(k: &TIVector<S>) -> f64 {
    k.iter().map(|(rep, v)| rep.len() as f64 * v.modulus()).sum()
}

/// JSON interaction file: `{"dimension", "lattice", "terms": [{"sites", "value"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionFile {
    pub dimension: usize,
    pub lattice: LatticeTag,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub sites: Vec<Site>,
    pub value: TermValue,
}

/// A real number, a `[re, im]` pair, or an exact `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TermValue {
    Real(f64),
    Complex([f64; 2]),
    Exact(String),
}

impl TermValue {
    fn to_complex(&self) -> Result<Complex64> {
        match self {
            TermValue::Real(v) => Ok(Complex64::new(*v, 0.0)),
            TermValue::Complex([re, im]) => Ok(Complex64::new(*re, *im)),
            TermValue::Exact(text) => parse_rational(text)
                .map(|q| Complex64::new(rational_to_f64(&q), 0.0))
                .ok_or_else(|| Error::Parse(format!("bad value `{text}`"))),
        }
    }

    fn to_rational(&self) -> Result<BigRational> {
        match self {
            TermValue::Exact(text) => {
                parse_rational(text).ok_or_else(|| Error::Parse(format!("bad value `{text}`")))
            }
            TermValue::Real(v) => BigRational::from_float(*v)
                .ok_or_else(|| Error::Parse(format!("non-finite value {v}"))),
            TermValue::Complex(_) => Err(Error::Parse("complex value where a real was expected".into())),
        }
    }
}

impl InteractionFile {
    fn canonical_terms(&self) -> Result<Vec<(SiteSet, &TermValue)>> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let set = crate::lattice::canonical_set(term.sites.clone())?;
            if !seen.insert(set.clone()) {
                return Err(Error::DuplicateSet(set));
            }
            out.push((set, &term.value));
        }
        Ok(out)
    }

    pub fn to_complex_vector(&self) -> Result<CoefficientVector<Complex64>> {
        let mut k = CoefficientVector::new(self.dimension, self.lattice);
        for (set, value) in self.canonical_terms()? {
            k.insert(set, value.to_complex()?)?;
        }
        Ok(k)
    }

    /// Real-valued view; complex entries with a nonzero imaginary part are rejected.
    pub fn to_real_vector(&self) -> Result<CoefficientVector<f64>> {
        let mut k = CoefficientVector::new(self.dimension, self.lattice);
        for (set, value) in self.canonical_terms()? {
            let z = value.to_complex()?;
            if z.im != 0.0 {
                return Err(Error::Parse(format!("complex value at {set} where a real was expected")));
            }
            k.insert(set, z.re)?;
        }
        Ok(k)
    }

    pub fn to_exact_vector(&self) -> Result<CoefficientVector<BigRational>> {
        let mut k = CoefficientVector::new(self.dimension, self.lattice);
        for (set, value) in self.canonical_terms()? {
            k.insert(set, value.to_rational()?)?;
        }
        Ok(k)
    }

    /// Canonical file form: terms in set order, real values as plain numbers.
    pub fn from_vector<S: Scalar>(k: &CoefficientVector<S>) -> Self {
        let terms = k
            .iter()
            .map(|(set, v)| {
                let z = v.to_complex();
                let value = if z.im == 0.0 { TermValue::Real(z.re) } else { TermValue::Complex([z.re, z.im]) };
                Term { sites: set.sites().to_vec(), value }
            })
            .collect();
        InteractionFile { dimension: k.dimension, lattice: k.tag, terms }
    }
}
