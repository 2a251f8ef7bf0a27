//! Spectral certificates for the linearized maps.
//!
//! Spectra of the infinite-dimensional operators are never computed. Each
//! membership claim becomes a finite comparison (an eigen-equation residual
//! on a truncation, a norm ratio, a distance lower bound, a growing sequence)
//! and the [`Certificate`] records which claim it witnesses.

use std::f64::consts::PI;

use num::{BigRational, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::{
    norm_r, norm_r_star, ti_norm0, CoefficientVector, InteractionFile, LatticeTag, TIVector, Term,
    TermValue,
};
use crate::error::{Error, Result};
use crate::kernel::{nu_for_block_size, KernelSpec, TransformKind};
use crate::lattice::{ball, block, scale_set, Geometry, Site, SiteSet};
use crate::rg_linear::{Direction, LinearOperator};
use crate::sampling::{random_value, random_vector, rng_for, SupportWindow};
use crate::scalar::{format_rational, int, parse_rational, rational_to_f64, Complex64, Scalar};

/// Slack allowed on float comparisons against exact bounds.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Largest truncation the eigenvector builders will materialize.
pub const MAX_TRUNCATION_ENTRIES: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    Eigenvector,
    NormBound,
    ResidualWitness,
    Divergence,
}

impl CertificateKind {
    /// Eigen-residuals and norm ratios must stay below the bound; witness
    /// distances and divergence probes must reach it. NaN never passes.
    pub fn satisfied(&self, measured: f64, bound: f64) -> bool {
        match self {
            CertificateKind::Eigenvector | CertificateKind::NormBound => measured <= bound,
            CertificateKind::ResidualWitness | CertificateKind::Divergence => measured >= bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Translation-invariant vector in file form, one term per orbit representative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitFile {
    pub dimension: usize,
    pub even_only: bool,
    pub orbits: Vec<Term>,
}

impl OrbitFile {
    pub fn from_ti<S: Scalar>(k: &TIVector<S>) -> Self {
        let orbits = k
            .iter()
            .map(|(rep, v)| Term { sites: rep.sites().to_vec(), value: term_value(v) })
            .collect();
        OrbitFile { dimension: k.dimension(), even_only: k.even_only(), orbits }
    }
}

fn term_value<S: Scalar>(v: &S) -> TermValue {
    let z = v.to_complex();
    if z.im == 0.0 {
        TermValue::Real(z.re)
    } else {
        TermValue::Complex([z.re, z.im])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Vector(InteractionFile),
    Orbits(OrbitFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub transform: KernelSpec,
    /// `[re, im]`.
    pub lambda: [f64; 2],
    pub claim: String,
    pub measured: f64,
    /// Threshold with any float slack already applied.
    pub bound: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub payload: Option<Payload>,
}

impl Certificate {
    pub fn new(
        kind: CertificateKind,
        transform: KernelSpec,
        lambda: Complex64,
        claim: impl Into<String>,
        measured: f64,
        bound: f64,
    ) -> Self {
        let verdict = if kind.satisfied(measured, bound) { Verdict::Pass } else { Verdict::Fail };
        Certificate {
            kind,
            transform,
            lambda: [lambda.re, lambda.im],
            claim: claim.into(),
            measured,
            bound,
            verdict,
            seed: None,
            payload: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_payload(mut self, payload: Payload) -> Self {
        self.payload = Some(payload);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// An eigenvalue given exactly (rational) or as a complex float.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaValue {
    Exact(BigRational),
    Complex(Complex64),
}

impl LambdaValue {
    /// `re` is parsed exactly when possible; a nonzero `im` switches to complex mode.
    pub fn parse(re: &str, im: f64) -> Result<Self> {
        if im != 0.0 {
            let re: f64 = re.trim().parse().map_err(|_| Error::Parse(format!("bad eigenvalue `{re}`")))?;
            return Ok(LambdaValue::Complex(Complex64::new(re, im)));
        }
        parse_rational(re)
            .map(LambdaValue::Exact)
            .ok_or_else(|| Error::Parse(format!("bad eigenvalue `{re}`")))
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            LambdaValue::Exact(q) => q.to_complex(),
            LambdaValue::Complex(z) => *z,
        }
    }
}

fn checked_power(base: i64, exp: usize) -> Result<i64> {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .ok_or_else(|| Error::InvalidParameter(format!("{base}^{exp} overflows the lattice coordinates")))
}

/// Radius `(b^{N+1} - 1)/2` of the majority hierarchy out to depth `N`.
fn majority_radius(b: i64, depth: usize) -> Result<i64> {
    Ok((checked_power(b, depth + 1)? - 1) / 2)
}

/// A vector known exactly on the ball of `radius`, together with the
/// transform whose eigen-equation it is meant to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncated<S> {
    spec: KernelSpec,
    depth: usize,
    radius: i64,
    vector: CoefficientVector<S>,
}

impl<S: Scalar> Truncated<S> {
    /// Wraps an original-lattice vector supported in the depth-`depth` ball.
    ///
    /// The ball has radius `b^depth` for decimation and `(b^{depth+1}-1)/2`
    /// for majority rule.
    pub fn new(spec: KernelSpec, depth: usize, vector: CoefficientVector<S>) -> Result<Self> {
        if vector.tag() != LatticeTag::Original {
            return Err(Error::LatticeTagMismatch { left: vector.tag().name(), right: "original" });
        }
        if vector.dimension() != spec.geom().dimension() {
            return Err(Error::DimensionMismatch { expected: spec.geom().dimension(), found: vector.dimension() });
        }
        let b = spec.geom().blocking_factor();
        let radius = match spec.kind() {
            TransformKind::Decimation => checked_power(b, depth)?,
            TransformKind::Majority => majority_radius(b, depth)?,
        };
        if let Some(set) = vector.support().find(|set| set.radius() > radius) {
            return Err(Error::TruncationViolation(set.clone()));
        }
        Ok(Self { spec, depth, radius, vector })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn vector(&self) -> &CoefficientVector<S> {
        &self.vector
    }

    pub fn into_vector(self) -> CoefficientVector<S> {
        self.vector
    }

    /// True when every set feeding `(LK)(Z)` lies inside the truncation.
    pub fn is_checkable(&self, z: &SiteSet) -> bool {
        if z.dimension() != Some(self.spec.geom().dimension()) {
            return false;
        }
        let b = self.spec.geom().blocking_factor();
        let reach = match self.spec.kind() {
            TransformKind::Decimation => z.radius().checked_mul(b),
            TransformKind::Majority => z.radius().checked_mul(b).and_then(|r| r.checked_add((b - 1) / 2)),
        };
        reach.is_some_and(|r| r <= self.radius)
    }

    /// Singletons, adjacent pairs and axis-chain sets, all checkable.
    pub fn default_check_sets(&self) -> Vec<SiteSet> {
        let geom = self.spec.geom();
        let d = geom.dimension();
        let b = geom.blocking_factor();
        // largest image radius whose preimage stays inside the truncation
        let reach = match self.spec.kind() {
            TransformKind::Decimation => self.radius / b,
            TransformKind::Majority => (self.radius - (b - 1) / 2) / b,
        };
        let single_radius = reach.min(if d == 1 { 4096 } else { 40 });
        let pair_radius = reach.min(3);
        let mut sets: Vec<SiteSet> = ball(d, single_radius).iter().cloned().map(SiteSet::singleton).collect();
        let step = geom.axis_site(1);
        for x in ball(d, pair_radius).iter() {
            let y = x.offset(&step);
            if y.radius() <= pair_radius {
                sets.push(SiteSet::try_from(vec![x.clone(), y]).expect("same dimension"));
            }
        }
        let mut k = 1;
        while k <= reach {
            sets.push(SiteSet::singleton(geom.axis_site(k)));
            sets.push(SiteSet::try_from(vec![geom.origin(), geom.axis_site(k)]).expect("same dimension"));
            k = match k.checked_mul(b) {
                Some(next) => next,
                None => break,
            };
        }
        sets.sort();
        sets.dedup();
        sets.retain(|z| self.is_checkable(z));
        sets
    }
}

/// `K({(b^n, 0, …)}) = λ^n` for `n = 0..=depth`.
pub fn decimation_eigenvector<S: Scalar>(lambda: &S, depth: usize, geom: &Geometry) -> Result<Truncated<S>> {
    let spec = KernelSpec::new(TransformKind::Decimation, *geom)?;
    let mut k = CoefficientVector::new(geom.dimension(), LatticeTag::Original);
    let mut value = S::one();
    for n in 0..=depth {
        let site = geom.axis_site(checked_power(geom.blocking_factor(), n)?);
        k.insert(SiteSet::singleton(site), value.clone())?;
        value = value * lambda.clone();
    }
    Truncated::new(spec, depth, k)
}

/// The singleton-supported majority-rule eigenvector out to hierarchy depth `depth`.
///
/// On `0^o` the corner `((b-1)/2, …)` carries `λ/ν - (s-1)` and every other
/// site carries 1; below every other site `n` each `m ∈ n^o` carries
/// `(λ/ν)·K({n})/s`.
pub fn majority_eigenvector<S: Scalar>(lambda: &S, depth: usize, spec: &KernelSpec) -> Result<Truncated<S>> {
    if spec.kind() != TransformKind::Majority {
        return Err(Error::InvalidSpec(format!("majority eigenvector requested for {spec}")));
    }
    let geom = spec.geom();
    let s = spec.s();
    let entries = (s as u128).checked_pow(depth as u32 + 1).unwrap_or(u128::MAX);
    if entries > MAX_TRUNCATION_ENTRIES as u128 {
        return Err(Error::InvalidParameter(format!("depth {depth} needs {entries} entries")));
    }
    let scale = lambda.clone() / S::from_rational(&spec.nu()?);
    let child_factor = scale.clone() / S::from_rational(&int(s as i64));
    let corner = Site::new(vec![(geom.blocking_factor() - 1) / 2; geom.dimension()]);

    let mut k = CoefficientVector::new(geom.dimension(), LatticeTag::Original);
    let mut frontier = Vec::new();
    for x in block(&geom.origin(), geom)?.iter() {
        let value = if *x == corner { scale.clone() - S::from_rational(&int(s as i64 - 1)) } else { S::one() };
        k.insert(SiteSet::singleton(x.clone()), value.clone())?;
        if !x.is_origin() {
            frontier.push((x.clone(), value));
        }
    }
    for _ in 1..=depth {
        let mut next = Vec::with_capacity(frontier.len() * s);
        for (n, value) in &frontier {
            let child = child_factor.clone() * value.clone();
            if child.is_zero() {
                continue;
            }
            for m in block(n, geom)?.iter() {
                k.insert(SiteSet::singleton(m.clone()), child.clone())?;
                next.push((m.clone(), child.clone()));
            }
        }
        frontier = next;
    }
    Truncated::new(*spec, depth, k)
}

/// `max_Z |(LK)(Z) - λK(Z)|` over `check_sets`, each of which must be checkable.
pub fn eigen_residual<S: Scalar>(k: &Truncated<S>, lambda: &S, check_sets: &[SiteSet]) -> Result<f64> {
    if let Some(z) = check_sets.iter().find(|z| !k.is_checkable(z)) {
        return Err(Error::TruncationViolation(z.clone()));
    }
    let image = LinearOperator::forward(k.spec)?.apply(&k.vector)?;
    Ok(check_sets
        .iter()
        .map(|z| (image.get(z) - lambda.clone() * k.vector.get(z)).modulus())
        .fold(0.0, f64::max))
}

/// Value `λ^n` on the orbit of `{0, b^n·e}` for every axis `e`, `n = 0..=depth`.
pub fn ti_pair_eigenvector<S: Scalar>(lambda: &S, depth: usize, geom: &Geometry) -> Result<TIVector<S>> {
    let d = geom.dimension();
    let mut k = TIVector::new(d, true);
    let mut value = S::one();
    for n in 0..=depth {
        let step = checked_power(geom.blocking_factor(), n)?;
        for axis in 0..d {
            let mut coords = vec![0; d];
            coords[axis] = step;
            k.insert(&SiteSet::try_from(vec![Site::origin(d), Site::new(coords)])?, value.clone())?;
        }
        value = value * lambda.clone();
    }
    Ok(k)
}

/// Decimation `L` on orbit representatives: `(LK)(orbit Z) = K(orbit bZ)`.
pub fn ti_apply_l_decimation<S: Scalar>(geom: &Geometry, k: &TIVector<S>) -> Result<TIVector<S>> {
    let b = geom.blocking_factor();
    let mut out = TIVector::new(k.dimension(), k.even_only());
    for (rep, v) in k.iter() {
        // representatives contain the origin, so divisibility of the rep is divisibility of the orbit
        let shrunk: Option<Vec<Site>> = rep.iter().map(|x| x.divided(b)).collect();
        if let Some(sites) = shrunk {
            out.insert(&SiteSet::try_from(sites)?, v.clone())?;
        }
    }
    Ok(out)
}

/// Eigen-residual of the pair family on pair orbits of separation at most `b^{depth-1}`.
pub fn ti_eigen_residual<S: Scalar>(geom: &Geometry, k: &TIVector<S>, lambda: &S, depth: usize) -> Result<f64> {
    if depth == 0 {
        return Ok(0.0);
    }
    let reach = checked_power(geom.blocking_factor(), depth - 1)?;
    let image = ti_apply_l_decimation(geom, k)?;
    let d = geom.dimension();
    let mut worst: f64 = 0.0;
    for axis in 0..d {
        for sep in 1..=reach.min(4096) {
            let mut coords = vec![0; d];
            coords[axis] = sep;
            let z = SiteSet::try_from(vec![Site::origin(d), Site::new(coords)])?;
            worst = worst.max((image.get(&z) - lambda.clone() * k.get(&z)).modulus());
        }
    }
    Ok(worst)
}

/// Points `ρ·k/radii · e^{2πij/angles}` for `k = 1..=radii`, `j = 0..angles`.
pub fn disk_grid(radius: f64, radii: usize, angles: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(radii * angles);
    for k in 1..=radii {
        let rho = radius * k as f64 / radii as f64;
        for j in 0..angles {
            out.push(Complex64::from_polar(rho, 2.0 * PI * j as f64 / angles as f64));
        }
    }
    out
}

/// `points` evenly spaced reals on `[-radius, radius]`.
pub fn real_axis(radius: f64, points: usize) -> Vec<Complex64> {
    if points < 2 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    (0..points)
        .map(|i| Complex64::new(-radius + 2.0 * radius * i as f64 / (points - 1) as f64, 0.0))
        .collect()
}

/// 8 radii × 16 angles plus 9 points of the real axis.
pub fn default_grid(radius: f64) -> Vec<Complex64> {
    let mut grid = disk_grid(radius, 8, 16);
    grid.extend(real_axis(radius, 9));
    grid
}

/// The norm bound claimed for an operator, if any.
pub fn operator_norm_bound(spec: &KernelSpec, direction: Direction) -> Result<Option<f64>> {
    Ok(match (spec.kind(), direction) {
        (TransformKind::Decimation, _) => Some(1.0),
        (TransformKind::Majority, Direction::Forward) => {
            Some(rational_to_f64(&(spec.nu()? * int(spec.s() as i64))))
        }
        (TransformKind::Majority, Direction::Adjoint) => None,
    })
}

fn probe_norm<S: Scalar>(direction: Direction, k: &CoefficientVector<S>, r: f64) -> Result<f64> {
    match direction {
        Direction::Forward => norm_r(k, r),
        Direction::Adjoint => norm_r_star(k, r),
    }
}

fn probe_window(spec: &KernelSpec, direction: Direction, sample: usize) -> SupportWindow {
    let d = spec.geom().dimension();
    let radius = if d == 1 { 6 } else { 3 };
    let window = SupportWindow::new(d, radius);
    match (spec.kind(), direction) {
        // every other sample sits on bℤ^d so that decimation sees it
        (TransformKind::Decimation, Direction::Forward) if sample % 2 == 0 => {
            window.step(spec.geom().blocking_factor()).max_set_size(3)
        }
        (TransformKind::Majority, Direction::Adjoint) => {
            window.with_radius(if spec.s() > 3 { 1 } else { 2 }).max_set_size(if spec.s() > 3 { 1 } else { 2 })
        }
        _ => window,
    }
}

/// Singletons on `0^o` with values of one random sign, the shape that
/// nearly saturates the majority-rule bound.
fn block_field(spec: &KernelSpec, rng: &mut ChaCha8Rng) -> Result<CoefficientVector<f64>> {
    let geom = spec.geom();
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let mut k = CoefficientVector::new(geom.dimension(), LatticeTag::Original);
    for x in block(&geom.origin(), geom)?.iter() {
        k.insert(SiteSet::singleton(x.clone()), sign * rational_to_f64(&random_value(rng)).abs())?;
    }
    Ok(k)
}

/// Image singletons along the hierarchy that feeds the witness target,
/// with geometric values `c·μ^k` at level `k`.
///
/// Decimation uses the chain `{b^k·e}`; majority rule uses `{0}` and then
/// the blocks below each non-origin site of the previous level.
fn hierarchy_vector(spec: &KernelSpec, rng: &mut ChaCha8Rng) -> Result<CoefficientVector<Complex64>> {
    let geom = spec.geom();
    let scale = |q: BigRational| Complex64::new(2.0 * rational_to_f64(&q), 0.0);
    let c = scale(random_value(rng));
    let mu = scale(random_value(rng));
    let mut k = CoefficientVector::new(geom.dimension(), LatticeTag::Image);
    match spec.kind() {
        TransformKind::Decimation => {
            let levels = rng.gen_range(1..=6);
            let mut value = c;
            for j in 0..levels {
                k.insert(SiteSet::singleton(geom.axis_site(checked_power(geom.blocking_factor(), j)?)), value)?;
                value *= mu;
            }
        }
        TransformKind::Majority => {
            let levels = if spec.s() > 3 { 1 } else { rng.gen_range(1..=3) };
            k.insert(SiteSet::singleton(geom.origin()), c)?;
            let mut frontier: Vec<Site> = block(&geom.origin(), geom)?.iter().filter(|x| !x.is_origin()).cloned().collect();
            let mut value = c * mu;
            for _ in 0..levels {
                let mut next = Vec::new();
                for n in &frontier {
                    k.insert(SiteSet::singleton(n.clone()), value)?;
                    next.extend(block(n, geom)?.iter().cloned());
                }
                frontier = next;
                value *= mu;
            }
        }
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormProbe {
    pub max_ratio: f64,
    pub worst_sample: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Largest `‖opK‖/‖K‖` over seeded random `K` (`‖·‖_r` forward, `‖·‖*_r` adjoint).
pub fn operator_norm_probe(
    spec: &KernelSpec,
    direction: Direction,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<NormProbe> {
    if samples == 0 {
        return Err(Error::InvalidParameter("norm probe needs at least one sample".into()));
    }
    let op = LinearOperator::new(*spec, direction)?;
    let ratios: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let k: CoefficientVector<f64> = match (spec.kind(), direction) {
                (TransformKind::Majority, Direction::Forward) if i % 2 == 1 => block_field(spec, &mut rng)?,
                _ => random_vector(&mut rng, &probe_window(spec, direction, i), op.input_tag()),
            };
            let image = op.apply(&k)?;
            Ok(probe_norm(direction, &image, r)? / probe_norm(direction, &k, r)?)
        })
        .collect::<Result<_>>()?;
    let (worst_sample, max_ratio) = ratios
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, x)| if x > best.1 { (i, x) } else { best });
    Ok(NormProbe { max_ratio, worst_sample, samples, seed })
}

/// The constant-field construction attaining the claimed norm bound; returns `(K, ‖opK‖/‖K‖)`.
pub fn norm_equality_witness(
    spec: &KernelSpec,
    direction: Direction,
    r: f64,
) -> Result<(CoefficientVector<f64>, f64)> {
    let geom = spec.geom();
    let d = geom.dimension();
    let op = LinearOperator::new(*spec, direction)?;
    let mut k = CoefficientVector::new(d, op.input_tag());
    match (spec.kind(), direction) {
        (TransformKind::Decimation, Direction::Forward) => {
            for x in ball(d, geom.blocking_factor()).iter() {
                k.insert(SiteSet::singleton(x.clone()), 1.0)?;
            }
        }
        (TransformKind::Decimation, Direction::Adjoint) => {
            for x in ball(d, 1).iter().filter(|x| !x.is_origin()) {
                k.insert(SiteSet::singleton(x.clone()), 1.0)?;
            }
        }
        (TransformKind::Majority, Direction::Forward) => {
            for x in block(&geom.origin(), geom)?.iter() {
                k.insert(SiteSet::singleton(x.clone()), 1.0)?;
            }
        }
        (TransformKind::Majority, Direction::Adjoint) => {
            k.insert(SiteSet::singleton(geom.origin()), 1.0)?;
        }
    }
    let image = op.apply(&k)?;
    let ratio = probe_norm(direction, &image, r)? / probe_norm(direction, &k, r)?;
    Ok((k, ratio))
}

/// Radius of the disk on which the non-approximability bound is claimed.
pub fn witness_disk_radius(spec: &KernelSpec) -> Result<f64> {
    Ok(match spec.kind() {
        TransformKind::Decimation => 1.0,
        TransformKind::Majority => rational_to_f64(&spec.nu()?),
    })
}

/// Claimed lower bound on the witness distance: 1/2 for decimation, 1/4 for majority rule.
pub fn witness_bound(spec: &KernelSpec) -> f64 {
    match spec.kind() {
        TransformKind::Decimation => 0.5,
        TransformKind::Majority => 0.25,
    }
}

/// The vector outside the closure of the range of `λI - L*`:
/// `δ` at `{(1, 0, …)}` for decimation and at `{0}` for majority rule.
pub fn witness_target<S: Scalar>(spec: &KernelSpec) -> Result<CoefficientVector<S>> {
    let geom = spec.geom();
    let site = match spec.kind() {
        TransformKind::Decimation => geom.axis_site(1),
        TransformKind::Majority => geom.origin(),
    };
    CoefficientVector::delta(geom.dimension(), LatticeTag::Original, SiteSet::singleton(site), S::one())
}

fn check_disk(spec: &KernelSpec, modulus: f64) -> Result<()> {
    let radius = witness_disk_radius(spec)?;
    if !(modulus <= radius + FLOAT_TOLERANCE) {
        return Err(Error::OutOfDisk { modulus, radius });
    }
    Ok(())
}

fn witness_distance_with<S: Scalar>(
    target: &CoefficientVector<S>,
    lambda: &S,
    s: &CoefficientVector<S>,
    lstar_s: &CoefficientVector<S>,
    r: f64,
) -> Result<f64> {
    let shifted = s.scaled(lambda).with_tag(LatticeTag::Original).checked_sub(lstar_s)?;
    norm_r_star(&target.checked_sub(&shifted)?, r)
}

/// `‖K_target - (λI - L*)S‖*_r` for an image-lattice `S`.
///
/// Both lattices are ℤ^d, so `λS` is read on the original lattice.
pub fn residual_witness_distance<S: Scalar>(
    spec: &KernelSpec,
    lambda: &S,
    s: &CoefficientVector<S>,
    r: f64,
) -> Result<f64> {
    check_disk(spec, lambda.modulus())?;
    if s.tag() != LatticeTag::Image {
        return Err(Error::LatticeTagMismatch { left: s.tag().name(), right: "image" });
    }
    let lstar_s = LinearOperator::adjoint(*spec)?.apply(s)?;
    witness_distance_with(&witness_target(spec)?, lambda, s, &lstar_s, r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessSweep {
    pub min_distance: f64,
    pub min_lambda: Complex64,
    pub min_sample: usize,
    pub evaluations: usize,
}

fn witness_window(spec: &KernelSpec) -> SupportWindow {
    let d = spec.geom().dimension();
    let window = SupportWindow::new(d, 2).max_terms(5);
    match spec.kind() {
        TransformKind::Decimation => window.max_set_size(3),
        // the adjoint fans out over all odd patterns of every block
        TransformKind::Majority => window.max_set_size(if spec.s() > 3 { 1 } else { 3 }),
    }
}

/// Smallest witness distance over `samples` seeded random `S` and every `λ` of `lambdas`.
pub fn witness_sweep(
    spec: &KernelSpec,
    lambdas: &[Complex64],
    samples: usize,
    seed: u64,
    r: f64,
) -> Result<WitnessSweep> {
    if samples == 0 || lambdas.is_empty() {
        return Err(Error::InvalidParameter("witness sweep needs samples and eigenvalues".into()));
    }
    for lambda in lambdas {
        check_disk(spec, lambda.norm())?;
    }
    let op = LinearOperator::adjoint(*spec)?;
    let target: CoefficientVector<Complex64> = witness_target(spec)?;
    let window = witness_window(spec);
    let per_sample: Vec<(f64, usize)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let s: CoefficientVector<Complex64> = if i % 2 == 1 {
                hierarchy_vector(spec, &mut rng)?
            } else {
                random_vector(&mut rng, &window, LatticeTag::Image)
            };
            let lstar_s = op.apply(&s)?;
            let mut best = (f64::INFINITY, 0);
            for (j, lambda) in lambdas.iter().enumerate() {
                let dist = witness_distance_with(&target, lambda, &s, &lstar_s, r)?;
                if dist < best.0 {
                    best = (dist, j);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let (min_sample, &(min_distance, j)) = per_sample
        .iter()
        .enumerate()
        .fold((0, &(f64::INFINITY, 0)), |best, (i, x)| if x.0 < best.1 .0 { (i, x) } else { best });
    Ok(WitnessSweep { min_distance, min_lambda: lambdas[j], min_sample, evaluations: samples * lambdas.len() })
}

/// Would-be eigenvector families whose truncated norms grow without bound.
#[derive(Debug, Clone, PartialEq)]
pub enum DivergenceFamily {
    /// `K(b^n X) = λ^n` under `‖·‖_r` with `r > 0`, `|X| > 1`, `λ ≠ 0`.
    ScaledSet { lambda: f64, r: f64, base: SiteSet },
    /// The translation-invariant pair family at `|λ| = 1`, under `‖·‖_0`.
    TiUnimodular { lambda: Complex64 },
    /// The majority adjoint family at `λ = ν`: value `m` on the singletons
    /// `{0}, {e}, {b·e}, …, {b^{N-1}·e}`, under `‖·‖*_0`.
    MajorityAdjointNu { m: f64 },
}

/// Truncated norm of the family at each depth.
pub fn divergence_probe(family: &DivergenceFamily, spec: &KernelSpec, depths: &[usize]) -> Result<Vec<f64>> {
    let geom = spec.geom();
    depths
        .iter()
        .map(|&depth| match family {
            DivergenceFamily::ScaledSet { lambda, r, base } => {
                if base.len() < 2 || *lambda == 0.0 || !(*r > 0.0) {
                    return Err(Error::InvalidParameter(
                        "scaled-set family needs |X| > 1, λ ≠ 0 and r > 0".into(),
                    ));
                }
                scaled_set_family(*lambda, base, depth, geom).and_then(|k| norm_r(&k, *r))
            }
            DivergenceFamily::TiUnimodular { lambda } => {
                if (lambda.norm() - 1.0).abs() > FLOAT_TOLERANCE {
                    return Err(Error::InvalidParameter(format!("|λ| = {} is not 1", lambda.norm())));
                }
                Ok(ti_norm0(&ti_pair_eigenvector(lambda, depth, geom)?))
            }
            DivergenceFamily::MajorityAdjointNu { m } => {
                if spec.kind() != TransformKind::Majority {
                    return Err(Error::InvalidSpec(format!("majority adjoint family requested for {spec}")));
                }
                norm_r_star(&majority_adjoint_chain(*m, depth, geom)?, 0.0)
            }
        })
        .collect()
}

/// `K(b^n X) = λ^n` for `n = 0..=depth`.
pub fn scaled_set_family(lambda: f64, base: &SiteSet, depth: usize, geom: &Geometry) -> Result<CoefficientVector<f64>> {
    let mut k = CoefficientVector::new(geom.dimension(), LatticeTag::Original);
    let mut set = base.clone();
    let mut value = 1.0;
    for n in 0..=depth {
        if n > 0 {
            if set.radius().checked_mul(geom.blocking_factor()).is_none() {
                return Err(Error::InvalidParameter(format!("depth {depth} overflows the lattice coordinates")));
            }
            set = scale_set(&set, geom)?;
            value *= lambda;
        }
        k.insert(set.clone(), value)?;
    }
    Ok(k)
}

/// Value `m` on `{0}` and on `{b^k·e}` for `k = 0..depth`: `depth + 1` singletons.
///
/// Each site's block index is the previous site of the chain, so on these
/// singletons `(L*K)({x}) = ν·K({x})`.
pub fn majority_adjoint_chain(m: f64, depth: usize, geom: &Geometry) -> Result<CoefficientVector<f64>> {
    let mut k = CoefficientVector::new(geom.dimension(), LatticeTag::Image);
    k.insert(SiteSet::singleton(geom.origin()), m)?;
    for j in 0..depth {
        k.insert(SiteSet::singleton(geom.axis_site(checked_power(geom.blocking_factor(), j)?)), m)?;
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilpotenceReport {
    pub window_radius: i64,
    /// Support sets of `(L*)^n K` inside the window, for `n = 1..=iterations`.
    pub survivors: Vec<usize>,
    /// Sets `X` with `((L*)^n K)(X) ≠ 0` although `b^n > radius(X)`.
    pub violations: usize,
    /// First `n` with `b^n > window_radius`.
    pub kill_iteration: usize,
}

impl NilpotenceReport {
    pub fn holds(&self) -> bool {
        self.violations == 0 && self.survivors.iter().skip(self.kill_iteration - 1).all(|&c| c == 0)
    }
}

/// Iterates the decimation adjoint on an image-lattice `K`.
pub fn adjoint_nilpotence<S: Scalar>(
    spec: &KernelSpec,
    k: &CoefficientVector<S>,
    window_radius: i64,
    iterations: usize,
) -> Result<NilpotenceReport> {
    if spec.kind() != TransformKind::Decimation {
        return Err(Error::InvalidSpec(format!("nilpotence is a decimation property, got {spec}")));
    }
    let b = spec.geom().blocking_factor();
    let mut kill_iteration = 1;
    while checked_power(b, kill_iteration)? <= window_radius {
        kill_iteration += 1;
    }
    let op = LinearOperator::adjoint(*spec)?;
    let mut current = k.clone();
    let mut survivors = Vec::with_capacity(iterations);
    let mut violations = 0;
    for n in 1..=iterations.max(kill_iteration) {
        current = op.apply(&current)?.with_tag(LatticeTag::Image);
        let scale = checked_power(b, n).unwrap_or(i64::MAX);
        violations += current.support().filter(|x| x.radius() < scale).count();
        survivors.push(current.support().filter(|x| x.radius() <= window_radius).count());
    }
    Ok(NilpotenceReport { window_radius, survivors, violations, kill_iteration })
}

/// One row of the `sν` versus `√(2s/π)` table.
#[derive(Debug, Clone, PartialEq)]
pub struct StirlingRow {
    pub s: usize,
    pub nu: BigRational,
    pub s_nu: f64,
    pub asymptote: f64,
    pub ratio: f64,
}

impl StirlingRow {
    pub fn nu_text(&self) -> String {
        format_rational(&self.nu)
    }
}

pub fn stirling_row(s: usize) -> Result<StirlingRow> {
    if s % 2 == 0 {
        return Err(Error::InvalidParameter(format!("block size {s} is even")));
    }
    let nu = nu_for_block_size(s);
    let s_nu = rational_to_f64(&(nu.clone() * int(s as i64)));
    let asymptote = (2.0 * s as f64 / PI).sqrt();
    Ok(StirlingRow { s, nu, s_nu, asymptote, ratio: s_nu / asymptote })
}

pub fn stirling_table(s_values: &[usize]) -> Result<Vec<StirlingRow>> {
    s_values.iter().map(|&s| stirling_row(s)).collect()
}

/// Rows for `s = b^d` over odd blocking factors.
pub fn stirling_report(b_values: &[i64], d: usize) -> Result<Vec<StirlingRow>> {
    b_values
        .iter()
        .map(|&b| {
            let geom = Geometry::new(d, b)?;
            if !geom.is_odd() {
                return Err(Error::InvalidSpec(format!("blocking factor {b} is even")));
            }
            stirling_row(geom.block_size())
        })
        .collect()
}

/// Ratio column `> 1` and strictly decreasing.
pub fn stirling_ratios_decrease(rows: &[StirlingRow]) -> bool {
    rows.iter().all(|r| r.ratio > 1.0) && rows.windows(2).all(|w| w[1].ratio < w[0].ratio)
}

fn eigen_claim(spec: &KernelSpec) -> &'static str {
    match spec.kind() {
        TransformKind::Decimation => "every |λ| ≤ 1 is an eigenvalue of decimation L (axis-chain eigenvector)",
        TransformKind::Majority => "every |λ| ≤ sν is an eigenvalue of majority-rule L (hierarchical eigenvector)",
    }
}

/// Builds the displayed eigenvector for `λ` and certifies its residual.
///
/// Exact eigenvalues are checked in rational arithmetic against 0; complex
/// ones in floats against [`FLOAT_TOLERANCE`].
pub fn eigenvector_certificate(spec: &KernelSpec, lambda: &LambdaValue, depth: usize) -> Result<Certificate> {
    fn run<S: Scalar>(spec: &KernelSpec, lambda: &S, depth: usize) -> Result<(f64, InteractionFile)> {
        let k = match spec.kind() {
            TransformKind::Decimation => decimation_eigenvector(lambda, depth, spec.geom())?,
            TransformKind::Majority => majority_eigenvector(lambda, depth, spec)?,
        };
        let residual = eigen_residual(&k, lambda, &k.default_check_sets())?;
        Ok((residual, InteractionFile::from_vector(k.vector())))
    }
    let disk = match spec.kind() {
        TransformKind::Decimation => 1.0,
        TransformKind::Majority => rational_to_f64(&(spec.nu()? * int(spec.s() as i64))),
    };
    let z = lambda.to_complex();
    check_eigen_disk(z.norm(), disk)?;
    let ((residual, file), bound) = match lambda {
        LambdaValue::Exact(q) => (run(spec, q, depth)?, 0.0),
        LambdaValue::Complex(c) => (run(spec, c, depth)?, FLOAT_TOLERANCE),
    };
    Ok(Certificate::new(CertificateKind::Eigenvector, *spec, z, eigen_claim(spec), residual, bound)
        .with_payload(Payload::Vector(file)))
}

fn check_eigen_disk(modulus: f64, radius: f64) -> Result<()> {
    if !(modulus <= radius + FLOAT_TOLERANCE) {
        return Err(Error::OutOfDisk { modulus, radius });
    }
    Ok(())
}

/// Minimum witness distance for one `λ` over seeded random `S`.
pub fn witness_certificate(spec: &KernelSpec, lambda: Complex64, samples: usize, seed: u64, r: f64) -> Result<Certificate> {
    let sweep = witness_sweep(spec, &[lambda], samples, seed, r)?;
    let claim = match spec.kind() {
        TransformKind::Decimation => "δ{(1,0,…)} stays at distance ≥ 1/2 from the range of λI - L* for |λ| ≤ 1",
        TransformKind::Majority => "δ{0} stays at distance ≥ 1/4 from the range of λI - L* for |λ| ≤ ν",
    };
    Ok(Certificate::new(
        CertificateKind::ResidualWitness,
        *spec,
        lambda,
        claim,
        sweep.min_distance,
        witness_bound(spec) - FLOAT_TOLERANCE,
    )
    .with_seed(seed))
}

/// Norm probe plus equality witness for an operator with a claimed bound.
pub fn norm_certificate(
    spec: &KernelSpec,
    direction: Direction,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<Certificate> {
    let bound = operator_norm_bound(spec, direction)?
        .ok_or_else(|| Error::InvalidParameter(format!("no norm bound is claimed for the adjoint of {spec}")))?;
    let probe = operator_norm_probe(spec, direction, r, samples, seed)?;
    let claim = match (spec.kind(), direction) {
        (TransformKind::Decimation, Direction::Forward) => "decimation L has norm 1 on B_r",
        (TransformKind::Decimation, Direction::Adjoint) => "decimation L* has norm at most 1 on B*_r",
        _ => "majority-rule L has norm at most sν on B_r",
    };
    Ok(Certificate::new(CertificateKind::NormBound, *spec, Complex64::zero(), claim, probe.max_ratio, bound + FLOAT_TOLERANCE)
        .with_seed(seed))
}
