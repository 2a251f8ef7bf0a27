//! Verification suites.
//!
//! Each suite is a list of independent jobs. Jobs run in parallel and their
//! checks are assembled in declaration order, so reports do not depend on
//! scheduling.

use std::fmt;
use std::str::FromStr;

use num::{BigRational, Signed, Zero};
use rayon::prelude::*;

use crate::coeff::{CoefficientVector, LatticeTag};
use crate::error::{Error, Result};
use crate::kernel::{check_kernel_laws, nu_brute_force, KernelSpec, TransformKind};
use crate::lattice::{block, Geometry, SiteSet};
use crate::report::{Check, Comparison, Report};
use crate::rg_exact::{jacobian_bruteforce, jacobian_fd, rg_map, FiniteVolume, DEFAULT_FD_STEP};
use crate::rg_linear::{adjoint_pairing_defect, jacobian_closed_form, ChiTable, Direction};
use crate::sampling::{random_adjoint_pair, random_vector, rng_for, SupportWindow};
use crate::scalar::{int, rational_to_f64, Complex64};
use crate::spectral::{
    adjoint_nilpotence, decimation_eigenvector, default_grid, disk_grid, divergence_probe, eigen_residual,
    majority_eigenvector, norm_equality_witness, operator_norm_bound, operator_norm_probe, residual_witness_distance,
    stirling_ratios_decrease, stirling_table, ti_eigen_residual, ti_pair_eigenvector, witness_bound,
    witness_disk_radius, witness_sweep, DivergenceFamily, FLOAT_TOLERANCE,
};
use crate::spin::EnumerationCap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Kernels,
    Rgmap,
    Jacobian,
    Spectral,
    Witness,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["kernels", "rgmap", "jacobian", "spectral", "witness", "all"];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Kernels => "kernels",
            Suite::Rgmap => "rgmap",
            Suite::Jacobian => "jacobian",
            Suite::Spectral => "spectral",
            Suite::Witness => "witness",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernels" => Ok(Suite::Kernels),
            "rgmap" => Ok(Suite::Rgmap),
            "jacobian" => Ok(Suite::Jacobian),
            "spectral" => Ok(Suite::Spectral),
            "witness" => Ok(Suite::Witness),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidParameter(format!(
                "unknown suite `{other}`; expected one of {}",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Restricts suites to one kernel family.
    pub transform: Option<TransformKind>,
    /// Blocking factor and dimension; when either is set, they replace the default geometries.
    pub b: Option<i64>,
    pub d: Option<usize>,
    pub image_sites: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub depth: usize,
    pub cap: EnumerationCap,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            transform: None,
            b: None,
            d: None,
            image_sites: None,
            samples: 200,
            seed: 1,
            depth: 8,
            cap: EnumerationCap::default(),
        }
    }
}

impl VerifyOptions {
    /// Kernels to exercise: the explicit geometry if one was given, else `defaults`.
    fn specs(&self, defaults: &[(TransformKind, i64, usize)]) -> Result<Vec<KernelSpec>> {
        let kinds: Vec<TransformKind> = match self.transform {
            Some(kind) => vec![kind],
            None => vec![TransformKind::Decimation, TransformKind::Majority],
        };
        if self.b.is_none() && self.d.is_none() {
            return defaults
                .iter()
                .filter(|(kind, _, _)| kinds.contains(kind))
                .map(|&(kind, b, d)| KernelSpec::new(kind, Geometry::new(d, b)?))
                .collect();
        }
        let geom = Geometry::new(self.d.unwrap_or(1), self.b.unwrap_or(3))?;
        let mut specs = Vec::new();
        for kind in kinds {
            match KernelSpec::new(kind, geom) {
                Ok(spec) => specs.push(spec),
                // an even b silently drops majority only when no transform was requested
                Err(e) if self.transform.is_some() => return Err(e),
                Err(_) => {}
            }
        }
        Ok(specs)
    }
}

type Job<'a> = Box<dyn Fn() -> Result<Vec<Check>> + Send + Sync + 'a>;

fn run_jobs(jobs: Vec<Job<'_>>) -> Result<Vec<Check>> {
    let parts: Vec<Result<Vec<Check>>> = jobs.par_iter().map(|job| job()).collect();
    let mut checks = Vec::new();
    for part in parts {
        checks.extend(part?);
    }
    Ok(checks)
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Report> {
    Ok(match suite {
        Suite::Kernels => Report::new("kernels", kernels(opts)?),
        Suite::Rgmap => Report::new("rgmap", rgmap(opts)?),
        Suite::Jacobian => Report::new("jacobian", jacobian(opts)?),
        Suite::Spectral => Report::new("spectral", spectral(opts)?),
        Suite::Witness => Report::new("witness", witness(opts)?),
        Suite::All => {
            let parts = [Suite::Kernels, Suite::Rgmap, Suite::Jacobian, Suite::Spectral, Suite::Witness]
                .into_iter()
                .map(|s| run_suite(s, opts))
                .collect::<Result<Vec<_>>>()?;
            Report::merge("all", parts)
        }
    })
}

const KERNEL_DEFAULTS: [(TransformKind, i64, usize); 7] = [
    (TransformKind::Decimation, 2, 1),
    (TransformKind::Decimation, 2, 2),
    (TransformKind::Decimation, 3, 1),
    (TransformKind::Decimation, 3, 2),
    (TransformKind::Majority, 3, 1),
    (TransformKind::Majority, 3, 2),
    (TransformKind::Majority, 5, 1),
];

/// Block size up to which every pattern of the χ table is checked.
const FULL_CHI_CHECK: usize = 9;

fn kernels(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let specs = opts.specs(&KERNEL_DEFAULTS)?;
    let mut jobs: Vec<Job> = Vec::new();
    for spec in specs {
        let cap = opts.cap;
        jobs.push(Box::new(move || {
            let laws = check_kernel_laws(&spec, cap)?;
            let one = int(1);
            let balance = usize::from(laws.balance.0 != one) + usize::from(laws.balance.1 != one);
            let mut checks = vec![Check::exact(
                format!("laws {spec}"),
                "the kernel is spin-flip symmetric, normalized and balanced over every block configuration",
                laws.symmetry_violations + laws.normalization_violations + balance,
            )];
            if spec.kind() == TransformKind::Majority {
                checks.push(Check::holds(
                    format!("nu {spec}"),
                    "ν = C(s-1,(s-1)/2)/2^(s-1) equals the enumerated single-site correlation",
                    spec.nu()? == nu_brute_force(&spec, cap)?,
                ));
                if spec.s() <= FULL_CHI_CHECK {
                    checks.extend(chi_table_checks(&spec)?);
                }
            }
            Ok(checks)
        }));
    }
    if opts.transform != Some(TransformKind::Decimation) && opts.b.is_none() && opts.d.is_none() {
        jobs.push(Box::new(|| singleton_chi_checks(&[3, 5, 7, 9, 11, 13])));
    }
    run_jobs(jobs)
}

fn chi_table_checks(spec: &KernelSpec) -> Result<Vec<Check>> {
    let table = ChiTable::new(spec)?;
    let nu = spec.nu()?;
    let s = spec.s();
    let masks: Vec<u64> = (1u64..1 << s).collect();
    let values = masks.par_iter().map(|&m| table.brute_force(m).map(|v| (m, v))).collect::<Result<Vec<_>>>()?;
    let even_nonzero = values.iter().filter(|(m, v)| m.count_ones() % 2 == 0 && !v.is_zero()).count();
    let above_nu = values.iter().filter(|(_, v)| v.abs() > nu).count();
    Ok(vec![
        Check::exact(format!("chi even {spec}"), "χ(A) = 0 for every even-size pattern A", even_nonzero),
        Check::exact(format!("chi bound {spec}"), "|χ(A)| ≤ ν for every pattern A of the block", above_nu),
    ])
}

/// Binomial `ν` against brute-force `χ` at every singleton of a `d = 1` block of size `s`.
pub fn singleton_chi_checks(sizes: &[usize]) -> Result<Vec<Check>> {
    sizes
        .par_iter()
        .map(|&s| {
            let spec = KernelSpec::majority(1, s as i64)?;
            let table = ChiTable::new(&spec)?;
            let nu = spec.nu()?;
            let mut mismatches = 0;
            for i in 0..s {
                if table.brute_force(1 << i)? != nu {
                    mismatches += 1;
                }
            }
            Ok(Check::exact(
                format!("chi singletons s={s}"),
                "χ({x}) = ν at every site of the block",
                mismatches,
            ))
        })
        .collect()
}

/// The first `n` image sites along the first axis.
pub fn axis_window(geom: &Geometry, n: usize) -> SiteSet {
    SiteSet::try_from((0..n as i64).map(|k| geom.axis_site(k)).collect::<Vec<_>>()).expect("same dimension")
}

/// `J'({0})` for a uniform field `h` on one majority block:
/// `½·log(Σ_{k<s/2} C(s,k)e^{h(s-2k)} / Σ_{k<s/2} C(s,k)e^{-h(s-2k)})`.
pub fn majority_uniform_field_oracle(s: usize, h: f64) -> f64 {
    let mut up = 0.0;
    let mut down = 0.0;
    let mut c = 1.0;
    for k in 0..=s / 2 {
        let m = (s - 2 * k) as f64;
        up += c * (h * m).exp();
        down += c * (-h * m).exp();
        c = c * (s - k) as f64 / (k + 1) as f64;
    }
    0.5 * (up / down).ln()
}

const RGMAP_DEFAULTS: [(TransformKind, i64, usize); 2] =
    [(TransformKind::Decimation, 3, 1), (TransformKind::Majority, 3, 1)];

fn max_abs(k: &CoefficientVector<f64>, filter: impl Fn(&SiteSet) -> bool) -> f64 {
    k.iter().filter(|(z, _)| filter(z)).map(|(_, v)| v.abs()).fold(0.0, f64::max)
}

fn rgmap(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let specs = opts.specs(&RGMAP_DEFAULTS)?;
    let n = opts.image_sites.unwrap_or(2);
    let mut jobs: Vec<Job> = Vec::new();
    for spec in specs {
        let cap = opts.cap;
        jobs.push(Box::new(move || {
            let geom = *spec.geom();
            let d = geom.dimension();
            let vol = FiniteVolume::new(axis_window(&geom, n), &spec, cap)?;
            let zero = CoefficientVector::new(d, LatticeTag::Original);
            let mut checks = vec![Check::compare(
                format!("fixed point {spec}"),
                "the zero interaction is a fixed point of the exact map",
                max_abs(&rg_map(&zero, &spec, &vol)?, |_| true),
                Comparison::AtMost,
                FLOAT_TOLERANCE,
            )];

            let mut even = CoefficientVector::new(d, LatticeTag::Original);
            let sites = vol.original_sites().sites();
            for (i, pair) in sites.windows(2).enumerate() {
                let value = 0.3 - 0.1 * i as f64;
                even.insert(SiteSet::try_from(pair.to_vec())?, value)?;
            }
            let image = rg_map(&even, &spec, &vol)?;
            checks.push(Check::compare(
                format!("evenness {spec}"),
                "even interactions map to even interactions",
                max_abs(&image, |z| z.len() % 2 == 1),
                Comparison::AtMost,
                FLOAT_TOLERANCE,
            ));

            let single = FiniteVolume::new(axis_window(&geom, 1), &spec, cap)?;
            let origin = SiteSet::singleton(geom.origin());
            match spec.kind() {
                TransformKind::Decimation => {
                    for h in [0.1, 0.7, -1.3] {
                        let j = CoefficientVector::delta(d, LatticeTag::Original, origin.clone(), h)?;
                        let out = rg_map(&j, &spec, &single)?.get(&origin);
                        checks.push(Check::compare(
                            format!("field transparency h={h} {spec}"),
                            "decimation passes a field on the decimation site through unchanged",
                            (out - h).abs(),
                            Comparison::AtMost,
                            FLOAT_TOLERANCE,
                        ));
                    }
                }
                TransformKind::Majority => {
                    let h = 0.1;
                    let mut j = CoefficientVector::new(d, LatticeTag::Original);
                    for x in block(&geom.origin(), &geom)?.iter() {
                        j.insert(SiteSet::singleton(x.clone()), h)?;
                    }
                    let out = rg_map(&j, &spec, &single)?.get(&origin);
                    checks.push(Check::compare(
                        format!("uniform field h={h} {spec}"),
                        "a uniform block field renormalizes to the binomial closed form",
                        (out - majority_uniform_field_oracle(spec.s(), h)).abs(),
                        Comparison::AtMost,
                        FLOAT_TOLERANCE,
                    ));
                }
            }
            Ok(checks)
        }));
    }
    run_jobs(jobs)
}

const JACOBIAN_DEFAULTS: [(TransformKind, i64, usize, usize); 4] = [
    (TransformKind::Decimation, 3, 1, 2),
    (TransformKind::Majority, 3, 1, 2),
    (TransformKind::Decimation, 3, 2, 1),
    (TransformKind::Majority, 3, 2, 1),
];

/// Original volumes above this many sites make the `(Z, W)` sweep too large.
const MAX_JACOBIAN_SITES: usize = 12;

/// Closed form, brute force and finite differences over every `(Z, W)` of a volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianAgreement {
    pub pairs: usize,
    pub exact_mismatches: usize,
    pub max_fd_deviation: f64,
}

pub fn jacobian_agreement(spec: &KernelSpec, image_sites: usize, cap: EnumerationCap) -> Result<JacobianAgreement> {
    let vol = FiniteVolume::new(axis_window(spec.geom(), image_sites), spec, cap)?;
    if vol.original_sites().len() > MAX_JACOBIAN_SITES {
        return Err(Error::EnumerationTooLarge { sites: vol.original_sites().len(), cap: MAX_JACOBIAN_SITES });
    }
    let zs = vol.image_sites().nonempty_subsets();
    let ws = vol.original_sites().nonempty_subsets();
    let rows = ws
        .par_iter()
        .map(|w| {
            let mut mismatches = 0;
            let mut deviation: f64 = 0.0;
            for z in &zs {
                let closed = jacobian_closed_form(spec, z, w)?;
                if closed != jacobian_bruteforce(spec, &vol, z, w)? {
                    mismatches += 1;
                }
                let fd = jacobian_fd(spec, &vol, z, w, DEFAULT_FD_STEP)?;
                deviation = deviation.max((fd - rational_to_f64(&closed)).abs());
            }
            Ok((mismatches, deviation))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JacobianAgreement {
        pairs: zs.len() * ws.len(),
        exact_mismatches: rows.iter().map(|r| r.0).sum(),
        max_fd_deviation: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

fn jacobian(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let cases: Vec<(KernelSpec, usize)> = if opts.b.is_none() && opts.d.is_none() && opts.image_sites.is_none() {
        JACOBIAN_DEFAULTS
            .iter()
            .filter(|(kind, ..)| opts.transform.is_none_or(|t| t == *kind))
            .map(|&(kind, b, d, n)| Ok((KernelSpec::new(kind, Geometry::new(d, b)?)?, n)))
            .collect::<Result<_>>()?
    } else {
        let n = opts.image_sites.unwrap_or(1);
        opts.specs(&[])?.into_iter().map(|s| (s, n)).collect()
    };
    let mut jobs: Vec<Job> = Vec::new();
    for (spec, n) in cases {
        let cap = opts.cap;
        jobs.push(Box::new(move || {
            let agreement = jacobian_agreement(&spec, n, cap)?;
            Ok(vec![
                Check::exact(
                    format!("closed form = brute force {spec} sites={n}"),
                    "the infinite-temperature Jacobian equals its closed form exactly",
                    agreement.exact_mismatches,
                ),
                Check::compare(
                    format!("finite differences {spec} sites={n}"),
                    "centered differences of the exact map match the Jacobian",
                    agreement.max_fd_deviation,
                    Comparison::AtMost,
                    1e-6,
                ),
            ])
        }));
    }
    run_jobs(jobs)
}

const SPECTRAL_DEFAULTS: [(TransformKind, i64, usize); 2] =
    [(TransformKind::Decimation, 3, 1), (TransformKind::Majority, 3, 1)];

/// Deepest majority truncation with at most `2^16` entries, capped at `requested`.
fn majority_depth(spec: &KernelSpec, requested: usize) -> usize {
    let s = spec.s() as u128;
    let mut depth = 0;
    while depth < requested && s.pow(depth as u32 + 2) <= 1 << 16 {
        depth += 1;
    }
    depth
}

fn spectral(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let specs = opts.specs(&SPECTRAL_DEFAULTS)?;
    let (samples, seed, depth) = (opts.samples, opts.seed, opts.depth);
    let mut jobs: Vec<Job> = Vec::new();
    for spec in specs {
        jobs.push(Box::new(move || eigen_checks(&spec, depth)));
        jobs.push(Box::new(move || norm_checks(&spec, samples, seed)));
        jobs.push(Box::new(move || pairing_checks(&spec, samples, seed)));
        if spec.kind() == TransformKind::Decimation {
            jobs.push(Box::new(move || decimation_negative_checks(&spec, seed)));
        } else {
            jobs.push(Box::new(move || majority_negative_checks(&spec)));
        }
    }
    jobs.push(Box::new(stirling_checks));
    run_jobs(jobs)
}

fn eigen_checks(spec: &KernelSpec, depth: usize) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    match spec.kind() {
        TransformKind::Decimation => {
            let claim = "every |λ| ≤ 1 is an eigenvalue of decimation L";
            for lambda in [int(0), BigRational::new(1.into(), 2.into()), BigRational::new((-1).into(), 2.into()), int(1), int(-1)] {
                let k = decimation_eigenvector(&lambda, depth, spec.geom())?;
                let residual = eigen_residual(&k, &lambda, &k.default_check_sets())?;
                checks.push(Check::compare(format!("exact eigenvector λ={lambda} {spec}"), claim, residual, Comparison::AtMost, 0.0));
            }
            let mut worst: f64 = 0.0;
            for lambda in disk_grid(1.0, 8, 16) {
                let k = decimation_eigenvector(&lambda, depth, spec.geom())?;
                worst = worst.max(eigen_residual(&k, &lambda, &k.default_check_sets())?);
            }
            checks.push(Check::compare(format!("disk grid {spec}"), claim, worst, Comparison::AtMost, FLOAT_TOLERANCE));
        }
        TransformKind::Majority => {
            let claim = "every |λ| ≤ sν is an eigenvalue of majority-rule L";
            let nu = spec.nu()?;
            let s_nu = nu.clone() * int(spec.s() as i64);
            let depth = majority_depth(spec, depth);
            for lambda in [int(0), nu.clone(), s_nu.clone(), s_nu.clone() / int(2)] {
                let k = majority_eigenvector(&lambda, depth, spec)?;
                let residual = eigen_residual(&k, &lambda, &k.default_check_sets())?;
                checks.push(Check::compare(format!("exact eigenvector λ={lambda} {spec}"), claim, residual, Comparison::AtMost, 0.0));
            }
            let grid_depth = depth.min(4);
            let mut worst: f64 = 0.0;
            for lambda in default_grid(rational_to_f64(&s_nu)) {
                let k = majority_eigenvector(&lambda, grid_depth, spec)?;
                worst = worst.max(eigen_residual(&k, &lambda, &k.default_check_sets())?);
            }
            checks.push(Check::compare(format!("disk grid {spec}"), claim, worst, Comparison::AtMost, FLOAT_TOLERANCE));
        }
    }
    Ok(checks)
}

fn norm_checks(spec: &KernelSpec, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for direction in [Direction::Forward, Direction::Adjoint] {
        let op = match direction {
            Direction::Forward => "L",
            Direction::Adjoint => "L*",
        };
        for r in [0.0, 0.5] {
            let probe = operator_norm_probe(spec, direction, r, samples, seed)?;
            let (_, witness) = norm_equality_witness(spec, direction, r)?;
            match operator_norm_bound(spec, direction)? {
                Some(bound) => {
                    let claim = format!("‖{op}‖ = {bound} for {} at r = {r}", spec.kind());
                    checks.push(
                        Check::compare(format!("norm {op} r={r} {spec}"), &claim, probe.max_ratio, Comparison::AtMost, bound + FLOAT_TOLERANCE)
                            .with_seed(seed),
                    );
                    checks.push(Check::compare(
                        format!("norm witness {op} r={r} {spec}"),
                        &claim,
                        witness,
                        Comparison::AtLeast,
                        bound * (1.0 - FLOAT_TOLERANCE),
                    ));
                }
                None => {
                    let claim = "no norm bound is claimed for the majority-rule adjoint";
                    checks.push(Check::finding(format!("norm {op} r={r} {spec}"), claim, probe.max_ratio).with_seed(seed));
                    checks.push(Check::finding(format!("norm witness {op} r={r} {spec}"), claim, witness));
                }
            }
        }
    }
    Ok(checks)
}

/// Largest `|⟨K1, LK2⟩ - ⟨K2, L*K1⟩|` over seeded exact pairs, with the count of nonzero pairings.
pub fn adjoint_pairing_sweep(spec: &KernelSpec, samples: usize, seed: u64) -> Result<(usize, usize)> {
    let rows = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let (k1, k2) = random_adjoint_pair::<BigRational>(spec, &mut rng)?;
            let defect = adjoint_pairing_defect(spec, &k1, &k2)?;
            let forward = crate::rg_linear::LinearOperator::forward(*spec)?.apply(&k2)?;
            let nontrivial = !crate::coeff::pairing(&k1, &forward)?.is_zero();
            Ok((usize::from(!defect.is_zero()), usize::from(nontrivial)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows.iter().map(|r| r.0).sum(), rows.iter().map(|r| r.1).sum()))
}

fn pairing_checks(spec: &KernelSpec, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let (mismatches, nontrivial) = adjoint_pairing_sweep(spec, samples, seed)?;
    Ok(vec![
        Check::exact(format!("adjoint pairing {spec}"), "⟨K1, LK2⟩ = ⟨K2, L*K1⟩ in exact arithmetic", mismatches)
            .with_seed(seed),
        Check::finding(format!("nonzero pairings {spec}"), "random pairs with a nonzero pairing", nontrivial as f64)
            .with_seed(seed),
    ])
}

fn decimation_negative_checks(spec: &KernelSpec, seed: u64) -> Result<Vec<Check>> {
    let geom = spec.geom();
    let d = geom.dimension();
    let mut checks = Vec::new();

    let depths: Vec<usize> = (1..=10).collect();
    let ti = divergence_probe(&DivergenceFamily::TiUnimodular { lambda: Complex64::new(1.0, 0.0) }, spec, &depths)?;
    let off = ti.iter().zip(&depths).filter(|(v, n)| **v != (2 * d * (**n + 1)) as f64).count();
    checks.push(Check::exact(
        format!("translation-invariant pairs {spec}"),
        "at |λ| = 1 the translation-invariant pair family has ‖K‖_0 = 2d(N+1), unbounded",
        off,
    ));

    let lambda = BigRational::new(1.into(), 2.into());
    let pairs = ti_pair_eigenvector(&lambda, 6, geom)?;
    checks.push(Check::compare(
        format!("translation-invariant eigen-equation {spec}"),
        "the pair family satisfies LK = λK on translation orbits",
        ti_eigen_residual(geom, &pairs, &lambda, 6)?,
        Comparison::AtMost,
        0.0,
    ));

    let base = SiteSet::try_from(vec![geom.origin(), geom.axis_site(1)])?;
    let family = DivergenceFamily::ScaledSet { lambda: 0.5, r: 0.1, base };
    let norms = divergence_probe(&family, spec, &(0..=7).collect::<Vec<_>>())?;
    checks.push(Check::compare(
        format!("scaled sets r=0.1 {spec}"),
        "for r > 0 the scaled-set family K(b^n X) = λ^n K(X) has unbounded ‖K‖_r",
        norms[7],
        Comparison::AtLeast,
        1e6,
    ));
    checks.push(Check::holds(
        format!("scaled sets increase {spec}"),
        "the truncated norms of the scaled-set family increase strictly",
        norms.windows(2).all(|w| w[1] > w[0]),
    ));

    let window_radius = 3 * geom.blocking_factor();
    let mut violations = 0;
    for i in 0..20u64 {
        let mut rng = rng_for(seed, i);
        let k: CoefficientVector<f64> =
            random_vector(&mut rng, &SupportWindow::new(d, window_radius), LatticeTag::Image);
        let report = adjoint_nilpotence(spec, &k, window_radius, 4)?;
        violations += usize::from(!report.holds());
    }
    checks.push(
        Check::exact(
            format!("adjoint nilpotence {spec}"),
            "(L*)^n K vanishes on every window set once b^n exceeds its radius",
            violations,
        )
        .with_seed(seed),
    );
    Ok(checks)
}

fn majority_negative_checks(spec: &KernelSpec) -> Result<Vec<Check>> {
    let depths: Vec<usize> = (1..=10).collect();
    let norms = divergence_probe(&DivergenceFamily::MajorityAdjointNu { m: 1.0 }, spec, &depths)?;
    let off = norms.iter().zip(&depths).filter(|(v, n)| **v != (**n + 1) as f64).count();
    Ok(vec![Check::exact(
        format!("adjoint constant family {spec}"),
        "the λ = ν family of the majority-rule adjoint has ‖K‖*_0 = N+1, unbounded",
        off,
    )])
}

const STIRLING_EXPECTED: [(usize, f64); 3] = [(3, 1.08540), (9, 1.02811), (25, 1.01007)];

fn stirling_checks() -> Result<Vec<Check>> {
    let rows = stirling_table(&[3, 5, 7, 9, 25])?;
    let claim = "sν approaches √(2s/π) from above as the block grows";
    let mut checks: Vec<Check> = STIRLING_EXPECTED
        .iter()
        .map(|&(s, expected)| {
            let row = rows.iter().find(|r| r.s == s).expect("tabulated size");
            Check::compare(format!("stirling ratio s={s}"), claim, (row.ratio - expected).abs(), Comparison::AtMost, 5e-5)
        })
        .collect();
    checks.push(Check::holds("stirling monotone", claim, stirling_ratios_decrease(&rows)));
    Ok(checks)
}

const WITNESS_DEFAULTS: [(TransformKind, i64, usize); 2] =
    [(TransformKind::Decimation, 3, 1), (TransformKind::Majority, 3, 1)];

fn witness(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let specs = opts.specs(&WITNESS_DEFAULTS)?;
    let samples = opts.samples.clamp(1, 100);
    let seed = opts.seed;
    let mut jobs: Vec<Job> = Vec::new();
    for spec in specs {
        jobs.push(Box::new(move || {
            let bound = witness_bound(&spec);
            let radius = witness_disk_radius(&spec)?;
            let claim = format!(
                "the witness stays at distance ≥ {bound} from the range of λI - L* for |λ| ≤ {radius}"
            );
            let grid = disk_grid(radius, 4, 16);
            let mut checks = Vec::new();
            for r in [0.0, 0.5] {
                let sweep = witness_sweep(&spec, &grid, samples, seed, r)?;
                checks.push(
                    Check::compare(format!("witness r={r} {spec}"), &claim, sweep.min_distance, Comparison::AtLeast, bound - FLOAT_TOLERANCE)
                        .with_seed(seed),
                );
            }
            let zero = CoefficientVector::<Complex64>::new(spec.geom().dimension(), LatticeTag::Image);
            let worst = grid
                .iter()
                .map(|l| residual_witness_distance(&spec, l, &zero, 0.0).map(|x| (x - 1.0).abs()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            checks.push(Check::compare(format!("witness S=0 {spec}"), "the witness has norm exactly 1", worst, Comparison::AtMost, 0.0));
            Ok(checks)
        }));
    }
    run_jobs(jobs)
}
