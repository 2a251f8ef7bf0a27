use thiserror::Error;

use crate::lattice::{Site, SiteSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0}: the site set must be nonempty")]
    EmptySet(&'static str),

    #[error("enumeration over {sites} sites exceeds the cap of {cap} sites")]
    EnumerationTooLarge { sites: usize, cap: usize },

    #[error("site {0} is not covered by the spin configuration")]
    MissingSite(Site),

    #[error("invalid kernel spec: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice tag mismatch: {left} vs {right}")]
    LatticeTagMismatch { left: &'static str, right: &'static str },

    #[error("interaction set {0} lies outside the volume")]
    SupportOutOfVolume(SiteSet),

    #[error("frozen partition function is not positive ({0})")]
    DegenerateKernel(f64),

    #[error("pattern {pattern} is not contained in block {block}")]
    NotInBlock { pattern: SiteSet, block: Site },

    #[error("window does not contain the region {0}")]
    WindowTooSmall(SiteSet),

    #[error("check set {0} is outside the valid truncation region")]
    TruncationViolation(SiteSet),

    #[error("|lambda| = {modulus} lies outside the disk of radius {radius}")]
    OutOfDisk { modulus: f64, radius: f64 },

    #[error("adjoint fan-out of {0} sets exceeds the limit")]
    FanoutTooLarge(u128),

    #[error("duplicate interaction set {0}")]
    DuplicateSet(SiteSet),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
