//! Truncated mapping cones for integer surgery and the triviality of the
//! 2-handle cobordism map in each spin-c class.
//!
//! For surgery coefficient `r` and class `i` the cone is
//! `⊕ Â_s -> ⊕ B̂_t` over `s, t ≡ i (mod |r|)`, with `Â_s` mapping to `B̂_s` by
//! `v̂_s` and to `B̂_{s+r}` by `ĥ_s`. Blocks are kept for `-b <= s <= b` and
//! `-b + r <= t <= b`; once `b >= width + |r|` every arrow leaving the window
//! is zero and the discarded blocks pair off acyclically. The cobordism map
//! out of `ĤF(S³)` at index `s` is the inclusion of `B̂_s`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gf2::{ChainError, Gf2Complex, Gf2Matrix, Gf2Vec};
use crate::knot::{self, KnotComplex, KnotError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConeError {
    #[error("surgery coefficient must be nonzero")]
    ZeroSurgery,
    #[error("window b = {b} is too small; need b >= width + |r| = {min}")]
    WindowTooSmall { b: i64, min: i64 },
    #[error("index {s} lies outside the retained range [{lo}, {hi}]")]
    OutOfRange { s: i64, lo: i64, hi: i64 },
    #[error("no nontrivial index found; the complex is not a valid knot complex")]
    NoNontrivialIndex,
    #[error("representative has length {found}, expected {expected}")]
    BadRepresentative { expected: usize, found: usize },
    #[error(transparent)]
    Knot(#[from] KnotError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurgeryParams {
    r: i64,
    b: i64,
}

impl SurgeryParams {
    pub fn new(knot: &KnotComplex, r: i64, b: i64) -> Result<Self, ConeError> {
        if r == 0 {
            return Err(ConeError::ZeroSurgery);
        }
        let min = min_window(knot, r);
        if b < min {
            return Err(ConeError::WindowTooSmall { b, min });
        }
        Ok(SurgeryParams { r, b })
    }

    /// The smallest admissible window, `width + |r|`.
    pub fn minimal(knot: &KnotComplex, r: i64) -> Result<Self, ConeError> {
        if r == 0 {
            return Err(ConeError::ZeroSurgery);
        }
        Ok(SurgeryParams { r, b: min_window(knot, r) })
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    /// The retained range of `B̂` indices, `[-b + r, b]`.
    pub fn b_range(&self) -> (i64, i64) {
        (-self.b + self.r, self.b)
    }

    pub fn check_index(&self, s: i64) -> Result<(), ConeError> {
        let (lo, hi) = self.b_range();
        if s < lo || s > hi {
            return Err(ConeError::OutOfRange { s, lo, hi });
        }
        Ok(())
    }
}

fn min_window(knot: &KnotComplex, r: i64) -> i64 {
    knot::width(knot) + r.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    A(i64),
    B(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeLabel {
    pub block: Block,
    pub generator: String,
}

impl fmt::Display for ConeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.block {
            Block::A(s) => write!(f, "A[{s}]:{}", self.generator),
            Block::B(t) => write!(f, "B[{t}]:{}", self.generator),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConeComplex {
    pub params: SurgeryParams,
    /// Residue class in `0..|r|`.
    pub class: i64,
    pub complex: Gf2Complex<ConeLabel>,
    pub a_index: BTreeMap<i64, Range<usize>>,
    pub b_index: BTreeMap<i64, Range<usize>>,
}

impl ConeComplex {
    /// Places a vector of the hat complex into block `B̂_s`.
    pub fn embed_in_b(&self, s: i64, z: &Gf2Vec) -> Result<Gf2Vec, ConeError> {
        let (lo, hi) = self.params.b_range();
        let range = self.b_index.get(&s).ok_or(ConeError::OutOfRange { s, lo, hi })?;
        if z.len() != range.len() {
            return Err(ConeError::BadRepresentative { expected: range.len(), found: z.len() });
        }
        Ok(z.embed(self.complex.dim(), range.start))
    }
}

/// Builds the truncated cone for `r`-surgery in class `i` (taken mod `|r|`).
pub fn build_cone(knot: &KnotComplex, r: i64, i: i64, b: i64) -> Result<ConeComplex, ConeError> {
    build_with(knot, SurgeryParams::new(knot, r, b)?, i)
}

fn build_with(knot: &KnotComplex, params: SurgeryParams, i: i64) -> Result<ConeComplex, ConeError> {
    let (r, b) = (params.r, params.b);
    let class = i.rem_euclid(r.abs());
    let n = knot.len();
    let in_class = |s: &i64| (s - class).rem_euclid(r.abs()) == 0;
    let a_blocks: Vec<i64> = (-b..=b).filter(in_class).collect();
    let (lo, hi) = params.b_range();
    let b_blocks: Vec<i64> = (lo..=hi).filter(in_class).collect();

    let mut labels = Vec::with_capacity(n * (a_blocks.len() + b_blocks.len()));
    let mut a_index = BTreeMap::new();
    let mut b_index = BTreeMap::new();
    for (blocks, block, index) in [
        (&a_blocks, Block::A as fn(i64) -> Block, &mut a_index),
        (&b_blocks, Block::B as fn(i64) -> Block, &mut b_index),
    ] {
        for &s in blocks {
            let start = labels.len();
            labels.extend(knot.generators().iter().map(|g| ConeLabel { block: block(s), generator: g.id.clone() }));
            index.insert(s, start..labels.len());
        }
    }

    let dim = labels.len();
    let mut d = Gf2Matrix::zeros(dim, dim);
    let hat = knot::hat_complex(knot);
    for (&t, range) in &b_index {
        debug_assert_eq!(range.len(), n, "block B[{t}]");
        for (row, col) in hat.boundary().entries() {
            d.set(range.start + row, range.start + col, true);
        }
    }
    for (&s, range) in &a_index {
        let base = range.start;
        for (row, col) in knot::a_complex(knot, s).boundary().entries() {
            d.set(base + row, base + col, true);
        }
        let flanks = [(s, knot::v_hat(knot, s)), (s + r, knot::h_hat(knot, s)?)];
        for (target, map) in flanks {
            match b_index.get(&target) {
                Some(tr) => {
                    for (row, col) in map.matrix.entries() {
                        d.flip(tr.start + row, base + col);
                    }
                }
                None => debug_assert!(map.matrix.is_zero(), "map A[{s}] -> B[{target}] leaves the window"),
            }
        }
    }
    let complex = Gf2Complex::new(labels, d)?;
    Ok(ConeComplex { params, class, complex, a_index, b_index })
}

pub fn cone_homology_rank(knot: &KnotComplex, r: i64, i: i64, b: i64) -> Result<usize, ConeError> {
    Ok(build_cone(knot, r, i, b)?.complex.reduce()?.homology_rank())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Nontrivial,
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PredictedVerdict {
    Nontrivial,
    Trivial,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Nontrivial => "nontrivial",
            Verdict::Trivial => "trivial",
        })
    }
}

impl fmt::Display for PredictedVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictedVerdict::Nontrivial => "nontrivial",
            PredictedVerdict::Trivial => "trivial",
            PredictedVerdict::Indeterminate => "indeterminate",
        })
    }
}

impl PredictedVerdict {
    pub fn agrees_with(self, computed: Verdict) -> bool {
        match self {
            PredictedVerdict::Indeterminate => true,
            PredictedVerdict::Nontrivial => computed == Verdict::Nontrivial,
            PredictedVerdict::Trivial => computed == Verdict::Trivial,
        }
    }
}

/// The generator of the hat homology used as the image of `ĤF(S³)`.
pub fn hat_generator(knot: &KnotComplex) -> Result<Gf2Vec, ConeError> {
    let h = knot::hat_complex(knot).homology()?;
    h.representatives.into_iter().next().ok_or(ConeError::Knot(KnotError::NoTau))
}

/// Whether the cobordism map into class `s mod |r|` is nonzero: the hat
/// generator placed in `B̂_s` survives in the homology of the cone.
pub fn cobordism_verdict(knot: &KnotComplex, r: i64, s: i64, b: i64) -> Result<Verdict, ConeError> {
    cobordism_verdict_with(knot, r, s, b, &hat_generator(knot)?)
}

/// As [`cobordism_verdict`], with a caller-chosen cycle of the hat complex.
pub fn cobordism_verdict_with(
    knot: &KnotComplex,
    r: i64,
    s: i64,
    b: i64,
    representative: &Gf2Vec,
) -> Result<Verdict, ConeError> {
    let params = SurgeryParams::new(knot, r, b)?;
    params.check_index(s)?;
    let cone = build_with(knot, params, s)?;
    let reduced = cone.complex.reduce()?;
    let z = cone.embed_in_b(s, representative)?;
    Ok(if reduced.is_boundary(&z)? { Verdict::Trivial } else { Verdict::Nontrivial })
}

/// The verdict forced by `τ` alone: nonzero on `-τ + r < s < τ`; zero when
/// `s < -|τ| + r`, `s > |τ|`, or `r > 0` with `τ <= 0`; otherwise unknown.
pub fn predicted_verdict(tau: i64, r: i64, s: i64) -> PredictedVerdict {
    if -tau + r < s && s < tau {
        PredictedVerdict::Nontrivial
    } else if s < -tau.abs() + r || s > tau.abs() || (r > 0 && tau <= 0) {
        PredictedVerdict::Trivial
    } else {
        PredictedVerdict::Indeterminate
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridCell {
    pub r: i64,
    pub s: i64,
    pub b: i64,
    pub computed: Verdict,
    pub predicted: PredictedVerdict,
    pub mismatch: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct GridReport {
    pub tau: i64,
    pub cells: Vec<GridCell>,
}

impl GridReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(|c| c.mismatch)
    }

    pub fn indeterminate(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(|c| c.predicted == PredictedVerdict::Indeterminate)
    }
}

/// Computed against predicted verdicts for every `r` in `r_list` and every
/// retained index. `window` fixes `b`; `None` uses `width + |r|` per `r`.
/// Classes are evaluated in parallel; cells are ordered by `r` (as listed)
/// and then by `s`.
pub fn verdict_grid(knot: &KnotComplex, r_list: &[i64], window: Option<i64>) -> Result<GridReport, ConeError> {
    if r_list.is_empty() {
        return Ok(GridReport { tau: knot::tau(knot)?, cells: Vec::new() });
    }
    let tau = knot::tau(knot)?;
    let z = hat_generator(knot)?;
    let params = r_list
        .iter()
        .map(|&r| match window {
            Some(b) => SurgeryParams::new(knot, r, b),
            None => SurgeryParams::minimal(knot, r),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, SurgeryParams, i64)> = params
        .iter()
        .enumerate()
        .flat_map(|(k, &p)| (0..p.r.abs()).map(move |class| (k, p, class)))
        .collect();
    let per_class = jobs
        .par_iter()
        .map(|&(k, p, class)| -> Result<Vec<(usize, GridCell)>, ConeError> {
            let cone = build_with(knot, p, class)?;
            let reduced = cone.complex.reduce()?;
            cone.b_index
                .keys()
                .map(|&s| {
                    let computed = if reduced.is_boundary(&cone.embed_in_b(s, &z)?)? {
                        Verdict::Trivial
                    } else {
                        Verdict::Nontrivial
                    };
                    let predicted = predicted_verdict(tau, p.r, s);
                    let mismatch = !predicted.agrees_with(computed);
                    Ok((k, GridCell { r: p.r, s, b: p.b, computed, predicted, mismatch }))
                })
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut cells: Vec<(usize, GridCell)> = per_class.into_iter().flatten().collect();
    cells.sort_by_key(|(k, c)| (*k, c.s));
    Ok(GridReport { tau, cells: cells.into_iter().map(|(_, c)| c).collect() })
}

/// Surgery coefficient used for the large-negative-surgery correction:
/// `-2 width - 2`, which is below `2τ - 1` for every complex.
pub fn reference_surgery(knot: &KnotComplex) -> i64 {
    -2 * knot::width(knot) - 2
}

fn verdict_to_correction(v: Verdict) -> u8 {
    match v {
        Verdict::Nontrivial => 0,
        Verdict::Trivial => 1,
    }
}

/// `𝒞(K)`: 0 when the large-negative-surgery map is nonzero at `τ(K)`,
/// 1 when it vanishes.
pub fn correction(knot: &KnotComplex) -> Result<u8, ConeError> {
    let r = reference_surgery(knot);
    let p = SurgeryParams::minimal(knot, r)?;
    let t = knot::tau(knot)?;
    Ok(verdict_to_correction(cobordism_verdict(knot, r, t, p.b)?))
}

/// `𝒞_r(K)`: the same test at `τ(K)` for the given `r`.
pub fn correction_at(knot: &KnotComplex, r: i64) -> Result<u8, ConeError> {
    let p = SurgeryParams::minimal(knot, r)?;
    let t = knot::tau(knot)?;
    p.check_index(t)?;
    Ok(verdict_to_correction(cobordism_verdict(knot, r, t, p.b)?))
}

/// The largest index with a nonzero map for the reference surgery; equals
/// `τ(K) - 𝒞(K)`.
pub fn surgery_tau_probe(knot: &KnotComplex) -> Result<i64, ConeError> {
    let r = reference_surgery(knot);
    let grid = verdict_grid(knot, &[r], None)?;
    grid.cells
        .iter()
        .filter(|c| c.computed == Verdict::Nontrivial)
        .map(|c| c.s)
        .max()
        .ok_or(ConeError::NoNontrivialIndex)
}
