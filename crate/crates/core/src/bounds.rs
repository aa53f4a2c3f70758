//! Exact integer bounds on `τ` of twisted satellites.
//!
//! Everything is phrased through the deviation
//! `D(S_r) = τ(S_r) - T(S_r)` from the central estimate
//! `T(S_r) = τ(P) + l τ(C) + l(l-1)/2 · r`. Unknown corrections are read as 1,
//! which is the weakest value on both sides of every bound.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: i64, hi: i64 },
    #[error("no intervals to combine")]
    NothingToCombine,
    #[error("bounds require a nonzero twist r")]
    ZeroTwist,
    #[error("pattern data inconsistent: {0}")]
    BadPattern(String),
    #[error("twist bounds need s > r (got s = {s}, r = {r})")]
    TwistOrder { s: i64, r: i64 },
    #[error("{shift} shift bound needs {requirement}, got r = {r}")]
    ShiftRange { shift: Shift, requirement: String, r: i64 },
    #[error("winding number must be at least 1 for cables, got {0}")]
    CableWinding(i64),
}

/// A closed integer interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Result<Self, BoundsError> {
        if lo > hi {
            return Err(BoundsError::EmptyInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: i64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn shift(self, by: i64) -> Self {
        Interval { lo: self.lo + by, hi: self.hi + by }
    }

    pub fn negate(self) -> Self {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn contains(self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_subset_of(self, other: Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersect(self, other: Interval) -> Option<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi)).ok()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Intersection of simultaneous bounds; an empty intersection means the
/// inputs contradict each other.
pub fn combine(intervals: &[Interval]) -> Result<Interval, BoundsError> {
    let first = intervals.first().ok_or(BoundsError::NothingToCombine)?;
    let lo = intervals.iter().map(|i| i.lo).max().unwrap_or(first.lo);
    let hi = intervals.iter().map(|i| i.hi).min().unwrap_or(first.hi);
    Interval::new(lo, hi)
}

/// A `τ`-correction value, possibly not known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum Correction {
    Zero,
    One,
    #[default]
    Unknown,
}

impl Correction {
    pub fn from_value(v: u8) -> Option<Self> {
        match v {
            0 => Some(Correction::Zero),
            1 => Some(Correction::One),
            _ => None,
        }
    }

    /// The value used in bounds; unknown counts as 1.
    pub fn value(self) -> i64 {
        match self {
            Correction::Zero => 0,
            Correction::One | Correction::Unknown => 1,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Correction::Zero
    }

    pub fn is_unknown(self) -> bool {
        self == Correction::Unknown
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Correction::Zero => write!(f, "0"),
            Correction::One => write!(f, "1"),
            Correction::Unknown => write!(f, "unknown"),
        }
    }
}

/// Data of a pattern in the solid torus, oriented so that `l >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PatternStats {
    pub tau_p: i64,
    pub l: i64,
    pub n_plus: i64,
    pub n_minus: i64,
    pub corr_p: Correction,
    pub corr_p_mirror: Correction,
}

impl PatternStats {
    /// Checks `l = n₊ - n₋ >= 0` and `n₊ >= 1` when `l > 0`. Corrections
    /// start out unknown.
    pub fn new(tau_p: i64, l: i64, n_plus: i64, n_minus: i64) -> Result<Self, BoundsError> {
        if l < 0 {
            return Err(BoundsError::BadPattern(format!("l = {l} is negative; reorient the pattern")));
        }
        if n_minus < 0 || n_plus - n_minus != l {
            return Err(BoundsError::BadPattern(format!("need l = n+ - n-, got l = {l}, n+ = {n_plus}, n- = {n_minus}")));
        }
        if l > 0 && n_plus < 1 {
            return Err(BoundsError::BadPattern("n+ must be at least 1 when l > 0".into()));
        }
        Ok(PatternStats { tau_p, l, n_plus, n_minus, corr_p: Correction::Unknown, corr_p_mirror: Correction::Unknown })
    }

    pub fn with_corrections(mut self, corr_p: Correction, corr_p_mirror: Correction) -> Self {
        self.corr_p = corr_p;
        self.corr_p_mirror = corr_p_mirror;
        self
    }

    /// Data of the mirrored pattern: `τ` negated, corrections swapped, strand
    /// counts kept.
    pub fn mirrored(self) -> Self {
        PatternStats { tau_p: -self.tau_p, corr_p: self.corr_p_mirror, corr_p_mirror: self.corr_p, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompanionStats {
    pub tau_c: i64,
    pub corr_c: Correction,
    pub corr_c_mirror: Correction,
}

impl CompanionStats {
    pub fn new(tau_c: i64) -> Self {
        CompanionStats { tau_c, corr_c: Correction::Unknown, corr_c_mirror: Correction::Unknown }
    }

    pub fn with_corrections(mut self, corr_c: Correction, corr_c_mirror: Correction) -> Self {
        self.corr_c = corr_c;
        self.corr_c_mirror = corr_c_mirror;
        self
    }

    pub fn mirrored(self) -> Self {
        CompanionStats { tau_c: -self.tau_c, corr_c: self.corr_c_mirror, corr_c_mirror: self.corr_c }
    }
}

fn triangular(l: i64) -> i64 {
    l * (l - 1) / 2
}

fn nonzero(r: i64) -> Result<(), BoundsError> {
    if r == 0 {
        return Err(BoundsError::ZeroTwist);
    }
    Ok(())
}

/// `T(S_r) = τ(P) + l τ(C) + l(l-1)/2 · r`.
pub fn central_estimate(p: &PatternStats, c: &CompanionStats, r: i64) -> i64 {
    p.tau_p + p.l * c.tau_c + triangular(p.l) * r
}

/// The bound valid for every nonzero `r`, with all corrections taken as 1.
pub fn bounds_basic(p: &PatternStats, _c: &CompanionStats, r: i64) -> Result<Interval, BoundsError> {
    nonzero(r)?;
    let slack = if p.l > 0 { p.l } else { 1 };
    Interval::new(-p.n_plus - slack, p.n_plus + slack)
}

/// The sharper bound for `r < 2τ(C) - 1` or `r > 2τ(C) + 1`, all corrections
/// taken as 1. `None` inside the band between.
pub fn bounds_ranged(p: &PatternStats, c: &CompanionStats, r: i64) -> Result<Option<Interval>, BoundsError> {
    nonzero(r)?;
    let slack = if p.l > 0 { p.l } else { 1 };
    let tc = c.tau_c;
    if r < 2 * tc - 1 {
        Interval::new(-(1 + p.l), p.n_plus + slack).map(Some)
    } else if r > 2 * tc + 1 {
        Interval::new(-p.n_plus - slack, 1 + p.l).map(Some)
    } else {
        Ok(None)
    }
}

/// Which side of the band around `2τ(C)` the twist lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `r < 2τ(C) - 1`, or `r = 2τ(C) - 1` when `𝒞(C) = 0`.
    Below,
    /// `r > 2τ(C) + 1`, or `r = 2τ(C) + 1` when `𝒞(C̄) = 0`.
    Above,
}

/// The correction-aware bounds on `D(S_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorrectedBounds {
    pub below: Option<Interval>,
    pub above: Option<Interval>,
    pub all_r: Interval,
}

impl CorrectedBounds {
    pub fn intervals(&self) -> Vec<Interval> {
        self.below.into_iter().chain(self.above).chain(Some(self.all_r)).collect()
    }
}

/// Whether the one-sided ranged bound applies, with the endpoint rules.
pub fn side_applies(c: &CompanionStats, r: i64, side: Side) -> bool {
    let tc = c.tau_c;
    match side {
        Side::Below => r < 2 * tc - 1 || (r == 2 * tc - 1 && c.corr_c.is_zero()),
        Side::Above => r > 2 * tc + 1 || (r == 2 * tc + 1 && c.corr_c_mirror.is_zero()),
    }
}

pub fn bounds_corrected(p: &PatternStats, c: &CompanionStats, r: i64) -> Result<CorrectedBounds, BoundsError> {
    nonzero(r)?;
    let (cp, cpm) = (p.corr_p.value(), p.corr_p_mirror.value());
    let (cc, ccm) = (c.corr_c.value(), c.corr_c_mirror.value());
    let (l, np) = (p.l, p.n_plus);
    let (below, above, all_r) = if l > 0 {
        (
            Interval::new(-(cp + l * cc), np + l * ccm)?,
            Interval::new(-np - l * cc, cpm + l * ccm)?,
            Interval::new(-np - l * cc, np + l * ccm)?,
        )
    } else {
        (Interval::new(-cp, np + 1)?, Interval::new(-np - 1, cpm)?, Interval::new(-np - 1, np + 1)?)
    };
    Ok(CorrectedBounds {
        below: side_applies(c, r, Side::Below).then_some(below),
        above: side_applies(c, r, Side::Above).then_some(above),
        all_r,
    })
}

/// `Δ(r) = r - 2τ(C) - 1 - 𝒞(C̄)` and `Δ′(r) = r - 2τ(C) + 1 + 𝒞(C)`.
pub fn delta_shifts(c: &CompanionStats, r: i64) -> (i64, i64) {
    let tc = c.tau_c;
    (r - 2 * tc - 1 - c.corr_c_mirror.value(), r - 2 * tc + 1 + c.corr_c.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Shift {
    Delta,
    DeltaPrime,
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shift::Delta => write!(f, "delta"),
            Shift::DeltaPrime => write!(f, "delta'"),
        }
    }
}

/// Two-sided bound on `D(S_r)` from bounds on the twisted patterns
/// `D(S_{Δ(r)}(U, P))` and `D(S_{Δ′(r)}(U, P))`.
pub fn raw_two_sided_bounds(
    p: &PatternStats,
    c: &CompanionStats,
    _r: i64,
    dp_delta: Interval,
    dp_delta_prime: Interval,
) -> Result<Interval, BoundsError> {
    let l = p.l;
    Interval::new(
        dp_delta_prime.lo - 1 - l * c.corr_c.value(),
        dp_delta.hi + 1 + l * c.corr_c_mirror.value(),
    )
}

/// Bounds on `g(s) - g(r)` for `s > r`, where `g(t) = τ(S_t) - l(l-1)/2 · t`.
pub fn twist_bounds(n_plus: i64, n_minus: i64, s: i64, r: i64) -> Result<Interval, BoundsError> {
    if s <= r {
        return Err(BoundsError::TwistOrder { s, r });
    }
    if n_minus < 0 || n_plus < n_minus {
        return Err(BoundsError::BadPattern(format!("need n+ >= n- >= 0, got n+ = {n_plus}, n- = {n_minus}")));
    }
    if n_plus > n_minus {
        Interval::new(-(n_plus - 1), n_minus)
    } else if n_plus == 0 {
        // the pattern misses the meridian disk, so twisting changes nothing
        Ok(Interval::point(0))
    } else {
        Interval::new(-n_plus, n_minus - 1)
    }
}

/// Bounds on `D(S_{Δ(r)}(U, P))` or `D(S_{Δ′(r)}(U, P))` from the twist
/// bounds. The `Δ` bound needs `Δ(r) <= 0` and the `Δ′` bound
/// `Δ′(r) >= 0`; these hold in particular for `r <= 2τ(C) - 1` and
/// `r >= 2τ(C) + 1` respectively.
pub fn pattern_shift_bounds(p: &PatternStats, c: &CompanionStats, r: i64, which: Shift) -> Result<Interval, BoundsError> {
    let (delta, delta_prime) = delta_shifts(c, r);
    let (np, nm) = (p.n_plus, p.n_minus);
    match which {
        Shift::Delta => {
            if delta > 0 {
                return Err(BoundsError::ShiftRange { shift: which, requirement: "delta(r) <= 0".into(), r });
            }
            if delta == 0 {
                return Ok(Interval::point(0));
            }
            // D(P^Δ) = g(Δ) - g(0) = -(g(0) - g(Δ))
            Ok(twist_bounds(np, nm, 0, delta)?.negate())
        }
        Shift::DeltaPrime => {
            if delta_prime < 0 {
                return Err(BoundsError::ShiftRange { shift: which, requirement: "delta'(r) >= 0".into(), r });
            }
            if delta_prime == 0 {
                return Ok(Interval::point(0));
            }
            twist_bounds(np, nm, delta_prime, 0)
        }
    }
}

/// Hedden's interval for `τ` of the `(l, lr + 1)`-cable.
pub fn hedden_interval(tau_k: i64, l: i64, r: i64) -> Result<Interval, BoundsError> {
    if l < 1 {
        return Err(BoundsError::CableWinding(l));
    }
    let base = l * tau_k + l * r * (l - 1) / 2;
    Interval::new(base, base + l - 1)
}

/// Linking matrices before and after sliding the pattern over the companion
/// `l` times, with the slide as a change of basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SatelliteFraming {
    pub framing: i64,
    pub original: [[i64; 3]; 3],
    pub slide: [[i64; 3]; 3],
    pub matrix: [[i64; 3]; 3],
}

pub fn satellite_framing(n: i64, l: i64, r: i64) -> SatelliteFraming {
    let original = [[r, 0, 1], [0, -n, -l], [1, -l, 0]];
    let slide = [[1, l, 0], [0, 1, 0], [0, 0, 1]];
    let framing = -n + l * l * r;
    let matrix = [[r, l * r, 1], [l * r, framing, 0], [1, 0, 0]];
    SatelliteFraming { framing, original, slide, matrix }
}

pub fn mat3_mul(a: &[[i64; 3]; 3], b: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut out = [[0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat3_transpose(a: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut out = [[0; 3]; 3];
    for (i, row) in a.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            out[j][i] = x;
        }
    }
    out
}

pub fn det3(m: &[[i64; 3]; 3]) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundSource {
    Basic,
    Ranged,
    CorrectedBelow,
    CorrectedAbove,
    CorrectedAllR,
    /// The raw two-sided bound with both pattern-shift bounds substituted.
    TwoSided,
    Hedden,
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSource::Basic => "basic",
            BoundSource::Ranged => "ranged",
            BoundSource::CorrectedBelow => "corrected_below",
            BoundSource::CorrectedAbove => "corrected_above",
            BoundSource::CorrectedAllR => "corrected_all_r",
            BoundSource::TwoSided => "two_sided",
            BoundSource::Hedden => "hedden",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundEntry {
    pub source: BoundSource,
    pub deviation: Interval,
    pub tau: Interval,
}

/// Every applicable bound on `D(S_r)` and `τ(S_r)` for one twist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub r: i64,
    pub central: i64,
    pub entries: Vec<BoundEntry>,
    /// Corrections that were not supplied and were read as 1.
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(p: &PatternStats, c: &CompanionStats, r: i64) -> Result<Self, BoundsError> {
        let central = central_estimate(p, c, r);
        let mut report = BoundReport { r, central, entries: Vec::new(), warnings: Vec::new(), notes: Vec::new() };
        report.push(BoundSource::Basic, bounds_basic(p, c, r)?);
        if let Some(i) = bounds_ranged(p, c, r)? {
            report.push(BoundSource::Ranged, i);
        }
        let corrected = bounds_corrected(p, c, r)?;
        if let Some(i) = corrected.below {
            report.push(BoundSource::CorrectedBelow, i);
        }
        if let Some(i) = corrected.above {
            report.push(BoundSource::CorrectedAbove, i);
        }
        report.push(BoundSource::CorrectedAllR, corrected.all_r);
        if corrected.below.is_none() && corrected.above.is_none() {
            report.notes.push(format!(
                "r = {r} lies in the band around 2 tau(C) = {}; only the all-r bound applies",
                2 * c.tau_c
            ));
        }
        for (name, corr) in [
            ("C(P)", p.corr_p),
            ("C(mirror P)", p.corr_p_mirror),
            ("C(C)", c.corr_c),
            ("C(mirror C)", c.corr_c_mirror),
        ] {
            if corr.is_unknown() {
                report.warnings.push(format!("{name} unknown; using 1"));
            }
        }
        Ok(report)
    }

    pub fn push(&mut self, source: BoundSource, deviation: Interval) {
        self.entries.push(BoundEntry { source, deviation, tau: deviation.shift(self.central) });
    }

    /// Adds a bound already expressed in terms of `τ(S_r)`.
    pub fn push_tau(&mut self, source: BoundSource, tau: Interval) {
        self.entries.push(BoundEntry { source, deviation: tau.shift(-self.central), tau });
    }

    pub fn combined(&self) -> Result<Interval, BoundsError> {
        combine(&self.entries.iter().map(|e| e.deviation).collect::<Vec<_>>())
    }

    pub fn get(&self, source: BoundSource) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.source == source)
    }
}
