//! Finite bifiltered models of the full knot Floer complex.
//!
//! A [`KnotComplex`] lists generators with Alexander and Maslov gradings and
//! arrows that drop the two lattice coordinates. Generator `x` sits at
//! `(i, j) = (0, A(x))` and its translate `U^k x` at `(-k, A(x) - k)`; an arrow
//! with bidegree `(di, dj)` goes from `x` to the translate of its target at
//! `(di, A(x) + dj)`. All coefficients are in GF(2).

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{ChainError, Gf2Complex, Gf2Matrix, Gf2Vec};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotGenerator {
    pub id: String,
    pub alexander: i64,
    pub maslov: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arrow {
    pub from: String,
    pub to: String,
    pub di: i64,
    pub dj: i64,
}

/// On-disk form of a knot complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotDocument {
    pub name: String,
    pub generators: Vec<KnotGenerator>,
    pub arrows: Vec<Arrow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip: Option<Vec<(String, String)>>,
}

/// An arrow between generator indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub di: i64,
    pub dj: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnotError {
    #[error("duplicate generator id `{0}`")]
    DuplicateId(String),
    #[error("arrow refers to unknown generator `{0}`")]
    UnknownId(String),
    #[error("flip is not a bijection: {0}")]
    BadFlip(String),
    #[error("knot complex `{0}` carries no flip map")]
    MissingFlip(String),
    #[error("invalid staircase exponents: {0}")]
    BadStaircase(String),
    #[error("invalid builtin knot: {0}")]
    BadBuiltin(String),
    #[error("cannot parse knot complex: {0}")]
    Parse(String),
    #[error("no filtration level carries the homology of the hat complex")]
    NoTau,
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// The first violated invariant found by [`validate_knot`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnotDiagnostic {
    #[error("arrow {from}->{to} has bidegree ({di}, {dj}); both must be <= 0")]
    ArrowBidegree { from: String, to: String, di: i64, dj: i64 },
    #[error("arrow {from}->{to} ({di}, {dj}) is listed twice")]
    DuplicateArrow { from: String, to: String, di: i64, dj: i64 },
    #[error("alexander law fails on arrow {from}->{to}: expected A({to}) = {expected}, found {found}")]
    AlexanderLaw { from: String, to: String, expected: i64, found: i64 },
    #[error("grading law fails on arrow {from}->{to}: expected M({to}) = {expected}, found {found}")]
    MaslovLaw { from: String, to: String, expected: i64, found: i64 },
    #[error("differential does not square to zero: {count} paths {from}->{to} with bidegree ({di}, {dj})")]
    SquareNonzero { from: String, to: String, di: i64, dj: i64, count: usize },
    #[error("alexander gradings are not symmetric under A -> -A")]
    AsymmetricAlexander,
    #[error("hat complex has homology of rank {rank}, expected 1")]
    HatHomologyRank { rank: usize },
    #[error("flip violates A(phi x) = -A(x) at `{id}`")]
    FlipAlexander { id: String },
    #[error("flip violates M(phi x) = M(x) - 2A(x) at `{id}`")]
    FlipMaslov { id: String },
    #[error("flip image of arrow {from}->{to} ({di}, {dj}) is missing")]
    FlipArrow { from: String, to: String, di: i64, dj: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnotComplex {
    name: String,
    generators: Vec<KnotGenerator>,
    edges: Vec<Edge>,
    flip: Option<Vec<usize>>,
}

impl KnotComplex {
    /// Resolves ids and checks the structure (unique ids, known endpoints,
    /// flip a bijection). Gradings and `∂² = 0` are left to [`validate_knot`].
    pub fn new(
        name: impl Into<String>,
        generators: Vec<KnotGenerator>,
        arrows: Vec<Arrow>,
        flip: Option<Vec<(String, String)>>,
    ) -> Result<Self, KnotError> {
        let mut index = HashMap::with_capacity(generators.len());
        for (k, g) in generators.iter().enumerate() {
            if index.insert(g.id.clone(), k).is_some() {
                return Err(KnotError::DuplicateId(g.id.clone()));
            }
        }
        let lookup = |id: &str| index.get(id).copied().ok_or_else(|| KnotError::UnknownId(id.to_string()));
        let edges = arrows
            .iter()
            .map(|a| Ok(Edge { from: lookup(&a.from)?, to: lookup(&a.to)?, di: a.di, dj: a.dj }))
            .collect::<Result<Vec<_>, KnotError>>()?;
        let flip = match flip {
            None => None,
            Some(pairs) => {
                let mut image = vec![None; generators.len()];
                for (a, b) in &pairs {
                    let (x, y) = (lookup(a)?, lookup(b)?);
                    if image[x].replace(y).is_some() {
                        return Err(KnotError::BadFlip(format!("`{a}` appears twice as a source")));
                    }
                }
                let image = image
                    .into_iter()
                    .enumerate()
                    .map(|(k, y)| {
                        y.ok_or_else(|| KnotError::BadFlip(format!("`{}` has no image", generators[k].id)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let distinct: HashSet<_> = image.iter().collect();
                if distinct.len() != image.len() {
                    return Err(KnotError::BadFlip("two generators share an image".into()));
                }
                Some(image)
            }
        };
        Ok(KnotComplex { name: name.into(), generators, edges, flip })
    }

    pub fn from_document(doc: KnotDocument) -> Result<Self, KnotError> {
        Self::new(doc.name, doc.generators, doc.arrows, doc.flip)
    }

    pub fn from_json(text: &str) -> Result<Self, KnotError> {
        let doc: KnotDocument = serde_json::from_str(text).map_err(|e| KnotError::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn to_document(&self) -> KnotDocument {
        KnotDocument {
            name: self.name.clone(),
            generators: self.generators.clone(),
            arrows: self.arrows(),
            flip: self.flip.as_ref().map(|f| {
                f.iter()
                    .enumerate()
                    .map(|(x, &y)| (self.generators[x].id.clone(), self.generators[y].id.clone()))
                    .collect()
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("knot document serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn generators(&self) -> &[KnotGenerator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn arrows(&self) -> Vec<Arrow> {
        self.edges
            .iter()
            .map(|e| Arrow {
                from: self.generators[e.from].id.clone(),
                to: self.generators[e.to].id.clone(),
                di: e.di,
                dj: e.dj,
            })
            .collect()
    }

    pub fn flip(&self) -> Option<&[usize]> {
        self.flip.as_deref()
    }

    pub fn has_flip(&self) -> bool {
        self.flip.is_some()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.id == id)
    }

    fn ids(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.id.clone()).collect()
    }

    fn require_flip(&self) -> Result<&[usize], KnotError> {
        self.flip().ok_or_else(|| KnotError::MissingFlip(self.name.clone()))
    }

    fn id(&self, k: usize) -> String {
        self.generators[k].id.clone()
    }
}

/// The staircase complex with the given Alexander exponents, listed in
/// decreasing order. Odd-indexed generators carry one horizontal and one
/// vertical arrow.
pub fn staircase(exponents: &[i64]) -> Result<KnotComplex, KnotError> {
    if exponents.len().is_multiple_of(2) {
        return Err(KnotError::BadStaircase("an odd number of exponents is required".into()));
    }
    if exponents.windows(2).any(|w| w[0] <= w[1]) {
        return Err(KnotError::BadStaircase("exponents must be strictly decreasing".into()));
    }
    let n = exponents.len();
    if (0..n).any(|j| exponents[j] + exponents[n - 1 - j] != 0) {
        return Err(KnotError::BadStaircase("exponents must be symmetric about 0".into()));
    }
    let id = |j: usize| format!("x{j}");
    let mut maslov = vec![0i64; n];
    let mut arrows = Vec::new();
    for j in (1..n).step_by(2) {
        let di = -(exponents[j - 1] - exponents[j]);
        let dj = -(exponents[j] - exponents[j + 1]);
        // x_j -> x_{j-1} horizontal: M(x_{j-1}) = M(x_j) - 1 - 2di
        maslov[j] = maslov[j - 1] + 1 + 2 * di;
        maslov[j + 1] = maslov[j] - 1;
        arrows.push(Arrow { from: id(j), to: id(j - 1), di, dj: 0 });
        arrows.push(Arrow { from: id(j), to: id(j + 1), di: 0, dj });
    }
    let generators = (0..n)
        .map(|j| KnotGenerator { id: id(j), alexander: exponents[j], maslov: maslov[j] })
        .collect();
    let flip = (0..n).map(|j| (id(j), id(n - 1 - j))).collect();
    let list: Vec<String> = exponents.iter().map(i64::to_string).collect();
    KnotComplex::new(format!("staircase[{}]", list.join(",")), generators, arrows, Some(flip))
}

/// Named knots with hard-wired complexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Unknot,
    Torus(u32, u32),
    FigureEight,
}

impl Builtin {
    /// Parses `unknot`, `figure-eight` (or `4_1`) and `torus:p:q`.
    pub fn parse(text: &str) -> Result<Self, KnotError> {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            ["unknot"] => Ok(Builtin::Unknot),
            ["figure-eight"] | ["4_1"] => Ok(Builtin::FigureEight),
            ["torus", p, q] => {
                let num = |s: &str| {
                    s.parse::<u32>().map_err(|_| KnotError::BadBuiltin(format!("`{s}` is not a positive integer")))
                };
                Ok(Builtin::Torus(num(p)?, num(q)?))
            }
            _ => Err(KnotError::BadBuiltin(format!("unknown knot `{text}`"))),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Unknot => write!(f, "unknot"),
            Builtin::Torus(p, q) => write!(f, "T({p},{q})"),
            Builtin::FigureEight => write!(f, "4_1"),
        }
    }
}

pub fn builtin(which: Builtin) -> Result<KnotComplex, KnotError> {
    let knot = match which {
        Builtin::Unknot => staircase(&[0])?,
        Builtin::Torus(p, q) => {
            if p < 2 || q < 2 {
                return Err(KnotError::BadBuiltin(format!("torus parameters must be >= 2, got ({p}, {q})")));
            }
            if gcd(p, q) != 1 {
                return Err(KnotError::BadBuiltin(format!("torus parameters ({p}, {q}) are not coprime")));
            }
            staircase(&torus_exponents(p, q))?
        }
        Builtin::FigureEight => figure_eight(),
    };
    Ok(knot.with_name(which.to_string()))
}

fn figure_eight() -> KnotComplex {
    let g = |id: &str, alexander, maslov| KnotGenerator { id: id.into(), alexander, maslov };
    let a = |from: &str, to: &str, di, dj| Arrow { from: from.into(), to: to.into(), di, dj };
    let generators = vec![g("e", 0, 0), g("t", 0, 0), g("u", 1, 1), g("v", -1, -1), g("w", 0, 0)];
    let arrows = vec![a("t", "u", -1, 0), a("t", "v", 0, -1), a("u", "w", 0, -1), a("v", "w", -1, 0)];
    let flip = [("e", "e"), ("t", "t"), ("w", "w"), ("u", "v"), ("v", "u")]
        .iter()
        .map(|(x, y)| (x.to_string(), y.to_string()))
        .collect();
    KnotComplex::new("4_1", generators, arrows, Some(flip)).expect("figure-eight data is well formed")
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Symmetrized exponents of the Alexander polynomial of `T(p, q)`, obtained
/// by dividing `(t^{pq} - 1)(t - 1)` by `(t^p - 1)(t^q - 1)`.
pub fn torus_exponents(p: u32, q: u32) -> Vec<i64> {
    let binomial = |n: usize| {
        let mut c = vec![0i64; n + 1];
        c[0] = -1;
        c[n] += 1;
        c
    };
    let (p, q) = (p as usize, q as usize);
    let numerator = poly_mul(&binomial(p * q), &binomial(1));
    let denominator = poly_mul(&binomial(p), &binomial(q));
    let (quotient, remainder) = poly_divmod(&numerator, &denominator);
    debug_assert!(remainder.iter().all(|&c| c == 0));
    let genus = ((quotient.len() - 1) / 2) as i64;
    quotient
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &c)| c != 0)
        .map(|(e, _)| e as i64 - genus)
        .collect()
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Division by a monic polynomial; coefficients are stored low degree first.
fn poly_divmod(num: &[i64], den: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let dd = den.len() - 1;
    assert_eq!(den[dd], 1, "divisor must be monic");
    let mut rem = num.to_vec();
    let mut quot = vec![0; num.len().saturating_sub(dd).max(1)];
    for k in (dd..num.len()).rev() {
        let c = rem[k];
        if c != 0 {
            quot[k - dd] = c;
            for (i, d) in den.iter().enumerate() {
                rem[k - dd + i] -= c * d;
            }
        }
    }
    rem.truncate(dd);
    (quot, rem)
}

/// Reverses every arrow and negates both gradings; the flip carries over.
pub fn mirror(knot: &KnotComplex) -> KnotComplex {
    let generators = knot
        .generators
        .iter()
        .map(|g| KnotGenerator { id: g.id.clone(), alexander: -g.alexander, maslov: -g.maslov })
        .collect();
    let edges = knot.edges.iter().map(|e| Edge { from: e.to, to: e.from, di: e.di, dj: e.dj }).collect();
    KnotComplex { name: format!("mirror({})", knot.name), generators, edges, flip: knot.flip.clone() }
}

/// Tensor product of the two complexes.
pub fn connect_sum(left: &KnotComplex, right: &KnotComplex) -> KnotComplex {
    let n = right.len();
    let mut ids: Vec<String> = Vec::with_capacity(left.len() * n);
    let mut generators = Vec::with_capacity(left.len() * n);
    for x in &left.generators {
        for y in &right.generators {
            ids.push(format!("{}|{}", x.id, y.id));
            generators.push((x.alexander + y.alexander, x.maslov + y.maslov));
        }
    }
    if ids.iter().collect::<HashSet<_>>().len() != ids.len() {
        ids = (0..left.len()).flat_map(|i| (0..n).map(move |j| format!("{i}|{j}"))).collect();
    }
    let generators = ids
        .into_iter()
        .zip(generators)
        .map(|(id, (alexander, maslov))| KnotGenerator { id, alexander, maslov })
        .collect();
    let mut edges = Vec::new();
    for e in &left.edges {
        for y in 0..n {
            edges.push(Edge { from: e.from * n + y, to: e.to * n + y, ..*e });
        }
    }
    for x in 0..left.len() {
        for e in &right.edges {
            edges.push(Edge { from: x * n + e.from, to: x * n + e.to, ..*e });
        }
    }
    let flip = match (&left.flip, &right.flip) {
        (Some(f), Some(g)) => Some(
            (0..left.len())
                .flat_map(|x| (0..n).map(move |y| (x, y)))
                .map(|(x, y)| f[x] * n + g[y])
                .collect(),
        ),
        _ => None,
    };
    KnotComplex { name: format!("{} # {}", left.name, right.name), generators, edges, flip }
}

/// Checks arrow bidegrees and grading laws, `∂² = 0` in the lattice,
/// Alexander symmetry, the rank of the hat homology and the flip laws, in
/// that order.
pub fn validate_knot(knot: &KnotComplex) -> Result<(), KnotDiagnostic> {
    let gens = &knot.generators;
    let mut seen = HashSet::new();
    for e in &knot.edges {
        let (from, to) = (knot.id(e.from), knot.id(e.to));
        if e.di > 0 || e.dj > 0 {
            return Err(KnotDiagnostic::ArrowBidegree { from, to, di: e.di, dj: e.dj });
        }
        if !seen.insert(*e) {
            return Err(KnotDiagnostic::DuplicateArrow { from, to, di: e.di, dj: e.dj });
        }
        let expected = gens[e.from].alexander + e.dj - e.di;
        if gens[e.to].alexander != expected {
            return Err(KnotDiagnostic::AlexanderLaw { from, to, expected, found: gens[e.to].alexander });
        }
        let expected = gens[e.from].maslov - 1 - 2 * e.di;
        if gens[e.to].maslov != expected {
            return Err(KnotDiagnostic::MaslovLaw { from, to, expected, found: gens[e.to].maslov });
        }
    }

    let mut outgoing: Vec<Vec<&Edge>> = vec![Vec::new(); gens.len()];
    for e in &knot.edges {
        outgoing[e.from].push(e);
    }
    let mut paths: HashMap<(usize, usize, i64, i64), usize> = HashMap::new();
    for first in &knot.edges {
        for second in &outgoing[first.to] {
            *paths.entry((first.from, second.to, first.di + second.di, first.dj + second.dj)).or_default() += 1;
        }
    }
    let mut odd: Vec<_> = paths.into_iter().filter(|(_, c)| c % 2 == 1).collect();
    odd.sort();
    if let Some(&((from, to, di, dj), count)) = odd.first() {
        return Err(KnotDiagnostic::SquareNonzero { from: knot.id(from), to: knot.id(to), di, dj, count });
    }

    let mut plus: Vec<i64> = gens.iter().map(|g| g.alexander).collect();
    let mut minus: Vec<i64> = plus.iter().map(|a| -a).collect();
    plus.sort_unstable();
    minus.sort_unstable();
    if plus != minus {
        return Err(KnotDiagnostic::AsymmetricAlexander);
    }

    let rank = hat_complex(knot).homology().map(|h| h.rank).unwrap_or(usize::MAX);
    if rank != 1 {
        return Err(KnotDiagnostic::HatHomologyRank { rank });
    }

    if let Some(flip) = &knot.flip {
        for (x, &y) in flip.iter().enumerate() {
            if gens[y].alexander != -gens[x].alexander {
                return Err(KnotDiagnostic::FlipAlexander { id: knot.id(x) });
            }
            if gens[y].maslov != gens[x].maslov - 2 * gens[x].alexander {
                return Err(KnotDiagnostic::FlipMaslov { id: knot.id(x) });
            }
        }
        for e in &knot.edges {
            let image = Edge { from: flip[e.from], to: flip[e.to], di: e.dj, dj: e.di };
            if !seen.contains(&image) {
                return Err(KnotDiagnostic::FlipArrow { from: knot.id(e.from), to: knot.id(e.to), di: e.di, dj: e.dj });
            }
        }
    }
    Ok(())
}

/// Largest absolute Alexander grading.
pub fn width(knot: &KnotComplex) -> i64 {
    knot.generators.iter().map(|g| g.alexander.abs()).max().unwrap_or(0)
}

/// The complex `C{i = 0}`: every generator, with the arrows of `di = 0`.
pub fn hat_complex(knot: &KnotComplex) -> Gf2Complex<String> {
    let n = knot.len();
    let mut d = Gf2Matrix::zeros(n, n);
    for e in knot.edges.iter().filter(|e| e.di == 0) {
        d.flip(e.to, e.from);
    }
    Gf2Complex::new(knot.ids(), d).expect("square boundary")
}

/// The least filtration level `m` for which the subcomplex `A <= m` of the
/// hat complex carries a cycle that is not a boundary in the whole complex.
pub fn tau(knot: &KnotComplex) -> Result<i64, KnotError> {
    let hat = hat_complex(knot);
    let full = hat.reduce()?;
    let w = width(knot);
    for m in -w..=w {
        let keep: Vec<usize> = (0..knot.len()).filter(|&k| knot.generators[k].alexander <= m).collect();
        if keep.is_empty() {
            continue;
        }
        let position: HashMap<usize, usize> = keep.iter().enumerate().map(|(p, &k)| (k, p)).collect();
        let mut d = Gf2Matrix::zeros(keep.len(), keep.len());
        for (p, &k) in keep.iter().enumerate() {
            for row in hat.boundary().column(k).ones() {
                d.set(position[&row], p, true);
            }
        }
        let sub = Gf2Complex::new(keep.iter().map(|&k| knot.id(k)).collect(), d)?;
        for z in sub.homology()?.representatives {
            let lifted = Gf2Vec::from_indices(knot.len(), z.ones().map(|p| keep[p]));
            if !full.is_boundary(&lifted)? {
                return Ok(m);
            }
        }
    }
    Err(KnotError::NoTau)
}

/// `k_s(x) = max(0, A(x) - s)`: the power of `U` placing `x` in `Â_s`.
pub fn translates(knot: &KnotComplex, s: i64) -> Vec<i64> {
    knot.generators.iter().map(|g| (g.alexander - s).max(0)).collect()
}

/// The complex `Â_s = C{max(i, j - s) = 0}`, one basis element per
/// generator placed at its translate `k_s`.
pub fn a_complex(knot: &KnotComplex, s: i64) -> Gf2Complex<String> {
    let k = translates(knot, s);
    let n = knot.len();
    let mut d = Gf2Matrix::zeros(n, n);
    for e in &knot.edges {
        if k[e.from] - e.di == k[e.to] {
            d.flip(e.to, e.from);
        }
    }
    let labels = knot
        .generators
        .iter()
        .zip(&k)
        .map(|(g, &k)| if k == 0 { g.id.clone() } else { format!("U^{k}{}", g.id) })
        .collect();
    Gf2Complex::new(labels, d).expect("square boundary")
}

/// A chain map from `Â_s` to the hat complex, both with one basis element
/// per generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlankMap {
    pub s: i64,
    pub matrix: Gf2Matrix,
}

impl FlankMap {
    pub fn is_chain_map(&self, knot: &KnotComplex) -> Result<bool, ChainError> {
        let lhs = hat_complex(knot).boundary().mul(&self.matrix)?;
        let rhs = self.matrix.mul(a_complex(knot, self.s).boundary())?;
        Ok(lhs == rhs)
    }
}

/// `v̂_s`: the projection of `Â_s` onto its `i = 0` part.
pub fn v_hat(knot: &KnotComplex, s: i64) -> FlankMap {
    let n = knot.len();
    let mut m = Gf2Matrix::zeros(n, n);
    for (x, &k) in translates(knot, s).iter().enumerate() {
        if k == 0 {
            m.set(x, x, true);
        }
    }
    FlankMap { s, matrix: m }
}

/// `ĥ_s`: projection of `Â_s` onto the line `j = s`, shifted by `U^s` and
/// carried back to `C{i = 0}` by the flip.
pub fn h_hat(knot: &KnotComplex, s: i64) -> Result<FlankMap, KnotError> {
    let flip = knot.require_flip()?;
    let n = knot.len();
    let mut m = Gf2Matrix::zeros(n, n);
    for (x, g) in knot.generators.iter().enumerate() {
        if g.alexander >= s {
            m.set(flip[x], x, true);
        }
    }
    Ok(FlankMap { s, matrix: m })
}

/// The seven knots used throughout the tests: the unknot, `T(2,3)` and its
/// mirror, `T(2,5)`, `T(3,4)`, the figure-eight and `T(2,3) # T(2,3)`.
pub fn library() -> Vec<KnotComplex> {
    let t23 = builtin(Builtin::Torus(2, 3)).expect("builtin");
    vec![
        builtin(Builtin::Unknot).expect("builtin"),
        t23.clone(),
        mirror(&t23),
        builtin(Builtin::Torus(2, 5)).expect("builtin"),
        builtin(Builtin::Torus(3, 4)).expect("builtin"),
        builtin(Builtin::FigureEight).expect("builtin"),
        connect_sum(&t23, &t23),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t23() -> KnotComplex {
        builtin(Builtin::Torus(2, 3)).unwrap()
    }

    /// Exhaustive search for a bijection of generators preserving gradings,
    /// arrows with their bidegrees, and the flip.
    fn isomorphic(a: &KnotComplex, b: &KnotComplex) -> bool {
        if a.len() != b.len() || a.edges().len() != b.edges().len() {
            return false;
        }
        let target: HashSet<Edge> = b.edges().iter().copied().collect();
        let n = a.len();
        let mut perm: Vec<usize> = Vec::new();
        let mut used = vec![false; n];
        fn extend(
            a: &KnotComplex,
            b: &KnotComplex,
            target: &HashSet<Edge>,
            perm: &mut Vec<usize>,
            used: &mut [bool],
        ) -> bool {
            let n = a.len();
            if perm.len() == n {
                let arrows_ok = a.edges().iter().all(|e| target.contains(&Edge { from: perm[e.from], to: perm[e.to], ..*e }));
                let flip_ok = match (a.flip(), b.flip()) {
                    (Some(f), Some(g)) => (0..n).all(|x| perm[f[x]] == g[perm[x]]),
                    (None, None) => true,
                    _ => false,
                };
                return arrows_ok && flip_ok;
            }
            let x = perm.len();
            for y in 0..n {
                let (gx, gy) = (&a.generators()[x], &b.generators()[y]);
                if !used[y] && gx.alexander == gy.alexander && gx.maslov == gy.maslov {
                    used[y] = true;
                    perm.push(y);
                    if extend(a, b, target, perm, used) {
                        return true;
                    }
                    perm.pop();
                    used[y] = false;
                }
            }
            false
        }
        extend(a, b, &target, &mut perm, &mut used)
    }

    #[test]
    fn staircase_examples() {
        let t = staircase(&[1, 0, -1]).unwrap();
        assert_eq!(tau(&t).unwrap(), 1);
        let m: Vec<i64> = t.generators().iter().map(|g| g.maslov).collect();
        assert_eq!(m, vec![0, -1, -2]);

        let u = staircase(&[0]).unwrap();
        assert_eq!(u.len(), 1);
        assert!(u.edges().is_empty());

        let t34 = staircase(&[3, 2, 0, -2, -3]).unwrap();
        assert_eq!(tau(&t34).unwrap(), 3);
        assert!(validate_knot(&t34).is_ok());
    }

    #[test]
    fn staircase_rejects_bad_input() {
        assert!(matches!(staircase(&[1, -1]), Err(KnotError::BadStaircase(_))));
        assert!(matches!(staircase(&[2, 0, -1]), Err(KnotError::BadStaircase(_))));
        assert!(matches!(staircase(&[0, 1, -1]), Err(KnotError::BadStaircase(_))));
    }

    #[test]
    fn torus_exponents_by_division() {
        assert_eq!(torus_exponents(2, 3), vec![1, 0, -1]);
        assert_eq!(torus_exponents(3, 4), vec![3, 2, 0, -2, -3]);
        assert_eq!(torus_exponents(2, 5), vec![2, 1, 0, -1, -2]);
    }

    #[test]
    fn builtin_examples() {
        assert_eq!(t23().to_document().generators, staircase(&[1, 0, -1]).unwrap().to_document().generators);
        assert_eq!(builtin(Builtin::Unknot).unwrap().len(), 1);
        let e = builtin(Builtin::FigureEight).unwrap();
        assert!(validate_knot(&e).is_ok());
        assert_eq!(tau(&e).unwrap(), 0);
        assert!(matches!(builtin(Builtin::Torus(2, 4)), Err(KnotError::BadBuiltin(_))));
        assert!(matches!(builtin(Builtin::Torus(1, 3)), Err(KnotError::BadBuiltin(_))));
    }

    #[test]
    fn builtin_parse() {
        assert_eq!(Builtin::parse("torus:3:4").unwrap(), Builtin::Torus(3, 4));
        assert_eq!(Builtin::parse("figure-eight").unwrap(), Builtin::FigureEight);
        assert_eq!(Builtin::parse("unknot").unwrap(), Builtin::Unknot);
        assert!(Builtin::parse("torus:3").is_err());
        assert!(Builtin::parse("torus:a:4").is_err());
    }

    #[test]
    fn mirror_examples() {
        let u = builtin(Builtin::Unknot).unwrap();
        assert!(isomorphic(&mirror(&u), &u));
        assert_eq!(tau(&mirror(&t23())).unwrap(), -1);
        let e = builtin(Builtin::FigureEight).unwrap();
        let me = mirror(&e);
        assert!(validate_knot(&me).is_ok());
        assert!(isomorphic(&me, &e));
        // the trefoil is chiral
        assert!(!isomorphic(&mirror(&t23()), &t23()));
    }

    #[test]
    fn connect_sum_examples() {
        for k in library() {
            let u = builtin(Builtin::Unknot).unwrap();
            assert!(isomorphic(&connect_sum(&k, &u), &k), "{}", k.name());
        }
        let t = t23();
        assert_eq!(tau(&connect_sum(&t, &t)).unwrap(), 2);
        let t25 = builtin(Builtin::Torus(2, 5)).unwrap();
        let sum = connect_sum(&t, &mirror(&t25));
        assert!(validate_knot(&sum).is_ok());
        assert_eq!(tau(&sum).unwrap(), -1);
    }

    #[test]
    fn validate_examples() {
        for k in library() {
            assert_eq!(validate_knot(&k), Ok(()), "{}", k.name());
        }

        let mut doc = t23().to_document();
        doc.arrows.retain(|a| a.dj == 0);
        let broken = KnotComplex::from_document(doc).unwrap();
        assert_eq!(validate_knot(&broken), Err(KnotDiagnostic::HatHomologyRank { rank: 3 }));

        let mut doc = t23().to_document();
        doc.generators[1].maslov = 0;
        let broken = KnotComplex::from_document(doc).unwrap();
        assert!(matches!(validate_knot(&broken), Err(KnotDiagnostic::MaslovLaw { .. })));
    }

    #[test]
    fn validate_other_failures() {
        let mut doc = t23().to_document();
        doc.arrows[0].di = 1;
        let k = KnotComplex::from_document(doc).unwrap();
        assert!(matches!(validate_knot(&k), Err(KnotDiagnostic::ArrowBidegree { .. })));

        let mut doc = t23().to_document();
        doc.generators[0].alexander = 2;
        doc.arrows.clear();
        let k = KnotComplex::from_document(doc).unwrap();
        assert_eq!(validate_knot(&k), Err(KnotDiagnostic::AsymmetricAlexander));

        let mut doc = t23().to_document();
        doc.flip = Some(vec![("x0".into(), "x0".into()), ("x1".into(), "x1".into()), ("x2".into(), "x2".into())]);
        let k = KnotComplex::from_document(doc).unwrap();
        assert!(matches!(validate_knot(&k), Err(KnotDiagnostic::FlipAlexander { .. })));

        // a single arrow x -> U y with no partner path cancelling the square
        let g = |id: &str, alexander, maslov| KnotGenerator { id: id.into(), alexander, maslov };
        let a = |from: &str, to: &str, di, dj| Arrow { from: from.into(), to: to.into(), di, dj };
        let k = KnotComplex::new(
            "chain",
            vec![g("p", 0, 0), g("q", 0, -1), g("r", 0, -2)],
            vec![a("p", "q", 0, 0), a("q", "r", 0, 0)],
            None,
        )
        .unwrap();
        assert!(matches!(validate_knot(&k), Err(KnotDiagnostic::SquareNonzero { .. })));
    }

    #[test]
    fn structural_errors() {
        let g = |id: &str| KnotGenerator { id: id.into(), alexander: 0, maslov: 0 };
        assert_eq!(
            KnotComplex::new("k", vec![g("a"), g("a")], vec![], None),
            Err(KnotError::DuplicateId("a".into()))
        );
        let bad = Arrow { from: "a".into(), to: "z".into(), di: 0, dj: 0 };
        assert_eq!(KnotComplex::new("k", vec![g("a")], vec![bad], None), Err(KnotError::UnknownId("z".into())));
        assert!(matches!(
            KnotComplex::new("k", vec![g("a"), g("b")], vec![], Some(vec![("a".into(), "b".into())])),
            Err(KnotError::BadFlip(_))
        ));
        assert!(matches!(
            KnotComplex::new(
                "k",
                vec![g("a"), g("b")],
                vec![],
                Some(vec![("a".into(), "b".into()), ("b".into(), "b".into())])
            ),
            Err(KnotError::BadFlip(_))
        ));
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let k = connect_sum(&t23(), &builtin(Builtin::FigureEight).unwrap());
        let back = KnotComplex::from_json(&k.to_json()).unwrap();
        assert_eq!(back, k);
        let text = r#"{"name":"u","generators":[{"id":"x","alexander":0,"maslov":0}],"arrows":[],"colour":1}"#;
        assert!(matches!(KnotComplex::from_json(text), Err(KnotError::Parse(_))));
        let text = r#"{"name":"u","generators":[{"id":"x","alexander":0,"maslov":0,"z":1}],"arrows":[]}"#;
        assert!(matches!(KnotComplex::from_json(text), Err(KnotError::Parse(_))));
    }

    #[test]
    fn width_examples() {
        assert_eq!(width(&builtin(Builtin::Unknot).unwrap()), 0);
        assert_eq!(width(&t23()), 1);
        assert_eq!(width(&builtin(Builtin::Torus(3, 4)).unwrap()), 3);
    }

    #[test]
    fn hat_complex_examples() {
        assert_eq!(hat_complex(&builtin(Builtin::Unknot).unwrap()).homology().unwrap().rank, 1);

        let hat = hat_complex(&t23());
        assert_eq!(hat.boundary(), &Gf2Matrix::from_entries(3, 3, [(2, 1)]).unwrap());
        assert_eq!(hat.homology().unwrap().representatives, vec![Gf2Vec::unit(3, 0)]);

        let e = builtin(Builtin::FigureEight).unwrap();
        let h = hat_complex(&e).homology().unwrap();
        assert_eq!(h.representatives, vec![Gf2Vec::unit(5, e.index_of("e").unwrap())]);
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(&builtin(Builtin::Unknot).unwrap()).unwrap(), 0);
        for (p, q) in [(2, 3), (2, 5), (3, 4)] {
            assert_eq!(tau(&builtin(Builtin::Torus(p, q)).unwrap()).unwrap(), ((p - 1) * (q - 1) / 2) as i64);
        }
        assert_eq!(tau(&builtin(Builtin::FigureEight).unwrap()).unwrap(), 0);
    }

    #[test]
    fn a_complex_examples() {
        for k in library() {
            let w = width(&k);
            assert_eq!(a_complex(&k, w).boundary(), hat_complex(&k).boundary(), "{}", k.name());
        }
        let t = t23();
        assert_eq!(translates(&t, 0), vec![1, 0, 0]);
        // b -> a and b -> c survive
        assert_eq!(a_complex(&t, 0).boundary(), &Gf2Matrix::from_entries(3, 3, [(0, 1), (2, 1)]).unwrap());
        assert_eq!(translates(&builtin(Builtin::Unknot).unwrap(), -2), vec![2]);
    }

    #[test]
    fn flank_map_examples() {
        let t = t23();
        for k in library() {
            let w = width(&k);
            let n = k.len();
            assert_eq!(v_hat(&k, w).matrix, Gf2Matrix::identity(n));
            assert!(v_hat(&k, -w - 1).matrix.is_zero());
            assert!(h_hat(&k, w + 1).unwrap().matrix.is_zero());
            assert_eq!(h_hat(&k, -w).unwrap().matrix.rank(), n);
        }
        assert_eq!(v_hat(&t, 0).matrix, Gf2Matrix::from_entries(3, 3, [(1, 1), (2, 2)]).unwrap());
        assert_eq!(h_hat(&t, 1).unwrap().matrix, Gf2Matrix::from_entries(3, 3, [(2, 0)]).unwrap());

        let mut doc = t.to_document();
        doc.flip = None;
        let bare = KnotComplex::from_document(doc).unwrap();
        assert!(matches!(h_hat(&bare, 0), Err(KnotError::MissingFlip(_))));
    }

    #[test]
    fn library_laws() {
        let lib = library();
        for k in &lib {
            let t = tau(k).unwrap();
            let w = width(k);
            assert!(-w <= t && t <= w);
            assert_eq!(tau(&mirror(k)).unwrap(), -t, "{}", k.name());
            for s in -w - 2..=w + 2 {
                assert!(v_hat(k, s).is_chain_map(k).unwrap());
                assert!(h_hat(k, s).unwrap().is_chain_map(k).unwrap());
                assert!(a_complex(k, s).homology().unwrap().rank >= 1);
            }
        }
        for k in &lib {
            for j in &lib {
                let sum = connect_sum(k, j);
                assert_eq!(tau(&sum).unwrap(), tau(k).unwrap() + tau(j).unwrap());
            }
        }
    }
}
