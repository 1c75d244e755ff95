use nalgebra::{DMatrix, DVector};

use super::{tol, ManifoldSpec};
use crate::error::Result;
use crate::expr::{Hyper, Scalar};
use crate::linalg::numerical_rank;

/// `[X_a, X_b]` in coordinates.
pub fn bracket(spec: &ManifoldSpec, a: usize, b: usize, x: &[f64]) -> Result<DVector<f64>> {
    let d = spec.dimension();
    let cols = spec.frame_jet(x, 0..d)?;
    let f = &cols.value;
    // partials[j][(i, k)] = ∂_j F[i][k]
    Ok(DVector::from_fn(d, |i, _| {
        (0..d)
            .map(|j| f[(j, a)] * cols.partials[j][(i, b)] - f[(j, b)] * cols.partials[j][(i, a)])
            .sum()
    }))
}

/// An iterated bracket of frame fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Word {
    Field(usize),
    Bracket(Box<Word>, Box<Word>),
}

impl Word {
    pub fn bracket(a: Word, b: Word) -> Word {
        Word::Bracket(Box::new(a), Box::new(b))
    }

    /// Number of fields in the word.
    pub fn length(&self) -> usize {
        match self {
            Word::Field(_) => 1,
            Word::Bracket(a, b) => a.length() + b.length(),
        }
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Word::Field(k) => write!(f, "X{}", k + 1),
            Word::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// Evaluates the word at a point whose coordinates may already carry
/// infinitesimals below `level`; the result uses no generator at or above
/// `level`.
fn eval_word(spec: &ManifoldSpec, word: &Word, x: &[Hyper], level: usize) -> Result<Vec<Hyper>> {
    match word {
        Word::Field(k) => spec.column_at(*k, x),
        Word::Bracket(u, v) => {
            let uu = eval_word(spec, u, x, level)?;
            let vv = eval_word(spec, v, x, level)?;
            // directional derivative of `field` along `dir` through ε_level
            let along = |field: &Word, dir: &[Hyper]| -> Result<Vec<Hyper>> {
                let shifted: Vec<Hyper> = x
                    .iter()
                    .zip(dir)
                    .map(|(xi, di)| xi.perturb(level, di))
                    .collect();
                Ok(eval_word(spec, field, &shifted, level + 1)?
                    .into_iter()
                    .map(|c| c.split(level).1)
                    .collect())
            };
            let dv_u = along(v, &uu)?;
            let du_v = along(u, &vv)?;
            Ok(dv_u.into_iter().zip(du_v).map(|(p, q)| p - q).collect())
        }
    }
}

/// Coordinates of an iterated bracket at `x`, with the inner derivatives
/// taken exactly by multi-dual evaluation.
pub fn bracket_word(spec: &ManifoldSpec, word: &Word, x: &[f64]) -> Result<DVector<f64>> {
    let point: Vec<Hyper> = x.iter().map(|v| Hyper::constant(*v)).collect();
    let v = eval_word(spec, word, &point, 0)?;
    Ok(DVector::from_iterator(v.len(), v.iter().map(|c| c.re())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HormanderRank {
    pub rank: usize,
    /// Smallest bracket length at which `rank` was reached.
    pub depth: usize,
}

/// Cap on new words per length; right-normed brackets grow like `m^n`.
const MAX_WORDS_PER_LEVEL: usize = 512;

/// Rank of the horizontal fields together with their right-normed brackets
/// `[X_a1, [X_a2, …]]` of length at most `max_depth`.
pub fn hormander_rank(spec: &ManifoldSpec, x: &[f64], max_depth: usize) -> Result<HormanderRank> {
    let d = spec.dimension();
    let m = spec.horizontal_rank;
    let mut vectors: Vec<DVector<f64>> = Vec::new();
    let mut level: Vec<Word> = (0..m).map(Word::Field).collect();
    let mut best = HormanderRank { rank: 0, depth: 1 };
    for depth in 1..=max_depth.max(1) {
        if depth > 1 {
            level = level
                .iter()
                .flat_map(|w| (0..m).map(move |a| Word::bracket(Word::Field(a), w.clone())))
                .take(MAX_WORDS_PER_LEVEL)
                .collect();
        }
        for w in &level {
            vectors.push(bracket_word(spec, w, x)?);
        }
        let mat = DMatrix::from_columns(&vectors);
        let rank = numerical_rank(&mat, tol::RANK);
        if rank > best.rank {
            best = HormanderRank { rank, depth };
        }
        if rank == d {
            break;
        }
    }
    Ok(best)
}
