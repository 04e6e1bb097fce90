//! The semigroup of reduced words over `V ∪ E`.
//!
//! The relations `r(e) e = e = e s(e)` (and `v v = v`, which is the vertex
//! case of both) become two deletion rules on adjacent letters `x y`:
//!
//! * `x y → y` when `x = r(y)`
//! * `x y → x` when `y = s(x)`
//!
//! Both rules delete a vertex letter, so each rewrite shortens the word and
//! the number of edge letters never changes. A word is reduced when no
//! adjacent pair admits either rule.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::graph::{DirectedMultigraph, Letter};

/// Longest words produced by [`enumerate_reduced`].
pub const MAX_ENUMERATION_LENGTH: usize = 12;
/// Largest number of words [`enumerate_reduced`] will materialize.
pub const MAX_ENUMERATION_COUNT: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("words must contain at least one letter")]
    Empty,
    #[error("letter {0:?} does not belong to the graph")]
    UnknownLetter(Letter),
    #[error("unknown letter `{0}`")]
    UnknownName(String),
    #[error("maximum length must lie in 1..={MAX_ENUMERATION_LENGTH}, got {0}")]
    LengthOutOfRange(usize),
    #[error("enumeration would exceed {MAX_ENUMERATION_COUNT} words")]
    Capacity,
}

/// A word in normal form. Ordered by length, then lexicographically by
/// letter index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedWord(Vec<Letter>);

impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl ReducedWord {
    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn edge_letters(&self) -> usize {
        self.0.iter().filter(|l| l.is_edge()).count()
    }

    /// Wraps letters without reducing them. Callers guarantee the result
    /// satisfies [`is_reduced`].
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Self {
        ReducedWord(letters)
    }

    pub fn display<'a>(&'a self, g: &'a DirectedMultigraph) -> WordDisplay<'a> {
        WordDisplay { word: self, graph: g }
    }
}

pub struct WordDisplay<'a> {
    word: &'a ReducedWord,
    graph: &'a DirectedMultigraph,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.word.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(self.graph.letter_name(*l))?;
        }
        Ok(())
    }
}

/// Whether the adjacent pair `x y` admits no rewrite.
pub fn pair_is_reduced(g: &DirectedMultigraph, x: Letter, y: Letter) -> bool {
    x != g.range(y) && y != g.source(x)
}

pub fn is_reduced(g: &DirectedMultigraph, letters: &[Letter]) -> bool {
    letters.windows(2).all(|p| pair_is_reduced(g, p[0], p[1]))
}

// Appends `y` to a reduced stack, keeping it reduced.
fn push_letter(g: &DirectedMultigraph, stack: &mut Vec<Letter>, y: Letter) {
    let r = g.range(y);
    while let Some(&top) = stack.last() {
        if top == r {
            stack.pop();
        } else if y == g.source(top) {
            return;
        } else {
            break;
        }
    }
    stack.push(y);
}

/// Normal form of a nonempty word.
pub fn reduce(g: &DirectedMultigraph, letters: &[Letter]) -> Result<ReducedWord, WordError> {
    if letters.is_empty() {
        return Err(WordError::Empty);
    }
    let mut stack = Vec::with_capacity(letters.len());
    for &l in letters {
        if !g.contains(l) {
            return Err(WordError::UnknownLetter(l));
        }
        push_letter(g, &mut stack, l);
    }
    Ok(ReducedWord(stack))
}

/// Resolves a `.`-separated word of letter names and reduces it.
pub fn parse_word(g: &DirectedMultigraph, text: &str) -> Result<ReducedWord, WordError> {
    let letters = text
        .split('.')
        .map(|name| {
            let name = name.trim();
            g.letter(name)
                .ok_or_else(|| WordError::UnknownName(name.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    reduce(g, &letters)
}

/// Concatenation followed by reduction. Both words must be over `g`.
pub fn multiply(g: &DirectedMultigraph, a: &ReducedWord, b: &ReducedWord) -> ReducedWord {
    let mut stack = Vec::with_capacity(a.len() + b.len());
    stack.extend_from_slice(&a.0);
    for &l in &b.0 {
        push_letter(g, &mut stack, l);
    }
    ReducedWord(stack)
}

/// Every word reachable from `letters` by a single rewrite, one entry per
/// applicable (position, rule).
pub fn one_step_rewrites(g: &DirectedMultigraph, letters: &[Letter]) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    for i in 0..letters.len().saturating_sub(1) {
        let (x, y) = (letters[i], letters[i + 1]);
        if x == g.range(y) {
            let mut w = letters.to_vec();
            w.remove(i);
            out.push(w);
        }
        if y == g.source(x) {
            let mut w = letters.to_vec();
            w.remove(i + 1);
            out.push(w);
        }
    }
    out
}

/// All reduced words of length at most `max_len`, ordered by length and then
/// lexicographically.
pub fn enumerate_reduced(g: &DirectedMultigraph, max_len: usize) -> Result<Vec<ReducedWord>, WordError> {
    if !(1..=MAX_ENUMERATION_LENGTH).contains(&max_len) {
        return Err(WordError::LengthOutOfRange(max_len));
    }
    let letters: Vec<Letter> = g.letters().collect();
    let mut layer: Vec<Vec<Letter>> = letters.iter().map(|&l| vec![l]).collect();
    let mut out: Vec<ReducedWord> = Vec::new();
    for len in 1..=max_len {
        if out.len() + layer.len() > MAX_ENUMERATION_COUNT {
            return Err(WordError::Capacity);
        }
        out.extend(layer.iter().cloned().map(ReducedWord));
        if len == max_len {
            break;
        }
        // reducedness is a condition on adjacent pairs only
        let mut next = Vec::new();
        for w in &layer {
            let last = *w.last().unwrap();
            for &y in &letters {
                if pair_is_reduced(g, last, y) {
                    if out.len() + next.len() >= MAX_ENUMERATION_COUNT {
                        return Err(WordError::Capacity);
                    }
                    let mut ext = w.clone();
                    ext.push(y);
                    next.push(ext);
                }
            }
        }
        layer = next;
    }
    Ok(out)
}

/// The identity of the semigroup, which exists exactly when there is one
/// vertex.
pub fn semigroup_identity(g: &DirectedMultigraph) -> Option<ReducedWord> {
    (g.vertex_count() == 1).then(|| ReducedWord(vec![Letter::Vertex(0)]))
}
