//! Exact arithmetic in the complex semigroup algebra of reduced words.
//!
//! Coefficients are Gaussian rationals. Floating values only appear through
//! [`AlgebraElement::scale_edges_approx`] and the `ℓ¹` bound, which is
//! rounded upward.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::graph::{Carrier, Letter};
use crate::words::{self, ReducedWord, WordError};

/// Exact complex coefficient `a + b i` with `a, b ∈ ℚ`.
pub type Scalar = Complex<BigRational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("operands live over different graphs")]
    GraphMismatch,
    #[error("the adjoint is only defined over a doubled graph")]
    NotDoubled,
    #[error("edge scaling factor must lie in [0, 1], got {0}")]
    ScaleOutOfRange(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn scalar(re: BigRational, im: BigRational) -> Scalar {
    Complex::new(re, im)
}

pub fn real(n: i64) -> Scalar {
    Complex::new(BigRational::from_integer(n.into()), BigRational::zero())
}

pub fn to_complex64(s: &Scalar) -> Complex64 {
    Complex64::new(
        s.re.to_f64().unwrap_or(f64::NAN),
        s.im.to_f64().unwrap_or(f64::NAN),
    )
}

/// Smallest `f64` that is at least `q`.
pub fn f64_at_least(q: &BigRational) -> f64 {
    let mut f = q.to_f64().unwrap_or(f64::INFINITY);
    while BigRational::from_float(f).is_some_and(|r| &r < q) {
        f = f.next_up();
    }
    f
}

/// Smallest `f64` whose square is at least `q ≥ 0`.
fn sqrt_at_least(q: &BigRational) -> f64 {
    let mut f = q.to_f64().unwrap_or(f64::INFINITY).sqrt();
    while BigRational::from_float(f).is_some_and(|r| &(&r * &r) < q) {
        f = f.next_up();
    }
    f
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    carrier: Carrier,
    terms: BTreeMap<ReducedWord, Scalar>,
}

impl AlgebraElement {
    pub fn zero(carrier: &Carrier) -> Self {
        AlgebraElement {
            carrier: carrier.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// `coefficient · reduce(letters)`.
    pub fn term(carrier: &Carrier, coefficient: Scalar, letters: &[Letter]) -> Result<Self, AlgebraError> {
        let w = words::reduce(carrier.graph(), letters)?;
        let mut x = Self::zero(carrier);
        x.accumulate(w, coefficient);
        Ok(x)
    }

    pub fn word(carrier: &Carrier, letters: &[Letter]) -> Result<Self, AlgebraError> {
        Self::term(carrier, real(1), letters)
    }

    /// Parses a `.`-separated word of letter names with coefficient one.
    pub fn named(carrier: &Carrier, word: &str) -> Result<Self, AlgebraError> {
        let w = words::parse_word(carrier.graph(), word)?;
        let mut x = Self::zero(carrier);
        x.accumulate(w, real(1));
        Ok(x)
    }

    pub fn from_terms(
        carrier: &Carrier,
        terms: impl IntoIterator<Item = (ReducedWord, Scalar)>,
    ) -> Result<Self, AlgebraError> {
        let mut x = Self::zero(carrier);
        for (w, c) in terms {
            if let Some(&bad) = w.letters().iter().find(|l| !carrier.graph().contains(**l)) {
                return Err(WordError::UnknownLetter(bad).into());
            }
            if !words::is_reduced(carrier.graph(), w.letters()) {
                let w = words::reduce(carrier.graph(), w.letters())?;
                x.accumulate(w, c);
            } else {
                x.accumulate(w, c);
            }
        }
        Ok(x)
    }

    fn accumulate(&mut self, w: ReducedWord, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(w.clone()).or_insert_with(Scalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order (length, then lexicographic).
    pub fn terms(&self) -> impl Iterator<Item = (&ReducedWord, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &ReducedWord) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    fn check_same(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.carrier == other.carrier {
            Ok(())
        } else {
            Err(AlgebraError::GraphMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.accumulate(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&real(-1))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(&self.carrier);
        for (w, d) in &self.terms {
            out.accumulate(w.clone(), d * c);
        }
        out
    }

    /// Bilinear extension of word multiplication.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        let g = self.carrier.graph();
        let mut out = Self::zero(&self.carrier);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                out.accumulate(words::multiply(g, a, b), c * d);
            }
        }
        Ok(out)
    }

    /// Formal adjoint over a doubled graph: words are reversed, edges swapped
    /// with their partners and coefficients conjugated.
    pub fn adjoint(&self) -> Result<Self, AlgebraError> {
        let d = self.carrier.doubled().ok_or(AlgebraError::NotDoubled)?;
        let mut out = Self::zero(&self.carrier);
        for (w, c) in &self.terms {
            let rev: Vec<Letter> = w.letters().iter().rev().map(|&l| d.star(l)).collect();
            // the involution swaps r and s, so a reversed reduced word is reduced
            debug_assert!(words::is_reduced(d.base(), &rev));
            out.accumulate(ReducedWord::from_reduced(rev), c.conj());
        }
        Ok(out)
    }

    /// Multiplies each coefficient by `s^k`, `k` the number of edge letters in
    /// its word.
    ///
    /// Reduction only deletes vertex letters, so `k` is additive under word
    /// multiplication and this map is an algebra endomorphism for each `s`.
    pub fn scale_edges(&self, s: &BigRational) -> Result<Self, AlgebraError> {
        if s.is_negative() || s > &BigRational::one() {
            return Err(AlgebraError::ScaleOutOfRange(s.to_string()));
        }
        let mut out = Self::zero(&self.carrier);
        for (w, c) in &self.terms {
            let k = w.edge_letters() as i32;
            let factor = num_traits::pow::Pow::pow(s, k);
            out.accumulate(w.clone(), Complex::new(&c.re * &factor, &c.im * &factor));
        }
        Ok(out)
    }

    /// Floating version of [`scale_edges`](Self::scale_edges) for arbitrary
    /// real `s ∈ [0, 1]`.
    pub fn scale_edges_approx(&self, s: f64) -> Result<ApproxElement, AlgebraError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(AlgebraError::ScaleOutOfRange(s.to_string()));
        }
        let mut terms = BTreeMap::new();
        for (w, c) in &self.terms {
            let v = to_complex64(c) * s.powi(w.edge_letters() as i32);
            if v != Complex64::zero() {
                terms.insert(w.clone(), v);
            }
        }
        Ok(ApproxElement {
            carrier: self.carrier.clone(),
            terms,
        })
    }

    /// `Σ |c_w|`, rounded up to the next representable `f64`.
    pub fn ell1(&self) -> f64 {
        let mut total = BigRational::zero();
        for c in self.terms.values() {
            let m = if c.im.is_zero() {
                c.re.abs()
            } else if c.re.is_zero() {
                c.im.abs()
            } else {
                BigRational::from_float(sqrt_at_least(&c.norm_sqr())).expect("finite modulus")
            };
            total += m;
        }
        f64_at_least(&total)
    }

    /// Distinct letters occurring in the element's words.
    pub fn letters(&self) -> Vec<Letter> {
        let mut ls: Vec<Letter> = self
            .terms
            .keys()
            .flat_map(|w| w.letters().iter().copied())
            .collect();
        ls.sort();
        ls.dedup();
        ls
    }
}

/// Element with floating coefficients, produced by edge scaling at a real
/// parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxElement {
    carrier: Carrier,
    terms: BTreeMap<ReducedWord, Complex64>,
}

impl ApproxElement {
    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ReducedWord, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `(sign, magnitude text)` with the magnitude's leading component positive.
fn fmt_coefficient(c: &Scalar) -> (bool, String) {
    let negative = c.re.is_negative() || (c.re.is_zero() && c.im.is_negative());
    let c = if negative { -c.clone() } else { c.clone() };
    let text = if c.im.is_zero() {
        fmt_rational(&c.re)
    } else if c.re.is_zero() {
        format!("{}i", fmt_rational(&c.im))
    } else {
        let sign = if c.im.is_negative() { '-' } else { '+' };
        format!("({}{}{}i)", fmt_rational(&c.re), sign, fmt_rational(&c.im.abs()))
    };
    (negative, text)
}

/// Canonical text form, accepted by [`crate::io::parse_expr`].
impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let g = self.carrier.graph();
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let (negative, mag) = fmt_coefficient(c);
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if mag != "1" {
                write!(f, "{mag} * ")?;
            }
            write!(f, "{}", w.display(g))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::DirectedMultigraph;
    use proptest::prelude::*;

    fn plain() -> Carrier {
        Carrier::plain(catalog::single_edge())
    }

    #[test]
    fn addition_cancels_and_collects() {
        let c = plain();
        let v0 = AlgebraElement::named(&c, "v0").unwrap();
        let t = AlgebraElement::named(&c, "t").unwrap();
        assert_eq!(v0.add(&AlgebraElement::zero(&c)).unwrap(), v0);
        assert!(v0.sub(&v0).unwrap().is_zero());
        assert_eq!(v0.add(&t).unwrap().len(), 2);
    }

    #[test]
    fn multiplication_examples() {
        let c = plain();
        let n = |w| AlgebraElement::named(&c, w).unwrap();
        assert_eq!(n("v0").mul(&n("v0")).unwrap(), n("v0"));
        assert_eq!(n("t").mul(&n("v0")).unwrap(), n("t"));
        let lhs = n("v0").add(&n("v1")).unwrap().mul(&n("t")).unwrap();
        assert_eq!(lhs, n("v0.t").add(&n("t")).unwrap());
        assert_eq!(lhs.len(), 2);
    }

    #[test]
    fn mixed_graphs_are_rejected() {
        let a = AlgebraElement::named(&plain(), "v0").unwrap();
        let b = AlgebraElement::named(&Carrier::plain(catalog::loops_and_bridge()), "v1").unwrap();
        assert_eq!(a.add(&b), Err(AlgebraError::GraphMismatch));
        assert_eq!(a.mul(&b), Err(AlgebraError::GraphMismatch));
    }

    #[test]
    fn adjoint_examples() {
        let c = Carrier::doubled_of(catalog::single_edge());
        let n = |w| AlgebraElement::named(&c, w).unwrap();
        let z = scalar(rational(1, 2), rational(-3, 1));
        let t = n("t").scale(&z);
        assert_eq!(t.adjoint().unwrap(), n("t~").scale(&z.conj()));
        let a = n("v0.t").adjoint().unwrap();
        assert_eq!(a, n("t~.v0"));
        let (w, _) = a.terms().next().unwrap();
        assert!(words::is_reduced(c.graph(), w.letters()));
        assert_eq!(
            AlgebraElement::named(&plain(), "t").unwrap().adjoint(),
            Err(AlgebraError::NotDoubled)
        );
    }

    #[test]
    fn edge_scaling_examples() {
        let c = plain();
        let n = |w| AlgebraElement::named(&c, w).unwrap();
        let x = n("v0").add(&n("t")).unwrap();
        assert_eq!(x.scale_edges(&rational(1, 1)).unwrap(), x);
        assert_eq!(x.scale_edges(&rational(0, 1)).unwrap(), n("v0"));
        assert_eq!(
            n("t.t").scale_edges(&rational(1, 2)).unwrap(),
            n("t.t").scale(&real(1).scale(rational(1, 4)))
        );
        assert!(x.scale_edges(&rational(3, 2)).is_err());
        assert!(x.scale_edges_approx(-0.1).is_err());
        let approx = n("t.t").scale_edges_approx(0.5).unwrap();
        assert_eq!(approx.terms().next().unwrap().1, &Complex64::new(0.25, 0.0));
    }

    #[test]
    fn ell1_examples() {
        let c = plain();
        assert_eq!(AlgebraElement::zero(&c).ell1(), 0.0);
        assert_eq!(AlgebraElement::named(&c, "t").unwrap().ell1(), 1.0);
        let unit = scalar(rational(3, 5), rational(4, 5));
        assert_eq!(AlgebraElement::named(&c, "t").unwrap().scale(&unit).ell1(), 1.0);
        // |1 + i| = √2 is irrational; the bound must dominate it
        let x = AlgebraElement::named(&c, "t").unwrap().scale(&scalar(rational(1, 1), rational(1, 1)));
        let b = x.ell1();
        assert!(b >= std::f64::consts::SQRT_2 && b - std::f64::consts::SQRT_2 < 1e-15);
    }

    #[test]
    fn display_round_trips_through_the_parser() {
        let c = Carrier::doubled_of(catalog::loops_and_bridge());
        let x = crate::io::parse_expr("1/2 * t1.t3 - (0-1) i * v3 + (2-3/4i) * t3~ - 5i*v1", &c).unwrap();
        let text = x.to_string();
        assert_eq!(crate::io::parse_expr(&text, &c).unwrap(), x);
    }

    pub(crate) fn arb_element(carrier: Carrier, max_terms: usize, max_len: usize) -> impl Strategy<Value = AlgebraElement> {
        let n = carrier.graph().letter_count();
        prop::collection::vec(
            ((-4i64..=4, 1i64..=3, -4i64..=4), prop::collection::vec(0..n, 1..=max_len)),
            0..=max_terms,
        )
        .prop_map(move |terms| {
            let mut x = AlgebraElement::zero(&carrier);
            let all: Vec<Letter> = carrier.graph().letters().collect();
            for ((a, d, b), idx) in terms {
                let letters: Vec<Letter> = idx.iter().map(|&i| all[i]).collect();
                let t = AlgebraElement::term(&carrier, scalar(rational(a, d), rational(b, d)), &letters).unwrap();
                x = x.add(&t).unwrap();
            }
            x
        })
    }

    fn small_graph() -> DirectedMultigraph {
        DirectedMultigraph::new(
            ["a", "b"],
            [("e", "a", "b"), ("f", "b", "b"), ("g", "b", "a")],
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(
            x in arb_element(Carrier::plain(small_graph()), 3, 3),
            y in arb_element(Carrier::plain(small_graph()), 3, 3),
            z in arb_element(Carrier::plain(small_graph()), 3, 3),
        ) {
            // each strategy builds its own Arc; rebase y and z onto x's carrier
            let y = AlgebraElement::from_terms(x.carrier(), y.terms().map(|(w, c)| (w.clone(), c.clone()))).unwrap();
            let z = AlgebraElement::from_terms(x.carrier(), z.terms().map(|(w, c)| (w.clone(), c.clone()))).unwrap();
            prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
            prop_assert_eq!(
                x.mul(&y.add(&z).unwrap()).unwrap(),
                x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap()
            );
            prop_assert_eq!(
                x.add(&y).unwrap().mul(&z).unwrap(),
                x.mul(&z).unwrap().add(&y.mul(&z).unwrap()).unwrap()
            );
        }

        #[test]
        fn adjoint_is_an_involutive_anti_homomorphism(
            x in arb_element(Carrier::doubled_of(small_graph()), 3, 3),
            y in arb_element(Carrier::doubled_of(small_graph()), 3, 3),
        ) {
            let y = AlgebraElement::from_terms(x.carrier(), y.terms().map(|(w, c)| (w.clone(), c.clone()))).unwrap();
            prop_assert_eq!(x.adjoint().unwrap().adjoint().unwrap(), x.clone());
            prop_assert_eq!(
                x.mul(&y).unwrap().adjoint().unwrap(),
                y.adjoint().unwrap().mul(&x.adjoint().unwrap()).unwrap()
            );
        }

        #[test]
        fn edge_scaling_is_multiplicative(
            x in arb_element(Carrier::plain(small_graph()), 3, 4),
            y in arb_element(Carrier::plain(small_graph()), 3, 4),
            num in 0i64..=5,
        ) {
            let y = AlgebraElement::from_terms(x.carrier(), y.terms().map(|(w, c)| (w.clone(), c.clone()))).unwrap();
            let s = rational(num, 5);
            prop_assert_eq!(
                x.mul(&y).unwrap().scale_edges(&s).unwrap(),
                x.scale_edges(&s).unwrap().mul(&y.scale_edges(&s).unwrap()).unwrap()
            );
        }

        #[test]
        fn ell1_is_subadditive_and_submultiplicative(
            x in arb_element(Carrier::plain(small_graph()), 3, 3),
            y in arb_element(Carrier::plain(small_graph()), 3, 3),
        ) {
            let y = AlgebraElement::from_terms(x.carrier(), y.terms().map(|(w, c)| (w.clone(), c.clone()))).unwrap();
            let slack = 1e-12;
            prop_assert!(x.add(&y).unwrap().ell1() <= x.ell1() + y.ell1() + slack);
            prop_assert!(x.mul(&y).unwrap().ell1() <= x.ell1() * y.ell1() + slack);
        }
    }
}
