use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::tuple::MatrixTuple;
use super::word::FreeWord;
use crate::error::{NcError, Result};
use crate::matcore::{identity, ComplexMatrix};

/// Default bound on the degree of any polynomial produced by multiplication.
pub const DEFAULT_MAX_DEGREE: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A free polynomial: finitely many words with complex coefficients.
///
/// Terms iterate in canonical (length-then-lex) order and exact zeros are
/// never stored. There is no epsilon pruning anywhere in the algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct FreePolynomial {
    d: usize,
    terms: BTreeMap<FreeWord, Complex64>,
}

impl FreePolynomial {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, c: Complex64) -> Self {
        Self::monomial(d, FreeWord::empty(), c).expect("empty word is valid for any d")
    }

    pub fn one(d: usize) -> Self {
        Self::constant(d, Complex64::new(1.0, 0.0))
    }

    /// The coordinate polynomial `x_i`.
    pub fn variable(d: usize, i: usize) -> Result<Self> {
        Self::monomial(d, FreeWord::letter(i), Complex64::new(1.0, 0.0))
    }

    pub fn monomial(d: usize, word: FreeWord, c: Complex64) -> Result<Self> {
        Self::from_terms(d, [(word, c)])
    }

    /// Collects like terms and drops exact zeros.
    pub fn from_terms<I>(d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FreeWord, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (w, c) in terms {
            if let Some(l) = w.max_letter() {
                if l >= d {
                    return Err(NcError::DimensionMismatch(format!(
                        "letter x{l} used in a polynomial over d={d} variables"
                    )));
                }
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(NcError::NonFinite);
            }
            *map.entry(w).or_insert(ZERO) += c;
        }
        map.retain(|_, c| *c != ZERO);
        Ok(Self { d, terms: map })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&FreeWord, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &FreeWord) -> Complex64 {
        self.terms.get(w).copied().unwrap_or(ZERO)
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&FreeWord::empty())
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().next_back().map_or(0, FreeWord::len)
    }

    /// `Some(k)` when every term has length exactly `k`.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut lens = self.terms.keys().map(FreeWord::len);
        let first = lens.next()?;
        lens.all(|l| l == first).then_some(first)
    }

    fn check_d(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(NcError::DimensionMismatch(format!(
                "polynomials over d={} and d={}",
                self.d, other.d
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_d(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            *out.terms.entry(w.clone()).or_insert(ZERO) += c;
        }
        out.terms.retain(|_, c| *c != ZERO);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if c != ZERO {
            for (w, v) in &self.terms {
                let t = v * c;
                if t != ZERO {
                    terms.insert(w.clone(), t);
                }
            }
        }
        Self { d: self.d, terms }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.mul_capped(other, DEFAULT_MAX_DEGREE)
    }

    /// Free product, refusing results whose degree would exceed `cap`.
    pub fn mul_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        self.check_d(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.d));
        }
        let degree = self.degree() + other.degree();
        if degree > cap {
            return Err(NcError::DegreeCap { degree, cap });
        }
        let mut acc: HashMap<FreeWord, Complex64> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                *acc.entry(wa.concat(wb)).or_insert(ZERO) += ca * cb;
            }
        }
        Ok(Self {
            d: self.d,
            terms: acc.into_iter().filter(|(_, c)| *c != ZERO).collect(),
        })
    }

    /// `Σ c_k p_k` with like terms collected once at the end.
    pub fn linear_combination<'a, I>(d: usize, parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, &'a FreePolynomial)>,
    {
        let mut acc: HashMap<FreeWord, Complex64> = HashMap::new();
        for (c, p) in parts {
            if p.d != d {
                return Err(NcError::DimensionMismatch(format!(
                    "linear combination over d={d} given a polynomial over d={}",
                    p.d
                )));
            }
            if c == ZERO {
                continue;
            }
            for (w, v) in &p.terms {
                *acc.entry(w.clone()).or_insert(ZERO) += c * v;
            }
        }
        Ok(Self {
            d,
            terms: acc.into_iter().filter(|(_, c)| *c != ZERO).collect(),
        })
    }

    /// Substitution `x ↦ ρx`: the coefficient of `w` picks up `ρ^|w|`.
    pub fn scale_argument(&self, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(NcError::InvalidParameter(format!(
                "argument scaling must be positive, got {rho}"
            )));
        }
        let terms = self
            .terms
            .iter()
            .map(|(w, c)| (w.clone(), c * rho.powi(w.len() as i32)))
            .filter(|(_, c)| *c != ZERO)
            .collect();
        Ok(Self { d: self.d, terms })
    }

    /// Evaluates at a matrix tuple.
    ///
    /// Terms are visited in plain lexicographic order, so consecutive words
    /// share prefixes; a stack of prefix products makes the total number of
    /// matrix products equal to the number of edges of the word trie.
    pub fn eval(&self, x: &MatrixTuple) -> Result<ComplexMatrix> {
        if x.d() != self.d {
            return Err(NcError::DimensionMismatch(format!(
                "polynomial over d={} evaluated at a point with d={}",
                self.d,
                x.d()
            )));
        }
        let n = x.n();
        let mut out = ComplexMatrix::zeros(n, n);
        let mut sorted: Vec<(&FreeWord, &Complex64)> = self.terms.iter().collect();
        sorted.sort_by(|a, b| a.0.lex_cmp(b.0));

        let mut stack = vec![identity(n)];
        let mut prefix = FreeWord::empty();
        for (w, c) in sorted {
            let common = prefix.common_prefix_len(w);
            stack.truncate(common + 1);
            for l in w.letters_from(common) {
                let next = stack.last().expect("stack holds the identity") * x.mat(l);
                stack.push(next);
            }
            out += stack.last().expect("stack holds the identity") * *c;
            prefix = w.clone();
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    word: FreeWord,
    coeff: Complex64,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    d: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for FreePolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| TermRepr {
                    word: w.clone(),
                    coeff: *c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FreePolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        FreePolynomial::from_terms(repr.d, repr.terms.into_iter().map(|t| (t.word, t.coeff)))
            .map_err(serde::de::Error::custom)
    }
}
