//! Sparse exact linear combinations over an ordered basis.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::scalar::{format_rational, Rational};

/// Finite rational linear combination of basis keys. Zero coefficients are
/// never stored, so structural equality is equality of vectors.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LinComb<T: Ord> {
    terms: BTreeMap<T, Rational>,
}

impl<T: Ord + Clone> LinComb<T> {
    pub fn zero() -> Self {
        LinComb { terms: BTreeMap::new() }
    }

    pub fn single(key: T) -> Self {
        let mut out = Self::zero();
        out.add_term(key, Rational::one());
        out
    }

    pub fn from_terms<I: IntoIterator<Item = (T, Rational)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    pub fn add_term(&mut self, key: T, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(key);
        match slot {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c.clone());
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), -c.clone());
        }
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        LinComb {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * factor)).collect(),
        }
    }

    pub fn coeff(&self, key: &T) -> Rational {
        self.terms.get(key).cloned().unwrap_or_else(Rational::zero)
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

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Rational)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &T> {
        self.terms.keys()
    }

    /// Applies a linear map given on basis keys.
    pub fn map_linear<U: Ord + Clone, F: FnMut(&T) -> LinComb<U>>(&self, mut f: F) -> LinComb<U> {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            out.add_assign(&f(k).scaled(c));
        }
        out
    }

    /// Bilinear extension of a product given on pairs of keys.
    pub fn bilinear<U: Ord + Clone, V: Ord + Clone, F: FnMut(&T, &U) -> LinComb<V>>(
        &self,
        other: &LinComb<U>,
        mut f: F,
    ) -> LinComb<V> {
        let mut out = LinComb::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in other.iter() {
                out.add_assign(&f(a, b).scaled(&(ca * cb)));
            }
        }
        out
    }
}

impl<T: Ord + Clone> FromIterator<(T, Rational)> for LinComb<T> {
    fn from_iter<I: IntoIterator<Item = (T, Rational)>>(iter: I) -> Self {
        Self::from_terms(iter)
    }
}

impl<T: Ord + fmt::Display> fmt::Display for LinComb<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "{k}")?;
            } else {
                write!(f, "({}) {k}", format_rational(c))?;
            }
        }
        Ok(())
    }
}

impl<T: Ord + fmt::Display> fmt::Debug for LinComb<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Tensor of arity `k`, written with `⊗` between factors.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TensorKey<T>(pub Vec<T>);

impl<T: fmt::Display> fmt::Display for TensorKey<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ⊗ ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut a = LinComb::single("x");
        a.add_term("y", q(2));
        let mut b = LinComb::single("x");
        b.add_term("y", q(2));
        a.sub_assign(&b);
        assert!(a.is_zero());
        assert_eq!(a.to_string(), "0");
    }

    #[test]
    fn bilinear_product() {
        let a = LinComb::from_terms([(1, q(1)), (2, q(3))]);
        let b = LinComb::from_terms([(10, q(2))]);
        let p = a.bilinear(&b, |x, y| LinComb::single(x + y));
        assert_eq!(p.coeff(&11), q(2));
        assert_eq!(p.coeff(&12), q(6));
    }
}
