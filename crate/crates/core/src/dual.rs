//! Linear functionals on a truncation: convolution, truncated exponential
//! and logarithm, characters, inverses, dilations and homogeneous norms.

use std::fmt;
use std::sync::Arc;

use serde_json::{Map, Value};

use crate::basis::{HopfKey, Truncation};
use crate::error::{Error, Result};
use crate::scalar::{factorial, small_to_f64, Scalar};

/// Default relative tolerance for float identity checks.
pub const FLOAT_TOLERANCE: f64 = 1e-10;

/// Dense functional on a truncation; index 0 holds the value on `𝟏`.
#[derive(Clone)]
pub struct DualElement<S: Scalar, K: HopfKey> {
    basis: Arc<Truncation<K>>,
    coeffs: Vec<S>,
}

impl<S: Scalar, K: HopfKey> PartialEq for DualElement<S, K> {
    fn eq(&self, other: &Self) -> bool {
        self.basis.same_as(&other.basis) && self.coeffs == other.coeffs
    }
}

impl<S: Scalar, K: HopfKey> fmt::Debug for DualElement<S, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{:?}: {}", self.basis.key(i), c.to_text())?;
        }
        write!(f, "}}")
    }
}

impl<S: Scalar, K: HopfKey> DualElement<S, K> {
    pub fn zero(basis: &Arc<Truncation<K>>) -> Self {
        DualElement {
            basis: Arc::clone(basis),
            coeffs: vec![S::zero(); basis.len()],
        }
    }

    /// The counit `ε`, the identity of convolution.
    pub fn counit(basis: &Arc<Truncation<K>>) -> Self {
        let mut out = Self::zero(basis);
        out.coeffs[0] = S::one();
        out
    }

    pub fn from_coeffs(basis: &Arc<Truncation<K>>, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::BasisMismatch(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(DualElement {
            basis: Arc::clone(basis),
            coeffs,
        })
    }

    pub fn from_terms<I: IntoIterator<Item = (K, S)>>(basis: &Arc<Truncation<K>>, terms: I) -> Result<Self> {
        let mut out = Self::zero(basis);
        for (k, c) in terms {
            let i = basis.require_index(&k)?;
            out.coeffs[i] = out.coeffs[i].clone() + c;
        }
        Ok(out)
    }

    pub fn basis(&self) -> &Arc<Truncation<K>> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [S] {
        &mut self.coeffs
    }

    pub fn at(&self, i: usize) -> &S {
        &self.coeffs[i]
    }

    pub fn set(&mut self, i: usize, value: S) {
        self.coeffs[i] = value;
    }

    /// `⟨f, k⟩`; zero for keys outside the truncation.
    pub fn get(&self, k: &K) -> S {
        self.basis
            .index_of(k)
            .map(|i| self.coeffs[i].clone())
            .unwrap_or_else(S::zero)
    }

    pub fn unit_coeff(&self) -> &S {
        &self.coeffs[0]
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if self.basis.same_as(&other.basis) {
            Ok(())
        } else {
            Err(Error::BasisMismatch("operands live on different truncations".into()))
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() + b.clone()))
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() - b.clone()))
    }

    fn zip_with<F: Fn(&S, &S) -> S>(&self, other: &Self, f: F) -> Self {
        DualElement {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scaled(&self, factor: &S) -> Self {
        DualElement {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect(),
        }
    }

    /// `⟨f ⋆ g, x_i⟩ = Σ c·⟨f, x1⟩⟨g, x2⟩`.
    pub fn convolve_at(&self, other: &Self, i: usize) -> S {
        let mut acc = S::zero();
        for &(a, b, c) in self.basis.coproduct(i) {
            let fa = &self.coeffs[a];
            let gb = &other.coeffs[b];
            if fa.is_zero() || gb.is_zero() {
                continue;
            }
            let term = fa.clone() * gb.clone();
            acc = acc + if c == 1 { term } else { S::from_i64(c) * term };
        }
        acc
    }

    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        Ok(self.convolve_unchecked(other))
    }

    pub(crate) fn convolve_unchecked(&self, other: &Self) -> Self {
        self.convolve_upto(other, self.basis.max_grade())
    }

    /// Convolution computed on grades `≤ g` only; higher coefficients are zero.
    pub fn convolve_upto(&self, other: &Self, g: usize) -> Self {
        let end = self.basis.grade_range(g).end.max(1);
        let mut coeffs = vec![S::zero(); self.basis.len()];
        for (i, slot) in coeffs.iter_mut().enumerate().take(end) {
            *slot = self.convolve_at(other, i);
        }
        DualElement {
            basis: Arc::clone(&self.basis),
            coeffs,
        }
    }

    /// Copy with every coefficient of grade `> g` set to zero.
    pub fn truncated(&self, g: usize) -> Self {
        let end = self.basis.grade_range(g).end.max(1);
        let mut out = self.clone();
        for c in out.coeffs.iter_mut().skip(end) {
            *c = S::zero();
        }
        out
    }

    /// `exp_N(α) = Σ_{n ≤ N} α^{⋆n}/n!`, `N` the top grade.
    pub fn exp(&self) -> Result<Self> {
        self.exp_upto(self.basis.max_grade())
    }

    /// Truncated exponential on grades `≤ g`.
    pub fn exp_upto(&self, g: usize) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Precondition("exp requires ⟨α, 1⟩ = 0".into()));
        }
        let base = self.truncated(g);
        let mut acc = Self::counit(&self.basis);
        let mut power = base.clone();
        for n in 1..=g {
            if n > 1 {
                power = power.convolve_upto(&base, g);
            }
            let w = S::ratio(1, factorial(n));
            for (a, p) in acc.coeffs.iter_mut().zip(&power.coeffs) {
                *a = a.clone() + p.clone() * w.clone();
            }
        }
        Ok(acc)
    }

    /// `log_N(X) = Σ_{n ≤ N} (−1)^{n+1} (X − ε)^{⋆n}/n`.
    pub fn log(&self) -> Result<Self> {
        self.log_upto(self.basis.max_grade())
    }

    /// Truncated logarithm on grades `≤ g`.
    pub fn log_upto(&self, g: usize) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::Precondition("log requires ⟨X, 1⟩ = 1".into()));
        }
        let mut y = self.truncated(g);
        y.coeffs[0] = S::zero();
        let mut acc = Self::zero(&self.basis);
        let mut power = y.clone();
        for n in 1..=g {
            if n > 1 {
                power = power.convolve_upto(&y, g);
            }
            let sign = if n % 2 == 1 { 1 } else { -1 };
            let w = S::ratio(sign, n as i64);
            for (a, p) in acc.coeffs.iter_mut().zip(&power.coeffs) {
                *a = a.clone() + p.clone() * w.clone();
            }
        }
        Ok(acc)
    }

    /// `f ∘ S`; the convolution inverse of a character.
    pub fn compose_antipode(&self) -> Self {
        let coeffs = (0..self.basis.len())
            .map(|i| {
                self.basis
                    .antipode(i)
                    .iter()
                    .fold(S::zero(), |acc, &(j, c)| acc + S::from_i64(c) * self.coeffs[j].clone())
            })
            .collect();
        DualElement {
            basis: Arc::clone(&self.basis),
            coeffs,
        }
    }

    pub fn inverse(&self) -> Self {
        self.compose_antipode()
    }

    fn tolerance() -> f64 {
        if S::EXACT {
            0.0
        } else {
            FLOAT_TOLERANCE
        }
    }

    pub fn is_character(&self) -> bool {
        self.is_character_tol(Self::tolerance())
    }

    /// `⟨X, 𝟏⟩ = 1` and `⟨X, xy⟩ = ⟨X, x⟩⟨X, y⟩` on every product of basis
    /// elements that stays inside the truncation.
    pub fn is_character_tol(&self, tol: f64) -> bool {
        if !self.coeffs[0].close(&S::one(), tol) {
            return false;
        }
        self.basis.products().iter().all(|(i, j, terms)| {
            let lhs = self.pair_with(terms);
            let rhs = self.coeffs[*i].clone() * self.coeffs[*j].clone();
            lhs.close(&rhs, tol)
        })
    }

    pub fn is_infinitesimal(&self) -> bool {
        self.is_infinitesimal_tol(Self::tolerance())
    }

    /// `⟨α, 𝟏⟩ = 0` and `α` vanishes on products of non-unit elements.
    pub fn is_infinitesimal_tol(&self, tol: f64) -> bool {
        if !self.coeffs[0].close(&S::zero(), tol) {
            return false;
        }
        self.basis
            .products()
            .iter()
            .all(|(_, _, terms)| self.pair_with(terms).close(&S::zero(), tol))
    }

    fn pair_with(&self, terms: &[(usize, i64)]) -> S {
        terms
            .iter()
            .fold(S::zero(), |acc, &(k, c)| acc + S::from_i64(c) * self.coeffs[k].clone())
    }

    /// Homogeneous component `X_k` (zero outside grade `k`).
    pub fn component(&self, k: usize) -> Self {
        let mut out = Self::zero(&self.basis);
        for i in self.basis.grade_range(k) {
            out.coeffs[i] = self.coeffs[i].clone();
        }
        out
    }

    /// `⦀f_k⦀ = D · max_{|v| = k} |⟨f, v⟩|`.
    pub fn graded_norm(&self, k: usize) -> f64 {
        let sup = self
            .basis
            .grade_range(k)
            .map(|i| self.coeffs[i].abs_f64())
            .fold(0.0, f64::max);
        self.basis.norm_constant() * sup
    }

    /// `|X| = max_k (k!⦀X_k⦀)^{1/k} + max_k (k!⦀X⁻¹_k⦀)^{1/k}`.
    pub fn homogeneous_norm(&self) -> f64 {
        let inv = self.inverse();
        let part = |x: &Self| {
            (1..=self.basis.max_grade())
                .map(|k| (factorial(k) as f64 * x.graded_norm(k)).powf(1.0 / k as f64))
                .fold(0.0, f64::max)
        };
        part(self) + part(&inv)
    }

    /// `max_{v ∈ 𝔏} (ℓ(v)! |⟨X, v⟩|)^{1/ω(v)}`, with `ω` the homogeneity.
    pub fn anisotropic_norm(&self) -> f64 {
        (1..self.basis.len())
            .map(|i| {
                let l = self.basis.grade(i);
                let om = small_to_f64(self.basis.homogeneity(i));
                (factorial(l) as f64 * self.coeffs[i].abs_f64()).powf(1.0 / om)
            })
            .fold(0.0, f64::max)
    }

    /// `Ω_r`: scales each coefficient by `r` to its homogeneity.
    pub fn dilate(&self, r: &S) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                r.pow_rational(self.basis.homogeneity(i))
                    .map(|p| c.clone() * p)
                    .ok_or_else(|| Error::Precondition("fractional dilation exponent needs float scalars".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DualElement {
            basis: Arc::clone(&self.basis),
            coeffs,
        })
    }

    pub fn to_f64(&self) -> DualElement<f64, K> {
        DualElement {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().map(|c| c.to_f64()).collect(),
        }
    }

    /// Largest `|⟨f − g, v⟩|` over the basis.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.clone() - b.clone()).abs_f64())
            .fold(0.0, f64::max)
    }

    /// Sparse JSON object in basis order; values as scalar strings.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                map.insert(self.basis.key(i).to_string(), Value::String(c.to_text()));
            }
        }
        Value::Object(map)
    }

    pub fn from_json(basis: &Arc<Truncation<K>>, value: &Value) -> Result<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::Invalid("functional must be a JSON object".into()))?;
        let mut out = Self::zero(basis);
        for (k, v) in map {
            let key = K::parse_key(k)?;
            let i = basis.require_index(&key)?;
            let c = match v {
                Value::String(s) => S::parse_text(s)?,
                Value::Number(n) => S::parse_text(&n.to_string())?,
                _ => return Err(Error::Invalid(format!("bad coefficient for {k}"))),
            };
            out.coeffs[i] = c;
        }
        Ok(out)
    }
}
