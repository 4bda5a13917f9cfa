use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::jet::{GaussianRational, MultiIndex, Validity, Var, VarSig};

/// A truncated multivariate power series at the origin.
///
/// Terms are stored sparsely, with no zero coefficients and no term above
/// `min(order, valid)`. Coefficients beyond the valid order are never kept,
/// so every stored coefficient is correct.
#[derive(Clone, Debug)]
pub struct Jet {
    sig: VarSig,
    order: u32,
    valid: Validity,
    terms: BTreeMap<MultiIndex, GaussianRational>,
}

impl Jet {
    pub fn zero(sig: VarSig, order: u32) -> Self {
        Self { sig, order, valid: Validity::Exact, terms: BTreeMap::new() }
    }

    pub fn constant(sig: VarSig, order: u32, c: GaussianRational) -> Self {
        let mut jet = Self::zero(sig, order);
        if !c.is_zero() {
            jet.terms.insert(MultiIndex::zero(sig.nvars()), c);
        }
        jet
    }

    pub fn one(sig: VarSig, order: u32) -> Self {
        Self::constant(sig, order, GaussianRational::one())
    }

    pub fn var(sig: VarSig, order: u32, var: Var) -> Result<Self> {
        let idx = sig.index_of(var)?;
        Ok(Self::monomial(sig, order, MultiIndex::unit(sig.nvars(), idx), GaussianRational::one()))
    }

    /// `c * x^exps`; becomes the zero jet valid to `order` if the degree
    /// exceeds the work order.
    pub fn monomial(sig: VarSig, order: u32, exps: MultiIndex, c: GaussianRational) -> Self {
        assert_eq!(exps.len(), sig.nvars(), "monomial length must match signature");
        let mut jet = Self::zero(sig, order);
        if exps.degree() > order {
            jet.valid = Validity::UpTo(order as i32);
        } else if !c.is_zero() {
            jet.terms.insert(exps, c);
        }
        jet
    }

    /// Build from raw terms. Zero coefficients are dropped, repeated
    /// monomials are summed, and terms above the valid bound are discarded.
    pub fn from_terms<I>(sig: VarSig, order: u32, valid: Validity, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, GaussianRational)>,
    {
        let bound = valid.bound(order);
        let mut map: BTreeMap<MultiIndex, GaussianRational> = BTreeMap::new();
        let mut truncated = false;
        for (m, c) in terms {
            assert_eq!(m.len(), sig.nvars(), "monomial length must match signature");
            if m.degree() as i32 > bound {
                truncated = true;
                continue;
            }
            *map.entry(m).or_default() += &c;
        }
        map.retain(|_, c| !c.is_zero());
        let valid = if truncated && valid.is_exact() { Validity::UpTo(order as i32) } else { valid };
        Self { sig, order, valid, terms: map }
    }

    pub fn sig(&self) -> VarSig {
        self.sig
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn valid(&self) -> Validity {
        self.valid
    }

    /// Highest degree whose coefficients are known.
    pub fn bound(&self) -> i32 {
        self.valid.bound(self.order)
    }

    pub fn is_exact(&self) -> bool {
        self.valid.is_exact()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &MultiIndex) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, |m| m.degree())
    }

    /// Lowest degree of a stored term, `None` for the zero jet.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree())
    }

    /// Lower the validity to `v` (never raises it), dropping terms above it.
    pub fn restricted(mut self, v: Validity) -> Self {
        let valid = self.valid.min(v);
        if valid != self.valid {
            let bound = valid.bound(self.order);
            self.terms.retain(|m, _| m.degree() as i32 <= bound);
            self.valid = valid;
        }
        self
    }

    /// Terms of degree at most `degree`, with validity lowered accordingly.
    pub fn truncated(&self, degree: u32) -> Self {
        if self.is_exact() && self.max_degree() <= degree {
            return self.clone();
        }
        self.clone().restricted(Validity::UpTo(degree as i32))
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.sig != other.sig {
            return Err(Error::SignatureMismatch(format!("{} vs {}", self.sig, other.sig)));
        }
        if self.order != other.order {
            return Err(Error::SignatureMismatch(format!(
                "work order {} vs {}",
                self.order, other.order
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(self.combine(other, false))
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(self.combine(other, true))
    }

    fn combine(&self, other: &Jet, subtract: bool) -> Jet {
        let valid = self.valid.min(other.valid);
        let bound = valid.bound(self.order);
        let mut terms: BTreeMap<MultiIndex, GaussianRational> = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree() as i32 <= bound)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        for (m, c) in &other.terms {
            if m.degree() as i32 > bound {
                continue;
            }
            let slot = terms.entry(m.clone()).or_default();
            if subtract {
                *slot -= c;
            } else {
                *slot += c;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Jet { sig: self.sig, order: self.order, valid, terms }
    }

    /// Cauchy product truncated at the work order.
    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let order = self.order;
        let valid = match (self.valid, other.valid) {
            (Validity::Exact, Validity::Exact) => {
                if self.is_zero() || other.is_zero() || self.max_degree() + other.max_degree() <= order {
                    Validity::Exact
                } else {
                    Validity::UpTo(order as i32)
                }
            }
            (a, b) => a.min(b).capped(order),
        };
        let bound = valid.bound(order);
        let mut terms: BTreeMap<MultiIndex, GaussianRational> = BTreeMap::new();
        // Terms are sorted by degree, so both loops can stop early.
        for (ma, ca) in &self.terms {
            let da = ma.degree() as i32;
            if da > bound {
                break;
            }
            for (mb, cb) in &other.terms {
                if da + mb.degree() as i32 > bound {
                    break;
                }
                *terms.entry(ma.add(mb)).or_default() += &(ca * cb);
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(Jet { sig: self.sig, order, valid, terms })
    }

    pub fn scale(&self, c: &GaussianRational) -> Jet {
        if c.is_zero() {
            return Jet { sig: self.sig, order: self.order, valid: self.valid, terms: BTreeMap::new() };
        }
        let terms = self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect();
        Jet { sig: self.sig, order: self.order, valid: self.valid, terms }
    }

    pub fn mul_i(&self) -> Jet {
        let terms = self.terms.iter().map(|(m, a)| (m.clone(), a.mul_i())).collect();
        Jet { sig: self.sig, order: self.order, valid: self.valid, terms }
    }

    /// Formal partial derivative; costs one order of validity.
    pub fn derive(&self, var: Var) -> Result<Jet> {
        let idx = self.sig.index_of(var)?;
        Ok(self.derive_index(idx))
    }

    pub(crate) fn derive_index(&self, idx: usize) -> Jet {
        let valid = self.valid.lowered(1);
        let bound = valid.bound(self.order);
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.get(idx);
            if e == 0 {
                continue;
            }
            let lowered = m.with_decremented(idx).unwrap();
            if lowered.degree() as i32 > bound {
                continue;
            }
            terms.insert(lowered, c.scale_int(e as u64));
        }
        Jet { sig: self.sig, order: self.order, valid, terms }
    }

    /// Complex conjugate: coefficients conjugated, `z` and `zb` blocks
    /// swapped, `s` untouched.
    pub fn conjugate(&self) -> Jet {
        let n = self.sig.n();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let e = m.exps();
                let mut swapped = Vec::with_capacity(e.len());
                swapped.extend_from_slice(&e[n..2 * n]);
                swapped.extend_from_slice(&e[..n]);
                swapped.extend_from_slice(&e[2 * n..]);
                (MultiIndex::new(swapped), c.conj())
            })
            .collect();
        Jet { sig: self.sig, order: self.order, valid: self.valid, terms }
    }

    pub fn eval0(&self) -> Result<GaussianRational> {
        if self.bound() < 0 {
            return Err(Error::InsufficientValidOrder(self.bound()));
        }
        Ok(self.coeff(&MultiIndex::zero(self.sig.nvars())))
    }

    /// Multiplicative inverse as a geometric series around the constant term.
    /// The result is valid to `min(valid, order)`, never exact.
    pub fn reciprocal(&self) -> Result<Jet> {
        let c0 = self.eval0()?;
        let c0_inv = c0.inv().ok_or(Error::NonUnitConstantTerm)?;
        let bound = self.bound();
        let valid = Validity::UpTo(bound);
        // f = c0 (1 + g)  =>  1/f = c0^-1 * sum_k (-g)^k
        let zero = MultiIndex::zero(self.sig.nvars());
        let neg_g = Jet::from_terms(
            self.sig,
            self.order,
            valid,
            self.terms
                .iter()
                .filter(|(m, _)| **m != zero)
                .map(|(m, c)| (m.clone(), -(c * &c0_inv))),
        );
        let mut sum = Jet::one(self.sig, self.order).restricted(valid);
        let mut power = sum.clone();
        if !neg_g.is_zero() {
            for _ in 1..=bound {
                power = &power * &neg_g;
                if power.is_zero() {
                    break;
                }
                sum = &sum + &power;
            }
        }
        Ok(sum.scale(&c0_inv))
    }

    pub fn pow(&self, mut e: u32) -> Jet {
        let mut result = Jet::one(self.sig, self.order);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Formal composition `self(images)`. `self` lives over the target
    /// signature; `images` holds one jet per target variable, all over a
    /// common source signature, each vanishing at the origin.
    pub fn substitute(&self, images: &[Jet]) -> Result<Jet> {
        if images.len() != self.sig.nvars() {
            return Err(Error::ArityMismatch { expected: self.sig.nvars(), found: images.len() });
        }
        let Some(first) = images.first() else {
            return Err(Error::ArityMismatch { expected: self.sig.nvars(), found: 0 });
        };
        for img in &images[1..] {
            first.check_compatible(img)?;
        }
        for (i, img) in images.iter().enumerate() {
            if !img.eval0()?.is_zero() {
                return Err(Error::NonzeroConstantTermInImage(i));
            }
        }
        let (src, order) = (first.sig, first.order);
        let mut powers: Vec<Vec<Jet>> = images.iter().map(|img| vec![Jet::one(src, order), img.clone()]).collect();
        let mut result = Jet::zero(src, order);
        for (m, c) in &self.terms {
            let mut term = Jet::constant(src, order, c.clone());
            for (v, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut powers[v];
                while cache.len() <= e as usize {
                    let next = &cache[cache.len() - 1] * &cache[1];
                    cache.push(next);
                }
                term = &term * &cache[e as usize];
            }
            result = &result + &term;
        }
        Ok(result.restricted(self.valid))
    }

    /// Exact division by the monomial `x^m`, `None` if some term is not
    /// divisible. The quotient loses `|m|` orders of validity.
    pub fn divide_monomial(&self, m: &MultiIndex) -> Option<Jet> {
        let mut terms = BTreeMap::new();
        for (t, c) in &self.terms {
            terms.insert(t.checked_sub(m)?, c.clone());
        }
        Some(Jet { sig: self.sig, order: self.order, valid: self.valid.lowered(m.degree() as i32), terms })
    }

    pub fn mul_monomial(&self, m: &MultiIndex) -> Jet {
        let mono = Jet::monomial(self.sig, self.order, m.clone(), GaussianRational::one());
        self * &mono
    }

    /// Equality of the coefficients both jets know, i.e. up to the lower of
    /// the two valid bounds. Signatures must agree.
    pub fn agrees_with(&self, other: &Jet) -> bool {
        if self.sig != other.sig {
            return false;
        }
        let bound = self.bound().min(other.bound());
        let a = self.terms.iter().take_while(|(m, _)| m.degree() as i32 <= bound);
        let b = other.terms.iter().take_while(|(m, _)| m.degree() as i32 <= bound);
        a.eq(b)
    }
}

impl PartialEq for Jet {
    /// Same as [`Jet::agrees_with`]; compares up to the common valid order.
    fn eq(&self, other: &Self) -> bool {
        self.agrees_with(other)
    }
}

// Operator forms are used inside the engine where all jets share one
// signature; they panic on a mismatch. Use the `try_*` methods otherwise.
impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.try_add(rhs).expect("jet signature mismatch in +")
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.try_sub(rhs).expect("jet signature mismatch in -")
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.try_mul(rhs).expect("jet signature mismatch in *")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect();
        Jet { sig: self.sig, order: self.order, valid: self.valid, terms }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}
