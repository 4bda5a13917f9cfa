use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Variable layout of a jet ring.
///
/// A manifold signature has `n` CR variables and `d` real transverse
/// variables, laid out as `(z_1..z_n, zb_1..zb_n, s_1..s_d)`. An ambient
/// signature (`d == 0`) holds the target coordinates `(Z'_1.., Zb'_1..)` of a
/// mapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VarSig {
    n: usize,
    d: usize,
}

/// A coordinate of a [`VarSig`], 0-based within its block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Z(usize),
    Zb(usize),
    S(usize),
}

impl VarSig {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::SignatureMismatch(format!(
                "manifold signature needs n >= 1 and d >= 1, got n = {n}, d = {d}"
            )));
        }
        Ok(Self { n, d })
    }

    /// Signature of the ambient space `C^n` in `(Z', Zb')` coordinates.
    pub fn ambient(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::SignatureMismatch("ambient dimension must be >= 1".into()));
        }
        Ok(Self { n, d: 0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_ambient(&self) -> bool {
        self.d == 0
    }

    /// `N = n + d`, the rank of the holomorphic cotangent bundle.
    pub fn big_n(&self) -> usize {
        self.n + self.d
    }

    pub fn nvars(&self) -> usize {
        2 * self.n + self.d
    }

    pub fn index_of(&self, var: Var) -> Result<usize> {
        let (idx, bound, name) = match var {
            Var::Z(j) => (j, self.n, "z"),
            Var::Zb(j) => (self.n + j, self.n, "zb"),
            Var::S(m) => (2 * self.n + m, self.d, "s"),
        };
        let local = match var {
            Var::Z(j) | Var::Zb(j) | Var::S(j) => j,
        };
        if local >= bound {
            return Err(Error::UnknownVariable(format!(
                "{name}{} not in signature (n = {}, d = {})",
                local + 1,
                self.n,
                self.d
            )));
        }
        Ok(idx)
    }

    pub fn var_at(&self, idx: usize) -> Var {
        if idx < self.n {
            Var::Z(idx)
        } else if idx < 2 * self.n {
            Var::Zb(idx - self.n)
        } else {
            Var::S(idx - 2 * self.n)
        }
    }

    /// Printable name of a coordinate (1-based, as in the input grammar).
    pub fn var_name(&self, var: Var) -> String {
        let ambient = self.is_ambient();
        match var {
            Var::Z(j) if ambient => format!("Zp{}", j + 1),
            Var::Zb(j) if ambient => format!("Zbp{}", j + 1),
            Var::Z(j) => format!("z{}", j + 1),
            Var::Zb(j) => format!("zb{}", j + 1),
            Var::S(m) => format!("s{}", m + 1),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.nvars()).map(|i| self.var_at(i))
    }
}

impl fmt::Display for VarSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ambient() {
            write!(f, "C^{}", self.n)
        } else {
            write!(f, "(n = {}, d = {})", self.n, self.d)
        }
    }
}

/// Exponent vector.
///
/// Ordered graded first (ascending total degree), then by descending
/// lexicographic comparison of the exponents, so that `z1` sorts before
/// `zb1` before `s1`, and `z1^2` before `z1*zb1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exps: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        let degree = exps.iter().sum();
        Self { exps, degree }
    }

    pub fn zero(len: usize) -> Self {
        Self { exps: vec![0; len], degree: 0 }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut exps = vec![0; len];
        exps[i] = 1;
        Self { exps, degree: 1 }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn get(&self, i: usize) -> u32 {
        self.exps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.degree == 0
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        let exps = self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect();
        Self { exps, degree: self.degree + other.degree }
    }

    /// `self - other` when `other <= self` componentwise.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut exps = Vec::with_capacity(self.len());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            exps.push(a.checked_sub(*b)?);
        }
        Some(Self::new(exps))
    }

    pub fn with_incremented(&self, i: usize) -> Self {
        let mut exps = self.exps.clone();
        exps[i] += 1;
        Self { exps, degree: self.degree + 1 }
    }

    pub fn with_decremented(&self, i: usize) -> Option<Self> {
        if self.exps[i] == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[i] -= 1;
        Some(Self { exps, degree: self.degree - 1 })
    }

    /// Componentwise `<=`.
    pub fn divides(&self, other: &Self) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `alpha!`
    pub fn factorial(&self) -> u64 {
        self.exps
            .iter()
            .map(|&e| (1..=e as u64).product::<u64>())
            .product()
    }

    /// All multi-indices of length `len` and total degree exactly `degree`,
    /// in [`Ord`] order.
    pub fn all_of_degree(len: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(len: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == len {
                prefix.push(remaining);
                out.push(MultiIndex::new(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=remaining).rev() {
                prefix.push(e);
                rec(len, remaining - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if len == 0 {
            if degree == 0 {
                out.push(MultiIndex::new(Vec::new()));
            }
            return out;
        }
        rec(len, degree, &mut Vec::with_capacity(len), &mut out);
        out
    }

    /// All multi-indices of length `len` with degree at most `max_degree`.
    pub fn all_up_to(len: usize, max_degree: u32) -> Vec<MultiIndex> {
        (0..=max_degree).flat_map(|k| Self::all_of_degree(len, k)).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    /// `0`, `e{j}` for unit vectors, otherwise the exponent tuple.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.degree == 1 {
            let j = self.exps.iter().position(|&e| e == 1).unwrap();
            return write!(f, "e{}", j + 1);
        }
        let parts: Vec<String> = self.exps.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// How far a jet's coefficients are trustworthy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Validity {
    /// The stored terms are the whole function.
    Exact,
    /// Coefficients of degree `<= v` are correct; nothing above is known.
    /// May be negative after repeated differentiation.
    UpTo(i32),
}

impl Validity {
    pub fn min(self, other: Validity) -> Validity {
        match (self, other) {
            (Validity::Exact, v) | (v, Validity::Exact) => v,
            (Validity::UpTo(a), Validity::UpTo(b)) => Validity::UpTo(a.min(b)),
        }
    }

    pub fn lowered(self, by: i32) -> Validity {
        match self {
            Validity::Exact => Validity::Exact,
            Validity::UpTo(v) => Validity::UpTo(v - by),
        }
    }

    /// Cap at the work order: an exact value becomes `UpTo(order)`.
    pub fn capped(self, order: u32) -> Validity {
        match self {
            Validity::Exact => Validity::UpTo(order as i32),
            Validity::UpTo(v) => Validity::UpTo(v.min(order as i32)),
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Validity::Exact)
    }

    /// Highest trustworthy degree given the work order.
    pub fn bound(self, order: u32) -> i32 {
        match self {
            Validity::Exact => order as i32,
            Validity::UpTo(v) => v.min(order as i32),
        }
    }
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Validity::Exact => write!(f, "exact"),
            Validity::UpTo(v) => write!(f, "O({})", v + 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_order() {
        let z1 = MultiIndex::new(vec![1, 0, 0]);
        let zb1 = MultiIndex::new(vec![0, 1, 0]);
        let s1 = MultiIndex::new(vec![0, 0, 1]);
        let one = MultiIndex::zero(3);
        let mut v = vec![s1.clone(), MultiIndex::new(vec![1, 1, 0]), zb1.clone(), one.clone(), z1.clone()];
        v.sort();
        assert_eq!(v, vec![one, z1, zb1, s1, MultiIndex::new(vec![1, 1, 0])]);
    }

    #[test]
    fn enumerate_degree() {
        let all = MultiIndex::all_of_degree(2, 2);
        let exps: Vec<_> = all.iter().map(|m| m.exps().to_vec()).collect();
        assert_eq!(exps, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(MultiIndex::all_up_to(3, 2).len(), 10);
        let mut sorted = MultiIndex::all_up_to(3, 3);
        let before = sorted.clone();
        sorted.sort();
        assert_eq!(before, sorted);
    }

    #[test]
    fn signature_layout() {
        let sig = VarSig::new(2, 1).unwrap();
        assert_eq!(sig.nvars(), 5);
        assert_eq!(sig.index_of(Var::Zb(1)).unwrap(), 3);
        assert_eq!(sig.var_at(4), Var::S(0));
        assert!(sig.index_of(Var::S(1)).is_err());
        assert!(VarSig::new(0, 1).is_err());
        assert_eq!(VarSig::ambient(2).unwrap().var_name(Var::Zb(0)), "Zbp1");
    }

    #[test]
    fn validity_calculus() {
        use Validity::*;
        assert_eq!(Exact.min(UpTo(3)), UpTo(3));
        assert_eq!(UpTo(2).lowered(1), UpTo(1));
        assert_eq!(Exact.lowered(1), Exact);
        assert_eq!(Exact.capped(5), UpTo(5));
        assert_eq!(UpTo(0).lowered(1).bound(4), -1);
    }
}
