//! Finite, weak and mapping nondegeneracy at the origin.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{ManifoldSpec, MapSpec};
use crate::frame::CrFrame;
use crate::jet::{GaussianRational, Jet, MultiIndex, SpanTracker, Var};
use crate::lie::{check_budget, LieCalculus, LieSchedule};

/// Ordering convention used for the exponent condition of the
/// first-codimension check.
pub const GAMMA_CONVENTION: &str =
    "gamma^1 <= gamma^nu componentwise with strict inequality in some component, for every nu >= 2";

/// Largest `s^beta` dividing every stored term of a jet.
#[derive(Clone, Debug, PartialEq)]
pub struct SFactor {
    pub beta: Vec<u32>,
    pub remainder: Jet,
    /// Divisibility is only certified up to the valid order of the input.
    pub truncation_limited: bool,
}

pub fn s_factor(f: &Jet) -> Result<SFactor> {
    if f.is_zero() {
        return Err(Error::ZeroJet);
    }
    let sig = f.sig();
    let n = sig.n();
    let mut beta = vec![u32::MAX; sig.d()];
    for (m, _) in f.terms() {
        for (nu, b) in beta.iter_mut().enumerate() {
            *b = (*b).min(m.get(2 * n + nu));
        }
    }
    let mut exps = vec![0; 2 * n];
    exps.extend_from_slice(&beta);
    let remainder = f.divide_monomial(&MultiIndex::new(exps)).expect("beta divides every term");
    Ok(SFactor { beta, remainder, truncation_limited: !f.is_exact() })
}

/// A multiplier `D(alphas, r)` with its value and s-structure.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub alphas: Vec<MultiIndex>,
    /// Characteristic indices, 0-based.
    pub r: Vec<usize>,
    pub det: Jet,
    pub value_at_0: GaussianRational,
    pub s_factor: SFactor,
}

impl Witness {
    fn new(alphas: Vec<MultiIndex>, r: Vec<usize>, det: Jet) -> Result<Self> {
        let value_at_0 = det.eval0()?;
        let s_factor = s_factor(&det)?;
        Ok(Self { alphas, r, det, value_at_0, s_factor })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NondegReport {
    pub k_max: u32,
    /// `N = n + d`.
    pub full_rank: usize,
    /// `(k, rank E_k(0))` for `k = 0..=k_max`.
    pub ranks: Vec<(u32, usize)>,
    pub k0: Option<u32>,
    pub witnesses: Vec<Witness>,
}

/// Rows `(alpha, mu)` with `|alpha| = k`, in enumeration order.
fn rows_of_degree(n: usize, d: usize, k: u32) -> impl Iterator<Item = (MultiIndex, usize)> {
    MultiIndex::all_of_degree(n, k).into_iter().flat_map(move |a| (0..d).map(move |mu| (a.clone(), mu)))
}

pub fn finite_order(m: &ManifoldSpec, k_max: u32) -> Result<NondegReport> {
    check_budget(m.order(), k_max)?;
    finite_order_with(&LieCalculus::new(CrFrame::build(m)?), k_max)
}

pub fn finite_order_with(calc: &LieCalculus, k_max: u32) -> Result<NondegReport> {
    let frame = calc.frame();
    check_budget(frame.order(), k_max)?;
    let sig = frame.sig();
    let full_rank = sig.big_n();
    let mut span = SpanTracker::new();
    let mut selected: Vec<(MultiIndex, usize)> = Vec::new();
    let mut ranks = Vec::new();
    let mut k0 = None;
    for k in 0..=k_max {
        if k0.is_none() {
            for (alpha, mu) in rows_of_degree(sig.n(), sig.d(), k) {
                let row = calc.lie_power(&alpha, mu)?.eval0()?;
                if span.insert(&row) {
                    selected.push((alpha, mu));
                    if span.rank() == full_rank {
                        break;
                    }
                }
            }
            if span.rank() == full_rank {
                k0 = Some(k);
            }
        }
        ranks.push((k, span.rank()));
    }
    let mut witnesses = Vec::new();
    if k0.is_some() {
        let (alphas, r): (Vec<_>, Vec<_>) = selected.into_iter().unzip();
        let det = calc.multiplier_det(&alphas, &r)?;
        witnesses.push(Witness::new(alphas, r, det)?);
    }
    Ok(NondegReport { k_max, full_rank, ranks, k0, witnesses })
}

/// Candidate multipliers built from distinct rows with `|alpha| <= k`, in
/// lexicographic order of row combinations, where rows are ordered by
/// `alpha` and then by characteristic index. At most `budget` candidates are
/// evaluated; those with a nonzero determinant are returned.
pub fn search_multipliers(calc: &LieCalculus, k: u32, budget: usize) -> Result<Vec<Witness>> {
    let frame = calc.frame();
    check_budget(frame.order(), k)?;
    let sig = frame.sig();
    let big_n = sig.big_n();
    let pairs: Vec<(MultiIndex, usize)> = (0..=k).flat_map(|deg| rows_of_degree(sig.n(), sig.d(), deg)).collect();
    let candidates = combinations(pairs.len(), big_n, budget);
    // warm the memo serially so parallel workers only read
    for (alpha, mu) in &pairs {
        calc.lie_power(alpha, *mu)?;
    }
    let results: Vec<Result<Option<Witness>>> = candidates
        .par_iter()
        .map(|combo| {
            let (alphas, r): (Vec<_>, Vec<_>) = combo.iter().map(|&i| pairs[i].clone()).unzip();
            let det = calc.multiplier_det(&alphas, &r)?;
            if det.is_zero() {
                Ok(None)
            } else {
                Witness::new(alphas, r, det).map(Some)
            }
        })
        .collect();
    results.into_iter().filter_map(Result::transpose).collect()
}

/// The first `limit` `size`-subsets of `0..len` in lexicographic order.
fn combinations(len: usize, size: usize, limit: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > len || limit == 0 {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.clone());
        if out.len() == limit {
            return out;
        }
        let Some(pos) = (0..size).rev().find(|&p| idx[p] < len - size + p) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..size {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Outcome of a weak nondegeneracy check.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakReport {
    pub k_max: u32,
    /// `(k, rank of span{phi_{z zb^alpha}(0) : |alpha| <= k})`.
    pub ranks: Vec<(u32, usize)>,
    /// `(k, whether phi_{z^alpha}(0) = phi_{zb^alpha}(0) = 0 for |alpha| <= k)`;
    /// empty for the first-codimension check.
    pub vanishing: Vec<(u32, bool)>,
    pub k0: Option<u32>,
    pub convention: Option<String>,
}

/// `d^alpha f(0)` for a multi-index over all variables.
fn derivative_at_zero(f: &Jet, m: &MultiIndex) -> GaussianRational {
    let c = f.coeff(m);
    if c.is_zero() {
        return c;
    }
    let fact = m.exps().iter().fold(num_bigint::BigInt::from(1), |acc, &e| {
        (1..=e).fold(acc, |acc, i| acc * num_bigint::BigInt::from(i))
    });
    &c * &GaussianRational::real(num_rational::BigRational::from_integer(fact))
}

fn lift(n: usize, d: usize, z: &[u32], zb: &[u32]) -> MultiIndex {
    let mut e = Vec::with_capacity(2 * n + d);
    e.extend_from_slice(z);
    e.extend_from_slice(zb);
    e.extend(std::iter::repeat_n(0, d));
    MultiIndex::new(e)
}

fn inner_budget(f: &Jet, needed: u32) -> Result<()> {
    if f.bound() < needed as i32 {
        let deficit = (f.order() as i32 - f.bound()).max(0) as u32;
        return Err(Error::OrderBudgetExceeded { required: needed + deficit, available: f.order() });
    }
    Ok(())
}

/// Gradient `(d/dz_i d/dzb^alpha f)(0)` for `i = 1..n`.
fn gradient_row(f: &Jet, alpha: &MultiIndex) -> Vec<GaussianRational> {
    let sig = f.sig();
    let (n, d) = (sig.n(), sig.d());
    (0..n)
        .map(|i| {
            let mut z = vec![0; n];
            z[i] = 1;
            derivative_at_zero(f, &lift(n, d, &z, alpha.exps()))
        })
        .collect()
}

fn gradient_ranks(f: &Jet, k_max: u32) -> Vec<(u32, usize)> {
    let n = f.sig().n();
    let mut span = SpanTracker::new();
    (0..=k_max)
        .map(|k| {
            if span.rank() < n {
                for alpha in MultiIndex::all_of_degree(n, k) {
                    span.insert(&gradient_row(f, &alpha));
                }
            }
            (k, span.rank())
        })
        .collect()
}

/// Weak nondegeneracy of a hypersurface `Im w = s^m phi(z, zb, s)`.
pub fn weak_check_hypersurface(m: &ManifoldSpec, k_max: u32) -> Result<WeakReport> {
    let sig = m.sig();
    let (Some(gamma), Some(inner)) = (m.gamma(), m.inner()) else {
        return Err(Error::MissingFactoredForm);
    };
    if sig.d() != 1 {
        return Err(Error::InvalidFactoredForm(format!("hypersurface check needs d = 1, got d = {}", sig.d())));
    }
    if gamma[0].degree() == 0 {
        return Err(Error::InvalidFactoredForm("hypersurface check needs an exponent m >= 1".into()));
    }
    let phi = &inner[0];
    inner_budget(phi, k_max + 1)?;
    let n = sig.n();
    let zeros = vec![0; n];
    let mut vanishing = Vec::new();
    let mut still = true;
    for k in 0..=k_max {
        for alpha in MultiIndex::all_of_degree(n, k) {
            let holo = derivative_at_zero(phi, &lift(n, 1, alpha.exps(), &zeros));
            let anti = derivative_at_zero(phi, &lift(n, 1, &zeros, alpha.exps()));
            still &= holo.is_zero() && anti.is_zero();
        }
        vanishing.push((k, still));
    }
    let ranks = gradient_ranks(phi, k_max);
    let k0 = ranks.iter().zip(&vanishing).find(|((_, r), (_, v))| *v && *r == n).map(|((k, _), _)| *k);
    Ok(WeakReport { k_max, ranks, vanishing, k0, convention: None })
}

/// Weak nondegeneracy in the first codimension,
/// `Im w_mu = s^{gamma^mu} phi_mu(z, zb, s)`.
pub fn weak_check_first_codim(m: &ManifoldSpec, k_max: u32) -> Result<WeakReport> {
    let (Some(gamma), Some(inner)) = (m.gamma(), m.inner()) else {
        return Err(Error::MissingFactoredForm);
    };
    let g1 = &gamma[0];
    let violation = |msg: String| Error::GammaConstraintViolated(format!("{msg} (convention: {GAMMA_CONVENTION})"));
    if g1.degree() < 2 {
        return Err(violation(format!("|gamma^1| = {} < 2", g1.degree())));
    }
    for (nu, g) in gamma.iter().enumerate().skip(1) {
        let below = g1.exps().iter().zip(g.exps()).all(|(a, b)| a <= b);
        if !below || g1 == g {
            return Err(violation(format!("gamma^1 = ({g1}) is not below gamma^{} = ({g})", nu + 1)));
        }
    }
    let phi = &inner[0];
    inner_budget(phi, k_max + 1)?;
    let ranks = gradient_ranks(phi, k_max);
    let n = m.sig().n();
    let k0 = ranks.iter().find(|(_, r)| *r == n).map(|(k, _)| *k);
    Ok(WeakReport { k_max, ranks, vanishing: Vec::new(), k0, convention: Some(GAMMA_CONVENTION.to_string()) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapNondegReport {
    pub k_max: u32,
    /// `N'`, the target dimension.
    pub full_rank: usize,
    pub ranks: Vec<(u32, usize)>,
    pub k0: Option<u32>,
}

/// Nondegeneracy of a CR map: spans of `L^alpha (d rho'_l / dZ')(H, Hbar)` at 0.
pub fn map_finite_order(map: &MapSpec, k_max: u32) -> Result<MapNondegReport> {
    let source = map.source();
    check_budget(source.order(), k_max)?;
    let frame = CrFrame::build(source)?;
    let target = map.target();
    let np = target.n();
    let mut images = map.h().to_vec();
    images.extend(map.h().iter().map(Jet::conjugate));
    let mut grads = Vec::with_capacity(map.rho().len());
    for rho in map.rho() {
        let row =
            (0..np).map(|i| rho.derive(Var::Z(i))?.substitute(&images)).collect::<Result<Vec<Jet>>>()?;
        grads.push(row);
    }

    let n = source.sig().n();
    let mut memo: HashMap<(MultiIndex, usize, usize), Jet> = HashMap::new();
    let mut span = SpanTracker::new();
    let mut ranks = Vec::new();
    let mut k0 = None;
    for k in 0..=k_max {
        if k0.is_none() {
            for alpha in MultiIndex::all_of_degree(n, k) {
                for (l, grad) in grads.iter().enumerate() {
                    let row = (0..np)
                        .map(|i| apply_power(&frame, &alpha, &grad[i], (l, i), &mut memo)?.eval0())
                        .collect::<Result<Vec<_>>>()?;
                    span.insert(&row);
                }
            }
            if span.rank() == np {
                k0 = Some(k);
            }
        }
        ranks.push((k, span.rank()));
    }
    Ok(MapNondegReport { k_max, full_rank: np, ranks, k0 })
}

/// `L^alpha f` with the outermost step in the lowest direction.
pub fn apply_l_power(frame: &CrFrame, alpha: &MultiIndex, f: &Jet) -> Result<Jet> {
    let sched = LieSchedule::new(alpha);
    let mut out = f.clone();
    for &j in sched.steps().iter().rev() {
        out = frame.apply_l(j, &out)?;
    }
    Ok(out)
}

fn apply_power(
    frame: &CrFrame,
    alpha: &MultiIndex,
    f: &Jet,
    key: (usize, usize),
    memo: &mut HashMap<(MultiIndex, usize, usize), Jet>,
) -> Result<Jet> {
    let id = (alpha.clone(), key.0, key.1);
    if let Some(hit) = memo.get(&id) {
        return Ok(hit.clone());
    }
    let out = match alpha.exps().iter().position(|&e| e > 0) {
        None => f.clone(),
        Some(first) => {
            let inner = apply_power(frame, &alpha.with_decremented(first).unwrap(), f, key, memo)?;
            frame.apply_l(first, &inner)?
        }
    };
    memo.insert(id, out.clone());
    Ok(out)
}
