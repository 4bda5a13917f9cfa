//! Iterated Lie derivatives of characteristic forms and multiplier
//! determinants.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::frame::{check_index, CrFrame, HoloForm};
use crate::jet::{GaussianRational, Jet, JetMatrix, MultiIndex};

/// Step schedule of a multi-index over the CR directions: direction `j`
/// is repeated `alpha_j` times, in ascending order. Step 0 is applied
/// last (outermost).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieSchedule {
    alpha: MultiIndex,
    steps: Vec<usize>,
}

impl LieSchedule {
    pub fn new(alpha: &MultiIndex) -> Self {
        let steps = alpha.exps().iter().enumerate().flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize)).collect();
        Self { alpha: alpha.clone(), steps }
    }

    pub fn alpha(&self) -> &MultiIndex {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Direction of step `l` (0-based).
    pub fn step(&self, l: usize) -> usize {
        self.steps[l]
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    /// Sum of the first `l` steps as a multi-index.
    pub fn prefix(&self, l: usize) -> MultiIndex {
        let mut exps = vec![0; self.alpha.len()];
        for &j in &self.steps[..l] {
            exps[j] += 1;
        }
        MultiIndex::new(exps)
    }

    /// `alpha - prefix(l)`.
    pub fn suffix(&self, l: usize) -> MultiIndex {
        self.alpha.checked_sub(&self.prefix(l)).expect("prefix is below alpha")
    }
}

/// Coefficient row of `L^alpha theta^mu` in the basis `(theta, dz)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieRow {
    pub alpha: MultiIndex,
    pub mu: usize,
    pub t: Vec<Jet>,
    pub a: Vec<Jet>,
}

impl LieRow {
    pub fn entries(&self) -> impl Iterator<Item = &Jet> {
        self.t.iter().chain(&self.a)
    }

    pub fn eval0(&self) -> Result<Vec<GaussianRational>> {
        self.entries().map(Jet::eval0).collect()
    }
}

/// Refuse work whose valid order cannot reach the origin.
pub fn check_budget(order: u32, max_len: u32) -> Result<()> {
    let required = max_len + 2;
    if order < required {
        return Err(Error::OrderBudgetExceeded { required, available: order });
    }
    Ok(())
}

fn check_alpha(frame: &CrFrame, alpha: &MultiIndex, mu: usize) -> Result<()> {
    let sig = frame.sig();
    if alpha.len() != sig.n() {
        return Err(Error::ArityMismatch { expected: sig.n(), found: alpha.len() });
    }
    check_index("mu", mu, sig.d())?;
    check_budget(frame.order(), alpha.degree())
}

/// One Lie derivative `L_k` of a holomorphic form.
pub fn lie_once(frame: &CrFrame, k: usize, eta: &HoloForm) -> Result<HoloForm> {
    let sig = frame.sig();
    let (n, d) = (sig.n(), sig.d());
    check_index("k", k, n)?;
    if eta.sigma.len() != d || eta.rho.len() != n {
        return Err(Error::ArityMismatch { expected: n + d, found: eta.sigma.len() + eta.rho.len() });
    }
    let mut sigma = Vec::with_capacity(d);
    for mu in 0..d {
        let mut c = frame.apply_l(k, &eta.sigma[mu])?;
        for (nu, s) in eta.sigma.iter().enumerate() {
            c = &c - &(s * frame.b_s(k, nu, mu));
        }
        sigma.push(c);
    }
    let mut rho = Vec::with_capacity(n);
    for j in 0..n {
        let mut c = frame.apply_l(k, &eta.rho[j])?;
        for (mu, s) in eta.sigma.iter().enumerate() {
            c = &c + &(s * frame.lambda(j, k, mu));
        }
        rho.push(c);
    }
    Ok(HoloForm { sigma, rho })
}

/// Lie derivatives of characteristic forms over a fixed frame, memoised by
/// `(alpha, mu)`. Safe to share between threads.
#[derive(Debug)]
pub struct LieCalculus {
    frame: CrFrame,
    memo: RwLock<HashMap<(MultiIndex, usize), Arc<HoloForm>>>,
}

impl LieCalculus {
    pub fn new(frame: CrFrame) -> Self {
        Self { frame, memo: RwLock::new(HashMap::new()) }
    }

    pub fn frame(&self) -> &CrFrame {
        &self.frame
    }

    fn form(&self, alpha: &MultiIndex, mu: usize) -> Result<Arc<HoloForm>> {
        let key = (alpha.clone(), mu);
        if let Some(hit) = self.memo.read().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let form = match alpha.exps().iter().position(|&e| e > 0) {
            None => HoloForm::theta(self.frame.sig(), self.frame.order(), mu)?,
            Some(first) => {
                let inner = self.form(&alpha.with_decremented(first).unwrap(), mu)?;
                lie_once(&self.frame, first, &inner)?
            }
        };
        let mut memo = self.memo.write().unwrap();
        Ok(memo.entry(key).or_insert_with(|| Arc::new(form)).clone())
    }

    pub fn lie_power(&self, alpha: &MultiIndex, mu: usize) -> Result<LieRow> {
        check_alpha(&self.frame, alpha, mu)?;
        let form = self.form(alpha, mu)?;
        Ok(LieRow { alpha: alpha.clone(), mu, t: form.sigma.clone(), a: form.rho.clone() })
    }

    /// Determinant of the stacked rows `L^{alphas[i]} theta^{r[i]}`.
    pub fn multiplier_det(&self, alphas: &[MultiIndex], r: &[usize]) -> Result<Jet> {
        let big_n = self.frame.sig().big_n();
        if alphas.len() != big_n {
            return Err(Error::ArityMismatch { expected: big_n, found: alphas.len() });
        }
        if r.len() != big_n {
            return Err(Error::ArityMismatch { expected: big_n, found: r.len() });
        }
        let rows = alphas
            .iter()
            .zip(r)
            .map(|(alpha, &mu)| Ok(self.lie_power(alpha, mu)?.entries().cloned().collect()))
            .collect::<Result<Vec<Vec<Jet>>>>()?;
        JetMatrix::from_rows(rows)?.det()
    }
}

/// `L_{p(0)} o ... o L_{p(l-1)} f` for the first `l` steps of a schedule.
fn apply_prefix(frame: &CrFrame, sched: &LieSchedule, l: usize, f: Jet) -> Result<Jet> {
    let mut out = f;
    for step in (0..l).rev() {
        out = frame.apply_l(sched.step(step), &out)?;
    }
    Ok(out)
}

fn t_recursive(
    frame: &CrFrame,
    alpha: &MultiIndex,
    mu: usize,
    memo: &mut HashMap<MultiIndex, Vec<Jet>>,
) -> Result<Vec<Jet>> {
    if let Some(hit) = memo.get(alpha) {
        return Ok(hit.clone());
    }
    let (sig, order) = (frame.sig(), frame.order());
    let d = sig.d();
    let t = if alpha.is_zero() {
        (0..d).map(|tau| if tau == mu { Jet::one(sig, order) } else { Jet::zero(sig, order) }).collect()
    } else {
        let sched = LieSchedule::new(alpha);
        let p1 = sched.step(0);
        let prev = t_recursive(frame, &sched.suffix(1), mu, memo)?;
        let mut next = Vec::with_capacity(d);
        for tau in 0..d {
            let mut c = frame.apply_l(p1, &prev[tau])?;
            for (nu, t_nu) in prev.iter().enumerate() {
                c = &c - &(frame.b_s(p1, nu, tau) * t_nu);
            }
            next.push(c);
        }
        next
    };
    memo.insert(alpha.clone(), t.clone());
    Ok(t)
}

/// The same row as [`LieCalculus::lie_power`], computed from the explicit
/// T/A recursion instead of iterated single steps.
pub fn lie_power_recursive(frame: &CrFrame, alpha: &MultiIndex, mu: usize) -> Result<LieRow> {
    check_alpha(frame, alpha, mu)?;
    let (sig, order) = (frame.sig(), frame.order());
    let (n, d) = (sig.n(), sig.d());
    let mut memo = HashMap::new();
    let t = t_recursive(frame, alpha, mu, &mut memo)?;
    let sched = LieSchedule::new(alpha);
    let mut a = vec![Jet::zero(sig, order); n];
    for (j, a_j) in a.iter_mut().enumerate() {
        for k in 1..=sched.len() {
            let t_hat = t_recursive(frame, &sched.suffix(k), mu, &mut memo)?;
            let mut inner = Jet::zero(sig, order);
            for (nu, t_nu) in t_hat.iter().enumerate().take(d) {
                inner = &inner + &(t_nu * frame.lambda(j, sched.step(k - 1), nu));
            }
            *a_j = &*a_j + &apply_prefix(frame, &sched, k - 1, inner)?;
        }
    }
    Ok(LieRow { alpha: alpha.clone(), mu, t, a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, ManifoldSpec};

    fn calc(n: usize, d: usize, k: u32, phi: &[&str]) -> LieCalculus {
        LieCalculus::new(CrFrame::build(&ManifoldSpec::parse(n, d, k, phi, None).unwrap()).unwrap())
    }

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn schedule_prefixes() {
        let s = LieSchedule::new(&mi(&[2, 0, 1]));
        assert_eq!(s.steps(), &[0, 0, 2]);
        for l in 0..=3 {
            assert_eq!(s.prefix(l).add(&s.suffix(l)), mi(&[2, 0, 1]));
        }
        assert_eq!(s.suffix(1), mi(&[1, 0, 1]));
    }

    #[test]
    fn sphere_first_step() {
        let c = calc(1, 1, 4, &["z1*zb1"]);
        let row = c.lie_power(&mi(&[1]), 0).unwrap();
        assert!(row.t[0].is_zero());
        assert_eq!(row.a[0].eval0().unwrap(), GaussianRational::from_parts((0, 1), (-2, 1)));
        let d = c.multiplier_det(&[mi(&[0]), mi(&[1])], &[0, 0]).unwrap();
        assert_eq!(d.eval0().unwrap(), GaussianRational::from_parts((0, 1), (-2, 1)));
    }

    #[test]
    fn zero_alpha_is_identity_row() {
        let c = calc(1, 2, 4, &["s1*z1*zb1", "s2*z1*zb1"]);
        let row = c.lie_power(&mi(&[0]), 1).unwrap();
        assert!(row.t[0].is_zero() && row.t[1].eval0().unwrap().is_one() && row.a[0].is_zero());
    }

    #[test]
    fn omega_has_no_theta_part() {
        let c = calc(2, 1, 5, &["z1*zb1 + s1*z2*zb2"]);
        let f = c.frame();
        let w = HoloForm::omega(f.sig(), f.order(), 1).unwrap();
        let out = lie_once(f, 0, &w).unwrap();
        assert!(out.sigma[0].is_zero());
        assert!(out.rho.iter().all(Jet::is_zero));
    }

    #[test]
    fn c3_rows() {
        let c = calc(1, 2, 8, &["s1*z1*zb1", "s2*z1*zb1"]);
        let row = c.lie_power(&mi(&[1]), 0).unwrap();
        let rec = lie_power_recursive(c.frame(), &mi(&[1]), 0).unwrap();
        for (x, y) in row.entries().zip(rec.entries()) {
            assert!(x.agrees_with(y));
        }
        assert!(row.t[1].is_zero());
        let sig = c.frame().sig();
        let lead = parse_expr("-i*z1", sig, 8).unwrap();
        assert!(row.t[0].truncated(1).agrees_with(&lead));
        let d = c.multiplier_det(&[mi(&[0]), mi(&[0]), mi(&[1])], &[0, 1, 0]).unwrap();
        assert!(d.truncated(5).agrees_with(&parse_expr("-2*i*s1 + 6*i*s1*z1^2*zb1^2", sig, 8).unwrap()));
    }

    #[test]
    fn budget_and_arity() {
        let c = calc(1, 1, 4, &["z1*zb1"]);
        assert_eq!(
            c.lie_power(&mi(&[3]), 0).unwrap_err(),
            Error::OrderBudgetExceeded { required: 5, available: 4 }
        );
        assert!(matches!(c.lie_power(&mi(&[0]), 1), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(c.multiplier_det(&[mi(&[0])], &[0]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn repeated_rows_give_zero() {
        let c = calc(2, 1, 5, &["z1*zb1 + z2*zb2 + s1*z1*zb2 + s1*z2*zb1"]);
        let d = c.multiplier_det(&[mi(&[1, 0]), mi(&[1, 0]), mi(&[0, 0])], &[0, 0, 0]).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn noncommuting_schedule_agrees() {
        let c = calc(2, 1, 6, &["z1*zb1 + z2*zb2 + s1*z1*zb2 + s1*z2*zb1 + s1*z1^2*zb2 + s1*z2*zb1^2"]);
        for alpha in MultiIndex::all_up_to(2, 3) {
            let a = c.lie_power(&alpha, 0).unwrap();
            let b = lie_power_recursive(c.frame(), &alpha, 0).unwrap();
            for (x, y) in a.entries().zip(b.entries()) {
                assert!(x.agrees_with(y), "alpha = {alpha}");
            }
        }
    }
}
