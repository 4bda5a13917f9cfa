//! CR vector fields, characteristic forms and the `lambda` tensor of a
//! graph-form submanifold.

use crate::error::{Error, Result};
use crate::expr::ManifoldSpec;
use crate::jet::{GaussianRational, Jet, JetMatrix, Var, VarSig};

/// The frame `L_j = d/dzb_j - sum_mu b^j_mu d/ds_mu` together with the
/// conjugate frame and the cached derivatives it is paired with.
#[derive(Clone, Debug)]
pub struct CrFrame {
    sig: VarSig,
    order: u32,
    b: Vec<Vec<Jet>>,
    b_conj: Vec<Vec<Jet>>,
    phi_s: Vec<Vec<Jet>>,
    det_phi_inv: Jet,
    // b_s[k][nu][mu] = d/ds_mu b^k_nu
    b_s: Vec<Vec<Vec<Jet>>>,
    // lambda[j][k][mu]
    lambda: Vec<Vec<Vec<Jet>>>,
}

/// A vector field the characteristic forms can be paired with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    L(usize),
    Lbar(usize),
    Coordinate(Var),
}

/// A holomorphic one-form `sum sigma_mu theta^mu + sum rho_j dz_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloForm {
    pub sigma: Vec<Jet>,
    pub rho: Vec<Jet>,
}

impl HoloForm {
    /// The characteristic form `theta^mu`.
    pub fn theta(sig: VarSig, order: u32, mu: usize) -> Result<Self> {
        check_index("mu", mu, sig.d())?;
        let sigma = (0..sig.d())
            .map(|tau| if tau == mu { Jet::one(sig, order) } else { Jet::zero(sig, order) })
            .collect();
        let rho = vec![Jet::zero(sig, order); sig.n()];
        Ok(Self { sigma, rho })
    }

    /// The form `dz_j`.
    pub fn omega(sig: VarSig, order: u32, j: usize) -> Result<Self> {
        check_index("j", j, sig.n())?;
        let sigma = vec![Jet::zero(sig, order); sig.d()];
        let rho = (0..sig.n())
            .map(|l| if l == j { Jet::one(sig, order) } else { Jet::zero(sig, order) })
            .collect();
        Ok(Self { sigma, rho })
    }

    /// Coefficients in the order `(sigma_1..sigma_d, rho_1..rho_n)`.
    pub fn row(&self) -> impl Iterator<Item = &Jet> {
        self.sigma.iter().chain(&self.rho)
    }
}

pub(crate) fn check_index(what: &str, i: usize, len: usize) -> Result<()> {
    if i < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange(format!("{what} = {} not in 1..={len}", i + 1)))
    }
}

impl CrFrame {
    pub fn build(m: &ManifoldSpec) -> Result<Self> {
        let sig = m.sig();
        let (n, d, order) = (sig.n(), sig.d(), m.order());
        let phi = m.phi();

        let phi_s: Vec<Vec<Jet>> =
            phi.iter().map(|f| (0..d).map(|nu| f.derive(Var::S(nu))).collect::<Result<_>>()).collect::<Result<_>>()?;
        let mut big_phi = phi_s.clone();
        for (mu, row) in big_phi.iter_mut().enumerate() {
            for (nu, entry) in row.iter_mut().enumerate() {
                let mut e = entry.mul_i();
                if mu == nu {
                    e = &e + &Jet::one(sig, order);
                }
                *entry = e;
            }
        }
        let det_phi = JetMatrix::from_rows(big_phi.clone())?.det()?;
        let det_phi_inv = det_phi.reciprocal().map_err(|e| match e {
            Error::NonUnitConstantTerm => Error::NonUnitDeterminant,
            other => other,
        })?;

        let mut b = Vec::with_capacity(n);
        for j in 0..n {
            let phi_zb: Vec<Jet> = phi.iter().map(|f| f.derive(Var::Zb(j))).collect::<Result<_>>()?;
            let mut row = Vec::with_capacity(d);
            for mu in 0..d {
                let mut cols = big_phi.clone();
                for (r, entry) in cols.iter_mut().enumerate() {
                    entry[mu] = phi_zb[r].clone();
                }
                let det_b = JetMatrix::from_rows(cols)?.det()?;
                row.push((&det_b * &det_phi_inv).mul_i());
            }
            b.push(row);
        }
        let b_conj: Vec<Vec<Jet>> = b.iter().map(|row| row.iter().map(Jet::conjugate).collect()).collect();
        let b_s = b
            .iter()
            .map(|row| row.iter().map(|f| (0..d).map(|mu| f.derive_index(2 * n + mu)).collect()).collect())
            .collect();

        let mut frame =
            CrFrame { sig, order, b, b_conj, phi_s, det_phi_inv, b_s, lambda: Vec::new() };

        let mut lambda = Vec::with_capacity(n);
        for j in 0..n {
            let mut by_k = Vec::with_capacity(n);
            for k in 0..n {
                let cell = (0..d)
                    .map(|mu| Ok(&frame.apply_l(k, &frame.b_conj[j][mu])? - &frame.apply_lbar(j, &frame.b[k][mu])?))
                    .collect::<Result<Vec<_>>>()?;
                by_k.push(cell);
            }
            lambda.push(by_k);
        }
        frame.lambda = lambda;
        frame.verify()?;
        Ok(frame)
    }

    fn verify(&self) -> Result<()> {
        let (n, d) = (self.sig.n(), self.sig.d());
        for j in 0..n {
            for k in 0..n {
                for mu in 0..d {
                    if k > j {
                        let lhs = self.apply_l(j, &self.b[k][mu])?;
                        let rhs = self.apply_l(k, &self.b[j][mu])?;
                        if !lhs.agrees_with(&rhs) {
                            return Err(Error::IntegrabilityViolation { j: j + 1, k: k + 1, mu: mu + 1 });
                        }
                    }
                    if !self.lambda[j][k][mu].conjugate().agrees_with(&-&self.lambda[k][j][mu]) {
                        return Err(Error::AntisymmetryViolation { j: j + 1, k: k + 1, mu: mu + 1 });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn sig(&self) -> VarSig {
        self.sig
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `b^j_mu`, 0-based.
    pub fn b(&self, j: usize, mu: usize) -> &Jet {
        &self.b[j][mu]
    }

    pub fn b_conj(&self, j: usize, mu: usize) -> &Jet {
        &self.b_conj[j][mu]
    }

    /// `d phi_mu / d s_nu`.
    pub fn phi_s(&self, mu: usize, nu: usize) -> &Jet {
        &self.phi_s[mu][nu]
    }

    pub fn det_phi_inv(&self) -> &Jet {
        &self.det_phi_inv
    }

    /// `d/ds_mu b^k_nu`.
    pub fn b_s(&self, k: usize, nu: usize, mu: usize) -> &Jet {
        &self.b_s[k][nu][mu]
    }

    /// `lambda^{j,k}_mu = L_k bbar^j_mu - Lbar_j b^k_mu`.
    pub fn lambda(&self, j: usize, k: usize, mu: usize) -> &Jet {
        &self.lambda[j][k][mu]
    }

    fn check_jet(&self, f: &Jet) -> Result<()> {
        if f.sig() != self.sig || f.order() != self.order {
            return Err(Error::SignatureMismatch("jet does not match the frame".into()));
        }
        Ok(())
    }

    fn apply(&self, f: &Jet, base: usize, coeffs: &[Jet]) -> Jet {
        let n = self.sig.n();
        let mut out = f.derive_index(base);
        for (mu, c) in coeffs.iter().enumerate() {
            let ds = f.derive_index(2 * n + mu);
            if !ds.is_zero() || !ds.is_exact() {
                out = &out - &(c * &ds);
            }
        }
        out
    }

    pub fn apply_l(&self, j: usize, f: &Jet) -> Result<Jet> {
        check_index("j", j, self.sig.n())?;
        self.check_jet(f)?;
        Ok(self.apply(f, self.sig.n() + j, &self.b[j]))
    }

    pub fn apply_lbar(&self, j: usize, f: &Jet) -> Result<Jet> {
        check_index("j", j, self.sig.n())?;
        self.check_jet(f)?;
        Ok(self.apply(f, j, &self.b_conj[j]))
    }

    /// Component of `theta^mu` along a coordinate differential.
    fn theta_component(&self, mu: usize, v: Var) -> Result<Jet> {
        let (n, d) = (self.sig.n(), self.sig.d());
        Ok(match v {
            Var::Z(j) => {
                check_index("j", j, n)?;
                self.b_conj[j][mu].clone()
            }
            Var::Zb(j) => {
                check_index("j", j, n)?;
                self.b[j][mu].clone()
            }
            Var::S(nu) => {
                check_index("nu", nu, d)?;
                if nu == mu {
                    Jet::one(self.sig, self.order)
                } else {
                    Jet::zero(self.sig, self.order)
                }
            }
        })
    }

    /// The pairing `theta^mu(X)`.
    pub fn pair_theta(&self, mu: usize, field: Field) -> Result<Jet> {
        check_index("mu", mu, self.sig.d())?;
        let d = self.sig.d();
        let along = |base: Var, coeffs: &[Jet]| -> Result<Jet> {
            let mut out = self.theta_component(mu, base)?;
            for (nu, c) in coeffs.iter().enumerate().take(d) {
                out = &out - &(c * &self.theta_component(mu, Var::S(nu))?);
            }
            Ok(out)
        };
        match field {
            Field::L(j) => {
                check_index("j", j, self.sig.n())?;
                along(Var::Zb(j), &self.b[j])
            }
            Field::Lbar(j) => {
                check_index("j", j, self.sig.n())?;
                along(Var::Z(j), &self.b_conj[j])
            }
            Field::Coordinate(v) => self.theta_component(mu, v),
        }
    }

    /// Scalar row of `theta^mu` at the origin over `(dz, dzb, ds)`.
    pub fn theta_at_zero(&self, mu: usize) -> Result<Vec<GaussianRational>> {
        self.sig.vars().map(|v| self.theta_component(mu, v)?.eval0()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn frame(n: usize, d: usize, k: u32, phi: &[&str]) -> CrFrame {
        CrFrame::build(&ManifoldSpec::parse(n, d, k, phi, None).unwrap()).unwrap()
    }

    fn jet(f: &CrFrame, text: &str) -> Jet {
        parse_expr(text, f.sig(), f.order()).unwrap()
    }

    #[test]
    fn sphere_frame() {
        let f = frame(1, 1, 6, &["z1*zb1"]);
        assert!(f.b(0, 0).agrees_with(&jet(&f, "i*z1")));
        assert!(f.lambda(0, 0, 0).agrees_with(&jet(&f, "-2*i")));
        let s = jet(&f, "s1");
        assert!(f.apply_l(0, &s).unwrap().agrees_with(&jet(&f, "-i*z1")));
        assert!(f.apply_lbar(0, &s).unwrap().agrees_with(&jet(&f, "i*zb1")));
        assert!(f.apply_l(0, &jet(&f, "z1")).unwrap().is_zero());
        assert!(f.apply_lbar(0, &jet(&f, "zb1")).unwrap().is_zero());
        assert!(f.apply_l(0, &jet(&f, "7/3")).unwrap().is_zero());
        assert!(matches!(f.apply_l(1, &s), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn flat_frame_is_trivial() {
        let f = frame(2, 2, 4, &["0", "0"]);
        for j in 0..2 {
            for mu in 0..2 {
                assert!(f.b(j, mu).is_zero());
                for k in 0..2 {
                    assert!(f.lambda(j, k, mu).is_zero());
                }
            }
        }
        assert!(f.pair_theta(0, Field::Coordinate(Var::S(0))).unwrap().agrees_with(&jet(&f, "1")));
        assert!(f.pair_theta(0, Field::Coordinate(Var::S(1))).unwrap().is_zero());
    }

    #[test]
    fn c3_frame_matches_series() {
        let f = frame(1, 2, 8, &["s1*z1*zb1", "s2*z1*zb1"]);
        // i s1 z / (1 + i z zb) = i s1 z * sum (-i z zb)^k
        let mut expected = jet(&f, "0");
        let u = jet(&f, "-i*z1*zb1");
        let mut p = jet(&f, "1");
        for _ in 0..4 {
            expected = &expected + &(&jet(&f, "i*s1*z1") * &p);
            p = &p * &u;
        }
        assert!(f.b(0, 0).agrees_with(&expected));
        assert!(f.b(0, 0).bound() >= 7);
    }

    #[test]
    fn hypersurface_closed_form() {
        let f = frame(2, 1, 6, &["z1*zb1 + s1*z1*zb2 + s1*z2*zb1 + s1^2*z1*zb1"]);
        let phi = jet(&f, "z1*zb1 + s1*z1*zb2 + s1*z2*zb1 + s1^2*z1*zb1");
        let denom = (&jet(&f, "1") + &phi.derive(Var::S(0)).unwrap().mul_i()).reciprocal().unwrap();
        for j in 0..2 {
            let closed = (&phi.derive(Var::Zb(j)).unwrap() * &denom).mul_i();
            assert!(f.b(j, 0).agrees_with(&closed));
        }
    }

    #[test]
    fn theta_annihilates_frame() {
        let f = frame(2, 2, 5, &["z1*zb1 + s2*z2*zb2", "z1*zb2 + z2*zb1 + s1*z1*zb1"]);
        for mu in 0..2 {
            for j in 0..2 {
                assert!(f.pair_theta(mu, Field::L(j)).unwrap().is_zero());
                assert!(f.pair_theta(mu, Field::Lbar(j)).unwrap().is_zero());
            }
        }
        assert!(matches!(f.pair_theta(2, Field::L(0)), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn lbar_is_conjugate_of_l() {
        let f = frame(1, 1, 6, &["z1*zb1 + s1*z1^2*zb1 + s1*z1*zb1^2"]);
        let g = jet(&f, "s1^2*z1 + i*zb1*s1 + (1 + 2*i)*z1*zb1");
        let lhs = f.apply_lbar(0, &g).unwrap();
        let rhs = f.apply_l(0, &g.conjugate()).unwrap().conjugate();
        assert!(lhs.agrees_with(&rhs));
    }
}
