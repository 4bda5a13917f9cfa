//! Fixtures shared by the benchmarks.

use crjet::{GaussianRational, Jet, ManifoldSpec, MultiIndex, Validity, VarSig};

/// The codimension-two tube `s1 |z|^2, s2 |z|^2` at the given order.
pub fn c3_manifold(order: u32) -> ManifoldSpec {
    ManifoldSpec::parse(1, 2, order, &["s1*z1*zb1", "s2*z1*zb1"], None).expect("valid manifold")
}

/// A Levi-degenerate tube in two complex variables.
pub fn tube_manifold(order: u32) -> ManifoldSpec {
    ManifoldSpec::parse(2, 1, order, &["z1*zb1 + z1^2*zb2 + zb1^2*z2"], None).expect("valid manifold")
}

/// Dense jet with every monomial of degree `<= order` in `sig`, using small
/// integer coefficients.
pub fn dense_jet(sig: VarSig, order: u32) -> Jet {
    let terms = MultiIndex::all_up_to(sig.nvars(), order)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (m, GaussianRational::from_parts(((i % 7) as i64 - 3, 1), ((i % 5) as i64 - 2, 1))));
    Jet::from_terms(sig, order, Validity::Exact, terms)
}
