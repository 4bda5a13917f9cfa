#![allow(dead_code)]

use crjet::{GaussianRational, Jet, ManifoldSpec, MultiIndex, Validity, VarSig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random rational with numerator and denominator bounded by 5 in size.
pub fn small_rational(rng: &mut impl Rng) -> (i64, i64) {
    (rng.gen_range(-5..=5), rng.gen_range(1..=5))
}

/// Swap the `z` and `zb` blocks of a monomial.
pub fn conj_index(m: &MultiIndex, n: usize) -> MultiIndex {
    let e = m.exps();
    let mut out = Vec::with_capacity(e.len());
    out.extend_from_slice(&e[n..2 * n]);
    out.extend_from_slice(&e[..n]);
    out.extend_from_slice(&e[2 * n..]);
    MultiIndex::new(out)
}

/// A real polynomial of degree 2..=3 with no constant or linear part.
/// Monomials come in conjugate pairs with conjugate coefficients.
pub fn random_real_poly(rng: &mut impl Rng, sig: VarSig, order: u32, pairs: usize) -> Jet {
    let n = sig.n();
    let mut pool: Vec<MultiIndex> =
        [2, 3].iter().flat_map(|&deg| MultiIndex::all_of_degree(sig.nvars(), deg)).collect();
    pool.shuffle(rng);
    let mut terms = Vec::new();
    for m in pool.into_iter().take(pairs) {
        let mc = conj_index(&m, n);
        if mc == m {
            let (a, b) = small_rational(rng);
            terms.push((m, GaussianRational::from_ratio(a, b)));
        } else {
            let c = GaussianRational::from_parts(small_rational(rng), small_rational(rng));
            terms.push((mc, c.conj()));
            terms.push((m, c));
        }
    }
    Jet::from_terms(sig, order, Validity::Exact, terms)
}

/// A seeded corpus of random manifolds with `n, d <= 2`.
pub fn random_corpus(seed: u64, count: usize, order: u32) -> Vec<ManifoldSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=2);
            let d = rng.gen_range(1..=2);
            let sig = VarSig::new(n, d).unwrap();
            let phi = (0..d)
                .map(|_| {
                    let pairs = rng.gen_range(1..=4);
                    random_real_poly(&mut rng, sig, order, pairs)
                })
                .collect();
            ManifoldSpec::from_jets(phi, None).unwrap()
        })
        .collect()
}
