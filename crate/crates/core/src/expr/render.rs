use num_traits::Zero;

use crate::jet::{GaussianRational, Jet, MultiIndex, Var, VarSig};

fn monomial_str(sig: VarSig, m: &MultiIndex) -> String {
    // s-block first, then z, then zb: "s1*z1^2*zb1^2"
    let n = sig.n();
    let order = (2 * n..sig.nvars()).chain(0..2 * n);
    let mut parts = Vec::new();
    for idx in order {
        let e = m.get(idx);
        if e == 0 {
            continue;
        }
        let name = sig.var_name(sig.var_at(idx));
        parts.push(if e == 1 { name } else { format!("{name}^{e}") });
    }
    parts.join("*")
}

/// `(negative, body)` so the caller can join terms with ` + ` / ` - `.
fn term_str(sig: VarSig, m: &MultiIndex, c: &GaussianRational) -> (bool, String) {
    let mono = monomial_str(sig, m);
    if !c.is_real() && !c.re().is_zero() {
        return if mono.is_empty() {
            (false, c.to_string())
        } else {
            (false, format!("({c})*{mono}"))
        };
    }
    let negative = c.is_negative_lead();
    let mag = if negative { -c } else { c.clone() };
    let coeff = mag.to_string();
    let body = match (mono.is_empty(), mag.is_one()) {
        (true, _) => coeff,
        (false, true) => mono,
        (false, false) => format!("{coeff}*{mono}"),
    };
    (negative, body)
}

fn join_terms<'a>(sig: VarSig, terms: impl Iterator<Item = (&'a MultiIndex, &'a GaussianRational)>) -> String {
    let mut out = String::new();
    for (k, (m, c)) in terms.enumerate() {
        let (negative, body) = term_str(sig, m, c);
        match (k, negative) {
            (0, false) => out.push_str(&body),
            (0, true) => {
                out.push('-');
                out.push_str(&body);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&body);
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Every stored term in graded order, e.g. `-2*i*s1 + 6*i*s1*z1^2*zb1^2`.
/// The output parses back to the same jet.
pub fn render_jet(f: &Jet) -> String {
    join_terms(f.sig(), f.terms())
}

/// Terms up to `max_degree`, followed by ` + ...` when the jet is a
/// truncated nonzero series or terms were hidden.
pub fn render_jet_display(f: &Jet, max_degree: u32) -> String {
    let shown = f.terms().take_while(|(m, _)| m.degree() <= max_degree);
    let mut out = join_terms(f.sig(), shown);
    let hidden = f.max_degree() > max_degree;
    if hidden || (!f.is_exact() && !f.is_zero()) {
        out.push_str(" + ...");
    }
    out
}

/// A coordinate name as used in the input grammar.
pub fn render_var(sig: VarSig, v: Var) -> String {
    sig.var_name(v)
}

pub fn render_value(c: &GaussianRational) -> String {
    c.to_string()
}
