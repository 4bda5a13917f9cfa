//! Structured (JSON) reports. Computed numbers are wrapped as
//! `{"value": .., "provenance": "exact" | "float"}`; structural indices
//! (orders `k`, multi-index exponents, 1-based characteristic indices) are
//! plain integers.

use serde_json::{json, Map, Value};

use crate::expr::render::{render_jet, render_value};
use crate::expr::{ManifoldSpec, MapSpec};
use crate::jet::{GaussianRational, Jet};
use crate::lie::LieRow;
use crate::nondeg::{MapNondegReport, NondegReport, SFactor, WeakReport, Witness};
use crate::weights::{Comparison, QuasiDiag, Recovered, Regularity};

pub fn exact(v: impl Into<Value>) -> Value {
    json!({ "value": v.into(), "provenance": "exact" })
}

/// Non-finite values serialize as strings (`"inf"`, `"-inf"`, `"nan"`).
pub fn float(x: f64) -> Value {
    let v = if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    };
    json!({ "value": v, "provenance": "float" })
}

pub fn gaussian(c: &GaussianRational) -> Value {
    exact(render_value(c))
}

pub fn jet(f: &Jet) -> Value {
    json!({ "value": render_jet(f), "provenance": "exact", "valid": f.valid().to_string() })
}

/// Top-level report document.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub input: Value,
    pub ranks: Vec<(u32, usize)>,
    pub k0: Option<u32>,
    pub witnesses: Vec<Value>,
    pub diagnostics: Map<String, Value>,
}

impl Report {
    pub fn new(input: Value) -> Self {
        Self { input, ..Self::default() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "input": self.input,
            "ranks": ranks(&self.ranks),
            "k0": self.k0.map(exact),
            "witnesses": self.witnesses,
            "diagnostics": self.diagnostics,
        })
    }

    pub fn from_nondeg(input: Value, r: &NondegReport) -> Self {
        let mut report = Self::new(input);
        report.ranks = r.ranks.clone();
        report.k0 = r.k0;
        report.witnesses = r.witnesses.iter().map(witness).collect();
        report.diagnostics.insert("k_max".into(), json!(r.k_max));
        report.diagnostics.insert("full_rank".into(), exact(r.full_rank));
        let verdict = match r.k0 {
            Some(k) => format!("{k}-nondegenerate"),
            None => format!("degenerate up to order {}", r.k_max),
        };
        report.diagnostics.insert("verdict".into(), json!(verdict));
        report
    }

    pub fn from_map(input: Value, r: &MapNondegReport) -> Self {
        let mut report = Self::new(input);
        report.ranks = r.ranks.clone();
        report.k0 = r.k0;
        report.diagnostics.insert("k_max".into(), json!(r.k_max));
        report.diagnostics.insert("full_rank".into(), exact(r.full_rank));
        report
    }
}

pub fn ranks(r: &[(u32, usize)]) -> Value {
    Value::Array(r.iter().map(|&(k, rank)| json!({ "k": k, "rank": exact(rank) })).collect())
}

pub fn manifold_input(m: &ManifoldSpec, file: Option<&str>) -> Value {
    let mut obj = json!({
        "n": m.sig().n(),
        "d": m.sig().d(),
        "order": m.order(),
        "phi": m.phi_src(),
    });
    if let Some(g) = m.gamma() {
        obj["gamma"] = json!(g.iter().map(|m| m.exps().to_vec()).collect::<Vec<_>>());
    }
    if let Some(f) = file {
        obj["file"] = json!(f);
    }
    obj
}

pub fn map_input(map: &MapSpec, file: Option<&str>) -> Value {
    let mut obj = manifold_input(map.source(), file);
    obj["map"] = json!({ "rho": map.rho_src(), "H": map.h_src() });
    obj
}

pub fn s_factor(sf: &SFactor) -> Value {
    json!({
        "beta": exact(sf.beta.clone()),
        "remainder": jet(&sf.remainder),
        "truncation_limited": sf.truncation_limited,
    })
}

pub fn witness(w: &Witness) -> Value {
    json!({
        "alphas": w.alphas.iter().map(|a| a.exps().to_vec()).collect::<Vec<_>>(),
        "r": w.r.iter().map(|r| r + 1).collect::<Vec<_>>(),
        "value_at_0": gaussian(&w.value_at_0),
        "s_factor": s_factor(&w.s_factor),
        "D": jet(&w.det),
    })
}

pub fn weak(w: &WeakReport) -> Value {
    json!({
        "k_max": w.k_max,
        "ranks": ranks(&w.ranks),
        "vanishing": w.vanishing.iter().map(|&(k, ok)| json!({ "k": k, "holds": ok })).collect::<Vec<_>>(),
        "k0": w.k0.map(exact),
        "convention": w.convention,
    })
}

pub fn lie_row(row: &LieRow) -> Value {
    json!({
        "alpha": row.alpha.exps(),
        "mu": row.mu + 1,
        "T": row.t.iter().map(jet).collect::<Vec<_>>(),
        "A": row.a.iter().map(jet).collect::<Vec<_>>(),
    })
}

pub fn regularity(r: &Regularity) -> Value {
    json!({
        "k_range": r.k_range,
        "M1": { "pass": r.m1.pass, "log_m0": float(r.m1.log_m0), "log_m1": float(r.m1.log_m1) },
        "M2": { "pass": r.m2.pass, "sup": float(r.m2.sup), "argmax": r.m2.argmax },
        "M3": { "pass": r.m3.pass, "first_violation": r.m3.first_violation },
        "M4": {
            "pass": r.m4.pass,
            "root_at_half": float(r.m4.root_at_half),
            "root_at_end": float(r.m4.root_at_end),
            "nondecreasing": r.m4.nondecreasing,
        },
    })
}

pub fn quasianalytic(q: &QuasiDiag) -> Value {
    json!({
        "terms": q.terms,
        "S_K": float(q.s_k),
        "S_half": float(q.s_half),
        "S_quarter": float(q.s_quarter),
        "increment_ratio": float(q.increment_ratio),
        "trend": q.trend.as_str(),
        "classification": q.classification.as_ref().map(|c| json!({
            "quasianalytic": c.quasianalytic,
            "reason": c.reason,
        })),
    })
}

pub fn recovered(r: &Recovered) -> Value {
    json!({
        "k": r.k,
        "value": float(r.value),
        "t_best": float(r.t_best),
        "grid_points": r.grid_points,
    })
}

pub fn comparison(c: &Comparison) -> Value {
    json!({
        "k_range": c.k_range,
        "sup": float(c.sup),
        "verdict": if c.growing { "growing over range" } else { "bounded over range" },
    })
}
