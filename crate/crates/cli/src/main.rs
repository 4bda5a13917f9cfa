use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crjet::expr::report::{self, Report};
use crjet::expr::{render_jet_display, render_value};
use crjet::nondeg::{finite_order_with, GAMMA_CONVENTION};
use crjet::weights::{log_grid, WeightSequence};
use crjet::{
    load_input, load_manifold, map_finite_order, s_factor, search_multipliers, weak_check_first_codim,
    weak_check_hypersurface, CrFrame, Error, Jet, LieCalculus, ManifoldSpec, MultiIndex, Witness,
};

#[derive(Parser)]
#[command(name = "crjet", version, about = "Exact nondegeneracy analysis of CR submanifolds in graph form")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Emit the structured JSON report instead of text
    #[arg(long)]
    json: bool,
    /// Highest degree printed for jets in text output
    #[arg(long, default_value_t = 6)]
    display_order: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Finite nondegeneracy order at the origin, plus weak checks when a factored form is given
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_order: u32,
        /// Candidate multipliers examined when no finite order is found
        #[arg(long, default_value_t = 64)]
        search_budget: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Coefficients of an iterated Lie derivative of a characteristic form
    Lie {
        file: PathBuf,
        /// Multi-index over the CR directions, e.g. 1,0
        #[arg(long)]
        alpha: String,
        /// Characteristic form index (1-based)
        #[arg(long)]
        mu: usize,
        #[command(flatten)]
        out: Output,
    },
    /// A multiplier determinant D(alphas, r)
    Multiplier {
        file: PathBuf,
        /// Rows separated by ';', entries by ',', e.g. "0;0;1"
        #[arg(long)]
        alphas: String,
        /// Characteristic indices (1-based), e.g. 1,2,1
        #[arg(long)]
        r: String,
        #[command(flatten)]
        out: Output,
    },
    /// Nondegeneracy of the CR map in the [map] section
    Map {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_order: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Diagnostics for a weight sequence
    Weights {
        #[arg(long, value_enum)]
        family: Family,
        /// Family parameter, or the path of a file of values m_k for --family file
        #[arg(long)]
        param: Option<String>,
        #[arg(long, default_value_t = 100)]
        terms: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Gevrey,
    Logpow,
    Const,
    File,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::OrderBudgetExceeded { required, .. } = e {
                eprintln!("rerun with an input order of at least {required}");
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cmd: Command) -> crjet::Result<String> {
    match cmd {
        Command::Analyze { file, max_order, search_budget, out } => analyze(&file, max_order, search_budget, &out),
        Command::Lie { file, alpha, mu, out } => lie(&file, &alpha, mu, &out),
        Command::Multiplier { file, alphas, r, out } => multiplier(&file, &alphas, &r, &out),
        Command::Map { file, max_order, out } => map(&file, max_order, &out),
        Command::Weights { family, param, terms, out } => weights(family, param.as_deref(), terms, &out),
    }
}

fn render_json(doc: &Value) -> String {
    serde_json::to_string_pretty(doc).expect("report serializes") + "\n"
}

fn ranks_line(ranks: &[(u32, usize)], full: usize) -> String {
    let parts: Vec<String> = ranks.iter().map(|(k, r)| format!("{k}:{r}")).collect();
    format!("ranks (k:rank, full = {full}): {}\n", parts.join(" "))
}

fn witness_label(alphas: &[MultiIndex], r: &[usize]) -> String {
    let a: Vec<String> = alphas.iter().map(|a| format!("({a})")).collect();
    let r: Vec<String> = r.iter().map(|r| (r + 1).to_string()).collect();
    format!("D({};({}))", a.join(","), r.join(","))
}

fn s_factor_line(f: &Jet, display: u32) -> String {
    match s_factor(f) {
        Ok(sf) => {
            let beta: Vec<String> = sf.beta.iter().map(u32::to_string).collect();
            let caveat = if sf.truncation_limited { " (certified up to the valid order)" } else { "" };
            format!("s-factor = ({}), remainder = {}{caveat}", beta.join(","), render_jet_display(&sf.remainder, display))
        }
        Err(_) => "s-factor = none (D = 0)".to_string(),
    }
}

fn weak_section(m: &ManifoldSpec, k_max: u32) -> Option<(String, Value)> {
    m.gamma()?;
    let (label, result) = if m.sig().d() == 1 {
        ("hypersurface", weak_check_hypersurface(m, k_max))
    } else {
        ("first codimension", weak_check_first_codim(m, k_max))
    };
    Some(match result {
        Ok(w) => {
            let text = match w.k0 {
                Some(k) => format!("weakly {k}-nondegenerate ({label})\n"),
                None => format!("not weakly nondegenerate up to order {k_max} ({label})\n"),
            };
            let mut v = report::weak(&w);
            v["kind"] = json!(label);
            (text, v)
        }
        Err(e) => {
            let text = format!("weak check ({label}): {e}\n");
            let v = json!({ "kind": label, "error": e.to_string(), "convention": GAMMA_CONVENTION });
            (text, v)
        }
    })
}

fn analyze(file: &PathBuf, k_max: u32, budget: usize, out: &Output) -> crjet::Result<String> {
    let m = load_manifold(file)?;
    let calc = LieCalculus::new(CrFrame::build(&m)?);
    let r = finite_order_with(&calc, k_max)?;
    let searched: Vec<Witness> = if r.k0.is_none() { search_multipliers(&calc, k_max, budget)? } else { Vec::new() };
    let weak = weak_section(&m, k_max);

    if out.json {
        let mut doc = Report::from_nondeg(report::manifold_input(&m, Some(&file.display().to_string())), &r);
        doc.witnesses.extend(searched.iter().map(report::witness));
        doc.diagnostics.insert("search_budget".into(), json!(budget));
        if let Some((_, v)) = weak {
            doc.diagnostics.insert("weak".into(), v);
        }
        return Ok(render_json(&doc.to_json()));
    }
    let mut s = String::new();
    match r.k0 {
        Some(k) => {
            let w = &r.witnesses[0];
            s += &format!("k0 = {k}, witness {} = {}\n", witness_label(&w.alphas, &w.r), render_value(&w.value_at_0));
        }
        None => s += &format!("degenerate up to order {k_max}\n"),
    }
    s += &ranks_line(&r.ranks, r.full_rank);
    if r.k0.is_none() {
        s += &format!("nonzero multipliers among the first {budget} candidates: {}\n", searched.len());
        for w in &searched {
            s += &format!(
                "  {} = {}; value at 0 = {}; {}\n",
                witness_label(&w.alphas, &w.r),
                render_jet_display(&w.det, out.display_order),
                render_value(&w.value_at_0),
                s_factor_line(&w.det, out.display_order)
            );
        }
    }
    if let Some((text, _)) = weak {
        s += &text;
    }
    Ok(s)
}

fn parse_alpha(text: &str, n: usize) -> crjet::Result<MultiIndex> {
    let text = text.trim();
    if text == "0" {
        return Ok(MultiIndex::zero(n));
    }
    if let Some(j) = text.strip_prefix('e').and_then(|j| j.parse::<usize>().ok()) {
        if j == 0 || j > n {
            return Err(Error::IndexOutOfRange(format!("direction e{j} not in 1..={n}")));
        }
        return Ok(MultiIndex::unit(n, j - 1));
    }
    let exps = text
        .split(',')
        .map(|e| e.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidParameter(format!("bad multi-index {text:?}")))?;
    if exps.len() != n {
        return Err(Error::ArityMismatch { expected: n, found: exps.len() });
    }
    Ok(MultiIndex::new(exps))
}

fn parse_indices(text: &str, d: usize) -> crjet::Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            let r: usize = t.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad index {t:?}")))?;
            if r == 0 || r > d {
                return Err(Error::IndexOutOfRange(format!("r = {r} not in 1..={d}")));
            }
            Ok(r - 1)
        })
        .collect()
}

fn lie(file: &PathBuf, alpha: &str, mu: usize, out: &Output) -> crjet::Result<String> {
    let m = load_manifold(file)?;
    let sig = m.sig();
    let alpha = parse_alpha(alpha, sig.n())?;
    if mu == 0 || mu > sig.d() {
        return Err(Error::IndexOutOfRange(format!("mu = {mu} not in 1..={}", sig.d())));
    }
    let calc = LieCalculus::new(CrFrame::build(&m)?);
    let row = calc.lie_power(&alpha, mu - 1)?;
    if out.json {
        let mut doc = Report::new(report::manifold_input(&m, Some(&file.display().to_string())));
        doc.diagnostics.insert("lie_row".into(), report::lie_row(&row));
        return Ok(render_json(&doc.to_json()));
    }
    let mut s = String::new();
    for (tau, t) in row.t.iter().enumerate() {
        s += &format!("T{} = {}\n", tau + 1, render_jet_display(t, out.display_order));
    }
    for (j, a) in row.a.iter().enumerate() {
        s += &format!("A{} = {}\n", j + 1, render_jet_display(a, out.display_order));
    }
    Ok(s)
}

fn multiplier(file: &PathBuf, alphas: &str, r: &str, out: &Output) -> crjet::Result<String> {
    let m = load_manifold(file)?;
    let sig = m.sig();
    let alphas = alphas.split(';').map(|a| parse_alpha(a, sig.n())).collect::<crjet::Result<Vec<_>>>()?;
    let r = parse_indices(r, sig.d())?;
    if alphas.len() != sig.big_n() {
        return Err(Error::ArityMismatch { expected: sig.big_n(), found: alphas.len() });
    }
    if r.len() != alphas.len() {
        return Err(Error::ArityMismatch { expected: alphas.len(), found: r.len() });
    }
    let calc = LieCalculus::new(CrFrame::build(&m)?);
    let det = calc.multiplier_det(&alphas, &r)?;
    let value = det.eval0()?;
    if out.json {
        let mut doc = Report::new(report::manifold_input(&m, Some(&file.display().to_string())));
        match s_factor(&det) {
            Ok(sf) => doc.witnesses.push(report::witness(&Witness {
                alphas: alphas.clone(),
                r: r.clone(),
                det: det.clone(),
                value_at_0: value.clone(),
                s_factor: sf,
            })),
            Err(_) => {
                doc.diagnostics.insert("D".into(), report::jet(&det));
                doc.diagnostics.insert("value_at_0".into(), report::gaussian(&value));
            }
        }
        return Ok(render_json(&doc.to_json()));
    }
    Ok(format!(
        "{} = {}\nvalue at 0 = {}\n{}\n",
        witness_label(&alphas, &r),
        render_jet_display(&det, out.display_order),
        render_value(&value),
        s_factor_line(&det, out.display_order)
    ))
}

fn map(file: &PathBuf, k_max: u32, out: &Output) -> crjet::Result<String> {
    let map = load_input(file)?.map.ok_or(Error::MissingMapSection)?;
    let r = map_finite_order(&map, k_max)?;
    if out.json {
        let doc = Report::from_map(report::map_input(&map, Some(&file.display().to_string())), &r);
        return Ok(render_json(&doc.to_json()));
    }
    let mut s = match r.k0 {
        Some(k) => format!("map k0 = {k}\n"),
        None => format!("map degenerate up to order {k_max}\n"),
    };
    s += &ranks_line(&r.ranks, r.full_rank);
    Ok(s)
}

const H_SAMPLES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 1.0];

fn weights(family: Family, param: Option<&str>, terms: usize, out: &Output) -> crjet::Result<String> {
    let number = |name: &str| -> crjet::Result<f64> {
        let p = param.ok_or_else(|| Error::InvalidParameter(format!("--param is required for {name}")))?;
        p.trim().parse().map_err(|_| Error::InvalidParameter(format!("--param {p:?} is not a number")))
    };
    let (w, name) = match family {
        Family::Gevrey => (WeightSequence::gevrey(number("gevrey")?)?, "gevrey"),
        Family::Logpow => (WeightSequence::log_pow(number("logpow")?)?, "logpow"),
        Family::Const => (WeightSequence::constant(), "const"),
        Family::File => {
            let path = param.ok_or_else(|| Error::InvalidParameter("--param must name a file".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
            (WeightSequence::parse_values(&text)?, "file")
        }
    };
    let regular = w.check_regular(terms);
    let quasi = w.quasianalytic_diag(terms);
    let samples: Vec<(f64, crjet::Result<f64>)> = H_SAMPLES.iter().map(|&t| (t, w.assoc_weight(t))).collect();
    let grid = log_grid(0.1, 1.0, 200);
    let recovered: Vec<crjet::Result<_>> = (0..3).map(|k| w.recover_mk(k, &grid)).collect();

    if out.json {
        let mut doc = Report::new(json!({ "family": name, "param": param, "terms": terms }));
        let err = |e: &Error| json!({ "error": e.to_string() });
        let d = &mut doc.diagnostics;
        d.insert("regularity".into(), regular.as_ref().map_or_else(err, report::regularity));
        d.insert("quasianalytic".into(), quasi.as_ref().map_or_else(err, report::quasianalytic));
        d.insert(
            "h_samples".into(),
            Value::Array(
                samples
                    .iter()
                    .map(|(t, h)| match h {
                        Ok(h) => json!({ "t": report::float(*t), "h": report::float(*h) }),
                        Err(e) => json!({ "t": report::float(*t), "error": e.to_string() }),
                    })
                    .collect(),
            ),
        );
        d.insert(
            "recovered_m".into(),
            Value::Array(recovered.iter().map(|r| r.as_ref().map_or_else(err, report::recovered)).collect()),
        );
        return Ok(render_json(&doc.to_json()));
    }

    let pass = |b: bool| if b { "pass" } else { "fail" };
    let mut s = format!("weight sequence: {name}{}\n", param.map(|p| format!(" ({p})")).unwrap_or_default());
    match &regular {
        Ok(r) => {
            s += &format!("regularity (checked for k <= {}):\n", r.k_range);
            s += &format!("  M1 {}: log m0 = {}, log m1 = {}\n", pass(r.m1.pass), r.m1.log_m0, r.m1.log_m1);
            s += &format!("  M2 {}: sup (m_(k+1)/m_k)^(1/k) = {:.6} at k = {}\n", pass(r.m2.pass), r.m2.sup, r.m2.argmax);
            match r.m3.first_violation {
                None => s += "  M3 pass: log-convex\n",
                Some(k) => s += &format!("  M3 fail: convexity violated at k = {k}\n"),
            }
            s += &format!(
                "  M4 {}: m_k^(1/k) = {:.6} at k = {}, {:.6} at k = {}\n",
                pass(r.m4.pass),
                r.m4.root_at_half,
                r.k_range / 2,
                r.m4.root_at_end,
                r.k_range
            );
        }
        Err(e) => s += &format!("regularity: {e}\n"),
    }
    match &quasi {
        Ok(q) => {
            s += &format!(
                "quasianalyticity sums: S_{} = {:.6}, S_{} = {:.6}, S_{} = {:.6}, increment ratio = {:.4} ({} trend)\n",
                q.terms,
                q.s_k,
                q.terms / 2,
                q.s_half,
                q.terms / 4,
                q.s_quarter,
                q.increment_ratio,
                q.trend.as_str()
            );
            if let Some(c) = &q.classification {
                let verdict = if c.quasianalytic { "quasianalytic" } else { "non-quasianalytic" };
                s += &format!("classified {verdict} (closed form: {})\n", c.reason);
            }
        }
        Err(e) => s += &format!("quasianalyticity: {e}\n"),
    }
    for (t, h) in &samples {
        match h {
            Ok(h) => s += &format!("h({t}) = {h:.9e}\n"),
            Err(e) => s += &format!("h({t}): {e}\n"),
        }
    }
    for (k, r) in recovered.iter().enumerate() {
        match r {
            Ok(r) => s += &format!("recovered m_{k} = {:.6} (grid of {} points)\n", r.value, r.grid_points),
            Err(e) => s += &format!("recovered m_{k}: {e}\n"),
        }
    }
    Ok(s)
}
