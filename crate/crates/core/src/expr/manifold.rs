use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::expr::parse::parse_expr;
use crate::expr::render::render_jet;
use crate::jet::{GaussianRational, Jet, MultiIndex, Var, VarSig};

/// A generic submanifold `Im w = phi(z, zb, Re w)` through the origin,
/// with optional factored metadata `phi_mu = s^gamma_mu * inner_mu`.
#[derive(Clone, Debug)]
pub struct ManifoldSpec {
    sig: VarSig,
    order: u32,
    phi_src: Vec<String>,
    phi: Vec<Jet>,
    gamma: Option<Vec<MultiIndex>>,
    inner: Option<Vec<Jet>>,
}

impl ManifoldSpec {
    /// Parse defining functions (one per codimension) and validate them.
    pub fn parse(n: usize, d: usize, order: u32, phi: &[&str], gamma: Option<Vec<Vec<u32>>>) -> Result<Self> {
        let sig = VarSig::new(n, d)?;
        if phi.len() != d {
            return Err(Error::ArityMismatch { expected: d, found: phi.len() });
        }
        let jets = phi
            .iter()
            .map(|text| parse_expr(text, sig, order).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::build(sig, order, jets, gamma)?;
        out.phi_src = phi.iter().map(|s| s.trim().to_string()).collect();
        Ok(out)
    }

    pub fn from_jets(phi: Vec<Jet>, gamma: Option<Vec<Vec<u32>>>) -> Result<Self> {
        let Some(first) = phi.first() else {
            return Err(Error::ArityMismatch { expected: 1, found: 0 });
        };
        let (sig, order) = (first.sig(), first.order());
        if sig.is_ambient() || phi.len() != sig.d() {
            return Err(Error::ArityMismatch { expected: sig.d(), found: phi.len() });
        }
        Self::build(sig, order, phi, gamma)
    }

    fn build(sig: VarSig, order: u32, phi: Vec<Jet>, gamma: Option<Vec<Vec<u32>>>) -> Result<Self> {
        for (mu, f) in phi.iter().enumerate() {
            let key = format!("phi{}", mu + 1);
            if f.sig() != sig || f.order() != order {
                return Err(Error::SignatureMismatch(format!("{key} has the wrong signature")));
            }
            if !f.conjugate().agrees_with(f) {
                return Err(Error::RealityViolation { key });
            }
            if f.bound() < 1 {
                return Err(Error::BasePointViolation {
                    key,
                    msg: "work order too low to certify phi(0) = 0 and grad phi(0) = 0".into(),
                });
            }
            if let Some(m) = f.terms().map(|(m, _)| m).find(|m| m.degree() <= 1) {
                let msg = if m.degree() == 0 { "phi(0) != 0" } else { "grad phi(0) != 0" };
                return Err(Error::BasePointViolation { key, msg: msg.into() });
            }
        }
        let (gamma, inner) = match gamma {
            None => (None, None),
            Some(g) => {
                if g.len() != sig.d() {
                    return Err(Error::InvalidFactoredForm(format!(
                        "expected {} gamma vectors, got {}",
                        sig.d(),
                        g.len()
                    )));
                }
                let mut gammas = Vec::with_capacity(g.len());
                let mut inner = Vec::with_capacity(g.len());
                for (mu, exps) in g.into_iter().enumerate() {
                    if exps.len() != sig.d() {
                        return Err(Error::InvalidFactoredForm(format!(
                            "gamma{} must have {} entries",
                            mu + 1,
                            sig.d()
                        )));
                    }
                    let gamma = MultiIndex::new(exps);
                    let mut full = vec![0; 2 * sig.n()];
                    full.extend_from_slice(gamma.exps());
                    let quotient = phi[mu].divide_monomial(&MultiIndex::new(full)).ok_or_else(|| {
                        Error::InvalidFactoredForm(format!("phi{} is not divisible by s^gamma{}", mu + 1, mu + 1))
                    })?;
                    gammas.push(gamma);
                    inner.push(quotient);
                }
                (Some(gammas), Some(inner))
            }
        };
        let phi_src = phi.iter().map(render_jet).collect();
        Ok(Self { sig, order, phi_src, phi, gamma, inner })
    }

    pub fn sig(&self) -> VarSig {
        self.sig
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn phi(&self) -> &[Jet] {
        &self.phi
    }

    pub fn phi_src(&self) -> &[String] {
        &self.phi_src
    }

    /// Exponent vectors `gamma^mu` of the factored form, if given.
    pub fn gamma(&self) -> Option<&[MultiIndex]> {
        self.gamma.as_deref()
    }

    /// Inner functions `phi_mu / s^gamma_mu`, if a factored form was given.
    pub fn inner(&self) -> Option<&[Jet]> {
        self.inner.as_deref()
    }
}

/// A CR map `H` from a source manifold into `{rho' = 0}` in `C^N'`.
#[derive(Clone, Debug)]
pub struct MapSpec {
    source: ManifoldSpec,
    target: VarSig,
    rho_src: Vec<String>,
    rho: Vec<Jet>,
    h_src: Vec<String>,
    h: Vec<Jet>,
}

impl MapSpec {
    pub fn parse(source: ManifoldSpec, rho: &[&str], h: &[&str]) -> Result<Self> {
        if h.is_empty() || rho.is_empty() {
            return Err(Error::ArityMismatch { expected: 1, found: 0 });
        }
        let target = VarSig::ambient(h.len())?;
        let order = source.order();
        let rho_jets = rho
            .iter()
            .map(|t| parse_expr(t, target, order).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        let h_jets = h
            .iter()
            .map(|t| parse_expr(t, source.sig(), order).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::from_jets(source, rho_jets, h_jets)?;
        out.rho_src = rho.iter().map(|s| s.trim().to_string()).collect();
        out.h_src = h.iter().map(|s| s.trim().to_string()).collect();
        Ok(out)
    }

    pub fn from_jets(source: ManifoldSpec, rho: Vec<Jet>, h: Vec<Jet>) -> Result<Self> {
        let target = VarSig::ambient(h.len())?;
        for r in &rho {
            if r.sig() != target || r.order() != source.order() {
                return Err(Error::SignatureMismatch("rho' must live over the target coordinates".into()));
            }
        }
        for (l, comp) in h.iter().enumerate() {
            if comp.sig() != source.sig() || comp.order() != source.order() {
                return Err(Error::SignatureMismatch("H must live over the source coordinates".into()));
            }
            if !comp.eval0()?.is_zero() {
                return Err(Error::NonzeroConstantTermInImage(l));
            }
        }
        let rho_src = rho.iter().map(render_jet).collect();
        let h_src = h.iter().map(render_jet).collect();
        Ok(Self { source, target, rho_src, rho, h_src, h })
    }

    /// The identity map of `M` into itself, with
    /// `rho'_mu = (W_mu - Wb_mu)/(2i) - phi_mu(Z, Zb, (W + Wb)/2)` and
    /// `H = (z, s + i*phi)`.
    pub fn identity(source: &ManifoldSpec) -> Result<Self> {
        let sig = source.sig();
        let (n, d, order) = (sig.n(), sig.d(), source.order());
        let target = VarSig::ambient(n + d)?;
        let tvar = |v: Var| Jet::var(target, order, v).expect("target index in range");
        let half = GaussianRational::from_ratio(1, 2);
        let mut images = Vec::with_capacity(sig.nvars());
        for j in 0..n {
            images.push(tvar(Var::Z(j)));
        }
        for j in 0..n {
            images.push(tvar(Var::Zb(j)));
        }
        for nu in 0..d {
            images.push((&tvar(Var::Z(n + nu)) + &tvar(Var::Zb(n + nu))).scale(&half));
        }
        let minus_half_i = GaussianRational::from_parts((0, 1), (-1, 2));
        let mut rho = Vec::with_capacity(d);
        for mu in 0..d {
            let w = &tvar(Var::Z(n + mu)) - &tvar(Var::Zb(n + mu));
            let im_part = w.scale(&minus_half_i);
            rho.push(&im_part - &source.phi()[mu].substitute(&images)?);
        }
        let mut h = Vec::with_capacity(n + d);
        for j in 0..n {
            h.push(Jet::var(sig, order, Var::Z(j))?);
        }
        for mu in 0..d {
            h.push(&Jet::var(sig, order, Var::S(mu))? + &source.phi()[mu].mul_i());
        }
        Self::from_jets(source.clone(), rho, h)
    }

    pub fn source(&self) -> &ManifoldSpec {
        &self.source
    }

    pub fn target(&self) -> VarSig {
        self.target
    }

    pub fn rho(&self) -> &[Jet] {
        &self.rho
    }

    pub fn h(&self) -> &[Jet] {
        &self.h
    }

    pub fn rho_src(&self) -> &[String] {
        &self.rho_src
    }

    pub fn h_src(&self) -> &[String] {
        &self.h_src
    }
}

/// Contents of a manifold description file.
#[derive(Clone, Debug)]
pub struct InputFile {
    pub manifold: ManifoldSpec,
    pub map: Option<MapSpec>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Manifold,
    Map,
}

struct Entry {
    line: usize,
    value: String,
}

/// Parse the line-oriented manifold format:
///
/// ```text
/// # comment
/// [manifold]
/// n = 1
/// d = 2
/// order = 8
/// phi1 = s1*z1*zb1
/// phi2 = s2*z1*zb1
/// gamma1 = 1,0        # optional, all or none
/// gamma2 = 0,1
/// [map]               # optional
/// rho1 = ...          # over Zp1.., Zbp1..
/// H1 = ...            # over z, zb, s
/// ```
pub fn parse_input(text: &str) -> Result<InputFile> {
    let mut section = Section::None;
    let mut manifold: BTreeMap<String, Entry> = BTreeMap::new();
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    let mut saw_map = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            section = match content {
                "[manifold]" if section == Section::None => Section::Manifold,
                "[map]" if section == Section::Manifold && !saw_map => {
                    saw_map = true;
                    Section::Map
                }
                _ => return Err(Error::Format { line, msg: format!("unexpected section header {content}") }),
            };
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Format { line, msg: "expected 'key = value'".into() });
        };
        let key = key.trim().to_string();
        let target = match section {
            Section::None => return Err(Error::Format { line, msg: "key before [manifold] header".into() }),
            Section::Manifold => &mut manifold,
            Section::Map => &mut map,
        };
        if target.contains_key(&key) {
            return Err(Error::Format { line, msg: format!("duplicate key {key}") });
        }
        target.insert(key, Entry { line, value: value.trim().to_string() });
    }
    if section == Section::None {
        return Err(Error::Format { line: 1, msg: "missing [manifold] header".into() });
    }

    let int = |map: &BTreeMap<String, Entry>, key: &str| -> Result<usize> {
        let e = map.get(key).ok_or_else(|| Error::Format { line: 0, msg: format!("missing key {key}") })?;
        e.value
            .parse::<usize>()
            .map_err(|_| Error::Format { line: e.line, msg: format!("{key} must be a nonnegative integer") })
    };
    let n = int(&manifold, "n")?;
    let d = int(&manifold, "d")?;
    let order = int(&manifold, "order")?;
    let order = u32::try_from(order)
        .ok()
        .filter(|&k| k <= 64)
        .ok_or_else(|| Error::Format { line: manifold["order"].line, msg: "order must be at most 64".into() })?;
    if n == 0 || d == 0 || n + d > crate::jet::MAX_DET_SIZE {
        return Err(Error::Format {
            line: manifold["n"].line,
            msg: format!("need n >= 1, d >= 1 and n + d <= {}", crate::jet::MAX_DET_SIZE),
        });
    }

    let mut known: Vec<String> = vec!["n".into(), "d".into(), "order".into()];
    let mut phi = Vec::with_capacity(d);
    for mu in 1..=d {
        let key = format!("phi{mu}");
        let e = manifold.get(&key).ok_or_else(|| Error::Format { line: 0, msg: format!("missing key {key}") })?;
        phi.push(e.value.as_str());
        known.push(key);
    }
    let gamma_keys: Vec<String> = (1..=d).map(|mu| format!("gamma{mu}")).collect();
    let present = gamma_keys.iter().filter(|k| manifold.contains_key(*k)).count();
    let gamma = match present {
        0 => None,
        p if p == d => {
            let mut out = Vec::with_capacity(d);
            for key in &gamma_keys {
                let e = &manifold[key];
                let v = e
                    .value
                    .split(',')
                    .map(|x| x.trim().parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Format { line: e.line, msg: format!("{key} must be comma-separated integers") })?;
                if v.len() != d {
                    return Err(Error::Format { line: e.line, msg: format!("{key} must have {d} entries") });
                }
                out.push(v);
                known.push(key.clone());
            }
            Some(out)
        }
        _ => return Err(Error::Format { line: 0, msg: "give either all gamma keys or none".into() }),
    };
    if let Some((k, e)) = manifold.iter().find(|(k, _)| !known.contains(k)) {
        return Err(Error::Format { line: e.line, msg: format!("unknown key {k}") });
    }
    let manifold = ManifoldSpec::parse(n, d, order, &phi, gamma)?;

    let map = if saw_map {
        let rho = numbered(&map, "rho")?;
        let h = numbered(&map, "H")?;
        if let Some((k, e)) = map.iter().find(|(k, _)| !is_numbered(k, "rho", rho.len()) && !is_numbered(k, "H", h.len())) {
            return Err(Error::Format { line: e.line, msg: format!("unknown key {k}") });
        }
        Some(MapSpec::parse(manifold.clone(), &rho, &h)?)
    } else {
        None
    };
    Ok(InputFile { manifold, map })
}

fn is_numbered(key: &str, prefix: &str, count: usize) -> bool {
    key.strip_prefix(prefix)
        .and_then(|rest| rest.parse::<usize>().ok())
        .is_some_and(|i| i >= 1 && i <= count)
}

fn numbered<'a>(map: &'a BTreeMap<String, Entry>, prefix: &str) -> Result<Vec<&'a str>> {
    let mut out = Vec::new();
    while let Some(e) = map.get(&format!("{prefix}{}", out.len() + 1)) {
        out.push(e.value.as_str());
    }
    if out.is_empty() {
        return Err(Error::Format { line: 0, msg: format!("[map] needs {prefix}1") });
    }
    Ok(out)
}

pub fn load_input(path: impl AsRef<Path>) -> Result<InputFile> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_input(&text)
}

pub fn load_manifold(path: impl AsRef<Path>) -> Result<ManifoldSpec> {
    Ok(load_input(path)?.manifold)
}

pub fn load_map(path: impl AsRef<Path>) -> Result<MapSpec> {
    load_input(path)?.map.ok_or(Error::MissingMapSection)
}
