//! Command line front end.
//!
//! [`run`] parses arguments, dispatches, and renders either a short text
//! form or a JSON [`ReportDocument`]. Exit codes: 0 ok, 1 usage, 2 group
//! validation failure, 3 computation error.

use std::collections::BTreeMap;
use std::path::Path;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{AlgVector, StratifiedAlgebra};
use crate::blowup::{provafis_probe, pullback_at, tangent_limit, translate_dilate_pullback, TangentKind, TangentLimit};
use crate::error::{Error, Result};
use crate::fields::{apply_field, realize_left_invariant, SublevelSet};
use crate::group::{Chart, Group};
use crate::measure::{
    density_scan, dyadic_radii, haar_scaling_check, BallBox, Direction, MeasureOptions, QuadratureSpec,
};
use crate::nonneg::NonnegVerdict;
use crate::presets;
use crate::ring::{format_rational, parse_rational, parse_rational_list, rational_to_f64, Rational};
use crate::sets::parse_set;
use crate::span::{
    ad_orbit_span, classify_vertical_halfspace, find_escaping_adjoint, invariant_directions, iterated_bracket_span,
    HalfspaceSpec,
};
use crate::subspace::Subspace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "carnot",
    version,
    about = "Exact and numerical computations in Carnot groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Preset (engel, heisenberg1, abelian:<n>) or path to a group spec JSON file.
    #[arg(long, global = true, default_value = "engel")]
    group: String,

    /// Override the coordinate chart (first|second).
    #[arg(long, global = true)]
    coords: Option<String>,

    /// Emit a JSON report on standard output.
    #[arg(long, global = true)]
    json: bool,

    /// Emit CSV tables where available (density, blowup probes).
    #[arg(long, global = true)]
    csv: bool,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Comma separated radii (default 1,1/2,...,1/64).
    #[arg(long, global = true, allow_hyphen_values = true)]
    radii: Option<String>,

    #[arg(long = "quad-order", global = true, default_value_t = 8)]
    quad_order: usize,

    #[arg(long, global = true, default_value_t = 4)]
    subdiv: usize,

    #[arg(long = "mc-samples", global = true, default_value_t = 1_000_000)]
    mc_samples: usize,

    /// Accepted number of standard errors in Monte Carlo checks.
    #[arg(long, global = true, default_value_t = 3.0)]
    tol: f64,

    /// Clip boundary graphs that leave the box instead of failing.
    #[arg(long, global = true)]
    clip: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the algebra axioms and print the group spec.
    Validate,
    /// Group product x * y in chart coordinates.
    Mul {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(allow_hyphen_values = true)]
        y: String,
    },
    /// Group inverse.
    Inv {
        #[arg(allow_hyphen_values = true)]
        x: String,
    },
    /// Conjugation k g k^-1.
    Conj {
        #[arg(allow_hyphen_values = true)]
        k: String,
        #[arg(allow_hyphen_values = true)]
        g: String,
    },
    /// Intrinsic dilation.
    Dilate {
        #[arg(allow_hyphen_values = true)]
        lambda: String,
        #[arg(allow_hyphen_values = true)]
        x: String,
    },
    /// g exp(t v).
    Flow {
        #[arg(allow_hyphen_values = true)]
        g: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
        #[arg(allow_hyphen_values = true)]
        t: String,
    },
    /// Left-invariant vector fields of the basis (or of one vector).
    Vf {
        #[arg(long, allow_hyphen_values = true)]
        vec: Option<String>,
    },
    /// Derivatives X P of a set's defining polynomial.
    Deriv {
        #[arg(long)]
        set: String,
        #[arg(long, allow_hyphen_values = true)]
        vec: Option<String>,
    },
    /// Iterated-bracket and adjoint-orbit spans.
    Span {
        /// Subalgebra generators: `X1;X3` or `1,0,0,0;0,0,1,0`.
        #[arg(long, allow_hyphen_values = true)]
        sub: String,
        #[arg(long, allow_hyphen_values = true)]
        vec: String,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Search for an adjoint image escaping g' + Rx.
    Escape {
        #[arg(long, allow_hyphen_values = true)]
        sub: String,
        #[arg(long, allow_hyphen_values = true)]
        vec: String,
    },
    /// Invariant directions of a sublevel set.
    Invariants {
        #[arg(long)]
        set: String,
    },
    /// Vertical halfspace classification.
    Classify {
        #[arg(long)]
        set: String,
    },
    /// Surface-measure densities on boxes across radii.
    Density {
        #[arg(long)]
        set: String,
        /// `horizontal` or an algebra vector; repeatable.
        #[arg(long = "dir", allow_hyphen_values = true)]
        dirs: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        /// Dependent variable of the boundary graph (one based).
        #[arg(long)]
        dependent: Option<usize>,
    },
    /// Monte Carlo check of volume scaling under dilations.
    Haar {
        #[arg(long, default_value = "2")]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Translate-dilate expansion and tangent classification.
    Blowup {
        #[arg(long)]
        set: String,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        /// Evaluate the normalized pullback at this scale.
        #[arg(long)]
        scale: Option<String>,
        /// Vertical direction for the scaling probe.
        #[arg(long, allow_hyphen_values = true)]
        probe: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Mul { .. } => "mul",
            Command::Inv { .. } => "inv",
            Command::Conj { .. } => "conj",
            Command::Dilate { .. } => "dilate",
            Command::Flow { .. } => "flow",
            Command::Vf { .. } => "vf",
            Command::Deriv { .. } => "deriv",
            Command::Span { .. } => "span",
            Command::Escape { .. } => "escape",
            Command::Invariants { .. } => "invariants",
            Command::Classify { .. } => "classify",
            Command::Density { .. } => "density",
            Command::Haar { .. } => "haar",
            Command::Blowup { .. } => "blowup",
        }
    }
}

/// Group description file, one-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpecFile {
    pub name: String,
    pub dim: usize,
    pub layers: Vec<u32>,
    /// `"i,j" -> {"k": "p/q"}`: `[X_i, X_j]` has coefficient `p/q` on `X_k`.
    #[serde(default)]
    pub brackets: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Chart>,
}

impl GroupSpecFile {
    pub fn from_group(g: &Group) -> Self {
        let a = g.algebra();
        let mut brackets: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for sc in a.constants() {
            brackets
                .entry(format!("{},{}", sc.i + 1, sc.j + 1))
                .or_default()
                .insert((sc.k + 1).to_string(), format_rational(&sc.value));
        }
        Self {
            name: a.name().to_string(),
            dim: a.dim(),
            layers: a.weights().to_vec(),
            brackets,
            coordinates: Some(g.chart()),
        }
    }

    pub fn to_algebra(&self) -> Result<StratifiedAlgebra> {
        if self.layers.len() != self.dim {
            return Err(Error::Parse(format!(
                "spec has dim {} but {} layer weights",
                self.dim,
                self.layers.len()
            )));
        }
        let index = |s: &str| -> Result<usize> {
            let k: usize = s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad basis index `{s}`")))?;
            if k == 0 || k > self.dim {
                return Err(Error::Parse(format!("basis index {k} out of range 1..={}", self.dim)));
            }
            Ok(k - 1)
        };
        let mut entries = Vec::new();
        for (pair, targets) in &self.brackets {
            let (i, j) = pair
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bracket key `{pair}` is not `i,j`")))?;
            let (i, j) = (index(i)?, index(j)?);
            for (k, c) in targets {
                entries.push((i, j, index(k)?, parse_rational(c)?));
            }
        }
        StratifiedAlgebra::new(&self.name, self.layers.clone(), entries)
    }
}

/// Parses and validates a group spec.
pub fn parse_group_spec(text: &str) -> Result<Group> {
    let spec: GroupSpecFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("group spec: {e}")))?;
    let algebra = spec.to_algebra()?;
    Group::new(algebra, spec.coordinates.unwrap_or(Chart::First))
}

/// Preset name or path to a spec file.
pub fn load_group(name: &str) -> Result<Group> {
    match presets::by_name(name) {
        Ok(g) => Ok(g),
        Err(preset_err) => {
            let path = Path::new(name);
            if path.is_file() {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read `{name}`: {e}")))?;
                parse_group_spec(&text)
            } else {
                Err(preset_err)
            }
        }
    }
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub subcommand: String,
    pub version: String,
    pub group: Value,
    pub inputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub results: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
    pub seed: u64,
}

struct Rendered {
    inputs: Value,
    results: Value,
    text: String,
    csv: Option<String>,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let s = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: s,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: s,
                }
            };
        }
    };
    let sub = cli.command.name();
    let group = load_group(&cli.group).and_then(|g| match &cli.coords {
        Some(c) => Ok(g.with_chart(Chart::parse(c)?)),
        None => Ok(g),
    });
    let group_json = match &group {
        Ok(g) => json!({"name": g.algebra().name(), "chart": g.chart().name(), "dim": g.dim()}),
        Err(_) => json!({"name": cli.group}),
    };
    let outcome = group.and_then(|g| dispatch(&cli, &g));
    match outcome {
        Ok(r) => {
            let stdout = if cli.json {
                let doc = ReportDocument {
                    subcommand: sub.into(),
                    version: env!("CARGO_PKG_VERSION").into(),
                    group: group_json,
                    inputs: r.inputs,
                    results: Some(r.results),
                    error: None,
                    seed: cli.seed,
                };
                to_json(&doc)
            } else if cli.csv {
                r.csv.unwrap_or(r.text)
            } else {
                r.text
            };
            Outcome {
                code: EXIT_OK,
                stdout,
                stderr: String::new(),
            }
        }
        Err(err) => {
            let code = exit_code(&err);
            let detail = error_json(&err);
            let stdout = if cli.json {
                let doc = ReportDocument {
                    subcommand: sub.into(),
                    version: env!("CARGO_PKG_VERSION").into(),
                    group: group_json,
                    inputs: Value::Null,
                    results: None,
                    error: Some(detail),
                    seed: cli.seed,
                };
                to_json(&doc)
            } else {
                String::new()
            };
            Outcome {
                code,
                stdout,
                stderr: format!("error[{}]: {err}\n", err.code()),
            }
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Validation(_) => EXIT_VALIDATION,
        Error::Parse(_) | Error::Invalid(_) | Error::DimensionMismatch { .. } => EXIT_USAGE,
        _ => EXIT_COMPUTATION,
    }
}

fn error_json(err: &Error) -> Value {
    let mut v = json!({"code": err.code(), "message": err.to_string()});
    match err {
        Error::Validation(report) => v["report"] = json!(report),
        Error::Hypothesis(h) => v["hypothesis"] = json!(h),
        Error::GraphExitsBox { bound, width } => {
            v["bound"] = json!(bound);
            v["width"] = json!(width);
        }
        _ => {}
    }
    v
}

fn q(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn qs(x: &[Rational]) -> Value {
    Value::Array(x.iter().map(q).collect())
}

fn list(x: &[Rational]) -> String {
    x.iter().map(format_rational).collect::<Vec<_>>().join(",")
}

fn subspace_json(s: &Subspace) -> Value {
    json!({"dim": s.dim(), "basis": s.to_strings()})
}

fn subspace_text(s: &Subspace) -> String {
    if s.dim() == 0 {
        return "{0}".into();
    }
    let rows: Vec<String> = s.basis().iter().map(|v| format!("({})", list(&v.coeffs))).collect();
    format!("span{{{}}}", rows.join(", "))
}

fn verdict_json(v: &NonnegVerdict) -> Value {
    json!({"sign": v.sign, "method": v.method, "witness": v.witness.as_deref().map(qs)})
}

fn halfspace_json(h: &HalfspaceSpec) -> Value {
    json!({
        "c": h.c.as_ref().map(q),
        "nu": qs(&h.nu),
        "nu_unit": h.nu_unit,
        "c_unit": h.c_unit,
    })
}

fn point(g: &Group, text: &str) -> Result<Vec<Rational>> {
    let v = parse_rational_list(text)?;
    g.algebra().check_len(v.len())?;
    Ok(v)
}

/// `Xk`, or a comma separated coordinate list.
fn vector(g: &Group, text: &str) -> Result<AlgVector> {
    let t = text.trim();
    if let Some(k) = t.strip_prefix('X').or_else(|| t.strip_prefix('x')) {
        let k: usize = k.parse().map_err(|_| Error::Parse(format!("bad basis vector `{t}`")))?;
        if k == 0 || k > g.dim() {
            return Err(Error::Parse(format!("basis vector `{t}` out of range")));
        }
        return Ok(g.algebra().basis(k - 1));
    }
    Ok(AlgVector::new(point(g, t)?))
}

fn subspace_arg(g: &Group, text: &str) -> Result<Subspace> {
    let mut v = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty() && *p != "0") {
        v.push(vector(g, part)?);
    }
    Ok(Subspace::span(g.dim(), &v))
}

fn radii(cli: &Cli) -> Result<Vec<f64>> {
    match &cli.radii {
        None => Ok(dyadic_radii(6)),
        Some(t) => {
            let r: Vec<f64> = parse_rational_list(t)?.iter().map(rational_to_f64).collect();
            if r.is_empty() || r.iter().any(|&x| x.is_nan() || x <= 0.0) {
                return Err(Error::Parse("radii must be positive".into()));
            }
            Ok(r)
        }
    }
}

fn measure_options(cli: &Cli, dependent: Option<usize>) -> Result<MeasureOptions> {
    if cli.quad_order == 0 || cli.subdiv == 0 {
        return Err(Error::Parse(
            "quadrature order and subdivisions must be positive".into(),
        ));
    }
    let dependent = match dependent {
        Some(0) => return Err(Error::Parse("dependent variable is one based".into())),
        Some(d) => Some(d - 1),
        None => None,
    };
    Ok(MeasureOptions {
        quad: QuadratureSpec {
            order: cli.quad_order,
            subdiv: cli.subdiv,
        },
        clip: cli.clip,
        dependent,
    })
}

fn origin(g: &Group, at: &Option<String>) -> Result<Vec<Rational>> {
    match at {
        Some(t) => point(g, t),
        None => Ok(vec![Rational::from_integer(0.into()); g.dim()]),
    }
}

fn fnum(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6e}")).unwrap_or_default()
}

fn dispatch(cli: &Cli, g: &Group) -> Result<Rendered> {
    let a = g.algebra();
    match &cli.command {
        Command::Validate => {
            let report = a.validate();
            if !report.passed() {
                return Err(Error::Validation(Box::new(report)));
            }
            let spec = GroupSpecFile::from_group(g);
            let text = format!(
                "{}: valid (dim {}, step {}, Q = {}, m = {})\n",
                a.name(),
                a.dim(),
                report.step,
                report.homogeneous_dim,
                report.horizontal_dim
            );
            Ok(Rendered {
                inputs: json!({}),
                results: json!({"passed": true, "report": report, "spec": spec}),
                text,
                csv: None,
            })
        }
        Command::Mul { x, y } => {
            let (x, y) = (point(g, x)?, point(g, y)?);
            let p = g.mul(&x, &y);
            Ok(simple(
                json!({"x": qs(&x), "y": qs(&y)}),
                json!({"product": qs(&p)}),
                list(&p),
            ))
        }
        Command::Inv { x } => {
            let x = point(g, x)?;
            let p = g.inverse(&x);
            Ok(simple(json!({"x": qs(&x)}), json!({"inverse": qs(&p)}), list(&p)))
        }
        Command::Conj { k, g: h } => {
            let (k, h) = (point(g, k)?, point(g, h)?);
            let p = g.mul(&g.mul(&k, &h), &g.inverse(&k));
            Ok(simple(
                json!({"k": qs(&k), "g": qs(&h)}),
                json!({"conjugate": qs(&p)}),
                list(&p),
            ))
        }
        Command::Dilate { lambda, x } => {
            let l = parse_rational(lambda)?;
            if l < Rational::from_integer(0.into()) {
                return Err(Error::NegativeScale);
            }
            let x = point(g, x)?;
            let p = g.dilate(&l, &x);
            Ok(simple(
                json!({"lambda": q(&l), "x": qs(&x)}),
                json!({"dilated": qs(&p)}),
                list(&p),
            ))
        }
        Command::Flow { g: x, v, t } => {
            let x = point(g, x)?;
            let v = vector(g, v)?;
            let t = parse_rational(t)?;
            let tv: Vec<Rational> = v.coeffs.iter().map(|c| c * &t).collect();
            let p = g.mul(&x, &g.exp_coords(&tv));
            Ok(simple(
                json!({"g": qs(&x), "v": qs(&v.coeffs), "t": q(&t)}),
                json!({"point": qs(&p)}),
                list(&p),
            ))
        }
        Command::Vf { vec } => {
            let vs: Vec<(String, AlgVector)> = match vec {
                Some(t) => vec![(t.clone(), vector(g, t)?)],
                None => (0..a.dim()).map(|i| (format!("X{}", i + 1), a.basis(i))).collect(),
            };
            let mut fields = Vec::new();
            let mut text = String::new();
            for (name, v) in vs {
                let f = realize_left_invariant(g, &v)?;
                text.push_str(&format!("{name} = {f}\n"));
                fields.push(json!({
                    "name": name,
                    "vector": qs(&v.coeffs),
                    "field": f.to_string(),
                    "components": f.components.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                }));
            }
            Ok(Rendered {
                inputs: json!({"vec": vec}),
                results: json!({"fields": fields}),
                text,
                csv: None,
            })
        }
        Command::Deriv { set, vec } => {
            let e = parse_set(g, set)?;
            let vs: Vec<(String, AlgVector)> = match vec {
                Some(t) => vec![(t.clone(), vector(g, t)?)],
                None => (0..a.dim()).map(|i| (format!("X{}", i + 1), a.basis(i))).collect(),
            };
            let mut out = Vec::new();
            let mut text = format!("P = {}\n", e.poly);
            for (name, v) in vs {
                let d = apply_field(&realize_left_invariant(g, &v)?, &e.poly);
                text.push_str(&format!("{name} P = {d}\n"));
                out.push(json!({"field": name, "vector": qs(&v.coeffs), "value": d.to_string()}));
            }
            Ok(Rendered {
                inputs: json!({"set": set, "poly": e.poly.to_string()}),
                results: json!({"derivatives": out}),
                text,
                csv: None,
            })
        }
        Command::Span { sub, vec, samples } => {
            let gp = subspace_arg(g, sub)?;
            let x = vector(g, vec)?;
            let it = iterated_bracket_span(a, &gp, &x)?;
            let orbit = ad_orbit_span(a, &gp, &x, *samples, cli.seed);
            let expected = it.with_vector(&x);
            let equal = orbit == expected;
            let text = format!(
                "iterated brackets: {}\nadjoint orbit:     {}\norbit = Rx + brackets: {}\n",
                subspace_text(&it),
                subspace_text(&orbit),
                equal
            );
            Ok(Rendered {
                inputs: json!({"sub": subspace_json(&gp), "vec": qs(&x.coeffs), "samples": samples}),
                results: json!({
                    "iterated": subspace_json(&it),
                    "orbit": subspace_json(&orbit),
                    "orbit_equals_x_plus_iterated": equal,
                }),
                text,
                csv: None,
            })
        }
        Command::Escape { sub, vec } => {
            let gp = subspace_arg(g, sub)?;
            let x = vector(g, vec)?;
            let r = find_escaping_adjoint(a, &gp, &x, cli.seed)?;
            let text = format!(
                "y = {}\nAd_exp(y) x = {}\nresidual = {}\nattempts = {}\n",
                list(&r.y.coeffs),
                list(&r.image.coeffs),
                list(&r.residual.coeffs),
                r.attempts
            );
            Ok(Rendered {
                inputs: json!({"sub": subspace_json(&gp), "vec": qs(&x.coeffs)}),
                results: json!({
                    "hypotheses": r.hypotheses,
                    "y": qs(&r.y.coeffs),
                    "image": qs(&r.image.coeffs),
                    "residual": qs(&r.residual.coeffs),
                    "attempts": r.attempts,
                }),
                text,
                csv: None,
            })
        }
        Command::Invariants { set } => {
            let e = parse_set(g, set)?;
            let inv = invariant_directions(&e)?;
            let mut text = format!("P = {}\ninvariant: {}\n", e.poly, subspace_text(&inv.subspace));
            let mut rows = Vec::new();
            for (d, id) in inv.derivatives.iter().zip(&inv.ideal) {
                text.push_str(&format!("X{} P = {}\n", id.index + 1, d));
                rows.push(
                    json!({"field": format!("X{}", id.index + 1), "value": d.to_string(), "in_ideal": id.in_ideal}),
                );
            }
            Ok(Rendered {
                inputs: json!({"set": set, "poly": e.poly.to_string()}),
                results: json!({"subspace": subspace_json(&inv.subspace), "derivatives": rows}),
                text,
                csv: None,
            })
        }
        Command::Classify { set } => {
            let e = parse_set(g, set)?;
            let c = classify_vertical_halfspace(&e)?;
            let verdict = if c.halfspace.is_some() {
                "halfspace"
            } else {
                "not-a-halfspace"
            };
            let mut text = format!("P = {}\nverdict: {verdict}\n", e.poly);
            if let Some(h) = &c.halfspace {
                text.push_str(&format!(
                    "nu = ({}), c = {}\n",
                    list(&h.nu),
                    h.c.as_ref().map(format_rational).unwrap_or_else(|| "n/a".into())
                ));
            }
            if let Some(d) = &c.diagnosis {
                text.push_str(&format!("diagnosis: {d}\n"));
            }
            if let Some(cn) = &c.constant_normal {
                text.push_str(&format!(
                    "constant horizontal normal ({}): X_nu P = {} [{:?}]\n",
                    list(&cn.nu),
                    cn.derivative,
                    cn.verdict.sign
                ));
            }
            text.push_str(&format!("cone: {}\n", c.cone));
            Ok(Rendered {
                inputs: json!({"set": set, "poly": e.poly.to_string()}),
                results: json!({
                    "verdict": verdict,
                    "halfspace": c.halfspace.as_ref().map(halfspace_json),
                    "diagnosis": c.diagnosis,
                    "constant_normal": c.constant_normal.as_ref().map(|cn| json!({
                        "nu": qs(&cn.nu),
                        "derivative": cn.derivative.to_string(),
                        "verdict": verdict_json(&cn.verdict),
                    })),
                    "cone": c.cone,
                    "invariants": subspace_json(&c.invariants.subspace),
                }),
                text,
                csv: None,
            })
        }
        Command::Density {
            set,
            dirs,
            at,
            dependent,
        } => {
            let e = parse_set(g, set)?;
            let center = origin(g, at)?;
            let radii = radii(cli)?;
            let opts = measure_options(cli, *dependent)?;
            let directions: Vec<Direction> = if dirs.is_empty() {
                vec![Direction::Horizontal]
            } else {
                dirs.iter()
                    .map(|d| {
                        if d == "horizontal" {
                            Ok(Direction::Horizontal)
                        } else {
                            vector(g, d).map(Direction::Field)
                        }
                    })
                    .collect::<Result<_>>()?
            };
            let rep = density_scan(&e, &directions, &center, &radii, &opts)?;
            let mut text = String::new();
            let mut csv = String::from("series,r,estimate,error,slope,constant\n");
            let mut series = Vec::new();
            for s in &rep.series {
                text.push_str(&format!("{} (fitted slope {})\n", s.label, fnum(s.fitted_slope)));
                for row in &s.rows {
                    text.push_str(&format!(
                        "  r={:<10} {:.12e} ± {:.3e}  slope {}  constant {}\n",
                        row.r,
                        row.estimate,
                        row.error,
                        fnum(row.slope),
                        fnum(row.constant)
                    ));
                    csv.push_str(&format!(
                        "{},{},{:e},{:e},{},{}\n",
                        s.label.replace(',', " "),
                        row.r,
                        row.estimate,
                        row.error,
                        row.slope.map(|v| v.to_string()).unwrap_or_default(),
                        row.constant.map(|v| v.to_string()).unwrap_or_default()
                    ));
                }
                series.push(json!({
                    "label": s.label,
                    "fitted_slope": s.fitted_slope,
                    "clipped": s.clipped,
                    "rows": s.rows.iter().map(|r| json!({
                        "r": r.r, "estimate": r.estimate, "error": r.error,
                        "slope": r.slope, "constant": r.constant,
                    })).collect::<Vec<_>>(),
                }));
            }
            let ratios: Vec<Value> = rep
                .ratios
                .iter()
                .map(|rs| {
                    text.push_str(&format!("{} / {}\n", rs.numerator, rs.denominator));
                    for row in &rs.rows {
                        text.push_str(&format!("  r={:<10} {:.12e}  slope {}\n", row.r, row.ratio, fnum(row.slope)));
                    }
                    json!({
                        "numerator": rs.numerator,
                        "denominator": rs.denominator,
                        "rows": rs.rows.iter().map(|r| json!({"r": r.r, "ratio": r.ratio, "slope": r.slope})).collect::<Vec<_>>(),
                    })
                })
                .collect();
            Ok(Rendered {
                inputs: json!({
                    "set": set, "poly": e.poly.to_string(), "at": qs(&center), "radii": radii,
                    "quad_order": cli.quad_order, "subdiv": cli.subdiv, "clip": cli.clip,
                }),
                results: json!({"series": series, "ratios": ratios}),
                text,
                csv: Some(csv),
            })
        }
        Command::Haar { lambda, at, r } => {
            let l = parse_rational(lambda)?;
            let center = origin(g, at)?;
            let bx = BallBox::new(g, center.clone(), *r)?;
            let h = haar_scaling_check(g, &l, &bx, cli.mc_samples, cli.seed)?;
            let pass = h.within_sigma(cli.tol);
            let text = format!(
                "expected lambda^Q = {}\nclosed form box ratio = {}\nMonte Carlo ratio = {:.6} ± {:.6} (z = {:.3}, {})\n",
                h.expected,
                h.closed_form,
                h.ratio,
                h.stderr,
                h.z,
                if pass { "within tolerance" } else { "outside tolerance" }
            );
            Ok(Rendered {
                inputs: json!({"lambda": q(&l), "at": qs(&center), "r": r, "samples": cli.mc_samples, "tol": cli.tol}),
                results: json!({
                    "expected": q(&h.expected),
                    "closed_form": q(&h.closed_form),
                    "closed_form_matches": h.closed_form == h.expected,
                    "volume": h.volume, "volume_stderr": h.volume_stderr,
                    "dilated_volume": h.dilated_volume, "dilated_stderr": h.dilated_stderr,
                    "ratio": h.ratio, "stderr": h.stderr, "z": h.z,
                    "within_tolerance": pass,
                }),
                text,
                csv: None,
            })
        }
        Command::Blowup { set, at, scale, probe } => {
            let e = parse_set(g, set)?;
            let x = origin(g, at)?;
            blowup(cli, g, &e, set, &x, scale.as_deref(), probe.as_deref())
        }
    }
}

fn simple(inputs: Value, results: Value, text: String) -> Rendered {
    Rendered {
        inputs,
        results,
        text: text + "\n",
        csv: None,
    }
}

fn tangent_json(t: &TangentLimit) -> Value {
    json!({
        "order": t.order,
        "leading": t.leading.to_string(),
        "classification": t.kind.name(),
        "halfspace": match &t.kind {
            TangentKind::Halfspace(h) => Some(halfspace_json(h)),
            _ => None,
        },
    })
}

fn blowup(
    cli: &Cli,
    g: &Group,
    e: &SublevelSet,
    set: &str,
    x: &[Rational],
    scale: Option<&str>,
    probe: Option<&str>,
) -> Result<Rendered> {
    let fam = translate_dilate_pullback(e, x)?;
    let mut text = format!("P = {}\nat ({})\n", e.poly, list(x));
    let mut expansion = serde_json::Map::new();
    for (d, qd) in &fam.expansion {
        text.push_str(&format!("  r^{d}: {qd}\n"));
        expansion.insert(d.to_string(), Value::String(qd.to_string()));
    }
    let mut results = json!({"expansion": expansion, "pullback": fam.poly.to_string()});
    match tangent_limit(e, x) {
        Ok(t) => {
            text.push_str(&format!(
                "tangent: {} (order {}, leading {})\n",
                t.kind.name(),
                t.order,
                t.leading
            ));
            if let TangentKind::Halfspace(h) = &t.kind {
                text.push_str(&format!("  nu = ({})\n", list(&h.nu)));
            }
            results["on_boundary"] = json!(true);
            results["tangent"] = tangent_json(&t);
        }
        Err(Error::NotOnBoundary { value }) => {
            text.push_str(&format!("not on the boundary: P(x) = {value}\n"));
            results["on_boundary"] = json!(false);
            results["value"] = json!(value);
        }
        Err(err) => return Err(err),
    }
    if let Some(s) = scale {
        let r = parse_rational(s)?;
        let p = pullback_at(e, x, &r)?;
        text.push_str(&format!("normalized pullback at r = {r}: {}\n", p.poly));
        results["scaled"] = json!({"r": q(&r), "poly": p.poly.to_string()});
    }
    let mut csv = None;
    if let Some(v) = probe {
        let z = vector(g, v)?;
        let radii = radii(cli)?;
        let rep = provafis_probe(e, &z, x, &radii, &measure_options(cli, None)?)?;
        let mut table = String::from("r,measure,error,scaled\n");
        text.push_str(&format!("probe of ({}) on top layer {}\n", list(&z.coeffs), rep.layer));
        for row in &rep.rows {
            text.push_str(&format!(
                "  r={:<10} {:.12e}  scaled {:.6e}\n",
                row.r, row.measure, row.scaled
            ));
            table.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                row.r, row.measure, row.error, row.scaled
            ));
        }
        text.push_str(&format!(
            "  fitted slope {}, infinitesimal: {}, tangent invariant: {}\n",
            fnum(rep.slope),
            rep.infinitesimal,
            rep.tangent_invariant
                .map(|b| b.to_string())
                .unwrap_or_else(|| "n/a".into())
        ));
        results["probe"] = json!({
            "vector": qs(&z.coeffs),
            "layer": rep.layer,
            "rows": rep.rows.iter().map(|r| json!({"r": r.r, "measure": r.measure, "error": r.error, "scaled": r.scaled})).collect::<Vec<_>>(),
            "slope": rep.slope,
            "infinitesimal": rep.infinitesimal,
            "tangent_invariant": rep.tangent_invariant,
        });
        csv = Some(table);
    }
    Ok(Rendered {
        inputs: json!({"set": set, "poly": e.poly.to_string(), "at": qs(x), "scale": scale, "probe": probe}),
        results,
        text,
        csv,
    })
}
