//! Closed-form surfaces and explicit calibrated maps used as fixtures.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::constructions::{self, fibre_chart, ConstructionError, ConstructionKind, SampleGrid};
use crate::expr::{EvalError, Expr, Func};
use crate::forms::{self, BundleTag, Defect, FormsError, Identification, SplitVector};
use crate::immersion::{self, Domain, Immersion, ImmersionError, Mode, SecondFundamentalForm};
use crate::linalg;
use crate::octonion::ImOctonion;
use crate::sampling;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    Unknown(String),
    #[error("malformed catalog reference `{0}`")]
    Malformed(String),
    #[error("`{name}` has no parameter `{param}`")]
    UnknownParam { name: String, param: String },
    #[error("`{name}`: {reason}")]
    Parameter { name: String, reason: String },
    #[error(transparent)]
    Immersion(#[from] ImmersionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

/// Geometric properties an entry is known to have. The isotropy flags only
/// carry meaning for surfaces in `R⁴`; `austere` coincides with `minimal`
/// for every entry since all bases have dimension at most 2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub minimal: bool,
    pub isotropic_plus: bool,
    pub isotropic_minus: bool,
    pub austere: bool,
}

impl Flags {
    const NONE: Flags = Flags {
        minimal: false,
        isotropic_plus: false,
        isotropic_minus: false,
        austere: false,
    };
    const MINIMAL: Flags = Flags {
        minimal: true,
        austere: true,
        ..Flags::NONE
    };
    const PLUS: Flags = Flags {
        isotropic_plus: true,
        ..Flags::MINIMAL
    };
    const MINUS: Flags = Flags {
        isotropic_minus: true,
        ..Flags::MINIMAL
    };
    const FLAT: Flags = Flags {
        isotropic_plus: true,
        isotropic_minus: true,
        ..Flags::MINIMAL
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: Vec<(&'static str, f64)>,
    pub immersion: Immersion,
    pub flags: Flags,
    pub description: &'static str,
    pub note: Option<String>,
}

impl CatalogEntry {
    /// `name` followed by `key=value` pairs, as shown in listings.
    pub fn label(&self) -> String {
        let mut s = self.name.to_string();
        for (k, v) in &self.params {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }

    /// The reference string accepted by [`lookup_ref`].
    pub fn reference(&self) -> String {
        if self.params.is_empty() {
            return self.name.to_string();
        }
        let inner: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("{}({})", self.name, inner.join(","))
    }
}

impl fmt::Display for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

struct Builder {
    name: &'static str,
    defaults: &'static [(&'static str, f64)],
    build: fn(&[f64]) -> Result<CatalogEntry, CatalogError>,
}

const BUILDERS: &[Builder] = &[
    Builder {
        name: "plane",
        defaults: &[],
        build: |_| plane(),
    },
    Builder {
        name: "holomorphic_expz",
        defaults: &[],
        build: |_| holomorphic_expz(),
    },
    Builder {
        name: "antiholomorphic_expz",
        defaults: &[],
        build: |_| antiholomorphic_expz(),
    },
    Builder {
        name: "holomorphic_z2",
        defaults: &[],
        build: |_| holomorphic_z2(),
    },
    Builder {
        name: "antiholomorphic_z2",
        defaults: &[],
        build: |_| antiholomorphic_z2(),
    },
    Builder {
        name: "catenoid",
        defaults: &[("C", 2.0), ("K", 0.5)],
        build: |p| catenoid_family(p[0], p[1]),
    },
    Builder {
        name: "rotational",
        defaults: &[("K", 1.0), ("L", 4.0)],
        build: |p| rotational_family(p[0], p[1]),
    },
    Builder {
        name: "paraboloid",
        defaults: &[],
        build: |_| paraboloid(),
    },
    Builder {
        name: "catenoid3",
        defaults: &[],
        build: |_| catenoid3(),
    },
    Builder {
        name: "helicoid3",
        defaults: &[],
        build: |_| helicoid3(),
    },
    Builder {
        name: "scherk3",
        defaults: &[],
        build: |_| scherk3(),
    },
    Builder {
        name: "sphere3",
        defaults: &[],
        build: |_| sphere3(),
    },
    Builder {
        name: "cylinder3",
        defaults: &[],
        build: |_| cylinder3(),
    },
    Builder {
        name: "paraboloid3",
        defaults: &[],
        build: |_| paraboloid3(),
    },
    Builder {
        name: "line3",
        defaults: &[],
        build: |_| line3(),
    },
    Builder {
        name: "circle3",
        defaults: &[],
        build: |_| circle3(),
    },
    Builder {
        name: "helix3",
        defaults: &[],
        build: |_| helix3(),
    },
];

/// Every entry at its default parameters, in a fixed order.
pub fn entries() -> Vec<CatalogEntry> {
    BUILDERS
        .iter()
        .map(|s| {
            (s.build)(&s.defaults.iter().map(|d| d.1).collect::<Vec<_>>())
                .expect("defaults are valid")
        })
        .collect()
}

pub fn names() -> impl Iterator<Item = &'static str> {
    BUILDERS.iter().map(|s| s.name)
}

/// Builds `name` with `params` overriding the defaults by key.
pub fn lookup(name: &str, params: &[(String, f64)]) -> Result<CatalogEntry, CatalogError> {
    let spec = BUILDERS
        .iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| CatalogError::Unknown(name.to_string()))?;
    let mut values: Vec<f64> = spec.defaults.iter().map(|d| d.1).collect();
    for (key, value) in params {
        let slot = spec
            .defaults
            .iter()
            .position(|d| d.0.eq_ignore_ascii_case(key))
            .ok_or_else(|| CatalogError::UnknownParam {
                name: spec.name.to_string(),
                param: key.clone(),
            })?;
        values[slot] = *value;
    }
    (spec.build)(&values)
}

/// Parses `name` or `name(k=v, ...)` and builds the entry.
pub fn lookup_ref(reference: &str) -> Result<CatalogEntry, CatalogError> {
    let malformed = || CatalogError::Malformed(reference.to_string());
    let reference = reference.trim();
    let (name, params) = match reference.find('(') {
        None => (reference, Vec::new()),
        Some(open) => {
            let inner = reference[open + 1..]
                .strip_suffix(')')
                .ok_or_else(malformed)?;
            let params = inner
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|kv| {
                    let (k, v) = kv.split_once('=').ok_or_else(malformed)?;
                    let v: f64 = v.trim().parse().map_err(|_| malformed())?;
                    Ok((k.trim().to_string(), v))
                })
                .collect::<Result<Vec<_>, CatalogError>>()?;
            (reference[..open].trim(), params)
        }
    };
    lookup(name, &params)
}

fn u() -> Expr {
    Expr::u()
}

fn v() -> Expr {
    Expr::v()
}

fn num(x: f64) -> Expr {
    Expr::num(x)
}

fn entry(
    name: &'static str,
    params: Vec<(&'static str, f64)>,
    immersion: Immersion,
    flags: Flags,
    description: &'static str,
) -> CatalogEntry {
    CatalogEntry {
        name,
        params,
        immersion,
        flags,
        description,
        note: None,
    }
}

fn square() -> Domain {
    Domain::rect((-1.0, 1.0), (-1.0, 1.0))
}

fn strip() -> Domain {
    Domain::rect((-1.0, 1.0), (-PI, PI))
}

/// The graph `(u, v, f¹, f²)` with caller-asserted flags.
pub fn graph_surface(
    f1: Expr,
    f2: Expr,
    flags: Flags,
    domain: Domain,
) -> Result<CatalogEntry, CatalogError> {
    let imm = Immersion::graph(f1, f2, domain)?;
    Ok(entry("graph", vec![], imm, flags, "graph (u, v, f1, f2)"))
}

/// The graph of `w = f(z)` from the real and imaginary parts of `f` in `z = u + iv`.
pub fn holomorphic(re: Expr, im: Expr, domain: Domain) -> Result<Immersion, CatalogError> {
    Ok(Immersion::graph(re, im, domain)?)
}

/// The graph of `w = conj(f(z))`.
pub fn antiholomorphic(re: Expr, im: Expr, domain: Domain) -> Result<Immersion, CatalogError> {
    Ok(Immersion::graph(re, -im, domain)?)
}

/// `(f¹₁ − s f²₂, f¹₂ + s f²₁)`: zero for holomorphic graphs with `s = 1`
/// and anti-holomorphic ones with `s = −1`.
pub fn cauchy_riemann_residual(
    f1: &Expr,
    f2: &Expr,
    point: &[f64],
    sign: f64,
) -> Result<[f64; 2], EvalError> {
    let a = f1.eval_jet2(point[0], point[1])?;
    let b = f2.eval_jet2(point[0], point[1])?;
    Ok([a.d[0] - sign * b.d[1], a.d[1] + sign * b.d[0]])
}

fn plane() -> Result<CatalogEntry, CatalogError> {
    let imm = Immersion::graph(num(0.0), num(0.0), square())?;
    Ok(entry(
        "plane",
        vec![],
        imm,
        Flags::FLAT,
        "coordinate plane in R4",
    ))
}

fn exp_z() -> (Expr, Expr) {
    let e = u().apply(Func::Exp);
    (e.clone() * v().apply(Func::Cos), e * v().apply(Func::Sin))
}

fn holomorphic_expz() -> Result<CatalogEntry, CatalogError> {
    let (re, im) = exp_z();
    let imm = holomorphic(re, im, strip())?;
    Ok(entry(
        "holomorphic_expz",
        vec![],
        imm,
        Flags::PLUS,
        "graph of w = exp(z)",
    ))
}

fn antiholomorphic_expz() -> Result<CatalogEntry, CatalogError> {
    let (re, im) = exp_z();
    let imm = antiholomorphic(re, im, strip())?;
    Ok(entry(
        "antiholomorphic_expz",
        vec![],
        imm,
        Flags::MINUS,
        "graph of w = exp(conj z)",
    ))
}

fn z_squared() -> (Expr, Expr) {
    (u().powi(2) - v().powi(2), 2.0 * u() * v())
}

fn holomorphic_z2() -> Result<CatalogEntry, CatalogError> {
    let (re, im) = z_squared();
    let imm = holomorphic(re, im, square())?;
    Ok(entry(
        "holomorphic_z2",
        vec![],
        imm,
        Flags::PLUS,
        "graph of w = z^2",
    ))
}

fn antiholomorphic_z2() -> Result<CatalogEntry, CatalogError> {
    let (re, im) = z_squared();
    let imm = antiholomorphic(re, im, square())?;
    Ok(entry(
        "antiholomorphic_z2",
        vec![],
        imm,
        Flags::MINUS,
        "graph of w = conj(z)^2",
    ))
}

fn parameter_error(name: &str, reason: &str) -> CatalogError {
    CatalogError::Parameter {
        name: name.to_string(),
        reason: reason.to_string(),
    }
}

/// `f(s) = (C/2)e^{Ks} + ((1 − K²)/(2CK²))e^{−Ks}` in the variable `s`.
pub fn catenoid_profile(c: f64, k: f64, s: Expr) -> Expr {
    let ks = num(k) * s;
    num(c / 2.0) * ks.clone().apply(Func::Exp)
        + num((1.0 - k * k) / (2.0 * c * k * k)) * (-ks).apply(Func::Exp)
}

/// `(u, v, f(u) cos v, f(u) sin v)`; `K = ±1` reduces to `(C/2)e^{±z}` up to
/// conjugation.
pub fn catenoid_family(c: f64, k: f64) -> Result<CatalogEntry, CatalogError> {
    if c == 0.0 || k == 0.0 || !c.is_finite() || !k.is_finite() {
        return Err(parameter_error(
            "catenoid",
            "C and K must be finite and nonzero",
        ));
    }
    let f = catenoid_profile(c, k, u());
    let imm = Immersion::graph(
        f.clone() * v().apply(Func::Cos),
        f * v().apply(Func::Sin),
        Domain::rect((-2.0, 2.0), (-PI, PI)),
    )?;
    let flags = if k == 1.0 {
        Flags::PLUS
    } else if k == -1.0 {
        Flags::MINUS
    } else {
        Flags::MINIMAL
    };
    Ok(entry(
        "catenoid",
        vec![("C", c), ("K", k)],
        imm,
        flags,
        "rotation-invariant solution f(u)(cos v, sin v) of the minimal graph equations",
    ))
}

/// `f¹(1 + f′²) − f″(1 + f²)` for the catenoid profile at `s`.
pub fn catenoid_ode_residual(c: f64, k: f64, s: f64) -> Result<f64, EvalError> {
    let j = catenoid_profile(c, k, u()).eval_jet2(s, 0.0)?;
    let (f, df, ddf) = (j.value, j.d[0], j.h[0][0]);
    Ok(f * (1.0 + df * df) - ddf * (1.0 + f * f))
}

/// Relative clearance kept from the circle `u² + v² = 4(1 + K²)/L`
/// where the rotational solution has infinite slope.
pub const ROTATIONAL_MARGIN: f64 = 1.1;

/// `(2/√L) log(√t + √(t − 4(1 + K²)/L))`, the profile of `g`; `f = K g`.
pub fn rotational_profile(k: f64, l: f64, t: Expr) -> Expr {
    let r2 = 4.0 * (1.0 + k * k) / l;
    num(2.0 / l.sqrt())
        * (t.clone().apply(Func::Sqrt) + (t - r2).apply(Func::Sqrt)).apply(Func::Log)
}

/// `(u, v, f(u² + v²), g(u² + v²))`, defined outside a disk.
pub fn rotational_family(k: f64, l: f64) -> Result<CatalogEntry, CatalogError> {
    if !(l > 0.0 && l.is_finite() && k.is_finite()) {
        return Err(parameter_error(
            "rotational",
            "L must be positive and K finite",
        ));
    }
    let r2 = 4.0 * (1.0 + k * k) / l;
    let keep = r2 * ROTATIONAL_MARGIN * ROTATIONAL_MARGIN;
    let half = 3.0 * r2.sqrt();
    let t = u().powi(2) + v().powi(2);
    let g = rotational_profile(k, l, t);
    let domain =
        Domain::rect((-half, half), (-half, half)).excluding(num(keep) - u().powi(2) - v().powi(2));
    let imm = Immersion::graph(num(k) * g.clone(), g, domain)?;
    let mut e = entry(
        "rotational",
        vec![("K", k), ("L", l)],
        imm,
        Flags::MINIMAL,
        "solution of the minimal graph equations depending on u^2 + v^2",
    );
    e.note = Some(format!(
        "defined for u^2 + v^2 > {r2}; sampling keeps u^2 + v^2 >= {keep:.6}"
    ));
    Ok(e)
}

/// The residuals `t h″ + h′ + 2t h′(f′² + g′²)` for `h = f` and `h = g`.
pub fn rotational_ode_residual(k: f64, l: f64, t: f64) -> Result<[f64; 2], EvalError> {
    let g = rotational_profile(k, l, u()).eval_jet2(t, 0.0)?;
    let (dg, ddg) = (g.d[0], g.h[0][0]);
    let (df, ddf) = (k * dg, k * ddg);
    let speed = df * df + dg * dg;
    let r = |d: f64, dd: f64| t * dd + d + 2.0 * t * d * speed;
    Ok([r(df, ddf), r(dg, ddg)])
}

fn paraboloid() -> Result<CatalogEntry, CatalogError> {
    let imm = Immersion::graph(u().powi(2) + v().powi(2), num(0.0), square())?;
    Ok(entry(
        "paraboloid",
        vec![],
        imm,
        Flags::NONE,
        "graph of u^2 + v^2 in R4",
    ))
}

fn surface3(components: [Expr; 3], domain: Domain) -> Result<Immersion, CatalogError> {
    Ok(Immersion::new(2, components.to_vec(), domain)?)
}

fn catenoid3() -> Result<CatalogEntry, CatalogError> {
    let ch = u().apply(Func::Cosh);
    let imm = surface3(
        [
            ch.clone() * v().apply(Func::Cos),
            ch * v().apply(Func::Sin),
            u(),
        ],
        strip(),
    )?;
    Ok(entry(
        "catenoid3",
        vec![],
        imm,
        Flags::MINIMAL,
        "catenoid in R3",
    ))
}

fn helicoid3() -> Result<CatalogEntry, CatalogError> {
    let imm = surface3(
        [u() * v().apply(Func::Cos), u() * v().apply(Func::Sin), v()],
        strip(),
    )?;
    Ok(entry(
        "helicoid3",
        vec![],
        imm,
        Flags::MINIMAL,
        "helicoid in R3",
    ))
}

fn scherk3() -> Result<CatalogEntry, CatalogError> {
    let z = v().apply(Func::Cos).apply(Func::Log) - u().apply(Func::Cos).apply(Func::Log);
    let imm = surface3([u(), v(), z], Domain::rect((-1.2, 1.2), (-1.2, 1.2)))?;
    Ok(entry(
        "scherk3",
        vec![],
        imm,
        Flags::MINIMAL,
        "Scherk graph log(cos v / cos u) in R3",
    ))
}

fn sphere3() -> Result<CatalogEntry, CatalogError> {
    let cu = u().apply(Func::Cos);
    let imm = surface3(
        [
            cu.clone() * v().apply(Func::Cos),
            cu * v().apply(Func::Sin),
            u().apply(Func::Sin),
        ],
        strip(),
    )?;
    Ok(entry(
        "sphere3",
        vec![],
        imm,
        Flags::NONE,
        "unit sphere patch away from the poles",
    ))
}

fn cylinder3() -> Result<CatalogEntry, CatalogError> {
    let imm = surface3(
        [u().apply(Func::Cos), u().apply(Func::Sin), v()],
        Domain::rect((-PI, PI), (-1.0, 1.0)),
    )?;
    Ok(entry(
        "cylinder3",
        vec![],
        imm,
        Flags::NONE,
        "round cylinder of radius 1",
    ))
}

fn paraboloid3() -> Result<CatalogEntry, CatalogError> {
    let imm = surface3([u(), v(), u().powi(2) + v().powi(2)], square())?;
    Ok(entry(
        "paraboloid3",
        vec![],
        imm,
        Flags::NONE,
        "graph of u^2 + v^2 in R3",
    ))
}

fn curve3(components: [Expr; 3]) -> Result<Immersion, CatalogError> {
    Ok(Immersion::new(
        1,
        components.to_vec(),
        Domain::interval((-PI, PI)),
    )?)
}

fn line3() -> Result<CatalogEntry, CatalogError> {
    let imm = curve3([u(), 2.0 * u(), -u()])?;
    Ok(entry(
        "line3",
        vec![],
        imm,
        Flags::MINIMAL,
        "straight line in R3",
    ))
}

fn circle3() -> Result<CatalogEntry, CatalogError> {
    let imm = curve3([u().apply(Func::Cos), u().apply(Func::Sin), num(0.0)])?;
    Ok(entry(
        "circle3",
        vec![],
        imm,
        Flags::NONE,
        "unit circle in R3",
    ))
}

fn helix3() -> Result<CatalogEntry, CatalogError> {
    let imm = curve3([u().apply(Func::Cos), u().apply(Func::Sin), 0.5 * u()])?;
    Ok(entry(
        "helix3",
        vec![],
        imm,
        Flags::NONE,
        "circular helix in R3",
    ))
}

/// Measured properties of an immersion over a sample of base points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredFlags {
    pub mean_curvature: f64,
    /// `None` unless the immersion is a surface in `R⁴`.
    pub plus_residual: Option<f64>,
    pub minus_residual: Option<f64>,
}

impl MeasuredFlags {
    pub fn flags(&self, tol: f64) -> Flags {
        let minimal = self.mean_curvature < tol;
        let iso = |r: Option<f64>| minimal && r.is_some_and(|r| r < tol);
        Flags {
            minimal,
            isotropic_plus: iso(self.plus_residual),
            isotropic_minus: iso(self.minus_residual),
            austere: minimal,
        }
    }
}

/// Maxima of `|H|` and the two isotropy residuals over `count` sampled points.
pub fn measure_flags(
    imm: &Immersion,
    count: usize,
    seed: u64,
) -> Result<MeasuredFlags, CatalogError> {
    let surface4 = imm.p() == 2 && imm.n() == 4;
    let mut m = MeasuredFlags {
        mean_curvature: 0.0,
        plus_residual: surface4.then_some(0.0),
        minus_residual: surface4.then_some(0.0),
    };
    for pt in sampling::base_points(imm.domain(), imm.p(), count, seed)? {
        let fp = imm.frames(&pt, Mode::Jet)?;
        let sff = SecondFundamentalForm::from_frames(&fp);
        m.mean_curvature = m.mean_curvature.max(sff.mean_curvature_norm());
        if surface4 {
            let bump = |slot: &mut Option<f64>, r: f64| *slot = slot.map(|x| x.max(r));
            bump(
                &mut m.plus_residual,
                immersion::isotropy_residual(&sff, 1.0),
            );
            bump(
                &mut m.minus_residual,
                immersion::isotropy_residual(&sff, -1.0),
            );
        }
    }
    Ok(m)
}

/// A closed-form parametrization `(x, y, t) ↦ p(x, y) + Σ t_k V_k(x, y)` of a
/// calibrated submanifold, written in the coordinates of a construction with
/// some columns dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitMap {
    pub name: &'static str,
    pub surface: CatalogEntry,
    pub construction: ConstructionKind,
    origin: Vec<Expr>,
    directions: Vec<Vec<Expr>>,
    /// `V = λ·d` for the unit construction direction `d`, when the fibre is a line.
    rescale: Option<Expr>,
    /// Position of each output coordinate among the construction's columns.
    columns: Vec<usize>,
}

pub const EXPLICIT_NAMES: [&str; 4] = [
    "assoc_expz",
    "assoc_catenoid",
    "assoc_rotational",
    "coass_expz",
];

pub fn explicit_calibrated(name: &str) -> Result<ExplicitMap, CatalogError> {
    let x = u;
    let y = v;
    let asd_columns: Vec<usize> = (0..7).collect();
    let base = |f1: Expr, f2: Expr| vec![x(), y(), f1, f2];
    let with_base = |fibre: Vec<Expr>, f: &[Expr]| {
        fibre
            .into_iter()
            .chain(f.iter().cloned())
            .collect::<Vec<_>>()
    };
    Ok(match name {
        "assoc_expz" => {
            let (re, im) = exp_z();
            let ch = x().apply(Func::Cosh);
            ExplicitMap {
                name: "assoc_expz",
                surface: holomorphic_expz()?,
                construction: ConstructionKind::AssociativeE,
                origin: with_base(vec![num(0.0); 3], &base(re, im)),
                directions: vec![with_base(
                    vec![
                        x().apply(Func::Tanh),
                        y().apply(Func::Sin) / ch.clone(),
                        -(y().apply(Func::Cos) / ch),
                    ],
                    &vec![num(0.0); 4],
                )],
                rescale: Some(num(-1.0)),
                columns: asd_columns,
            }
        }
        "assoc_catenoid" => {
            let f = catenoid_profile(2.0, 0.5, x());
            let s = (4.0 * x().apply(Func::Exp) - 9.0) / (12.0 * (0.5 * x()).apply(Func::Exp));
            ExplicitMap {
                name: "assoc_catenoid",
                surface: catenoid_family(2.0, 0.5)?,
                construction: ConstructionKind::AssociativeE,
                origin: with_base(
                    vec![num(0.0); 3],
                    &base(f.clone() * y().apply(Func::Cos), f * y().apply(Func::Sin)),
                ),
                directions: vec![with_base(
                    vec![s.clone(), y().apply(Func::Sin), -y().apply(Func::Cos)],
                    &vec![num(0.0); 4],
                )],
                rescale: Some(-(1.0 + s.powi(2)).apply(Func::Sqrt)),
                columns: asd_columns,
            }
        }
        "assoc_rotational" => {
            let r2 = x().powi(2) + y().powi(2);
            let h1 = r2.clone().apply(Func::Sqrt);
            let h2 = (r2.clone() - 2.0).apply(Func::Sqrt);
            let g = (h1.clone() + h2.clone()).apply(Func::Log);
            let h12 = h1 * h2;
            ExplicitMap {
                name: "assoc_rotational",
                surface: rotational_family(1.0, 4.0)?,
                construction: ConstructionKind::AssociativeE,
                origin: with_base(vec![num(0.0); 3], &base(g.clone(), g)),
                directions: vec![with_base(
                    vec![h12.clone(), y() - x(), x() + y()],
                    &vec![num(0.0); 4],
                )],
                rescale: Some((h12.powi(2) + 2.0 * r2).apply(Func::Sqrt)),
                columns: asd_columns,
            }
        }
        "coass_expz" => {
            let (re, im) = exp_z();
            let ex = x().apply(Func::Exp);
            let flat = 1.0 - (2.0 * x()).apply(Func::Exp);
            ExplicitMap {
                name: "coass_expz",
                surface: holomorphic_expz()?,
                construction: ConstructionKind::CayleyMinus,
                origin: with_base(vec![num(0.0); 3], &base(re, im)),
                directions: vec![
                    with_base(
                        vec![
                            2.0 * ex.clone() * y().apply(Func::Sin),
                            flat.clone(),
                            num(0.0),
                        ],
                        &vec![num(0.0); 4],
                    ),
                    with_base(
                        vec![-2.0 * ex * y().apply(Func::Cos), num(0.0), flat],
                        &vec![num(0.0); 4],
                    ),
                ],
                rescale: None,
                columns: (1..8).collect(),
            }
        }
        _ => return Err(CatalogError::Unknown(name.to_string())),
    })
}

fn eval_all(es: &[Expr], x: f64, y: f64) -> Result<Vec<f64>, EvalError> {
    es.iter().map(|e| e.eval(x, y)).collect()
}

impl ExplicitMap {
    pub fn fibre_rank(&self) -> usize {
        self.directions.len()
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn eval(&self, x: f64, y: f64, t: &[f64]) -> Result<Vec<f64>, CatalogError> {
        let mut out = eval_all(&self.origin, x, y)?;
        for (tk, d) in t.iter().zip(&self.directions) {
            linalg::axpy(*tk, &eval_all(d, x, y)?, &mut out);
        }
        Ok(out)
    }

    pub fn fibre_directions(&self, x: f64, y: f64) -> Result<Vec<Vec<f64>>, CatalogError> {
        Ok(self
            .directions
            .iter()
            .map(|d| eval_all(d, x, y))
            .collect::<Result<_, _>>()?)
    }

    /// `∂_x, ∂_y, ∂_{t_k}` of the map, by jet differentiation.
    pub fn tangents(&self, x: f64, y: f64, t: &[f64]) -> Result<Vec<Vec<f64>>, CatalogError> {
        let grad = |e: &Expr| e.eval_jet2(x, y).map(|j| j.d);
        let mut dx = vec![0.0; self.dim()];
        let mut dy = vec![0.0; self.dim()];
        let mut add = |exprs: &[Expr], w: f64| -> Result<(), EvalError> {
            for (c, e) in exprs.iter().enumerate() {
                let d = grad(e)?;
                dx[c] += w * d[0];
                dy[c] += w * d[1];
            }
            Ok(())
        };
        add(&self.origin, 1.0)?;
        for (tk, d) in t.iter().zip(&self.directions) {
            add(d, *tk)?;
        }
        let mut out = vec![dx, dy];
        out.extend(self.fibre_directions(x, y)?);
        Ok(out)
    }

    /// The calibration defect of the image's tangent space at `(x, y, t)`.
    pub fn calibration_defect(&self, x: f64, y: f64, t: &[f64]) -> Result<Defect, CatalogError> {
        let tangents = self.tangents(x, y, t)?;
        Ok(match self.construction {
            ConstructionKind::AssociativeE => {
                let vs: Vec<SplitVector> = tangents
                    .iter()
                    .map(|c| SplitVector::from_coords(BundleTag::Asd4, c))
                    .collect::<Result<_, _>>()?;
                forms::is_associative(&vs, &Identification::standard())?
            }
            _ => {
                let vs: Vec<ImOctonion> = tangents
                    .iter()
                    .map(|c| ImOctonion::from_coords(c))
                    .collect();
                forms::is_coassociative_im(&vs)?
            }
        })
    }

    /// The map's point in the construction's full column layout.
    fn embed(&self, p: &[f64], width: usize) -> Vec<f64> {
        let mut out = vec![0.0; width];
        for (c, x) in self.columns.iter().zip(p) {
            out[*c] = *x;
        }
        out
    }
}

/// Agreement between an explicit map and the sampled construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCheck {
    /// Largest distance between matched points.
    pub max_distance: f64,
    /// Largest distance from a sampled direction of the construction to the
    /// span of the explicit directions, over base points where those have
    /// full rank.
    pub span_residual: f64,
    /// Largest `|1 − ‖V‖/|λ||` for maps with a documented rescaling.
    pub rescale_residual: f64,
    pub points: usize,
    pub degenerate_bases: usize,
}

impl CrossCheck {
    pub fn worst(&self) -> f64 {
        self.max_distance
            .max(self.span_residual)
            .max(self.rescale_residual)
    }
}

/// Compares `map` with `sample_points` of its construction on the grid.
///
/// With a documented rescaling `λ`, the explicit point at `t` is matched with
/// the sampled point at `λt`. Otherwise each explicit point is compared with
/// the affine fibre of the construction through the same base point.
pub fn cross_validate(map: &ExplicitMap, grid: &SampleGrid) -> Result<CrossCheck, CatalogError> {
    let imm = &map.surface.immersion;
    let cloud = constructions::sample_points(imm, map.construction, grid)?;
    let width = cloud.columns.len();
    let bases = sampling::base_grid(imm.domain(), 2, grid.base_per_axis)?;
    let fibre = grid.fibre.points(map.fibre_rank());
    let mut check = CrossCheck {
        max_distance: 0.0,
        span_residual: 0.0,
        rescale_residual: 0.0,
        points: 0,
        degenerate_bases: 0,
    };
    for (b, base) in bases.iter().enumerate() {
        let (x, y) = (base[0], base[1]);
        let rows = &cloud.rows[b * fibre.len()..(b + 1) * fibre.len()];
        let chart = fibre_chart(imm, map.construction, base, grid.mode)?;
        let explicit_dirs: Vec<Vec<f64>> = map
            .fibre_directions(x, y)?
            .iter()
            .map(|d| map.embed(d, width))
            .collect();
        match &map.rescale {
            Some(lambda) => {
                let l = lambda.eval(x, y)?;
                check.rescale_residual = check
                    .rescale_residual
                    .max((1.0 - linalg::norm(&explicit_dirs[0]) / l.abs()).abs());
                for (t, row) in fibre.iter().zip(rows) {
                    let scaled: Vec<f64> = t.iter().map(|tk| tk / l).collect();
                    let p = map.embed(&map.eval(x, y, &scaled)?, width);
                    check.max_distance =
                        check.max_distance.max(linalg::norm(&linalg::sub(&p, row)));
                    check.points += 1;
                }
            }
            None => {
                let on = linalg::gram_schmidt(&chart.directions).ok_or(FormsError::Degenerate)?;
                for t in &fibre {
                    let p = map.embed(&map.eval(x, y, t)?, width);
                    let rel = linalg::sub(&p, &chart.origin);
                    check.max_distance = check
                        .max_distance
                        .max(linalg::distance_to_span(&rel, &on.basis));
                    check.points += 1;
                }
            }
        }
        match linalg::gram_schmidt(&explicit_dirs) {
            Some(on) if on.volume() > 1e-6 => {
                for d in &chart.directions {
                    check.span_residual = check
                        .span_residual
                        .max(linalg::distance_to_span(d, &on.basis));
                }
            }
            _ => check.degenerate_bases += 1,
        }
    }
    Ok(check)
}
