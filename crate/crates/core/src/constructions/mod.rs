//! Calibrated bundle constructions over immersed curves and surfaces, with
//! whole-construction verification and point-cloud sampling.
//!
//! Every construction is linear in its fibre coordinates `t`: the sampled
//! point is `origin + Σ t_k direction_k` for a [`FibreChart`] at the base point.

mod asd;
mod conormal;
mod spinor;

pub use asd::{
    asd_coeffs, asd_covariant_derivatives, associative_tangent_basis, coassociative_tangent_basis,
    sd_coeffs, wedge, AsdFrame, CovariantDerivatives, PAIRS,
};
pub use conormal::{conormal_point, conormal_tangent_basis};
pub use spinor::{
    cayley_global, cayley_tangent_basis, clifford_pair, spinor_eigenbasis, spinor_jet,
    SpinorEigenbasis, SpinorJet, SpinorSign,
};

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::forms::{self, FormsError, G2Variant, Identification, Phase};
use crate::immersion::{
    self, FramePacket, Immersion, ImmersionError, Mode, SecondFundamentalForm, SignMatch,
};
use crate::linalg;
use crate::octonion::{self, Octonion, JE, KE};
use crate::sampling::{self, FibreGrid};

/// Unit normals sampled by the austere check when the base has dimension 3.
const AUSTERE_NORMAL_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstructionKind {
    /// Conormal bundle; the phase defaults to `i^q`, `q = n − p`.
    Conormal {
        phase: Option<f64>,
    },
    CoassociativeF,
    AssociativeE,
    CayleyPlus,
    CayleyMinus,
    Spinor3Plus,
    Spinor3Minus,
}

impl ConstructionKind {
    pub const NAMES: [&'static str; 7] = [
        "conormal",
        "coassociative_F",
        "associative_E",
        "cayley_plus",
        "cayley_minus",
        "spinor3_plus",
        "spinor3_minus",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConstructionKind::Conormal { .. } => "conormal",
            ConstructionKind::CoassociativeF => "coassociative_F",
            ConstructionKind::AssociativeE => "associative_E",
            ConstructionKind::CayleyPlus => "cayley_plus",
            ConstructionKind::CayleyMinus => "cayley_minus",
            ConstructionKind::Spinor3Plus => "spinor3_plus",
            ConstructionKind::Spinor3Minus => "spinor3_minus",
        }
    }

    pub fn spinor_sign(&self) -> Option<SpinorSign> {
        match self {
            ConstructionKind::CayleyPlus | ConstructionKind::Spinor3Plus => Some(SpinorSign::Plus),
            ConstructionKind::CayleyMinus | ConstructionKind::Spinor3Minus => {
                Some(SpinorSign::Minus)
            }
            _ => None,
        }
    }

    fn is_spinor3(&self) -> bool {
        matches!(
            self,
            ConstructionKind::Spinor3Plus | ConstructionKind::Spinor3Minus
        )
    }

    pub fn check_dims(&self, p: usize, n: usize) -> Result<(), ConstructionError> {
        let (ok, requirement) = match self {
            ConstructionKind::Conormal { .. } => (p < n, "p < n"),
            ConstructionKind::Spinor3Plus | ConstructionKind::Spinor3Minus => (n == 3, "n = 3"),
            _ => (p == 2 && n == 4, "p = 2, n = 4"),
        };
        if ok {
            Ok(())
        } else {
            Err(ConstructionError::Incompatible {
                kind: self.name(),
                requirement,
                p,
                n,
            })
        }
    }

    pub fn fibre_rank(&self, p: usize, n: usize) -> usize {
        match self {
            ConstructionKind::Conormal { .. } => n - p,
            ConstructionKind::AssociativeE => 1,
            _ => 2,
        }
    }

    /// Column names of sampled points for an immersion into `Rⁿ`.
    pub fn columns(&self, n: usize) -> Vec<String> {
        let xs = |m: usize| (1..=m).map(|i| format!("x{i}")).collect::<Vec<_>>();
        let ss = (0..4).map(|i| format!("s{i}"));
        match self {
            ConstructionKind::Conormal { .. } => xs(n)
                .into_iter()
                .chain((1..=n).map(|i| format!("xi{i}")))
                .collect(),
            ConstructionKind::CoassociativeF | ConstructionKind::AssociativeE => ["w1", "w2", "w3"]
                .map(String::from)
                .into_iter()
                .chain(xs(4))
                .collect(),
            ConstructionKind::CayleyPlus | ConstructionKind::CayleyMinus => {
                ss.chain(xs(4)).collect()
            }
            ConstructionKind::Spinor3Plus | ConstructionKind::Spinor3Minus => {
                ss.chain(xs(3)).collect()
            }
        }
    }
}

impl fmt::Display for ConstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructionKind::Conormal { phase: Some(theta) } => {
                write!(f, "conormal(theta={theta})")
            }
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for ConstructionKind {
    type Err = ConstructionError;

    /// Names are case-insensitive; `conormal(theta=X)` sets the phase.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let unknown = || ConstructionError::UnknownKind(s.to_string());
        if let Some(rest) = lower.strip_prefix("conormal(") {
            let theta = rest
                .strip_suffix(')')
                .and_then(|r| r.trim().strip_prefix("theta"))
                .and_then(|r| r.trim().strip_prefix('='))
                .and_then(|r| r.trim().parse::<f64>().ok())
                .ok_or_else(unknown)?;
            return Ok(ConstructionKind::Conormal { phase: Some(theta) });
        }
        Ok(match lower.as_str() {
            "conormal" => ConstructionKind::Conormal { phase: None },
            "coassociative_f" => ConstructionKind::CoassociativeF,
            "associative_e" => ConstructionKind::AssociativeE,
            "cayley_plus" => ConstructionKind::CayleyPlus,
            "cayley_minus" => ConstructionKind::CayleyMinus,
            "spinor3_plus" => ConstructionKind::Spinor3Plus,
            "spinor3_minus" => ConstructionKind::Spinor3Minus,
            _ => return Err(unknown()),
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("{kind} needs {requirement}, got p = {p}, n = {n}")]
    Incompatible {
        kind: &'static str,
        requirement: &'static str,
        p: usize,
        n: usize,
    },
    #[error(transparent)]
    Immersion(#[from] ImmersionError),
    #[error("at {point:?}: {source}")]
    Forms { point: Vec<f64>, source: FormsError },
    #[error("unknown construction `{0}`; expected one of {names}", names = ConstructionKind::NAMES.join(", "))]
    UnknownKind(String),
}

/// The surface the construction actually runs on, and how base points map
/// onto it. `spinor3` kinds work in `R ⊕ R³` with the new axis first.
struct Prepared {
    surface: Immersion,
    from_curve: bool,
}

impl Prepared {
    fn new(imm: &Immersion, kind: ConstructionKind) -> Result<Self, ConstructionError> {
        kind.check_dims(imm.p(), imm.n())?;
        if !kind.is_spinor3() {
            return Ok(Prepared {
                surface: imm.clone(),
                from_curve: false,
            });
        }
        let from_curve = imm.p() == 1;
        let surface = if from_curve {
            imm.cylinder_over_curve()?
        } else {
            imm.prepend_zero()?
        };
        Ok(Prepared {
            surface,
            from_curve,
        })
    }

    fn lift(&self, point: &[f64]) -> Vec<f64> {
        if self.from_curve {
            vec![0.0, point[0]]
        } else {
            point.to_vec()
        }
    }

    fn base_points(
        &self,
        imm: &Immersion,
        samples: usize,
        seed: u64,
    ) -> Result<Vec<Vec<f64>>, ImmersionError> {
        let pts = sampling::base_points(imm.domain(), imm.p(), samples, seed)?;
        Ok(pts.iter().map(|p| self.lift(p)).collect())
    }
}

/// Global coordinates of a construction's fibre over one base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FibreChart {
    pub origin: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl FibreChart {
    pub fn at(&self, t: &[f64]) -> Vec<f64> {
        let mut out = self.origin.clone();
        for (tk, d) in t.iter().zip(&self.directions) {
            linalg::axpy(*tk, d, &mut out);
        }
        out
    }
}

fn chart_from_packet(kind: ConstructionKind, fp: &FramePacket) -> FibreChart {
    let unit = |k: usize, m: usize| {
        let mut t = vec![0.0; m];
        t[k] = 1.0;
        t
    };
    match kind {
        ConstructionKind::Conormal { .. } => {
            let q = fp.nu.len();
            let origin = conormal_point(fp, &vec![0.0; q]);
            let directions = (0..q)
                .map(|k| linalg::sub(&conormal_point(fp, &unit(k, q)), &origin))
                .collect();
            FibreChart { origin, directions }
        }
        ConstructionKind::CoassociativeF | ConstructionKind::AssociativeE => {
            let c = AsdFrame::from_packet(fp).coeffs();
            let ks: &[usize] = if kind == ConstructionKind::AssociativeE {
                &[0]
            } else {
                &[1, 2]
            };
            FibreChart {
                origin: [&[0.0; 3][..], &fp.x].concat(),
                directions: ks
                    .iter()
                    .map(|&k| [&c[k][..], &[0.0; 4]].concat())
                    .collect(),
            }
        }
        _ => {
            let sign = kind.spinor_sign().expect("spinor kinds");
            let q = spinor_eigenbasis(fp).basis(sign);
            let keep = |o: Octonion| -> Vec<f64> {
                let c = o.coeffs();
                if kind.is_spinor3() {
                    c.iter()
                        .enumerate()
                        .filter(|(i, _)| *i != octonion::E)
                        .map(|(_, x)| *x)
                        .collect()
                } else {
                    c.to_vec()
                }
            };
            FibreChart {
                origin: keep(Octonion::from_he(&fp.x)),
                directions: q.iter().map(|o| keep(*o)).collect(),
            }
        }
    }
}

/// Fibre chart at a parameter point of `imm` (a curve parameter for
/// `spinor3` kinds over curves).
pub fn fibre_chart(
    imm: &Immersion,
    kind: ConstructionKind,
    point: &[f64],
    mode: Mode,
) -> Result<FibreChart, ConstructionError> {
    let prep = Prepared::new(imm, kind)?;
    let fp = prep.surface.frames(&prep.lift(point), mode)?;
    Ok(chart_from_packet(kind, &fp))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub samples: usize,
    pub fibre: FibreGrid,
    /// Defaults to the mode's tolerance.
    pub tol: Option<f64>,
    pub mode: Mode,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 200,
            fibre: FibreGrid::default(),
            tol: None,
            mode: Mode::Jet,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl VerifyConfig {
    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or_else(|| self.mode.default_tol())
    }
}

/// Maximum and mean of absolute values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Stats {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut s = Stats::default();
        let mut sum = 0.0;
        for v in values {
            s.max = s.max.max(v.abs());
            sum += v.abs();
            s.count += 1;
        }
        if s.count > 0 {
            s.mean = sum / s.count as f64;
        }
        s
    }
}

/// How many base points satisfied each isotropy sign.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SignCounts {
    pub plus: usize,
    pub minus: usize,
    pub both: usize,
    pub neither: usize,
}

impl SignCounts {
    fn add(&mut self, m: &SignMatch) {
        match (m.plus, m.minus) {
            (true, true) => self.both += 1,
            (true, false) => self.plus += 1,
            (false, true) => self.minus += 1,
            (false, false) => self.neither += 1,
        }
    }

    /// `minus` (or `both`) held at every counted point.
    pub fn all_minus(&self) -> bool {
        self.plus == 0 && self.neither == 0 && self.minus + self.both > 0
    }

    pub fn all_plus(&self) -> bool {
        self.minus == 0 && self.neither == 0 && self.plus + self.both > 0
    }
}

/// Construction-specific diagnostics; absent entries do not apply.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Extras {
    /// `|H|` over base points.
    pub mean_curvature: Stats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quartic: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_match: Option<SignCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub austere: Option<Stats>,
    /// Largest deviation of `ω¹`'s ambient coefficients from their value at
    /// the first base point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1_constancy: Option<f64>,
    /// Spread of the sampled points along that fixed `ω¹` direction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r6_spread: Option<f64>,
    /// Largest `|[E₁, E₂, F₁] − t₁((−2 Tr A²) je + (2 Tr A¹) ke)|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_residual: Option<f64>,
    /// Largest distance from `1` to a tangent space.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_in_tangent: Option<f64>,
    /// Largest real part of a sampled point or tangent vector.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_component: Option<f64>,
    /// Cayley defect of the exact tangent spaces of the sampled total space.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_cayley: Option<Stats>,
    /// Coassociative defect of the exact tangent spaces inside `Im O`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coassociative_im: Option<Stats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub point: Vec<f64>,
    pub fibre: Vec<f64>,
    pub defect: f64,
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub construction: String,
    pub p: usize,
    pub n: usize,
    pub mode: Mode,
    pub tol: f64,
    pub seed: u64,
    pub base_samples: usize,
    pub fibre_points: usize,
    pub fibre_box: FibreGrid,
    /// Defect on orthonormalized spans.
    pub defect: Stats,
    /// The same quantity on the constructed spanning vectors.
    pub raw_defect: Stats,
    pub verdict: bool,
    pub extras: Extras,
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

#[derive(Default)]
struct BaseEval {
    records: Vec<SampleRecord>,
    h: f64,
    quartic: Option<f64>,
    sign: Option<SignMatch>,
    lagrangian: Vec<f64>,
    phase: Vec<f64>,
    austere: Option<f64>,
    omega1: Option<[f64; 3]>,
    fibre_rows: Vec<[f64; 3]>,
    closed_form: Vec<f64>,
    one_in_tangent: Vec<f64>,
    one_component: Vec<f64>,
    coassociative_im: Vec<f64>,
    exact_cayley: Vec<f64>,
}

fn evaluate(
    prep: &Prepared,
    kind: ConstructionKind,
    point: &[f64],
    fibre_pts: &[Vec<f64>],
    mode: Mode,
    tol: f64,
) -> Result<BaseEval, ConstructionError> {
    let fp = prep.surface.frames(point, mode)?;
    let sff = SecondFundamentalForm::from_frames(&fp);
    let forms_err = |source: FormsError| ConstructionError::Forms {
        point: point.to_vec(),
        source,
    };
    let mut ev = BaseEval {
        h: sff.mean_curvature_norm(),
        ..BaseEval::default()
    };
    if fp.p() == 2 && fp.n() == 4 {
        let iso = immersion::isotropy_report(&fp, &sff, tol);
        ev.quartic = Some(iso.q.norm());
        ev.sign = Some(iso.sign_match);
    }
    let mut record = |t: &Vec<f64>, defect: f64, raw: f64| {
        ev.records.push(SampleRecord {
            point: point.to_vec(),
            fibre: t.clone(),
            defect,
            raw,
        })
    };
    match kind {
        ConstructionKind::Conormal { phase } => {
            let q = fp.n() - fp.p();
            let theta = phase.unwrap_or(q as f64 * FRAC_PI_2);
            let rot = num_complex::Complex64::from_polar(1.0, -theta);
            let mut lag = Vec::new();
            let mut ph = Vec::new();
            for t in fibre_pts {
                let basis = conormal_tangent_basis(&fp, &sff, t);
                let d =
                    forms::is_special_lagrangian(&basis, Phase::new(theta)).map_err(forms_err)?;
                record(
                    t,
                    d.omega.max(d.im),
                    d.raw_omega.max((rot * d.raw_big_omega).im.abs()),
                );
                lag.push(d.omega);
                ph.push(d.im);
            }
            ev.lagrangian = lag;
            ev.phase = ph;
            ev.austere = Some(immersion::austere_defect(&sff, AUSTERE_NORMAL_SAMPLES));
        }
        ConstructionKind::CoassociativeF => {
            let frame = AsdFrame::from_packet(&fp);
            let mut rows = Vec::new();
            for t in fibre_pts {
                let basis = coassociative_tangent_basis(&sff, t[0], t[1]);
                let d = forms::is_coassociative(&basis, G2Variant::Minus).map_err(forms_err)?;
                record(t, d.value, d.raw);
                rows.push(frame.fibre_point(&[0.0, t[0], t[1]]));
            }
            ev.omega1 = Some(frame.coeffs()[0]);
            ev.fibre_rows = rows;
        }
        ConstructionKind::AssociativeE => {
            let ident = Identification::standard();
            let mut closed = Vec::new();
            for t in fibre_pts {
                let basis = associative_tangent_basis(&sff, t[0]);
                let d = forms::is_associative(&basis, &ident).map_err(forms_err)?;
                record(t, d.value, d.raw);
                let o: Vec<Octonion> = basis.iter().map(|v| ident.apply(v).octonion()).collect();
                let measured = octonion::associator(o[0], o[1], o[2]);
                let expected = Octonion::basis(JE).scale(-2.0 * t[0] * sff.trace(1))
                    + Octonion::basis(KE).scale(2.0 * t[0] * sff.trace(0));
                closed.push((measured - expected).norm());
            }
            ev.closed_form = closed;
        }
        _ => {
            let sign = kind.spinor_sign().expect("spinor kinds");
            let (mut one_in, mut one_re, mut coass, mut exact) =
                (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for t in fibre_pts {
                let tt = [t[0], t[1]];
                let basis = cayley_tangent_basis(&sff, sign, tt);
                let d = forms::is_cayley(&basis).map_err(forms_err)?;
                record(t, d.value, d.raw);
                let (pt, global) = cayley_global(&fp, &sff, sign, tt);
                exact.push(forms::is_cayley(&global).map_err(forms_err)?.value);
                match sign {
                    SpinorSign::Plus => {
                        let span: Vec<Vec<f64>> =
                            global.iter().map(|o| o.coeffs().to_vec()).collect();
                        let on = linalg::gram_schmidt(&span)
                            .ok_or_else(|| forms_err(FormsError::Degenerate))?;
                        one_in.push(linalg::distance_to_span(
                            Octonion::one().coeffs(),
                            &on.basis,
                        ));
                    }
                    SpinorSign::Minus => {
                        one_re.push(
                            global
                                .iter()
                                .chain([&pt])
                                .fold(0.0, |m: f64, o| m.max(o.re().abs())),
                        );
                        let ims = global.map(|o| o.im());
                        coass.push(forms::is_coassociative_im(&ims).map_err(forms_err)?.value);
                    }
                }
            }
            ev.one_in_tangent = one_in;
            ev.one_component = one_re;
            ev.coassociative_im = coass;
            ev.exact_cayley = exact;
        }
    }
    Ok(ev)
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

/// Sample base points and fibre points, test each constructed tangent space,
/// and aggregate. The verdict is `defect.max < tol`.
pub fn verify(
    imm: &Immersion,
    kind: ConstructionKind,
    cfg: &VerifyConfig,
) -> Result<DefectReport, ConstructionError> {
    let prep = Prepared::new(imm, kind)?;
    let tol = cfg.tol();
    let bases = prep.base_points(imm, cfg.samples, cfg.seed)?;
    let fibre_pts = cfg.fibre.points(kind.fibre_rank(imm.p(), imm.n()));
    let evals: Vec<BaseEval> = cfg
        .exec
        .map(&bases, |pt| {
            evaluate(&prep, kind, pt, &fibre_pts, cfg.mode, tol)
        })
        .into_iter()
        .collect::<Result<_, _>>()?;

    let records: Vec<SampleRecord> = evals
        .iter()
        .flat_map(|e| e.records.iter().cloned())
        .collect();
    let defect = Stats::of(records.iter().map(|r| r.defect));
    let mut extras = Extras {
        mean_curvature: Stats::of(evals.iter().map(|e| e.h)),
        ..Extras::default()
    };
    if evals.iter().any(|e| e.quartic.is_some()) {
        extras.quartic = Some(Stats::of(evals.iter().filter_map(|e| e.quartic)));
        let mut counts = SignCounts::default();
        evals
            .iter()
            .filter_map(|e| e.sign.as_ref())
            .for_each(|m| counts.add(m));
        extras.sign_match = Some(counts);
    }
    match kind {
        ConstructionKind::Conormal { .. } => {
            extras.lagrangian = Some(Stats::of(
                evals.iter().flat_map(|e| e.lagrangian.iter().copied()),
            ));
            extras.phase = Some(Stats::of(
                evals.iter().flat_map(|e| e.phase.iter().copied()),
            ));
            extras.austere = Some(Stats::of(evals.iter().filter_map(|e| e.austere)));
        }
        ConstructionKind::CoassociativeF => {
            let reference = evals[0].omega1.expect("recorded for this kind");
            extras.omega1_constancy = Some(max_of(evals.iter().map(|e| {
                let w = e.omega1.expect("recorded for this kind");
                linalg::norm(&linalg::sub(&w, &reference))
            })));
            let proj: Vec<f64> = evals
                .iter()
                .flat_map(|e| e.fibre_rows.iter().map(|r| linalg::dot(r, &reference)))
                .collect();
            let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            extras.r6_spread = Some(hi - lo);
        }
        ConstructionKind::AssociativeE => {
            extras.closed_form_residual = Some(max_of(
                evals.iter().flat_map(|e| e.closed_form.iter().copied()),
            ));
        }
        _ => {
            extras.exact_cayley = Some(Stats::of(
                evals.iter().flat_map(|e| e.exact_cayley.iter().copied()),
            ));
            if kind.spinor_sign() == Some(SpinorSign::Plus) {
                extras.one_in_tangent = Some(max_of(
                    evals.iter().flat_map(|e| e.one_in_tangent.iter().copied()),
                ));
            } else {
                extras.one_component = Some(max_of(
                    evals.iter().flat_map(|e| e.one_component.iter().copied()),
                ));
                extras.coassociative_im = Some(Stats::of(
                    evals
                        .iter()
                        .flat_map(|e| e.coassociative_im.iter().copied()),
                ));
            }
        }
    }
    Ok(DefectReport {
        construction: kind.to_string(),
        p: imm.p(),
        n: imm.n(),
        mode: cfg.mode,
        tol,
        seed: cfg.seed,
        base_samples: bases.len(),
        fibre_points: fibre_pts.len(),
        fibre_box: cfg.fibre,
        raw_defect: Stats::of(records.iter().map(|r| r.raw)),
        verdict: defect.max < tol,
        defect,
        extras,
        records,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub base_per_axis: usize,
    pub fibre: FibreGrid,
    pub mode: Mode,
    pub exec: Exec,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid {
            base_per_axis: 20,
            fibre: FibreGrid::default(),
            mode: Mode::Jet,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCloud {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Points of the constructed total space over a tensor grid of base points
/// (base index outer, fibre index inner).
pub fn sample_points(
    imm: &Immersion,
    kind: ConstructionKind,
    grid: &SampleGrid,
) -> Result<PointCloud, ConstructionError> {
    let prep = Prepared::new(imm, kind)?;
    let bases: Vec<Vec<f64>> = sampling::base_grid(imm.domain(), imm.p(), grid.base_per_axis)?
        .iter()
        .map(|p| prep.lift(p))
        .collect();
    let fibre_pts = grid.fibre.points(kind.fibre_rank(imm.p(), imm.n()));
    let charts: Vec<FibreChart> = grid
        .exec
        .map(&bases, |pt| -> Result<FibreChart, ConstructionError> {
            Ok(chart_from_packet(
                kind,
                &prep.surface.frames(pt, grid.mode)?,
            ))
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    Ok(PointCloud {
        columns: kind.columns(imm.n()),
        rows: charts
            .iter()
            .flat_map(|c| fibre_pts.iter().map(move |t| c.at(t)))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr};
    use crate::immersion::Domain;

    fn graph(f1: &str, f2: &str) -> Immersion {
        Immersion::graph(
            parse(f1).unwrap(),
            parse(f2).unwrap(),
            Domain::rect((-1.0, 1.0), (-1.0, 1.0)),
        )
        .unwrap()
    }

    fn quick() -> VerifyConfig {
        VerifyConfig {
            samples: 20,
            fibre: FibreGrid {
                per_axis: 3,
                ..FibreGrid::default()
            },
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for name in ConstructionKind::NAMES {
            let k: ConstructionKind = name.parse().unwrap();
            assert_eq!(k.name(), name);
            assert_eq!(k.to_string().parse::<ConstructionKind>().unwrap(), k);
        }
        let k: ConstructionKind = "conormal(theta=0.25)".parse().unwrap();
        assert_eq!(k, ConstructionKind::Conormal { phase: Some(0.25) });
        assert_eq!(k.to_string().parse::<ConstructionKind>().unwrap(), k);
        assert!("cayley".parse::<ConstructionKind>().is_err());
        assert!("conormal(theta=)".parse::<ConstructionKind>().is_err());
    }

    #[test]
    fn dimensions_are_checked() {
        let sphere = Immersion::new(
            2,
            vec![
                parse("cos(u)*cos(v)").unwrap(),
                parse("cos(u)*sin(v)").unwrap(),
                parse("sin(u)").unwrap(),
            ],
            Domain::rect((-1.0, 1.0), (0.0, 1.0)),
        )
        .unwrap();
        for kind in ["coassociative_F", "associative_E", "cayley_plus"] {
            assert!(matches!(
                verify(&sphere, kind.parse().unwrap(), &quick()),
                Err(ConstructionError::Incompatible { .. })
            ));
        }
        assert!(verify(&graph("u", "v"), ConstructionKind::Spinor3Plus, &quick()).is_err());
    }

    #[test]
    fn flat_plane_passes_everything() {
        let plane = graph("0", "0");
        for name in ConstructionKind::NAMES
            .iter()
            .filter(|n| !n.starts_with("spinor3"))
        {
            let r = verify(&plane, name.parse().unwrap(), &quick()).unwrap();
            assert!(r.verdict, "{name}: {:?}", r.defect);
            assert!(r.defect.max < 1e-14);
        }
    }

    #[test]
    fn columns_match_rows() {
        let imm = graph("u*v", "0");
        for name in ["conormal", "associative_E", "cayley_minus"] {
            let kind: ConstructionKind = name.parse().unwrap();
            let cloud = sample_points(
                &imm,
                kind,
                &SampleGrid {
                    base_per_axis: 3,
                    ..SampleGrid::default()
                },
            )
            .unwrap();
            assert!(cloud.rows.iter().all(|r| r.len() == cloud.columns.len()));
            let rank = kind.fibre_rank(2, 4);
            assert_eq!(cloud.rows.len(), 9 * 5usize.pow(rank as u32));
        }
    }

    #[test]
    fn exact_positive_bundle_is_cayley_over_minimal_surfaces() {
        let cfg = quick();
        for (f1, f2) in [
            ("exp(u)*cos(v)", "exp(u)*sin(v)"),
            ("exp(u)*cos(v)", "-exp(u)*sin(v)"),
        ] {
            let r = verify(&graph(f1, f2), ConstructionKind::CayleyPlus, &cfg).unwrap();
            assert!(r.extras.exact_cayley.unwrap().max < 1e-9, "{f1}, {f2}");
        }
        let r = verify(&graph("u^2", "v^2"), ConstructionKind::CayleyPlus, &cfg).unwrap();
        assert!(r.extras.exact_cayley.unwrap().max > 1e-2);
    }

    #[test]
    fn exact_negative_bundle_needs_the_anti_isotropic_sign() {
        let cfg = quick();
        let anti = verify(
            &graph("exp(u)*cos(v)", "-exp(u)*sin(v)"),
            ConstructionKind::CayleyMinus,
            &cfg,
        )
        .unwrap();
        assert!(anti.extras.sign_match.unwrap().all_minus());
        assert!(anti.extras.exact_cayley.unwrap().max < 1e-9);
        assert!(anti.extras.coassociative_im.unwrap().max < 1e-9);
        let holo = verify(
            &graph("exp(u)*cos(v)", "exp(u)*sin(v)"),
            ConstructionKind::CayleyMinus,
            &cfg,
        )
        .unwrap();
        assert!(holo.verdict, "the local rule accepts every minimal surface");
        assert!(holo.extras.exact_cayley.unwrap().max > 1e-2);
    }

    #[test]
    fn standard_position_rule_differs_from_the_exact_derivative_by_the_jm_variation() {
        // at the origin of a graph with vanishing gradient the frame is standard
        let imm = graph("(u^2 - v^2)/2 + 0.3*u^2", "u*v");
        let fp = imm.frames(&[0.0, 0.0], Mode::Jet).unwrap();
        let sff = SecondFundamentalForm::from_frames(&fp);
        let djm = spinor_jet(&fp, &sff, SpinorSign::Plus).dq.map(|d| d[1]);
        let jm = spinor_eigenbasis(&fp).jm;
        for sign in [SpinorSign::Plus, SpinorSign::Minus] {
            let t = [1.5, -0.5];
            let local = cayley_tangent_basis(&sff, sign, t);
            let (_, exact) = cayley_global(&fp, &sff, sign, t);
            let f: Vec<Vec<f64>> = local[2..].iter().map(|o| o.coeffs().to_vec()).collect();
            let on = linalg::gram_schmidt(&f).unwrap();
            for k in 0..2 {
                let mut gap = exact[k] - local[k];
                assert!(linalg::distance_to_span(gap.coeffs(), &on.basis) > 0.1);
                for j in 0..2 {
                    gap = gap - (jm * (djm[k] * local[2 + j])).scale(0.5 * t[j]);
                }
                assert!(
                    linalg::distance_to_span(gap.coeffs(), &on.basis) < 1e-14,
                    "{sign:?} E{}",
                    k + 1
                );
            }
        }
    }

    #[test]
    fn spinor3_curves() {
        let line = Immersion::new(
            1,
            vec![Expr::u(), parse("2*u").unwrap(), parse("1 - u").unwrap()],
            Domain::interval((-1.0, 1.0)),
        )
        .unwrap();
        assert!(
            verify(&line, ConstructionKind::Spinor3Plus, &quick())
                .unwrap()
                .verdict
        );
        let helix = Immersion::new(
            1,
            vec![
                parse("cos(u)").unwrap(),
                parse("sin(u)").unwrap(),
                parse("u").unwrap(),
            ],
            Domain::interval((-1.0, 1.0)),
        )
        .unwrap();
        let r = verify(&helix, ConstructionKind::Spinor3Minus, &quick()).unwrap();
        assert!(!r.verdict && r.defect.max > 0.1);
        let cloud = sample_points(
            &line,
            ConstructionKind::Spinor3Plus,
            &SampleGrid {
                base_per_axis: 4,
                ..SampleGrid::default()
            },
        )
        .unwrap();
        assert_eq!(cloud.rows.len(), 4 * 25);
        assert_eq!(cloud.columns.len(), 7);
    }
}
