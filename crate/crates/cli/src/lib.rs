//! Verification runs, point-cloud sampling and catalog listings behind the
//! `calbund` binary.

pub mod spec;

use std::fmt::Write as _;
use std::path::PathBuf;

use calbund_core::catalog::{self, Flags};
use calbund_core::constructions::{
    self, ConstructionError, ConstructionKind, DefectReport, SampleGrid, VerifyConfig,
};
use calbund_core::exec::Exec;
use calbund_core::immersion::{ImmersionError, Mode};
use calbund_core::sampling::FibreGrid;
use serde::Serialize;
use thiserror::Error;

pub use spec::{load_surface, Surface, SurfaceSpec};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERDICT: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Domain(#[from] ImmersionError),
    #[error("{0}")]
    Incompatible(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Output(_) => EXIT_PARSE,
            CliError::Domain(_) | CliError::Incompatible(_) => EXIT_DOMAIN,
        }
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::Immersion(e) => CliError::Domain(e),
            ConstructionError::UnknownKind(_) => CliError::Parse(e.to_string()),
            other => CliError::Incompatible(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Pass,
    Fail,
}

impl Expect {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "pass" => Ok(Expect::Pass),
            "fail" => Ok(Expect::Fail),
            _ => Err(CliError::Parse(format!(
                "expected `pass` or `fail`, got `{s}`"
            ))),
        }
    }

    fn of(passed: bool) -> Self {
        if passed {
            Expect::Pass
        } else {
            Expect::Fail
        }
    }
}

pub fn parse_mode(s: &str) -> Result<Mode, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "jet" => Ok(Mode::Jet),
        "fd" => Ok(Mode::FiniteDifference),
        _ => Err(CliError::Parse(format!(
            "unknown mode `{s}`; use jet or fd"
        ))),
    }
}

/// `a,b` with `a < b`.
pub fn parse_box(s: &str) -> Result<[f64; 2], CliError> {
    let bad = || CliError::Parse(format!("fibre box must be `a,b` with a < b, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if a < b {
        Ok([a, b])
    } else {
        Err(bad())
    }
}

/// Options shared by `verify` and `sample`. `None` falls back to the surface
/// document's `[sampling]` table and then to the library defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub construction: Option<ConstructionKind>,
    pub samples: Option<usize>,
    pub grid: Option<usize>,
    pub fibre_box: Option<[f64; 2]>,
    pub fibre_points: Option<usize>,
    pub tol: Option<f64>,
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub expect: Option<Expect>,
    pub sequential: bool,
}

impl RunConfig {
    fn construction(&self) -> Result<ConstructionKind, CliError> {
        self.construction
            .ok_or_else(|| CliError::Parse("--construction is required".into()))
    }

    fn fibre(&self, surface: &Surface) -> Result<FibreGrid, CliError> {
        let d = FibreGrid::default();
        let [lo, hi] = self
            .fibre_box
            .or(surface.sampling.fibre_box)
            .unwrap_or([d.lo, d.hi]);
        let per_axis = self
            .fibre_points
            .or(surface.sampling.fibre_points)
            .unwrap_or(d.per_axis);
        if per_axis == 0 || lo >= hi {
            return Err(CliError::Parse(
                "fibre grid needs at least one point and lo < hi".into(),
            ));
        }
        Ok(FibreGrid { lo, hi, per_axis })
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }

    fn verify_config(&self, surface: &Surface) -> Result<VerifyConfig, CliError> {
        let samples = self
            .samples
            .or(surface.sampling.samples)
            .unwrap_or(VerifyConfig::default().samples);
        if samples == 0 {
            return Err(CliError::Parse("--samples must be positive".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(CliError::Parse("--tol must be positive".into()));
            }
        }
        Ok(VerifyConfig {
            samples,
            fibre: self.fibre(surface)?,
            tol: self.tol,
            mode: self.mode.unwrap_or(Mode::Jet),
            seed: self.seed.unwrap_or(0),
            exec: self.exec(),
        })
    }

    fn sample_grid(&self, surface: &Surface) -> Result<SampleGrid, CliError> {
        let base_per_axis = self
            .grid
            .or(surface.sampling.grid)
            .unwrap_or(SampleGrid::default().base_per_axis);
        if base_per_axis == 0 {
            return Err(CliError::Parse("--grid must be positive".into()));
        }
        Ok(SampleGrid {
            base_per_axis,
            fibre: self.fibre(surface)?,
            mode: self.mode.unwrap_or(Mode::Jet),
            exec: self.exec(),
        })
    }
}

/// Verdict the construction's characterization predicts from known flags.
pub fn predicted(kind: ConstructionKind, flags: &Flags) -> Expect {
    Expect::of(match kind {
        ConstructionKind::Conormal { .. } => flags.austere,
        ConstructionKind::CoassociativeF => flags.minimal && flags.isotropic_minus,
        _ => flags.minimal,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceSection {
    pub label: String,
    pub p: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<Flags>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeSection {
    pub verdict: Expect,
    pub expected: Expect,
    /// From the surface's known flags, when it has any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Expect>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyDocument {
    pub surface: SurfaceSection,
    pub outcome: OutcomeSection,
    pub notes: Vec<String>,
    pub report: DefectReport,
}

impl VerifyDocument {
    pub fn exit_code(&self) -> u8 {
        if self.outcome.verdict == self.outcome.expected {
            EXIT_OK
        } else {
            EXIT_VERDICT
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report fields are representable")
    }
}

fn status(verdict: Expect, expected: Expect) -> &'static str {
    match (verdict, expected) {
        (Expect::Pass, Expect::Pass) => "pass",
        (Expect::Fail, Expect::Fail) => "expected failure observed",
        (Expect::Fail, Expect::Pass) => "unexpected failure",
        (Expect::Pass, Expect::Fail) => "unexpected pass",
    }
}

fn notes(kind: ConstructionKind, report: &DefectReport) -> Vec<String> {
    let x = &report.extras;
    let mut out = Vec::new();
    if let Some(s) = &x.sign_match {
        let label = if s.all_minus() && s.both == 0 {
            "minus"
        } else if s.all_plus() && s.both == 0 {
            "plus"
        } else if s.both > 0 && s.plus == 0 && s.minus == 0 && s.neither == 0 {
            "both"
        } else if s.plus == 0 && s.minus == 0 && s.both == 0 {
            "neither"
        } else {
            "mixed"
        };
        out.push(format!(
            "sign_match={label} (plus {}, minus {}, both {}, neither {})",
            s.plus, s.minus, s.both, s.neither
        ));
    }
    if let Some(a) = &x.austere {
        out.push(format!("austere defect max {:.3e}", a.max));
    }
    if let (Some(c), Some(r)) = (x.omega1_constancy, x.r6_spread) {
        let contained = c < report.tol && r < report.tol;
        out.push(format!(
            "omega1 coefficients vary by {c:.3e}; spread along omega1 {r:.3e}; {} an affine R^6",
            if contained {
                "contained in"
            } else {
                "not contained in"
            }
        ));
    }
    if let Some(r) = x.closed_form_residual {
        out.push(format!(
            "associator matches its trace closed form to {r:.3e}"
        ));
    }
    if let Some(e) = &x.exact_cayley {
        out.push(format!(
            "exact tangent spaces of the sampled total space: Cayley defect max {:.3e}",
            e.max
        ));
    }
    if let Some(o) = x.one_in_tangent {
        out.push(format!("1 lies in every tangent space to {o:.3e}"));
    }
    if let (Some(o), Some(c)) = (x.one_component, &x.coassociative_im) {
        out.push(format!(
            "real component max {o:.3e}; coassociative defect in Im O max {:.3e}",
            c.max
        ));
    }
    if matches!(kind, ConstructionKind::Conormal { .. }) {
        if let Some(l) = &x.lagrangian {
            out.push(format!("Lagrangian defect max {:.3e}", l.max));
        }
    }
    out
}

pub fn cmd_verify(surface: &Surface, cfg: &RunConfig) -> Result<VerifyDocument, CliError> {
    let kind = cfg.construction()?;
    let vcfg = cfg.verify_config(surface)?;
    let report = constructions::verify(&surface.immersion, kind, &vcfg)?;
    let verdict = Expect::of(report.verdict);
    let expected = cfg.expect.unwrap_or(Expect::Pass);
    Ok(VerifyDocument {
        surface: SurfaceSection {
            label: surface.label.clone(),
            p: surface.immersion.p(),
            n: surface.immersion.n(),
            flags: surface.flags,
            note: surface.note.clone(),
        },
        outcome: OutcomeSection {
            verdict,
            expected,
            predicted: surface.flags.map(|f| predicted(kind, &f)),
            status: status(verdict, expected).to_string(),
        },
        notes: notes(kind, &report),
        report,
    })
}

/// Comma-separated values preceded by `#` comment lines; the last comment
/// names the columns.
pub fn cmd_sample(surface: &Surface, cfg: &RunConfig) -> Result<String, CliError> {
    let kind = cfg.construction()?;
    let grid = cfg.sample_grid(surface)?;
    let cloud = constructions::sample_points(&surface.immersion, kind, &grid)?;
    if cloud.rows.is_empty() {
        return Err(ImmersionError::EmptyDomain.into());
    }
    let mut head = String::new();
    writeln!(head, "# construction: {kind}").unwrap();
    writeln!(head, "# surface: {}", surface.label).unwrap();
    writeln!(
        head,
        "# grid: {} per base axis, fibre [{}, {}] with {} per axis, mode {}",
        grid.base_per_axis,
        grid.fibre.lo,
        grid.fibre.hi,
        grid.fibre.per_axis,
        grid.mode.name()
    )
    .unwrap();
    writeln!(head, "# {}", cloud.columns.join(",")).unwrap();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(head.into_bytes());
    for row in &cloud.rows {
        w.serialize(row)
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn cmd_catalog() -> String {
    let mut s = String::new();
    writeln!(s, "# surfaces").unwrap();
    for e in catalog::entries() {
        let f = e.flags;
        writeln!(
            s,
            "{}: p={} n={} minimal={} isotropic_plus={} isotropic_minus={} austere={}; {}",
            e.label(),
            e.immersion.p(),
            e.immersion.n(),
            f.minimal,
            f.isotropic_plus,
            f.isotropic_minus,
            f.austere,
            e.description
        )
        .unwrap();
        if let Some(note) = &e.note {
            writeln!(s, "    note: {note}").unwrap();
        }
    }
    writeln!(s, "# explicit maps").unwrap();
    for name in catalog::EXPLICIT_NAMES {
        let m = catalog::explicit_calibrated(name).expect("listed names exist");
        writeln!(
            s,
            "{name}: {} over {}, fibre rank {}",
            m.construction,
            m.surface.label(),
            m.fibre_rank()
        )
        .unwrap();
    }
    s
}

/// Writes `text` to `out`, or stdout when absent.
pub fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
