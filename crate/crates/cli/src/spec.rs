//! Surface specification documents.

use std::collections::BTreeMap;
use std::path::Path;

use calbund_core::catalog::{self, CatalogEntry, CatalogError, Flags};
use calbund_core::expr::parse;
use calbund_core::immersion::{Domain, Immersion, ImmersionError};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    /// `(u, v, f¹, f²)` from two component expressions.
    Graph,
    Catalog,
    /// All ambient components given explicitly.
    Parametric,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub u: [f64; 2],
    pub v: Option<[f64; 2]>,
    /// Points where this expression is `>= 0` are excluded.
    pub exclude: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub samples: Option<usize>,
    pub fibre_box: Option<[f64; 2]>,
    pub fibre_points: Option<usize>,
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    #[serde(default)]
    pub components: Vec<String>,
    /// Base dimension of a parametric surface.
    pub base_dim: Option<usize>,
    pub name: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Overrides the catalog domain when present.
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub sampling: SamplingSpec,
}

/// A loaded surface together with what is known about it.
#[derive(Debug, Clone)]
pub struct Surface {
    pub label: String,
    pub immersion: Immersion,
    pub flags: Option<Flags>,
    pub note: Option<String>,
    pub sampling: SamplingSpec,
}

impl From<CatalogEntry> for Surface {
    fn from(e: CatalogEntry) -> Self {
        Surface {
            label: format!("catalog:{}", e.reference()),
            flags: Some(e.flags),
            note: e.note,
            immersion: e.immersion,
            sampling: SamplingSpec::default(),
        }
    }
}

fn catalog_error(e: CatalogError) -> CliError {
    match e {
        CatalogError::Immersion(e) => e.into(),
        other => CliError::Parse(other.to_string()),
    }
}

fn expr(src: &str) -> Result<calbund_core::expr::Expr, CliError> {
    parse(src).map_err(|e| CliError::Parse(format!("`{src}`: {e}")))
}

impl DomainSpec {
    fn build(&self, p: usize) -> Result<Domain, CliError> {
        let mut d = match (p, self.v) {
            (1, _) => Domain::interval((self.u[0], self.u[1])),
            (_, Some(v)) => Domain::rect((self.u[0], self.u[1]), (v[0], v[1])),
            (_, None) => return Err(CliError::Parse("domain.v is required for surfaces".into())),
        };
        if let Some(ex) = &self.exclude {
            d = d.excluding(expr(ex)?);
        }
        Ok(d)
    }
}

impl SurfaceSpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn build(self) -> Result<Surface, CliError> {
        let sampling = self.sampling.clone();
        let mut surface = match self.kind {
            SurfaceKind::Catalog => {
                let name = self
                    .name
                    .as_deref()
                    .ok_or_else(|| CliError::Parse("catalog surfaces need `name`".into()))?;
                let params: Vec<(String, f64)> =
                    self.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
                let mut entry = catalog::lookup(name, &params).map_err(catalog_error)?;
                if let Some(d) = &self.domain {
                    let imm = &entry.immersion;
                    entry.immersion =
                        Immersion::new(imm.p(), imm.components().to_vec(), d.build(imm.p())?)?;
                }
                Surface::from(entry)
            }
            SurfaceKind::Graph => {
                let [f1, f2] = <[String; 2]>::try_from(self.components.clone()).map_err(|_| {
                    CliError::Parse("graph surfaces need exactly two components".into())
                })?;
                let domain = self.domain_or_missing()?.build(2)?;
                Surface {
                    label: format!("graph({f1}, {f2})"),
                    immersion: Immersion::graph(expr(&f1)?, expr(&f2)?, domain)?,
                    flags: None,
                    note: None,
                    sampling: SamplingSpec::default(),
                }
            }
            SurfaceKind::Parametric => {
                let p = self.base_dim.unwrap_or(2);
                let components = self
                    .components
                    .iter()
                    .map(|c| expr(c))
                    .collect::<Result<Vec<_>, _>>()?;
                let domain = self.domain_or_missing()?.build(p)?;
                Surface {
                    label: format!("parametric({})", self.components.join(", ")),
                    immersion: Immersion::new(p, components, domain).map_err(|e| match e {
                        ImmersionError::Dimensions { .. } | ImmersionError::CurveUsesV => {
                            CliError::Parse(e.to_string())
                        }
                        other => other.into(),
                    })?,
                    flags: None,
                    note: None,
                    sampling: SamplingSpec::default(),
                }
            }
        };
        surface.sampling = sampling;
        Ok(surface)
    }

    fn domain_or_missing(&self) -> Result<&DomainSpec, CliError> {
        self.domain
            .as_ref()
            .ok_or_else(|| CliError::Parse("`domain` is required".into()))
    }
}

/// `catalog:<reference>` or a path to a specification document.
pub fn load_surface(arg: &str) -> Result<Surface, CliError> {
    if let Some(reference) = arg.strip_prefix("catalog:") {
        return catalog::lookup_ref(reference)
            .map(Surface::from)
            .map_err(catalog_error);
    }
    let text = std::fs::read_to_string(Path::new(arg))
        .map_err(|e| CliError::Parse(format!("{arg}: {e}")))?;
    SurfaceSpec::from_toml(&text)?.build()
}
