//! Calibrating forms and pass/fail tests on spanning sets of tangent vectors.
//!
//! Coordinates of a [`SplitVector`] follow the bundle's fixed global order:
//! `base ‖ fibre` for cotangent bundles, and `fibre ‖ base` for the
//! octonionic bundles so that coordinates line up with the octonion basis.
//!
//! | tag             | base | fibre | coordinate order                     |
//! |-----------------|------|-------|--------------------------------------|
//! | `Cotangent(n)`  | n    | n     | `ē_1..ē_n, ě^1..ě^n`                 |
//! | `Asd4`          | 4    | 3     | `ω̌¹ ω̌² ω̌³ ē_1..ē_4` ↔ `i j k e ie je ke` |
//! | `SpinorMinus4`  | 4    | 4     | `1 i j k e ie je ke`                 |
//! | `Spinor3`       | 3    | 4     | `1 i j k ie je ke`                   |

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, gram_schmidt};
use crate::octonion::{self, ImOctonion, Octonion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleTag {
    Cotangent(usize),
    Asd4,
    SpinorMinus4,
    Spinor3,
}

impl BundleTag {
    pub fn base_dim(self) -> usize {
        match self {
            BundleTag::Cotangent(n) => n,
            BundleTag::Asd4 | BundleTag::SpinorMinus4 => 4,
            BundleTag::Spinor3 => 3,
        }
    }

    pub fn fibre_dim(self) -> usize {
        match self {
            BundleTag::Cotangent(n) => n,
            BundleTag::Asd4 => 3,
            BundleTag::SpinorMinus4 | BundleTag::Spinor3 => 4,
        }
    }

    pub fn dim(self) -> usize {
        self.base_dim() + self.fibre_dim()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("bundle mismatch: expected {expected:?}, found {found:?}")]
    TagMismatch {
        expected: BundleTag,
        found: BundleTag,
    },
    #[error("{tag:?} expects {expected} components, found {found}")]
    Dimension {
        tag: BundleTag,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} vectors, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("spanning set is linearly dependent")]
    Degenerate,
}

/// A tangent vector to a bundle total space, split into base and fibre parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitVector {
    tag: BundleTag,
    base: Vec<f64>,
    fibre: Vec<f64>,
}

impl SplitVector {
    pub fn new(tag: BundleTag, base: Vec<f64>, fibre: Vec<f64>) -> Result<Self, FormsError> {
        for (part, expected) in [(&base, tag.base_dim()), (&fibre, tag.fibre_dim())] {
            if part.len() != expected {
                return Err(FormsError::Dimension {
                    tag,
                    expected,
                    found: part.len(),
                });
            }
        }
        Ok(SplitVector { tag, base, fibre })
    }

    pub fn zero(tag: BundleTag) -> Self {
        SplitVector {
            tag,
            base: vec![0.0; tag.base_dim()],
            fibre: vec![0.0; tag.fibre_dim()],
        }
    }

    /// `ē_i`.
    pub fn base_unit(tag: BundleTag, i: usize) -> Self {
        let mut v = SplitVector::zero(tag);
        v.base[i] = 1.0;
        v
    }

    /// `ě^k`, `ω̌^k` or the k-th spinor direction.
    pub fn fibre_unit(tag: BundleTag, k: usize) -> Self {
        let mut v = SplitVector::zero(tag);
        v.fibre[k] = 1.0;
        v
    }

    pub fn tag(&self) -> BundleTag {
        self.tag
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn fibre(&self) -> &[f64] {
        &self.fibre
    }

    pub fn base_mut(&mut self) -> &mut [f64] {
        &mut self.base
    }

    pub fn fibre_mut(&mut self) -> &mut [f64] {
        &mut self.fibre
    }

    pub fn coords(&self) -> Vec<f64> {
        match self.tag {
            BundleTag::Cotangent(_) => [self.base.as_slice(), &self.fibre].concat(),
            _ => [self.fibre.as_slice(), &self.base].concat(),
        }
    }

    pub fn from_coords(tag: BundleTag, c: &[f64]) -> Result<Self, FormsError> {
        if c.len() != tag.dim() {
            return Err(FormsError::Dimension {
                tag,
                expected: tag.dim(),
                found: c.len(),
            });
        }
        let (b, f) = match tag {
            BundleTag::Cotangent(n) => (c[..n].to_vec(), c[n..].to_vec()),
            _ => {
                let m = tag.fibre_dim();
                (c[m..].to_vec(), c[..m].to_vec())
            }
        };
        SplitVector::new(tag, b, f)
    }

    /// Image in the octonions (imaginary for `Asd4`).
    pub fn to_octonion(&self) -> Option<Octonion> {
        let mut c = [0.0; 8];
        match self.tag {
            BundleTag::Cotangent(_) => return None,
            BundleTag::Asd4 => c[1..].copy_from_slice(&self.coords()),
            BundleTag::SpinorMinus4 => c.copy_from_slice(&self.coords()),
            BundleTag::Spinor3 => {
                c[..4].copy_from_slice(&self.fibre);
                c[5..].copy_from_slice(&self.base);
            }
        }
        Some(Octonion(c))
    }
}

fn check_tags(vs: &[&SplitVector]) -> Result<BundleTag, FormsError> {
    let tag = vs[0].tag;
    for v in vs {
        if v.tag != tag {
            return Err(FormsError::TagMismatch {
                expected: tag,
                found: v.tag,
            });
        }
    }
    Ok(tag)
}

fn check_count(vs: &[SplitVector], expected: usize) -> Result<BundleTag, FormsError> {
    if vs.len() != expected {
        return Err(FormsError::WrongCount {
            expected,
            found: vs.len(),
        });
    }
    check_tags(&vs.iter().collect::<Vec<_>>())
}

fn require(tag: BundleTag, expected: BundleTag) -> Result<(), FormsError> {
    if tag == expected {
        Ok(())
    } else {
        Err(FormsError::TagMismatch {
            expected,
            found: tag,
        })
    }
}

/// Orthonormal basis of the span, in the same bundle.
fn orthonormalize(vs: &[SplitVector]) -> Result<Vec<SplitVector>, FormsError> {
    let tag = vs[0].tag;
    let on = gram_schmidt(&vs.iter().map(SplitVector::coords).collect::<Vec<_>>())
        .ok_or(FormsError::Degenerate)?;
    on.basis
        .iter()
        .map(|c| SplitVector::from_coords(tag, c))
        .collect()
}

fn cotangent_dim(tag: BundleTag) -> Result<usize, FormsError> {
    match tag {
        BundleTag::Cotangent(n) => Ok(n),
        other => Err(FormsError::TagMismatch {
            expected: BundleTag::Cotangent(other.base_dim()),
            found: other,
        }),
    }
}

/// Canonical symplectic form `Σ_k ē^k ∧ ě_k`.
pub fn omega_eval(u: &SplitVector, v: &SplitVector) -> Result<f64, FormsError> {
    cotangent_dim(check_tags(&[u, v])?)?;
    Ok(u.base
        .iter()
        .zip(&u.fibre)
        .zip(v.base.iter().zip(&v.fibre))
        .map(|((ub, uf), (vb, vf))| ub * vf - uf * vb)
        .sum())
}

/// Holomorphic volume form `(ē^1 + iě_1) ∧ … ∧ (ē^n + iě_n)`.
pub fn big_omega_eval(vs: &[SplitVector]) -> Result<Complex64, FormsError> {
    let n = cotangent_dim(
        vs.first()
            .ok_or(FormsError::WrongCount {
                expected: 1,
                found: 0,
            })?
            .tag,
    )?;
    check_count(vs, n)?;
    let m = DMatrix::from_fn(n, n, |r, c| Complex64::new(vs[r].base[c], vs[r].fibre[c]));
    Ok(m.determinant())
}

/// Which anti-self-dual convention the `G2` 3-form follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum G2Variant {
    /// `Λ²₋`: `ω̌₁₂₃ + ω̌₁∧(ē₁₂ − ē₃₄) + ω̌₂∧(ē₁₃ − ē₄₂) + ω̌₃∧(ē₁₄ − ē₂₃)`.
    #[default]
    Minus,
    /// `Λ²₊`: the three mixed terms enter with `−(ē_ab + ē_cd)`.
    Plus,
}

type Term = (usize, usize, usize, f64);

/// Indices refer to `Asd4` coordinates `(ω̌¹, ω̌², ω̌³, ē_1, ē_2, ē_3, ē_4)`.
const PHI_MINUS: [Term; 7] = [
    (0, 1, 2, 1.0),
    (0, 3, 4, 1.0),
    (0, 5, 6, -1.0),
    (1, 3, 5, 1.0),
    (1, 4, 6, 1.0),
    (2, 3, 6, 1.0),
    (2, 4, 5, -1.0),
];

const PHI_PLUS: [Term; 7] = [
    (0, 1, 2, 1.0),
    (0, 3, 4, -1.0),
    (0, 5, 6, -1.0),
    (1, 3, 5, -1.0),
    (1, 4, 6, 1.0),
    (2, 3, 6, -1.0),
    (2, 4, 5, -1.0),
];

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn phi_coords(u: &[f64], v: &[f64], w: &[f64], variant: G2Variant) -> f64 {
    let terms = match variant {
        G2Variant::Minus => &PHI_MINUS,
        G2Variant::Plus => &PHI_PLUS,
    };
    terms
        .iter()
        .map(|&(a, b, c, s)| s * det3([u[a], u[b], u[c]], [v[a], v[b], v[c]], [w[a], w[b], w[c]]))
        .sum()
}

/// The `G2` 3-form on `Λ²(R⁴) ⊕ R⁴`.
pub fn phi_eval(
    u: &SplitVector,
    v: &SplitVector,
    w: &SplitVector,
    variant: G2Variant,
) -> Result<f64, FormsError> {
    require(check_tags(&[u, v, w])?, BundleTag::Asd4)?;
    Ok(phi_coords(&u.coords(), &v.coords(), &w.coords(), variant))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub theta: f64,
}

impl Phase {
    pub fn new(theta: f64) -> Self {
        Phase { theta }
    }

    /// Phase `i^q`.
    pub fn quarter_turns(q: usize) -> Self {
        Phase {
            theta: q as f64 * std::f64::consts::FRAC_PI_2,
        }
    }

    /// Representative in `[0, 2π)`.
    pub fn normalized(&self) -> f64 {
        self.theta.rem_euclid(2.0 * std::f64::consts::PI)
    }
}

/// A calibration defect on the orthonormalized span, with the same quantity
/// evaluated on the vectors as given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Defect {
    pub value: f64,
    pub raw: f64,
}

impl Defect {
    pub fn passes(&self, tol: f64) -> bool {
        self.value < tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlagDefect {
    /// Norm of `ω` restricted to the span.
    pub omega: f64,
    /// `|Im(e^{-iθ} Ω)|` on an orthonormal basis of the span.
    pub im: f64,
    pub raw_omega: f64,
    pub raw_big_omega: Complex64,
}

impl SlagDefect {
    pub fn passes(&self, tol: f64) -> bool {
        self.omega < tol && self.im < tol
    }
}

fn omega_rss(vs: &[SplitVector]) -> f64 {
    let mut s = 0.0;
    for a in 0..vs.len() {
        for b in (a + 1)..vs.len() {
            let w = omega_eval(&vs[a], &vs[b]).expect("tags checked");
            s += w * w;
        }
    }
    s.sqrt()
}

pub fn is_special_lagrangian(vs: &[SplitVector], phase: Phase) -> Result<SlagDefect, FormsError> {
    let n = cotangent_dim(
        vs.first()
            .ok_or(FormsError::WrongCount {
                expected: 1,
                found: 0,
            })?
            .tag,
    )?;
    check_count(vs, n)?;
    let on = orthonormalize(vs)?;
    let rot = Complex64::from_polar(1.0, -phase.theta);
    Ok(SlagDefect {
        omega: omega_rss(&on),
        im: (rot * big_omega_eval(&on)?).im.abs(),
        raw_omega: omega_rss(vs),
        raw_big_omega: big_omega_eval(vs)?,
    })
}

fn phi_rss(vs: &[Vec<f64>], phi: impl Fn(&[f64], &[f64], &[f64]) -> f64) -> f64 {
    let mut s = 0.0;
    for a in 0..vs.len() {
        for b in (a + 1)..vs.len() {
            for c in (b + 1)..vs.len() {
                let x = phi(&vs[a], &vs[b], &vs[c]);
                s += x * x;
            }
        }
    }
    s.sqrt()
}

/// Norm of `φ` restricted to the span of four vectors.
pub fn is_coassociative(vs: &[SplitVector], variant: G2Variant) -> Result<Defect, FormsError> {
    require(check_count(vs, 4)?, BundleTag::Asd4)?;
    let on = orthonormalize(vs)?;
    let phi = |a: &[f64], b: &[f64], c: &[f64]| phi_coords(a, b, c, variant);
    let coords = |v: &[SplitVector]| v.iter().map(SplitVector::coords).collect::<Vec<_>>();
    Ok(Defect {
        value: phi_rss(&coords(&on), phi),
        raw: phi_rss(&coords(vs), phi),
    })
}

/// Norm of the octonionic `φ(a, b, c) = ⟨ab, c⟩` restricted to the span of
/// four imaginary octonions.
pub fn is_coassociative_im(vs: &[ImOctonion]) -> Result<Defect, FormsError> {
    if vs.len() != 4 {
        return Err(FormsError::WrongCount {
            expected: 4,
            found: vs.len(),
        });
    }
    let raw: Vec<Vec<f64>> = vs.iter().map(|v| v.coords().to_vec()).collect();
    let on = gram_schmidt(&raw).ok_or(FormsError::Degenerate)?;
    let phi = |a: &[f64], b: &[f64], c: &[f64]| {
        let o = |x: &[f64]| ImOctonion::from_coords(x).octonion();
        octonion::phi_im(&o(a), &o(b), &o(c))
    };
    Ok(Defect {
        value: phi_rss(&on.basis, phi),
        raw: phi_rss(&raw, phi),
    })
}

/// Orthogonal map from `Asd4` coordinates to `Im O` coordinates `(i, …, ke)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    rows: [[f64; 7]; 7],
}

impl Identification {
    /// `(ω̌¹, ω̌², ω̌³, ē_1, ē_2, ν̄_1, ν̄_2) ↔ (i, j, k, e, ie, je, ke)`.
    pub fn standard() -> Self {
        let mut rows = [[0.0; 7]; 7];
        for (i, r) in rows.iter_mut().enumerate() {
            r[i] = 1.0;
        }
        Identification { rows }
    }

    /// Rows must be orthonormal.
    pub fn from_rows(rows: [[f64; 7]; 7]) -> Option<Self> {
        for a in 0..7 {
            for b in 0..7 {
                let target = if a == b { 1.0 } else { 0.0 };
                if (linalg::dot(&rows[a], &rows[b]) - target).abs() > 1e-12 {
                    return None;
                }
            }
        }
        Some(Identification { rows })
    }

    pub fn apply(&self, v: &SplitVector) -> ImOctonion {
        let c = v.coords();
        let mut out = [0.0; 7];
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = linalg::dot(row, &c);
        }
        ImOctonion::from_coords(&out)
    }
}

/// Norm of the associator on the span of three vectors.
pub fn is_associative(vs: &[SplitVector], ident: &Identification) -> Result<Defect, FormsError> {
    require(check_count(vs, 3)?, BundleTag::Asd4)?;
    let on = orthonormalize(vs)?;
    let assoc = |v: &[SplitVector]| {
        let o: Vec<Octonion> = v.iter().map(|x| ident.apply(x).octonion()).collect();
        octonion::associator(o[0], o[1], o[2]).norm()
    };
    Ok(Defect {
        value: assoc(&on),
        raw: assoc(vs),
    })
}

/// Norm of the imaginary 4-fold product on the span of four octonions.
pub fn is_cayley(vs: &[Octonion; 4]) -> Result<Defect, FormsError> {
    let p = octonion::cayley_product_im(vs[0], vs[1], vs[2], vs[3])
        .map_err(|_| FormsError::Degenerate)?;
    Ok(Defect {
        value: p.unit.norm(),
        raw: p.raw.norm(),
    })
}
