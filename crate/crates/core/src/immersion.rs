//! Parametric immersions of curves and surfaces, their orthonormal frames and
//! second fundamental forms, and the pointwise surface conditions built on them.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr, Var};
use crate::linalg::{self, RANK_TOL};
use crate::scalar::{dot, Real};

/// Step of the central differences used in [`Mode::FiniteDifference`].
pub const FD_STEP: f64 = 1e-4;

/// Residual below which a projected ambient basis vector is skipped when
/// building the normal frame.
pub const NORMAL_SKIP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImmersionError {
    #[error("unsupported dimensions: base {p}, ambient {n}")]
    Dimensions { p: usize, n: usize },
    #[error("curve components may only depend on u")]
    CurveUsesV,
    #[error("point {point:?} lies in the excluded region")]
    Excluded { point: Vec<f64> },
    #[error("evaluation failed at {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error("jacobian is rank deficient at {point:?}")]
    RankDeficient { point: Vec<f64> },
    #[error("domain has no admissible sample points")]
    EmptyDomain,
}

/// How derivatives of the immersion are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Jet,
    #[serde(rename = "fd")]
    FiniteDifference,
}

impl Mode {
    /// Verdict tolerance matched to the differentiation error floor.
    pub fn default_tol(self) -> f64 {
        match self {
            Mode::Jet => 1e-8,
            Mode::FiniteDifference => 1e-5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Jet => "jet",
            Mode::FiniteDifference => "fd",
        }
    }
}

/// Parameter box with an optional excluded region.
///
/// A point is excluded where `exclude` evaluates to a non-negative value or
/// cannot be evaluated at all.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub exclude: Option<Expr>,
}

impl Domain {
    pub fn rect(u: (f64, f64), v: (f64, f64)) -> Self {
        Domain {
            u,
            v,
            exclude: None,
        }
    }

    pub fn interval(u: (f64, f64)) -> Self {
        Domain::rect(u, (0.0, 0.0))
    }

    pub fn excluding(mut self, exclude: Expr) -> Self {
        self.exclude = Some(exclude);
        self
    }

    pub fn is_excluded(&self, point: &[f64]) -> bool {
        let (u, v) = uv(point);
        match &self.exclude {
            None => false,
            Some(e) => e.eval(u, v).map_or(true, |x| x >= 0.0),
        }
    }
}

fn uv(point: &[f64]) -> (f64, f64) {
    (point[0], point.get(1).copied().unwrap_or(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Immersion {
    p: usize,
    components: Vec<Expr>,
    domain: Domain,
}

/// Position and partial derivatives at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub x: Vec<f64>,
    /// `d1[a]` is `∂x/∂u^a`.
    pub d1: Vec<Vec<f64>>,
    /// `d2[a][b]` is `∂²x/∂u^a∂u^b`.
    pub d2: Vec<Vec<Vec<f64>>>,
}

impl Immersion {
    pub fn new(p: usize, components: Vec<Expr>, domain: Domain) -> Result<Self, ImmersionError> {
        let n = components.len();
        if !(1..=2).contains(&p) || n <= p || n > 4 {
            return Err(ImmersionError::Dimensions { p, n });
        }
        if p == 1 && components.iter().any(|c| c.uses_var(Var::V)) {
            return Err(ImmersionError::CurveUsesV);
        }
        Ok(Immersion {
            p,
            components,
            domain,
        })
    }

    /// The graph `(u, v, f1, f2)`.
    pub fn graph(f1: Expr, f2: Expr, domain: Domain) -> Result<Self, ImmersionError> {
        Immersion::new(2, vec![Expr::u(), Expr::v(), f1, f2], domain)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    fn eval_error(point: &[f64]) -> impl Fn(EvalError) -> ImmersionError + '_ {
        move |source| ImmersionError::Eval {
            point: point.to_vec(),
            source,
        }
    }

    pub fn position(&self, point: &[f64]) -> Result<Vec<f64>, ImmersionError> {
        let (u, v) = uv(point);
        self.components
            .iter()
            .map(|c| c.eval(u, v))
            .collect::<Result<_, _>>()
            .map_err(Self::eval_error(point))
    }

    pub fn derivatives(&self, point: &[f64], mode: Mode) -> Result<Derivatives, ImmersionError> {
        if self.domain.is_excluded(point) {
            return Err(ImmersionError::Excluded {
                point: point.to_vec(),
            });
        }
        let p = self.p;
        let n = self.n();
        let (u, v) = uv(point);
        let mut out = Derivatives {
            x: vec![0.0; n],
            d1: vec![vec![0.0; n]; p],
            d2: vec![vec![vec![0.0; n]; p]; p],
        };
        match mode {
            Mode::Jet => {
                for (c, comp) in self.components.iter().enumerate() {
                    let j = comp.eval_jet2(u, v).map_err(Self::eval_error(point))?;
                    out.x[c] = j.value;
                    for a in 0..p {
                        out.d1[a][c] = j.d[a];
                        for b in 0..p {
                            out.d2[a][b][c] = j.h[a][b];
                        }
                    }
                }
            }
            Mode::FiniteDifference => {
                let h = FD_STEP;
                let at = |du: f64, dv: f64| self.position(&[u + du, v + dv]);
                let shift = |a: usize, s: f64| if a == 0 { (s, 0.0) } else { (0.0, s) };
                out.x = at(0.0, 0.0)?;
                for a in 0..p {
                    let (pu, pv) = shift(a, h);
                    let plus = at(pu, pv)?;
                    let minus = at(-pu, -pv)?;
                    for c in 0..n {
                        out.d1[a][c] = (plus[c] - minus[c]) / (2.0 * h);
                        out.d2[a][a][c] = (plus[c] - 2.0 * out.x[c] + minus[c]) / (h * h);
                    }
                }
                if p == 2 {
                    let pp = at(h, h)?;
                    let pm = at(h, -h)?;
                    let mp = at(-h, h)?;
                    let mm = at(-h, -h)?;
                    for c in 0..n {
                        let m = (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * h * h);
                        out.d2[0][1][c] = m;
                        out.d2[1][0][c] = m;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn frames(&self, point: &[f64], mode: Mode) -> Result<FramePacket, ImmersionError> {
        let d = self.derivatives(point, mode)?;
        let f = orthonormal_frames(&d.d1).ok_or_else(|| ImmersionError::RankDeficient {
            point: point.to_vec(),
        })?;
        Ok(FramePacket {
            point: point.to_vec(),
            x: d.x,
            e: f.e,
            nu: f.nu,
            pullback: f.pullback,
            d1: d.d1,
            d2: d.d2,
        })
    }

    /// The same surface seen in `R ⊕ Rⁿ`, with a new leading zero coordinate.
    pub fn prepend_zero(&self) -> Result<Immersion, ImmersionError> {
        let mut components = vec![Expr::num(0.0)];
        components.extend(self.components.iter().cloned());
        Immersion::new(self.p, components, self.domain.clone())
    }

    /// For a curve `c(u)`, the cylinder `(u, v) ↦ (u, c(v))` over it.
    pub fn cylinder_over_curve(&self) -> Result<Immersion, ImmersionError> {
        if self.p != 1 {
            return Err(ImmersionError::Dimensions {
                p: self.p,
                n: self.n(),
            });
        }
        let mut components = vec![Expr::u()];
        components.extend(self.components.iter().map(|c| c.substitute_u(&Expr::v())));
        let domain = Domain {
            u: (0.0, 0.0),
            v: self.domain.u,
            exclude: self
                .domain
                .exclude
                .as_ref()
                .map(|e| e.substitute_u(&Expr::v())),
        };
        Immersion::new(2, components, domain)
    }
}

/// Orthonormal tangent and normal frames at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Frames<T> {
    pub e: Vec<Vec<T>>,
    pub nu: Vec<Vec<T>>,
    /// `e_i = Σ_a pullback[i][a] ∂x/∂u^a`.
    pub pullback: Vec<Vec<T>>,
}

fn normalized<T: Real>(w: &[T], n: T) -> Vec<T> {
    w.iter().map(|x| *x / n).collect()
}

fn remove_components<T: Real>(w: &mut [T], basis: &[Vec<T>]) -> Vec<T> {
    let mut coeffs = Vec::with_capacity(basis.len());
    for b in basis {
        let c = dot(b, w);
        for (wi, bi) in w.iter_mut().zip(b) {
            *wi = *wi - c * *bi;
        }
        coeffs.push(c);
    }
    coeffs
}

/// Tangent frame by Gram–Schmidt of the Jacobian columns in parameter order;
/// normal frame by projecting the ambient basis in index order, skipping
/// residuals below [`NORMAL_SKIP_TOL`], with the last normal flipped so that
/// `(e, ν)` is positively oriented.
///
/// Generic over the scalar so the whole construction can be differentiated.
pub fn orthonormal_frames<T: Real>(d1: &[Vec<T>]) -> Option<Frames<T>> {
    let p = d1.len();
    let n = d1.first()?.len();
    let mut e: Vec<Vec<T>> = Vec::with_capacity(p);
    let mut pullback: Vec<Vec<T>> = Vec::with_capacity(p);
    for (i, col) in d1.iter().enumerate() {
        let scale = dot(col, col).value().sqrt();
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        let mut w = col.clone();
        let mut coeff = vec![T::zero(); p];
        coeff[i] = T::from_f64(1.0);
        for _ in 0..2 {
            let c = remove_components(&mut w, &e);
            for (j, cj) in c.into_iter().enumerate() {
                for a in 0..p {
                    coeff[a] = coeff[a] - cj * pullback[j][a];
                }
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm.value() <= RANK_TOL * scale {
            return None;
        }
        e.push(normalized(&w, norm));
        pullback.push(normalized(&coeff, norm));
    }
    let mut nu: Vec<Vec<T>> = Vec::with_capacity(n - p);
    for k in 0..n {
        if nu.len() == n - p {
            break;
        }
        let mut w = vec![T::zero(); n];
        w[k] = T::from_f64(1.0);
        for _ in 0..2 {
            remove_components(&mut w, &e);
            remove_components(&mut w, &nu);
        }
        let norm = dot(&w, &w).sqrt();
        if norm.value() < NORMAL_SKIP_TOL {
            continue;
        }
        nu.push(normalized(&w, norm));
    }
    if nu.len() != n - p {
        return None;
    }
    let rows: Vec<Vec<f64>> = e
        .iter()
        .chain(&nu)
        .map(|r| r.iter().map(|x| x.value()).collect())
        .collect();
    if linalg::det(&rows) < 0.0 {
        let last = nu.last_mut().expect("codimension is positive");
        for x in last.iter_mut() {
            *x = -*x;
        }
    }
    Some(Frames { e, nu, pullback })
}

/// Frames and derivatives of an immersion at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePacket {
    pub point: Vec<f64>,
    pub x: Vec<f64>,
    pub e: Vec<Vec<f64>>,
    pub nu: Vec<Vec<f64>>,
    pub pullback: Vec<Vec<f64>>,
    pub d1: Vec<Vec<f64>>,
    pub d2: Vec<Vec<Vec<f64>>>,
}

impl FramePacket {
    pub fn p(&self) -> usize {
        self.e.len()
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Largest deviation of `(e, ν)` from an orthonormal set.
    pub fn orthonormality_residual(&self) -> f64 {
        let all: Vec<&Vec<f64>> = self.e.iter().chain(&self.nu).collect();
        let mut worst: f64 = 0.0;
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((linalg::dot(a, b) - target).abs());
            }
        }
        worst
    }

    /// Orientation of `(e, ν)` relative to the ambient orientation.
    pub fn orientation(&self) -> f64 {
        let rows: Vec<Vec<f64>> = self.e.iter().chain(&self.nu).cloned().collect();
        linalg::det(&rows).signum()
    }

    /// Second derivative of the immersion along pulled-back tangent vectors.
    pub fn hessian_along(&self, i: usize, j: usize) -> Vec<f64> {
        let p = self.p();
        let mut out = vec![0.0; self.n()];
        for a in 0..p {
            for b in 0..p {
                let c = self.pullback[i][a] * self.pullback[j][b];
                linalg::axpy(c, &self.d2[a][b], &mut out);
            }
        }
        out
    }
}

/// Sign convention of a second fundamental form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SffConvention {
    /// `A^ν(w) = (∇_w ν)^T`, so `A^k_ij = −⟨∂²x(e_i, e_j), ν_k⟩`.
    ShapeOperator,
    /// `A^k_ij = +⟨∂²x(e_i, e_j), ν_k⟩`.
    Classical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalForm {
    /// `a[k][i][j]` in the convention below.
    a: Vec<Vec<Vec<f64>>>,
    convention: SffConvention,
}

impl SecondFundamentalForm {
    pub fn from_frames(fp: &FramePacket) -> Self {
        let p = fp.p();
        let mut a = vec![vec![vec![0.0; p]; p]; fp.nu.len()];
        for i in 0..p {
            for j in i..p {
                let h = fp.hessian_along(i, j);
                for (k, nu) in fp.nu.iter().enumerate() {
                    let val = -linalg::dot(&h, nu);
                    a[k][i][j] = val;
                    a[k][j][i] = val;
                }
            }
        }
        SecondFundamentalForm {
            a,
            convention: SffConvention::ShapeOperator,
        }
    }

    pub fn from_matrices(a: Vec<Vec<Vec<f64>>>, convention: SffConvention) -> Self {
        SecondFundamentalForm { a, convention }
    }

    pub fn convention(&self) -> SffConvention {
        self.convention
    }

    pub fn with_convention(&self, convention: SffConvention) -> Self {
        let s = if convention == self.convention {
            1.0
        } else {
            -1.0
        };
        SecondFundamentalForm {
            a: self
                .a
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|r| r.iter().map(|x| s * x).collect())
                        .collect()
                })
                .collect(),
            convention,
        }
    }

    pub fn p(&self) -> usize {
        self.a.first().map_or(0, |m| m.len())
    }

    pub fn q(&self) -> usize {
        self.a.len()
    }

    /// `A^k_ij` in the shape-operator convention.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        match self.convention {
            SffConvention::ShapeOperator => self.a[k][i][j],
            SffConvention::Classical => -self.a[k][i][j],
        }
    }

    /// `A^ν` for `ν = Σ t_k ν_k`, shape-operator convention.
    pub fn along(&self, t: &[f64]) -> Vec<Vec<f64>> {
        let p = self.p();
        let mut m = vec![vec![0.0; p]; p];
        for (k, tk) in t.iter().enumerate() {
            for (i, row) in m.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x += tk * self.get(k, i, j);
                }
            }
        }
        m
    }

    pub fn trace(&self, k: usize) -> f64 {
        (0..self.p()).map(|i| self.get(k, i, i)).sum()
    }

    pub fn symmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in &self.a {
            for (i, row) in m.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    worst = worst.max((x - m[j][i]).abs());
                }
            }
        }
        worst
    }

    /// Coefficients of the mean curvature vector on the normal frame.
    pub fn mean_curvature_coeffs(&self) -> Vec<f64> {
        (0..self.q()).map(|k| self.trace(k)).collect()
    }

    pub fn mean_curvature_norm(&self) -> f64 {
        linalg::norm(&self.mean_curvature_coeffs())
    }
}

/// `H = Σ_k Tr(A^k) ν_k` as an ambient vector.
pub fn mean_curvature(fp: &FramePacket, sff: &SecondFundamentalForm) -> Vec<f64> {
    let mut h = vec![0.0; fp.n()];
    for (k, nu) in fp.nu.iter().enumerate() {
        linalg::axpy(sff.trace(k), nu, &mut h);
    }
    h
}

pub fn is_minimal(sff: &SecondFundamentalForm, tol: f64) -> bool {
    sff.mean_curvature_norm() < tol
}

/// Largest odd elementary symmetric polynomial of the eigenvalues of `A^ν`
/// over sampled unit normals `ν`.
///
/// For `p ≤ 2` the only odd polynomial is `Tr A^ν = ⟨H, ν⟩`, linear in `ν`,
/// so its supremum `|H|` is returned exactly and no sampling is needed.
pub fn austere_defect(sff: &SecondFundamentalForm, normal_samples: usize) -> f64 {
    if sff.p() <= 2 {
        return sff.mean_curvature_norm();
    }
    let q = sff.q();
    let normals: Vec<Vec<f64>> = match q {
        1 => vec![vec![1.0]],
        2 => (0..normal_samples.max(1))
            .map(|s| {
                let th = 2.0 * std::f64::consts::PI * s as f64 / normal_samples.max(1) as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => fibonacci_sphere(normal_samples.max(1), q),
    };
    normals
        .iter()
        .map(|t| odd_symmetric_defect(&sff.along(t)))
        .fold(0.0, f64::max)
}

/// Unit vectors spread over the sphere in `R^q`, `q ≥ 3` (extra axes zero
/// beyond the first three, plus the remaining coordinate axes).
fn fibonacci_sphere(count: usize, q: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut out: Vec<Vec<f64>> = (0..count)
        .map(|s| {
            let z = 1.0 - 2.0 * (s as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * s as f64;
            let mut v = vec![0.0; q];
            v[0] = r * th.cos();
            v[1] = r * th.sin();
            v[2] = z;
            v
        })
        .collect();
    for k in 3..q {
        let mut v = vec![0.0; q];
        v[k] = 1.0;
        out.push(v);
    }
    out
}

/// `max |σ_odd(λ(m))|` for a symmetric `m` of size at most 3.
fn odd_symmetric_defect(m: &[Vec<f64>]) -> f64 {
    let tr: f64 = (0..m.len()).map(|i| m[i][i]).sum();
    match m.len() {
        0..=2 => tr.abs(),
        3 => tr.abs().max(linalg::det(m).abs()),
        _ => unimplemented!("austere check supports base dimension at most 3"),
    }
}

/// Which of `A^{Jν} = +J A^ν` and `A^{Jν} = −J A^ν` hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignMatch {
    pub plus: bool,
    pub minus: bool,
    pub plus_residual: f64,
    pub minus_residual: f64,
}

impl SignMatch {
    pub fn label(&self) -> &'static str {
        match (self.plus, self.minus) {
            (true, true) => "both",
            (true, false) => "plus",
            (false, true) => "minus",
            (false, false) => "neither",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsotropyReport {
    pub h: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub q: Complex64,
    pub sign_match: SignMatch,
}

fn j_times(m: &[Vec<f64>]) -> [[f64; 2]; 2] {
    [[-m[1][0], -m[1][1]], [m[0][0], m[0][1]]]
}

/// Residual of `A^{Jν} = s·J A^ν` on `ν = ν₁` and `ν = ν₂`, with `Jν₁ = ν₂`.
pub fn isotropy_residual(sff: &SecondFundamentalForm, sign: f64) -> f64 {
    let a1 = sff.along(&[1.0, 0.0]);
    let a2 = sff.along(&[0.0, 1.0]);
    let ja1 = j_times(&a1);
    let ja2 = j_times(&a2);
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((a2[i][j] - sign * ja1[i][j]).abs());
            worst = worst.max((-a1[i][j] - sign * ja2[i][j]).abs());
        }
    }
    worst
}

pub fn isotropy_report(fp: &FramePacket, sff: &SecondFundamentalForm, tol: f64) -> IsotropyReport {
    assert!(fp.p() == 2 && fp.n() == 4, "isotropy needs a surface in R⁴");
    let a = |k: usize, i: usize, j: usize| sff.get(k, i, j);
    let mut w1 = vec![0.0; 4];
    let mut w2 = vec![0.0; 4];
    for k in 0..2 {
        linalg::axpy(a(k, 0, 0) - a(k, 1, 1), &fp.nu[k], &mut w1);
        linalg::axpy(-2.0 * a(k, 0, 1), &fp.nu[k], &mut w2);
    }
    let q = Complex64::new(
        linalg::dot(&w1, &w1) - linalg::dot(&w2, &w2),
        2.0 * linalg::dot(&w1, &w2),
    );
    let plus_residual = isotropy_residual(sff, 1.0);
    let minus_residual = isotropy_residual(sff, -1.0);
    IsotropyReport {
        h: mean_curvature(fp, sff),
        w1,
        w2,
        q,
        sign_match: SignMatch {
            plus: plus_residual < tol,
            minus: minus_residual < tol,
            plus_residual,
            minus_residual,
        },
    }
}

/// Residuals `g₂₂f^k₁₁ + g₁₁f^k₂₂ − 2g₁₂f^k₁₂` of the graph `(u, v, f¹, f²)`.
pub fn minimal_graph_residual(f1: &Expr, f2: &Expr, point: &[f64]) -> Result<[f64; 2], EvalError> {
    let (u, v) = uv(point);
    let j = [f1.eval_jet2(u, v)?, f2.eval_jet2(u, v)?];
    let g = |a: usize, b: usize| {
        let delta = if a == b { 1.0 } else { 0.0 };
        delta + j[0].d[a] * j[0].d[b] + j[1].d[a] * j[1].d[b]
    };
    let (g11, g22, g12) = (g(0, 0), g(1, 1), g(0, 1));
    Ok([0, 1].map(|k| g22 * j[k].h[0][0] + g11 * j[k].h[1][1] - 2.0 * g12 * j[k].h[0][1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use proptest::prelude::*;

    fn graph(f1: &str, f2: &str) -> Immersion {
        Immersion::graph(
            parse(f1).unwrap(),
            parse(f2).unwrap(),
            Domain::rect((-1.0, 1.0), (-1.0, 1.0)),
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn flat_graph_frames_are_coordinate_axes() {
        let fp = graph("0", "0").frames(&[0.3, -0.2], Mode::Jet).unwrap();
        assert_eq!(
            fp.e,
            vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]]
        );
        assert_eq!(
            fp.nu,
            vec![vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]
        );
        let sff = SecondFundamentalForm::from_frames(&fp);
        assert_eq!(sff.mean_curvature_norm(), 0.0);
        assert_eq!(austere_defect(&sff, 32), 0.0);
    }

    #[test]
    fn first_tangent_is_proportional_to_graph_column() {
        let fp = graph("u^2*v", "sin(u)")
            .frames(&[0.5, 0.7], Mode::Jet)
            .unwrap();
        let col = [1.0, 0.0, 2.0 * 0.5 * 0.7, 0.5f64.cos()];
        let n = linalg::norm(&col);
        for c in 0..4 {
            assert!(close(fp.e[0][c], col[c] / n, 1e-15));
        }
        assert!(fp.orthonormality_residual() < 1e-14);
        assert_eq!(fp.orientation(), 1.0);
    }

    #[test]
    fn holomorphic_square_at_origin() {
        let fp = graph("(u^2 - v^2)/2", "u*v")
            .frames(&[0.0, 0.0], Mode::Jet)
            .unwrap();
        let sff = SecondFundamentalForm::from_frames(&fp);
        let a1 = sff.along(&[1.0, 0.0]);
        let a2 = sff.along(&[0.0, 1.0]);
        assert_eq!(a1, vec![vec![-1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(a2, vec![vec![0.0, -1.0], vec![-1.0, 0.0]]);
        let iso = isotropy_report(&fp, &sff, 1e-12);
        assert!(iso.sign_match.plus && !iso.sign_match.minus);
        assert_eq!(iso.q, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn conventions_differ_by_sign() {
        let fp = graph("u^2 + v^2", "0")
            .frames(&[0.0, 0.0], Mode::Jet)
            .unwrap();
        let sff = SecondFundamentalForm::from_frames(&fp);
        let classical = sff.with_convention(SffConvention::Classical);
        assert_eq!(classical.get(0, 0, 0), sff.get(0, 0, 0));
        assert_eq!(classical.convention(), SffConvention::Classical);
        assert!(sff.trace(0) < 0.0);
        assert!(austere_defect(&sff, 32) > 1.0);
    }

    #[test]
    fn cylinder_principal_curvatures() {
        let r = 2.5;
        let cyl = Immersion::new(
            2,
            vec![
                Expr::num(r) * Expr::u().apply(crate::expr::Func::Cos),
                Expr::num(r) * Expr::u().apply(crate::expr::Func::Sin),
                Expr::v(),
            ],
            Domain::rect((0.0, 6.0), (-1.0, 1.0)),
        )
        .unwrap();
        for u in [0.1, 1.3, 4.0] {
            let sff =
                SecondFundamentalForm::from_frames(&cyl.frames(&[u, 0.2], Mode::Jet).unwrap());
            let m = sff.along(&[1.0]);
            // eigenvalues of a symmetric 2x2
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            let (l1, l2) = (tr / 2.0 + disc, tr / 2.0 - disc);
            let (big, small) = if l1.abs() > l2.abs() {
                (l1, l2)
            } else {
                (l2, l1)
            };
            assert!(close(big.abs(), 1.0 / r, 1e-12));
            assert!(small.abs() < 1e-12);
        }
    }

    #[test]
    fn unit_sphere_trace_is_two() {
        let sphere = Immersion::new(
            2,
            vec![
                parse("cos(v)*cos(u)").unwrap(),
                parse("cos(v)*sin(u)").unwrap(),
                parse("sin(v)").unwrap(),
            ],
            Domain::rect((0.0, 6.0), (-1.0, 1.0)),
        )
        .unwrap();
        for (u, v) in [(0.2, 0.1), (2.0, -0.8), (5.0, 0.9)] {
            let sff =
                SecondFundamentalForm::from_frames(&sphere.frames(&[u, v], Mode::Jet).unwrap());
            assert!(close(sff.trace(0).abs(), 2.0, 1e-12));
            assert!(close(austere_defect(&sff, 32), 2.0, 1e-12));
        }
    }

    #[test]
    fn excluded_points_and_rank_deficiency() {
        let imm = Immersion::graph(
            Expr::u(),
            Expr::v(),
            Domain::rect((-3.0, 3.0), (-3.0, 3.0)).excluding(parse("2 - u^2 - v^2").unwrap()),
        )
        .unwrap();
        assert!(matches!(
            imm.frames(&[0.5, 0.5], Mode::Jet),
            Err(ImmersionError::Excluded { .. })
        ));
        assert!(imm.frames(&[2.0, 0.5], Mode::Jet).is_ok());
        let folded = Immersion::new(
            2,
            vec![parse("u^2").unwrap(), Expr::v(), Expr::num(0.0)],
            Domain::rect((-1.0, 1.0), (-1.0, 1.0)),
        )
        .unwrap();
        assert!(matches!(
            folded.frames(&[0.0, 0.3], Mode::Jet),
            Err(ImmersionError::RankDeficient { .. })
        ));
        assert!(matches!(
            Immersion::new(
                1,
                vec![Expr::u(), Expr::v(), Expr::u()],
                Domain::interval((0.0, 1.0))
            ),
            Err(ImmersionError::CurveUsesV)
        ));
    }

    #[test]
    fn minimal_graph_residual_examples() {
        let r = minimal_graph_residual(
            &parse("exp(u)*cos(v)").unwrap(),
            &parse("exp(u)*sin(v)").unwrap(),
            &[0.3, 1.1],
        )
        .unwrap();
        assert!(r[0].abs() < 1e-13 && r[1].abs() < 1e-13);
        let r =
            minimal_graph_residual(&parse("u^2").unwrap(), &Expr::num(0.0), &[0.5, 0.0]).unwrap();
        let g22 = 1.0;
        assert_eq!(r, [2.0 * g22, 0.0]);
    }

    #[test]
    fn curve_frames() {
        let helix = Immersion::new(
            1,
            vec![
                parse("cos(u)").unwrap(),
                parse("sin(u)").unwrap(),
                parse("u/2").unwrap(),
            ],
            Domain::interval((0.0, 6.0)),
        )
        .unwrap();
        let fp = helix.frames(&[0.7], Mode::Jet).unwrap();
        assert_eq!(fp.nu.len(), 2);
        assert!(fp.orthonormality_residual() < 1e-14);
        assert_eq!(fp.orientation(), 1.0);
        let sff = SecondFundamentalForm::from_frames(&fp);
        // curvature of a helix of radius 1 and pitch 1/2 is 1/(1 + 1/4)
        assert!(close(sff.mean_curvature_norm(), 0.8, 1e-12));
    }

    /// Recompute the form after rotating both frames and compare invariants.
    fn rotated(fp: &FramePacket, alpha: f64, beta: f64) -> FramePacket {
        let rot = |v: &[Vec<f64>], th: f64| -> Vec<Vec<f64>> {
            let (c, s) = (th.cos(), th.sin());
            vec![
                v[0].iter().zip(&v[1]).map(|(a, b)| c * a + s * b).collect(),
                v[0].iter()
                    .zip(&v[1])
                    .map(|(a, b)| -s * a + c * b)
                    .collect(),
            ]
        };
        FramePacket {
            e: rot(&fp.e, alpha),
            nu: rot(&fp.nu, beta),
            pullback: rot(&fp.pullback, alpha),
            ..fp.clone()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn invariants_under_frame_rotation(u in -1.0f64..1.0, v in -1.0f64..1.0, alpha in 0.0f64..6.3, beta in 0.0f64..6.3, which in 0usize..3) {
            let imm = [
                graph("exp(u)*cos(v)", "exp(u)*sin(v)"),
                graph("exp(u)*cos(v)", "-exp(u)*sin(v)"),
                graph("u^2 + v*u", "sin(u*v)"),
            ][which].clone();
            let fp = imm.frames(&[u, v], Mode::Jet).unwrap();
            let rf = rotated(&fp, alpha, beta);
            prop_assert!(rf.orthonormality_residual() < 1e-12);
            let s0 = SecondFundamentalForm::from_frames(&fp);
            let s1 = SecondFundamentalForm::from_frames(&rf);
            prop_assert!(s1.symmetry_residual() < 1e-10);
            prop_assert!((s0.mean_curvature_norm() - s1.mean_curvature_norm()).abs() < 1e-9);
            prop_assert!((austere_defect(&s0, 32) - austere_defect(&s1, 32)).abs() < 1e-9);
            let i0 = isotropy_report(&fp, &s0, 1e-9);
            let i1 = isotropy_report(&rf, &s1, 1e-9);
            prop_assert!((i0.q.norm() - i1.q.norm()).abs() < 1e-9);
            prop_assert_eq!(i0.sign_match.label(), i1.sign_match.label());
            // A transforms as a tensor: A'^l = Σ_k R_lk Rᵀ A^k R
            let (ca, sa, cb, sb) = (alpha.cos(), alpha.sin(), beta.cos(), beta.sin());
            let rt = [[ca, sa], [-sa, ca]];
            let rn = [[cb, sb], [-sb, cb]];
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut expect = 0.0;
                        for k in 0..2 {
                            for a in 0..2 {
                                for b in 0..2 {
                                    expect += rn[l][k] * rt[i][a] * rt[j][b] * s0.get(k, a, b);
                                }
                            }
                        }
                        prop_assert!((s1.get(l, i, j) - expect).abs() < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn fd_and_jet_forms_agree(u in -1.0f64..1.0, v in -1.0f64..1.0) {
            let imm = graph("exp(u)*cos(v) + u*v^2", "sin(u)*cosh(v)");
            let sj = SecondFundamentalForm::from_frames(&imm.frames(&[u, v], Mode::Jet).unwrap());
            let sf = SecondFundamentalForm::from_frames(&imm.frames(&[u, v], Mode::FiniteDifference).unwrap());
            for k in 0..2 { for i in 0..2 { for j in 0..2 {
                prop_assert!((sj.get(k, i, j) - sf.get(k, i, j)).abs() < 1e-5);
            }}}
        }
    }
}
