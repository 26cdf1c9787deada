//! Spinor eigenbundles of `jm = e¹e²` and their Cayley total spaces.
//!
//! Tangent vectors of `R⁴` live in `ℍe = span{e, ie, je, ke}`, spinors in
//! `ℍ = span{1, i, j, k}`, and 1-forms act on spinors by left multiplication.

use serde::Serialize;

use crate::immersion::{FramePacket, SecondFundamentalForm};
use crate::octonion::{Octonion, E, I, IE, J, JE, K, KE, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinorSign {
    Plus,
    Minus,
}

impl SpinorSign {
    pub fn value(self) -> f64 {
        match self {
            SpinorSign::Plus => 1.0,
            SpinorSign::Minus => -1.0,
        }
    }
}

/// `q_plus` spans the spinors commuting with `jm`, `q_minus` those
/// anticommuting with it; right multiplication by `jm` preserves both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorEigenbasis {
    pub jm: Octonion,
    pub q_plus: [Octonion; 2],
    pub q_minus: [Octonion; 2],
}

fn o(idx: usize) -> Octonion {
    Octonion::basis(idx)
}

/// Unit spinor orthogonal to `1` and `jm`, from the first of `j, k, i` whose
/// projection keeps at least a third of its squared length.
fn transverse_reference(jm: Octonion) -> Octonion {
    [J, K, I]
        .into_iter()
        .map(o)
        .find(|r| 1.0 - r.dot(&jm).powi(2) >= 1.0 / 3.0)
        .expect("the squared components of a unit imaginary quaternion sum to one")
}

impl SpinorEigenbasis {
    /// `e¹ = e`, `e² = ie`: `jm = i`, `V₊ = span{1, i}`, `V₋ = span{j, k}`.
    pub fn standard() -> Self {
        SpinorEigenbasis {
            jm: o(I),
            q_plus: [o(ONE), o(I)],
            q_minus: [o(J), o(K)],
        }
    }

    /// Eigenbasis for an orthonormal tangent pair in `ℍe`.
    pub fn from_tangent(e1: Octonion, e2: Octonion) -> Self {
        let jm = e1 * e2;
        let r = transverse_reference(jm);
        let raw = r - jm.scale(r.dot(&jm));
        let n = raw.scale(1.0 / raw.norm());
        SpinorEigenbasis {
            jm,
            q_plus: [o(ONE), jm],
            q_minus: [n, jm * n],
        }
    }

    pub fn basis(&self, sign: SpinorSign) -> [Octonion; 2] {
        match sign {
            SpinorSign::Plus => self.q_plus,
            SpinorSign::Minus => self.q_minus,
        }
    }

    /// `r(q) = q·jm`.
    pub fn r(&self, q: Octonion) -> Octonion {
        q * self.jm
    }
}

/// Global eigenbasis from the packet's tangent frame mapped into `ℍe`.
pub fn spinor_eigenbasis(fp: &FramePacket) -> SpinorEigenbasis {
    assert!(fp.p() == 2 && fp.n() == 4, "needs a surface in R⁴");
    SpinorEigenbasis::from_tangent(Octonion::from_he(&fp.e[0]), Octonion::from_he(&fp.e[1]))
}

/// `γ(a)γ(b)` acting on a spinor.
pub fn clifford_pair(a: Octonion, b: Octonion, q: Octonion) -> Octonion {
    a * (b * q)
}

/// Spanning set `(E₁, E₂, F₁, F₂)` of the `V_{±jm}` total space at
/// `t₁q₁ + t₂q₂`, with the frame rotated to `e₁ → e`, `e₂ → ie`,
/// `ν₁ → je`, `ν₂ → ke`.
pub fn cayley_tangent_basis(
    sff: &SecondFundamentalForm,
    sign: SpinorSign,
    t: [f64; 2],
) -> [Octonion; 4] {
    assert!(sff.p() == 2 && sff.q() == 2, "needs a surface in R⁴");
    let eb = SpinorEigenbasis::standard();
    let frame = [o(E), o(IE)];
    // ∇_{e_k} e^j = −Σ_l A^l_kj ν^l
    let de = |k: usize, j: usize| -(o(JE).scale(sff.get(0, k, j)) + o(KE).scale(sff.get(1, k, j)));
    let q = eb.basis(sign);
    // the half-derivative of r acts with the opposite sign on the two eigenspaces
    let s = -0.5 * sign.value();
    let qdot = |k: usize, qj: Octonion| {
        let rdot = de(k, 0) * (frame[1] * qj) + frame[0] * (de(k, 1) * qj);
        (eb.jm * rdot).scale(s)
    };
    let e = |k: usize| frame[k] + qdot(k, q[0]).scale(t[0]) + qdot(k, q[1]).scale(t[1]);
    [e(0), e(1), q[0], q[1]]
}

/// Spinor basis of one eigenbundle with its derivatives along `e_1`, `e_2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorJet {
    pub q: [Octonion; 2],
    /// `dq[k][j] = ∂_{e_k} q_j`.
    pub dq: [[Octonion; 2]; 2],
}

/// Exact derivative of the global eigenbasis of [`SpinorEigenbasis::from_tangent`].
pub fn spinor_jet(fp: &FramePacket, sff: &SecondFundamentalForm, sign: SpinorSign) -> SpinorJet {
    assert!(fp.p() == 2 && fp.n() == 4, "needs a surface in R⁴");
    let e = [Octonion::from_he(&fp.e[0]), Octonion::from_he(&fp.e[1])];
    let nu = [Octonion::from_he(&fp.nu[0]), Octonion::from_he(&fp.nu[1])];
    let jm = e[0] * e[1];
    // tangential parts of ∂e_a cancel in e₁e₂; normal parts are −A^l_ka ν_l
    let djm: [Octonion; 2] = std::array::from_fn(|k| {
        let mut acc = Octonion::ZERO;
        for l in 0..2 {
            acc += -(nu[l] * e[1]).scale(sff.get(l, k, 0)) - (e[0] * nu[l]).scale(sff.get(l, k, 1));
        }
        acc
    });
    match sign {
        SpinorSign::Plus => SpinorJet {
            q: [o(ONE), jm],
            dq: djm.map(|d| [Octonion::ZERO, d]),
        },
        SpinorSign::Minus => {
            let r = transverse_reference(jm);
            let raw = r - jm.scale(r.dot(&jm));
            let len = raw.norm();
            let n = raw.scale(1.0 / len);
            let dq = djm.map(|d| {
                let draw = -(jm.scale(r.dot(&d)) + d.scale(r.dot(&jm)));
                let dn = (draw - n.scale(n.dot(&draw))).scale(1.0 / len);
                [dn, d * n + jm * dn]
            });
            SpinorJet { q: [n, jm * n], dq }
        }
    }
}

/// Point `x + t₁q₁ + t₂q₂` of the total space and its spanning set
/// `(E₁, E₂, F₁, F₂)`, all in global octonion coordinates.
pub fn cayley_global(
    fp: &FramePacket,
    sff: &SecondFundamentalForm,
    sign: SpinorSign,
    t: [f64; 2],
) -> (Octonion, [Octonion; 4]) {
    let jet = spinor_jet(fp, sff, sign);
    let point = Octonion::from_he(&fp.x) + jet.q[0].scale(t[0]) + jet.q[1].scale(t[1]);
    let e = |k: usize| {
        Octonion::from_he(&fp.e[k]) + jet.dq[k][0].scale(t[0]) + jet.dq[k][1].scale(t[1])
    };
    (point, [e(0), e(1), jet.q[0], jet.q[1]])
}
