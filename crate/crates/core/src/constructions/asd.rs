//! Anti-self-dual 2-forms along a surface in `R⁴` and the two `G2` bundles.

use crate::forms::{BundleTag, SplitVector};
use crate::immersion::{FramePacket, SecondFundamentalForm};

/// Index pairs `(a, b)`, `a < b`, labelling 2-form components in `R⁴`.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn wedge(a: &[f64], b: &[f64]) -> [f64; 6] {
    PAIRS.map(|(i, j)| a[i] * b[j] - a[j] * b[i])
}

/// Coefficients on the ambient anti-self-dual basis
/// `ε₁₂ − ε₃₄, ε₁₃ + ε₂₄, ε₁₄ − ε₂₃`, each scaled to unit length.
pub fn asd_coeffs(beta: &[f64; 6]) -> [f64; 3] {
    [
        0.5 * (beta[0] - beta[5]),
        0.5 * (beta[1] + beta[4]),
        0.5 * (beta[2] - beta[3]),
    ]
}

/// Coefficients on `ε₁₂ + ε₃₄, ε₁₃ − ε₂₄, ε₁₄ + ε₂₃`.
pub fn sd_coeffs(beta: &[f64; 6]) -> [f64; 3] {
    [
        0.5 * (beta[0] + beta[5]),
        0.5 * (beta[1] - beta[4]),
        0.5 * (beta[2] + beta[3]),
    ]
}

fn combine(a: [f64; 6], sa: f64, b: [f64; 6], sb: f64) -> [f64; 6] {
    std::array::from_fn(|i| sa * a[i] + sb * b[i])
}

/// `ω¹ = e¹∧e² − ν¹∧ν²`, `ω² = e¹∧ν¹ − ν²∧e²`, `ω³ = e¹∧ν² − e²∧ν¹`
/// as ambient 2-forms. Each has 2-form norm `√2` and unit coefficient
/// vector on the normalized anti-self-dual basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsdFrame {
    pub omega: [[f64; 6]; 3],
}

impl AsdFrame {
    pub fn from_frames(e: &[Vec<f64>], nu: &[Vec<f64>]) -> Self {
        assert!(
            e.len() == 2 && nu.len() == 2 && e[0].len() == 4,
            "needs a surface in R⁴"
        );
        let w = |a: &Vec<f64>, b: &Vec<f64>| wedge(a, b);
        AsdFrame {
            omega: [
                combine(w(&e[0], &e[1]), 1.0, w(&nu[0], &nu[1]), -1.0),
                combine(w(&e[0], &nu[0]), 1.0, w(&nu[1], &e[1]), -1.0),
                combine(w(&e[0], &nu[1]), 1.0, w(&e[1], &nu[0]), -1.0),
            ],
        }
    }

    pub fn from_packet(fp: &FramePacket) -> Self {
        AsdFrame::from_frames(&fp.e, &fp.nu)
    }

    /// Row `k` is the fibre coordinate vector of `ω^{k+1}`.
    pub fn coeffs(&self) -> [[f64; 3]; 3] {
        self.omega.map(|b| asd_coeffs(&b))
    }

    pub fn self_dual_residual(&self) -> f64 {
        self.omega
            .iter()
            .flat_map(|b| sd_coeffs(b))
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    /// Global fibre coordinates of `Σ t_k ω^k`.
    pub fn fibre_point(&self, t: &[f64; 3]) -> [f64; 3] {
        let c = self.coeffs();
        std::array::from_fn(|a| (0..3).map(|k| t[k] * c[k][a]).sum())
    }
}

/// `d[i][k][l]` is the coefficient of `ω^{l+1}` in `∇_{e_i} ω^{k+1}`.
///
/// Only the entries coupling `ω¹` to `ω²`, `ω³` are curvature terms; the
/// `ω² ↔ ω³` entries depend on the frame gauge and are zero in adapted frames.
pub type CovariantDerivatives = [[[f64; 3]; 3]; 2];

pub fn asd_covariant_derivatives(sff: &SecondFundamentalForm) -> CovariantDerivatives {
    assert!(sff.p() == 2 && sff.q() == 2, "needs a surface in R⁴");
    let a = |k: usize, i: usize, j: usize| sff.get(k, i, j);
    std::array::from_fn(|i| {
        let to_w2 = a(1, i, 0) - a(0, i, 1);
        let to_w3 = -a(0, i, 0) - a(1, i, 1);
        [[0.0, to_w2, to_w3], [-to_w2, 0.0, 0.0], [-to_w3, 0.0, 0.0]]
    })
}

const ASD: BundleTag = BundleTag::Asd4;

fn lifted(i: usize, fibre: [f64; 3]) -> SplitVector {
    let mut v = SplitVector::base_unit(ASD, i);
    v.fibre_mut().copy_from_slice(&fibre);
    v
}

/// Spanning set of the total space of `span{ω², ω³}` at `t₂ω² + t₃ω³`,
/// in the frame-adapted basis `(ω̌¹, ω̌², ω̌³, ē₁, ē₂, ν̄₁, ν̄₂)`.
pub fn coassociative_tangent_basis(
    sff: &SecondFundamentalForm,
    t2: f64,
    t3: f64,
) -> [SplitVector; 4] {
    let d = asd_covariant_derivatives(sff);
    let e = |i: usize| lifted(i, [t2 * d[i][1][0] + t3 * d[i][2][0], 0.0, 0.0]);
    [
        e(0),
        e(1),
        SplitVector::fibre_unit(ASD, 1),
        SplitVector::fibre_unit(ASD, 2),
    ]
}

/// Spanning set of the total space of `span{ω¹}` at `t₁ω¹`.
pub fn associative_tangent_basis(sff: &SecondFundamentalForm, t1: f64) -> [SplitVector; 3] {
    let d = asd_covariant_derivatives(sff);
    let e = |i: usize| lifted(i, [0.0, t1 * d[i][0][1], t1 * d[i][0][2]]);
    [e(0), e(1), SplitVector::fibre_unit(ASD, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{is_associative, is_coassociative, G2Variant, Identification};
    use crate::immersion::SffConvention;
    use crate::linalg;

    fn sff(a1: [[f64; 2]; 2], a2: [[f64; 2]; 2]) -> SecondFundamentalForm {
        let m = |a: [[f64; 2]; 2]| a.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
        SecondFundamentalForm::from_matrices(vec![m(a1), m(a2)], SffConvention::ShapeOperator)
    }

    fn unit(i: usize) -> Vec<f64> {
        let mut v = vec![0.0; 4];
        v[i] = 1.0;
        v
    }

    #[test]
    fn standard_frame_gives_the_ambient_basis() {
        let f = AsdFrame::from_frames(&[unit(0), unit(1)], &[unit(2), unit(3)]);
        assert_eq!(
            f.coeffs(),
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        );
        assert_eq!(f.self_dual_residual(), 0.0);
    }

    #[test]
    fn rotated_frame_gives_a_rotation() {
        // an orientation-preserving orthonormal frame from a fixed 4×4 rotation
        let (c, s) = (0.6f64, 0.8f64);
        let (c2, s2) = (0.28f64, 0.96f64);
        let e = [vec![c, s, 0.0, 0.0], vec![0.0, 0.0, c2, s2]];
        let nu = [vec![s, -c, 0.0, 0.0], vec![0.0, 0.0, -s2, c2]];
        let f = AsdFrame::from_frames(&e, &nu);
        assert!(f.self_dual_residual() < 1e-15);
        let m = f.coeffs();
        for a in 0..3 {
            for b in 0..3 {
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((linalg::dot(&m[a], &m[b]) - target).abs() < 1e-15);
            }
        }
        let rows: Vec<Vec<f64>> = m.iter().map(|r| r.to_vec()).collect();
        assert!((linalg::det(&rows) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_coefficients_for_z_squared() {
        let s = sff([[-1.0, 0.0], [0.0, 1.0]], [[0.0, -1.0], [-1.0, 0.0]]);
        let d = asd_covariant_derivatives(&s);
        assert_eq!(d[0][0], [0.0, 0.0, 2.0]);
        assert_eq!(d[0][2][0], -2.0);
        assert_eq!(
            asd_covariant_derivatives(&sff([[0.0; 2]; 2], [[0.0; 2]; 2])),
            [[[0.0; 3]; 3]; 2]
        );
    }

    #[test]
    fn zero_section_bases() {
        let s = sff([[0.3, -0.2], [-0.2, 0.5]], [[1.1, 0.4], [0.4, -0.7]]);
        let assoc = associative_tangent_basis(&s, 0.0);
        assert_eq!(
            is_associative(&assoc, &Identification::standard())
                .unwrap()
                .value,
            0.0
        );
        let flat = sff([[0.0; 2]; 2], [[0.0; 2]; 2]);
        let coass = coassociative_tangent_basis(&flat, 3.0, -4.0);
        assert!(is_coassociative(&coass, G2Variant::Minus).unwrap().value < 1e-15);
    }

    #[test]
    fn anti_isotropic_form_is_coassociative_and_isotropic_is_not() {
        // A² = −J A¹ with J·m = [[−m10, −m11], [m00, m01]]
        let a1 = [[0.7, -0.3], [-0.3, -0.7]];
        let plus = [[0.3, 0.7], [0.7, -0.3]];
        let minus = [[-0.3, -0.7], [-0.7, 0.3]];
        for (t2, t3) in [(1.0, 0.0), (0.0, 1.0), (-2.5, 3.0)] {
            let ok = coassociative_tangent_basis(&sff(a1, minus), t2, t3);
            assert!(is_coassociative(&ok, G2Variant::Minus).unwrap().value < 1e-12);
            let bad = coassociative_tangent_basis(&sff(a1, plus), t2, t3);
            assert!(is_coassociative(&bad, G2Variant::Minus).unwrap().value > 0.1);
        }
    }

    #[test]
    fn associator_matches_closed_form() {
        use crate::octonion::{associator, Octonion, JE, KE};
        let s = sff([[0.9, 0.2], [0.2, 1.4]], [[-0.3, 0.5], [0.5, 1.1]]);
        let t1 = -1.7;
        let basis = associative_tangent_basis(&s, t1);
        let id = Identification::standard();
        let o: Vec<Octonion> = basis.iter().map(|v| id.apply(v).octonion()).collect();
        let measured = associator(o[0], o[1], o[2]);
        let expected = Octonion::basis(JE).scale(-2.0 * t1 * s.trace(1))
            + Octonion::basis(KE).scale(2.0 * t1 * s.trace(0));
        assert!((measured - expected).norm() < 1e-13);
    }
}
