//! Conormal bundles in `T*Rⁿ`.

use crate::forms::{BundleTag, SplitVector};
use crate::immersion::{FramePacket, SecondFundamentalForm};
use crate::linalg;

/// Spanning set `E_i = ē_i + Σ_l A^ν_il ě^l`, `F_j = ν̌^j` of the conormal
/// bundle at the covector `ν = Σ t_k ν_k`, in ambient coordinates.
pub fn conormal_tangent_basis(
    fp: &FramePacket,
    sff: &SecondFundamentalForm,
    t: &[f64],
) -> Vec<SplitVector> {
    let n = fp.n();
    let tag = BundleTag::Cotangent(n);
    let a = sff.along(t);
    let mut out = Vec::with_capacity(n);
    for (i, ei) in fp.e.iter().enumerate() {
        let mut xi = vec![0.0; n];
        for (l, el) in fp.e.iter().enumerate() {
            linalg::axpy(a[i][l], el, &mut xi);
        }
        out.push(SplitVector::new(tag, ei.clone(), xi).expect("ambient dimensions"));
    }
    for nu in &fp.nu {
        out.push(SplitVector::new(tag, vec![0.0; n], nu.clone()).expect("ambient dimensions"));
    }
    out
}

/// `(x, Σ t_k ν_k)`.
pub fn conormal_point(fp: &FramePacket, t: &[f64]) -> Vec<f64> {
    let mut xi = vec![0.0; fp.n()];
    for (tk, nu) in t.iter().zip(&fp.nu) {
        linalg::axpy(*tk, nu, &mut xi);
    }
    [fp.x.as_slice(), &xi].concat()
}
