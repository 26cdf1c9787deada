//! Small dense helpers for the low-dimensional vectors used throughout the crate.

/// Relative pivot tolerance below which Gram–Schmidt reports a rank deficiency.
pub const RANK_TOL: f64 = 1e-10;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Result of orthonormalizing an ordered spanning set.
#[derive(Debug, Clone)]
pub struct Orthonormalized {
    pub basis: Vec<Vec<f64>>,
    /// Diagonal of the triangular factor; its product is the Gram volume.
    pub diag: Vec<f64>,
}

impl Orthonormalized {
    pub fn volume(&self) -> f64 {
        self.diag.iter().product()
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
///
/// Returns `None` when some vector has a residual below `RANK_TOL` relative to
/// its own length (or is zero).
pub fn gram_schmidt(vectors: &[Vec<f64>]) -> Option<Orthonormalized> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    let mut diag = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = norm(v);
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        let n = norm(&w);
        if n <= RANK_TOL * scale {
            return None;
        }
        for x in w.iter_mut() {
            *x /= n;
        }
        basis.push(w);
        diag.push(n);
    }
    Some(Orthonormalized { basis, diag })
}

/// Distance from `p` to the linear span of an orthonormal set.
pub fn distance_to_span(p: &[f64], orthonormal: &[Vec<f64>]) -> f64 {
    let mut w = p.to_vec();
    for b in orthonormal {
        let c = dot(b, &w);
        axpy(-c, b, &mut w);
    }
    norm(&w)
}

/// Determinant of a small square matrix given by rows (partial pivoting).
pub fn det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut d = 1.0;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap_or(c);
        if m[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            m.swap(piv, c);
            d = -d;
        }
        d *= m[c][c];
        for r in (c + 1)..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    d
}
