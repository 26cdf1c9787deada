//! Octonion arithmetic over the ordered basis `(1, i, j, k, e, ie, je, ke)`.
//!
//! Products come from a hardcoded signed-index table. A second copy of the
//! table is generated from the Cayley–Dickson doubling of the quaternions and
//! [`verify_table`] compares the two.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

/// Basis labels in coefficient order.
pub const BASIS_NAMES: [&str; 8] = ["1", "i", "j", "k", "e", "ie", "je", "ke"];

pub const ONE: usize = 0;
pub const I: usize = 1;
pub const J: usize = 2;
pub const K: usize = 3;
pub const E: usize = 4;
pub const IE: usize = 5;
pub const JE: usize = 6;
pub const KE: usize = 7;

/// `TABLE[row][col] = (sign, index)` meaning `b_row * b_col = sign * b_index`.
const TABLE: [[(i8, u8); 8]; 8] = [
    [
        (1, 0),
        (1, 1),
        (1, 2),
        (1, 3),
        (1, 4),
        (1, 5),
        (1, 6),
        (1, 7),
    ],
    [
        (1, 1),
        (-1, 0),
        (1, 3),
        (-1, 2),
        (1, 5),
        (-1, 4),
        (-1, 7),
        (1, 6),
    ],
    [
        (1, 2),
        (-1, 3),
        (-1, 0),
        (1, 1),
        (1, 6),
        (1, 7),
        (-1, 4),
        (-1, 5),
    ],
    [
        (1, 3),
        (1, 2),
        (-1, 1),
        (-1, 0),
        (1, 7),
        (-1, 6),
        (1, 5),
        (-1, 4),
    ],
    [
        (1, 4),
        (-1, 5),
        (-1, 6),
        (-1, 7),
        (-1, 0),
        (1, 1),
        (1, 2),
        (1, 3),
    ],
    [
        (1, 5),
        (1, 4),
        (-1, 7),
        (1, 6),
        (-1, 1),
        (-1, 0),
        (-1, 3),
        (1, 2),
    ],
    [
        (1, 6),
        (1, 7),
        (1, 4),
        (-1, 5),
        (-1, 2),
        (1, 3),
        (-1, 0),
        (-1, 1),
    ],
    [
        (1, 7),
        (-1, 6),
        (1, 5),
        (1, 4),
        (-1, 3),
        (-1, 2),
        (1, 1),
        (-1, 0),
    ],
];

/// Signed basis product `b_row * b_col`.
pub fn basis_product(row: usize, col: usize) -> (i8, usize) {
    let (s, k) = TABLE[row][col];
    (s, k as usize)
}

fn quaternion_mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn quaternion_conj(a: [f64; 4]) -> [f64; 4] {
    [a[0], -a[1], -a[2], -a[3]]
}

/// Cayley–Dickson doubling `(a + b e)(c + d e) = (ac - conj(d) b) + (d a + b conj(c)) e`.
fn cayley_dickson_mul(x: &[f64; 8], y: &[f64; 8]) -> [f64; 8] {
    let a = [x[0], x[1], x[2], x[3]];
    let b = [x[4], x[5], x[6], x[7]];
    let c = [y[0], y[1], y[2], y[3]];
    let d = [y[4], y[5], y[6], y[7]];
    let ac = quaternion_mul(a, c);
    let db = quaternion_mul(quaternion_conj(d), b);
    let da = quaternion_mul(d, a);
    let bc = quaternion_mul(b, quaternion_conj(c));
    [
        ac[0] - db[0],
        ac[1] - db[1],
        ac[2] - db[2],
        ac[3] - db[3],
        da[0] + bc[0],
        da[1] + bc[1],
        da[2] + bc[2],
        da[3] + bc[3],
    ]
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("octonion table mismatch at {row} * {col}: table gives {table}, doubling gives {doubled}")]
pub struct TableMismatch {
    pub row: &'static str,
    pub col: &'static str,
    pub table: String,
    pub doubled: String,
}

/// Cross-checks the hardcoded product table against the Cayley–Dickson copy.
pub fn verify_table() -> Result<(), TableMismatch> {
    for row in 0..8 {
        for col in 0..8 {
            let (s, k) = basis_product(row, col);
            let mut expect = [0.0; 8];
            expect[k] = s as f64;
            let got = cayley_dickson_mul(&Octonion::basis(row).0, &Octonion::basis(col).0);
            if got != expect {
                return Err(TableMismatch {
                    row: BASIS_NAMES[row],
                    col: BASIS_NAMES[col],
                    table: Octonion(expect).to_string(),
                    doubled: Octonion(got).to_string(),
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Octonion(pub [f64; 8]);

impl Octonion {
    pub const ZERO: Octonion = Octonion([0.0; 8]);

    pub fn new(c: [f64; 8]) -> Self {
        Octonion(c)
    }

    pub fn basis(idx: usize) -> Self {
        let mut c = [0.0; 8];
        c[idx] = 1.0;
        Octonion(c)
    }

    pub fn one() -> Self {
        Self::basis(ONE)
    }

    pub fn from_slice(s: &[f64]) -> Self {
        let mut c = [0.0; 8];
        c.copy_from_slice(s);
        Octonion(c)
    }

    /// Embeds a vector of `R^4` as `x0 e + x1 ie + x2 je + x3 ke`.
    pub fn from_he(x: &[f64]) -> Self {
        let mut c = [0.0; 8];
        c[4..8].copy_from_slice(&x[..4]);
        Octonion(c)
    }

    /// Embeds a quaternion `q0 + q1 i + q2 j + q3 k`.
    pub fn from_quaternion(q: &[f64]) -> Self {
        let mut c = [0.0; 8];
        c[..4].copy_from_slice(&q[..4]);
        Octonion(c)
    }

    pub fn coeffs(&self) -> &[f64; 8] {
        &self.0
    }

    pub fn re(&self) -> f64 {
        self.0[0]
    }

    pub fn im(&self) -> ImOctonion {
        let mut c = self.0;
        c[0] = 0.0;
        ImOctonion(Octonion(c))
    }

    pub fn conj(&self) -> Self {
        let mut c = self.0;
        for x in c.iter_mut().skip(1) {
            *x = -*x;
        }
        Octonion(c)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        linalg::dot(&self.0, &other.0)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.0;
        for x in c.iter_mut() {
            *x *= s;
        }
        Octonion(c)
    }

    /// True when only the `He = span{e, ie, je, ke}` coefficients are nonzero.
    pub fn is_in_he(&self, tol: f64) -> bool {
        self.0[..4].iter().all(|c| c.abs() <= tol)
    }
}

impl Index<usize> for Octonion {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Octonion {
    type Output = Octonion;
    fn add(self, rhs: Octonion) -> Octonion {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(rhs.0) {
            *x += y;
        }
        Octonion(c)
    }
}

impl AddAssign for Octonion {
    fn add_assign(&mut self, rhs: Octonion) {
        *self = *self + rhs;
    }
}

impl Sub for Octonion {
    type Output = Octonion;
    fn sub(self, rhs: Octonion) -> Octonion {
        self + (-rhs)
    }
}

impl Neg for Octonion {
    type Output = Octonion;
    fn neg(self) -> Octonion {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: f64) -> Octonion {
        self.scale(rhs)
    }
}

impl Mul for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: Octonion) -> Octonion {
        let mut out = [0.0; 8];
        for (r, &a) in self.0.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (c, &b) in rhs.0.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let (s, k) = TABLE[r][c];
                out[k as usize] += s as f64 * a * b;
            }
        }
        Octonion(out)
    }
}

impl fmt::Display for Octonion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, name) in self.0.iter().zip(BASIS_NAMES) {
            if *c == 0.0 {
                continue;
            }
            if first {
                write!(f, "{c}")?;
            } else if *c < 0.0 {
                write!(f, " - {}", -c)?;
            } else {
                write!(f, " + {c}")?;
            }
            if name != "1" {
                write!(f, "{name}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// An octonion with zero real part, modelling `R^7 = Im O`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImOctonion(Octonion);

impl ImOctonion {
    /// Rejects inputs with a nonzero real part.
    pub fn new(o: Octonion) -> Option<Self> {
        (o.0[0] == 0.0).then_some(ImOctonion(o))
    }

    /// Builds from the seven imaginary coefficients `(i, j, k, e, ie, je, ke)`.
    pub fn from_coords(c: &[f64]) -> Self {
        let mut v = [0.0; 8];
        v[1..8].copy_from_slice(&c[..7]);
        ImOctonion(Octonion(v))
    }

    pub fn octonion(&self) -> Octonion {
        self.0
    }

    pub fn coords(&self) -> [f64; 7] {
        let mut c = [0.0; 7];
        c.copy_from_slice(&self.0 .0[1..]);
        c
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// `(ab)c - a(bc)`.
pub fn associator(a: Octonion, b: Octonion, c: Octonion) -> Octonion {
    (a * b) * c - a * (b * c)
}

/// The associative 3-form on `Im O`: `phi(a, b, c) = <ab, c>`.
pub fn phi_im(a: &Octonion, b: &Octonion, c: &Octonion) -> f64 {
    (*a * *b).dot(c)
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum OctonionError {
    #[error("arguments are linearly dependent")]
    Degenerate,
    #[error("1-form has a component outside He = span{{e, ie, je, ke}}")]
    NotInHe,
}

/// Result of the imaginary 4-fold product with the data needed to interpret it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CayleyProduct {
    /// Multilinear value on the original arguments.
    pub raw: ImOctonion,
    /// Value on the orthonormalized arguments (basis independent up to sign).
    pub unit: ImOctonion,
    /// Gram volume of the arguments.
    pub volume: f64,
}

/// Imaginary part of the 4-fold product `Im(conj(a) (b (conj(c) d)))`.
///
/// The formula holds for orthogonal arguments. General arguments are
/// orthonormalized in order and the multilinear, alternating extension is
/// evaluated, which scales the orthonormal value by the Gram volume.
pub fn cayley_product_im(
    a: Octonion,
    b: Octonion,
    c: Octonion,
    d: Octonion,
) -> Result<CayleyProduct, OctonionError> {
    let on = linalg::gram_schmidt(&[a.0.to_vec(), b.0.to_vec(), c.0.to_vec(), d.0.to_vec()])
        .ok_or(OctonionError::Degenerate)?;
    let f: Vec<Octonion> = on.basis.iter().map(|v| Octonion::from_slice(v)).collect();
    let unit = four_fold_orthogonal(f[0], f[1], f[2], f[3]).im();
    let volume = on.volume();
    Ok(CayleyProduct {
        raw: ImOctonion(unit.octonion().scale(volume)),
        unit,
        volume,
    })
}

/// `conj(a) (b (conj(c) d))` without orthogonality checks.
pub fn four_fold_orthogonal(a: Octonion, b: Octonion, c: Octonion, d: Octonion) -> Octonion {
    a.conj() * (b * (c.conj() * d))
}

/// Clifford action of a 1-form in `He` on a spinor: octonionic left multiplication.
pub fn clifford_gamma(alpha: Octonion, s: Octonion) -> Result<Octonion, OctonionError> {
    let scale = alpha.norm().max(1.0);
    if !alpha.is_in_he(1e-12 * scale) {
        return Err(OctonionError::NotInHe);
    }
    Ok(alpha * s)
}
