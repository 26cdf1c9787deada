use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, gradient and Hessian of a scalar function of `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub d: [f64; 2],
    pub h: [[f64; 2]; 2],
}

/// Hessian built from its upper triangle so that it is exactly symmetric.
fn symmetric(f: impl Fn(usize, usize) -> f64) -> [[f64; 2]; 2] {
    let off = f(0, 1);
    [[f(0, 0), off], [off, f(1, 1)]]
}

impl Jet2 {
    pub fn constant(value: f64) -> Self {
        Jet2 {
            value,
            d: [0.0; 2],
            h: [[0.0; 2]; 2],
        }
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(value: f64, index: usize) -> Self {
        let mut d = [0.0; 2];
        d[index] = 1.0;
        Jet2 {
            value,
            d,
            h: [[0.0; 2]; 2],
        }
    }

    /// Chain rule for a scalar function with derivatives `f0, f1, f2` at `self.value`.
    pub fn compose(self, f0: f64, f1: f64, f2: f64) -> Self {
        let h = symmetric(|a, b| f2 * self.d[a] * self.d[b] + f1 * self.h[a][b]);
        Jet2 {
            value: f0,
            d: [f1 * self.d[0], f1 * self.d[1]],
            h,
        }
    }

    pub fn scale(self, s: f64) -> Self {
        Jet2 {
            value: s * self.value,
            d: [s * self.d[0], s * self.d[1]],
            h: [
                [s * self.h[0][0], s * self.h[0][1]],
                [s * self.h[1][0], s * self.h[1][1]],
            ],
        }
    }

    pub fn recip(self) -> Self {
        let x = self.value;
        self.compose(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    pub fn powi(self, n: i32) -> Self {
        let x = self.value;
        match n {
            0 => Jet2::constant(1.0),
            1 => self,
            _ => {
                let nf = n as f64;
                self.compose(
                    x.powi(n),
                    nf * x.powi(n - 1),
                    nf * (nf - 1.0) * x.powi(n - 2),
                )
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.h[0][1] == self.h[1][0]
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1]],
            h: [
                [self.h[0][0] + o.h[0][0], self.h[0][1] + o.h[0][1]],
                [self.h[1][0] + o.h[1][0], self.h[1][1] + o.h[1][1]],
            ],
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let h = symmetric(|a, b| {
            self.h[a][b] * o.value
                + self.value * o.h[a][b]
                + self.d[a] * o.d[b]
                + self.d[b] * o.d[a]
        });
        Jet2 {
            value: self.value * o.value,
            d: [
                self.d[0] * o.value + self.value * o.d[0],
                self.d[1] * o.value + self.value * o.d[1],
            ],
            h,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

/// `atan2(y, x)` with the chain rule through both arguments.
pub fn atan2(y: Jet2, x: Jet2) -> Jet2 {
    let r2 = x.value * x.value + y.value * y.value;
    let ty = x.value / r2;
    let tx = -y.value / r2;
    let r4 = r2 * r2;
    let txx = 2.0 * x.value * y.value / r4;
    let tyy = -txx;
    let txy = (y.value * y.value - x.value * x.value) / r4;
    let h = symmetric(|a, b| {
        tx * x.h[a][b]
            + ty * y.h[a][b]
            + txx * x.d[a] * x.d[b]
            + tyy * y.d[a] * y.d[b]
            + txy * (x.d[a] * y.d[b] + y.d[a] * x.d[b])
    });
    Jet2 {
        value: y.value.atan2(x.value),
        d: [tx * x.d[0] + ty * y.d[0], tx * x.d[1] + ty * y.d[1]],
        h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let u = Jet2::variable(2.0, 0);
        let v = Jet2::variable(3.0, 1);
        let p = u * v;
        assert_eq!(p.value, 6.0);
        assert_eq!(p.d, [3.0, 2.0]);
        assert_eq!(p.h, [[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn quotient_of_variables() {
        let u = Jet2::variable(1.0, 0);
        let v = Jet2::variable(2.0, 1);
        let q = u / v;
        assert!((q.value - 0.5).abs() < 1e-15);
        assert!((q.d[1] + 0.25).abs() < 1e-15);
        assert!((q.h[1][1] - 0.25).abs() < 1e-15);
        assert!((q.h[0][1] + 0.25).abs() < 1e-15);
    }
}
