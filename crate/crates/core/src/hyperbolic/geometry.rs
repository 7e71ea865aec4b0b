//! Regular right-angled polygons and 2x2 matrices in double-double precision.

use std::ops::Mul;

use twofloat::TwoFloat;

pub type Dd = TwoFloat;

pub fn dd(x: f64) -> Dd {
    TwoFloat::from(x)
}

pub fn dd_pi() -> Dd {
    twofloat::consts::PI
}

/// `1 / x` with two correction steps; the crate's division keeps only about
/// double precision.
pub fn dd_recip(x: Dd) -> Dd {
    let mut q = dd(1.0 / x.hi());
    for _ in 0..2 {
        q += q * (dd(1.0) - x * q);
    }
    q
}

/// `e^x - 1` for small `|x|`, by its Taylor series.
fn expm1_small(x: Dd) -> Dd {
    let mut term = x;
    let mut sum = x;
    for k in 2..=14 {
        term = term * x * dd_recip(dd(k as f64));
        sum += term;
    }
    sum
}

/// Exponential to full double-double accuracy (the crate's own is good to
/// about 1e-14 only): reduce by `ln 2`, then by `2^10` with `expm1` squaring.
pub fn dd_exp(x: Dd) -> Dd {
    let k = (x.hi() / std::f64::consts::LN_2).round();
    let r = (x - twofloat::consts::LN_2 * k) / 1024.0;
    let mut u = expm1_small(r);
    for _ in 0..10 {
        u = u * (u + 2.0);
    }
    (u + 1.0) * 2f64.powi(k as i32)
}

/// Natural logarithm by Newton steps on `dd_exp`.
pub fn dd_ln(x: Dd) -> Dd {
    let mut y = dd(x.hi().ln());
    for _ in 0..2 {
        y += x * dd_exp(-y) - 1.0;
    }
    y
}

pub fn dd_acosh(x: Dd) -> Dd {
    dd_ln(x + ((x - 1.0) * (x + 1.0)).sqrt())
}

pub fn dd_cosh(x: Dd) -> Dd {
    (dd_exp(x) + dd_exp(-x)) * 0.5
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolygonGeometry {
    pub m: usize,
    /// Side length of the regular right-angled m-gon.
    pub s: Dd,
    pub h: Dd,
}

impl PolygonGeometry {
    pub fn side(&self) -> f64 {
        self.s.hi()
    }

    /// Common length of every systole at the critical point.
    pub fn systole_length(&self) -> Dd {
        self.s * 4.0
    }
}

/// `cosh(s/2) = √2 cos(π/m)`, from the right triangle with angles `π/m`, `π/4`, `π/2`
/// spanned by the centre, a vertex and an edge midpoint.
pub fn side_length(m: usize) -> PolygonGeometry {
    let c = dd_acosh(dd(2.0).sqrt() * (dd_pi() * dd_recip(dd(m as f64))).cos());
    PolygonGeometry { m, s: c * 2.0, h: c }
}

/// Unit-determinant 2x2 matrix (projectively, an element of PSL(2, R)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Dd; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Mat2 {
        Mat2([[dd(1.0), dd(0.0)], [dd(0.0), dd(1.0)]])
    }

    pub fn det(&self) -> Dd {
        let a = &self.0;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    pub fn trace(&self) -> Dd {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, k: Dd) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0] * k, a[0][1] * k], [a[1][0] * k, a[1][1] * k]])
    }

    pub fn normalized(&self) -> Mat2 {
        self.scale(dd_recip(self.det().abs().sqrt()))
    }

    /// Inverse of a unit-determinant matrix.
    pub fn inverse(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]])
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        let a = &self.0;
        [[a[0][0].hi(), a[0][1].hi()], [a[1][0].hi(), a[1][1].hi()]]
    }

    /// Translation by `l` along the imaginary axis.
    pub fn translation(l: Dd) -> Mat2 {
        Mat2([[dd_exp(l * 0.5), dd(0.0)], [dd(0.0), dd_exp(-l * 0.5)]])
    }

    /// Rotation about `i` by angle `a`.
    pub fn rotation(a: Dd) -> Mat2 {
        let (s, c) = (a * 0.5).sin_cos();
        Mat2([[c, s], [-s, c]])
    }

    /// Action on the upper half plane (real and imaginary parts, in f64).
    pub fn apply(&self, z: (f64, f64)) -> (f64, f64) {
        let a = self.to_f64();
        let (x, y) = z;
        // (az + b) / (cz + d)
        let (nr, ni) = (a[0][0] * x + a[0][1], a[0][0] * y);
        let (dr, di) = (a[1][0] * x + a[1][1], a[1][0] * y);
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

/// The edge matrix before scaling, `[[sin θ + 1, -e^(l+δ) cos θ], [cos θ, e^(l+δ)(sin θ + 1)]]`:
/// translation through `l + δ` then rotation through `π/2 + θ`. Its determinant is
/// `2 e^(l+δ) (1 + sin θ)`.
pub fn edge_matrix_raw(l: Dd, delta: Dd, theta: Dd) -> Mat2 {
    let (s, c) = theta.sin_cos();
    let e = dd_exp(l + delta);
    Mat2([[s + 1.0, -(e * c)], [c, e * (s + 1.0)]])
}

pub fn edge_matrix(l: Dd, delta: Dd, theta: Dd) -> Mat2 {
    edge_matrix_raw(l, delta, theta).normalized()
}

/// Largest entry of `±a - I`, minimised over the sign.
pub fn projective_defect(a: &Mat2) -> f64 {
    let a = a.normalized();
    let dist = |sign: f64| {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.0[i][j] * sign - id).abs().hi());
            }
        }
        worst
    };
    dist(1.0).min(dist(-1.0))
}

/// Hyperbolic distance in the upper half plane.
pub fn distance(z: (f64, f64), w: (f64, f64)) -> f64 {
    let d = ((z.0 - w.0).powi(2) + (z.1 - w.1).powi(2)).sqrt();
    2.0 * (d / (2.0 * (z.1 * w.1).sqrt())).asinh()
}
