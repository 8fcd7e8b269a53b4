//! Independent 2×2 oracle: the system dY/dz = (A/z² + B/z)Y reduces, with
//! x = 1/z, y = e^{-a2 x}(v1, v2) and v2 = x^ρ w(s), s = −(a1 − a2)x, to
//! Kummer's equation s w'' + (b − s) w' − a w = 0 with ρ = −β (β an
//! eigenvalue of B), a = ρ + b22, b = 1 + tr B − 2β.
//!
//! The canonical columns are built from Tricomi's U: column 2 from U(a,b,s)
//! and column 1 from e^s U(b−a,b,−s). U is evaluated from the two-term M
//! formula, with M summed in double-double arithmetic so that the series
//! stays accurate for |s| ≈ 20.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    (s, (a - (s - v)) + (b - v))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from(q2)));
        let q3 = r.hi / o.hi;
        Dd::from(q1).add(Dd::from(q2)).add(Dd::from(q3))
    }
}

#[derive(Clone, Copy, Debug)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    fn from(z: C64) -> Self {
        Cdd { re: Dd::from(z.re), im: Dd::from(z.im) }
    }
    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }
    fn mul(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.mul(o.re).sub(self.im.mul(o.im)), im: self.re.mul(o.im).add(self.im.mul(o.re)) }
    }
    fn div(self, o: Cdd) -> Cdd {
        let den = o.re.mul(o.re).add(o.im.mul(o.im));
        let num = self.mul(Cdd { re: o.re, im: o.im.neg() });
        Cdd { re: num.re.div(den), im: num.im.div(den) }
    }
    fn to_c64(self) -> C64 {
        C64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }
    fn norm(self) -> f64 {
        self.to_c64().norm()
    }
}

/// Kummer's M(a, b, s) = Σ (a)_k/(b)_k s^k/k!.
pub fn kummer_m(a: C64, b: C64, s: C64) -> C64 {
    let sd = Cdd::from(s);
    let mut term = Cdd::from(C64::new(1.0, 0.0));
    let mut sum = term;
    for k in 0..2000 {
        let kf = Cdd::from(C64::new(k as f64, 0.0));
        let num = Cdd::from(a).add(kf).mul(sd);
        let den = Cdd::from(b).add(kf).mul(Cdd::from(C64::new((k + 1) as f64, 0.0)));
        term = term.mul(num).div(den);
        sum = sum.add(term);
        if k > 5 && term.norm() < 1e-34 * sum.norm().max(1e-300) {
            break;
        }
    }
    sum.to_c64()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex Γ by the Lanczos approximation with reflection.
pub fn gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        let pi = C64::new(PI, 0.0);
        return pi / ((pi * z).sin() * gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// Tricomi's U(a, b, s) with s given by modulus and a continuous argument.
pub fn tricomi_u(a: C64, b: C64, s_mod: f64, s_arg: f64) -> C64 {
    let s = C64::from_polar(s_mod, s_arg);
    let log_s = C64::new(s_mod.ln(), s_arg);
    let one = C64::new(1.0, 0.0);
    let t1 = gamma(one - b) / gamma(a - b + one) * kummer_m(a, b, s);
    let t2 = gamma(b - one) / gamma(a) * ((one - b) * log_s).exp() * kummer_m(a - b + one, C64::new(2.0, 0.0) - b, s);
    t1 + t2
}

/// Representative of `angle` (mod 2π) within π of `center`.
fn rep_near(angle: f64, center: f64) -> f64 {
    angle + 2.0 * PI * ((center - angle) / (2.0 * PI)).round()
}

/// Canonical solution Γ^φ(z) for A = diag(a1, a2), B (b21 ≠ 0), evaluated at
/// z = modulus·e^{i arg} on the universal cover. `beta` selects the eigenvalue
/// of B used in the reduction (either works).
pub fn kummer_gamma(a1: C64, a2: C64, b: [[C64; 2]; 2], phi: f64, z_mod: f64, z_arg: f64) -> [[C64; 2]; 2] {
    let (b11, b12, b21, b22) = (b[0][0], b[0][1], b[1][0], b[1][1]);
    let tr = b11 + b22;
    let det = b11 * b22 - b12 * b21;
    let beta = (tr + (tr * tr - 4.0 * det).sqrt()) / 2.0;
    let rho = -beta;
    let ka = rho + b22;
    let kb = 1.0 + tr - 2.0 * beta;
    let d = a1 - a2;
    let x_mod = 1.0 / z_mod;
    let x_arg = -z_arg;
    let log_x = C64::new(x_mod.ln(), x_arg);
    let x = C64::from_polar(x_mod, x_arg);
    let x_rho = (rho * log_x).exp();
    let e_shift = (-a2 * x).exp();

    // column 2: recessive where −d·x > 0
    let psi2 = rep_near((-d).arg(), phi);
    let s_arg = psi2 + x_arg;
    let s_mod = d.norm() * x_mod;
    let s = C64::from_polar(s_mod, s_arg);
    let log_s = C64::new(s_mod.ln(), s_arg);
    let k2 = (ka * (log_s - log_x)).exp();
    let u = tricomi_u(ka, kb, s_mod, s_arg);
    let u_up = tricomi_u(ka + 1.0, kb + 1.0, s_mod, s_arg);
    let v2 = k2 * x_rho * u;
    let th_v2 = k2 * x_rho * (rho * u - ka * s * u_up);
    let v1 = -(th_v2 + b22 * v2) / b21;
    let col2 = [e_shift * v1, e_shift * v2];

    // column 1: e^s U(b−a, b, s′), s′ = d·x, recessive where s′ > 0
    let psi1 = rep_near(d.arg(), phi);
    let sp_arg = psi1 + x_arg;
    let sp = C64::from_polar(s_mod, sp_arg);
    let log_sp = C64::new(s_mod.ln(), sp_arg);
    let c = b21 * ((rho + b11) * (log_sp - log_x)).exp();
    let ab = kb - ka;
    let u1 = tricomi_u(ab, kb, s_mod, sp_arg);
    let u1_up = tricomi_u(ab + 1.0, kb + 1.0, s_mod, sp_arg);
    let es = (-sp).exp();
    let w2 = c * x_rho * es * u1;
    let th_w2 = c * x_rho * es * (rho * u1 - sp * u1 - sp * ab * u1_up);
    let w1 = -(th_w2 + b22 * w2) / b21;
    let col1 = [e_shift * w1, e_shift * w2];

    [[col1[0], col2[0]], [col1[1], col2[1]]]
}
