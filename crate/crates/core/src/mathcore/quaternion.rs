use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the k component accepted by [`quat_polar`].
pub const K_TOLERANCE: f64 = 1e-9;

/// A real quaternion `w + x i + y j + z k`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Exponential of a quaternion.
    pub fn exp(self) -> Self {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        let ew = self.w.exp();
        if v == 0.0 {
            return Quaternion::new(ew, 0.0, 0.0, 0.0);
        }
        let s = ew * v.sin() / v;
        Quaternion::new(ew * v.cos(), self.x * s, self.y * s, self.z * s)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, b: Quaternion) -> Quaternion {
        quat_mul(self, b)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;

    fn add(self, b: Quaternion) -> Quaternion {
        Quaternion::new(self.w + b.w, self.x + b.x, self.y + b.y, self.z + b.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;

    fn sub(self, b: Quaternion) -> Quaternion {
        Quaternion::new(self.w - b.w, self.x - b.x, self.y - b.y, self.z - b.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

/// Hamilton product: `i^2 = j^2 = k^2 = ijk = -1`, `ij = k`, `jk = i`, `ki = j`.
pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion {
        w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    }
}

/// Polar form `amplitude * exp(2 pi e_eta phase)` with
/// `e_eta = i cos(eta) + j sin(eta)`.
///
/// `eta` lies in `(-pi/2, pi/2]` and `phase` (in cycles) in `(-1/2, 1/2]`.
/// When the odd part vanishes the axis is undefined: `eta` is reported as 0
/// and `degenerate` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuaternionPolar {
    pub amplitude: f64,
    pub eta: f64,
    pub phase: f64,
    pub degenerate: bool,
}

impl QuaternionPolar {
    /// Unit pure quaternion `e_eta`.
    pub fn axis(&self) -> Quaternion {
        Quaternion::new(0.0, self.eta.cos(), self.eta.sin(), 0.0)
    }

    pub fn to_quaternion(&self) -> Quaternion {
        quat_exp_polar(self.amplitude, self.eta, self.phase)
    }
}

/// `amplitude * exp(2 pi e_eta phase)`.
pub fn quat_exp_polar(amplitude: f64, eta: f64, phase: f64) -> Quaternion {
    let arg = 2.0 * PI * phase;
    let e = Quaternion::new(0.0, eta.cos() * arg, eta.sin() * arg, 0.0);
    e.exp().scale(amplitude)
}

/// Folds an angle into `(-pi/2, pi/2]`.
pub fn fold_half_pi(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(PI);
    if a > PI / 2.0 {
        a -= PI;
    }
    a
}

/// Folds a phase in cycles into `(-1/2, 1/2]`.
pub fn fold_cycles(phase: f64) -> f64 {
    let mut p = phase.rem_euclid(1.0);
    if p > 0.5 {
        p -= 1.0;
    }
    p
}

/// Decomposes a quaternion with vanishing k component into polar form.
///
/// The phase sign follows the i component (the j component when the i
/// component is exactly zero, which is the `eta = pi/2` axis).
pub fn quat_polar(q: Quaternion) -> Result<QuaternionPolar> {
    let amplitude = (q.w * q.w + q.x * q.x + q.y * q.y).sqrt();
    if q.z.abs() > K_TOLERANCE * amplitude.max(1.0) {
        return Err(Error::NonMonogenicQuaternion(q.z));
    }
    if amplitude == 0.0 {
        return Err(Error::ZeroQuaternion);
    }
    let odd = (q.x * q.x + q.y * q.y).sqrt();
    let degenerate = odd == 0.0;
    let (eta, sign) = if degenerate {
        (0.0, 1.0)
    } else if q.x != 0.0 {
        (fold_half_pi((q.y / q.x).atan()), q.x.signum())
    } else {
        (PI / 2.0, q.y.signum())
    };
    let phase = (sign * odd).atan2(q.w) / (2.0 * PI);
    Ok(QuaternionPolar {
        amplitude,
        eta,
        phase: fold_cycles(phase),
        degenerate,
    })
}
