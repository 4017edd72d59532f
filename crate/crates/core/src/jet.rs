use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Value plus all first and second partials of a scalar field of two
/// variables `(a, b)`.
///
/// The pair is `(t, x)`, `(t, r)`, `(x, y)` or `(tau, rho)` depending on the
/// caller. The mixed partial is stored once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet2<S = f64> {
    pub value: S,
    pub da: S,
    pub db: S,
    pub daa: S,
    pub dab: S,
    pub dbb: S,
}

impl<S: Scalar> Jet2<S> {
    pub fn zero() -> Self {
        let z = S::zero();
        Jet2 {
            value: z,
            da: z,
            db: z,
            daa: z,
            dab: z,
            dbb: z,
        }
    }

    pub fn map(self, f: impl Fn(S) -> S) -> Self {
        Jet2 {
            value: f(self.value),
            da: f(self.da),
            db: f(self.db),
            daa: f(self.daa),
            dab: f(self.dab),
            dbb: f(self.dbb),
        }
    }

    pub fn to_f64(self) -> Jet2<f64> {
        Jet2 {
            value: self.value.to_f64(),
            da: self.da.to_f64(),
            db: self.db.to_f64(),
            daa: self.daa.to_f64(),
            dab: self.dab.to_f64(),
            dbb: self.dbb.to_f64(),
        }
    }
}

impl Jet2<f64> {
    pub fn entries(&self) -> [f64; 6] {
        [self.value, self.da, self.db, self.daa, self.dab, self.dbb]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|v| v.is_finite())
    }

    /// `self + s * other`, entry by entry.
    pub fn axpy(&self, s: f64, other: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + s * other.value,
            da: self.da + s * other.da,
            db: self.db + s * other.db,
            daa: self.daa + s * other.daa,
            dab: self.dab + s * other.dab,
            dbb: self.dbb + s * other.dbb,
        }
    }
}
