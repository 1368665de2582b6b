use crate::envmap::UnitDirection;
use crate::error::{validation, Result};

/// Mirror reflection `r = i - 2 (i . n) n`.
pub fn reflect_vector(incident: UnitDirection, normal: UnitDirection) -> UnitDirection {
    let (i, n) = (incident.vec(), normal.vec());
    let r = i - n * (2.0 * i.dot(n));
    UnitDirection::from_vec(r).expect("reflection of a unit vector is nonzero")
}

/// Schlick's approximation `F = f0 + (1 - f0)(1 - cos)^5`.
pub fn fresnel(cos_theta: f64, f0: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&cos_theta) {
        return Err(validation(format!("cos_theta must lie in [0, 1], got {cos_theta}")));
    }
    if !(0.0..=1.0).contains(&f0) {
        return Err(validation(format!("f0 must lie in [0, 1], got {f0}")));
    }
    Ok(fresnel_unchecked(cos_theta, f0))
}

pub(crate) fn fresnel_unchecked(cos_theta: f64, f0: f64) -> f64 {
    let m = 1.0 - cos_theta;
    let m2 = m * m;
    f0 + (1.0 - f0) * (m2 * m2 * m)
}
