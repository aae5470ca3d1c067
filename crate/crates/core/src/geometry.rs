//! Aperture-transmon electrode outlines and dipole-moment limits.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::units::{EPSILON_0, SPEED_OF_LIGHT};

/// Closed polyline in the plane, SI metres. When `closed`, the last point
/// repeats the first.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarCurve {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

const MIN_POINTS: usize = 16;

impl PlanarCurve {
    fn sample(n_points: usize, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(Error::InvalidParameter(format!("need at least {MIN_POINTS} points, got {n_points}")));
        }
        let mut points: Vec<(f64, f64)> = (0..n_points).map(|k| f(2.0 * PI * k as f64 / n_points as f64)).collect();
        points.push(points[0]);
        Ok(Self { points, closed: true })
    }

    /// Distinct vertices (without the closing repeat).
    fn vertices(&self) -> &[(f64, f64)] {
        if self.closed {
            &self.points[..self.points.len() - 1]
        } else {
            &self.points
        }
    }

    /// Signed shoelace area (positive for counter-clockwise traversal).
    pub fn signed_area(&self) -> f64 {
        let v = self.vertices();
        let n = v.len();
        0.5 * (0..n)
            .map(|i| {
                let (x0, y0) = v[i];
                let (x1, y1) = v[(i + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self { points: self.points.iter().map(|&(x, y)| (x + dx, y + dy)).collect(), closed: self.closed }
    }

    /// Even-odd ray-casting point-in-polygon test.
    pub fn contains(&self, p: (f64, f64)) -> bool {
        let v = self.vertices();
        let n = v.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (xi, yi) = v[i];
            let (xj, yj) = v[j];
            if (yi > p.1) != (yj > p.1) && p.0 < (xj - xi) * (p.1 - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// True when every vertex of `other` lies inside `self` and no edges cross.
    pub fn encloses(&self, other: &PlanarCurve) -> bool {
        other.vertices().iter().all(|&p| self.contains(p)) && !edges_cross(self.vertices(), other.vertices())
    }

    /// True when no two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        let v = self.vertices();
        let n = v.len();
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                    return false;
                }
            }
        }
        true
    }

    /// Writes `x,y` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y")?;
        for (x, y) in &self.points {
            writeln!(w, "{x},{y}")?;
        }
        Ok(())
    }
}

fn edges_cross(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    let (na, nb) = (a.len(), b.len());
    (0..na).any(|i| (0..nb).any(|j| segments_intersect(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb])))
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn segments_intersect(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Cardioid aperture outline:
/// `x = r/2 (2 cos t - cos 2t + 1/2)`, `y = r/2 (2 sin t - sin 2t)`.
pub fn cardioid_outline(r: f64, n_points: usize) -> Result<PlanarCurve> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be > 0, got {r}")));
    }
    PlanarCurve::sample(n_points, |t| {
        (r / 2.0 * (2.0 * t.cos() - (2.0 * t).cos() + 0.5), r / 2.0 * (2.0 * t.sin() - (2.0 * t).sin()))
    })
}

/// Piriform island outline: `x = b (1/2 - 2 sin t)`, `y = b cos t (1 + sin t)`.
pub fn piriform_island(b: f64, n_points: usize) -> Result<PlanarCurve> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("b must be > 0, got {b}")));
    }
    PlanarCurve::sample(n_points, |t| (b * (0.5 - 2.0 * t.sin()), b * t.cos() * (1.0 + t.sin())))
}

/// Dipole moment of a thin annulus of radius `r` driven at `v0`:
/// `(4 pi eps0 / 3) V0 r^2`, C·m.
pub fn thin_annulus_dipole(r: f64, v0: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be > 0, got {r}")));
    }
    Ok(4.0 * PI * EPSILON_0 / 3.0 * v0 * r * r)
}

/// Small-aperture dipole `(2/3) eps r_o^3 E0`, C·m. Warns when the aperture
/// is not small compared to `wavelength`.
pub fn aperture_dipole(r_o: f64, e0: f64, epsilon: f64, wavelength: Option<f64>) -> Result<f64> {
    if !(r_o > 0.0) {
        return Err(Error::InvalidParameter(format!("r_o must be > 0, got {r_o}")));
    }
    if let Some(lambda) = wavelength {
        if r_o >= lambda {
            log::warn!("aperture radius {r_o:e} m >= wavelength {lambda:e} m; dipole approximation invalid");
        }
    }
    Ok(2.0 / 3.0 * epsilon * r_o.powi(3) * e0)
}

/// Time-averaged power radiated into a half-space by an oscillating dipole,
/// `(1/2)(1/(4 pi eps0)) |p|^2 w^4 / (3 c^3)`, W.
pub fn dipole_radiated_power(p: f64, omega: f64) -> Result<f64> {
    if !(p >= 0.0) || !(omega > 0.0) {
        return Err(Error::InvalidParameter("need p >= 0 and omega > 0".into()));
    }
    Ok(0.5 / (4.0 * PI * EPSILON_0) * p * p * omega.powi(4) / (3.0 * SPEED_OF_LIGHT.powi(3)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cardioid_landmarks() {
        let r = 2.0;
        let c = cardioid_outline(r, 64).unwrap();
        assert!(c.closed && c.points.len() == 65);
        assert_eq!(c.points[0], *c.points.last().unwrap());
        let (x0, y0) = c.points[0];
        assert!((x0 - 0.75 * r).abs() < 1e-12 && y0.abs() < 1e-12);
        let (xp, yp) = c.points[32];
        assert!((xp + 1.25 * r).abs() < 1e-12 && yp.abs() < 1e-12);
    }

    #[test]
    fn cardioid_mirror_symmetry() {
        let c = cardioid_outline(1.0, 64).unwrap();
        let v = c.vertices();
        for (k, &(x, y)) in v.iter().enumerate() {
            let (xm, ym) = v[(v.len() - k) % v.len()];
            assert!((x - xm).abs() < 1e-12 && (y + ym).abs() < 1e-12);
        }
    }

    #[test]
    fn piriform_landmarks() {
        let b = 3.0;
        let p = piriform_island(b, 64).unwrap();
        let (x0, y0) = p.points[0];
        assert!((x0 - b / 2.0).abs() < 1e-12 && (y0 - b).abs() < 1e-12);
        let (x1, y1) = p.points[16];
        assert!((x1 + 1.5 * b).abs() < 1e-12 && y1.abs() < 1e-12);
    }

    #[test]
    fn device_island_inside_aperture() {
        let outer = cardioid_outline(750e-6, 720).unwrap();
        let inner = piriform_island(100e-6, 720).unwrap();
        assert!(outer.encloses(&inner));
        assert!(outer.is_simple() && inner.is_simple());
        assert!(inner.area() < outer.area());
        // an island shifted far to the right pokes out through the cusp
        assert!(!outer.encloses(&inner.translated(600e-6, 0.0)));
    }

    #[test]
    fn too_few_points() {
        assert!(cardioid_outline(1.0, 8).is_err());
        assert!(piriform_island(-1.0, 32).is_err());
    }

    #[test]
    fn area_scales_quadratically() {
        let a1 = cardioid_outline(1e-3, 256).unwrap().area();
        let a2 = cardioid_outline(3e-3, 256).unwrap().area();
        assert!((a2 / a1 - 9.0).abs() < 1e-9 * 9.0);
        let b1 = piriform_island(1e-4, 256).unwrap().area();
        let b2 = piriform_island(2e-4, 256).unwrap().area();
        assert!((b2 / b1 - 4.0).abs() < 1e-9 * 4.0);
        assert!(a1 > 0.0 && b1 > 0.0);
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        piriform_island(1e-4, 16).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y\n"));
        assert_eq!(text.lines().count(), 18);
    }

    #[test]
    fn dipole_values() {
        assert_eq!(thin_annulus_dipole(1.0, 0.0).unwrap(), 0.0);
        // 4 pi eps0 / 3 = 3.70884e-11
        assert!((thin_annulus_dipole(1.0, 1.0).unwrap() - 3.708_84e-11).abs() < 1e-15);
        assert_eq!(aperture_dipole(1e-3, 0.0, EPSILON_0, None).unwrap(), 0.0);
        // (2/3) eps0 (1 mm)^3 (1 V/m) = 5.9028e-21
        assert!((aperture_dipole(1e-3, 1.0, EPSILON_0, None).unwrap() - 5.902_79e-21).abs() < 1e-25);
        assert_eq!(dipole_radiated_power(0.0, 1e10).unwrap(), 0.0);
        // p = 1e-20, w = 2 pi 9.25 GHz -> 6.343e-14 W
        let p = dipole_radiated_power(1e-20, 2.0 * PI * 9.25e9).unwrap();
        assert!((p / 6.343e-14 - 1.0).abs() < 1e-3, "{p}");
    }

    proptest! {
        #[test]
        fn dipole_homogeneity(r in 1e-6f64..1e-2, v in 1e-9f64..1.0, w in 1e8f64..1e11, k in 0.1f64..10.0) {
            let a = thin_annulus_dipole(r, v).unwrap();
            prop_assert!((thin_annulus_dipole(k * r, v).unwrap() / a - k * k).abs() < 1e-12 * k * k);
            prop_assert!((thin_annulus_dipole(r, k * v).unwrap() / a - k).abs() < 1e-12 * k);
            let b = aperture_dipole(r, v, EPSILON_0, None).unwrap();
            prop_assert!((aperture_dipole(k * r, v, EPSILON_0, None).unwrap() / b - k.powi(3)).abs() < 1e-12 * k.powi(3));
            prop_assert!((aperture_dipole(r, k * v, EPSILON_0, None).unwrap() / b - k).abs() < 1e-12 * k);
            let p = dipole_radiated_power(a, w).unwrap();
            prop_assert!((dipole_radiated_power(a, k * w).unwrap() / p - k.powi(4)).abs() < 1e-11 * k.powi(4));
            prop_assert!((dipole_radiated_power(k * a, w).unwrap() / p - k * k).abs() < 1e-11 * k * k);
        }
    }
}
