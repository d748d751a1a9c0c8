//! Array and node geometry.
//!
//! The array lies in the x–z plane centred on the origin and radiates into
//! the half-space y > 0. Element indices are signed so that the centre
//! element is `(0, 0)` and a row of `m_x` elements runs from `-(m_x-1)/2` to
//! `(m_x-1)/2`. A uniform linear array is the special case `m_x = 1`, i.e. a
//! single column along z.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// Uniform planar array with square elements on a square lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    m_x: usize,
    m_z: usize,
    spacing: f64,
    element_side: f64,
    wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(
        m_x: usize,
        m_z: usize,
        spacing: f64,
        element_side: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if m_x == 0 || m_z == 0 || m_x % 2 == 0 || m_z % 2 == 0 {
            return domain(format!(
                "element counts must be odd and positive, got {m_x}x{m_z}"
            ));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return domain(format!("wavelength must be positive, got {wavelength}"));
        }
        if !(element_side.is_finite() && element_side > 0.0) {
            return domain(format!("element side must be positive, got {element_side}"));
        }
        if !(spacing.is_finite() && spacing >= element_side) {
            return domain(format!(
                "spacing {spacing} must be at least the element side {element_side}"
            ));
        }
        Ok(Self {
            m_x,
            m_z,
            spacing,
            element_side,
            wavelength,
        })
    }

    /// Half-wavelength array of isotropic-aperture elements (A = λ²/4π).
    pub fn half_wavelength(m_x: usize, m_z: usize, wavelength: f64) -> Result<Self> {
        Self::new(
            m_x,
            m_z,
            wavelength / 2.0,
            wavelength / (4.0 * PI).sqrt(),
            wavelength,
        )
    }

    /// 51×51 array at λ = 0.125 m.
    pub fn baseline() -> Self {
        Self::half_wavelength(51, 51, 0.125).expect("baseline geometry is valid")
    }

    /// Same lattice and element, different element counts.
    pub fn with_counts(&self, m_x: usize, m_z: usize) -> Result<Self> {
        Self::new(m_x, m_z, self.spacing, self.element_side, self.wavelength)
    }

    pub fn m_x(&self) -> usize {
        self.m_x
    }
    pub fn m_z(&self) -> usize {
        self.m_z
    }
    pub fn m_total(&self) -> usize {
        self.m_x * self.m_z
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn element_side(&self) -> f64 {
        self.element_side
    }
    pub fn element_area(&self) -> f64 {
        self.element_side * self.element_side
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
    pub fn is_ula(&self) -> bool {
        self.m_x == 1
    }

    /// Largest index magnitude along x.
    pub fn half_x(&self) -> i64 {
        (self.m_x as i64 - 1) / 2
    }
    /// Largest index magnitude along z.
    pub fn half_z(&self) -> i64 {
        (self.m_z as i64 - 1) / 2
    }

    /// All `(m_x, m_z)` index pairs, x-major. This is the storage order of
    /// every channel vector.
    pub fn indices(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let (hx, hz) = (self.half_x(), self.half_z());
        (-hx..=hx).flat_map(move |ix| (-hz..=hz).map(move |iz| (ix, iz)))
    }

    /// Cartesian position of element `(m_x, m_z)`.
    pub fn element_position(&self, m_x: i64, m_z: i64) -> Result<[f64; 3]> {
        self.check_index(m_x, m_z)?;
        Ok([m_x as f64 * self.spacing, 0.0, m_z as f64 * self.spacing])
    }

    pub(crate) fn check_index(&self, m_x: i64, m_z: i64) -> Result<()> {
        if m_x.abs() > self.half_x() || m_z.abs() > self.half_z() {
            return domain(format!(
                "element ({m_x}, {m_z}) outside the {}x{} array",
                self.m_x, self.m_z
            ));
        }
        Ok(())
    }
}

/// A user's position in spherical coordinates about the array centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGeometry {
    range: f64,
    theta: f64,
    phi: f64,
    cosines: (f64, f64, f64),
}

impl NodeGeometry {
    pub fn new(range: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(range.is_finite() && range > 0.0) {
            return domain(format!("range must be positive, got {range}"));
        }
        let cosines = direction_cosines(theta, phi)?;
        Ok(Self {
            range,
            theta,
            phi,
            cosines,
        })
    }

    /// Node on the array normal.
    pub fn boresight(range: f64) -> Result<Self> {
        Self::new(range, PI / 2.0, PI / 2.0)
    }

    pub fn range(&self) -> f64 {
        self.range
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    /// Φ = sinφ cosθ, the x direction cosine.
    pub fn big_phi(&self) -> f64 {
        self.cosines.0
    }
    /// Ψ = sinφ sinθ, the y direction cosine (projected-aperture factor).
    pub fn psi(&self) -> f64 {
        self.cosines.1
    }
    /// Ω = cosφ, the z direction cosine.
    pub fn omega(&self) -> f64 {
        self.cosines.2
    }
    /// ε = d / r.
    pub fn epsilon(&self, arr: &ArrayGeometry) -> f64 {
        arr.spacing / self.range
    }
    pub fn position(&self) -> [f64; 3] {
        let (x, y, z) = self.cosines;
        [self.range * x, self.range * y, self.range * z]
    }

    /// Same direction, different range.
    pub fn with_range(&self, range: f64) -> Result<Self> {
        Self::new(range, self.theta, self.phi)
    }

    /// True when both nodes share a direction to within `tol` radians.
    pub fn same_direction(&self, other: &NodeGeometry, tol: f64) -> bool {
        (self.theta - other.theta).abs() <= tol && (self.phi - other.phi).abs() <= tol
    }
}

/// Direction cosines (Φ, Ψ, Ω) of the unit vector at azimuth θ and polar angle φ.
pub fn direction_cosines(theta: f64, phi: f64) -> Result<(f64, f64, f64)> {
    let open = |a: f64| a.is_finite() && a > 0.0 && a < PI;
    if !open(theta) || !open(phi) {
        return Err(Error::Domain(format!(
            "angles must lie in (0, pi), got theta={theta}, phi={phi}"
        )));
    }
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    Ok((sp * ct, sp * st, cp))
}

/// The quadratic under the square root of the element distance:
/// q = −2ε(m_xΦ + m_zΩ) + ε²(m_x² + m_z²), so that r_m = r·√(1 + q).
pub(crate) fn excess_quadratic(
    arr: &ArrayGeometry,
    node: &NodeGeometry,
    m_x: i64,
    m_z: i64,
) -> f64 {
    let eps = node.epsilon(arr);
    let (mx, mz) = (m_x as f64, m_z as f64);
    -2.0 * eps * (mx * node.big_phi() + mz * node.omega()) + eps * eps * (mx * mx + mz * mz)
}

/// r_m − r without cancellation.
pub(crate) fn excess_distance(arr: &ArrayGeometry, node: &NodeGeometry, m_x: i64, m_z: i64) -> f64 {
    let q = excess_quadratic(arr, node, m_x, m_z);
    node.range * q / ((1.0 + q).sqrt() + 1.0)
}

/// Distance from the node to element `(m_x, m_z)`.
pub fn exact_distance(arr: &ArrayGeometry, node: &NodeGeometry, m_x: i64, m_z: i64) -> Result<f64> {
    arr.check_index(m_x, m_z)?;
    Ok(node.range * (1.0 + excess_quadratic(arr, node, m_x, m_z)).sqrt())
}

/// Second-order (Fresnel) expansion of [`exact_distance`].
pub fn fresnel_distance_approx(
    arr: &ArrayGeometry,
    node: &NodeGeometry,
    m_x: i64,
    m_z: i64,
) -> Result<f64> {
    arr.check_index(m_x, m_z)?;
    Ok(node.range + fresnel_excess(arr, node, m_x, m_z))
}

/// r̃ − r.
pub(crate) fn fresnel_excess(arr: &ArrayGeometry, node: &NodeGeometry, m_x: i64, m_z: i64) -> f64 {
    let eps = node.epsilon(arr);
    let (mx, mz) = (m_x as f64, m_z as f64);
    let (p, o) = (node.big_phi(), node.omega());
    node.range
        * (-eps * (mx * p + mz * o)
            + 0.5 * eps * eps * (mx * mx * (1.0 - p * p) + mz * mz * (1.0 - o * o)))
}

/// Aperture taken as the diagonal of the element-centre bounding box.
pub fn aperture(arr: &ArrayGeometry) -> f64 {
    let (wx, wz) = ((arr.m_x - 1) as f64, (arr.m_z - 1) as f64);
    (wx * wx + wz * wz).sqrt() * arr.spacing
}

/// `(rayleigh, fresnel)` = (2D²/λ, 0.5·√(D³/λ)).
pub fn region_boundaries(arr: &ArrayGeometry) -> (f64, f64) {
    let d = aperture(arr);
    let lam = arr.wavelength;
    (2.0 * d * d / lam, 0.5 * (d * d * d / lam).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cartesian(arr: &ArrayGeometry, node: &NodeGeometry, mx: i64, mz: i64) -> f64 {
        let s = arr.element_position(mx, mz).unwrap();
        let p = node.position();
        ((p[0] - s[0]).powi(2) + (p[1] - s[1]).powi(2) + (p[2] - s[2]).powi(2)).sqrt()
    }

    #[test]
    fn cosines_at_boresight_and_baseline() {
        let (p, s, o) = direction_cosines(PI / 2.0, PI / 2.0).unwrap();
        assert!(p.abs() < 1e-16 && (s - 1.0).abs() < 1e-16 && o.abs() < 1e-16);
        let (p, s, o) = direction_cosines(PI / 3.0, 2.0 * PI / 3.0).unwrap();
        assert_relative_eq!(p, 0.75f64.sqrt() * 0.5, max_relative = 1e-15);
        assert_relative_eq!(s, 0.75, max_relative = 1e-15);
        assert_relative_eq!(o, -0.5, max_relative = 1e-15);
        for phi in [0.1, 1.0, 2.5] {
            let (p, s, _) = direction_cosines(PI / 2.0, phi).unwrap();
            assert!(p.abs() < 1e-16);
            assert_relative_eq!(s, phi.sin(), max_relative = 1e-15);
        }
    }

    #[test]
    fn cosines_reject_closed_interval() {
        assert!(direction_cosines(0.0, 1.0).is_err());
        assert!(direction_cosines(1.0, PI).is_err());
        assert!(direction_cosines(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn array_invariants() {
        assert!(ArrayGeometry::new(50, 51, 0.0625, 0.035, 0.125).is_err());
        assert!(ArrayGeometry::new(51, 51, 0.03, 0.035, 0.125).is_err());
        let a = ArrayGeometry::baseline();
        assert_eq!(a.m_total(), 2601);
        assert_relative_eq!(
            a.element_area(),
            0.125f64.powi(2) / (4.0 * PI),
            max_relative = 1e-15
        );
        assert_eq!(a.indices().count(), 2601);
        assert_eq!(a.indices().next(), Some((-25, -25)));
    }

    #[test]
    fn exact_distance_special_cases() {
        let a = ArrayGeometry::baseline();
        let n = NodeGeometry::new(10.0, PI / 3.0, 2.0 * PI / 3.0).unwrap();
        assert_eq!(exact_distance(&a, &n, 0, 0).unwrap(), 10.0);
        let b = NodeGeometry::boresight(7.0).unwrap();
        let eps = b.epsilon(&a);
        assert_relative_eq!(
            exact_distance(&a, &b, 1, 0).unwrap(),
            7.0 * (1.0 + eps * eps).sqrt(),
            max_relative = 1e-15
        );
        let corner = exact_distance(&a, &n, 25, 25).unwrap();
        assert_relative_eq!(corner, cartesian(&a, &n, 25, 25), max_relative = 1e-14);
        assert!(exact_distance(&a, &n, 26, 0).is_err());
    }

    #[test]
    fn excess_matches_difference() {
        let a = ArrayGeometry::baseline();
        let n = NodeGeometry::new(3.0, 1.1, 2.0).unwrap();
        for (mx, mz) in [(-25, 25), (3, -7), (0, 1)] {
            let direct = exact_distance(&a, &n, mx, mz).unwrap() - 3.0;
            assert_relative_eq!(
                excess_distance(&a, &n, mx, mz),
                direct,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn fresnel_special_cases() {
        let a = ArrayGeometry::baseline();
        let b = NodeGeometry::boresight(9.0).unwrap();
        let eps = b.epsilon(&a);
        assert_eq!(fresnel_distance_approx(&a, &b, 0, 0).unwrap(), 9.0);
        assert_relative_eq!(
            fresnel_distance_approx(&a, &b, 1, 1).unwrap(),
            9.0 * (1.0 + eps * eps),
            max_relative = 1e-15
        );
    }

    #[test]
    fn fresnel_error_small_beyond_twice_fresnel_distance() {
        let a = ArrayGeometry::baseline();
        let (_, fresnel) = region_boundaries(&a);
        let n = NodeGeometry::new(2.0 * fresnel, PI / 3.0, 2.0 * PI / 3.0).unwrap();
        let worst = a
            .indices()
            .map(|(mx, mz)| {
                let e = exact_distance(&a, &n, mx, mz).unwrap();
                (fresnel_distance_approx(&a, &n, mx, mz).unwrap() - e).abs() / e
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-3, "worst relative error {worst}");
    }

    #[test]
    fn region_boundaries_reference() {
        let single = ArrayGeometry::half_wavelength(1, 1, 0.125).unwrap();
        assert_eq!(region_boundaries(&single), (0.0, 0.0));
        let (ray, fre) = region_boundaries(&ArrayGeometry::baseline());
        assert_relative_eq!(
            aperture(&ArrayGeometry::baseline()),
            50.0 * 0.0625 * 2f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(ray, 312.5, max_relative = 1e-13);
        assert_relative_eq!(fre, 13.139, max_relative = 1e-4);
        let ula = ArrayGeometry::half_wavelength(1, 51, 0.125).unwrap();
        assert_relative_eq!(aperture(&ula), 3.125, max_relative = 1e-15);
        assert_relative_eq!(region_boundaries(&ula).0, 156.25, max_relative = 1e-13);
    }
}
