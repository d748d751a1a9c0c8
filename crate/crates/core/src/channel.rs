//! Line-of-sight channel vectors under the three propagation models.
//!
//! Phases are evaluated as a common term 2π·r/λ plus a per-element excess
//! path, each reduced modulo one wavelength before scaling by 2π. At
//! r/λ ≈ 80 the direct product k0·r_m would carry an absolute phase error
//! near 1e−13 rad per element, and that error does not cancel in
//! inner products between two users.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::geometry::{self, ArrayGeometry, NodeGeometry};

/// Propagation model used to build a channel vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelModel {
    /// Uniform planar wave: equal amplitudes, linear phase.
    Upw,
    /// Uniform spherical wave: equal amplitudes, Fresnel (quadratic) phase.
    Usw,
    /// Non-uniform spherical wave: exact distances in amplitude and phase.
    Nusw,
}

impl ChannelModel {
    pub const ALL: [ChannelModel; 3] = [ChannelModel::Upw, ChannelModel::Usw, ChannelModel::Nusw];

    pub fn name(self) -> &'static str {
        match self {
            ChannelModel::Upw => "upw",
            ChannelModel::Usw => "usw",
            ChannelModel::Nusw => "nusw",
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "upw" => Ok(ChannelModel::Upw),
            "usw" => Ok(ChannelModel::Usw),
            "nusw" => Ok(ChannelModel::Nusw),
            other => domain(format!(
                "unknown channel model '{other}' (expected upw, usw or nusw)"
            )),
        }
    }
}

/// Response of every array element towards one node, stored x-major
/// (see [`ArrayGeometry::indices`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    model: ChannelModel,
    array: ArrayGeometry,
    node: NodeGeometry,
    entries: Vec<Complex64>,
}

impl ChannelVector {
    /// Wraps explicit entries, e.g. synthetic vectors in tests.
    pub fn from_entries(
        model: ChannelModel,
        array: ArrayGeometry,
        node: NodeGeometry,
        entries: Vec<Complex64>,
    ) -> Result<Self> {
        if entries.len() != array.m_total() {
            return domain(format!(
                "{} entries for a {}-element array",
                entries.len(),
                array.m_total()
            ));
        }
        if entries
            .iter()
            .any(|e| !(e.re.is_finite() && e.im.is_finite()))
        {
            return domain("channel entries must be finite");
        }
        Ok(Self {
            model,
            array,
            node,
            entries,
        })
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }
    pub fn array(&self) -> &ArrayGeometry {
        &self.array
    }
    pub fn node(&self) -> &NodeGeometry {
        &self.node
    }
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// ‖h‖².
    pub fn gain(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    /// hᴴg.
    pub fn inner(&self, other: &ChannelVector) -> Result<Complex64> {
        if self.len() != other.len() {
            return domain(format!(
                "length mismatch: {} vs {}",
                self.len(),
                other.len()
            ));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Debug dump: 16-byte header (`NFCH`, version, m_x, m_z as u32 LE)
    /// followed by interleaved little-endian re/im doubles.
    pub fn write_binary<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(NFCH_MAGIC)?;
        out.write_all(&NFCH_VERSION.to_le_bytes())?;
        out.write_all(&(self.array.m_x() as u32).to_le_bytes())?;
        out.write_all(&(self.array.m_z() as u32).to_le_bytes())?;
        for e in &self.entries {
            out.write_all(&e.re.to_le_bytes())?;
            out.write_all(&e.im.to_le_bytes())?;
        }
        Ok(())
    }
}

const NFCH_MAGIC: &[u8; 4] = b"NFCH";
const NFCH_VERSION: u32 = 1;

/// Reads a dump written by [`ChannelVector::write_binary`], returning
/// `(m_x, m_z, entries)`.
pub fn read_binary<R: Read>(mut input: R) -> io::Result<(usize, usize, Vec<Complex64>)> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    if &header[0..4] != NFCH_MAGIC {
        return Err(bad("missing NFCH magic"));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    if word(4) != NFCH_VERSION {
        return Err(bad("unsupported NFCH version"));
    }
    let (m_x, m_z) = (word(8) as usize, word(12) as usize);
    let mut entries = Vec::with_capacity(m_x * m_z);
    let mut buf = [0u8; 16];
    for _ in 0..m_x * m_z {
        input.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
        entries.push(Complex64::new(re, im));
    }
    Ok((m_x, m_z, entries))
}

/// Scalar Green's function power density between points `r` and `s`,
/// including the two reactive near-field terms.
pub fn green_function(r: [f64; 3], s: [f64; 3], wavelength: f64) -> Result<f64> {
    let dist2: f64 = (0..3).map(|i| (r[i] - s[i]).powi(2)).sum();
    if dist2 == 0.0 {
        return domain("Green's function is singular at coincident points");
    }
    Ok(reactive_factor(dist2.sqrt(), wavelength) / (4.0 * PI * dist2))
}

/// 1 − 1/(k0 D)² + 1/(k0 D)⁴, the factor that the radiating-only channel
/// amplitudes drop.
pub fn reactive_factor(distance: f64, wavelength: f64) -> f64 {
    let kd2 = (2.0 * PI * distance / wavelength).powi(2);
    1.0 - 1.0 / kd2 + 1.0 / (kd2 * kd2)
}

/// Power gain A·rΨ/(4π r_m³) of one element towards `node`.
pub fn element_gain(arr: &ArrayGeometry, node: &NodeGeometry, m_x: i64, m_z: i64) -> Result<f64> {
    check_far_from_elements(arr, node)?;
    let rm = geometry::exact_distance(arr, node, m_x, m_z)?;
    Ok(nusw_gain_at(arr, node, rm))
}

fn nusw_gain_at(arr: &ArrayGeometry, node: &NodeGeometry, rm: f64) -> f64 {
    arr.element_area() * node.range() * node.psi() / (4.0 * PI * rm * rm * rm)
}

fn check_far_from_elements(arr: &ArrayGeometry, node: &NodeGeometry) -> Result<()> {
    let limit = 10.0 * arr.element_side();
    if node.range() <= limit {
        return Err(Error::Precondition(format!(
            "range {} m is within 10 element widths ({limit} m) of the array",
            node.range()
        )));
    }
    Ok(())
}

/// Fractional part of x/λ in cycles, with the division remainder recovered
/// exactly.
fn cycles_mod_one(x: f64, wavelength: f64) -> f64 {
    let q = x / wavelength;
    let rem = (-q).mul_add(wavelength, x) / wavelength;
    (q - q.round()) + rem
}

fn cis_cycles(amplitude: f64, cycles: f64) -> Complex64 {
    let c = cycles - cycles.round();
    Complex64::from_polar(amplitude, -2.0 * PI * c)
}

pub fn build_channel(
    model: ChannelModel,
    arr: &ArrayGeometry,
    node: &NodeGeometry,
) -> Result<ChannelVector> {
    let lam = arr.wavelength();
    let common = cycles_mod_one(node.range(), lam);
    let entries = match model {
        ChannelModel::Upw => {
            let amp = uniform_amplitude(arr, node);
            let d = arr.spacing();
            let (p, o) = (node.big_phi(), node.omega());
            arr.indices()
                .map(|(mx, mz)| {
                    let excess = -d * (mx as f64 * p + mz as f64 * o);
                    cis_cycles(amp, common + excess / lam)
                })
                .collect()
        }
        ChannelModel::Usw => {
            let amp = uniform_amplitude(arr, node);
            arr.indices()
                .map(|(mx, mz)| {
                    cis_cycles(
                        amp,
                        common + geometry::fresnel_excess(arr, node, mx, mz) / lam,
                    )
                })
                .collect()
        }
        ChannelModel::Nusw => {
            check_far_from_elements(arr, node)?;
            arr.indices()
                .map(|(mx, mz)| {
                    let excess = geometry::excess_distance(arr, node, mx, mz);
                    let amp = nusw_gain_at(arr, node, node.range() + excess).sqrt();
                    cis_cycles(amp, common + excess / lam)
                })
                .collect()
        }
    };
    Ok(ChannelVector {
        model,
        array: *arr,
        node: *node,
        entries,
    })
}

fn uniform_amplitude(arr: &ArrayGeometry, node: &NodeGeometry) -> f64 {
    (arr.element_area() * node.psi() / (4.0 * PI * node.range().powi(2))).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn baseline_node(r: f64) -> NodeGeometry {
        NodeGeometry::new(r, PI / 3.0, 2.0 * PI / 3.0).unwrap()
    }

    #[test]
    fn green_function_reference_points() {
        let lam = 0.125;
        assert_relative_eq!(reactive_factor(lam, lam), 0.9753, max_relative = 1e-3);
        // At 100λ the reactive correction is 1/(k0·D)² ≈ 2.5e-6; it drops
        // below 1e-6 from about 160λ.
        let far = 100.0 * lam;
        let g = green_function([0.0, far, 0.0], [0.0; 3], lam).unwrap();
        let lead = 1.0 / (4.0 * PI * far * far);
        assert_relative_eq!(
            1.0 - g / lead,
            1.0 / (200.0 * PI).powi(2),
            max_relative = 1e-3
        );
        let farther = 160.0 * lam;
        let g = green_function([farther, 0.0, 0.0], [0.0; 3], lam).unwrap();
        assert_relative_eq!(g, 1.0 / (4.0 * PI * farther * farther), max_relative = 1e-6);
        let unit = lam / (2.0 * PI);
        assert_relative_eq!(reactive_factor(unit, lam), 1.0, max_relative = 1e-14);
        assert!(green_function([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], lam).is_err());
    }

    #[test]
    fn reactive_terms_negligible_at_ten_wavelengths() {
        assert!((1.0 - reactive_factor(1.25, 0.125)).abs() < 3e-4);
    }

    #[test]
    fn element_gain_centre_boresight() {
        let a = ArrayGeometry::baseline();
        let n = NodeGeometry::boresight(5.0).unwrap();
        assert_relative_eq!(
            element_gain(&a, &n, 0, 0).unwrap(),
            a.element_area() / (4.0 * PI * 25.0),
            max_relative = 1e-14
        );
        let close = NodeGeometry::boresight(0.3).unwrap();
        assert!(matches!(
            element_gain(&a, &close, 0, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn element_gain_matches_nusw_amplitude() {
        let a = ArrayGeometry::baseline();
        let n = baseline_node(10.0);
        let h = build_channel(ChannelModel::Nusw, &a, &n).unwrap();
        let idx = a.indices().position(|p| p == (25, 25)).unwrap();
        assert_relative_eq!(
            h.entries()[idx].norm_sqr(),
            element_gain(&a, &n, 25, 25).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn upw_gain_is_exact_and_uniform() {
        let a = ArrayGeometry::baseline();
        let n = baseline_node(10.0);
        let h = build_channel(ChannelModel::Upw, &a, &n).unwrap();
        let amp = uniform_amplitude(&a, &n);
        assert!(h
            .entries()
            .iter()
            .all(|e| (e.norm() - amp).abs() <= 1e-15 * amp));
        assert_relative_eq!(
            h.gain(),
            2601.0 * a.element_area() * 0.75 / (4.0 * PI * 100.0),
            max_relative = 1e-12
        );
        let u = build_channel(ChannelModel::Usw, &a, &n).unwrap();
        assert_relative_eq!(u.gain(), h.gain(), max_relative = 1e-12);
    }

    #[test]
    fn phase_matches_naive_product() {
        let a = ArrayGeometry::baseline();
        let n = baseline_node(4.0);
        let h = build_channel(ChannelModel::Nusw, &a, &n).unwrap();
        for (i, (mx, mz)) in a.indices().enumerate().step_by(97) {
            let rm = geometry::exact_distance(&a, &n, mx, mz).unwrap();
            let naive = Complex64::from_polar(
                element_gain(&a, &n, mx, mz).unwrap().sqrt(),
                -a.wavenumber() * rm,
            );
            assert!((naive - h.entries()[i]).norm() <= 1e-10 * naive.norm());
        }
    }

    #[test]
    fn binary_round_trip() {
        let a = ArrayGeometry::half_wavelength(3, 5, 0.125).unwrap();
        let h = build_channel(ChannelModel::Usw, &a, &baseline_node(3.0)).unwrap();
        let mut buf = Vec::new();
        h.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 15 * 16);
        assert_eq!(&buf[..4], b"NFCH");
        let (mx, mz, e) = read_binary(buf.as_slice()).unwrap();
        assert_eq!((mx, mz), (3, 5));
        assert_eq!(e, h.entries());
        buf[0] = b'X';
        assert!(read_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn model_names_round_trip() {
        for m in ChannelModel::ALL {
            assert_eq!(m.name().parse::<ChannelModel>().unwrap(), m);
        }
        assert!("spherical".parse::<ChannelModel>().is_err());
    }
}
