//! Static circuit Hamiltonian, CR drive and the rotating frame.

use crate::error::{Error, Result};
use crate::operators::{HilbertSpace, Label, ModeSpec, COUPLER, Q1, Q2};
use crate::spectral::{diagonalize_and_label, DressedSpectrum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Capacitance ratios: `g_ic = a_i sqrt(w_i w_c)`, `g12 = a12 sqrt(w1 w2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingGeometry {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha12: f64,
}

impl CouplingGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidParameter { name, reason: format!("{a} not in (0, 1)") });
            }
        }
        if !(self.alpha12 >= 0.0 && self.alpha12.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha12",
                reason: format!("{} is negative", self.alpha12),
            });
        }
        Ok(())
    }

    /// `2 a1 a2 / a12`; the genuine idle point exists only when this is below 1.
    pub fn decoupling_ratio(&self) -> f64 {
        2.0 * self.alpha1 * self.alpha2 / self.alpha12
    }

    /// Geometry that yields `g1c = g2c = g` at coupler frequency `wc_ref`
    /// and the given direct coupling `g12`.
    pub fn from_reference(w1: f64, w2: f64, g: f64, wc_ref: f64, g12: f64) -> Self {
        CouplingGeometry {
            alpha1: g / (w1 * wc_ref).sqrt(),
            alpha2: g / (w2 * wc_ref).sqrt(),
            alpha12: g12 / (w1 * w2).sqrt(),
        }
    }
}

pub fn coupling_strengths(geom: &CouplingGeometry, w1: f64, w2: f64, wc: f64) -> (f64, f64, f64) {
    (
        geom.alpha1 * (w1 * wc).sqrt(),
        geom.alpha2 * (w2 * wc).sqrt(),
        geom.alpha12 * (w1 * w2).sqrt(),
    )
}

/// All frequencies in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub w1: f64,
    pub wc: f64,
    pub w2: f64,
    pub d1: f64,
    pub dc: f64,
    pub d2: f64,
    pub g1c: f64,
    pub g2c: f64,
    pub g12: f64,
    pub geometry: Option<CouplingGeometry>,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("w1", self.w1), ("wc", self.wc), ("w2", self.w2)] {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: format!("{w} is not positive") });
            }
        }
        for (name, v) in [
            ("d1", self.d1),
            ("dc", self.dc),
            ("d2", self.d2),
            ("g1c", self.g1c),
            ("g2c", self.g2c),
            ("g12", self.g12),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "not finite".into() });
            }
        }
        if let Some(g) = &self.geometry {
            g.validate()?;
        }
        Ok(())
    }

    /// Same circuit with the coupler moved to `wc`. Qubit-coupler couplings
    /// follow the geometry when one is attached; `g12` never moves.
    pub fn at_coupler(&self, wc: f64) -> CircuitParams {
        let mut p = *self;
        p.wc = wc;
        if let Some(geom) = &self.geometry {
            let (g1c, g2c, _) = coupling_strengths(geom, p.w1, p.w2, wc);
            p.g1c = g1c;
            p.g2c = g2c;
        }
        p
    }

    pub fn mode(&self, k: usize, levels: usize) -> ModeSpec {
        let (frequency, anharmonicity) = match k {
            Q1 => (self.w1, self.d1),
            COUPLER => (self.wc, self.dc),
            _ => (self.w2, self.d2),
        };
        ModeSpec { frequency, anharmonicity, levels }
    }

    pub fn delta1(&self) -> f64 {
        self.w1 - self.wc
    }
    pub fn delta2(&self) -> f64 {
        self.w2 - self.wc
    }
    pub fn delta12(&self) -> f64 {
        self.w1 - self.w2
    }
    pub fn chi(&self) -> f64 {
        self.dc / (self.delta1() + self.delta2())
    }

    pub fn bare_energy(&self, label: Label) -> f64 {
        let dims = [label[0] + 1, label[1] + 1, label[2] + 1];
        (0..3).map(|k| self.mode(k, dims[k]).energy(label[k])).sum()
    }
}

/// Build `sum_k H_k + sum_{i<j} g_ij (a_i + a_i†)(a_j + a_j†)` directly in
/// the product basis, counter-rotating terms included.
pub fn build_static_hamiltonian(params: &CircuitParams, space: &HilbertSpace) -> DMatrix<f64> {
    let n = space.dim();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = params.bare_energy(space.label(i));
    }
    let pairs = [(Q1, COUPLER, params.g1c), (COUPLER, Q2, params.g2c), (Q1, Q2, params.g12)];
    for (mi, mj, g) in pairs {
        if g == 0.0 {
            continue;
        }
        for col in 0..n {
            let l = space.label(col);
            for si in [-1i64, 1] {
                for sj in [-1i64, 1] {
                    let ni = l[mi] as i64 + si;
                    let nj = l[mj] as i64 + sj;
                    if ni < 0 || nj < 0 {
                        continue;
                    }
                    let mut l2 = l;
                    l2[mi] = ni as usize;
                    l2[mj] = nj as usize;
                    if let Some(row) = space.index(l2) {
                        let fi = (l[mi].max(l2[mi]) as f64).sqrt();
                        let fj = (l[mj].max(l2[mj]) as f64).sqrt();
                        h[(row, col)] += g * fi * fj;
                    }
                }
            }
        }
    }
    debug_assert!(is_symmetric(&h, 1e-12));
    h
}

pub(crate) fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// GHz.
    pub amplitude: f64,
    /// GHz; `None` selects the dressed target frequency.
    pub frequency: Option<f64>,
    pub mode: usize,
    /// In-phase tone on the target, GHz. Used to null classical crosstalk.
    pub target_amplitude: f64,
}

impl DriveSpec {
    pub fn cr(amplitude: f64) -> Self {
        DriveSpec { amplitude, frequency: None, mode: Q1, target_amplitude: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                reason: format!("{} is negative", self.amplitude),
            });
        }
        if self.mode > 2 {
            return Err(Error::InvalidParameter { name: "mode", reason: format!("{}", self.mode) });
        }
        Ok(())
    }
}

/// `Omega (a_k + a_k†)` for the driven mode.
pub fn build_drive_operator(drive: &DriveSpec, space: &HilbertSpace) -> DMatrix<f64> {
    crate::operators::quadrature(drive.mode, space) * drive.amplitude
}

/// Time-independent drive-frame Hamiltonian in the dressed basis.
///
/// Row/column `i` is the dressed state carrying bare label `space.label(i)`.
#[derive(Debug, Clone)]
pub struct RotatingFrame {
    pub hamiltonian: DMatrix<f64>,
    pub drive_frequency: f64,
    pub spectrum: DressedSpectrum,
}

pub fn rotating_frame_hamiltonian(
    params: &CircuitParams,
    drive: &DriveSpec,
    space: &HilbertSpace,
) -> Result<RotatingFrame> {
    drive.validate()?;
    let h0 = build_static_hamiltonian(params, space);
    let spectrum = diagonalize_and_label(&h0, space)?;
    let wd = match drive.frequency {
        Some(w) => w,
        None => spectrum.dressed_target_frequency(space)?,
    };
    let n = space.dim();
    let u = &spectrum.vectors;
    let mut hd = DMatrix::zeros(n, n);
    if drive.amplitude != 0.0 {
        hd += u.transpose() * build_drive_operator(drive, space) * u * 0.5;
    }
    if drive.target_amplitude != 0.0 {
        let target = DriveSpec { amplitude: drive.target_amplitude, mode: Q2, ..*drive };
        hd += u.transpose() * build_drive_operator(&target, space) * u * 0.5;
    }
    let exc: Vec<usize> = (0..n).map(|i| space.excitations(i)).collect();
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        h[(j, j)] = spectrum.energies[j] - wd * exc[j] as f64;
        for i in 0..n {
            if exc[i].abs_diff(exc[j]) == 1 {
                h[(i, j)] += hd[(i, j)];
            }
        }
    }
    Ok(RotatingFrame { hamiltonian: h, drive_frequency: wd, spectrum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{embed, quadrature};
    use approx::assert_relative_eq;

    fn dev2(wc: f64) -> CircuitParams {
        crate::devices::builtin(2).unwrap().params.at_coupler(wc)
    }

    #[test]
    fn coupling_formula() {
        let g = CouplingGeometry { alpha1: 0.022, alpha2: 0.022, alpha12: 0.001 };
        let (g1c, _, _) = coupling_strengths(&g, 4.25, 4.2, 4.8);
        assert_relative_eq!(g1c, 0.022 * (4.25f64 * 4.8).sqrt(), epsilon = 1e-15);
        let (a, _, _) = coupling_strengths(&g, 4.25, 4.2, 4.0);
        let (b, _, _) = coupling_strengths(&g, 4.25, 4.2, 16.0);
        assert_relative_eq!(b, 2.0 * a, epsilon = 1e-14);
    }

    #[test]
    fn uncoupled_is_diagonal() {
        let mut p = dev2(5.0);
        p.geometry = None;
        p.g1c = 0.0;
        p.g2c = 0.0;
        p.g12 = 0.0;
        let s = HilbertSpace::uniform(3).unwrap();
        let h = build_static_hamiltonian(&p, &s);
        for i in 0..27 {
            for j in 0..27 {
                if i != j {
                    assert_eq!(h[(i, j)], 0.0);
                }
            }
            assert_relative_eq!(h[(i, i)], p.bare_energy(s.label(i)));
        }
    }

    #[test]
    fn matches_operator_construction() {
        let p = dev2(5.3);
        let s = HilbertSpace::new([3, 4, 3]).unwrap();
        let h = build_static_hamiltonian(&p, &s);
        let mut h2 = DMatrix::zeros(s.dim(), s.dim());
        for k in 0..3 {
            let m = p.mode(k, s.dims()[k]);
            h2 += embed(&crate::operators::duffing_hamiltonian(&m), k, &s).unwrap();
        }
        let x: Vec<_> = (0..3).map(|k| quadrature(k, &s)).collect();
        h2 += &x[0] * &x[1] * p.g1c + &x[1] * &x[2] * p.g2c + &x[0] * &x[2] * p.g12;
        assert!((h - h2).amax() < 1e-12);
    }

    #[test]
    fn two_level_pair_block() {
        let p = CircuitParams {
            w1: 4.0,
            wc: 9.0,
            w2: 4.1,
            d1: -0.2,
            dc: -0.1,
            d2: -0.2,
            g1c: 0.0,
            g2c: 0.0,
            g12: 0.01,
            geometry: None,
        };
        let s = HilbertSpace::new([2, 2, 2]).unwrap();
        let h = build_static_hamiltonian(&p, &s);
        let a = s.index([1, 0, 0]).unwrap();
        let b = s.index([0, 0, 1]).unwrap();
        assert_relative_eq!(h[(a, b)], 0.01);
        assert_relative_eq!(h[(b, a)], 0.01);
    }

    #[test]
    fn ground_energy_nondegenerate() {
        let s = HilbertSpace::uniform(3).unwrap();
        for id in 1..=7 {
            let base = crate::devices::builtin(id).unwrap().params;
            for k in 0..=26 {
                let p = base.at_coupler(4.4 + 0.1 * k as f64);
                let e = nalgebra::SymmetricEigen::new(build_static_hamiltonian(&p, &s)).eigenvalues;
                let mut e: Vec<f64> = e.iter().copied().collect();
                e.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert!(e[1] - e[0] > 1.0, "device {id}");
            }
        }
    }

    #[test]
    fn undriven_frame_is_diagonal() {
        let s = HilbertSpace::uniform(3).unwrap();
        let f = rotating_frame_hamiltonian(&dev2(4.8), &DriveSpec::cr(0.0), &s).unwrap();
        let h = &f.hamiltonian;
        for i in 0..27 {
            for j in 0..27 {
                if i != j {
                    assert_eq!(h[(i, j)], 0.0);
                }
            }
            let n = s.excitations(i) as f64;
            assert_relative_eq!(h[(i, i)], f.spectrum.energies[i] - f.drive_frequency * n);
        }
    }

    #[test]
    fn rabi_block_when_uncoupled() {
        let mut p = dev2(5.0);
        p.geometry = None;
        p.g1c = 0.0;
        p.g2c = 0.0;
        p.g12 = 0.0;
        let s = HilbertSpace::uniform(3).unwrap();
        let f = rotating_frame_hamiltonian(&p, &DriveSpec::cr(0.02), &s).unwrap();
        assert_relative_eq!(f.drive_frequency, p.w2, epsilon = 1e-12);
        let g = s.index([0, 0, 0]).unwrap();
        let e = s.index([1, 0, 0]).unwrap();
        assert_relative_eq!(f.hamiltonian[(g, e)].abs(), 0.01, epsilon = 1e-12);
        assert_relative_eq!(f.hamiltonian[(e, e)], p.w1 - p.w2, epsilon = 1e-12);
    }

    #[test]
    fn frame_is_symmetric() {
        let s = HilbertSpace::uniform(3).unwrap();
        let mut d = DriveSpec::cr(0.04);
        d.target_amplitude = 0.003;
        let f = rotating_frame_hamiltonian(&dev2(4.8), &d, &s).unwrap();
        assert!(is_symmetric(&f.hamiltonian, 1e-14));
    }
}
