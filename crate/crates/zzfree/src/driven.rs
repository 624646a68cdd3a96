//! Least-action block diagonalization of the drive-frame Hamiltonian and
//! the effective two-qubit Pauli coefficients.

use crate::circuit::{rotating_frame_hamiltonian, CircuitParams, DriveSpec};
use crate::error::{Error, Result};
use crate::operators::{HilbertSpace, Label};
use crate::spectral::sorted_eigh;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Smallest singular value of an overlap block before LA gives up.
pub const MIN_SINGULAR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LaResult {
    pub t: DMatrix<f64>,
    /// Exactly block diagonal.
    pub h_bd: DMatrix<f64>,
    pub min_singular: f64,
}

impl LaResult {
    /// `max |T^T T - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.t.nrows();
        (self.t.transpose() * &self.t - DMatrix::<f64>::identity(n, n)).amax()
    }
}

/// Closest-to-identity unitary `T` with `T^T H T` block diagonal over
/// `blocks`, which must partition `0..n`.
pub fn la_block_diagonalize(h: &DMatrix<f64>, blocks: &[Vec<usize>]) -> Result<LaResult> {
    let n = h.nrows();
    let mut owner = vec![usize::MAX; n];
    for (k, b) in blocks.iter().enumerate() {
        for &i in b {
            if i >= n || owner[i] != usize::MAX {
                return Err(Error::InvalidParameter { name: "partition", reason: format!("index {i} repeated or out of range") });
            }
            owner[i] = k;
        }
    }
    if owner.iter().any(|&o| o == usize::MAX) {
        return Err(Error::InvalidParameter { name: "partition", reason: "does not cover every state".into() });
    }
    let (vals, vecs) = sorted_eigh(h);
    let members = assign_to_blocks(&vecs, blocks, &owner);
    let mut t = DMatrix::zeros(n, n);
    let mut h_bd = DMatrix::zeros(n, n);
    let mut min_singular = f64::INFINITY;
    for (b, cols) in blocks.iter().zip(&members) {
        let m = b.len();
        let x = DMatrix::from_fn(m, m, |r, c| vecs[(b[r], cols[c])]);
        let svd = x.svd(true, true);
        let smin = svd.singular_values.min();
        min_singular = min_singular.min(smin);
        if smin < MIN_SINGULAR {
            return Err(Error::Hybridization(smin));
        }
        let u = svd.u.unwrap() * svd.v_t.unwrap();
        for (c, &bc) in b.iter().enumerate() {
            for r in 0..n {
                t[(r, bc)] = (0..m).map(|k| vecs[(r, cols[k])] * u[(c, k)]).sum();
            }
        }
        for (r, &br) in b.iter().enumerate() {
            for (c, &bc) in b.iter().enumerate() {
                h_bd[(br, bc)] = (0..m).map(|k| u[(r, k)] * vals[cols[k]] * u[(c, k)]).sum();
            }
        }
    }
    Ok(LaResult { t, h_bd, min_singular })
}

/// Eigenvectors per block, greedily by block weight `sum_i v_i^2` with
/// each block filled to its size. Mixing inside a block does not matter.
fn assign_to_blocks(vecs: &DMatrix<f64>, blocks: &[Vec<usize>], owner: &[usize]) -> Vec<Vec<usize>> {
    let n = vecs.nrows();
    let mut weight = vec![vec![0.0; blocks.len()]; n];
    for e in 0..n {
        for i in 0..n {
            weight[e][owner[i]] += vecs[(i, e)] * vecs[(i, e)];
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|e| (0..blocks.len()).map(move |k| (e, k))).collect();
    pairs.sort_by(|a, b| weight[b.0][b.1].total_cmp(&weight[a.0][a.1]).then(a.cmp(b)));
    let mut taken = vec![false; n];
    let mut members = vec![Vec::new(); blocks.len()];
    for (e, k) in pairs {
        if !taken[e] && members[k].len() < blocks[k].len() {
            taken[e] = true;
            members[k].push(e);
        }
    }
    members
}

const PAULI_NAMES: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Real 2x2 factors; index 2 holds `-iY`, so `Y (x) Y = -(Y' (x) Y')`.
fn pauli_real(k: usize) -> [[f64; 2]; 2] {
    match k {
        0 => [[1.0, 0.0], [0.0, 1.0]],
        1 => [[0.0, 1.0], [1.0, 0.0]],
        2 => [[0.0, -1.0], [1.0, 0.0]],
        _ => [[1.0, 0.0], [0.0, -1.0]],
    }
}

fn pauli_product(p: usize, q: usize) -> DMatrix<f64> {
    let (a, b) = (pauli_real(p), pauli_real(q));
    let sign = if p == 2 && q == 2 { -1.0 } else { 1.0 };
    DMatrix::from_fn(4, 4, |r, c| sign * a[r / 2][c / 2] * b[r % 2][c % 2])
}

/// `traces[p][q] = Tr[(P (x) Q) H]` over (I, X, Y, Z), control first.
/// Terms with a single `Y` vanish for real symmetric `H` and are stored as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    pub traces: [[f64; 4]; 4],
}

impl PauliCoefficients {
    pub fn from_block(h: &DMatrix<f64>) -> Self {
        let mut traces = [[0.0; 4]; 4];
        for p in 0..4 {
            for q in 0..4 {
                if (p == 2) != (q == 2) {
                    continue;
                }
                traces[p][q] = (pauli_product(p, q).transpose() * h).trace();
            }
        }
        PauliCoefficients { traces }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let mut it = name.chars();
        let (a, b) = (it.next()?, it.next()?);
        if it.next().is_some() {
            return None;
        }
        let p = PAULI_NAMES.iter().position(|&c| c == a)?;
        let q = PAULI_NAMES.iter().position(|&c| c == b)?;
        Some(self.traces[p][q])
    }

    pub fn zeta(&self) -> f64 {
        self.traces[3][3]
    }

    /// `alpha_ZX / 2` multiplies `Z (x) X`.
    pub fn alpha_zx(&self) -> f64 {
        self.traces[3][1] / 2.0
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(4, 4);
        for p in 0..4 {
            for q in 0..4 {
                if self.traces[p][q] != 0.0 {
                    h += pauli_product(p, q) * (self.traces[p][q] / 4.0);
                }
            }
        }
        h
    }
}

/// Effective block order: (00, 01, 10, 11) as (Q1, Q2).
pub const EFFECTIVE_LABELS: [Label; 4] = [[0, 0, 0], [0, 0, 1], [1, 0, 0], [1, 0, 1]];

/// Control-qubit partition: `{|000>,|001>}`, `{|100>,|101>}`, rest.
pub fn control_partition(space: &HilbertSpace) -> Vec<Vec<usize>> {
    let idx: Vec<usize> = EFFECTIVE_LABELS.iter().map(|&l| space.index(l).unwrap()).collect();
    let rest = (0..space.dim()).filter(|i| !idx.contains(i)).collect();
    vec![vec![idx[0], idx[1]], vec![idx[2], idx[3]], rest]
}

#[derive(Debug, Clone)]
pub struct DrivenPoint {
    pub pauli: PauliCoefficients,
    pub block: DMatrix<f64>,
    pub drive_frequency: f64,
    pub min_singular: f64,
    pub unitarity_error: f64,
    /// Largest coupling left between LA blocks in `T^T H T`.
    pub offblock_residual: f64,
}

pub fn effective_pauli_coefficients(
    params: &CircuitParams,
    drive: &DriveSpec,
    space: &HilbertSpace,
) -> Result<DrivenPoint> {
    let frame = rotating_frame_hamiltonian(params, drive, space)?;
    let blocks = control_partition(space);
    let la = la_block_diagonalize(&frame.hamiltonian, &blocks)?;
    let rotated = la.t.transpose() * &frame.hamiltonian * &la.t;
    let mut owner = vec![0; space.dim()];
    for (k, b) in blocks.iter().enumerate() {
        for &i in b {
            owner[i] = k;
        }
    }
    let mut offblock: f64 = 0.0;
    for i in 0..space.dim() {
        for j in 0..space.dim() {
            if owner[i] != owner[j] {
                offblock = offblock.max(rotated[(i, j)].abs());
            }
        }
    }
    let idx: Vec<usize> = EFFECTIVE_LABELS.iter().map(|&l| space.index(l).unwrap()).collect();
    let block = DMatrix::from_fn(4, 4, |r, c| la.h_bd[(idx[r], idx[c])]);
    Ok(DrivenPoint {
        pauli: PauliCoefficients::from_block(&block),
        block,
        drive_frequency: frame.drive_frequency,
        min_singular: la.min_singular,
        unitarity_error: la.unitarity_error(),
        offblock_residual: offblock,
    })
}

/// `(zeta, alpha_zx)` at CR amplitude `omega`, GHz.
pub fn zz_and_zx(params: &CircuitParams, space: &HilbertSpace, omega: f64) -> Result<(f64, f64)> {
    let p = effective_pauli_coefficients(params, &DriveSpec::cr(omega), space)?.pauli;
    Ok((p.zeta(), p.alpha_zx()))
}

pub fn dynamic_zz(params: &CircuitParams, drive: &DriveSpec, space: &HilbertSpace) -> Result<f64> {
    let on = effective_pauli_coefficients(params, drive, space)?.pauli.zeta();
    let off = effective_pauli_coefficients(params, &DriveSpec { amplitude: 0.0, target_amplitude: 0.0, ..*drive }, space)?
        .pauli
        .zeta();
    Ok(on - off)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRates {
    pub lambda: [f64; 11],
}

/// Closed-form rates, valid for `g1c = g2c`, `g12 = 0`, `d1 = d2`.
pub fn transition_rates(params: &CircuitParams) -> Result<TransitionRates> {
    if (params.g1c - params.g2c).abs() > 1e-12 || params.g12 != 0.0 || (params.d1 - params.d2).abs() > 1e-12 {
        return Err(Error::Unsupported("rates need g1c = g2c, g12 = 0 and d1 = d2".into()));
    }
    let g = params.g1c;
    let d = params.d1;
    let dc = params.dc;
    let (d1, d2, d12) = (params.delta1(), params.delta2(), params.delta12());
    for (v, what) in [
        (d12, "w1 = w2"),
        (d1, "w1 = wc"),
        (d2, "w2 = wc"),
        (d12 + d, "w1 - w2 = -delta"),
        (d12 - d, "w1 - w2 = delta"),
        (d1 + d, "w1 - wc = -delta"),
        (d2 + d, "w2 - wc = -delta"),
        (d2 - dc, "w2 - wc = delta_c"),
        (d1 - dc, "w1 - wc = delta_c"),
    ] {
        if v.abs() < 1e-12 {
            return Err(Error::SingularPoint(what));
        }
    }
    let s2 = std::f64::consts::SQRT_2;
    let lambda = [
        -g * g * d / (2.0 * d12 * d2 * (d12 + d)),
        -g * d / (2.0 * d1 * (d1 + d)),
        -s2 * g * g * d / (d12 * (d12 - d) * (d2 + d)),
        -g / (2.0 * d1),
        -g * g * d / (s2 * d12 * d2 * (d12 + d)),
        g * d / (s2 * d1 * (d1 + d)),
        -g * g * (d2 + dc) / (2.0 * d12 * d2 * (d2 - dc)),
        -g / (s2 * (d1 - dc)),
        -g * d / (s2 * d1 * (d1 + d)),
        g * g / (d2 * (d12 + d)),
        -g * g * d / (d12 * (d12 - d) * (d2 + d)),
    ];
    Ok(TransitionRates { lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::builtin;
    use crate::spectral::static_zz;
    use approx::assert_relative_eq;

    fn space() -> HilbertSpace {
        HilbertSpace::uniform(3).unwrap()
    }

    fn symmetric(wc: f64, g: f64) -> CircuitParams {
        let mut p = builtin(2).unwrap().params.at_coupler(wc);
        p.geometry = None;
        p.g1c = g;
        p.g2c = g;
        p.g12 = 0.0;
        p
    }

    #[test]
    fn la_identity_for_block_diagonal() {
        let h = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.2, 0.0, 0.0,
            0.2, 1.0, 0.0, 0.0,
            0.0, 0.0, 5.0, 0.3,
            0.0, 0.0, 0.3, 7.0,
        ]);
        let la = la_block_diagonalize(&h, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert!((la.t - DMatrix::<f64>::identity(4, 4)).amax() < 1e-12);
        assert!((la.h_bd - h).amax() < 1e-12);
    }

    #[test]
    fn la_two_level_rotation() {
        let theta: f64 = 0.3;
        let (e0, e1) = (0.0, 2.0);
        let (s, c) = theta.sin_cos();
        let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let h = &r * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![e0, e1])) * r.transpose();
        let la = la_block_diagonalize(&h, &[vec![0], vec![1]]).unwrap();
        assert!((la.t - r).amax() < 1e-12);
    }

    #[test]
    fn partition_errors() {
        let h = DMatrix::<f64>::identity(3, 3);
        assert!(la_block_diagonalize(&h, &[vec![0, 1]]).is_err());
        assert!(la_block_diagonalize(&h, &[vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn undriven_limit() {
        let s = space();
        for wc in [4.6, 4.8, 5.5, 6.2] {
            let p = builtin(2).unwrap().params.at_coupler(wc);
            let d = effective_pauli_coefficients(&p, &DriveSpec::cr(0.0), &s).unwrap();
            assert!((d.pauli.zeta() - static_zz(&p, &s).unwrap()).abs() < 1e-9);
            assert!(d.pauli.alpha_zx().abs() < 1e-12);
        }
    }

    #[test]
    fn device2_la_hygiene() {
        let s = space();
        let p = builtin(2).unwrap().params.at_coupler(4.8);
        let d = effective_pauli_coefficients(&p, &DriveSpec::cr(0.02), &s).unwrap();
        assert!(d.offblock_residual < 1e-10);
        assert!(d.unitarity_error < 1e-10);
        assert!((d.pauli.reconstruct() - &d.block).amax() < 1e-12);
        assert!(d.pauli.get("XI").unwrap().abs() < 1e-12);
    }

    #[test]
    fn decoupled_frame_blocks() {
        // Device 6 far above the qubits: the frame Hamiltonian splits into
        // exactly decoupled pieces at weak drive.
        let s = space();
        let p = builtin(6).unwrap().params.at_coupler(6.0);
        let z0 = static_zz(&p, &s).unwrap();
        for om in [1e-3, 2e-3] {
            let d = effective_pauli_coefficients(&p, &DriveSpec::cr(om), &s).unwrap();
            assert!(d.offblock_residual < 1e-10, "{om}: {}", d.offblock_residual);
            assert!((d.pauli.zeta() - z0).abs() < 1e-7);
            assert!(d.pauli.alpha_zx().abs() < 0.1 * om);
        }
    }

    #[test]
    fn dynamic_zz_signs() {
        let s = space();
        let p2 = builtin(2).unwrap().params.at_coupler(4.8);
        assert!(dynamic_zz(&p2, &DriveSpec::cr(0.02), &s).unwrap() < 0.0);
        assert_eq!(dynamic_zz(&p2, &DriveSpec::cr(0.0), &s).unwrap(), 0.0);
        let p6 = builtin(6).unwrap().params.at_coupler(4.8);
        assert!(dynamic_zz(&p6, &DriveSpec::cr(0.005), &s).unwrap() > 0.0);
    }

    #[test]
    fn rates_vanish_without_coupling() {
        let r = transition_rates(&symmetric(4.8, 0.0)).unwrap();
        assert!(r.lambda.iter().all(|&l| l == 0.0));
        assert!(transition_rates(&builtin(2).unwrap().params).is_err());
    }

    #[test]
    fn lambda4_arithmetic() {
        let mut p = symmetric(4.8, 0.095);
        p.w1 = 4.25;
        let r = transition_rates(&p).unwrap();
        assert_relative_eq!(r.lambda[3], 0.095 / 1.1, epsilon = 1e-12);
        assert!((r.lambda[3] - 0.0864).abs() < 1e-4);
    }

    #[test]
    fn zx_slope_tracks_twice_lambda1() {
        // Small-drive ZX rate per unit amplitude against 2 * lambda1 for
        // symmetric couplings near the qubits.
        let s = space();
        let p = symmetric(4.8, 0.095);
        let om = 1e-3;
        let (_, a) = zz_and_zx(&p, &s, om).unwrap();
        let l1 = transition_rates(&p).unwrap().lambda[0];
        let ratio = a / om / (2.0 * l1);
        assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
    }
}
