//! Dressed spectrum, static ZZ, perturbative estimates and Jacobi decoupling.

use crate::circuit::{build_static_hamiltonian, CircuitParams, CouplingGeometry};
use crate::error::{Error, Result};
use crate::operators::{HilbertSpace, Label};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Overlap gap below which two candidates count as tied.
pub const TIE_GAP: f64 = 1e-6;

pub const COMPUTATIONAL: [Label; 4] = [[0, 0, 0], [0, 0, 1], [1, 0, 0], [1, 0, 1]];

/// Eigenpairs of a static Hamiltonian indexed by bare label.
#[derive(Debug, Clone)]
pub struct DressedSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `energies[i]`: energy of the dressed state labeled by basis index `i`.
    pub energies: Vec<f64>,
    /// Column `i` is the dressed state labeled `i`, sign fixed so that
    /// its overlap with bare state `i` is positive.
    pub vectors: DMatrix<f64>,
    /// `|<bare i|dressed i>|^2`.
    pub overlaps: Vec<f64>,
    /// Best minus runner-up overlap at the time label `i` was assigned.
    pub gaps: Vec<f64>,
    /// `assignment[i]`: position of label `i` in `eigenvalues`.
    pub assignment: Vec<usize>,
    pub hybridized: bool,
}

/// Largest `|H v - lambda v|` over all pairs.
fn eigen_residual(h: &DMatrix<f64>, vals: &[f64], vecs: &DMatrix<f64>) -> f64 {
    let mut r = h * vecs;
    for (c, v) in vals.iter().enumerate() {
        let col = vecs.column(c) * *v;
        r.column_mut(c).axpy(-1.0, &col, 1.0);
    }
    r.amax()
}

/// Cyclic Jacobi rotations until every off-diagonal element is below
/// `1e-15` of the Frobenius norm.
fn jacobi_eigh(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let tol = 1e-15 * a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= tol {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// Eigen-decomposition sorted ascending. The implicit QR result is
/// checked against its residual; on rare inputs with exactly decoupled
/// blocks it pairs eigenvalues with the wrong vectors, and Jacobi takes
/// over.
pub(crate) fn sorted_eigh(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h.clone());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut vecs = eig.eigenvectors;
    let scale = h.amax().max(1.0);
    if !(eigen_residual(h, &vals, &vecs) < 1e-12 * scale) {
        (vals, vecs) = jacobi_eigh(h);
    }
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted = order.iter().map(|&k| vals[k]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    (sorted, vecs)
}

/// Greedy max-overlap matching, bare labels visited in ascending diagonal
/// energy. Returns (assignment, overlap, gap) per basis index.
pub(crate) fn greedy_match(diag: &[f64], vecs: &DMatrix<f64>) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let mut taken = vec![false; n];
    let mut assignment = vec![0; n];
    let mut overlaps = vec![0.0; n];
    let mut gaps = vec![f64::INFINITY; n];
    for &i in &order {
        let mut best = (usize::MAX, -1.0);
        let mut second = -1.0;
        for j in 0..n {
            if taken[j] {
                continue;
            }
            let ov = vecs[(i, j)] * vecs[(i, j)];
            if ov > best.1 + TIE_GAP {
                second = best.1;
                best = (j, ov);
            } else if ov > second {
                second = ov;
            }
        }
        taken[best.0] = true;
        assignment[i] = best.0;
        overlaps[i] = best.1;
        if second >= 0.0 {
            gaps[i] = best.1 - second;
        }
    }
    (assignment, overlaps, gaps)
}

pub fn diagonalize_and_label(h: &DMatrix<f64>, space: &HilbertSpace) -> Result<DressedSpectrum> {
    let n = space.dim();
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.nrows() });
    }
    let (eigenvalues, vecs) = sorted_eigh(h);
    let diag: Vec<f64> = (0..n).map(|i| h[(i, i)]).collect();
    let (assignment, overlaps, gaps) = greedy_match(&diag, &vecs);
    let mut vectors = DMatrix::zeros(n, n);
    let mut energies = vec![0.0; n];
    for i in 0..n {
        let j = assignment[i];
        let sign = if vecs[(i, j)] < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(i, &(vecs.column(j) * sign));
        energies[i] = eigenvalues[j];
    }
    let hybridized = COMPUTATIONAL
        .iter()
        .filter_map(|&l| space.index(l))
        .any(|i| overlaps[i] <= 0.5);
    Ok(DressedSpectrum { eigenvalues, energies, vectors, overlaps, gaps, assignment, hybridized })
}

impl DressedSpectrum {
    pub fn energy(&self, space: &HilbertSpace, label: Label) -> f64 {
        self.energies[space.index(label).expect("label inside space")]
    }

    /// Fails if any of `labels` was assigned through a tie.
    pub fn require_unambiguous(&self, space: &HilbertSpace, labels: &[Label]) -> Result<()> {
        for &l in labels {
            let i = space.index(l).expect("label inside space");
            if self.gaps[i] < TIE_GAP {
                return Err(Error::AmbiguousLabeling {
                    label: format!("|{}{}{}>", l[0], l[1], l[2]),
                    gap: self.gaps[i],
                });
            }
        }
        Ok(())
    }

    pub fn dressed_target_frequency(&self, space: &HilbertSpace) -> Result<f64> {
        self.require_unambiguous(space, &[[0, 0, 0], [0, 0, 1]])?;
        Ok(self.energy(space, [0, 0, 1]) - self.energy(space, [0, 0, 0]))
    }

    pub fn zz(&self, space: &HilbertSpace) -> f64 {
        let e = |l| self.energy(space, l);
        e([1, 0, 1]) - e([1, 0, 0]) - e([0, 0, 1]) + e([0, 0, 0])
    }
}

/// Static ZZ from labeled dressed energies, GHz.
pub fn static_zz(params: &CircuitParams, space: &HilbertSpace) -> Result<f64> {
    let h = build_static_hamiltonian(params, space);
    let s = diagonalize_and_label(&h, space)?;
    s.require_unambiguous(space, &COMPUTATIONAL)?;
    Ok(s.zz(space))
}

pub fn g_eff(params: &CircuitParams) -> f64 {
    let wc = params.wc;
    let sum: f64 = [params.w1, params.w2].iter().map(|&w| 1.0 / (w - wc) - 1.0 / (w + wc)).sum();
    params.g12 + 0.5 * params.g1c * params.g2c * sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticZZBreakdown {
    pub zeta_s1: f64,
    pub zeta_s2: f64,
    pub perturbative: f64,
    pub exact: f64,
    pub g_eff: f64,
}

const POLE: f64 = 1e-12;

/// `(zeta_s1, zeta_s2)` of the fourth-order estimate.
pub fn zz_swt(params: &CircuitParams) -> Result<(f64, f64)> {
    let d12 = params.delta12();
    let dsum = params.delta1() + params.delta2();
    if (d12 - params.d2).abs() < POLE {
        return Err(Error::SingularPoint("w1 - w2 = delta2"));
    }
    if (d12 + params.d1).abs() < POLE {
        return Err(Error::SingularPoint("w1 - w2 = -delta1"));
    }
    if (dsum - params.dc).abs() < POLE || dsum.abs() < POLE {
        return Err(Error::SingularPoint("Delta1 + Delta2 = delta_c"));
    }
    let ge = g_eff(params);
    let s1 = 2.0 * ge * ge * (params.d1 + params.d2) / ((d12 - params.d2) * (d12 + params.d1));
    let s2 = 8.0 * (ge - params.chi() * params.g12) * (ge - params.g12) / (dsum - params.dc);
    Ok((s1, s2))
}

pub fn zz_perturbative(params: &CircuitParams, space: &HilbertSpace) -> Result<StaticZZBreakdown> {
    let (zeta_s1, zeta_s2) = zz_swt(params)?;
    Ok(StaticZZBreakdown {
        zeta_s1,
        zeta_s2,
        perturbative: zeta_s1 + zeta_s2,
        exact: static_zz(params, space)?,
        g_eff: g_eff(params),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Perturbative,
    Numeric,
}

/// Coupler frequency where `g_eff` vanishes under the geometric scaling.
pub fn genuine_idle_perturbative(geom: &CouplingGeometry, w1: f64, w2: f64) -> Option<f64> {
    let r = geom.decoupling_ratio();
    if !(r < 1.0) {
        return None;
    }
    Some((w1 + w2) / (2.0 * (1.0 - r).sqrt()))
}

pub fn genuine_idle_frequency(
    params: &CircuitParams,
    method: Method,
    space: &HilbertSpace,
) -> Result<Option<f64>> {
    match method {
        Method::Perturbative => {
            let geom = params.geometry.ok_or_else(|| Error::InvalidParameter {
                name: "geometry",
                reason: "perturbative genuine point needs a coupling geometry".into(),
            })?;
            Ok(genuine_idle_perturbative(&geom, params.w1, params.w2))
        }
        Method::Numeric => {
            let scan = crate::search::find_static_zz_zeros(params, space, crate::search::DEFAULT_RANGE)?;
            Ok(scan.genuine().map(|p| p.wc))
        }
    }
}

/// Closed-form affine idle point. Written with the sign that reproduces
/// the tabulated perturbative values (4.515 GHz for device 2).
pub fn affine_idle_perturbative(params: &CircuitParams) -> Result<f64> {
    let ds = params.d1 + params.d2;
    if ds.abs() < POLE {
        return Err(Error::SingularPoint("delta1 + delta2 = 0"));
    }
    let d12 = params.delta12();
    Ok((params.w1 + params.w2 - params.dc) / 2.0 + 2.0 * (d12 - params.d2) * (d12 + params.d1) / ds)
}

pub fn affine_idle_frequency(
    params: &CircuitParams,
    method: Method,
    space: &HilbertSpace,
) -> Result<Option<f64>> {
    let scan = crate::search::find_static_zz_zeros(params, space, crate::search::DEFAULT_RANGE)?;
    let Some(numeric) = scan.affine().map(|p| p.wc) else {
        return Ok(None);
    };
    match method {
        Method::Numeric => Ok(Some(numeric)),
        Method::Perturbative => affine_idle_perturbative(params).map(Some),
    }
}

/// Static ZZ left over at the perturbative genuine point.
pub fn residual_offset(params: &CircuitParams, wc_gi: f64) -> f64 {
    let d = params.w1 + params.w2 - 2.0 * wc_gi;
    8.0 * params.g12 * params.g12 * params.dc / (d * d)
}

#[derive(Debug, Clone)]
pub struct NpadResult {
    /// Decoupled block in the order of `target`.
    pub block: DMatrix<f64>,
    pub rotations: usize,
}

pub const NPAD_TOL: f64 = 1e-10;
pub const NPAD_MAX_ROTATIONS: usize = 100_000;

/// Jacobi rotations, each zeroing the largest coupling between `target`
/// and its complement, until every such coupling is below `NPAD_TOL`.
pub fn npad_decouple(h: &DMatrix<f64>, target: &[usize]) -> Result<NpadResult> {
    let n = h.nrows();
    let mut m = h.clone();
    let mut inside = vec![false; n];
    for &t in target {
        inside[t] = true;
    }
    let outside: Vec<usize> = (0..n).filter(|&i| !inside[i]).collect();
    let mut rotations = 0;
    loop {
        let mut best = (0, 0, 0.0f64);
        for &p in target {
            for &q in &outside {
                let v = m[(p, q)].abs();
                if v > best.2 {
                    best = (p, q, v);
                }
            }
        }
        if best.2 < NPAD_TOL {
            break;
        }
        if rotations >= NPAD_MAX_ROTATIONS {
            return Err(Error::Convergence(rotations));
        }
        let (p, q, _) = best;
        let (hpp, hqq, hpq) = (m[(p, p)], m[(q, q)], m[(p, q)]);
        let theta = if hqq == hpp {
            std::f64::consts::FRAC_PI_4.copysign(hpq)
        } else {
            0.5 * (2.0 * hpq / (hqq - hpp)).atan()
        };
        let (s, c) = theta.sin_cos();
        for k in 0..n {
            let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
            m[(k, p)] = c * mkp - s * mkq;
            m[(k, q)] = s * mkp + c * mkq;
        }
        for k in 0..n {
            let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
            m[(p, k)] = c * mpk - s * mqk;
            m[(q, k)] = s * mpk + c * mqk;
        }
        m[(p, q)] = 0.0;
        m[(q, p)] = 0.0;
        rotations += 1;
    }
    let block = DMatrix::from_fn(target.len(), target.len(), |i, j| m[(target[i], target[j])]);
    Ok(NpadResult { block, rotations })
}

/// ZZ from the labeled eigenvalues of a 4x4 block ordered (00, 01, 10, 11).
pub fn block_zz(block: &DMatrix<f64>) -> f64 {
    let (vals, vecs) = sorted_eigh(block);
    let diag: Vec<f64> = (0..4).map(|i| block[(i, i)]).collect();
    let (assign, _, _) = greedy_match(&diag, &vecs);
    vals[assign[3]] - vals[assign[2]] - vals[assign[1]] + vals[assign[0]]
}

pub fn npad_static_zz(params: &CircuitParams, space: &HilbertSpace) -> Result<f64> {
    let h = build_static_hamiltonian(params, space);
    let target: Vec<usize> = COMPUTATIONAL.iter().map(|&l| space.index(l).unwrap()).collect();
    Ok(block_zz(&npad_decouple(&h, &target)?.block))
}
