//! Fixed-step RK4 for the Lindblad equation with a real symmetric
//! Hamiltonian and ladder/number collapse operators.
//!
//! Each Hermitian operator `X = A + iB` is stored as its symmetric real
//! part `A` and antisymmetric imaginary part `B`, so the coherent part is
//! two real GEMMs. Several operators evolve side by side as column
//! blocks of one `m x (m k)` matrix.

use crate::error::{Error, Result};
use crate::operators::Label;
use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// T1, T2 in microseconds for (Q1, C, Q2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSpec {
    pub t1: [f64; 3],
    pub t2: [f64; 3],
}

impl CoherenceSpec {
    pub fn uniform(t: f64) -> Self {
        CoherenceSpec { t1: [t; 3], t2: [t; 3] }
    }

    pub fn closed() -> Self {
        Self::uniform(f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..3 {
            if !(self.t1[k] > 0.0) || !(self.t2[k] > 0.0) {
                return Err(Error::InvalidParameter { name: "coherence", reason: "times must be positive".into() });
            }
            if self.t2[k] > 2.0 * self.t1[k] {
                return Err(Error::InvalidParameter {
                    name: "coherence",
                    reason: format!("T2 = {} exceeds 2 T1 = {}", self.t2[k], 2.0 * self.t1[k]),
                });
            }
        }
        Ok(())
    }

    /// Relaxation rate, 1/ns.
    pub fn gamma1(&self, k: usize) -> f64 {
        1e-3 / self.t1[k]
    }

    /// Pure dephasing rate `1/T2 - 1/(2 T1)`, 1/ns.
    pub fn gamma_phi(&self, k: usize) -> f64 {
        (1e-3 / self.t2[k] - 0.5e-3 / self.t1[k]).max(0.0)
    }
}

/// Decay `a_k sqrt(gamma1)` and dephasing `sqrt(2 gamma_phi) n_k` on a
/// truncated basis given by its labels.
#[derive(Debug, Clone)]
pub struct Dissipator {
    /// Combined anticommutator and dephasing damping per element.
    damp: DMatrix<f64>,
    /// `(rate, [(i, up(i), sqrt(n_k(up)))])` per decaying mode.
    jumps: Vec<(f64, Vec<(usize, usize, f64)>)>,
}

impl Dissipator {
    pub fn new(labels: &[Label], coherence: &CoherenceSpec) -> Result<Self> {
        coherence.validate()?;
        let m = labels.len();
        let mut damp = DMatrix::zeros(m, m);
        let mut jumps = Vec::new();
        for k in 0..3 {
            let g1 = coherence.gamma1(k);
            let gp = coherence.gamma_phi(k);
            for i in 0..m {
                for j in 0..m {
                    let (ni, nj) = (labels[i][k] as f64, labels[j][k] as f64);
                    damp[(i, j)] += 0.5 * g1 * (ni + nj) + gp * (ni - nj).powi(2);
                }
            }
            if g1 > 0.0 {
                let mut pairs = Vec::new();
                for i in 0..m {
                    let mut up = labels[i];
                    up[k] += 1;
                    if let Some(u) = labels.iter().position(|l| *l == up) {
                        pairs.push((i, u, (up[k] as f64).sqrt()));
                    }
                }
                jumps.push((g1, pairs));
            }
        }
        Ok(Dissipator { damp, jumps })
    }

    pub fn none(m: usize) -> Self {
        Dissipator { damp: DMatrix::zeros(m, m), jumps: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.damp.nrows()
    }
}

/// A batch of Hermitian operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub m: usize,
    pub k: usize,
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl Batch {
    pub fn new(ops: &[DMatrix<Complex<f64>>]) -> Self {
        let m = ops[0].nrows();
        let k = ops.len();
        let mut re = DMatrix::zeros(m, m * k);
        let mut im = DMatrix::zeros(m, m * k);
        for (p, op) in ops.iter().enumerate() {
            for j in 0..m {
                for i in 0..m {
                    re[(i, p * m + j)] = op[(i, j)].re;
                    im[(i, p * m + j)] = op[(i, j)].im;
                }
            }
        }
        Batch { m, k, re, im }
    }

    /// Pure states `|psi><psi|` for real vectors.
    pub fn from_real_states(states: &[Vec<f64>]) -> Self {
        let ops: Vec<_> = states
            .iter()
            .map(|s| {
                let m = s.len();
                DMatrix::from_fn(m, m, |i, j| Complex::new(s[i] * s[j], 0.0))
            })
            .collect();
        Self::new(&ops)
    }

    pub fn get(&self, p: usize) -> DMatrix<Complex<f64>> {
        let m = self.m;
        DMatrix::from_fn(m, m, |i, j| Complex::new(self.re[(i, p * m + j)], self.im[(i, p * m + j)]))
    }

    pub fn trace(&self, p: usize) -> f64 {
        (0..self.m).map(|i| self.re[(i, p * self.m + i)]).sum()
    }

    /// `<v| X_p |v>` for a real vector.
    pub fn expect_real(&self, p: usize, v: &[f64]) -> f64 {
        let m = self.m;
        let mut s = 0.0;
        for j in 0..m {
            if v[j] == 0.0 {
                continue;
            }
            for i in 0..m {
                s += v[i] * self.re[(i, p * m + j)] * v[j];
            }
        }
        s
    }

    fn axpy_from(&mut self, base: &Batch, h: f64, d: &Batch) {
        self.re.copy_from(&base.re);
        add_scaled(&mut self.re, h, &d.re);
        self.im.copy_from(&base.im);
        add_scaled(&mut self.im, h, &d.im);
    }
}

/// `y += a x`, elementwise.
pub(crate) fn add_scaled(y: &mut DMatrix<f64>, a: f64, x: &DMatrix<f64>) {
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += a * xi;
    }
}

struct Workspace {
    hre: DMatrix<f64>,
    him: DMatrix<f64>,
}

fn derivative(h: &DMatrix<f64>, diss: &Dissipator, x: &Batch, out: &mut Batch, w: &mut Workspace) {
    let (m, k) = (x.m, x.k);
    w.hre.gemm(1.0, h, &x.re, 0.0);
    w.him.gemm(1.0, h, &x.im, 0.0);
    let tp = 2.0 * PI;
    for p in 0..k {
        let o = p * m;
        for j in 0..m {
            for i in 0..m {
                let comm_re = w.hre[(i, o + j)] - w.hre[(j, o + i)];
                let comm_im = w.him[(i, o + j)] + w.him[(j, o + i)];
                let d = diss.damp[(i, j)];
                out.re[(i, o + j)] = tp * comm_im - d * x.re[(i, o + j)];
                out.im[(i, o + j)] = -tp * comm_re - d * x.im[(i, o + j)];
            }
        }
        for (rate, pairs) in &diss.jumps {
            for &(i, ui, si) in pairs {
                for &(j, uj, sj) in pairs {
                    let f = rate * si * sj;
                    out.re[(i, o + j)] += f * x.re[(ui, o + uj)];
                    out.im[(i, o + j)] += f * x.im[(ui, o + uj)];
                }
            }
        }
    }
}

/// Trace drift tolerance per operator.
pub const TRACE_TOL: f64 = 1e-8;

/// Integrate `x` from `t0` to `t1` with step close to `dt`. `hamiltonian`
/// fills a real symmetric matrix in GHz at time `t` (ns); `observe` sees
/// every accepted step.
pub fn lindblad_evolve(
    mut hamiltonian: impl FnMut(f64, &mut DMatrix<f64>),
    diss: &Dissipator,
    x0: &Batch,
    t0: f64,
    t1: f64,
    dt: f64,
    mut observe: impl FnMut(f64, &Batch),
) -> Result<Batch> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("{dt}") });
    }
    if diss.dim() != x0.m {
        return Err(Error::DimensionMismatch { expected: x0.m, got: diss.dim() });
    }
    let (m, k) = (x0.m, x0.k);
    let steps = ((t1 - t0) / dt).ceil().max(0.0) as usize;
    let h_step = if steps == 0 { 0.0 } else { (t1 - t0) / steps as f64 };
    let zero = || Batch { m, k, re: DMatrix::zeros(m, m * k), im: DMatrix::zeros(m, m * k) };
    let mut w = Workspace { hre: DMatrix::zeros(m, m * k), him: DMatrix::zeros(m, m * k) };
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (zero(), zero(), zero(), zero(), zero());
    let mut h0 = DMatrix::zeros(m, m);
    let mut hm = DMatrix::zeros(m, m);
    let mut h1 = DMatrix::zeros(m, m);
    let traces0: Vec<f64> = (0..k).map(|p| x0.trace(p)).collect();
    let mut x = x0.clone();
    hamiltonian(t0, &mut h0);
    observe(t0, &x);
    for s in 0..steps {
        let t = t0 + s as f64 * h_step;
        hamiltonian(t + 0.5 * h_step, &mut hm);
        hamiltonian(t + h_step, &mut h1);
        derivative(&h0, diss, &x, &mut k1, &mut w);
        tmp.axpy_from(&x, 0.5 * h_step, &k1);
        derivative(&hm, diss, &tmp, &mut k2, &mut w);
        tmp.axpy_from(&x, 0.5 * h_step, &k2);
        derivative(&hm, diss, &tmp, &mut k3, &mut w);
        tmp.axpy_from(&x, h_step, &k3);
        derivative(&h1, diss, &tmp, &mut k4, &mut w);
        let c = h_step / 6.0;
        add_scaled(&mut x.re, c, &k1.re);
        add_scaled(&mut x.re, 2.0 * c, &k2.re);
        add_scaled(&mut x.re, 2.0 * c, &k3.re);
        add_scaled(&mut x.re, c, &k4.re);
        add_scaled(&mut x.im, c, &k1.im);
        add_scaled(&mut x.im, 2.0 * c, &k2.im);
        add_scaled(&mut x.im, 2.0 * c, &k3.im);
        add_scaled(&mut x.im, c, &k4.im);
        std::mem::swap(&mut h0, &mut h1);
        observe(t + h_step, &x);
    }
    for p in 0..k {
        let drift = (x.trace(p) - traces0[p]).abs();
        if drift > TRACE_TOL * traces0[p].abs().max(1.0) || !drift.is_finite() {
            return Err(Error::StepSize { drift, t: t1 });
        }
    }
    Ok(x)
}
