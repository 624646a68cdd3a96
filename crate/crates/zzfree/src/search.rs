//! Operating-point search: static ZZ zeros, freedom amplitudes and
//! small-drive exponent fits.

use crate::circuit::CircuitParams;
use crate::driven::zz_and_zx;
use crate::error::{Error, Result};
use crate::operators::HilbertSpace;
use crate::spectral::{g_eff, static_zz};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_RANGE: (f64, f64) = (4.4, 7.0);
/// Coupler scan step, GHz.
pub const SCAN_STEP: f64 = 1e-3;
/// Bisection tolerance on the coupler frequency, GHz.
pub const ROOT_TOL: f64 = 1e-7;
/// |g_eff| below this counts as decoupled, GHz.
pub const G_EFF_THRESHOLD: f64 = 1e-3;
/// |zeta| below this counts as ZZ-free, GHz.
pub const ZZ_FREE: f64 = 1e-6;
/// Freedom-amplitude ceiling and scan step, GHz.
pub const OMEGA_MAX: f64 = 0.08;
pub const OMEGA_STEP: f64 = 1e-3;
pub const OMEGA_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Genuine,
    Affine,
    Trivial,
    Dynamic,
}

impl PointKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointKind::Genuine => "genuine",
            PointKind::Affine => "affine",
            PointKind::Trivial => "trivial",
            PointKind::Dynamic => "dynamic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub wc: f64,
    pub kind: PointKind,
    pub omega: Option<f64>,
    pub alpha_zx: Option<f64>,
    pub g_eff: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ZeroScan {
    /// Ascending in `wc`.
    pub points: Vec<OperatingPoint>,
    /// Sign changes inside the qubit-collision margin.
    pub collisions: Vec<f64>,
    /// Sign changes that turned out to be jumps, not zeros.
    pub jumps: Vec<f64>,
    /// Every scanned value was zero: nothing couples the qubits.
    pub degenerate: bool,
}

impl ZeroScan {
    pub fn genuine(&self) -> Option<&OperatingPoint> {
        self.points.iter().find(|p| p.kind == PointKind::Genuine)
    }
    pub fn affine(&self) -> Option<&OperatingPoint> {
        self.points.iter().find(|p| p.kind == PointKind::Affine)
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + step * k as f64).collect()
}

/// Static ZZ across a coupler grid; entries that cannot be labeled are NaN.
pub fn scan_static_zz(params: &CircuitParams, space: &HilbertSpace, wcs: &[f64]) -> Vec<f64> {
    wcs.par_iter()
        .map(|&wc| static_zz(&params.at_coupler(wc), space).unwrap_or(f64::NAN))
        .collect()
}

fn bisect(mut lo: f64, mut hi: f64, mut flo: f64, tol: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Classify roots: those inside `max(w1, w2) + g` are collisions and
/// dropped; genuine is the highest root with |g_eff| below threshold;
/// affine is the lowest remaining root above it; the rest are trivial.
pub fn classify(params: &CircuitParams, roots: &[f64]) -> (Vec<OperatingPoint>, Vec<f64>) {
    let mut collisions = Vec::new();
    let mut pts: Vec<OperatingPoint> = Vec::new();
    for &wc in roots {
        let p = params.at_coupler(wc);
        if wc < params.w1.max(params.w2) + p.g1c.max(p.g2c) {
            collisions.push(wc);
            continue;
        }
        pts.push(OperatingPoint { wc, kind: PointKind::Trivial, omega: None, alpha_zx: None, g_eff: g_eff(&p) });
    }
    if let Some(p) = pts.iter_mut().rev().find(|p| p.g_eff.abs() < G_EFF_THRESHOLD) {
        p.kind = PointKind::Genuine;
    }
    if let Some(p) = pts.iter_mut().find(|p| p.g_eff.abs() >= G_EFF_THRESHOLD) {
        p.kind = PointKind::Affine;
    }
    (pts, collisions)
}

pub fn find_static_zz_zeros(params: &CircuitParams, space: &HilbertSpace, range: (f64, f64)) -> Result<ZeroScan> {
    find_static_zz_zeros_with(params, space, range, SCAN_STEP, ROOT_TOL)
}

/// As `find_static_zz_zeros` with an explicit scan step and root
/// tolerance, both GHz.
pub fn find_static_zz_zeros_with(
    params: &CircuitParams,
    space: &HilbertSpace,
    range: (f64, f64),
    step: f64,
    tol: f64,
) -> Result<ZeroScan> {
    if !(step > 0.0 && tol > 0.0 && range.1 > range.0) {
        return Err(Error::InvalidParameter { name: "range", reason: format!("{range:?} step {step} tol {tol}") });
    }
    let wcs = grid(range.0, range.1, step);
    let vals = scan_static_zz(params, space, &wcs);
    if vals.iter().all(|v| v.abs() < 1e-12) {
        return Ok(ZeroScan { degenerate: true, ..Default::default() });
    }
    let f = |wc: f64| static_zz(&params.at_coupler(wc), space);
    let brackets: Vec<usize> = (0..wcs.len() - 1)
        .filter(|&k| vals[k].is_finite() && vals[k + 1].is_finite())
        .filter(|&k| vals[k] == 0.0 || (vals[k] < 0.0) != (vals[k + 1] < 0.0))
        .filter(|&k| vals[k + 1] != 0.0 || k + 1 == wcs.len() - 1)
        .collect();
    let refined: Vec<Result<(f64, f64)>> = brackets
        .par_iter()
        .map(|&k| {
            let r = if vals[k] == 0.0 { wcs[k] } else { bisect(wcs[k], wcs[k + 1], vals[k], tol, f)? };
            Ok((r, f(r)?))
        })
        .collect();
    let mut roots = Vec::new();
    let mut jumps = Vec::new();
    for (r, &k) in refined.into_iter().zip(&brackets) {
        match r {
            Ok((wc, z)) if z.abs() < ZZ_FREE => roots.push(wc),
            Ok((wc, _)) => jumps.push(wc),
            // Bisection walked into the crossing itself.
            Err(Error::AmbiguousLabeling { .. } | Error::Hybridization(_)) => jumps.push(0.5 * (wcs[k] + wcs[k + 1])),
            Err(e) => return Err(e),
        }
    }
    let (points, collisions) = classify(params, &roots);
    Ok(ZeroScan { points, collisions, jumps, degenerate: false })
}

/// Total ZZ as a function of the CR amplitude.
fn zeta_of<'a>(params: &'a CircuitParams, space: &'a HilbertSpace) -> impl Fn(f64) -> Result<f64> + Sync + 'a {
    move |om| zz_and_zx(params, space, om).map(|(z, _)| z)
}

/// Every amplitude in `(0, OMEGA_MAX]` where the total ZZ vanishes.
/// Returns `[0]` when the static part is already below `ZZ_FREE`.
pub fn freedom_amplitudes(params: &CircuitParams, space: &HilbertSpace) -> Result<Vec<f64>> {
    let f = zeta_of(params, space);
    let z0 = f(0.0)?;
    if z0.abs() < ZZ_FREE {
        return Ok(vec![0.0]);
    }
    let oms = grid(0.0, OMEGA_MAX, OMEGA_STEP);
    let vals: Vec<f64> = oms.par_iter().map(|&o| f(o).unwrap_or(f64::NAN)).collect();
    let mut out = Vec::new();
    for k in 0..oms.len() - 1 {
        let (a, b) = (vals[k], vals[k + 1]);
        if a.is_finite() && b.is_finite() && (a < 0.0) != (b < 0.0) {
            let r = bisect(oms[k], oms[k + 1], a, OMEGA_TOL, &f)?;
            if f(r)?.abs() < ZZ_FREE {
                out.push(r);
            }
        }
    }
    Ok(out)
}

/// Smallest freedom amplitude, if any.
pub fn freedom_amplitude(params: &CircuitParams, space: &HilbertSpace) -> Result<Option<f64>> {
    Ok(freedom_amplitudes(params, space)?.first().copied())
}

/// Freedom point at coupler frequency `wc`, with the ZX rate there.
pub fn freedom_point(base: &CircuitParams, space: &HilbertSpace, wc: f64) -> Result<Option<OperatingPoint>> {
    let p = base.at_coupler(wc);
    let Some(om) = freedom_amplitude(&p, space)? else {
        return Ok(None);
    };
    let (_, a) = zz_and_zx(&p, space, om)?;
    Ok(Some(OperatingPoint { wc, kind: PointKind::Dynamic, omega: Some(om), alpha_zx: Some(a), g_eff: g_eff(&p) }))
}

/// Least-squares slope and intercept of `log|y|` against `log x`, plus
/// the rms log residual.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (lx.iter().zip(&ly).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, rms)
}

fn sign_stable(v: &[f64]) -> bool {
    v.iter().all(|x| *x > 0.0) || v.iter().all(|x| *x < 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// GHz^-1.
    pub eta2: f64,
    pub a: Option<f64>,
    pub eta_a: Option<f64>,
    pub mu1: f64,
    pub b: Option<f64>,
    pub mu_b: Option<f64>,
    pub residual_a: Option<f64>,
    pub residual_b: Option<f64>,
}

/// Richardson limit of `f(om) / om^k` from samples at `h` and `2h`,
/// assuming the next term is two powers higher.
fn richardson(f: &impl Fn(f64) -> Result<f64>, k: i32, h: f64) -> Result<f64> {
    let r1 = f(h)? / h.powi(k);
    let r2 = f(2.0 * h)? / (2.0 * h).powi(k);
    Ok((4.0 * r1 - r2) / 3.0)
}

/// Fit `zeta_d = eta2 W^2 + eta_a W^a` and `alpha = mu1 W + mu_b W^b`
/// by residual subtraction over `omegas`.
pub fn fit_exponents_with(
    zeta_d: impl Fn(f64) -> Result<f64> + Sync,
    alpha: impl Fn(f64) -> Result<f64> + Sync,
    omegas: &[f64],
) -> Result<ExponentFit> {
    if omegas.len() < 8 {
        return Err(Error::InvalidParameter { name: "omegas", reason: "need at least 8 points".into() });
    }
    let (lo, hi) = omegas.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &o| (l.min(o), h.max(o)));
    if !(lo > 0.0) || hi / lo < 10.0 {
        return Err(Error::InvalidParameter { name: "omegas", reason: "grid must be positive and span a decade".into() });
    }
    let h = 1e-3;
    let eta2 = richardson(&zeta_d, 2, h)?;
    let mu1 = richardson(&alpha, 1, h)?;
    let zs: Vec<f64> = omegas.par_iter().map(|&o| zeta_d(o)).collect::<Result<_>>()?;
    let al: Vec<f64> = omegas.par_iter().map(|&o| alpha(o)).collect::<Result<_>>()?;
    let rz: Vec<f64> = omegas.iter().zip(&zs).map(|(o, z)| z - eta2 * o * o).collect();
    let ra: Vec<f64> = omegas.iter().zip(&al).map(|(o, a)| a - mu1 * o).collect();
    let (mut a, mut eta_a, mut residual_a) = (None, None, None);
    if sign_stable(&rz) {
        let (s, c, r) = power_law_fit(omegas, &rz);
        a = Some(s);
        eta_a = Some(c.exp().copysign(rz[0]));
        residual_a = Some(r);
    }
    let (mut b, mut mu_b, mut residual_b) = (None, None, None);
    if sign_stable(&al) && sign_stable(&ra) {
        let (s, c, r) = power_law_fit(omegas, &ra);
        b = Some(s);
        mu_b = Some(c.exp().copysign(ra[0]));
        residual_b = Some(r);
    }
    Ok(ExponentFit { eta2, a, eta_a, mu1, b, mu_b, residual_a, residual_b })
}

pub fn fit_higher_order_exponents(
    params: &CircuitParams,
    space: &HilbertSpace,
    omegas: &[f64],
) -> Result<ExponentFit> {
    let z0 = zz_and_zx(params, space, 0.0)?.0;
    fit_exponents_with(
        |o| Ok(zz_and_zx(params, space, o)?.0 - z0),
        |o| Ok(zz_and_zx(params, space, o)?.1),
        omegas,
    )
}

/// `n` log-spaced amplitudes over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

/// Slope of `log|f|` against `log omega`.
pub fn leading_exponent(f: impl Fn(f64) -> Result<f64> + Sync, omegas: &[f64]) -> Result<f64> {
    let ys: Vec<f64> = omegas.par_iter().map(|&o| f(o)).collect::<Result<_>>()?;
    Ok(power_law_fit(omegas, &ys).0)
}

/// Small-drive limit of `zeta_d / omega^2`, GHz^-1, from 1 and 2 MHz.
pub fn quadratic_factor(params: &CircuitParams, space: &HilbertSpace) -> Result<f64> {
    let z0 = zz_and_zx(params, space, 0.0)?.0;
    richardson(&|o| Ok(zz_and_zx(params, space, o)?.0 - z0), 2, 1e-3)
}

/// `(t_g, tau)` in ns for ZX rate `alpha` in GHz: `tau = 1/(4 alpha)`
/// and `t_g = 40 ns + tau`.
pub fn gate_length(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter { name: "alpha_zx", reason: format!("{alpha} must be positive") });
    }
    let tau = 1.0 / (4.0 * alpha);
    Ok((40.0 + tau, tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::builtin;
    use approx::assert_relative_eq;

    #[test]
    fn gate_length_arithmetic() {
        let (tg, tau) = gate_length(0.005).unwrap();
        assert_relative_eq!(tau, 50.0, epsilon = 1e-9);
        assert_relative_eq!(tg, 90.0, epsilon = 1e-9);
        assert_relative_eq!(gate_length(0.0025).unwrap().0, 140.0, epsilon = 1e-9);
        assert!(gate_length(0.0).is_err() && gate_length(-1.0).is_err());
    }

    #[test]
    fn synthetic_fit() {
        let oms = log_grid(0.005, 0.06, 10);
        let fit = fit_exponents_with(
            |o| Ok(-3.0 * o * o + 0.7 * o.powi(4)),
            |o| Ok(0.2 * o - 5.0 * o.powi(3)),
            &oms,
        )
        .unwrap();
        assert!((fit.eta2 + 3.0).abs() < 1e-6);
        assert!((fit.a.unwrap() - 4.0).abs() < 0.02);
        assert!((fit.eta_a.unwrap() - 0.7).abs() < 0.02);
        assert!((fit.b.unwrap() - 3.0).abs() < 0.02);
    }

    #[test]
    fn fit_rejects_short_grid() {
        let oms = log_grid(0.01, 0.05, 10);
        assert!(fit_exponents_with(|o| Ok(o), |o| Ok(o), &oms).is_err());
        assert!(fit_exponents_with(|o| Ok(o), |o| Ok(o), &oms[..5]).is_err());
    }

    #[test]
    fn uncoupled_is_degenerate() {
        let mut p = builtin(2).unwrap().params;
        p.geometry = None;
        p.g1c = 0.0;
        p.g2c = 0.0;
        p.g12 = 0.0;
        let s = HilbertSpace::uniform(3).unwrap();
        let scan = find_static_zz_zeros(&p, &s, (5.0, 5.1)).unwrap();
        assert!(scan.degenerate && scan.points.is_empty());
    }

    #[test]
    fn classification_rules() {
        let p = builtin(2).unwrap().params;
        let (pts, col) = classify(&p, &[4.25, 4.5, 5.98, 6.58]);
        assert_eq!(col, vec![4.25]);
        let kinds: Vec<_> = pts.iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![PointKind::Affine, PointKind::Trivial, PointKind::Genuine]);
    }
}
