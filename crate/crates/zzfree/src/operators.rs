//! Truncated ladder operators on the (Q1, C, Q2) chain.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

pub const Q1: usize = 0;
pub const COUPLER: usize = 1;
pub const Q2: usize = 2;

/// Basis label `(n1, nc, n2)`.
pub type Label = [usize; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    /// GHz (linear frequency).
    pub frequency: f64,
    /// GHz.
    pub anharmonicity: f64,
    pub levels: usize,
}

impl ModeSpec {
    pub fn new(frequency: f64, anharmonicity: f64, levels: usize) -> Result<Self> {
        let m = ModeSpec { frequency, anharmonicity, levels };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 3 {
            return Err(Error::InvalidParameter {
                name: "levels",
                reason: format!("{} < 3", self.levels),
            });
        }
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::InvalidParameter {
                name: "frequency",
                reason: format!("{} is not positive", self.frequency),
            });
        }
        if !self.anharmonicity.is_finite() {
            return Err(Error::InvalidParameter {
                name: "anharmonicity",
                reason: "not finite".into(),
            });
        }
        Ok(())
    }

    pub fn energy(&self, n: usize) -> f64 {
        let n = n as f64;
        n * self.frequency + 0.5 * n * (n - 1.0) * self.anharmonicity
    }
}

/// Row-major product space, Q2 fastest, so `|n1 nc n2>` sits at
/// `(n1 * dc + nc) * d2 + n2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    dims: [usize; 3],
}

impl HilbertSpace {
    pub fn new(dims: [usize; 3]) -> Result<Self> {
        for &d in &dims {
            if d < 2 {
                return Err(Error::InvalidDimension(d));
            }
        }
        Ok(HilbertSpace { dims })
    }

    pub fn uniform(levels: usize) -> Result<Self> {
        Self::new([levels; 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index(&self, label: Label) -> Option<usize> {
        if (0..3).any(|k| label[k] >= self.dims[k]) {
            return None;
        }
        Some((label[0] * self.dims[1] + label[1]) * self.dims[2] + label[2])
    }

    pub fn label(&self, index: usize) -> Label {
        let n2 = index % self.dims[2];
        let rest = index / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], n2]
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.dim()).map(|i| self.label(i))
    }

    pub fn excitations(&self, index: usize) -> usize {
        self.label(index).iter().sum()
    }
}

pub fn destroy(dim: usize) -> Result<DMatrix<f64>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    Ok(a)
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

pub fn embed(op: &DMatrix<f64>, mode: usize, space: &HilbertSpace) -> Result<DMatrix<f64>> {
    if mode > 2 {
        return Err(Error::InvalidParameter { name: "mode", reason: format!("{mode} > 2") });
    }
    let d = space.dims[mode];
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: op.nrows() });
    }
    let factor = |k: usize| {
        if k == mode {
            op.clone()
        } else {
            DMatrix::identity(space.dims[k], space.dims[k])
        }
    };
    Ok(kron(&kron(&factor(0), &factor(1)), &factor(2)))
}

pub fn duffing_hamiltonian(mode: &ModeSpec) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        mode.levels,
        (0..mode.levels).map(|n| mode.energy(n)),
    ))
}

/// `a_k + a_k†` embedded in the full space.
pub fn quadrature(mode: usize, space: &HilbertSpace) -> DMatrix<f64> {
    let a = destroy(space.dims[mode]).expect("space dims are >= 2");
    embed(&(&a + a.transpose()), mode, space).expect("mode and dims consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn destroy_small() {
        let a = destroy(2).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        let a = destroy(3).unwrap();
        assert_relative_eq!(a[(1, 2)], 2f64.sqrt());
        assert!(matches!(destroy(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn number_operator() {
        for d in 2..7 {
            let a = destroy(d).unwrap();
            let n = a.transpose() * &a;
            for i in 0..d {
                for j in 0..d {
                    let want = if i == j { i as f64 } else { 0.0 };
                    assert_relative_eq!(n[(i, j)], want, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn embed_identity_and_lowering() {
        let s = HilbertSpace::uniform(3).unwrap();
        let id = embed(&DMatrix::identity(3, 3), COUPLER, &s).unwrap();
        assert_eq!(id, DMatrix::identity(27, 27));
        let a1 = embed(&destroy(3).unwrap(), Q1, &s).unwrap();
        let from = s.index([1, 0, 0]).unwrap();
        let to = s.index([0, 0, 0]).unwrap();
        assert_relative_eq!(a1[(to, from)], 1.0);
        assert_eq!(a1.column(from).iter().filter(|x| **x != 0.0).count(), 1);
    }

    #[test]
    fn distinct_modes_commute() {
        let s = HilbertSpace::new([3, 4, 2]).unwrap();
        let a1 = embed(&destroy(3).unwrap(), Q1, &s).unwrap();
        let a2 = embed(&destroy(2).unwrap(), Q2, &s).unwrap();
        let c = &a1 * &a2 - &a2 * &a1;
        assert!(c.amax() < 1e-15);
    }

    #[test]
    fn embed_rejects_mismatch() {
        let s = HilbertSpace::uniform(3).unwrap();
        assert!(embed(&destroy(4).unwrap(), Q2, &s).is_err());
    }

    #[test]
    fn duffing_levels() {
        let m = ModeSpec::new(4.2, -0.25, 4).unwrap();
        let h = duffing_hamiltonian(&m);
        assert_relative_eq!(h[(2, 2)], 8.15, epsilon = 1e-12);
        assert_relative_eq!(h[(2, 2)] - 2.0 * h[(1, 1)] + h[(0, 0)], -0.25, epsilon = 1e-12);
        let harmonic = ModeSpec::new(5.0, 0.0, 5).unwrap();
        assert_relative_eq!(duffing_hamiltonian(&harmonic)[(4, 4)], 20.0);
    }

    #[test]
    fn mode_spec_validation() {
        assert!(ModeSpec::new(4.0, -0.2, 2).is_err());
        assert!(ModeSpec::new(-1.0, -0.2, 3).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let s = HilbertSpace::new([3, 5, 4]).unwrap();
        for i in 0..s.dim() {
            assert_eq!(s.index(s.label(i)), Some(i));
        }
        assert_eq!(s.index([3, 0, 0]), None);
    }
}
