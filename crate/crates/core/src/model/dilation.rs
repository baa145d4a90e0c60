use super::{Coefficient, GaussianSeriesModel};
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Rectangular Gaussian model X = B0 + Σ B_i g_i with p×q coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct RectangularModel {
    pub b0: CMat,
    pub coeffs: Vec<CMat>,
}

impl RectangularModel {
    pub fn new(b0: CMat, coeffs: Vec<CMat>) -> Result<Self> {
        let (p, q) = b0.shape();
        if p == 0 || q == 0 {
            return Err(Error::dim("empty rectangular model"));
        }
        if let Some(b) = coeffs.iter().find(|b| b.shape() != (p, q)) {
            return Err(Error::dim(format!("coefficient is {}×{}, expected {p}×{q}", b.nrows(), b.ncols())));
        }
        Ok(RectangularModel { b0, coeffs })
    }

    /// p×q model with independent N(0, σ_ij²) entries given by `std`.
    pub fn independent_entries(b0: CMat, std: &CMat) -> Result<Self> {
        let (p, q) = b0.shape();
        let mut coeffs = Vec::new();
        for i in 0..p {
            for j in 0..q {
                if std[(i, j)].norm() > 0.0 {
                    let mut e = CMat::zeros(p, q);
                    e[(i, j)] = std[(i, j)];
                    coeffs.push(e);
                }
            }
        }
        Self::new(b0, coeffs)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.b0.shape()
    }
}

fn dilate_matrix(b: &CMat) -> Vec<(usize, usize, crate::linalg::C64)> {
    let (p, _) = b.shape();
    let mut e = Vec::new();
    for ((i, j), z) in b.iter().enumerate().map(|(k, z)| ((k % p, k / p), z)) {
        if z.norm() != 0.0 {
            e.push((i, p + j, *z));
            e.push((p + j, i, z.conj()));
        }
    }
    e
}

/// The self-adjoint (p+q)-dimensional model [[0, X], [X*, 0]], whose
/// eigenvalues are ± the singular values of X padded with |p − q| zeros.
pub fn dilate(model: &RectangularModel) -> Result<GaussianSeriesModel> {
    let (p, q) = model.shape();
    let d = p + q;
    let a0 = Coefficient::Sparse(dilate_matrix(&model.b0)).to_dense(d);
    let coeffs = model.coeffs.iter().map(|b| Coefficient::Sparse(dilate_matrix(b))).collect();
    GaussianSeriesModel::new(a0, coeffs)
}
