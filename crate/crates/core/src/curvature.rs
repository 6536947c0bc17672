//! Curvature of a pseudo-Riemannian metric from its 2-jet at a point.
//!
//! Conventions (dense loops, `N` is 2 or 4):
//!
//! * `Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`
//! * `R^k_{lij} = ∂_i Γ^k_{jl} − ∂_j Γ^k_{il} + Γ^k_{im} Γ^m_{jl} − Γ^k_{jm} Γ^m_{il}`
//! * `R_{lj} = R^k_{lkj}`, `R = g^{lj} R_{lj}`
//!
//! With these signs the unit 2-sphere has `Ric = g` and `R = 2`. Flipping the
//! convention negates every Ricci and scalar value reported here.

use nalgebra::{DMatrix, SymmetricEigen};

pub type Matrix<const N: usize> = [[f64; N]; N];
/// `Γ[k][i][j] = Γ^k_ij`.
pub type Christoffel<const N: usize> = [[[f64; N]; N]; N];
/// `dΓ[k][i][j][m] = ∂_m Γ^k_ij`.
pub type ChristoffelDerivative<const N: usize> = [[[[f64; N]; N]; N]; N];

/// Singular metrics are rejected below this determinant magnitude.
pub const SINGULAR_DET: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CurvatureError {
    #[error("singular metric (det = {det:e})")]
    SingularMetric { det: f64 },
}

/// Metric components with first and second partial derivatives at a point.
///
/// `dg[i][j][k] = ∂_k g_ij` and `ddg[i][j][k][l] = ∂_l ∂_k g_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet<const N: usize> {
    pub g: Matrix<N>,
    pub dg: [[[f64; N]; N]; N],
    pub ddg: [[[[f64; N]; N]; N]; N],
}

impl<const N: usize> MetricJet<N> {
    /// A metric that is constant near the point.
    pub fn constant(g: Matrix<N>) -> Self {
        MetricJet {
            g,
            dg: [[[0.0; N]; N]; N],
            ddg: [[[[0.0; N]; N]; N]; N],
        }
    }
}

/// Determinant by cofactor expansion. Exact zeros in the matrix contribute
/// exactly nothing, which keeps block-structured metrics accurate.
pub fn determinant<const N: usize>(m: &Matrix<N>) -> f64 {
    let rows: Vec<Vec<f64>> = m.iter().map(|r| r.to_vec()).collect();
    det_dyn(&rows)
}

fn det_dyn(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => {
            let mut sum = 0.0;
            for (col, &a) in m[0].iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != col)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * a * det_dyn(&minor);
            }
            debug_assert!(n > 2);
            sum
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting, symmetrized.
pub fn inverse_metric<const N: usize>(mj: &MetricJet<N>) -> Result<Matrix<N>, CurvatureError> {
    invert_symmetric(&mj.g)
}

pub fn invert_symmetric<const N: usize>(g: &Matrix<N>) -> Result<Matrix<N>, CurvatureError> {
    let det = determinant(g);
    if det.abs() <= SINGULAR_DET || !det.is_finite() {
        return Err(CurvatureError::SingularMetric { det });
    }
    let mut a = *g;
    let mut inv = [[0.0; N]; N];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("nonempty range");
        if a[pivot][col] == 0.0 {
            return Err(CurvatureError::SingularMetric { det });
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = 1.0 / a[col][col];
        for k in 0..N {
            a[col][k] *= scale;
            inv[col][k] *= scale;
        }
        for r in 0..N {
            if r == col || a[r][col] == 0.0 {
                continue;
            }
            let factor = a[r][col];
            for k in 0..N {
                a[r][k] -= factor * a[col][k];
                inv[r][k] -= factor * inv[col][k];
            }
        }
    }
    let mut sym = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            sym[i][j] = 0.5 * (inv[i][j] + inv[j][i]);
        }
    }
    Ok(sym)
}

/// `∂_l g_ij` combination `½ (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
fn lowered_christoffel<const N: usize>(dg: &[[[f64; N]; N]; N], l: usize, i: usize, j: usize) -> f64 {
    0.5 * (dg[j][l][i] + dg[i][l][j] - dg[i][j][l])
}

fn christoffel_with_inverse<const N: usize>(
    mj: &MetricJet<N>,
    ginv: &Matrix<N>,
) -> Christoffel<N> {
    let mut gamma = [[[0.0; N]; N]; N];
    for (k, gk) in gamma.iter_mut().enumerate() {
        for i in 0..N {
            for j in 0..N {
                gk[i][j] = (0..N)
                    .map(|l| ginv[k][l] * lowered_christoffel(&mj.dg, l, i, j))
                    .sum();
            }
        }
    }
    gamma
}

pub fn christoffel<const N: usize>(mj: &MetricJet<N>) -> Result<Christoffel<N>, CurvatureError> {
    let ginv = inverse_metric(mj)?;
    Ok(christoffel_with_inverse(mj, &ginv))
}

fn christoffel_derivative_with_inverse<const N: usize>(
    mj: &MetricJet<N>,
    ginv: &Matrix<N>,
) -> ChristoffelDerivative<N> {
    // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
    let mut dginv = [[[0.0; N]; N]; N];
    for k in 0..N {
        for l in 0..N {
            for m in 0..N {
                let mut s = 0.0;
                for a in 0..N {
                    for b in 0..N {
                        s += ginv[k][a] * mj.dg[a][b][m] * ginv[b][l];
                    }
                }
                dginv[k][l][m] = -s;
            }
        }
    }
    let mut out = [[[[0.0; N]; N]; N]; N];
    for k in 0..N {
        for i in 0..N {
            for j in 0..N {
                for m in 0..N {
                    let mut s = 0.0;
                    for l in 0..N {
                        let second = 0.5
                            * (mj.ddg[j][l][i][m] + mj.ddg[i][l][j][m] - mj.ddg[i][j][l][m]);
                        s += dginv[k][l][m] * lowered_christoffel(&mj.dg, l, i, j)
                            + ginv[k][l] * second;
                    }
                    out[k][i][j][m] = s;
                }
            }
        }
    }
    out
}

/// `∂_m Γ^k_ij`, expanded analytically from `dg` and `ddg`.
pub fn christoffel_derivative<const N: usize>(
    mj: &MetricJet<N>,
) -> Result<ChristoffelDerivative<N>, CurvatureError> {
    let ginv = inverse_metric(mj)?;
    Ok(christoffel_derivative_with_inverse(mj, &ginv))
}

/// Everything the pipeline produces at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Curvature<const N: usize> {
    pub inverse: Matrix<N>,
    pub christoffel: Christoffel<N>,
    pub christoffel_derivative: ChristoffelDerivative<N>,
    pub ricci: Matrix<N>,
    pub scalar: f64,
    /// `max |∂Γ| + max |Γ|²`, the size of the terms summed into Ricci.
    pub term_scale: f64,
}

impl<const N: usize> Curvature<N> {
    /// `max |R_ij| / (1 + term_scale)`.
    pub fn normalized_max_ricci(&self) -> f64 {
        max_abs(&self.ricci) / (1.0 + self.term_scale)
    }
}

pub fn max_abs<const N: usize>(m: &Matrix<N>) -> f64 {
    m.iter().flatten().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

pub fn curvature<const N: usize>(mj: &MetricJet<N>) -> Result<Curvature<N>, CurvatureError> {
    let inverse = inverse_metric(mj)?;
    let gamma = christoffel_with_inverse(mj, &inverse);
    let dgamma = christoffel_derivative_with_inverse(mj, &inverse);
    let mut ricci = [[0.0; N]; N];
    for l in 0..N {
        for j in 0..N {
            let mut s = 0.0;
            for k in 0..N {
                s += dgamma[k][j][l][k] - dgamma[k][k][l][j];
                for m in 0..N {
                    s += gamma[k][k][m] * gamma[m][j][l] - gamma[k][j][m] * gamma[m][k][l];
                }
            }
            ricci[l][j] = s;
        }
    }
    let scalar = (0..N)
        .flat_map(|l| (0..N).map(move |j| (l, j)))
        .map(|(l, j)| inverse[l][j] * ricci[l][j])
        .sum();
    let max_gamma = gamma.iter().flatten().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let max_dgamma = dgamma
        .iter()
        .flatten()
        .flatten()
        .flatten()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(Curvature {
        inverse,
        christoffel: gamma,
        christoffel_derivative: dgamma,
        ricci,
        scalar,
        term_scale: max_dgamma + max_gamma * max_gamma,
    })
}

/// Full Riemann tensor, `R[k][l][i][j] = R^k_{lij}`.
pub fn riemann<const N: usize>(mj: &MetricJet<N>) -> Result<[[[[f64; N]; N]; N]; N], CurvatureError> {
    let ginv = inverse_metric(mj)?;
    let gamma = christoffel_with_inverse(mj, &ginv);
    let dgamma = christoffel_derivative_with_inverse(mj, &ginv);
    let mut r = [[[[0.0; N]; N]; N]; N];
    for k in 0..N {
        for l in 0..N {
            for i in 0..N {
                for j in 0..N {
                    let mut s = dgamma[k][j][l][i] - dgamma[k][i][l][j];
                    for m in 0..N {
                        s += gamma[k][i][m] * gamma[m][j][l] - gamma[k][j][m] * gamma[m][i][l];
                    }
                    r[k][l][i][j] = s;
                }
            }
        }
    }
    Ok(r)
}

pub fn ricci<const N: usize>(mj: &MetricJet<N>) -> Result<Matrix<N>, CurvatureError> {
    Ok(curvature(mj)?.ricci)
}

pub fn ricci_scalar<const N: usize>(mj: &MetricJet<N>) -> Result<f64, CurvatureError> {
    Ok(curvature(mj)?.scalar)
}

/// Eigenvalue sign counts of a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues<const N: usize>(g: &Matrix<N>) -> Vec<f64> {
    let m = DMatrix::from_fn(N, N, |i, j| g[i][j]);
    let mut eig: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Signature with zero threshold `1e-10 · ‖g‖_F`.
pub fn signature<const N: usize>(g: &Matrix<N>) -> Signature {
    let norm = g.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let threshold = 1e-10 * norm;
    let mut sig = Signature {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for lambda in symmetric_eigenvalues(g) {
        if lambda.abs() <= threshold {
            sig.zero += 1;
        } else if lambda > 0.0 {
            sig.positive += 1;
        } else {
            sig.negative += 1;
        }
    }
    sig
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity<const N: usize>() -> Matrix<N> {
        let mut m = [[0.0; N]; N];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        m
    }

    /// Round sphere `dθ² + sin²θ dφ²` at `θ`.
    fn sphere(theta: f64) -> MetricJet<2> {
        let (s, c) = theta.sin_cos();
        let mut mj = MetricJet::constant([[1.0, 0.0], [0.0, s * s]]);
        mj.dg[1][1][0] = 2.0 * s * c;
        mj.ddg[1][1][0][0] = 2.0 * (c * c - s * s);
        mj
    }

    #[test]
    fn inverse_examples() {
        let id = inverse_metric(&MetricJet::<4>::constant(identity())).unwrap();
        assert_eq!(id, identity());
        let inv = inverse_metric(&MetricJet::constant([[2.0, 0.0], [0.0, -2.0]])).unwrap();
        assert_eq!(inv, [[0.5, 0.0], [0.0, -0.5]]);
        let block = [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ];
        assert_eq!(inverse_metric(&MetricJet::constant(block)).unwrap(), block);
    }

    #[test]
    fn inverse_rejects_singular() {
        let err = inverse_metric(&MetricJet::constant([[1.0, 2.0], [2.0, 4.0]])).unwrap_err();
        assert!(matches!(err, CurvatureError::SingularMetric { .. }));
    }

    #[test]
    fn inverse_times_metric_is_identity() {
        let g = [
            [2.0, -0.6, 0.9, 0.0],
            [-0.6, 1.4, 0.0, 0.9],
            [0.9, 0.0, 0.0, 0.0],
            [0.0, 0.9, 0.0, 0.0],
        ];
        let inv = invert_symmetric(&g).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let v: f64 = (0..4).map(|k| g[i][k] * inv[k][j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn determinant_of_block_metric() {
        let d = 0.37;
        let g = [
            [1.7, 0.4, d, 0.0],
            [0.4, -2.2, 0.0, d],
            [d, 0.0, 0.0, 0.0],
            [0.0, d, 0.0, 0.0],
        ];
        assert_eq!(determinant(&g), d * d * d * d);
    }

    #[test]
    fn constant_metric_is_flat() {
        let mj = MetricJet::constant([[3.0, 1.0], [1.0, -2.0]]);
        let c = curvature(&mj).unwrap();
        assert!(c.christoffel.iter().flatten().flatten().all(|&v| v == 0.0));
        assert_eq!(c.ricci, [[0.0; 2]; 2]);
        assert_eq!(c.scalar, 0.0);
        let c4 = curvature(&MetricJet::<4>::constant(identity())).unwrap();
        assert_eq!(c4.scalar, 0.0);
    }

    #[test]
    fn christoffel_of_x_squared_metric() {
        // diag(x², 1) at x = 1
        let mut mj = MetricJet::constant([[1.0, 0.0], [0.0, 1.0]]);
        mj.dg[0][0][0] = 2.0;
        mj.ddg[0][0][0][0] = 2.0;
        let gamma = christoffel(&mj).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let expected = if (k, i, j) == (0, 0, 0) { 1.0 } else { 0.0 };
                    assert_eq!(gamma[k][i][j], expected);
                }
            }
        }
        // one-dimensional in effect, hence flat
        assert!(ricci_scalar(&mj).unwrap().abs() < 1e-15);
    }

    #[test]
    fn sphere_is_einstein() {
        let theta = std::f64::consts::FRAC_PI_4;
        let mj = sphere(theta);
        let c = curvature(&mj).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((c.ricci[i][j] - mj.g[i][j]).abs() < 1e-14);
            }
        }
        assert!((c.scalar - 2.0).abs() < 1e-14);
    }

    #[test]
    fn riemann_antisymmetric_and_contracts_to_ricci() {
        let mj = sphere(0.9);
        let r = riemann(&mj).unwrap();
        let ric = ricci(&mj).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((r[k][l][i][j] + r[k][l][j][i]).abs() < 1e-14);
                    }
                }
            }
        }
        for l in 0..2 {
            for j in 0..2 {
                let contracted: f64 = (0..2).map(|k| r[k][l][k][j]).sum();
                assert!((contracted - ric[l][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn signature_examples() {
        let s = signature(&[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!((s.positive, s.negative, s.zero), (2, 0, 0));
        let s = signature(&[[0.0; 3]; 3]);
        assert_eq!((s.positive, s.negative, s.zero), (0, 0, 3));
        let block = [
            [6.0, -1.0, 2.0, 0.0],
            [-1.0, 4.0, 0.0, 2.0],
            [2.0, 0.0, 0.0, 0.0],
            [0.0, 2.0, 0.0, 0.0],
        ];
        let s = signature(&block);
        assert_eq!((s.positive, s.negative, s.zero), (2, 2, 0));
    }
}
