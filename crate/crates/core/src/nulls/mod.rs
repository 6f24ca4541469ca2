//! Null hypotheses for length-3 pattern frequencies: exact asymptotic
//! covariance matrices, contrast moments, eigen-structure, quantile tables
//! for `Z`, and the serial-dependence tests built on them.
//!
//! Covariances are the `T`-scaled leading terms; the `O(1/T^2)` correction is
//! ignored, which is adequate for `T >= 200`.

mod cache;
mod quantiles;
mod surd;
mod testing;

pub use cache::{read_cache, write_cache, CACHE_HEADER};
pub use quantiles::{
    published_table, quantile_of_sorted, simulate_null_z, simulate_quantiles, tail_formula_p,
    Provenance, QuantileSource, QuantileTable, DEFAULT_LEVELS, MIN_REPLICATES,
};
pub use surd::Surd2;
pub use testing::{
    batch_test, batch_test_with, contrast_test, entropy_test, BatchCell, BatchReport, Decision, Statistic,
    TestReport,
};

use nalgebra::{Matrix6, SymmetricEigen};
use num_rational::Ratio;

pub type Q = Ratio<i64>;

/// Which null process a covariance matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NullKind {
    /// i.i.d. process (white noise).
    Iid,
    /// Symmetric random walk.
    SymmetricRandomWalk,
}

/// `360 T Sigma` for an i.i.d. process; rows and columns ordered
/// `123, 132, 213, 231, 312, 321`.
pub const SIGMA_IID_NUM: [[i64; 6]; 6] = [
    [46, -23, -23, 7, 7, -14],
    [-23, 28, 10, -20, -2, 7],
    [-23, 10, 28, -2, -20, 7],
    [7, -20, -2, 28, 10, -23],
    [7, -2, -20, 10, 28, -23],
    [-14, 7, 7, -23, -23, 46],
];
pub const SIGMA_IID_DEN: i64 = 360;

/// `192 T Sigma` for symmetric random walk.
pub const SIGMA_RW_NUM: [[i64; 6]; 6] = [
    [60, -6, -6, -6, -6, -36],
    [-6, 15, 7, -9, -1, -6],
    [-6, 7, 15, -1, -9, -6],
    [-6, -9, -1, 15, 7, -6],
    [-6, -1, -9, 7, 15, -6],
    [-36, -6, -6, -6, -6, 60],
];
pub const SIGMA_RW_DEN: i64 = 192;

/// Contrast vectors as exact rationals.
pub fn beta_vec() -> [Q; 6] {
    ints([1, 0, 0, 0, 0, -1])
}
pub fn tau_vec() -> [Q; 6] {
    let (a, b) = (Q::new(2, 3), Q::new(-1, 3));
    [a, b, b, b, b, a]
}
pub fn gamma_vec() -> [Q; 6] {
    ints([0, -1, 1, 1, -1, 0])
}
pub fn delta_vec() -> [Q; 6] {
    ints([0, 1, 1, -1, -1, 0])
}
pub fn c1_vec() -> [Q; 6] {
    ints([1; 6])
}
pub fn c2_vec() -> [Q; 6] {
    ints([0, -1, 1, -1, 1, 0])
}

fn ints(v: [i64; 6]) -> [Q; 6] {
    v.map(Q::from_integer)
}

/// Covariance structure of length-3 pattern frequencies under a null process.
#[derive(Debug, Clone, PartialEq)]
pub struct NullModel {
    pub kind: NullKind,
    /// Integer matrix; `T Sigma = sigma_num / scale`.
    pub sigma_num: [[i64; 6]; 6],
    pub scale: i64,
}

/// Exact `T`-scaled covariance matrix of the six frequencies.
pub fn null_covariance(kind: NullKind) -> NullModel {
    let (sigma_num, scale) = match kind {
        NullKind::Iid => (SIGMA_IID_NUM, SIGMA_IID_DEN),
        NullKind::SymmetricRandomWalk => (SIGMA_RW_NUM, SIGMA_RW_DEN),
    };
    NullModel { kind, sigma_num, scale }
}

impl NullModel {
    /// Entry `(i, j)` of `T Sigma`.
    pub fn sigma(&self, i: usize, j: usize) -> Q {
        Q::new(self.sigma_num[i][j], self.scale)
    }

    /// `T Sigma x` for a row vector `x`.
    pub fn apply(&self, x: &[Q; 6]) -> [Q; 6] {
        std::array::from_fn(|i| (0..6).map(|j| self.sigma(i, j) * x[j]).sum())
    }

    /// `x (T Sigma) y'`, the `T`-scaled covariance of two linear forms.
    pub fn quadratic(&self, x: &[Q; 6], y: &[Q; 6]) -> Q {
        let sy = self.apply(y);
        x.iter().zip(&sy).map(|(a, b)| a * b).sum()
    }

    pub fn to_matrix(&self) -> Matrix6<f64> {
        Matrix6::from_fn(|i, j| self.sigma_num[i][j] as f64 / self.scale as f64)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..6).all(|i| (0..6).all(|j| self.sigma_num[i][j] == self.sigma_num[j][i]))
    }

    /// Eigenvalues of `T Sigma` in floating point, ascending.
    pub fn numeric_eigenvalues(&self) -> [f64; 6] {
        let eig = SymmetricEigen::new(self.to_matrix());
        let mut ev: [f64; 6] = std::array::from_fn(|i| eig.eigenvalues[i]);
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// `T`-scaled variances and covariances of `(beta, tau, gamma, delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastMoments {
    /// Ordered beta, tau, gamma, delta.
    pub cov: [[Q; 4]; 4],
}

impl ContrastMoments {
    pub fn var_beta(&self) -> Q {
        self.cov[0][0]
    }
    pub fn var_tau(&self) -> Q {
        self.cov[1][1]
    }
    pub fn var_gamma(&self) -> Q {
        self.cov[2][2]
    }
    pub fn var_delta(&self) -> Q {
        self.cov[3][3]
    }
    pub fn cov_beta_delta(&self) -> Q {
        self.cov[0][3]
    }

    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        let f = |q: Q| *q.numer() as f64 / *q.denom() as f64;
        f(self.cov[i][j]) / (f(self.cov[i][i]) * f(self.cov[j][j])).sqrt()
    }
}

/// Contrast moments by `x Sigma y'`.
pub fn contrast_moments(model: &NullModel) -> ContrastMoments {
    let v = [beta_vec(), tau_vec(), gamma_vec(), delta_vec()];
    ContrastMoments { cov: std::array::from_fn(|i| std::array::from_fn(|j| model.quadratic(&v[i], &v[j]))) }
}

/// Eigenpair of `T Sigma` over `Q(sqrt 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub label: &'static str,
    pub value: Surd2,
    pub vector: [Surd2; 6],
}

impl EigenPair {
    /// Whether `T Sigma v = lambda v` holds exactly.
    pub fn verify(&self, model: &NullModel) -> bool {
        let sv: [Surd2; 6] = std::array::from_fn(|i| {
            (0..6).fold(Surd2::zero(), |acc, j| acc + self.vector[j] * Surd2::rational(model.sigma(i, j)))
        });
        sv.iter().zip(&self.vector).all(|(a, v)| *a == self.value * *v)
    }
}

/// Closed-form eigen-structure: two kernel vectors and four nonzero eigenpairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenStructure {
    pub kernel: [[Q; 6]; 2],
    pub pairs: Vec<EigenPair>,
}

impl EigenStructure {
    /// Every listed pair satisfies the eigen-equation and the kernel is annihilated, exactly.
    pub fn verify(&self, model: &NullModel) -> bool {
        let zero = [Q::from_integer(0); 6];
        self.kernel.iter().all(|k| model.apply(k) == zero) && self.pairs.iter().all(|p| p.verify(model))
    }

    /// All six eigenvalues in floating point, ascending.
    pub fn values_f64(&self) -> Vec<f64> {
        let mut v: Vec<f64> = std::iter::repeat_n(0.0, 2).chain(self.pairs.iter().map(|p| p.value.to_f64())).collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

fn surd_vec(v: &[Q; 6]) -> [Surd2; 6] {
    v.map(Surd2::rational)
}

/// Eigenvectors and eigenvalues of `T Sigma`.
///
/// For random walk the contrast vectors `beta, tau, gamma, delta` are
/// themselves eigenvectors with eigenvalues 1/2, 3/16, 1/12, 1/6 (so that
/// `T Var = lambda |v|^2` gives 1, 1/4, 1/3, 2/3). For the i.i.d. process `tau` and `gamma`
/// are eigenvectors (2/15, 1/10) and the remaining pair spans the
/// `beta`/`delta` plane: `-beta/2 +- delta/(2 sqrt 2)` with `(2 +- sqrt 2)/12`.
pub fn eigen_structure(kind: NullKind) -> EigenStructure {
    let kernel = [c1_vec(), c2_vec()];
    let pairs = match kind {
        NullKind::SymmetricRandomWalk => vec![
            EigenPair { label: "beta", value: Surd2::rational(Q::new(1, 2)), vector: surd_vec(&beta_vec()) },
            EigenPair { label: "tau", value: Surd2::rational(Q::new(3, 16)), vector: surd_vec(&tau_vec()) },
            EigenPair { label: "gamma", value: Surd2::rational(Q::new(1, 12)), vector: surd_vec(&gamma_vec()) },
            EigenPair { label: "delta", value: Surd2::rational(Q::new(1, 6)), vector: surd_vec(&delta_vec()) },
        ],
        NullKind::Iid => {
            let b = beta_vec();
            let d = delta_vec();
            let plane = |sign: i64| -> [Surd2; 6] {
                std::array::from_fn(|i| Surd2::new(b[i] * Q::new(-1, 2), d[i] * Q::new(sign, 4)))
            };
            vec![
                EigenPair { label: "tau", value: Surd2::rational(Q::new(2, 15)), vector: surd_vec(&tau_vec()) },
                EigenPair { label: "gamma", value: Surd2::rational(Q::new(1, 10)), vector: surd_vec(&gamma_vec()) },
                EigenPair {
                    label: "beta-delta(+)",
                    value: Surd2::new(Q::new(1, 6), Q::new(1, 12)),
                    vector: plane(1),
                },
                EigenPair {
                    label: "beta-delta(-)",
                    value: Surd2::new(Q::new(1, 6), Q::new(-1, 12)),
                    vector: plane(-1),
                },
            ]
        }
    };
    EigenStructure { kernel, pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn covariance_entries() {
        let w = null_covariance(NullKind::Iid);
        assert_eq!(w.sigma(0, 0), q(46, 360));
        let b = null_covariance(NullKind::SymmetricRandomWalk);
        assert_eq!(b.sigma(0, 5), q(-36, 192));
        for m in [&w, &b] {
            assert!(m.is_symmetric());
            let zero = [Q::from_integer(0); 6];
            assert_eq!(m.apply(&c1_vec()), zero);
            assert_eq!(m.apply(&c2_vec()), zero);
            assert!(m.numeric_eigenvalues()[0] > -1e-12);
        }
    }

    #[test]
    fn random_walk_moments() {
        let m = contrast_moments(&null_covariance(NullKind::SymmetricRandomWalk));
        assert_eq!(m.var_beta(), q(1, 1));
        assert_eq!(m.var_tau(), q(1, 4));
        assert_eq!(m.var_gamma(), q(1, 3));
        assert_eq!(m.var_delta(), q(2, 3));
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(m.cov[i][j], q(0, 1));
                }
            }
        }
    }

    #[test]
    fn iid_moments() {
        let model = null_covariance(NullKind::Iid);
        let m = contrast_moments(&model);
        assert_eq!(m.var_beta(), q(1, 3));
        assert_eq!(m.var_tau(), q(8, 45));
        assert_eq!(m.var_gamma(), q(2, 5));
        assert_eq!(m.var_delta(), q(2, 3));
        assert_eq!(m.cov_beta_delta(), q(-1, 3));
        assert_abs_diff_eq!(m.correlation(0, 3), -(2f64.sqrt()) / 2.0, epsilon = 1e-15);
        for (i, j) in [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)] {
            assert_eq!(m.cov[i][j], q(0, 1));
        }
        assert_eq!(model.quadratic(&c1_vec(), &c1_vec()), q(0, 1));
    }

    #[test]
    fn random_walk_eigen_exact() {
        let model = null_covariance(NullKind::SymmetricRandomWalk);
        let e = eigen_structure(NullKind::SymmetricRandomWalk);
        assert!(e.verify(&model));
        let half = model.apply(&beta_vec());
        assert_eq!(half, beta_vec().map(|x| x * q(1, 2)));
    }

    #[test]
    fn iid_eigen_exact_and_numeric() {
        let model = null_covariance(NullKind::Iid);
        let e = eigen_structure(NullKind::Iid);
        assert!(e.verify(&model));
        let closed = e.values_f64();
        let numeric = model.numeric_eigenvalues();
        for (a, b) in closed.iter().zip(numeric) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let expected = [0.0, 0.0, 0.049, 0.1, 0.133, 0.285];
        for (a, b) in closed.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-3);
        }
    }

    #[test]
    fn wrong_eigenvector_fails_verification() {
        let model = null_covariance(NullKind::Iid);
        let bogus = EigenPair { label: "beta", value: Surd2::rational(q(1, 3)), vector: surd_vec(&beta_vec()) };
        assert!(!bogus.verify(&model));
    }
}
