use nalgebra::DMatrix;
use rand::Rng;

use super::SimError;

/// A dense complex matrix stored as real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { re: DMatrix::zeros(n, n), im: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        CMatrix { re: DMatrix::identity(n, n), im: DMatrix::zeros(n, n) }
    }

    pub fn size(&self) -> usize {
        self.re.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        (self.re[(i, j)], self.im[(i, j)])
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix { re: self.re.transpose(), im: -self.im.transpose() }
    }

    pub fn is_hermitian(&self) -> bool {
        self.re == self.re.transpose() && self.im == -self.im.transpose()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    /// `(1/n)·Tr`.
    pub fn normalized_trace(&self) -> (f64, f64) {
        let n = self.size() as f64;
        (self.re.trace() / n, self.im.trace() / n)
    }

    /// `(1/n)·Tr(self·other)` in `O(n²)`.
    pub fn normalized_trace_of_product(&self, other: &CMatrix) -> (f64, f64) {
        let n = self.size();
        let (mut re, mut im) = (0.0, 0.0);
        // Tr(AB) = Σ_ij A_ij B_ji; B is column-major so B_ji runs down row j = column of Bᵀ
        let bt_re = other.re.transpose();
        let bt_im = other.im.transpose();
        re += self.re.dot(&bt_re) - self.im.dot(&bt_im);
        im += self.re.dot(&bt_im) + self.im.dot(&bt_re);
        (re / n as f64, im / n as f64)
    }

    /// Left multiplication by the block constant `c ⊗ I_{n/N}`.
    pub fn block_mul_left(c: &CMatrix, m: &CMatrix) -> CMatrix {
        let (big, small) = (m.size(), c.size());
        let b = big / small;
        let mut out = CMatrix::zeros(big);
        for i in 0..small {
            for j in 0..small {
                let (cr, ci) = c.get(i, j);
                if cr == 0.0 && ci == 0.0 {
                    continue;
                }
                let (mr, mi) = (m.re.rows(j * b, b), m.im.rows(j * b, b));
                let mut or = out.re.rows_mut(i * b, b);
                or += mr * cr - mi * ci;
                let mut oi = out.im.rows_mut(i * b, b);
                oi += mr * ci + mi * cr;
            }
        }
        out
    }

    /// Right multiplication by the block constant `c ⊗ I_{n/N}`.
    pub fn block_mul_right(m: &CMatrix, c: &CMatrix) -> CMatrix {
        let (big, small) = (m.size(), c.size());
        let b = big / small;
        let mut out = CMatrix::zeros(big);
        for i in 0..small {
            for j in 0..small {
                let (cr, ci) = c.get(i, j);
                if cr == 0.0 && ci == 0.0 {
                    continue;
                }
                let (mr, mi) = (m.re.columns(i * b, b), m.im.columns(i * b, b));
                let mut or = out.re.columns_mut(j * b, b);
                or += mr * cr - mi * ci;
                let mut oi = out.im.columns_mut(j * b, b);
                oi += mr * ci + mi * cr;
            }
        }
        out
    }

    /// `a ⊗ I_k`.
    pub fn kron_identity(&self, k: usize) -> CMatrix {
        let n = self.size();
        let mut out = CMatrix::zeros(n * k);
        for i in 0..n {
            for j in 0..n {
                let (r, im) = self.get(i, j);
                for d in 0..k {
                    out.re[(i * k + d, j * k + d)] = r;
                    out.im[(i * k + d, j * k + d)] = im;
                }
            }
        }
        out
    }
}

/// Two independent standard normals by the Box–Muller transform.
pub fn standard_normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    // 1 − U lies in (0, 1], so the logarithm is finite
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let angle = std::f64::consts::TAU * u2;
    (r * angle.cos(), r * angle.sin())
}

/// A Hermitian Gaussian matrix with entry variance `1/n` (GUE scaling), whose
/// normalized-trace moments tend to those of a standard semicircular.
pub fn gaussian_selfadjoint<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix, SimError> {
    if n == 0 {
        return Err(SimError::ZeroSize);
    }
    let mut m = CMatrix::zeros(n);
    let diag_sd = (1.0 / n as f64).sqrt();
    let off_sd = (0.5 / n as f64).sqrt();
    let mut i = 0;
    while i < n {
        let (a, b) = standard_normal_pair(rng);
        m.re[(i, i)] = a * diag_sd;
        if i + 1 < n {
            m.re[(i + 1, i + 1)] = b * diag_sd;
        }
        i += 2;
    }
    for j in 1..n {
        for i in 0..j {
            let (a, b) = standard_normal_pair(rng);
            let (re, im) = (a * off_sd, b * off_sd);
            m.re[(i, j)] = re;
            m.im[(i, j)] = im;
            m.re[(j, i)] = re;
            m.im[(j, i)] = -im;
        }
    }
    Ok(m)
}

/// The block matrix with blocks `c_ij·I_{n/N}`.
pub fn embed_constant(c: &CMatrix, n: usize) -> Result<CMatrix, SimError> {
    let small = c.size();
    if small == 0 || n == 0 {
        return Err(SimError::ZeroSize);
    }
    if !n.is_multiple_of(small) {
        return Err(SimError::NotDivisible { n, block: small });
    }
    let b = n / small;
    let mut out = CMatrix::zeros(n);
    for i in 0..small {
        for j in 0..small {
            let (r, im) = c.get(i, j);
            for d in 0..b {
                out.re[(i * b + d, j * b + d)] = r;
                out.im[(i * b + d, j * b + d)] = im;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real(rows: &[&[f64]]) -> CMatrix {
        let n = rows.len();
        CMatrix {
            re: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
            im: DMatrix::zeros(n, n),
        }
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(embed_constant(&CMatrix::identity(2), 4).unwrap(), CMatrix::identity(4));
        let d = embed_constant(&real(&[&[1.0, 0.0], &[0.0, 0.0]]), 4).unwrap();
        assert_eq!(d, real(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0], &[0.0; 4], &[0.0; 4]]));
        assert_eq!(d.normalized_trace(), (0.5, 0.0));
        let e12 = embed_constant(&real(&[&[0.0, 1.0], &[0.0, 0.0]]), 4).unwrap();
        assert_eq!(e12, real(&[&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0], &[0.0; 4], &[0.0; 4]]));
        assert!(matches!(embed_constant(&CMatrix::identity(3), 4), Err(SimError::NotDivisible { .. })));
    }

    #[test]
    fn block_products_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = gaussian_selfadjoint(6, &mut rng).unwrap();
        let mut c = CMatrix::zeros(3);
        c.re[(0, 1)] = 2.0;
        c.im[(2, 0)] = -1.5;
        c.re[(1, 1)] = 0.5;
        let dense = embed_constant(&c, 6).unwrap();
        let close = |a: &CMatrix, b: &CMatrix| (&a.re - &b.re).amax() < 1e-12 && (&a.im - &b.im).amax() < 1e-12;
        assert!(close(&CMatrix::block_mul_left(&c, &m), &dense.mul(&m)));
        assert!(close(&CMatrix::block_mul_right(&m, &c), &m.mul(&dense)));
        assert!(close(&c.kron_identity(2), &dense));
        let (a, b) = m.normalized_trace_of_product(&dense);
        let (a2, b2) = m.mul(&dense).normalized_trace();
        assert!((a - a2).abs() < 1e-12 && (b - b2).abs() < 1e-12);
    }

    #[test]
    fn gaussian_is_hermitian_and_reproducible() {
        let a = gaussian_selfadjoint(5, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = gaussian_selfadjoint(5, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert!(a.is_hermitian());
        assert_eq!(a, b);
        let one = gaussian_selfadjoint(1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(one.im[(0, 0)], 0.0);
        assert!(matches!(gaussian_selfadjoint(0, &mut ChaCha8Rng::seed_from_u64(0)), Err(SimError::ZeroSize)));
    }
}
