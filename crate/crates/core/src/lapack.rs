//! Thin safe wrappers over the handful of LAPACK routines the solvers need.
//!
//! All matrices are column-major. Complex buffers use `num_complex::Complex64`, which has the
//! same `#[repr(C)]` layout as LAPACK's `double complex`.

use lapack_sys as ffi;
use num_complex::Complex64;

use crate::error::{Error, Result};

type LapackComplex = ffi::__BindgenComplex<f64>;

fn as_ffi_mut(v: &mut [Complex64]) -> *mut LapackComplex {
    v.as_mut_ptr().cast()
}

fn as_ffi(v: &[Complex64]) -> *const LapackComplex {
    v.as_ptr().cast()
}

fn int(v: usize) -> i32 {
    i32::try_from(v).expect("matrix dimension exceeds LAPACK integer range")
}

/// Hermitian band matrix, lower storage: `ab[(r - c) + c * (kd + 1)] = A[r][c]` for `0 <= r - c <= kd`.
#[derive(Debug, Clone)]
pub(crate) struct HermitianBand {
    n: usize,
    kd: usize,
    ab: Vec<Complex64>,
}

impl HermitianBand {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self { n, kd, ab: vec![Complex64::default(); (kd + 1) * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kd(&self) -> usize {
        self.kd
    }

    /// Sets `A[r][c]` for `r >= c`; the upper triangle is implied.
    pub fn set_lower(&mut self, r: usize, c: usize, v: Complex64) {
        debug_assert!(r >= c && r - c <= self.kd);
        self.ab[(r - c) + c * (self.kd + 1)] = v;
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        if r >= c {
            if r - c > self.kd {
                Complex64::default()
            } else {
                self.ab[(r - c) + c * (self.kd + 1)]
            }
        } else {
            self.get(c, r).conj()
        }
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = Complex64::default());
        for c in 0..self.n {
            let diag = self.ab[c * (self.kd + 1)];
            y[c] += diag * x[c];
            for r in c + 1..(c + self.kd + 1).min(self.n) {
                let a = self.ab[(r - c) + c * (self.kd + 1)];
                y[r] += a * x[c];
                y[c] += a.conj() * x[r];
            }
        }
    }

    /// Infinity norm (max absolute row sum).
    #[cfg(test)]
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        for c in 0..self.n {
            rows[c] += self.ab[c * (self.kd + 1)].norm();
            for r in c + 1..(c + self.kd + 1).min(self.n) {
                let a = self.ab[(r - c) + c * (self.kd + 1)].norm();
                rows[r] += a;
                rows[c] += a;
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// All eigenvalues in the half-open interval `(lo, hi]`, ascending (`zhbevx`, no vectors).
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let mut ab = self.ab.clone();
        let mut q = [Complex64::default(); 1];
        let mut z = [Complex64::default(); 1];
        let mut w = vec![0.0; n];
        let mut work = vec![Complex64::default(); n];
        let mut rwork = vec![0.0; 7 * n];
        let mut iwork = vec![0i32; 5 * n];
        let mut ifail = vec![0i32; n];
        let mut m = 0i32;
        let mut info = 0i32;
        // Twice the underflow threshold: the most accurate setting for bisection.
        let abstol = 2.0 * f64::MIN_POSITIVE;
        unsafe {
            ffi::zhbevx_(
                &(b'N' as _),
                &(b'V' as _),
                &(b'L' as _),
                &int(n),
                &int(self.kd),
                as_ffi_mut(&mut ab),
                &int(self.kd + 1),
                as_ffi_mut(&mut q),
                &1,
                &lo,
                &hi,
                &0,
                &0,
                &abstol,
                &mut m,
                w.as_mut_ptr(),
                as_ffi_mut(&mut z),
                &1,
                as_ffi_mut(&mut work),
                rwork.as_mut_ptr(),
                iwork.as_mut_ptr(),
                ifail.as_mut_ptr(),
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Eigensolver {
                routine: "zhbevx",
                info,
                detail: format!("band matrix n = {n}, kd = {}, window ({lo}, {hi}]", self.kd),
            });
        }
        w.truncate(m as usize);
        Ok(w)
    }
}

/// LU factorization of a general complex band matrix with partial pivoting (`zgbtrf`/`zgbtrs`).
#[derive(Debug, Clone)]
pub(crate) struct ComplexBandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<Complex64>,
    ipiv: Vec<i32>,
}

impl ComplexBandLu {
    /// Factors the `n x n` matrix whose entries inside the band `|r - c| <= half_width` are `entry(r, c)`.
    pub fn factor(n: usize, half_width: usize, entry: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let (kl, ku) = (half_width, half_width);
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![Complex64::default(); ldab * n];
        for c in 0..n {
            for r in c.saturating_sub(ku)..(c + kl + 1).min(n) {
                ab[(kl + ku + r - c) + c * ldab] = entry(r, c);
            }
        }
        let mut ipiv = vec![0i32; n];
        let mut info = 0i32;
        unsafe {
            ffi::zgbtrf_(&int(n), &int(n), &int(kl), &int(ku), as_ffi_mut(&mut ab), &int(ldab), ipiv.as_mut_ptr(), &mut info);
        }
        if info != 0 {
            return Err(Error::LinearSolve { routine: "zgbtrf", info });
        }
        Ok(Self { n, kl, ku, ab, ipiv })
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) -> Result<()> {
        assert_eq!(b.len(), self.n);
        let mut info = 0i32;
        unsafe {
            ffi::zgbtrs_(
                &(b'N' as _),
                &int(self.n),
                &int(self.kl),
                &int(self.ku),
                &1,
                as_ffi(&self.ab),
                &int(2 * self.kl + self.ku + 1),
                self.ipiv.as_ptr(),
                as_ffi_mut(b),
                &int(self.n),
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::LinearSolve { routine: "zgbtrs", info });
        }
        Ok(())
    }
}

/// Which eigenpairs of a symmetric tridiagonal matrix to compute (0-based, inclusive).
#[derive(Debug, Clone, Copy)]
pub(crate) enum TridiagonalSelection {
    All,
    Indices(usize, usize),
}

/// Eigenpairs of the real symmetric tridiagonal matrix `(diag, off)` via `dstevr`.
///
/// Returns ascending eigenvalues and, when `vectors` is set, the matching eigenvectors
/// (column-major, `n x m`, unit Euclidean norm).
pub(crate) fn tridiagonal_eigen(
    diag: &[f64],
    off: &[f64],
    selection: TridiagonalSelection,
    vectors: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n);
    let mut d = diag.to_vec();
    // dstevr wants an `e` of length n (the last entry is workspace).
    let mut e = off.to_vec();
    e.push(0.0);
    let (range, il, iu, m_max) = match selection {
        TridiagonalSelection::All => (b'A', 0, 0, n),
        TridiagonalSelection::Indices(lo, hi) => {
            assert!(lo <= hi && hi < n);
            (b'I', int(lo + 1), int(hi + 1), hi - lo + 1)
        }
    };
    let ldz = if vectors { n } else { 1 };
    let mut z = vec![0.0; if vectors { n * m_max } else { 1 }];
    let mut w = vec![0.0; n];
    let mut isuppz = vec![0i32; 2 * n.max(1)];
    let lwork = 20 * n.max(1);
    let liwork = 10 * n.max(1);
    let mut work = vec![0.0; lwork];
    let mut iwork = vec![0i32; liwork];
    let mut m = 0i32;
    let mut info = 0i32;
    unsafe {
        ffi::dstevr_(
            &(if vectors { b'V' } else { b'N' } as _),
            &(range as _),
            &int(n),
            d.as_mut_ptr(),
            e.as_mut_ptr(),
            &0.0,
            &0.0,
            &il,
            &iu,
            &0.0,
            &mut m,
            w.as_mut_ptr(),
            z.as_mut_ptr(),
            &int(ldz),
            isuppz.as_mut_ptr(),
            work.as_mut_ptr(),
            &int(lwork),
            iwork.as_mut_ptr(),
            &int(liwork),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver { routine: "dstevr", info, detail: format!("tridiagonal n = {n}") });
    }
    let m = m as usize;
    w.truncate(m);
    if vectors {
        z.truncate(n * m);
    } else {
        z.clear();
    }
    Ok((w, z))
}

/// LU factorization of a real tridiagonal matrix with partial pivoting (`dgttrf`/`dgttrs`).
#[derive(Debug, Clone)]
pub(crate) struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    ipiv: Vec<i32>,
}

impl TridiagonalLu {
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        assert!(sub.len() + 1 == n && sup.len() + 1 == n);
        let mut lu = Self {
            dl: sub.to_vec(),
            d: diag.to_vec(),
            du: sup.to_vec(),
            du2: vec![0.0; n.saturating_sub(2).max(1)],
            ipiv: vec![0; n],
        };
        let mut info = 0i32;
        unsafe {
            ffi::dgttrf_(
                &int(n),
                lu.dl.as_mut_ptr(),
                lu.d.as_mut_ptr(),
                lu.du.as_mut_ptr(),
                lu.du2.as_mut_ptr(),
                lu.ipiv.as_mut_ptr(),
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::LinearSolve { routine: "dgttrf", info });
        }
        Ok(lu)
    }

    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        let mut info = 0i32;
        unsafe {
            ffi::dgttrs_(
                &(b'N' as _),
                &int(n),
                &1,
                self.dl.as_ptr(),
                self.d.as_ptr(),
                self.du.as_ptr(),
                self.du2.as_ptr(),
                self.ipiv.as_ptr(),
                b.as_mut_ptr(),
                &int(n),
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::LinearSolve { routine: "dgttrs", info });
        }
        Ok(())
    }
}
