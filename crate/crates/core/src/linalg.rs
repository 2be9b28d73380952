//! Thin wrapper over `matrixmultiply::zgemm` for column-major nalgebra matrices.

use matrixmultiply::CGemmOption;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Operation applied to a GEMM operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    None,
    Transpose,
    Adjoint,
}

impl Op {
    fn shape(self, m: &DMatrix<Complex64>) -> (usize, usize) {
        match self {
            Op::None => (m.nrows(), m.ncols()),
            _ => (m.ncols(), m.nrows()),
        }
    }

    /// `(row stride, column stride)` of the operand as stored column-major.
    fn strides(self, m: &DMatrix<Complex64>) -> (isize, isize) {
        let ld = m.nrows() as isize;
        match self {
            Op::None => (1, ld),
            _ => (ld, 1),
        }
    }
}

/// `c = alpha op(a) op(b) + beta c`.
///
/// # Panics
/// On inconsistent dimensions.
pub fn gemm(
    alpha: Complex64,
    a: &DMatrix<Complex64>,
    op_a: Op,
    b: &DMatrix<Complex64>,
    op_b: Op,
    beta: Complex64,
    c: &mut DMatrix<Complex64>,
) {
    let (m, k) = op_a.shape(a);
    let (kb, n) = op_b.shape(b);
    assert_eq!(k, kb, "inner dimensions differ");
    assert_eq!((m, n), c.shape(), "output shape mismatch");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        *c *= beta;
        return;
    }
    // the kernel has no conjugation flag, so adjoint operands are conjugated up front
    let a_conj;
    let a = if op_a == Op::Adjoint {
        a_conj = a.map(|v| v.conj());
        &a_conj
    } else {
        a
    };
    let b_conj;
    let b = if op_b == Op::Adjoint {
        b_conj = b.map(|v| v.conj());
        &b_conj
    } else {
        b
    };
    let (rsa, csa) = op_a.strides(a);
    let (rsb, csb) = op_b.strides(b);
    let ldc = c.nrows() as isize;
    // SAFETY: Complex64 is repr(C) { re, im }, layout-compatible with [f64; 2];
    // strides describe the dense column-major storage of each matrix and the
    // shapes were checked above.
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.as_ptr() as *const [f64; 2],
            rsa,
            csa,
            b.as_ptr() as *const [f64; 2],
            rsb,
            csb,
            [beta.re, beta.im],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            ldc,
        );
    }
}

/// `op(a) op(b)` as a new matrix.
pub fn matmul(
    a: &DMatrix<Complex64>,
    op_a: Op,
    b: &DMatrix<Complex64>,
    op_b: Op,
) -> DMatrix<Complex64> {
    let (m, _) = op_a.shape(a);
    let (_, n) = op_b.shape(b);
    let mut c = DMatrix::zeros(m, n);
    gemm(
        Complex64::new(1.0, 0.0),
        a,
        op_a,
        b,
        op_b,
        Complex64::new(0.0, 0.0),
        &mut c,
    );
    c
}
