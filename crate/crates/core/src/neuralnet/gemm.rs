use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub(crate) enum Trans {
    No,
    Yes,
}

/// `C = alpha·op(A)·op(B) + beta·C` on contiguous row-major buffers, `C` is `m×n`.
///
/// `A` is stored `m×k` (or `k×m` when transposed), `B` is stored `k×n`
/// (or `n×k` when transposed). With `beta == 0` the old `C` is not read.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm<T: Scalar>(
    m: usize,
    n: usize,
    k: usize,
    alpha: T,
    a: &[T],
    ta: Trans,
    b: &[T],
    tb: Trans,
    beta: T,
    c: &mut [T],
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n, "gemm operand sizes");
    let (rsa, csa) = match ta {
        Trans::No => (k as isize, 1),
        Trans::Yes => (1, m as isize),
    };
    let (rsb, csb) = match tb {
        Trans::No => (n as isize, 1),
        Trans::Yes => (1, k as isize),
    };
    // SAFETY: the asserts above bound every strided access by the slice lengths.
    unsafe {
        T::gemm_raw(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
