"""Small dense complex linear-algebra helpers used by the optimizers."""

import numpy as np

HERMITIAN_ATOL = 1e-12


class EigenvalueError(RuntimeError):
    """Power iteration did not settle within its iteration budget."""


def as_cvector(x):
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.size == 0:
        raise ValueError("vector must have at least one entry")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


def is_hermitian(M, atol=HERMITIAN_ATOL):
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and np.allclose(M, M.conj().T, rtol=0.0, atol=atol)


def outer_product(h):
    """Return the rank-one Hermitian matrix ``h h^H``."""
    h = as_cvector(h)
    return np.outer(h, h.conj())


def quadratic_form(M, x):
    """Real part of ``x^H M x`` for Hermitian ``M``.

    Raises ``ValueError`` on a dimension mismatch or when the imaginary part
    is too large for ``M`` to be Hermitian.
    """
    M = np.asarray(M, dtype=complex)
    x = np.asarray(x, dtype=complex).reshape(-1)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] != x.size:
        raise ValueError(f"dimension mismatch: matrix {M.shape}, vector {x.shape}")
    val = np.vdot(x, M @ x)
    scale = max(1.0, float(np.abs(M).max(initial=0.0)) * float(np.vdot(x, x).real))
    if abs(val.imag) > 1e-9 * scale:
        raise ValueError(f"quadratic form has imaginary part {val.imag:.3e}; matrix is not Hermitian")
    return float(val.real)


def _power_iteration(M, x, tol, max_iter):
    rq_old = np.inf
    step_old = np.inf
    for k in range(1, max_iter + 1):
        y = M @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, x, k, True
        x = y / norm
        rq = float(np.vdot(x, M @ x).real)
        step = abs(rq - rq_old)
        # the quotient converges geometrically; extrapolate the remaining
        # error from the contraction ratio of successive steps
        ratio = min(step / step_old, 0.999) if np.isfinite(step_old) and step_old > 0 else 0.0
        if step * (1.0 + ratio / (1.0 - ratio)) <= tol * max(abs(rq), np.finfo(float).tiny):
            return rq, x, k, True
        rq_old, step_old = rq, step
    return rq_old, x, max_iter, False


def max_eigenvalue(B, tol=1e-10, max_iter=10_000):
    """Largest eigenvalue of a Hermitian matrix by power iteration.

    The plain iteration converges to the eigenvalue of largest magnitude.
    When that one is negative, or the iteration stalls (e.g. ``+a`` and
    ``-a`` both in the spectrum), the matrix is shifted by its Gershgorin
    radius so the whole spectrum is nonnegative and iterated again.

    Parameters
    ----------
    B : (n, n) complex array
        Hermitian matrix.
    tol : float
        Relative change of the Rayleigh quotient that counts as converged.
    max_iter : int
        Total iteration budget across both attempts.

    Returns
    -------
    float
    """
    B = np.asarray(B, dtype=complex)
    if not is_hermitian(B, atol=HERMITIAN_ATOL * max(1.0, float(np.abs(B).max(initial=0.0)))):
        raise ValueError("matrix is not Hermitian")
    n = B.shape[0]
    if n == 1:
        return float(B[0, 0].real)
    radius = float(np.abs(B).sum(axis=1).max())
    if radius == 0.0:
        return 0.0

    # fixed start vector keeps results reproducible; the ramp avoids being
    # orthogonal to the dominant eigenvector for structured inputs
    x0 = np.exp(1j * np.arange(n) * 0.7) * (1.0 + np.arange(n) / n)
    x0 /= np.linalg.norm(x0)

    first_budget = max(1, max_iter // 4)
    rq, x, used, ok = _power_iteration(B, x0, tol, first_budget)
    # a stable Rayleigh quotient is not enough: with +a and -a in the spectrum
    # the iterate oscillates at a constant, non-eigen, quotient
    if ok and rq >= 0.0 and np.linalg.norm(B @ x - rq * x) <= 1e-6 * radius:
        return rq

    shifted = B + radius * np.eye(n)
    rq, _, _, ok = _power_iteration(shifted, x0, tol, max_iter - used)
    if not ok:
        raise EigenvalueError(f"power iteration did not converge in {max_iter} iterations")
    return rq - radius
