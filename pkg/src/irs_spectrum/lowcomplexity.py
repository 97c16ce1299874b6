"""Two-stage heuristic designs and the no-IRS baselines.

Stage one picks the reflection from a single link: coherent alignment to
maximize a desired link, or destructive combining to suppress an
interference link (closed form when the direct path dominates, otherwise a
semidefinite relaxation followed by Gaussian randomization). Stage two sets
the ST power in closed form for the resulting gains.
"""

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .ao import SolveResult, is_feasible, optimal_power
from .numerics import outer_product
from .system import ReflectionVector, align_phases, extract_reflection, gains, sinr_from_gains, su_rate

log = logging.getLogger(__name__)

RANK_ONE_RATIO = 1e-6
ACCEPT_GAP = 1e-8  # fallback gap for stalled interior-point runs


class DesignKind(str, enum.Enum):
    MAX_ALPHA_PP = "MaxAlphaPP"
    MAX_ALPHA_SS = "MaxAlphaSS"
    MIN_ALPHA_SP = "MinAlphaSP"
    MIN_ALPHA_PS = "MinAlphaPS"
    NO_IRS_WITH_SIC = "NoIrsWithSic"
    NO_IRS_WITHOUT_SIC = "NoIrsWithoutSic"

    @property
    def uses_irs(self):
        return self not in (DesignKind.NO_IRS_WITH_SIC, DesignKind.NO_IRS_WITHOUT_SIC)

    @property
    def link(self):
        """The link whose equivalent gain stage one targets."""
        return {"MaxAlphaPP": "pp", "MaxAlphaSS": "ss", "MinAlphaSP": "sp", "MinAlphaPS": "ps"}[self.value]


class SdrConvergenceError(RuntimeError):
    pass


def signal_max_phases(h_cascaded, h_direct):
    """Reflection maximizing ``|v^H h_c + h_d|^2``: every path in phase with the direct one."""
    return ReflectionVector.from_coefficients(align_phases(h_cascaded, h_direct))


def destructive_phases(h_cascaded, h_direct):
    """Every reflected path in antiphase with the direct one."""
    return ReflectionVector.from_coefficients(-align_phases(h_cascaded, h_direct))


def _sdr_admm(Hn, tol, max_iter, rho=1.0):
    """ADMM splitting between the unit-diagonal affine set and the PSD cone."""
    n = Hn.shape[0]
    diag = np.diag_indices(n)
    Z = np.eye(n, dtype=complex)
    U = np.zeros((n, n), dtype=complex)
    for it in range(1, max_iter + 1):
        V = Z - U - Hn / rho
        V[diag] = 1.0
        W = V + U
        evals, evecs = np.linalg.eigh((W + W.conj().T) / 2)
        Z_old = Z
        Z = (evecs * np.clip(evals, 0.0, None)) @ evecs.conj().T
        U = U + V - Z
        primal = np.linalg.norm(V - Z)
        dual = rho * np.linalg.norm(Z - Z_old)
        if primal < tol and dual < tol:
            break
        # residual balancing keeps the two residuals within a factor of ten
        if it % 20 == 0:
            if primal > 10 * dual:
                rho *= 2.0
                U /= 2.0
            elif dual > 10 * primal:
                rho /= 2.0
                U *= 2.0
    else:
        raise SdrConvergenceError(f"ADMM did not reach tolerance {tol} in {max_iter} iterations")
    d = np.sqrt(np.clip(np.diag(Z).real, 1e-300, None))
    return Z / np.outer(d, d)


def _step_to_boundary(M, dM, fraction=0.95):
    """Largest step in (0, 1] keeping ``M + step * dM`` positive definite.

    Uses the exact boundary ``1 / lambda_max(-R^-1 dM R^-H)`` with
    ``M = R R^H``, shortened by ``fraction``.
    """
    R = np.linalg.cholesky(M)
    Ri = np.linalg.inv(R)
    S = Ri @ dM @ Ri.conj().T
    top = float(np.linalg.eigvalsh(-(S + S.conj().T) / 2)[-1])
    if top <= 0.0:
        return 1.0
    return min(1.0, fraction / top)


def _ipm_step(X, Z):
    """Centering step; falls back to a stronger centering weight when the short one stalls."""
    n = X.shape[0]
    mu = float(np.vdot(Z, X).real) / n
    Zi = np.linalg.inv(Z)
    Zi = (Zi + Zi.conj().T) / 2
    schur = (Zi * X.T).real
    for sigma in (0.1, 0.5):
        dy = np.linalg.solve(schur, sigma * mu * np.diag(Zi).real - 1.0)
        dX = -Zi @ (dy[:, None] * X) + sigma * mu * Zi - X
        dX = (dX + dX.conj().T) / 2
        dX[np.diag_indices(n)] = 0.0
        alpha_p = _step_to_boundary(X, dX)
        alpha_d = _step_to_boundary(Z, np.diag(dy).astype(complex))
        if min(alpha_p, alpha_d) > 0.3:
            break
    return alpha_p, dX, alpha_d, dy


def _sdr_interior_point(Hn, tol, max_iter):
    """Primal-dual path following for ``max <L, X>`` s.t. ``diag(X) = 1``, ``X >= 0``, ``L = -Hn``.

    Dual: ``min sum(y)`` s.t. ``Z = diag(y) - L >= 0``; the duality gap is
    ``<Z, X>``. Each step solves the n-by-n Schur system
    ``Re(Z^-1 o X^T) dy = mu diag(Z^-1) - 1``; the primal direction has
    zero diagonal, so ``diag(X) = 1`` holds throughout.

    Degenerate instances (optimum exactly on the nulling boundary) can
    stall just short of ``tol`` in floating point; the best iterate is then
    accepted if its gap is within ``ACCEPT_GAP``.
    """
    n = Hn.shape[0]
    L = -Hn
    X = np.eye(n, dtype=complex)
    y = 1.1 * np.abs(L).sum(axis=1) + 1.0
    Z = np.diag(y) - L
    best_X, best_gap = X, np.inf
    for _ in range(max_iter):
        scale = max(1.0, abs(float(y.sum())))
        gap = (float(y.sum()) - float(np.vdot(L, X).real)) / scale
        if gap <= tol:
            return X
        if 0.0 <= gap < best_gap:
            best_X, best_gap = X, gap
        try:
            step = _ipm_step(X, Z)
        except np.linalg.LinAlgError:
            break  # Z or X numerically singular: no further progress possible
        X, y = X + step[0] * step[1], y + step[2] * step[3]
        Z = np.diag(y) - L
    if best_gap <= ACCEPT_GAP:
        return best_X
    raise SdrConvergenceError(f"interior point did not reach gap {tol} in {max_iter} iterations")


def sdr_solve(H, *, method="interior-point", tol=None, max_iter=None):
    """Solve ``min Tr(H V)`` s.t. ``diag(V) = 1``, ``V >= 0``.

    ``H`` is normalized by its trace internally, so tolerances apply to a
    unit-scale problem. ``method`` is ``"interior-point"`` (default; duality
    gap below ``tol``, 1e-10 unless given) or ``"admm"`` (primal and dual
    residuals below ``tol``, 1e-7 unless given). Raises
    ``SdrConvergenceError`` when the iteration cap is hit.
    """
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    trace = float(np.trace(H).real)
    if trace <= 0.0:
        return np.eye(n, dtype=complex)
    Hn = H / trace
    Hn = (Hn + Hn.conj().T) / 2
    if method == "interior-point":
        V = _sdr_interior_point(Hn, 1e-10 if tol is None else tol, 200 if max_iter is None else max_iter)
    elif method == "admm":
        V = _sdr_admm(Hn, 1e-7 if tol is None else tol, 50_000 if max_iter is None else max_iter)
    else:
        raise ValueError(f"unknown SDR method {method!r}")
    return (V + V.conj().T) / 2


def project_unit_modulus(x):
    x = np.asarray(x, dtype=complex)
    mag = np.abs(x)
    return np.where(mag > 0, x / np.where(mag > 0, mag, 1.0), 1.0 + 0.0j)


def gaussian_randomize(V, H, count, rng, extra_candidates=()):
    """Pick the best unit-modulus projection of draws from ``CN(0, V)``.

    Candidates are the phase-projected principal eigenvector of ``V``, any
    ``extra_candidates``, then ``count`` random draws (drawn row by row, so a
    larger count with the same seed only adds candidates). Returns the
    candidate minimizing ``x^H H x``.
    """
    V = np.asarray(V, dtype=complex)
    H = np.asarray(H, dtype=complex)
    n = V.shape[0]
    evals, evecs = np.linalg.eigh((V + V.conj().T) / 2)
    evals = np.clip(evals, 0.0, None)
    factor = evecs * np.sqrt(evals)
    candidates = [project_unit_modulus(evecs[:, -1])]
    candidates.extend(project_unit_modulus(c) for c in extra_candidates)
    if count > 0:
        z = rng.standard_normal((count, n, 2)) / np.sqrt(2.0)
        draws = (z[..., 0] + 1j * z[..., 1]) @ factor.T
        candidates.extend(project_unit_modulus(draws))
    X = np.array(candidates)
    objective = np.einsum("ki,ij,kj->k", X.conj(), H, X).real
    return X[int(np.argmin(objective))]


@dataclass(frozen=True)
class NullingOutcome:
    v: ReflectionVector
    case: int
    rank_one: bool = False
    solver_failed: bool = False


def interference_min(h_cascaded, h_direct, randomization_count=1000, rng=None):
    """Reflection minimizing ``|v^H h_c + h_d|^2``.

    If the reflected paths cannot outweigh the direct one the optimum is the
    antiphase alignment. Otherwise the relaxed SDP is solved; a rank-one
    solution gives the reflection directly, else Gaussian randomization
    recovers one. An SDP failure falls back to antiphase alignment and sets
    ``solver_failed``.
    """
    h_cascaded = np.asarray(h_cascaded, dtype=complex)
    fallback = destructive_phases(h_cascaded, h_direct)
    if np.abs(h_cascaded).sum() <= abs(h_direct):
        return NullingOutcome(fallback, case=1)

    hbar = np.append(h_cascaded, h_direct)
    H = outer_product(hbar)
    try:
        V = sdr_solve(H)
    except SdrConvergenceError:
        log.warning("SDR did not converge; using antiphase alignment")
        return NullingOutcome(fallback, case=2, solver_failed=True)

    evals, evecs = np.linalg.eigh(V)
    if evals[-2] / evals[-1] < RANK_ONE_RATIO:
        lifted = project_unit_modulus(evecs[:, -1])
        return NullingOutcome(ReflectionVector(extract_reflection(lifted)), case=2, rank_one=True)
    if rng is None:
        rng = np.random.default_rng(0)
    lifted = gaussian_randomize(V, H, randomization_count, rng, extra_candidates=[fallback.lifted])
    return NullingOutcome(ReflectionVector(extract_reflection(lifted)), case=2)


def stage_one(kind, ch, rng=None, randomization_count=1000):
    """Reflection chosen by the single-link criterion of ``kind``."""
    kind = DesignKind(kind)
    if not kind.uses_irs:
        raise ValueError(f"{kind.value} does not use the IRS")
    h_c, h_d = ch.cascaded(kind.link), ch.direct(kind.link)
    if kind in (DesignKind.MAX_ALPHA_PP, DesignKind.MAX_ALPHA_SS):
        return signal_max_phases(h_c, h_d), {}
    out = interference_min(h_c, h_d, randomization_count, rng)
    return out.v, {"case": out.case, "rank_one": out.rank_one, "solver_failed": out.solver_failed}


def stage_two(design, refl, ch, params, notes=None):
    """Closed-form ST power for a fixed reflection."""
    alpha = gains(ch, refl)
    p_s = optimal_power(alpha["pp"], alpha["sp"], params)
    gamma_p, gamma_s = sinr_from_gains(alpha, p_s, params)
    return SolveResult(
        design=design,
        p_s=p_s,
        v=refl,
        gamma_p=gamma_p,
        gamma_s=gamma_s,
        rate=su_rate(gamma_s),
        feasible=is_feasible(gamma_p, params.gamma_th),
        notes=dict(notes or {}),
    )


def solve_two_stage(kind, ch, params, rng=None, randomization_count=1000):
    kind = DesignKind(kind)
    refl, notes = stage_one(kind, ch, rng, randomization_count)
    return stage_two(kind.value, refl, ch, params, notes)


def sic_decodable(p_s, ch, params):
    """Whether the SR can decode the PU message at the PU target SINR, SU signal as noise."""
    sinr = params.p_p * abs(ch.h_ps) ** 2 / (p_s * abs(ch.h_ss) ** 2 + params.sigma2_s)
    return sinr >= params.gamma_th


def solve_no_irs(with_sic, ch, params):
    """Baselines without an IRS: direct links only, optional SIC at the SR."""
    alpha = gains(ch, None)
    p_s = optimal_power(alpha["pp"], alpha["sp"], params)
    gamma_p, gamma_s = sinr_from_gains(alpha, p_s, params)
    notes = {}
    if with_sic:
        decodable = sic_decodable(p_s, ch, params)
        notes["sic_applied"] = decodable
        if decodable:
            gamma_s = p_s * alpha["ss"] / params.sigma2_s
    design = DesignKind.NO_IRS_WITH_SIC if with_sic else DesignKind.NO_IRS_WITHOUT_SIC
    return SolveResult(
        design=design.value,
        p_s=p_s,
        v=None,
        gamma_p=gamma_p,
        gamma_s=gamma_s,
        rate=su_rate(gamma_s),
        feasible=is_feasible(gamma_p, params.gamma_th),
        notes=notes,
    )


def solve_design(kind, ch, params, rng=None, randomization_count=1000):
    kind = DesignKind(kind)
    if kind is DesignKind.NO_IRS_WITH_SIC:
        return solve_no_irs(True, ch, params)
    if kind is DesignKind.NO_IRS_WITHOUT_SIC:
        return solve_no_irs(False, ch, params)
    return solve_two_stage(kind, ch, params, rng, randomization_count)
