"""Alternating optimization of ST power and IRS reflection.

Power is set in closed form for the current reflection; the reflection is
then improved by successive convex approximation: each SINR ratio of
quadratic forms is replaced by a linear minorizer that is tight at the
current point, and the resulting linear program over the unit disk is
solved exactly through its dual variable (bisection on ``lam``).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numerics import max_eigenvalue, quadratic_form
from .system import (
    LiftedChannels,
    ReflectionVector,
    align_phases,
    build_AB,
    extract_reflection,
    lift,
    sinr_from_gains,
    su_rate,
)

FEASIBILITY_RTOL = 1e-6


@dataclass
class SolveResult:
    design: str
    p_s: float
    v: Optional[ReflectionVector]
    gamma_p: float
    gamma_s: float
    rate: float
    feasible: bool
    outer_iterations: int = 0
    inner_iterations: int = 0
    objective_trace: tuple = ()
    notes: dict = field(default_factory=dict)


def is_feasible(gamma_p, gamma_th):
    return gamma_p >= gamma_th * (1.0 - FEASIBILITY_RTOL)


def optimal_power(alpha_pp, alpha_sp, params):
    """Largest ST power keeping the PU SINR at its target, capped at ``p_max``."""
    if alpha_pp < 0 or alpha_sp < 0:
        raise ValueError("channel gains must be nonnegative")
    headroom = params.p_p * alpha_pp / params.gamma_th - params.sigma2_p
    if headroom < 0:
        return 0.0
    if alpha_sp == 0:
        return float(params.p_max)
    return float(max(0.0, min(headroom / alpha_sp, params.p_max)))


@dataclass(frozen=True)
class ScaBound:
    """Linear minorizer ``2 Re{w^H vt} + d`` of a ratio of quadratic forms."""

    w: np.ndarray
    d: float

    def __call__(self, vt):
        return 2.0 * float(np.vdot(self.w, vt).real) + self.d


def sca_bound(A, B, v0, lam_max=None):
    """Minorizer of ``vt^H A vt / vt^H B vt`` over unit-modulus ``vt``, tight at ``v0``.

    Combines the convexity of ``|x|^2 / y`` with a majorizer of ``vt^H B vt``
    that replaces ``B`` by its largest eigenvalue; the latter step is what
    restricts validity to vectors with ``||vt||^2 = len(vt)``.
    """
    v0 = np.asarray(v0, dtype=complex)
    if lam_max is None:
        lam_max = max_eigenvalue(B)
    y0 = quadratic_form(B, v0)
    if not y0 > 0:
        raise ValueError("denominator matrix must be positive definite")
    q0 = quadratic_form(A, v0)
    scale = q0 / y0**2
    w = A @ v0 / y0 - (B @ v0 - lam_max * v0) * scale
    d = -(2.0 * lam_max * v0.size - y0) * scale
    return ScaBound(w, float(d))


def _phases(z, fallback):
    mag = np.abs(z)
    if mag.min() > 0.0:
        return z / mag
    u = np.ones_like(z) if fallback is None else np.array(fallback, dtype=complex)
    nz = mag > 0.0
    u[nz] = z[nz] / mag[nz]
    return u


def combined_phases(lam, w_ss, w_pp, fallback=None):
    """``exp(j angle(w_ss + lam w_pp))``; ``lam = inf`` aligns with ``w_pp``."""
    if np.isinf(lam):
        z = np.where(w_pp != 0, w_pp, w_ss)
    else:
        z = w_ss + lam * w_pp
    return _phases(z, fallback)


def gamma_p_of_lambda(lam, w_ss, w_pp, d_pp, fallback=None):
    """Linearized PU SINR attained by the phase solution at multiplier ``lam``."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    u = combined_phases(lam, w_ss, w_pp, fallback)
    return 2.0 * float(np.vdot(w_pp, u).real) + d_pp


@dataclass(frozen=True)
class SubproblemSolution:
    """Outcome of the linearized subproblem.

    ``case`` is ``"unconstrained"`` (multiplier zero), ``"bisection"`` (the
    PU constraint is active) or ``"infeasible"`` (``u`` is None).
    """

    u: Optional[np.ndarray]
    lam: float
    case: str
    objective: float = float("nan")


def solve_p23(w_ss, w_pp, d_ss, d_pp, gamma_th, v_prev=None, tol=1e-8, max_bisect=200):
    """Maximize ``2Re{w_ss^H u} + d_ss`` s.t. ``2Re{w_pp^H u} + d_pp >= gamma_th``, ``|u_n| <= 1``.

    The maximizer is ``u_n = exp(j angle(w_ss(n) + lam w_pp(n)))`` for the
    optimal multiplier. The linearized PU SINR is nondecreasing in ``lam``,
    so the active case is found by bisection; the returned point is the
    upper end of the final bracket and therefore always satisfies the
    constraint. Entries whose combined coefficient vanishes keep the phase of
    ``v_prev``.
    """
    w_ss = np.asarray(w_ss, dtype=complex)
    w_pp = np.asarray(w_pp, dtype=complex)

    def objective(u):
        return 2.0 * float(np.vdot(w_ss, u).real) + d_ss

    def g(lam):
        return gamma_p_of_lambda(lam, w_ss, w_pp, d_pp, v_prev)

    if g(0.0) >= gamma_th:
        u = combined_phases(0.0, w_ss, w_pp, v_prev)
        return SubproblemSolution(u, 0.0, "unconstrained", objective(u))
    if g(np.inf) < gamma_th:
        return SubproblemSolution(None, np.inf, "infeasible")

    lo, hi = 0.0, 1.0
    while g(hi) < gamma_th:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            u = combined_phases(np.inf, w_ss, w_pp, v_prev)
            return SubproblemSolution(u, np.inf, "bisection", objective(u))
    tol_abs = tol * max(1.0, gamma_th)
    for _ in range(max_bisect):
        if g(hi) - gamma_th <= tol_abs or hi - lo <= 4 * np.finfo(float).eps * hi:
            break
        mid = 0.5 * (lo + hi)
        if g(mid) >= gamma_th:
            hi = mid
        else:
            lo = mid
    u = combined_phases(hi, w_ss, w_pp, v_prev)
    return SubproblemSolution(u, hi, "bisection", objective(u))


@dataclass(frozen=True)
class BeamformingOutcome:
    lifted: np.ndarray
    iterations: int
    stopped_infeasible: bool = False


class _RankOneRatio:
    """``vt^H A vt / vt^H B vt`` with ``A = a h h^H`` and ``B = b g g^H + c I``.

    Same minorizer as ``sca_bound`` but with O(N) products; the inner loop
    evaluates it thousands of times.
    """

    def __init__(self, a, h, b, g, c, lam_max):
        self.a, self.h, self.b, self.g, self.c, self.lam = a, h, b, g, c, lam_max

    def parts(self, vt):
        hv = np.vdot(self.h, vt)
        gv = np.vdot(self.g, vt)
        num = self.a * abs(hv) ** 2
        den = self.b * abs(gv) ** 2 + self.c * float(np.vdot(vt, vt).real)
        return hv, gv, num, den

    def value(self, vt):
        _, _, num, den = self.parts(vt)
        return num / den

    def bound(self, v0):
        hv, gv, q0, y0 = self.parts(v0)
        scale = q0 / y0**2
        Av = self.a * hv * self.h
        Bv = self.b * gv * self.g + self.c * v0
        w = Av / y0 - (Bv - self.lam * v0) * scale
        d = -(2.0 * self.lam * v0.size - y0) * scale
        return ScaBound(w, float(d))


def optimize_beamforming(ch, p_s, params, v_init, *, tol=1e-5, max_iter=100,
                         bisection_tol=1e-8, lifted_channels=None):
    """SCA loop over the lifted reflection for fixed ST power.

    Parameters
    ----------
    v_init : array, length N or N+1
        Starting point; a length-N vector is lifted with a trailing 1.

    Returns
    -------
    BeamformingOutcome
        The final lifted vector. Iterations stop when the SU SINR changes by
        less than ``tol`` (relative), after ``max_iter`` steps, or when a
        step would be infeasible or non-improving (the previous point is
        kept in both cases).
    """
    vt = np.asarray(v_init, dtype=complex)
    if vt.size == ch.n_elements:
        vt = lift(vt)
    if not np.allclose(np.abs(vt), 1.0, atol=1e-9):
        raise ValueError("v_init must be unit-modulus")
    lc = LiftedChannels.from_channels(ch) if lifted_channels is None else lifted_channels
    forms = build_AB(ch, p_s, params, lc)
    dim = vt.size
    su = _RankOneRatio(p_s, lc.hbar_ss, params.p_p, lc.hbar_ps, params.sigma2_s / dim,
                       max_eigenvalue(forms.B_ps))
    pu = _RankOneRatio(params.p_p, lc.hbar_pp, p_s, lc.hbar_sp, params.sigma2_p / dim,
                       max_eigenvalue(forms.B_sp))

    f_ss, f_pp = su.value(vt), pu.value(vt)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        b_ss = su.bound(vt)
        b_pp = pu.bound(vt)
        sol = solve_p23(b_ss.w, b_pp.w, b_ss.d, b_pp.d, params.gamma_th, vt, tol=bisection_tol)
        if sol.u is None:
            return BeamformingOutcome(vt, iterations, True)
        new_ss, new_pp = su.value(sol.u), pu.value(sol.u)
        # guards against bisection round-off; the minorizer makes both hold exactly
        if new_ss < f_ss or new_pp < min(params.gamma_th, f_pp):
            break
        change = new_ss - f_ss
        vt, f_ss, f_pp = sol.u, new_ss, new_pp
        if change <= tol * max(abs(f_ss), np.finfo(float).tiny):
            break
    return BeamformingOutcome(vt, iterations)


def random_reflection(rng, n):
    """Uniform random phases, returned as the formula vector ``v``."""
    return np.exp(-1j * rng.uniform(0.0, 2.0 * np.pi, n))


def _evaluate(lifted_channels, vt, p_s, params):
    alpha = {link: abs(np.vdot(vt, lifted_channels[link])) ** 2 / abs(vt[-1]) ** 2
             for link in ("pp", "ps", "sp", "ss")}
    gamma_p, gamma_s = sinr_from_gains(alpha, p_s, params)
    return alpha, gamma_p, gamma_s


def _single_run(ch, params, vt, lifted_channels, *, outer_tol, max_outer,
                inner_tol, max_inner, bisection_tol):
    alpha, gamma_p, _ = _evaluate(lifted_channels, vt, 0.0, params)
    if not is_feasible(gamma_p, params.gamma_th):
        # the PU target is missed even with a silent ST; the strongest
        # possible PU link is the coherent alignment, so try that instead
        vt = lift(np.conj(align_phases(ch.cascaded("pp"), ch.h_pp)))
        alpha, gamma_p, _ = _evaluate(lifted_channels, vt, 0.0, params)
        if not is_feasible(gamma_p, params.gamma_th):
            return vt, 0.0, (0.0,), 0, 0, False

    p_s = optimal_power(alpha["pp"], alpha["sp"], params)
    _, _, gamma_s = _evaluate(lifted_channels, vt, p_s, params)
    trace = [su_rate(gamma_s)]
    inner_total = 0
    outer = 0
    for outer in range(1, max_outer + 1):
        bf = optimize_beamforming(ch, p_s, params, vt, tol=inner_tol, max_iter=max_inner,
                                  bisection_tol=bisection_tol, lifted_channels=lifted_channels)
        inner_total += bf.iterations
        vt = bf.lifted
        alpha, _, _ = _evaluate(lifted_channels, vt, p_s, params)
        p_s = optimal_power(alpha["pp"], alpha["sp"], params)
        _, _, gamma_s = _evaluate(lifted_channels, vt, p_s, params)
        rate = su_rate(gamma_s)
        trace.append(rate)
        if abs(rate - trace[-2]) <= outer_tol * max(abs(trace[-2]), np.finfo(float).tiny):
            break
    return vt, p_s, tuple(trace), outer, inner_total, True


def solve_ao(ch, params, v_init=None, rng=None, *, restarts=1, outer_tol=1e-4, max_outer=50,
             inner_tol=1e-5, max_inner=100, bisection_tol=1e-8):
    """Jointly optimize ST power and IRS reflection.

    Parameters
    ----------
    ch : ChannelSet
    params : SystemParams
    v_init : array of length N, optional
        Starting reflection (formula vector ``v``). Used for the first start;
        further restarts draw random phases from ``rng``.
    rng : numpy.random.Generator, optional
        Source of random starting phases. Required when ``v_init`` is None
        or ``restarts > 1``.
    restarts : int
        Number of starting points; the best feasible run is returned.

    Returns
    -------
    SolveResult
        With ``feasible=False`` and ``p_s=0`` when no tried reflection meets
        the PU target even with the ST silent.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    n = ch.n_elements
    lifted_channels = LiftedChannels.from_channels(ch)
    starts = []
    if v_init is not None:
        starts.append(np.asarray(v_init, dtype=complex).reshape(n))
    while len(starts) < restarts:
        if rng is None:
            raise ValueError("rng is required for random starting points")
        starts.append(random_reflection(rng, n))

    best = None
    for v0 in starts:
        run = _single_run(ch, params, lift(v0), lifted_channels, outer_tol=outer_tol,
                          max_outer=max_outer, inner_tol=inner_tol, max_inner=max_inner,
                          bisection_tol=bisection_tol)
        if best is None or (run[5], run[2][-1]) > (best[5], best[2][-1]):
            best = run

    vt, p_s, trace, outer, inner, ok = best
    refl = ReflectionVector(extract_reflection(vt))
    _, gamma_p, gamma_s = _evaluate(lifted_channels, lift(refl.v), p_s, params)
    return SolveResult(
        design="IrsAO",
        p_s=p_s,
        v=refl,
        gamma_p=gamma_p,
        gamma_s=gamma_s,
        rate=su_rate(gamma_s),
        feasible=ok and is_feasible(gamma_p, params.gamma_th),
        outer_iterations=outer,
        inner_iterations=inner,
        objective_trace=trace,
    )
