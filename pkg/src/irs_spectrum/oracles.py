"""Brute-force reference solvers for small instances.

These enumerate discretized phase codebooks or dense power grids and are
used to check the closed-form and iterative solvers. Everything here is
exponential in the number of elements; keep ``N`` at 3 or 4.
"""

import numpy as np

from .ao import FEASIBILITY_RTOL, optimal_power
from .channel import ChannelSet
from .system import LINKS, SystemParams


def grid_power(alpha_pp, alpha_sp, params, points=100_001):
    """Best ST power on a uniform grid over ``[0, P_max]``.

    The SU rate grows with ``p_s``, so the answer is the largest grid point
    meeting the PU SINR target; 0 when none does. Returns ``(p_s, step)``.
    """
    grid = np.linspace(0.0, params.p_max, points)
    gamma_p = params.p_p * alpha_pp / (grid * alpha_sp + params.sigma2_p)
    ok = gamma_p >= params.gamma_th
    p = float(grid[np.flatnonzero(ok)[-1]]) if ok.any() else 0.0
    return p, float(grid[1] - grid[0])


def phase_codebook(levels):
    return np.exp(2j * np.pi * np.arange(levels) / levels)


def _codewords(n, levels):
    """All ``levels**n`` coefficient vectors, one per row (fine for small ``n``)."""
    book = phase_codebook(levels)
    grids = np.meshgrid(*([book] * n), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def _codeword_chunks(n, levels, chunk):
    """``levels**n`` codewords in row blocks of at most ``chunk``."""
    book = phase_codebook(levels)
    for start in range(0, levels ** n, chunk):
        idx = np.arange(start, min(start + chunk, levels ** n))
        yield book[np.stack([(idx // levels ** k) % levels for k in range(n)], axis=1)]


def exhaustive_residual(h_cascaded, h_direct, levels=64, chunk=1 << 18):
    """``min |sum_n c_n h_c(n) + h_d|^2`` over unit-modulus coefficients.

    The first ``N - 1`` coefficients run over a phase codebook; the last is
    exact, since ``min_{|z|=1} |a + z h| = ||a| - |h||``.
    """
    h_cascaded = np.asarray(h_cascaded, dtype=complex)
    n = h_cascaded.size
    last = abs(h_cascaded[-1])
    if n == 1:
        return float((abs(h_direct) - last) ** 2)
    best = np.inf
    for c in _codeword_chunks(n - 1, levels, chunk):
        partial = np.abs(c @ h_cascaded[:-1] + h_direct)
        best = min(best, float(((partial - last) ** 2).min()))
    return best


def exhaustive_quadratic_min(H, levels=64):
    """``min u^H H u`` over discretized unit-modulus ``u``.

    The last entry is fixed to 1, which loses nothing: the objective is
    invariant to a common phase rotation and the codebook is closed under
    the rotations that map any level to 1.
    """
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    u = np.concatenate([_codewords(n - 1, levels), np.ones(((levels ** (n - 1)), 1))], axis=1)
    vals = np.einsum("ki,ij,kj->k", u.conj(), H, u).real
    return float(vals.min())


def _best_on_circle(a, b, r):
    """``max Re(conj(a) z)`` over ``|z| = 1`` with ``Re(conj(b) z) >= r``, elementwise.

    The maximizer is ``z = a/|a|`` when that point is feasible; otherwise it
    is one of the two circle points where the constraint is tight. Returns
    ``-inf`` where no point is feasible.
    """
    ma, mb = np.abs(a), np.abs(b)
    ta, tb = np.angle(a), np.angle(b)
    r = np.asarray(r, dtype=float)
    free_ok = mb * np.cos(ta - tb) >= r
    half = np.arccos(np.clip(r / mb, -1.0, 1.0)) if mb > 0 else np.zeros_like(r)
    edge = ma * np.maximum(np.cos(tb + half - ta), np.cos(tb - half - ta))
    return np.where(r > mb, -np.inf, np.where(free_ok, ma, edge))


def exhaustive_p23(w_ss, w_pp, d_ss, d_pp, gamma_th, levels=256, chunk=1 << 18):
    """Near-global maximum of ``2 Re(w_ss^H u) + d_ss`` s.t. ``2 Re(w_pp^H u) + d_pp >= gamma_th``.

    All but the last entry run over a phase codebook; the last entry is
    solved exactly on the unit circle for each codeword. Without that, the
    codebook would lose accuracy to first order whenever the constraint is
    active. Returns ``-inf`` when nothing is feasible.
    """
    w_ss = np.asarray(w_ss, dtype=complex)
    w_pp = np.asarray(w_pp, dtype=complex)
    n = w_ss.size
    if n == 1:
        best = _best_on_circle(w_ss[0], w_pp[0], (gamma_th - d_pp) / 2.0)
        return float(2.0 * best + d_ss)
    best = -np.inf
    for u in _codeword_chunks(n - 1, levels, chunk):
        obj = 2.0 * (u @ w_ss[:-1].conj()).real + d_ss
        con = 2.0 * (u @ w_pp[:-1].conj()).real + d_pp
        last = _best_on_circle(w_ss[-1], w_pp[-1], (gamma_th - con) / 2.0)
        best = max(best, float(np.max(obj + 2.0 * last)))
    return best


def exhaustive_rate(ch, params, levels=64, chunk=1 << 16):
    """Best SU rate over discretized reflections with the exact optimal power.

    Returns ``(rate, coefficients)``; ``(0.0, None)`` when no codeword lets
    the PU meet its target.
    """
    n = ch.n_elements
    casc = np.stack([ch.cascaded(link) for link in LINKS], axis=1)
    direct = np.array([ch.direct(link) for link in LINKS])
    best_rate, best_c = -1.0, None
    for c in _codeword_chunks(n, levels, chunk):
        alpha = np.abs(c @ casc + direct) ** 2
        a_pp, a_ps, a_sp, a_ss = alpha.T
        headroom = params.p_p * a_pp / params.gamma_th - params.sigma2_p
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(a_sp > 0, headroom / a_sp, np.where(headroom >= 0, params.p_max, 0.0))
        p = np.clip(p, 0.0, params.p_max)
        gamma_p = params.p_p * a_pp / (p * a_sp + params.sigma2_p)
        feasible = gamma_p >= params.gamma_th * (1.0 - FEASIBILITY_RTOL)
        rate = np.where(feasible, np.log2(1.0 + p * a_ss / (params.p_p * a_ps + params.sigma2_s)), -1.0)
        k = int(np.argmax(rate))
        if rate[k] > best_rate:
            best_rate, best_c = float(rate[k]), c[k]
    return (best_rate, best_c) if best_c is not None and best_rate >= 0 else (0.0, None)


def random_instance(rng, n, *, p_max=1.0, gamma_th_db=None):
    """Random channel set and parameters with a PU that is feasible with the ST silent.

    Unit-variance Rayleigh links; the direct ST->PR and PT->SR links are
    made comparable to the desired ones so both constraints matter.
    """
    def cn(size=None):
        return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)

    while True:
        ch = ChannelSet(
            h_pp=cn(), h_ps=0.7 * cn(), h_sp=0.7 * cn(), h_ss=cn(),
            h_pr=0.5 * cn(n), h_sr=0.5 * cn(n), h_rp=0.5 * cn(n), h_rs=0.5 * cn(n),
        )
        th_db = rng.uniform(0.0, 15.0) if gamma_th_db is None else gamma_th_db
        params = SystemParams(p_p=1.0, p_max=p_max, sigma2_p=0.1, sigma2_s=0.1,
                              gamma_th=10.0 ** (th_db / 10.0), n_elements=n)
        best_pp = (np.abs(ch.cascaded("pp")).sum() + abs(ch.h_pp)) ** 2
        if params.p_p * best_pp / params.sigma2_p >= params.gamma_th * 1.05:
            return ch, params


def check_power_oracle(rng, count=1000, points=100_001):
    """Largest disagreement between ``optimal_power`` and the grid, in grid steps."""
    worst = 0.0
    for _ in range(count):
        params = SystemParams(
            p_p=10.0 ** rng.uniform(-2, 1), p_max=10.0 ** rng.uniform(-3, 1),
            sigma2_p=10.0 ** rng.uniform(-3, 0), sigma2_s=1.0,
            gamma_th=10.0 ** rng.uniform(-1, 2), n_elements=1,
        )
        a_pp, a_sp = 10.0 ** rng.uniform(-2, 1), 10.0 ** rng.uniform(-3, 1)
        p_grid, step = grid_power(a_pp, a_sp, params, points)
        worst = max(worst, abs(optimal_power(a_pp, a_sp, params) - p_grid) / step)
    return worst

