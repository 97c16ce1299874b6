"""SINR/rate evaluation and the quadratic-form matrices of the beamforming problem.

Conventions
-----------
The IRS applies reflection coefficients ``c_n = exp(j theta_n)``. Formulas
are written with the column vector ``v = conj(c)`` so that the reflected
contribution of a cascaded channel is ``v^H h_irj = sum_n c_n h_irj(n)``.
The lifted vector is ``vt = [v; 1]`` (the common phase rotation is fixed
to zero), giving ``vt^H hbar = v^H h_irj + h_ij``.
"""

from dataclasses import dataclass

import numpy as np

from .numerics import outer_product

LINKS = ("pp", "ps", "sp", "ss")
UNIT_MODULUS_ATOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Linear-unit system parameters (watts, linear SINR)."""

    p_p: float
    p_max: float
    sigma2_p: float
    sigma2_s: float
    gamma_th: float
    n_elements: int

    def __post_init__(self):
        for name in ("p_p", "p_max", "sigma2_p", "sigma2_s", "gamma_th"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if int(self.n_elements) < 1:
            raise ValueError("n_elements must be >= 1")

    def with_p_max(self, p_max):
        return SystemParams(self.p_p, p_max, self.sigma2_p, self.sigma2_s, self.gamma_th, self.n_elements)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(watts):
    return 10.0 * np.log10(np.asarray(watts, dtype=float)) + 30.0


@dataclass(frozen=True)
class ReflectionVector:
    """Unit-modulus IRS reflection, stored as the formula vector ``v``."""

    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex).reshape(-1)
        if v.size == 0 or not np.allclose(np.abs(v), 1.0, rtol=0.0, atol=UNIT_MODULUS_ATOL):
            raise ValueError("reflection entries must be unit-modulus")
        object.__setattr__(self, "v", v)

    @classmethod
    def from_coefficients(cls, coefficients):
        return cls(np.conj(np.asarray(coefficients, dtype=complex)))

    @classmethod
    def from_phases(cls, theta):
        """Reflection with element phase shifts ``theta`` (radians)."""
        return cls.from_coefficients(np.exp(1j * np.asarray(theta, dtype=float)))

    @classmethod
    def from_lifted(cls, lifted):
        return cls(extract_reflection(lifted))

    @property
    def coefficients(self):
        return np.conj(self.v)

    @property
    def lifted(self):
        return lift(self.v)

    @property
    def n_elements(self):
        return self.v.size


def lift(v):
    return np.append(np.asarray(v, dtype=complex), 1.0 + 0.0j)


def extract_reflection(lifted):
    """``v_n = exp(j angle(vt_n / vt_{N+1}))``; drops the auxiliary entry."""
    lifted = np.asarray(lifted, dtype=complex)
    return np.exp(1j * np.angle(lifted[:-1] / lifted[-1]))


@dataclass(frozen=True)
class LiftedChannels:
    """``hbar_ij = [h_irj; h_ij]`` for each transmitter/receiver pair."""

    hbar_pp: np.ndarray
    hbar_ps: np.ndarray
    hbar_sp: np.ndarray
    hbar_ss: np.ndarray

    @classmethod
    def from_channels(cls, ch):
        return cls(*(np.append(ch.cascaded(link), ch.direct(link)) for link in LINKS))

    def __getitem__(self, link):
        return getattr(self, f"hbar_{link}")


def equivalent_gain(lifted_v, hbar):
    """``|vt^H hbar|^2``."""
    lifted_v = np.asarray(lifted_v, dtype=complex).reshape(-1)
    hbar = np.asarray(hbar, dtype=complex).reshape(-1)
    if lifted_v.shape != hbar.shape:
        raise ValueError(f"length mismatch: {lifted_v.size} vs {hbar.size}")
    return float(np.abs(np.vdot(lifted_v, hbar)) ** 2)


def gains(ch, refl=None):
    """Equivalent power gains ``alpha_ij`` for all four links.

    ``refl=None`` means no IRS: only the direct links contribute.
    """
    if refl is None:
        return {link: abs(ch.direct(link)) ** 2 for link in LINKS}
    v = refl.v if isinstance(refl, ReflectionVector) else np.asarray(refl, dtype=complex)
    return {link: abs(np.vdot(v, ch.cascaded(link)) + ch.direct(link)) ** 2 for link in LINKS}


def sinr_from_gains(alpha, p_s, params):
    gamma_p = params.p_p * alpha["pp"] / (p_s * alpha["sp"] + params.sigma2_p)
    gamma_s = p_s * alpha["ss"] / (params.p_p * alpha["ps"] + params.sigma2_s)
    return gamma_p, gamma_s


def sinr_primary(refl, p_s, ch, params):
    """PU SINR at the PR for reflection ``refl`` (None: no IRS) and ST power ``p_s``."""
    if p_s < 0:
        raise ValueError("p_s must be nonnegative")
    return sinr_from_gains(gains(ch, refl), p_s, params)[0]


def sinr_secondary(refl, p_s, ch, params):
    """SU SINR at the SR."""
    if p_s < 0:
        raise ValueError("p_s must be nonnegative")
    return sinr_from_gains(gains(ch, refl), p_s, params)[1]


def su_rate(gamma_s):
    """Achievable SU rate in bps/Hz."""
    if gamma_s < 0:
        raise ValueError("gamma_s must be nonnegative")
    return float(np.log2(1.0 + gamma_s))


@dataclass(frozen=True)
class QuadraticForms:
    A_ss: np.ndarray
    A_pp: np.ndarray
    B_ps: np.ndarray
    B_sp: np.ndarray


def build_AB(ch, p_s, params, lifted=None):
    """Numerator/denominator matrices of the two SINRs as ratios of quadratic forms.

    ``A_jj = p_j H_jj`` and ``B_ij = p_i H_ij + I sigma_j^2 / (N + 1)`` with
    ``H_ij = hbar_ij hbar_ij^H``. For any unit-modulus lifted vector the
    noise term recovers ``sigma_j^2`` because ``vt^H vt = N + 1``.
    """
    if p_s < 0:
        raise ValueError("p_s must be nonnegative")
    lifted = LiftedChannels.from_channels(ch) if lifted is None else lifted
    dim = ch.n_elements + 1
    eye = np.eye(dim)
    return QuadraticForms(
        A_ss=p_s * outer_product(lifted.hbar_ss),
        A_pp=params.p_p * outer_product(lifted.hbar_pp),
        B_ps=params.p_p * outer_product(lifted.hbar_ps) + eye * params.sigma2_s / dim,
        B_sp=p_s * outer_product(lifted.hbar_sp) + eye * params.sigma2_p / dim,
    )


def align_phases(h_cascaded, h_direct):
    """Coefficients adding every reflected path in phase with the direct link.

    With ``h_direct == 0`` the reference phase is 0.
    """
    h_cascaded = np.asarray(h_cascaded, dtype=complex)
    ref = np.angle(h_direct) if h_direct != 0 else 0.0
    return np.exp(1j * (ref - np.angle(h_cascaded)))
