"""Channel realizations: path loss, Rician fading, UPA steering, cascaded links."""

from dataclasses import dataclass, field

import numpy as np

from .numerics import as_cvector

# Link classes: ground links among P1/P2/S1/S2, IRS links to the hotspot
# pair (P1, S1) and IRS links to the far pair (P2, S2).
LINK_CLASSES = ("ground", "irs_near", "irs_far")
NEAR_NODES = ("p1", "s1")
FAR_NODES = ("p2", "s2")


@dataclass(frozen=True)
class FadingSpec:
    path_loss_exponent: float
    rician_factor: float = 0.0  # math.inf for pure LoS
    reference_loss_db: float = -30.0
    reference_distance: float = 1.0

    def __post_init__(self):
        if not 1.5 <= self.path_loss_exponent <= 6.0:
            raise ValueError(f"path_loss_exponent {self.path_loss_exponent} outside [1.5, 6]")
        if not self.rician_factor >= 0.0:
            raise ValueError(f"rician_factor must be >= 0, got {self.rician_factor}")
        if not self.reference_distance > 0.0:
            raise ValueError("reference_distance must be positive")


def default_fading():
    """Per-class fading used in the simulations: LoS to the hotspot, Rayleigh elsewhere."""
    return {
        "ground": FadingSpec(3.0, 0.0),
        "irs_near": FadingSpec(2.0, np.inf),
        "irs_far": FadingSpec(3.0, 0.0),
    }


@dataclass(frozen=True)
class NodeGeometry:
    """Node positions in meters plus the IRS panel description.

    ``pu_tx`` / ``su_tx`` name which node of each pair transmits; the other
    one receives.
    """

    p1: np.ndarray
    p2: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    irs_position: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 2.0]))
    irs_normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    rows: int = 6
    cols: int = 10
    spacing: float = 0.15
    wavelength: float = 0.4
    pu_tx: str = "p2"
    su_tx: str = "s2"

    def __post_init__(self):
        for name in ("p1", "p2", "s1", "s2", "irs_position", "irs_normal"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(3)
            object.__setattr__(self, name, arr)
        normal = self.irs_normal / np.linalg.norm(self.irs_normal)
        object.__setattr__(self, "irs_normal", normal)
        if self.pu_tx not in ("p1", "p2") or self.su_tx not in ("s1", "s2"):
            raise ValueError(f"bad transmitter roles {self.pu_tx!r}, {self.su_tx!r}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("IRS panel needs at least one row and column")
        if self.spacing <= 0 or self.wavelength <= 0:
            raise ValueError("spacing and wavelength must be positive")
        points = {n: getattr(self, n) for n in ("p1", "p2", "s1", "s2", "irs_position")}
        names = list(points)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if np.linalg.norm(points[a] - points[b]) <= 0.0:
                    raise ValueError(f"nodes {a} and {b} coincide")

    @property
    def n_elements(self):
        return self.rows * self.cols

    def node(self, name):
        return getattr(self, name)

    @property
    def roles(self):
        """Node names as (PT, PR, ST, SR)."""
        pr = "p1" if self.pu_tx == "p2" else "p2"
        sr = "s1" if self.su_tx == "s2" else "s2"
        return self.pu_tx, pr, self.su_tx, sr


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization.

    Scalars are the direct links (PT->PR, PT->SR, ST->PR, ST->SR). Vectors
    follow the ``h^H`` row convention: the physical transmitter->IRS row is
    ``h_pr.conj()``, and likewise for the IRS->receiver links.
    """

    h_pp: complex
    h_ps: complex
    h_sp: complex
    h_ss: complex
    h_pr: np.ndarray
    h_sr: np.ndarray
    h_rp: np.ndarray
    h_rs: np.ndarray

    def __post_init__(self):
        n = None
        for name in ("h_pr", "h_sr", "h_rp", "h_rs"):
            vec = as_cvector(getattr(self, name))
            object.__setattr__(self, name, vec)
            if n is None:
                n = vec.size
            elif vec.size != n:
                raise ValueError("IRS channel vectors differ in length")
        for name in ("h_pp", "h_ps", "h_sp", "h_ss"):
            val = complex(getattr(self, name))
            if not np.isfinite(val):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, val)

    @property
    def n_elements(self):
        return self.h_pr.size

    def cascaded(self, link):
        """Cascaded vector for ``link`` in {'pp', 'ps', 'sp', 'ss'}."""
        src = {"p": self.h_pr, "s": self.h_sr}[link[0]]
        dst = {"p": self.h_rp, "s": self.h_rs}[link[1]]
        return cascaded_channel(src, dst)

    def direct(self, link):
        return getattr(self, f"h_{link}")

    def equals(self, other):
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("h_pp", "h_ps", "h_sp", "h_ss", "h_pr", "h_sr", "h_rp", "h_rs")
        )


def path_loss(distance, spec):
    """Amplitude gain ``sqrt(L0 * (d / d0)^-c)``."""
    if not distance > 0:
        raise ValueError(f"distance must be positive, got {distance}")
    l0 = 10.0 ** (spec.reference_loss_db / 10.0)
    return float(np.sqrt(l0 * (distance / spec.reference_distance) ** (-spec.path_loss_exponent)))


def complex_gaussian(rng, size):
    """CN(0, 1) draws: real and imaginary parts each with variance 1/2."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def rician_sample(los, rician_factor, rng):
    """Mix a unit-modulus LoS vector with CN(0,1) scattering at factor ``beta``."""
    los = np.asarray(los, dtype=complex).reshape(-1)
    if rician_factor < 0:
        raise ValueError(f"rician_factor must be >= 0, got {rician_factor}")
    if np.isinf(rician_factor):
        return los.copy()
    beta = float(rician_factor)
    nlos = complex_gaussian(rng, los.size)
    return np.sqrt(beta / (1.0 + beta)) * los + np.sqrt(1.0 / (1.0 + beta)) * nlos


def _panel_axes(normal):
    up = np.array([0.0, 0.0, 1.0])
    horizontal = np.cross(normal, up)
    if np.linalg.norm(horizontal) < 1e-9:
        horizontal = np.array([1.0, 0.0, 0.0])
    horizontal /= np.linalg.norm(horizontal)
    vertical = np.cross(horizontal, normal)
    return horizontal, vertical / np.linalg.norm(vertical)


def element_offsets(geometry, rows=None, cols=None, spacing=None):
    """Element positions relative to element (0, 0), row-major."""
    rows = geometry.rows if rows is None else rows
    cols = geometry.cols if cols is None else cols
    spacing = geometry.spacing if spacing is None else spacing
    horizontal, vertical = _panel_axes(geometry.irs_normal)
    r, c = np.divmod(np.arange(rows * cols), cols)
    return spacing * (c[:, None] * horizontal + r[:, None] * vertical)


def upa_los_vector(source_position, geometry, rows=None, cols=None, spacing=None, wavelength=None):
    """Planar-wavefront UPA response toward ``source_position``.

    Entry ``n`` is ``exp(j 2 pi / lambda * <offset_n, u>)`` with ``u`` the unit
    direction from the IRS reference element to the source.
    """
    wavelength = geometry.wavelength if wavelength is None else wavelength
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    direction = np.asarray(source_position, dtype=float) - geometry.irs_position
    dist = np.linalg.norm(direction)
    if dist == 0.0:
        raise ValueError("source coincides with the IRS reference point")
    offsets = element_offsets(geometry, rows, cols, spacing)
    return np.exp(1j * 2.0 * np.pi / wavelength * (offsets @ (direction / dist)))


def cascaded_channel(h_ir, h_rj):
    """``diag(h_rj^H) h_ir^*``, i.e. ``conj(h_rj) * conj(h_ir)`` entrywise."""
    h_ir = np.asarray(h_ir, dtype=complex).reshape(-1)
    h_rj = np.asarray(h_rj, dtype=complex).reshape(-1)
    if h_ir.shape != h_rj.shape:
        raise ValueError(f"length mismatch: {h_ir.size} vs {h_rj.size}")
    return np.conj(h_rj) * np.conj(h_ir)


# Fixed link order; the index selects the link's independent random stream.
_LINKS = ("h_pp", "h_ps", "h_sp", "h_ss", "h_pr", "h_sr", "h_rp", "h_rs")


def _link_rng(seed, index):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    child = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (index,))
    return np.random.default_rng(child)


def _irs_class(node):
    return "irs_near" if node in NEAR_NODES else "irs_far"


def generate_channels(geometry, fading, seed):
    """Draw every link of one realization.

    Parameters
    ----------
    geometry : NodeGeometry
    fading : dict
        ``FadingSpec`` per link class (see ``LINK_CLASSES``).
    seed : int or numpy.random.SeedSequence
        Each link gets its own child stream, so adding or reordering the
        draws of one link never perturbs another.
    """
    missing = set(LINK_CLASSES) - set(fading)
    if missing:
        raise ValueError(f"fading spec missing link classes {sorted(missing)}")
    pt, pr, st, sr = geometry.roles
    irs = geometry.irs_position
    n = geometry.n_elements
    out = {}
    ground = {"h_pp": (pt, pr), "h_ps": (pt, sr), "h_sp": (st, pr), "h_ss": (st, sr)}
    for name, (a, b) in ground.items():
        spec = fading["ground"]
        rng = _link_rng(seed, _LINKS.index(name))
        d = np.linalg.norm(geometry.node(a) - geometry.node(b))
        # single-antenna ground links have no array response: LoS phase 1
        g = rician_sample(np.ones(1), spec.rician_factor, rng)[0]
        out[name] = path_loss(d, spec) * g
    irs_links = {"h_pr": pt, "h_sr": st, "h_rp": pr, "h_rs": sr}
    for name, node in irs_links.items():
        spec = fading[_irs_class(node)]
        rng = _link_rng(seed, _LINKS.index(name))
        pos = geometry.node(node)
        d = np.linalg.norm(pos - irs)
        los = upa_los_vector(pos, geometry) if not spec.rician_factor == 0 else np.ones(n)
        out[name] = path_loss(d, spec) * rician_sample(los, spec.rician_factor, rng)
    return ChannelSet(**out)
