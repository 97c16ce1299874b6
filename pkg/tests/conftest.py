import numpy as np
import pytest

from irs_spectrum.channel import ChannelSet
from irs_spectrum.system import SystemParams

ACCEPTANCE_LINES = []


def cn(rng, size=None):
    """CN(0, 1) samples."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def random_hermitian(rng, n, psd=False):
    G = cn(rng, (n, n))
    return G @ G.conj().T if psd else (G + G.conj().T) / 2


def random_channels(rng, n, scale=0.5):
    return ChannelSet(
        h_pp=cn(rng), h_ps=cn(rng), h_sp=cn(rng), h_ss=cn(rng),
        h_pr=scale * cn(rng, n), h_sr=scale * cn(rng, n),
        h_rp=scale * cn(rng, n), h_rs=scale * cn(rng, n),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params():
    return SystemParams(p_p=1.0, p_max=2.0, sigma2_p=0.1, sigma2_s=0.1, gamma_th=3.0, n_elements=4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
