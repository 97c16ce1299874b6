"""Joint ST power control and IRS passive beamforming for spectrum sharing."""

from .ao import SolveResult, optimal_power, solve_ao, solve_p23
from .channel import ChannelSet, FadingSpec, NodeGeometry, default_fading, generate_channels
from .lowcomplexity import (DesignKind, interference_min, sdr_solve, signal_max_phases,
                            solve_design, solve_no_irs, solve_two_stage)
from .system import ReflectionVector, SystemParams, sinr_primary, sinr_secondary, su_rate

__version__ = "0.1.0"
