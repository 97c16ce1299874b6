"""Monte Carlo sweep over the ST power budget."""

import dataclasses
import logging
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..ao import solve_ao
from ..channel import generate_channels
from ..lowcomplexity import DesignKind, solve_no_irs, stage_one, stage_two
from .config import ALL_DESIGNS, AO_DESIGN
from .results import ResultRecord

log = logging.getLogger(__name__)

# spawn-key prefixes; the link streams use one-element keys
_SOLVER_STREAM = 1
_PLACEMENT_KEY = (2, 0)


def trial_seed(master_seed, trial):
    """64-bit seed of one trial, derived from the master seed alone."""
    state = np.random.SeedSequence([master_seed, trial]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def trial_geometry(config, seed):
    """The scenario geometry with the hotspot pair drawn from the trial's placement stream."""
    if config.placement is None:
        return config.geometry
    g = config.geometry
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=_PLACEMENT_KEY))
    p1, s1 = config.placement.sample(rng, g.irs_position, g.irs_normal)
    return dataclasses.replace(g, p1=p1, s1=s1)


def trial_channels(config, trial):
    """``(seed, ChannelSet)`` of one trial; every design of the trial shares it."""
    seed = trial_seed(config.master_seed, trial)
    geometry = trial_geometry(config, seed)
    return seed, generate_channels(geometry, config.fading, np.random.SeedSequence(seed))


def design_rng(seed, design):
    """Solver stream of ``design`` within a trial; independent of which designs run."""
    key = (_SOLVER_STREAM, ALL_DESIGNS.index(design))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _failed(config, design, p_max_dbm, trial, seed, elapsed):
    return ResultRecord(config.setup_id, design, p_max_dbm, trial, seed, 0.0, 0.0, 0.0, 0.0,
                        0, 0, False, elapsed)


def _record(config, res, p_max_dbm, trial, seed, elapsed):
    return ResultRecord(
        setup_id=config.setup_id,
        design=res.design,
        p_max_dbm=p_max_dbm,
        trial=trial,
        seed=seed,
        rate=float(res.rate),
        gamma_p=float(res.gamma_p),
        gamma_s=float(res.gamma_s),
        p_s=float(res.p_s),
        outer_iterations=int(res.outer_iterations),
        inner_iterations=int(res.inner_iterations),
        feasible=bool(res.feasible),
        wall_time_ms=elapsed,
    )


def run_trial(config, trial):
    """Every requested design at every sweep point on the trial's single channel draw.

    Stage one of the two-stage designs does not depend on the power budget,
    so it runs once per trial and is shared across the sweep.
    """
    seed, ch = trial_channels(config, trial)
    s = config.solver
    timing = config.record_timing
    out = []
    for design in config.designs:
        t0 = time.perf_counter()
        stage = None
        if design != AO_DESIGN and DesignKind(design).uses_irs:
            try:
                stage = stage_one(design, ch, design_rng(seed, design), s.randomization_count)
            except Exception as exc:  # recorded, never fatal
                log.warning("trial %d %s stage one failed: %s", trial, design, exc)
        setup_ms = (time.perf_counter() - t0) * 1e3
        for p_max_dbm in config.sweep_dbm:
            params = config.system_params(p_max_dbm)
            t0 = time.perf_counter()
            try:
                if design == AO_DESIGN:
                    rng = design_rng(seed, design)
                    v_init = None if s.init == "random" else np.ones(ch.n_elements, dtype=complex)
                    res = solve_ao(ch, params, v_init=v_init, rng=rng, restarts=s.restarts,
                                   outer_tol=s.outer_tol, max_outer=s.max_outer,
                                   inner_tol=s.inner_tol, max_inner=s.max_inner,
                                   bisection_tol=s.bisection_tol)
                elif not DesignKind(design).uses_irs:
                    res = solve_no_irs(design == DesignKind.NO_IRS_WITH_SIC.value, ch, params)
                elif stage is None:
                    raise RuntimeError("stage one unavailable")
                else:
                    res = stage_two(design, stage[0], ch, params, stage[1])
                elapsed = (time.perf_counter() - t0) * 1e3 + setup_ms if timing else None
                out.append(_record(config, res, p_max_dbm, trial, seed, elapsed))
            except Exception as exc:
                log.warning("trial %d %s at %g dBm failed: %s", trial, design, p_max_dbm, exc)
                elapsed = (time.perf_counter() - t0) * 1e3 + setup_ms if timing else None
                out.append(_failed(config, design, p_max_dbm, trial, seed, elapsed))
    return out


def _run_trial_args(args):
    return run_trial(*args)


def _order_key(config):
    design_pos = {d: i for i, d in enumerate(config.designs)}
    sweep_pos = {p: i for i, p in enumerate(config.sweep_dbm)}
    return lambda r: (design_pos[r.design], sweep_pos[r.p_max_dbm], r.trial)


def run_sweep(config, workers=None, progress=None):
    """All records of a scenario, ordered by (design, P_max, trial).

    Parameters
    ----------
    config : ScenarioConfig
    workers : int, optional
        Process count; defaults to ``config.workers``. Results do not depend
        on it.
    progress : callable, optional
        Called with the number of finished trials.
    """
    workers = config.workers if workers is None else int(workers)
    trials = range(config.trials)
    records = []
    if workers <= 1:
        for done, t in enumerate(trials, 1):
            records.extend(run_trial(config, t))
            if progress:
                progress(done)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for done, recs in enumerate(pool.map(_run_trial_args, ((config, t) for t in trials)), 1):
                records.extend(recs)
                if progress:
                    progress(done)
    records.sort(key=_order_key(config))
    return records
