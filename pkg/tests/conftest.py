import os

import numpy as np
import pytest

from entchain import ItebdConfig, ModelSpec, find_ground_state


@pytest.fixture(scope="session", autouse=True)
def ed_cache(tmp_path_factory):
    """Point the exact-diagonalization disk cache at a session-local directory."""
    path = tmp_path_factory.mktemp("ed_cache")
    old = os.environ.get("ENTANGLE_CACHE_DIR")
    os.environ["ENTANGLE_CACHE_DIR"] = str(path)
    yield str(path)
    if old is None:
        os.environ.pop("ENTANGLE_CACHE_DIR", None)
    else:
        os.environ["ENTANGLE_CACHE_DIR"] = old


# Solver settings used for converged-state fixtures across the suite.
SOLVER_PRESETS = {
    "ising": dict(noise=0.0),
    "xyz": dict(noise=1e-2),
    "xxz": dict(noise=1e-2),
    "spin1": dict(noise=1e-2),
}


def make_spec(model: str, value: float) -> ModelSpec:
    if model == "ising":
        return ModelSpec.transverse_ising(jx=1.0, h=value)
    if model == "xyz":
        return ModelSpec.xyz(j=1.0, gamma=0.5, delta=value)
    if model == "xxz":
        return ModelSpec.xxz(j=1.0, delta=value)
    if model == "spin1":
        return ModelSpec.spin1_ising(jz=1.0, k=value)
    raise ValueError(model)


@pytest.fixture(scope="session")
def ground():
    """Memoized converged iMPS ground states shared across test modules."""
    cache = {}

    def solve(model: str, value: float, D: int = 10, seed: int = 0,
              tau_schedule=None):
        key = (model, value, D, seed, tau_schedule)
        if key not in cache:
            kwargs = dict(SOLVER_PRESETS[model])
            if tau_schedule is not None:
                kwargs["tau_schedule"] = tau_schedule
            cfg = ItebdConfig(D=D, seed=seed, **kwargs)
            cache[key] = find_ground_state(make_spec(model, value), cfg)
        return cache[key]

    return solve


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def assert_rdm_wellformed(rho: np.ndarray, herm_tol=1e-10, trace_tol=1e-10,
                          psd_tol=-1e-9):
    assert np.abs(rho - rho.conj().T).max() <= herm_tol
    assert abs(np.trace(rho) - 1.0) <= trace_tol
    assert np.linalg.eigvalsh(rho).min() >= psd_tol
