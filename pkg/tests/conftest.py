# Shared fixtures and small builders used across the test modules.
from __future__ import annotations

import numpy as np
import pytest

from rsmimo.channels import complex_gaussian
from rsmimo.rates import PrecoderSet
from rsmimo.solver import SolverConfig, run


_VERDICTS: list[str] = []


def record_verdict(line: str) -> None:
    """Queue a one-line verdict for the end-of-run summary."""
    _VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in _VERDICTS:
            terminalreporter.write_line(line)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_instance(rng, M=8, N=2, K=4, sigma_e2=0.1):
    """Random channel estimates plus a uniform error-variance list."""
    H_hat = [complex_gaussian(rng, (M, N), 1.0 - sigma_e2) for _ in range(K)]
    return H_hat, [sigma_e2] * K


def random_precoders(rng, M=8, N=2, K=4, rho=100.0, t=0.5):
    """Random precoder set scaled so the total power equals rho exactly."""
    Pc = complex_gaussian(rng, (M, N))
    Pc *= np.sqrt(rho * (1.0 - t)) / np.linalg.norm(Pc)
    Pp = []
    for _ in range(K):
        X = complex_gaussian(rng, (M, N))
        Pp.append(X)
    cat = np.concatenate(Pp, axis=1)
    scale = np.sqrt(rho * t) / np.linalg.norm(cat)
    Pp = [scale * X for X in Pp]
    return PrecoderSet(Pc=Pc, Pp=Pp, rho=rho)


@pytest.fixture(scope="session")
def converged_states():
    """A few solved instances reused by the solver and baseline tests."""
    out = []
    for seed in range(3):
        rng = make_rng(1000 + seed)
        H_hat, sigma_e2 = random_instance(rng, M=8, N=2, K=4, sigma_e2=0.1)
        state = run(H_hat, sigma_e2, rho=100.0, sigma_n2=1.0,
                    cfg=SolverConfig(max_iters=300, obj_tol=1e-7))
        out.append((H_hat, sigma_e2, 100.0, state))
    return out
