"""Reference precoder designs the experiment harness can compare against."""

from __future__ import annotations

import numpy as np

from .rates import PrecoderSet
from .solver import SolverConfig, SolverState, run


def mrt_precoder(H_hat, rho) -> PrecoderSet:
    """Matched-filter private precoders with equal per-user power, no common stream."""
    K = len(H_hat)
    M, N = H_hat[0].shape
    Pp = []
    for Hk in H_hat:
        scale = float(np.linalg.norm(Hk))
        if scale < 1e-12:
            raise ValueError("degenerate all-zero channel estimate")
        Pp.append(np.sqrt(rho / K) * Hk / scale)
    return PrecoderSet(Pc=np.zeros((M, N), dtype=complex), Pp=Pp, rho=float(rho))


def rwmmse_precoder(H_hat, sigma_e2, rho, sigma_n2, cfg: SolverConfig = SolverConfig()) -> SolverState:
    """Robust weighted-MMSE design without the common stream (all power private)."""
    return run(H_hat, sigma_e2, rho, sigma_n2, cfg, force_sdma=True)


def _stub(name):
    def designer(H_hat, sigma_e2, rho, sigma_n2, cfg):
        raise NotImplementedError(
            f"scheme '{name}' is a registry placeholder; its construction is not part of this package"
        )

    return designer


def _design_proposed(H_hat, sigma_e2, rho, sigma_n2, cfg):
    st = run(H_hat, sigma_e2, rho, sigma_n2, cfg)
    return st.P, st.iterations, st.t, len(st.boundary_hits)


def _design_rwmmse(H_hat, sigma_e2, rho, sigma_n2, cfg):
    st = rwmmse_precoder(H_hat, sigma_e2, rho, sigma_n2, cfg)
    return st.P, st.iterations, st.t, len(st.boundary_hits)


def _design_mrt(H_hat, sigma_e2, rho, sigma_n2, cfg):
    return mrt_precoder(H_hat, rho), 0, 1.0, 0


SCHEMES = {
    "proposed": _design_proposed,
    "rwmmse": _design_rwmmse,
    "mrt": _design_mrt,
    "rbd": _stub("rbd"),
    "rrbd": _stub("rrbd"),
    "sns": _stub("sns"),
    "wmmse_saa": _stub("wmmse_saa"),
}

IMPLEMENTED = ("proposed", "rwmmse", "mrt")


def design_precoders(scheme, H_hat, sigma_e2, rho, sigma_n2, cfg: SolverConfig = SolverConfig()):
    """Dispatch by scheme name; returns (PrecoderSet, iterations, t, boundary_hits)."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme '{scheme}'; choose from {sorted(SCHEMES)}")
    return SCHEMES[scheme](H_hat, sigma_e2, rho, sigma_n2, cfg)
