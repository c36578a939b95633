"""Alternating block solver for the robust rate-splitting precoder design.

Each outer iteration refreshes filters and weights, solves the private and
common precoder blocks in closed form, then rebalances the common/private
power split by bisection on the scalar split variable t.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rates import (
    PrecoderSet,
    all_bundles,
    checked_real,
    cholesky_solve,
    f1_from_bundles,
    weights,
)


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 100
    obj_tol: float = 1e-4
    bisect_tol: float = 1e-8
    t_clamp: float = 1e-6
    track_trace: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not (0.0 < self.obj_tol < 1e-1) or not (0.0 < self.bisect_tol < 1e-1):
            raise ValueError("tolerances must lie in (0, 1e-1)")
        if not (0.0 < self.t_clamp <= 1e-3):
            raise ValueError("t_clamp must lie in (0, 1e-3]")


@dataclass(frozen=True)
class SolverState:
    P: PrecoderSet
    t: float
    objective_trace: list
    iterations: int
    converged: bool
    boundary_hits: tuple = field(default=())


def _frob(X) -> float:
    return float(np.linalg.norm(X))


def _split(Pp_cat, K):
    return [np.ascontiguousarray(block) for block in np.split(Pp_cat, K, axis=1)]


def initialize(H_hat, rho, sigma_e2_rep):
    """Power split t' = min(1, 1/(rho sigma_e2)) with a singular-space common
    precoder and equal-power matched private precoders; exact total power rho."""
    K = len(H_hat)
    M, N = H_hat[0].shape
    if M < N:
        raise ValueError("need at least as many transmit antennas as receive antennas")
    stack = np.concatenate(H_hat, axis=1)
    if _frob(stack) < 1e-12:
        raise ValueError("degenerate all-zero channel estimate")
    t0 = 1.0 if sigma_e2_rep == 0.0 else min(1.0, 1.0 / (rho * sigma_e2_rep))
    if t0 >= 1.0:
        Pc = np.zeros((M, N), dtype=complex)
    else:
        left, _, _ = np.linalg.svd(stack, full_matrices=False)
        Pc = np.sqrt(rho * (1.0 - t0) / N) * left[:, :N]
    Pp = []
    for Hk in H_hat:
        norms = np.linalg.norm(Hk, axis=0)
        if np.any(norms < 1e-12):
            raise ValueError("degenerate channel estimate column")
        Pp.append(np.sqrt(rho * t0 / (K * N)) * (Hk / norms))
    return PrecoderSet(Pc=Pc, Pp=Pp, rho=float(rho)), t0


def _private_system(H_hat, sigma_e2, Dp_list, Wp_list):
    """Quadratic/linear terms of the private-block subproblem."""
    M = H_hat[0].shape[0]
    B = np.zeros((M, M), dtype=complex)
    V_blocks = []
    tr_wdd = 0.0
    omega = 0.0
    for Hk, s2, Dp, Wp in zip(H_hat, sigma_e2, Dp_list, Wp_list):
        T = Hk @ Dp.conj().T
        B += T @ Wp @ T.conj().T
        V_blocks.append(T @ Wp)
        quad = checked_real(np.trace(Wp @ Dp @ Dp.conj().T))
        tr_wdd += quad
        omega += s2 * quad
    B = 0.5 * (B + B.conj().T) + omega * np.eye(M)
    return B, np.concatenate(V_blocks, axis=1), tr_wdd


def _common_system(H_hat, sigma_e2, Dc_list, Wc_list):
    """Quadratic/linear terms of the common-block subproblem."""
    M = H_hat[0].shape[0]
    A = np.zeros((M, M), dtype=complex)
    U = np.zeros((M, H_hat[0].shape[1]), dtype=complex)
    tr_wdd = 0.0
    omega = 0.0
    for Hk, s2, Dc, Wc in zip(H_hat, sigma_e2, Dc_list, Wc_list):
        T = Hk @ Dc.conj().T
        A += T @ Wc @ T.conj().T
        U += T @ Wc
        quad = checked_real(np.trace(Wc @ Dc @ Dc.conj().T))
        tr_wdd += quad
        omega += s2 * quad
    A = 0.5 * (A + A.conj().T) + omega * np.eye(M)
    return A, U, tr_wdd


def solve_p1(H_hat, sigma_e2, Dp_list, Wp_list, rho, t_star, sigma_n2):
    """Closed-form private precoders at power rho*t_star, concatenated M x NK."""
    if not (0.0 < t_star <= 1.0):
        raise ValueError("t_star must lie in (0, 1]")
    B, V, tr_wdd = _private_system(H_hat, sigma_e2, Dp_list, Wp_list)
    lam1 = sigma_n2 * tr_wdd / (rho * t_star)
    if lam1 <= 0.0:
        raise ValueError("non-positive private multiplier; filters are degenerate")
    Pp_bar = cholesky_solve(B + lam1 * np.eye(B.shape[0]), V)
    return np.sqrt(rho * t_star) * Pp_bar / _frob(Pp_bar)


def solve_p2(H_hat, sigma_e2, Dc_list, Wc_list, Pp_cat, rho, t_star, sigma_n2, t_clamp=1e-6):
    """Closed-form common precoder at power rho*(1 - t_star), M x N."""
    M, N = H_hat[0].shape
    if t_star >= 1.0 - t_clamp:
        return np.zeros((M, N), dtype=complex)
    A, U, tr_wdd = _common_system(H_hat, sigma_e2, Dc_list, Wc_list)
    cross = checked_real(np.trace(A @ Pp_cat @ Pp_cat.conj().T))
    lam2 = (sigma_n2 * tr_wdd + cross) / (rho * (1.0 - t_star))
    if lam2 <= 0.0:
        raise ValueError("non-positive common multiplier; filters are degenerate")
    Pc_bar = cholesky_solve(A + lam2 * np.eye(M), U)
    return np.sqrt(rho * (1.0 - t_star)) * Pc_bar / _frob(Pc_bar)


def solve_p3(U, V, A, B, Pc_norm, Pp_norm, rho, cfg: SolverConfig):
    """Root of the power-split derivative on [t_clamp, 1 - t_clamp] by bisection.

    Returns (t_star, flag) where flag is '' for an interior root and 'low' or
    'high' when the derivative does not change sign inside the clamped interval.
    """
    a = checked_real(np.trace(U.conj().T @ Pc_norm))
    b = checked_real(np.trace(V.conj().T @ Pp_norm))
    if a <= 0.0 or b <= 0.0:
        raise ValueError("filter/precoder alignment traces must be positive")
    c = rho * (
        checked_real(np.trace((A + B) @ Pp_norm @ Pp_norm.conj().T))
        - checked_real(np.trace(A @ Pc_norm @ Pc_norm.conj().T))
    )

    def deriv(t):
        return np.sqrt(rho / (1.0 - t)) * a - np.sqrt(rho / t) * b + c

    lo, hi = cfg.t_clamp, 1.0 - cfg.t_clamp
    d_lo, d_hi = deriv(lo), deriv(hi)
    if d_lo >= 0.0:
        return lo, "low"
    if d_hi <= 0.0:
        return hi, "high"
    # derivative is strictly increasing in t, so the sign change is unique
    while hi - lo > cfg.bisect_tol:
        mid = 0.5 * (lo + hi)
        if deriv(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), ""


def _objective(H_hat, sigma_e2, P, sigma_n2):
    return f1_from_bundles(all_bundles(H_hat, sigma_e2, P, sigma_n2))


def _check_power(P: PrecoderSet, rho, where):
    if abs(P.power() - rho) > 1e-9 * rho:
        raise RuntimeError(f"{where}: power constraint violated ({P.power():.12g} vs {rho:.12g})")


def run(H_hat, sigma_e2, rho, sigma_n2, cfg: SolverConfig = SolverConfig(), force_sdma=False):
    """Alternating descent on the design objective.

    Accepts a sweep only when it does not increase the objective; the first
    sweep whose relative improvement falls below obj_tol (or which would
    increase the objective, in which case it is discarded) ends the run.
    `force_sdma` pins the common precoder to zero and t to 1 throughout.
    """
    K = len(H_hat)
    if len(sigma_e2) != K:
        raise ValueError("per-user error variance count does not match user count")
    if rho <= 0 or sigma_n2 <= 0:
        raise ValueError("rho and sigma_n2 must be positive")
    if not all(np.all(np.isfinite(Hk)) for Hk in H_hat):
        raise ValueError("channel estimates contain non-finite entries")
    P, t = initialize(H_hat, rho, max(sigma_e2))
    if force_sdma and t < 1.0:
        scale = np.sqrt(rho / sum(float(np.sum(np.abs(Q) ** 2)) for Q in P.Pp))
        P = PrecoderSet(
            Pc=np.zeros_like(P.Pc), Pp=[scale * Q for Q in P.Pp], rho=float(rho)
        )
        t = 1.0
    sdma_locked = t >= 1.0
    _check_power(P, rho, "initialization")

    f_cur = _objective(H_hat, sigma_e2, P, sigma_n2)
    trace = [f_cur]
    converged = False
    boundary_hits = []
    iterations = 0

    for it in range(cfg.max_iters):
        iterations = it + 1
        try:
            bundles = all_bundles(H_hat, sigma_e2, P, sigma_n2)
            wts = weights(bundles)
            B, V, tr_p = _private_system(
                H_hat, sigma_e2, [bb.Dp for bb in bundles], [w.Wp for w in wts]
            )
            lam1 = sigma_n2 * tr_p / (rho * t)
            if lam1 <= 0.0:
                raise ValueError("non-positive private multiplier")
            Pp_bar = cholesky_solve(B + lam1 * np.eye(B.shape[0]), V)
            Pp_cat = np.sqrt(rho * t) * Pp_bar / _frob(Pp_bar)

            if sdma_locked:
                P_new = PrecoderSet(Pc=np.zeros_like(P.Pc), Pp=_split(Pp_cat, K), rho=float(rho))
                t_new = 1.0
            else:
                P_mid = PrecoderSet(Pc=P.Pc, Pp=_split(Pp_cat, K), rho=float(rho))
                bundles2 = all_bundles(H_hat, sigma_e2, P_mid, sigma_n2)
                wts2 = weights(bundles2)
                A, U, tr_c = _common_system(
                    H_hat, sigma_e2, [bb.Dc for bb in bundles2], [w.Wc for w in wts2]
                )
                cross = checked_real(np.trace(A @ Pp_cat @ Pp_cat.conj().T))
                lam2 = (sigma_n2 * tr_c + cross) / (rho * (1.0 - t))
                Pc_bar = cholesky_solve(A + lam2 * np.eye(A.shape[0]), U)
                pc_scale = _frob(Pc_bar)
                if pc_scale < 1e-12:
                    # common direction collapsed: continue as an all-private design
                    sdma_locked = True
                    boundary_hits.append((it, "sdma"))
                    scale = np.sqrt(rho) / _frob(Pp_cat)
                    P_new = PrecoderSet(
                        Pc=np.zeros_like(P.Pc), Pp=_split(scale * Pp_cat, K), rho=float(rho)
                    )
                    t_new = 1.0
                else:
                    Pc_new = np.sqrt(rho * (1.0 - t)) * Pc_bar / pc_scale
                    Pc_norm = Pc_new / _frob(Pc_new)
                    Pp_norm = Pp_cat / _frob(Pp_cat)
                    t_new, flag = solve_p3(U, V, A, B, Pc_norm, Pp_norm, rho, cfg)
                    if flag:
                        boundary_hits.append((it, flag))
                    P_new = PrecoderSet(
                        Pc=np.sqrt(rho * (1.0 - t_new)) * Pc_norm,
                        Pp=_split(np.sqrt(rho * t_new) * Pp_norm, K),
                        rho=float(rho),
                    )
            _check_power(P_new, rho, f"iteration {it}")
            f_new = _objective(H_hat, sigma_e2, P_new, sigma_n2)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise RuntimeError(f"iteration {it}: {exc}") from exc

        if f_new > f_cur:
            # the sweep overshot a fixed point; keep the previous iterate
            converged = True
            break
        P, t = P_new, t_new
        if cfg.track_trace:
            trace.append(f_new)
        else:
            trace = [trace[0], f_new]
        if f_cur - f_new < cfg.obj_tol * abs(f_cur):
            f_cur = f_new
            converged = True
            break
        f_cur = f_new

    if not sdma_locked and t > 1.0 - 1e-4:
        # nearly all-private solution: drop the residual common component
        scale = np.sqrt(rho / sum(float(np.sum(np.abs(Q) ** 2)) for Q in P.Pp))
        P = PrecoderSet(Pc=np.zeros_like(P.Pc), Pp=[scale * Q for Q in P.Pp], rho=float(rho))
        t = 1.0
        _check_power(P, rho, "final rebalance")

    return SolverState(
        P=P,
        t=float(t),
        objective_trace=trace,
        iterations=iterations,
        converged=converged,
        boundary_hits=tuple(boundary_hits),
    )
