"""Built-in verification suite: numerical identities, descent, and harness checks.

Each check is a pure function of its seed and sizes, returning a CheckResult;
run_all executes the whole battery and reports one pass/fail line per check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import channels
from .evaluate import ExperimentConfig, csv_text, run_experiment
from .rates import (
    PrecoderSet,
    all_bundles,
    checked_real,
    cholesky_solve,
    instantaneous_rates,
    mse_at_filters,
    mse_bundle,
    objective_f1,
    objective_f2,
    weights,
)
from .solver import SolverConfig, _common_system, _private_system, run, solve_p3


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _random_precoders(rng, M, N, K, rho) -> PrecoderSet:
    Pc = channels.complex_gaussian(rng, (M, N))
    Pp = [channels.complex_gaussian(rng, (M, N)) for _ in range(K)]
    raw = PrecoderSet(Pc=Pc, Pp=Pp, rho=float(rho))
    s = np.sqrt(rho / raw.power())
    return PrecoderSet(Pc=s * Pc, Pp=[s * Q for Q in Pp], rho=float(rho))


def check_mmse_inverse_identity(seed=0, instances=1000) -> CheckResult:
    """Inverse MMSE matrix equals identity plus the generalized SINR matrix."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    N = 2
    for _ in range(instances):
        M = int(rng.choice([4, 8]))
        K = int(rng.choice([2, 4]))
        sig2 = float(rng.choice([0.0, 0.1, 0.3]))
        rho = 10.0 ** rng.uniform(0.0, 4.0)
        H_hat = [channels.complex_gaussian(rng, (M, N)) for _ in range(K)]
        P = _random_precoders(rng, M, N, K, rho)
        k = int(rng.integers(K))
        b = mse_bundle(H_hat[k], sig2, P, 1.0, k)
        Hh = H_hat[k]
        Ppriv = P.private()
        Sc = Hh.conj().T @ P.Pc
        Jc = Hh.conj().T @ Ppriv @ Ppriv.conj().T @ Hh + (sig2 * P.power() + 1.0) * np.eye(N)
        sinr_c = Sc.conj().T @ np.linalg.solve(Jc, Sc)
        others = [P.Pp[j] for j in range(K) if j != k]
        Po = np.concatenate(others, axis=1)
        tr_priv = float(np.sum(np.abs(Ppriv) ** 2))
        Sp = Hh.conj().T @ P.Pp[k]
        Jp = Hh.conj().T @ Po @ Po.conj().T @ Hh + (sig2 * tr_priv + 1.0) * np.eye(N)
        sinr_p = Sp.conj().T @ np.linalg.solve(Jp, Sp)
        for Mz, sinr in ((b.Mc_mmse, sinr_c), (b.Mp_mmse, sinr_p)):
            lhs = np.linalg.inv(Mz)
            rel = np.linalg.norm(lhs - np.eye(N) - sinr) / np.linalg.norm(lhs)
            worst = max(worst, float(rel))
    elapsed = time.perf_counter() - start
    return CheckResult(
        "mmse-inverse-identity",
        worst <= 1e-8 and elapsed < 10.0,
        f"worst rel err {worst:.2e} over {instances} instances in {elapsed:.1f}s",
        elapsed,
    )


def check_quadratic_expectation(seed=1, draws=200_000) -> CheckResult:
    """Monte Carlo mean of Y^H X Y matches the closed-form diagonal expectation."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    M, N = 4, 2
    ok = True
    details = []
    from .rates import expectation_quadratic

    for label, variances in (
        ("uniform", np.full((M, N), 0.5)),
        ("varying", rng.uniform(0.05, 1.0, size=(M, N))),
    ):
        A = channels.complex_gaussian(rng, (M, M))
        X = 0.5 * (A + A.conj().T)
        expected = expectation_quadratic(variances, X)
        std = np.sqrt(variances / 2.0)
        Yr = rng.standard_normal((draws, M, N)) * std
        Yi = rng.standard_normal((draws, M, N)) * std
        Y = Yr + 1j * Yi
        Z = np.einsum("dmi,mn,dnj->dij", Y.conj(), X, Y)
        mean = Z.mean(axis=0)
        se_re = Z.real.std(axis=0, ddof=1) / np.sqrt(draws)
        se_im = Z.imag.std(axis=0, ddof=1) / np.sqrt(draws)
        d_re = np.abs(mean.real - expected.real)
        d_im = np.abs(mean.imag - expected.imag)
        case_ok = np.all(d_re <= 3.0 * se_re + 1e-12) and np.all(d_im <= 3.0 * se_im + 1e-12)
        ok = ok and bool(case_ok)
        details.append(f"{label} max |err|/se {max(np.max(d_re/ (se_re+1e-300)), np.max(d_im/(se_im+1e-300))):.2f}")
    elapsed = time.perf_counter() - start
    return CheckResult("quadratic-expectation", ok, "; ".join(details), elapsed)


def _fd_gradient(fun, P0: PrecoderSet, h=1e-6):
    """Central-difference gradient over every complex coordinate of every block."""
    blocks = [P0.Pc] + list(P0.Pp)
    K = len(P0.Pp)
    grads = []
    for bi in range(K + 1):
        g = np.zeros_like(blocks[bi])
        for i in range(blocks[bi].shape[0]):
            for j in range(blocks[bi].shape[1]):
                for direction in (1.0, 1j):
                    bumped = [b.copy() for b in blocks]
                    bumped[bi][i, j] += h * direction
                    fp = fun(PrecoderSet(Pc=bumped[0], Pp=bumped[1:], rho=P0.rho))
                    bumped = [b.copy() for b in blocks]
                    bumped[bi][i, j] -= h * direction
                    fm = fun(PrecoderSet(Pc=bumped[0], Pp=bumped[1:], rho=P0.rho))
                    g[i, j] += direction * (fp - fm) / (2.0 * h)
        grads.append(g)
    return np.concatenate(grads, axis=1)


def check_gradient_equality(seed=2, points=10) -> CheckResult:
    """Gradients of the smoothed objective and its weighted-MSE surrogate agree."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    M, N, K = 4, 2, 3
    rho, sn2 = 31.6, 1.0
    worst = 0.0
    for _ in range(points):
        sig2 = [float(rng.uniform(0.0, 0.2))] * K
        H_hat = [channels.complex_gaussian(rng, (M, N)) for _ in range(K)]
        P0 = _random_precoders(rng, M, N, K, rho)
        bundles = all_bundles(H_hat, sig2, P0, sn2)
        wts = weights(bundles)

        def f1(P):
            return objective_f1(H_hat, sig2, P, sn2)

        def f2(P):
            Mc, Mp = [], []
            for k in range(K):
                a, b = mse_at_filters(H_hat[k], sig2[k], P, sn2, k, bundles[k].Dc, bundles[k].Dp)
                Mc.append(a)
                Mp.append(b)
            return objective_f2(Mc, Mp, wts)

        g1 = _fd_gradient(f1, P0)
        g2 = _fd_gradient(f2, P0)
        worst = max(worst, float(np.max(np.abs(g1 - g2)) / np.max(np.abs(g1))))
    elapsed = time.perf_counter() - start
    return CheckResult(
        "gradient-equality",
        worst <= 1e-5 and elapsed < 60.0,
        f"worst coordinate rel diff {worst:.2e} over {points} points in {elapsed:.1f}s",
        elapsed,
    )


def check_descent(seed=3, runs=100) -> CheckResult:
    """Objective trace never increases; convergence behavior within budget."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    M, N, K = 8, 2, 4
    rho = 10.0 ** (20.0 / 10.0)
    increases = 0
    iters = []
    converged_fast = 0
    for _ in range(runs):
        chans = channels.sample_estimation_channel(M, N, K, [0.1] * K, rng)
        st = run(chans.H_hat, chans.sigma_e2, rho, 1.0)
        if np.any(np.diff(np.array(st.objective_trace)) > 1e-9):
            increases += 1
        iters.append(st.iterations)
        if st.converged and st.iterations < 50:
            converged_fast += 1
    med = float(np.median(iters))
    ok = increases == 0 and converged_fast >= 0.95 * runs and med <= 30.0
    elapsed = time.perf_counter() - start
    return CheckResult(
        "descent",
        ok,
        f"increases={increases}, {converged_fast}/{runs} converged <50 iters, median {med:.0f}",
        elapsed,
    )


def check_split_root(seed=4, iterates=100, grid_points=1_000_000) -> CheckResult:
    """Bisection root of the power-split derivative matches a dense grid scan."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    M, N, K = 8, 2, 4
    rho, sn2 = 100.0, 1.0
    cfg = SolverConfig()
    # the grid locates the root to half its spacing, so the gate scales with it
    spacing = (1.0 - 2.0 * cfg.t_clamp) / (grid_points - 1)
    gate = max(2e-6, 2.0 * spacing)
    worst_gap = 0.0
    sign_ok = True
    interior = 0
    for _ in range(iterates):
        sig2 = [0.1] * K
        chans = channels.sample_estimation_channel(M, N, K, sig2, rng)
        H_hat = chans.H_hat
        t = float(rng.uniform(0.2, 0.9))
        P = _random_precoders(rng, M, N, K, rho)
        bundles = all_bundles(H_hat, sig2, P, sn2)
        wts = weights(bundles)
        B, V, tr_p = _private_system(H_hat, sig2, [b.Dp for b in bundles], [w.Wp for w in wts])
        lam1 = sn2 * tr_p / (rho * t)
        Pp_bar = cholesky_solve(B + lam1 * np.eye(M), V)
        Pp_cat = np.sqrt(rho * t) * Pp_bar / np.linalg.norm(Pp_bar)
        P_mid = PrecoderSet(Pc=P.Pc, Pp=[q for q in np.split(Pp_cat, K, axis=1)], rho=rho)
        bundles2 = all_bundles(H_hat, sig2, P_mid, sn2)
        wts2 = weights(bundles2)
        A, U, tr_c = _common_system(H_hat, sig2, [b.Dc for b in bundles2], [w.Wc for w in wts2])
        cross = checked_real(np.trace(A @ Pp_cat @ Pp_cat.conj().T))
        lam2 = (sn2 * tr_c + cross) / (rho * (1.0 - t))
        Pc_bar = cholesky_solve(A + lam2 * np.eye(M), U)
        Pc_norm = Pc_bar / np.linalg.norm(Pc_bar)
        Pp_norm = Pp_cat / np.linalg.norm(Pp_cat)
        t_star, flag = solve_p3(U, V, A, B, Pc_norm, Pp_norm, rho, cfg)
        # independent dense evaluation of the same derivative
        a = checked_real(np.trace(U.conj().T @ Pc_norm))
        bb = checked_real(np.trace(V.conj().T @ Pp_norm))
        c = rho * (
            checked_real(np.trace((A + B) @ Pp_norm @ Pp_norm.conj().T))
            - checked_real(np.trace(A @ Pc_norm @ Pc_norm.conj().T))
        )
        ts = np.linspace(cfg.t_clamp, 1.0 - cfg.t_clamp, grid_points)
        dv = np.sqrt(rho / (1.0 - ts)) * a - np.sqrt(rho / ts) * bb + c
        if dv[0] >= 0.0 or dv[-1] <= 0.0:
            sign_ok = False
            continue
        interior += 1
        idx = int(np.argmax(dv >= 0.0))
        t_grid = 0.5 * (ts[idx - 1] + ts[idx])
        worst_gap = max(worst_gap, abs(t_star - t_grid))
        if flag:
            sign_ok = False
    ok = sign_ok and interior == iterates and worst_gap <= gate
    elapsed = time.perf_counter() - start
    return CheckResult(
        "split-root",
        ok,
        f"{interior}/{iterates} interior roots, worst |bisect-grid| {worst_gap:.2e}",
        elapsed,
    )


def check_power_conservation(seed=5, runs=50) -> CheckResult:
    """Every emitted precoder set carries exactly the power budget."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    from .baselines import design_precoders

    worst = 0.0
    for i in range(runs):
        M, N, K = 8, 2, 4
        rho = 10.0 ** rng.uniform(0.0, 4.0)
        if i % 3 == 0:
            chans, _ = channels.sample_quantized_csit(M, N, K, 4, rng)
        else:
            chans = channels.sample_estimation_channel(M, N, K, [float(rng.uniform(0, 0.3))] * K, rng)
        for scheme in ("proposed", "rwmmse", "mrt"):
            P, _, _, _ = design_precoders(scheme, chans.H_hat, chans.sigma_e2, rho, 1.0, SolverConfig())
            worst = max(worst, abs(P.power() - rho) / rho)
    ok = worst <= 1e-9
    elapsed = time.perf_counter() - start
    return CheckResult("power-conservation", ok, f"worst relative deviation {worst:.2e}", elapsed)


def check_rate_ordering(seed=6, draws=200, workers=1) -> CheckResult:
    """Scheme ordering and saturation across the SNR sweep."""
    start = time.perf_counter()
    cfg = ExperimentConfig(
        M=8,
        N=2,
        K=4,
        snr_db_grid=(0.0, 10.0, 30.0, 40.0),
        sigma_e2_grid=(0.1,),
        draws=draws,
        schemes=("proposed", "rwmmse", "mrt"),
        seed=seed,
        workers=workers,
        timing=False,
    )
    result = run_experiment(cfg)

    def rates_of(scheme, snr):
        sel = sorted(
            (r for r in result.records if r.scheme == scheme and r.snr_db == snr),
            key=lambda r: r.draw,
        )
        return np.array([r.sum_rate_bits for r in sel])

    msgs = []
    ok = True
    for snr in (30.0, 40.0):
        diff = rates_of("proposed", snr) - rates_of("rwmmse", snr)
        se = diff.std(ddof=1) / np.sqrt(diff.size)
        margin = diff.mean() - 1.645 * se
        ok = ok and margin >= 0.0
        msgs.append(f"pair gap @{snr:.0f}dB {diff.mean():.2f}±{se:.2f}")
    rw = {snr: rates_of("rwmmse", snr).mean() for snr in (0.0, 10.0, 30.0, 40.0)}
    slope_low = (rw[10.0] - rw[0.0]) / 10.0
    slope_high = (rw[40.0] - rw[30.0]) / 10.0
    ok = ok and slope_high < 0.35 * slope_low
    msgs.append(f"saturation slopes {slope_high:.3f} vs {slope_low:.3f}")
    mrt30 = rates_of("mrt", 30.0).mean()
    ok = ok and mrt30 < rw[30.0] and mrt30 < rates_of("proposed", 30.0).mean()
    msgs.append(f"mrt @30dB {mrt30:.2f}")
    elapsed = time.perf_counter() - start
    return CheckResult("rate-ordering", ok and elapsed < 900.0, "; ".join(msgs), elapsed)


def check_perfect_csit(seed=7, pairs=50) -> CheckResult:
    """With exact channel knowledge the design collapses to the all-private one."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    M, N, K = 8, 2, 4
    rho = 100.0
    diffs = []
    common_frac = []
    for _ in range(pairs):
        chans = channels.sample_estimation_channel(M, N, K, [0.0] * K, rng)
        st_p = run(chans.H_hat, chans.sigma_e2, rho, 1.0)
        st_r = run(chans.H_hat, chans.sigma_e2, rho, 1.0, force_sdma=True)
        _, _, r_p = instantaneous_rates(chans.H, st_p.P, 1.0)
        _, _, r_r = instantaneous_rates(chans.H, st_r.P, 1.0)
        diffs.append(r_p - r_r)
        common_frac.append(float(np.sum(np.abs(st_p.P.Pc) ** 2)) / rho)
    esr_gap = abs(float(np.mean(diffs)))
    med_common = float(np.median(common_frac))
    ok = esr_gap <= 0.1 and med_common <= 0.05
    elapsed = time.perf_counter() - start
    return CheckResult(
        "perfect-csit",
        ok,
        f"ESR gap {esr_gap:.2e} bits, median common power fraction {med_common:.2e}",
        elapsed,
    )


def check_quantization(seed=8, draws=200) -> CheckResult:
    """Planted codewords quantize losslessly; distortion shrinks with codebook size."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    M, N = 4, 2
    book = channels.random_codebook(M, N, 4, rng)
    planted_ok = True
    for _ in range(20):
        i = int(rng.integers(len(book.entries)))
        R = channels.complex_gaussian(rng, (N, N)) + 2.0 * np.eye(N)
        H = book.entries[i] @ R
        idx, _, dist = channels.quantize_channel(H, book)
        planted_ok = planted_ok and idx == i and dist <= 1e-10
    bits_grid = (2, 4, 6, 8)
    per_bits = {b: [] for b in bits_grid}
    for _ in range(draws):
        H = channels.complex_gaussian(rng, (M, N))
        for b in bits_grid:
            book_b = channels.random_codebook(M, N, b, rng)
            _, _, dist = channels.quantize_channel(H, book_b)
            per_bits[b].append(dist / N)
    decreasing = True
    gaps = []
    for lo, hi in zip(bits_grid[:-1], bits_grid[1:]):
        diff = np.array(per_bits[lo]) - np.array(per_bits[hi])
        se = diff.std(ddof=1) / np.sqrt(diff.size)
        decreasing = decreasing and diff.mean() > 1.645 * se
        gaps.append(f"{lo}->{hi} bits gap {diff.mean():.3f}±{se:.3f}")
    ok = planted_ok and decreasing
    elapsed = time.perf_counter() - start
    return CheckResult(
        "quantization",
        ok,
        f"planted {'ok' if planted_ok else 'FAILED'}; " + "; ".join(gaps),
        elapsed,
    )


def check_determinism(seed=9) -> CheckResult:
    """Identical config and seed produce byte-identical CSV for any worker count."""
    start = time.perf_counter()
    base = dict(
        M=4,
        N=2,
        K=2,
        snr_db_grid=(0.0, 10.0),
        sigma_e2_grid=(0.1,),
        draws=6,
        schemes=("proposed", "rwmmse", "mrt"),
        seed=seed,
        timing=False,
    )
    texts = [
        csv_text(run_experiment(ExperimentConfig(workers=w, **base))) for w in (1, 2, 3)
    ]
    ok = texts[0] == texts[1] == texts[2]
    elapsed = time.perf_counter() - start
    return CheckResult(
        "determinism",
        ok,
        f"{len(texts[0].splitlines())} CSV lines identical across 1/2/3 workers"
        if ok
        else "CSV outputs differ across worker counts",
        elapsed,
    )


def run_all(seed=0, quick=False, report=print, workers=1):
    """Execute the full battery; one line per check through the report callback."""
    sizes = {
        "instances": 200 if quick else 1000,
        "mc_draws": 50_000 if quick else 200_000,
        "points": 3 if quick else 10,
        "runs": 25 if quick else 100,
        "iterates": 20 if quick else 100,
        "grid": 200_000 if quick else 1_000_000,
        "power_runs": 10 if quick else 50,
        "sweep_draws": 40 if quick else 200,
        "pairs": 10 if quick else 50,
        "quant_draws": 50 if quick else 200,
    }
    results = [
        check_mmse_inverse_identity(seed, sizes["instances"]),
        check_quadratic_expectation(seed + 1, sizes["mc_draws"]),
        check_gradient_equality(seed + 2, sizes["points"]),
        check_descent(seed + 3, sizes["runs"]),
        check_split_root(seed + 4, sizes["iterates"], sizes["grid"]),
        check_power_conservation(seed + 5, sizes["power_runs"]),
        check_rate_ordering(seed + 6, sizes["sweep_draws"], workers),
        check_perfect_csit(seed + 7, sizes["pairs"]),
        check_quantization(seed + 8, sizes["quant_draws"]),
        check_determinism(seed + 9),
    ]
    for r in results:
        report(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<24} {r.detail}  [{r.seconds:.1f}s]")
    return results
