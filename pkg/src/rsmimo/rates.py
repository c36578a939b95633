"""Rate and MSE algebra for rate-splitting transmission under imperfect CSIT.

Conventions: optimization objectives are in nats, reported rates in bits.
Hermitian products are explicitly symmetrized before factorizations, and every
real-part extraction asserts that the imaginary residue is negligible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LN2 = np.log(2.0)


@dataclass(frozen=True)
class PrecoderSet:
    """Common precoder Pc, private precoders Pp (one per user), power budget rho."""

    Pc: np.ndarray
    Pp: list
    rho: float

    def full(self):
        """Concatenation [Pc, P_1, ..., P_K], shape M x N(K+1)."""
        return np.concatenate([self.Pc] + list(self.Pp), axis=1)

    def private(self):
        return np.concatenate(list(self.Pp), axis=1)

    def power(self) -> float:
        return float(np.sum(np.abs(self.Pc) ** 2) + sum(np.sum(np.abs(P) ** 2) for P in self.Pp))


@dataclass(frozen=True)
class MseBundle:
    """Per-user MMSE filters and error matrices at the current precoders."""

    F: np.ndarray
    G: np.ndarray
    Dc: np.ndarray
    Dp: np.ndarray
    Mc_mmse: np.ndarray
    Mp_mmse: np.ndarray


@dataclass(frozen=True)
class WeightBundle:
    Wc: np.ndarray
    Wp: np.ndarray
    mu: float


def herm(A):
    """Explicit Hermitian symmetrization (A + A^H)/2."""
    return 0.5 * (A + A.conj().T)


def checked_real(z) -> float:
    """Real part of a scalar, rejecting non-negligible imaginary residue."""
    z = complex(z)
    if abs(z.imag) > 1e-10 * (1.0 + abs(z.real)):
        raise ValueError(f"imaginary residue {z.imag:.3e} too large for real extraction")
    return z.real


def cholesky_logdet(A) -> float:
    """log det of a Hermitian positive definite matrix via its Cholesky factor."""
    L = np.linalg.cholesky(herm(A))
    return 2.0 * float(np.sum(np.log(np.real(np.diag(L)))))


def cholesky_solve(A, B):
    """Solve A X = B for Hermitian positive definite A through its Cholesky factor."""
    L = np.linalg.cholesky(herm(A))
    return np.linalg.solve(L.conj().T, np.linalg.solve(L, B))


def pd_inverse(A):
    """Inverse of a Hermitian positive definite matrix, symmetrized."""
    return herm(cholesky_solve(A, np.eye(A.shape[0], dtype=complex)))


def logsumexp(x) -> float:
    x = np.asarray(x, dtype=float)
    m = float(np.max(x))
    return m + float(np.log(np.sum(np.exp(x - m))))


def _logdet_rate_bits(S, Q) -> float:
    """log2 det(I + Q^{-1} S) for PSD signal S and PD interference-plus-noise Q."""
    return max((cholesky_logdet(Q + S) - cholesky_logdet(Q)) / LN2, 0.0)


def instantaneous_rates(H, P: PrecoderSet, sigma_n2):
    """Per-user common/private rates and the sum rate on the true channels.

    The common stream sees every private stream as interference; after its
    removal each private stream sees only the other users' private streams.
    Returns (Rc, Rp, sum_rate) in bits/s/Hz with sum_rate = min_k Rc + sum Rp.
    """
    if sigma_n2 <= 0:
        raise ValueError("sigma_n2 must be positive")
    K = len(H)
    if len(P.Pp) != K:
        raise ValueError("precoder count does not match user count")
    N = H[0].shape[1]
    Rc, Rp = [], []
    for k in range(K):
        Hk = H[k]
        priv = [Hk.conj().T @ Pj for Pj in P.Pp]
        Q_all = sum(herm(A @ A.conj().T) for A in priv) + sigma_n2 * np.eye(N)
        Ac = Hk.conj().T @ P.Pc
        Rc.append(_logdet_rate_bits(herm(Ac @ Ac.conj().T), Q_all))
        Q_other = (
            sum(herm(priv[j] @ priv[j].conj().T) for j in range(K) if j != k)
            + sigma_n2 * np.eye(N)
        )
        Rp.append(_logdet_rate_bits(herm(priv[k] @ priv[k].conj().T), Q_other))
    return Rc, Rp, min(Rc) + sum(Rp)


def expectation_quadratic(variances, X):
    """E[Y^H X Y] for Y with independent zero-mean entries of given variances.

    variances holds the per-entry variance of Y (shape M x N); the result is
    the N x N diagonal matrix diag(variances^T diag(X)). A uniform variance
    collapses to sigma^2 tr(X) I.
    """
    variances = np.asarray(variances, dtype=float)
    if np.any(variances < 0):
        raise ValueError("variances must be non-negative")
    if X.shape[0] != X.shape[1] or X.shape[0] != variances.shape[0]:
        raise ValueError("shape mismatch between variances and X")
    return np.diag(variances.T @ np.diagonal(X))


def mse_bundle(H_hat_k, sigma_e2_k, P: PrecoderSet, sigma_n2, k) -> MseBundle:
    """MMSE filters and error matrices for user k at the given precoders.

    F folds the full transmit power times the CSIT error variance into the
    common-stream noise floor; G is the private-only counterpart valid after
    common-stream removal.
    """
    N = H_hat_k.shape[1]
    eye = np.eye(N)
    Sfull = H_hat_k.conj().T @ P.full()
    Spriv = H_hat_k.conj().T @ P.private()
    tr_full = float(np.sum(np.abs(P.full()) ** 2))
    tr_priv = float(np.sum(np.abs(P.private()) ** 2))
    F = herm(Sfull @ Sfull.conj().T) + (sigma_e2_k * tr_full + sigma_n2) * eye
    G = herm(Spriv @ Spriv.conj().T) + (sigma_e2_k * tr_priv + sigma_n2) * eye
    Sc = H_hat_k.conj().T @ P.Pc
    Sp = H_hat_k.conj().T @ P.Pp[k]
    Fi_Sc = cholesky_solve(F, Sc)
    Gi_Sp = cholesky_solve(G, Sp)
    return MseBundle(
        F=F,
        G=G,
        Dc=Fi_Sc.conj().T,
        Dp=Gi_Sp.conj().T,
        Mc_mmse=herm(eye - Sc.conj().T @ Fi_Sc),
        Mp_mmse=herm(eye - Sp.conj().T @ Gi_Sp),
    )


def all_bundles(H_hat, sigma_e2, P: PrecoderSet, sigma_n2):
    return [mse_bundle(H_hat[k], sigma_e2[k], P, sigma_n2, k) for k in range(len(H_hat))]


def f1_from_bundles(bundles) -> float:
    """Smoothed max of common log-det MSEs plus the private log-det sum, in nats."""
    lc = [cholesky_logdet(b.Mc_mmse) for b in bundles]
    lp = [cholesky_logdet(b.Mp_mmse) for b in bundles]
    return logsumexp(lc) + sum(lp)


def objective_f1(H_hat, sigma_e2, P: PrecoderSet, sigma_n2) -> float:
    """Design objective in nats; lower is better."""
    return f1_from_bundles(all_bundles(H_hat, sigma_e2, P, sigma_n2))


def weights(mse_bundles) -> list:
    """Per-user weight matrices and the softmax split over common log-det MSEs."""
    lc = np.array([cholesky_logdet(b.Mc_mmse) for b in mse_bundles])
    mu = np.exp(lc - logsumexp(lc))
    out = []
    for k, b in enumerate(mse_bundles):
        out.append(
            WeightBundle(
                Wc=herm(mu[k] * pd_inverse(b.Mc_mmse)),
                Wp=pd_inverse(b.Mp_mmse),
                mu=float(mu[k]),
            )
        )
    return out


def mse_at_filters(H_hat_k, sigma_e2_k, P: PrecoderSet, sigma_n2, k, Dc, Dp):
    """Conditional-expected MSE matrices for user k at arbitrary receive filters.

    The CSIT-error expectation is resolved through expectation_quadratic, so
    the quadratic filter terms reuse exactly the F/G noise-floor structure.
    """
    M, N = H_hat_k.shape
    eye = np.eye(N)
    var = np.full((M, N), float(sigma_e2_k))
    Pfull = P.full()
    Ppriv = P.private()
    Tf = Pfull @ Pfull.conj().T
    Tp = Ppriv @ Ppriv.conj().T
    F = herm(H_hat_k.conj().T @ Tf @ H_hat_k) + expectation_quadratic(var, Tf) + sigma_n2 * eye
    G = herm(H_hat_k.conj().T @ Tp @ H_hat_k) + expectation_quadratic(var, Tp) + sigma_n2 * eye
    Sc = H_hat_k.conj().T @ P.Pc
    Sp = H_hat_k.conj().T @ P.Pp[k]
    Mc = herm(eye - Dc @ Sc - Sc.conj().T @ Dc.conj().T + Dc @ F @ Dc.conj().T)
    Mp = herm(eye - Dp @ Sp - Sp.conj().T @ Dp.conj().T + Dp @ G @ Dp.conj().T)
    return Mc, Mp


def objective_f2(Mc_list, Mp_list, weight_bundles) -> float:
    """Weighted MSE sum over users with the weights treated as constants."""
    if not (len(Mc_list) == len(Mp_list) == len(weight_bundles)):
        raise ValueError("per-user list lengths disagree")
    total = 0.0 + 0.0j
    for Mc, Mp, w in zip(Mc_list, Mp_list, weight_bundles):
        total += np.trace(w.Wc @ Mc) + np.trace(w.Wp @ Mp)
    return checked_real(total)
