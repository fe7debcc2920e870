"""Separation quality measures that account for permutation and scale ambiguity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import DegenerateSignalError

__all__ = ["ChannelAssignment", "match_sources", "snr_db", "isr", "SNR_CAP_DB"]

SNR_CAP_DB = 300.0


@dataclass(frozen=True)
class ChannelAssignment:
    """``permutation[i]`` is the estimate row matched to source ``i``; ``gains[i]`` rescales it."""

    permutation: np.ndarray
    gains: np.ndarray


def _pair(Y, S):
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if Y.shape != S.shape:
        raise ValueError(f"shape mismatch: estimates {Y.shape} vs sources {S.shape}")
    return Y, S


def match_sources(Y, S) -> ChannelAssignment:
    """Match estimate rows to source rows by maximal total absolute correlation.

    Gains are least-squares scales mapping each matched estimate onto its
    source, ``<s_i, y> / <y, y>``.
    """
    Y, S = _pair(Y, S)
    for name, M in (("estimate", Y), ("source", S)):
        sd = M.std(axis=1)
        if np.any(sd == 0):
            raise DegenerateSignalError(f"{name} channel {int(np.argmin(sd))} has zero variance")
    p = S.shape[0]
    corr = np.corrcoef(S, Y)[:p, p:]  # corr[i, j] = corr(s_i, y_j)
    _, perm = linear_sum_assignment(-np.abs(corr))
    gains = np.array([S[i] @ Y[perm[i]] / (Y[perm[i]] @ Y[perm[i]]) for i in range(p)])
    return ChannelAssignment(np.asarray(perm), gains)


def snr_db(Y, S, assignment: ChannelAssignment | None = None) -> np.ndarray:
    """Per-source SNR in dB of the gain-scaled matched estimate.

    ``10 log10(|s_i|^2 / |s_i - g_i y_pi(i)|^2)``, capped at 300 dB for exact
    recovery.
    """
    Y, S = _pair(Y, S)
    if assignment is None:
        assignment = match_sources(Y, S)
    out = np.empty(S.shape[0])
    for i, (j, g) in enumerate(zip(assignment.permutation, assignment.gains)):
        sig = float(S[i] @ S[i])
        resid = S[i] - g * Y[j]
        noise = float(resid @ resid)
        if noise == 0.0 or sig / noise > 10 ** (SNR_CAP_DB / 10):
            out[i] = SNR_CAP_DB
        else:
            out[i] = 10.0 * np.log10(sig / noise)
    return out


def isr(G) -> float:
    """Interference-to-signal ratio of a global gain matrix ``G = W A``.

    Rows are permuted so the dominant entries sit on the diagonal and each
    row is divided by its diagonal entry; the result is the off-diagonal
    power over the diagonal power. Zero exactly for scaled permutations.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    if G.shape[0] != G.shape[1] or not np.all(np.isfinite(G)):
        raise ValueError("G must be a finite square matrix")
    A = np.abs(G)
    rmax = A.max(axis=1, keepdims=True)
    rmax[rmax == 0] = 1.0
    # rows[j] is the row of G whose dominant entry is column j
    rows, cols = linear_sum_assignment(-(A / rmax).T)
    P = G[cols]
    d = np.diag(P).copy()
    d[d == 0] = 1.0
    N = P / d[:, None]
    off = N - np.diag(np.diag(N))
    return float(np.sum(off * off) / np.sum(np.diag(N) ** 2))
