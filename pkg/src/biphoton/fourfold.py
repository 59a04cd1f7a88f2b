"""Four-fold HOM interference between two independent heralded sources.

Signal photons of the two sources meet on a beam splitter while the idlers
herald.  The coincidence probability is

    P4(tau) = 1/4 int^4 |f1(s1,i1) f2(s2,i2) - f1(s2,i1) f2(s1,i2) e^{-i(s2-s1)tau}|^2

Two evaluation routes are provided: ``direct`` sums the 4D trapezoidal
quadrature literally, ``schmidt`` expands each source in its Schmidt modes so
the cross term collapses to ``sum_jl lam1_j lam2_l |<u1_j| e^{i s tau} |u2_l>|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import Axis, GuardError, trapezoid_weights
from .spectra import JointSpectralAmplitude, schmidt_analysis, signal_spectrum
from .twofold import InterferencePattern

__all__ = ["SourcePair", "fourfold_pattern", "fourfold_visibility", "coherence_time", "MAX_DIRECT_POINTS"]

MAX_DIRECT_POINTS = 64**4
DEFAULT_RANK = 8


@dataclass(frozen=True, eq=False)
class SourcePair:
    jsa1: JointSpectralAmplitude
    jsa2: JointSpectralAmplitude

    def __post_init__(self):
        a, b = self.jsa1.axis_s, self.jsa2.axis_s
        if not np.isclose(a.step, b.step, rtol=1e-9, atol=0):
            raise ValueError("signal axes of both sources must share one step")
        lo1, hi1 = self.jsa1.center_s + a.start, self.jsa1.center_s + a.stop
        lo2, hi2 = self.jsa2.center_s + b.start, self.jsa2.center_s + b.stop
        if hi1 < lo2 or hi2 < lo1:
            raise ValueError("signal axes do not overlap")

    def swapped(self) -> "SourcePair":
        return SourcePair(self.jsa2, self.jsa1)


def _common_signal(pair: SourcePair) -> tuple[Axis, float, np.ndarray, np.ndarray]:
    """Both amplitudes placed on one absolute signal axis (zero-padded)."""
    j1, j2 = pair.jsa1, pair.jsa2
    h = j1.axis_s.step
    ref = j1.center_s + j1.axis_s.start
    off2 = (j2.center_s + j2.axis_s.start - ref) / h
    k2 = int(np.rint(off2))
    if abs(off2 - k2) > 1e-6:
        raise ValueError("signal grids of the two sources are not aligned")
    lo = min(0, k2)
    hi = max(j1.axis_s.count, k2 + j2.axis_s.count)
    n = hi - lo
    f1 = np.zeros((n, j1.axis_i.count), dtype=complex)
    f2 = np.zeros((n, j2.axis_i.count), dtype=complex)
    f1[-lo:-lo + j1.axis_s.count] = j1.values
    f2[k2 - lo:k2 - lo + j2.axis_s.count] = j2.values
    center = j1.center_s
    axis = Axis(j1.axis_s.start + lo * h, h, n)
    return axis, center, f1, f2


def _taus(tau_axis) -> tuple[Axis, np.ndarray]:
    axis = tau_axis if isinstance(tau_axis, Axis) else Axis.from_values(tau_axis)
    return axis, axis.values()


def _direct(pair: SourcePair, taus: np.ndarray) -> np.ndarray:
    axis, _, f1, f2 = _common_signal(pair)
    n = axis.count
    n1, n2 = f1.shape[1], f2.shape[1]
    if n * n * n1 * n2 > MAX_DIRECT_POINTS:
        raise GuardError(f"direct 4D quadrature needs {n * n * n1 * n2} points (limit {MAX_DIRECT_POINTS})")
    ws = trapezoid_weights(axis)
    wi1 = trapezoid_weights(pair.jsa1.axis_i)
    wi2 = trapezoid_weights(pair.jsa2.axis_i)
    s = axis.values()
    out = np.zeros(taus.size)
    # outer loop over s1 keeps memory at O(n^3) and is the partitioning axis
    for a in range(n):
        wa = ws[a] * ws[:, None, None] * wi1[None, :, None] * wi2[None, None, :]
        first = f1[a][None, :, None] * f2[:, None, :]            # f1(s1,i1) f2(s2,i2)
        second = f1[:, :, None] * f2[a][None, None, :]           # f1(s2,i1) f2(s1,i2)
        for k, tau in enumerate(taus):
            ph = np.exp(-1j * (s - s[a]) * tau)[:, None, None]
            out[k] += np.sum(wa * np.abs(first - second * ph) ** 2)
    return 0.25 * out


def _schmidt(pair: SourcePair, taus: np.ndarray, rank: int) -> tuple[np.ndarray, float]:
    axis, _, f1, f2 = _common_signal(pair)
    ws = trapezoid_weights(axis)
    sw = np.sqrt(ws)
    modes = []
    trunc = 0.0
    for f, ax_i in ((f1, pair.jsa1.axis_i), (f2, pair.jsa2.axis_i)):
        wi = np.sqrt(trapezoid_weights(ax_i))
        u, sv, _ = np.linalg.svd(sw[:, None] * f * wi[None, :], full_matrices=False)
        lam = sv**2
        total = lam.sum()
        r = min(rank, lam.size)
        trunc = max(trunc, 1.0 - lam[:r].sum() / total)
        modes.append((u[:, :r], lam[:r], total))
    (u1, l1, n1), (u2, l2, n2) = modes
    s = axis.values()
    out = np.empty(taus.size)
    for k, tau in enumerate(taus):
        ov = u1.conj().T @ (np.exp(1j * s * tau)[:, None] * u2)   # <u1_j| e^{i s tau} |u2_l>
        cross = l1 @ (np.abs(ov) ** 2) @ l2
        out[k] = 0.25 * (2.0 * n1 * n2 - 2.0 * cross)
    return out, float(trunc)


def fourfold_pattern(pair: SourcePair, tau_axis, method: str = "schmidt", rank: int = DEFAULT_RANK) -> InterferencePattern:
    """Four-fold coincidence versus the signal-signal delay.

    ``method="schmidt"`` truncates both sources at ``rank`` Schmidt modes and
    reports the discarded weight as ``meta["truncation_weight"]``;
    ``method="direct"`` refuses grids above ``64**4`` points.
    """
    axis, taus = _taus(tau_axis)
    if method == "direct":
        vals, meta = _direct(pair, taus), {"method": "direct"}
    elif method == "schmidt":
        vals, trunc = _schmidt(pair, taus, rank)
        meta = {"method": "schmidt", "rank": rank, "truncation_weight": trunc}
    else:
        raise ValueError(f"unknown method {method!r}")
    return InterferencePattern(axis, np.clip(vals, 0.0, 1.0), "fourfold", meta=meta)


def coherence_time(jsa: JointSpectralAmplitude) -> float:
    """Inverse FWHM bandwidth (rad/s) of the signal intensity spectrum."""
    return 1.0 / signal_spectrum(jsa).fwhm_bandwidth()


def fourfold_visibility(pair: SourcePair, method: str = "schmidt", rank: int = DEFAULT_RANK,
                        coherence_times: float = 10.0) -> float:
    """``(P_inf - P_0) / P_inf`` with ``P_inf`` taken ``coherence_times`` out.

    The far delay must stay below half the alias period ``pi / step`` of the
    signal grid, otherwise the discrete overlaps wrap around.
    """
    tc = max(coherence_time(pair.jsa1), coherence_time(pair.jsa2))
    far = coherence_times * tc
    limit = np.pi / pair.jsa1.axis_s.step
    if far >= limit:
        raise GuardError(
            f"far delay {far:.4g} exceeds the alias-free range {limit:.4g}; refine the signal grid")
    p = fourfold_pattern(pair, np.array([0.0, far]), method=method, rank=rank).values
    return float((p[1] - p[0]) / p[1])


def purity_from_pair(pair: SourcePair) -> tuple[float, float]:
    return schmidt_analysis(pair.jsa1).purity, schmidt_analysis(pair.jsa2).purity
