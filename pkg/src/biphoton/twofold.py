"""Two-photon coincidence engines: HOM, N00N and Franson interferometers.

All engines take a normalized :class:`~biphoton.spectra.JointSpectralAmplitude`
and evaluate the coincidence probability by grid quadrature using absolute
optical frequencies (carrier + detuning).  Terms of the form ``f(w2, w1)``
are expanded so that only the overlap between ``f`` and its exchanged copy
needs the native grid; the squared-modulus terms are the JSA norm.

The quantum Wiener-Khinchin pair :func:`qwkt_forward` /
:func:`qwkt_inverse` links HOM (difference-frequency) and N00N
(sum-frequency) patterns to the projected joint spectral intensity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .numerics import Axis, Grid2, trapezoid_weights
from .spectra import (
    JointSpectralAmplitude,
    JointTemporalAmplitude,
    SpectralMarginal,
    swapped_values,
)

__all__ = [
    "PATTERN_KINDS",
    "InterferencePattern",
    "IndistinguishabilityCurve",
    "CorrelationFunction",
    "NyquistError",
    "hom_pattern",
    "hom_pattern_temporal",
    "spectrally_resolved_hom",
    "noon_pattern",
    "hom_uncorrelated",
    "noon_uncorrelated",
    "franson_pattern",
    "franson_singles",
    "qwkt_forward",
    "qwkt_inverse",
    "marginal_from_pattern",
    "write_pattern_csv",
    "read_pattern_csv",
]

PATTERN_KINDS = ("hom", "noon", "franson_coincidence", "franson_singles", "fourfold", "fock_scan")

# Number of delays evaluated per vectorized block.
_TAU_BLOCK = 16
# Relative amplitude below which temporal samples are dropped from the time-domain HOM integral.
_SUPPORT_FLOOR = 1e-8


class NyquistError(ValueError):
    """Correlation samples are too sparse for the spectral content."""


def _visibility(values: np.ndarray) -> float:
    hi, lo = float(np.max(values)), float(np.min(values))
    return 0.0 if hi + lo == 0 else (hi - lo) / (hi + lo)


@dataclass(frozen=True, eq=False)
class InterferencePattern:
    """Coincidence probability sampled along a delay (or phase) axis.

    ``baseline`` defaults to the mean of the two end samples, which is the
    distinguishable level for scans that extend past the coherence time.
    """

    axis: Axis
    values: np.ndarray
    kind: str
    baseline: float | None = None
    visibility: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.axis.count,):
            raise ValueError("pattern values do not match axis")
        if np.any(v < -1e-12) or np.any(v > 1 + 1e-12):
            raise ValueError("pattern values must be probabilities in [0, 1]")
        v = np.clip(v, 0.0, 1.0)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.baseline is None:
            object.__setattr__(self, "baseline", float(0.5 * (v[0] + v[-1])))
        vis = _visibility(v)
        if self.visibility is not None and abs(self.visibility - vis) > 1e-12:
            raise ValueError("stored visibility disagrees with pattern values")
        object.__setattr__(self, "visibility", vis)

    def delays(self) -> np.ndarray:
        return self.axis.values()

    def fwhm(self, feature: str = "dip") -> float:
        """Full width at half depth (or height) of the feature at the scan centre."""
        x = self.delays()
        v = self.values
        i0 = int(np.argmin(np.abs(x - 0.5 * (x[0] + x[-1]))))
        if feature == "dip":
            depth = v[i0]
            half = 0.5 * (depth + self.baseline)
            inside = lambda y: y < half  # noqa: E731
        else:
            half = 0.5 * (v[i0] + self.baseline)
            inside = lambda y: y > half  # noqa: E731
        edges = []
        for direction in (-1, 1):
            i = i0
            while 0 <= i + direction < len(x) and inside(v[i + direction]):
                i += direction
            j = i + direction
            if not 0 <= j < len(x):
                raise ValueError("feature extends beyond the scan")
            # linear interpolation between the last inside sample and the first outside one
            t = (half - v[i]) / (v[j] - v[i])
            edges.append(x[i] + t * (x[j] - x[i]))
        return float(edges[1] - edges[0])


@dataclass(frozen=True)
class IndistinguishabilityCurve:
    """Temporal-mode overlap ``I(tau) = exp(-(delta_omega * tau)^2 / 2)``."""

    delta_omega: float

    def __post_init__(self):
        if not self.delta_omega > 0:
            raise ValueError("delta_omega must be positive")

    def __call__(self, tau):
        return np.exp(-0.5 * (self.delta_omega * np.asarray(tau, dtype=float)) ** 2)


@dataclass(frozen=True, eq=False)
class CorrelationFunction:
    axis: Axis
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in ("g2_plus", "g2_minus"):
            raise ValueError(f"unknown correlation kind {self.kind!r}")
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.axis.count,):
            raise ValueError("correlation values do not match axis")
        object.__setattr__(self, "values", v)


def _as_axis(tau_axis) -> Axis:
    if isinstance(tau_axis, Axis):
        return tau_axis
    return Axis.from_values(tau_axis)


def _blocks(taus: np.ndarray):
    for k in range(0, taus.size, _TAU_BLOCK):
        yield taus[k:k + _TAU_BLOCK]


def _alias_guard(jsa: JointSpectralAmplitude, taus: np.ndarray) -> None:
    # the discrete exchange sum is periodic in tau with period 2 pi / step
    limit = np.pi / max(jsa.axis_s.step, jsa.axis_i.step)
    if taus.size and np.max(np.abs(taus)) > limit * (1 + 1e-9):
        raise NyquistError(f"delays beyond +-{limit:.4g} alias on this spectral grid; refine the grid")


def _hom_values(jsa: JointSpectralAmplitude, taus: np.ndarray) -> np.ndarray:
    _alias_guard(jsa, taus)
    f = jsa.values
    w = jsa.weights()
    g = swapped_values(jsa)
    norm = float(np.sum(w * np.abs(f) ** 2))
    overlap = w * f * g.conj()
    # w1 - w2 with the carrier difference taken first to keep precision
    dw = (jsa.center_s - jsa.center_i) + (jsa.axis_s.values()[:, None] - jsa.axis_i.values()[None, :])
    out = []
    for blk in _blocks(taus):
        phase = np.exp(1j * dw[None, :, :] * blk[:, None, None])
        cross = np.real(np.sum(overlap[None] * phase, axis=(1, 2)))
        out.append(0.25 * (2.0 * norm - 2.0 * cross))
    return np.concatenate(out)


def hom_pattern(jsa: JointSpectralAmplitude, tau_axis) -> InterferencePattern:
    """HOM coincidence ``1/4 iint |f(w1,w2) - f(w2,w1) e^{-i(w1-w2)tau}|^2``."""
    axis = _as_axis(tau_axis)
    vals = _hom_values(jsa, axis.values())
    return InterferencePattern(axis, vals, "hom")


def spectrally_resolved_hom(jsa: JointSpectralAmplitude, tau: float) -> Grid2:
    """Coincidence spectral density at delay ``tau`` on the JSA grid.

    Its integral equals :func:`hom_pattern` whenever the exchanged amplitude
    lies inside the grid (shared signal/idler axes).
    """
    f = jsa.values
    g = swapped_values(jsa)
    dw = (jsa.center_s - jsa.center_i) + (jsa.axis_s.values()[:, None] - jsa.axis_i.values()[None, :])
    d = 0.25 * np.abs(f - g * np.exp(-1j * dw * tau)) ** 2
    return Grid2(jsa.axis_s.shifted(jsa.center_s), jsa.axis_i.shifted(jsa.center_i), d)


def hom_pattern_temporal(jta: JointTemporalAmplitude, tau_axis) -> InterferencePattern:
    """HOM pattern evaluated from the joint temporal amplitude.

    Computes ``1/4 iint |F(t1,t2) - F(t2-tau, t1+tau)|^2`` with the exchanged,
    shifted amplitude located by cubic-spline interpolation.  For non-degenerate
    carriers the envelope picks up ``exp(-i dc (t2 - t1 - tau))``.
    """
    axis = _as_axis(tau_axis)
    grid = jta.grid
    ar, ac = grid.axis_row, grid.axis_col
    if ar.count != ac.count or not np.isclose(ar.step, ac.step, rtol=1e-12, atol=0):
        raise ValueError("temporal axes must match for the exchange operation")
    h = ar.step
    limit = 0.5 * min(ar.span, ac.span)
    taus = axis.values()
    if np.any(np.abs(taus) > limit):
        raise ValueError(f"delay beyond temporal grid support (|tau| <= {limit:.4g})")
    F = grid.values
    # integrate only where F or its shifted copy is non-negligible
    mag = np.abs(F)
    keep = mag > _SUPPORT_FLOOR * mag.max()
    reach = int(np.ceil(np.max(np.abs(taus), initial=0.0) / h)) + 2
    r_idx = np.flatnonzero(keep.any(axis=1))
    c_idx = np.flatnonzero(keep.any(axis=0))
    lo = max(0, min(r_idx[0], c_idx[0]) - reach)
    hi = min(ar.count, max(r_idx[-1], c_idx[-1]) + reach + 1)
    t_r = ar.values()[lo:hi]
    t_c = ac.values()[lo:hi]
    t1, t2 = np.meshgrid(t_r, t_c, indexing="ij")
    w = np.outer(trapezoid_weights(ar)[lo:hi], trapezoid_weights(ac)[lo:hi])
    local = F[lo:hi, lo:hi]
    dc = jta.center_s - jta.center_i
    out = np.empty(taus.size)
    # cubic splines: coefficients computed once, evaluated per delay
    c_re = ndimage.spline_filter(F.real, order=3, mode="grid-constant")
    c_im = ndimage.spline_filter(F.imag, order=3, mode="grid-constant")
    for n, tau in enumerate(taus):
        rows = (t2 - tau - ar.start) / h
        cols = (t1 + tau - ac.start) / h
        re = ndimage.map_coordinates(c_re, [rows, cols], order=3, mode="grid-constant", prefilter=False)
        im = ndimage.map_coordinates(c_im, [rows, cols], order=3, mode="grid-constant", prefilter=False)
        shifted = (re + 1j * im) * np.exp(-1j * dc * (t2 - t1 - tau))
        out[n] = 0.25 * np.sum(w * np.abs(local - shifted) ** 2)
    return InterferencePattern(axis, np.clip(out, 0.0, 1.0), "hom")


def _noon_values(jsa: JointSpectralAmplitude, taus: np.ndarray) -> np.ndarray:
    _alias_guard(jsa, taus)
    f = jsa.values
    w = jsa.weights()
    g = swapped_values(jsa)
    inten = w * np.abs(f) ** 2
    overlap = w * f * g.conj()
    ws = jsa.omega_s()
    wi = jsa.omega_i()
    out = np.empty(taus.size)
    for n, tau in enumerate(taus):
        es = np.exp(-1j * ws * tau)
        ei = np.exp(-1j * wi * tau)
        a_s, a_i = es + 1, ei + 1
        b_s, b_i = es - 1, ei - 1
        direct = np.abs(a_s) ** 2 @ inten @ np.abs(a_i) ** 2
        exchanged = np.abs(b_s) ** 2 @ inten @ np.abs(b_i) ** 2
        cross = (a_s * b_s.conj()) @ overlap @ (a_i * b_i.conj())
        out[n] = (direct + exchanged + 2.0 * cross.real) / 16.0
    return out


def noon_pattern(jsa: JointSpectralAmplitude, tau_axis) -> InterferencePattern:
    """Two-photon N00N coincidence for an arbitrary JSA.

    ``1/16 iint |f(w3,w4)(e^{-i w3 tau}+1)(e^{-i w4 tau}+1)
    + f(w4,w3)(e^{-i w3 tau}-1)(e^{-i w4 tau}-1)|^2``.
    """
    axis = _as_axis(tau_axis)
    return InterferencePattern(axis, _noon_values(jsa, axis.values()), "noon", baseline=0.5)


def hom_uncorrelated(curve: IndistinguishabilityCurve, tau_axis) -> InterferencePattern:
    axis = _as_axis(tau_axis)
    return InterferencePattern(axis, 0.5 * (1.0 - curve(axis.values())), "hom", baseline=0.5)


def noon_uncorrelated(curve: IndistinguishabilityCurve, omega: float, tau_axis) -> InterferencePattern:
    """``P11 = 1/2 [1 + I(tau) cos(2 omega tau)]`` for photons at frequency ``omega``."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    axis = _as_axis(tau_axis)
    t = axis.values()
    return InterferencePattern(axis, 0.5 * (1.0 + curve(t) * np.cos(2.0 * omega * t)), "noon", baseline=0.5)


def franson_pattern(
    jsa: JointSpectralAmplitude,
    offsets,
    base_delay: float | tuple[float, float] = 0.0,
    mode: str = "common_delay",
) -> InterferencePattern:
    """Franson coincidence ``1/4 iint |f|^2 [1+cos(w1 T1)][1+cos(w2 T2)]``.

    The scan axis holds offsets ``dT`` about a base delay.  In
    ``common_delay`` mode ``T1 = T2 = T0 + dT``; in ``independent`` mode
    ``base_delay`` is ``(T1, T2)`` and the offset is applied to arm 1 only.
    """
    axis = _as_axis(offsets)
    if mode == "common_delay":
        t0 = float(np.atleast_1d(base_delay)[0])
        t1 = t0 + axis.values()
        t2 = t1
    elif mode == "independent":
        b1, b2 = base_delay
        t1 = b1 + axis.values()
        t2 = np.full(axis.count, float(b2))
    else:
        raise ValueError(f"unknown Franson mode {mode!r}")
    inten = jsa.weights() * jsa.intensity()
    ws = jsa.omega_s()
    wi = jsa.omega_i()
    vals = np.array([
        0.25 * (1 + np.cos(ws * a)) @ inten @ (1 + np.cos(wi * b)) for a, b in zip(t1, t2)
    ])
    return InterferencePattern(axis, vals, "franson_coincidence", baseline=float(np.mean(vals)),
                               meta={"mode": mode, "base_delay": base_delay})


def franson_singles(spectrum: SpectralMarginal, offsets, base_delay: float = 0.0) -> InterferencePattern:
    """Single-count probability ``1/2 int |f(w)|^2 [1 + cos(w T)]``."""
    axis = _as_axis(offsets)
    w = spectrum.axis.values()
    dens = spectrum.density / spectrum.area()
    wt = trapezoid_weights(spectrum.axis) * dens
    vals = np.array([0.5 * wt @ (1 + np.cos(w * (base_delay + d))) for d in axis.values()])
    return InterferencePattern(axis, vals, "franson_singles", baseline=float(np.mean(vals)),
                               meta={"base_delay": base_delay})


def qwkt_forward(marg: SpectralMarginal, tau_axis) -> CorrelationFunction:
    """``G2(tau) = int dw F2(w) exp(-i w tau)`` on the marginal's absolute axis."""
    axis = _as_axis(tau_axis)
    w = marg.axis.values()
    wt = trapezoid_weights(marg.axis) * marg.density
    taus = axis.values()
    # a sampled spectrum makes G2 periodic in tau with period 2 pi / step
    limit = np.pi / marg.axis.step
    if np.max(np.abs(taus)) > limit * (1 + 1e-9):
        raise NyquistError(f"delays beyond +-{limit:.4g} s alias on a spectral grid of step {marg.axis.step:.4g} rad/s")
    vals = np.concatenate([np.exp(-1j * np.outer(blk, w)) @ wt for blk in _blocks(taus)])
    kind = "g2_plus" if marg.kind == "sum_frequency" else "g2_minus"
    return CorrelationFunction(axis, vals, kind)


def _bandwidth_check(g2: CorrelationFunction, tol: float = 1e-6) -> None:
    v = g2.values
    n = v.size
    spec = np.abs(np.fft.fftshift(np.fft.fft(v))) ** 2
    total = spec.sum()
    if total == 0:
        return
    freqs = np.fft.fftshift(np.fft.fftfreq(n, d=g2.axis.step)) * 2 * np.pi
    nyq = np.pi / g2.axis.step
    edge = np.abs(freqs) > 0.9 * nyq
    if spec[edge].sum() / total > tol:
        centroid = np.sum(np.abs(freqs) * spec) / total
        rms = np.sqrt(np.sum(freqs**2 * spec) / total)
        raise NyquistError(
            f"correlation is undersampled: estimated bandwidth {rms:.4g} rad/s "
            f"(mean |w| {centroid:.4g}) against Nyquist limit {nyq:.4g} rad/s; "
            f"sample at least every {np.pi / (2 * rms):.4g} s"
        )


def qwkt_inverse(g2: CorrelationFunction, omega_axis: Axis | None = None, carrier: float = 0.0) -> SpectralMarginal:
    """Recover ``F2(w) = 1/(2 pi) int dtau G2(tau) exp(i w tau)``.

    ``carrier`` demodulates ``G2`` before the Nyquist check so that a
    sum-frequency correlation riding on an optical carrier can be sampled
    relative to it.  The default output axis is the FFT-dual grid with a
    sample at ``carrier``.
    """
    taus = g2.axis.values()
    base = CorrelationFunction(g2.axis, g2.values * np.exp(1j * carrier * taus), g2.kind)
    _bandwidth_check(base)
    if omega_axis is None:
        step = 2.0 * np.pi / (g2.axis.count * g2.axis.step)
        omega_axis = Axis(carrier - (g2.axis.count // 2) * step, step, g2.axis.count)
    wt = trapezoid_weights(g2.axis) * g2.values
    w = omega_axis.values()
    dens = np.concatenate([np.exp(1j * np.outer(blk, taus)) @ wt for blk in _blocks(w)]).real / (2 * np.pi)
    kind = "sum_frequency" if g2.kind == "g2_plus" else "difference_frequency"
    return SpectralMarginal(omega_axis, dens, kind)


def marginal_from_pattern(pattern: InterferencePattern, omega_axis: Axis | None = None,
                          one_sided: bool | None = None) -> SpectralMarginal:
    """Projected spectrum from a measured HOM or N00N pattern.

    The baseline is removed through ``Re G2 = +-(2P - 1)``.  Only the real
    part of ``G2`` is observable, so the recovered spectrum is the even part
    of the true one; for N00N patterns (positive sum frequencies) the
    positive-frequency half is doubled unless ``one_sided=False``.
    """
    if pattern.kind == "hom":
        re_g = 1.0 - 2.0 * pattern.values
        kind = "g2_minus"
    elif pattern.kind == "noon":
        re_g = 2.0 * pattern.values - 1.0
        kind = "g2_plus"
    else:
        raise ValueError("only hom and noon patterns carry a QWKT spectrum")
    if one_sided is None:
        one_sided = kind == "g2_plus"
    m = qwkt_inverse(CorrelationFunction(pattern.axis, re_g, kind), omega_axis)
    if one_sided:
        d = np.where(m.axis.values() > 0, 2.0 * m.density, 0.0)
        m = SpectralMarginal(m.axis, d, m.kind)
    return m


def write_pattern_csv(pattern: InterferencePattern, path) -> None:
    lines = [
        f"# kind={pattern.kind} baseline={pattern.baseline:.17g} visibility={pattern.visibility:.17g}",
        "delay,probability",
    ]
    lines.extend(f"{x:.17g},{p:.17g}" for x, p in zip(pattern.delays(), pattern.values))
    Path(path).write_text("\n".join(lines) + "\n")


def read_pattern_csv(path) -> InterferencePattern:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError("pattern CSV must start with a '# kind=...' header")
    meta = dict(item.split("=", 1) for item in text[0][1:].split())
    if "kind" not in meta:
        raise ValueError("pattern header lacks kind")
    rows = [ln for ln in text[1:] if ln and not ln.startswith("#")]
    if rows and rows[0].startswith("delay"):
        rows = rows[1:]
    data = np.array([[float(x) for x in r.split(",")] for r in rows])
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("pattern rows must be 'delay,probability'")
    axis = Axis.from_values(data[:, 0])
    return InterferencePattern(axis, data[:, 1], meta["kind"], baseline=float(meta.get("baseline", "nan"))
                               if "baseline" in meta else None)
