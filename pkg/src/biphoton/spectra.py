"""Joint spectral amplitudes (JSAs) of photon pairs and their analysis.

A JSA is stored on a grid of *detunings* about the carrier frequencies
``center_s`` and ``center_i``; absolute frequencies are ``center + detuning``.
Rows index the signal frequency, columns the idler frequency.  All
constructors return amplitudes normalized so that the trapezoidal integral of
``|f|^2`` is one.

The double-Gaussian family produced by :func:`gaussian_jsa` is a modelling
choice: ``sigma_plus`` and ``sigma_minus`` are the rms widths of the
sum- and difference-frequency intensity distributions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import ndimage

from .numerics import Axis, Grid2, fft2, integrate1, integrate2, svd, trapezoid_weights

__all__ = [
    "JointSpectralAmplitude",
    "JointTemporalAmplitude",
    "SchmidtAnalysis",
    "SpectralMarginal",
    "ModeOverlapWarning",
    "gaussian_jsa",
    "comb_jsa",
    "custom_jsa",
    "save_jsa",
    "from_function",
    "to_temporal",
    "from_temporal",
    "schmidt_analysis",
    "marginal",
    "signal_spectrum",
    "swapped_values",
    "symmetrize",
    "antisymmetrize",
    "symmetry_score",
]

SUPPORT_SIGMAS = 6.0
DEFAULT_SIGMAS = 8.0


class ModeOverlapWarning(UserWarning):
    """Displaced comb copies are not mutually orthogonal."""


def _norm2(grid: Grid2) -> float:
    return float(integrate2(grid.with_values(np.abs(grid.values) ** 2)))


@dataclass(frozen=True, eq=False)
class JointSpectralAmplitude:
    grid: Grid2
    center_s: float
    center_i: float
    renormalization: float = 1.0
    mode_overlap: float = 0.0

    def __post_init__(self):
        if not (self.center_s > 0 and self.center_i > 0):
            raise ValueError("carrier frequencies must be strictly positive")
        if abs(self.norm() - 1.0) > 1e-8:
            raise ValueError(f"JSA is not normalized (norm={self.norm():.3e}); use from_values")

    @classmethod
    def from_values(cls, axis_s: Axis, axis_i: Axis, values, center_s: float, center_i: float):
        """Build a JSA from raw samples, rescaling to unit norm."""
        grid = Grid2(axis_s, axis_i, np.asarray(values, dtype=complex))
        n = _norm2(grid)
        if not n > 0:
            raise ValueError("degenerate amplitude: all samples are zero")
        scale = 1.0 / np.sqrt(n)
        return cls(grid.with_values(grid.values * scale), float(center_s), float(center_i), scale)

    @property
    def axis_s(self) -> Axis:
        return self.grid.axis_row

    @property
    def axis_i(self) -> Axis:
        return self.grid.axis_col

    @property
    def values(self) -> np.ndarray:
        return self.grid.values

    def omega_s(self) -> np.ndarray:
        return self.center_s + self.axis_s.values()

    def omega_i(self) -> np.ndarray:
        return self.center_i + self.axis_i.values()

    def norm(self) -> float:
        return _norm2(self.grid)

    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def weights(self) -> np.ndarray:
        return np.outer(trapezoid_weights(self.axis_s), trapezoid_weights(self.axis_i))

    def with_values(self, values) -> "JointSpectralAmplitude":
        return JointSpectralAmplitude.from_values(self.axis_s, self.axis_i, values, self.center_s, self.center_i)


@dataclass(frozen=True, eq=False)
class JointTemporalAmplitude:
    """Fourier dual of a JSA; ``source_starts`` allows the exact inverse."""

    grid: Grid2
    center_s: float
    center_i: float
    source_starts: tuple[float, float]

    def energy(self) -> float:
        return _norm2(self.grid)


@dataclass(frozen=True, eq=False)
class SchmidtAnalysis:
    schmidt_coefficients: np.ndarray
    purity: float
    schmidt_number: float
    signal_modes: np.ndarray | None = field(default=None, repr=False)
    idler_modes: np.ndarray | None = field(default=None, repr=False)

    def truncation_weight(self, rank: int) -> float:
        return float(max(0.0, 1.0 - self.schmidt_coefficients[:rank].sum()))


@dataclass(frozen=True, eq=False)
class SpectralMarginal:
    """Projected intensity on an absolute-frequency axis."""

    axis: Axis
    density: np.ndarray
    kind: str

    def __post_init__(self):
        d = np.asarray(self.density, dtype=float)
        if d.shape != (self.axis.count,):
            raise ValueError("density does not match axis")
        object.__setattr__(self, "density", d)

    def area(self) -> float:
        return float(integrate1(self.axis, self.density))

    def mean(self) -> float:
        w = self.axis.values()
        return float(integrate1(self.axis, w * self.density) / self.area())

    def std(self) -> float:
        w = self.axis.values() - self.mean()
        return float(np.sqrt(integrate1(self.axis, w * w * self.density) / self.area()))

    def fwhm_bandwidth(self) -> float:
        return 2.0 * np.sqrt(2.0 * np.log(2.0)) * self.std()


def _axis_for(sigma_axis: float, count: int, axis: Axis | None, label: str) -> Axis:
    if axis is None:
        half = DEFAULT_SIGMAS * sigma_axis
        return Axis.centered(2.0 * half / (count - 1), count)
    lo, hi = axis.start, axis.stop
    need = SUPPORT_SIGMAS * sigma_axis
    if lo > -need * (1 - 1e-9) or hi < need * (1 - 1e-9):
        raise ValueError(
            f"{label} axis [{lo:.4g}, {hi:.4g}] does not cover +-{SUPPORT_SIGMAS:g} sigma ({need:.4g})"
        )
    return axis


def gaussian_jsa(
    sigma_plus: float,
    sigma_minus: float,
    center_s: float,
    center_i: float | None = None,
    count: int = 256,
    axis_s: Axis | None = None,
    axis_i: Axis | None = None,
    phase=None,
) -> JointSpectralAmplitude:
    """Double-Gaussian JSA ``exp(-nu_+^2/(4 s_+^2)) exp(-nu_-^2/(4 s_-^2))``.

    ``nu_+-`` are the sum/difference detunings.  ``sigma_plus < sigma_minus``
    gives frequency anti-correlation, the reverse positive correlation and
    equality a separable state.  The default grid spans +-8 rms widths of the
    per-photon intensity; explicit axes must cover at least +-6.

    ``phase`` optionally maps ``(nu_s, nu_i)`` meshes to a spectral phase.
    """
    if not (sigma_plus > 0 and sigma_minus > 0):
        raise ValueError("sigma_plus and sigma_minus must be positive")
    if center_i is None:
        center_i = center_s
    sigma_axis = 0.5 * np.hypot(sigma_plus, sigma_minus)
    axis_s = _axis_for(sigma_axis, count, axis_s, "signal")
    axis_i = _axis_for(sigma_axis, count, axis_i, "idler")
    ns, ni = np.meshgrid(axis_s.values(), axis_i.values(), indexing="ij")
    vals = np.exp(-((ns + ni) ** 2) / (4 * sigma_plus**2) - (ns - ni) ** 2 / (4 * sigma_minus**2))
    vals = vals.astype(complex)
    if phase is not None:
        vals = vals * np.exp(1j * np.asarray(phase(ns, ni)))
    return JointSpectralAmplitude.from_values(axis_s, axis_i, vals, center_s, center_i)


def from_function(func, axis_s: Axis, axis_i: Axis, center_s: float, center_i: float) -> JointSpectralAmplitude:
    """Sample ``func(nu_s, nu_i)`` (detunings, broadcast meshes) and normalize."""
    ns, ni = np.meshgrid(axis_s.values(), axis_i.values(), indexing="ij")
    return JointSpectralAmplitude.from_values(axis_s, axis_i, func(ns, ni), center_s, center_i)


def _fourier_shift(grid: Grid2, d_row: float, d_col: float) -> np.ndarray:
    """Values of ``g(x - d_row, y - d_col)`` by band-limited (Fourier) translation."""
    pad_r = 1 << int(np.ceil(np.log2(grid.axis_row.count)))
    pad_c = 1 << int(np.ceil(np.log2(grid.axis_col.count)))
    v = np.zeros((2 * pad_r, 2 * pad_c), dtype=complex)
    v[: grid.shape[0], : grid.shape[1]] = grid.values
    big = Grid2(Axis(grid.axis_row.start, grid.axis_row.step, 2 * pad_r),
                Axis(grid.axis_col.start, grid.axis_col.step, 2 * pad_c), v)
    t = fft2(big, "forward")
    tr, tc = np.meshgrid(t.axis_row.values(), t.axis_col.values(), indexing="ij")
    t = t.with_values(t.values * np.exp(-1j * (tr * d_row + tc * d_col)))
    back = fft2(t, "inverse", out_starts=(big.axis_row.start, big.axis_col.start))
    return back.values[: grid.shape[0], : grid.shape[1]]


def comb_jsa(
    base: JointSpectralAmplitude,
    mode_count: int,
    mode_spacing: float,
    direction: str = "difference",
) -> JointSpectralAmplitude:
    """Coherent equal-weight sum of ``mode_count`` displaced copies of ``base``.

    Copies are spaced by ``mode_spacing`` in the difference frequency
    (``direction="difference"``, signal up / idler down) or in the sum
    frequency (``"sum"``), symmetrically about the base position.  Emits
    :class:`ModeOverlapWarning` when neighbouring copies overlap by more
    than 1e-3; the returned JSA carries the worst overlap as ``mode_overlap``.
    """
    if mode_count < 1:
        raise ValueError("mode_count must be >= 1")
    if direction not in ("difference", "sum"):
        raise ValueError("direction must be 'difference' or 'sum'")
    if mode_count == 1:
        return base
    sgn = -1.0 if direction == "difference" else 1.0
    offsets = (np.arange(mode_count) - 0.5 * (mode_count - 1)) * mode_spacing
    reach = 0.5 * abs(offsets[-1])
    if reach >= 0.5 * min(base.axis_s.span, base.axis_i.span):
        raise ValueError("comb does not fit the grid; enlarge the axes or reduce spacing")
    copies = [_fourier_shift(base.grid, 0.5 * d, sgn * 0.5 * d) for d in offsets]
    w = base.weights()
    a, b = copies[0], copies[1]
    overlap = abs(np.sum(w * a * b.conj())) / np.sqrt(
        np.sum(w * abs(a) ** 2) * np.sum(w * abs(b) ** 2))
    if overlap > 1e-3:
        warnings.warn(f"comb modes overlap (fidelity {overlap:.3g}); modes are not orthogonal",
                      ModeOverlapWarning, stacklevel=2)
    out = base.with_values(np.sum(copies, axis=0))
    return replace(out, mode_overlap=float(overlap))


_HEADER_KEYS = ("axis_s", "axis_i", "center_s", "center_i")


def save_jsa(jsa: JointSpectralAmplitude, path) -> None:
    """Write the text interchange format (header then ``re im`` rows)."""
    lines = ["# joint spectral amplitude, detuning axes in rad/s, row-major (signal, idler)"]
    for name, ax in (("axis_s", jsa.axis_s), ("axis_i", jsa.axis_i)):
        lines.append(f"{name} {ax.start!r} {ax.step!r} {ax.count}")
    lines.append(f"center_s {jsa.center_s!r}")
    lines.append(f"center_i {jsa.center_i!r}")
    flat = jsa.values.ravel()
    lines.extend(f"{v.real:.17g} {v.imag:.17g}" for v in flat)
    Path(path).write_text("\n".join(lines) + "\n")


def custom_jsa(path) -> JointSpectralAmplitude:
    """Load, validate and renormalize a JSA file.

    The applied scale factor is available as ``renormalization``.
    """
    header: dict[str, list[str]] = {}
    data: list[tuple[float, float]] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] in _HEADER_KEYS:
                if data:
                    raise ValueError(f"line {lineno}: header key after data")
                header[parts[0]] = parts[1:]
                continue
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 're im', got {line!r}")
            try:
                re_, im_ = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise ValueError(f"line {lineno}: malformed number") from exc
            data.append((re_, im_))
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise ValueError(f"malformed header: missing {', '.join(missing)}")
    try:
        axes = []
        for key in ("axis_s", "axis_i"):
            start, step, count = header[key]
            axes.append(Axis(float(start), float(step), int(count)))
        cs = float(header["center_s"][0])
        ci = float(header["center_i"][0])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"malformed header: {exc}") from exc
    n = axes[0].count * axes[1].count
    if len(data) != n:
        raise ValueError(f"shape mismatch: header implies {n} samples, found {len(data)}")
    arr = np.array(data)
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite entries in amplitude data")
    vals = (arr[:, 0] + 1j * arr[:, 1]).reshape(axes[0].count, axes[1].count)
    if not np.any(vals):
        raise ValueError("degenerate amplitude: all samples are zero")
    return JointSpectralAmplitude.from_values(axes[0], axes[1], vals, cs, ci)


def to_temporal(jsa: JointSpectralAmplitude, pad: int = 1) -> JointTemporalAmplitude:
    """Joint temporal amplitude of the detuning envelope.

    ``pad`` zero-pads both frequency axes by that factor (a power of two),
    which refines the time sampling without changing the time window.
    The absolute carrier ``exp(-i(center_s t1 + center_i t2))`` is factored
    out and kept as ``center_s``/``center_i``.
    """
    if pad < 1 or (pad & (pad - 1)):
        raise ValueError("pad must be a power of two")
    grid = jsa.grid
    if pad > 1:
        ns, ni = grid.shape
        extra_s, extra_i = (pad - 1) * ns // 2, (pad - 1) * ni // 2
        vals = np.zeros((pad * ns, pad * ni), dtype=complex)
        vals[extra_s:extra_s + ns, extra_i:extra_i + ni] = grid.values
        grid = Grid2(
            Axis(grid.axis_row.start - extra_s * grid.axis_row.step, grid.axis_row.step, pad * ns),
            Axis(grid.axis_col.start - extra_i * grid.axis_col.step, grid.axis_col.step, pad * ni),
            vals,
        )
    t = fft2(grid, "forward")
    return JointTemporalAmplitude(t, jsa.center_s, jsa.center_i,
                                  (grid.axis_row.start, grid.axis_col.start))


def from_temporal(jta: JointTemporalAmplitude) -> JointSpectralAmplitude:
    g = fft2(jta.grid, "inverse", out_starts=jta.source_starts)
    return JointSpectralAmplitude.from_values(g.axis_row, g.axis_col, g.values, jta.center_s, jta.center_i)


def schmidt_analysis(jsa: JointSpectralAmplitude) -> SchmidtAnalysis:
    """Schmidt coefficients of the JSA from the quadrature-weighted SVD.

    ``signal_modes[:, k]`` and ``idler_modes[:, k]`` are orthonormal under
    the trapezoidal measure of the respective axis.
    """
    ws = np.sqrt(trapezoid_weights(jsa.axis_s))
    wi = np.sqrt(trapezoid_weights(jsa.axis_i))
    s, u, vh = svd(ws[:, None] * jsa.values * wi[None, :])
    lam = s**2
    lam = lam / lam.sum()
    purity = float(np.sum(lam**2))
    return SchmidtAnalysis(lam, purity, 1.0 / purity, u / ws[:, None], vh.T / wi[:, None])


def _common_step_values(jsa: JointSpectralAmplitude) -> tuple[np.ndarray, Axis, Axis]:
    """Intensity on axes sharing one step (bilinear resampling if needed)."""
    inten = jsa.intensity()
    hs, hi = jsa.axis_s.step, jsa.axis_i.step
    if np.isclose(hs, hi, rtol=1e-12, atol=0):
        return inten, jsa.axis_s, jsa.axis_i
    h = min(hs, hi)
    ax_s = Axis(jsa.axis_s.start, h, int(np.floor(jsa.axis_s.span / h + 1e-9)) + 1)
    ax_i = Axis(jsa.axis_i.start, h, int(np.floor(jsa.axis_i.span / h + 1e-9)) + 1)
    rs = (ax_s.values() - jsa.axis_s.start) / hs
    ri = (ax_i.values() - jsa.axis_i.start) / hi
    cr, cc = np.meshgrid(rs, ri, indexing="ij")
    out = ndimage.map_coordinates(inten, [cr, cc], order=1, mode="constant", cval=0.0)
    out *= np.sum(inten) * hs * hi / (np.sum(out) * h * h)
    return out, ax_s, ax_i


def marginal(jsa: JointSpectralAmplitude, kind: str) -> SpectralMarginal:
    """Sum- or difference-frequency intensity ``F(w_pm) = 1/2 int dw_mp |f|^2``.

    Points of the rotated grid coincide with lattice nodes when both axes
    share a step, so the projection reduces to anti-diagonal (sum) or
    diagonal (difference) sums; otherwise the intensity is first resampled
    bilinearly onto a common step.  The returned axis is absolute.
    """
    if kind in ("sum", "sum_frequency", "+"):
        kind = "sum_frequency"
    elif kind in ("difference", "difference_frequency", "-"):
        kind = "difference_frequency"
    else:
        raise ValueError(f"unknown marginal kind {kind!r}")
    inten, ax_s, ax_i = _common_step_values(jsa)
    h = ax_s.step
    ns, ni = inten.shape
    if kind == "sum_frequency":
        flipped = inten[:, ::-1]
        dens = np.array([np.trace(flipped, offset=k) for k in range(ni - 1, -ns, -1)])
        start = jsa.center_s + jsa.center_i + ax_s.start + ax_i.start
    else:
        dens = np.array([np.trace(inten, offset=k) for k in range(ni - 1, -ns, -1)])
        start = jsa.center_s - jsa.center_i + ax_s.start - ax_i.stop
    axis = Axis(start, h, ns + ni - 1)
    return SpectralMarginal(axis, dens * h, kind)


def signal_spectrum(jsa: JointSpectralAmplitude, which: str = "signal") -> SpectralMarginal:
    """Single-photon intensity spectrum (idler or signal traced out)."""
    if which == "signal":
        dens = jsa.intensity() @ trapezoid_weights(jsa.axis_i)
        return SpectralMarginal(jsa.axis_s.shifted(jsa.center_s), dens, "signal")
    if which == "idler":
        dens = trapezoid_weights(jsa.axis_s) @ jsa.intensity()
        return SpectralMarginal(jsa.axis_i.shifted(jsa.center_i), dens, "idler")
    raise ValueError("which must be 'signal' or 'idler'")


def _sample(values: np.ndarray, coords) -> np.ndarray:
    """Cubic-spline evaluation at fractional indices, zero outside the grid."""
    kw = dict(order=3, mode="grid-constant")
    re = ndimage.map_coordinates(values.real, coords, **kw)
    im = ndimage.map_coordinates(values.imag, coords, **kw)
    return re + 1j * im


def swapped_values(jsa: JointSpectralAmplitude) -> np.ndarray:
    """``f(w2, w1)`` sampled on the grid of ``f(w1, w2)`` (zero off-support).

    With identical absolute axes this is the plain transpose; otherwise the
    swapped arguments are located by cubic-spline interpolation.
    """
    ax_s, ax_i = jsa.axis_s, jsa.axis_i
    if not np.isclose(ax_s.step, ax_i.step, rtol=1e-12, atol=0):
        raise ValueError("signal and idler axes must share one step for exchange operations")
    h = ax_s.step
    # signal index of absolute idler frequency, idler index of absolute signal frequency
    k = (jsa.center_i + ax_i.start - jsa.center_s - ax_s.start) / h
    if abs(k) < 1e-9 and ax_s.count == ax_i.count:
        return jsa.values.T.copy()
    rows = np.arange(ax_i.count)[None, :] + k
    cols = np.arange(ax_s.count)[:, None] - k
    kr = np.rint(k)
    if abs(k - kr) < 1e-9:
        rows, cols = np.rint(rows), np.rint(cols)
    rr, cc = np.broadcast_arrays(rows, cols)
    return _sample(jsa.values, [rr, cc])


def _exchange_combination(jsa: JointSpectralAmplitude, sign: float) -> JointSpectralAmplitude:
    ax_s, ax_i = jsa.axis_s, jsa.axis_i
    if not np.isclose(ax_s.step, ax_i.step, rtol=1e-12, atol=0):
        raise ValueError("signal and idler axes must share one step")
    lo = min(jsa.center_s + ax_s.start, jsa.center_i + ax_i.start)
    hi = max(jsa.center_s + ax_s.stop, jsa.center_i + ax_i.stop)
    h = ax_s.step
    count = int(np.ceil((hi - lo) / h - 1e-9)) + 1
    if count & (count - 1):
        count = 1 << int(np.ceil(np.log2(count)))
    center = 0.5 * (lo + hi)
    axis = Axis.centered(h, count)
    ws, wi = np.meshgrid(center + axis.values(), center + axis.values(), indexing="ij")
    f = _evaluate_absolute(jsa, ws, wi)
    g = _evaluate_absolute(jsa, wi, ws)
    return JointSpectralAmplitude.from_values(axis, axis, f + sign * g, center, center)


def _evaluate_absolute(jsa: JointSpectralAmplitude, ws, wi) -> np.ndarray:
    r = (ws - jsa.center_s - jsa.axis_s.start) / jsa.axis_s.step
    c = (wi - jsa.center_i - jsa.axis_i.start) / jsa.axis_i.step
    r = np.where(np.abs(r - np.rint(r)) < 1e-9, np.rint(r), r)
    c = np.where(np.abs(c - np.rint(c)) < 1e-9, np.rint(c), c)
    return _sample(jsa.values, [r, c])


def symmetrize(jsa: JointSpectralAmplitude) -> JointSpectralAmplitude:
    """Normalized ``f(w1, w2) + f(w2, w1)`` on a shared absolute axis.

    The result is centred on the midpoint of both carriers and has identical
    signal and idler axes, so non-degenerate pairs keep both orderings.
    """
    return _exchange_combination(jsa, +1.0)


def antisymmetrize(jsa: JointSpectralAmplitude) -> JointSpectralAmplitude:
    """Normalized ``f(w1, w2) - f(w2, w1)`` on a shared absolute axis."""
    return _exchange_combination(jsa, -1.0)


def symmetry_score(jsa: JointSpectralAmplitude) -> float:
    """``sum|f - f^T|^2 / sum|f|^2``: 0 for symmetric, 4 for antisymmetric."""
    f = jsa.values
    g = swapped_values(jsa)
    return float(np.sum(np.abs(f - g) ** 2) / np.sum(np.abs(f) ** 2))
