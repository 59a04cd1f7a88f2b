"""Uniform grids, trapezoidal quadrature, scaled 2D Fourier transforms and SVD.

Every spectral and temporal quantity in the package lives on an :class:`Axis`
(uniform samples) or a :class:`Grid2` (complex field over two axes).  The
Fourier kernel is ``exp(-i*omega*t)`` on the forward transform, scaled so that
the continuous transform

    F(t1, t2) = 1/(2*pi) * iint f(w1, w2) exp(-i(w1 t1 + w2 t2)) dw1 dw2

is approximated, which makes the transform unitary (Parseval holds with the
grid measures on both sides).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "GuardError",
    "Axis",
    "Grid2",
    "trapezoid_weights",
    "integrate1",
    "integrate2",
    "fft2",
    "SVDResult",
    "svd",
]


class GuardError(ValueError):
    """A numerical cost or resolution guard was exceeded."""


@dataclass(frozen=True)
class Axis:
    """Uniformly spaced samples ``start + i*step`` for ``0 <= i < count``."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if not np.isfinite(self.start) or not np.isfinite(self.step):
            raise ValueError("axis start and step must be finite")
        if self.step <= 0:
            raise ValueError(f"axis step must be positive, got {self.step}")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"axis count must be an integer >= 2, got {self.count}")
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "count", int(self.count))

    @classmethod
    def centered(cls, step: float, count: int, center: float = 0.0) -> "Axis":
        """Axis symmetric about ``center``."""
        return cls(center - 0.5 * (count - 1) * step, step, count)

    @classmethod
    def linspace(cls, start: float, stop: float, count: int) -> "Axis":
        if stop <= start:
            raise ValueError("linspace requires stop > start")
        return cls(start, (stop - start) / (count - 1), count)

    @classmethod
    def from_values(cls, values, rtol: float = 1e-9) -> "Axis":
        """Recover an axis from sampled values, checking uniformity."""
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("need at least two samples to define an axis")
        step = (v[-1] - v[0]) / (v.size - 1)
        if not np.allclose(np.diff(v), step, rtol=rtol, atol=rtol * abs(step)):
            raise ValueError("samples are not uniformly spaced")
        return cls(float(v[0]), float(step), v.size)

    @property
    def stop(self) -> float:
        return self.start + (self.count - 1) * self.step

    @property
    def span(self) -> float:
        return (self.count - 1) * self.step

    def values(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)

    def shifted(self, offset: float) -> "Axis":
        return Axis(self.start + offset, self.step, self.count)

    def __len__(self) -> int:
        return self.count


@dataclass(frozen=True, eq=False)
class Grid2:
    """Complex (or real) field sampled on ``axis_row x axis_col``."""

    axis_row: Axis
    axis_col: Axis
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, copy=True)
        if not np.iscomplexobj(vals):
            vals = vals.astype(float)
        expected = (self.axis_row.count, self.axis_col.count)
        if vals.shape != expected:
            raise ValueError(f"grid values have shape {vals.shape}, axes require {expected}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid contains non-finite entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def with_values(self, values) -> "Grid2":
        return Grid2(self.axis_row, self.axis_col, values)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column coordinates broadcast to the grid shape."""
        return np.meshgrid(self.axis_row.values(), self.axis_col.values(), indexing="ij")


def trapezoid_weights(axis: Axis) -> np.ndarray:
    w = np.full(axis.count, axis.step)
    w[0] = w[-1] = 0.5 * axis.step
    return w


def integrate1(axis: Axis, values) -> float | complex:
    """Trapezoidal integral of samples on ``axis``."""
    vals = np.asarray(values)
    if vals.shape != (axis.count,):
        raise ValueError("sample count does not match axis")
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand contains non-finite entries")
    out = trapezoid_weights(axis) @ vals
    return out.item()


def integrate2(g: Grid2) -> float | complex:
    """Trapezoidal approximation of the double integral of ``g``.

    Exact for bilinear integrands.  Complex grids integrate componentwise.
    """
    wr = trapezoid_weights(g.axis_row)
    wc = trapezoid_weights(g.axis_col)
    return (wr @ g.values @ wc).item()


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _dual_axis(axis: Axis, start: float | None) -> Axis:
    step = 2.0 * np.pi / (axis.count * axis.step)
    if start is None:
        start = -(axis.count // 2) * step
    return Axis(start, step, axis.count)


def _transform_axis0(x: np.ndarray, ax_in: Axis, ax_out: Axis, sign: int) -> np.ndarray:
    # Exact DFT for arbitrary sample origins:
    # x_n y_k = x0 y0 + x0 k dy + y0 n dx + 2 pi n k / N
    n = np.arange(ax_in.count)
    x0, y0 = ax_in.start, ax_out.start
    pre = np.exp(sign * 1j * y0 * ax_in.step * n)
    post = np.exp(sign * 1j * (x0 * y0 + x0 * ax_out.step * n))
    shape = (-1,) + (1,) * (x.ndim - 1)
    y = x * pre.reshape(shape)
    y = np.fft.fft(y, axis=0) if sign < 0 else np.fft.ifft(y, axis=0) * ax_in.count
    return y * post.reshape(shape) * (ax_in.step / np.sqrt(2.0 * np.pi))


def fft2(g: Grid2, sign: str = "forward", out_starts: tuple[float | None, float | None] = (None, None)) -> Grid2:
    """Scaled 2D Fourier transform of ``g``.

    ``forward`` uses kernel ``exp(-i w t)``, ``inverse`` uses ``exp(+i w t)``.
    Output steps are ``2*pi/(N*step)``; output starts default to ``-(N//2)*step``
    and may be overridden, which is how a round trip recovers the original
    sample origins.
    """
    if sign not in ("forward", "inverse"):
        raise ValueError(f"sign must be 'forward' or 'inverse', got {sign!r}")
    for ax in (g.axis_row, g.axis_col):
        if not _is_pow2(ax.count):
            raise ValueError(f"fft2 requires power-of-two counts, got {ax.count}")
    s = -1 if sign == "forward" else 1
    out_row = _dual_axis(g.axis_row, out_starts[0])
    out_col = _dual_axis(g.axis_col, out_starts[1])
    vals = np.asarray(g.values, dtype=complex)
    vals = _transform_axis0(vals, g.axis_row, out_row, s)
    vals = _transform_axis0(vals.T, g.axis_col, out_col, s).T
    return Grid2(out_row, out_col, vals)


class SVDResult(NamedTuple):
    singular_values: np.ndarray
    left: np.ndarray
    right_h: np.ndarray


def svd(m) -> SVDResult:
    """Thin SVD ``m = left @ diag(singular_values) @ right_h``, values descending."""
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError("svd expects a 2D matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return SVDResult(s, u, vh)
