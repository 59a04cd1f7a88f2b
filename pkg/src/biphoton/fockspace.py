"""Exact few-photon Fock-space evolution through linear multiports.

Transition amplitudes are permanents of row/column-repeated submatrices of
the mode unitary,

    <out| U |in> = per(U[out, in]) / sqrt(prod in_j! prod out_k!)

with ``U[k, j]`` the amplitude for a photon entering mode ``j`` to leave in
mode ``k``.  Partial distinguishability is modelled by tensoring each spatial
mode with two temporal layers; the layout is spatial-major, i.e. mode index
``2 * spatial + temporal``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .numerics import Axis, GuardError
from .twofold import InterferencePattern

__all__ = [
    "MAX_PHOTONS",
    "MultiportUnitary",
    "FockDistribution",
    "HollandBurnettState",
    "permanent",
    "standard_unitary",
    "occupations",
    "evolve",
    "evolve_state",
    "delayed_pair_distribution",
    "hb_coefficients",
    "noon_phase_fringe",
    "fourier_suppressed",
]

MAX_PHOTONS = 8
TEMPORAL_LAYERS = 2


def permanent(m) -> complex:
    """Permanent by Ryser's formula with Gray-code row-sum updates.

    ``O(2^n n)`` operations; the empty matrix has permanent 1.
    """
    a = np.asarray(m, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("permanent requires a square matrix")
    if n == 0:
        return 1.0 + 0j
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    prev_gray = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        changed = gray ^ prev_gray
        col = changed.bit_length() - 1
        if gray & changed:
            row_sums += a[:, col]
        else:
            row_sums -= a[:, col]
        prev_gray = gray
        sign = -1.0 if bin(gray).count("1") % 2 else 1.0
        total += sign * np.prod(row_sums)
    return complex((-1) ** n * total)


@dataclass(frozen=True, eq=False)
class MultiportUnitary:
    matrix: np.ndarray

    def __post_init__(self):
        u = np.array(self.matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("multiport matrix must be square")
        err = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
        if err > 1e-10:
            raise ValueError(f"matrix is not unitary (||U^dag U - 1|| = {err:.2e})")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    @property
    def modes(self) -> int:
        return self.matrix.shape[0]

    def tensor_identity(self, layers: int) -> "MultiportUnitary":
        return MultiportUnitary(np.kron(self.matrix, np.eye(layers)))


def standard_unitary(kind: str, m: int | None = None) -> MultiportUnitary:
    """``bs50`` (real, with -1 on one reflection) or ``fourier`` of size ``m``."""
    if kind == "bs50":
        return MultiportUnitary(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    if kind == "fourier":
        if m is None or m < 2:
            raise ValueError("fourier multiport needs m >= 2")
        j, k = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        return MultiportUnitary(np.exp(2j * np.pi * j * k / m) / np.sqrt(m))
    raise ValueError(f"unknown multiport {kind!r}")


@dataclass(frozen=True, eq=False)
class FockDistribution:
    """Output probabilities keyed by occupation tuples."""

    probabilities: dict

    def __post_init__(self):
        total = sum(self.probabilities.values())
        if any(p < -1e-15 for p in self.probabilities.values()):
            raise ValueError("negative probability")
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total!r}")

    def __getitem__(self, occ) -> float:
        return self.probabilities.get(tuple(occ), 0.0)

    def __iter__(self):
        return iter(self.probabilities)

    def items(self):
        return self.probabilities.items()

    def total(self) -> float:
        return float(sum(self.probabilities.values()))

    def marginal(self, groups: int) -> "FockDistribution":
        """Sum consecutive blocks of ``groups`` modes (e.g. temporal layers)."""
        out: dict[tuple[int, ...], float] = {}
        for occ, p in self.probabilities.items():
            key = tuple(sum(occ[i:i + groups]) for i in range(0, len(occ), groups))
            out[key] = out.get(key, 0.0) + p
        return FockDistribution(out)

    def to_csv(self, path) -> None:
        lines = ["occupation,probability"]
        for occ in sorted(self.probabilities):
            lines.append(f"{'|'.join(map(str, occ))},{self.probabilities[occ]:.17g}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "FockDistribution":
        rows = Path(path).read_text().splitlines()[1:]
        probs = {}
        for r in rows:
            occ, p = r.split(",")
            probs[tuple(int(x) for x in occ.split("|"))] = float(p)
        return cls(probs)


def occupations(n_photons: int, n_modes: int):
    """All occupation tuples of ``n_photons`` bosons in ``n_modes`` modes."""
    for bars in itertools.combinations(range(n_photons + n_modes - 1), n_modes - 1):
        prev = -1
        occ = []
        for b in bars:
            occ.append(b - prev - 1)
            prev = b
        occ.append(n_photons + n_modes - 2 - prev)
        yield tuple(occ)


def _expand(occ) -> list[int]:
    return [mode for mode, n in enumerate(occ) for _ in range(n)]


def _check(n: int, m: int, u: MultiportUnitary) -> None:
    if u.modes != m:
        raise ValueError(f"unitary acts on {u.modes} modes, state has {m}")
    if n > MAX_PHOTONS:
        raise GuardError(f"{n} photons exceed the guard of {MAX_PHOTONS}")


def _amplitudes(inp: tuple[int, ...], u: np.ndarray, outs) -> np.ndarray:
    cols = _expand(inp)
    norm_in = math.prod(math.factorial(k) for k in inp)
    amps = np.empty(len(outs), dtype=complex)
    for n, out in enumerate(outs):
        rows = _expand(out)
        norm = math.sqrt(norm_in * math.prod(math.factorial(k) for k in out))
        amps[n] = permanent(u[np.ix_(rows, cols)]) / norm
    return amps


def evolve_state(state: dict, u: MultiportUnitary) -> dict:
    """Evolve a superposition ``{occupation: amplitude}`` of fixed photon number."""
    if not state:
        raise ValueError("empty state")
    sizes = {sum(k) for k in state}
    lengths = {len(k) for k in state}
    if len(sizes) != 1 or len(lengths) != 1:
        raise ValueError("state components must share photon number and mode count")
    n, m = sizes.pop(), lengths.pop()
    _check(n, m, u)
    outs = list(occupations(n, m))
    total = np.zeros(len(outs), dtype=complex)
    for inp, c in state.items():
        total += c * _amplitudes(tuple(inp), u.matrix, outs)
    return dict(zip(outs, total))


def evolve(inp, u: MultiportUnitary) -> FockDistribution:
    """Output distribution of the Fock state ``inp`` through ``u``."""
    inp = tuple(int(k) for k in inp)
    if any(k < 0 for k in inp):
        raise ValueError("occupations must be non-negative")
    amps = evolve_state({inp: 1.0}, u)
    return FockDistribution({k: float(abs(a) ** 2) for k, a in amps.items()})


def delayed_pair_distribution(n_photons: int, indistinguishability: float, u: MultiportUnitary | None = None) -> FockDistribution:
    """Spatial photon-number statistics for ``N/2 + N/2`` photons with partial overlap.

    Port 1's photons occupy ``sqrt(I) b1 + sqrt(1-I) b2`` over two temporal
    layers, port 0's photons sit in layer 1.  The evolution is ``u`` on the
    spatial modes (default ``bs50``) tensored with the identity on layers;
    the layers are traced out at the end.
    """
    if not 0.0 <= indistinguishability <= 1.0:
        raise ValueError("indistinguishability must lie in [0, 1]")
    if n_photons < 2 or n_photons % 2:
        raise ValueError("n_photons must be even and >= 2")
    if n_photons > MAX_PHOTONS:
        raise GuardError(f"{n_photons} photons exceed the guard of {MAX_PHOTONS}")
    u = standard_unitary("bs50") if u is None else u
    if u.modes != 2:
        raise ValueError("delayed pairs need a two-port spatial unitary")
    half = n_photons // 2
    a, b = math.sqrt(indistinguishability), math.sqrt(1.0 - indistinguishability)
    state = {}
    for k in range(half + 1):
        # (sqrt(I) b1^dag + sqrt(1-I) b2^dag)^n / sqrt(n!) in the Fock basis
        c = math.sqrt(math.comb(half, k)) * a**k * b ** (half - k)
        if c:
            state[(half, 0, k, half - k)] = c
    amps = evolve_state(state, u.tensor_identity(TEMPORAL_LAYERS))
    full = FockDistribution({k: float(abs(v) ** 2) for k, v in amps.items()})
    return full.marginal(TEMPORAL_LAYERS)


@dataclass(frozen=True, eq=False)
class HollandBurnettState:
    n_photons: int
    phi: float
    coefficients: np.ndarray

    def amplitudes(self) -> dict:
        """``{(2n, N-2n): c_n}``."""
        return {(2 * n, self.n_photons - 2 * n): c for n, c in enumerate(self.coefficients)}


def hb_coefficients(n_photons: int, phi: float = 0.0) -> HollandBurnettState:
    """``c_n = sqrt((2n)!(N-2n)!) / (2^{N/2} n! (N/2-n)!) e^{2 i n phi}``.

    Magnitudes are evaluated from exact rationals before the square root.
    With the real ``bs50`` convention, ``phi = pi/2`` reproduces the output
    of ``|N/2, N/2>`` up to a global phase.
    """
    if n_photons < 2 or n_photons % 2:
        raise ValueError("Holland-Burnett states need an even photon number")
    if n_photons > 20:
        raise GuardError("Holland-Burnett coefficients limited to N <= 20")
    half = n_photons // 2
    f = math.factorial
    coeffs = []
    for n in range(half + 1):
        sq = Fraction(f(2 * n) * f(n_photons - 2 * n), (2**half * f(n) * f(half - n)) ** 2)
        coeffs.append(math.sqrt(sq) * np.exp(2j * n * phi))
    return HollandBurnettState(n_photons, phi, np.array(coeffs))


def noon_phase_fringe(n_photons: int, phi_axis) -> InterferencePattern:
    """Projection of the phase-shifted N00N state back onto itself.

    ``(|N0> + e^{i N phi}|0N>)/sqrt(2)`` overlapped with
    ``(|N0> + |0N>)/sqrt(2)`` gives ``1/2 (1 + cos N phi)``.
    """
    if n_photons < 1:
        raise ValueError("n_photons must be >= 1")
    axis = phi_axis if isinstance(phi_axis, Axis) else Axis.from_values(phi_axis)
    phi = axis.values()
    ref = np.array([1.0, 1.0]) / np.sqrt(2)
    vals = np.empty(phi.size)
    for k, p in enumerate(phi):
        # phase shifter exp(i phi n) on mode 1 only touches the |0N> component
        state = np.array([1.0, np.exp(1j * n_photons * p)]) / np.sqrt(2)
        vals[k] = abs(ref.conj() @ state) ** 2
    return InterferencePattern(axis, vals, "fock_scan", baseline=0.5)


def fourier_suppressed(out) -> bool:
    """Suppression rule for ``|1...1>`` into the ``m``-mode Fourier multiport.

    The outcome is forbidden when the sum of occupied mode labels (with
    multiplicity) is not divisible by ``m``.
    """
    m = len(out)
    return sum(_expand(out)) % m != 0
