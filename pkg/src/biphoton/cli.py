"""Scenario-driven command line front end.

Scenarios are YAML documents with four sections::

    source:      {type: gaussian | comb | custom, ...}
    experiment:  {type: hom | hom_temporal | hom_spectral | noon | franson | fourfold | fock, ...}
    scan:        {start: ..., stop: ..., points: ...}
    output:      {path: ..., format: csv}

Quantities are SI (rad/s, s).  Strings with a unit suffix are converted at
parse time: ``THz`` (ordinary frequency, converted to rad/s), ``rad/s``,
``fs``/``ps``/``ns``/``s`` and ``nm`` (vacuum wavelength of a carrier).

Exit codes: 0 success, 1 configuration error, 2 numerical guard violation.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import yaml

from . import __version__
from .fockspace import MAX_PHOTONS, delayed_pair_distribution, evolve, standard_unitary
from .fourfold import MAX_DIRECT_POINTS, SourcePair, fourfold_pattern, fourfold_visibility
from .numerics import Axis, GuardError
from .spectra import comb_jsa, custom_jsa, gaussian_jsa, schmidt_analysis, to_temporal
from .twofold import (
    InterferencePattern,
    franson_pattern,
    hom_pattern,
    hom_pattern_temporal,
    marginal_from_pattern,
    noon_pattern,
    read_pattern_csv,
    spectrally_resolved_hom,
    write_pattern_csv,
)

SPEED_OF_LIGHT = 299_792_458.0
MAX_GRID_POINTS = 4096
EXPERIMENTS = ("hom", "hom_temporal", "hom_spectral", "noon", "franson", "fourfold", "fock")
SOURCES = ("gaussian", "comb", "custom")

_UNITS = {
    "rad/s": 1.0,
    "thz": 2 * math.pi * 1e12,
    "ghz": 2 * math.pi * 1e9,
    "s": 1.0,
    "ns": 1e-9,
    "ps": 1e-12,
    "fs": 1e-15,
}
_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*([A-Za-z/]+)?\s*$")


class ConfigError(Exception):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Violation:
    key: str
    message: str
    guard: bool = False

    def __str__(self):
        return f"{self.key}: {self.message}"


def parse_quantity(value, kind: str = "any"):
    """Convert a number or ``"<number> <unit>"`` string to SI."""
    if isinstance(value, bool):
        raise ValueError("expected a number")
    if isinstance(value, (int, float)):
        return float(value)
    m = _QUANTITY.match(str(value))
    if not m:
        raise ValueError(f"cannot parse quantity {value!r}")
    number = float(m.group(1))
    unit = (m.group(2) or "").lower()
    if not unit:
        return number
    if unit == "nm":
        if kind != "carrier":
            raise ValueError("nm is only accepted for carrier frequencies")
        return 2 * math.pi * SPEED_OF_LIGHT / (number * 1e-9)
    if unit not in _UNITS:
        raise ValueError(f"unknown unit {m.group(2)!r}")
    return number * _UNITS[unit]


@dataclass(frozen=True)
class ScanSpec:
    start: float
    stop: float
    points: int


@dataclass(frozen=True)
class OutputSpec:
    path: str
    format: str = "csv"


@dataclass(frozen=True)
class ScenarioConfig:
    source: dict | None
    experiment: dict
    scan: ScanSpec
    output: OutputSpec
    base_dir: str = field(default=".", compare=False)

    def to_dict(self) -> dict:
        d = {"experiment": self.experiment, "scan": asdict(self.scan), "output": asdict(self.output)}
        if self.source is not None:
            d = {"source": self.source, **d}
        return d

    @classmethod
    def from_dict(cls, raw, base_dir=".") -> "ScenarioConfig":
        cfg, violations = _parse(raw, Path(base_dir))
        if violations:
            raise ConfigError(violations)
        return cfg


class _Collector:
    def __init__(self):
        self.violations: list[Violation] = []

    def add(self, key, message, guard=False):
        self.violations.append(Violation(key, message, guard))

    def quantity(self, section: dict, prefix: str, key: str, kind="any", required=True, positive=False, default=None):
        if key not in section:
            if required:
                self.add(f"{prefix}.{key}", "missing")
            return default
        try:
            v = parse_quantity(section[key], kind)
        except ValueError as exc:
            self.add(f"{prefix}.{key}", str(exc))
            return default
        if positive and not v > 0:
            self.add(f"{prefix}.{key}", "must be positive")
        return v

    def integer(self, section: dict, prefix: str, key: str, required=True, minimum=None, default=None):
        if key not in section:
            if required:
                self.add(f"{prefix}.{key}", "missing")
            return default
        v = section[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.add(f"{prefix}.{key}", "must be an integer")
            return default
        if minimum is not None and v < minimum:
            self.add(f"{prefix}.{key}", f"must be >= {minimum}")
        return v


def _parse_source(raw, prefix: str, col: _Collector, base: Path, depth: int = 0) -> dict | None:
    if not isinstance(raw, dict):
        col.add(prefix, "must be a mapping")
        return None
    kind = raw.get("type")
    if kind not in SOURCES:
        col.add(f"{prefix}.type", f"must be one of {', '.join(SOURCES)}")
        return None
    out: dict = {"type": kind}
    if kind == "gaussian":
        out["sigma_plus"] = col.quantity(raw, prefix, "sigma_plus", positive=True)
        out["sigma_minus"] = col.quantity(raw, prefix, "sigma_minus", positive=True)
        out["center_s"] = col.quantity(raw, prefix, "center_s", kind="carrier", positive=True)
        out["center_i"] = col.quantity(raw, prefix, "center_i", kind="carrier", positive=True,
                                       required=False, default=out["center_s"])
        count = col.integer(raw, prefix, "count", required=False, minimum=2, default=256)
        if isinstance(count, int) and count > MAX_GRID_POINTS:
            col.add(f"{prefix}.count", f"exceeds the grid guard of {MAX_GRID_POINTS} points per axis", guard=True)
        out["count"] = count
    elif kind == "comb":
        if depth > 0:
            col.add(f"{prefix}.base", "nested combs are not supported")
            return None
        base_src = _parse_source(raw.get("base"), f"{prefix}.base", col, base, depth + 1)
        out["base"] = base_src
        out["modes"] = col.integer(raw, prefix, "modes", minimum=1)
        out["spacing"] = col.quantity(raw, prefix, "spacing", positive=True)
        direction = raw.get("direction", "difference")
        if direction not in ("difference", "sum"):
            col.add(f"{prefix}.direction", "must be 'difference' or 'sum'")
        out["direction"] = direction
    else:
        path = raw.get("path")
        if not isinstance(path, str):
            col.add(f"{prefix}.path", "missing")
            return None
        if not (base / path).is_file():
            col.add(f"{prefix}.path", f"file not found: {path}")
        out["path"] = path
    return out


def _parse_experiment(raw, col: _Collector, base: Path) -> dict | None:
    if not isinstance(raw, dict):
        col.add("experiment", "missing" if raw is None else "must be a mapping")
        return None
    kind = raw.get("type")
    if kind not in EXPERIMENTS:
        col.add("experiment.type", f"must be one of {', '.join(EXPERIMENTS)}")
        return None
    out: dict = {"type": kind}
    p = "experiment"
    if kind == "hom_spectral":
        out["tau"] = col.quantity(raw, p, "tau", default=0.0, required=False)
    elif kind == "hom_temporal":
        out["oversample"] = col.integer(raw, p, "oversample", required=False, minimum=1, default=2)
        ov = out["oversample"]
        if isinstance(ov, int) and ov & (ov - 1):
            col.add("experiment.oversample", "must be a power of two")
    elif kind == "franson":
        bd = raw.get("base_delay", 0.0)
        if isinstance(bd, (list, tuple)):
            if len(bd) != 2:
                col.add("experiment.base_delay", "must be a delay or a pair [T1, T2]")
            else:
                vals = []
                for k, v in enumerate(bd):
                    try:
                        vals.append(parse_quantity(v))
                    except ValueError as exc:
                        col.add(f"experiment.base_delay[{k}]", str(exc))
                out["base_delay"] = vals
                out["mode"] = "independent"
        else:
            out["base_delay"] = col.quantity(raw, p, "base_delay", required=False, default=0.0)
            out["mode"] = "common_delay"
    elif kind == "fourfold":
        if "source2" not in raw:
            col.add("experiment.source2", "missing")
        else:
            out["source2"] = _parse_source(raw["source2"], "experiment.source2", col, base)
        method = raw.get("method", "schmidt")
        if method not in ("schmidt", "direct"):
            col.add("experiment.method", "must be 'schmidt' or 'direct'")
        out["method"] = method
        out["rank"] = col.integer(raw, p, "rank", required=False, minimum=1, default=8)
    elif kind == "fock":
        unitary = raw.get("unitary", "bs50")
        if unitary not in ("bs50", "fourier"):
            col.add("experiment.unitary", "must be 'bs50' or 'fourier'")
        out["unitary"] = unitary
        inp = raw.get("input")
        if not (isinstance(inp, list) and inp and all(isinstance(k, int) and not isinstance(k, bool) and k >= 0 for k in inp)):
            col.add("experiment.input", "must be a list of non-negative integers")
            return out
        out["input"] = list(inp)
        modes = 2 if unitary == "bs50" else len(inp)
        if unitary == "fourier" and len(inp) < 2:
            col.add("experiment.input", "fourier multiport needs at least two modes")
        if len(inp) != modes:
            col.add("experiment.input", f"needs {modes} modes for unitary {unitary}")
        n = sum(inp)
        if n > MAX_PHOTONS:
            col.add("experiment.input", f"{n} photons exceed the photon guard of {MAX_PHOTONS}", guard=True)
        if "indistinguishability" in raw:
            val = raw["indistinguishability"]
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not 0 <= val <= 1:
                col.add("experiment.indistinguishability", "must be a number in [0, 1]")
            else:
                out["indistinguishability"] = float(val)
            if unitary != "bs50" or len(inp) != 2 or inp[0] != inp[1]:
                col.add("experiment.indistinguishability", "requires bs50 with equal photon numbers per port")
        if "outcome" in raw:
            oc = raw["outcome"]
            if not (isinstance(oc, list) and len(oc) == modes and sum(oc) == n):
                col.add("experiment.outcome", "must be an occupation list matching the input photon number")
            else:
                out["outcome"] = list(oc)
    return out


def _parse(raw, base: Path) -> tuple[ScenarioConfig | None, list[Violation]]:
    col = _Collector()
    if not isinstance(raw, dict):
        col.add("config", "top level must be a mapping")
        return None, col.violations
    unknown = set(raw) - {"source", "experiment", "scan", "output"}
    for key in sorted(unknown):
        col.add(key, "unknown section")
    experiment = _parse_experiment(raw.get("experiment"), col, base)
    exp_kind = experiment["type"] if experiment else None
    source = None
    if "source" in raw:
        source = _parse_source(raw["source"], "source", col, base)
    elif exp_kind != "fock":
        col.add("source", "missing")

    scan_raw = raw.get("scan")
    scan = None
    if not isinstance(scan_raw, dict):
        col.add("scan", "missing" if scan_raw is None else "must be a mapping")
    else:
        start = col.quantity(scan_raw, "scan", "start")
        stop = col.quantity(scan_raw, "scan", "stop")
        points = col.integer(scan_raw, "scan", "points")
        if isinstance(points, int) and points < 2:
            col.add("scan.points", "must be >= 2")
        if start is not None and stop is not None and not stop > start:
            col.add("scan.stop", "must exceed scan.start")
        scan = ScanSpec(start, stop, points)

    out_raw = raw.get("output", {})
    output = None
    if not isinstance(out_raw, dict):
        col.add("output", "must be a mapping")
    else:
        fmt = out_raw.get("format", "csv")
        if fmt != "csv":
            col.add("output.format", "only 'csv' is supported")
        output = OutputSpec(str(out_raw.get("path", "out")), fmt)

    # compatibility between experiment and source
    if exp_kind == "hom_temporal" and source and source.get("type") == "gaussian":
        c = source.get("count")
        if isinstance(c, int) and c & (c - 1):
            col.add("source.count", "hom_temporal needs a power-of-two grid")
    if exp_kind == "fock" and experiment.get("outcome") and scan:
        if scan.start is not None and (scan.start < 0 or (scan.stop or 0) > 1):
            col.add("scan", "fock outcome scans run over indistinguishability in [0, 1]")
    if exp_kind == "fourfold" and experiment.get("method") == "direct":
        for key, src in (("source", source), ("experiment.source2", experiment.get("source2"))):
            if src and src.get("type") == "gaussian" and isinstance(src.get("count"), int):
                if src["count"] ** 4 > MAX_DIRECT_POINTS:
                    col.add(f"{key}.count", f"direct 4D quadrature limited to {MAX_DIRECT_POINTS} points",
                            guard=True)
    if col.violations:
        return None, col.violations
    return ScenarioConfig(source, experiment, scan, output, str(base)), []


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError([Violation("config", f"cannot read {path}: {exc.strerror}")]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([Violation("config", f"invalid YAML: {exc}")]) from exc
    return ScenarioConfig.from_dict(raw, path.parent)


def build_source(src: dict, base: Path):
    if src["type"] == "gaussian":
        return gaussian_jsa(src["sigma_plus"], src["sigma_minus"], src["center_s"], src["center_i"],
                            count=src["count"])
    if src["type"] == "comb":
        b = build_source(src["base"], base)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return comb_jsa(b, src["modes"], src["spacing"], src["direction"])
    return custom_jsa(base / src["path"])


def _write_grid_csv(grid, path, tau) -> None:
    lines = [f"# kind=hom_spectral tau={tau:.17g}", "omega_s,omega_i,density"]
    ws, wi = grid.mesh()
    for a, b, d in zip(ws.ravel(), wi.ravel(), grid.values.ravel()):
        lines.append(f"{a:.17g},{b:.17g},{d:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def simulate(cfg: ScenarioConfig, out_dir: Path) -> dict:
    """Run one scenario, write data files, return derived quantities."""
    out_dir.mkdir(parents=True, exist_ok=True)
    base = Path(cfg.base_dir)
    exp = cfg.experiment
    kind = exp["type"]
    axis = Axis.linspace(cfg.scan.start, cfg.scan.stop, cfg.scan.points)
    derived: dict = {}
    files = []
    if kind == "fock":
        u = standard_unitary("bs50") if exp["unitary"] == "bs50" else standard_unitary("fourier", len(exp["input"]))
        if "indistinguishability" in exp:
            dist = delayed_pair_distribution(sum(exp["input"]), exp["indistinguishability"], u)
        else:
            dist = evolve(exp["input"], u)
        dist.to_csv(out_dir / "distribution.csv")
        files.append("distribution.csv")
        if "outcome" in exp:
            n = sum(exp["input"])
            vals = [delayed_pair_distribution(n, float(i), u)[tuple(exp["outcome"])] for i in axis.values()]
            pat = InterferencePattern(axis, vals, "fock_scan")
            write_pattern_csv(pat, out_dir / "pattern.csv")
            files.append("pattern.csv")
            derived.update(baseline=pat.baseline, visibility=pat.visibility)
        derived["files"] = files
        return derived

    jsa = build_source(cfg.source, base)
    derived["purity"] = schmidt_analysis(jsa).purity
    if jsa.mode_overlap:
        derived["mode_overlap"] = jsa.mode_overlap
    if kind == "hom_spectral":
        grid = spectrally_resolved_hom(jsa, exp["tau"])
        _write_grid_csv(grid, out_dir / "spectral.csv", exp["tau"])
        derived["files"] = ["spectral.csv"]
        return derived
    if kind == "hom":
        pat = hom_pattern(jsa, axis)
    elif kind == "hom_temporal":
        pat = hom_pattern_temporal(to_temporal(jsa, pad=exp["oversample"]), axis)
    elif kind == "noon":
        pat = noon_pattern(jsa, axis)
    elif kind == "franson":
        pat = franson_pattern(jsa, axis, exp["base_delay"], exp["mode"])
    else:
        pair = SourcePair(jsa, build_source(exp["source2"], base))
        pat = fourfold_pattern(pair, axis, method=exp["method"], rank=exp["rank"])
        derived["fourfold_visibility"] = fourfold_visibility(pair, method=exp["method"], rank=exp["rank"])
        derived["purity_source2"] = schmidt_analysis(pair.jsa2).purity
        if "truncation_weight" in pat.meta:
            derived["truncation_weight"] = pat.meta["truncation_weight"]
    write_pattern_csv(pat, out_dir / "pattern.csv")
    derived.update(baseline=pat.baseline, visibility=pat.visibility, files=["pattern.csv"])
    if kind == "fourfold":
        # dip depth relative to the far-delay baseline, independent of the scan range
        derived["visibility"] = derived.pop("fourfold_visibility")
    return derived


def _print_violations(violations, stream) -> None:
    for v in violations:
        print(f"error: {v}", file=stream)


def _exit_for(violations) -> int:
    return 2 if all(v.guard for v in violations) else 1


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        _print_violations(exc.violations, sys.stderr)
        return _exit_for(exc.violations)
    out_dir = Path(args.out) if args.out else Path(cfg.base_dir) / cfg.output.path
    if args.out:
        cfg = ScenarioConfig(cfg.source, cfg.experiment, cfg.scan, OutputSpec(str(args.out), cfg.output.format),
                             cfg.base_dir)
    t0 = time.perf_counter()
    try:
        derived = simulate(cfg, out_dir)
    except GuardError as exc:
        print(f"error: numerical guard: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest = {
        "library": "biphoton",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": time.perf_counter() - t0,
        "config": cfg.to_dict(),
        "derived": derived,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {', '.join(derived['files'])} and manifest.json to {out_dir}")
    return 0


def cmd_validate(args) -> int:
    try:
        load_config(args.config)
    except ConfigError as exc:
        _print_violations(exc.violations, sys.stdout)
        return 1
    return 0


def cmd_qwkt(args) -> int:
    try:
        pat = read_pattern_csv(args.pattern)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    pat = InterferencePattern(pat.axis, pat.values, args.kind, baseline=pat.baseline)
    try:
        marg = marginal_from_pattern(pat)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    lines = [f"# kind={marg.kind}", "omega,density"]
    lines.extend(f"{w:.17g},{d:.17g}" for w, d in zip(marg.axis.values(), marg.density))
    Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biphoton", description="Two-photon interferometer simulations")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", help="run a scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides output.path)")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("validate", help="check a scenario without computing")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("qwkt", help="projected spectrum from an interference pattern")
    p.add_argument("--pattern", required=True)
    p.add_argument("--kind", required=True, choices=("hom", "noon"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_qwkt)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
