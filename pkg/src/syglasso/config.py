"""Experiment specification files.

Grammar (one setting per line)::

    line     := blank | comment | key "=" value [comment]
    comment  := "#" anything
    key      := one of the keys below, or "mode<k>" for k = 1, 2, ...

Keys and values:

    kind        convergence | lambda_sweep | mismatch | fit_external
    mode<k>     <graph> name=value ...   graph is ar1 | star_block | erdos_renyi
                parameters: m, rho, block, edges, seed
    n_obs       comma-separated integers
    lambdas     comma-separated numbers, or logspace(a, b, n) for 10**linspace(a, b, n);
                a trailing "* lmax" makes the values fractions of the data's lambda_max
    seeds       comma-separated integers or ranges a-b (inclusive)
    truth_seed  integer, seeds Erdos-Renyi graphs that do not set their own seed
    generators  comma-separated subset of native, ks, kp
    tol         positive number
    max_sweeps  positive integer
    standardize true | false
    data        path to a SYGT file (relative to the spec file)
    sparsity    fraction in [0, 1] for thresholded supports
    out         output directory (relative to the spec file)

Unknown keys, repeated keys and malformed values are errors.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .synth import GraphSpec

KINDS = ("convergence", "lambda_sweep", "mismatch", "fit_external")
GENERATORS = ("native", "ks", "kp")
KEYS = {
    "kind", "n_obs", "lambdas", "seeds", "truth_seed", "generators", "tol",
    "max_sweeps", "standardize", "data", "sparsity", "out",
}
_GRAPH_PARAMS = {"m": int, "rho": float, "block": int, "edges": int, "seed": int}


class SpecError(ValueError):
    """Invalid experiment specification."""


@dataclass(frozen=True)
class LambdaGrid:
    values: tuple[float, ...]
    relative: bool = False

    def resolve(self, lam_max: float) -> np.ndarray:
        vals = np.array(self.values, dtype=np.float64)
        return vals * lam_max if self.relative else vals


@dataclass
class ExperimentSpec:
    kind: str
    modes: list[GraphSpec] = field(default_factory=list)
    n_obs: list[int] = field(default_factory=lambda: [10])
    lambdas: LambdaGrid = field(default_factory=lambda: LambdaGrid((1.0,)))
    seeds: list[int] = field(default_factory=lambda: [0])
    truth_seed: int = 0
    generators: list[str] = field(default_factory=lambda: ["native"])
    tol: float = 1e-6
    max_sweeps: int = 500
    standardize: bool = True
    data: Path | None = None
    sparsity: float = 0.05
    out: Path | None = None
    source: str = ""

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.source.encode()).hexdigest()[:16]

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise SpecError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.lambdas.values or min(self.lambdas.values) < 0:
            raise SpecError("lambda grid must be nonempty and nonnegative")
        if not self.seeds:
            raise SpecError("seeds must be nonempty")
        if not self.n_obs or min(self.n_obs) < 1:
            raise SpecError("n_obs must be positive")
        if self.kind == "fit_external":
            if self.data is None:
                raise SpecError("fit_external needs a data file")
        elif not self.modes:
            raise SpecError(f"{self.kind} needs at least one mode<k> graph")
        if not 0.0 <= self.sparsity <= 1.0:
            raise SpecError("sparsity must lie in [0, 1]")
        if self.kind == "convergence" and len(self.lambdas.values) != 1:
            raise SpecError("convergence runs take a single lambda")
        if self.kind == "fit_external" and len(self.lambdas.values) != 1:
            raise SpecError("fit_external takes a single lambda")


def _numbers(text: str, conv=float) -> list:
    try:
        return [conv(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise SpecError(f"bad number list {text!r}") from exc


def _lambdas(text: str) -> LambdaGrid:
    relative = False
    m = re.fullmatch(r"(.*?)\s*\*\s*lmax", text)
    if m:
        text, relative = m.group(1), True
    m = re.fullmatch(r"logspace\(([^)]*)\)", text)
    if m:
        args = _numbers(m.group(1))
        if len(args) != 3 or args[2] < 1 or args[2] != int(args[2]):
            raise SpecError(f"logspace needs (start, stop, count), got {text!r}")
        return LambdaGrid(tuple(np.logspace(args[0], args[1], int(args[2]))), relative)
    return LambdaGrid(tuple(_numbers(text)), relative)


def _seeds(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(\d+)\s*-\s*(\d+)", part)
        try:
            out.extend(range(int(m.group(1)), int(m.group(2)) + 1) if m else [int(part)])
        except ValueError as exc:
            raise SpecError(f"bad seed {part!r}") from exc
    return out


def _graph(text: str, index: int, truth_seed: int) -> GraphSpec:
    kind, *params = text.split()
    kw = {}
    for p in params:
        name, sep, val = p.partition("=")
        if not sep or name not in _GRAPH_PARAMS:
            raise SpecError(f"bad graph parameter {p!r} for mode{index + 1}")
        try:
            kw[name] = _GRAPH_PARAMS[name](val)
        except ValueError as exc:
            raise SpecError(f"bad value for {name}: {val!r}") from exc
    if "m" not in kw:
        raise SpecError(f"mode{index + 1} needs m=")
    if "block" in kw:
        kw["block_size"] = kw.pop("block")
    if kind == "erdos_renyi" and "seed" not in kw:
        kw["seed"] = int(np.random.SeedSequence([truth_seed, index]).generate_state(1)[0])
    try:
        return GraphSpec(kind, **kw)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"mode{index + 1}: {exc}") from exc


def _bool(text: str) -> bool:
    if text.lower() in ("true", "yes", "1"):
        return True
    if text.lower() in ("false", "no", "0"):
        return False
    raise SpecError(f"expected true or false, got {text!r}")


def parse_spec(text: str, base: str | os.PathLike = ".") -> ExperimentSpec:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise SpecError(f"line {lineno}: expected key = value")
        if key not in KEYS and not re.fullmatch(r"mode[1-9]\d*", key):
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise SpecError(f"line {lineno}: {key!r} given twice")
        raw[key] = value

    if "kind" not in raw:
        raise SpecError("missing kind")
    spec = ExperimentSpec(kind=raw["kind"], source=text)
    base = Path(base)
    try:
        if "truth_seed" in raw:
            spec.truth_seed = int(raw["truth_seed"])
        if "n_obs" in raw:
            spec.n_obs = _numbers(raw["n_obs"], int)
        if "lambdas" in raw:
            spec.lambdas = _lambdas(raw["lambdas"])
        if "seeds" in raw:
            spec.seeds = _seeds(raw["seeds"])
        if "generators" in raw:
            spec.generators = [g.strip() for g in raw["generators"].split(",")]
            bad = set(spec.generators) - set(GENERATORS)
            if bad:
                raise SpecError(f"unknown generators {sorted(bad)}")
        if "tol" in raw:
            spec.tol = float(raw["tol"])
            if spec.tol <= 0:
                raise SpecError("tol must be positive")
        if "max_sweeps" in raw:
            spec.max_sweeps = int(raw["max_sweeps"])
            if spec.max_sweeps < 1:
                raise SpecError("max_sweeps must be positive")
        if "standardize" in raw:
            spec.standardize = _bool(raw["standardize"])
        if "sparsity" in raw:
            spec.sparsity = float(raw["sparsity"])
    except ValueError as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(str(exc)) from exc
    if "data" in raw:
        spec.data = base / raw["data"]
    if "out" in raw:
        spec.out = base / raw["out"]

    n_modes = sum(1 for k in raw if k.startswith("mode"))
    for i in range(n_modes):
        key = f"mode{i + 1}"
        if key not in raw:
            raise SpecError(f"modes must be numbered 1..{n_modes}; {key} missing")
        spec.modes.append(_graph(raw[key], i, spec.truth_seed))
    spec.validate()
    return spec


def load_spec(path: str | os.PathLike) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from exc
    return parse_spec(text, base=path.parent)
