"""Problem configuration documents (YAML) and the built-in benchmark problems."""

import copy
import math
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import yaml

from .boundary import BoundaryForm, LinearBvpProblem
from .errors import BvpError, ConfigError
from .evolution import POSITION_BLOCK, VELOCITY_BLOCK, SecondOrderProblem, TimeGrid, lift_second_order, propagate_evolution
from .exprparse import evaluate_expression, parse_expression

_PERIODIC = [
    {"t": 0, "M": [[1, 0], [0, 1]]},
    {"t": "T", "M": [[-1, 0], [0, -1]]},
]

BUILTINS = {
    "periodic-resonance-sin": {
        "n": 1, "T": "2*pi", "m": 2000, "A": [["1"]], "A1": [["1"]], "f": ["sin(t)"],
        "b1_placement": POSITION_BLOCK, "boundary": _PERIODIC, "alpha": [0, 0],
    },
    "periodic-resonance-sin2": {
        "n": 1, "T": "2*pi", "m": 2000, "A": [["1"]], "A1": [["1"]], "f": ["sin(2*t)"],
        "b1_placement": POSITION_BLOCK, "boundary": _PERIODIC, "alpha": [0, 0],
    },
    "initial-value": {
        "n": 1, "T": "2*pi", "m": 2000, "A": [["1"]], "A1": [["1"]], "f": ["cos(2*t)"],
        "b1_placement": POSITION_BLOCK, "boundary": [{"t": 0, "M": [[1, 0], [0, 1]]}], "alpha": [1, 0],
    },
}

RUN_DEFAULTS = {
    "branch": "auto",
    "order": 8,
    "epsilon": [],
    "c_rho": None,
    "c_free": None,
    "rank_tol": 1e-8,
    "tol": None,
    "bifurcation_tol": 1e-6,
}


@dataclass
class ProblemSpec:
    name: str
    problem: SecondOrderProblem
    m: int
    boundary: List[tuple]  # (node index, k x 2n matrix)
    alpha: np.ndarray
    branch: str = "auto"
    order: int = 8
    epsilons: List[float] = field(default_factory=list)
    c_rho: Optional[np.ndarray] = None
    c_free: Optional[np.ndarray] = None
    rank_tol: float = 1e-8
    tol: Optional[float] = None
    bifurcation_tol: float = 1e-6
    out_dir: str = "out"

    @property
    def grid(self):
        return TimeGrid(self.problem.T, self.m)

    def build(self):
        """Lift, propagate and assemble the linear problem for numerics."""
        phase = lift_second_order(self.problem)
        table = propagate_evolution(phase, self.grid)
        return LinearBvpProblem(phase, table, BoundaryForm(tuple(self.boundary)), self.alpha)


def _number(value, path):
    if isinstance(value, bool):
        raise ConfigError(path, "expected a number")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        try:
            out = evaluate_expression(parse_expression(value), 0.0)
        except BvpError as exc:
            raise ConfigError(path, str(exc)) from exc
    else:
        raise ConfigError(path, f"expected a number or constant expression, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ConfigError(path, "value is not finite")
    return out


def _entry(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(path, "entries must be numbers or expression strings")
    if isinstance(value, str):
        try:
            parse_expression(value)
        except BvpError as exc:
            raise ConfigError(path, str(exc)) from exc
    return value


def _matrix(value, rows, cols, path, parse=_entry):
    if not isinstance(value, list) or len(value) != rows:
        raise ConfigError(path, f"expected {rows} rows")
    out = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise ConfigError(f"{path}[{i}]", f"expected {cols} entries")
        out.append([parse(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    return out


def _vector(value, size, path, parse=_number):
    if not isinstance(value, list) or len(value) != size:
        raise ConfigError(path, f"expected a list of {size} entries")
    return [parse(v, f"{path}[{i}]") for i, v in enumerate(value)]


def load_problem(config):
    """Validate a configuration and return a ProblemSpec.

    ``config`` is a mapping, YAML text, or a path to a YAML file. A
    ``problem.builtin`` name expands to a benchmark definition whose fields
    may be overridden inline.
    """
    if isinstance(config, os.PathLike) or (isinstance(config, str) and os.path.isfile(config)):
        path = os.fspath(config)
        try:
            with open(path, encoding="utf-8") as fh:
                config = fh.read()
        except OSError as exc:
            raise ConfigError("<config>", f"cannot read {path}: {exc}") from exc
    if isinstance(config, str):
        try:
            config = yaml.safe_load(config)
        except yaml.YAMLError as exc:
            raise ConfigError("<config>", f"invalid YAML: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("<config>", "top level must be a mapping")

    raw = config.get("problem")
    if not isinstance(raw, dict):
        raise ConfigError("problem", "missing problem section")
    name = raw.get("builtin")
    if name is not None:
        if name not in BUILTINS:
            raise ConfigError("problem.builtin", f"unknown builtin {name!r}; known: {sorted(BUILTINS)}")
        merged = copy.deepcopy(BUILTINS[name])
        merged.update({k: v for k, v in raw.items() if k != "builtin"})
        raw = merged
    missing = [k for k in ("n", "T", "A", "f", "boundary", "alpha") if k not in raw]
    if missing:
        raise ConfigError(f"problem.{missing[0]}", "required field missing")

    n = raw["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigError("problem.n", "must be a positive integer")
    T = _number(raw["T"], "problem.T")
    if T <= 0:
        raise ConfigError("problem.T", "horizon must be positive")
    m = raw.get("m", 2000)
    if isinstance(m, bool) or not isinstance(m, int) or m < 2:
        raise ConfigError("problem.m", "must be an integer >= 2")
    if m % 2:
        raise ConfigError("problem.m", f"step count must be even for Simpson quadrature, got {m}")
    A = _matrix(raw["A"], n, n, "problem.A")
    A1 = _matrix(raw["A1"], n, n, "problem.A1") if raw.get("A1") is not None else None
    f = _vector(raw["f"], n, "problem.f", parse=_entry)
    placement = raw.get("b1_placement", POSITION_BLOCK)
    if placement not in (POSITION_BLOCK, VELOCITY_BLOCK):
        raise ConfigError("problem.b1_placement", f"must be {POSITION_BLOCK!r} or {VELOCITY_BLOCK!r}")

    pts = raw["boundary"]
    if not isinstance(pts, list) or not pts:
        raise ConfigError("problem.boundary", "expected a non-empty list of points")
    grid = TimeGrid(T, m)
    boundary = []
    k = None
    for j, pt in enumerate(pts):
        path = f"problem.boundary[{j}]"
        if not isinstance(pt, dict) or "M" not in pt:
            raise ConfigError(path, "each point needs 't' (or 'node') and 'M'")
        if "node" in pt:
            idx = pt["node"]
            if isinstance(idx, bool) or not isinstance(idx, int) or not 0 <= idx <= m:
                raise ConfigError(f"{path}.node", f"must be an integer in 0..{m}")
        else:
            tj = pt.get("t", 0)
            tj = T if tj in ("T", "end") else 0.0 if tj == "start" else _number(tj, f"{path}.t")
            if not 0.0 <= tj <= T * (1 + 1e-12):
                raise ConfigError(f"{path}.t", f"time {tj} outside [0, T]")
            idx = grid.snap(tj)
        M = pt["M"]
        if not isinstance(M, list) or not M:
            raise ConfigError(f"{path}.M", "expected a list of rows")
        rows = len(M) if k is None else k
        M = np.array(_matrix(M, rows, 2 * n, f"{path}.M", parse=_number))
        k = rows
        boundary.append((idx, M))
    alpha = np.array(_vector(raw["alpha"], k, "problem.alpha"))

    run = dict(RUN_DEFAULTS)
    run.update(config.get("run") or {})
    if run["branch"] not in ("auto", "laurent", "taylor"):
        raise ConfigError("run.branch", "must be auto, laurent or taylor")
    order = run["order"]
    if isinstance(order, bool) or not isinstance(order, int) or order < 0:
        raise ConfigError("run.order", "must be a non-negative integer")
    eps = run["epsilon"]
    eps = [eps] if isinstance(eps, (int, float, str)) and not isinstance(eps, bool) else eps
    if not isinstance(eps, list):
        raise ConfigError("run.epsilon", "expected a number or list of numbers")
    epsilons = [_number(e, f"run.epsilon[{i}]") for i, e in enumerate(eps)]
    c_rho = np.array(_vector(run["c_rho"], 2 * n, "run.c_rho")) if run["c_rho"] is not None else None
    c_free = np.array(_vector(run["c_free"], 2 * n, "run.c_free")) if run["c_free"] is not None else None
    rank_tol = _number(run["rank_tol"], "run.rank_tol")
    if not 0 < rank_tol < 1:
        raise ConfigError("run.rank_tol", "must lie in (0, 1)")
    tol = _number(run["tol"], "run.tol") if run["tol"] is not None else None
    bif_tol = _number(run["bifurcation_tol"], "run.bifurcation_tol")
    out_dir = (config.get("output") or {}).get("dir", "out")

    problem = SecondOrderProblem(n, T, A, f, A1, placement)
    return ProblemSpec(
        name or "inline", problem, m, boundary, alpha, run["branch"], order, epsilons,
        c_rho, c_free, rank_tol, tol, bif_tol, str(out_dir),
    )
