"""Text model specifications ``kind:name:key=val,key=val``.

Builtin models::

    builtin:gadc:gamma=0.5,N=0.2        channel, parameters (gamma, N)
    builtin:bernoulli:theta=0.3         state diag(theta, 1 - theta)
    builtin:diagonal:t1=0.2,t2=0.3      state diag(t1, ..., tk, 1 - sum t)
    file:kraus-file:path=ch.json        Kraus set with derivatives
    file:choi-file:path=fam.json        family file (state or Choi)

An optional ``h=<step>`` switches builtin models to central differences.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import fileio
from .families import StateFamilyPoint, finite_diff_point
from .gadc import GadcParams, gadc_family
from .models import bernoulli_family, diagonal_family

BUILTIN = ("gadc", "bernoulli", "diagonal")
FILE_KINDS = ("kraus-file", "choi-file")
_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_DIAG_KEY = re.compile(r"t([1-9][0-9]*)$")


class SpecError(ValueError):
    def __init__(self, message: str, text: str = "", position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position} in {text!r})"
        super().__init__(message)


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    name: str
    params: dict = field(default_factory=dict)
    path: str | None = None
    h: float | None = None

    @property
    def deriv_mode(self) -> str:
        return "analytic" if self.h is None else f"finite_diff({self.h!r})"

    def render(self) -> str:
        items = [f"{k}={float(v)!r}" for k, v in self.params.items()]
        if self.path is not None:
            items.insert(0, f"path={self.path}")
        if self.h is not None:
            items.append(f"h={self.h!r}")
        return f"{self.kind}:{self.name}:{','.join(items)}"

    def with_param(self, key: str, value: float) -> "ModelSpec":
        if key not in self.params:
            raise SpecError(f"model {self.name!r} has no parameter {key!r}")
        params = dict(self.params)
        params[key] = float(value)
        return ModelSpec(self.kind, self.name, params, self.path, self.h)

    def with_h(self, h: float | None) -> "ModelSpec":
        return ModelSpec(self.kind, self.name, dict(self.params), self.path, h)

    def build(self):
        """Evaluate the family point; raises ValueError for out-of-range parameters."""
        if self.name == "gadc":
            p = GadcParams(self.params["gamma"], self.params["N"])
            return gadc_family(p, h=self.h)
        if self.name == "bernoulli":
            theta = self.params["theta"]
            if self.h is None:
                return bernoulli_family(theta)
            bernoulli_family(theta)
            derivs = finite_diff_point(lambda t: np.diag([t[0], 1 - t[0]]), [theta], self.h)
            return StateFamilyPoint(np.diag([theta, 1 - theta]), tuple(derivs), (theta,))
        if self.name == "diagonal":
            t = [self.params[f"t{i + 1}"] for i in range(len(self.params))]
            p = np.array(t + [1 - sum(t)])
            if np.any(p <= 0):
                raise ValueError("diagonal model needs positive t_i with sum below 1")
            k = len(t)
            if self.h is None:
                dps = [np.r_[np.eye(k)[i], -1.0] for i in range(k)]
                return diagonal_family(p, dps, tuple(t))
            derivs = finite_diff_point(lambda v: np.diag(np.r_[v, 1 - v.sum()]), t, self.h)
            return StateFamilyPoint(np.diag(p), tuple(derivs), tuple(t))
        if self.name == "kraus-file":
            return fileio.read_kraus_family(self.path)
        return fileio.read_family(self.path)


def _number(text: str, raw: str, pos: int) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise SpecError(f"malformed number {raw!r}", text, pos) from None
    if not math.isfinite(v):
        raise SpecError(f"non-finite number {raw!r}", text, pos)
    return v


def _check_ranges(text: str, name: str, params: dict, positions: dict) -> None:
    def bad(key, why):
        raise SpecError(f"parameter {key}={params[key]!r} {why}", text, positions[key])

    if name == "gadc":
        for key in ("gamma", "N"):
            if not 0.0 < params[key] < 1.0:
                bad(key, "must lie in the open interval (0, 1)")
    elif name == "bernoulli":
        if not 0.0 < params["theta"] < 1.0:
            bad("theta", "must lie in the open interval (0, 1)")
    elif name == "diagonal":
        for key in params:
            if params[key] <= 0:
                bad(key, "must be positive")
        if sum(params.values()) >= 1:
            last = list(params)[-1]
            bad(last, "makes the probabilities sum to 1 or more")


def parse_model_spec(text: str) -> ModelSpec:
    parts = text.split(":", 2)
    if len(parts) != 3:
        raise SpecError("expected kind:name:key=val,...", text, len(text))
    kind, name, rest = parts
    name_pos = len(kind) + 1
    rest_pos = name_pos + len(name) + 1
    if kind not in ("builtin", "file"):
        raise SpecError(f"unknown kind {kind!r}; use 'builtin' or 'file'", text, 0)
    allowed = BUILTIN if kind == "builtin" else FILE_KINDS
    if name not in allowed:
        raise SpecError(
            f"unknown {kind} model {name!r}; choose from {', '.join(allowed)}", text, name_pos
        )
    params: dict[str, float] = {}
    positions: dict[str, int] = {}
    path = None
    h = None
    pos = rest_pos
    for item in rest.split(",") if rest else []:
        if "=" not in item:
            raise SpecError(f"expected key=value, got {item!r}", text, pos)
        key, raw = item.split("=", 1)
        if not _KEY.match(key):
            raise SpecError(f"invalid parameter name {key!r}", text, pos)
        vpos = pos + len(key) + 1
        if key in params or (key == "path" and path is not None) or (key == "h" and h is not None):
            raise SpecError(f"duplicate parameter {key!r}", text, pos)
        if key == "path" and kind == "file":
            if not raw:
                raise SpecError("empty path", text, vpos)
            path = raw
        elif key == "h":
            h = _number(text, raw, vpos)
            if h <= 0:
                raise SpecError("finite-difference step h must be positive", text, vpos)
        else:
            params[key] = _number(text, raw, vpos)
            positions[key] = pos
        pos += len(item) + 1

    if kind == "file":
        if path is None:
            raise SpecError(f"{name} needs path=<file>", text, rest_pos)
        if params:
            raise SpecError(f"unexpected parameter {next(iter(params))!r}", text, positions[next(iter(params))])
        if h is not None:
            raise SpecError("finite differences need a builtin model", text, rest_pos)
        return ModelSpec(kind, name, {}, path, None)

    if name == "diagonal":
        idx = []
        for key in params:
            m = _DIAG_KEY.match(key)
            if not m:
                raise SpecError(f"unexpected parameter {key!r} for diagonal", text, positions[key])
            idx.append(int(m.group(1)))
        if not idx:
            raise SpecError("diagonal needs parameters t1, t2, ...", text, rest_pos)
        if sorted(idx) != list(range(1, len(idx) + 1)):
            raise SpecError("diagonal parameters must be t1..tk without gaps", text, rest_pos)
        params = {f"t{i}": params[f"t{i}"] for i in range(1, len(idx) + 1)}
    else:
        required = ("gamma", "N") if name == "gadc" else ("theta",)
        for key in params:
            if key not in required:
                raise SpecError(f"unexpected parameter {key!r} for {name}", text, positions[key])
        for key in required:
            if key not in params:
                raise SpecError(f"missing parameter {key!r} for {name}", text, len(text))
        params = {k: params[k] for k in required}
    _check_ranges(text, name, params, positions)
    return ModelSpec(kind, name, params, None, h)
