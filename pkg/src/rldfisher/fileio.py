"""JSON matrix, family and Kraus-set files.

A matrix is ``{"dim": n, "rows": [[[re, im], ...], ...]}``.  A family file is
``{"theta": [...], "matrix": <matrix>, "derivs": [<matrix>, ...]}``, with
``dim_in``/``dim_out`` added when it describes a channel through its Choi
matrix.  A Kraus file is ``{"theta": [...], "kraus": [<rect>, ...],
"kraus_derivs": [[<rect>, ...], ...]}`` where rectangular matrices use
``rows`` only and ``kraus_derivs[j][k]`` differentiates ``kraus[k]``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .families import ChannelFamilyPoint, StateFamilyPoint


class FormatError(ValueError):
    pass


def matrix_to_obj(m) -> dict:
    m = np.asarray(m, dtype=complex)
    rows = [[[float(z.real), float(z.imag)] for z in row] for row in m]
    out = {"rows": rows}
    if m.shape[0] == m.shape[1]:
        out = {"dim": m.shape[0], **out}
    return out


def matrix_from_obj(obj, square: bool = True, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict) or "rows" not in obj:
        raise FormatError(f"{where}: expected an object with 'rows'")
    try:
        arr = np.array(obj["rows"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: rows are not a regular array of [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise FormatError(f"{where}: each entry must be a [re, im] pair")
    m = arr[..., 0] + 1j * arr[..., 1]
    if square:
        if m.shape[0] != m.shape[1]:
            raise FormatError(f"{where}: matrix is not square ({m.shape[0]}x{m.shape[1]})")
        if "dim" in obj and obj["dim"] != m.shape[0]:
            raise FormatError(f"{where}: dim={obj['dim']} but {m.shape[0]} rows given")
    return m


def _load(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    return doc


def read_matrix(path) -> np.ndarray:
    return matrix_from_obj(_load(path), where=str(path))


def write_matrix(path, m) -> None:
    Path(path).write_text(json.dumps(matrix_to_obj(m)))


def family_to_obj(fam) -> dict:
    if isinstance(fam, ChannelFamilyPoint):
        base, extra = fam.choi, {"dim_in": fam.dim_in, "dim_out": fam.dim_out}
    else:
        base, extra = fam.rho, {}
    return {
        "theta": list(fam.theta),
        "matrix": matrix_to_obj(base),
        "derivs": [matrix_to_obj(d) for d in fam.derivs],
        **extra,
    }


def family_from_obj(doc, where: str = "family"):
    for key in ("matrix", "derivs"):
        if key not in doc:
            raise FormatError(f"{where}: missing field '{key}'")
    m = matrix_from_obj(doc["matrix"], where=f"{where}.matrix")
    derivs = tuple(
        matrix_from_obj(d, where=f"{where}.derivs[{j}]") for j, d in enumerate(doc["derivs"])
    )
    theta = tuple(doc.get("theta", ()))
    if "dim_in" in doc or "dim_out" in doc:
        return ChannelFamilyPoint(m, derivs, int(doc["dim_in"]), int(doc["dim_out"]), theta)
    return StateFamilyPoint(m, derivs, theta)


def read_family(path):
    return family_from_obj(_load(path), str(path))


def write_family(path, fam) -> None:
    Path(path).write_text(json.dumps(family_to_obj(fam)))


def read_kraus_family(path) -> ChannelFamilyPoint:
    doc = _load(path)
    if "kraus" not in doc:
        raise FormatError(f"{path}: missing field 'kraus'")
    kraus = [
        matrix_from_obj(k, square=False, where=f"{path}.kraus[{i}]")
        for i, k in enumerate(doc["kraus"])
    ]
    dk = doc.get("kraus_derivs")
    dkraus = None
    if dk is not None:
        dkraus = [
            [matrix_from_obj(m, square=False, where=f"{path}.kraus_derivs[{j}]") for m in row]
            for j, row in enumerate(dk)
        ]
        if any(len(row) != len(kraus) for row in dkraus):
            raise FormatError(f"{path}: each kraus_derivs row needs one entry per Kraus operator")
    return ChannelFamilyPoint.from_kraus(kraus, dkraus, tuple(doc.get("theta", ())))


def write_kraus_family(path, kraus, kraus_derivs=None, theta=()) -> None:
    doc = {"theta": list(theta), "kraus": [matrix_to_obj(k) for k in kraus]}
    if kraus_derivs is not None:
        doc["kraus_derivs"] = [[matrix_to_obj(m) for m in row] for row in kraus_derivs]
    Path(path).write_text(json.dumps(doc))
