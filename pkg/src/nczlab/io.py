"""Versioned JSON containers for functions, filtrations, Cuculescu sequences and CZ parts.

Every container is a JSON object with ``format = "nczlab"``, an integer
``version`` and a ``kind``. Complex arrays are stored as
``{"shape": [...], "data": [re, im, re, im, ...]}`` in row-major order, so a
reader in any language can rebuild them without numpy. The layout of each
kind is documented in the README.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .cuculescu import CuculescuSequence
from .cz_decompose import CZParts
from .filtration import Atom, AtomicFiltration
from .operator_space import GridDomain, OpValuedFunction
from .report import _jsonable

FORMAT = "nczlab"
VERSION = 1


class FormatError(ValueError):
    pass


def encode_array(a) -> dict:
    a = np.asarray(a, dtype=complex)
    flat = np.empty(2 * a.size)
    flat[0::2] = a.real.ravel()
    flat[1::2] = a.imag.ravel()
    return {"shape": list(a.shape), "data": flat.tolist()}


def decode_array(obj: dict) -> np.ndarray:
    flat = np.asarray(obj["data"], dtype=float)
    shape = tuple(obj["shape"])
    if flat.size != 2 * int(np.prod(shape)):
        raise FormatError(f"array data has {flat.size} numbers, shape {shape} needs {2 * int(np.prod(shape))}")
    return (flat[0::2] + 1j * flat[1::2]).reshape(shape)


def _header(kind: str) -> dict:
    return {"format": FORMAT, "version": VERSION, "kind": kind}


def _expect(obj: dict, kind: str) -> None:
    if obj.get("format") != FORMAT:
        raise FormatError("not an nczlab container")
    if obj.get("version") != VERSION:
        raise FormatError(f"unsupported container version {obj.get('version')!r}")
    if obj.get("kind") != kind:
        raise FormatError(f"expected kind {kind!r}, got {obj.get('kind')!r}")


def _domain_dict(dom: GridDomain) -> dict:
    return {"d": dom.d, "J": dom.J, "cell_measures": dom.cell_measures.tolist()}


def _domain_from(obj: dict) -> GridDomain:
    return GridDomain(int(obj["d"]), int(obj["J"]), np.asarray(obj["cell_measures"], dtype=float))


# -- functions ---------------------------------------------------------------------


def function_to_dict(f: OpValuedFunction) -> dict:
    out = _header("opvalued")
    out.update(_domain_dict(f.domain))
    out.update(m=f.m, hermitian=bool(f.hermitian), values=encode_array(f.values))
    return out


def function_from_dict(obj: dict) -> OpValuedFunction:
    _expect(obj, "opvalued")
    dom = _domain_from(obj)
    vals = decode_array(obj["values"])
    if vals.shape != (dom.n_cells, obj["m"], obj["m"]):
        raise FormatError(f"values shape {vals.shape} does not match d, J, m")
    return OpValuedFunction(dom, vals, hermitian=bool(obj.get("hermitian", False)))


# -- filtrations -------------------------------------------------------------------


def _atom_dict(a: Atom) -> dict:
    ball = None
    if a.has_ball:
        ball = {"center": np.asarray(a.ball_center, dtype=float).tolist(), "radius": float(a.ball_radius)}
    return {"id": a.id, "parent": a.parent, "cells": np.asarray(a.cells, dtype=int).tolist(),
            "measure": a.measure, "lo": np.asarray(a.lo, dtype=float).tolist(),
            "hi": np.asarray(a.hi, dtype=float).tolist(), "ball": ball}


def filtration_to_dict(filt: AtomicFiltration) -> dict:
    out = _header("filtration")
    out["domain"] = _domain_dict(filt.domain)
    out.update(is_dyadic=filt.is_dyadic, params=_jsonable(filt.params),
               levels=[[_atom_dict(a) for a in level] for level in filt.levels])
    return out


def filtration_from_dict(obj: dict) -> AtomicFiltration:
    _expect(obj, "filtration")
    dom = _domain_from(obj["domain"])
    levels, labels = [], []
    for j, level in enumerate(obj["levels"]):
        atoms = []
        lab = np.full(dom.n_cells, -1, dtype=int)
        for a in level:
            cells = np.asarray(a["cells"], dtype=int)
            ball = a.get("ball")
            atoms.append(Atom(int(a["id"]), j, cells, float(a["measure"]), np.asarray(a["lo"], dtype=float),
                              np.asarray(a["hi"], dtype=float), a["parent"],
                              None if ball is None else np.asarray(ball["center"], dtype=float),
                              None if ball is None else float(ball["radius"])))
            lab[cells] = a["id"]
        if np.any(lab < 0):
            raise FormatError(f"level {j} does not cover every cell")
        levels.append(atoms)
        labels.append(lab)
    return AtomicFiltration(dom, levels, labels, is_dyadic=bool(obj.get("is_dyadic", False)),
                            params=dict(obj.get("params", {})))


# -- Cuculescu sequences and CZ parts ---------------------------------------------------


def sequence_to_dict(seq: CuculescuSequence) -> dict:
    out = _header("cuculescu")
    out.update(lam=seq.lam, filtration=filtration_to_dict(seq.filt),
               xi=[encode_array(x) for x in seq.xi], pi=[encode_array(p) for p in seq.pi])
    return out


def sequence_from_dict(obj: dict) -> CuculescuSequence:
    _expect(obj, "cuculescu")
    filt = filtration_from_dict(obj["filtration"])
    xi = [decode_array(x) for x in obj["xi"]]
    pi = [decode_array(p) for p in obj["pi"]]
    if len(xi) != filt.J + 1 or len(pi) != filt.J + 1:
        raise FormatError("sequence depth does not match the filtration")
    return CuculescuSequence(float(obj["lam"]), filt, xi, pi)


def parts_to_dict(parts: CZParts) -> dict:
    out = _header("czparts")
    out.update(mode=parts.mode, lam=parts.lam, levels=list(range(1, parts.J + 1)),
               f=function_to_dict(parts.f), g=function_to_dict(parts.g),
               b_d=[encode_array(b) for b in parts.b_d], b_off=[encode_array(b) for b in parts.b_off],
               sequence=sequence_to_dict(parts.seq), meta=_jsonable(parts.meta))
    return out


def parts_from_dict(obj: dict) -> CZParts:
    _expect(obj, "czparts")
    b_d = [decode_array(b) for b in obj["b_d"]]
    b_off = [decode_array(b) for b in obj["b_off"]]
    if len(b_d) != len(obj["levels"]) or len(b_off) != len(obj["levels"]):
        raise FormatError("manifest lists a different number of levels than stored")
    return CZParts(obj["mode"], function_from_dict(obj["g"]), b_d, b_off, function_from_dict(obj["f"]),
                   float(obj["lam"]), sequence_from_dict(obj["sequence"]), meta=dict(obj.get("meta", {})))


_ENCODERS = [
    (OpValuedFunction, function_to_dict),
    (AtomicFiltration, filtration_to_dict),
    (CuculescuSequence, sequence_to_dict),
    (CZParts, parts_to_dict),
]
_DECODERS = {
    "opvalued": function_from_dict,
    "filtration": filtration_from_dict,
    "cuculescu": sequence_from_dict,
    "czparts": parts_from_dict,
}


def to_dict(obj) -> dict:
    for cls, enc in _ENCODERS:
        if isinstance(obj, cls):
            return enc(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_dict(obj: dict) -> Any:
    kind = obj.get("kind")
    if kind not in _DECODERS:
        raise FormatError(f"unknown container kind {kind!r}")
    return _DECODERS[kind](obj)


def dump(obj, path) -> None:
    Path(path).write_text(json.dumps(to_dict(obj)))


def load(path) -> Any:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: {e}") from e
    return from_dict(obj)
