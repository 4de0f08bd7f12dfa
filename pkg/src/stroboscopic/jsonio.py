"""JSON encoding of complex matrices and model files.

Complex numbers are ``[re, im]`` pairs; a matrix is a list of rows of pairs.
Python's float repr is shortest-round-trip, so values survive a dump/load
cycle exactly.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from stroboscopic.algebra import Superoperator, _square
from stroboscopic.channels import KrausFamilySpec, Model
from stroboscopic.generators import GkslComponents, gksl_generator, model_generator


class ParseError(ValueError):
    """Malformed JSON input (maps to CLI exit code 2)."""


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"matrix entries must be [re, im] pairs: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ParseError(f"expected a square matrix of [re, im] pairs, got array of shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def read_json(path) -> object:
    """Load JSON from a path, or from stdin when ``path`` is ``-``."""
    try:
        if str(path) == "-":
            return json.load(sys.stdin)
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read JSON from {path}: {exc}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2)


def parse_model(data: dict) -> tuple[Superoperator, KrausFamilySpec | None]:
    """Build the generator described by a model file.

    Exactly one of ``model``, ``gksl`` or ``generator`` must be present.
    Returns the generator and, for built-in models, their spec.
    """
    if not isinstance(data, dict):
        raise ParseError("model file must be a JSON object")
    keys = [k for k in ("model", "gksl", "generator") if k in data]
    if len(keys) != 1:
        raise ParseError(f"model file needs exactly one of model/gksl/generator, found {keys or 'none'}")
    kind = keys[0]

    if kind == "model":
        try:
            model = Model(data["model"])
        except ValueError:
            raise ParseError(f"unknown model {data['model']!r}") from None
        if "gamma" not in data:
            raise ParseError("built-in model needs gamma")
        a = data.get("a")
        spec = KrausFamilySpec(model, float(data["gamma"]), None if a is None else float(a))
        return model_generator(spec), spec

    if kind == "gksl":
        g = data["gksl"]
        if not isinstance(g, dict):
            raise ParseError("gksl must be an object")
        h = g.get("hamiltonian")
        try:
            jumps = tuple((decode_matrix(j["operator"]), float(j["rate"])) for j in g.get("jumps", []))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"each jump needs operator and rate: {exc}") from None
        comps = GkslComponents(None if h is None else decode_matrix(h), jumps)
        return gksl_generator(comps), None

    return Superoperator(_square(decode_matrix(data["generator"]))), None


def model_to_dict(spec: KrausFamilySpec) -> dict:
    out = {"model": spec.model.value, "gamma": spec.gamma}
    if spec.a is not None:
        out["a"] = spec.a
    return out
