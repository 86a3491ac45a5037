"""JSON documents for measures.

Grammar (all keys required unless noted)::

    bernoulli: {"kind": "bernoulli", "alphabet_size": K, "weights": [w_0, ..., w_{K-1}]}
    markov:    {"kind": "markov", "alphabet_size": K, "order": r,
                "kernel": [[p(0|w), ..., p(K-1|w)] for w in memory words]}
    factor:    {"kind": "factor", "alphabet_size": Q, "coding": [c_0, ...],
                "source": <measure document>}

Probabilities are decimal strings (plain JSON numbers are accepted on
input).  Memory words are listed in lexicographic order, earliest symbol
most significant.  Writers emit the shortest decimal string that round-trips
the stored double, so reading a written document reproduces it exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .measures import (
    Bernoulli,
    Factor,
    Markov,
    StationaryMeasure,
    bernoulli_from_weights,
    factor_of,
    markov_from_kernel,
)


class MeasureFormatError(ValueError):
    pass


def _dec(x: float) -> str:
    return repr(float(x))


def _num(x) -> float:
    if isinstance(x, bool) or not isinstance(x, (str, int, float)):
        raise MeasureFormatError(f"expected a decimal string, got {x!r}")
    try:
        return float(x)
    except ValueError as exc:
        raise MeasureFormatError(f"not a decimal number: {x!r}") from exc


def measure_to_dict(m: StationaryMeasure) -> dict:
    if isinstance(m, Bernoulli):
        return {"kind": "bernoulli", "alphabet_size": m.alphabet_size,
                "weights": [_dec(w) for w in m.weights]}
    if isinstance(m, Markov):
        return {"kind": "markov", "alphabet_size": m.alphabet_size, "order": m.order,
                "kernel": [[_dec(p) for p in row] for row in m.kernel]}
    if isinstance(m, Factor):
        return {"kind": "factor", "alphabet_size": m.alphabet_size,
                "coding": [int(c) for c in m.coding], "source": measure_to_dict(m.source)}
    raise TypeError(f"unsupported measure type {type(m).__name__}")


def measure_from_dict(doc: dict) -> StationaryMeasure:
    try:
        kind = doc["kind"]
        K = int(doc["alphabet_size"])
        if kind == "bernoulli":
            m = bernoulli_from_weights([_num(w) for w in doc["weights"]])
        elif kind == "markov":
            m = markov_from_kernel(int(doc["order"]),
                                   np.array([[_num(p) for p in row] for row in doc["kernel"]]))
        elif kind == "factor":
            m = factor_of(measure_from_dict(doc["source"]), doc["coding"], K)
        else:
            raise MeasureFormatError(f"unknown measure kind {kind!r}")
    except KeyError as exc:
        raise MeasureFormatError(f"missing field {exc.args[0]!r}") from exc
    except (TypeError, AttributeError) as exc:
        raise MeasureFormatError(str(exc)) from exc
    if m.alphabet_size != K:
        raise MeasureFormatError(f"alphabet_size {K} does not match the data ({m.alphabet_size})")
    return m


def dumps(m: StationaryMeasure) -> str:
    return json.dumps(measure_to_dict(m), indent=2) + "\n"


def loads(text: str) -> StationaryMeasure:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeasureFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MeasureFormatError("measure document must be a JSON object")
    return measure_from_dict(doc)


def load_measure(path) -> StationaryMeasure:
    return loads(Path(path).read_text(encoding="utf-8"))


def save_measure(m: StationaryMeasure, path) -> None:
    Path(path).write_text(dumps(m), encoding="utf-8")
