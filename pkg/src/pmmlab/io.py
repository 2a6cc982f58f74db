"""JSON encodings for patterns, decompositions, distributions and reports."""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .info import Distribution
from .pattern import Pattern, PatternError
from .tensor import EpsDecomposition, RankDecomposition, SparseTensor, TensorError

SCHEMA_VERSION = "pmmlab-report/1"
SIG_DIGITS = 9


class InputError(ValueError):
    """Malformed input; ``field`` points at the offending JSON location."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def load_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(str(path), "file not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(str(path), f"invalid JSON ({exc.msg} at line {exc.lineno})") from None


def parse_rational(value, field: str) -> Fraction:
    try:
        if isinstance(value, bool):
            raise TypeError
        if isinstance(value, float):
            return Fraction(value)
        if isinstance(value, (int, str)):
            return Fraction(value.strip() if isinstance(value, str) else value)
    except (ValueError, ZeroDivisionError, TypeError):
        pass
    raise InputError(field, f"expected a rational like \"3/4\", got {value!r}")


def _require(obj, key, field):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{field}.{key}" if field else key, "missing")
    return obj[key]


def points_from_json(obj, field: str = "pattern"):
    """A :class:`Pattern` for three factors; a tuple of 1-based points otherwise."""
    triples = _require(obj, "triples", field)
    if not isinstance(triples, list):
        raise InputError(f"{field}.triples", "expected a list")
    pts = []
    for n, t in enumerate(triples):
        if not isinstance(t, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in t):
            raise InputError(f"{field}.triples[{n}]", f"expected a list of integers, got {t!r}")
        pts.append(tuple(t))
    arity = {len(p) for p in pts}
    if len(arity) > 1:
        raise InputError(f"{field}.triples", "points have different lengths")
    dims = obj.get("dims")
    if arity == {3} or (not pts and dims is not None):
        if dims is None:
            raise InputError(f"{field}.dims", "missing")
        try:
            return Pattern(tuple(dims), tuple(pts))
        except (PatternError, TypeError) as exc:
            raise InputError(f"{field}", str(exc)) from None
    if dims is not None:
        for n, p in enumerate(pts):
            if any(not 1 <= x <= d for x, d in zip(p, dims)):
                raise InputError(f"{field}.triples[{n}]", f"outside dims {dims}")
    return tuple(sorted(set(pts)))


def pattern_from_json(obj, field: str = "pattern") -> Pattern:
    out = points_from_json(obj, field)
    if not isinstance(out, Pattern):
        raise InputError(f"{field}.triples", "expected triples (three factors)")
    return out


def pattern_to_json(p) -> dict:
    if isinstance(p, Pattern):
        return {"dims": list(p.dims), "triples": [list(t) for t in p.triples]}
    pts = sorted(tuple(x) for x in p)
    dims = [max(x[a] for x in pts) for a in range(len(pts[0]))] if pts else []
    return {"dims": dims, "triples": [list(t) for t in pts]}


def _entry(value, field, eps: bool):
    if isinstance(value, list):
        if not eps:
            raise InputError(field, "eps-polynomial entries are not allowed in an exact decomposition")
        return tuple(parse_rational(v, f"{field}[{d}]") for d, v in enumerate(value))
    return (parse_rational(value, field),) if eps else parse_rational(value, field)


def _terms(obj, eps: bool):
    terms = _require(obj, "terms", "")
    if not isinstance(terms, list):
        raise InputError("terms", "expected a list")
    out = []
    for n, term in enumerate(terms):
        vecs = []
        for name in "abc":
            vec = _require(term, name, f"terms[{n}]")
            if not isinstance(vec, list):
                raise InputError(f"terms[{n}].{name}", "expected a list")
            vecs.append(tuple(_entry(v, f"terms[{n}].{name}[{p}]", eps) for p, v in enumerate(vec)))
        out.append(tuple(vecs))
    return out


def _shape(obj, terms):
    if "shape" in obj:
        return tuple(obj["shape"])
    if not terms:
        raise InputError("shape", "required when there are no terms")
    return tuple(len(v) for v in terms[0])


def is_eps_decomposition(obj) -> bool:
    if "order" in obj:
        return True
    return any(isinstance(v, list) for t in obj.get("terms", []) for n in "abc" for v in t.get(n, []))


def rank_decomposition_from_json(obj) -> RankDecomposition:
    terms = _terms(obj, eps=False)
    try:
        return RankDecomposition(_shape(obj, terms), tuple(terms))
    except TensorError as exc:
        raise InputError("terms", str(exc)) from None


def eps_decomposition_from_json(obj) -> EpsDecomposition:
    terms = _terms(obj, eps=True)
    order = obj.get("order", 0)
    if not isinstance(order, int) or order < 0:
        raise InputError("order", f"expected a nonnegative integer, got {order!r}")
    try:
        return EpsDecomposition(_shape(obj, terms), tuple(terms), order)
    except TensorError as exc:
        raise InputError("terms", str(exc)) from None


def _frac_str(x: Fraction) -> str:
    return str(x)


def decomposition_to_json(d) -> dict:
    if isinstance(d, EpsDecomposition):
        terms = [{n: [[_frac_str(c) for c in p] for p in v] for n, v in zip("abc", t)} for t in d.terms]
        return {"shape": list(d.shape), "terms": terms, "order": d.order}
    terms = [{n: [_frac_str(x) for x in v] for n, v in zip("abc", t)} for t in d.terms]
    return {"shape": list(d.shape), "terms": terms}


def distribution_from_json(obj, field: str = "distribution") -> Distribution:
    support = _require(obj, "support", field)
    probs = _require(obj, "probs", field)
    if not isinstance(support, list) or not isinstance(probs, list) or len(support) != len(probs):
        raise InputError(f"{field}.probs", "support and probs must be lists of equal length")
    labels = tuple(tuple(s) if isinstance(s, list) else s for s in support)
    try:
        if all(isinstance(p, (str, int)) and not isinstance(p, bool) for p in probs):
            exact = tuple(parse_rational(p, f"{field}.probs[{n}]") for n, p in enumerate(probs))
            return Distribution(labels, None, exact)
        vals = [float(parse_rational(p, f"{field}.probs[{n}]")) for n, p in enumerate(probs)]
        return Distribution(labels, np.array(vals))
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{field}.probs", str(exc)) from None


def distribution_to_json(p: Distribution) -> dict:
    support = [list(s) if isinstance(s, tuple) else s for s in p.support]
    if p.exact is not None:
        return {"support": support, "probs": [str(q) for q in p.exact]}
    return {"support": support, "probs": p.probs.tolist()}


def tensor_to_json(t: SparseTensor) -> dict:
    return {"shape": list(t.shape), "entries": [[*k, str(v)] for k, v in sorted(t.entries.items())]}


def _round(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{SIG_DIGITS}g}")


def to_jsonable(obj):
    """Recursively convert report values; floats are fixed at nine significant digits."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, Distribution):
        out = distribution_to_json(obj)
        out["probs"] = to_jsonable(out["probs"])
        return out
    if isinstance(obj, Pattern):
        return pattern_to_json(obj)
    if isinstance(obj, SparseTensor):
        return tensor_to_json(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dump_report(command: str, body: dict) -> str:
    report = {"schema": SCHEMA_VERSION, "command": command, **to_jsonable(body)}
    return json.dumps(report, sort_keys=True, indent=2)


def parse_report(text: str) -> dict:
    report = json.loads(text)
    if report.get("schema") != SCHEMA_VERSION:
        raise InputError("schema", f"unsupported report schema {report.get('schema')!r}")
    return report
