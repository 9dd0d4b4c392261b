"""JSON readers and writers for permutations, series, collections and certificates.

Exact rationals travel as ``"num/den"`` strings (integers as plain JSON
integers), floats as JSON floats.  Interval addresses are bare bit-strings;
``"root"`` is accepted for the unit interval.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

from .carleson import PermutationMap
from .decompose import (
    Check,
    DecompositionCertificate,
    LevelRecord,
    SplitResult,
    VerificationReport,
    _weight,
)
from .dyadic import DyadicInterval, IntervalCollection, parse_address
from .errors import ValidationError
from .exponent import CarlesonExponent
from .haar_ops import CoefficientSeries, Normalization


def encode_number(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return value
    raise TypeError(f"cannot encode {value!r}")


def decode_number(value, where: str = ""):
    if isinstance(value, bool):
        raise ValidationError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            q = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"{where}: not a rational number: {value!r}") from None
        return q.numerator if q.denominator == 1 else q
    raise ValidationError(f"{where}: expected a number, got {value!r}")


def encode_value(value):
    """Recursively encode numbers, intervals and collections for JSON output."""
    if isinstance(value, (Fraction, int, float, bool)) or value is None:
        return encode_number(value)
    if isinstance(value, DyadicInterval):
        return value.address
    if isinstance(value, IntervalCollection):
        return value.addresses()
    if isinstance(value, dict):
        return {str(k): encode_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode_value(v) for v in value]
    if isinstance(value, str):
        return value
    raise TypeError(f"cannot encode {value!r}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _line_of(text: str | None, key: str, nth: int = 0) -> str:
    """" (line N)" for the nth occurrence of ``key`` used as an object key."""
    if not text:
        return ""
    hits = list(re.finditer(re.escape(json.dumps(key)) + r"\s*:", text))
    if len(hits) <= nth:
        return ""
    return f" (line {text.count(chr(10), 0, hits[nth].start()) + 1})"


def _no_duplicates(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise ValidationError(f"duplicate key {k!r}")
        seen[k] = v
    return seen


def parse_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except ValidationError as exc:
        key = str(exc).split("'")[1] if "'" in str(exc) else ""
        raise ValidationError(f"{source}: {exc}{_line_of(text, key, 1)}") from None


def _require(obj, key: str, source: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ValidationError(f"{source}: missing field {key!r}")
    return obj[key]


def _depth(value, source: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ValidationError(f"{source}: depth must be a nonnegative integer, got {value!r}")
    return value


# -- collections -------------------------------------------------------------


def collection_to_json(collection: IntervalCollection) -> list[str]:
    return collection.addresses()


def collection_from_json(data, depth_bound: int | None = None, source: str = "<collection>") -> IntervalCollection:
    if not isinstance(data, list):
        raise ValidationError(f"{source}: a collection is a JSON array of addresses")
    try:
        return IntervalCollection((parse_address(a) for a in data), depth_bound)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


# -- permutations ------------------------------------------------------------


def permutation_to_json(perm: PermutationMap) -> dict:
    return {"depth": perm.depth, "map": perm.as_dict()}


def permutation_from_json(data, source: str = "<permutation>", text: str | None = None) -> PermutationMap:
    depth = _depth(_require(data, "depth", source), source)
    mapping = _require(data, "map", source)
    if not isinstance(mapping, dict):
        raise ValidationError(f"{source}: 'map' must be an object")
    parsed = {}
    hit_by = {}
    for key, value in mapping.items():
        if not isinstance(value, str):
            raise ValidationError(f"{source}: image of {key!r} must be an address string{_line_of(text, key)}")
        try:
            src = parse_address(key)
            dst = parse_address(value)
        except ValidationError as exc:
            raise ValidationError(f"{source}: {exc}{_line_of(text, key)}") from None
        if src in parsed:
            raise ValidationError(f"{source}: interval {key!r} listed twice{_line_of(text, key)}")
        if dst in hit_by:
            raise ValidationError(
                f"{source}: not a bijection: {key!r} and {hit_by[dst]!r} both map to {value!r}{_line_of(text, key)}"
            )
        parsed[src] = dst
        hit_by[dst] = key
    try:
        return PermutationMap(depth, parsed)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


# -- coefficient series ------------------------------------------------------


def series_to_json(x: CoefficientSeries) -> dict:
    out = {
        "depth": x.depth,
        "normalization": x.normalization.value,
        "coeffs": {iv.address: encode_number(v) for iv, v in x.items()},
    }
    if x.p is not None:
        out["p"] = encode_number(x.p)
    return out


def series_from_json(data, source: str = "<series>", text: str | None = None) -> CoefficientSeries:
    depth = _depth(_require(data, "depth", source), source)
    norm = data.get("normalization", "linf")
    try:
        norm = Normalization(norm)
    except ValueError:
        raise ValidationError(f"{source}: unknown normalization {norm!r}") from None
    p = data.get("p")
    if norm is not Normalization.LINF and p is None:
        raise ValidationError(f"{source}: normalization {norm.value!r} requires 'p'")
    if p is not None:
        p = decode_number(p, f"{source}: p")
    coeffs = _require(data, "coeffs", source)
    if not isinstance(coeffs, dict):
        raise ValidationError(f"{source}: 'coeffs' must be an object")
    parsed = {}
    for key, value in coeffs.items():
        try:
            addr = parse_address(key)
        except ValidationError as exc:
            raise ValidationError(f"{source}: {exc}{_line_of(text, key)}") from None
        if addr in parsed:
            raise ValidationError(f"{source}: coefficient {key!r} listed twice{_line_of(text, key)}")
        parsed[addr] = decode_number(value, f"{source}: coefficient {key!r}{_line_of(text, key)}")
    try:
        return CoefficientSeries(depth, parsed, norm, p)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


# -- certificates ------------------------------------------------------------


def check_to_json(check: Check) -> dict:
    return {
        "check": check.name,
        "bound": check.bound,
        "at": check.at,
        "lhs": encode_value(check.lhs),
        "rhs": encode_value(check.rhs),
        "pass": check.passed,
        "gating": check.gating,
    }


def report_to_json(report: VerificationReport) -> dict:
    return {
        "passed": report.passed,
        "checks": [check_to_json(c) for c in report.checks],
        "failures": sorted({c.name for c in report.failures}),
    }


def certificate_to_json(cert: DecompositionCertificate, report: VerificationReport | None = None) -> dict:
    report = report or cert.report
    levels = []
    for l, lvl in enumerate(cert.levels):
        records = [
            {
                "root": s.root.address,
                "G": s.good.addresses(),
                "S": s.stopped.addresses(),
                "N": s.pulled_back_max.addresses(),
                "O": s.next_roots.addresses(),
            }
            for s in lvl.splits
        ]
        levels.append({"level": l, "roots": lvl.roots.addresses(), "records": records})
    out = {
        "kind": "decomposition-certificate",
        "parameters": {
            "K": encode_number(cert.K),
            "M": encode_number(cert.M),
            "M_source": cert.M_source,
            "alpha": encode_number(cert.exponent.alpha),
            "p": encode_number(cert.exponent.p),
        },
        "J0": cert.J0.address,
        "B": cert.B.addresses(),
        "O": cert.O.addresses(),
        "N": cert.N.addresses(),
        "levels": levels,
        "permutation": permutation_to_json(cert.permutation),
        "series": series_to_json(cert.series),
    }
    if isinstance(report, VerificationReport):
        out["report"] = report_to_json(report)
    elif report is not None:
        out["report"] = report
    return out


def certificate_from_json(data, source: str = "<certificate>") -> DecompositionCertificate:
    """Rebuild a certificate; the stored report (if any) is returned as raw JSON
    in ``cert.report`` so callers can compare it against a fresh verification."""
    params = _require(data, "parameters", source)
    perm = permutation_from_json(_require(data, "permutation", source), f"{source}: permutation")
    series = series_from_json(_require(data, "series", source), f"{source}: series")
    depth = perm.depth
    exponent = CarlesonExponent(decode_number(_require(params, "alpha", source), f"{source}: alpha"))
    K = decode_number(_require(params, "K", source), f"{source}: K")
    M = decode_number(_require(params, "M", source), f"{source}: M")
    K = Fraction(K) if isinstance(K, int) else K
    M = Fraction(M) if isinstance(M, int) else M

    def coll(value, where):
        return collection_from_json(value, depth, f"{source}: {where}")

    levels = []
    for l, lvl in enumerate(_require(data, "levels", source)):
        splits = []
        for rec in _require(lvl, "records", f"{source}: level {l}"):
            where = f"level {l}"
            root = DyadicInterval(parse_address(_require(rec, "root", f"{source}: {where}")))
            good = coll(_require(rec, "G", where), f"{where} G")
            stopped = coll(_require(rec, "S", where), f"{where} S")
            domain = good | stopped
            W, _ = _weight(perm, domain, exponent)
            splits.append(
                SplitResult(
                    root,
                    domain,
                    good,
                    stopped,
                    coll(_require(rec, "N", where), f"{where} N"),
                    coll(_require(rec, "O", where), f"{where} O"),
                    W,
                )
            )
        levels.append(LevelRecord(coll(_require(lvl, "roots", f"{source}: level {l}"), f"level {l} roots"), tuple(splits)))
    cert = DecompositionCertificate(
        perm,
        series,
        exponent,
        K,
        M,
        DyadicInterval(parse_address(_require(data, "J0", source))),
        coll(_require(data, "B", source), "B"),
        levels,
        params.get("M_source", "supplied"),
    )
    cert.report = data.get("report")
    return cert


# -- files -------------------------------------------------------------------


def read_json(path: str | Path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from None
    return parse_json(text, str(path)), text


def load_permutation(path: str | Path) -> PermutationMap:
    data, text = read_json(path)
    return permutation_from_json(data, str(path), text)


def load_series(path: str | Path) -> CoefficientSeries:
    data, text = read_json(path)
    return series_from_json(data, str(path), text)


def load_certificate(path: str | Path) -> DecompositionCertificate:
    data, _ = read_json(path)
    return certificate_from_json(data, str(path))


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(dumps(obj))
