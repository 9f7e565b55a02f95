"""JSON encoding of polynomials and tensors.

A word is a list of letter records ``{"tag", "index", "starred", "kind"}``;
a coefficient is a pair of rational strings ``["p/q", "p/q"]`` (real, imag).
Terms are emitted in a canonical order so equal values serialize to equal
documents.
"""

from __future__ import annotations

import json

from .poly import KINDS, GenSymbol, NCPoly, TensorPoly
from .scalar import Scalar

__all__ = ["poly_to_json", "poly_from_json", "tensor_to_json", "tensor_from_json",
           "dumps", "loads"]


def _letter_rec(s: GenSymbol) -> dict:
    return {"tag": s.tag, "index": s.index, "starred": s.starred, "kind": s.kind}


def _letter(rec: dict) -> GenSymbol:
    kind = rec.get("kind", "general")
    if kind not in KINDS:
        raise ValueError(f"unknown letter kind {kind!r}")
    return GenSymbol(str(rec["tag"]), int(rec.get("index", 0)), bool(rec.get("starred", False)), kind)


def _word_sort_key(w):
    return [(s.tag, s.index, s.starred) for s in w]


def poly_to_json(f: NCPoly) -> dict:
    terms = sorted(f.terms.items(), key=lambda t: (len(t[0]), _word_sort_key(t[0])))
    return {"type": "ncpoly",
            "terms": [{"word": [_letter_rec(s) for s in w], "coeff": c.to_pair()} for w, c in terms]}


def poly_from_json(doc: dict) -> NCPoly:
    if doc.get("type") != "ncpoly":
        raise ValueError("not an ncpoly document")
    return NCPoly({tuple(_letter(r) for r in t["word"]): Scalar.from_pair(t["coeff"])
                   for t in doc["terms"]})


def tensor_to_json(t: TensorPoly) -> dict:
    terms = sorted(t.terms.items(), key=lambda kv: [_word_sort_key(w) for w in kv[0]])
    return {"type": "tensorpoly", "order": t.order,
            "terms": [{"slots": [[_letter_rec(s) for s in w] for w in key], "coeff": c.to_pair()}
                      for key, c in terms]}


def tensor_from_json(doc: dict) -> TensorPoly:
    if doc.get("type") != "tensorpoly":
        raise ValueError("not a tensorpoly document")
    return TensorPoly(int(doc["order"]),
                      {tuple(tuple(_letter(r) for r in w) for w in t["slots"]): Scalar.from_pair(t["coeff"])
                       for t in doc["terms"]})


def dumps(x) -> str:
    if isinstance(x, NCPoly):
        doc = poly_to_json(x)
    elif isinstance(x, TensorPoly):
        doc = tensor_to_json(x)
    else:
        raise TypeError(f"cannot serialize {type(x).__name__}")
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def loads(text: str):
    doc = json.loads(text)
    if doc.get("type") == "ncpoly":
        return poly_from_json(doc)
    return tensor_from_json(doc)
