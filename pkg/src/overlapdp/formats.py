"""Workload JSON files.

Schema::

    {
      "domain": {"attributes": [{"name": "Postcode", "cardinality": 3,
                                  "labels": ["A", "B", "C"]}, ...]},
      "queries": [{"id": "q1", "weight": 1.0,
                   "predicates": {"Postcode": ["A"], "Native": ["Y"]}}, ...]
    }

``labels`` is optional. Predicate values are labels when the attribute has
labels and indices otherwise (indices are also accepted for labelled
attributes on input). An attribute missing from ``predicates`` is
unconstrained; an empty list is a contradiction. ``weight`` defaults to 1.
Query ids are strings or integers and are preserved as given.
"""

from __future__ import annotations

import json
from typing import Any

from overlapdp.domain import Attribute, Domain, Predicate, PredicateQuery, Workload, mask_from_indices
from overlapdp.errors import WorkloadFormatError

SCHEMA_VERSION = 1


def workload_to_dict(w: Workload) -> dict[str, Any]:
    attrs = []
    for a in w.domain.attributes:
        entry: dict[str, Any] = {"name": a.name, "cardinality": a.cardinality}
        if a.labels is not None:
            entry["labels"] = list(a.labels)
        attrs.append(entry)
    queries = []
    for q in w.queries:
        preds = {}
        for i in sorted(q.predicates):
            attr = w.domain.attributes[i]
            preds[attr.name] = [attr.label_of(v) for v in q.predicates[i].values]
        queries.append({"id": q.id, "weight": q.weight, "predicates": preds})
    return {"version": SCHEMA_VERSION, "domain": {"attributes": attrs}, "queries": queries}


def dumps_workload(w: Workload) -> str:
    return json.dumps(workload_to_dict(w), indent=1) + "\n"


def save_workload(w: Workload, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_workload(w))


def _expect(cond: bool, msg: str, where: str):
    if not cond:
        raise WorkloadFormatError(msg, where)


def _parse_value(attr: Attribute, raw, where: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, (str, int)):
        raise WorkloadFormatError(f"value must be a label or an index, got {raw!r}", where)
    if isinstance(raw, str) and attr.labels is None:
        raise WorkloadFormatError(f"attribute {attr.name!r} has no labels; got {raw!r}", where)
    try:
        return attr.index_of(raw)
    except ValueError as exc:
        raise WorkloadFormatError(str(exc), where) from None


def workload_from_dict(doc: Any, source: str = "<workload>") -> Workload:
    _expect(isinstance(doc, dict), "top level must be an object", f"{source}:$")
    version = doc.get("version", SCHEMA_VERSION)
    _expect(version == SCHEMA_VERSION, f"unsupported version {version!r}", f"{source}:$.version")
    dom = doc.get("domain")
    _expect(isinstance(dom, dict) and isinstance(dom.get("attributes"), list),
            "missing domain.attributes list", f"{source}:$.domain")
    attrs = []
    for k, a in enumerate(dom["attributes"]):
        where = f"{source}:$.domain.attributes[{k}]"
        _expect(isinstance(a, dict), "attribute must be an object", where)
        name, card, labels = a.get("name"), a.get("cardinality"), a.get("labels")
        _expect(isinstance(name, str) and name != "", "attribute needs a non-empty string name", where)
        if card is None and isinstance(labels, list):
            card = len(labels)
        _expect(isinstance(card, int) and not isinstance(card, bool), "cardinality must be an integer", where)
        _expect(labels is None or isinstance(labels, list), "labels must be a list", where)
        try:
            attrs.append(Attribute(name, card, tuple(labels) if labels is not None else None))
        except ValueError as exc:
            raise WorkloadFormatError(str(exc), where) from None
    try:
        domain = Domain(tuple(attrs))
    except ValueError as exc:
        raise WorkloadFormatError(str(exc), f"{source}:$.domain") from None

    raw_queries = doc.get("queries")
    _expect(isinstance(raw_queries, list), "missing queries list", f"{source}:$.queries")
    queries = []
    for k, q in enumerate(raw_queries):
        where = f"{source}:$.queries[{k}]"
        _expect(isinstance(q, dict), "query must be an object", where)
        qid = q.get("id")
        _expect(isinstance(qid, (str, int)) and not isinstance(qid, bool), "query id must be a string or integer", where)
        weight = q.get("weight", 1.0)
        _expect(isinstance(weight, (int, float)) and not isinstance(weight, bool), "weight must be a number", where)
        raw_preds = q.get("predicates", {})
        _expect(isinstance(raw_preds, dict), "predicates must be an object", where)
        preds = {}
        for name, values in raw_preds.items():
            pwhere = f"{where}.predicates.{name}"
            try:
                i = domain.index_of(name)
            except ValueError as exc:
                raise WorkloadFormatError(str(exc), pwhere) from None
            _expect(isinstance(values, list), "predicate must be a list of values", pwhere)
            attr = domain.attributes[i]
            idx = [_parse_value(attr, v, f"{pwhere}[{j}]") for j, v in enumerate(values)]
            preds[i] = Predicate(i, attr.cardinality, mask_from_indices(idx, attr.cardinality))
        try:
            queries.append(PredicateQuery(qid, preds, float(weight)))
        except ValueError as exc:
            raise WorkloadFormatError(str(exc), where) from None
    try:
        return Workload(domain, tuple(queries))
    except ValueError as exc:
        raise WorkloadFormatError(str(exc), f"{source}:$.queries") from None


def loads_workload(text: str, source: str = "<workload>") -> Workload:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorkloadFormatError(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from None
    return workload_from_dict(doc, source)


def load_workload(path) -> Workload:
    with open(path, encoding="utf-8") as fh:
        return loads_workload(fh.read(), str(path))
