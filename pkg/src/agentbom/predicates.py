"""Boolean predicate trees evaluated against one graph element.

Predicates are total: a comparison against a missing attribute is false,
never an error. Values in comparisons are literals or references to the
current entry element's attributes ({"entry_attr": key}), which lets a rule
ask questions like "does this element share a danger flag with the entry".
The neighbor atom is the one predicate that looks past the element itself:
it tests the incident edges of a node, which entry selection needs.
"""

from __future__ import annotations

from .errors import PredicateError
from .schema import layer_of, parse_edge_kind, parse_node_kind, Layer

_COMPARATORS = ("==", "!=", "contains", "intersects")


class EntryAttr:
    """Marker for a value resolved from the entry element at evaluation time."""

    __slots__ = ("key",)

    def __init__(self, key: str):
        self.key = key

    def to_dict(self) -> dict:
        return {"entry_attr": self.key}


def _resolve_value(value, entry):
    if isinstance(value, EntryAttr):
        if entry is None:
            return None
        return entry.attributes.get(value.key)
    return value


class Predicate:
    """Base class; subclasses implement evaluate and to_dict."""

    def evaluate(self, element, graph=None, entry=None) -> bool:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def referenced_keys(self) -> frozenset:
        """Attribute keys this predicate reads on the element under test."""
        return frozenset()


class AttrCmp(Predicate):
    """Compare one attribute against a literal or entry-attribute value."""

    def __init__(self, key: str, cmp: str, value):
        if cmp not in _COMPARATORS:
            raise PredicateError(f"unknown comparator {cmp!r}")
        self.key = key
        self.cmp = cmp
        self.value = value

    def evaluate(self, element, graph=None, entry=None) -> bool:
        actual = element.attributes.get(self.key)
        if actual is None:
            return False
        expected = _resolve_value(self.value, entry)
        if expected is None:
            return False
        if self.cmp == "==":
            return actual == expected
        if self.cmp == "!=":
            return actual != expected
        if self.cmp == "contains":
            if isinstance(actual, str) and isinstance(expected, str):
                return expected in actual
            if isinstance(actual, (list, tuple)):
                return expected in actual
            if isinstance(actual, dict):
                return expected in actual
            return False
        # intersects
        left = actual if isinstance(actual, (list, tuple)) else [actual]
        right = expected if isinstance(expected, (list, tuple)) else [expected]
        return bool(set(left) & set(right))

    def to_dict(self) -> dict:
        value = self.value.to_dict() if isinstance(self.value, EntryAttr) else self.value
        return {"op": "attr", "key": self.key, "cmp": self.cmp, "value": value}

    def referenced_keys(self):
        return frozenset({self.key})


class HasFlag(Predicate):
    """True when danger_flags is non-empty, or intersects any_of if given."""

    def __init__(self, any_of=None):
        self.any_of = tuple(any_of) if any_of is not None else None

    def evaluate(self, element, graph=None, entry=None) -> bool:
        flags = element.attributes.get("danger_flags")
        if not flags:
            return False
        if self.any_of is None:
            return True
        return bool(set(flags) & set(self.any_of))

    def to_dict(self) -> dict:
        doc = {"op": "flags"}
        if self.any_of is not None:
            doc["any_of"] = list(self.any_of)
        return doc

    def referenced_keys(self):
        return frozenset({"danger_flags"})


class KindIs(Predicate):
    """True when the element's kind name is one of the given names."""

    def __init__(self, names):
        self.names = tuple(names)

    def evaluate(self, element, graph=None, entry=None) -> bool:
        return element.kind.value in self.names

    def to_dict(self) -> dict:
        return {"op": "kind", "any_of": list(self.names)}


class LayerIs(Predicate):
    """True for nodes in the given layer; false for edges."""

    def __init__(self, layer: str):
        self.layer = Layer(layer) if not isinstance(layer, Layer) else layer

    def evaluate(self, element, graph=None, entry=None) -> bool:
        kind = element.kind
        try:
            return layer_of(kind) is self.layer
        except KeyError:
            return False

    def to_dict(self) -> dict:
        return {"op": "layer", "layer": self.layer.value}


class Not(Predicate):
    def __init__(self, inner: Predicate):
        self.inner = inner

    def evaluate(self, element, graph=None, entry=None) -> bool:
        return not self.inner.evaluate(element, graph=graph, entry=entry)

    def to_dict(self) -> dict:
        return {"op": "not", "arg": self.inner.to_dict()}

    def referenced_keys(self):
        return self.inner.referenced_keys()


class _Junction(Predicate):
    def __init__(self, parts):
        self.parts = tuple(parts)

    def referenced_keys(self):
        keys = frozenset()
        for part in self.parts:
            keys |= part.referenced_keys()
        return keys


class And(_Junction):
    def evaluate(self, element, graph=None, entry=None) -> bool:
        return all(p.evaluate(element, graph=graph, entry=entry) for p in self.parts)

    def to_dict(self) -> dict:
        return {"op": "and", "args": [p.to_dict() for p in self.parts]}


class Or(_Junction):
    def evaluate(self, element, graph=None, entry=None) -> bool:
        return any(p.evaluate(element, graph=graph, entry=entry) for p in self.parts)

    def to_dict(self) -> dict:
        return {"op": "or", "args": [p.to_dict() for p in self.parts]}


class NeighborMatch(Predicate):
    """True when the node has an incident edge meeting the given tests.

    direction "in" looks at edges arriving at the node and tests their
    source; "out" looks at departing edges and tests their target. Always
    false for edge elements and when no graph is supplied.
    """

    def __init__(self, direction: str, edge_kinds, node=None, edge=None):
        if direction not in ("in", "out"):
            raise PredicateError(f"neighbor direction must be in or out, got {direction!r}")
        self.direction = direction
        self.edge_kinds = tuple(
            k.value if hasattr(k, "value") else str(k) for k in edge_kinds
        )
        self.node = node
        self.edge = edge

    def evaluate(self, element, graph=None, entry=None) -> bool:
        if graph is None or not hasattr(element, "node_id"):
            return False
        kinds = {parse_edge_kind(k) for k in self.edge_kinds}
        if self.direction == "in":
            edges = graph.in_edges(element.node_id, kinds)
        else:
            edges = graph.out_edges(element.node_id, kinds)
        for candidate in edges:
            if self.edge is not None and not self.edge.evaluate(
                candidate, graph=graph, entry=entry
            ):
                continue
            other_id = candidate.source if self.direction == "in" else candidate.target
            other = graph.nodes[other_id]
            if self.node is not None and not self.node.evaluate(
                other, graph=graph, entry=entry
            ):
                continue
            return True
        return False

    def to_dict(self) -> dict:
        doc = {
            "op": "neighbor",
            "direction": self.direction,
            "edge_kinds": list(self.edge_kinds),
        }
        if self.node is not None:
            doc["node"] = self.node.to_dict()
        if self.edge is not None:
            doc["edge"] = self.edge.to_dict()
        return doc


# ===========================================================================
# deserialization
# ===========================================================================


def _parse_value(raw):
    if isinstance(raw, dict):
        if set(raw) == {"entry_attr"}:
            return EntryAttr(raw["entry_attr"])
        raise PredicateError(f"unsupported value document {raw!r}")
    return raw


def predicate_from_dict(doc: dict) -> Predicate:
    """Build a predicate tree from its JSON document."""
    if not isinstance(doc, dict) or "op" not in doc:
        raise PredicateError(f"predicate document needs an op field: {doc!r}")
    op = doc["op"]
    try:
        if op == "attr":
            return AttrCmp(doc["key"], doc["cmp"], _parse_value(doc["value"]))
        if op == "flags":
            return HasFlag(doc.get("any_of"))
        if op == "kind":
            names = doc["any_of"]
            for name in names:
                _require_known_kind(name)
            return KindIs(names)
        if op == "layer":
            return LayerIs(doc["layer"])
        if op == "not":
            return Not(predicate_from_dict(doc["arg"]))
        if op == "and":
            return And([predicate_from_dict(d) for d in doc["args"]])
        if op == "or":
            return Or([predicate_from_dict(d) for d in doc["args"]])
        if op == "neighbor":
            for name in doc["edge_kinds"]:
                parse_edge_kind(name)
            return NeighborMatch(
                doc["direction"],
                doc["edge_kinds"],
                node=predicate_from_dict(doc["node"]) if "node" in doc else None,
                edge=predicate_from_dict(doc["edge"]) if "edge" in doc else None,
            )
    except KeyError as missing:
        raise PredicateError(f"predicate op {op!r} is missing field {missing}") from None
    raise PredicateError(f"unknown predicate op {op!r}")


def _require_known_kind(name: str):
    try:
        parse_node_kind(name)
        return
    except Exception:
        pass
    parse_edge_kind(name)
