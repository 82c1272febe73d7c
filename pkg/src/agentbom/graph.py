"""The attributed two-layer graph and its construction-time checks.

A graph is built append-only: agents first, then nodes, then edges. Every
check that validate() performs on a whole graph is also enforced while
inserting, so a graph built through add_node / add_edge alone always
validates cleanly. Deserialized documents skip the insertion checks and are
expected to go through validate() before use.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import schema
from .errors import (
    AttributeSchemaError,
    DanglingEndpointError,
    DuplicateIdError,
    EndpointKindError,
    FrozenGraphError,
    MissingTraceIdError,
    UnknownAgentError,
    UnknownKindError,
)
from .schema import EdgeKind, Layer, NodeKind

# ===========================================================================
# helpers
# ===========================================================================


def parse_instant(value: str) -> datetime:
    """Parse an ISO-8601 instant; accepts a trailing Z on Python 3.10."""
    text = value
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def _is_uri(text: str) -> bool:
    return "://" in text


# ===========================================================================
# elements
# ===========================================================================


@dataclass
class AgentDescriptor:
    """Registry entry for one agent taking part in the execution."""

    agent_id: str
    role: str = ""
    policy_boundary: str = ""

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "role": self.role,
            "policy_boundary": self.policy_boundary,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AgentDescriptor":
        return cls(
            agent_id=str(doc["agent_id"]),
            role=str(doc.get("role", "")),
            policy_boundary=str(doc.get("policy_boundary", "")),
        )


@dataclass
class Node:
    """One graph node. Runtime nodes carry trace metadata, static ones must not."""

    node_id: str
    kind: NodeKind
    agent_id: str | None = None
    trace_id: str | None = None
    timestamp: str | None = None
    attributes: dict = field(default_factory=dict)

    @property
    def layer(self) -> Layer:
        return schema.layer_of(self.kind)

    def attr(self, key: str, default=None):
        return self.attributes.get(key, default)

    def to_dict(self) -> dict:
        doc = {"node_id": self.node_id, "kind": self.kind.value}
        if self.agent_id is not None:
            doc["agent_id"] = self.agent_id
        if self.trace_id is not None:
            doc["trace_id"] = self.trace_id
        if self.timestamp is not None:
            doc["timestamp"] = self.timestamp
        doc["attributes"] = {k: self.attributes[k] for k in sorted(self.attributes)}
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Node":
        return cls(
            node_id=str(doc["node_id"]),
            kind=schema.parse_node_kind(doc["kind"]),
            agent_id=doc.get("agent_id"),
            trace_id=doc.get("trace_id"),
            timestamp=doc.get("timestamp"),
            attributes=dict(doc.get("attributes", {})),
        )


@dataclass
class Edge:
    """One directed, kind-tagged edge between two node ids."""

    edge_id: str
    kind: EdgeKind
    source: str
    target: str
    timestamp: str | None = None
    attributes: dict = field(default_factory=dict)

    @property
    def family(self) -> schema.EdgeFamily:
        return schema.family_of(self.kind)

    def attr(self, key: str, default=None):
        return self.attributes.get(key, default)

    def to_dict(self) -> dict:
        doc = {
            "edge_id": self.edge_id,
            "kind": self.kind.value,
            "source": self.source,
            "target": self.target,
        }
        if self.timestamp is not None:
            doc["timestamp"] = self.timestamp
        doc["attributes"] = {k: self.attributes[k] for k in sorted(self.attributes)}
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Edge":
        return cls(
            edge_id=str(doc["edge_id"]),
            kind=schema.parse_edge_kind(doc["kind"]),
            source=str(doc["source"]),
            target=str(doc["target"]),
            timestamp=doc.get("timestamp"),
            attributes=dict(doc.get("attributes", {})),
        )


@dataclass(frozen=True)
class Violation:
    """One violated invariant reported by validate()."""

    code: str
    element_id: str
    message: str


# A violation code outranks none; insertion maps codes to raised errors.
_ERROR_OF_CODE = {
    "duplicate_id": DuplicateIdError,
    "unknown_kind": UnknownKindError,
    "attribute_schema": AttributeSchemaError,
    "layer_metadata": MissingTraceIdError,
    "unknown_agent": UnknownAgentError,
    "dangling_endpoint": DanglingEndpointError,
    "endpoint_kind": EndpointKindError,
    "cross_agent": EndpointKindError,
    "unresolved_reference": AttributeSchemaError,
}


# ===========================================================================
# the graph
# ===========================================================================


class AgentBomGraph:
    """Append-only two-layer graph with per-edge-kind adjacency indices."""

    def __init__(self):
        self.agents: dict[str, AgentDescriptor] = {}
        self.nodes: dict[str, Node] = {}
        self.edges: dict[str, Edge] = {}
        self._out: dict[str, list[str]] = {}
        self._in: dict[str, list[str]] = {}
        self._by_edge_kind: dict[EdgeKind, list[str]] = {k: [] for k in EdgeKind}
        self._by_node_kind: dict[NodeKind, list[str]] = {k: [] for k in NodeKind}
        self._frozen = False

    # ------------------------------------------------------------------
    # append API
    # ------------------------------------------------------------------

    def add_agent(self, descriptor: AgentDescriptor) -> str:
        self._ensure_open()
        if descriptor.agent_id in self.agents:
            raise DuplicateIdError(f"agent {descriptor.agent_id!r} already registered")
        self.agents[descriptor.agent_id] = descriptor
        return descriptor.agent_id

    def add_node(self, node: Node) -> str:
        self._ensure_open()
        for violation in self._node_violations(node, check_duplicate=True):
            raise _ERROR_OF_CODE[violation.code](violation.message)
        self._index_node(node)
        return node.node_id

    def add_edge(self, edge: Edge) -> str:
        self._ensure_open()
        for violation in self._edge_violations(edge, check_duplicate=True):
            raise _ERROR_OF_CODE[violation.code](violation.message)
        self._index_edge(edge)
        return edge.edge_id

    def freeze(self) -> None:
        """Close the graph to further appends."""
        self._frozen = True

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _ensure_open(self):
        if self._frozen:
            raise FrozenGraphError("graph is frozen; no further appends allowed")

    def _index_node(self, node: Node) -> None:
        self.nodes[node.node_id] = node
        self._out.setdefault(node.node_id, [])
        self._in.setdefault(node.node_id, [])
        self._by_node_kind[node.kind].append(node.node_id)

    def _index_edge(self, edge: Edge) -> None:
        self.edges[edge.edge_id] = edge
        self._out.setdefault(edge.source, []).append(edge.edge_id)
        self._in.setdefault(edge.target, []).append(edge.edge_id)
        self._by_edge_kind[edge.kind].append(edge.edge_id)

    # ------------------------------------------------------------------
    # lookups
    # ------------------------------------------------------------------

    def get_node(self, node_id: str) -> Node:
        return self.nodes[node_id]

    def get_edge(self, edge_id: str) -> Edge:
        return self.edges[edge_id]

    def element(self, element_id: str):
        """Resolve an element id to its node or edge."""
        if element_id in self.nodes:
            return self.nodes[element_id]
        return self.edges[element_id]

    def has_element(self, element_id: str) -> bool:
        return element_id in self.nodes or element_id in self.edges

    def out_edges(self, node_id: str, kinds=None) -> list[Edge]:
        edges = [self.edges[e] for e in self._out.get(node_id, ())]
        if kinds is not None:
            edges = [e for e in edges if e.kind in kinds]
        return edges

    def in_edges(self, node_id: str, kinds=None) -> list[Edge]:
        edges = [self.edges[e] for e in self._in.get(node_id, ())]
        if kinds is not None:
            edges = [e for e in edges if e.kind in kinds]
        return edges

    def nodes_of_kind(self, kind: NodeKind) -> list[Node]:
        return [self.nodes[n] for n in self._by_node_kind[kind]]

    def edges_of_kind(self, kind: EdgeKind) -> list[Edge]:
        return [self.edges[e] for e in self._by_edge_kind[kind]]

    def layer_counts(self) -> dict[Layer, int]:
        counts = {layer: 0 for layer in Layer}
        for node in self.nodes.values():
            counts[node.layer] += 1
        return counts

    # ------------------------------------------------------------------
    # validation
    # ------------------------------------------------------------------

    def validate(self) -> list[Violation]:
        """Re-check every graph invariant; returns all violations found."""
        violations: list[Violation] = []
        for node_id in sorted(self.nodes):
            violations.extend(self._node_violations(self.nodes[node_id]))
        for edge_id in sorted(self.edges):
            violations.extend(self._edge_violations(self.edges[edge_id]))
        violations.extend(self._index_violations())
        return violations

    def _node_violations(self, node: Node, check_duplicate: bool = False):
        out: list[Violation] = []
        nid = node.node_id
        if check_duplicate and self.has_element(nid):
            return [Violation("duplicate_id", nid, f"element id {nid!r} already in use")]
        if not isinstance(node.kind, NodeKind):
            return [Violation("unknown_kind", nid, f"node {nid!r} kind is not a NodeKind")]
        layer = node.layer
        if layer is Layer.RUNTIME:
            if not node.trace_id or not node.timestamp:
                out.append(
                    Violation(
                        "layer_metadata",
                        nid,
                        f"runtime node {nid!r} requires trace_id and timestamp",
                    )
                )
            if not node.agent_id:
                out.append(
                    Violation(
                        "layer_metadata", nid, f"runtime node {nid!r} requires agent_id"
                    )
                )
            elif node.agent_id not in self.agents:
                out.append(
                    Violation(
                        "unknown_agent",
                        nid,
                        f"runtime node {nid!r} names unregistered agent {node.agent_id!r}",
                    )
                )
        elif layer is Layer.STATIC and node.trace_id is not None:
            out.append(
                Violation(
                    "layer_metadata", nid, f"static node {nid!r} must not carry trace_id"
                )
            )
        if node.timestamp is not None:
            try:
                parse_instant(node.timestamp)
            except ValueError:
                out.append(
                    Violation(
                        "attribute_schema",
                        nid,
                        f"node {nid!r} timestamp {node.timestamp!r} is not ISO-8601",
                    )
                )
        out.extend(
            self._attribute_violations(
                nid, node.attributes, schema.allowed_node_keys(node.kind)
            )
        )
        out.extend(self._reference_violations(nid, node.attributes, skip_self=nid))
        return out

    def _edge_violations(self, edge: Edge, check_duplicate: bool = False):
        out: list[Violation] = []
        eid = edge.edge_id
        if check_duplicate and self.has_element(eid):
            return [Violation("duplicate_id", eid, f"element id {eid!r} already in use")]
        if not isinstance(edge.kind, EdgeKind):
            return [Violation("unknown_kind", eid, f"edge {eid!r} kind is not an EdgeKind")]
        src = self.nodes.get(edge.source)
        tgt = self.nodes.get(edge.target)
        if src is None or tgt is None:
            missing = edge.source if src is None else edge.target
            out.append(
                Violation(
                    "dangling_endpoint",
                    eid,
                    f"edge {eid!r} endpoint {missing!r} is not in the graph",
                )
            )
            return out
        allowed_src, allowed_tgt = schema.ENDPOINT_TABLE[edge.kind]
        if src.kind not in allowed_src or tgt.kind not in allowed_tgt:
            out.append(
                Violation(
                    "endpoint_kind",
                    eid,
                    f"edge kind {edge.kind.value} does not permit "
                    f"{src.kind.value} -> {tgt.kind.value}",
                )
            )
            return out
        if schema.family_of(edge.kind) is schema.EdgeFamily.PROPAGATION:
            same_agent = (
                src.agent_id is not None
                and tgt.agent_id is not None
                and src.agent_id == tgt.agent_id
            )
            shared = "shared_state" in src.attributes or "shared_state" in tgt.attributes
            if same_agent and not shared:
                out.append(
                    Violation(
                        "cross_agent",
                        eid,
                        f"propagation edge {eid!r} joins two elements of agent "
                        f"{src.agent_id!r} with no shared-object marker",
                    )
                )
        out.extend(
            self._attribute_violations(
                eid, edge.attributes, schema.allowed_edge_keys(edge.kind)
            )
        )
        if edge.timestamp is not None:
            try:
                parse_instant(edge.timestamp)
            except ValueError:
                out.append(
                    Violation(
                        "attribute_schema",
                        eid,
                        f"edge {eid!r} timestamp {edge.timestamp!r} is not ISO-8601",
                    )
                )
        return out

    def _attribute_violations(self, element_id, attributes, allowed_keys):
        out = []
        for key in sorted(attributes):
            value = attributes[key]
            spec = schema.attribute_spec(key)
            if spec is None or key not in allowed_keys:
                out.append(
                    Violation(
                        "attribute_schema",
                        element_id,
                        f"{element_id!r} carries unregistered key {key!r}",
                    )
                )
                continue
            problem = self._value_problem(spec, value)
            if problem:
                out.append(
                    Violation(
                        "attribute_schema",
                        element_id,
                        f"{element_id!r} attribute {key!r} {problem}",
                    )
                )
        return out

    @staticmethod
    def _value_problem(spec, value) -> str | None:
        kind = spec.value_kind
        if kind is schema.ValueKind.TEXT:
            if not isinstance(value, str):
                return "must be a string"
        elif kind is schema.ValueKind.ENUM:
            if not isinstance(value, str) or value not in spec.tokens:
                return f"must be one of {list(spec.tokens)}"
        elif kind is schema.ValueKind.BOOL:
            if not isinstance(value, bool):
                return "must be a boolean"
        elif kind is schema.ValueKind.INSTANT:
            if not isinstance(value, str):
                return "must be an ISO-8601 string"
            try:
                parse_instant(value)
            except ValueError:
                return "must be an ISO-8601 string"
        elif kind is schema.ValueKind.STRING_LIST:
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                return "must be a list of strings"
        elif kind is schema.ValueKind.KEY_VALUE_MAP:
            if not isinstance(value, dict) or not all(
                isinstance(k, str) and isinstance(v, str) for k, v in value.items()
            ):
                return "must be a string-to-string map"
        return None

    def _reference_violations(self, element_id, attributes, skip_self):
        out = []
        for key in schema.REFERENCE_LIST_KEYS:
            for ref in attributes.get(key, ()):  # type: str
                if not isinstance(ref, str):
                    continue  # already reported as a type problem
                if ref != skip_self and ref not in self.nodes:
                    out.append(
                        Violation(
                            "unresolved_reference",
                            element_id,
                            f"{element_id!r} {key} entry {ref!r} does not resolve",
                        )
                    )
        source = attributes.get("source")
        if isinstance(source, str) and source and not _is_uri(source):
            if source != skip_self and source not in self.nodes:
                out.append(
                    Violation(
                        "unresolved_reference",
                        element_id,
                        f"{element_id!r} source {source!r} does not resolve",
                    )
                )
        return out

    def _index_violations(self):
        out = []
        rebuilt_out: dict[str, list[str]] = {n: [] for n in self.nodes}
        rebuilt_in: dict[str, list[str]] = {n: [] for n in self.nodes}
        for edge_id in self.edges:
            edge = self.edges[edge_id]
            rebuilt_out.setdefault(edge.source, []).append(edge_id)
            rebuilt_in.setdefault(edge.target, []).append(edge_id)
        for node_id in self.nodes:
            if sorted(self._out.get(node_id, [])) != sorted(rebuilt_out[node_id]):
                out.append(
                    Violation(
                        "index_inconsistency",
                        node_id,
                        f"outgoing index for {node_id!r} disagrees with edge store",
                    )
                )
            if sorted(self._in.get(node_id, [])) != sorted(rebuilt_in[node_id]):
                out.append(
                    Violation(
                        "index_inconsistency",
                        node_id,
                        f"incoming index for {node_id!r} disagrees with edge store",
                    )
                )
        return out

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "agents": [self.agents[a].to_dict() for a in sorted(self.agents)],
            "nodes": [self.nodes[n].to_dict() for n in sorted(self.nodes)],
            "edges": [self.edges[e].to_dict() for e in sorted(self.edges)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, doc: dict) -> "AgentBomGraph":
        """Load a serialized graph without insertion checks.

        Kind names must still parse; everything else is left to validate().
        """
        graph = cls()
        for agent_doc in doc.get("agents", []):
            descriptor = AgentDescriptor.from_dict(agent_doc)
            graph.agents[descriptor.agent_id] = descriptor
        for node_doc in doc.get("nodes", []):
            node = Node.from_dict(node_doc)
            if node.node_id in graph.nodes:
                raise DuplicateIdError(f"node id {node.node_id!r} appears twice")
            graph._index_node(node)
        for edge_doc in doc.get("edges", []):
            edge = Edge.from_dict(edge_doc)
            if graph.has_element(edge.edge_id):
                raise DuplicateIdError(f"edge id {edge.edge_id!r} appears twice")
            graph._index_edge(edge)
        graph.freeze()
        return graph

    @classmethod
    def from_json(cls, text: str) -> "AgentBomGraph":
        return cls.from_dict(json.loads(text))
