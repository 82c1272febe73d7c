"""Path tracing over the graph, following content flow rather than arrows.

Each edge kind has a flow orientation (schema.FLOW_OF_KIND): most arrows
point the way content moves, access-style arrows (reads_from, selects, the
structural loads) point the other way, and invokes couples its endpoints in
both directions. A forward trace follows flow away from the start node; a
backward trace walks flow in reverse toward provenance.

Paths are simple (no repeated node), contain at least one edge, and are
stored in flow order: elements[0] is the most upstream element. For a
backward trace that upstream end is the origin the walk discovered, and the
terminal predicate applies to it; for a forward trace the predicate applies
to the downstream terminus.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import schema
from .graph import AgentBomGraph
from .schema import Flow, NodeKind

BACKWARD = "backward"
FORWARD = "forward"


# ===========================================================================
# specs and paths
# ===========================================================================


@dataclass
class PathSpec:
    """What a single trace is allowed to touch and where it may stop."""

    direction: str
    allowed_edge_kinds: frozenset
    allowed_node_kinds: frozenset | None = None
    terminal: object = None
    max_depth: int = 32
    cross_agent: bool = False

    def __post_init__(self):
        if self.direction not in (BACKWARD, FORWARD):
            raise ValueError(f"direction must be backward or forward, got {self.direction!r}")
        self.allowed_edge_kinds = schema.expand_edge_kinds(self.allowed_edge_kinds)
        if self.allowed_node_kinds is not None:
            self.allowed_node_kinds = frozenset(
                k if isinstance(k, NodeKind) else schema.parse_node_kind(k)
                for k in self.allowed_node_kinds
            )
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")

    def to_dict(self) -> dict:
        doc = {
            "direction": self.direction,
            "edge_kinds": sorted(k.value for k in self.allowed_edge_kinds),
            "max_depth": self.max_depth,
            "cross_agent": self.cross_agent,
        }
        if self.allowed_node_kinds is not None:
            doc["node_kinds"] = sorted(k.value for k in self.allowed_node_kinds)
        if self.terminal is not None:
            doc["terminal"] = self.terminal.to_dict()
        return doc


@dataclass(frozen=True)
class AuditPath:
    """One traced path: alternating node and edge ids in flow order."""

    direction: str
    elements: tuple

    @property
    def origin(self) -> str:
        return self.elements[0]

    @property
    def terminus(self) -> str:
        return self.elements[-1]

    @property
    def depth(self) -> int:
        return (len(self.elements) - 1) // 2

    @property
    def node_ids(self) -> tuple:
        return self.elements[0::2]

    @property
    def edge_ids(self) -> tuple:
        return self.elements[1::2]

    def to_dict(self) -> dict:
        return {"direction": self.direction, "elements": list(self.elements)}


# ===========================================================================
# stepping
# ===========================================================================


def _steps(graph: AgentBomGraph, node_id: str, spec: PathSpec):
    """Yield (edge, next_node_id) pairs leaving node_id in spec's direction."""
    forward = spec.direction == FORWARD
    candidates = []
    for edge in graph.out_edges(node_id):
        flow = schema.FLOW_OF_KIND[edge.kind]
        if flow is Flow.BOTH:
            candidates.append((edge, edge.target))
        elif (flow is Flow.WITH) == forward:
            candidates.append((edge, edge.target))
    for edge in graph.in_edges(node_id):
        flow = schema.FLOW_OF_KIND[edge.kind]
        if flow is Flow.BOTH:
            candidates.append((edge, edge.source))
        elif (flow is Flow.INV) == forward:
            candidates.append((edge, edge.source))
    out = []
    for edge, nxt in candidates:
        if edge.kind not in spec.allowed_edge_kinds:
            continue
        if not spec.cross_agent and edge.family is schema.EdgeFamily.PROPAGATION:
            continue
        out.append((edge, nxt))
    out.sort(key=lambda pair: pair[0].edge_id)
    return out


def _terminal_ok(spec: PathSpec, graph: AgentBomGraph, element, entry) -> bool:
    terminal = spec.terminal
    if terminal is None:
        return True
    if hasattr(terminal, "evaluate"):
        return bool(terminal.evaluate(element, graph=graph, entry=entry))
    return bool(terminal(element))


def _start_node(graph: AgentBomGraph, start: str, direction: str) -> str:
    """An edge start anchors at its source (backward) or target (forward)."""
    if start in graph.edges:
        edge = graph.edges[start]
        return edge.source if direction == BACKWARD else edge.target
    return start


# ===========================================================================
# the trace operation
# ===========================================================================


def trace(graph: AgentBomGraph, start: str, spec: PathSpec) -> list:
    """Enumerate every satisfying simple path from start under spec.

    Returns paths ordered by (depth, lexical element sequence). The entry
    element passed to terminal predicates is the start element itself, so
    predicates may compare against the entry's attributes.
    """
    entry = graph.element(start)
    anchor = _start_node(graph, start, spec.direction)
    found: list[AuditPath] = []
    # discovery order: anchor first, walking outward; flow order for a
    # backward trace is the reverse of that
    stack_elements = [anchor]
    visited = {anchor}

    def descend(node_id: str, depth: int):
        for edge, nxt in _steps(graph, node_id, spec):
            if nxt in visited:
                continue
            stack_elements.append(edge.edge_id)
            stack_elements.append(nxt)
            visited.add(nxt)
            nxt_node = graph.nodes[nxt]
            if _terminal_ok(spec, graph, nxt_node, entry):
                if spec.direction == BACKWARD:
                    elements = tuple(reversed(stack_elements))
                else:
                    elements = tuple(stack_elements)
                found.append(AuditPath(spec.direction, elements))
            deeper = depth + 1 < spec.max_depth
            passable = (
                spec.allowed_node_kinds is None
                or nxt_node.kind in spec.allowed_node_kinds
            )
            if deeper and passable:
                descend(nxt, depth + 1)
            visited.discard(nxt)
            stack_elements.pop()
            stack_elements.pop()

    descend(anchor, 0)
    found.sort(key=lambda p: (p.depth, p.elements))
    return found


# ===========================================================================
# induced subgraphs
# ===========================================================================


def subgraph(graph: AgentBomGraph, paths, extra_elements=()) -> AgentBomGraph:
    """Induce a new graph from the union of the given paths.

    Attribute-level references (basis, parameter_source, non-URI source)
    pointing outside the induced node set are pruned so the result passes
    validate() on its own.
    """
    node_ids: set[str] = set()
    edge_ids: set[str] = set()
    for element_id in extra_elements:
        (edge_ids if element_id in graph.edges else node_ids).add(element_id)
    for path in paths:
        node_ids.update(path.node_ids)
        edge_ids.update(path.edge_ids)
    # edges pulled in via extra_elements need their endpoints present
    for edge_id in edge_ids:
        edge = graph.edges[edge_id]
        node_ids.add(edge.source)
        node_ids.add(edge.target)

    node_docs = []
    for node_id in sorted(node_ids):
        original = graph.nodes[node_id]
        attributes = dict(original.attributes)
        for key in schema.REFERENCE_LIST_KEYS:
            if key in attributes:
                kept = [r for r in attributes[key] if r in node_ids]
                if kept:
                    attributes[key] = kept
                else:
                    del attributes[key]
        source = attributes.get("source")
        if isinstance(source, str) and "://" not in source and source not in node_ids:
            del attributes["source"]
        doc = original.to_dict()
        doc["attributes"] = {k: attributes[k] for k in sorted(attributes)}
        node_docs.append(doc)
    agent_ids = sorted(
        {
            graph.nodes[n].agent_id
            for n in node_ids
            if graph.nodes[n].agent_id is not None
        }
    )
    # Load as a document: the append API insists references resolve at
    # insertion time, which id order cannot promise for a projection.
    return AgentBomGraph.from_dict(
        {
            "agents": [
                graph.agents[a].to_dict() for a in agent_ids if a in graph.agents
            ],
            "nodes": node_docs,
            "edges": [graph.edges[e].to_dict() for e in sorted(edge_ids)],
        }
    )
