"""Builds a graph out of a capability manifest and an ordered event stream.

Assembly runs in four stages: static extraction (agents, capability nodes,
structural wiring), event normalization (one runtime node per event plus
evolution edges from event references), cross-layer binding (invocations,
memory traffic, message pairing, delegation), and a final whole-graph
validation. Content is scanned once, here, by the danger matcher; every
later stage reads only the recorded flags.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import schema
from .errors import (
    AssemblyValidationError,
    ManifestParseError,
    OutOfOrderTimestampError,
    TraceParseError,
    UnresolvedRefError,
)
from .graph import AgentBomGraph, AgentDescriptor, Edge, Node, parse_instant
from .matchers import DangerMatcher, default_matcher
from .schema import EdgeKind, NodeKind

# ===========================================================================
# manifest
# ===========================================================================


@dataclass
class ToolSpec:
    tool_name: str
    input_schema: str = ""
    permission_scope: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tool_name": self.tool_name,
            "input_schema": self.input_schema,
            "permission_scope": list(self.permission_scope),
            "provenance": dict(self.provenance),
        }


@dataclass
class SkillSpec:
    skill_name: str
    declared_function: str = ""
    implementation_summary: str = ""
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "skill_name": self.skill_name,
            "declared_function": self.declared_function,
            "implementation_summary": self.implementation_summary,
            "provenance": dict(self.provenance),
        }


@dataclass
class MemorySpec:
    store_id: str
    type: str = ""

    def to_dict(self) -> dict:
        return {"store_id": self.store_id, "type": self.type}


@dataclass
class CodeSpec:
    name: str
    version: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "version": self.version}


@dataclass
class ManifestAgent:
    agent_id: str
    role: str = ""
    policy_boundary: str = ""
    system_prompt: dict = field(default_factory=dict)
    model: dict = field(default_factory=dict)
    tools: list = field(default_factory=list)
    skills: list = field(default_factory=list)
    memory_stores: list = field(default_factory=list)
    code_dependencies: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "role": self.role,
            "policy_boundary": self.policy_boundary,
            "system_prompt": dict(self.system_prompt),
            "model": dict(self.model),
            "tools": [t.to_dict() for t in self.tools],
            "skills": [s.to_dict() for s in self.skills],
            "memory_stores": [m.to_dict() for m in self.memory_stores],
            "code_dependencies": [c.to_dict() for c in self.code_dependencies],
        }


@dataclass
class CapabilityManifest:
    agents: list

    def to_dict(self) -> dict:
        return {"agents": [a.to_dict() for a in self.agents]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def parse_manifest(doc: dict) -> CapabilityManifest:
    """Parse and cross-check a manifest document."""
    if not isinstance(doc, dict) or not isinstance(doc.get("agents"), list):
        raise ManifestParseError("manifest must be an object with an agents list")
    if not doc["agents"]:
        raise ManifestParseError("manifest declares no agents")
    agents = []
    seen_ids = set()
    for raw in doc["agents"]:
        agent = _parse_agent(raw)
        if agent.agent_id in seen_ids:
            raise ManifestParseError(f"agent_id {agent.agent_id!r} declared twice")
        seen_ids.add(agent.agent_id)
        agents.append(agent)
    return CapabilityManifest(agents=agents)


def _parse_agent(raw: dict) -> ManifestAgent:
    if not isinstance(raw, dict) or not raw.get("agent_id"):
        raise ManifestParseError("every manifest agent needs an agent_id")
    agent_id = str(raw["agent_id"])

    tools, tool_names = [], set()
    for entry in raw.get("tools", []):
        if not entry.get("tool_name"):
            raise ManifestParseError(f"agent {agent_id!r}: tool without tool_name")
        name = str(entry["tool_name"])
        if name in tool_names:
            raise ManifestParseError(f"agent {agent_id!r}: tool {name!r} declared twice")
        tool_names.add(name)
        tools.append(
            ToolSpec(
                tool_name=name,
                input_schema=str(entry.get("input_schema", "")),
                permission_scope=list(entry.get("permission_scope", [])),
                provenance=dict(entry.get("provenance", {})),
            )
        )

    skills, skill_names = [], set()
    for entry in raw.get("skills", []):
        if not entry.get("skill_name"):
            raise ManifestParseError(f"agent {agent_id!r}: skill without skill_name")
        name = str(entry["skill_name"])
        if name in skill_names:
            raise ManifestParseError(f"agent {agent_id!r}: skill {name!r} declared twice")
        skill_names.add(name)
        skills.append(
            SkillSpec(
                skill_name=name,
                declared_function=str(entry.get("declared_function", "")),
                implementation_summary=str(entry.get("implementation_summary", "")),
                provenance=dict(entry.get("provenance", {})),
            )
        )

    memories = [
        MemorySpec(store_id=str(m["store_id"]), type=str(m.get("type", "")))
        for m in raw.get("memory_stores", [])
        if m.get("store_id") or _fail(f"agent {agent_id!r}: memory store without store_id")
    ]
    code = [
        CodeSpec(name=str(c["name"]), version=str(c.get("version", "")))
        for c in raw.get("code_dependencies", [])
        if c.get("name") or _fail(f"agent {agent_id!r}: code dependency without name")
    ]

    return ManifestAgent(
        agent_id=agent_id,
        role=str(raw.get("role", "")),
        policy_boundary=str(raw.get("policy_boundary", "")),
        system_prompt=dict(raw.get("system_prompt", {})),
        model=dict(raw.get("model", {})),
        tools=tools,
        skills=skills,
        memory_stores=memories,
        code_dependencies=code,
    )


def _fail(message: str):
    raise ManifestParseError(message)


def parse_manifest_json(text: str) -> CapabilityManifest:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestParseError(f"manifest is not valid JSON: {exc}") from None
    return parse_manifest(doc)


# ===========================================================================
# trace events
# ===========================================================================

EVENT_TYPES = (
    "external_input",
    "goal_formed",
    "context_assembled",
    "reasoning_step",
    "decision_made",
    "action_taken",
    "observation",
    "output_emitted",
    "memory_read",
    "memory_write",
    "tool_invocation",
    "skill_invocation",
    "message_sent",
    "message_received",
    "delegation",
)

# event type -> runtime node kind; types outside the canonical loop also
# stamp their name into the node's type attribute
_EVENT_KIND = {
    "external_input": NodeKind.EXTERNAL,
    "goal_formed": NodeKind.GOAL,
    "context_assembled": NodeKind.CONTEXT,
    "reasoning_step": NodeKind.REASONING,
    "decision_made": NodeKind.DECISION,
    "action_taken": NodeKind.ACTION,
    "observation": NodeKind.OBSERVATION,
    "output_emitted": NodeKind.OUTPUT,
    "memory_read": NodeKind.ACTION,
    "memory_write": NodeKind.ACTION,
    "tool_invocation": NodeKind.ACTION,
    "skill_invocation": NodeKind.ACTION,
    "message_sent": NodeKind.ACTION,
    "message_received": NodeKind.EXTERNAL,
    "delegation": NodeKind.DECISION,
}

_TYPED_EVENTS = frozenset(
    {"memory_read", "memory_write", "tool_invocation", "skill_invocation",
     "message_sent", "message_received", "delegation"}
)

# attrs keys that describe the propagation edge rather than the node; for
# message and delegation events they are routed to the edge during binding
_EDGE_DIRECTIVE_KEYS = frozenset(
    {"message_id", "authentication_status", "integrity_status",
     "propagation_status", "source_agent", "target_agent", "task_dependency"}
)
_MESSAGE_EVENTS = frozenset({"message_sent", "message_received", "delegation"})


@dataclass
class TraceEvent:
    event_id: str
    trace_id: str
    agent_id: str
    timestamp: str
    event_type: str
    content: str = ""
    refs: list = field(default_factory=list)
    attrs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "event_id": self.event_id,
            "trace_id": self.trace_id,
            "agent_id": self.agent_id,
            "timestamp": self.timestamp,
            "event_type": self.event_type,
            "content": self.content,
        }
        if self.refs:
            doc["refs"] = list(self.refs)
        if self.attrs:
            doc["attrs"] = {k: self.attrs[k] for k in sorted(self.attrs)}
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "TraceEvent":
        for key in ("event_id", "trace_id", "agent_id", "timestamp", "event_type"):
            if not doc.get(key):
                raise TraceParseError(f"trace event is missing {key!r}: {doc!r}")
        if doc["event_type"] not in EVENT_TYPES:
            raise TraceParseError(f"unknown event type {doc['event_type']!r}")
        return cls(
            event_id=str(doc["event_id"]),
            trace_id=str(doc["trace_id"]),
            agent_id=str(doc["agent_id"]),
            timestamp=str(doc["timestamp"]),
            event_type=doc["event_type"],
            content=str(doc.get("content", "")),
            refs=list(doc.get("refs", [])),
            attrs=dict(doc.get("attrs", {})),
        )


def parse_trace_jsonl(text: str) -> list:
    """Parse one JSON event per line; blank lines are ignored."""
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceParseError(f"trace line {lineno}: not valid JSON: {exc}") from None
        try:
            events.append(TraceEvent.from_dict(doc))
        except TraceParseError as exc:
            raise TraceParseError(f"trace line {lineno}: {exc}") from None
    return events


def check_event_stream(events) -> None:
    """Enforce ordering and reference invariants on a parsed event list."""
    seen: dict[str, TraceEvent] = {}
    all_ids = {e.event_id for e in events}
    if len(all_ids) != len(events):
        raise TraceParseError("event_ids are not unique within the trace")
    previous = None
    for event in events:
        stamp = parse_instant(event.timestamp)
        if previous is not None and stamp < previous:
            raise OutOfOrderTimestampError(
                f"event {event.event_id!r} precedes its predecessor in time"
            )
        previous = stamp
        for ref in event.refs:
            if ref not in seen:
                if ref in all_ids:
                    raise OutOfOrderTimestampError(
                        f"event {event.event_id!r} refs later event {ref!r}"
                    )
                raise UnresolvedRefError(
                    f"event {event.event_id!r} refs unknown event {ref!r}"
                )
            referenced = seen[ref]
            if referenced.trace_id != event.trace_id and not (
                event.event_type == "message_received"
                and referenced.event_type == "message_sent"
            ):
                raise UnresolvedRefError(
                    f"event {event.event_id!r} refs {ref!r} in another trace"
                )
        seen[event.event_id] = event


# ===========================================================================
# stage 1: static extraction
# ===========================================================================


def extract_static(manifest: CapabilityManifest, graph: AgentBomGraph,
                   matcher: DangerMatcher) -> None:
    """Populate the agent registry, capability nodes, and structural edges."""
    shared = _shared_capabilities(manifest)

    for agent in manifest.agents:
        graph.add_agent(
            AgentDescriptor(agent.agent_id, agent.role, agent.policy_boundary)
        )
        agent_node = f"agent.{agent.agent_id}"
        _add_static(graph, matcher, agent_node, NodeKind.AGENT, agent.agent_id,
                    {"role": agent.role} if agent.role else {})

        if agent.system_prompt:
            prompt_node = f"prompt.{agent.agent_id}"
            attrs = _optional(
                content=agent.system_prompt.get("content"),
                source=agent.system_prompt.get("source"),
                trust_level=agent.system_prompt.get("trust_level"),
            )
            _add_static(graph, matcher, prompt_node, NodeKind.PROMPT,
                        agent.agent_id, attrs)
            _add_built_edge(graph, EdgeKind.HAS_PROMPT, agent_node, prompt_node)

        if agent.model:
            llm_node = f"llm.{agent.agent_id}"
            attrs = _optional(type=agent.model.get("name"))
            provider = agent.model.get("provider")
            if provider:
                attrs["source"] = f"provider://{provider}"
            _add_static(graph, matcher, llm_node, NodeKind.LLM, agent.agent_id, attrs)
            _add_built_edge(graph, EdgeKind.USES_MODEL, agent_node, llm_node)

        for tool in agent.tools:
            node_id = f"tool.{tool.tool_name}"
            _add_capability(graph, matcher, node_id, NodeKind.TOOL,
                            agent.agent_id, shared, _tool_attrs(tool))
            _add_built_edge(graph, EdgeKind.LOADS_TOOL, agent_node, node_id)

        for skill in agent.skills:
            node_id = f"skill.{skill.skill_name}"
            _add_capability(graph, matcher, node_id, NodeKind.SKILL,
                            agent.agent_id, shared, _skill_attrs(skill))
            _add_built_edge(graph, EdgeKind.LOADS_SKILL, agent_node, node_id)

        for store in agent.memory_stores:
            node_id = f"mem.{store.store_id}"
            # memory stores persist across sessions and may be shared, so
            # they never belong to a single agent
            if node_id not in graph.nodes:
                _add_static(graph, matcher, node_id, NodeKind.LONG_TERM_MEMORY,
                            None, _optional(type=store.type))
            _add_built_edge(graph, EdgeKind.SHARES_MEMORY_WITH, agent_node, node_id)

        for dep in agent.code_dependencies:
            node_id = f"code.{dep.name}"
            attrs = {"code_file": dep.name}
            if dep.version:
                attrs["content"] = f"{dep.name}=={dep.version}"
            _add_capability(graph, matcher, node_id, NodeKind.CODE,
                            agent.agent_id, shared, attrs)
            _add_built_edge(graph, EdgeKind.DEPENDS_ON, agent_node, node_id)


def _tool_attrs(tool: ToolSpec) -> dict:
    attrs = _optional(
        tool_name=tool.tool_name,
        input_schema=tool.input_schema,
        source=tool.provenance.get("source"),
        integrity_status=tool.provenance.get("integrity_status"),
        trust_level=tool.provenance.get("trust_level"),
    )
    if tool.permission_scope:
        attrs["permission_scope"] = list(tool.permission_scope)
    return attrs


def _skill_attrs(skill: SkillSpec) -> dict:
    return _optional(
        tool_name=skill.skill_name,
        type=skill.declared_function,
        content=skill.implementation_summary,
        source=skill.provenance.get("source"),
        integrity_status=skill.provenance.get("integrity_status"),
        trust_level=skill.provenance.get("trust_level"),
    )


def _optional(**pairs) -> dict:
    return {k: v for k, v in pairs.items() if v}


def _shared_capabilities(manifest: CapabilityManifest) -> set:
    """Node ids of tools/skills/code declared by more than one agent."""
    owners: dict[str, set] = {}
    for agent in manifest.agents:
        for tool in agent.tools:
            owners.setdefault(f"tool.{tool.tool_name}", set()).add(agent.agent_id)
        for skill in agent.skills:
            owners.setdefault(f"skill.{skill.skill_name}", set()).add(agent.agent_id)
        for dep in agent.code_dependencies:
            owners.setdefault(f"code.{dep.name}", set()).add(agent.agent_id)
    return {node_id for node_id, who in owners.items() if len(who) > 1}


def _add_capability(graph, matcher, node_id, kind, agent_id, shared, attrs):
    """Add a tool/skill/code node once; later declarations must agree."""
    if node_id in graph.nodes:
        existing = graph.nodes[node_id]
        flagless = {k: v for k, v in existing.attributes.items() if k != "danger_flags"}
        if flagless != attrs:
            raise ManifestParseError(
                f"{node_id!r} is declared inconsistently by multiple agents"
            )
        return
    owner = None if node_id in shared else agent_id
    _add_static(graph, matcher, node_id, kind, owner, attrs)


def _add_static(graph, matcher, node_id, kind, agent_id, attrs):
    attrs = dict(attrs)
    _merge_flags(attrs, matcher)
    graph.add_node(Node(node_id=node_id, kind=kind, agent_id=agent_id,
                        attributes=attrs))


def _merge_flags(attrs: dict, matcher: DangerMatcher) -> None:
    flags = matcher.scan(attrs)
    declared = attrs.get("danger_flags", [])
    merged = sorted(set(flags) | set(declared))
    if merged:
        attrs["danger_flags"] = merged
    elif "danger_flags" in attrs:
        del attrs["danger_flags"]


def _add_built_edge(graph, kind, source, target, attrs=None, timestamp=None):
    base = f"e.{kind.value}.{source}.{target}"
    edge_id = base
    suffix = 2
    while graph.has_element(edge_id):
        edge_id = f"{base}.{suffix}"
        suffix += 1
    graph.add_edge(Edge(edge_id=edge_id, kind=kind, source=source, target=target,
                        timestamp=timestamp, attributes=dict(attrs or {})))
    return edge_id


# ===========================================================================
# stage 2: event normalization
# ===========================================================================


def normalize_events(events, matcher: DangerMatcher) -> tuple:
    """Turn each event into a runtime node plus evolution edges from refs.

    Returns (nodes, edges). A ref becomes flows_to when the two stages are
    consecutive in the cognitive loop, influences otherwise. Refs on
    message_received events are handled by message pairing instead, so no
    evolution edge duplicates that link.
    """
    check_event_stream(events)
    by_id = {e.event_id: e for e in events}
    nodes, edges, used = [], [], set()

    for event in events:
        kind = _EVENT_KIND[event.event_type]
        attrs = _node_attrs(event, kind)
        basis = _ordered_unique(list(event.refs) + list(attrs.get("basis", [])))
        if basis and "basis" in schema.allowed_node_keys(kind):
            attrs["basis"] = basis
        _merge_flags(attrs, matcher)
        nodes.append(
            Node(node_id=event.event_id, kind=kind, agent_id=event.agent_id,
                 trace_id=event.trace_id, timestamp=event.timestamp,
                 attributes=attrs)
        )
        if event.event_type == "message_received":
            continue
        for ref in _ordered_unique(event.refs):
            src_kind = _EVENT_KIND[by_id[ref].event_type]
            stage_src = schema.COGNITIVE_STAGES[src_kind]
            stage_dst = schema.COGNITIVE_STAGES[kind]
            edge_kind = (
                EdgeKind.FLOWS_TO if stage_dst == stage_src + 1 else EdgeKind.INFLUENCES
            )
            edges.append(
                Edge(
                    edge_id=_claim_id(used, edge_kind, ref, event.event_id),
                    kind=edge_kind,
                    source=ref,
                    target=event.event_id,
                    timestamp=event.timestamp,
                    attributes={"trace_id": event.trace_id},
                )
            )
    return nodes, edges


def _node_attrs(event: TraceEvent, kind: NodeKind) -> dict:
    attrs = {k: v for k, v in event.attrs.items() if k != "message_id"}
    if event.event_type in _MESSAGE_EVENTS:
        # edge directives live on the propagation edge; keep only what the
        # node schema itself accepts
        allowed = schema.allowed_node_keys(kind)
        attrs = {k: v for k, v in attrs.items()
                 if k not in _EDGE_DIRECTIVE_KEYS or k in allowed}
    if event.content:
        attrs.setdefault("content", event.content)
    if event.event_type in _TYPED_EVENTS:
        attrs.setdefault("type", event.event_type)
    return attrs


def _ordered_unique(items) -> list:
    seen, out = set(), []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def _claim_id(used: set, kind: EdgeKind, source: str, target: str) -> str:
    base = f"e.{kind.value}.{source}.{target}"
    edge_id = base
    suffix = 2
    while edge_id in used:
        edge_id = f"{base}.{suffix}"
        suffix += 1
    used.add(edge_id)
    return edge_id


# ===========================================================================
# stage 3: cross-layer binding
# ===========================================================================


def bind_cross_layer(graph: AgentBomGraph, events, matcher: DangerMatcher) -> tuple:
    """Derive binding and propagation edges; returns (new nodes, new edges).

    The new nodes are synthesized message endpoints for unpaired sends and
    receives; they are attribute-minimal on purpose, so that dropping a real
    endpoint out of a fixture cannot leave flagged content behind.
    """
    new_nodes, new_edges = [], []
    per_trace: dict[str, list] = {}
    for event in events:
        per_trace.setdefault(event.trace_id, []).append(event)

    for event in events:
        handler = _BINDERS.get(event.event_type)
        if handler:
            handler(graph, event, per_trace[event.trace_id], new_edges)

    _pair_messages(graph, events, matcher, new_nodes, new_edges)
    return new_nodes, new_edges


def _bind_tool(graph, event, trace_events, out):
    name = event.attrs.get("tool_name")
    if not name:
        raise TraceParseError(f"tool_invocation {event.event_id!r} lacks tool_name")
    tool_id = f"tool.{name}"
    if tool_id not in graph.nodes:
        raise UnresolvedRefError(
            f"event {event.event_id!r} invokes undeclared tool {name!r}"
        )
    out.append(_bind_edge(graph, out, EdgeKind.INVOKES, event.event_id, tool_id, event))
    decision = _latest_before(trace_events, event, {"decision_made"})
    if decision is not None:
        out.append(
            _bind_edge(graph, out, EdgeKind.SELECTS, decision.event_id, tool_id, event,
                       timestamp=decision.timestamp, trace_id=decision.trace_id)
        )


def _bind_skill(graph, event, trace_events, out):
    name = event.attrs.get("tool_name")
    if not name:
        raise TraceParseError(f"skill_invocation {event.event_id!r} lacks tool_name")
    skill_id = f"skill.{name}"
    if skill_id not in graph.nodes:
        raise UnresolvedRefError(
            f"event {event.event_id!r} invokes undeclared skill {name!r}"
        )
    decision = _latest_before(trace_events, event, {"decision_made"})
    if decision is not None:
        out.append(
            _bind_edge(graph, out, EdgeKind.SELECTS, decision.event_id, skill_id, event,
                       timestamp=decision.timestamp, trace_id=decision.trace_id)
        )


def _bind_memory_read(graph, event, trace_events, out):
    mem_id = _memory_target(graph, event)
    consumer = _earliest_after(
        trace_events, event, {"context_assembled", "reasoning_step"}
    )
    if consumer is not None:
        out.append(
            _bind_edge(graph, out, EdgeKind.READS_FROM, consumer.event_id, mem_id,
                       event, timestamp=consumer.timestamp,
                       trace_id=consumer.trace_id)
        )


def _bind_memory_write(graph, event, trace_events, out):
    mem_id = _memory_target(graph, event)
    attrs = {}
    if event.content:
        attrs["content"] = event.content
    out.append(
        _bind_edge(graph, out, EdgeKind.WRITES_TO, event.event_id, mem_id, event,
                   extra=attrs)
    )


def _bind_delegation(graph, event, trace_events, out):
    target = event.attrs.get("target_agent")
    if not target:
        raise TraceParseError(f"delegation {event.event_id!r} lacks target_agent")
    target_id = f"agent.{target}"
    if target_id not in graph.nodes:
        raise UnresolvedRefError(
            f"event {event.event_id!r} delegates to unknown agent {target!r}"
        )
    source_id = f"agent.{event.agent_id}"
    if source_id not in graph.nodes:
        raise UnresolvedRefError(
            f"delegation {event.event_id!r} from unknown agent {event.agent_id!r}"
        )
    attrs = {"type": "delegation", "trace_id": event.trace_id,
             "source_agent": event.agent_id, "target_agent": target}
    dependency = event.attrs.get("task_dependency")
    if dependency:
        attrs["task_dependency"] = dependency
    if event.content:
        attrs["content"] = event.content
    edge_id = _free_edge_id(graph, out, EdgeKind.DELEGATES_TO, source_id, target_id)
    out.append(
        Edge(edge_id=edge_id, kind=EdgeKind.DELEGATES_TO, source=source_id,
             target=target_id, timestamp=event.timestamp, attributes=attrs)
    )


_BINDERS = {
    "tool_invocation": _bind_tool,
    "skill_invocation": _bind_skill,
    "memory_read": _bind_memory_read,
    "memory_write": _bind_memory_write,
    "delegation": _bind_delegation,
}


def _memory_target(graph, event) -> str:
    store = event.attrs.get("target")
    if not store:
        raise TraceParseError(f"{event.event_type} {event.event_id!r} lacks target")
    mem_id = f"mem.{store}"
    if mem_id not in graph.nodes:
        raise UnresolvedRefError(
            f"event {event.event_id!r} touches undeclared memory store {store!r}"
        )
    return mem_id


def _bind_edge(graph, pending, kind, source, target, event,
               timestamp=None, trace_id=None, extra=None):
    attrs = {"trace_id": trace_id or event.trace_id}
    if extra:
        attrs.update(extra)
    edge_id = _free_edge_id(graph, pending, kind, source, target)
    return Edge(edge_id=edge_id, kind=kind, source=source, target=target,
                timestamp=timestamp or event.timestamp, attributes=attrs)


def _free_edge_id(graph, pending, kind, source, target) -> str:
    taken = {e.edge_id for e in pending}
    base = f"e.{kind.value}.{source}.{target}"
    edge_id = base
    suffix = 2
    while graph.has_element(edge_id) or edge_id in taken:
        edge_id = f"{base}.{suffix}"
        suffix += 1
    return edge_id


def _latest_before(trace_events, event, types):
    best = None
    for candidate in trace_events:
        if candidate is event:
            break
        if candidate.event_type in types:
            best = candidate
    return best


def _earliest_after(trace_events, event, types):
    passed = False
    for candidate in trace_events:
        if candidate is event:
            passed = True
            continue
        if passed and candidate.event_type in types:
            return candidate
    return None


# ---------------------------------------------------------------------------
# message pairing
# ---------------------------------------------------------------------------


def _agents_line_up(sender, receiver) -> bool:
    """Whether a send and a receive can plausibly be the same message.

    The two events must sit on different agents, and any declared
    counterpart (``target_agent`` on the send, ``source_agent`` on the
    receive) has to agree with the other side.
    """
    if sender.agent_id is not None and sender.agent_id == receiver.agent_id:
        return False
    declared_target = sender.attrs.get("target_agent")
    if declared_target is not None and declared_target != receiver.agent_id:
        return False
    declared_source = receiver.attrs.get("source_agent")
    if declared_source is not None and declared_source != sender.agent_id:
        return False
    return True


def _pair_messages(graph, events, matcher, new_nodes, new_edges):
    sent = [e for e in events if e.event_type == "message_sent"]
    received = [e for e in events if e.event_type == "message_received"]
    taken: set[str] = set()
    pairs = []

    by_message_id = {}
    for event in sent:
        key = event.attrs.get("message_id")
        if key is not None:
            by_message_id.setdefault(str(key), []).append(event)
    for event in received:
        key = event.attrs.get("message_id")
        if key is None:
            continue
        candidates = [c for c in by_message_id.get(str(key), [])
                      if c.event_id not in taken]
        if candidates:
            pairs.append((candidates[0], event))
            taken.add(candidates[0].event_id)
            taken.add(event.event_id)

    # fallback pairing: agents line up, content matches, nearest send first
    for event in received:
        if event.event_id in taken:
            continue
        candidates = [
            c for c in sent
            if c.event_id not in taken
            and c.content == event.content
            and _agents_line_up(c, event)
        ]
        if candidates:
            recv_stamp = parse_instant(event.timestamp)
            stamp_key = lambda c: (parse_instant(c.timestamp), c.event_id)
            not_after = [c for c in candidates
                         if parse_instant(c.timestamp) <= recv_stamp]
            if not_after:
                best = max(not_after, key=stamp_key)
            else:
                best = min(candidates, key=stamp_key)
            pairs.append((best, event))
            taken.add(best.event_id)
            taken.add(event.event_id)

    for sender, receiver in pairs:
        attrs = _propagation_attrs(sender)
        attrs.update(_propagation_attrs(receiver))
        attrs.setdefault("source_agent", sender.agent_id)
        attrs.setdefault("target_agent", receiver.agent_id)
        attrs.setdefault("propagation_status", "delivered")
        attrs["trace_id"] = sender.trace_id
        if receiver.content:
            attrs["content"] = receiver.content
        _merge_flags(attrs, matcher)
        edge_id = _free_edge_id(graph, new_edges, EdgeKind.SENDS_TO,
                                sender.event_id, receiver.event_id)
        new_edges.append(
            Edge(edge_id=edge_id, kind=EdgeKind.SENDS_TO, source=sender.event_id,
                 target=receiver.event_id, timestamp=receiver.timestamp,
                 attributes=attrs)
        )

    for event in sent:
        if event.event_id in taken:
            continue
        sink_id = f"{event.event_id}.sink"
        new_nodes.append(_synth_endpoint(graph, sink_id, NodeKind.EXTERNAL, event,
                                         event.attrs.get("target_agent")))
        attrs = _propagation_attrs(event)
        attrs.setdefault("source_agent", event.agent_id)
        attrs["propagation_status"] = "dropped"
        attrs["trace_id"] = event.trace_id
        if event.content:
            attrs["content"] = event.content
        _merge_flags(attrs, matcher)
        edge_id = _free_edge_id(graph, new_edges, EdgeKind.SENDS_TO,
                                event.event_id, sink_id)
        new_edges.append(
            Edge(edge_id=edge_id, kind=EdgeKind.SENDS_TO, source=event.event_id,
                 target=sink_id, timestamp=event.timestamp, attributes=attrs)
        )

    for event in received:
        if event.event_id in taken:
            continue
        origin_id = f"{event.event_id}.origin"
        new_nodes.append(_synth_endpoint(graph, origin_id, NodeKind.ACTION, event,
                                         event.attrs.get("source_agent")))
        attrs = _propagation_attrs(event)
        attrs.setdefault("target_agent", event.agent_id)
        attrs.setdefault("propagation_status", "delivered")
        attrs["trace_id"] = event.trace_id
        if event.content:
            attrs["content"] = event.content
        _merge_flags(attrs, matcher)
        edge_id = _free_edge_id(graph, new_edges, EdgeKind.SENDS_TO,
                                origin_id, event.event_id)
        new_edges.append(
            Edge(edge_id=edge_id, kind=EdgeKind.SENDS_TO, source=origin_id,
                 target=event.event_id, timestamp=event.timestamp,
                 attributes=attrs)
        )


def _propagation_attrs(event: TraceEvent) -> dict:
    keys = _EDGE_DIRECTIVE_KEYS - {"message_id"}
    return {k: v for k, v in event.attrs.items() if k in keys}


def _synth_endpoint(graph, node_id, kind, event, counterpart_agent) -> Node:
    """A minimal stand-in node for the missing half of a message."""
    attributes = {"type": "synthesized_endpoint"}
    if counterpart_agent and counterpart_agent in graph.agents:
        agent_id = counterpart_agent
    else:
        # no usable counterpart agent: anchor to the known side and mark the
        # channel shared so the propagation edge stays legal
        agent_id = event.agent_id
        attributes["shared_state"] = "message_channel"
    return Node(node_id=node_id, kind=kind, agent_id=agent_id,
                trace_id=event.trace_id, timestamp=event.timestamp,
                attributes=attributes)


# ===========================================================================
# stage 4: assembly
# ===========================================================================


def assemble(manifest: CapabilityManifest, events,
             matcher: DangerMatcher | None = None) -> AgentBomGraph:
    """Build, validate, and freeze the full graph."""
    matcher = matcher or default_matcher()
    graph = AgentBomGraph()
    extract_static(manifest, graph, matcher)
    nodes, evolution = normalize_events(events, matcher)
    for node in nodes:
        graph.add_node(node)
    for edge in evolution:
        graph.add_edge(edge)
    extra_nodes, bound = bind_cross_layer(graph, events, matcher)
    for node in extra_nodes:
        graph.add_node(node)
    for edge in bound:
        graph.add_edge(edge)
    violations = graph.validate()
    if violations:
        raise AssemblyValidationError(violations)
    graph.freeze()
    return graph
