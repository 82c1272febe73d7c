"""Closed vocabularies for the two-layer agent graph.

Everything the graph may contain is declared here as data: node kinds and
their layers, edge kinds and their families, the endpoint-constraint table,
the per-kind attribute registries, and the flow-orientation table used by
path traversal. Keeping these as module-level tables means the construction
checks, the validators, and the traversal engine all read from one place.
"""

from __future__ import annotations

import enum

from .errors import UnknownKindError

# ===========================================================================
# layers and node kinds
# ===========================================================================


class Layer(enum.Enum):
    """Which slice of the model a node kind belongs to."""

    STATIC = "static"        # capabilities declared before any execution
    RUNTIME = "runtime"      # states observed during an execution trace
    AUXILIARY = "auxiliary"  # reified environment and artifact objects


class NodeKind(enum.Enum):
    """Every node kind the graph accepts. The set is closed."""

    # -- static capability layer
    AGENT = "AgentNode"                    # an agent's identity anchor
    CODE = "CodeNode"                      # code module or dependency
    LLM = "LLMNode"                        # backing language model
    PROMPT = "PromptNode"                  # system / role prompt
    TOOL = "ToolNode"                      # declared callable tool
    SKILL = "SkillNode"                    # packaged skill bundle
    LONG_TERM_MEMORY = "LongTermMemoryNode"  # persistent memory store

    # -- runtime semantic layer
    EXTERNAL = "ExternalNode"              # content entering from outside
    GOAL = "GoalNode"                      # formed task goal
    CONTEXT = "ContextNode"                # assembled working context
    REASONING = "ReasoningNode"            # reasoning step
    DECISION = "DecisionNode"              # committed decision
    ACTION = "ActionNode"                  # performed action
    OBSERVATION = "ObservationNode"        # observed action result
    OUTPUT = "OutputNode"                  # emitted output

    # -- auxiliary objects
    ENVIRONMENT = "EnvironmentNode"        # affected environment
    ARTIFACT = "ArtifactNode"              # produced or touched artifact


_LAYER_OF_KIND = {
    NodeKind.AGENT: Layer.STATIC,
    NodeKind.CODE: Layer.STATIC,
    NodeKind.LLM: Layer.STATIC,
    NodeKind.PROMPT: Layer.STATIC,
    NodeKind.TOOL: Layer.STATIC,
    NodeKind.SKILL: Layer.STATIC,
    NodeKind.LONG_TERM_MEMORY: Layer.STATIC,
    NodeKind.EXTERNAL: Layer.RUNTIME,
    NodeKind.GOAL: Layer.RUNTIME,
    NodeKind.CONTEXT: Layer.RUNTIME,
    NodeKind.REASONING: Layer.RUNTIME,
    NodeKind.DECISION: Layer.RUNTIME,
    NodeKind.ACTION: Layer.RUNTIME,
    NodeKind.OBSERVATION: Layer.RUNTIME,
    NodeKind.OUTPUT: Layer.RUNTIME,
    NodeKind.ENVIRONMENT: Layer.AUXILIARY,
    NodeKind.ARTIFACT: Layer.AUXILIARY,
}

STATIC_KINDS = frozenset(k for k, l in _LAYER_OF_KIND.items() if l is Layer.STATIC)
RUNTIME_KINDS = frozenset(k for k, l in _LAYER_OF_KIND.items() if l is Layer.RUNTIME)
AUXILIARY_KINDS = frozenset(k for k, l in _LAYER_OF_KIND.items() if l is Layer.AUXILIARY)


def layer_of(kind: NodeKind) -> Layer:
    return _LAYER_OF_KIND[kind]


def parse_node_kind(name: str) -> NodeKind:
    """Resolve a wire name like ``"ToolNode"``; unknown names are an error."""
    try:
        return NodeKind(name)
    except ValueError:
        raise UnknownKindError(f"unknown node kind {name!r}") from None


# Stage order of the runtime cognitive loop. Two stages are "consecutive"
# when their indices differ by exactly one; that choice decides whether a
# reference edge becomes flows_to or influences.
COGNITIVE_STAGES = {
    NodeKind.EXTERNAL: 0,
    NodeKind.GOAL: 1,
    NodeKind.CONTEXT: 2,
    NodeKind.REASONING: 3,
    NodeKind.DECISION: 4,
    NodeKind.ACTION: 5,
    NodeKind.OBSERVATION: 6,
    NodeKind.OUTPUT: 7,
}


# ===========================================================================
# edge kinds, families, endpoint constraints
# ===========================================================================


class EdgeFamily(enum.Enum):
    STRUCTURAL = "structural"    # static capability wiring
    EVOLUTION = "evolution"      # runtime state evolution
    BINDING = "binding"          # runtime-to-static coupling
    PROPAGATION = "propagation"  # content crossing agent boundaries


class EdgeKind(enum.Enum):
    """Every edge kind the graph accepts. The set is closed."""

    # -- structural
    HAS_PROMPT = "has_prompt"
    USES_MODEL = "uses_model"
    LOADS_TOOL = "loads_tool"
    LOADS_SKILL = "loads_skill"
    DEPENDS_ON = "depends_on"

    # -- evolution
    FLOWS_TO = "flows_to"
    TRANSITIONS_TO = "transitions_to"
    INFLUENCES = "influences"
    ACTS_ON = "acts_on"
    EMITS = "emits"

    # -- binding
    READS_FROM = "reads_from"
    SELECTS = "selects"
    INVOKES = "invokes"
    WRITES_TO = "writes_to"
    UPDATES = "updates"

    # -- propagation
    SENDS_TO = "sends_to"
    DELEGATES_TO = "delegates_to"
    RESPONDS_TO = "responds_to"
    SHARES_CONTEXT_WITH = "shares_context_with"
    SHARES_MEMORY_WITH = "shares_memory_with"


_FAMILY_OF_KIND = {
    EdgeKind.HAS_PROMPT: EdgeFamily.STRUCTURAL,
    EdgeKind.USES_MODEL: EdgeFamily.STRUCTURAL,
    EdgeKind.LOADS_TOOL: EdgeFamily.STRUCTURAL,
    EdgeKind.LOADS_SKILL: EdgeFamily.STRUCTURAL,
    EdgeKind.DEPENDS_ON: EdgeFamily.STRUCTURAL,
    EdgeKind.FLOWS_TO: EdgeFamily.EVOLUTION,
    EdgeKind.TRANSITIONS_TO: EdgeFamily.EVOLUTION,
    EdgeKind.INFLUENCES: EdgeFamily.EVOLUTION,
    EdgeKind.ACTS_ON: EdgeFamily.EVOLUTION,
    EdgeKind.EMITS: EdgeFamily.EVOLUTION,
    EdgeKind.READS_FROM: EdgeFamily.BINDING,
    EdgeKind.SELECTS: EdgeFamily.BINDING,
    EdgeKind.INVOKES: EdgeFamily.BINDING,
    EdgeKind.WRITES_TO: EdgeFamily.BINDING,
    EdgeKind.UPDATES: EdgeFamily.BINDING,
    EdgeKind.SENDS_TO: EdgeFamily.PROPAGATION,
    EdgeKind.DELEGATES_TO: EdgeFamily.PROPAGATION,
    EdgeKind.RESPONDS_TO: EdgeFamily.PROPAGATION,
    EdgeKind.SHARES_CONTEXT_WITH: EdgeFamily.PROPAGATION,
    EdgeKind.SHARES_MEMORY_WITH: EdgeFamily.PROPAGATION,
}

PROPAGATION_KINDS = frozenset(
    k for k, f in _FAMILY_OF_KIND.items() if f is EdgeFamily.PROPAGATION
)

# Family alias accepted wherever a set of edge kinds is written down.
AGENT_PROPAGATION_ALIAS = "AgentPropagationEdge"

_FAMILY_ALIASES = {
    AGENT_PROPAGATION_ALIAS: PROPAGATION_KINDS,
    "structural": frozenset(k for k, f in _FAMILY_OF_KIND.items() if f is EdgeFamily.STRUCTURAL),
    "evolution": frozenset(k for k, f in _FAMILY_OF_KIND.items() if f is EdgeFamily.EVOLUTION),
    "binding": frozenset(k for k, f in _FAMILY_OF_KIND.items() if f is EdgeFamily.BINDING),
    "propagation": PROPAGATION_KINDS,
}


def family_of(kind: EdgeKind) -> EdgeFamily:
    return _FAMILY_OF_KIND[kind]


def parse_edge_kind(name: str) -> EdgeKind:
    try:
        return EdgeKind(name)
    except ValueError:
        raise UnknownKindError(f"unknown edge kind {name!r}") from None


def expand_edge_kinds(names) -> frozenset[EdgeKind]:
    """Expand a mixed list of edge-kind names and family aliases."""
    out: set[EdgeKind] = set()
    for name in names:
        if isinstance(name, EdgeKind):
            out.add(name)
        elif name in _FAMILY_ALIASES:
            out.update(_FAMILY_ALIASES[name])
        else:
            out.add(parse_edge_kind(name))
    return frozenset(out)


# Endpoint-constraint table: edge kind -> (allowed source kinds, allowed
# target kinds). add_edge rejects any pairing outside this table.
ENDPOINT_TABLE: dict[EdgeKind, tuple[frozenset[NodeKind], frozenset[NodeKind]]] = {
    EdgeKind.HAS_PROMPT: (frozenset({NodeKind.AGENT}), frozenset({NodeKind.PROMPT})),
    EdgeKind.USES_MODEL: (frozenset({NodeKind.AGENT}), frozenset({NodeKind.LLM})),
    EdgeKind.LOADS_TOOL: (frozenset({NodeKind.AGENT}), frozenset({NodeKind.TOOL})),
    EdgeKind.LOADS_SKILL: (frozenset({NodeKind.AGENT}), frozenset({NodeKind.SKILL})),
    EdgeKind.DEPENDS_ON: (
        frozenset({NodeKind.AGENT, NodeKind.CODE}),
        frozenset({NodeKind.CODE}),
    ),
    EdgeKind.FLOWS_TO: (RUNTIME_KINDS, RUNTIME_KINDS),
    EdgeKind.TRANSITIONS_TO: (RUNTIME_KINDS, RUNTIME_KINDS),
    EdgeKind.INFLUENCES: (RUNTIME_KINDS, RUNTIME_KINDS),
    EdgeKind.ACTS_ON: (
        frozenset({NodeKind.ACTION}),
        frozenset({NodeKind.ENVIRONMENT, NodeKind.ARTIFACT}),
    ),
    EdgeKind.EMITS: (RUNTIME_KINDS, frozenset({NodeKind.OBSERVATION})),
    EdgeKind.READS_FROM: (
        frozenset({NodeKind.CONTEXT, NodeKind.REASONING}),
        frozenset({NodeKind.LONG_TERM_MEMORY}),
    ),
    EdgeKind.SELECTS: (
        frozenset({NodeKind.DECISION}),
        frozenset({NodeKind.TOOL, NodeKind.SKILL}),
    ),
    EdgeKind.INVOKES: (frozenset({NodeKind.ACTION}), frozenset({NodeKind.TOOL})),
    EdgeKind.WRITES_TO: (
        frozenset({NodeKind.ACTION, NodeKind.OBSERVATION, NodeKind.OUTPUT}),
        frozenset({NodeKind.LONG_TERM_MEMORY, NodeKind.ARTIFACT}),
    ),
    EdgeKind.UPDATES: (RUNTIME_KINDS, STATIC_KINDS),
    EdgeKind.SENDS_TO: (
        frozenset({NodeKind.OUTPUT, NodeKind.ACTION}),
        frozenset({NodeKind.EXTERNAL, NodeKind.CONTEXT}),
    ),
    EdgeKind.DELEGATES_TO: (
        frozenset({NodeKind.AGENT, NodeKind.DECISION}),
        frozenset({NodeKind.AGENT}),
    ),
    EdgeKind.RESPONDS_TO: (
        frozenset({NodeKind.OUTPUT, NodeKind.ACTION}),
        frozenset({NodeKind.EXTERNAL, NodeKind.CONTEXT, NodeKind.GOAL}),
    ),
    EdgeKind.SHARES_CONTEXT_WITH: (
        frozenset({NodeKind.AGENT, NodeKind.CONTEXT}),
        frozenset({NodeKind.AGENT, NodeKind.CONTEXT}),
    ),
    EdgeKind.SHARES_MEMORY_WITH: (
        frozenset({NodeKind.AGENT}),
        frozenset({NodeKind.LONG_TERM_MEMORY}),
    ),
}


# ===========================================================================
# flow orientation
# ===========================================================================

# Traversal follows content flow, not arrow direction. WITH means content
# moves source -> target; INV means the arrow records an access and content
# moves target -> source (reads_from: the reader points at the store, but
# the store's content flows into the reader); BOTH couples the endpoints in
# either direction (invokes: the invoking action is both the provenance and
# the impact channel of the tool).


class Flow(enum.Enum):
    WITH = "with"
    INV = "inv"
    BOTH = "both"


FLOW_OF_KIND: dict[EdgeKind, Flow] = {
    EdgeKind.HAS_PROMPT: Flow.INV,
    EdgeKind.USES_MODEL: Flow.INV,
    EdgeKind.LOADS_TOOL: Flow.INV,
    EdgeKind.LOADS_SKILL: Flow.INV,
    EdgeKind.DEPENDS_ON: Flow.INV,
    EdgeKind.FLOWS_TO: Flow.WITH,
    EdgeKind.TRANSITIONS_TO: Flow.WITH,
    EdgeKind.INFLUENCES: Flow.WITH,
    EdgeKind.ACTS_ON: Flow.WITH,
    EdgeKind.EMITS: Flow.WITH,
    EdgeKind.READS_FROM: Flow.INV,
    EdgeKind.SELECTS: Flow.INV,
    EdgeKind.INVOKES: Flow.BOTH,
    EdgeKind.WRITES_TO: Flow.WITH,
    EdgeKind.UPDATES: Flow.WITH,
    EdgeKind.SENDS_TO: Flow.WITH,
    EdgeKind.DELEGATES_TO: Flow.WITH,
    EdgeKind.RESPONDS_TO: Flow.INV,
    EdgeKind.SHARES_CONTEXT_WITH: Flow.WITH,
    EdgeKind.SHARES_MEMORY_WITH: Flow.INV,
}


# ===========================================================================
# attribute registry
# ===========================================================================

TRUST_LEVELS = ("trusted", "untrusted", "unknown")
INTEGRITY_STATUSES = ("valid", "invalid", "unverified")
AUTHENTICATION_STATUSES = ("authenticated", "unauthenticated", "invalid")
CONFIRMATION_STATUSES = ("confirmed", "bypassed", "not_required")
PROPAGATION_STATUSES = ("delivered", "tampered", "dropped")
EXECUTION_STATUSES = ("succeeded", "failed", "blocked")
SANDBOX_STATUSES = ("sandboxed", "unsandboxed")


class ValueKind(enum.Enum):
    TEXT = "text"
    ENUM = "enum"
    BOOL = "bool"
    INSTANT = "instant"
    STRING_LIST = "string_list"
    KEY_VALUE_MAP = "key_value_map"


class AttributeSpec:
    """Declares one attribute key: its value kind and, for enums, tokens."""

    __slots__ = ("key", "value_kind", "tokens")

    def __init__(self, key: str, value_kind: ValueKind, tokens: tuple[str, ...] = ()):
        self.key = key
        self.value_kind = value_kind
        self.tokens = tokens


def _text(key):
    return AttributeSpec(key, ValueKind.TEXT)


def _enum(key, tokens):
    return AttributeSpec(key, ValueKind.ENUM, tokens)


def _slist(key):
    return AttributeSpec(key, ValueKind.STRING_LIST)


ATTRIBUTE_SPECS: dict[str, AttributeSpec] = {
    spec.key: spec
    for spec in (
        _text("content"),
        _text("source"),
        _enum("trust_level", TRUST_LEVELS),
        _enum("integrity_status", INTEGRITY_STATUSES),
        _enum("authentication_status", AUTHENTICATION_STATUSES),
        _enum("confirmation_status", CONFIRMATION_STATUSES),
        _enum("propagation_status", PROPAGATION_STATUSES),
        _enum("execution_status", EXECUTION_STATUSES),
        _enum("sandbox_status", SANDBOX_STATUSES),
        _slist("basis"),
        _text("action_intent"),
        _slist("selected_tools"),
        AttributeSpec("parameters", ValueKind.KEY_VALUE_MAP),
        _slist("parameter_source"),
        _text("tool_name"),
        _text("input_schema"),
        _slist("permission_scope"),
        _text("target"),
        _slist("affected_resource"),
        _text("environment_state_change"),
        _slist("side_effects"),
        _text("execution_environment"),
        _text("code_file"),
        _text("type"),
        _text("role"),
        _text("source_agent"),
        _text("target_agent"),
        _text("agent_id"),
        _text("task_dependency"),
        _text("shared_state"),
        _slist("danger_flags"),
    )
}

# Keys any node kind may carry.
_NODE_COMMON_KEYS = frozenset(
    {"content", "source", "trust_level", "integrity_status", "danger_flags",
     "type", "shared_state"}
)

# Extra keys per node kind, on top of the common set.
_NODE_EXTRA_KEYS: dict[NodeKind, frozenset[str]] = {
    NodeKind.AGENT: frozenset({"role", "agent_id"}),
    NodeKind.CODE: frozenset({"code_file"}),
    NodeKind.LLM: frozenset(),
    NodeKind.PROMPT: frozenset({"role"}),
    NodeKind.TOOL: frozenset(
        {"tool_name", "input_schema", "permission_scope", "sandbox_status",
         "execution_environment"}
    ),
    NodeKind.SKILL: frozenset(
        {"tool_name", "input_schema", "permission_scope", "sandbox_status",
         "execution_environment"}
    ),
    NodeKind.LONG_TERM_MEMORY: frozenset(),
    NodeKind.EXTERNAL: frozenset(
        {"source_agent", "target_agent", "authentication_status"}
    ),
    NodeKind.GOAL: frozenset({"basis", "role", "task_dependency", "action_intent"}),
    NodeKind.CONTEXT: frozenset({"basis"}),
    NodeKind.REASONING: frozenset({"basis", "action_intent"}),
    NodeKind.DECISION: frozenset(
        {"basis", "selected_tools", "action_intent", "confirmation_status",
         "target_agent", "task_dependency"}
    ),
    NodeKind.ACTION: frozenset(
        {"basis", "action_intent", "parameters", "parameter_source", "tool_name",
         "target", "confirmation_status", "execution_status", "source_agent",
         "target_agent", "affected_resource"}
    ),
    NodeKind.OBSERVATION: frozenset(
        {"basis", "execution_status", "environment_state_change",
         "affected_resource", "side_effects", "target"}
    ),
    NodeKind.OUTPUT: frozenset({"basis", "source_agent", "target_agent", "target"}),
    NodeKind.ENVIRONMENT: frozenset(
        {"environment_state_change", "sandbox_status", "execution_environment",
         "affected_resource"}
    ),
    NodeKind.ARTIFACT: frozenset({"code_file", "affected_resource", "target"}),
}

# Keys any edge may carry, and extras for propagation-family edges. On
# edges trace_id is an attribute; on nodes it is a field and never a key.
_EDGE_COMMON_KEYS = frozenset({"content", "trace_id", "type", "danger_flags"})
_EDGE_PROPAGATION_KEYS = frozenset(
    {"authentication_status", "integrity_status", "propagation_status",
     "source_agent", "target_agent", "task_dependency", "shared_state"}
)

# trace_id is an edge attribute key only; on nodes it is a field.
_EDGE_ONLY_SPECS = {"trace_id": _text("trace_id")}


def allowed_node_keys(kind: NodeKind) -> frozenset[str]:
    return _NODE_COMMON_KEYS | _NODE_EXTRA_KEYS[kind]


def allowed_edge_keys(kind: EdgeKind) -> frozenset[str]:
    if family_of(kind) is EdgeFamily.PROPAGATION:
        return _EDGE_COMMON_KEYS | _EDGE_PROPAGATION_KEYS
    return _EDGE_COMMON_KEYS


def attribute_spec(key: str) -> AttributeSpec | None:
    spec = ATTRIBUTE_SPECS.get(key)
    if spec is None:
        spec = _EDGE_ONLY_SPECS.get(key)
    return spec

# Attribute keys whose string-list entries name other graph elements and
# must resolve when they are present.
REFERENCE_LIST_KEYS = ("basis", "parameter_source")
