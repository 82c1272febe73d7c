"""The audit rule template, the clause engine, and the builtin risk pack.

A rule names an entry selector, a backward path spec, a forward path spec,
and a conjunction of scoped clauses. The engine localizes entries, traces
both directions from each, and emits one finding per entry whose clauses
all hold. Kept paths are the ones that satisfy the exists-clauses of their
scope, so a finding's paths are themselves the evidence chain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import RulePackError
from .graph import AgentBomGraph, Edge
from .predicates import (
    And,
    AttrCmp,
    EntryAttr,
    HasFlag,
    KindIs,
    LayerIs,
    NeighborMatch,
    Not,
    Or,
    Predicate,
    predicate_from_dict,
)
from . import schema
from .traversal import BACKWARD, FORWARD, PathSpec, trace

RISK_IDS = tuple(f"ASI{n:02d}" for n in range(1, 11))

RISK_NAMES = {
    "ASI01": "goal_hijack",
    "ASI02": "tool_misuse",
    "ASI03": "privilege_abuse",
    "ASI04": "supply_chain_vulnerability",
    "ASI05": "unexpected_code_execution",
    "ASI06": "memory_poisoning",
    "ASI07": "insecure_inter_agent_communication",
    "ASI08": "cascading_failure",
    "ASI09": "human_trust_exploitation",
    "ASI10": "rogue_agent",
}

CLAUSE_SCOPES = ("entry", "back_origin", "back_path", "fwd_terminus", "fwd_path")
QUANTIFIERS = ("exists", "forall")

_PROPAGATION_KIND_NAMES = tuple(sorted(k.value for k in schema.PROPAGATION_KINDS))


# ===========================================================================
# rule structure
# ===========================================================================


@dataclass
class EntrySelector:
    """Which elements may open a candidate risk chain."""

    element_class: str  # "node" | "edge"
    kinds: tuple
    predicate: Predicate | None = None

    def __post_init__(self):
        if self.element_class not in ("node", "edge"):
            raise RulePackError(
                f"entry element_class must be node or edge, got {self.element_class!r}"
            )
        self.kinds = tuple(self.kinds)
        if not self.kinds:
            raise RulePackError("entry selector needs at least one kind")
        if self.element_class == "node":
            self._kind_set = frozenset(schema.parse_node_kind(k) for k in self.kinds)
        else:
            self._kind_set = schema.expand_edge_kinds(self.kinds)

    def candidates(self, graph: AgentBomGraph):
        if self.element_class == "node":
            for kind in sorted(self._kind_set, key=lambda k: k.value):
                yield from graph.nodes_of_kind(kind)
        else:
            for kind in sorted(self._kind_set, key=lambda k: k.value):
                yield from graph.edges_of_kind(kind)

    def matches(self, element, graph: AgentBomGraph) -> bool:
        if self.predicate is None:
            return True
        return self.predicate.evaluate(element, graph=graph, entry=element)

    def to_dict(self) -> dict:
        doc = {"element_class": self.element_class, "kinds": list(self.kinds)}
        if self.predicate is not None:
            doc["predicate"] = self.predicate.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "EntrySelector":
        predicate = None
        if "predicate" in doc:
            predicate = predicate_from_dict(doc["predicate"])
        return cls(
            element_class=doc["element_class"],
            kinds=tuple(doc["kinds"]),
            predicate=predicate,
        )


@dataclass
class Clause:
    """One scoped, quantified predicate; all of a rule's clauses conjoin."""

    scope: str
    quantifier: str
    predicate: Predicate

    def __post_init__(self):
        if self.scope not in CLAUSE_SCOPES:
            raise RulePackError(f"unknown clause scope {self.scope!r}")
        if self.quantifier not in QUANTIFIERS:
            raise RulePackError(f"unknown quantifier {self.quantifier!r}")

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "quantifier": self.quantifier,
            "predicate": self.predicate.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Clause":
        return cls(
            scope=doc["scope"],
            quantifier=doc["quantifier"],
            predicate=predicate_from_dict(doc["predicate"]),
        )


@dataclass
class AuditRule:
    risk_id: str
    name: str
    entry: EntrySelector
    back: PathSpec
    fwd: PathSpec
    conditions: list

    def __post_init__(self):
        if not self.conditions:
            raise RulePackError(f"rule {self.risk_id}: conditions must be non-empty")
        scopes = {c.scope for c in self.conditions}
        if "entry" not in scopes:
            raise RulePackError(f"rule {self.risk_id}: needs an entry clause")
        if not scopes & {"back_origin", "back_path", "fwd_terminus", "fwd_path"}:
            raise RulePackError(
                f"rule {self.risk_id}: needs a backward or forward clause"
            )
        if self.back.direction != BACKWARD or self.fwd.direction != FORWARD:
            raise RulePackError(f"rule {self.risk_id}: path specs point the wrong way")

    def to_dict(self) -> dict:
        return {
            "risk_id": self.risk_id,
            "name": self.name,
            "entry": self.entry.to_dict(),
            "back": self.back.to_dict(),
            "fwd": self.fwd.to_dict(),
            "conditions": [c.to_dict() for c in self.conditions],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AuditRule":
        try:
            return cls(
                risk_id=str(doc["risk_id"]),
                name=str(doc.get("name", "")),
                entry=EntrySelector.from_dict(doc["entry"]),
                back=_spec_from_dict(doc["back"], BACKWARD),
                fwd=_spec_from_dict(doc["fwd"], FORWARD),
                conditions=[Clause.from_dict(c) for c in doc["conditions"]],
            )
        except KeyError as missing:
            raise RulePackError(f"rule document is missing field {missing}") from None


def _spec_from_dict(doc: dict, expected_direction: str) -> PathSpec:
    direction = doc.get("direction", expected_direction)
    terminal = None
    if "terminal" in doc:
        terminal = predicate_from_dict(doc["terminal"])
    return PathSpec(
        direction=direction,
        allowed_edge_kinds=doc["edge_kinds"],
        allowed_node_kinds=doc.get("node_kinds"),
        terminal=terminal,
        max_depth=int(doc.get("max_depth", 32)),
        cross_agent=bool(doc.get("cross_agent", False)),
    )


def load_rules(text: str) -> list:
    """Load a rule pack from JSON: either a list or {"rules": [...]}."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RulePackError(f"rule pack is not valid JSON: {exc}") from None
    if isinstance(doc, dict):
        doc = doc.get("rules")
    if not isinstance(doc, list) or not doc:
        raise RulePackError("rule pack must contain a non-empty rules list")
    return [AuditRule.from_dict(entry) for entry in doc]


def dump_rules(rules) -> str:
    return json.dumps(
        {"rules": [r.to_dict() for r in rules]}, indent=2, sort_keys=True
    ) + "\n"


# ===========================================================================
# findings
# ===========================================================================


@dataclass
class EvidenceItem:
    """One element that satisfied (or was covered by) a clause."""

    element_id: str
    clause_index: int
    attributes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "element": self.element_id,
            "clause": self.clause_index,
            "attributes": {k: self.attributes[k] for k in sorted(self.attributes)},
        }


@dataclass
class Finding:
    risk_id: str
    risk_name: str
    entry: str
    back_paths: list
    fwd_paths: list
    evidence: list
    trace_id: str = ""
    agents_involved: list = field(default_factory=list)
    phase_label: str = ""

    def to_dict(self) -> dict:
        return {
            "risk_id": self.risk_id,
            "risk_name": self.risk_name,
            "entry": self.entry,
            "trace_id": self.trace_id,
            "agents_involved": list(self.agents_involved),
            "phase_label": self.phase_label,
            "back_paths": [p.to_dict() for p in self.back_paths],
            "fwd_paths": [p.to_dict() for p in self.fwd_paths],
            "evidence": [e.to_dict() for e in self.evidence],
        }

    def element_ids(self) -> set:
        """Every element id on the entry or either path set."""
        ids = {self.entry}
        for path in list(self.back_paths) + list(self.fwd_paths):
            ids.update(path.elements)
        return ids


@dataclass
class AuditReport:
    graph_digest: str
    findings: list
    stats: dict

    def risk_ids(self) -> list:
        return sorted({f.risk_id for f in self.findings})

    def to_dict(self) -> dict:
        return {
            "graph_digest": self.graph_digest,
            "findings": [f.to_dict() for f in self.findings],
            "stats": self.stats,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# ===========================================================================
# engine
# ===========================================================================


def locate_entries(graph: AgentBomGraph, rule: AuditRule) -> list:
    """All element ids matching the rule's entry selector, sorted."""
    out = []
    for element in rule.entry.candidates(graph):
        element_id = getattr(element, "node_id", None) or element.edge_id
        if rule.entry.matches(element, graph):
            out.append(element_id)
    return sorted(out)


def _scope_elements(graph, scope, entry, back_paths, fwd_paths) -> list:
    if scope == "entry":
        return [entry]
    if scope == "back_origin":
        ids = _ordered_unique(p.origin for p in back_paths)
    elif scope == "back_path":
        ids = _ordered_unique(e for p in back_paths for e in p.elements)
    elif scope == "fwd_terminus":
        ids = _ordered_unique(p.terminus for p in fwd_paths)
    else:  # fwd_path
        ids = _ordered_unique(e for p in fwd_paths for e in p.elements)
    # a traced path starts at the entry itself; the path scopes ask about
    # everything beyond it, so the entry never testifies for its own paths
    entry_id = _element_id(entry)
    return [graph.element(i) for i in ids if i != entry_id]


def _ordered_unique(items) -> list:
    seen, out = set(), []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def _element_id(element) -> str:
    return getattr(element, "node_id", None) or element.edge_id


def _evaluate_clause(graph, clause, index, entry, back_paths, fwd_paths):
    """Returns (satisfied, evidence items). exists over an empty scope is
    false; forall over an empty scope is vacuously true."""
    elements = _scope_elements(graph, clause.scope, entry, back_paths, fwd_paths)
    keys = clause.predicate.referenced_keys()
    if clause.quantifier == "exists":
        items = [
            EvidenceItem(_element_id(el), index, _snapshot(el, keys))
            for el in elements
            if clause.predicate.evaluate(el, graph=graph, entry=entry)
        ]
        return bool(items), items
    for el in elements:
        if not clause.predicate.evaluate(el, graph=graph, entry=entry):
            return False, []
    items = [EvidenceItem(_element_id(el), index, _snapshot(el, keys)) for el in elements]
    return True, items


def _snapshot(element, keys) -> dict:
    return {k: element.attributes[k] for k in sorted(keys) if k in element.attributes}


def _keep_paths(graph, paths, clauses, entry, origin_scope, path_scope):
    """Filter paths to those satisfying every exists-clause of their scope."""
    exists_clauses = [
        c for c in clauses
        if c.quantifier == "exists" and c.scope in (origin_scope, path_scope)
    ]
    if not exists_clauses:
        return list(paths)
    entry_id = _element_id(entry)
    kept = []
    for path in paths:
        ok = True
        for clause in exists_clauses:
            if clause.scope == origin_scope:
                anchor = path.origin if origin_scope == "back_origin" else path.terminus
                if not clause.predicate.evaluate(
                    graph.element(anchor), graph=graph, entry=entry
                ):
                    ok = False
                    break
            else:
                if not any(
                    clause.predicate.evaluate(graph.element(e), graph=graph, entry=entry)
                    for e in path.elements
                    if e != entry_id
                ):
                    ok = False
                    break
        if ok:
            kept.append(path)
    return kept


def _phase_label(entry) -> str:
    """Where in the lifecycle the entry sits: a node's layer, an edge's family."""
    if isinstance(entry, Edge):
        return schema.family_of(entry.kind).value
    return entry.layer.value


def _maximal_paths(paths) -> list:
    """Paths whose element set is not contained in another path's set."""
    sets = [set(p.elements) for p in paths]
    return [
        p for i, p in enumerate(paths)
        if not any(j != i and sets[i] < sets[j] for j in range(len(paths)))
    ]


def _minimal_paths(paths) -> list:
    """Paths that do not contain another path's element set."""
    sets = [set(p.elements) for p in paths]
    return [
        p for i, p in enumerate(paths)
        if not any(j != i and sets[j] < sets[i] for j in range(len(paths)))
    ]


def evaluate_rule(graph: AgentBomGraph, rule: AuditRule) -> list:
    """Run one rule over the whole graph; returns its findings.

    A finding reports the maximal satisfying backward paths (deepest reach
    toward the origin) and the minimal satisfying forward ones (nearest
    realized impact); the clauses are then adjudicated over exactly those
    reported paths, so the evidence and the reported chains agree.
    """
    findings = {}
    for entry_id in locate_entries(graph, rule):
        entry = graph.element(entry_id)
        back = _keep_paths(
            graph, trace(graph, entry_id, rule.back), rule.conditions, entry,
            "back_origin", "back_path",
        )
        fwd = _keep_paths(
            graph, trace(graph, entry_id, rule.fwd), rule.conditions, entry,
            "fwd_terminus", "fwd_path",
        )
        back = _maximal_paths(back)
        fwd = _minimal_paths(fwd)

        evidence = []
        satisfied = True
        for index, clause in enumerate(rule.conditions):
            ok, items = _evaluate_clause(graph, clause, index, entry, back, fwd)
            if not ok:
                satisfied = False
                break
            evidence.extend(items)
        if not satisfied:
            continue

        back_origin = back[0].origin if back else ""
        fwd_terminus = fwd[0].terminus if fwd else ""
        key = (rule.risk_id, entry_id, back_origin, fwd_terminus)
        if key in findings:
            continue
        findings[key] = Finding(
            risk_id=rule.risk_id,
            risk_name=rule.name,
            entry=entry_id,
            back_paths=back,
            fwd_paths=fwd,
            evidence=evidence,
            trace_id=_finding_trace_id(graph, entry, back, fwd),
            agents_involved=_agents_involved(graph, entry_id, back, fwd),
            phase_label=_phase_label(entry),
        )
    ordered = sorted(findings.values(), key=lambda f: (f.risk_id, f.entry))
    return ordered


def _finding_trace_id(graph, entry, back_paths, fwd_paths) -> str:
    own = getattr(entry, "trace_id", None) or entry.attributes.get("trace_id")
    if own:
        return own
    for path in list(fwd_paths) + list(back_paths):
        for node_id in path.node_ids:
            trace_id = graph.nodes[node_id].trace_id
            if trace_id:
                return trace_id
    return ""


def _agents_involved(graph, entry_id, back_paths, fwd_paths) -> list:
    ids = {entry_id}
    for path in list(back_paths) + list(fwd_paths):
        ids.update(path.node_ids)
    agents = set()
    for element_id in ids:
        if element_id in graph.nodes:
            agent_id = graph.nodes[element_id].agent_id
            if agent_id:
                agents.add(agent_id)
    return sorted(agents)


def audit(graph: AgentBomGraph, rules=None) -> AuditReport:
    """Evaluate every rule independently and merge findings."""
    if rules is None:
        rules = builtin_rules()
    all_findings = []
    stats = {}
    for rule in rules:
        entries = locate_entries(graph, rule)
        findings = evaluate_rule(graph, rule)
        explored = 0
        for entry_id in entries:
            explored += len(trace(graph, entry_id, rule.back))
            explored += len(trace(graph, entry_id, rule.fwd))
        stats[rule.risk_id] = {
            "entries": len(entries),
            "paths_explored": explored,
            "findings": len(findings),
        }
        all_findings.extend(findings)
    all_findings.sort(key=lambda f: (f.risk_id, f.entry))
    return AuditReport(graph_digest=graph.digest(), findings=all_findings, stats=stats)


# ===========================================================================
# the builtin pack
# ===========================================================================

_UNTRUSTED = AttrCmp("trust_level", "==", "untrusted")
_INTEGRITY_INVALID = AttrCmp("integrity_status", "==", "invalid")
_INTEGRITY_UNVERIFIED = AttrCmp("integrity_status", "==", "unverified")
_AUTH_BAD = Or([
    AttrCmp("authentication_status", "==", "unauthenticated"),
    AttrCmp("authentication_status", "==", "invalid"),
])
_SHARES_ENTRY_FLAG = AttrCmp("danger_flags", "intersects", EntryAttr("danger_flags"))
_BAD_PROPAGATION_EDGE = And([
    KindIs(_PROPAGATION_KIND_NAMES),
    Or([_INTEGRITY_INVALID, _AUTH_BAD]),
])


def _rule_goal_hijack() -> AuditRule:
    entry_pred = HasFlag()
    return AuditRule(
        risk_id="ASI01",
        name=RISK_NAMES["ASI01"],
        entry=EntrySelector("node", ("GoalNode",), entry_pred),
        back=PathSpec(
            direction=BACKWARD,
            allowed_edge_kinds=("evolution", "reads_from"),
            terminal=Or([_UNTRUSTED, _AUTH_BAD, HasFlag()]),
        ),
        fwd=PathSpec(
            direction=FORWARD,
            allowed_edge_kinds=("evolution",),
            terminal=And([
                KindIs(("DecisionNode", "ActionNode")), _SHARES_ENTRY_FLAG,
            ]),
        ),
        conditions=[
            Clause("entry", "exists", entry_pred),
            Clause("back_origin", "exists", Or([_UNTRUSTED, _AUTH_BAD, HasFlag()])),
            Clause(
                "fwd_terminus",
                "exists",
                And([KindIs(("DecisionNode", "ActionNode")), _SHARES_ENTRY_FLAG]),
            ),
        ],
    )


def _rule_tool_misuse() -> AuditRule:
    entry_pred = NeighborMatch(
        "in", ("invokes",), node=HasFlag(("destructive_command",))
    )
    impact = And([
        KindIs(("ObservationNode",)),
        AttrCmp("environment_state_change", "!=", ""),
    ])
    return AuditRule(
        risk_id="ASI02",
        name=RISK_NAMES["ASI02"],
        entry=EntrySelector("node", ("ToolNode",), entry_pred),
        back=PathSpec(
            direction=BACKWARD,
            allowed_edge_kinds=("invokes", "evolution", "reads_from", "writes_to"),
            terminal=HasFlag(),
        ),
        fwd=PathSpec(
            direction=FORWARD,
            allowed_edge_kinds=("invokes", "evolution"),
            terminal=impact,
        ),
        conditions=[
            Clause("entry", "exists", entry_pred),
            Clause("back_origin", "exists", HasFlag()),
            Clause("fwd_terminus", "exists", impact),
        ],
    )


def _rule_privilege_abuse() -> AuditRule:
    entry_pred = HasFlag(("privilege_claim", "confirmation_bypass"))
    origin = Or([
        And([
            KindIs(("ActionNode",)),
            AttrCmp("type", "==", "memory_write"),
            HasFlag(),
        ]),
        And([KindIs(("LongTermMemoryNode",)), HasFlag()]),
        And([KindIs(("ContextNode",)), HasFlag()]),
    ])
    impact = And([
        KindIs(("ActionNode",)),
        AttrCmp("confirmation_status", "==", "bypassed"),
    ])
    return AuditRule(
        risk_id="ASI03",
        name=RISK_NAMES["ASI03"],
        entry=EntrySelector("node", ("ReasoningNode",), entry_pred),
        back=PathSpec(
            direction=BACKWARD,
            allowed_edge_kinds=("evolution", "reads_from"),
            terminal=origin,
        ),
        fwd=PathSpec(
            direction=FORWARD,
            allowed_edge_kinds=("evolution",),
            terminal=impact,
        ),
        conditions=[
            Clause("entry", "exists", entry_pred),
            Clause("back_origin", "exists", origin),
            Clause("fwd_terminus", "exists", impact),
        ],
    )


def _rule_supply_chain() -> AuditRule:
    entry_pred = Or([
        HasFlag(), _UNTRUSTED, _INTEGRITY_INVALID, _INTEGRITY_UNVERIFIED,
    ])
    return AuditRule(
        risk_id="ASI04",
        name=RISK_NAMES["ASI04"],
        entry=EntrySelector(
            "node",
            ("ToolNode", "SkillNode", "PromptNode", "LLMNode", "CodeNode"),
            entry_pred,
        ),
        back=PathSpec(
            direction=BACKWARD,
            allowed_edge_kinds=("depends_on",),
        ),
        fwd=PathSpec(
            direction=FORWARD,
            allowed_edge_kinds=(
                "selects", "invokes", "loads_tool", "loads_skill",
                "flows_to", "influences", "emits",
            ),
            terminal=KindIs(("DecisionNode", "ActionNode", "ObservationNode")),
        ),
        conditions=[
            Clause("entry", "exists", entry_pred),
            Clause(
                "fwd_terminus",
                "exists",
                KindIs(("DecisionNode", "ActionNode", "ObservationNode")),
            ),
            Clause(
                "fwd_path",
                "exists",
                KindIs(("selects", "loads_tool", "loads_skill", "invokes")),
            ),
        ],
    )


def _rule_code_execution() -> AuditRule:
    entry_pred = NeighborMatch(
        "in", ("invokes",), node=HasFlag(("external_code_execution",))
    )
    impact = And([
        KindIs(("ObservationNode",)),
        AttrCmp("environment_state_change", "!=", ""),
    ])
    return AuditRule(
        risk_id="ASI05",
        name=RISK_NAMES["ASI05"],
        entry=EntrySelector("node", ("ToolNode",), entry_pred),
        back=PathSpec(
            direction=BACKWARD,
            allowed_edge_kinds=("invokes", "evolution", "reads_from", "selects"),
            terminal=HasFlag(),
        ),
        fwd=PathSpec(
            direction=FORWARD,
            allowed_edge_kinds=("invokes", "evolution"),
            terminal=impact,
        ),
        conditions=[
            Clause("entry", "exists", entry_pred),
            Clause("back_origin", "exists", HasFlag()),
            Clause("fwd_terminus", "exists", impact),
        ],
    )


def _rule_memory_poisoning() -> AuditRule:
    entry_pred = Or([
        And([
            KindIs(("ActionNode",)),
            AttrCmp("type", "==", "memory_write"),
            HasFlag(),
        ]),
        And([KindIs(("ContextNode",)), HasFlag(), _INTEGRITY_INVALID]),
    ])
    # the origin test is deliberately trust/integrity only: a flagged write
    # whose source chain is trusted and intact is handled by other rules
    origin = Or([_UNTRUSTED, _INTEGRITY_INVALID])
    impact = And([
        KindIs(("ContextNode", "ReasoningNode", "DecisionNode", "ActionNode")),
        _SHARES_ENTRY_FLAG,
    ])
    return AuditRule(
        risk_id="ASI06",
        name=RISK_NAMES["ASI06"],
        entry=EntrySelector("node", ("ActionNode", "ContextNode"), entry_pred),
        back=PathSpec(
            direction=BACKWARD,
            allowed_edge_kinds=("evolution",),
            terminal=origin,
        ),
        fwd=PathSpec(
            direction=FORWARD,
            allowed_edge_kinds=("writes_to", "reads_from", "evolution"),
            terminal=impact,
        ),
        conditions=[
            Clause("entry", "exists", entry_pred),
            Clause("back_origin", "exists", origin),
            Clause("fwd_terminus", "exists", impact),
        ],
    )


def _rule_insecure_communication() -> AuditRule:
    entry_pred = Or([
        _INTEGRITY_INVALID,
        _AUTH_BAD,
        AttrCmp("propagation_status", "==", "tampered"),
    ])
    impact = And([
        KindIs((
            "ContextNode", "GoalNode", "ReasoningNode", "DecisionNode", "ActionNode",
        )),
        _SHARES_ENTRY_FLAG,
    ])
    return AuditRule(
        risk_id="ASI07",
        name=RISK_NAMES["ASI07"],
        entry=EntrySelector("edge", ("propagation",), entry_pred),
        back=PathSpec(
            direction=BACKWARD,
            allowed_edge_kinds=("evolution", "reads_from"),
            cross_agent=True,
        ),
        fwd=PathSpec(
            direction=FORWARD,
            allowed_edge_kinds=("evolution", "reads_from", "propagation"),
            terminal=impact,
            cross_agent=True,
        ),
        conditions=[
            Clause("entry", "exists", entry_pred),
            # the tampered content cannot be mapped to anything the sender
            # actually produced upstream
            Clause(
                "back_path",
                "forall",
                Not(AttrCmp("content", "==", EntryAttr("content"))),
            ),
            Clause("fwd_terminus", "exists", impact),
        ],
    )


def _rule_cascading_failure() -> AuditRule:
    entry_pred = HasFlag()
    impact = And([
        KindIs((
            "GoalNode", "ContextNode", "DecisionNode", "ActionNode", "OutputNode",
        )),
        _SHARES_ENTRY_FLAG,
    ])
    return AuditRule(
        risk_id="ASI08",
        name=RISK_NAMES["ASI08"],
        entry=EntrySelector("edge", ("propagation",), entry_pred),
        back=PathSpec(
            direction=BACKWARD,
            allowed_edge_kinds=("evolution", "reads_from", "propagation"),
            cross_agent=True,
        ),
        fwd=PathSpec(
            direction=FORWARD,
            allowed_edge_kinds=("evolution", "reads_from", "propagation"),
            terminal=impact,
            cross_agent=True,
        ),
        conditions=[
            Clause("entry", "exists", entry_pred),
            # the fault must already have crossed an agent boundary upstream
            Clause("back_path", "exists", _BAD_PROPAGATION_EDGE),
            Clause("fwd_terminus", "exists", impact),
        ],
    )


def _rule_trust_exploitation() -> AuditRule:
    entry_pred = HasFlag(("confirmation_bypass", "privilege_claim"))
    impact = And([
        KindIs(("ActionNode",)),
        AttrCmp("confirmation_status", "==", "bypassed"),
    ])
    return AuditRule(
        risk_id="ASI09",
        name=RISK_NAMES["ASI09"],
        entry=EntrySelector("node", ("ExternalNode", "ObservationNode"), entry_pred),
        back=PathSpec(
            direction=BACKWARD,
            allowed_edge_kinds=("evolution", "reads_from", "propagation"),
            cross_agent=True,
        ),
        fwd=PathSpec(
            direction=FORWARD,
            allowed_edge_kinds=("evolution", "reads_from", "writes_to", "propagation"),
            terminal=impact,
            cross_agent=True,
        ),
        conditions=[
            Clause("entry", "exists", entry_pred),
            Clause("back_path", "exists", _SHARES_ENTRY_FLAG),
            Clause("fwd_terminus", "exists", impact),
        ],
    )


def _rule_rogue_agent() -> AuditRule:
    anomalous = Or([HasFlag(), _UNTRUSTED, _INTEGRITY_INVALID])
    entry_pred = Or([
        anomalous,
        NeighborMatch(
            "out",
            ("has_prompt", "uses_model", "depends_on", "loads_tool", "loads_skill"),
            node=anomalous,
        ),
    ])
    origin = And([LayerIs("static"), anomalous])
    return AuditRule(
        risk_id="ASI10",
        name=RISK_NAMES["ASI10"],
        entry=EntrySelector(
            "node", ("AgentNode", "PromptNode", "CodeNode", "LLMNode"), entry_pred
        ),
        back=PathSpec(
            direction=BACKWARD,
            allowed_edge_kinds=("structural",),
            terminal=origin,
        ),
        fwd=PathSpec(
            direction=FORWARD,
            allowed_edge_kinds=("structural", "propagation"),
            terminal=KindIs(("AgentNode",)),
            cross_agent=True,
        ),
        conditions=[
            Clause("entry", "exists", entry_pred),
            Clause("back_origin", "exists", origin),
            Clause("fwd_terminus", "exists", KindIs(("AgentNode",))),
            Clause("fwd_path", "exists", KindIs(_PROPAGATION_KIND_NAMES)),
        ],
    )


def builtin_rules() -> list:
    """The ten-risk pack, in risk id order."""
    return [
        _rule_goal_hijack(),
        _rule_tool_misuse(),
        _rule_privilege_abuse(),
        _rule_supply_chain(),
        _rule_code_execution(),
        _rule_memory_poisoning(),
        _rule_insecure_communication(),
        _rule_cascading_failure(),
        _rule_trust_exploitation(),
        _rule_rogue_agent(),
    ]
