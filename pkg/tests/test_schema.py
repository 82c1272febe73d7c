from __future__ import annotations

import pytest

from agentbom import schema
from agentbom.errors import UnknownKindError
from agentbom.schema import EdgeFamily, EdgeKind, Flow, Layer, NodeKind


def test_every_node_kind_has_a_layer():
    for kind in NodeKind:
        assert schema.layer_of(kind) in Layer


def test_layer_partition_sizes():
    assert len(schema.STATIC_KINDS) == 7
    assert len(schema.RUNTIME_KINDS) == 8
    assert len(schema.AUXILIARY_KINDS) == 2
    assert schema.STATIC_KINDS | schema.RUNTIME_KINDS | schema.AUXILIARY_KINDS == set(
        NodeKind
    )


def test_every_edge_kind_has_a_family():
    per_family = {family: 0 for family in EdgeFamily}
    for kind in EdgeKind:
        per_family[schema.family_of(kind)] += 1
    assert per_family == {
        EdgeFamily.STRUCTURAL: 5,
        EdgeFamily.EVOLUTION: 5,
        EdgeFamily.BINDING: 5,
        EdgeFamily.PROPAGATION: 5,
    }


def test_parse_node_kind_round_trip_and_rejection():
    assert schema.parse_node_kind("ToolNode") is NodeKind.TOOL
    with pytest.raises(UnknownKindError):
        schema.parse_node_kind("GadgetNode")


def test_parse_edge_kind_round_trip_and_rejection():
    assert schema.parse_edge_kind("reads_from") is EdgeKind.READS_FROM
    with pytest.raises(UnknownKindError):
        schema.parse_edge_kind("teleports_to")


def test_expand_edge_kinds_accepts_names_enums_and_aliases():
    expanded = schema.expand_edge_kinds(["flows_to", EdgeKind.INVOKES])
    assert expanded == frozenset({EdgeKind.FLOWS_TO, EdgeKind.INVOKES})

    assert schema.expand_edge_kinds([schema.AGENT_PROPAGATION_ALIAS]) == (
        schema.PROPAGATION_KINDS
    )
    assert schema.expand_edge_kinds(["propagation"]) == schema.PROPAGATION_KINDS
    assert schema.expand_edge_kinds(["structural"]) == frozenset(
        {
            EdgeKind.HAS_PROMPT,
            EdgeKind.USES_MODEL,
            EdgeKind.LOADS_TOOL,
            EdgeKind.LOADS_SKILL,
            EdgeKind.DEPENDS_ON,
        }
    )
    with pytest.raises(UnknownKindError):
        schema.expand_edge_kinds(["no_such_family"])


def test_endpoint_table_covers_every_edge_kind():
    assert set(schema.ENDPOINT_TABLE) == set(EdgeKind)
    for sources, targets in schema.ENDPOINT_TABLE.values():
        assert sources and targets


def test_flow_orientation_table():
    # The access-style arrows carry content against their direction; invokes
    # couples both ways; everything else flows with the arrow.
    inverted = {
        kind for kind, flow in schema.FLOW_OF_KIND.items() if flow is Flow.INV
    }
    assert inverted == {
        EdgeKind.HAS_PROMPT,
        EdgeKind.USES_MODEL,
        EdgeKind.LOADS_TOOL,
        EdgeKind.LOADS_SKILL,
        EdgeKind.DEPENDS_ON,
        EdgeKind.READS_FROM,
        EdgeKind.SELECTS,
        EdgeKind.RESPONDS_TO,
        EdgeKind.SHARES_MEMORY_WITH,
    }
    both = {kind for kind, flow in schema.FLOW_OF_KIND.items() if flow is Flow.BOTH}
    assert both == {EdgeKind.INVOKES}
    assert set(schema.FLOW_OF_KIND) == set(EdgeKind)


def test_cognitive_stage_order():
    ordered = sorted(schema.COGNITIVE_STAGES, key=schema.COGNITIVE_STAGES.get)
    assert ordered == [
        NodeKind.EXTERNAL,
        NodeKind.GOAL,
        NodeKind.CONTEXT,
        NodeKind.REASONING,
        NodeKind.DECISION,
        NodeKind.ACTION,
        NodeKind.OBSERVATION,
        NodeKind.OUTPUT,
    ]
    assert set(schema.COGNITIVE_STAGES.values()) == set(range(8))


def test_common_attribute_keys_are_allowed_everywhere():
    for kind in NodeKind:
        allowed = schema.allowed_node_keys(kind)
        assert {"content", "trust_level", "danger_flags", "type"} <= allowed


def test_propagation_edges_get_the_channel_keys():
    assert "authentication_status" in schema.allowed_edge_keys(EdgeKind.SENDS_TO)
    assert "authentication_status" not in schema.allowed_edge_keys(EdgeKind.FLOWS_TO)
    assert "trace_id" in schema.allowed_edge_keys(EdgeKind.FLOWS_TO)


def test_attribute_spec_lookup():
    assert schema.attribute_spec("trust_level").tokens == schema.TRUST_LEVELS
    assert schema.attribute_spec("danger_flags").value_kind is (
        schema.ValueKind.STRING_LIST
    )
    assert schema.attribute_spec("made_up_key") is None
