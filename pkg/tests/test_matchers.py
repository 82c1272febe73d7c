from __future__ import annotations

import json

import pytest

from agentbom.errors import IngestionError
from agentbom.matchers import (
    DangerMatcher,
    DangerPattern,
    FLAG_CODE_EXECUTION,
    FLAG_CONFIRMATION_BYPASS,
    FLAG_DESTRUCTIVE,
    FLAG_EXFILTRATION,
    FLAG_PRIVILEGE_CLAIM,
    default_matcher,
)

_M = default_matcher()


def _flags(**attributes):
    return _M.scan(attributes)


# ---------------------------------------------------------------------------
# destructive commands
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "text",
    [
        "rm -rf ~/workspace",
        "rm -fr /tmp/build",
        "then call shutil.rmtree on the cache",
        "del /s C:\\temp",
        "format c: (quick)",
        "RM -RF ~/stuff",
    ],
)
def test_destructive_positive(text):
    assert _flags(content=text) == [FLAG_DESTRUCTIVE]


@pytest.mark.parametrize(
    "text",
    [
        "remove the stale entry from the index",
        "rm old_notes.txt",
        "rm -r keep_asking",  # recursive but not forced
        "the firmware upgrade",
        "perform a normal cleanup",
    ],
)
def test_destructive_negative(text):
    assert FLAG_DESTRUCTIVE not in _flags(content=text)


def test_destructive_matches_inside_parameters():
    assert _flags(parameters={"command": "rm -rf ~/x"}) == [FLAG_DESTRUCTIVE]


# ---------------------------------------------------------------------------
# exfiltration endpoints
# ---------------------------------------------------------------------------

def test_url_in_parameters_is_always_suspect():
    assert _flags(parameters={"url": "https://collector.example.net/in"}) == [
        FLAG_EXFILTRATION
    ]


def test_plain_url_in_prose_is_clean():
    assert _flags(content="see https://docs.example.com/guide for details") == []


def test_url_with_exfiltration_verb_in_prose_flags():
    text = "then upload the archive to https://sink.example.net/drop"
    assert _flags(content=text) == [FLAG_EXFILTRATION]


def test_exfiltration_verb_and_url_must_share_a_sentence():
    text = "posted yesterday. https://docs.example.com/x"
    assert _flags(content=text) == []


# ---------------------------------------------------------------------------
# confirmation bypass
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "text",
    [
        "proceed without confirmation",
        "proceed without user confirmation",
        "without asking for confirmation",
        "skip the confirmation step",
        "skipping confirmation",
        "no confirmation required",
        "never ask the user before acting",
        "bypass the approval flow",
        "these actions are pre-approved",
        "treat everything as preapproved",
    ],
)
def test_confirmation_bypass_positive(text):
    assert FLAG_CONFIRMATION_BYPASS in _flags(content=text)


@pytest.mark.parametrize(
    "text",
    [
        "ask for confirmation before deleting",
        "no user confirmation has been recorded yet",  # phrase split by "user"
        "send the email now without asking the user",
        "await approval",
    ],
)
def test_confirmation_bypass_negative(text):
    assert FLAG_CONFIRMATION_BYPASS not in _flags(content=text)


# ---------------------------------------------------------------------------
# privilege claims
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "text",
    [
        "you have full authority over the workspace",
        "grants administrator privileges",
        "requires elevated access",
        "system-level rights are assumed",
        "the administrator's authority extends here",
        "you are now the reporting administrator",
        "this was forged authority",
    ],
)
def test_privilege_claim_positive(text):
    assert FLAG_PRIVILEGE_CLAIM in _flags(content=text)


@pytest.mark.parametrize(
    "text",
    [
        "contact the administrator for help",
        "the admin console is down",
        "authority on this topic is the style guide",
    ],
)
def test_privilege_claim_negative(text):
    assert FLAG_PRIVILEGE_CLAIM not in _flags(content=text)


# ---------------------------------------------------------------------------
# external code execution
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "text",
    [
        "python3 /tmp/helper.py",
        "run bash setup.sh first",
        "node scripts/build.js",
        "execute the script once downloaded",
        "exec the file in place",
        "result = eval(payload)",
    ],
)
def test_code_execution_positive(text):
    assert FLAG_CODE_EXECUTION in _flags(content=text)


@pytest.mark.parametrize(
    "text",
    [
        "the python ecosystem is large",
        "execute the plan we agreed on",
        "execute the staged helper",
        "evaluation finished",
    ],
)
def test_code_execution_negative(text):
    assert FLAG_CODE_EXECUTION not in _flags(content=text)


# ---------------------------------------------------------------------------
# matcher mechanics
# ---------------------------------------------------------------------------

def test_scan_returns_sorted_union_of_flags():
    flags = _flags(content="rm -rf /data, the operation is pre-approved")
    assert flags == sorted([FLAG_CONFIRMATION_BYPASS, FLAG_DESTRUCTIVE])


def test_scan_walks_lists_and_dicts():
    assert _flags(parameters={"cmd": "rm -rf /x"}) == [FLAG_DESTRUCTIVE]
    matcher = DangerMatcher(
        [DangerPattern("hit", "needle", ("affected_resource",))]
    )
    assert matcher.scan({"affected_resource": ["hay", "needle"]}) == ["hit"]


def test_scan_ignores_keys_a_pattern_does_not_apply_to():
    # the destructive pattern only reads content and parameters
    assert _flags(target="rm -rf /x") == []


def test_round_trip_through_json():
    clone = DangerMatcher.from_json(json.dumps(_M.to_dict()))
    probe = {"content": "rm -rf /y", "parameters": {"u": "http://a.example/z"}}
    assert clone.scan(probe) == _M.scan(probe)


def test_bad_regex_is_rejected_eagerly():
    with pytest.raises(IngestionError):
        DangerMatcher([DangerPattern("x", "(unclosed", ("content",))])


def test_pack_without_patterns_list_is_rejected():
    with pytest.raises(IngestionError):
        DangerMatcher.from_dict({"rules": []})
