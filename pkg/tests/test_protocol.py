import json
import re
from pathlib import Path

import pytest

from pathlab import protocol
from pathlab.errors import ProtocolError

DOC = Path(__file__).resolve().parents[1] / "docs" / "protocol.md"


def doc_section_names(section_header: str) -> set[str]:
    text = DOC.read_text()
    start = text.index(section_header)
    rest = text[start:]
    end = rest.find("\n## ", 1)
    body = rest if end == -1 else rest[:end]
    names = set()
    for line in body.splitlines():
        m = re.match(r"\|\s*`([a-z_]+)`", line)
        if m:
            names.add(m.group(1))
    return names


def test_documented_commands_match_engine():
    assert doc_section_names("## Commands") == set(protocol.COMMAND_TYPES)


def test_documented_events_match_engine():
    assert doc_section_names("## Events") == set(protocol.EVENT_TYPES)


def test_documented_error_codes_match_engine():
    assert doc_section_names("## Error codes") == set(protocol.ERROR_CODES)


def test_parse_message_envelope():
    msg_type, seq, payload = protocol.parse_message(
        '{"type": "run", "seq": 7, "payload": {"algorithms": []}}'
    )
    assert (msg_type, seq) == ("run", 7)
    assert payload == {"algorithms": []}


@pytest.mark.parametrize(
    "line",
    [
        "not json",
        "[1,2,3]",
        '{"seq": 1}',
        '{"type": 5}',
        '{"type": "x", "seq": "one"}',
        '{"type": "x", "seq": 1, "payload": []}',
    ],
)
def test_parse_message_rejects_bad_envelopes(line):
    with pytest.raises(ProtocolError):
        protocol.parse_message(line)


def test_encoding_is_canonical_and_round_trips():
    ev = protocol.event("ack", 3, {"b": 1, "a": [1, 2]})
    line = protocol.encode(ev)
    assert line == '{"payload":{"a":[1,2],"b":1},"seq":3,"type":"ack"}'
    assert json.loads(line) == ev
