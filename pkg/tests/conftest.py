import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
SYNTH40_MANIFEST = FIXTURES / "synth40" / "corpus.manifest.jsonl"
OK_MANIFEST = FIXTURES / "ok" / "ok.manifest.jsonl"


def utt_line(
    uid,
    speaker="s1",
    role="original",
    pair_id="p1",
    prompt="the cat sat",
    **extra,
):
    obj = {
        "kind": "utt",
        "id": uid,
        "speaker": speaker,
        "role": role,
        "pair_id": pair_id,
        "prompt": prompt,
    }
    obj.update(extra)
    return json.dumps(obj)


def spk_line(sid, scores=None, **extra):
    obj = {"kind": "spk", "id": sid, "scores": scores or {}}
    obj.update(extra)
    return json.dumps(obj)


@pytest.fixture
def synth40_path():
    assert SYNTH40_MANIFEST.is_file(), "run scripts/make_fixtures.py first"
    return SYNTH40_MANIFEST


@pytest.fixture
def ok_path():
    assert OK_MANIFEST.is_file(), "run scripts/make_fixtures.py first"
    return OK_MANIFEST
