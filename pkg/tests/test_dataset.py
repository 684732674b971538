import io
import json

import pytest

from aware_opt.agent import ScriptedPolicy, reference_policy, fixed_answer_policy, run_episode
from aware_opt.dataset import (
    DatasetRecord,
    IncompleteTrajectory,
    RejectedSample,
    build_dataset,
    filter_dataset,
    format_percent,
    trajectory_to_record,
    trajectory_to_sft,
)
from aware_opt.ir import FEATURE_NAMES, extract_features, parse_ir
from aware_opt.knowledge import EmpiricalEntry, KnowledgeBase
from aware_opt.passes import load_catalog, parse_flags
from aware_opt.reward import score_format
from helpers import REFERENCE_SEQUENCE, SIMPLE_IR, FakeEnv, make_trajectory

CATALOG = load_catalog()


@pytest.fixture
def setup(tmp_path):
    env = FakeEnv(tmp_path, ic_unopt=20000, ic_oz=10000)
    env.add_program("prog")
    env.table[tuple(REFERENCE_SEQUENCE)] = 8228  # 17.72% below -Oz
    kb = KnowledgeBase(CATALOG)
    fv = extract_features(parse_ir(SIMPLE_IR))
    kb.insert_empirical(EmpiricalEntry(fv, parse_flags(REFERENCE_SEQUENCE, CATALOG), 0.2, "seed"))
    return env, kb


def clean(setup):
    env, kb = setup
    return run_episode("prog", reference_policy(), kb, env)


def record(effect, pid="p"):
    return DatasetRecord({}, "", [], "success", effect, pid)


def test_format_percent():
    assert format_percent(0.1772) == "17.72%"
    assert format_percent(-0.05) == "-5.00%"
    assert format_percent(0) == "0.00%"


def test_record_matches_box_layout(setup):
    rec = trajectory_to_record(clean(setup)).to_dict()
    assert list(rec)[:4] == ["Program Representation", "Reasoning Process", "Pass Sequence", "Optimization Effect"]
    assert rec["Optimization Effect"]["Improvement (over_oz)"] == "17.72%"
    assert rec["Optimization Effect"]["Status"] == "success"
    assert rec["Pass Sequence"] == REFERENCE_SEQUENCE
    assert list(rec["Program Representation"]) == list(FEATURE_NAMES)
    assert "memory instructions" in rec["Reasoning Process"]
    assert "verify the recommended sequence" in rec["Reasoning Process"]
    assert rec["provenance"] == "retrieval"


def test_record_roundtrip(setup):
    rec = trajectory_to_record(clean(setup))
    assert DatasetRecord.from_dict(json.loads(json.dumps(rec.to_dict()))) == rec


def test_protocol_error_is_incomplete(setup):
    env, kb = setup
    bad = run_episode("prog", ScriptedPolicy(["no tags here"]), kb, env)
    with pytest.raises(IncompleteTrajectory):
        trajectory_to_record(bad)


def test_sft_sample_shape(setup):
    sample = trajectory_to_sft(clean(setup))
    roles = [m["role"] for m in sample.messages]
    assert roles == ["system", "assistant", "tool", "assistant", "tool", "assistant"]
    assert "<answer>" in sample.messages[-1]["content"]
    assert sample.messages[2]["content"].startswith("<tool_response>")
    assert sample.weightable_turns == [1, 3, 5]


def test_sft_rejects_unclean(setup):
    env, kb = setup
    bad_answer = run_episode("prog", fixed_answer_policy(["--no-such-pass"]), kb, FakeEnv(
        env.root, known_flags={"-Oz"}, programs=env.programs))
    with pytest.raises(RejectedSample) as info:
        trajectory_to_sft(bad_answer)
    assert "answer" in info.value.reason
    junk = run_episode("prog", ScriptedPolicy(["nope"]), kb, env)
    with pytest.raises(RejectedSample):
        trajectory_to_sft(junk)


def test_sft_is_deterministic(setup):
    env, _ = setup

    def fresh():
        kb = KnowledgeBase(CATALOG)
        fv = extract_features(parse_ir(SIMPLE_IR))
        kb.insert_empirical(EmpiricalEntry(fv, parse_flags(REFERENCE_SEQUENCE, CATALOG), 0.2, "seed"))
        return json.dumps(trajectory_to_sft(run_episode("prog", reference_policy(), kb, env)).to_dict())

    assert fresh() == fresh()


def test_sft_replays_through_format_gate(setup):
    sample = trajectory_to_sft(clean(setup))
    assistant = [m["content"] for m in sample.messages if m["role"] == "assistant"]
    assert score_format(make_trajectory(assistant)) == 1


def test_filter_examples():
    recs = [record(-0.1), record(0.0), record(0.2)]
    assert filter_dataset(recs, -1) == recs
    assert [r.improvement_over_oz for r in filter_dataset(recs, 0)] == [0.0, 0.2]
    assert filter_dataset([], 0.5) == []
    with pytest.raises(ValueError):
        filter_dataset(recs, 2)


def test_build_counts_and_rejections(setup):
    env, kb = setup
    env.table[("--gvn",)] = 12000
    trajs = [clean(setup), run_episode("prog", ScriptedPolicy(["nope"]), kb, env),
             run_episode("prog", fixed_answer_policy(["--gvn"]), kb, env)]
    recs, sft = io.StringIO(), io.StringIO()
    summary = build_dataset(trajs, recs, sft, min_effect=0.0)
    assert summary.records == 1 and summary.sft == 1
    assert summary.rejected == {"incomplete: protocol_error": 1, "below min_effect": 1}
    assert len(recs.getvalue().splitlines()) == summary.records
    assert len(sft.getvalue().splitlines()) == summary.sft
