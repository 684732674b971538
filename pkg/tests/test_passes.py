import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aware_opt.passes import (
    PASS_NAMES,
    OZ_INDEX,
    CatalogError,
    PassCatalog,
    PassDescriptor,
    RepairImpossible,
    UnknownPass,
    curated_catalog,
    load_catalog,
    parse_flags,
    render_flags,
    repair_sequence,
    validate_sequence,
)
from helpers import brute_force_violations, report_violations, synthetic_catalog


def tiny(deps=None, conflicts=None, n=3):
    deps = deps or {}
    conflicts = conflicts or {}
    return PassCatalog(
        PassDescriptor(i, f"--p{i}", "", frozenset(deps.get(i, ())), frozenset(conflicts.get(i, ())))
        for i in range(n)
    )


# -- catalog ---------------------------------------------------------------


def test_shipped_catalog_shape():
    cat = load_catalog()
    assert len(cat) == 125
    assert cat[39].flag == "--gvn"
    assert cat[OZ_INDEX].flag == "-Oz"
    assert [cat[i].name for i in range(125)] == [p.lstrip("-") for p in PASS_NAMES]
    assert not cat.has_constraints()


def test_curated_catalog_is_constrained_and_consistent():
    cat = curated_catalog()
    assert cat.has_constraints()
    assert len(cat) == 125
    licm = cat.lookup("--licm")
    assert cat.lookup("--loop-simplify").index in licm.deps
    assert all(cat[OZ_INDEX].index in cat[i].conflicts for i in range(124))


def test_dependency_cycle_rejected():
    with pytest.raises(CatalogError):
        tiny(deps={0: {1}, 1: {0}})


def test_asymmetric_conflict_rejected():
    with pytest.raises(CatalogError):
        tiny(conflicts={0: {1}})


def test_self_reference_and_duplicates_rejected():
    with pytest.raises(CatalogError):
        tiny(deps={0: {0}})
    with pytest.raises(CatalogError):
        PassCatalog([PassDescriptor(0, "--a", "", frozenset(), frozenset()),
                     PassDescriptor(0, "--b", "", frozenset(), frozenset())])


def test_load_catalog_rejects_partial_file(tmp_path):
    recs = load_catalog().to_records()[:10]
    path = tmp_path / "cat.json"
    path.write_text(json.dumps(recs))
    with pytest.raises(CatalogError):
        load_catalog(path)
    assert len(load_catalog(path, strict=False)) == 10


# -- validation ------------------------------------------------------------


def test_empty_sequence_is_valid():
    assert validate_sequence([], tiny(deps={1: {0}})).valid


def test_dependency_order():
    cat = tiny(deps={1: {0}})
    assert validate_sequence([0, 1], cat).valid
    rep = validate_sequence([1, 0], cat)
    assert [v.kind for v in rep.violations] == ["DependencyViolation"]
    assert rep.violations[0].positions == (1, 0)
    missing = validate_sequence([1], cat)
    assert missing.violations[0].positions == (None, 0)


def test_conflict_regardless_of_order():
    cat = tiny(conflicts={0: {2}, 2: {0}})
    for seq in ([0, 2], [2, 0], [2, 1, 0]):
        kinds = [v.kind for v in validate_sequence(seq, cat).violations]
        assert kinds == ["ConflictViolation"]


def test_unknown_pass_reported():
    rep = validate_sequence([0, 7], tiny())
    assert [(v.kind, v.positions) for v in rep.violations] == [("UnknownPass", (1,))]


def test_duplicates_checked_against_first_occurrence():
    cat = tiny(deps={1: {0}})
    assert validate_sequence([0, 1, 1, 0], cat).valid
    assert not validate_sequence([1, 0, 1], cat).valid


def test_validator_matches_brute_force_on_random_catalogs():
    rng = random.Random(1234)
    for trial in range(1000):
        cat = synthetic_catalog(rng)
        seq = [rng.randrange(8) for _ in range(rng.randint(0, 12))]
        rep = validate_sequence(seq, cat)
        assert report_violations(rep) == brute_force_violations(seq, cat), (trial, seq)
        assert rep.valid == (not brute_force_violations(seq, cat))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.lists(st.integers(0, 9), max_size=12))
def test_validator_matches_brute_force_property(seed, seq):
    cat = synthetic_catalog(random.Random(seed))
    assert report_violations(validate_sequence(seq, cat)) == brute_force_violations(seq, cat)


# -- repair ----------------------------------------------------------------


def test_repair_valid_sequence_is_fixpoint():
    cat = tiny(deps={1: {0}})
    res = repair_sequence([0, 1], cat)
    assert list(res.sequence) == [0, 1] and res.is_subsequence


def test_repair_inserts_missing_dependency():
    cat = tiny(deps={1: {0}})
    assert list(repair_sequence([1], cat).sequence) == [0, 1]


def test_repair_drops_later_conflict_member():
    cat = tiny(conflicts={1: {2}, 2: {1}})
    assert list(repair_sequence([1, 2], cat).sequence) == [1]


def test_repair_impossible_when_dependencies_conflict():
    cat = tiny(deps={2: {0, 1}}, conflicts={0: {1}, 1: {0}})
    with pytest.raises(RepairImpossible):
        repair_sequence([2], cat)


def test_repair_on_curated_loop_pass():
    cat = curated_catalog()
    res = repair_sequence(parse_flags(["--licm"], cat), cat)
    assert render_flags(res.sequence, cat) == ["--loop-simplify", "--lcssa", "--licm"]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.lists(st.integers(0, 7), max_size=12))
def test_repair_output_validates_or_raises(seed, seq):
    cat = synthetic_catalog(random.Random(seed))
    try:
        res = repair_sequence(seq, cat)
    except RepairImpossible:
        return
    assert validate_sequence(res.sequence, cat).valid


# -- flags -----------------------------------------------------------------


def test_render_flags():
    cat = load_catalog()
    assert render_flags([39], cat) == ["--gvn"]
    assert render_flags([], cat) == []
    assert render_flags([OZ_INDEX], cat) == ["-Oz"]
    with pytest.raises(UnknownPass):
        render_flags([500], cat)


def test_parse_flags_accepts_csv_and_single_dash():
    cat = load_catalog()
    assert parse_flags("--gvn,-dse", cat) == parse_flags(["--gvn", "--dse"], cat)
    with pytest.raises(UnknownPass):
        parse_flags(["--no-such-pass"], cat)


@given(st.lists(st.integers(0, 124), max_size=20))
def test_flag_roundtrip(seq):
    cat = load_catalog()
    assert list(parse_flags(render_flags(seq, cat), cat)) == seq
