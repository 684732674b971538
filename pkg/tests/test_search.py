from aware_opt.ir import extract_features, parse_ir
from aware_opt.knowledge import KnowledgeBase
from aware_opt.passes import load_catalog
from aware_opt.search import SEARCH_POOL, search_program, seed_knowledge_base
from helpers import SIMPLE_IR, FakeEnv


def test_pool_flags_are_in_catalog():
    cat = load_catalog()
    for flag in SEARCH_POOL:
        cat.lookup(flag)


def test_search_keeps_only_non_regressing_candidates(tmp_path):
    env = FakeEnv(tmp_path, ic_oz=70, default_after=90)
    env.add_program("p")
    # Every proposal counts 90 against -Oz's 70, so nothing survives.
    assert search_program(env, "p", budget=30, seed=1, keep=5) == []
    env.default_after = 70
    cands = search_program(env, "p", budget=30, seed=1, keep=5)
    assert len(cands) == 5 and all(c.improvement_over_oz == 0 for c in cands)


def test_search_is_deterministic(tmp_path):
    env = FakeEnv(tmp_path, ic_oz=95, default_after=90)
    env.add_program("p")
    a = search_program(env, "p", budget=20, seed=3)
    b = search_program(env, "p", budget=20, seed=3)
    assert a == b and len(a) == 3


def test_seed_knowledge_base_inserts_per_program(tmp_path):
    env = FakeEnv(tmp_path, ic_oz=95, default_after=90)
    for pid in ("p", "q"):
        env.add_program(pid)
    fv = extract_features(parse_ir(SIMPLE_IR))
    kb = seed_knowledge_base(env, {"p": fv, "q": fv}, KnowledgeBase(load_catalog()), budget=10, keep=2, workers=2)
    assert {e.provenance for e in kb.empirical} == {"p", "q"}
    assert all(e.effect >= 0 for e in kb.empirical)
