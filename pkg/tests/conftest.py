import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from aware_opt.env import CompilerConfig, CompilerEnv, discover_opt  # noqa: E402
from aware_opt.harness import mini_corpus_manifest  # noqa: E402

OPT = discover_opt()


def llvm_available() -> bool:
    if OPT is None:
        return False
    try:
        from aware_opt.llvm_driver import library

        if "aware-opt-llvm" in OPT.name:
            library()
        return True
    except Exception:
        return False


requires_llvm = pytest.mark.skipif(not llvm_available(), reason="no opt binary or libLLVM available")


@pytest.fixture(scope="session")
def corpus():
    return mini_corpus_manifest()


@pytest.fixture(scope="session")
def llvm_env(tmp_path_factory, corpus):
    if not llvm_available():
        pytest.skip("no opt binary or libLLVM available")
    cfg = CompilerConfig(OPT, tmp_path_factory.mktemp("work"), timeout=60)
    return CompilerEnv(cfg, corpus.registry())



def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
