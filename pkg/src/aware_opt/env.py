"""Compiler environment: apply pass sequences with ``opt`` and measure instruction counts."""
from __future__ import annotations

import hashlib
import logging
import os
import shutil
import subprocess
import sys
import tempfile
import threading
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .ir import parse_ir
from .passes import PassCatalog, UnknownPass

logger = logging.getLogger(__name__)

BASELINE_LEVELS = ("O1", "O2", "O3", "Oz")
DRIVER_NAME = "aware-opt-llvm"


class CompilerEnvError(Exception):
    pass


class CompileError(CompilerEnvError):
    def __init__(self, message: str, stderr: str = ""):
        super().__init__(message)
        self.stderr = stderr


class CompilerTimeout(CompilerEnvError):
    pass


class UnknownProgram(CompilerEnvError, KeyError):
    def __str__(self) -> str:
        return f"unknown program: {self.args[0]!r}"


def discover_opt() -> Path | None:
    """Locate an ``opt`` binary: $AWARE_OPT_BIN, then ``opt`` on PATH, then the bundled driver."""
    env = os.environ.get("AWARE_OPT_BIN")
    if env:
        return Path(env)
    for name in ["opt"] + [f"opt-{v}" for v in range(20, 9, -1)] + [DRIVER_NAME]:
        found = shutil.which(name)
        if found:
            return Path(found)
    local = Path(sys.executable).parent / DRIVER_NAME
    if local.exists():
        return local
    return None


@dataclass
class CompilerConfig:
    opt_binary: Path
    workdir: Path
    timeout: float = 60.0
    llvm_version_expected: str = "10"

    def __post_init__(self) -> None:
        self.opt_binary = Path(self.opt_binary)
        self.workdir = Path(self.workdir)
        if not self.opt_binary.is_file() or not os.access(self.opt_binary, os.X_OK):
            raise FileNotFoundError(f"opt binary not found or not executable: {self.opt_binary}")
        self.workdir.mkdir(parents=True, exist_ok=True)

    @classmethod
    def default(cls, workdir: str | Path | None = None, timeout: float = 60.0) -> "CompilerConfig":
        opt = discover_opt()
        if opt is None:
            raise FileNotFoundError("no opt binary found; set AWARE_OPT_BIN")
        if workdir is None:
            workdir = Path(tempfile.gettempdir()) / "aware-opt-work"
        return cls(opt, Path(workdir), timeout)


@dataclass
class InstrCountResult:
    status: str  # success | compile_error | timeout
    ic_unopt: int = 0
    ic_after: int = 0
    ic_oz: int = 0
    delta_ic: float = 0.0
    improvement_over_oz: float = 0.0
    degenerate: bool = False
    stderr_excerpt: str = ""

    @classmethod
    def from_counts(cls, ic_unopt: int, ic_after: int, ic_oz: int) -> "InstrCountResult":
        delta, d1 = ratio(ic_unopt, ic_after)
        over, d2 = ratio(ic_oz, ic_after)
        return cls("success", ic_unopt, ic_after, ic_oz, delta, over, d1 or d2)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_tool_response(self) -> dict:
        if self.status == "success":
            return {"status": "success", "improvement_over_oz": round(self.improvement_over_oz, 4)}
        return {"status": self.status, "reason": self.stderr_excerpt}


def ratio(before: int, after: int) -> tuple[float, bool]:
    """(before - after) / before, or (0.0, True) when ``before`` is 0."""
    if before <= 0:
        return 0.0, True
    return (before - after) / before, False


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _excerpt(text: str, limit: int = 400) -> str:
    text = text.strip()
    return text if len(text) <= limit else text[:limit] + "..."


class CompilerEnv:
    """``C(x, pi)`` over IR files.

    Every subprocess runs in its own temporary directory under
    ``cfg.workdir``. Instruction counts are cached by (file digest, flags);
    concurrent writers store identical values, so the last write wins.
    """

    def __init__(
        self,
        cfg: CompilerConfig,
        programs: Mapping[str, str | Path] | None = None,
        catalog: PassCatalog | None = None,
    ):
        self.cfg = cfg
        self.programs = {k: Path(v) for k, v in (programs or {}).items()}
        self.catalog = catalog
        self._cache: dict[tuple[str, tuple[str, ...]], int] = {}
        self._lock = threading.Lock()
        self._builtin_count = self._probe_driver()

    def _probe_driver(self) -> bool:
        try:
            out = subprocess.run(
                [str(self.cfg.opt_binary), "--version"], capture_output=True, text=True,
                timeout=self.cfg.timeout,
            )
        except (OSError, subprocess.TimeoutExpired):
            return False
        return DRIVER_NAME in out.stdout

    @property
    def backend(self) -> str:
        return DRIVER_NAME if self._builtin_count else "opt"

    def _run(self, args: list[str], cwd: Path) -> subprocess.CompletedProcess:
        cmd = [str(self.cfg.opt_binary)] + args
        try:
            proc = subprocess.run(cmd, cwd=cwd, capture_output=True, text=True, timeout=self.cfg.timeout)
        except subprocess.TimeoutExpired:
            raise CompilerTimeout(f"opt timed out after {self.cfg.timeout}s: {' '.join(args)}") from None
        if proc.returncode != 0:
            raise CompileError(f"opt exited with {proc.returncode}", _excerpt(proc.stderr))
        return proc

    def _scratch(self) -> Path:
        return Path(tempfile.mkdtemp(prefix="job-", dir=self.cfg.workdir))

    def resolve(self, program_id: str) -> Path:
        try:
            return self.programs[program_id]
        except KeyError:
            raise UnknownProgram(program_id) from None

    # -- operations --------------------------------------------------------

    def count_instructions(self, ir_path: str | Path) -> int:
        ir_path = Path(ir_path).resolve()
        if not ir_path.is_file():
            raise CompileError(f"no such file: {ir_path}")
        if self._builtin_count:
            scratch = self._scratch()
            try:
                proc = self._run(["--instcount", "-disable-output", str(ir_path)], scratch)
            finally:
                shutil.rmtree(scratch, ignore_errors=True)
            return int(proc.stdout.strip().splitlines()[-1])
        # A stock opt has no portable counting output; normalize with opt -S
        # and count with the IR reader.
        scratch = self._scratch()
        try:
            out = scratch / "norm.ll"
            self._run(["-S", str(ir_path), "-o", str(out)], scratch)
            return parse_ir(out.read_text()).instruction_count()
        finally:
            shutil.rmtree(scratch, ignore_errors=True)

    def apply_passes(self, ir_path: str | Path, flags: Sequence[str], out_dir: Path | None = None) -> Path:
        """Run ``opt <flags> ir_path -S -o out.ll`` and return the output path."""
        ir_path = Path(ir_path).resolve()
        if not ir_path.is_file():
            raise CompileError(f"no such file: {ir_path}")
        if self.catalog is not None:
            for f in flags:
                try:
                    self.catalog.lookup(f)
                except UnknownPass:
                    logger.warning("flag %s is not in the pass catalog", f)
        scratch = out_dir or self._scratch()
        out = scratch / "out.ll"
        self._run(list(flags) + [str(ir_path), "-S", "-o", str(out)], scratch)
        return out

    def count_after(self, ir_path: str | Path, flags: Sequence[str]) -> int:
        ir_path = Path(ir_path)
        if not ir_path.is_file():
            raise CompileError(f"no such file: {ir_path}")
        key = (file_digest(ir_path), tuple(flags))
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        if not flags:
            count = self.count_instructions(ir_path)
        else:
            scratch = self._scratch()
            try:
                out = self.apply_passes(ir_path, flags, scratch)
                count = self.count_instructions(out)
            finally:
                shutil.rmtree(scratch, ignore_errors=True)
        with self._lock:
            self._cache[key] = count
        return count

    def run_baseline(self, ir_path: str | Path, level: str) -> int:
        level = level.lstrip("-")
        if level not in BASELINE_LEVELS:
            raise ValueError(f"baseline level must be one of {BASELINE_LEVELS}, got {level!r}")
        return self.count_after(ir_path, ["-" + level])

    def cached(self, ir_path: str | Path, flags: Sequence[str]) -> bool:
        key = (file_digest(Path(ir_path)), tuple(flags))
        with self._lock:
            return key in self._cache

    def instcount(self, program_id: str, flags: Sequence[str]) -> InstrCountResult:
        """The agent-facing tool: counts for the input, for ``flags`` and for -Oz."""
        path = self.resolve(program_id)
        try:
            ic_unopt = self.count_after(path, [])
            ic_oz = self.run_baseline(path, "Oz")
            ic_after = self.count_after(path, list(flags))
        except CompilerTimeout as exc:
            return InstrCountResult("timeout", stderr_excerpt=str(exc))
        except CompileError as exc:
            return InstrCountResult("compile_error", stderr_excerpt=exc.stderr or str(exc))
        return InstrCountResult.from_counts(ic_unopt, ic_after, ic_oz)
