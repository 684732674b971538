"""Minimal ``opt`` work-alike over the LLVM C API (ctypes + libLLVM).

Used as the compiler backend when no ``opt`` binary is installed. It accepts
the legacy ``--<pass>`` flag dialect, ``-O1/-O2/-O3/-Os/-Oz``, ``-S``, ``-o``
and ``-disable-output``, and adds ``--instcount`` which prints the module's
static instruction count as counted by LLVM itself.

Passes run through the new pass manager (``LLVMRunPasses``), one flag per
pipeline, in command-line order.
"""
from __future__ import annotations

import ctypes
import ctypes.util
import os
import sys

LIBRARY_CANDIDATES = ("libLLVM-14.so.1", "libLLVM-14.so", "libLLVM-15.so.1", "libLLVM.so")

# Legacy flag -> new pass manager pipeline element. Renamed passes map to
# their direct successor; passes removed from LLVM after 10 map to the pass
# that absorbed their job upstream. None means the pass has no effect on
# targets this driver supports and is skipped.
LEGACY_TO_NEW_PM: dict[str, str | None] = {
    "early-cse-memssa": "early-cse<memssa>",
    "functionattrs": "function-attrs",
    "rpo-functionattrs": "rpo-function-attrs",
    "post-inline-ee-instrument": "ee-instrument<post-inline>",
    "sancov": "sancov-module",
    "die": "dce",
    "constprop": "instsimplify",
    "ipconstprop": "ipsccp",
    "loop-unswitch": "simple-loop-unswitch",
    "loop-guard-widening": "guard-widening",
    "prune-eh": "function-attrs",
    "barrier": None,
}

OPT_LEVELS = {"-O0": "default<O0>", "-O1": "default<O1>", "-O2": "default<O2>",
              "-O3": "default<O3>", "-Os": "default<Os>", "-Oz": "default<Oz>"}


class LlvmError(RuntimeError):
    pass


class _Lib:
    def __init__(self, path: str | None = None):
        self.path, self.c = _open_library(path)
        c = self.c
        vp, cp = ctypes.c_void_p, ctypes.c_char_p
        sigs = {
            "LLVMContextCreate": ([], vp),
            "LLVMContextDispose": ([vp], None),
            "LLVMCreateMemoryBufferWithContentsOfFile": ([cp, ctypes.POINTER(vp), ctypes.POINTER(cp)], ctypes.c_int),
            "LLVMParseIRInContext": ([vp, vp, ctypes.POINTER(vp), ctypes.POINTER(cp)], ctypes.c_int),
            "LLVMDisposeModule": ([vp], None),
            "LLVMDisposeMessage": ([vp], None),
            "LLVMCreatePassBuilderOptions": ([], vp),
            "LLVMDisposePassBuilderOptions": ([vp], None),
            "LLVMRunPasses": ([vp, cp, vp, vp], vp),
            "LLVMGetErrorMessage": ([vp], vp),
            "LLVMDisposeErrorMessage": ([vp], None),
            "LLVMPrintModuleToFile": ([vp, cp, ctypes.POINTER(vp)], ctypes.c_int),
            "LLVMPrintModuleToString": ([vp], vp),
            "LLVMVerifyModule": ([vp, ctypes.c_int, ctypes.POINTER(vp)], ctypes.c_int),
            "LLVMGetFirstFunction": ([vp], vp),
            "LLVMGetNextFunction": ([vp], vp),
            "LLVMGetFirstBasicBlock": ([vp], vp),
            "LLVMGetNextBasicBlock": ([vp], vp),
            "LLVMGetFirstInstruction": ([vp], vp),
            "LLVMGetNextInstruction": ([vp], vp),
        }
        for name, (args, res) in sigs.items():
            fn = getattr(c, name)
            fn.argtypes = args
            fn.restype = res

    def take_message(self, ptr: int | None) -> str:
        if not ptr:
            return ""
        text = ctypes.string_at(ptr).decode(errors="replace")
        self.c.LLVMDisposeMessage(ptr)
        return text


def _open_library(path: str | None) -> tuple[str, ctypes.CDLL]:
    candidates = [path] if path else []
    env = os.environ.get("AWARE_LIBLLVM")
    if env:
        candidates.insert(0, env)
    candidates += list(LIBRARY_CANDIDATES)
    found = ctypes.util.find_library("LLVM-14")
    if found:
        candidates.append(found)
    errors = []
    for cand in candidates:
        try:
            return cand, ctypes.CDLL(cand)
        except OSError as exc:
            errors.append(str(exc))
    raise LlvmError("could not load libLLVM: " + "; ".join(errors))


_LIB: _Lib | None = None


def library() -> _Lib:
    global _LIB
    if _LIB is None:
        _LIB = _Lib()
    return _LIB


def translate_flag(flag: str) -> str | None:
    """Map one opt command-line flag to a new-PM pipeline element."""
    if flag in OPT_LEVELS:
        return OPT_LEVELS[flag]
    if flag.startswith("--O") and "-" + flag[2:] in OPT_LEVELS:
        return OPT_LEVELS["-" + flag[2:]]
    name = flag.lstrip("-")
    if name in LEGACY_TO_NEW_PM:
        return LEGACY_TO_NEW_PM[name]
    return name


class Module:
    """An LLVM module owned by its own context."""

    def __init__(self, path: str):
        lib = library()
        self._lib = lib
        self.ctx = lib.c.LLVMContextCreate()
        buf = ctypes.c_void_p()
        msg = ctypes.c_char_p()
        if lib.c.LLVMCreateMemoryBufferWithContentsOfFile(path.encode(), ctypes.byref(buf), ctypes.byref(msg)):
            err = (msg.value or b"").decode(errors="replace")
            lib.c.LLVMContextDispose(self.ctx)
            raise LlvmError(f"{path}: {err}")
        mod = ctypes.c_void_p()
        msg = ctypes.c_char_p()
        if lib.c.LLVMParseIRInContext(self.ctx, buf, ctypes.byref(mod), ctypes.byref(msg)):
            err = (msg.value or b"").decode(errors="replace")
            lib.c.LLVMContextDispose(self.ctx)
            raise LlvmError(f"{path}: {err}")
        self.ref = mod

    def run(self, pipeline: str) -> None:
        lib = self._lib
        opts = lib.c.LLVMCreatePassBuilderOptions()
        try:
            err = lib.c.LLVMRunPasses(self.ref, pipeline.encode(), None, opts)
        finally:
            lib.c.LLVMDisposePassBuilderOptions(opts)
        if err:
            msg_ptr = lib.c.LLVMGetErrorMessage(err)
            text = ctypes.string_at(msg_ptr).decode(errors="replace")
            lib.c.LLVMDisposeErrorMessage(msg_ptr)
            raise LlvmError(text)

    def verify(self) -> None:
        msg = ctypes.c_void_p()
        broken = self._lib.c.LLVMVerifyModule(self.ref, 2, ctypes.byref(msg))
        text = self._lib.take_message(msg.value)
        if broken:
            raise LlvmError(f"module verification failed: {text}")

    def instruction_count(self) -> int:
        c = self._lib.c
        total = 0
        fn = c.LLVMGetFirstFunction(self.ref)
        while fn:
            bb = c.LLVMGetFirstBasicBlock(fn)
            while bb:
                inst = c.LLVMGetFirstInstruction(bb)
                while inst:
                    total += 1
                    inst = c.LLVMGetNextInstruction(inst)
                bb = c.LLVMGetNextBasicBlock(bb)
            fn = c.LLVMGetNextFunction(fn)
        return total

    def to_text(self) -> str:
        return self._lib.take_message(self._lib.c.LLVMPrintModuleToString(self.ref))

    def write(self, path: str) -> None:
        msg = ctypes.c_void_p()
        if self._lib.c.LLVMPrintModuleToFile(self.ref, path.encode(), ctypes.byref(msg)):
            raise LlvmError(self._lib.take_message(msg.value))

    def close(self) -> None:
        if self.ref:
            self._lib.c.LLVMDisposeModule(self.ref)
            self._lib.c.LLVMContextDispose(self.ctx)
            self.ref = None

    def __enter__(self) -> "Module":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


_USAGE = "usage: aware-opt-llvm [--<pass>... | -O<level>] [-S] [-o <out>] [--instcount] [-disable-output] <input.ll>"


def main(argv: list[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    if "--version" in args or "-version" in args:
        print("LLVM version 14 (aware-opt-llvm ctypes driver)")
        return 0
    out_path = None
    inputs: list[str] = []
    flags: list[str] = []
    want_count = False
    disable_output = False
    i = 0
    while i < len(args):
        a = args[i]
        if a == "-o":
            if i + 1 >= len(args):
                print(_USAGE, file=sys.stderr)
                return 2
            out_path = args[i + 1]
            i += 2
            continue
        if a in ("-S", "--S"):
            pass
        elif a in ("--instcount", "-instcount"):
            want_count = True
        elif a in ("-disable-output", "--disable-output"):
            disable_output = True
        elif a.startswith("-"):
            flags.append(a)
        else:
            inputs.append(a)
        i += 1
    if len(inputs) != 1:
        print(_USAGE, file=sys.stderr)
        return 2
    try:
        with Module(inputs[0]) as mod:
            for flag in flags:
                pipeline = translate_flag(flag)
                if pipeline is None:
                    print(f"warning: {flag} has no new-PM equivalent; skipped", file=sys.stderr)
                    continue
                try:
                    mod.run(pipeline)
                except LlvmError as exc:
                    print(f"aware-opt-llvm: {flag}: {exc}", file=sys.stderr)
                    return 1
            mod.verify()
            if want_count:
                print(mod.instruction_count())
            if not disable_output and out_path is not None:
                mod.write(out_path)
            elif not disable_output and not want_count:
                sys.stdout.write(mod.to_text())
    except LlvmError as exc:
        print(f"aware-opt-llvm: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
