"""Knowledge-guided LLVM pass-sequence optimization harness."""

__version__ = "0.1.0"
