"""Compile the mini-corpus C sources to textual IR and write the manifest."""
import argparse
import json
import subprocess
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "aware_opt" / "data"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--clang", default="clang")
    args = ap.parse_args()
    out_dir = DATA / "corpus"
    out_dir.mkdir(exist_ok=True)
    programs = []
    for src in sorted((DATA / "corpus_src").glob("*.c")):
        out = out_dir / (src.stem + ".ll")
        subprocess.run(
            [args.clang, "-O0", "-Xclang", "-disable-O0-optnone", "-S", "-emit-llvm",
             "-fno-discard-value-names", "-o", str(out), str(src)],
            check=True,
        )
        # Drop the host-specific identification line so outputs are stable.
        text = out.read_text().replace(f"; ModuleID = '{src}'", f"; ModuleID = '{src.name}'")
        text = "\n".join(l for l in text.splitlines() if not l.startswith("!llvm.ident") and "clang version" not in l)
        out.write_text(text + "\n")
        programs.append({"id": src.stem, "ir_path": out.name})
    manifest = {"suites": [{"name": "mini", "programs": programs}]}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    print(f"wrote {len(programs)} programs")


if __name__ == "__main__":
    main()
