"""Smoke test for the Python bindings.

Build the module first:
    cargo build --release -p borncoarse-py --features extension-module
then run this script from the repository root.
"""

import importlib.machinery
import importlib.util
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    lib = ROOT / "target" / "release" / "libborncoarse_py.so"
    if not lib.exists():
        sys.exit(f"missing {lib}; build it with --features extension-module")
    loader = importlib.machinery.ExtensionFileLoader("borncoarse_py", str(lib))
    spec = importlib.util.spec_from_loader("borncoarse_py", loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    bc = load()
    hyperbola = (ROOT / "fixtures" / "hyperbola.instance").read_text()
    shift = (ROOT / "fixtures" / "shift.instance").read_text()

    flags = dict(bc.classify(hyperbola))
    assert flags["weakly"] == "yes", flags
    assert flags["b_proper"].startswith("no"), flags

    assert dict(bc.theorem(shift, "main"))["status"] == "confirmed"
    assert dict(bc.theorem(hyperbola, "main", window=32))["status"] == "refuted"

    checked = dict(bc.crosscheck([shift, hyperbola], window=12))
    assert checked["failed"] == "0", checked

    text = bc.random_instance(3, "lattice-k1")
    assert bc.normalize(text) == text

    code, out, _ = bc.run(["--format", "machine", "classify", str(ROOT / "fixtures" / "shift.instance")])
    assert code == 0 and "b_proper=yes" in out, out

    try:
        bc.classify("not an instance")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed text was accepted")
    print("python smoke test ok")


if __name__ == "__main__":
    main()
