#!/usr/bin/env python3
"""Smoke test for the qasp_py extension module.

Copies the built shared library next to this script under the importable
name, then exercises parsing, coherence, model enumeration and the QBF
translation. Build the module first with `cargo build -p qasp-py`.
"""

import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def import_module():
    for profile in ("debug", "release"):
        built = ROOT / "target" / profile / "libqasp_py.so"
        if built.exists():
            target = HERE / "qasp_py.so"
            if not target.exists() or built.stat().st_mtime > target.stat().st_mtime:
                shutil.copyfile(built, target)
            break
    else:
        sys.exit("libqasp_py.so not found; run `cargo build -p qasp-py` first")
    sys.path.insert(0, str(HERE))
    import qasp_py

    return qasp_py


EXAMPLE = """\
%@exists
a(1) | a(2).
%@forall
b(1) | b(2) :- a(1).
b(2) :- a(2).
%@constraint
:- b(1), not b(2).
"""

QBF_TRUE = """\
p cnf 2 2
a 1 0
e 2 0
-1 2 0
1 -2 0
"""


def main():
    qasp_py = import_module()

    prog = qasp_py.Program(EXAMPLE)
    assert prog.levels == 2
    assert prog.existential
    assert prog.coherent()
    assert prog.models() == [["a(2)"]], prog.models()
    assert "a(1) | a(2)." in prog.ground()

    # A universal program is incoherent as soon as one branch fails.
    universal = "%@forall\na(1) | a(2).\n%@constraint\n:- a(1).\n"
    assert not qasp_py.Program(universal).coherent()
    assert not qasp_py.Program(universal).existential

    assert qasp_py.answer_sets("a :- not b. b :- not a.") == [["b"], ["a"]]

    assert qasp_py.eval_qbf(QBF_TRUE)
    translated = qasp_py.from_qbf(QBF_TRUE)
    assert translated.coherent()
    assert "x1 :- not nx1." in str(translated)

    try:
        qasp_py.Program("%@constraint\n")
        raise AssertionError("empty prefix must be rejected")
    except ValueError:
        pass

    for line in qasp_py.selftest(seed=1, count=25):
        print(line)
    print("smoke test passed")


if __name__ == "__main__":
    main()
