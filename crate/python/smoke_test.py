"""Smoke test for the Python extension.

Builds the cdylib with cargo unless PYANTHROSCORE_LIB points at a built
library (or the module is already importable, e.g. after `maturin develop`).

    python3 python/smoke_test.py
"""

import importlib.util
import math
import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        import pyanthroscore  # noqa: F401

        return pyanthroscore
    except ImportError:
        pass
    lib = os.environ.get("PYANTHROSCORE_LIB")
    if lib is None:
        subprocess.run(
            ["cargo", "build", "--release", "-p", "anthroscore-py", "--features", "extension-module"],
            cwd=ROOT,
            check=True,
        )
        ext = {"darwin": "dylib", "win32": "dll"}.get(sys.platform, "so")
        prefix = "" if sys.platform == "win32" else "lib"
        lib = ROOT / "target" / "release" / f"{prefix}pyanthroscore.{ext}"
    tmp = Path(tempfile.mkdtemp())
    dst = tmp / ("pyanthroscore.pyd" if sys.platform == "win32" else "pyanthroscore.so")
    shutil.copy(lib, dst)
    spec = importlib.util.spec_from_file_location("pyanthroscore", dst)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    pa = load()
    inv = pa.PronounInventory.reference()
    assert len(inv) == 11 and inv.human[0] == "he", inv

    uniform = {p: 0.05 for p in inv.human + inv.non_human}
    a = pa.anthroscore(uniform)
    assert abs(a - math.log(7 / 4)) < 1e-9, a
    # a hand computation with smoothing
    probs = dict.fromkeys(inv.human + inv.non_human, 0.0)
    probs.update(he=0.2, it=0.1)
    want = math.log((0.2 + 7e-12) / (0.1 + 4e-12))
    assert abs(pa.anthroscore(probs) - want) < 1e-12

    text = "The model learns the task. Then the system fails badly."
    spans = pa.split_sentences(text)
    assert len(spans) == 2, spans
    mentions = pa.mask_mentions(text, doc_id="d0")
    assert mentions, "no mentions"
    for m in mentions:
        assert m.reconstruct() == m.original_sentence
        assert m.masked_sentence.count(pa.PLACEHOLDER) == 1

    stub = pa.StubBackend()
    scores = stub.score(mentions)
    assert all(s is not None and abs(s - math.log(7 / 4)) < 1e-9 for s in scores), scores
    dist = stub.fill_mask("[MASK] works.")
    assert set(dist) == set(inv.human + inv.non_human)

    try:
        stub.fill_mask("no placeholder")
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    r, p = pa.spearman([1, 2, 3, 4], [2, 4, 6, 8], permutation=True)
    assert abs(r - 1) < 1e-12 and abs(p - 2 / 24) < 1e-12, (r, p)
    chi2, p = pa.chi_square_2x2([[10, 10], [10, 10]])
    assert chi2 == 0 and abs(p - 1) < 1e-12
    lo, hi = pa.bootstrap_ci([1.0, 2.0, 3.0, 4.0], 500, 7)
    assert lo <= 2.5 <= hi

    a_counts = {"learn": 30, "propose": 5, "show": 10}
    b_counts = {"learn": 5, "propose": 30, "show": 10}
    prior = {w: a_counts[w] + b_counts[w] for w in a_counts}
    words = pa.fightin_words(a_counts, b_counts, prior)
    assert words[0][0] == "learn" and words[-1][0] == "propose", words

    print("python smoke test: ok (%d mentions, A = %.4f)" % (len(mentions), scores[0]))


if __name__ == "__main__":
    main()
