"""Smoke test for the `ornament` Python extension.

Build the extension first:

    cargo build --offline -p ornament-python --features extension-module

then run `python3 python/smoke_test.py [path/to/libornament.so]`.
"""

import importlib.util
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module(lib_path: Path):
    tmp = Path(tempfile.mkdtemp())
    target = tmp / "ornament.so"
    shutil.copy(lib_path, target)
    spec = importlib.util.spec_from_file_location("ornament", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module, tmp


def main() -> int:
    default = ROOT / "target" / "debug" / "libornament.so"
    lib = Path(sys.argv[1] if len(sys.argv) > 1 else os.environ.get("ORNAMENT_LIB", default))
    if not lib.exists():
        print(f"extension not found at {lib}; build it with cargo first", file=sys.stderr)
        return 1
    orn, tmp = load_module(lib)

    names = orn.group_names()
    assert len(names) == 17 and names[0] == "p1", names
    catalog = orn.catalog()
    assert len(catalog if isinstance(catalog, list) else catalog["groups"]) == 17

    pattern = orn.generate_random("p4m", 256, 256, cell=64.0, seed=5)
    assert (pattern.width, pattern.height) == (256, 256)
    assert len(pattern.to_bytes()) == 256 * 256 * 3
    sig = orn.classify(pattern)
    assert sig.group == "p4m", sig
    assert sig.highest_order == 4
    assert sig.to_dict()["group"] == "p4m"
    png = tmp / "p4m.png"
    pattern.save(str(png))
    assert orn.classify(orn.Pattern.load(str(png))).group == "p4m"
    assert orn.annotate_pattern(pattern, sig).width == 256
    cell = orn.unit_cell(pattern, sig)
    assert cell.width > 0 and cell.height > 0

    flat = orn.Pattern(32, 32, bytes([128]) * (32 * 32 * 3))
    try:
        orn.classify(flat)
    except orn.NoPeriodicityError:
        pass
    else:
        raise AssertionError("flat image classified")
    try:
        orn.generate_random("p7")
    except orn.OrnamentError as e:
        assert "p7" in str(e)
    else:
        raise AssertionError("unknown group accepted")

    assert orn.kendall_tau(["a", "b", "c"], ["a", "b", "c"]) == 0
    assert orn.kendall_tau(["a", "b", "c"], ["c", "b", "a"]) == 3
    assert orn.normalized_kendall(["a", "b", "c"], ["b", "a", "c"]) == 1 / 3

    tasks = {
        "tasks": [
            {
                "taskId": "t1",
                "queryOrnamentId": "q",
                "optionOrnamentIds": ["a", "b"],
                "mode": "pick-similar",
            }
        ]
    }
    lines = [
        json.dumps({"participantId": f"p{i}", "taskId": "t1", "mostSimilar": "a" if i < 3 else "b"})
        for i in range(4)
    ]
    report = orn.analyze("\n".join(lines) + "\n", json.dumps(tasks))
    assert report["experiment"] == 2
    sim = report["similarity"]
    q, a = sim["labels"].index("q"), sim["labels"].index("a")
    assert abs(sim["values"][q][a] - 0.75) < 1e-12

    labels = [f"o{i}" for i in range(12)]
    dist = [[0.0 if i == j else (0.1 if (i < 6) == (j < 6) else 1.0) for j in range(12)] for i in range(12)]
    emb = orn.tsne(labels, dist, dims=3, seed=2, perplexity=3.0, iterations=400)
    assert len(emb["points"]) == 12 and len(emb["points"][0]) == 3
    assert len(emb["rgb"]) == 12
    for axis in range(3):
        vals = [c[axis] for c in emb["rgb"]]
        assert min(vals) == 0 and max(vals) == 255
    assert orn.tsne(labels, dist, dims=3, seed=2, perplexity=3.0, iterations=400)["points"] == emb["points"]

    shutil.rmtree(tmp)
    print("python smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
