"""Recompute the committed Sobol' baseline (src/lowdisc/data/sobol_baseline.json).

Run only when the generator or optimizer changes on purpose; the test suite
compares fresh computations against the committed file.  With ``--check`` the
file is left alone and every cell is compared at 1e-12 instead.
"""

import json
import pathlib
import sys

from lowdisc.experiments import build_sobol_baseline

target = pathlib.Path(__file__).resolve().parents[1] / "src" / "lowdisc" / "data" / "sobol_baseline.json"
doc = build_sobol_baseline()
if "--check" in sys.argv:
    committed = json.loads(target.read_text())["cells"]
    drifted = []
    for key, entry in doc["cells"].items():
        old, new = committed[key]["value"], entry["value"]
        if (old is None) != (new is None) or (new is not None and abs(new - old) > 1e-12):
            drifted.append(key)
            print(f"{key}: committed {old!r}, now {new!r}")
    print(f"{len(doc['cells']) - len(drifted)} cells match, {len(drifted)} drifted")
    sys.exit(1 if drifted else 0)
target.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
print(f"wrote {target}")
