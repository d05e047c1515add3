#!/usr/bin/env python3
"""Regenerate the checked-in WDVV fixture JSON from the programmatic builders.

Run from the repository root after editing the builders in biham.wdvv:

    python scripts/regen_wdvv_fixtures.py
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from biham import wdvv
from biham.operators import operator_to_json


def main() -> None:
    out_dir = pathlib.Path(__file__).resolve().parents[1] / "src" / "biham" / "data" / "wdvv3"
    out_dir.mkdir(parents=True, exist_ok=True)

    def dump(name, payload):
        path = out_dir / name
        path.write_text(json.dumps(payload, indent=2) + "\n")
        print("wrote", path)

    dump("a1_source.json", operator_to_json(wdvv.first_structure_source()))
    dump("a2_source.json", operator_to_json(wdvv.second_structure_source()))
    dump("transform.json", {
        "source": list(wdvv.SOURCE_COORDS),
        "target": list(wdvv.FLAT_COORDS),
        "source_in_target": {
            name: str(expr)
            for name, expr in zip(wdvv.SOURCE_COORDS, wdvv.point_transform().source_in_target)
        },
    })
    dump("system.json", {
        "K": [[str(x) for x in row] for row in wdvv.K_MATRIX],
        "hamiltonian": "u1*u2*u3",
    })


if __name__ == "__main__":
    main()
