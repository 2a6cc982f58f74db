"""Regenerate the bundled JSON fixtures in src/pmmlab/data from pmmlab.fixtures."""

import json
from pathlib import Path

from pmmlab import fixtures
from pmmlab.io import decomposition_to_json, pattern_to_json

OUT = Path(__file__).resolve().parents[1] / "src" / "pmmlab" / "data"


def write(name, obj):
    (OUT / name).write_text(json.dumps(obj, indent=1) + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write("lambda_ex.json", pattern_to_json(fixtures.lambda_ex()))
    write("lambda_bcrl.json", pattern_to_json(fixtures.lambda_bcrl()))
    write("binary_pattern.json", pattern_to_json(fixtures.BINARY_POINTS))
    write("example_decomp.json", decomposition_to_json(fixtures.example_border_decomposition()))
    write("example_decomp_flipped.json", decomposition_to_json(fixtures.example_border_decomposition(True)))
    write("laser_diagonal.json", {
        "support": [[1, 1, 1], [2, 2, 2]],
        "Q": ["1/2", "1/2"],
        "asym_rank": 10,
        "witness": {"u": [0, 1], "v": [0, 1], "w": [0, -2]},
        "blocks": [
            {"at": [1, 1, 1], "pattern": "lambda_ex", "rate": [1, 0.918295834, 0.666666666]},
            {"at": [2, 2, 2], "pattern": "lambda_ex", "rate": [1, 1, 0.5]},
        ],
    })


if __name__ == "__main__":
    main()
