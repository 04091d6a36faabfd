#!/usr/bin/env python
# The full stack at desk scale, then a short tampering experiment through the harness.
import json

import numpy as np

from nmcode.harness import ExperimentConfig, run
from nmcode.pipeline import PipelineParams, build_pipeline

pl = build_pipeline(PipelineParams())
print(json.dumps({"k": pl.coder.k, "n": pl.coder.n, "stages": [s.name for s in pl.coder.stages],
                  "plugin": pl.plugin.tag, "open constraints": pl.violations}, indent=2))

rng = np.random.default_rng(1)
x = np.array([1, 0, 1, 1], dtype=np.uint8)
c = pl.coder.encode(x, rng)
print("codeword weight:", int(c.sum()), "of", c.size)
print("decoded:", pl.coder.decode(c))

flipped = c.copy()
flipped[:50] ^= 1
print("after flipping 50 bits:", pl.coder.decode(flipped))

cfg = ExperimentConfig("pipeline", PipelineParams().to_json(), trials=100, adversary="identity",
                       messages=["1011"])
rep = run(cfg)
for key, cell in rep["results"]["adversaries"]["identity"].items():
    print("message", key, "stage distances", [round(d, 3) for d in cell["stage_distances"]],
          "end to end", round(cell["end_to_end"], 3))
print("verdicts pass:", rep["ok"])
