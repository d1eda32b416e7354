"""End-to-end command line workflow on a JSON experiment config.

Every subcommand reads one JSON config, writes plot-ready CSV plus a JSON
report, and drops a manifest with the config echo, seed, worker count and
library versions.  Exit code 0 means the selected verdict passed, 1 a
runtime/verdict failure, 2 a config error.
"""

import json
import pathlib
import tempfile

from levy_homogenize import cli

cfg = {
    "medium": {"period": 1.0,
               "fourier_V": [[1, 0.3, 0.1]],
               "fourier_loga": [[1, 0.2, -0.1]]},
    "kernel": {"family": "linear", "C": 1.0, "alpha": 1.0},
    "n_paths": 50,
    "sim": {"eps": 0.4, "t_max": 0.5},
    "eps_list": [0.4, 0.2],
    "grid_n": 256,
}

root = pathlib.Path(tempfile.mkdtemp(prefix="levy-demo-"))
cfg_path = root / "experiment.json"
cfg_path.write_text(json.dumps(cfg, indent=2))

for sub in ("validate", "simulate", "corrector", "exponent"):
    out = root / sub
    rc = cli.main([sub, str(cfg_path), "--out", str(out), "--seed", "7"])
    files = sorted(p.name for p in out.iterdir())
    print(f"  -> exit {rc}; wrote {', '.join(files)}\n")

man = json.loads((root / "corrector" / "manifest.json").read_text())
print("manifest of the corrector run:")
print(f"  seed={man['seed']}  workers={man['workers']}"
      f"  wall={man['wall_time_s']:.2f}s  numpy={man['versions']['numpy']}")
print(f"\nall outputs under {root}")
