"""Which scenarios the closed form accepts.

Three conditions gate the approximation: the pair must be unbound (B > 0),
the angular rate must stay below 1 rad/s, and the separation must exceed
A/|B| so that the binomial truncation is justified. This script runs the
``check`` logic over the bundled scenarios and shows the exit code the CLI
would return.
"""

import contextlib
import io
from pathlib import Path

from lambert3b.cli import main

fixtures = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
for name in ("pinned", "deep_escape", "bound", "fast_spin", "near_threshold"):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(["check", str(fixtures / f"{name}.toml")])
    fields = dict(line.split("=") for line in out.getvalue().splitlines())
    print(f"{name:<15} exit {code}  " + "  ".join(f"{k}={v}" for k, v in fields.items()))
    if err.getvalue():
        print(f"{'':<15} {err.getvalue().strip()}")
