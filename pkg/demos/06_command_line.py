"""Driving the pipeline from the command line.

Generates a shape file, flattens it, and computes a distance, all through
``python3 -m gaussflat``. Files go to a temporary directory.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run(*args):
    proc = subprocess.run([sys.executable, "-m", "gaussflat", *args], capture_output=True, text=True)
    print("$ gaussflat", " ".join(args), f"  (exit {proc.returncode})")
    if proc.stdout:
        print(proc.stdout.rstrip()[:600])
    if proc.stderr:
        print(proc.stderr.rstrip())
    return proc


with tempfile.TemporaryDirectory() as tmp:
    d = Path(tmp)
    (d / "curve.shape").write_text(json.dumps(
        {"kind": "graph", "base": [[1, 0]], "height": "sin", "amplitude": 0.05, "count": 200}))
    run("gen", "--input", str(d / "curve.shape"), "--output", str(d / "curve.json"))
    run("flatten", "--input", str(d / "curve.json"), "--format", "csv")
    run("mean", "--input", str(d / "curve.json"))
    run("dist", "--input", str(d / "curve.json"), "--input", str(d / "curve.json"))
    run("probe", "--input", str(d / "curve.json"), "--jitters", "0.125,0.0625,0.03125", "--format", "csv")
    # invalid input: alpha above its cap
    run("flatten", "--input", str(d / "curve.json"), "--alpha", "1.0")
