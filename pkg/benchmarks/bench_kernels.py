"""Compare the compiled gate kernels against the pure-numpy fallback.

Runs the same dense-statevector workload in two subprocesses, one with
QBOLTZ_KERNELS=c and one with QBOLTZ_KERNELS=py, because the kernel
choice is fixed at import time.  The workload is one full reflection
substep on a 16-qubit system applied repeatedly to a random state.

Usage: python benchmarks/bench_kernels.py [repeats]
"""

from __future__ import annotations

import json
import os
import subprocess
import sys

WORKER = r"""
import json, os, sys, time
import numpy as np
from qboltz.cfl import build_cycle
from qboltz.kernels import ACTIVE_IMPL
from qboltz.layout import GridSpec, VelocityTable, build_layout
from qboltz.reflection import Box
from qboltz.sim import build_substep
from qboltz.statevector import StateVector

repeats = int(sys.argv[1])
grid = GridSpec((8, 8))
velocity = VelocityTable.from_lists([[1], [1]])
layout = build_layout(grid, velocity)
boxes = (Box((3, 3), (4, 4)),)
stepping = build_cycle(velocity.all_magnitudes()).substeps[0].stepping
substep = build_substep(layout, boxes, stepping)
gates = substep.gate_count()

rng = np.random.default_rng(11)
amps = rng.standard_normal(1 << layout.num_qubits) * 1j
amps += rng.standard_normal(1 << layout.num_qubits)
amps /= np.linalg.norm(amps)
state = StateVector(layout.num_qubits, amps)

state.apply(substep)  # warm up
start = time.perf_counter()
for _ in range(repeats):
    state.apply(substep)
elapsed = time.perf_counter() - start
print(json.dumps({
    "impl": ACTIVE_IMPL,
    "qubits": layout.num_qubits,
    "gates": gates,
    "repeats": repeats,
    "seconds": elapsed,
    "gates_per_sec": gates * repeats / elapsed,
}))
"""


def run_one(impl: str, repeats: int) -> dict:
    env = dict(os.environ, QBOLTZ_KERNELS=impl)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(repeats)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout)


def main() -> None:
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    results = []
    for impl in ("c", "py"):
        try:
            results.append(run_one(impl, repeats))
        except subprocess.CalledProcessError as exc:
            print(f"{impl}: failed\n{exc.stderr}", file=sys.stderr)
    for r in results:
        print(f"{r['impl']:>3}: {r['seconds']:.3f}s for {r['repeats']} substeps "
              f"of {r['gates']} gates on {r['qubits']} qubits "
              f"({r['gates_per_sec']:,.0f} gates/s)")
    if len(results) == 2 and results[0]["impl"] == "c":
        speedup = results[1]["seconds"] / results[0]["seconds"]
        print(f"compiled kernels are {speedup:.1f}x the numpy fallback")


if __name__ == "__main__":
    main()
