#!/usr/bin/env python3
"""Run the whole verification portfolio and print a one-line-per-check
summary: catalog traces, model batteries, stabilizer oracles, and the
interferometric identity suite."""
import time

import numpy as np

from qorigami import anyons, interferometry as itf, origami, stabilizer


def main() -> int:
    failures = 0

    print("== origami catalog ==")
    start = time.monotonic()
    for name in origami.catalog_names():
        report = origami.verify_protocol(origami.builtin_protocol(name))
        if report.get("skipped"):
            print(f"  {name:22s} skipped ({report['reason']})")
            continue
        ok = report["transversal"] and report["closed"] and report["match"]
        failures += not ok
        print(f"  {name:22s} {'ok' if ok else 'FAIL'}  trace={report['trace']}")
    print(f"  catalog time {time.monotonic() - start:.1f}s")

    print("== modular data ==")
    models = ["toric_code", "double_semion", "ising", "fibonacci"]
    for name in models + ["laughlin"]:
        k = 3 if name == "laughlin" else None
        model = anyons.builtin_model(name, k=k)
        report = anyons.verify_modular_data(model)
        ok = all(report["checks"].values())
        failures += not ok
        print(f"  {model.name:22s} {'ok' if ok else 'FAIL'}")

    print("== stabilizer oracle ==")
    toric = anyons.builtin_model("toric_code")
    ras = stabilizer.symplectic_from_unitary(
        anyons.rep_on_torus(toric, "Ra S"))
    for L in (2, 3, 4):
        code = stabilizer.build_toric_torus(L)
        perm = stabilizer.geometric_permutation(code, "reflect_diagonal")
        act = stabilizer.logical_action(code, perm)
        ok = np.array_equal(act["symplectic"], ras)
        failures += not ok
        print(f"  torus L={L} reflect_diagonal {'ok' if ok else 'FAIL'}")
    genon = stabilizer.build_bilayer_genon_code(6)
    for protocol, word in (("genon_mirror_swap", "Ra S"),
                           ("genon_mirror_swap_mirror", "S")):
        act = stabilizer.protocol_action(
            genon, stabilizer.NAMED_PROTOCOLS[protocol])
        target = stabilizer.symplectic_from_unitary(
            anyons.rep_on_torus(toric, word))
        ok = np.array_equal(act["symplectic"], target)
        failures += not ok
        print(f"  genon L=6 {protocol:26s} {'ok' if ok else 'FAIL'}")

    print("== interferometry ==")
    worst = itf.four_beamsplitter_check(seed=0, samples=50)
    print(f"  four-beamsplitter worst defect {worst:.1e}")
    exponent = itf.timing_scaling_exponent()
    print(f"  timing residual exponent {exponent:.2f}")
    failures += exponent < 2.7

    print("FAILURES:", failures)
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
