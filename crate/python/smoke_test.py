"""Smoke test for the uqreg Python extension.

Build it with `maturin develop -m crates/python/Cargo.toml`, or copy
target/<profile>/libuqreg_py.so to a directory on sys.path as uqreg.so.
"""

import json
import math

import uqreg


def close(a, b, tol=1e-8):
    return abs(a - b) <= tol


def main():
    q = uqreg.SecondOrder.nig(0.0, 1.0, 2.0, 1.0)
    assert q.family == "gaussian"
    assert q.mean_params() == [0.0, 1.0]

    ent = uqreg.measure(q, "entropy")
    assert close(ent.tu, 1.41893853), ent
    assert close(ent.au, 1.20754637), ent
    assert close(ent.eu, 0.711392168), ent

    var = uqreg.measure(q, "variance")
    assert (var.au, var.eu, var.tu, var.additivity_gap) == (1.0, 1.0, 2.0, 0.0), var

    pareto = uqreg.SecondOrder.from_toml("exponential", "{ law = 'pareto', alpha = 1.5 }")
    h = uqreg.measure(pareto, "entropy")
    assert close(h.eu, 0.368054378), h
    assert close(h.tu, 1 - math.log(3)), h

    sharp = uqreg.SecondOrder.dirac("exponential", [2 * math.e])
    assert close(uqreg.measure(sharp, "entropy").au, -math.log(2), 1e-12)

    ens = uqreg.SecondOrder.mixture("gaussian", [[-1.0, 0.5], [1.0, 0.5]])
    total, aleatoric, epistemic = uqreg.oracle_variance(ens, 20000, seed=1)
    exact = uqreg.measure(ens, "variance")
    assert abs(aleatoric[0] - exact.au) <= 4 * aleatoric[1] + 1e-12
    assert abs(epistemic[0] - exact.eu) <= 4 * epistemic[1] + 1e-12

    mc = uqreg.measure(q, "variance", mc_samples=20000, seed=3)
    assert mc.se_au is not None and abs(mc.au - 1.0) <= 4 * mc.se_au

    for rid in uqreg.REPRO_IDS:
        assert json.loads(uqreg.reproduce(rid))["agrees"], rid

    report = json.loads(uqreg.run_axioms("variance"))
    assert all(r["status"] == r["expected"] for r in report["summary"] if r.get("expected"))

    try:
        uqreg.SecondOrder.nig(0.0, 1.0, 0.5, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("alpha <= 1 accepted")

    print("uqreg python smoke test: ok")


if __name__ == "__main__":
    main()
