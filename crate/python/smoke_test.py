"""Smoke test for the Python bindings.

Build first:  pip install --no-build-isolation -e crates/py
"""
import math

import pysoapbubble as sb

DISK = {"family": "ball", "N": 2, "params": {"rho": 1.0}}


def main():
    dom = sb.Domain(DISK, h=1 / 64)
    assert dom.dim == 2
    assert dom.contains([0.0, 0.0]) and not dom.contains([1.5, 0.0])

    s = dom.summary()
    assert abs(s["volume"] - math.pi) < 1e-6, s["volume"]
    assert s["delta"] < 1e-6, s["delta"]

    u = dom.solve()
    # u = (|x|^2 - 1)/2 on the unit disk
    assert abs(u.max_neg_u - 0.5) < 1e-3, u.max_neg_u
    assert abs(u.u_at([0.3, 0.4]) + 0.375) < 1e-3
    g = u.grad_at([0.3, 0.4])
    assert abs(g[0] - 0.3) < 1e-2 and abs(g[1] - 0.4) < 1e-2

    vol = dom.tubular_volume(0.1)
    assert abs(vol - math.pi * (1 - 0.9**2)) < 5e-2, vol

    led = sb.constants_ledger(2, 2.0, 0.5, 1.0, math.pi)
    assert abs(led["alpha"] - 2 / 11) < 1e-12

    rep = sb.analyze(dict(DISK, name="py-disk", grid_h=1 / 64))
    assert rep["kind"] == "analyze"
    (r,) = rep["reports"]
    assert not r["violations"], r["violations"]
    assert r["decomposition"]["m"] == 1

    try:
        sb.Domain({"family": "ball", "N": 2, "params": {"rho": -1.0}})
    except ValueError:
        pass
    else:
        raise AssertionError("negative radius accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
