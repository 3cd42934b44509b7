"""Smoke test for the `ecoepi` extension module.

Build and install first, e.g.

    pip install --no-build-isolation -e crates/python
    python python/smoke_test.py
"""

import math

import ecoepi


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    assert close(ecoepi.mittag_leffler(1.0, 1.0), math.e, 1e-14)
    assert close(ecoepi.mittag_leffler(0.5, -1.0), math.exp(1.0) * math.erfc(1.0), 1e-13)
    assert close(ecoepi.mittag_leffler(1.0, 2.0, beta=2.0), (math.exp(2.0) - 1.0) / 2.0, 1e-13)

    assert "example1" in ecoepi.presets()
    p = ecoepi.Params.preset("example1")
    assert close(p.r0(), 15.0 / 7.0, 1e-15)
    assert p["K"] == 40.0

    cubic = ecoepi.characteristic_cubic(p)
    assert close(cubic["A1"], 1.0879, 5e-4)
    assert close(cubic["D"], 0.0077, 5e-4)

    t = ecoepi.thresholds(p)
    assert close(t["theta1"], 0.1723, 5e-4)

    half = p.replace("theta", 0.5)
    estar = [e for e in ecoepi.equilibria(half) if e["kind"] == "E*"][0]
    assert estar["exists"]
    for x, y in zip(estar["state"], (35.7195, 3.2927, 8.9983)):
        assert close(x, y, 5e-3)

    verdict = ecoepi.classify(ecoepi.Params.preset("example1-unstable"), "E*", 0.85)
    assert not verdict["stable"] and verdict["case"] == "(iii)", verdict

    traj = ecoepi.simulate(half, 0.95, (30.0, 5.0, 10.0), step=0.05, t_end=300.0)
    assert len(traj) == 6001
    assert all(close(x, y, 0.05) for x, y in zip(traj.last, estar["state"])), traj.last

    try:
        ecoepi.simulate(p, 1.2, (30.0, 5.0, 10.0))
    except ValueError:
        pass
    else:
        raise AssertionError("order 1.2 accepted")

    try:
        ecoepi.simulate(ecoepi.Params.preset("example1-unstable"), 1.0, (10.0, 20.0, 5.0), t_end=100.0)
    except ecoepi.DivergenceError:
        pass
    else:
        raise AssertionError("expected divergence")

    print("ecoepi smoke test passed")


if __name__ == "__main__":
    main()
