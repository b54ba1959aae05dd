"""Smoke test for the `hcs` extension module.

Build and install first:  pip install --no-build-isolation ./crates/py
"""

import json
import math

import hcs


def agm(a, b):
    for _ in range(60):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return a


def main():
    g = hcs.GroupElement.parse("2,1;1,1")
    k1, h, k2 = hcs.cartan(g)
    back = (k1 * hcs.GroupElement.exp_diagonal(h) * k2).rows()
    err = max(abs(x - y) for r, s in zip(back, g.rows()) for x, y in zip(r, s))
    assert err < 1e-12, err
    assert abs(g.length() - math.hypot(*h)) < 1e-12

    t = 3.0
    a = hcs.GroupElement.exp_diagonal([t / 2, -t / 2])
    exact = 1.0 / agm(1.0, math.cosh(t / 2))
    for method in ("boundary", "iwasawa", "adaptive"):
        v = hcs.xi(a, method=method)
        assert abs(v / exact - 1) < 1e-9, (method, v, exact)

    value, tail = hcs.cd_constant(3.0, cutoff=20.0)
    assert abs(value - 0.0749472540064) < 1e-4 and tail < 1e-4, (value, tail)
    try:
        hcs.cd_constant(1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("d = 1 must be rejected")

    ball = hcs.Ball("sanov", 3)
    assert [ball.prefix_len(r) for r in range(4)] == [1, 5, 17, 53]
    assert ball.word(0) == "e"
    kesten = ball.sphere_norm_lower(1, 8)
    assert 3.0 < kesten <= 2 * math.sqrt(3) + 1e-9, kesten

    bundle = json.loads(hcs.verify(
        "group = sl2z\nradius = 3\nR = 6\nsamples = 40\npairs = 4\n"
        "deterministic = true\nsuite = cauchy-schwarz, stability\n"))
    for r in bundle["reports"]:
        assert r["passed"], r["statement_id"]
    print("smoke ok: Xi(a_3) = %.12f, C_3 = %.10f, |S_1| norm >= %.6f"
          % (exact, value, kesten))


if __name__ == "__main__":
    main()
