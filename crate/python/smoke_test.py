"""Smoke test for the moduli_walls_py extension.

Build and run from the repository root:

    cargo build --release -p moduli-walls-py --features extension-module
    python3 python/smoke_test.py

The script copies target/release/libmoduli_walls_py.so next to itself as
moduli_walls_py.so when no importable module is found.
"""

import cmath
import math
import os
import shutil
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(HERE)


def load():
    sys.path.insert(0, HERE)
    try:
        import moduli_walls_py
        return moduli_walls_py
    except ImportError:
        pass
    for ext in ("so", "dylib"):
        built = os.path.join(ROOT, "target", "release", "libmoduli_walls_py." + ext)
        if os.path.exists(built):
            shutil.copy(built, os.path.join(HERE, "moduli_walls_py.so"))
            break
    else:
        sys.exit("extension not built; see the module docstring")
    import moduli_walls_py
    return moduli_walls_py


def check(name, ok):
    print(("PASS " if ok else "FAIL ") + name)
    return ok


def main():
    mw = load()
    results = []

    seed = mw.BranchDivisor(complex(1.8, 0.31606005), complex(2.0, 1.0))
    d = mw.normalize(seed)
    results.append(check("even periods vanish", max(d.period_residuals) < 1e-9))

    wall = mw.find_wall(seed)
    dw = mw.normalize(wall)
    results.append(check("eta(-1) = i*pi at the wall", abs(dw.eta(-1) - 1j * math.pi) < 1e-7))
    results.append(check("wall classifies as GammaZero", dw.graph_type() == "GammaZero"))

    t, weights = mw.forward(mw.BranchDivisor(wall.e1 + 0.01j, wall.e2))
    results.append(check("forward on the plus side", t == "GammaPlus" and weights["H0"] > 0))

    guess = mw.BranchDivisor(wall.e1 + 0.012j + 0.001, wall.e2 - 0.001)
    e, res = mw.inverse(weights, guess)
    t2, w2 = mw.forward(e)
    gap = max(abs(w2[k] - weights[k]) for k in ("H0", "H1", "H2", "W"))
    results.append(check("inverse round trip", res < 1e-8 and gap < 1e-8))

    x = mw.expansion_data(wall)
    a, b4, z = mw.alpha_beta(wall)
    results.append(check("alpha^3 = 1/(3 w(z))", abs(a ** 3 - 1 / (3 * x["w_z"])) < 1e-12 * a ** 3))
    rel = max(
        abs(br[q] - br[q + "_residue"]) / abs(br[q + "_residue"])
        for br in x["branches"]
        for q in ("IC", "ICy")
    )
    results.append(check("residues match quadrature", rel < 1e-6))

    try:
        mw.BranchDivisor(complex(1.8, -0.3), complex(2.0, 1.0))
        results.append(check("lower half plane rejected", False))
    except ValueError:
        results.append(check("lower half plane rejected", True))

    svg = mw.render_svg(wall)
    results.append(check("svg rendered", svg.startswith("<svg") and "vertex" in svg))

    print("%d/%d passed" % (sum(results), len(results)))
    sys.exit(0 if all(results) else 1)


if __name__ == "__main__":
    main()
