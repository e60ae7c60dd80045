"""Compiled vs numpy kernels on the cubic benchmark wave.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""
import argparse
import json
import time

import numpy as np

from fbwave import check_existence_D1, cubic_end_states, sign_pattern
from fbwave._kernels import KernelContext, compiled_available
from fbwave.models import VelocityLaw, build_diffusivity, build_flux
from fbwave.profile import xi_of_phi


def cubic_spec():
    v = VelocityLaw.quadratic()
    f = build_flux(v)
    D = build_diffusivity("HvSquared", v, sigma=0.25 ** 3 / 0.75, h=1.0)
    lm, lp = cubic_end_states(0.75, -0.25)
    return check_existence_D1(f, sign_pattern(D), lm, lp)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write timings here")
    args = ap.parse_args(argv)

    spec = cubic_spec()
    ctx = KernelContext(spec.flux, spec.diffusivity, spec.c, (spec.l_minus, spec.alpha, spec.l_plus))
    py = ctx.with_python()
    pts = np.linspace(spec.l_minus + 1e-6, spec.l_plus - 1e-6, 100_000)
    a = np.full(200, spec.alpha)
    b = np.linspace(spec.l_minus + 1e-6, spec.alpha - 1e-3, 200)

    cases = {
        "integrand (1e5 points)": lambda c: c.integrand(pts),
        "gk_integrate (200 pieces)": lambda c: c.gk_integrate(a, b),
        "dopri5 (alpha -> l_minus)": lambda c: c.dopri5(0.0, spec.alpha - 1e-7, -1, spec.l_minus,
                                                         spec.l_plus, spec.l_minus + 1e-8),
    }
    rows = []
    for name, fn in cases.items():
        t_py = best_of(lambda: fn(py), args.repeat)
        t_c = best_of(lambda: fn(ctx), args.repeat) if compiled_available() else float("nan")
        rows.append({"case": name, "python_s": t_py, "compiled_s": t_c, "speedup": t_py / t_c})
    os_flag = "FBWAVE_PURE_PYTHON"
    t_py = best_of(lambda: xi_of_phi(spec, force_python=True), args.repeat)
    t_c = best_of(lambda: xi_of_phi(spec), args.repeat)
    rows.append({"case": "xi_of_phi end to end", "python_s": t_py, "compiled_s": t_c,
                 "speedup": t_py / t_c})

    print(f"compiled backend available: {compiled_available()} (force numpy with {os_flag}=1)")
    print(f"{'case':<30}{'numpy [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for r in rows:
        print(f"{r['case']:<30}{r['python_s']:>12.4g}{r['compiled_s']:>14.4g}{r['speedup']:>10.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
