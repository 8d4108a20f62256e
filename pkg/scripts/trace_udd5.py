#!/usr/bin/env python3
"""Mid-sequence error trace for UDD5 (minimum interval 1 us) on the gaas preset.

Emits t,chi,coherence to stdout. The stored state is only cleanly
recoverable at the sequence end: chi(t) is orders of magnitude above the
final value for almost all interior t, with a narrow echo-like revival
near t = 2 us where the first pulse refocuses the slow noise.
"""

import numpy as np

from ddmemory import bang_bang, chi_during, load_preset, udd_from_min_interval


def main() -> None:
    spec = load_preset("gaas")
    p = udd_from_min_interval(5, 1e-6)
    shape = bang_bang()
    grid = np.unique(np.concatenate([
        np.linspace(p.duration / 300, p.duration, 300),
        np.linspace(1.6e-6, 2.4e-6, 33),
    ]))
    print("t,chi,coherence")
    for t in grid:
        b = chi_during(p, float(t), spec, shape)
        print(f"{float(t)!r},{b.chi_total!r},{b.coherence!r}")


if __name__ == "__main__":
    main()
