#!/usr/bin/env python3
"""Pulse-width dichotomy for repeated CDD4 on the gaas preset.

Sweeps the repeat count m (storage time T_s = 16 us * m) for ideal pulses,
1 ns primitive rectangles, and 10 ns three-segment corrected pulses.  Ideal
and corrected pulses hold the coherence plateau out to T_s = 1 s; primitive
pulses leave the plateau and their error grows linearly with m.

Emits shape,m,t_s,chi,coherence to stdout.
"""

import numpy as np

from ddmemory import bang_bang, cdd, chi_repeated, dcg3, load_preset, primitive


def main() -> None:
    spec = load_preset("gaas")
    p = cdd(4, 1e-6)
    shapes = [
        ("bb", bang_bang()),
        ("primitive:1e-9", primitive(1e-9)),
        ("dcg:1e-8", dcg3(1e-8)),
    ]
    ms = sorted({int(m) for m in np.geomspace(1, 62500, 17).round()})
    print("shape,m,t_s,chi,coherence")
    for name, shape in shapes:
        for m in ms:
            b = chi_repeated(p, m, spec, shape)
            print(f"{name},{m},{m * p.duration!r},{b.chi_total!r},{b.coherence!r}")


if __name__ == "__main__":
    main()
