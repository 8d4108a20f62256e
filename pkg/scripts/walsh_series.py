#!/usr/bin/env python3
"""Walsh-family minimum-error search versus storage time on the gaas preset.

Slot width 1 us, storage times 2 us .. 1024 us (all powers of two).  Emits
the winner per storage time; for large T_s the winners settle into
repetitions of the 16-slot Thue-Morse block and the winning chi flattens
at the plateau level.
"""

from ddmemory import load_preset, search_series


def main() -> None:
    spec = load_preset("gaas")
    tau = 1e-6
    t_s_list = [tau * 2**q for q in range(1, 11)]
    print("t_s,walsh_index,label,pulses,chi,coherence,base_block,repeats")
    for res in search_series(tau, t_s_list, spec):
        det = res.detected_structure
        base = det.base.label if det else res.winner.label
        reps = det.repeats if det else 1
        print(f"{res.t_s!r},{res.winner_index},{res.winner.label},"
              f"{res.winner.n_pulses},{res.chi.chi_total!r},{res.chi.coherence!r},"
              f"{base},{reps}")


if __name__ == "__main__":
    main()
