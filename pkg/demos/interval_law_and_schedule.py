"""The quasi-periodic updating law and its realization as a pilot pattern.

A user updated with frequency p should space its updates floor(1/p) or
floor(1/p)+1 blocks apart.  The credit scheduler below turns four users with
frequencies (3/4, 1, 3/4, 1/2) into a schedule with exactly 3 pilots per
block; the printed grid marks estimation blocks with 'x'.
"""

import numpy as np

from csisched import build_schedule, interval_distribution, schedule_stats

FREQS = np.array([0.75, 1.0, 0.75, 0.5])
PILOTS_PER_BLOCK = 3
SHOW_BLOCKS = 16


def main():
    print("optimal updating-interval law:")
    for p in (0.5, 0.75, 0.4, 0.9):
        d = interval_distribution(p)
        law = ", ".join(f"{n} blocks w.p. {w:.3f}" for n, w in sorted(d.as_dict().items()))
        print(f"  p = {p:4.2f}: {law}   (mean {d.mean_interval():.4f})")

    sched = build_schedule(FREQS, PILOTS_PER_BLOCK, horizon=2000, seed=None)
    freq, hists = schedule_stats(sched)
    print(f"\ncredit schedule, {PILOTS_PER_BLOCK} pilots per block, first {SHOW_BLOCKS} blocks:")
    marks = np.zeros((len(FREQS), SHOW_BLOCKS), dtype=bool)
    for i in range(SHOW_BLOCKS):
        marks[sched.assignments[i], i] = True
    for k, row in enumerate(marks):
        cells = " ".join("x" if m else "." for m in row)
        print(f"  user {k} (p={FREQS[k]:.2f}): {cells}")
    print("\nrealized over 2000 blocks:")
    for k in range(len(FREQS)):
        hist = ", ".join(f"{g}:{m:.3f}" for g, m in sorted(hists[k].items()))
        print(f"  user {k}: frequency {freq[k]:.4f}, interval histogram {{{hist}}}")


if __name__ == "__main__":
    main()
