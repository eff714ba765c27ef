"""Writes tests/fixtures/method_ratings.csv.

Each method gets 100 ratings (20 packet files x 5 raters) whose integer sums
hit the published two-decimal means exactly: mean = sum / 100.
"""

import csv
import random
from pathlib import Path

TARGETS = {  # method: (ci_sum, ca_sum)
    "m1": (318, 486),
    "m2": (326, 460),
    "m3": (323, 489),
    "m4": (363, 489),
}
FILES = [f"site19-{i:02d}" for i in range(1, 21)]
RATERS = [f"r{i}" for i in range(1, 6)]


def multiset(total, n, rng):
    base, extra = divmod(total, n)
    values = [base + 1] * extra + [base] * (n - extra)
    # Spread values with sum-preserving +1/-1 moves that stay inside [1, 5].
    for _ in range(n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i != j and values[i] < 5 and values[j] > 1:
            values[i] += 1
            values[j] -= 1
    rng.shuffle(values)
    assert sum(values) == total and all(1 <= v <= 5 for v in values)
    return values


def main():
    rng = random.Random(20240601)
    rows = []
    for method, (ci_sum, ca_sum) in TARGETS.items():
        n = len(FILES) * len(RATERS)
        ci = multiset(ci_sum, n, rng)
        ca = multiset(ca_sum, n, rng)
        keys = [(f, r) for f in FILES for r in RATERS]
        for (f, r), a, c in zip(keys, ca, ci):
            rows.append((f, method, r, a, c))
    rng.shuffle(rows)
    out = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "method_ratings.csv"
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["packet_file_id", "method", "rater_id", "ca", "ci"])
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
