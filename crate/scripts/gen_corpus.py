#!/usr/bin/env python3
"""Generate the bundled synthetic corpus and its runtime table.

Instances come from five structural families. Runtimes are synthetic: each
family favours different encodings, scaled by instance size with seeded
log-normal noise. They stand in for real solver measurements so the
selection pipeline can be exercised end to end.
"""
import argparse
import csv
import math
import random
from pathlib import Path

ENCODINGS = ["Tree", "MDD", "GGT", "GGTd", "RGGT", "GSWC", "GGPW"]
TIMEOUT = 3600.0


def knapsack(rng, i):
    n = rng.randint(8, 14)
    lines = ["bool " + " ".join(f"b{j}" for j in range(n))]
    for _ in range(rng.randint(2, 4)):
        w = [rng.randint(1, 40) for _ in range(n)]
        terms = " + ".join(f"{c}*b{j}" for j, c in enumerate(w))
        lines.append(f"con {terms} <= {sum(w) // 2}")
    v = [rng.randint(1, 30) for _ in range(n)]
    lines.append("con " + " + ".join(f"{c}*b{j}" for j, c in enumerate(v)) + f" >= {sum(v) // 3}")
    return lines, n


def assignment(rng, i):
    k, m = rng.randint(3, 4), rng.randint(3, 4)
    lines = ["bool " + " ".join(f"x{a}_{b}" for a in range(k) for b in range(m))]
    for a in range(k):
        lines.append("con " + " + ".join(f"1*x{a}_{b}" for b in range(m)) + " <= 1")
    for b in range(m):
        cost = [rng.randint(1, 9) for _ in range(k)]
        lines.append("con " + " + ".join(f"{c}*x{a}_{b}" for a, c in enumerate(cost)) + f" <= {rng.randint(5, 12)}")
    tot = " + ".join(f"{rng.randint(1, 5)}*x{a}_{b}" for a in range(k) for b in range(m))
    lines.append(f"con {tot} >= {rng.randint(4, 10)}")
    return lines, k * m


def scheduling(rng, i):
    n = rng.randint(4, 7)
    lines = [f"int s{j} 0..{rng.randint(4, 8)}" for j in range(n)]
    for _ in range(n):
        a, b = rng.sample(range(n), 2)
        lines.append(f"con 1*s{a} + -1*s{b} <= {rng.randint(-2, 2)}")
    lines.append("con " + " + ".join(f"{rng.randint(1, 4)}*s{j}" for j in range(n)) + f" <= {rng.randint(8, 20)}")
    return lines, n * 2


def mixed(rng, i):
    n, m = rng.randint(4, 7), rng.randint(2, 3)
    lines = ["bool " + " ".join(f"p{j}" for j in range(n))]
    lines += [f"int y{j} {{{','.join(str(v) for v in sorted(rng.sample(range(-3, 10), 4)))}}}" for j in range(m)]
    for _ in range(rng.randint(3, 5)):
        ts = [f"{rng.choice([-1, 1]) * rng.randint(1, 9)}*p{j}" for j in rng.sample(range(n), 3)]
        ts += [f"{rng.randint(1, 5)}*(y{j} >= {rng.randint(0, 5)})" for j in range(m)]
        lines.append(f"con {' + '.join(ts)} {rng.choice(['<=', '>=', '!='])} {rng.randint(-2, 8)}")
    lines.append("con " + " + ".join(f"{rng.randint(1, 3)}*y{j}" for j in range(m)) + f" = {rng.randint(4, 12)}")
    return lines, n + 2 * m


def cardinality(rng, i):
    n = rng.randint(10, 16)
    lines = ["bool " + " ".join(f"c{j}" for j in range(n))]
    for _ in range(rng.randint(3, 5)):
        sub = rng.sample(range(n), rng.randint(4, n))
        lines.append("con " + " + ".join(f"1*c{j}" for j in sub) + f" {rng.choice(['<=', '>='])} {rng.randint(1, len(sub) - 1)}")
    return lines, n


FAMILIES = {
    "knapsack": (knapsack, {"GGPW": 0.4, "GSWC": 2.5, "MDD": 1.5}, {}),
    "assign": (assignment, {"GGT": 0.3, "RGGT": 0.4, "Tree": 1.6}, {}),
    "sched": (scheduling, {}, {"MDD": 0.3, "Tree": 0.6, "GGPW": 3.0}),
    "mixed": (mixed, {"Tree": 0.5, "GGTd": 0.7}, {"GSWC": 0.4, "GGT": 1.8}),
    "card": (cardinality, {"GSWC": 0.3, "GGTd": 0.5, "GGPW": 2.0}, {}),
}


def runtime(rng, fam, size, li, pb):
    _, pb_pref, li_pref = FAMILIES[fam]
    base = 0.01 * math.exp(size / 1.2)
    t = base * pb_pref.get(pb, 1.0) * li_pref.get(li, 1.0) * math.exp(rng.gauss(0.0, 0.35))
    return t


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--per-family", type=int, default=8)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    out = Path(args.out)
    corpus = out / "corpus"
    corpus.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    rows = []
    for fam, (gen, _, _) in FAMILIES.items():
        for i in range(args.per_family):
            name = f"{fam}_{i:02d}"
            lines, size = gen(rng, i)
            (corpus / f"{name}.lipb").write_text(f"# family {fam}\n" + "\n".join(lines) + "\n")
            for li in ENCODINGS:
                for pb in ENCODINGS:
                    t = runtime(rng, fam, size, li, pb)
                    to = t >= TIMEOUT
                    rows.append((name, fam, f"{li}_{pb}", round(min(t, TIMEOUT), 4), int(to)))
    with open(out / "runtimes.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["instance", "class", "config", "runtime_s", "timed_out"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
