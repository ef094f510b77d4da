"""Does the potential channel help retrieval?

Four shape families appear with both potential polarities, giving eight
classes whose members come in geometrically identical pairs. The geometry
descriptor can only get the shape right; the potential-split descriptor can
also tell the polarity apart.

    python3 demos/04_polarity_benchmark.py
"""

import time

from surfret import build_index, classify_nn, confusion, format_table, score
from surfret.benchmark import make_polarity_benchmark
from surfret.pipeline import describe_mesh

bench = make_polarity_benchmark(seed=0)
for method in ("zernike121", "zernike363"):
    t0 = time.perf_counter()
    desc = {split: [(i, label, describe_mesh(m, method)) for i, label, m in items]
            for split, items in bench.items()}
    index = build_index([(i, label, d.values, d.volume) for i, label, d in desc["train"]])
    truth = {i: label for i, label, _ in desc["test"]}
    pred = {i: classify_nn(d, index).predicted_label for i, _, d in desc["test"]}
    shape_ok = sum(pred[i].split("-")[0] == truth[i].split("-")[0] for i in truth) / len(truth)
    report = score(confusion(truth, pred))
    print(f"== {method} ({time.perf_counter() - t0:.0f} s), shape-only accuracy {shape_ok:.2f}")
    print(format_table(report))
    print()
