#!/usr/bin/env python3
"""Per-class F under no balancing, equal-size undersampling and oversampling."""

from __future__ import annotations

import argparse
import csv
import warnings
from pathlib import Path

import numpy as np

from gep.learn import cross_validate
from gep.pipeline import PipelineConfig, dataset_for
from gep.synth import SynthConfig

MODES = ("none", "equal-size", "oversample")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--windows", type=int, default=40)
    ap.add_argument("--kind", default="random-forest")
    ap.add_argument("--out", default="results/balancing")
    a = ap.parse_args()

    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for seed in a.seeds:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ds = dataset_for(PipelineConfig(synth=SynthConfig(windows=a.windows, seed=seed).to_dict()))
        counts = ds.class_counts()
        med = np.median(list(counts.values()))
        for mode in MODES:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                rep = cross_validate(ds, a.kind, seed=0, balancing=mode).aggregate
            for c in rep.classes:
                rows.append({"stream": seed, "balancing": mode, "class": c, "support": counts[c], "minority": counts[c] < med, "f": rep.f_of(c)})
            print(f"stream {seed}  {mode:10s} plain F {rep.plain_f:.3f}")

    with (out / "per_class.csv").open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    for mode in MODES:
        minor = [r["f"] for r in rows if r["balancing"] == mode and r["minority"]]
        print(f"{mode:10s} minority mean F {np.mean(minor):.3f}")


if __name__ == "__main__":
    main()
