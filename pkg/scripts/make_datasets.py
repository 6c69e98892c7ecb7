#!/usr/bin/env python3
"""Generate the desk-scale datasets used by the experiments.

Writes three MOL1 containers into the output directory:

* ``textures_train.mol1`` / ``textures_test.mol1`` -- the 4-class oriented
  multi-scale texture problem (16x16 grayscale), test split standardized
  with the training statistics;
* ``fractal.mol1`` -- unlabeled-ish (all class 0 of 2) 1/f-spectrum images
  at 32x32 for the information-curve and spectral analyses.
"""

import argparse

import numpy as np

from datamoll.mol1 import save_mol1
from datamoll.streams import derive_seed
from datamoll.synth import fractal_textures, grating_dataset, standardized_dataset
from datamoll.tensors import compute_channel_stats


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--train-count", type=int, default=4096)
    parser.add_argument("--test-count", type=int, default=1024)
    parser.add_argument("--fractal-count", type=int, default=256)
    args = parser.parse_args()

    from pathlib import Path

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    raw_train, labels_train = grating_dataset(
        args.train_count, seed=derive_seed(args.seed, 101)
    )
    raw_test, labels_test = grating_dataset(args.test_count, seed=derive_seed(args.seed, 102))
    stats = compute_channel_stats(list(raw_train))
    train = standardized_dataset(
        raw_train, labels_train, 4, provenance=f"textures-train seed={args.seed}", stats=stats
    )
    test = standardized_dataset(
        raw_test, labels_test, 4, provenance=f"textures-test seed={args.seed}", stats=stats
    )
    save_mol1(train, out / "textures_train.mol1")
    save_mol1(test, out / "textures_test.mol1")

    fractal = fractal_textures(args.fractal_count, 32, 32, seed=derive_seed(args.seed, 103))
    ds = standardized_dataset(
        fractal,
        np.zeros(args.fractal_count, dtype=np.int64),
        2,
        provenance=f"fractal seed={args.seed}",
    )
    save_mol1(ds, out / "fractal.mol1")
    print(f"wrote {out}/textures_train.mol1 ({args.train_count} images)")
    print(f"wrote {out}/textures_test.mol1 ({args.test_count} images)")
    print(f"wrote {out}/fractal.mol1 ({args.fractal_count} images)")


if __name__ == "__main__":
    main()
