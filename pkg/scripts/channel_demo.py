"""Write a synthetic pool corpus as PPM files, then rank transforms by the
information they keep and show which one each budget level selects.

    python scripts/channel_demo.py --out /tmp/pool
"""

import argparse
from pathlib import Path

from hrimap.obschannel import (
    ChannelBudget,
    apply_transform,
    bits_required,
    expected_preserved_info,
    pnm,
    pool_corpus,
    select_transform,
    write_corpus,
)

CANDIDATES = ["identity", "downsample(2)", "grayscale", "grayscale | downsample(2)", "edge_detect(otsu)", "binarize(otsu)"]


def main():
    ap = argparse.ArgumentParser(description="Observation-channel demo on a synthetic pool corpus.")
    ap.add_argument("--out", type=Path, default=Path("pool_corpus"))
    ap.add_argument("--images", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    paths = write_corpus(pool_corpus(args.images, args.seed), args.out)
    frames = [pnm.read(p) for p in paths]
    print(f"wrote {len(paths)} frames to {args.out}\n")

    print(f"{'transform':<28} {'bits':>9} {'E[I] bits':>10}")
    for h in CANDIDATES:
        bits = bits_required(apply_transform(h, frames[0]))
        print(f"{h:<28} {bits:>9} {expected_preserved_info(h, frames):>10.4f}")

    full = bits_required(frames[0])
    print(f"\n{'budget':>9}  selection")
    for frac in (1.0, 0.5, 1 / 3, 1 / 12, 1 / 24, 1 / 100):
        sel = select_transform(CANDIDATES, frames[0], ChannelBudget.constant(max(1, int(full * frac))), 0.0)
        flag = "  (over budget)" if sel.over_budget else ""
        print(f"{int(full * frac):>9}  {sel.name} [{sel.bits} bits, {sel.information:.3f}]{flag}")


if __name__ == "__main__":
    main()
