"""Write a line-parallel oracle corpus pair (oracle.src / oracle.tgt)."""

import argparse

from bitextmine.synthetic import write_oracle_fixture

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir")
    ap.add_argument("--pairs", type=int, default=100)
    args = ap.parse_args()
    for path in write_oracle_fixture(args.pairs, args.out_dir):
        print(path)
