#!/usr/bin/env python3
"""Evolve architectures with the regression proxy as fitness and report the
best find plus its regret against the bench optimum.

    python scripts/search_arch.py --task combo --bench data/bench32.csv \
        --out results/arch_best.json --seed 0
"""

import sys

from regnas import cli


def main():
    argv = ["nas-search"] + sys.argv[1:]
    return cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
