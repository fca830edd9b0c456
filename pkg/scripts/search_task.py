#!/usr/bin/env python3
"""Evolve proxy tasks against probe groundtruths (full-scale defaults:
population 50, tournament sample 10, 400 iterations).

    python scripts/search_task.py --bench data/bench32.csv --probes 20 \
        --out results/task_best.json --trace results/task_trace.jsonl
"""

import sys

from regnas import cli


def main():
    argv = ["task-search"] + sys.argv[1:]
    return cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
