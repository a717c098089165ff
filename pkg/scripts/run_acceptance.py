"""Run the acceptance suite and write verify_<suite>.json.

    python3 scripts/run_acceptance.py [--suite full] [--out results/acceptance]
"""

import argparse
import os
import sys

import _common  # noqa: F401  (puts src on the path)

from curveft.cli import main

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--suite", default="full")
    p.add_argument("--out", default=os.path.join("results", "acceptance"))
    args = p.parse_args()
    os.makedirs(args.out, exist_ok=True)
    sys.exit(main(["verify", "--suite", args.suite, "--out", args.out]))
