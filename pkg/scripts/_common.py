"""Shared helpers for the experiment scripts."""

import argparse
import hashlib
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src"))


def parse_out(name: str, description: str):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default=os.path.join("results", name), help="output directory")
    p.add_argument("--quick", action="store_true", help="fewer samples")
    return p.parse_args()


def params_hash(params: dict) -> str:
    return hashlib.sha256(json.dumps(params, sort_keys=True, separators=(",", ":")).encode()).hexdigest()
