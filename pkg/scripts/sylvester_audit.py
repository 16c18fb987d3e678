"""Audit the structured Sylvester coefficient bounds on random block pairs.

Usage: python3 scripts/sylvester_audit.py [--cases N] [--max-size M] [--seed S]
"""

import sys

from qep_perturb.cli import main

if __name__ == "__main__":
    args = sys.argv[1:]
    if "--cases" not in args:
        args = ["--cases", "1000", *args]
    sys.exit(main(["sylvester-audit", *args]))
