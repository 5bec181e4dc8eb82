"""Success counts within a timeout for generated exchange pools, by pool size
and recourse budget.  Thin wrapper over ``recourse-match bench``."""
import sys

from recourse_match.cli import main

DEFAULTS = ["bench", "--family", "kep", "--sizes", "10,15,20", "--budgets", "0,1,2,3,inf",
            "--instances", "10", "--density", "0.25", "--timeout", "60"]

if __name__ == "__main__":
    sys.exit(main(DEFAULTS + sys.argv[1:]))
