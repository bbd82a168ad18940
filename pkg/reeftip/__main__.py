"""Run the reeftip command line."""

from __future__ import annotations

import sys

from .cli import run

if __name__ == "__main__":
    raise SystemExit(run(sys.argv[1:]))
