"""Rewrite tests/golden from the packaged fixtures.

    python scripts/regen_goldens.py

Review the diff (and open the SVGs) before committing new goldens; they pin
matplotlib's SVG output, so a matplotlib upgrade can change them.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "tests"))

import goldens  # noqa: E402


def main():
    os.makedirs(goldens.GOLDEN, exist_ok=True)
    for name in goldens.RUNS:
        for path in goldens.run(name, goldens.GOLDEN):
            print(os.path.relpath(path))


if __name__ == "__main__":
    main()
