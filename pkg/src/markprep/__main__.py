"""Allow `python -m markprep` as an alternative to the console script."""

from __future__ import annotations

from markprep.cli import main

if __name__ == "__main__":
    main()
