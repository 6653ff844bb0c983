"""Module entry point: ``python -m cran_sched ...``."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
