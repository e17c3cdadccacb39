"""Module entry point: ``python -m imbilliards`` behaves like ``imbil``."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
