"""
Entry point for running the package as a module.

This allows running the package with:
    python -m lowzero
"""

from lowzero.cli import main

if __name__ == "__main__":
    main()
