"""
Entry point for the clique_reduction package.
"""
import sys
from .cli import main

if __name__ == "__main__":
    sys.exit(main())
