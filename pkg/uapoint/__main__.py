"""Main module entry point for python -m uapoint."""

from .cli import main

if __name__ == "__main__":
    main()
