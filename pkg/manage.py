#!/usr/bin/env python
"""Command-line utility for running lab experiments."""
import sys


def main():
    """Run the requested experiment."""
    try:
        from api.cli import main as cli_main
    except ImportError as exc:
        raise ImportError(
            "Couldn't import the lab packages. Are numpy, scipy and pydantic "
            "installed and available on your PYTHONPATH environment variable? "
            "Did you forget to activate a virtual environment?"
        ) from exc
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == '__main__':
    main()
