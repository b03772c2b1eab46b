#!/usr/bin/env python3
import sys

from garland.cli.cli import main
from gkit.logging_setup import configure_logging

configure_logging()

if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
