import sys

from impulsive.mechanics.cli import main

sys.exit(main())
