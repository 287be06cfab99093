import sys

from metametrics.cli import main

sys.exit(main())
