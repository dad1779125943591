import sys

from qcsync.cli import main

sys.exit(main())
