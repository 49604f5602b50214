import sys

from lpgame.cli import main

sys.exit(main())
