import sys

from rhea.cli import main

sys.exit(main())
