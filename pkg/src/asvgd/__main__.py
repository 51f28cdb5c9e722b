import sys

from asvgd.cli import main

sys.exit(main())
