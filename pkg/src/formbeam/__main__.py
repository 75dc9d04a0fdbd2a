import sys

from formbeam.cli import main

sys.exit(main())
