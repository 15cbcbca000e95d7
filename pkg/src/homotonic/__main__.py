import sys

from homotonic.cli import main

sys.exit(main())
