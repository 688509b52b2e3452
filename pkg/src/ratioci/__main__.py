import sys

from ratioci.cli import main

sys.exit(main())
