import sys

from ebcap.cli import main

sys.exit(main())
