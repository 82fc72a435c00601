import sys

from lightgratipy.cli import main

sys.exit(main())
