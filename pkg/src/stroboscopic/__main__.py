import sys

from stroboscopic.cli import main

sys.exit(main())
