import sys

from qimp.cli import main

sys.exit(main())
