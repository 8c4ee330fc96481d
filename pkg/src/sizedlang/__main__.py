import sys

from sizedlang.cli import main

sys.exit(main())
