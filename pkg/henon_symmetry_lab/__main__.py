import sys

from henon_symmetry_lab.cli import main

sys.exit(main())
