import sys

from cpsu_distill.cli import main

sys.exit(main())
