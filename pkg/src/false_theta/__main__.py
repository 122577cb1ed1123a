"""Allow running as python -m false_theta."""

import sys

from false_theta import main

sys.exit(main())
