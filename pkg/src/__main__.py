"""`python -m src` 실행 진입점"""

import sys

from .cli import main

sys.exit(main())
