"""
Application Entry Point
Run this file to use the paintseq command line
"""

import os
import sys

from dotenv import load_dotenv

# Load environment variables from .env file - override ensures fresh values
load_dotenv(dotenv_path=os.path.join(os.path.dirname(__file__), '.env'), override=True)

from paintseq.cli import main  # noqa: E402


if __name__ == '__main__':
    sys.exit(main())
