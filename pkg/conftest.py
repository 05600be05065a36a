"""Shared pytest setup for the root test scripts"""

import sys
from pathlib import Path

# Make `src` importable when pytest runs from another directory
sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "statistical: Monte-Carlo test checked against an analytic distribution"
    )
