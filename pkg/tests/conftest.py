"""Make the package importable when the tests run without installation.

The compiled extension is only present after a build; the import fallback
in ``rtangle.kernels`` keeps everything functional either way.
"""
import sys
from pathlib import Path

try:
    import rtangle  # noqa: F401
except ImportError:
    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
