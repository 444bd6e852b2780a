import os
import sys

# The ctest registration points these at the built extension and the source
# package so the suite runs without an install step.
for var in ("BDNN_MODULE_DIR", "BDNN_PACKAGE_DIR"):
    path = os.environ.get(var)
    if path and path not in sys.path:
        sys.path.insert(0, path)
