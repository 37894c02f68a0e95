# tomllib ships with Python 3.11; newer releases are untested
import sys


if sys.version_info[:2] < (3, 11) or sys.version_info[:2] > (3, 13):
    print(
        "Warning: Python {ver} is not supported, use 3.11-3.13".format(
            ver=".".join(map(str, sys.version_info[:3]))
        )
    )
