"""Console entry point.

Pins the numerical backends to one thread before numpy loads, so command
outputs are byte-identical regardless of the machine's core count.  Library
imports are unaffected; only the ``qwork`` executable forces this.
"""

import os
import sys

_THREAD_VARS = (
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "OMP_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def main(argv=None) -> int:
    for var in _THREAD_VARS:
        os.environ[var] = "1"
    from .cli import main as cli_main

    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
