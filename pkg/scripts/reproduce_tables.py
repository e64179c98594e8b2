"""Print the AWGN comparison tables (M-PSK SEP and DQPSK BEP) as CSV."""

import sys

from kappamu_aep.cli import main

if __name__ == "__main__":
    code = main(["table2"] + sys.argv[1:])
    print()
    code = code or main(["table4"] + sys.argv[1:])
    raise SystemExit(code)
