"""Command-line front end for the cvc5 Python bindings.

The cvc5 wheel ships no executable; this reads SMT-LIB2 from stdin (or a
file argument) and answers like the stock binary would.
"""

from __future__ import annotations

import sys


def main(argv=None) -> int:
    import cvc5

    args = [a for a in (sys.argv[1:] if argv is None else argv) if not a.startswith("--lang")]
    text = open(args[0]).read() if args else sys.stdin.read()
    tm = cvc5.TermManager()
    solver = cvc5.Solver(tm)
    symbols = cvc5.SymbolManager(tm)
    parser = cvc5.InputParser(solver, symbols)
    parser.setStringInput(cvc5.InputLanguage.SMT_LIB_2_6, text, "stdin")
    while True:
        try:
            cmd = parser.nextCommand()
            if cmd.isNull():
                return 0
            out = cmd.invoke(solver, symbols)
        except RuntimeError as exc:
            msg = str(exc).replace('"', "'").strip()
            sys.stdout.write(f'(error "{msg}")\n')
            sys.stdout.flush()
            return 1
        sys.stdout.write(out)
        sys.stdout.flush()


if __name__ == "__main__":
    sys.exit(main())
